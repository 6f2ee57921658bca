//! Average performance curves and the utilities derived from them.
//!
//! The APC is sampled at `n + 1` equally spaced iterations `0, b, ..., budget`
//! (`b = budget / n`), giving `d_1 .. d_{n+1}`. Then
//!
//! * `F_A = d_{n+1}` (mean best fitness),
//! * `B = sum_i (d_i + d_{i+1}) / 2 * b` (trapezoidal area),
//! * `F_B = B / (n b)`,
//! * `F_C = (Z_l F_A + F_B) / (1 + Z_l)`.
//!
//! Lower is better for every utility.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::optimizers::RunTrace;

pub const DEFAULT_INTERVALS: usize = 14;
pub const DEFAULT_Z_L: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Apc {
    pub mean_best: Vec<f64>,
    pub runs: usize,
    pub budget: usize,
}

impl Apc {
    /// Pointwise mean of best-so-far curves, summed in slice order.
    pub fn from_curves<C: AsRef<[f64]>>(curves: &[C]) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InvalidMetric("no traces to average".into()))?
            .as_ref();
        let len = first.len();
        if len < 2 {
            return Err(Error::InvalidMetric(
                "a trace needs at least two points".into(),
            ));
        }
        let mut sum = vec![0.0; len];
        for (k, curve) in curves.iter().enumerate() {
            let curve = curve.as_ref();
            if curve.len() != len {
                return Err(Error::InvalidMetric(format!(
                    "trace {k} has {} points, expected {len}",
                    curve.len()
                )));
            }
            for (s, v) in sum.iter_mut().zip(curve) {
                *s += v;
            }
        }
        let runs = curves.len();
        Ok(Self {
            mean_best: sum.into_iter().map(|s| s / runs as f64).collect(),
            runs,
            budget: len - 1,
        })
    }

    /// Pointwise mean of crate-native run traces.
    pub fn from_traces(traces: &[RunTrace]) -> Result<Self> {
        let curves: Vec<&[f64]> = traces.iter().map(|t| t.best.as_slice()).collect();
        Self::from_curves(&curves)
    }

    /// `d_1 .. d_{n+1}`.
    pub fn samples(&self, intervals: usize) -> Result<Vec<f64>> {
        let stride = interval_length(self.budget, intervals)?;
        Ok((0..=intervals)
            .map(|i| self.mean_best[i * stride])
            .collect())
    }
}

pub fn compute_apc(traces: &[RunTrace]) -> Result<Apc> {
    Apc::from_traces(traces)
}

/// `b = budget / n`, erroring when the budget does not split evenly.
pub fn interval_length(budget: usize, intervals: usize) -> Result<usize> {
    if intervals == 0 || budget == 0 || !budget.is_multiple_of(intervals) {
        return Err(Error::BudgetNotDivisible { budget, intervals });
    }
    Ok(budget / intervals)
}

pub fn utility_fa(apc: &Apc) -> f64 {
    apc.mean_best[apc.budget]
}

fn trapezoid_sum(d: &[f64]) -> f64 {
    d.windows(2).map(|w| (w[0] + w[1]) / 2.0).sum()
}

/// Trapezoidal area `B` under the APC.
pub fn utility_area(apc: &Apc, intervals: usize) -> Result<f64> {
    let b = interval_length(apc.budget, intervals)?;
    Ok(trapezoid_sum(&apc.samples(intervals)?) * b as f64)
}

pub fn utility_fb(apc: &Apc, intervals: usize) -> Result<f64> {
    Ok(trapezoid_sum(&apc.samples(intervals)?) / intervals as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    #[serde(rename = "F_A")]
    pub f_a: f64,
    #[serde(rename = "B")]
    pub b_area: f64,
    #[serde(rename = "F_B")]
    pub f_b: f64,
    #[serde(rename = "F_C")]
    pub f_c: f64,
    pub n: usize,
    #[serde(rename = "Z_l")]
    pub z_l: f64,
    pub d: Vec<f64>,
}

pub fn utility_fc(apc: &Apc, intervals: usize, z_l: f64) -> Result<UtilityReport> {
    if !(z_l >= 1.0 && z_l.is_finite()) {
        return Err(Error::InvalidMetric(format!("Z_l must be >= 1, got {z_l}")));
    }
    let d = apc.samples(intervals)?;
    let f_a = utility_fa(apc);
    let b_area = utility_area(apc, intervals)?;
    let f_b = utility_fb(apc, intervals)?;
    Ok(UtilityReport {
        f_a,
        b_area,
        f_b,
        f_c: (z_l * f_a + f_b) / (1.0 + z_l),
        n: intervals,
        z_l,
        d,
    })
}

/// Box-plot statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Quartiles by linear interpolation between order statistics at
/// `h = (k - 1) p`.
pub fn five_number(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() {
        return Err(Error::InvalidMetric(
            "five-number summary of an empty list".into(),
        ));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidMetric("NaN in five-number input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantile = |p: f64| {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    Ok(FiveNumber {
        min: sorted[0],
        q25: quantile(0.25),
        median: quantile(0.5),
        q75: quantile(0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Mann-Whitney U test result for `xs` against `ys`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value for the alternative "xs tends to be smaller".
    pub p_less: f64,
}

/// Normal approximation with tie and continuity correction.
pub fn mann_whitney(xs: &[f64], ys: &[f64]) -> Result<MannWhitney> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidMetric(
            "Mann-Whitney needs two non-empty samples".into(),
        ));
    }
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let mut pooled: Vec<(f64, bool)> = xs
        .iter()
        .map(|&v| (v, true))
        .chain(ys.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_x += avg_rank * pooled[i..=j].iter().filter(|p| p.1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(MannWhitney {
            u,
            z: 0.0,
            p_less: 0.5,
        });
    }
    // small U means xs ranks low
    let z = (u - mean + 0.5) / var.sqrt();
    let normal = Normal::standard();
    Ok(MannWhitney {
        u,
        z,
        p_less: normal.cdf(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apc(v: Vec<f64>) -> Apc {
        Apc::from_curves(&[v]).unwrap()
    }

    fn linear(budget: usize, from: f64, to: f64) -> Vec<f64> {
        (0..=budget)
            .map(|t| from + (to - from) * t as f64 / budget as f64)
            .collect()
    }

    /// Error-free transformation sum (Neumaier), independent of the plain
    /// running sum used by `from_curves`.
    fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for v in values {
            let t = s + v;
            c += if s.abs() >= v.abs() {
                (s - t) + v
            } else {
                (v - t) + s
            };
            s = t;
        }
        s + c
    }

    fn synthetic(runs: usize, budget: usize) -> Vec<Vec<f64>> {
        (0..runs)
            .map(|r| {
                let mut v = 100.0 + r as f64 * 1.37;
                (0..=budget)
                    .map(|t| {
                        v -= ((t * 7 + r * 3) % 5) as f64 * 0.113;
                        v
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn apc_of_one_trace_is_the_trace() {
        let t = vec![5.0, 4.0, 4.0, 1.0];
        assert_eq!(apc(t.clone()).mean_best, t);
        let two = Apc::from_curves(&[vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap();
        assert_eq!(two.mean_best, vec![2.0, 2.0]);
        assert_eq!(two.runs, 2);
        assert_eq!(two.budget, 1);
    }

    #[test]
    fn apc_rejects_bad_input() {
        assert!(Apc::from_curves::<Vec<f64>>(&[]).is_err());
        assert!(Apc::from_curves(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn apc_matches_compensated_summation() {
        let curves = synthetic(20, 140);
        let a = Apc::from_curves(&curves).unwrap();
        for (t, &m) in a.mean_best.iter().enumerate() {
            let oracle = compensated_sum(curves.iter().map(|c| c[t])) / 20.0;
            assert!((m - oracle).abs() < 1e-12, "t={t}");
        }
        let finals = compensated_sum(curves.iter().map(|c| c[140])) / 20.0;
        assert!((utility_fa(&a) - finals).abs() < 1e-12);
    }

    #[test]
    fn area_and_rescaled_area() {
        let c = apc(vec![3.5; 15]);
        assert_eq!(utility_area(&c, 14).unwrap(), 14.0 * 3.5);
        assert_eq!(utility_fb(&c, 14).unwrap(), 3.5);
        assert_eq!(utility_fa(&c), 3.5);

        let l = apc(linear(140, 10.0, 0.0));
        assert!((utility_area(&l, 14).unwrap() - 140.0 * 5.0).abs() < 1e-9);
        assert!((utility_fb(&l, 14).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(utility_fa(&l), 0.0);
    }

    #[test]
    fn non_divisible_budget_is_rejected() {
        let a = apc(vec![1.0; 142]);
        assert!(matches!(
            utility_fb(&a, 14),
            Err(Error::BudgetNotDivisible {
                budget: 141,
                intervals: 14
            })
        ));
        assert!(utility_fc(&a, 14, 4.0).is_err());
    }

    #[test]
    fn samples_start_at_iteration_zero() {
        let a = apc((0..=140).map(|t| 1000.0 - t as f64).collect());
        let d = a.samples(14).unwrap();
        assert_eq!(d.len(), 15);
        assert_eq!(d[0], 1000.0);
        assert_eq!(d[1], 990.0);
        assert_eq!(d[14], 860.0);
    }

    #[test]
    fn fc_combination() {
        let c = utility_fc(&apc(vec![7.25; 15]), 14, 4.0).unwrap();
        assert_eq!((c.f_a, c.f_b, c.f_c), (7.25, 7.25, 7.25));
        // F_A = 0 and F_B = 5: linear 10 -> 0
        let l = utility_fc(&apc(linear(140, 10.0, 0.0)), 14, 4.0).unwrap();
        assert!((l.f_c - 1.0).abs() < 1e-12);
        assert_eq!(l.d.len(), 15);
        assert!(utility_fc(&apc(vec![1.0; 15]), 14, 0.5).is_err());
    }

    #[test]
    fn utility_report_json_fields() {
        let r = utility_fc(&apc(vec![2.0; 15]), 14, 4.0).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["F_A", "B", "F_B", "F_C", "n", "Z_l", "d"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn five_number_quartiles() {
        let f = five_number(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(
            (f.min, f.q25, f.median, f.q75, f.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        let single = five_number(&[7.0]).unwrap();
        assert_eq!(
            single,
            FiveNumber {
                min: 7.0,
                q25: 7.0,
                median: 7.0,
                q75: 7.0,
                max: 7.0
            }
        );
        let four = five_number(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((four.q25, four.median, four.q75), (1.75, 2.5, 3.25));
        assert!(five_number(&[]).is_err());
    }

    #[test]
    fn mann_whitney_detects_shift() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = (0..20).map(|i| i as f64 + 15.0).collect();
        let r = mann_whitney(&xs, &ys).unwrap();
        assert!(r.p_less < 1e-4);
        let back = mann_whitney(&ys, &xs).unwrap();
        assert!(back.p_less > 0.99);
        let same = mann_whitney(&xs, &xs).unwrap();
        assert!((same.p_less - 0.5).abs() < 0.1);
    }

    #[test]
    fn mann_whitney_small_sample_reference() {
        // scipy.stats.mannwhitneyu([1,2,3,4], [3,5,6,7,8], alternative="less",
        // method="asymptotic") -> U = 1.5, p = 0.02454...
        let r = mann_whitney(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(r.u, 1.5);
        assert!((r.p_less - MW_REFERENCE_P).abs() < 1e-6, "{}", r.p_less);
    }

    const MW_REFERENCE_P: f64 = 0.024_545_058_161_303_784;

    fn monotone_curve() -> impl Strategy<Value = Vec<f64>> {
        (prop::collection::vec(0.0f64..5.0, 140), -50.0f64..50.0).prop_map(|(drops, start)| {
            let mut v = start;
            std::iter::once(start)
                .chain(drops.into_iter().map(|d| {
                    v -= d;
                    v
                }))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn fc_lies_between_fa_and_fb(curve in monotone_curve(), z_l in 1.0f64..10.0) {
            let r = utility_fc(&apc(curve), 14, z_l).unwrap();
            let tol = 1e-9 * (1.0 + r.f_b.abs());
            prop_assert!(r.f_a <= r.f_c + tol);
            prop_assert!(r.f_c <= r.f_b + tol);
        }

        #[test]
        fn utilities_are_affine_equivariant(
            curve in monotone_curve(),
            scale in prop::sample::select(vec![0.5, 1.0, 2.0, 4.0]),
            shift in prop::sample::select(vec![-8.0, 0.0, 3.0, 16.0]),
        ) {
            // quarter-integer curves keep every operation exact in binary
            let curve: Vec<f64> = curve.iter().map(|v| (v * 4.0).round() / 4.0).collect();
            let mapped: Vec<f64> = curve.iter().map(|v| scale * v + shift).collect();
            let a = utility_fc(&apc(curve), 14, 4.0).unwrap();
            let b = utility_fc(&apc(mapped), 14, 4.0).unwrap();
            let tol = 1e-9 * (1.0 + a.f_b.abs() * scale + shift.abs());
            prop_assert!((b.f_a - (scale * a.f_a + shift)).abs() <= tol);
            prop_assert!((b.f_b - (scale * a.f_b + shift)).abs() <= tol);
            prop_assert!((b.f_c - (scale * a.f_c + shift)).abs() <= tol);
        }

        #[test]
        fn apc_is_permutation_invariant(rot in 0usize..20) {
            let curves = synthetic(20, 28);
            let mut rotated = curves.clone();
            rotated.rotate_left(rot);
            let a = Apc::from_curves(&curves).unwrap();
            let b = Apc::from_curves(&rotated).unwrap();
            for (x, y) in a.mean_best.iter().zip(&b.mean_best) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

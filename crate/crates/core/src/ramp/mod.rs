//! Ramp-scheme classification of mutual-information curves, comparison with
//! the predicted parameters, and the exact ((2,3)) qutrit codec.

mod qutrit;

pub use qutrit::{cadd, encode233, reconstruct233, QutritShares, Reconstruction, SharePair};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{check_gap, epsilon_search, theoretical_ramp_params, TheoryRamp};
use crate::error::{Error, Result};
use crate::scrambling::{CurveRow, MICurve};

/// Which curve statistic the classification reads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifyMode {
    /// Mean over samples and subsets.
    #[default]
    Mean,
    /// Largest value for secrecy, smallest for recoverability.
    Worst,
}

impl fmt::Display for ClassifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifyMode::Mean => "mean",
            ClassifyMode::Worst => "worst",
        })
    }
}

impl FromStr for ClassifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(ClassifyMode::Mean),
            "worst" => Ok(ClassifyMode::Worst),
            other => Err(Error::Parse(format!("mode must be 'mean' or 'worst', got '{other}'"))),
        }
    }
}

/// Measured ramp parameters of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub b: usize,
    pub g: usize,
    pub gap: usize,
    pub rampiness: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mode: ClassifyMode,
    /// Smallest half-integer ε whose pure bound at `(N+s)/2 − ε` is within γ.
    pub epsilon_search: Option<f64>,
}

/// [`RampParams`] together with the unadjusted thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub params: RampParams,
    /// Largest ℓ with the secrecy statistic ≤ γ at every ℓ′ ≤ ℓ.
    pub b_raw: usize,
    /// Smallest ℓ with the recovery statistic ≥ I(R:S) − δ at every ℓ′ ≥ ℓ.
    pub g_raw: usize,
    /// The raw thresholds overlapped and `b` was lowered to `g − 1`.
    pub degenerate: bool,
}

fn statistics(row: &CurveRow, mode: ClassifyMode) -> (f64, f64) {
    match mode {
        ClassifyMode::Mean => (row.mean_i, row.mean_i),
        ClassifyMode::Worst => (row.max_i, row.min_i),
    }
}

/// Classifies `curve` and keeps the raw thresholds.
pub fn classify_detailed(
    curve: &MICurve,
    gamma: f64,
    delta: f64,
    i_rs: f64,
    mode: ClassifyMode,
) -> Result<Classification> {
    curve.validate()?;
    if !(gamma > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerances must be positive (γ = {gamma}, δ = {delta})"
        )));
    }
    if !i_rs.is_finite() || i_rs <= 0.0 {
        return Err(Error::InvalidParameter(format!("I(R:S) must be positive, got {i_rs}")));
    }
    let n = curve.n;
    let stats: Vec<(f64, f64)> = curve.rows.iter().map(|r| statistics(r, mode)).collect();
    let target = i_rs - delta;
    if stats[n].1 < target {
        return Err(Error::NoValidScheme(format!(
            "I at ℓ = N is {:.6}, below I(R:S) − δ = {target:.6}",
            stats[n].1
        )));
    }
    if stats[0].0 > gamma {
        return Err(Error::NoValidScheme(format!(
            "I at ℓ = 0 is {:.6}, above γ = {gamma}",
            stats[0].0
        )));
    }
    let b_raw = stats.iter().take_while(|s| s.0 <= gamma).count() - 1;
    let g_raw = n + 1 - stats.iter().rev().take_while(|s| s.1 >= target).count();
    let g = g_raw.max(1);
    let degenerate = b_raw >= g;
    let b = if degenerate { g - 1 } else { b_raw };
    let gap = g - b;
    check_gap(gap, 1)?;
    let params = RampParams {
        n,
        s: curve.s as f64,
        b,
        g,
        gap,
        rampiness: gap as f64 / n as f64,
        gamma,
        delta,
        mode,
        epsilon_search: epsilon_search(n as u32, curve.s as u32, gamma),
    };
    Ok(Classification {
        params,
        b_raw,
        g_raw,
        degenerate,
    })
}

/// Ramp parameters `(b, g)` of `curve` at tolerances `γ`, `δ`; `i_rs` is the
/// full `I(R:S)` in bits. Fails when the curve never reaches `I(R:S) − δ`.
pub fn classify(curve: &MICurve, gamma: f64, delta: f64, i_rs: f64, mode: ClassifyMode) -> Result<RampParams> {
    classify_detailed(curve, gamma, delta, i_rs, mode).map(|c| c.params)
}

/// Measured thresholds against one predicted pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryComparison {
    pub epsilon: f64,
    pub theory: TheoryRamp,
    /// Measured `b`, `g` within half a player of the prediction.
    pub b_matches: bool,
    pub g_matches: bool,
}

impl TheoryComparison {
    fn new(params: &RampParams, epsilon: f64) -> Result<Self> {
        let theory = theoretical_ramp_params(params.n as u32, params.s, epsilon)?;
        Ok(Self {
            epsilon,
            b_matches: (params.b as f64 - theory.b).abs() <= 0.5,
            g_matches: (params.g as f64 - theory.g).abs() <= 0.5,
            theory,
        })
    }

    pub fn matches(&self) -> bool {
        self.b_matches && self.g_matches
    }
}

/// Predicted rampiness at one player count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampinessRow {
    pub n: usize,
    /// `2ε/N` for the user's ε, capped at one.
    pub rampiness: f64,
    /// ε found by [`epsilon_search`] at the run's γ and s.
    pub searched_epsilon: Option<f64>,
    pub searched_rampiness: Option<f64>,
}

/// Output of [`validate_against_theory`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub measured: RampParams,
    pub user: TheoryComparison,
    pub searched: Option<TheoryComparison>,
    /// The prediction is the trivial `((N, N))` scheme.
    pub trivial: bool,
    pub rampiness_table: Vec<RampinessRow>,
}

/// Player counts listed in the rampiness table, plus the run's own `N`.
pub const RAMPINESS_TABLE_N: [usize; 6] = [4, 6, 8, 10, 12, 16];

/// Compares measured parameters with the prediction for the user's ε and for
/// the searched ε.
pub fn validate_against_theory(params: &RampParams, epsilon: f64) -> Result<TheoryReport> {
    let user = TheoryComparison::new(params, epsilon)?;
    let searched = match params.epsilon_search {
        Some(e) => Some(TheoryComparison::new(params, e)?),
        None => None,
    };
    let trivial = user.theory.b >= params.n as f64 && user.theory.g >= params.n as f64;
    let mut ns: Vec<usize> = RAMPINESS_TABLE_N.to_vec();
    if !ns.contains(&params.n) {
        ns.push(params.n);
        ns.sort_unstable();
    }
    let s = params.s.round() as u32;
    let rampiness_table = ns
        .into_iter()
        .map(|n| {
            let searched_epsilon = epsilon_search(n as u32, s, params.gamma);
            RampinessRow {
                n,
                rampiness: (2.0 * epsilon / n as f64).min(1.0),
                searched_epsilon,
                searched_rampiness: searched_epsilon.map(|e| (2.0 * e / n as f64).min(1.0)),
            }
        })
        .collect();
    Ok(TheoryReport {
        measured: params.clone(),
        user,
        searched,
        trivial,
        rampiness_table,
    })
}

fn fmt_comparison(f: &mut fmt::Formatter<'_>, label: &str, c: &TheoryComparison) -> fmt::Result {
    writeln!(
        f,
        "{label}: eps = {}, theory (b, g) = ({}, {}), gap {}, rampiness {:.4}, {}",
        c.epsilon,
        c.theory.b,
        c.theory.g,
        c.theory.gap,
        c.theory.rampiness,
        if c.matches() { "match" } else { "mismatch" }
    )
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.measured;
        writeln!(
            f,
            "measured: N = {}, s = {}, mode = {}, gamma = {}, delta = {}",
            m.n, m.s, m.mode, m.gamma, m.delta
        )?;
        writeln!(
            f,
            "measured (b, g) = ({}, {}), gap {}, rampiness {:.4}",
            m.b, m.g, m.gap, m.rampiness
        )?;
        fmt_comparison(f, "user epsilon", &self.user)?;
        match &self.searched {
            Some(c) => fmt_comparison(f, "searched epsilon", c)?,
            None => writeln!(f, "searched epsilon: none within range")?,
        }
        if self.trivial {
            writeln!(f, "prediction is the trivial ((N, N)) scheme")?;
        }
        writeln!(f, "thresholds use the evaluated subsets only")?;
        writeln!(f)?;
        writeln!(f, "N  rampiness(user eps)  searched eps  rampiness(searched)")?;
        for r in &self.rampiness_table {
            let se = r.searched_epsilon.map_or("-".into(), |e| e.to_string());
            let sr = r.searched_rampiness.map_or("-".into(), |x| format!("{x:.4}"));
            writeln!(f, "{:<3}{:<21.4}{:<14}{}", r.n, r.rampiness, se, sr)?;
        }
        Ok(())
    }
}

/// Rampiness of several classified runs, sorted by `N`.
pub fn measured_rampiness(runs: &[RampParams]) -> Vec<(usize, usize, f64)> {
    let mut rows: Vec<_> = runs.iter().map(|p| (p.n, p.gap, p.rampiness)).collect();
    rows.sort_by_key(|r| r.0);
    rows
}

/// Strictly decreasing rampiness with `N`.
pub fn rampiness_decreasing(rows: &[(usize, usize, f64)]) -> bool {
    rows.windows(2).all(|w| w[1].2 < w[0].2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(values: &[f64]) -> MICurve {
        curve_with_spread(values, 0.0)
    }

    fn curve_with_spread(values: &[f64], spread: f64) -> MICurve {
        let n = values.len() - 1;
        MICurve {
            n,
            s: 0,
            rows: values
                .iter()
                .enumerate()
                .map(|(l, &v)| CurveRow {
                    l,
                    mean_i: v,
                    min_i: (v - spread).max(0.0),
                    max_i: (v + spread).min(2.0),
                    std_error: 0.0,
                    subsets: 1,
                    samples: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn step_curve_is_threshold() {
        for k in 1..=6 {
            let v: Vec<f64> = (0..=6).map(|l| if l < k { 0.0 } else { 2.0 }).collect();
            let p = classify(&curve(&v), 0.05, 0.05, 2.0, ClassifyMode::Mean).unwrap();
            assert_eq!((p.b, p.g, p.gap), (k - 1, k, 1));
        }
    }

    #[test]
    fn zero_curve_has_no_scheme() {
        let err = classify(&curve(&[0.0; 7]), 0.05, 0.05, 2.0, ClassifyMode::Mean).unwrap_err();
        assert!(matches!(err, Error::NoValidScheme(_)));
        assert!(classify(&curve(&[0.0, 2.0]), 0.0, 0.05, 2.0, ClassifyMode::Mean).is_err());
    }

    #[test]
    fn ramp_shape() {
        let v = [0.0, 0.0, 0.01, 0.03, 0.3, 1.0, 1.7, 1.97, 1.99, 2.0, 2.0, 2.0, 2.0];
        let p = classify(&curve(&v), 0.05, 0.05, 2.0, ClassifyMode::Mean).unwrap();
        assert_eq!((p.b, p.g, p.gap), (3, 7, 4));
        assert!((p.rampiness - 4.0 / 12.0).abs() < 1e-15);
        assert_eq!(p.epsilon_search, Some(2.5));
    }

    #[test]
    fn loose_tolerances_degenerate() {
        let v = [0.0, 0.05, 0.3, 1.0, 1.7, 1.95, 2.0];
        let c = classify_detailed(&curve(&v), 10.0, 10.0, 2.0, ClassifyMode::Mean).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.params.b + 1, c.params.g);
    }

    #[test]
    fn json_keys() {
        let v = [0.0, 0.0, 1.0, 2.0, 2.0];
        let p = classify(&curve(&v), 0.05, 0.05, 2.0, ClassifyMode::Worst).unwrap();
        let json = serde_json::to_value(&p).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(
            keys,
            ["N", "b", "delta", "epsilon_search", "g", "gamma", "gap", "mode", "rampiness", "s"]
        );
        assert_eq!(json["mode"], "worst");
        let back: RampParams = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn theory_report_for_fig4_values() {
        let v = [0.0, 0.0, 0.0, 0.02, 0.07, 0.3, 1.0, 1.7, 1.93, 1.98, 2.0, 2.0, 2.0];
        let p = classify(&curve(&v), 0.05, 0.05, 2.0, ClassifyMode::Mean).unwrap();
        assert_eq!((p.b, p.g), (3, 9));
        let r = validate_against_theory(&p, 3.0).unwrap();
        assert!(r.user.matches() && !r.trivial);
        assert_eq!(r.searched.as_ref().unwrap().epsilon, 2.5);
        let text = r.to_string();
        assert!(text.contains("match"));
        let searched: Vec<f64> = r.rampiness_table.iter().filter_map(|x| x.searched_rampiness).collect();
        assert!(searched.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn full_entropy_prediction_is_trivial() {
        let p = RampParams {
            n: 6,
            s: 6.0,
            b: 5,
            g: 6,
            gap: 1,
            rampiness: 1.0 / 6.0,
            gamma: 0.05,
            delta: 0.05,
            mode: ClassifyMode::Mean,
            epsilon_search: None,
        };
        assert!(validate_against_theory(&p, 0.0).unwrap().trivial);
    }

    #[test]
    fn rampiness_order() {
        assert!(rampiness_decreasing(&[(6, 6, 1.0), (8, 6, 0.75), (10, 6, 0.6)]));
        assert!(!rampiness_decreasing(&[(6, 6, 1.0), (8, 8, 1.0)]));
    }

    fn monotone_curve() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..0.3, 4..14).prop_map(|steps| {
            let mut acc = 0.0;
            let mut v: Vec<f64> = steps
                .iter()
                .map(|s| {
                    let x = acc;
                    acc += s;
                    x
                })
                .collect();
            let scale = 2.0 / acc.max(1e-9);
            for x in &mut v {
                *x = (*x * scale).min(2.0);
            }
            v.push(2.0);
            v
        })
    }

    proptest! {
        #[test]
        fn tolerance_monotonicity(v in monotone_curve(), g1 in 0.01f64..0.5, d1 in 0.01f64..0.5,
                                  dg in 0.0f64..0.5, dd in 0.0f64..0.5) {
            let c = curve(&v);
            let a = classify_detailed(&c, g1, d1, 2.0, ClassifyMode::Mean).unwrap();
            let wider_g = classify_detailed(&c, g1 + dg, d1, 2.0, ClassifyMode::Mean).unwrap();
            let wider_d = classify_detailed(&c, g1, d1 + dd, 2.0, ClassifyMode::Mean).unwrap();
            prop_assert!(wider_g.b_raw >= a.b_raw && wider_g.g_raw == a.g_raw);
            prop_assert!(wider_d.g_raw <= a.g_raw && wider_d.b_raw == a.b_raw);
            prop_assert!(wider_g.params.b >= a.params.b && wider_g.params.g <= a.params.g);
            if !wider_d.degenerate {
                prop_assert!(wider_d.params.b >= a.params.b);
            }
            prop_assert!(wider_d.params.g <= a.params.g);
        }

        #[test]
        fn worst_is_stricter(v in monotone_curve(), spread in 0.0f64..0.2, gamma in 0.01f64..0.5) {
            let c = curve_with_spread(&v, spread);
            let mean = classify_detailed(&c, gamma, gamma, 2.0, ClassifyMode::Mean).unwrap();
            if let Ok(worst) = classify_detailed(&c, gamma, gamma, 2.0, ClassifyMode::Worst) {
                prop_assert!(worst.b_raw <= mean.b_raw);
                prop_assert!(worst.g_raw >= mean.g_raw);
                prop_assert!(worst.params.g >= mean.params.g);
                prop_assert!(worst.params.gap >= 1);
            }
        }
    }
}

//! Closed-form Haar averages and mutual-information bounds.
//!
//! Rational expressions are generic over [`Field`], so they can be evaluated
//! exactly with [`crate::Rational`]. Bounds involving logarithms use `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Dimensions of the input split `A ⊗ B` and output split `C ⊗ D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDims {
    pub d_a: u64,
    pub d_b: u64,
    pub d_c: u64,
    pub d_d: u64,
}

impl PartitionDims {
    pub fn new(d_a: u64, d_b: u64, d_c: u64, d_d: u64) -> Result<Self> {
        if [d_a, d_b, d_c, d_d].contains(&0) {
            return Err(Error::InvalidParameter("partition dimensions must be ≥ 1".into()));
        }
        if d_a * d_b != d_c * d_d {
            return Err(Error::InvalidParameter(format!(
                "d_A·d_B = {} differs from d_C·d_D = {}",
                d_a * d_b,
                d_c * d_d
            )));
        }
        Ok(Self { d_a, d_b, d_c, d_d })
    }

    /// Qubit partition with `a` of `n` input qubits in `A` and `c` output qubits in `C`.
    pub fn qubits(n: u32, a: u32, c: u32) -> Result<Self> {
        if a > n || c > n || n > 31 {
            return Err(Error::InvalidParameter(format!("bad qubit split a={a}, c={c} of n={n}")));
        }
        Self::new(1 << a, 1 << (n - a), 1 << c, 1 << (n - c))
    }

    pub fn d(&self) -> u64 {
        self.d_a * self.d_b
    }
}

/// `∫ dU U_{i₁j₁} U_{i₂j₂} U*_{i′₁j′₁} U*_{i′₂j′₂}` for Haar `U` of size `d`.
#[allow(clippy::too_many_arguments)]
pub fn haar_second_moment<F: Field>(
    i1: usize,
    j1: usize,
    i2: usize,
    j2: usize,
    i1p: usize,
    j1p: usize,
    i2p: usize,
    j2p: usize,
    d: u64,
) -> F {
    let delta = |a: usize, b: usize| u64::from(a == b);
    let direct = delta(i1, i1p) * delta(i2, i2p);
    let crossed = delta(i1, i2p) * delta(i2, i1p);
    let j_direct = delta(j1, j1p) * delta(j2, j2p);
    let j_crossed = delta(j1, j2p) * delta(j2, j1p);
    let same = direct * j_direct + crossed * j_crossed;
    let mixed = direct * j_crossed + crossed * j_direct;
    let dd = F::from_u64(d);
    let d2m1 = dd.clone() * dd.clone() - F::one();
    F::from_u64(same) / d2m1.clone() - F::from_u64(mixed) / (dd * d2m1)
}

/// Exact Haar average of `Tr ρ²_AC` for the normalized operator state of `U`.
pub fn avg_purity_exact<F: Field>(p: &PartitionDims) -> F {
    let f = |x: u64| F::from_u64(x);
    let (a, b, c, dd) = (p.d_a, p.d_b, p.d_c, p.d_d);
    let d = f(p.d());
    let d2 = d.clone() * d.clone();
    let d2m1 = d2.clone() - F::one();
    let plus = f(a * b * b * c * dd * dd) + f(a * a * b * c * c * dd);
    let minus = f(a * b * b * c * c * dd) + f(a * a * b * c * dd * dd);
    (plus / d2m1.clone() - minus / (d.clone() * d2m1)) / d2
}

/// Leading-order approximation `1/(d_A d_C) + 1/(d_B d_D) − 1/(d d_A d_D) − 1/(d d_B d_C)`.
pub fn avg_purity_approx<F: Field>(p: &PartitionDims) -> F {
    let inv = |x: u64| F::one() / F::from_u64(x);
    let d = p.d();
    inv(p.d_a * p.d_c) + inv(p.d_b * p.d_d) - inv(d * p.d_a * p.d_d) - inv(d * p.d_b * p.d_c)
}

/// `1/d_A² + 1/d_D² − 1/(d_A² d_D²)`, the chaotic-scrambling OTOC value.
pub fn chaotic_criterion_value<F: Field>(d_a: u64, d_d: u64) -> F {
    let a2 = F::from_u64(d_a * d_a);
    let d2 = F::from_u64(d_d * d_d);
    F::one() / a2.clone() + F::one() / d2.clone() - F::one() / (a2 * d2)
}

/// Exact Haar mean of the OTOC `F` averaged over all Pauli strings `W` on a
/// region of dimension `d_w` and `V` on a disjoint region of dimension `d_v`,
/// in a register of total dimension `d`.
///
/// A pair with an identity factor gives `F = 1`; any other pair twirls to
/// `−1/(d² − 1)`.
pub fn haar_pauli_otoc_mean<F: Field>(d_w: u64, d_v: u64, d: u64) -> F {
    let p = chaotic_criterion_value::<F>(d_w, d_v);
    let dd = F::from_u64(d);
    let rest = F::one() - p.clone();
    p - rest / (dd.clone() * dd - F::one())
}

/// Clamps a bound to the largest possible `I(R:S)`, two bits per secret qubit.
pub fn clamp_to_secret(bound: f64, secret_qubits: u32) -> f64 {
    bound.min(2.0 * secret_qubits as f64)
}

/// Rényi-2 upper bound on `I(R:C_p)` for a one-qubit secret, `N` players of
/// which carry Rényi-2 entropy `s`, evaluated as printed:
/// `1 + log₂(2 − 3(1 − 2^{2p−2N}) / (2 + (2^{−s} − 2^{−N+1}) 4^{p−N/2}))`.
pub fn renyi2_mi_bound_mixed(n: f64, s: f64, p: f64) -> Result<f64> {
    if !(0.0..=n).contains(&p) || !(0.0..=n).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "need 0 ≤ p ≤ N and 0 ≤ s ≤ N (N={n}, s={s}, p={p})"
        )));
    }
    let num = 3.0 * (1.0 - 2f64.powf(2.0 * p - 2.0 * n));
    let den = 2.0 + (2f64.powf(-s) - 2f64.powf(-n + 1.0)) * 4f64.powf(p - n / 2.0);
    let arg = 2.0 - num / den;
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::FormulaDomain(arg));
    }
    Ok(1.0 + arg.log2())
}

/// Pure-player bound `2ℓ − N + log₂(1 + 2^{N−2ℓ})`.
pub fn pure_bound(n: f64, l: f64) -> f64 {
    let x = n - 2.0 * l;
    // Rewritten as log₂(2^{−x} + 1) for large x to avoid overflow.
    if x > 0.0 {
        (1.0 + 2f64.powf(-x)).log2()
    } else {
        -x + (1.0 + 2f64.powf(x)).log2()
    }
}

/// `log₂(1 + 3·4^{ℓ−N})` for maximally mixed players.
pub fn maximally_mixed_mi(n: f64, l: f64) -> f64 {
    (1.0 + 3.0 * 4f64.powf(l - n)).log2()
}

/// Ramp parameters predicted for `N` players of entropy `s` and accuracy `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryRamp {
    pub b: f64,
    pub g: f64,
    pub gap: f64,
    pub rampiness: f64,
}

/// `b = (N+s)/2 − ε`, `g = (N+s)/2 + ε`, clamped to `[0, N]`; gap `2ε` and
/// rampiness `2ε/N` as stated.
pub fn theoretical_ramp_params(n: u32, s: f64, epsilon: f64) -> Result<TheoryRamp> {
    let nf = n as f64;
    if n == 0 || !(0.0..=nf).contains(&s) || !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need N ≥ 1, 0 ≤ s ≤ N, ε ≥ 0 (N={n}, s={s}, ε={epsilon})"
        )));
    }
    let mid = (nf + s) / 2.0;
    Ok(TheoryRamp {
        b: (mid - epsilon).clamp(0.0, nf),
        g: (mid + epsilon).clamp(0.0, nf),
        gap: 2.0 * epsilon,
        rampiness: 2.0 * epsilon / nf,
    })
}

/// Smallest half-integer `ε ≥ 0` with `pure_bound(M, M/2 − ε) ≤ γ`, where
/// `M = N + s` is the size of the purified player register.
pub fn epsilon_search(n: u32, s: u32, gamma: f64) -> Option<f64> {
    let m = (n + s) as f64;
    (0..=(n + s))
        .map(|k| k as f64 / 2.0)
        .find(|&eps| pure_bound(m, m / 2.0 - eps) <= gamma)
}

/// `√((d_A² − 1)/(d_A d_B + 1))`, bounding the Haar mean of `‖ρ_A − I/d_A‖₁`.
pub fn page_deviation_bound(d_a: u64, d_b: u64) -> Result<f64> {
    if d_a == 0 || d_b == 0 {
        return Err(Error::InvalidParameter("dimensions must be ≥ 1".into()));
    }
    let a = d_a as f64;
    Ok(((a * a - 1.0) / (a * d_b as f64 + 1.0)).sqrt())
}

/// A valid ramp scheme needs a gap at least as large as the secret.
pub fn gap_lower_bound(secret_qubits: u32) -> Result<u32> {
    if secret_qubits == 0 {
        return Err(Error::InvalidParameter("secret must have at least one qubit".into()));
    }
    Ok(secret_qubits)
}

/// Errors unless `gap ≥ gap_lower_bound(secret_qubits)`.
pub fn check_gap(gap: usize, secret_qubits: u32) -> Result<()> {
    let need = gap_lower_bound(secret_qubits)? as usize;
    if gap < need {
        return Err(Error::GapTooSmall { gap, secret: need });
    }
    Ok(())
}

/// One row of a [`BoundCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub l: u32,
    pub pure: f64,
    /// `None` where the printed formula leaves its domain.
    pub mixed: Option<f64>,
    pub maximally_mixed: f64,
}

impl BoundPoint {
    pub fn pure_clamped(&self) -> f64 {
        clamp_to_secret(self.pure, 1)
    }

    pub fn mixed_clamped(&self) -> Option<f64> {
        self.mixed.map(|m| clamp_to_secret(m, 1))
    }
}

/// All analytic curves for `N` players with entropy `s`, `ℓ = 0..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub n: u32,
    pub s: u32,
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    pub fn new(n: u32, s: u32) -> Result<Self> {
        if n == 0 || s > n {
            return Err(Error::InvalidParameter(format!("need N ≥ 1 and s ≤ N (N={n}, s={s})")));
        }
        let nf = n as f64;
        let points = (0..=n)
            .map(|l| {
                let lf = l as f64;
                BoundPoint {
                    l,
                    pure: pure_bound(nf, lf),
                    mixed: renyi2_mi_bound_mixed(nf, s as f64, lf).ok(),
                    maximally_mixed: maximally_mixed_mi(nf, lf),
                }
            })
            .collect();
        Ok(Self { n, s, points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_haar, stream_rng, UnitaryMatrix};
    use crate::stats::Welford;
    use crate::Rational;
    use proptest::prelude::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn second_moment_hand_values() {
        let v: Rational = haar_second_moment(0, 0, 0, 0, 0, 0, 0, 0, 2);
        assert_eq!(v, r(1, 3));
        let z: Rational = haar_second_moment(0, 0, 0, 0, 1, 1, 1, 1, 2);
        assert_eq!(z, r(0, 1));
        // E[U00 U11 U*00 U*11] = 1/(d²−1) for d=2.
        let v: Rational = haar_second_moment(0, 0, 1, 1, 0, 0, 1, 1, 2);
        assert_eq!(v, r(1, 3));
    }

    #[test]
    fn second_moment_monte_carlo() {
        let n = 100_000;
        let mut w = Welford::new();
        let mut w2 = Welford::new();
        for i in 0..n {
            let u: UnitaryMatrix<f64> = sample_haar(2, &mut stream_rng(314, i)).unwrap();
            let m = u.matrix();
            w.push((m[(0, 0)] * m[(1, 1)]).norm_sqr());
            w2.push(m[(0, 0)].norm_sqr().powi(2));
        }
        let want: f64 = haar_second_moment(0, 0, 1, 1, 0, 0, 1, 1, 2);
        assert!((w.mean() - want).abs() < 3.0 * w.std_error());
        let want2: f64 = haar_second_moment(0, 0, 0, 0, 0, 0, 0, 0, 2);
        assert!((w2.mean() - want2).abs() < 3.0 * w2.std_error());
    }

    #[test]
    fn second_moment_unitarity_sum() {
        // Σ_j E|U_0j|⁴ + Σ_{j≠k} E|U_0j|²|U_0k|² = 1.
        for d in [2u64, 3, 5] {
            let mut total = Rational::from_integer(0);
            for j in 0..d as usize {
                for k in 0..d as usize {
                    total = total + haar_second_moment::<Rational>(0, j, 0, k, 0, j, 0, k, d);
                }
            }
            assert_eq!(total, Rational::from_integer(1), "d={d}");
        }
    }

    #[test]
    fn purity_values() {
        let p = PartitionDims::new(2, 2, 2, 2).unwrap();
        assert_eq!(avg_purity_exact::<Rational>(&p), r(2, 5));
        assert_eq!(avg_purity_approx::<Rational>(&p), r(3, 8));
        assert!((avg_purity_exact::<f64>(&p) - 0.4).abs() < 1e-15);
        assert!(PartitionDims::new(2, 4, 3, 3).is_err());
        assert!(PartitionDims::new(0, 4, 4, 0).is_err());
    }

    #[test]
    fn purity_approx_converges() {
        for n in 8u32..=12 {
            for a in 0..=n {
                for c in 0..=n {
                    let p = PartitionDims::qubits(n, a, c).unwrap();
                    let e: f64 = avg_purity_exact(&p);
                    let ap: f64 = avg_purity_approx(&p);
                    assert!((e - ap).abs() / e < 0.01, "n={n} a={a} c={c}");
                    assert!(e > 0.0 && e <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn chaotic_values() {
        assert_eq!(chaotic_criterion_value::<Rational>(2, 2), r(7, 16));
        assert_eq!(chaotic_criterion_value::<Rational>(2, 8), r(67, 256));
        assert!((chaotic_criterion_value::<f64>(2, 1 << 20) - 0.25).abs() < 1e-10);
        assert_eq!(haar_pauli_otoc_mean::<Rational>(2, 8, 16), r(22, 85));
        // Equals the average purity of the operator state for the same cut.
        let p = PartitionDims::new(2, 8, 2, 8).unwrap();
        assert_eq!(avg_purity_exact::<Rational>(&p), r(22, 85));
    }

    #[test]
    fn mixed_bound_values() {
        assert!((renyi2_mi_bound_mixed(12.0, 12.0, 12.0).unwrap() - 2.0).abs() < 1e-12);
        // At p = 0 the printed bound is small but not negligible for small N
        // (0.126 at N = 4); it roughly halves with each added player.
        let at0: Vec<f64> = (4..=20)
            .map(|n| renyi2_mi_bound_mixed(n as f64, 0.0, 0.0).unwrap())
            .collect();
        assert!((at0[0] - 0.125_987_937).abs() < 1e-8);
        assert!(at0.windows(2).all(|w| w[1] < w[0] / 1.8));
        assert!(at0[16] < 3e-6);
        let v = renyi2_mi_bound_mixed(12.0, 0.0, 3.0).unwrap();
        assert!((v - 0.033_166_988).abs() < 1e-8, "{v}");
        assert!(renyi2_mi_bound_mixed(4.0, 5.0, 1.0).is_err());
        for n in 1..=14 {
            for s in 0..=n {
                for p in 0..=n {
                    // The log argument stays positive on the whole valid range.
                    let v = renyi2_mi_bound_mixed(n as f64, s as f64, p as f64).unwrap();
                    assert!(v <= 2.0 + 1e-9, "N={n} s={s} p={p}: {v}");
                }
            }
        }
    }

    #[test]
    fn pure_bound_values() {
        for n in [4.0, 6.0, 12.0] {
            assert!((pure_bound(n, n / 2.0) - 1.0).abs() < 1e-12);
            assert!((pure_bound(n, n) - (n + (1.0 + 2f64.powf(-n)).log2())).abs() < 1e-12);
            assert_eq!(clamp_to_secret(pure_bound(n, n), 1), 2.0);
        }
        let v = pure_bound(12.0, 3.0);
        assert!((v - (-6.0 + 65f64.log2())).abs() < 1e-12);
        assert!((v - 0.022_367_813).abs() < 1e-8);
    }

    #[test]
    fn maximally_mixed_values() {
        assert!((maximally_mixed_mi(9.0, 9.0) - 2.0).abs() < 1e-12);
        assert!((maximally_mixed_mi(9.0, 8.0) - 1.75f64.log2()).abs() < 1e-12);
        assert!((maximally_mixed_mi(8.0, 0.0) - 6.6e-5).abs() < 1e-6);
    }

    #[test]
    fn theory_params() {
        let t = theoretical_ramp_params(12, 0.0, 3.0).unwrap();
        assert_eq!((t.b, t.g, t.gap, t.rampiness), (3.0, 9.0, 6.0, 0.5));
        let t = theoretical_ramp_params(8, 8.0, 1.0).unwrap();
        assert_eq!((t.b, t.g), (7.0, 8.0));
        let t = theoretical_ramp_params(8, 8.0, 0.0).unwrap();
        assert_eq!((t.b, t.g), (8.0, 8.0));
        let t = theoretical_ramp_params(10, 0.0, 1.5).unwrap();
        assert_eq!((t.b, t.g), (3.5, 6.5));
        assert!(theoretical_ramp_params(4, 5.0, 0.0).is_err());
    }

    #[test]
    fn epsilon_search_values() {
        assert_eq!(epsilon_search(12, 0, 0.05), Some(2.5));
        assert_eq!(epsilon_search(12, 0, 10.0), Some(0.0));
        assert_eq!(epsilon_search(2, 0, 1e-9), None);
    }

    #[test]
    fn page_values() {
        let v = page_deviation_bound(2, 1 << 11).unwrap();
        assert!((v - 0.027).abs() < 5e-4 && v < 2f64.powi(-5));
        assert_eq!(page_deviation_bound(1, 7).unwrap(), 0.0);
    }

    #[test]
    fn gap_checks() {
        assert_eq!(gap_lower_bound(1).unwrap(), 1);
        assert!(check_gap(6, 1).is_ok());
        assert!(matches!(check_gap(0, 1), Err(Error::GapTooSmall { .. })));
        assert!(gap_lower_bound(0).is_err());
    }

    #[test]
    fn bound_curve_rows() {
        let c = BoundCurve::new(6, 2).unwrap();
        assert_eq!(c.points.len(), 7);
        assert_eq!(c.points[6].pure_clamped(), 2.0);
        assert!(BoundCurve::new(3, 4).is_err());
    }

    proptest! {
        #[test]
        fn pure_bound_monotone_and_complementary(n in 1u32..40, l in 0u32..40) {
            prop_assume!(l < n);
            let nf = n as f64;
            prop_assert!(pure_bound(nf, l as f64 + 1.0) >= pure_bound(nf, l as f64) - 1e-12);
            prop_assert!(pure_bound(nf, l as f64) + pure_bound(nf, nf - l as f64) >= 2.0 - 1e-9);
        }

        #[test]
        fn purity_in_unit_interval(a in 0u32..6, c in 0u32..6, n in 1u32..6) {
            prop_assume!(a <= n && c <= n);
            let p = PartitionDims::qubits(n, a, c).unwrap();
            let e: Rational = avg_purity_exact(&p);
            prop_assert!(e > Rational::from_integer(0) && e <= Rational::from_integer(1));
        }
    }
}

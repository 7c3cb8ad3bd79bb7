//! Exact ((2,3)) threshold scheme on three qutrits.
//!
//! Share `k` (1-based) lives on site `k − 1`; basis ket `|xyz⟩` is index
//! `x + 3y + 9z`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::register::{apply_matrix, PureState, QuantumState, RegisterLayout, Role, SubsystemMask};
use crate::scalar::{cr, Real, C};

/// Encoded secret with the amplitudes it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct QutritShares<T> {
    pub state: PureState<T>,
    pub secret: [C<T>; 3],
}

/// Two shares used for reconstruction; the secret lands on the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SharePair {
    #[serde(rename = "1,2")]
    P12,
    #[serde(rename = "2,3")]
    P23,
    #[serde(rename = "1,3")]
    P13,
}

impl SharePair {
    pub const ALL: [SharePair; 3] = [SharePair::P12, SharePair::P23, SharePair::P13];

    /// `(first, second)` sites; the transforms add first into second, then
    /// second into first.
    fn sites(self) -> (usize, usize) {
        match self {
            SharePair::P12 => (0, 1),
            SharePair::P23 => (1, 2),
            SharePair::P13 => (2, 0),
        }
    }

    /// Site that holds the secret afterwards.
    pub fn secret_site(self) -> usize {
        self.sites().0
    }
}

impl fmt::Display for SharePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SharePair::P12 => "1,2",
            SharePair::P23 => "2,3",
            SharePair::P13 => "1,3",
        })
    }
}

impl FromStr for SharePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
        match t.as_str() {
            "12" | "21" => Ok(SharePair::P12),
            "23" | "32" => Ok(SharePair::P23),
            "13" | "31" => Ok(SharePair::P13),
            _ => Err(Error::Parse(format!("share pair must be 1,2 / 2,3 / 1,3, got '{s}'"))),
        }
    }
}

/// `CADD(x→y): |x, y⟩ ↦ |x, y + x mod 3⟩` as a 9×9 permutation on a pair of
/// sites ordered by index. `control_low` says whether the control is the
/// lower-indexed site.
pub fn cadd<T: Real>(control_low: bool) -> CMatrix<T> {
    let mut m = CMatrix::zeros(9, 9);
    for lo in 0..3 {
        for hi in 0..3 {
            let (nlo, nhi) = if control_low {
                (lo, (hi + lo) % 3)
            } else {
                ((lo + hi) % 3, hi)
            };
            m[(nlo + 3 * nhi, lo + 3 * hi)] = cr(T::one());
        }
    }
    m
}

fn layout() -> RegisterLayout {
    RegisterLayout::qudits(3, 3)
        .and_then(|l| l.with_role(Role::Players, [0, 1, 2]))
        .expect("three qutrits fit")
}

/// `|k⟩ ↦ (1/√3) Σ_x |x, x+k, x+2k⟩` applied to `α|0⟩ + β|1⟩ + γ|2⟩`.
pub fn encode233<T: Real>(alpha: C<T>, beta: C<T>, gamma: C<T>) -> Result<QutritShares<T>> {
    let secret = [alpha, beta, gamma];
    let norm2 = secret.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    let tol = T::structural_tol().max(T::lit(1e-10));
    if (norm2 - T::one()).abs() > tol {
        return Err(Error::NotNormalized(norm2.to_f64_lossy()));
    }
    let w = T::one() / T::from_count(3).sqrt();
    let mut amps = vec![C::zero(); 27];
    for (k, &a) in secret.iter().enumerate() {
        for x in 0..3 {
            let (y, z) = ((x + k) % 3, (x + 2 * k) % 3);
            amps[x + 3 * y + 9 * z] = a * w;
        }
    }
    Ok(QutritShares {
        state: PureState::from_parts_unchecked(layout(), amps),
        secret,
    })
}

/// Result of [`reconstruct233`].
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction<T> {
    /// All three sites after the two modular additions.
    pub state: PureState<T>,
    pub secret_site: usize,
    /// `⟨ψ|ρ|ψ⟩` of the secret site against the encoded secret.
    pub fidelity: T,
}

/// Adds the first share of `pair` into the second, then the second into the
/// first; the first share then carries the secret.
pub fn reconstruct233<T: Real>(shares: &QutritShares<T>, pair: SharePair) -> Result<Reconstruction<T>> {
    let (first, second) = pair.sites();
    let targets = SubsystemMask::new([first, second])?;
    let first_low = first < second;
    let s1 = apply_matrix(&shares.state, &cadd(first_low), &targets)?;
    let s2 = apply_matrix(&s1, &cadd(!first_low), &targets)?;
    let rho = s2.reduce_ordered(&[first])?;
    let m = rho.matrix();
    let mut f = C::zero();
    for i in 0..3 {
        for j in 0..3 {
            f += shares.secret[i].conj() * m[(i, j)] * shares.secret[j];
        }
    }
    Ok(Reconstruction {
        state: s2,
        secret_site: first,
        fidelity: f.re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::stream_rng;
    use crate::infotheory::{mutual_information, trace_distance};
    use crate::register::DensityMatrix;
    use crate::scalar::c;

    fn random_secret(seed: u64) -> [C<f64>; 3] {
        let mut rng = stream_rng(seed, 0);
        let v: Vec<C<f64>> = (0..3)
            .map(|_| c(f64::sample_normal(&mut rng), f64::sample_normal(&mut rng)))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }

    #[test]
    fn cadd_is_a_permutation() {
        for low in [true, false] {
            let m = cadd::<f64>(low);
            assert!(m.unitarity_defect() < 1e-15);
            let cubed = m.matmul(&m).matmul(&m);
            assert!(cubed.sub(&CMatrix::identity(9)).frobenius_norm() < 1e-15);
        }
        // |x=1, y=2⟩ → |1, 0⟩ with control on the low site.
        assert_eq!(cadd::<f64>(true)[(1, 1 + 3 * 2)], cr(1.0));
    }

    #[test]
    fn basis_zero_encoding() {
        let s = encode233::<f64>(cr(1.0), cr(0.0), cr(0.0)).unwrap();
        let w = 1.0 / 3f64.sqrt();
        for (i, a) in s.state.amplitudes().iter().enumerate() {
            let expect = if [0, 13, 26].contains(&i) { w } else { 0.0 };
            assert!((a - cr(expect)).norm() < 1e-15, "index {i}");
        }
        assert!(encode233::<f64>(cr(1.0), cr(1.0), cr(0.0)).is_err());
    }

    #[test]
    fn encoding_is_an_isometry() {
        let (x, y) = (random_secret(1), random_secret(2));
        let ex = encode233(x[0], x[1], x[2]).unwrap();
        let ey = encode233(y[0], y[1], y[2]).unwrap();
        let direct: C<f64> = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        assert!((ex.state.inner(&ey.state).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn single_shares_are_maximally_mixed() {
        let flat = DensityMatrix::<f64>::maximally_mixed(RegisterLayout::qudits(1, 3).unwrap());
        let (a, b) = (random_secret(3), random_secret(4));
        let ea = encode233(a[0], a[1], a[2]).unwrap();
        let eb = encode233(b[0], b[1], b[2]).unwrap();
        for site in 0..3 {
            let ra = ea.state.reduce_ordered(&[site]).unwrap();
            let rb = eb.state.reduce_ordered(&[site]).unwrap();
            assert!(ra.matrix().sub(flat.matrix()).frobenius_norm() < 1e-12);
            assert!(trace_distance(&ra, &rb).unwrap() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_recovers_every_secret() {
        for seed in 0..100 {
            let sec = random_secret(100 + seed);
            let shares = encode233(sec[0], sec[1], sec[2]).unwrap();
            for pair in SharePair::ALL {
                let r = reconstruct233(&shares, pair).unwrap();
                assert!((r.fidelity - 1.0).abs() < 1e-10, "seed {seed} pair {pair}: {}", r.fidelity);
            }
        }
    }

    #[test]
    fn basis_zero_residual() {
        let shares = encode233::<f64>(cr(1.0), cr(0.0), cr(0.0)).unwrap();
        let r = reconstruct233(&shares, SharePair::P12).unwrap();
        // |0⟩ on share 1, (|00⟩ + |12⟩ + |21⟩)/√3 on shares 2 and 3.
        let w = 1.0 / 3f64.sqrt();
        for (i, a) in r.state.amplitudes().iter().enumerate() {
            let expect = if [0, 3 + 9 * 2, 3 * 2 + 9].contains(&i) { w } else { 0.0 };
            assert!((a - cr(expect)).norm() < 1e-12, "index {i}");
        }
    }

    #[test]
    fn two_shares_hold_all_information() {
        // Purify a qutrit secret with a reference and encode the secret half.
        let mut amps = vec![C::zero(); 81];
        let w = 1.0 / 3f64.sqrt();
        for r in 0..3 {
            let sec: [C<f64>; 3] = std::array::from_fn(|k| if k == r { cr(1.0) } else { cr(0.0) });
            let e = encode233(sec[0], sec[1], sec[2]).unwrap();
            for (i, a) in e.state.amplitudes().iter().enumerate() {
                amps[r + 3 * i] += *a * w;
            }
        }
        let st = PureState::new(RegisterLayout::qudits(4, 3).unwrap(), amps).unwrap();
        let full = 2.0 * 3f64.log2();
        let r = SubsystemMask::new([0]).unwrap();
        for shares in [[1, 2], [2, 3], [1, 3]] {
            let m = SubsystemMask::new(shares).unwrap();
            let i: f64 = mutual_information(&st, &r, &m, None).unwrap().0;
            assert!((i - full).abs() < 1e-9, "{shares:?}: {i}");
        }
        let one: f64 = mutual_information(&st, &r, &SubsystemMask::new([2]).unwrap(), None).unwrap().0;
        assert!(one.abs() < 1e-9);
    }

    #[test]
    fn pair_labels() {
        assert_eq!("1,3".parse::<SharePair>().unwrap(), SharePair::P13);
        assert_eq!("(2, 3)".parse::<SharePair>().unwrap(), SharePair::P23);
        assert!("1,4".parse::<SharePair>().is_err());
        assert_eq!(SharePair::P13.secret_site(), 2);
    }
}

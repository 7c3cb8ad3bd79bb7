//! Entropies, mutual informations and state distances, all in bits.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, psd_sqrt};
use crate::register::{DensityMatrix, QuantumState, SubsystemMask};
use crate::scalar::Real;

/// An information quantity measured in bits.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize)]
pub struct Bits<T>(pub T);

impl<T: Real> Bits<T> {
    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

impl<T: Real> fmt::Display for Bits<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Clamps tiny negative drift to zero; rejects genuinely negative spectra.
fn clean_spectrum<T: Real>(values: &[T]) -> Result<impl Iterator<Item = T> + '_> {
    if let Some(&min) = values.iter().min_by(|a, b| a.partial_cmp(b).unwrap()) {
        if min < -T::structural_tol() {
            return Err(Error::NotPositive(min.to_f64_lossy()));
        }
    }
    Ok(values.iter().map(|&x| x.max(T::zero())).filter(|&x| x >= T::eigen_floor()))
}

/// Shannon entropy (bits) of a spectrum.
pub fn spectrum_entropy<T: Real>(values: &[T]) -> Result<T> {
    let s: T = clean_spectrum(values)?.map(|l| -l * l.log2()).sum();
    Ok(s.max(T::zero()))
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    // 1 ± 1e-6 itself must pass despite rounding of the literal.
    if !(alpha >= T::zero()) || (alpha - T::one()).abs() < T::lit(0.99e-6) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Rényi order must be ≥ 0 and ≠ 1, got {alpha}"
        )));
    }
    Ok(())
}

/// Rényi entropy (bits) of order `alpha` of a spectrum.
pub fn spectrum_renyi<T: Real>(values: &[T], alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    let tr: T = clean_spectrum(values)?.map(|l| l.powf(alpha)).sum();
    Ok(tr.log2() / (T::one() - alpha))
}

fn hermitian_checked<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    let defect = rho.matrix().hermiticity_defect();
    if defect > T::structural_tol() {
        return Err(Error::NotHermitian(defect.to_f64_lossy()));
    }
    Ok(())
}

/// `S(ρ) = −Tr ρ log₂ ρ`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<Bits<T>> {
    hermitian_checked(rho)?;
    Ok(Bits(spectrum_entropy(&rho.eigenvalues()?)?))
}

/// `S^α(ρ) = log₂ Tr ρ^α / (1 − α)`.
pub fn renyi_entropy<T: Real>(rho: &DensityMatrix<T>, alpha: T) -> Result<Bits<T>> {
    check_alpha(alpha)?;
    hermitian_checked(rho)?;
    Ok(Bits(spectrum_renyi(&rho.eigenvalues()?, alpha)?))
}

/// Entropy of the marginal on `sites` (von Neumann when `alpha` is `None`).
/// The empty subsystem has entropy zero.
pub fn subsystem_entropy<T: Real, S: QuantumState<T> + ?Sized>(
    state: &S,
    sites: &[usize],
    alpha: Option<T>,
) -> Result<T> {
    if sites.is_empty() {
        return Ok(T::zero());
    }
    let spec = state.reduced_spectrum(sites)?;
    match alpha {
        None => spectrum_entropy(&spec),
        Some(a) => spectrum_renyi(&spec, a),
    }
}

/// `I(X:Y) = S(X) + S(Y) − S(XY)`, or its Rényi variant when `alpha` is set.
pub fn mutual_information<T: Real, S: QuantumState<T> + ?Sized>(
    state: &S,
    x: &SubsystemMask,
    y: &SubsystemMask,
    alpha: Option<T>,
) -> Result<Bits<T>> {
    x.validate(state.layout())?;
    y.validate(state.layout())?;
    x.ensure_disjoint(y)?;
    if x.is_empty() || y.is_empty() {
        return Ok(Bits(T::zero()));
    }
    let sx = subsystem_entropy(state, x.sites(), alpha)?;
    let sy = subsystem_entropy(state, y.sites(), alpha)?;
    let sxy = subsystem_entropy(state, x.union(y).sites(), alpha)?;
    Ok(Bits(sx + sy - sxy))
}

/// `I₃(R:C:D) = I(R:C) + I(R:D) − I(R:CD)`.
pub fn tripartite_information<T: Real, S: QuantumState<T> + ?Sized>(
    state: &S,
    r: &SubsystemMask,
    c: &SubsystemMask,
    d: &SubsystemMask,
) -> Result<Bits<T>> {
    r.ensure_disjoint(c)?;
    r.ensure_disjoint(d)?;
    c.ensure_disjoint(d)?;
    let rc = mutual_information(state, r, c, None)?.0;
    let rd = mutual_information(state, r, d, None)?.0;
    let rcd = mutual_information(state, r, &c.union(d), None)?.0;
    Ok(Bits(rc + rd - rcd))
}

fn same_dim<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// Normalized trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    same_dim(rho, sigma)?;
    let diff = rho.matrix().sub(sigma.matrix());
    let half = T::lit(0.5);
    Ok(eigvalsh(&diff)?.iter().map(|x| x.abs()).sum::<T>() * half)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    same_dim(rho, sigma)?;
    let s = psd_sqrt(rho.matrix())?;
    let m = s.matmul(sigma.matrix()).matmul(&s);
    let root: T = eigvalsh(&m)?.iter().map(|x| x.max(T::zero()).sqrt()).sum();
    Ok(root * root)
}

/// Joint marginal on `x ∪ y` (x's sites first) and the product of marginals.
pub fn joint_and_product<T: Real, S: QuantumState<T> + ?Sized>(
    state: &S,
    x: &SubsystemMask,
    y: &SubsystemMask,
) -> Result<(DensityMatrix<T>, DensityMatrix<T>)> {
    x.ensure_disjoint(y)?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidMask("both subsystems must be nonempty".into()));
    }
    let order: Vec<usize> = x.sites().iter().chain(y.sites()).copied().collect();
    let joint = state.reduce_ordered(&order)?;
    let product = state
        .reduce_ordered(x.sites())?
        .tensor(&state.reduce_ordered(y.sites())?)?;
    Ok((joint, product))
}

/// `I(X:Y) − (2/ln 2)Δ²` with `Δ` the trace distance between `ρ_XY` and
/// `ρ_X ⊗ ρ_Y`; non-negative by Pinsker's inequality.
pub fn pinsker_slack<T: Real, S: QuantumState<T> + ?Sized>(
    state: &S,
    x: &SubsystemMask,
    y: &SubsystemMask,
) -> Result<T> {
    let (joint, product) = joint_and_product(state, x, y)?;
    let delta = trace_distance(&joint, &product)?;
    let mi = mutual_information(state, x, y, None)?.0;
    Ok(mi - T::lit(2.0) / T::LN_2() * delta * delta)
}

/// `(Δ − (1 − √F), √(1 − F) − Δ)`; both non-negative.
pub fn fuchs_van_de_graaf_slacks<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<(T, T)> {
    let delta = trace_distance(rho, sigma)?;
    let f = fidelity(rho, sigma)?;
    let lower = T::one() - f.min(T::one()).sqrt();
    let upper = (T::one() - f).max(T::zero()).sqrt();
    Ok((delta - lower, upper - delta))
}

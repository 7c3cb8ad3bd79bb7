//! Monte Carlo checks of second-moment quantities.

use serde::{Deserialize, Serialize};

use crate::ensembles::{haar_isometry, stream_rng, EnsembleSpec, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, CMatrix};
use crate::register::{PureState, QuantumState, RegisterLayout, AMPLITUDE_BUDGET};
use crate::scalar::{cr, Real};
use crate::stats::{ordered_par_try_map, Welford};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut w = Welford::new();
        w.extend(values);
        Self {
            mean: w.mean(),
            std_error: w.std_error(),
            samples: w.count() as usize,
        }
    }

    /// `|mean − expected|` in units of the standard error.
    pub fn z_against(&self, expected: f64) -> f64 {
        (self.mean - expected).abs() / self.std_error
    }
}

/// Normalized operator state `(1/√d) Σ_j |j⟩ ⊗ U|j⟩`. Sites `0..n` carry the
/// input copy, sites `n..2n` the output; amplitude `j + d·i` is `U_ij/√d`.
pub fn choi_state<T: Real>(u: &UnitaryMatrix<T>, layout: &RegisterLayout) -> Result<PureState<T>> {
    let d = u.dim();
    if layout.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            found: d,
        });
    }
    let full = layout.concat(layout)?;
    let scale = T::one() / T::from_count(d).sqrt();
    let m = u.matrix();
    let mut amps = vec![cr(T::zero()); d * d];
    for i in 0..d {
        for j in 0..d {
            amps[j + d * i] = m[(i, j)] * scale;
        }
    }
    Ok(PureState::from_parts_unchecked(full, amps))
}

/// Mean of `Tr ρ²_AC` over the ensemble, where `A` is the first `a` input
/// sites and `C` the first `c` output sites of the operator state.
pub fn purity_mc<T: Real>(spec: &EnsembleSpec, a: usize, c: usize) -> Result<MonteCarloEstimate> {
    spec.validate()?;
    let n = spec.n_sites;
    if a > n || c > n {
        return Err(Error::InvalidParameter(format!(
            "partition a = {a}, c = {c} exceeds {n} sites"
        )));
    }
    let layout = RegisterLayout::qudits(n, spec.site_dim)?;
    let sites: Vec<usize> = (0..a).chain(n..n + c).collect();
    let values = ordered_par_try_map(spec.samples, |i| -> Result<f64> {
        let u = spec.sample_unitary::<T>(i as u64)?;
        let choi = choi_state(&u, &layout)?;
        if sites.is_empty() {
            return Ok(1.0);
        }
        let spec = choi.reduced_spectrum(&sites)?;
        Ok(spec.iter().map(|&x| x * x).fold(T::zero(), |a, b| a + b).to_f64_lossy())
    })?;
    Ok(MonteCarloEstimate::from_values(values))
}

/// Mean of `‖ρ_A − I/d_A‖₁` for Haar-random pure states on `A ⊗ B`.
pub fn page_deviation_mc<T: Real>(d_a: usize, d_b: usize, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if d_a < 1 || d_b < 1 || d_a * d_b < 2 {
        return Err(Error::InvalidParameter("page deviation needs d_A d_B ≥ 2".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be ≥ 1".into()));
    }
    let d = d_a as u128 * d_b as u128;
    if d > AMPLITUDE_BUDGET as u128 {
        return Err(Error::MemoryBudget {
            requested: d,
            budget: AMPLITUDE_BUDGET,
        });
    }
    let layout = RegisterLayout::new(vec![d_a, d_b])?;
    let flat = CMatrix::<T>::identity(d_a).scale(cr(T::one() / T::from_count(d_a)));
    let values = ordered_par_try_map(samples, |i| -> Result<f64> {
        let col = haar_isometry::<T, _>(d_a * d_b, 1, &mut stream_rng(seed, i as u64))?;
        let psi = PureState::from_parts_unchecked(layout.clone(), col.into_vec());
        let rho = psi.reduce_ordered(&[0])?;
        let eig = eigvalsh(&rho.matrix().sub(&flat))?;
        Ok(eig.iter().map(|x| x.abs()).fold(T::zero(), |a, b| a + b).to_f64_lossy())
    })?;
    Ok(MonteCarloEstimate::from_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{avg_purity_exact, page_deviation_bound, PartitionDims};
    use crate::ensembles::{sample_haar, EnsembleKind};

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let layout = RegisterLayout::qubits(2).unwrap();
        let st = choi_state(&UnitaryMatrix::<f64>::identity(4), &layout).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-12);
        let spec = st.reduced_spectrum(&[0, 1]).unwrap();
        assert!(spec.iter().all(|&x| (x - 0.25).abs() < 1e-12));
        // Input and output pair up site by site.
        let pair = st.reduced_spectrum(&[0, 2]).unwrap();
        let purity: f64 = pair.iter().map(|x| x * x).sum();
        assert!((purity - 1.0).abs() < 1e-12);
        assert!(choi_state(&UnitaryMatrix::<f64>::identity(3), &layout).is_err());
    }

    #[test]
    fn choi_amplitude_convention() {
        let u: UnitaryMatrix<f64> = sample_haar(4, &mut stream_rng(4, 0)).unwrap();
        let st = choi_state(&u, &RegisterLayout::qubits(2).unwrap()).unwrap();
        assert!((st.amplitudes()[3 + 4 * 1] - u.matrix()[(1, 3)] * 0.5).norm() < 1e-15);
    }

    #[test]
    fn haar_purity_matches_exact_average() {
        let spec = EnsembleSpec::new(EnsembleKind::Haar, 3, 400, 21).unwrap();
        for (a, c) in [(1, 1), (1, 2), (2, 1)] {
            let est = purity_mc::<f64>(&spec, a, c).unwrap();
            let exact: f64 = avg_purity_exact(&PartitionDims::qubits(3, a as u32, c as u32).unwrap());
            assert!(est.z_against(exact) < 4.0, "a={a} c={c}: {est:?} vs {exact}");
        }
        assert!(purity_mc::<f64>(&spec, 4, 0).is_err());
    }

    #[test]
    fn page_deviation_below_bound() {
        let est = page_deviation_mc::<f64>(2, 64, 200, 5).unwrap();
        let bound = page_deviation_bound(2, 64).unwrap();
        assert!(est.mean <= bound, "{est:?} vs {bound}");
        assert!(est.mean > 0.0);
        assert!(page_deviation_mc::<f64>(1, 1, 10, 0).is_err());
    }
}

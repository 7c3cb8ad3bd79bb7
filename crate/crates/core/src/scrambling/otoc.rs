//! Out-of-time-order correlators of sampled unitaries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{stream_rng, EnsembleSpec, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::register::{RegisterLayout, SubsystemMask, AMPLITUDE_BUDGET};
use crate::scalar::{c, cr, Real, C};
use crate::stats::{ordered_par_try_map, Welford};

/// Single-qubit Pauli: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli<T: Real>(k: usize) -> Result<CMatrix<T>> {
    let (o, z) = (T::one(), T::zero());
    let m = match k {
        0 => vec![cr(o), cr(z), cr(z), cr(o)],
        1 => vec![cr(z), cr(o), cr(o), cr(z)],
        2 => vec![cr(z), c(z, -o), c(z, o), cr(z)],
        3 => vec![cr(o), cr(z), cr(z), cr(-o)],
        _ => return Err(Error::InvalidParameter(format!("Pauli index must be 0..4, got {k}"))),
    };
    CMatrix::from_vec(2, 2, m)
}

/// Pauli string whose base-4 digit `k` of `index` acts on qubit `k`, in the
/// little-endian site order of [`RegisterLayout`].
pub fn pauli_string<T: Real>(index: usize, n_sites: usize) -> Result<CMatrix<T>> {
    if n_sites == 0 || n_sites > 12 || index >= 1 << (2 * n_sites) {
        return Err(Error::InvalidParameter(format!(
            "Pauli string {index} on {n_sites} qubits"
        )));
    }
    let mut acc = pauli(index & 3)?;
    for k in 1..n_sites {
        acc = pauli::<T>(index >> (2 * k) & 3)?.kron(&acc);
    }
    Ok(acc)
}

/// Dense matrix of `op` acting on `sites` and identity elsewhere.
pub fn embed_operator<T: Real>(op: &CMatrix<T>, sites: &SubsystemMask, layout: &RegisterLayout) -> Result<CMatrix<T>> {
    sites.validate(layout)?;
    let k = layout.dim_of(sites.sites());
    if op.rows() != k || op.cols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: op.rows(),
        });
    }
    let d = layout.dim();
    if d as u128 * d as u128 > AMPLITUDE_BUDGET as u128 {
        return Err(Error::MemoryBudget {
            requested: d as u128 * d as u128,
            budget: AMPLITUDE_BUDGET,
        });
    }
    let rest = sites.complement(layout.n_sites());
    let in_offs = layout.offsets(sites.sites());
    let rest_offs = layout.offsets(rest.sites());
    let mut m = CMatrix::zeros(d, d);
    for &base in &rest_offs {
        for (a, &oa) in in_offs.iter().enumerate() {
            for (b, &ob) in in_offs.iter().enumerate() {
                m[(base + oa, base + ob)] = op[(a, b)];
            }
        }
    }
    Ok(m)
}

/// `F = Tr(W(t)† V† W(t) V)/d` and `C = ‖[V, W(t)]‖²_F / d` with `W(t) = U† W U`.
#[derive(Clone, Debug, PartialEq)]
pub struct OtocResult<T> {
    pub f: C<T>,
    pub c: T,
    pub d_w: usize,
    pub d_v: usize,
    pub d: usize,
}

/// Operators `W` (Heisenberg-evolved) and `V` used per sample.
#[derive(Clone, Debug, PartialEq)]
pub enum OtocOperators<T> {
    /// The same unitaries for every sample.
    Fixed { w: CMatrix<T>, v: CMatrix<T> },
    /// Exact average over all Pauli string pairs.
    PauliAverage,
    /// One uniformly random Pauli string pair per sample, identities included.
    RandomPauli,
}

fn check_unitary<T: Real>(op: &CMatrix<T>) -> Result<()> {
    if !op.is_square() {
        return Err(Error::NotSquare {
            rows: op.rows(),
            cols: op.cols(),
        });
    }
    let tol = T::structural_tol().max(T::lit(1e-9)) * T::from_count(op.rows()).sqrt();
    let defect = op.unitarity_defect();
    if defect > tol {
        return Err(Error::NotUnitary(defect.to_f64_lossy()));
    }
    Ok(())
}

fn otoc_embedded<T: Real>(u: &CMatrix<T>, ud: &CMatrix<T>, w: &CMatrix<T>, v: &CMatrix<T>) -> (C<T>, T) {
    otoc_embedded_evolved(&ud.matmul(w).matmul(u), v)
}

/// OTOC of `u` for `w_op` on `w_sites` and `v_op` on the disjoint `v_sites`.
pub fn otoc<T: Real>(
    u: &UnitaryMatrix<T>,
    layout: &RegisterLayout,
    w_sites: &SubsystemMask,
    w_op: &CMatrix<T>,
    v_sites: &SubsystemMask,
    v_op: &CMatrix<T>,
) -> Result<OtocResult<T>> {
    if u.dim() != layout.dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            found: u.dim(),
        });
    }
    if w_sites.is_empty() || v_sites.is_empty() {
        return Err(Error::InvalidMask("OTOC supports must be nonempty".into()));
    }
    w_sites.ensure_disjoint(v_sites)?;
    check_unitary(w_op)?;
    check_unitary(v_op)?;
    let w = embed_operator(w_op, w_sites, layout)?;
    let v = embed_operator(v_op, v_sites, layout)?;
    let (f, c) = otoc_embedded(u.matrix(), &u.matrix().adjoint(), &w, &v);
    Ok(OtocResult {
        f,
        c,
        d_w: w_op.rows(),
        d_v: v_op.rows(),
        d: layout.dim(),
    })
}

/// One sample of [`otoc_ensemble`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocSample {
    pub sample: usize,
    pub f_re: f64,
    pub f_im: f64,
    pub c: f64,
}

/// Per-sample OTOCs and their summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocEnsembleResult {
    pub samples: Vec<OtocSample>,
    pub mean_f_re: f64,
    pub mean_f_im: f64,
    /// `|E F|`.
    pub abs_mean_f: f64,
    /// Standard error of `Re F`.
    pub std_error: f64,
    pub mean_c: f64,
    pub d_w: usize,
    pub d_v: usize,
    pub d: usize,
}

/// OTOCs over `spec.samples` unitaries; sample `i` draws its unitary and any
/// random Pauli strings from stream `i`.
pub fn otoc_ensemble<T: Real>(
    spec: &EnsembleSpec,
    w_sites: &SubsystemMask,
    v_sites: &SubsystemMask,
    ops: &OtocOperators<T>,
) -> Result<OtocEnsembleResult> {
    spec.validate()?;
    let layout = RegisterLayout::qudits(spec.n_sites, spec.site_dim)?;
    w_sites.validate(&layout)?;
    v_sites.validate(&layout)?;
    if w_sites.is_empty() || v_sites.is_empty() {
        return Err(Error::InvalidMask("OTOC supports must be nonempty".into()));
    }
    w_sites.ensure_disjoint(v_sites)?;
    let (nw, nv) = (w_sites.len(), v_sites.len());
    let pauli_ops = !matches!(ops, OtocOperators::Fixed { .. });
    if pauli_ops && spec.site_dim != 2 {
        return Err(Error::InvalidParameter("Pauli operators need qubit sites".into()));
    }
    let (d_w, d_v) = (layout.dim_of(w_sites.sites()), layout.dim_of(v_sites.sites()));
    let fixed = match ops {
        OtocOperators::Fixed { w, v } => {
            check_unitary(w)?;
            check_unitary(v)?;
            Some((embed_operator(w, w_sites, &layout)?, embed_operator(v, v_sites, &layout)?))
        }
        _ => None,
    };
    let embed_pauli = |k: usize, sites: &SubsystemMask, n: usize| -> Result<CMatrix<T>> {
        embed_operator(&pauli_string(k, n)?, sites, &layout)
    };
    let all_pairs = if matches!(ops, OtocOperators::PauliAverage) {
        let ws = (0..d_w * d_w).map(|k| embed_pauli(k, w_sites, nw)).collect::<Result<Vec<_>>>()?;
        let vs = (0..d_v * d_v).map(|k| embed_pauli(k, v_sites, nv)).collect::<Result<Vec<_>>>()?;
        Some((ws, vs))
    } else {
        None
    };
    let samples = ordered_par_try_map(spec.samples, |i| -> Result<OtocSample> {
        let mut rng = stream_rng(spec.seed, i as u64);
        let u = spec.draw::<T, _>(&mut rng)?;
        let um = u.matrix();
        let ud = um.adjoint();
        let (f, cv) = match ops {
            OtocOperators::Fixed { .. } => {
                let (w, v) = fixed.as_ref().expect("embedded above");
                otoc_embedded(um, &ud, w, v)
            }
            OtocOperators::RandomPauli => {
                let w = embed_pauli(rng.random_range(0..d_w * d_w), w_sites, nw)?;
                let v = embed_pauli(rng.random_range(0..d_v * d_v), v_sites, nv)?;
                otoc_embedded(um, &ud, &w, &v)
            }
            OtocOperators::PauliAverage => {
                let (ws, vs) = all_pairs.as_ref().expect("built above");
                let mut f = cr(T::zero());
                let mut cv = T::zero();
                for w in ws {
                    let wt = ud.matmul(w).matmul(um);
                    for v in vs {
                        let (fi, ci) = otoc_embedded_evolved(&wt, v);
                        f = f + fi;
                        cv = cv + ci;
                    }
                }
                let n = T::from_count(ws.len() * vs.len());
                (f / n, cv / n)
            }
        };
        Ok(OtocSample {
            sample: i,
            f_re: f.re.to_f64_lossy(),
            f_im: f.im.to_f64_lossy(),
            c: cv.to_f64_lossy(),
        })
    })?;
    let mut re = Welford::new();
    let mut im = Welford::new();
    let mut cw = Welford::new();
    for s in &samples {
        re.push(s.f_re);
        im.push(s.f_im);
        cw.push(s.c);
    }
    Ok(OtocEnsembleResult {
        mean_f_re: re.mean(),
        mean_f_im: im.mean(),
        abs_mean_f: re.mean().hypot(im.mean()),
        std_error: re.std_error(),
        mean_c: cw.mean(),
        samples,
        d_w,
        d_v,
        d: layout.dim(),
    })
}

/// [`otoc_embedded`] with `W(t)` already formed.
fn otoc_embedded_evolved<T: Real>(wt: &CMatrix<T>, v: &CMatrix<T>) -> (C<T>, T) {
    let d = T::from_count(wt.rows());
    let wv = wt.matmul(v);
    let vw = v.matmul(wt);
    let f = wt.adjoint().matmul(&v.adjoint()).matmul(&wv).trace() / d;
    let comm = vw.sub(&wv).frobenius_norm();
    (f, comm * comm / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{chaotic_criterion_value, haar_pauli_otoc_mean};
    use crate::ensembles::{sample_haar, EnsembleKind};

    fn mask(s: &[usize]) -> SubsystemMask {
        SubsystemMask::new(s.iter().copied()).unwrap()
    }

    fn swap() -> UnitaryMatrix<f64> {
        let mut m = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m[(i, j)] = cr(1.0);
        }
        UnitaryMatrix::new(m).unwrap()
    }

    #[test]
    fn paulis_square_to_identity() {
        for k in 0..4 {
            let p = pauli::<f64>(k).unwrap();
            assert!(p.matmul(&p).sub(&CMatrix::identity(2)).frobenius_norm() < 1e-15);
        }
        assert!(pauli::<f64>(4).is_err());
        // Z on site 0, X on site 1.
        let zx = pauli_string::<f64>(3 + 4, 2).unwrap();
        let manual = pauli::<f64>(1).unwrap().kron(&pauli(3).unwrap());
        assert_eq!(zx, manual);
    }

    #[test]
    fn embedding_matches_kron() {
        let layout = RegisterLayout::qubits(3).unwrap();
        let x = pauli::<f64>(1).unwrap();
        let e = embed_operator(&x, &mask(&[1]), &layout).unwrap();
        let id = CMatrix::identity(2);
        assert_eq!(e, id.kron(&x).kron(&id));
        assert!(embed_operator(&x, &mask(&[0, 1]), &layout).is_err());
    }

    #[test]
    fn identity_dynamics_commute() {
        let layout = RegisterLayout::qubits(2).unwrap();
        let (x, z) = (pauli::<f64>(1).unwrap(), pauli::<f64>(3).unwrap());
        let r = otoc(&UnitaryMatrix::identity(4), &layout, &mask(&[0]), &x, &mask(&[1]), &z).unwrap();
        assert!((r.f - cr(1.0)).norm() < 1e-12);
        assert!(r.c.abs() < 1e-12);
        assert!(otoc(&UnitaryMatrix::identity(4), &layout, &mask(&[0]), &x, &mask(&[0]), &z).is_err());
    }

    #[test]
    fn swap_maximally_anticommutes() {
        let layout = RegisterLayout::qubits(2).unwrap();
        let (x, z) = (pauli::<f64>(1).unwrap(), pauli::<f64>(3).unwrap());
        let r = otoc(&swap(), &layout, &mask(&[0]), &x, &mask(&[1]), &z).unwrap();
        assert!((r.f - cr(-1.0)).norm() < 1e-12);
        assert!((r.c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn commutator_identity_for_haar() {
        let layout = RegisterLayout::qubits(3).unwrap();
        let u: UnitaryMatrix<f64> = sample_haar(8, &mut stream_rng(8, 0)).unwrap();
        let (y, z) = (pauli::<f64>(2).unwrap(), pauli_string::<f64>(3 * 4 + 1, 2).unwrap());
        let r = otoc(&u, &layout, &mask(&[2]), &y, &mask(&[0, 1]), &z).unwrap();
        assert!((r.c - (2.0 - 2.0 * r.f.re)).abs() < 1e-12);
        assert!(r.f.im.abs() < 1e-12);
    }

    #[test]
    fn pauli_average_is_unbiased() {
        let spec = EnsembleSpec::new(EnsembleKind::Haar, 3, 30, 1).unwrap();
        let r = otoc_ensemble::<f64>(&spec, &mask(&[1, 2]), &mask(&[0]), &OtocOperators::PauliAverage).unwrap();
        let exact: f64 = haar_pauli_otoc_mean(4, 2, 8);
        assert!((r.mean_f_re - exact).abs() < 4.0 * r.std_error + 1e-9, "{} vs {exact}", r.mean_f_re);
        assert!((r.mean_c - (2.0 - 2.0 * r.mean_f_re)).abs() < 1e-9);
    }

    #[test]
    fn random_pauli_near_chaotic_value() {
        let spec = EnsembleSpec::new(EnsembleKind::Haar, 4, 200, 3).unwrap();
        let r = otoc_ensemble::<f64>(&spec, &mask(&[1, 2, 3]), &mask(&[0]), &OtocOperators::RandomPauli).unwrap();
        let target: f64 = chaotic_criterion_value(2, 8);
        assert!((r.abs_mean_f - target).abs() < 4.0 * r.std_error, "{r:?}");
        let again = otoc_ensemble::<f64>(&spec, &mask(&[1, 2, 3]), &mask(&[0]), &OtocOperators::RandomPauli).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn fixed_operators_validated() {
        let spec = EnsembleSpec::new(EnsembleKind::Haar, 2, 3, 1).unwrap();
        let bad = OtocOperators::Fixed {
            w: CMatrix::zeros(2, 2),
            v: pauli(3).unwrap(),
        };
        assert!(otoc_ensemble::<f64>(&spec, &mask(&[0]), &mask(&[1]), &bad).is_err());
    }
}

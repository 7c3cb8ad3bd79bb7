//! Unitary ensembles: exact Haar sampling, random Clifford circuits and the
//! frame-potential estimator.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::register::{PureState, SubsystemMask, AMPLITUDE_BUDGET};
use crate::scalar::{c, cr, Real, C};
use crate::stats::{ordered_par_try_map, Welford};

/// Generator for sample `stream` of a run seeded with `seed`.
///
/// Every Monte Carlo sample owns its own ChaCha stream, so results do not
/// depend on how samples are spread over threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Square matrix with `U†U = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix<T> {
    matrix: CMatrix<T>,
}

fn unitary_tol<T: Real>() -> T {
    T::structural_tol().max(T::lit(1e-9))
}

impl<T: Real> UnitaryMatrix<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.unitarity_defect();
        if !(defect <= unitary_tol::<T>() * T::from_count(matrix.rows()).sqrt().max(T::one())) {
            return Err(Error::NotUnitary(defect.to_f64_lossy()));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &UnitaryMatrix<T>) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: self.matrix.matmul(&other.matrix),
        })
    }

    pub fn unitarity_defect(&self) -> T {
        self.matrix.unitarity_defect()
    }
}

/// Haar-random unitary of size `dim`: Gram-Schmidt (QR with positive
/// diagonal) of a complex Ginibre matrix, column by column.
pub fn sample_haar<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix<T>> {
    let m = haar_isometry(dim, dim, rng)?;
    Ok(UnitaryMatrix::from_unchecked(m))
}

/// First `k` columns of a Haar unitary of size `dim` (a `dim × k` isometry).
///
/// Consumes the generator exactly like the first `k` columns of
/// [`sample_haar`], so `haar_isometry(d, k)` equals the leading columns of
/// `sample_haar(d)` drawn from the same state.
pub fn haar_isometry<T: Real, R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Result<CMatrix<T>> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("Haar dimension must be ≥ 2, got {dim}")));
    }
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!("isometry needs 1 ≤ k ≤ {dim}, got {k}")));
    }
    let requested = dim as u128 * k as u128;
    if requested > AMPLITUDE_BUDGET as u128 {
        return Err(Error::MemoryBudget {
            requested,
            budget: AMPLITUDE_BUDGET,
        });
    }
    let half = T::lit(0.5).sqrt();
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v: Vec<C<T>> = (0..dim)
            .map(|_| {
                let re = T::sample_normal(rng);
                let im = T::sample_normal(rng);
                c(re * half, im * half)
            })
            .collect();
        // Two classical Gram-Schmidt passes keep the columns orthonormal to
        // working precision.
        for _ in 0..2 {
            for q in &cols {
                let proj: C<T> = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= *qi * proj;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        let inv = cr(T::one() / norm);
        v.iter_mut().for_each(|x| *x = *x * inv);
        cols.push(v);
    }
    Ok(CMatrix::from_fn(dim, k, |r, j| cols[j][r]))
}

/// Which unitary distribution drives an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    #[default]
    Haar,
    Clifford,
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleKind::Haar => "haar",
            EnsembleKind::Clifford => "clifford",
        })
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(EnsembleKind::Haar),
            "clifford" => Ok(EnsembleKind::Clifford),
            other => Err(Error::Parse(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// Largest register a random Clifford circuit may act on.
pub const MAX_CLIFFORD_QUBITS: usize = 12;

/// Ensemble, register size, sample count and seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n_sites: usize,
    pub site_dim: usize,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n_sites: usize, samples: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            kind,
            n_sites,
            site_dim: 2,
            samples,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be ≥ 1".into()));
        }
        if self.n_sites == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one site".into()));
        }
        if self.site_dim < 2 {
            return Err(Error::InvalidParameter("site dimension must be ≥ 2".into()));
        }
        if self.kind == EnsembleKind::Clifford {
            if self.site_dim != 2 {
                return Err(Error::InvalidParameter("clifford ensemble requires qubits".into()));
            }
            if self.n_sites > MAX_CLIFFORD_QUBITS {
                return Err(Error::InvalidParameter(format!(
                    "clifford ensemble supports at most {MAX_CLIFFORD_QUBITS} qubits"
                )));
            }
        }
        Ok(())
    }

    /// Total dimension `site_dim^n_sites`, budget-checked.
    pub fn dim(&self) -> Result<usize> {
        let d = (self.site_dim as u128).checked_pow(self.n_sites as u32).unwrap_or(u128::MAX);
        if d > AMPLITUDE_BUDGET as u128 {
            return Err(Error::MemoryBudget {
                requested: d,
                budget: AMPLITUDE_BUDGET,
            });
        }
        Ok(d as usize)
    }

    /// Dense unitary for sample `index`.
    pub fn sample_unitary<T: Real>(&self, index: u64) -> Result<UnitaryMatrix<T>> {
        let mut rng = stream_rng(self.seed, index);
        self.draw(&mut rng)
    }

    /// Dense unitary drawn from `rng`.
    pub fn draw<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitaryMatrix<T>> {
        self.validate()?;
        let dim = self.dim()?;
        if dim as u128 * dim as u128 > AMPLITUDE_BUDGET as u128 {
            return Err(Error::MemoryBudget {
                requested: dim as u128 * dim as u128,
                budget: AMPLITUDE_BUDGET,
            });
        }
        match self.kind {
            EnsembleKind::Haar => sample_haar(dim, rng),
            EnsembleKind::Clifford => {
                let circuit = sample_clifford_circuit(self.n_sites, rng)?;
                circuit_to_unitary(&circuit, self.n_sites)
            }
        }
    }
}

/// One gate of a Clifford circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
}

impl Gate {
    fn max_site(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::S(q) => q,
            Gate::Cnot(a, b) => a.max(b),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.max_site() >= n_qubits {
            return Err(Error::InvalidParameter(format!(
                "gate '{self}' targets a site beyond {n_qubits} qubits"
            )));
        }
        if let Gate::Cnot(a, b) = *self {
            if a == b {
                return Err(Error::InvalidParameter(format!("CNOT control and target coincide ({a})")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::Cnot(a, b) => write!(f, "CNOT {a} {b}"),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let name = parts.next().ok_or_else(|| Error::Parse("empty gate line".into()))?;
        let mut site = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing site in '{line}'")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad site in '{line}'")))
        };
        let gate = match name {
            "H" => Gate::H(site()?),
            "S" => Gate::S(site()?),
            "CNOT" => {
                let a = site()?;
                Gate::Cnot(a, site()?)
            }
            other => return Err(Error::Parse(format!("unknown gate '{other}'"))),
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("trailing tokens in '{line}'")));
        }
        Ok(gate)
    }
}

/// Ordered gate list; first gate is applied first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDescription {
    gates: Vec<Gate>,
}

impl CircuitDescription {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(n_qubits))
    }
}

impl fmt::Display for CircuitDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for CircuitDescription {
    type Err = Error;

    /// One gate per line; blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let gates = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { gates })
    }
}

/// Gates per random Clifford circuit on `n` qubits.
pub fn clifford_length(n_qubits: usize) -> usize {
    6 * n_qubits * n_qubits
}

/// Random circuit of `6 n²` gates. Each gate picks its type uniformly from
/// {H, S, CNOT} ({H, S} when `n = 1`), then its sites uniformly.
pub fn sample_clifford_circuit<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<CircuitDescription> {
    if n_qubits == 0 || n_qubits > MAX_CLIFFORD_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "clifford circuits need 1 ≤ n ≤ {MAX_CLIFFORD_QUBITS}, got {n_qubits}"
        )));
    }
    let kinds = if n_qubits == 1 { 2 } else { 3 };
    let gates = (0..clifford_length(n_qubits))
        .map(|_| match rng.random_range(0..kinds) {
            0 => Gate::H(rng.random_range(0..n_qubits)),
            1 => Gate::S(rng.random_range(0..n_qubits)),
            _ => {
                let a = rng.random_range(0..n_qubits);
                let mut b = rng.random_range(0..n_qubits - 1);
                if b >= a {
                    b += 1;
                }
                Gate::Cnot(a, b)
            }
        })
        .collect();
    Ok(CircuitDescription { gates })
}

/// Applies one gate to rows of a row-major buffer with `width` entries per
/// row; qubit `q` of the row index has stride `strides[q]`.
fn apply_gate_rows<T: Real>(data: &mut [C<T>], width: usize, strides: &[usize], gate: Gate) {
    let n_rows = data.len() / width;
    let bit = |i: usize, q: usize| (i / strides[q]) & 1 == 1;
    match gate {
        Gate::H(q) => {
            let h = cr(T::FRAC_1_SQRT_2());
            let st = strides[q];
            for i in (0..n_rows).filter(|&i| !bit(i, q)) {
                let j = i + st;
                for k in 0..width {
                    let a = data[i * width + k];
                    let b = data[j * width + k];
                    data[i * width + k] = (a + b) * h;
                    data[j * width + k] = (a - b) * h;
                }
            }
        }
        Gate::S(q) => {
            let phase = c(T::zero(), T::one());
            for i in (0..n_rows).filter(|&i| bit(i, q)) {
                for x in &mut data[i * width..(i + 1) * width] {
                    *x = *x * phase;
                }
            }
        }
        Gate::Cnot(ctl, tgt) => {
            let st = strides[tgt];
            for i in (0..n_rows).filter(|&i| bit(i, ctl) && !bit(i, tgt)) {
                let j = i + st;
                for k in 0..width {
                    data.swap(i * width + k, j * width + k);
                }
            }
        }
    }
}

/// Dense unitary of a circuit on `n_qubits` (little-endian qubit order).
pub fn circuit_to_unitary<T: Real>(circuit: &CircuitDescription, n_qubits: usize) -> Result<UnitaryMatrix<T>> {
    circuit.validate(n_qubits)?;
    let dim = 1usize << n_qubits;
    if dim as u128 * dim as u128 > AMPLITUDE_BUDGET as u128 {
        return Err(Error::MemoryBudget {
            requested: dim as u128 * dim as u128,
            budget: AMPLITUDE_BUDGET,
        });
    }
    let strides: Vec<usize> = (0..n_qubits).map(|q| 1 << q).collect();
    let mut m = CMatrix::<T>::identity(dim);
    for &g in circuit.gates() {
        apply_gate_rows(m.data_mut(), dim, &strides, g);
    }
    Ok(UnitaryMatrix::from_unchecked(m))
}

/// Applies a circuit directly to a state; circuit qubit `k` acts on site
/// `targets.sites()[k]`, which must be a qubit.
pub fn apply_circuit<T: Real>(
    state: &PureState<T>,
    circuit: &CircuitDescription,
    targets: &SubsystemMask,
) -> Result<PureState<T>> {
    targets.validate(state.layout())?;
    circuit.validate(targets.len())?;
    let layout = state.layout();
    if let Some(&s) = targets.sites().iter().find(|&&s| layout.site_dim(s) != 2) {
        return Err(Error::InvalidParameter(format!("site {s} is not a qubit")));
    }
    let all = layout.strides();
    let strides: Vec<usize> = targets.sites().iter().map(|&s| all[s]).collect();
    let mut amps = state.amplitudes().to_vec();
    for &g in circuit.gates() {
        apply_gate_rows(&mut amps, 1, &strides, g);
    }
    Ok(PureState::from_parts_unchecked(layout.clone(), amps))
}

/// `Tr(U† V)`.
fn overlap_trace<T: Real>(u: &UnitaryMatrix<T>, v: &UnitaryMatrix<T>) -> C<T> {
    u.matrix()
        .data()
        .iter()
        .zip(v.matrix().data())
        .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
}

/// Minimum sample count accepted by [`frame_potential`].
pub const MIN_FRAME_SAMPLES: usize = 100;

/// Monte Carlo estimate of `E|Tr(U†V)|^{2t}` from `spec.samples` independent
/// pairs; returns `(estimate, std_error)`. Pair `i` uses streams `2i` and `2i+1`.
pub fn frame_potential<T: Real>(spec: &EnsembleSpec, t: u32) -> Result<(f64, f64)> {
    if !(1..=2).contains(&t) {
        return Err(Error::InvalidParameter(format!("frame potential order must be 1 or 2, got {t}")));
    }
    if spec.samples < MIN_FRAME_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "frame potential needs at least {MIN_FRAME_SAMPLES} samples, got {}",
            spec.samples
        )));
    }
    let values = ordered_par_try_map(spec.samples, |i| -> Result<f64> {
        let u = spec.sample_unitary::<T>(2 * i as u64)?;
        let v = spec.sample_unitary::<T>(2 * i as u64 + 1)?;
        let tr = overlap_trace(&u, &v).norm_sqr().to_f64_lossy();
        Ok(tr.powi(t as i32))
    })?;
    let mut w = Welford::new();
    w.extend(values);
    Ok((w.mean(), w.std_error()))
}

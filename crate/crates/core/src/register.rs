//! Qudit registers: layouts, pure states, density matrices and the partial
//! trace / purification machinery everything else is built on.
//!
//! Sites are little-endian: site 0 varies fastest in the amplitude index, so
//! the basis state with digits `(x_0, x_1, ...)` lives at
//! `x_0 + d_0 * (x_1 + d_1 * (...))`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::ensembles::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvalsh, CMatrix};
use crate::scalar::{cr, Real, C};

/// Largest number of amplitudes (or matrix entries) a register may hold.
pub const AMPLITUDE_BUDGET: usize = 1 << 24;

/// Named parts of the scrambling setup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Reference `R`, purifies the secret.
    #[serde(rename = "R")]
    Reference,
    /// The dealer's secret-carrying site `A`.
    #[serde(rename = "A")]
    Secret,
    /// Remaining player sites `B`.
    #[serde(rename = "B")]
    Players,
    /// Memory `B'` purifying mixed players.
    #[serde(rename = "Bmem")]
    Memory,
}

impl Role {
    pub fn label(self) -> &'static str {
        match self {
            Role::Reference => "R",
            Role::Secret => "A",
            Role::Players => "B",
            Role::Memory => "Bmem",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-site dimensions plus the role assignment of sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    site_dims: Vec<usize>,
    roles: BTreeMap<Role, Vec<usize>>,
}

fn checked_dim(dims: &[usize]) -> Result<usize> {
    let total: u128 = dims.iter().map(|&d| d as u128).product();
    if total > AMPLITUDE_BUDGET as u128 {
        return Err(Error::MemoryBudget {
            requested: total,
            budget: AMPLITUDE_BUDGET,
        });
    }
    Ok(total as usize)
}

impl RegisterLayout {
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        if let Some(i) = site_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!("site {i} has dimension 0")));
        }
        checked_dim(&site_dims)?;
        Ok(Self {
            site_dims,
            roles: BTreeMap::new(),
        })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn qudits(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    /// Assigns `role` to `sites`, replacing any previous assignment of that role.
    pub fn with_role(mut self, role: Role, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mask = SubsystemMask::new(sites)?;
        mask.validate(&self)?;
        for (other, claimed) in &self.roles {
            if *other == role {
                continue;
            }
            if let Some(&s) = claimed.iter().find(|s| mask.contains(**s)) {
                return Err(Error::InvalidLayout(format!(
                    "site {s} already belongs to role {other}"
                )));
            }
        }
        if mask.is_empty() {
            self.roles.remove(&role);
        } else {
            self.roles.insert(role, mask.sites);
        }
        Ok(self)
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    #[inline]
    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    #[inline]
    pub fn site_dim(&self, site: usize) -> usize {
        self.site_dims[site]
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Dimension of the given sites taken together.
    pub fn dim_of(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| self.site_dims[s]).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut acc = 1;
        self.site_dims
            .iter()
            .map(|&d| {
                let s = acc;
                acc *= d;
                s
            })
            .collect()
    }

    /// Sites holding `role`; empty when the role is unassigned.
    pub fn role(&self, role: Role) -> &[usize] {
        self.roles.get(&role).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn role_mask(&self, role: Role) -> SubsystemMask {
        SubsystemMask {
            sites: self.role(role).to_vec(),
        }
    }

    pub fn roles(&self) -> impl Iterator<Item = (Role, &[usize])> {
        self.roles.iter().map(|(r, s)| (*r, s.as_slice()))
    }

    pub fn all_sites(&self) -> SubsystemMask {
        SubsystemMask {
            sites: (0..self.n_sites()).collect(),
        }
    }

    /// Layout of the listed sites, in the listed order, with roles carried over.
    pub fn sub_layout(&self, sites: &[usize]) -> RegisterLayout {
        let site_dims = sites.iter().map(|&s| self.site_dims[s]).collect();
        let mut roles = BTreeMap::new();
        for (role, claimed) in &self.roles {
            let mut mapped: Vec<usize> = sites
                .iter()
                .enumerate()
                .filter(|(_, s)| claimed.contains(s))
                .map(|(i, _)| i)
                .collect();
            mapped.sort_unstable();
            if !mapped.is_empty() {
                roles.insert(*role, mapped);
            }
        }
        RegisterLayout { site_dims, roles }
    }

    /// `self` followed by `other`, with `other`'s sites shifted.
    pub fn concat(&self, other: &RegisterLayout) -> Result<RegisterLayout> {
        let mut dims = self.site_dims.clone();
        dims.extend_from_slice(&other.site_dims);
        checked_dim(&dims)?;
        let shift = self.n_sites();
        let mut roles = self.roles.clone();
        for (role, sites) in &other.roles {
            let entry = roles.entry(*role).or_default();
            entry.extend(sites.iter().map(|s| s + shift));
            entry.sort_unstable();
        }
        Ok(RegisterLayout {
            site_dims: dims,
            roles,
        })
    }

    /// Global index offsets of every configuration of `sites`, enumerated
    /// little-endian in the order the sites are listed.
    pub fn offsets(&self, sites: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offs = vec![0usize];
        for &s in sites {
            let d = self.site_dims[s];
            let st = strides[s];
            let mut next = Vec::with_capacity(offs.len() * d);
            for digit in 0..d {
                next.extend(offs.iter().map(|&o| o + digit * st));
            }
            offs = next;
        }
        offs
    }

    /// Digits of a global basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        self.site_dims
            .iter()
            .map(|&d| {
                let x = index % d;
                index /= d;
                x
            })
            .collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites(),
                found: digits.len(),
            });
        }
        let mut idx = 0;
        for (&x, (&d, st)) in digits.iter().zip(self.site_dims.iter().zip(self.strides())) {
            if x >= d {
                return Err(Error::InvalidParameter(format!("digit {x} exceeds site dimension {d}")));
            }
            idx += x * st;
        }
        Ok(idx)
    }
}

/// Sorted set of site indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct SubsystemMask {
    sites: Vec<usize>,
}

impl SubsystemMask {
    pub fn new(sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut sites: Vec<usize> = sites.into_iter().collect();
        sites.sort_unstable();
        if let Some(w) = sites.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidMask(format!("site {} listed twice", w[0])));
        }
        Ok(Self { sites })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    #[inline]
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        match self.sites.last() {
            Some(&s) if s >= layout.n_sites() => Err(Error::InvalidMask(format!(
                "site {s} out of range for {} sites",
                layout.n_sites()
            ))),
            _ => Ok(()),
        }
    }

    /// First shared site, if any.
    pub fn overlap(&self, other: &SubsystemMask) -> Option<usize> {
        self.sites.iter().copied().find(|&s| other.contains(s))
    }

    pub fn ensure_disjoint(&self, other: &SubsystemMask) -> Result<()> {
        match self.overlap(other) {
            Some(s) => Err(Error::Overlap(s)),
            None => Ok(()),
        }
    }

    pub fn union(&self, other: &SubsystemMask) -> SubsystemMask {
        let mut sites = self.sites.clone();
        sites.extend(other.sites.iter().copied().filter(|s| !self.contains(*s)));
        sites.sort_unstable();
        SubsystemMask { sites }
    }

    pub fn difference(&self, other: &SubsystemMask) -> SubsystemMask {
        SubsystemMask {
            sites: self.sites.iter().copied().filter(|s| !other.contains(*s)).collect(),
        }
    }

    /// Sites of `0..n_sites` not in the mask.
    pub fn complement(&self, n_sites: usize) -> SubsystemMask {
        SubsystemMask {
            sites: (0..n_sites).filter(|s| !self.contains(*s)).collect(),
        }
    }
}

impl fmt::Display for SubsystemMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Anything whose marginals can be taken: pure states and density matrices.
pub trait QuantumState<T: Real> {
    fn layout(&self) -> &RegisterLayout;

    /// Reduced density matrix on `sites`, indexed little-endian in the listed order.
    fn reduce_ordered(&self, sites: &[usize]) -> Result<DensityMatrix<T>>;

    /// Spectrum of the reduced state on `sites` (zero eigenvalues may be omitted).
    fn reduced_spectrum(&self, sites: &[usize]) -> Result<Vec<T>>;
}

fn check_sites(layout: &RegisterLayout, sites: &[usize]) -> Result<()> {
    let mut seen = vec![false; layout.n_sites()];
    for &s in sites {
        if s >= layout.n_sites() {
            return Err(Error::InvalidMask(format!("site {s} out of range")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidMask(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

/// Normalized amplitude vector over a register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    layout: RegisterLayout,
    amplitudes: Vec<C<T>>,
}

impl<T: Real> PureState<T> {
    /// Wraps amplitudes; they must already be normalized.
    pub fn new(layout: RegisterLayout, amplitudes: Vec<C<T>>) -> Result<Self> {
        let state = Self::from_parts(layout, amplitudes)?;
        let norm = state.norm();
        if (norm - T::one()).abs() > T::structural_tol() {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        Ok(state)
    }

    /// Wraps and normalizes arbitrary nonzero amplitudes.
    pub fn normalized(layout: RegisterLayout, amplitudes: Vec<C<T>>) -> Result<Self> {
        let mut state = Self::from_parts(layout, amplitudes)?;
        let norm = state.norm();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        let inv = cr(T::one() / norm);
        state.amplitudes.iter_mut().for_each(|a| *a = *a * inv);
        Ok(state)
    }

    fn from_parts(layout: RegisterLayout, amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { layout, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(layout: RegisterLayout, amplitudes: Vec<C<T>>) -> Self {
        debug_assert_eq!(layout.dim(), amplitudes.len());
        Self { layout, amplitudes }
    }

    /// Computational basis state with the given per-site digits.
    pub fn basis(layout: RegisterLayout, digits: &[usize]) -> Result<Self> {
        let idx = layout.index_of(digits)?;
        let mut amps = vec![C::zero(); layout.dim()];
        amps[idx] = C::one();
        Ok(Self {
            layout,
            amplitudes: amps,
        })
    }

    /// `|0...0⟩`.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![C::zero(); layout.dim()];
        amps[0] = C::one();
        Self {
            layout,
            amplitudes: amps,
        }
    }

    #[inline]
    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState<T>) -> Result<C<T>> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                found: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Same amplitudes under a relabelled layout of identical dimensions.
    pub fn with_layout(mut self, layout: RegisterLayout) -> Result<Self> {
        if layout.site_dims() != self.layout.site_dims() {
            return Err(Error::InvalidLayout("site dimensions differ".into()));
        }
        self.layout = layout;
        Ok(self)
    }

    /// `self ⊗ other`, with `other`'s sites appended after `self`'s.
    pub fn tensor(&self, other: &PureState<T>) -> Result<PureState<T>> {
        tensor(self, other)
    }

    /// Applies `u` to the target sites (identity elsewhere).
    pub fn apply(&self, u: &UnitaryMatrix<T>, targets: &SubsystemMask) -> Result<PureState<T>> {
        apply_unitary(self, u, targets)
    }

    fn matrix_view(&self, sites: &[usize]) -> CMatrix<T> {
        let keep_offs = self.layout.offsets(sites);
        let rest: Vec<usize> = (0..self.layout.n_sites()).filter(|s| !sites.contains(s)).collect();
        let rest_offs = self.layout.offsets(&rest);
        let mut data = Vec::with_capacity(keep_offs.len() * rest_offs.len());
        for &k in &keep_offs {
            data.extend(rest_offs.iter().map(|&r| self.amplitudes[k + r]));
        }
        CMatrix::from_vec(keep_offs.len(), rest_offs.len(), data).expect("consistent shape")
    }

    /// Indices (within the target sub-register, little-endian in mask order)
    /// on which the state has support for some configuration of the rest.
    pub fn target_support(&self, targets: &SubsystemMask) -> Vec<usize> {
        let t_offs = self.layout.offsets(targets.sites());
        let rest = targets.complement(self.layout.n_sites());
        let r_offs = self.layout.offsets(rest.sites());
        let tiny = T::eigen_floor() * T::eigen_floor();
        (0..t_offs.len())
            .filter(|&j| {
                r_offs
                    .iter()
                    .any(|&r| self.amplitudes[t_offs[j] + r].norm_sqr() > tiny)
            })
            .collect()
    }
}

impl<T: Real> QuantumState<T> for PureState<T> {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn reduce_ordered(&self, sites: &[usize]) -> Result<DensityMatrix<T>> {
        check_sites(&self.layout, sites)?;
        let m = self.matrix_view(sites);
        Ok(DensityMatrix {
            layout: self.layout.sub_layout(sites),
            matrix: m.gram_rows(),
        })
    }

    fn reduced_spectrum(&self, sites: &[usize]) -> Result<Vec<T>> {
        check_sites(&self.layout, sites)?;
        let m = self.matrix_view(sites);
        if m.rows() <= m.cols() {
            eigvalsh(&m.gram_rows())
        } else {
            // Same nonzero spectrum from the smaller Gram matrix M^T M̄.
            let t = CMatrix::from_fn(m.cols(), m.rows(), |r, c| m[(c, r)].conj());
            eigvalsh(&t.gram_rows())
        }
    }
}

/// Kronecker product of two pure states; `b`'s sites follow `a`'s.
pub fn tensor<T: Real>(a: &PureState<T>, b: &PureState<T>) -> Result<PureState<T>> {
    let layout = a.layout.concat(&b.layout)?;
    let mut amps = Vec::with_capacity(layout.dim());
    for &bb in &b.amplitudes {
        amps.extend(a.amplitudes.iter().map(|&aa| aa * bb));
    }
    Ok(PureState {
        layout,
        amplitudes: amps,
    })
}

/// `(1/√d) Σ_i |ii⟩` on two sites of dimension `d`.
pub fn max_entangled_pair<T: Real>(d: usize) -> Result<PureState<T>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("pair dimension must be ≥ 2, got {d}")));
    }
    let layout = RegisterLayout::new(vec![d, d])?;
    let mut amps = vec![C::zero(); d * d];
    let w = cr(T::one() / T::from_count(d).sqrt());
    for i in 0..d {
        amps[i + d * i] = w;
    }
    Ok(PureState {
        layout,
        amplitudes: amps,
    })
}

/// Applies a square matrix to the target sites of a state.
pub fn apply_unitary<T: Real>(
    state: &PureState<T>,
    u: &UnitaryMatrix<T>,
    targets: &SubsystemMask,
) -> Result<PureState<T>> {
    apply_matrix(state, u.matrix(), targets)
}

pub(crate) fn apply_matrix<T: Real>(
    state: &PureState<T>,
    m: &CMatrix<T>,
    targets: &SubsystemMask,
) -> Result<PureState<T>> {
    targets.validate(&state.layout)?;
    let dt = state.layout.dim_of(targets.sites());
    if !m.is_square() || m.rows() != dt {
        return Err(Error::DimensionMismatch {
            expected: dt,
            found: m.rows(),
        });
    }
    let t_offs = state.layout.offsets(targets.sites());
    let rest = targets.complement(state.layout.n_sites());
    let r_offs = state.layout.offsets(rest.sites());
    let mut out = vec![C::zero(); state.amplitudes.len()];
    let mut x = vec![C::zero(); dt];
    for &base in &r_offs {
        for (xj, &o) in x.iter_mut().zip(&t_offs) {
            *xj = state.amplitudes[base + o];
        }
        for (i, &o) in t_offs.iter().enumerate() {
            let row = m.row(i);
            let mut acc = C::zero();
            for (&a, &b) in row.iter().zip(&x) {
                acc += a * b;
            }
            out[base + o] = acc;
        }
    }
    Ok(PureState {
        layout: state.layout.clone(),
        amplitudes: out,
    })
}

/// Applies the columns `cols[:, k]` of a unitary to the input components
/// `support[k]` of the target sub-register. Components outside `support`
/// must be zero; the other columns of the unitary never contribute then.
pub(crate) fn apply_columns<T: Real>(
    state: &PureState<T>,
    cols: &CMatrix<T>,
    support: &[usize],
    targets: &SubsystemMask,
) -> Result<PureState<T>> {
    let dt = state.layout.dim_of(targets.sites());
    if cols.rows() != dt || cols.cols() != support.len() {
        return Err(Error::DimensionMismatch {
            expected: dt,
            found: cols.rows(),
        });
    }
    let t_offs = state.layout.offsets(targets.sites());
    let rest = targets.complement(state.layout.n_sites());
    let r_offs = state.layout.offsets(rest.sites());
    let mut out = vec![C::zero(); state.amplitudes.len()];
    for &base in &r_offs {
        for (k, &j) in support.iter().enumerate() {
            let xk = state.amplitudes[base + t_offs[j]];
            if xk.is_zero() {
                continue;
            }
            for (i, &o) in t_offs.iter().enumerate() {
                out[base + o] += cols[(i, k)] * xk;
            }
        }
    }
    Ok(PureState {
        layout: state.layout.clone(),
        amplitudes: out,
    })
}

/// Reduced state on `keep`.
pub fn partial_trace<T: Real, S: QuantumState<T> + ?Sized>(
    state: &S,
    keep: &SubsystemMask,
) -> Result<DensityMatrix<T>> {
    if keep.is_empty() {
        return Err(Error::InvalidMask("partial trace must keep at least one site".into()));
    }
    keep.validate(state.layout())?;
    state.reduce_ordered(keep.sites())
}

/// Purification `Σ_i √λ_i |v_i⟩|i⟩` with a single memory site of dimension
/// equal to the numerical rank (eigenvalues above the floor).
pub fn purify<T: Real>(rho: &DensityMatrix<T>) -> Result<PureState<T>> {
    let eig = eigh(&rho.matrix)?;
    if let Some(&min) = eig.values.last() {
        if min < -T::structural_tol() {
            return Err(Error::NotPositive(min.to_f64_lossy()));
        }
    }
    let v = eig.vectors.expect("vectors requested");
    let kept: Vec<(usize, T)> = eig
        .values
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, l)| *l > T::eigen_floor())
        .collect();
    let rank = kept.len().max(1);
    let n_sys = rho.layout.n_sites();
    let memory = RegisterLayout::new(vec![rank])?;
    let layout = rho
        .layout
        .concat(&memory)?
        .with_role(Role::Memory, [n_sys])?;
    let d = rho.dim();
    let mut amps = vec![C::zero(); d * rank];
    for (k, &(col, lambda)) in kept.iter().enumerate() {
        let w = lambda.sqrt();
        for i in 0..d {
            amps[i + d * k] = v[(i, col)] * w;
        }
    }
    PureState::normalized(layout, amps)
}

/// Hermitian, unit-trace, positive semidefinite matrix over a register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    layout: RegisterLayout,
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(layout: RegisterLayout, matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if matrix.rows() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: matrix.rows(),
            });
        }
        let tol = T::structural_tol();
        let herm = matrix.hermiticity_defect();
        if herm > tol {
            return Err(Error::NotHermitian(herm.to_f64_lossy()));
        }
        let tr = matrix.trace().re;
        if (tr - T::one()).abs() > tol {
            return Err(Error::BadTrace(tr.to_f64_lossy()));
        }
        let vals = eigvalsh(&matrix)?;
        if let Some(&min) = vals.last() {
            if min < -tol {
                return Err(Error::NotPositive(min.to_f64_lossy()));
            }
        }
        Ok(Self { layout, matrix })
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(layout: RegisterLayout, matrix: CMatrix<T>) -> Self {
        Self { layout, matrix }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &PureState<T>) -> Self {
        let a = state.amplitudes();
        let n = a.len();
        let matrix = CMatrix::from_fn(n, n, |r, c| a[r] * a[c].conj());
        Self {
            layout: state.layout.clone(),
            matrix,
        }
    }

    /// `I/d`.
    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        let matrix = CMatrix::identity(d).scale(cr(T::one() / T::from_count(d)));
        Self { layout, matrix }
    }

    /// Diagonal state with the given probabilities (must sum to one).
    pub fn diagonal(layout: RegisterLayout, probs: &[T]) -> Result<Self> {
        Self::new(layout, CMatrix::diagonal(probs))
    }

    #[inline]
    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        eigvalsh(&self.matrix)
    }

    /// `self ⊗ other` with `other`'s sites appended.
    pub fn tensor(&self, other: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        let layout = self.layout.concat(&other.layout)?;
        // Little-endian sites: the later register is the slower index.
        Ok(Self {
            layout,
            matrix: other.matrix.kron(&self.matrix),
        })
    }

    /// Same matrix under a relabelled layout of identical dimensions.
    pub fn with_layout(mut self, layout: RegisterLayout) -> Result<Self> {
        if layout.site_dims() != self.layout.site_dims() {
            return Err(Error::InvalidLayout("site dimensions differ".into()));
        }
        self.layout = layout;
        Ok(self)
    }
}

impl<T: Real> QuantumState<T> for DensityMatrix<T> {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn reduce_ordered(&self, sites: &[usize]) -> Result<DensityMatrix<T>> {
        check_sites(&self.layout, sites)?;
        let k_offs = self.layout.offsets(sites);
        let rest: Vec<usize> = (0..self.layout.n_sites()).filter(|s| !sites.contains(s)).collect();
        let r_offs = self.layout.offsets(&rest);
        let n = k_offs.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &ki) in k_offs.iter().enumerate() {
            for (j, &kj) in k_offs.iter().enumerate() {
                let mut acc = C::zero();
                for &r in &r_offs {
                    acc += self.matrix[(ki + r, kj + r)];
                }
                m[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix {
            layout: self.layout.sub_layout(sites),
            matrix: m,
        })
    }

    fn reduced_spectrum(&self, sites: &[usize]) -> Result<Vec<T>> {
        self.reduce_ordered(sites)?.eigenvalues()
    }
}

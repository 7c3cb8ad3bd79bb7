//! Dense complex matrices and a Hermitian eigensolver.
//!
//! The eigensolver reduces a Hermitian matrix to real symmetric tridiagonal
//! form with Householder reflectors, removes the off-diagonal phases with a
//! diagonal unitary and finishes with implicit-shift QL iterations. It is the
//! hot path of every entropy evaluation, so the eigenvalue-only route skips all
//! eigenvector bookkeeping.

use std::ops::{Index, IndexMut, Mul};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = cr(v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C<T>> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[C<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ other` in the conventional (row-major) sense.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Largest absolute deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// `‖M†M − I‖_F`.
    pub fn unitarity_defect(&self) -> T {
        let g = self.adjoint().matmul(self);
        g.sub(&Self::identity(self.cols)).frobenius_norm()
    }

    /// `A A†` computed on the upper triangle only.
    pub fn gram_rows(&self) -> Self {
        let n = self.rows;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            let ri = self.row(i);
            for j in i..n {
                let rj = self.row(j);
                let mut acc = C::zero();
                for (&a, &b) in ri.iter().zip(rj) {
                    acc += a * b.conj();
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
        g
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh<T> {
    /// Eigenvalues in descending order.
    pub values: Vec<T>,
    /// Column `j` is the eigenvector of `values[j]`, when requested.
    pub vectors: Option<CMatrix<T>>,
}

/// Eigenvalues of a Hermitian matrix, descending. Only the lower triangle is read.
pub fn eigvalsh<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    Ok(eigh_impl(m, false)?.values)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending. Each eigenvector's phase is fixed by
/// making its largest-magnitude component real and positive (earliest index
/// wins ties), so the output is deterministic.
pub fn eigh<T: Real>(m: &CMatrix<T>) -> Result<Eigh<T>> {
    eigh_impl(m, true)
}

struct Reflector<T> {
    start: usize,
    v: Vec<C<T>>,
    tau: T,
}

fn eigh_impl<T: Real>(m: &CMatrix<T>, want_vectors: bool) -> Result<Eigh<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: want_vectors.then(|| CMatrix::zeros(0, 0)),
        });
    }
    let mut a = m.data.clone();
    let mut offdiag: Vec<C<T>> = vec![C::zero(); n];
    let mut reflectors: Vec<Reflector<T>> = Vec::new();

    let mut p = vec![C::<T>::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let start = k + 1;
        let len = n - start;
        let x0 = a[start * n + k];
        let tail: T = (start + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if len == 1 || tail == T::zero() {
            offdiag[k] = x0;
            continue;
        }
        let alpha = (tail + x0.norm_sqr()).sqrt();
        let x0_abs = x0.norm();
        let phase = if x0_abs > T::zero() { x0 / x0_abs } else { C::one() };
        let mut v: Vec<C<T>> = (start..n).map(|i| a[i * n + k]).collect();
        v[0] += phase * alpha;
        let tau = T::lit(2.0) / (T::lit(2.0) * alpha * (alpha + x0_abs));

        // p = tau * A22 v
        for (pi, i) in p.iter_mut().zip(start..n) {
            let row = &a[i * n + start..i * n + n];
            let mut acc = C::zero();
            for (&aij, &vj) in row.iter().zip(&v) {
                acc += aij * vj;
            }
            *pi = acc * tau;
        }
        let vp: C<T> = v.iter().zip(&p[..len]).map(|(vi, &pi)| vi.conj() * pi).sum();
        let kappa = vp.re * tau * T::lit(0.5);
        for (pi, &vi) in p[..len].iter_mut().zip(&v) {
            *pi -= vi * kappa;
        }
        // A22 -= v q^H + q v^H
        for ii in 0..len {
            let vi = v[ii];
            let qi = p[ii];
            let row = &mut a[(start + ii) * n + start..(start + ii) * n + n];
            for ((aij, &vj), &qj) in row.iter_mut().zip(&v).zip(&p[..len]) {
                *aij -= vi * qj.conj() + qi * vj.conj();
            }
        }
        offdiag[k] = -phase * alpha;
        if want_vectors {
            reflectors.push(Reflector { start, v, tau });
        }
    }

    let mut diag: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut sub: Vec<T> = vec![T::zero(); n];
    let mut phases: Vec<C<T>> = vec![C::one(); n];
    for k in 0..n - 1 {
        let r = offdiag[k].norm();
        sub[k] = r;
        phases[k + 1] = if r > T::zero() {
            phases[k] * (offdiag[k] / r)
        } else {
            phases[k]
        };
    }

    let mut z = if want_vectors {
        let mut q = CMatrix::<T>::identity(n);
        for refl in reflectors.iter().rev() {
            apply_reflector_left(&mut q, refl);
        }
        for r in 0..n {
            for c in 0..n {
                q[(r, c)] *= phases[c];
            }
        }
        Some(q)
    } else {
        None
    };

    tql(&mut diag, &mut sub, z.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vectors = z.map(|z| {
        let mut out = CMatrix::zeros(n, n);
        for (newc, &oldc) in order.iter().enumerate() {
            let mut best = 0;
            let mut best_abs = T::zero();
            for r in 0..n {
                let mag = z[(r, oldc)].norm();
                if mag > best_abs * (T::one() + T::lit(1e-9)) {
                    best_abs = mag;
                    best = r;
                }
            }
            let ph = if best_abs > T::zero() {
                z[(best, oldc)].conj() / best_abs
            } else {
                C::one()
            };
            for r in 0..n {
                out[(r, newc)] = z[(r, oldc)] * ph;
            }
        }
        out
    });
    Ok(Eigh { values, vectors })
}

fn apply_reflector_left<T: Real>(q: &mut CMatrix<T>, refl: &Reflector<T>) {
    let n = q.cols;
    let mut w = vec![C::<T>::zero(); n];
    for (ii, &vi) in refl.v.iter().enumerate() {
        let row = q.row(refl.start + ii);
        let vc = vi.conj();
        for (wj, &qij) in w.iter_mut().zip(row) {
            *wj += vc * qij;
        }
    }
    for (ii, &vi) in refl.v.iter().enumerate() {
        let s = vi * refl.tau;
        let r = refl.start + ii;
        let row = &mut q.data[r * n..(r + 1) * n];
        for (qij, &wj) in row.iter_mut().zip(&w) {
            *qij -= s * wj;
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (`sub[i]` couples `i`
/// and `i+1`). Rotations are accumulated into the columns of `z` when given.
fn tql<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut CMatrix<T>>) -> Result<()> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd || e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let cols = z.cols;
                    let data = &mut z.data;
                    for k in 0..cols {
                        let row = k * cols;
                        let fz = data[row + i + 1];
                        let zi = data[row + i];
                        data[row + i + 1] = zi * s + fz * c;
                        data[row + i] = zi * c - fz * s;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Applies `f` to the eigenvalues of a Hermitian matrix: `V f(Λ) V†`.
pub fn hermitian_map<T: Real>(m: &CMatrix<T>, f: impl Fn(T) -> T) -> Result<CMatrix<T>> {
    let Eigh { values, vectors } = eigh(m)?;
    let v = vectors.expect("vectors requested");
    let n = values.len();
    let fv: Vec<T> = values.into_iter().map(f).collect();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let mut acc = C::zero();
            for k in 0..n {
                acc += v[(r, k)] * v[(c, k)].conj() * fv[k];
            }
            out[(r, c)] = acc;
            out[(c, r)] = acc.conj();
        }
    }
    Ok(out)
}

/// Principal square root of a positive semidefinite matrix; tiny negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    hermitian_map(m, |x| x.max(T::zero()).sqrt())
}

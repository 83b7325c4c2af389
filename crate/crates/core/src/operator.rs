//! Sparse operators on tensor products of small sites.
//!
//! A [`LocalOperator`] stores a matrix on the sites it actually touches (its
//! support). Products, sums and comparisons first extend both operands to the
//! union of their supports, so operators on a lattice far too large to hold a
//! state vector can still be multiplied and compared exactly. Acting on a
//! [`StateVector`] embeds the operator on the fly.
//!
//! Ordering convention: site `0` of a support (or of a [`HilbertSpace`]) is the
//! most significant digit of the basis index, i.e. Kronecker order.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{input, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default cap on the dimension of a full Hilbert space.
pub const DEFAULT_MAX_DIM: usize = 2_000_000;

/// Dimensions of a product of sites with Kronecker index strides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>, cap: usize) -> Result<Self> {
        let dim = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&d| d <= cap)
            .ok_or_else(|| Error::CapExceeded {
                what: "Hilbert space dimension",
                requested: dims.iter().fold(1usize, |acc, &d| acc.saturating_mul(d)),
                cap,
            })?;
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        Ok(HilbertSpace { dims, strides, dim })
    }

    pub fn uniform(sites: usize, d: usize, cap: usize) -> Result<Self> {
        Self::new(vec![d; sites], cap)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn site_dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    #[inline]
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.dims[site]
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }
}

/// Square compressed-sparse-row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    /// Build from `(row, col, value)` triplets, summing duplicates and dropping exact zeros.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let mut kept = 0;
        for i in 0..vals.len() {
            if vals[i] != ZERO {
                rows[kept] = rows[i];
                cols[kept] = cols[i];
                vals[kept] = vals[i];
                kept += 1;
            }
        }
        rows.truncate(kept);
        cols.truncate(kept);
        vals.truncate(kept);
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![ONE; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut triplets = Vec::new();
        let mut acc = vec![ZERO; self.n];
        let mut touched = Vec::new();
        for r in 0..self.n {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for c in touched.drain(..) {
                triplets.push((r, c, acc[c]));
                acc[c] = ZERO;
            }
        }
        SparseMatrix::from_triplets(self.n, triplets)
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, ONE)
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, -ONE)
    }

    fn combine(&self, other: &SparseMatrix, factor: C64) -> SparseMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let triplets = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * factor)))
            .collect();
        SparseMatrix::from_triplets(self.n, triplets)
    }

    pub fn scale(&self, factor: C64) -> SparseMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn adjoint(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.n, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn kron(&self, other: &SparseMatrix) -> SparseMatrix {
        let m = other.n;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                triplets.push((r1 * m + r2, c1 * m + c2, v1 * v2));
            }
        }
        SparseMatrix::from_triplets(self.n * m, triplets)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|r| self.get(r, r)).sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &nalgebra::DMatrix<C64>, drop_below: f64) -> SparseMatrix {
        let mut triplets = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].norm() > drop_below {
                    triplets.push((r, c, m[(r, c)]));
                }
            }
        }
        SparseMatrix::from_triplets(m.nrows(), triplets)
    }
}

/// An operator acting on a sorted set of sites, identity elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    sites: Vec<usize>,
    dims: Vec<usize>,
    matrix: SparseMatrix,
}

impl LocalOperator {
    pub fn new(sites: Vec<usize>, dims: Vec<usize>, matrix: SparseMatrix) -> Result<Self> {
        if sites.len() != dims.len() {
            return input("support and dimension lists differ in length");
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return input(format!("support {sites:?} is not strictly increasing"));
        }
        let dim: usize = dims.iter().product();
        if matrix.dim() != dim {
            return input(format!("matrix dimension {} does not match support dimension {dim}", matrix.dim()));
        }
        Ok(LocalOperator { sites, dims, matrix })
    }

    /// Build column by column: `column(digits)` returns the image of the basis
    /// state with the given site values, as `(row digits, amplitude)` pairs.
    pub fn from_columns<F>(sites: Vec<usize>, dims: Vec<usize>, mut column: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<(Vec<usize>, C64)>,
    {
        let local = HilbertSpace::new(dims.clone(), usize::MAX)?;
        let mut digits = vec![0; dims.len()];
        let mut triplets = Vec::new();
        for col in 0..local.dim() {
            for (s, d) in digits.iter_mut().enumerate() {
                *d = local.digit(col, s);
            }
            for (row_digits, v) in column(&digits) {
                triplets.push((local.index_of(&row_digits), col, v));
            }
        }
        Self::new(sites, dims, SparseMatrix::from_triplets(local.dim(), triplets))
    }

    /// Diagonal operator with entries given by a function of the site values.
    pub fn diagonal<F>(sites: Vec<usize>, dims: Vec<usize>, mut entry: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> C64,
    {
        Self::from_columns(sites, dims, |d| vec![(d.to_vec(), entry(d))])
    }

    pub fn identity(sites: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        let dim = dims.iter().product();
        Self::new(sites, dims, SparseMatrix::identity(dim))
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn local_dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The same operator written on a larger support.
    pub fn extend(&self, sites: &[usize], dims: &[usize]) -> Result<LocalOperator> {
        if sites == self.sites.as_slice() {
            return Ok(self.clone());
        }
        let mut position = Vec::with_capacity(self.sites.len());
        for (k, s) in self.sites.iter().enumerate() {
            let p = sites
                .binary_search(s)
                .map_err(|_| Error::Input(format!("site {s} missing from the extended support")))?;
            if dims[p] != self.dims[k] {
                return input(format!("site {s} has dimension {} but {} requested", self.dims[k], dims[p]));
            }
            position.push(p);
        }
        let big = HilbertSpace::new(dims.to_vec(), usize::MAX)?;
        let small = HilbertSpace::new(self.dims.clone(), usize::MAX)?;
        let offset = |local: usize| -> usize {
            (0..self.sites.len())
                .map(|k| small.digit(local, k) * big.strides[position[k]])
                .sum()
        };
        let offsets: Vec<usize> = (0..small.dim()).map(offset).collect();
        let rest = spectator_bases(&big, &position);
        let mut triplets = Vec::with_capacity(self.matrix.nnz() * rest.len());
        for &base in &rest {
            for (r, c, v) in self.matrix.triplets() {
                triplets.push((base + offsets[r], base + offsets[c], v));
            }
        }
        LocalOperator::new(sites.to_vec(), dims.to_vec(), SparseMatrix::from_triplets(big.dim(), triplets))
    }

    fn union_support(&self, other: &LocalOperator) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut pairs: Vec<(usize, usize)> = self
            .sites
            .iter()
            .copied()
            .zip(self.dims.iter().copied())
            .chain(other.sites.iter().copied().zip(other.dims.iter().copied()))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return input("operators disagree on a site dimension");
        }
        Ok(pairs.into_iter().unzip())
    }

    fn aligned(&self, other: &LocalOperator) -> Result<(LocalOperator, LocalOperator)> {
        let (sites, dims) = self.union_support(other)?;
        Ok((self.extend(&sites, &dims)?, other.extend(&sites, &dims)?))
    }

    /// `self · other` (other acts first).
    pub fn mul(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = self.aligned(other)?;
        Ok(LocalOperator {
            matrix: a.matrix.mul(&b.matrix),
            ..a
        })
    }

    pub fn add(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = self.aligned(other)?;
        Ok(LocalOperator {
            matrix: a.matrix.add(&b.matrix),
            ..a
        })
    }

    pub fn sub(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = self.aligned(other)?;
        Ok(LocalOperator {
            matrix: a.matrix.sub(&b.matrix),
            ..a
        })
    }

    pub fn scale(&self, factor: C64) -> LocalOperator {
        LocalOperator {
            matrix: self.matrix.scale(factor),
            ..self.clone()
        }
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator {
            matrix: self.matrix.adjoint(),
            ..self.clone()
        }
    }

    pub fn commutator(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (a, b) = self.aligned(other)?;
        Ok(LocalOperator {
            matrix: a.matrix.mul(&b.matrix).sub(&b.matrix.mul(&a.matrix)),
            ..a
        })
    }

    /// `max |(self − other)_{ij}|` on the union support.
    pub fn max_abs_diff(&self, other: &LocalOperator) -> Result<f64> {
        let (a, b) = self.aligned(other)?;
        Ok(a.matrix.max_abs_diff(&b.matrix))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.max_abs_diff(&self.matrix.adjoint())
    }

    pub fn idempotency_error(&self) -> f64 {
        self.matrix.mul(&self.matrix).max_abs_diff(&self.matrix)
    }

    pub fn supports_overlap(&self, other: &LocalOperator) -> bool {
        self.sites.iter().any(|s| other.sites.binary_search(s).is_ok())
    }

    /// Apply to a full state living on `space`.
    pub fn apply(&self, space: &HilbertSpace, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != space.dim() {
            return input("state dimension does not match its Hilbert space");
        }
        for (s, &d) in self.sites.iter().zip(&self.dims) {
            if *s >= space.num_sites() || space.site_dim(*s) != d {
                return input(format!("operator site {s} is incompatible with the Hilbert space"));
            }
        }
        let small = HilbertSpace::new(self.dims.clone(), usize::MAX)?;
        let offsets: Vec<usize> = (0..small.dim())
            .map(|local| {
                self.sites
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| small.digit(local, k) * space.strides[s])
                    .sum()
            })
            .collect();
        let bases = spectator_bases(space, &self.sites);
        let blocks: Vec<Vec<C64>> = bases
            .par_iter()
            .map(|&base| {
                (0..small.dim())
                    .map(|r| self.matrix.row(r).map(|(c, v)| v * psi[base + offsets[c]]).sum())
                    .collect()
            })
            .collect();
        let mut out = vec![ZERO; psi.len()];
        for (base, block) in bases.iter().zip(blocks) {
            for (r, v) in block.into_iter().enumerate() {
                out[base + offsets[r]] = v;
            }
        }
        Ok(out)
    }

    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        let image = self.apply(&state.space, &state.amplitudes)?;
        Ok(inner(&state.amplitudes, &image))
    }

    /// Layer two operators on the same support: the site basis becomes
    /// `|a⟩ ⊗ |b⟩ ↦ |a·d_b + b⟩`, which is the per-site interleaving of the
    /// two layers' Kronecker factors.
    pub fn stack(a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
        if a.sites != b.sites {
            return input("stacked operators must share a support; extend them first");
        }
        let dims: Vec<usize> = a.dims.iter().zip(&b.dims).map(|(x, y)| x * y).collect();
        let sa = HilbertSpace::new(a.dims.clone(), usize::MAX)?;
        let sb = HilbertSpace::new(b.dims.clone(), usize::MAX)?;
        let sk = HilbertSpace::new(dims.clone(), usize::MAX)?;
        let interleave = |ia: usize, ib: usize| -> usize {
            (0..dims.len())
                .map(|s| (sa.digit(ia, s) * b.dims[s] + sb.digit(ib, s)) * sk.strides[s])
                .sum()
        };
        let mut triplets = Vec::with_capacity(a.matrix.nnz() * b.matrix.nnz());
        for (ra, ca, va) in a.matrix.triplets() {
            for (rb, cb, vb) in b.matrix.triplets() {
                triplets.push((interleave(ra, rb), interleave(ca, cb), va * vb));
            }
        }
        LocalOperator::new(a.sites.clone(), dims, SparseMatrix::from_triplets(sk.dim(), triplets))
    }
}

/// Indices of `space` whose digits on `fixed` are all zero.
fn spectator_bases(space: &HilbertSpace, fixed: &[usize]) -> Vec<usize> {
    let free: Vec<usize> = (0..space.num_sites()).filter(|s| !fixed.contains(s)).collect();
    let count: usize = free.iter().map(|&s| space.dims[s]).product();
    let mut bases = Vec::with_capacity(count);
    let mut digits = vec![0usize; free.len()];
    for _ in 0..count {
        bases.push(free.iter().zip(&digits).map(|(&s, &d)| d * space.strides[s]).sum());
        for k in (0..free.len()).rev() {
            digits[k] += 1;
            if digits[k] < space.dims[free[k]] {
                break;
            }
            digits[k] = 0;
        }
    }
    bases
}

/// `⟨a|b⟩`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense amplitudes on a [`HilbertSpace`].
#[derive(Clone, Debug)]
pub struct StateVector {
    pub space: HilbertSpace,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(space: HilbertSpace, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return input("amplitude count does not match the Hilbert space");
        }
        Ok(StateVector { space, amplitudes })
    }

    pub fn basis(space: HilbertSpace, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; space.dim()];
        amplitudes[index] = ONE;
        StateVector { space, amplitudes }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::Numerical("cannot normalize the zero vector".into()));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn apply(&self, op: &LocalOperator) -> Result<StateVector> {
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: op.apply(&self.space, &self.amplitudes)?,
        })
    }

    /// Per-site interleaved tensor product of two layers on the same sites.
    pub fn stack(a: &StateVector, b: &StateVector, cap: usize) -> Result<StateVector> {
        if a.space.num_sites() != b.space.num_sites() {
            return input("stacked states must live on the same sites");
        }
        let dims: Vec<usize> = a.space.dims.iter().zip(&b.space.dims).map(|(x, y)| x * y).collect();
        let space = HilbertSpace::new(dims, cap)?;
        let n = space.num_sites();
        let a_part: Vec<usize> = (0..a.space.dim())
            .map(|i| (0..n).map(|s| a.space.digit(i, s) * b.space.dims[s] * space.strides[s]).sum())
            .collect();
        let b_part: Vec<usize> = (0..b.space.dim())
            .map(|i| (0..n).map(|s| b.space.digit(i, s) * space.strides[s]).sum())
            .collect();
        let mut amplitudes = vec![ZERO; space.dim()];
        for (ia, &va) in a.amplitudes.iter().enumerate() {
            if va == ZERO {
                continue;
            }
            for (ib, &vb) in b.amplitudes.iter().enumerate() {
                amplitudes[a_part[ia] + b_part[ib]] = va * vb;
            }
        }
        Ok(StateVector { space, amplitudes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x(site: usize) -> LocalOperator {
        LocalOperator::from_columns(vec![site], vec![2], |d| vec![(vec![1 - d[0]], ONE)]).unwrap()
    }

    fn pauli_z(site: usize) -> LocalOperator {
        LocalOperator::diagonal(vec![site], vec![2], |d| if d[0] == 0 { ONE } else { -ONE }).unwrap()
    }

    #[test]
    fn strides_are_kronecker() {
        let h = HilbertSpace::new(vec![2, 3, 4], 100).unwrap();
        assert_eq!(h.dim(), 24);
        assert_eq!(h.index_of(&[1, 2, 3]), 12 + 8 + 3);
        assert_eq!(h.digit(23, 1), 2);
        assert!(HilbertSpace::uniform(30, 2, 1 << 20).is_err());
    }

    #[test]
    fn anticommutation_on_shared_site() {
        let x = pauli_x(3);
        let z = pauli_z(3);
        let xz = x.mul(&z).unwrap();
        let zx = z.mul(&x).unwrap();
        assert!(xz.add(&zx).unwrap().matrix().max_abs() < 1e-15);
        // disjoint supports commute
        assert!(pauli_x(1).commutator(&pauli_z(4)).unwrap().matrix().max_abs() < 1e-15);
    }

    #[test]
    fn extension_matches_kron() {
        let x = pauli_x(2);
        let ext = x.extend(&[0, 2], &[3, 2]).unwrap();
        let expected = SparseMatrix::identity(3).kron(x.matrix());
        assert_eq!(ext.matrix().max_abs_diff(&expected), 0.0);
        let ext = x.extend(&[2, 5], &[2, 3]).unwrap();
        let expected = x.matrix().kron(&SparseMatrix::identity(3));
        assert_eq!(ext.matrix().max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn apply_matches_extended_matrix() {
        let space = HilbertSpace::new(vec![2, 3, 2], 100).unwrap();
        let op = LocalOperator::from_columns(vec![0, 2], vec![2, 2], |d| {
            vec![(vec![d[1], d[0]], C64::new(1.0 + d[0] as f64, d[1] as f64))]
        })
        .unwrap();
        let psi: Vec<C64> = (0..12).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let fast = op.apply(&space, &psi).unwrap();
        let full = op.extend(&[0, 1, 2], &[2, 3, 2]).unwrap();
        let slow = full.matrix().apply(&psi);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn stacking_interleaves_layers() {
        // X on a qubit stacked with Z on a qubit is X⊗Z on the 4-dim site
        let s = LocalOperator::stack(&pauli_x(0), &pauli_z(0)).unwrap();
        let expected = pauli_x(0).matrix().kron(pauli_z(0).matrix());
        assert_eq!(s.matrix().max_abs_diff(&expected), 0.0);

        // two sites: the interleaving differs from plain Kronecker order
        let a = pauli_x(0).extend(&[0, 1], &[2, 2]).unwrap();
        let b = pauli_z(1).extend(&[0, 1], &[2, 2]).unwrap();
        let s = LocalOperator::stack(&a, &b).unwrap();
        let x = pauli_x(0).matrix().clone();
        let z = pauli_z(0).matrix().clone();
        let i = SparseMatrix::identity(2);
        let expected = x.kron(&i).kron(&i.kron(&z));
        assert_eq!(s.matrix().max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn stacked_states() {
        let sa = HilbertSpace::uniform(2, 2, 100).unwrap();
        let sb = HilbertSpace::uniform(2, 3, 100).unwrap();
        let a = StateVector::basis(sa, 2); // |1 0⟩
        let b = StateVector::basis(sb, 5); // |1 2⟩
        let s = StateVector::stack(&a, &b, 100).unwrap();
        // site digits: (1*3+1, 0*3+2) = (4, 2) in base 6
        assert_eq!(s.amplitudes[4 * 6 + 2], ONE);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }
}

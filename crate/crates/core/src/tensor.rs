//! Dense complex tensors for pure states of multipartite systems.
//!
//! Amplitudes are stored flat in lexicographic order over the multi-index
//! `(i_1, ..., i_n)` with the last index varying fastest. Storage indices are
//! 0-based; the index families of the canonical form are reported 1-based, so
//! a 1-based index `k` in mode `r` lives at storage index `k - 1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::config::{NORM_TOL, UNITARITY_TOL, UNIT_VECTOR_TOL};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Local dimensions `(d_1, ..., d_n)` of a multipartite system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeShape {
    dims: Vec<usize>,
}

impl ModeShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("a state needs at least one mode".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!("mode {} has dimension 0", pos)));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, mode: usize) -> usize {
        self.dims[mode]
    }

    /// Number of amplitudes, `∏ d_r`.
    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    /// True when `n >= 3` and `2 <= d_1 <= ... <= d_n`.
    pub fn is_canonical_ready(&self) -> bool {
        self.dims.len() >= 3 && self.dims[0] >= 2 && self.dims.windows(2).all(|w| w[0] <= w[1])
    }

    /// Row-major strides (last mode has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for r in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[r] = strides[r + 1] * self.dims[r + 1];
        }
        strides
    }

    /// Flat offset of a 0-based multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    /// Flat offset of a 1-based multi-index as written in the canonical-form conditions.
    pub fn offset_one_based(&self, index: &[usize]) -> usize {
        debug_assert!(index.iter().all(|&i| i >= 1));
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + (i - 1))
    }

    /// 0-based multi-index of a flat offset.
    pub fn multi_index(&self, mut offset: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for r in (0..self.dims.len()).rev() {
            index[r] = offset % self.dims[r];
            offset /= self.dims[r];
        }
        index
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            return Err(Error::ModeOutOfRange { mode, modes: self.dims.len() });
        }
        Ok(())
    }
}

/// Coefficient tensor of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTensor {
    shape: ModeShape,
    amps: Vec<Complex64>,
}

impl StateTensor {
    /// Builds a state and checks that it has unit norm.
    pub fn new(shape: ModeShape, amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_raw(shape, amps)?;
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(shape: ModeShape, amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_raw(shape, amps)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: norm * norm });
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    pub(crate) fn from_raw(shape: ModeShape, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != shape.size() {
            return Err(Error::AmplitudeCount { expected: shape.size(), found: amps.len() });
        }
        Ok(Self { shape, amps })
    }

    /// Computational basis product state with the given 0-based index.
    pub fn basis(shape: ModeShape, index: &[usize]) -> Result<Self> {
        if index.len() != shape.modes() || index.iter().zip(shape.dims()).any(|(&i, &d)| i >= d) {
            return Err(Error::InvalidArgument(format!(
                "basis index {:?} does not fit dims {:?}",
                index,
                shape.dims()
            )));
        }
        let mut amps = vec![ZERO; shape.size()];
        amps[shape.offset(index)] = ONE;
        Ok(Self { shape, amps })
    }

    pub fn shape(&self) -> &ModeShape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Amplitude at a 0-based multi-index.
    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.amps[self.shape.offset(index)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest entrywise distance to another tensor of the same shape.
    pub fn max_abs_diff(&self, other: &StateTensor) -> f64 {
        assert_eq!(self.dims(), other.dims(), "shape mismatch in max_abs_diff");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// 0-based multi-index of the largest-modulus amplitude (first on ties).
    pub fn argmax_modulus(&self) -> Vec<usize> {
        let mut best = 0;
        for (k, a) in self.amps.iter().enumerate() {
            if a.norm() > self.amps[best].norm() {
                best = k;
            }
        }
        self.shape.multi_index(best)
    }

    fn check_shape(&self, dims: &[usize]) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::ShapeMismatch { expected: self.dims().to_vec(), found: dims.to_vec() });
        }
        Ok(())
    }
}

/// One unitary per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitaryTuple {
    matrices: Vec<CMatrix>,
}

impl LocalUnitaryTuple {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        for (mode, m) in matrices.iter().enumerate() {
            if !m.is_square() {
                return Err(Error::InvalidArgument(format!("matrix for mode {mode} is not square")));
            }
            let deviation = unitarity_deviation(m);
            if deviation > UNITARITY_TOL {
                return Err(Error::NotUnitary { mode, deviation });
            }
        }
        Ok(Self { matrices })
    }

    pub fn identity(shape: &ModeShape) -> Self {
        Self { matrices: shape.dims().iter().map(|&d| CMatrix::identity(d, d)).collect() }
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<CMatrix> {
        self.matrices
    }

    pub fn dims(&self) -> Vec<usize> {
        self.matrices.iter().map(|m| m.nrows()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrices: self.matrices.iter().map(|m| m.adjoint()).collect() }
    }

    /// The tuple that applies `first` and then `self`.
    pub fn after(&self, first: &LocalUnitaryTuple) -> Result<Self> {
        if self.dims() != first.dims() {
            return Err(Error::ShapeMismatch { expected: self.dims(), found: first.dims() });
        }
        Ok(Self {
            matrices: self.matrices.iter().zip(&first.matrices).map(|(a, b)| a * b).collect(),
        })
    }

    /// Largest unitarity deviation over the modes.
    pub fn max_unitarity_deviation(&self) -> f64 {
        self.matrices.iter().map(unitarity_deviation).fold(0.0, f64::max)
    }
}

/// `max |U†U - I|` over entries.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// One unit vector per mode, the factors of a product state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVectorTuple {
    vectors: Vec<CVector>,
}

impl ProductVectorTuple {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        for (mode, v) in vectors.iter().enumerate() {
            let norm = v.norm();
            if (norm - 1.0).abs() > UNIT_VECTOR_TOL {
                return Err(Error::NotUnitVector { mode, norm });
            }
        }
        Ok(Self { vectors })
    }

    /// Normalizes each factor; fails on a zero factor.
    pub fn normalized(vectors: Vec<CVector>) -> Result<Self> {
        let mut out = Vec::with_capacity(vectors.len());
        for (mode, v) in vectors.into_iter().enumerate() {
            let norm = v.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::NotUnitVector { mode, norm });
            }
            out.push(v / Complex64::new(norm, 0.0));
        }
        Ok(Self { vectors: out })
    }

    /// Computational basis product vector for a 0-based index.
    pub fn basis(dims: &[usize], index: &[usize]) -> Self {
        let vectors = dims
            .iter()
            .zip(index)
            .map(|(&d, &i)| {
                let mut v = CVector::zeros(d);
                v[i] = ONE;
                v
            })
            .collect();
        Self { vectors }
    }

    pub(crate) fn from_vectors_unchecked(vectors: Vec<CVector>) -> Self {
        Self { vectors }
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn vector(&self, mode: usize) -> &CVector {
        &self.vectors[mode]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vectors.iter().map(|v| v.len()).collect()
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, mode: usize, v: CVector) {
        self.vectors[mode] = v;
    }

    /// Transforms every factor by the matching unitary.
    pub fn transformed(&self, us: &LocalUnitaryTuple) -> Result<Self> {
        if self.dims() != us.dims() {
            return Err(Error::ShapeMismatch { expected: self.dims(), found: us.dims() });
        }
        Ok(Self { vectors: self.vectors.iter().zip(us.matrices()).map(|(v, u)| u * v).collect() })
    }
}

/// Contracts mode `mode` of a flat tensor with `v` (no conjugation).
fn contract_mode(data: &[Complex64], dims: &[usize], mode: usize, v: &CVector) -> (Vec<Complex64>, Vec<usize>) {
    let d = dims[mode];
    let inner: usize = dims[mode + 1..].iter().product();
    let outer: usize = dims[..mode].iter().product();
    let mut out = vec![ZERO; outer * inner];
    for o in 0..outer {
        for k in 0..d {
            let w = v[k];
            if w == ZERO {
                continue;
            }
            let src = &data[(o * d + k) * inner..(o * d + k + 1) * inner];
            let dst = &mut out[o * inner..(o + 1) * inner];
            for (x, y) in dst.iter_mut().zip(src) {
                *x += y * w;
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims.remove(mode);
    (out, new_dims)
}

fn conjugated(psi: &StateTensor) -> Vec<Complex64> {
    psi.amps.iter().map(|a| a.conj()).collect()
}

/// `⟨Ψ|φ^(1)⋯φ^(n)⟩ = Σ conj(c_{i_1⋯i_n}) ∏_r u^(r)_{i_r}`.
pub fn overlap(psi: &StateTensor, phis: &ProductVectorTuple) -> Result<Complex64> {
    psi.check_shape(&phis.dims())?;
    let mut data = conjugated(psi);
    let mut dims = psi.dims().to_vec();
    for mode in (0..dims.len()).rev() {
        let (d, ds) = contract_mode(&data, &dims, mode, phis.vector(mode));
        data = d;
        dims = ds;
    }
    Ok(data[0])
}

/// The vector `e` with `overlap = Σ_j e_j u^(mode)_j`; all modes except `mode`
/// are contracted with their factors and the tensor is conjugated.
pub fn environment(psi: &StateTensor, phis: &ProductVectorTuple, mode: usize) -> Result<CVector> {
    psi.shape.check_mode(mode)?;
    psi.check_shape(&phis.dims())?;
    Ok(environment_unchecked(psi, phis.vectors(), mode))
}

pub(crate) fn environment_unchecked(psi: &StateTensor, vectors: &[CVector], mode: usize) -> CVector {
    let mut data = conjugated(psi);
    let mut dims = psi.dims().to_vec();
    let mut position = mode;
    for s in (0..vectors.len()).rev() {
        if s == mode {
            continue;
        }
        let (d, ds) = contract_mode(&data, &dims, s, &vectors[s]);
        data = d;
        dims = ds;
        if s < position {
            position -= 1;
        }
    }
    debug_assert_eq!(position, 0);
    CVector::from_vec(data)
}

/// Applies an arbitrary `d_r × d_r` matrix to one mode (column-vector action).
pub(crate) fn apply_mode_matrix(amps: &[Complex64], dims: &[usize], mode: usize, m: &CMatrix) -> Vec<Complex64> {
    let d = dims[mode];
    let inner: usize = dims[mode + 1..].iter().product();
    let outer: usize = dims[..mode].iter().product();
    let mut out = vec![ZERO; amps.len()];
    for o in 0..outer {
        let base = o * d * inner;
        for a in 0..d {
            let dst = base + a * inner;
            for b in 0..d {
                let w = m[(a, b)];
                if w == ZERO {
                    continue;
                }
                let src = base + b * inner;
                for k in 0..inner {
                    out[dst + k] += w * amps[src + k];
                }
            }
        }
    }
    out
}

/// Applies a single-mode matrix without any unitarity check.
pub fn apply_mode(psi: &StateTensor, mode: usize, m: &CMatrix) -> Result<StateTensor> {
    psi.shape.check_mode(mode)?;
    let d = psi.dims()[mode];
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, mode {mode} has dimension {d}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(StateTensor { shape: psi.shape.clone(), amps: apply_mode_matrix(&psi.amps, psi.dims(), mode, m) })
}

/// `(U_1 ⊗ ⋯ ⊗ U_n)|Ψ⟩`.
pub fn apply_local(psi: &StateTensor, us: &LocalUnitaryTuple) -> Result<StateTensor> {
    psi.check_shape(&us.dims())?;
    for (mode, m) in us.matrices().iter().enumerate() {
        let deviation = unitarity_deviation(m);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { mode, deviation });
        }
    }
    let mut amps = psi.amps.clone();
    for (mode, m) in us.matrices().iter().enumerate() {
        if is_identity(m) {
            continue;
        }
        amps = apply_mode_matrix(&amps, psi.dims(), mode, m);
    }
    Ok(StateTensor { shape: psi.shape.clone(), amps })
}

fn is_identity(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| m[(i, j)] == if i == j { ONE } else { ZERO }))
}

/// Single-mode reduced density matrix `ρ_ab = Σ_rest c_{…a…} conj(c_{…b…})`.
pub fn reduced_density(psi: &StateTensor, mode: usize) -> Result<CMatrix> {
    psi.shape.check_mode(mode)?;
    Ok(gram_along_mode(&psi.amps, psi.dims(), mode))
}

pub(crate) fn gram_along_mode(amps: &[Complex64], dims: &[usize], mode: usize) -> CMatrix {
    let d = dims[mode];
    let inner: usize = dims[mode + 1..].iter().product();
    let outer: usize = dims[..mode].iter().product();
    let mut rho = CMatrix::zeros(d, d);
    for o in 0..outer {
        let base = o * d * inner;
        for a in 0..d {
            for b in a..d {
                let mut acc = ZERO;
                for k in 0..inner {
                    acc += amps[base + a * inner + k] * amps[base + b * inner + k].conj();
                }
                rho[(a, b)] += acc;
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            rho[(a, b)] = rho[(b, a)].conj();
        }
    }
    rho
}

//! Small dense linear-algebra helpers: Haar sampling, basis completion,
//! Hermitian eigendecomposition and exponentials of anti-Hermitian matrices.

use nalgebra::linalg::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::ORTHONORMAL_TOL;
use crate::error::{Error, Result};
use crate::tensor::{CMatrix, CVector, LocalUnitaryTuple, ModeShape, ProductVectorTuple, StateTensor, ZERO};

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Uniformly distributed unit vector in `C^d`.
pub(crate) fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    loop {
        let v = CVector::from_fn(d, |_, _| gaussian_complex(rng));
        let norm = v.norm();
        if norm > 1e-300 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

pub(crate) fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    // Fix the phase ambiguity of QR so the result is Haar distributed.
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random `d × d` unitary, deterministic in `seed`.
pub fn haar_unitary(d: usize, seed: u64) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(haar_unitary_with(&mut rng_from_seed(seed), d))
}

/// Haar-random local unitary tuple for the given dims.
pub fn haar_local_unitaries(dims: &[usize], seed: u64) -> Result<LocalUnitaryTuple> {
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    LocalUnitaryTuple::new(dims.iter().map(|&d| haar_unitary_with(&mut rng, d)).collect())
}

/// State drawn uniformly from the unit sphere, deterministic in `seed`.
pub fn random_state(shape: &ModeShape, seed: u64) -> Result<StateTensor> {
    let mut rng = rng_from_seed(seed);
    let amps = (0..shape.size()).map(|_| gaussian_complex(&mut rng)).collect();
    StateTensor::normalized(shape.clone(), amps)
}

/// Product of independent uniform unit vectors.
pub fn random_product(dims: &[usize], seed: u64) -> ProductVectorTuple {
    let mut rng = rng_from_seed(seed);
    ProductVectorTuple::from_vectors_unchecked(dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect())
}

/// Largest deviation of the Gram matrix of `vs` from the identity.
pub fn orthonormality_deviation(vs: &[CVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let g = a.dotc(b);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Removes the components of `v` along the orthonormal family `basis`.
pub(crate) fn project_out(v: &CVector, basis: &[CVector]) -> CVector {
    let mut out = v.clone();
    // two passes keep the result orthogonal to rounding level
    for _ in 0..2 {
        for b in basis {
            let coeff = b.dotc(&out);
            out -= b * coeff;
        }
    }
    out
}

/// Extends an orthonormal family to an orthonormal basis of `C^d`.
///
/// Gram-Schmidt over the standard basis, always taking the standard vector
/// with the largest residual next. The input vectors come back unchanged as
/// the leading entries.
pub fn complete_basis(vs: &[CVector], d: usize) -> Result<Vec<CVector>> {
    if vs.len() > d || vs.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidArgument(format!("cannot complete {} vectors in dimension {d}", vs.len())));
    }
    let deviation = orthonormality_deviation(vs);
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut basis: Vec<CVector> = vs.to_vec();
    while basis.len() < d {
        let mut best: Option<(f64, CVector)> = None;
        for j in 0..d {
            let mut e = CVector::zeros(d);
            e[j] = Complex64::new(1.0, 0.0);
            let r = project_out(&e, &basis);
            let norm = r.norm();
            if best.as_ref().is_none_or(|(n, _)| norm > *n + 1e-12) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("d >= 1");
        basis.push(r / Complex64::new(norm, 0.0));
    }
    Ok(basis)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in descending
/// order; column `k` of the returned matrix is the eigenvector for value `k`.
pub fn hermitian_eigh_desc(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `exp(A)` for anti-Hermitian `A`, computed through the Hermitian matrix `iA`
/// so the result is unitary to rounding.
pub fn expm_anti_hermitian(a: &CMatrix) -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    let h = a.map(|x| x * i);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let d = a.nrows();
    // A = -iH, so exp(A) = V diag(exp(-i λ)) V†
    let mut scaled = eig.eigenvectors.clone();
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k]);
        for r in 0..d {
            scaled[(r, k)] *= phase;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Anti-Hermitian part `(X - X†)/2`.
pub fn skew_part(x: &CMatrix) -> CMatrix {
    (x - x.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Multiplies `v` by a phase so that its first largest-modulus entry is real
/// and positive. Zero vectors are returned unchanged.
pub(crate) fn normalize_phase(v: &CVector) -> CVector {
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v.clone();
    }
    let pivot = v.iter().find(|x| x.norm() >= max * (1.0 - 1e-9)).copied().unwrap_or(ZERO);
    let phase = pivot.conj() / pivot.norm();
    v * phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::unitarity_deviation;

    #[test]
    fn haar_basic_properties() {
        assert!(haar_unitary(0, 1).is_err());
        let u = haar_unitary(1, 3).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        for d in 2..6 {
            let u = haar_unitary(d, d as u64).unwrap();
            assert!(unitarity_deviation(&u) < 1e-12);
        }
        assert_eq!(haar_unitary(4, 11).unwrap(), haar_unitary(4, 11).unwrap());
        assert_ne!(haar_unitary(4, 11).unwrap(), haar_unitary(4, 12).unwrap());
    }

    #[test]
    fn haar_second_moment() {
        let mut rng = rng_from_seed(2024);
        let draws = 10_000;
        let mean: f64 = (0..draws).map(|_| haar_unitary_with(&mut rng, 2)[(0, 0)].norm_sqr()).sum::<f64>()
            / draws as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_state_is_deterministic_and_normalized() {
        let shape = ModeShape::new(vec![2, 3, 2]).unwrap();
        let a = random_state(&shape, 5).unwrap();
        assert_eq!(a, random_state(&shape, 5).unwrap());
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_basis_examples() {
        let e0 = CVector::from_vec(vec![Complex64::new(1.0, 0.0), ZERO]);
        let b = complete_basis(std::slice::from_ref(&e0), 2).unwrap();
        assert_eq!(b[0], e0);
        assert!((b[1][1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(b[1][0].norm() < 1e-15);

        let b = complete_basis(&[], 3).unwrap();
        for (j, v) in b.iter().enumerate() {
            for i in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v[i] - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }

        let s = 0.5f64.sqrt();
        let plus = CVector::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        let b = complete_basis(std::slice::from_ref(&plus), 2).unwrap();
        assert_eq!(b[0], plus);
        assert!((b[1].norm() - 1.0).abs() < 1e-12);
        assert!(plus.dotc(&b[1]).norm() < 1e-12);
    }

    #[test]
    fn complete_basis_rejects_non_orthonormal() {
        let v = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(matches!(complete_basis(&[v], 2), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn complete_basis_random_families() {
        for seed in 0..20u64 {
            let u = haar_unitary(5, seed).unwrap();
            let k = (seed % 5) as usize;
            let vs: Vec<CVector> = (0..k).map(|j| u.column(j).into_owned()).collect();
            let b = complete_basis(&vs, 5).unwrap();
            assert_eq!(&b[..k], &vs[..]);
            assert!(orthonormality_deviation(&b) < 1e-10);
        }
    }

    #[test]
    fn expm_of_anti_hermitian_is_unitary() {
        let g = CMatrix::from_row_slice(2, 2, &[ZERO, Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), ZERO]);
        let t = 0.3;
        let u = expm_anti_hermitian(&(g * Complex64::new(t, 0.0)));
        assert!(unitarity_deviation(&u) < 1e-14);
        // rotation by angle t
        assert!((u[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((u[(1, 0)].re - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn eigh_is_descending() {
        let u = haar_unitary(4, 9).unwrap();
        let diag = CMatrix::from_diagonal(&CVector::from_vec(
            [0.1, 0.4, 0.2, 0.3].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        ));
        let h = &u * diag * u.adjoint();
        let (vals, vecs) = hermitian_eigh_desc(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = &vecs
            * CMatrix::from_diagonal(&CVector::from_vec(vals.iter().map(|&x| Complex64::new(x, 0.0)).collect()))
            * vecs.adjoint();
        assert!((rebuilt - h).camax() < 1e-12);
    }
}

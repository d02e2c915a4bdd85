use num_complex::Complex64;

use crate::linalg::haar_local_unitaries;
use crate::tensor::{LocalUnitaryTuple, ModeShape, StateTensor, ZERO};

pub use crate::states::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn ket(dims: &[usize], terms: &[(&[usize], Complex64)]) -> StateTensor {
    let shape = ModeShape::new(dims.to_vec()).unwrap();
    let mut amps = vec![ZERO; shape.size()];
    for (i, a) in terms {
        amps[shape.offset(i)] = *a;
    }
    StateTensor::normalized(shape, amps).unwrap()
}

#[track_caller]
pub fn assert_close(a: impl Into<Complex64>, b: impl Into<Complex64>, tol: f64) {
    let (a, b) = (a.into(), b.into());
    assert!((a - b).norm() <= tol, "{a} vs {b} (tol {tol:e})");
}

pub fn random_local(dims: &[usize], seed: u64) -> LocalUnitaryTuple {
    haar_local_unitaries(dims, seed).unwrap()
}

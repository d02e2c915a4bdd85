//! Named states used throughout the tests, the CLI and the docs.

use num_complex::Complex64;

use crate::tensor::{CMatrix, LocalUnitaryTuple, ModeShape, StateTensor, ZERO};

fn from_terms(dims: &[usize], terms: &[(&[usize], f64)]) -> StateTensor {
    let shape = ModeShape::new(dims.to_vec()).expect("valid dims");
    let mut amps = vec![ZERO; shape.size()];
    for (index, value) in terms {
        amps[shape.offset(index)] = Complex64::new(*value, 0.0);
    }
    StateTensor::normalized(shape, amps).expect("nonzero state")
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz(n: usize) -> StateTensor {
    let zeros = vec![0; n];
    let ones = vec![1; n];
    from_terms(&vec![2; n], &[(&zeros, 1.0), (&ones, 1.0)])
}

/// Equal superposition of the `n` single-excitation basis states.
pub fn w_state(n: usize) -> StateTensor {
    let indices: Vec<Vec<usize>> = (0..n)
        .map(|k| {
            let mut i = vec![0; n];
            i[n - 1 - k] = 1;
            i
        })
        .collect();
    let terms: Vec<(&[usize], f64)> = indices.iter().map(|i| (i.as_slice(), 1.0)).collect();
    from_terms(&vec![2; n], &terms)
}

/// `(3|000⟩ + |011⟩ + √2|111⟩)/(2√3)`, a three-qubit state already in canonical form.
pub fn psi_star() -> StateTensor {
    from_terms(&[2, 2, 2], &[(&[0, 0, 0], 3.0), (&[0, 1, 1], 1.0), (&[1, 1, 1], 2f64.sqrt())])
}

/// `((√2+1)|000⟩ − (√2−1)|100⟩ + |011⟩ + |111⟩)/(2√2)`, the marginal-eigenbasis
/// form locally equivalent to [`psi_star`].
pub fn phi_star() -> StateTensor {
    let s = 2f64.sqrt();
    from_terms(&[2, 2, 2], &[(&[0, 0, 0], s + 1.0), (&[1, 0, 0], -(s - 1.0)), (&[0, 1, 1], 1.0), (&[1, 1, 1], 1.0)])
}

/// `(|000⟩ + |011⟩)/2 + |111⟩/√2`: locally equivalent to [`psi_star`], satisfies the
/// zero and reality patterns but not the diagonal ordering.
pub fn psi_star_half_variant() -> StateTensor {
    from_terms(&[2, 2, 2], &[(&[0, 0, 0], 0.5), (&[0, 1, 1], 0.5), (&[1, 1, 1], 0.5f64.sqrt())])
}

/// The qubit matrix `(1/√6)[[√2+1, √2−1], [1−√2, √2+1]]` taking [`psi_star`] to
/// [`phi_star`] under column-vector action on the first qubit.
///
/// This is the transpose of the matrix as it is usually printed, which acts on
/// row vectors.
pub fn psi_to_phi_matrix() -> CMatrix {
    let s = 2f64.sqrt();
    let k = 1.0 / 6f64.sqrt();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(k * (s + 1.0), 0.0),
            Complex64::new(k * (s - 1.0), 0.0),
            Complex64::new(k * (1.0 - s), 0.0),
            Complex64::new(k * (s + 1.0), 0.0),
        ],
    )
}

/// [`psi_to_phi_matrix`] on the first qubit, identities elsewhere.
pub fn psi_to_phi_transform() -> LocalUnitaryTuple {
    let id = CMatrix::identity(2, 2);
    LocalUnitaryTuple::new(vec![psi_to_phi_matrix(), id.clone(), id]).expect("unitary")
}

//! Competing normal forms: the marginal-eigenbasis form, the basis that
//! minimizes the Ingarden-Urbanik entropy, and the bipartite Schmidt form.
//!
//! Entropies use the natural logarithm; divide by `ln 2` for bits.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{complete_basis, expm_anti_hermitian, hermitian_eigh_desc, normalize_phase, project_out, skew_part};
use crate::tensor::{apply_local, apply_mode_matrix, reduced_density, CMatrix, CVector, LocalUnitaryTuple, StateTensor};

/// Eigenvalues closer than this are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;
/// Largest allowed `max |A + A†|` for a generator.
const ANTI_HERMITIAN_TOL: f64 = 1e-12;

/// A state expressed in one basis per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalForm {
    pub coefficients: StateTensor,
    /// `apply_local(input, transforms) == coefficients`.
    pub transforms: LocalUnitaryTuple,
    /// Descending eigenvalues of each single-mode reduced density matrix.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Modes whose reduced density has a repeated eigenvalue.
    pub degenerate_modes: Vec<usize>,
}

/// Within each cluster of equal eigenvalues, replaces the eigenvectors by the
/// Gram-Schmidt images of the standard basis vectors projected onto the
/// cluster, so the choice does not depend on the eigensolver.
fn settle_degenerate(values: &[f64], vectors: &CMatrix) -> (Vec<CVector>, bool) {
    let d = values.len();
    let mut out: Vec<CVector> = Vec::with_capacity(d);
    let mut degenerate = false;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[start] - values[end]).abs() <= DEGENERACY_TOL {
            end += 1;
        }
        let cluster: Vec<CVector> = (start..end).map(|k| vectors.column(k).into_owned()).collect();
        if end - start == 1 {
            out.push(normalize_phase(&cluster[0]));
        } else {
            degenerate = true;
            let mut chosen: Vec<CVector> = Vec::new();
            for j in 0..d {
                if chosen.len() == cluster.len() {
                    break;
                }
                let mut e = CVector::zeros(d);
                e[j] = Complex64::new(1.0, 0.0);
                let projected: CVector = cluster.iter().map(|v| v * v.dotc(&e)).fold(CVector::zeros(d), |a, b| a + b);
                let r = project_out(&projected, &chosen);
                let norm = r.norm();
                if norm > 1e-6 {
                    chosen.push(normalize_phase(&(r / Complex64::new(norm, 0.0))));
                }
            }
            out.extend(chosen);
        }
        start = end;
    }
    (out, degenerate)
}

/// Expresses `psi` in the eigenbases of its single-mode reduced density
/// matrices, eigenvalues descending.
pub fn marginal_basis_form(psi: &StateTensor) -> Result<MarginalForm> {
    let n = psi.dims().len();
    let mut matrices = Vec::with_capacity(n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut degenerate_modes = Vec::new();
    for r in 0..n {
        let rho = reduced_density(psi, r)?;
        let (values, vectors) = hermitian_eigh_desc(&rho);
        let (basis, degenerate) = settle_degenerate(&values, &vectors);
        if degenerate {
            degenerate_modes.push(r);
        }
        matrices.push(CMatrix::from_columns(&basis).adjoint());
        eigenvalues.push(values);
    }
    let transforms = LocalUnitaryTuple::new(matrices)?;
    let coefficients = apply_local(psi, &transforms)?;
    Ok(MarginalForm { coefficients, transforms, eigenvalues, degenerate_modes })
}

/// Largest `|Σ_rest c_{…i…} conj(c_{…j…})|` over modes and pairs `i != j`.
pub fn marginal_orthogonality_error(psi: &StateTensor) -> f64 {
    (0..psi.dims().len())
        .map(|r| {
            let rho = reduced_density(psi, r).expect("mode in range");
            let d = rho.nrows();
            let mut worst: f64 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        worst = worst.max(rho[(i, j)].norm());
                    }
                }
            }
            worst
        })
        .fold(0.0, f64::max)
}

/// `S = −Σ |c|² ln |c|²` with `0 ln 0 = 0`.
pub fn iu_entropy(psi: &StateTensor) -> f64 {
    -psi.amplitudes()
        .iter()
        .map(|c| c.norm_sqr())
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

fn entropy_weights(amps: &[Complex64]) -> Vec<f64> {
    amps.iter()
        .map(|c| {
            let p = c.norm_sqr();
            if p > 0.0 {
                p.ln() + 1.0
            } else {
                0.0
            }
        })
        .collect()
}

fn anti_hermitian_deviation(a: &CMatrix) -> f64 {
    (a + a.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `d/dε S(exp(ε A) on mode r)` at `ε = 0`.
pub fn iu_directional_derivative(psi: &StateTensor, mode: usize, generator: &CMatrix) -> Result<f64> {
    let dims = psi.dims();
    if mode >= dims.len() {
        return Err(Error::ModeOutOfRange { mode, modes: dims.len() });
    }
    if generator.nrows() != dims[mode] || generator.ncols() != dims[mode] {
        return Err(Error::InvalidArgument(format!("generator must be {0}x{0}", dims[mode])));
    }
    let deviation = anti_hermitian_deviation(generator);
    if deviation > ANTI_HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian { deviation });
    }
    let amps = psi.amplitudes();
    let moved = apply_mode_matrix(amps, dims, mode, generator);
    let w = entropy_weights(amps);
    Ok(-amps.iter().zip(&moved).zip(&w).map(|((c, g), w)| w * 2.0 * (c.conj() * g).re).sum::<f64>())
}

/// Anti-Hermitian gradient of the entropy for each mode: the directional
/// derivative along `A` is `Re tr(G† A)`.
pub fn iu_gradient(psi: &StateTensor) -> Vec<CMatrix> {
    let dims = psi.dims();
    let amps = psi.amplitudes();
    let w = entropy_weights(amps);
    (0..dims.len())
        .map(|mode| {
            let d = dims[mode];
            let inner: usize = dims[mode + 1..].iter().product();
            let outer: usize = dims[..mode].iter().product();
            let mut m = CMatrix::zeros(d, d);
            for o in 0..outer {
                for k in 0..inner {
                    let at = |a: usize| o * d * inner + a * inner + k;
                    for a in 0..d {
                        let wa = w[at(a)];
                        if wa == 0.0 {
                            continue;
                        }
                        let ca = amps[at(a)].conj() * wa;
                        for b in 0..d {
                            m[(a, b)] += ca * amps[at(b)];
                        }
                    }
                }
            }
            skew_part(&(m.map(|x| x.conj()) * Complex64::new(-2.0, 0.0)))
        })
        .collect()
}

/// Settings for [`iu_descend`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentOptions {
    pub initial_step: f64,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    /// Line search gives up below this step.
    pub min_step: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { initial_step: 0.5, max_iterations: 2000, gradient_tol: 1e-8, min_step: 1e-14 }
    }
}

/// Result of [`iu_descend`].
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrace {
    /// Entropy before the first step and after every accepted step.
    pub entropies: Vec<f64>,
    pub state: StateTensor,
    /// `apply_local(input, transforms) == state`.
    pub transforms: LocalUnitaryTuple,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Stopped on the gradient tolerance rather than the budget or a failed
    /// line search.
    pub converged: bool,
}

/// Gradient descent of the entropy over local unitaries, with an
/// exponential retraction and a halving line search. Every accepted step
/// lowers the entropy.
pub fn iu_descend(psi: &StateTensor, opts: &DescentOptions) -> Result<EntropyTrace> {
    if !(opts.initial_step > 0.0 && opts.gradient_tol > 0.0) {
        return Err(Error::InvalidArgument("step and gradient tolerance must be positive".into()));
    }
    let mut state = psi.clone();
    let mut total = LocalUnitaryTuple::identity(psi.shape());
    let mut current = iu_entropy(&state);
    let mut entropies = vec![current];
    let mut iterations = 0;
    let mut step = opts.initial_step;
    let mut converged = false;
    let mut gradient_norm;
    loop {
        let grad = iu_gradient(&state);
        gradient_norm = grad.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if gradient_norm < opts.gradient_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        let mut t = (step * 2.0).min(opts.initial_step);
        while t >= opts.min_step {
            let us = LocalUnitaryTuple::new(
                grad.iter().map(|g| expm_anti_hermitian(&(g * Complex64::new(-t, 0.0)))).collect(),
            )?;
            let candidate = apply_local(&state, &us)?;
            let value = iu_entropy(&candidate);
            if value < current {
                state = candidate;
                total = us.after(&total)?;
                current = value;
                entropies.push(value);
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // re-orthonormalize the accumulated product and recompute the state from the input
    let matrices: Vec<CMatrix> = total
        .matrices()
        .iter()
        .map(|m| {
            let cols: Vec<CVector> = (0..m.ncols()).map(|k| m.column(k).into_owned()).collect();
            let mut q: Vec<CVector> = Vec::new();
            for v in cols {
                let r = project_out(&v, &q);
                let norm = r.norm();
                q.push(r / Complex64::new(norm, 0.0));
            }
            CMatrix::from_columns(&q)
        })
        .collect();
    let transforms = LocalUnitaryTuple::new(matrices)?;
    let state = apply_local(psi, &transforms)?;
    Ok(EntropyTrace { entropies, state, transforms, gradient_norm, iterations, converged })
}

/// Schmidt form of a two-mode state: diagonal, real, non-negative and
/// non-increasing coefficients.
pub fn classical_schmidt(psi: &StateTensor) -> Result<MarginalForm> {
    let dims = psi.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidArgument(format!("Schmidt form needs 2 modes, got {}", dims.len())));
    }
    let (d1, d2) = (dims[0], dims[1]);
    let t = CMatrix::from_row_slice(d1, d2, psi.amplitudes());
    let svd = t.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let left: Vec<CVector> = order.iter().map(|&j| u.column(j).into_owned()).collect();
    // rows of V† are conj of the right singular vectors
    let right: Vec<CVector> = order.iter().map(|&j| v_t.row(j).transpose().map(|x| x.conj())).collect();
    let left = complete_basis(&left, d1)?;
    let right = complete_basis(&right, d2)?;
    let u1 = CMatrix::from_columns(&left).adjoint();
    // C = U† T V, so the second mode is acted on by Vᵀ
    let u2 = CMatrix::from_columns(&right).transpose();
    let transforms = LocalUnitaryTuple::new(vec![u1, u2])?;
    let coefficients = apply_local(psi, &transforms)?;
    let mut s1: Vec<f64> = order.iter().map(|&j| svd.singular_values[j].powi(2)).collect();
    let mut s2 = s1.clone();
    s1.resize(d1, 0.0);
    s2.resize(d2, 0.0);
    let degenerate_modes = if s1.windows(2).any(|w| (w[0] - w[1]).abs() <= DEGENERACY_TOL) { vec![0, 1] } else { Vec::new() };
    Ok(MarginalForm { coefficients, transforms, eigenvalues: vec![s1, s2], degenerate_modes })
}

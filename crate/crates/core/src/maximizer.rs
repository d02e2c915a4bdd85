//! Maximal overlap of a state with product states.
//!
//! The objective `|⟨Ψ|φ^(1)⋯φ^(n)⟩|²` is maximized by alternating updates: each
//! factor in turn is replaced by the normalized projection of the conjugated
//! environment onto its allowed subspace, which is the exact maximizer of the
//! objective in that factor with the others held fixed. At a fixed point the
//! stationarity equations `e^(r) = λ conj(u^(r))` hold with `λ` the overlap.
//!
//! Global maxima are searched for by deterministic multistart: start `k` is
//! seeded with `seed ^ k` and the results are merged by a rule that does not
//! depend on the order in which starts finish.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ORTHONORMAL_TOL;
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, normalize_phase, orthonormality_deviation, project_out, random_unit_vector, rng_from_seed};
use crate::tensor::{environment_unchecked, CVector, ModeShape, ProductVectorTuple, StateTensor};

/// Environment norm below which a factor is restarted instead of normalized.
const ZERO_ENVIRONMENT: f64 = 1e-14;
/// Two maxima closer than this in `|λ|` are treated as ties.
const TIE_TOL: f64 = 1e-9;
/// Grid used to round factor coefficients when breaking ties.
const TIE_GRID: f64 = 1e-9;
/// Factors differing by more than this count as distinct maximizers.
const DISTINCT_VECTOR_TOL: f64 = 1e-6;
/// Sweeps the iteration allows for monotonicity rounding.
const MONOTONE_SLACK: f64 = 1e-14;
/// Limit on the number of basis-product starts used by [`stationary_points`].
const MAX_BASIS_STARTS: usize = 4096;

/// Per-mode lists of forbidden directions. The allowed subspace of a mode is
/// the orthogonal complement of its list.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceConstraint {
    dims: Vec<usize>,
    forbidden: Vec<Vec<CVector>>,
}

impl SubspaceConstraint {
    pub fn unconstrained(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), forbidden: vec![Vec::new(); dims.len()] }
    }

    pub fn new(dims: &[usize], forbidden: Vec<Vec<CVector>>) -> Result<Self> {
        if forbidden.len() != dims.len() {
            return Err(Error::InvalidArgument(format!(
                "constraint has {} modes, state has {}",
                forbidden.len(),
                dims.len()
            )));
        }
        for (mode, (list, &d)) in forbidden.iter().zip(dims).enumerate() {
            if list.iter().any(|v| v.len() != d) {
                return Err(Error::InvalidArgument(format!("forbidden vector of wrong length in mode {mode}")));
            }
            if list.len() >= d {
                return Err(Error::EmptySubspace { mode });
            }
            let deviation = orthonormality_deviation(list);
            if deviation > ORTHONORMAL_TOL {
                return Err(Error::NotOrthonormal { deviation });
            }
        }
        Ok(Self { dims: dims.to_vec(), forbidden })
    }

    /// Adds forbidden directions to one mode.
    pub fn forbid(self, mode: usize, vectors: &[CVector]) -> Result<Self> {
        if mode >= self.dims.len() {
            return Err(Error::ModeOutOfRange { mode, modes: self.dims.len() });
        }
        let mut forbidden = self.forbidden;
        forbidden[mode].extend_from_slice(vectors);
        Self::new(&self.dims, forbidden)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn forbidden(&self, mode: usize) -> &[CVector] {
        &self.forbidden[mode]
    }

    pub fn allowed_dim(&self, mode: usize) -> usize {
        self.dims[mode] - self.forbidden[mode].len()
    }

    pub fn is_fixed(&self, mode: usize) -> bool {
        self.allowed_dim(mode) == 1
    }

    /// Orthogonal projection onto the allowed subspace of `mode`.
    pub fn project(&self, mode: usize, v: &CVector) -> CVector {
        project_out(v, &self.forbidden[mode])
    }

    /// Largest overlap of `v` with a forbidden direction of `mode`.
    pub fn leakage(&self, mode: usize, v: &CVector) -> f64 {
        self.forbidden[mode].iter().map(|f| f.dotc(v).norm()).fold(0.0, f64::max)
    }

    /// The unique (up to phase) allowed vector of a mode whose allowed
    /// subspace is one-dimensional.
    pub fn fixed_vector(&self, mode: usize) -> Option<CVector> {
        if !self.is_fixed(mode) {
            return None;
        }
        let basis = complete_basis(&self.forbidden[mode], self.dims[mode]).ok()?;
        basis.last().cloned()
    }
}

/// Settings for the alternating iteration and the multistart driver.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerOptions {
    /// Starts for an unconstrained global search. `None` means `16 · max d_r`.
    pub starts: Option<usize>,
    /// Starts for each constrained (deflation) step of a canonicalization.
    pub deflation_starts: usize,
    /// Convergence threshold on the change of `|λ|` per sweep.
    pub overlap_tol: f64,
    /// Convergence threshold on the stationarity residual.
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for MaximizerOptions {
    fn default() -> Self {
        Self {
            starts: None,
            deflation_starts: 8,
            overlap_tol: 1e-13,
            residual_tol: 1e-10,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

impl MaximizerOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Number of starts for an unconstrained search over `dims`.
    pub fn global_starts(&self, dims: &[usize]) -> usize {
        self.starts.unwrap_or_else(|| 16 * dims.iter().copied().max().unwrap_or(1)).max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.deflation_starts == 0 || self.starts == Some(0) {
            return Err(Error::InvalidArgument("starts must be at least 1".into()));
        }
        if !(self.overlap_tol > 0.0 && self.residual_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A stationary (or best-so-far) product state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCritical {
    pub phis: ProductVectorTuple,
    /// The overlap `⟨Ψ|φ⟩` at `phis`; `|lambda|²` is the objective value.
    pub lambda: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set by the multistart merge when distinct factors attain the same value.
    pub non_unique: bool,
    /// `|λ|` after every full sweep.
    pub trace: Vec<f64>,
}

impl ProductCritical {
    pub fn value(&self) -> f64 {
        self.lambda.norm()
    }
}

/// Overlap and stationarity residual of `phis`, computed from scratch.
///
/// The residual is the largest `‖P_r conj(e^(r)) − conj(λ) u^(r)‖` over the
/// modes that are free to vary, where `P_r` projects onto the allowed subspace.
pub fn stationarity_residual(
    psi: &StateTensor,
    phis: &ProductVectorTuple,
    constraint: &SubspaceConstraint,
) -> Result<(Complex64, f64)> {
    check_problem(psi, constraint)?;
    if phis.dims() != psi.dims() {
        return Err(Error::ShapeMismatch { expected: psi.dims().to_vec(), found: phis.dims() });
    }
    Ok(residual_unchecked(psi, phis.vectors(), constraint))
}

fn residual_unchecked(psi: &StateTensor, vectors: &[CVector], constraint: &SubspaceConstraint) -> (Complex64, f64) {
    let n = vectors.len();
    let mut lambda = None;
    let mut envs = Vec::with_capacity(n);
    for r in 0..n {
        let e = environment_unchecked(psi, vectors, r);
        if lambda.is_none() {
            lambda = Some(e.iter().zip(vectors[r].iter()).map(|(a, b)| a * b).sum::<Complex64>());
        }
        envs.push(e);
    }
    let lambda = lambda.unwrap_or_default();
    let mut residual: f64 = 0.0;
    for r in 0..n {
        if constraint.is_fixed(r) {
            continue;
        }
        let target = constraint.project(r, &envs[r].map(|x| x.conj()));
        let diff = target - &vectors[r] * lambda.conj();
        residual = residual.max(diff.norm());
    }
    (lambda, residual)
}

fn check_problem(psi: &StateTensor, constraint: &SubspaceConstraint) -> Result<()> {
    if constraint.dims() != psi.dims() {
        return Err(Error::ShapeMismatch { expected: psi.dims().to_vec(), found: constraint.dims().to_vec() });
    }
    for mode in 0..psi.dims().len() {
        if constraint.allowed_dim(mode) == 0 {
            return Err(Error::EmptySubspace { mode });
        }
    }
    Ok(())
}

/// Alternating maximization from `init`.
///
/// Modes whose allowed subspace is one-dimensional are left untouched. When
/// the sweep budget runs out the best point reached is returned with
/// `converged = false`.
pub fn power_iterate(
    psi: &StateTensor,
    init: &ProductVectorTuple,
    constraint: &SubspaceConstraint,
    opts: &MaximizerOptions,
) -> Result<ProductCritical> {
    opts.validate()?;
    check_problem(psi, constraint)?;
    if init.dims() != psi.dims() {
        return Err(Error::ShapeMismatch { expected: psi.dims().to_vec(), found: init.dims() });
    }
    for (mode, v) in init.vectors().iter().enumerate() {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector { mode, norm });
        }
        let leakage = constraint.leakage(mode, v);
        if leakage > ORTHONORMAL_TOL {
            return Err(Error::InitViolatesConstraint { mode, leakage });
        }
    }
    Ok(iterate(psi, init.vectors().to_vec(), constraint, opts))
}

fn iterate(
    psi: &StateTensor,
    mut vectors: Vec<CVector>,
    constraint: &SubspaceConstraint,
    opts: &MaximizerOptions,
) -> ProductCritical {
    let n = vectors.len();
    let varied: Vec<usize> = (0..n).filter(|&r| !constraint.is_fixed(r)).collect();
    let mut restart_rng = rng_from_seed(opts.seed ^ 0x5eed_7e57_a11e_11ed);
    let mut trace = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let mut restarted = false;
        for &r in &varied {
            let e = environment_unchecked(psi, &vectors, r);
            let target = constraint.project(r, &e.map(|x| x.conj()));
            let norm = target.norm();
            if norm < ZERO_ENVIRONMENT {
                let fresh = random_unit_vector(&mut restart_rng, constraint.dims()[r]);
                let fresh = constraint.project(r, &fresh);
                let fnorm = fresh.norm();
                vectors[r] = fresh / Complex64::new(fnorm, 0.0);
                restarted = true;
            } else {
                vectors[r] = target / Complex64::new(norm, 0.0);
            }
        }
        let (lambda, residual) = residual_unchecked(psi, &vectors, constraint);
        let value = lambda.norm();
        trace.push(value);
        let settled = (value - previous).abs() < opts.overlap_tol && residual < opts.residual_tol;
        if (settled || varied.is_empty()) && (!restarted || value < ZERO_ENVIRONMENT) {
            converged = residual < opts.residual_tol;
            break;
        }
        previous = value;
    }

    // Fix the free phase of every varied factor so equal maxima compare equal.
    for &r in &varied {
        vectors[r] = normalize_phase(&vectors[r]);
    }
    let (lambda, residual) = residual_unchecked(psi, &vectors, constraint);
    if residual >= opts.residual_tol {
        converged = false;
    }

    ProductCritical {
        phis: ProductVectorTuple::from_vectors_unchecked(vectors),
        lambda,
        residual,
        iterations,
        converged,
        non_unique: false,
        trace,
    }
}

fn constrained_start(
    psi: &StateTensor,
    index: &[usize],
    constraint: &SubspaceConstraint,
    rng_seed: u64,
) -> Vec<CVector> {
    let dims = psi.dims();
    let mut rng = rng_from_seed(rng_seed);
    (0..dims.len())
        .map(|r| {
            if let Some(v) = constraint.fixed_vector(r) {
                return v;
            }
            let mut e = CVector::zeros(dims[r]);
            e[index[r]] = Complex64::new(1.0, 0.0);
            let p = constraint.project(r, &e);
            if p.norm() > 1e-8 {
                let norm = p.norm();
                p / Complex64::new(norm, 0.0)
            } else {
                random_allowed(&mut rng, constraint, r)
            }
        })
        .collect()
}

fn random_allowed<R: rand::Rng + ?Sized>(rng: &mut R, constraint: &SubspaceConstraint, mode: usize) -> CVector {
    if let Some(v) = constraint.fixed_vector(mode) {
        return v;
    }
    loop {
        let v = random_unit_vector(rng, constraint.dims()[mode]);
        let p = constraint.project(mode, &v);
        let norm = p.norm();
        if norm > 1e-8 {
            return p / Complex64::new(norm, 0.0);
        }
    }
}

fn random_start(constraint: &SubspaceConstraint, seed: u64) -> Vec<CVector> {
    let mut rng = rng_from_seed(seed);
    (0..constraint.dims().len()).map(|r| random_allowed(&mut rng, constraint, r)).collect()
}

fn tie_key(p: &ProductCritical) -> Vec<i64> {
    p.phis
        .vectors()
        .iter()
        .flat_map(|v| v.iter().flat_map(|x| [x.re, x.im]))
        .map(|x| (x / TIE_GRID).round() as i64)
        .collect()
}

fn vector_distance(a: &ProductVectorTuple, b: &ProductVectorTuple) -> f64 {
    a.vectors()
        .iter()
        .zip(b.vectors())
        .map(|(x, y)| (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// Picks the largest `|λ|`; ties within `1e-9` go to the lexicographically
/// smallest rounded factor coefficients.
fn merge(results: Vec<ProductCritical>) -> ProductCritical {
    let best = results.iter().map(|p| p.value()).fold(f64::NEG_INFINITY, f64::max);
    let mut ties: Vec<(Vec<i64>, ProductCritical)> = results
        .into_iter()
        .filter(|p| p.value() >= best - TIE_TOL)
        .map(|p| (tie_key(&p), p))
        .collect();
    ties.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.converged.cmp(&a.1.converged)));
    let non_unique = ties.iter().any(|(_, p)| vector_distance(&p.phis, &ties[0].1.phis) > DISTINCT_VECTOR_TOL);
    let mut chosen = ties.swap_remove(0).1;
    chosen.non_unique = non_unique;
    chosen
}

/// Seeded multistart over [`power_iterate`] using `starts` starts.
///
/// Start 0 is the basis product vector of the largest-modulus amplitude
/// (projected into the allowed subspaces); start `k > 0` is uniform on the
/// constrained spheres with seed `seed ^ k`.
pub fn multistart_with(
    psi: &StateTensor,
    constraint: &SubspaceConstraint,
    opts: &MaximizerOptions,
    starts: usize,
) -> Result<ProductCritical> {
    opts.validate()?;
    check_problem(psi, constraint)?;
    let starts = starts.max(1);
    let argmax = psi.argmax_modulus();
    let results: Vec<ProductCritical> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let sub_seed = opts.seed ^ k as u64;
            let init = if k == 0 {
                constrained_start(psi, &argmax, constraint, sub_seed)
            } else {
                random_start(constraint, sub_seed)
            };
            let local = MaximizerOptions { seed: sub_seed, ..opts.clone() };
            iterate(psi, init, constraint, &local)
        })
        .collect();
    Ok(merge(results))
}

/// Global maximization with the default number of starts for the problem:
/// `opts.starts` (or `16 · max d_r`) when unconstrained, `opts.deflation_starts`
/// when any mode is constrained.
pub fn multistart_maximize(
    psi: &StateTensor,
    constraint: &SubspaceConstraint,
    opts: &MaximizerOptions,
) -> Result<ProductCritical> {
    let constrained = (0..psi.dims().len()).any(|r| !constraint.forbidden(r).is_empty());
    let starts = if constrained { opts.deflation_starts } else { opts.global_starts(psi.dims()) };
    multistart_with(psi, constraint, opts, starts)
}

/// Distinct nonzero stationary values reachable from basis-product starts and
/// from random starts, sorted by decreasing `|λ|`.
///
/// Basis-product starts lie on invariant sets of the iteration and so also
/// reach saddle points that random starts climb away from.
pub fn stationary_points(
    psi: &StateTensor,
    constraint: &SubspaceConstraint,
    opts: &MaximizerOptions,
    cluster_tol: f64,
) -> Result<Vec<ProductCritical>> {
    opts.validate()?;
    check_problem(psi, constraint)?;
    let shape: &ModeShape = psi.shape();
    let mut inits: Vec<(u64, Vec<CVector>)> = Vec::new();
    if shape.size() <= MAX_BASIS_STARTS {
        for offset in 0..shape.size() {
            let index = shape.multi_index(offset);
            let seed = opts.seed ^ (offset as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            inits.push((seed, constrained_start(psi, &index, constraint, seed)));
        }
    }
    for k in 0..opts.global_starts(psi.dims()) {
        let seed = opts.seed ^ k as u64;
        inits.push((seed, random_start(constraint, seed)));
    }
    let mut found: Vec<ProductCritical> = inits
        .into_par_iter()
        .map(|(seed, init)| {
            let local = MaximizerOptions { seed, ..opts.clone() };
            iterate(psi, init, constraint, &local)
        })
        .filter(|p| p.converged && p.value() > 1e-12)
        .collect();
    found.sort_by(|a, b| {
        b.value()
            .partial_cmp(&a.value())
            .unwrap_or(Ordering::Equal)
            .then_with(|| tie_key(a).cmp(&tie_key(b)))
    });
    let mut distinct: Vec<ProductCritical> = Vec::new();
    for p in found {
        match distinct.last() {
            Some(last) if (last.value() - p.value()).abs() <= cluster_tol => {}
            _ => distinct.push(p),
        }
    }
    Ok(distinct)
}

/// True when the `|λ|` trace never decreases by more than rounding.
pub fn is_monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_product, random_state};
    use crate::tensor::{apply_local, overlap};
    use crate::testutil::*;

    fn e(d: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(d);
        v[i] = c(1.0, 0.0);
        v
    }

    #[test]
    fn product_state_is_an_exact_fixed_point() {
        let psi = ket(&[2, 2, 2], &[(&[0, 0, 0], c(1.0, 0.0))]);
        let init = ProductVectorTuple::basis(&[2, 2, 2], &[0, 0, 0]);
        let p = power_iterate(&psi, &init, &SubspaceConstraint::unconstrained(&[2, 2, 2]), &Default::default())
            .unwrap();
        assert!(p.converged);
        assert_close(p.lambda, c(1.0, 0.0), 1e-15);
        assert!(p.residual < 1e-15);
    }

    #[test]
    fn psi_star_principal_point_is_fixed() {
        let init = ProductVectorTuple::basis(&[2, 2, 2], &[0, 0, 0]);
        let p = power_iterate(&psi_star(), &init, &SubspaceConstraint::unconstrained(&[2, 2, 2]), &Default::default())
            .unwrap();
        assert!(p.converged);
        assert_close(p.lambda, c(3f64.sqrt() / 2.0, 0.0), 1e-15);
        assert_eq!(p.phis, init);
    }

    #[test]
    fn psi_star_with_modes_two_and_three_off_zero() {
        let constraint = SubspaceConstraint::unconstrained(&[2, 2, 2])
            .forbid(1, &[e(2, 0)])
            .unwrap()
            .forbid(2, &[e(2, 0)])
            .unwrap();
        let p = multistart_maximize(&psi_star(), &constraint, &Default::default()).unwrap();
        assert!(p.converged);
        assert!((p.value() - 0.5).abs() < 1e-12);
        assert_close(p.phis.vector(1)[1], c(1.0, 0.0), 1e-12);
        assert_close(p.phis.vector(2)[1], c(1.0, 0.0), 1e-12);
        let (_, res) = stationarity_residual(&psi_star(), &p.phis, &constraint).unwrap();
        assert!(res <= 1e-10);
    }

    #[test]
    fn global_values_of_named_states() {
        let opts = MaximizerOptions::default();
        let free = SubspaceConstraint::unconstrained(&[2, 2, 2]);
        let g = multistart_maximize(&ghz(3), &free, &opts).unwrap();
        assert!((g.value() - 0.5f64.sqrt()).abs() < 1e-9);
        let w = multistart_maximize(&w_state(3), &free, &opts).unwrap();
        assert!((w.value().powi(2) - 4.0 / 9.0).abs() < 1e-9);
        let p = multistart_maximize(&psi_star(), &free, &opts).unwrap();
        assert!((p.value().powi(2) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn ghz_maximum_is_flagged_non_unique() {
        let g = multistart_maximize(&ghz(3), &SubspaceConstraint::unconstrained(&[2, 2, 2]), &Default::default())
            .unwrap();
        assert!(g.non_unique);
    }

    #[test]
    fn multistart_is_deterministic() {
        let shape = ModeShape::new(vec![2, 3, 3]).unwrap();
        let psi = random_state(&shape, 3).unwrap();
        let free = SubspaceConstraint::unconstrained(&[2, 3, 3]);
        let opts = MaximizerOptions::with_seed(17);
        assert_eq!(multistart_maximize(&psi, &free, &opts).unwrap(), multistart_maximize(&psi, &free, &opts).unwrap());
    }

    #[test]
    fn stationary_values_of_psi_star() {
        let pts = stationary_points(
            &psi_star(),
            &SubspaceConstraint::unconstrained(&[2, 2, 2]),
            &Default::default(),
            1e-7,
        )
        .unwrap();
        let sq: Vec<f64> = pts.iter().map(|p| p.value().powi(2)).collect();
        assert!((sq[0] - 0.75).abs() < 1e-12, "{sq:?}");
        assert!(sq.iter().any(|&v| (v - 0.25).abs() < 1e-9), "{sq:?}");
        assert!(pts.iter().all(|p| p.residual <= 1e-10));
        assert!(sq.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn stationary_values_match_between_psi_and_phi() {
        let free = SubspaceConstraint::unconstrained(&[2, 2, 2]);
        let opts = MaximizerOptions::default();
        let a = stationary_points(&psi_star(), &free, &opts, 1e-7).unwrap();
        let b = stationary_points(&phi_star(), &free, &opts, 1e-7).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.value() - y.value()).abs() < 1e-8);
        }
    }

    #[test]
    fn product_state_has_single_stationary_value() {
        let psi = ket(&[2, 2, 2], &[(&[0, 0, 0], c(1.0, 0.0))]);
        let pts = stationary_points(&psi, &SubspaceConstraint::unconstrained(&[2, 2, 2]), &Default::default(), 1e-7)
            .unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweeps_are_monotone_and_certified() {
        for seed in 0..30u64 {
            let dims = [[2, 2, 2], [2, 3, 4], [3, 3, 3]][(seed % 3) as usize];
            let shape = ModeShape::new(dims.to_vec()).unwrap();
            let psi = random_state(&shape, seed).unwrap();
            let init = random_product(&dims, seed + 7);
            let free = SubspaceConstraint::unconstrained(&dims);
            let p = power_iterate(&psi, &init, &free, &Default::default()).unwrap();
            assert!(is_monotone(&p.trace), "{:?}", p.trace);
            assert!(p.trace[0] + 1e-14 >= overlap(&psi, &init).unwrap().norm());
            if p.converged {
                let (l, res) = stationarity_residual(&psi, &p.phis, &free).unwrap();
                assert!(res <= 1e-10);
                assert_close(l, p.lambda, 1e-13);
            }
        }
    }

    #[test]
    fn constrained_results_respect_the_constraint() {
        let dims = [3usize, 3, 4];
        let shape = ModeShape::new(dims.to_vec()).unwrap();
        for seed in 0..10u64 {
            let psi = random_state(&shape, seed).unwrap();
            let first = multistart_maximize(&psi, &SubspaceConstraint::unconstrained(&dims), &Default::default())
                .unwrap();
            let mut constraint = SubspaceConstraint::unconstrained(&dims);
            for r in 0..3 {
                constraint = constraint.forbid(r, std::slice::from_ref(first.phis.vector(r))).unwrap();
            }
            let second = multistart_maximize(&psi, &constraint, &Default::default()).unwrap();
            for r in 0..3 {
                assert!(constraint.leakage(r, second.phis.vector(r)) <= 1e-10);
            }
            assert!(second.value() <= first.value() + 1e-12);
        }
    }

    #[test]
    fn fixed_modes_are_not_altered() {
        let dims = [2usize, 2, 3];
        let psi = random_state(&ModeShape::new(dims.to_vec()).unwrap(), 4).unwrap();
        let constraint = SubspaceConstraint::unconstrained(&dims).forbid(0, &[e(2, 0)]).unwrap();
        let mut init = random_product(&dims, 1).vectors().to_vec();
        init[0] = e(2, 1) * c(0.0, 1.0);
        let init = ProductVectorTuple::new(init).unwrap();
        let p = power_iterate(&psi, &init, &constraint, &Default::default()).unwrap();
        assert_eq!(p.phis.vector(0), init.vector(0));
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let dims = [2usize, 2, 2];
        assert!(matches!(
            SubspaceConstraint::unconstrained(&dims).forbid(0, &[e(2, 0), e(2, 1)]),
            Err(Error::EmptySubspace { mode: 0 })
        ));
        let constraint = SubspaceConstraint::unconstrained(&dims).forbid(1, &[e(2, 0)]).unwrap();
        let init = ProductVectorTuple::basis(&dims, &[0, 0, 0]);
        assert!(matches!(
            power_iterate(&psi_star(), &init, &constraint, &Default::default()),
            Err(Error::InitViolatesConstraint { mode: 1, .. })
        ));
        let opts = MaximizerOptions { starts: Some(0), ..Default::default() };
        assert!(multistart_maximize(&psi_star(), &SubspaceConstraint::unconstrained(&dims), &opts).is_err());
    }

    #[test]
    fn budget_exhaustion_returns_best_so_far() {
        let shape = ModeShape::new(vec![3, 3, 3]).unwrap();
        let psi = random_state(&shape, 1).unwrap();
        let init = random_product(&[3, 3, 3], 2);
        let opts = MaximizerOptions { max_iterations: 1, ..Default::default() };
        let p = power_iterate(&psi, &init, &SubspaceConstraint::unconstrained(&[3, 3, 3]), &opts).unwrap();
        assert_eq!(p.iterations, 1);
        assert!(!p.converged);
        assert!(p.value() >= overlap(&psi, &init).unwrap().norm());
    }

    #[test]
    fn maximum_is_local_unitary_invariant() {
        for seed in 0..10u64 {
            let dims = [2usize, 2, 3];
            let psi = random_state(&ModeShape::new(dims.to_vec()).unwrap(), seed).unwrap();
            let moved = apply_local(&psi, &random_local(&dims, seed + 99)).unwrap();
            let free = SubspaceConstraint::unconstrained(&dims);
            let opts = MaximizerOptions { starts: Some(64), ..Default::default() };
            let a = multistart_maximize(&psi, &free, &opts).unwrap();
            let b = multistart_maximize(&moved, &free, &opts).unwrap();
            assert!((a.value() - b.value()).abs() < 1e-8);
        }
    }
}

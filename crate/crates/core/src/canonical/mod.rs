//! Canonical form of a state under local unitaries.
//!
//! [`canonicalize`] builds one orthonormal basis per mode by a ladder of
//! constrained product-state maximizations, fixes the trailing basis vectors
//! of the last mode from the index tuples `I_k`, spends the remaining phase
//! freedom on the coefficients in `B_1 … B_4`, and returns the coefficients in
//! the new basis together with the local unitaries that produce them.
//!
//! [`canonicalize_any`] accepts any shape: modes of dimension 1 are dropped,
//! the rest are sorted by dimension, two-mode states go to the bipartite
//! Schmidt form, and the result is mapped back to the original mode order.

pub mod index_sets;

use num_complex::Complex64;
use serde::Serialize;

use crate::altforms::classical_schmidt;
use crate::config::CONDITION_TOL;
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, normalize_phase, project_out};
use crate::maximizer::{multistart_with, MaximizerOptions, SubspaceConstraint};
use crate::orbit::{check_conditions, ConditionReport};
use crate::tensor::{apply_local, environment_unchecked, CMatrix, CVector, LocalUnitaryTuple, ModeShape, StateTensor};

pub use index_sets::{enumerate_index_sets, ladder_zero_indices, IndexSets, MultiIndex};

/// Extra attempts made, each with four times the starts of the previous one,
/// when the first result fails the condition check.
pub const MAX_ESCALATIONS: usize = 3;
/// Starts multiplier per escalation.
pub const ESCALATION_FACTOR: usize = 4;
/// Coefficients below this modulus do not fix a phase.
const PHASE_ZERO: f64 = 1e-9;
/// A trailing last-mode direction shorter than this counts as a zero maximum.
const DIRECTION_ZERO: f64 = 1e-9;

/// Something worth knowing about a canonicalization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalFlag {
    /// A maximization step had distinct maximizers with the same value.
    NonUniqueMaximum { step: usize },
    /// A maximization step ran out of sweeps before meeting its tolerances.
    NotConverged { step: usize, residual: f64 },
    /// The tuple `I_k` gave no new direction for the last mode.
    SkippedIndexTuple { tuple: MultiIndex },
    /// The coefficient meant to fix a phase vanished; the phase was left alone.
    ZeroPhaseCoefficient { index: MultiIndex },
    /// The run was repeated with more starts.
    Escalated { attempt: usize, starts_factor: usize },
}

/// Output of [`canonicalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub coefficients: StateTensor,
    /// `apply_local(input, transforms) == coefficients`.
    pub transforms: LocalUnitaryTuple,
    pub report: ConditionReport,
    /// `R_1, …, R_{d_{n-1}}`.
    pub r_values: Vec<f64>,
    /// `|λ|` of every maximization step, in order.
    pub step_values: Vec<f64>,
    pub flags: Vec<CanonicalFlag>,
    /// Number of repeated attempts (0 when the first attempt passed).
    pub escalations: usize,
}

impl CanonicalForm {
    pub fn passed(&self) -> bool {
        self.report.passes()
    }
}

/// Brings a state with a canonical-ready shape into canonical form.
///
/// If the first attempt fails the condition check, the whole construction is
/// repeated with [`ESCALATION_FACTOR`] times more starts, up to
/// [`MAX_ESCALATIONS`] times. The returned form is the first passing attempt,
/// or the attempt with the smallest worst violation; its transforms always map
/// the input onto its coefficients.
pub fn canonicalize(psi: &StateTensor, opts: &MaximizerOptions) -> Result<CanonicalForm> {
    index_sets::require_canonical_ready(psi.shape())?;
    let mut best: Option<(f64, CanonicalForm)> = None;
    let mut flags = Vec::new();
    for attempt in 0..=MAX_ESCALATIONS {
        let factor = ESCALATION_FACTOR.pow(attempt as u32);
        if attempt > 0 {
            flags.push(CanonicalFlag::Escalated { attempt, starts_factor: factor });
        }
        let mut form = build(psi, opts, factor, attempt as u64)?;
        form.escalations = attempt;
        if form.passed() {
            form.flags.splice(0..0, flags);
            return Ok(form);
        }
        let badness = worst_violation(&form.report);
        if best.as_ref().is_none_or(|(b, _)| badness < *b) {
            best = Some((badness, form));
        }
    }
    let (_, mut form) = best.expect("at least one attempt");
    form.flags.splice(0..0, flags);
    form.escalations = MAX_ESCALATIONS;
    Ok(form)
}

fn worst_violation(report: &ConditionReport) -> f64 {
    let mut outcomes = vec![&report.cond1, &report.cond2, &report.cond3, &report.cond4];
    if let Some(e) = &report.equal_dims {
        outcomes.push(&e.dominance);
    }
    let mut worst = outcomes
        .iter()
        .flat_map(|c| c.violations.iter().map(|v| v.magnitude))
        .fold(0.0, f64::max);
    for w in report.r_values.windows(2) {
        worst = worst.max(w[1] - w[0]);
    }
    worst
}

struct Builder<'a> {
    psi: &'a StateTensor,
    dims: Vec<usize>,
    basis: Vec<Vec<CVector>>,
    opts: MaximizerOptions,
    factor: usize,
    step: usize,
    step_values: Vec<f64>,
    flags: Vec<CanonicalFlag>,
}

impl Builder<'_> {
    /// Maximizes with modes `..fixed` pinned to their last basis vector and
    /// the others orthogonal to the vectors found so far, then appends the
    /// new factors of the free modes.
    fn maximize(&mut self, fixed: usize) -> Result<()> {
        let forbidden: Vec<Vec<CVector>> = self
            .basis
            .iter()
            .enumerate()
            .map(|(s, b)| if s < fixed { b[..self.dims[s] - 1].to_vec() } else { b.clone() })
            .collect();
        let unconstrained = forbidden.iter().all(|f| f.is_empty());
        let constraint = SubspaceConstraint::new(&self.dims, forbidden)?;
        let base = if unconstrained { self.opts.global_starts(&self.dims) } else { self.opts.deflation_starts };
        let local = MaximizerOptions {
            seed: self.opts.seed.wrapping_add((self.step as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            ..self.opts.clone()
        };
        let found = multistart_with(self.psi, &constraint, &local, base * self.factor)?;
        if found.non_unique {
            self.flags.push(CanonicalFlag::NonUniqueMaximum { step: self.step });
        }
        if !found.converged {
            self.flags.push(CanonicalFlag::NotConverged { step: self.step, residual: found.residual });
        }
        self.step_values.push(found.value());
        for s in fixed..self.dims.len() {
            self.basis[s].push(found.phis.vector(s).clone());
        }
        self.step += 1;
        Ok(())
    }

    fn complete(&mut self, mode: usize) -> Result<()> {
        self.basis[mode] = complete_basis(&self.basis[mode], self.dims[mode])?;
        Ok(())
    }

    /// `c_idx` for a 1-based index in the current bases.
    fn coefficient(&self, idx: &[usize]) -> Complex64 {
        let vectors: Vec<CVector> = idx.iter().enumerate().map(|(s, &i)| self.basis[s][i - 1].clone()).collect();
        let e = environment_unchecked(self.psi, &vectors, 0);
        e.dot(&vectors[0]).conj()
    }

    /// Rotates `ψ^(mode)_j` so that `c_idx` becomes real and non-negative.
    fn fix_phase(&mut self, mode: usize, j: usize, idx: MultiIndex) {
        let c = self.coefficient(&idx);
        if c.norm() < PHASE_ZERO {
            self.flags.push(CanonicalFlag::ZeroPhaseCoefficient { index: idx });
            return;
        }
        let v = &mut self.basis[mode][j - 1];
        *v *= c / c.norm();
    }
}

fn build(psi: &StateTensor, opts: &MaximizerOptions, factor: usize, attempt: u64) -> Result<CanonicalForm> {
    let dims = psi.dims().to_vec();
    let n = dims.len();
    let sets = enumerate_index_sets(psi.shape())?;
    let mut b = Builder {
        psi,
        dims: dims.clone(),
        basis: vec![Vec::new(); n],
        opts: MaximizerOptions { seed: opts.seed.wrapping_add(attempt.wrapping_mul(0xd1b5_4a32_d192_ed03)), ..opts.clone() },
        factor,
        step: 0,
        step_values: Vec::new(),
        flags: Vec::new(),
    };

    for _ in 1..dims[0] {
        b.maximize(0)?;
    }
    b.complete(0)?;
    for r in 1..n - 1 {
        for _ in dims[r - 1]..dims[r] {
            b.maximize(r)?;
        }
        b.complete(r)?;
    }

    let last = n - 1;
    for tuple in &sets.tuples {
        if b.basis[last].len() == dims[last] {
            break;
        }
        let mut vectors: Vec<CVector> = tuple.iter().enumerate().map(|(s, &i)| b.basis[s][i - 1].clone()).collect();
        vectors.push(CVector::zeros(dims[last]));
        let e = environment_unchecked(psi, &vectors, last);
        let v = project_out(&e.map(|x| x.conj()), &b.basis[last]);
        let norm = v.norm();
        if norm < DIRECTION_ZERO {
            b.flags.push(CanonicalFlag::SkippedIndexTuple { tuple: tuple.clone() });
            continue;
        }
        b.basis[last].push(v / Complex64::new(norm, 0.0));
    }
    b.complete(last)?;

    for mode in b.basis.iter_mut() {
        for v in mode.iter_mut() {
            *v = normalize_phase(v);
        }
    }

    let head: Vec<usize> = dims[..last].to_vec();
    let d_prev = dims[n - 2];
    let with_last = |j: usize| {
        let mut idx = head.clone();
        idx.push(j);
        idx
    };
    b.fix_phase(last, 1, with_last(1));
    b.fix_phase(last, d_prev, with_last(d_prev));
    for idx in &sets.b1 {
        let r = idx.iter().zip(&head).position(|(a, h)| a != h).expect("B1 index differs from the head");
        b.fix_phase(r, idx[r], idx.clone());
    }
    for idx in &sets.b2 {
        b.fix_phase(n - 2, idx[n - 2], idx.clone());
    }
    for idx in &sets.b3 {
        if idx[n - 2] < d_prev {
            b.fix_phase(n - 2, idx[n - 2], idx.clone());
        }
    }
    for idx in &sets.b4 {
        if idx[last] != d_prev {
            b.fix_phase(last, idx[last], idx.clone());
        }
    }

    let matrices: Vec<CMatrix> = b.basis.iter().map(|vs| CMatrix::from_columns(vs).adjoint()).collect();
    let transforms = LocalUnitaryTuple::new(matrices)?;
    let coefficients = apply_local(psi, &transforms)?;
    let report = check_conditions(&coefficients, CONDITION_TOL)?;
    Ok(CanonicalForm {
        coefficients,
        transforms,
        r_values: report.r_values.clone(),
        report,
        step_values: b.step_values,
        flags: b.flags,
        escalations: 0,
    })
}

/// Reorders the modes so that `new mode k` is `old mode perm[k]`.
pub fn permute_modes(psi: &StateTensor, perm: &[usize]) -> Result<StateTensor> {
    let dims = psi.dims();
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of {n} modes")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_shape = ModeShape::new(new_dims)?;
    let old_strides = psi.shape().strides();
    let amps = psi.amplitudes();
    let out = (0..new_shape.size())
        .map(|k| {
            let idx = new_shape.multi_index(k);
            let src: usize = idx.iter().zip(perm).map(|(&i, &p)| i * old_strides[p]).sum();
            amps[src]
        })
        .collect();
    StateTensor::from_raw(new_shape, out)
}

/// Inverse of a mode permutation.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Stable sort of the modes by dimension. Returns the permuted state and the
/// permutation (`sorted mode k` is `input mode perm[k]`).
pub fn sort_modes(psi: &StateTensor) -> Result<(StateTensor, Vec<usize>)> {
    let mut perm: Vec<usize> = (0..psi.dims().len()).collect();
    perm.sort_by_key(|&k| psi.dims()[k]);
    Ok((permute_modes(psi, &perm)?, perm))
}

/// Which construction produced a [`GeneralCanonicalForm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// No mode of dimension at least 2; returned unchanged.
    Scalar,
    /// One nontrivial mode.
    SingleMode,
    /// Two nontrivial modes: Schmidt form.
    Bipartite,
    /// Three or more nontrivial modes.
    Multipartite,
}

/// Canonical form of a state of any shape, in the input's mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralCanonicalForm {
    pub kind: FormKind,
    /// Canonical coefficients in the input's mode order.
    pub coefficients: StateTensor,
    /// Per input mode; `apply_local(input, transforms) == coefficients`.
    pub transforms: LocalUnitaryTuple,
    /// Input modes of dimension at least 2, sorted by dimension: the order in
    /// which the canonical-form conditions apply.
    pub mode_order: Vec<usize>,
    /// The coefficients in `mode_order`, with trivial modes removed.
    pub reduced: StateTensor,
    /// Present for [`FormKind::Multipartite`].
    pub multipartite: Option<CanonicalForm>,
    /// Schmidt coefficients for [`FormKind::Bipartite`].
    pub schmidt: Option<Vec<f64>>,
}

impl GeneralCanonicalForm {
    pub fn passed(&self) -> bool {
        self.multipartite.as_ref().is_none_or(|f| f.passed())
    }
}

/// Canonical form of a state of any shape.
pub fn canonicalize_any(psi: &StateTensor, opts: &MaximizerOptions) -> Result<GeneralCanonicalForm> {
    let dims = psi.dims();
    let mut order: Vec<usize> = (0..dims.len()).filter(|&r| dims[r] > 1).collect();
    order.sort_by_key(|&r| dims[r]);
    let kept: Vec<usize> = {
        let mut k = order.clone();
        k.sort_unstable();
        k
    };
    if order.is_empty() {
        return Ok(GeneralCanonicalForm {
            kind: FormKind::Scalar,
            coefficients: psi.clone(),
            transforms: LocalUnitaryTuple::identity(psi.shape()),
            mode_order: order,
            reduced: psi.clone(),
            multipartite: None,
            schmidt: None,
        });
    }
    // dropping dimension-1 modes leaves the flat amplitude order unchanged
    let stripped_dims: Vec<usize> = kept.iter().map(|&r| dims[r]).collect();
    let stripped = StateTensor::from_raw(ModeShape::new(stripped_dims)?, psi.amplitudes().to_vec())?;
    let perm: Vec<usize> = order.iter().map(|r| kept.iter().position(|k| k == r).expect("kept")).collect();
    let sorted = permute_modes(&stripped, &perm)?;

    let (kind, reduced_transforms, multipartite, schmidt) = match order.len() {
        1 => {
            let v = CVector::from_column_slice(sorted.amplitudes());
            let basis = complete_basis(&[v.clone()], v.len())?;
            (FormKind::SingleMode, vec![CMatrix::from_columns(&basis).adjoint()], None, None)
        }
        2 => {
            let form = classical_schmidt(&sorted)?;
            let values = (0..sorted.dims()[0]).map(|i| form.coefficients.get(&[i, i]).re).collect();
            (FormKind::Bipartite, form.transforms.into_matrices(), None, Some(values))
        }
        0 => unreachable!("handled above"),
        _ => {
            let form = canonicalize(&sorted, opts)?;
            (FormKind::Multipartite, form.transforms.matrices().to_vec(), Some(form), None)
        }
    };

    let mut matrices: Vec<CMatrix> = dims.iter().map(|&d| CMatrix::identity(d, d)).collect();
    for (k, m) in reduced_transforms.into_iter().enumerate() {
        matrices[order[k]] = m;
    }
    let transforms = LocalUnitaryTuple::new(matrices)?;
    let coefficients = apply_local(psi, &transforms)?;
    let stripped_out = StateTensor::from_raw(stripped.shape().clone(), coefficients.amplitudes().to_vec())?;
    let reduced = permute_modes(&stripped_out, &perm)?;
    Ok(GeneralCanonicalForm { kind, coefficients, transforms, mode_order: order, reduced, multipartite, schmidt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_state;
    use crate::orbit::orbit_info;
    use crate::testutil::*;

    fn opts() -> MaximizerOptions {
        MaximizerOptions::with_seed(7)
    }

    fn certificate_error(psi: &StateTensor, form: &CanonicalForm) -> f64 {
        apply_local(psi, &form.transforms).unwrap().max_abs_diff(&form.coefficients)
    }

    #[test]
    fn product_state_is_fixed() {
        let psi = StateTensor::basis(ModeShape::new(vec![2, 2, 2]).unwrap(), &[0, 0, 0]).unwrap();
        let form = canonicalize(&psi, &opts()).unwrap();
        assert!(form.passed());
        assert_close(form.coefficients.get(&[0, 0, 0]).norm(), 1.0, 1e-12);
    }

    #[test]
    fn psi_star_is_its_own_canonical_form() {
        let form = canonicalize(&psi_star(), &opts()).unwrap();
        assert!(form.passed(), "{:?}", form.report.failures());
        assert!(form.coefficients.max_abs_diff(&psi_star()) < 1e-8);
        assert_eq!(form.escalations, 0);
    }

    #[test]
    fn phi_star_reaches_psi_star() {
        let form = canonicalize(&phi_star(), &opts()).unwrap();
        assert!(form.coefficients.max_abs_diff(&psi_star()) < 1e-8);
        assert!(certificate_error(&phi_star(), &form) < 1e-9);
    }

    #[test]
    fn half_variant_is_not_returned() {
        let form = canonicalize(&psi_star(), &opts()).unwrap();
        assert!(form.coefficients.max_abs_diff(&psi_star_half_variant()) > 0.1);
        let form = canonicalize(&psi_star_half_variant(), &opts()).unwrap();
        assert_close(form.coefficients.get(&[0, 0, 0]).norm(), 3f64.sqrt() / 2.0, 1e-8);
    }

    #[test]
    fn random_three_qubit_support() {
        let shape = ModeShape::new(vec![2, 2, 2]).unwrap();
        for seed in 0..10 {
            let psi = random_state(&shape, seed).unwrap();
            let form = canonicalize(&psi, &opts()).unwrap();
            assert!(form.passed(), "seed {seed}: {:?}", form.report.failures());
            assert!(certificate_error(&psi, &form) < 1e-9);
            for idx in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
                assert!(form.coefficients.get(&idx).norm() < 1e-9);
            }
            for idx in [[0, 1, 1], [1, 0, 1], [1, 1, 0], [1, 1, 1]] {
                let c = form.coefficients.get(&idx);
                assert!(c.im.abs() < 1e-9 && c.re > -1e-9, "seed {seed} {idx:?} {c}");
            }
        }
    }

    #[test]
    fn unequal_shapes_pass_and_show_forced_zeros() {
        for (k, dims) in [vec![2, 2, 3], vec![2, 3, 4], vec![2, 2, 5], vec![3, 3, 3], vec![2, 2, 2, 2], vec![2, 2, 2, 5]]
            .into_iter()
            .enumerate()
        {
            let shape = ModeShape::new(dims.clone()).unwrap();
            let psi = random_state(&shape, 100 + k as u64).unwrap();
            let form = canonicalize(&psi, &opts()).unwrap();
            assert!(form.passed(), "{dims:?}: {:?}", form.report.failures());
            assert!(certificate_error(&psi, &form) < 1e-9);
            let info = orbit_info(&shape).unwrap();
            assert!(form.report.observed_zero_count as u64 >= info.total_zeros(), "{dims:?}");
        }
    }

    #[test]
    fn r_values_are_invariant() {
        let shape = ModeShape::new(vec![2, 2, 3]).unwrap();
        let psi = random_state(&shape, 5).unwrap();
        let moved = apply_local(&psi, &random_local(&[2, 2, 3], 6)).unwrap();
        let a = canonicalize(&psi, &opts()).unwrap();
        let b = canonicalize(&moved, &opts()).unwrap();
        for (x, y) in a.r_values.iter().zip(&b.r_values) {
            assert_close(*x, *y, 1e-7);
        }
    }

    #[test]
    fn rejects_unready_shape() {
        let psi = random_state(&ModeShape::new(vec![3, 2, 2]).unwrap(), 1).unwrap();
        assert!(matches!(canonicalize(&psi, &opts()), Err(Error::NotCanonicalReady(_))));
    }

    #[test]
    fn sort_modes_examples() {
        let psi = random_state(&ModeShape::new(vec![3, 2, 2]).unwrap(), 2).unwrap();
        let (sorted, perm) = sort_modes(&psi).unwrap();
        assert_eq!(sorted.dims(), &[2, 2, 3]);
        assert_eq!(perm, vec![1, 2, 0]);
        let back = permute_modes(&sorted, &invert_permutation(&perm)).unwrap();
        assert_eq!(back, psi);
        let (same, perm) = sort_modes(&sorted).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(same, sorted);
    }

    #[test]
    fn permute_moves_amplitudes() {
        let psi = ket(&[2, 3], &[(&[1, 2], c(1.0, 0.0))]);
        let swapped = permute_modes(&psi, &[1, 0]).unwrap();
        assert_eq!(swapped.dims(), &[3, 2]);
        assert_eq!(swapped.get(&[2, 1]), c(1.0, 0.0));
        assert!(permute_modes(&psi, &[0, 0]).is_err());
    }

    #[test]
    fn general_entry_handles_every_kind() {
        let shape = ModeShape::new(vec![3, 1, 2, 2]).unwrap();
        let psi = random_state(&shape, 3).unwrap();
        let form = canonicalize_any(&psi, &opts()).unwrap();
        assert_eq!(form.kind, FormKind::Multipartite);
        assert_eq!(form.mode_order, vec![2, 3, 0]);
        assert_eq!(form.reduced.dims(), &[2, 2, 3]);
        assert!(form.passed());
        assert!(apply_local(&psi, &form.transforms).unwrap().max_abs_diff(&form.coefficients) < 1e-9);

        let bell = ket(&[2, 1, 2], &[(&[0, 0, 0], c(0.6, 0.0)), (&[1, 0, 1], c(0.0, 0.8))]);
        let form = canonicalize_any(&bell, &opts()).unwrap();
        assert_eq!(form.kind, FormKind::Bipartite);
        let s = form.schmidt.unwrap();
        assert_close(s[0], 0.8, 1e-10);
        assert_close(s[1], 0.6, 1e-10);

        let single = ket(&[1, 3], &[(&[0, 1], c(0.0, 1.0))]);
        let form = canonicalize_any(&single, &opts()).unwrap();
        assert_eq!(form.kind, FormKind::SingleMode);
        assert_close(form.coefficients.get(&[0, 0]).re, 1.0, 1e-12);

        let scalar = ket(&[1, 1], &[(&[0, 0], c(0.0, 1.0))]);
        assert_eq!(canonicalize_any(&scalar, &opts()).unwrap().kind, FormKind::Scalar);
    }
}

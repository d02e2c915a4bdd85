//! Canonical-form conditions, constrained-index counts and orbit dimensions.
//!
//! Everything except [`check_conditions`] is integer combinatorics on the shape.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::canonical::index_sets::{
    enumerate_index_sets, ladder_zero_families, ladder_zero_indices, require_canonical_ready, staircase, MultiIndex,
};
use crate::error::Result;
use crate::tensor::{ModeShape, StateTensor};

/// A coefficient that breaks a condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// 1-based multi-index.
    pub index: MultiIndex,
    pub value: Complex64,
    pub magnitude: f64,
}

/// Outcome of one condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionOutcome {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ConditionOutcome {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self { passed: violations.is_empty(), violations }
    }
}

/// The three conditions of the equal-dimension form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualDimsConditions {
    /// `c_{i…i j i…i} = 0` for `i < j`.
    pub zeros: ConditionOutcome,
    /// Real and non-negative when at most one index differs from `d`.
    pub reals: ConditionOutcome,
    /// `|c_{i…i}| >= |c_{j_1…j_n}|` whenever every `j_r >= i`.
    pub dominance: ConditionOutcome,
}

/// Result of checking a coefficient tensor against the canonical-form conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub dims: Vec<usize>,
    pub tolerance: f64,
    /// Ladder zeros with `i < d_1`.
    pub cond1: ConditionOutcome,
    /// Ladder zeros on the staircase `d_1 … d_r i … i`.
    pub cond2: ConditionOutcome,
    /// Zeros on the set `A`.
    pub cond3: ConditionOutcome,
    /// Real non-negative entries on `B_1 ∪ … ∪ B_4`.
    pub cond4: ConditionOutcome,
    /// `R_1 >= … >= R_{d_{n-1}}`.
    pub cond5: ConditionOutcome,
    /// Present only when all dimensions are equal.
    pub equal_dims: Option<EqualDimsConditions>,
    pub r_values: Vec<f64>,
    pub forced_zero_count: usize,
    pub forced_real_count: usize,
    /// Entries with modulus at most the tolerance.
    pub observed_zero_count: usize,
}

impl ConditionReport {
    /// True when conditions 1–5 hold, and for equal dimensions also the
    /// diagonal dominance condition.
    ///
    /// The equal-dimension reality pattern is reported but not required: for
    /// `d >= 3` it fixes a different set of phases than `B_1 … B_4`, and the
    /// two cannot hold together in general.
    pub fn passes(&self) -> bool {
        [&self.cond1, &self.cond2, &self.cond3, &self.cond4, &self.cond5].iter().all(|c| c.passed)
            && self.equal_dims.as_ref().is_none_or(|e| e.dominance.passed)
    }

    /// Names of the failing conditions, for diagnostics.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, c) in [
            ("condition 1", &self.cond1),
            ("condition 2", &self.cond2),
            ("condition 3", &self.cond3),
            ("condition 4", &self.cond4),
            ("condition 5", &self.cond5),
        ] {
            if !c.passed {
                out.push(name);
            }
        }
        if let Some(e) = &self.equal_dims {
            for (name, c) in [
                ("equal-dims zeros", &e.zeros),
                ("equal-dims reals", &e.reals),
                ("equal-dims dominance", &e.dominance),
            ] {
                if !c.passed {
                    out.push(name);
                }
            }
        }
        out
    }
}

fn coeff(coeffs: &StateTensor, index: &[usize]) -> Complex64 {
    coeffs.amplitudes()[coeffs.shape().offset_one_based(index)]
}

fn violation(coeffs: &StateTensor, index: &[usize]) -> Violation {
    let value = coeff(coeffs, index);
    Violation { index: index.to_vec(), value, magnitude: value.norm() }
}

fn zero_violations<'a>(coeffs: &StateTensor, indices: impl IntoIterator<Item = &'a MultiIndex>, tol: f64) -> Vec<Violation> {
    indices
        .into_iter()
        .filter(|i| coeff(coeffs, i).norm() > tol)
        .map(|i| violation(coeffs, i))
        .collect()
}

fn real_violations<'a>(coeffs: &StateTensor, indices: impl IntoIterator<Item = &'a MultiIndex>, tol: f64) -> Vec<Violation> {
    indices
        .into_iter()
        .filter(|i| {
            let c = coeff(coeffs, i);
            c.im.abs() > tol || c.re < -tol
        })
        .map(|i| violation(coeffs, i))
        .collect()
}

/// The indices `(d_1, …, d_r, i, …, i)` with `d_r < i <= d_{r+1}` whose moduli
/// are the `R_i`, for `i = 1 … d_{n-1}`.
pub fn r_indices(dims: &[usize]) -> Vec<MultiIndex> {
    let n = dims.len();
    (1..=dims[n - 2])
        .map(|i| {
            let r = dims.iter().take_while(|&&d| d < i).count();
            staircase(dims, r, i, n)
        })
        .collect()
}

/// Checks conditions 1–5 (and the equal-dimension conditions where they apply).
pub fn check_conditions(coeffs: &StateTensor, tol: f64) -> Result<ConditionReport> {
    let shape = coeffs.shape();
    require_canonical_ready(shape)?;
    let dims = shape.dims();
    let sets = enumerate_index_sets(shape)?;
    let (first, rest) = ladder_zero_families(shape)?;
    let cond1 = ConditionOutcome::from_violations(zero_violations(coeffs, &first, tol));
    let cond2 = ConditionOutcome::from_violations(zero_violations(coeffs, &rest, tol));
    let cond3 = ConditionOutcome::from_violations(zero_violations(coeffs, &sets.a, tol));
    let cond4 = ConditionOutcome::from_violations(real_violations(coeffs, sets.real_sets(), tol));

    let r_idx = r_indices(dims);
    let r_values: Vec<f64> = r_idx.iter().map(|i| coeff(coeffs, i).norm()).collect();
    let cond5 = ConditionOutcome::from_violations(
        (1..r_values.len())
            .filter(|&k| r_values[k] > r_values[k - 1] + tol)
            .map(|k| violation(coeffs, &r_idx[k]))
            .collect(),
    );

    let equal_dims = if dims.iter().all(|&d| d == dims[0]) { Some(equal_dims_conditions(coeffs, tol)) } else { None };

    let observed_zero_count = coeffs.amplitudes().iter().filter(|c| c.norm() <= tol).count();
    Ok(ConditionReport {
        dims: dims.to_vec(),
        tolerance: tol,
        forced_zero_count: first.len() + rest.len() + sets.a.len(),
        forced_real_count: sets.real_count(),
        cond1,
        cond2,
        cond3,
        cond4,
        cond5,
        equal_dims,
        r_values,
        observed_zero_count,
    })
}

fn equal_dims_conditions(coeffs: &StateTensor, tol: f64) -> EqualDimsConditions {
    let shape = coeffs.shape();
    let dims = shape.dims();
    let n = dims.len();
    let d = dims[0];
    let all: Vec<MultiIndex> = (0..shape.size()).map(|k| shape.multi_index(k).iter().map(|i| i + 1).collect()).collect();

    let zero_idx: Vec<MultiIndex> = all
        .iter()
        .filter(|idx| {
            let min = *idx.iter().min().expect("nonempty");
            idx.iter().filter(|&&x| x == min).count() == n - 1 && idx.iter().any(|&x| x > min)
        })
        .cloned()
        .collect();
    let real_idx: Vec<MultiIndex> = all.iter().filter(|idx| idx.iter().filter(|&&x| x != d).count() <= 1).cloned().collect();

    let mut dominance = Vec::new();
    for i in 1..=d {
        let diag = coeff(coeffs, &vec![i; n]).norm();
        for idx in &all {
            if idx.iter().all(|&j| j >= i) && coeff(coeffs, idx).norm() > diag + tol {
                dominance.push(violation(coeffs, idx));
            }
        }
    }
    EqualDimsConditions {
        zeros: ConditionOutcome::from_violations(zero_violations(coeffs, &zero_idx, tol)),
        reals: ConditionOutcome::from_violations(real_violations(coeffs, &real_idx, tol)),
        dominance: ConditionOutcome::from_violations(dominance),
    }
}

/// Closed-form counts for a shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitInfo {
    pub dims: Vec<usize>,
    /// `D = d_1 ⋯ d_{n-1}`.
    pub head_product: u64,
    /// `δ = d_n − d_{n-1}`.
    pub delta: u64,
    /// `Δ = max(d_n − D, 0)`.
    pub excess: u64,
    /// `N = D − d_{n-1} + 1`.
    pub n_tuples: u64,
    pub zeros_cond12: u64,
    pub zeros_cond3: u64,
    pub phases_removed: u64,
    pub real_parameters: u64,
    /// `Σ (d_r² − 1) + 1`.
    pub group_dimension: u64,
    pub orbit_dimension: u64,
    pub stabilizer_dimension: u64,
}

impl OrbitInfo {
    pub fn total_zeros(&self) -> u64 {
        self.zeros_cond12 + self.zeros_cond3
    }
}

/// Evaluates the zero, phase and parameter counts and the generic orbit and
/// stabilizer dimensions.
pub fn orbit_info(shape: &ModeShape) -> Result<OrbitInfo> {
    require_canonical_ready(shape)?;
    let dims: Vec<u64> = shape.dims().iter().map(|&d| d as u64).collect();
    let n = dims.len();
    let d_last = dims[n - 1];
    let d_prev = dims[n - 2];
    let head_product: u64 = dims[..n - 1].iter().product();
    let delta = d_last - d_prev;
    let n_tuples = head_product - d_prev + 1;
    let half_sum: u64 = dims.iter().map(|d| d * (d - 1)).sum::<u64>() / 2;
    let zeros_cond12 = half_sum - delta * (delta + 1) / 2;
    let base_phases: u64 = dims.iter().map(|d| d - 1).sum::<u64>() + 1;
    let group_dimension: u64 = dims.iter().map(|d| d * d - 1).sum::<u64>() + 1;

    let (excess, zeros_cond3, phases_removed) = if d_last <= head_product {
        (0, delta * (delta + 1) / 2, base_phases)
    } else {
        let excess = d_last - head_product;
        debug_assert_eq!(excess, delta - n_tuples + 1);
        let zeros3 = n_tuples * (delta + 1) - n_tuples * (n_tuples + 1) / 2;
        (excess, zeros3, base_phases - excess)
    };
    let total: u64 = dims.iter().product();
    let real_parameters = 2 * total - 2 * (zeros_cond12 + zeros_cond3) - phases_removed;
    let stabilizer_dimension = excess * excess;
    Ok(OrbitInfo {
        dims: shape.dims().to_vec(),
        head_product,
        delta,
        excess,
        n_tuples,
        zeros_cond12,
        zeros_cond3,
        phases_removed,
        real_parameters,
        group_dimension,
        orbit_dimension: group_dimension - stabilizer_dimension,
        stabilizer_dimension,
    })
}

/// Every index forced to zero by conditions 1–3 and every index forced real by
/// condition 4, each sorted and deduplicated.
pub fn count_constrained_indices(shape: &ModeShape) -> Result<(Vec<MultiIndex>, Vec<MultiIndex>)> {
    let sets = enumerate_index_sets(shape)?;
    let zeros: BTreeSet<MultiIndex> = ladder_zero_indices(shape)?.into_iter().chain(sets.a.iter().cloned()).collect();
    let reals: BTreeSet<MultiIndex> = sets.real_sets().cloned().collect();
    Ok((zeros.into_iter().collect(), reals.into_iter().collect()))
}

//! Independent checks on the maximizer.
//!
//! [`brute_force_max`] samples product states and polishes the best of them
//! with its own alternating update. The family
//! `a|000⟩ + b|011⟩ + c|111⟩` has a closed-form description of its stationary
//! product states, checked by [`appendix_quadratic`] and [`appendix_verify`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{random_unit_vector, rng_from_seed};
use crate::maximizer::{stationary_points, MaximizerOptions, SubspaceConstraint};
use crate::tensor::{environment, overlap, CVector, ModeShape, ProductVectorTuple, StateTensor};

/// Samples drawn per parallel chunk.
const CHUNK: usize = 1000;
/// Sweeps of alternating polish given to each retained sample.
pub const POLISH_SWEEPS: usize = 50;
/// Stationary values closer than this are merged.
const APPENDIX_CLUSTER_TOL: f64 = 1e-7;

fn polish(psi: &StateTensor, mut phis: ProductVectorTuple, sweeps: usize) -> f64 {
    for _ in 0..sweeps {
        let mut vectors = phis.vectors().to_vec();
        for r in 0..vectors.len() {
            let current = ProductVectorTuple::from_vectors_unchecked(vectors.clone());
            let e = environment(psi, &current, r).expect("matching shape").map(|x| x.conj());
            let norm = e.norm();
            if norm > 0.0 {
                vectors[r] = e / Complex64::new(norm, 0.0);
            }
        }
        phis = ProductVectorTuple::from_vectors_unchecked(vectors);
    }
    overlap(psi, &phis).expect("matching shape").norm()
}

/// Largest `|⟨Ψ|φ⟩|` found by uniform sampling of `samples` product states,
/// after [`POLISH_SWEEPS`] sweeps of alternating polish on the best 1% of
/// every chunk. A lower bound on the true maximum.
pub fn brute_force_max(psi: &StateTensor, samples: usize, seed: u64) -> f64 {
    let dims = psi.dims().to_vec();
    let chunks = samples.div_ceil(CHUNK).max(1);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(seed ^ (k as u64).wrapping_mul(0xa076_1d64_78bd_642f));
            let count = CHUNK.min(samples.saturating_sub(k * CHUNK)).max(1);
            let mut drawn: Vec<(f64, ProductVectorTuple)> = (0..count)
                .map(|_| {
                    let phis = ProductVectorTuple::from_vectors_unchecked(
                        dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect(),
                    );
                    (overlap(psi, &phis).expect("matching shape").norm(), phis)
                })
                .collect();
            drawn.sort_by(|a, b| b.0.total_cmp(&a.0));
            let keep = count.div_ceil(100);
            drawn.into_iter().take(keep).map(|(_, p)| polish(psi, p, POLISH_SWEEPS)).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `a|000⟩ + b|011⟩ + c|111⟩` with `|a|² + |b|² + |c|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixFamily {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl AppendixFamily {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        let norm_sqr = a.norm_sqr() + b.norm_sqr() + c.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { a, b, c })
    }

    /// Random member with `|a|²` uniform in `[lo, hi]` and random phases.
    pub fn random(seed: u64, lo: f64, hi: f64) -> Result<Self> {
        use rand::Rng;
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::InvalidArgument(format!("bad range [{lo}, {hi}] for |a|²")));
        }
        let mut rng = rng_from_seed(seed);
        let a_sq: f64 = rng.random_range(lo..=hi);
        let rest = random_unit_vector(&mut rng, 2) * Complex64::new((1.0 - a_sq).sqrt(), 0.0);
        let a = Complex64::from_polar(a_sq.sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
        Self::new(a, rest[0], rest[1])
    }

    pub fn state(&self) -> StateTensor {
        let shape = ModeShape::new(vec![2, 2, 2]).expect("valid");
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0b000] = self.a;
        amps[0b011] = self.b;
        amps[0b111] = self.c;
        StateTensor::new(shape, amps).expect("normalized family")
    }
}

/// Roots of `F(x) = x² − x(|a|² + (1 − 2|a|²) v1sq) + |a|²|c|²(1 − v1sq) v1sq`
/// and the value `F(|a|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixQuadratic {
    /// Ascending.
    pub roots: [f64; 2],
    pub f_at_a_sq: f64,
}

/// `F(x)` for the family at `v1sq`.
pub fn appendix_f(fam: &AppendixFamily, v1sq: f64, x: f64) -> f64 {
    let a2 = fam.a.norm_sqr();
    let c2 = fam.c.norm_sqr();
    x * x - x * (a2 + (1.0 - 2.0 * a2) * v1sq) + a2 * c2 * (1.0 - v1sq) * v1sq
}

pub fn appendix_quadratic(fam: &AppendixFamily, v1sq: f64) -> Result<AppendixQuadratic> {
    if !(0.0..=1.0).contains(&v1sq) {
        return Err(Error::InvalidArgument(format!("v1sq = {v1sq} is outside [0, 1]")));
    }
    let a2 = fam.a.norm_sqr();
    let c2 = fam.c.norm_sqr();
    let p = a2 + (1.0 - 2.0 * a2) * v1sq;
    let q = a2 * c2 * (1.0 - v1sq) * v1sq;
    let disc = (p * p - 4.0 * q).max(0.0);
    // the larger root directly, the smaller from the product to avoid cancellation
    let big = 0.5 * (p + disc.sqrt());
    let small = if big > 0.0 { q / big } else { 0.0 };
    Ok(AppendixQuadratic { roots: [small, big], f_at_a_sq: appendix_f(fam, v1sq, a2) })
}

/// The six stationarity equations of the family at `u ⊗ v ⊗ w`, each as
/// left side minus right side.
pub fn appendix_equations(fam: &AppendixFamily, u: &CVector, v: &CVector, w: &CVector, lambda: Complex64) -> [Complex64; 6] {
    let (a, b, c) = (fam.a.conj(), fam.b.conj(), fam.c.conj());
    let tail = b * u[0] + c * u[1];
    [
        a * v[0] * w[0] + b * v[1] * w[1] - lambda * u[0].conj(),
        c * v[1] * w[1] - lambda * u[1].conj(),
        a * u[0] * w[0] - lambda * v[0].conj(),
        tail * w[1] - lambda * v[1].conj(),
        a * u[0] * v[0] - lambda * w[0].conj(),
        tail * v[1] - lambda * w[1].conj(),
    ]
}

/// A stationary point found for the family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixPoint {
    pub lambda_sq: f64,
    pub v1sq: f64,
    pub equation_residual: f64,
    /// `|F(|λ|²)|` at this point's `v1sq`.
    pub quadratic_residual: f64,
}

/// Outcome of [`appendix_verify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixReport {
    pub family: AppendixFamily,
    pub a_sq: f64,
    /// Distinct stationary values `|λ|²`, descending.
    pub points: Vec<AppendixPoint>,
    pub max_matches: bool,
    pub others_below: bool,
    pub equations_hold: bool,
    pub passed: bool,
}

impl AppendixReport {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda_sq).collect()
    }
}

/// Finds the stationary product states of the family numerically and checks
/// that the largest `|λ|²` is `|a|²`, every other one is smaller, and each
/// point satisfies the six stationarity equations.
pub fn appendix_verify(fam: &AppendixFamily, opts: &MaximizerOptions) -> Result<AppendixReport> {
    let a_sq = fam.a.norm_sqr();
    if a_sq.sqrt() <= std::f64::consts::FRAC_1_SQRT_2 + 1e-9 {
        return Err(Error::Precondition(format!("|a| = {} must exceed 1/√2", a_sq.sqrt())));
    }
    let psi = fam.state();
    let found = stationary_points(&psi, &SubspaceConstraint::unconstrained(&[2, 2, 2]), opts, APPENDIX_CLUSTER_TOL)?;
    let points: Vec<AppendixPoint> = found
        .iter()
        .map(|p| {
            let [u, v, w] = [p.phis.vector(0), p.phis.vector(1), p.phis.vector(2)];
            let residual = appendix_equations(fam, u, v, w, p.lambda).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lambda_sq = p.lambda.norm_sqr();
            let v1sq = v[1].norm_sqr().clamp(0.0, 1.0);
            AppendixPoint {
                lambda_sq,
                v1sq,
                equation_residual: residual,
                quadratic_residual: appendix_f(fam, v1sq, lambda_sq).abs(),
            }
        })
        .collect();
    let max_matches = points.first().is_some_and(|p| (p.lambda_sq - a_sq).abs() <= 1e-8);
    let others_below = points.iter().skip(1).all(|p| p.lambda_sq < a_sq - 1e-9);
    let equations_hold = points.iter().all(|p| p.equation_residual <= 1e-9);
    Ok(AppendixReport {
        family: *fam,
        a_sq,
        passed: max_matches && others_below && equations_hold,
        points,
        max_matches,
        others_below,
        equations_hold,
    })
}

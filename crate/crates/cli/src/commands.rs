use std::fs;
use std::process::ExitCode;

use num_complex::Complex64;
use serde_json::{json, Value};

use multischmidt::altforms::{classical_schmidt, iu_descend, iu_entropy, marginal_basis_form, marginal_orthogonality_error, DescentOptions};
use multischmidt::canonical::{canonicalize_any, FormKind};
use multischmidt::io::{complex_json, read_state, state_json, to_json_string, transforms_json};
use multischmidt::linalg::random_state;
use multischmidt::maximizer::{multistart_maximize, MaximizerOptions, SubspaceConstraint};
use multischmidt::oracle::{appendix_quadratic, appendix_verify, brute_force_max, AppendixFamily};
use multischmidt::orbit::{check_conditions, orbit_info};
use multischmidt::states::psi_star;
use multischmidt::{Error, ModeShape, StateTensor};

use crate::{AltForm, RunConfig};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn math(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidShape(_)
            | Error::ShapeMismatch { .. }
            | Error::ModeOutOfRange { .. }
            | Error::AmplitudeCount { .. }
            | Error::NotNormalized { .. }
            | Error::NotCanonicalReady(_)
            | Error::InvalidArgument(_)
            | Error::Precondition(_)
            | Error::Format(_)
            | Error::Io(_) => CliError::usage(e.to_string()),
            _ => CliError::math(e.to_string()),
        }
    }
}

type CliResult = Result<ExitCode, CliError>;

const MATH_FAILURE: u8 = 2;

fn options(cfg: &RunConfig) -> MaximizerOptions {
    MaximizerOptions { starts: cfg.starts, ..MaximizerOptions::with_seed(cfg.seed) }
}

fn load(cfg: &RunConfig) -> Result<StateTensor, CliError> {
    let path = cfg.input.as_ref().ok_or_else(|| CliError::usage("--input is required"))?;
    Ok(read_state(path, cfg.normalize)?)
}

fn emit(cfg: &RunConfig, value: &Value) -> Result<(), CliError> {
    let text = to_json_string(value)?;
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn say(cfg: &RunConfig, message: impl AsRef<str>) {
    if !cfg.quiet {
        eprintln!("{}", message.as_ref());
    }
}

fn status(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(MATH_FAILURE)
    }
}

pub fn canonicalize(cfg: &RunConfig) -> CliResult {
    let psi = load(cfg)?;
    let nontrivial = psi.dims().iter().filter(|&&d| d > 1).count();
    if nontrivial < 3 && !cfg.bipartite_fallback {
        return Err(CliError::usage(format!(
            "state has {nontrivial} modes of dimension > 1; pass --bipartite-fallback for the Schmidt form"
        )));
    }
    let form = canonicalize_any(&psi, &options(cfg))?;
    let mut out = json!({
        "kind": form.kind,
        "canonical": state_json(&form.coefficients),
        "transforms": transforms_json(&form.transforms),
        "mode_order": form.mode_order,
    });
    let passed = match &form.multipartite {
        Some(m) => {
            let report = check_conditions(&form.reduced, cfg.tol)?;
            let info = orbit_info(form.reduced.shape())?;
            out["report"] = serde_json::to_value(&report).map_err(|e| CliError::usage(e.to_string()))?;
            out["R"] = json!(m.r_values);
            out["orbit_info"] = serde_json::to_value(&info).map_err(|e| CliError::usage(e.to_string()))?;
            out["step_values"] = json!(m.step_values);
            out["flags"] = serde_json::to_value(&m.flags).map_err(|e| CliError::usage(e.to_string()))?;
            out["escalations"] = json!(m.escalations);
            say(
                cfg,
                format!(
                    "canonical form of a {:?} state: {} forced zeros, {} forced reals, R = {:?}, {} escalation(s)",
                    form.reduced.dims(),
                    info.total_zeros(),
                    info.phases_removed,
                    m.r_values,
                    m.escalations
                ),
            );
            if !report.passes() {
                say(cfg, format!("conditions failing after retries: {:?}", report.failures()));
            }
            report.passes()
        }
        None => {
            if let Some(s) = &form.schmidt {
                out["schmidt"] = json!(s);
            }
            say(cfg, format!("{} form", if form.kind == FormKind::Bipartite { "Schmidt" } else { "trivial" }));
            true
        }
    };
    emit(cfg, &out)?;
    Ok(status(passed))
}

pub fn check(cfg: &RunConfig) -> CliResult {
    let psi = load(cfg)?;
    let report = check_conditions(&psi, cfg.tol)?;
    let passed = report.passes();
    say(cfg, if passed { "all conditions hold".to_string() } else { format!("failing: {:?}", report.failures()) });
    emit(cfg, &serde_json::to_value(&report).map_err(|e| CliError::usage(e.to_string()))?)?;
    Ok(status(passed))
}

pub fn orbit(cfg: &RunConfig) -> CliResult {
    let dims = match (&cfg.dims, &cfg.input) {
        (Some(d), _) => d.clone(),
        (None, Some(_)) => load(cfg)?.dims().to_vec(),
        (None, None) => return Err(CliError::usage("give --dims or --input")),
    };
    let info = orbit_info(&ModeShape::new(dims)?)?;
    say(
        cfg,
        format!(
            "zeros {}+{}, phases {}, real parameters {}, orbit dimension {}, stabilizer dimension {}",
            info.zeros_cond12,
            info.zeros_cond3,
            info.phases_removed,
            info.real_parameters,
            info.orbit_dimension,
            info.stabilizer_dimension
        ),
    );
    emit(cfg, &serde_json::to_value(&info).map_err(|e| CliError::usage(e.to_string()))?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn altform(cfg: &RunConfig, kind: AltForm) -> CliResult {
    let psi = load(cfg)?;
    let out = match kind {
        AltForm::Marginal | AltForm::Schmidt => {
            let form = if kind == AltForm::Marginal { marginal_basis_form(&psi)? } else { classical_schmidt(&psi)? };
            let error = marginal_orthogonality_error(&form.coefficients);
            say(cfg, format!("largest off-diagonal marginal entry {error:.3e}"));
            json!({
                "coefficients": state_json(&form.coefficients),
                "transforms": transforms_json(&form.transforms),
                "eigenvalues": form.eigenvalues,
                "degenerate_modes": form.degenerate_modes,
                "orthogonality_error": error,
            })
        }
        AltForm::MinEntropy => {
            let trace = iu_descend(&psi, &DescentOptions::default())?;
            let last = *trace.entropies.last().expect("nonempty");
            say(cfg, format!("entropy {} -> {} (log base {})", cfg.log_base.convert(trace.entropies[0]), cfg.log_base.convert(last), cfg.log_base.name()));
            json!({
                "coefficients": state_json(&trace.state),
                "transforms": transforms_json(&trace.transforms),
                "entropy": cfg.log_base.convert(last),
                "log_base": cfg.log_base.name(),
                "iterations": trace.iterations,
                "gradient_norm": trace.gradient_norm,
                "converged": trace.converged,
            })
        }
    };
    emit(cfg, &out)?;
    Ok(ExitCode::SUCCESS)
}

pub fn entropy(cfg: &RunConfig, descend: bool) -> CliResult {
    let psi = load(cfg)?;
    let value = cfg.log_base.convert(iu_entropy(&psi));
    let mut out = json!({ "entropy": value, "log_base": cfg.log_base.name() });
    say(cfg, format!("entropy {value} (log base {})", cfg.log_base.name()));
    if descend {
        let trace = iu_descend(&psi, &DescentOptions::default())?;
        let last = cfg.log_base.convert(*trace.entropies.last().expect("nonempty"));
        out["descended_entropy"] = json!(last);
        out["descent_iterations"] = json!(trace.iterations);
        out["descent_converged"] = json!(trace.converged);
        say(cfg, format!("after descent {last}"));
    }
    emit(cfg, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn family_from_state(psi: &StateTensor) -> Result<AppendixFamily, CliError> {
    if psi.dims() != [2, 2, 2] {
        return Err(CliError::usage("the a|000⟩ + b|011⟩ + c|111⟩ family lives on three qubits"));
    }
    let amps = psi.amplitudes();
    let stray = amps.iter().enumerate().filter(|(k, _)| ![0b000, 0b011, 0b111].contains(k)).map(|(_, z)| z.norm()).fold(0.0, f64::max);
    if stray > 1e-12 {
        return Err(CliError::usage("state must be supported on |000⟩, |011⟩ and |111⟩"));
    }
    Ok(AppendixFamily::new(amps[0b000], amps[0b011], amps[0b111])?)
}

pub fn appendix(cfg: &RunConfig, v1sq: Option<f64>) -> CliResult {
    let psi = match &cfg.input {
        Some(_) => load(cfg)?,
        None => psi_star(),
    };
    let fam = family_from_state(&psi)?;
    let report = appendix_verify(&fam, &options(cfg))?;
    let mut out = serde_json::to_value(&report).map_err(|e| CliError::usage(e.to_string()))?;
    out["family"] = json!({ "a": complex_json(fam.a), "b": complex_json(fam.b), "c": complex_json(fam.c) });
    if let Some(v) = v1sq {
        let q = appendix_quadratic(&fam, v)?;
        out["quadratic"] = json!({ "v1sq": v, "roots": q.roots, "f_at_a_sq": q.f_at_a_sq });
    }
    say(cfg, format!("stationary values |λ|² = {:?}; {}", report.values(), if report.passed { "verified" } else { "NOT verified" }));
    emit(cfg, &out)?;
    Ok(status(report.passed))
}

pub fn brute_force(cfg: &RunConfig, samples: usize) -> CliResult {
    let psi = load(cfg)?;
    let brute = brute_force_max(&psi, samples, cfg.seed);
    let fast = multistart_maximize(&psi, &SubspaceConstraint::unconstrained(psi.dims()), &options(cfg))?;
    let lambda: Complex64 = fast.lambda;
    say(cfg, format!("sampled {brute}, multistart {}", lambda.norm()));
    emit(
        cfg,
        &json!({
            "samples": samples,
            "brute_force_max": brute,
            "multistart_max": lambda.norm(),
            "multistart_max_sq": lambda.norm_sqr(),
            "multistart_converged": fast.converged,
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn random(cfg: &RunConfig) -> CliResult {
    let dims = cfg.dims.clone().ok_or_else(|| CliError::usage("--dims is required"))?;
    let psi = random_state(&ModeShape::new(dims)?, cfg.seed)?;
    say(cfg, format!("random state of shape {:?}, seed {}", psi.dims(), cfg.seed));
    emit(cfg, &state_json(&psi))?;
    Ok(ExitCode::SUCCESS)
}

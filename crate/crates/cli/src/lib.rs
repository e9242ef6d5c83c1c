//! Verification registry and command implementations behind the `wres`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod registry;
pub mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

pub use config::Config;
pub use error::VerifyError;
pub use registry::{find_case, registry, CaseDef, Mutation};
pub use report::{Check, TolMode, VerificationReport};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces every selected case's primary tolerance.
    pub tol: Option<f64>,
    pub mutation: Mutation,
    /// Size of the worker pool; `None` uses rayon's default.
    pub workers: Option<usize>,
}

/// Runs one case. Numerical failures become a failing report rather than
/// an error.
pub fn run_case(case: &CaseDef, config: &Config, opts: &RunOptions) -> VerificationReport {
    let start = Instant::now();
    let tol = opts.tol.unwrap_or(case.tol);
    let mut diagnostics = serde_json::Map::new();
    let mut parameters = json!({ "summary": case.summary, "tol_mode": case.mode });
    let outcome = (|| {
        let setup = (case.setup)(config, opts.mutation)?;
        for (k, v) in &setup.parameters {
            parameters[k] = v.clone();
        }
        let l = (case.lhs)(&setup)?;
        let r = (case.rhs)(&setup)?;
        let checks = match case.checks {
            Some(f) => f(&setup, &l, &r)?,
            None => Vec::new(),
        };
        Ok::<_, VerifyError>((l, r, checks))
    })();
    let (lhs, rhs, abs_err, err, pass) = match outcome {
        Ok((l, r, checks)) => {
            let abs = (l.value - r.value).abs();
            let err = case.mode.error(l.value, r.value, l.scale.max(r.scale));
            let pass = err.is_finite() && err <= tol && checks.iter().all(|c| c.pass);
            diagnostics.insert("lhs".into(), Value::Object(l.diagnostics));
            diagnostics.insert("rhs".into(), Value::Object(r.diagnostics));
            diagnostics.insert("checks".into(), json!(checks));
            (Some(l.value), Some(r.value), Some(abs), Some(err), pass)
        }
        Err(e) => {
            diagnostics.insert("error".into(), json!(e.to_string()));
            (None, None, None, None, false)
        }
    };
    VerificationReport {
        case: case.id.to_owned(),
        lhs,
        rhs,
        abs_err,
        rel_err: err,
        tol,
        pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
        parameters,
        diagnostics: Value::Object(diagnostics),
    }
}

/// Cases to run: the whole registry, or those named in `filter`.
pub fn select_cases(filter: &[String]) -> Result<Vec<CaseDef>, VerifyError> {
    if filter.is_empty() {
        return Ok(registry());
    }
    filter.iter().map(|id| find_case(id)).collect()
}

/// Runs `cases` on a worker pool; reports come back in registry order.
pub fn run_cases(cases: &[CaseDef], config: &Config, opts: &RunOptions) -> Result<Vec<VerificationReport>, VerifyError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        if w == 0 {
            return Err(VerifyError::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| VerifyError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| cases.par_iter().map(|c| run_case(c, config, opts)).collect()))
}

pub fn all_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// How an error is compared against a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TolMode {
    Relative,
    Absolute,
    /// `|lhs − rhs|` divided by a magnitude scale reported by the sides.
    Scaled,
}

impl TolMode {
    pub fn error(self, lhs: f64, rhs: f64, scale: f64) -> f64 {
        let d = (lhs - rhs).abs();
        match self {
            TolMode::Absolute => d,
            TolMode::Relative => relative_error(lhs, rhs),
            TolMode::Scaled => {
                if scale > 0.0 {
                    d / scale
                } else {
                    d
                }
            }
        }
    }
}

/// `|lhs − rhs| / |rhs|`, falling back to the absolute error when `rhs = 0`.
pub fn relative_error(lhs: f64, rhs: f64) -> f64 {
    let d = (lhs - rhs).abs();
    if rhs == 0.0 {
        d
    } else {
        d / rhs.abs()
    }
}

/// A secondary comparison inside a case; a case passes only if all of its
/// checks pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    pub tol: f64,
    pub mode: TolMode,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, lhs: f64, rhs: f64, tol: f64, mode: TolMode) -> Self {
        let error = mode.error(lhs, rhs, 0.0);
        Check {
            name: name.to_owned(),
            lhs,
            rhs,
            error,
            tol,
            mode,
            pass: error.is_finite() && error <= tol,
        }
    }

    /// Passes when `|value| ≤ tol`.
    pub fn bound(name: &str, value: f64, tol: f64) -> Self {
        Check::new(name, value, 0.0, tol, TolMode::Absolute)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub abs_err: Option<f64>,
    /// Error in the case's tolerance mode (relative, absolute or scaled).
    pub rel_err: Option<f64>,
    pub tol: f64,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub parameters: Value,
    pub diagnostics: Value,
}

impl VerificationReport {
    pub fn checks(&self) -> Vec<Check> {
        self.diagnostics
            .get("checks")
            .and_then(|c| serde_json::from_value(c.clone()).ok())
            .unwrap_or_default()
    }

    pub fn error_message(&self) -> Option<&str> {
        self.diagnostics.get("error").and_then(Value::as_str)
    }

    /// One human-readable line.
    pub fn summary_line(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.12e}"));
        let mut line = format!(
            "{} {:<24} lhs={} rhs={} err={} tol={:.1e} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.case,
            fmt(self.lhs),
            fmt(self.rhs),
            self.rel_err.map_or("-".to_owned(), |v| format!("{v:.2e}")),
            self.tol,
            self.runtime_seconds
        );
        for c in self.checks().iter().filter(|c| !c.pass) {
            line.push_str(&format!(" [failed check {}: {:.2e} > {:.1e}]", c.name, c.error, c.tol));
        }
        if let Some(e) = self.error_message() {
            line.push_str(&format!(" [error: {e}]"));
        }
        line
    }
}

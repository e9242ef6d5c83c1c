//! `wres residue`, `wres heat` and `wres spectrum`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wres_core::geometry::MetricField;
use wres_core::heat::{heat_coefficient_a0, heat_coefficient_a2, phi2, residue_power, residue_predicted_from_heat};
use wres_core::laplacian::GeneralizedLaplacian;
use wres_core::residue::{kw_factor, wodzicki_residue, ResidueSettings};
use wres_core::spectral::{model_spectrum, SpectrumModel, SpectrumSource};
use wres_core::trig::TrigPoly;

use crate::config::Config;
use crate::error::VerifyError;

/// Operator from a configuration; the Laplace–Beltrami operator on the
/// flat 4-torus when nothing is given.
pub fn configured_operator(config: &Config) -> Result<GeneralizedLaplacian, VerifyError> {
    let g = config.geometry.clone().unwrap_or_else(|| MetricField::flat(4));
    match &config.operator {
        Some(o) => o.build(&g, config.numerics.seed()),
        None => Ok(GeneralizedLaplacian::laplace_beltrami(g, 1)),
    }
}

fn residue_settings(config: &Config, dim: usize) -> Result<ResidueSettings, VerifyError> {
    let num = &config.numerics;
    let mut s = ResidueSettings::for_dim(dim);
    if let Some(j) = num.jet_order {
        s.jet_order = j;
    }
    if let Some(g) = num.x_grid {
        s.x_grid = g;
    }
    if let Some(r) = num.sphere_rule {
        s.sphere_rule = r;
    }
    if let Some(c) = num.symbol_cutoff {
        if c > -(dim as i32) {
            return Err(VerifyError::Config(format!(
                "numerics.symbol_cutoff = {c} must be at most −n = {}",
                -(dim as i32)
            )));
        }
    }
    Ok(s)
}

/// `res(Δ^{−m})` with `m` from `numerics.power` (default `n/2 − 1`, or 1).
pub fn residue_command(config: &Config) -> Result<Value, VerifyError> {
    let op = configured_operator(config)?;
    let n = op.dim();
    let m = config.numerics.power.unwrap_or(if n > 2 { (n / 2 - 1) as u32 } else { 1 });
    let settings = residue_settings(config, n)?;
    let r = wodzicki_residue(&op, m, &settings)?;
    Ok(json!({
        "dim": n,
        "rank": op.rank(),
        "power": m,
        "residue": r.value,
        "kw_normalized": kw_factor(n) * r.value,
        "imaginary_leak": r.imaginary_leak,
        "valid": r.is_valid(),
        "component_present": r.component_present,
        "x_grid": settings.x_grid,
        "jet_order": settings.jet_order,
        "sphere_rule": settings.sphere_rule,
    }))
}

/// `a₀`, `a₂`, `φ₂` and the residues they predict.
pub fn heat_command(config: &Config) -> Result<Value, VerifyError> {
    let op = configured_operator(config)?;
    let n = op.dim();
    let grid = residue_settings(config, n)?.x_grid;
    let mut predictions = serde_json::Map::new();
    for k in [0u32, 2] {
        if let Ok(m) = residue_power(n, k) {
            predictions.insert(
                format!("k{k}"),
                json!({ "power": m, "residue": residue_predicted_from_heat(&op, k, grid)? }),
            );
        }
    }
    Ok(json!({
        "dim": n,
        "rank": op.rank(),
        "a0": heat_coefficient_a0(&op, grid)?.value,
        "a2": heat_coefficient_a2(&op, grid)?.value,
        "phi2": phi2(&op, grid)?,
        "predicted_residues": predictions,
        "x_grid": grid,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceName {
    FlatT2,
    FlatT4,
    #[serde(rename = "sphere-2")]
    #[value(name = "sphere-2")]
    Sphere2,
    #[serde(rename = "sphere-4")]
    #[value(name = "sphere-4")]
    Sphere4,
    CurvedT2,
}

/// The spectrum named by `name`. The curved torus uses the configured
/// conformal metric, or `e^{0.2 cos x₁}δ`.
pub fn spectrum_command(name: SourceName, cutoff: f64, config: &Config) -> Result<SpectrumModel, VerifyError> {
    let source = match name {
        SourceName::FlatT2 => SpectrumSource::FlatTorus { dim: 2 },
        SourceName::FlatT4 => SpectrumSource::FlatTorus { dim: 4 },
        SourceName::Sphere2 => SpectrumSource::Sphere { dim: 2 },
        SourceName::Sphere4 => SpectrumSource::Sphere { dim: 4 },
        SourceName::CurvedT2 => {
            let metric = match &config.geometry {
                Some(g) => g.clone(),
                None => MetricField::conformal(2, TrigPoly::cos_mode(vec![1, 0], 0.1))?,
            };
            SpectrumSource::CurvedT2 {
                metric,
                grid: config.numerics.spectral_grid.unwrap_or(32),
            }
        }
    };
    Ok(model_spectrum(&source, cutoff)?)
}

#[derive(Serialize)]
struct Row {
    eigenvalue: f64,
    multiplicity: u64,
}

/// CSV with header `eigenvalue,multiplicity`.
pub fn write_spectrum_csv<W: Write>(spec: &SpectrumModel, out: W) -> Result<(), VerifyError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| VerifyError::Io {
        path: "spectrum output".into(),
        message: e.to_string(),
    };
    for &(eigenvalue, multiplicity) in &spec.entries {
        w.serialize(Row {
            eigenvalue,
            multiplicity,
        })
        .map_err(io)?;
    }
    w.flush().map_err(|e| VerifyError::Io {
        path: "spectrum output".into(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let spec = spectrum_command(SourceName::FlatT2, 2.0, &Config::default()).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&spec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "eigenvalue,multiplicity\n0.0,1\n1.0,4\n2.0,4\n");
    }

    #[test]
    fn flat_residue_command() {
        let c = Config::from_json(r#"{"numerics": {"power": 2, "x_grid": 4}}"#).unwrap();
        let v = residue_command(&c).unwrap();
        let res = v["residue"].as_f64().unwrap();
        assert!((res - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn cutoff_validated() {
        let c = Config::from_json(r#"{"numerics": {"symbol_cutoff": -2}}"#).unwrap();
        assert!(matches!(residue_command(&c), Err(VerifyError::Config(_))));
    }
}

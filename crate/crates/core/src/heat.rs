//! Seeley–DeWitt coefficients `a₀`, `a₂` of a generalized Laplacian and the
//! prediction of residues from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{scalar_curvature, try_volume_integral};
use crate::laplacian::{weitzenbock_endomorphism, GeneralizedLaplacian};
pub use crate::special::gamma_value;

/// Order of the operators handled here.
pub const OPERATOR_ORDER: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrand {
    Volume,
    CurvaturePlusE,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatCoefficient {
    pub k: u32,
    pub value: f64,
    pub integrand: Integrand,
}

fn heat_normalization(n: usize) -> f64 {
    (4.0 * PI).powf(-(n as f64) / 2.0)
}

/// `a₀ = (4π)^{−n/2} · rank · vol(M)`.
pub fn heat_coefficient_a0(op: &GeneralizedLaplacian, grid: usize) -> Result<HeatCoefficient> {
    op.metric().validate(grid)?;
    let vol = try_volume_integral(op.metric(), |_| Ok(1.0), grid)?;
    Ok(HeatCoefficient {
        k: 0,
        value: heat_normalization(op.dim()) * op.rank() as f64 * vol,
        integrand: Integrand::Volume,
    })
}

/// `φ₂ = ∫ tr(r/6 · Id + E) dvol`.
pub fn phi2(op: &GeneralizedLaplacian, grid: usize) -> Result<f64> {
    op.metric().validate(grid)?;
    let rank = op.rank() as f64;
    let g = op.metric();
    try_volume_integral(
        g,
        |x| {
            let r = scalar_curvature(g, x, 0)?.constant_term().re;
            let e = weitzenbock_endomorphism(op, x)?;
            Ok(rank * r / 6.0 + e.trace().re)
        },
        grid,
    )
}

/// `a₂ = (4π)^{−n/2} φ₂`.
pub fn heat_coefficient_a2(op: &GeneralizedLaplacian, grid: usize) -> Result<HeatCoefficient> {
    Ok(HeatCoefficient {
        k: 2,
        value: heat_normalization(op.dim()) * phi2(op, grid)?,
        integrand: Integrand::CurvaturePlusE,
    })
}

/// Power `(n − k)/d` of `Δ^{−·}` whose residue `a_k` determines, or an error
/// for `k = n` and odd `n − k`.
pub fn residue_power(n: usize, k: u32) -> Result<u32> {
    let k = k as usize;
    if k == n {
        return Err(Error::InvalidInput(format!("k = n = {n} is excluded")));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    if (n - k) % OPERATOR_ORDER as usize != 0 {
        return Err(Error::Unsupported(format!("odd n − k = {}", n - k)));
    }
    Ok(((n - k) / OPERATOR_ORDER as usize) as u32)
}

/// `d · a_k / Γ((n − k)/d)` from a known `a_k`.
pub fn predict_residue(a_k: f64, n: usize, k: u32) -> Result<f64> {
    let p = residue_power(n, k)?;
    Ok(f64::from(OPERATOR_ORDER) * a_k / gamma_value(f64::from(p))?)
}

/// The heat-side prediction of `res(Δ^{−(n−k)/2})` for `k ∈ {0, 2}`.
pub fn residue_predicted_from_heat(op: &GeneralizedLaplacian, k: u32, grid: usize) -> Result<f64> {
    residue_power(op.dim(), k)?;
    let a = match k {
        0 => heat_coefficient_a0(op, grid)?,
        2 => heat_coefficient_a2(op, grid)?,
        _ => return Err(Error::Unsupported(format!("a_{k} is not implemented"))),
    };
    predict_residue(a.value, op.dim(), k)
}

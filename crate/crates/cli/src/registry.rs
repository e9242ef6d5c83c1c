//! The verification cases. Each case computes its two sides by independent
//! routes: symbol calculus on one side, heat invariants, curvature
//! quadrature or spectra on the other.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use num_complex::Complex64;
use wres_core::geometry::{scalar_curvature, try_volume_integral, MetricField};
use wres_core::heat::{gamma_value, heat_coefficient_a0, heat_coefficient_a2, phi2, residue_power};
use wres_core::laplacian::GeneralizedLaplacian;
use wres_core::residue::{
    integrate_residue_density, kw_factor, wodzicki_residue, wodzicki_residue_with_doubling, ResidueResult,
    ResidueSettings,
};
use wres_core::spectral::{
    fit_heat_coefficients, flat_torus_zeta_residue, model_spectrum, sphere_heat_coefficient, sphere_zeta_residue,
    HeatTraceFit, SpectrumSource,
};
use wres_core::symbol::{compose, laplacian_symbol, negative_power_from_symbol, GradedSymbol};
use wres_core::trig::{TrigMatrix, TrigPoly};

use crate::config::{random_skew_connection, Config, OperatorConfig, RandomConnection};
use crate::error::VerifyError;
use crate::report::{Check, TolMode};

/// Deliberate corruptions used to show that cases can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    /// Every `Γ(z)` in the heat-side formulas becomes `Γ(z + 1)`.
    GammaShift,
    /// The normalized residue is compared against the unnormalized heat
    /// prediction.
    KwUncorrected,
}

const HURWITZ_TERMS: usize = 8;
const SPHERE_L_MAX: u64 = 2000;
const SPHERE_FIT_WINDOW: (f64, f64) = (2e-4, 5e-3);
const CURVED_FIT_WINDOW: (f64, f64) = (0.06, 0.5);
const FIT_POINTS: usize = 32;
const FIT_ORDER: u32 = 4;
const TRACE_PAIRS: u64 = 5;

/// Everything a case needs, resolved from defaults and the configuration.
#[derive(Clone, Debug)]
pub struct Setup {
    pub dim: usize,
    pub metric: Option<MetricField>,
    pub op: Option<GeneralizedLaplacian>,
    /// `m` in `Δ^{−m}`.
    pub power: u32,
    pub residue: ResidueSettings,
    pub fit_window: (f64, f64),
    pub fit_points: usize,
    pub spectral_grid: usize,
    pub seed: u64,
    pub mutation: Mutation,
    pub parameters: Map<String, Value>,
}

impl Setup {
    fn op(&self) -> Result<&GeneralizedLaplacian, VerifyError> {
        self.op
            .as_ref()
            .ok_or_else(|| VerifyError::Config("case has no operator".into()))
    }

    fn metric(&self) -> Result<&MetricField, VerifyError> {
        self.metric
            .as_ref()
            .ok_or_else(|| VerifyError::Config("case has no metric".into()))
    }

    /// `Γ(z)`, shifted under [`Mutation::GammaShift`].
    fn gamma(&self, z: f64) -> Result<f64, VerifyError> {
        let shift = if self.mutation == Mutation::GammaShift { 1.0 } else { 0.0 };
        Ok(gamma_value(z + shift)?)
    }

    /// `k` with `(n − k)/2 = power`.
    fn k(&self) -> u32 {
        (self.dim as u32).saturating_sub(2 * self.power)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SideValue {
    pub value: f64,
    /// Magnitude used by [`TolMode::Scaled`].
    pub scale: f64,
    pub diagnostics: Map<String, Value>,
}

impl SideValue {
    fn new(value: f64) -> Self {
        SideValue {
            value,
            ..Default::default()
        }
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.diagnostics.insert(key.to_owned(), v);
        self
    }
}

pub type SetupFn = fn(&Config, Mutation) -> Result<Setup, VerifyError>;
pub type SideFn = fn(&Setup) -> Result<SideValue, VerifyError>;
pub type ChecksFn = fn(&Setup, &SideValue, &SideValue) -> Result<Vec<Check>, VerifyError>;

#[derive(Clone, Copy)]
pub struct CaseDef {
    pub id: &'static str,
    pub summary: &'static str,
    pub tol: f64,
    pub mode: TolMode,
    pub setup: SetupFn,
    pub lhs: SideFn,
    pub rhs: SideFn,
    pub checks: Option<ChecksFn>,
}

impl std::fmt::Debug for CaseDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaseDef").field("id", &self.id).field("tol", &self.tol).finish()
    }
}

pub fn registry() -> Vec<CaseDef> {
    vec![
        CaseDef {
            id: "eq24-flat-t2",
            summary: "res(Δ^{-1}) on flat T² against 2·a₀/Γ(1)",
            tol: 1e-10,
            mode: TolMode::Relative,
            setup: setup_flat_t2,
            lhs: residue_side,
            rhs: heat_prediction_side,
            checks: Some(leak_checks),
        },
        CaseDef {
            id: "eq24-flat-t4",
            summary: "res(Δ^{-2}) on flat T⁴ against 2·a₀/Γ(2)",
            tol: 1e-10,
            mode: TolMode::Relative,
            setup: setup_flat_t4,
            lhs: residue_side,
            rhs: heat_prediction_side,
            checks: Some(leak_checks),
        },
        CaseDef {
            id: "eq25-conformal-t4",
            summary: "(n−2)·φ₂ against (4π)^{n/2}Γ(n/2)·res(Δ^{-n/2+1}) on a conformal T⁴",
            tol: 1e-6,
            mode: TolMode::Relative,
            setup: setup_curved_t4,
            lhs: eq25_heat_side,
            rhs: eq25_residue_side,
            checks: Some(eq25_checks),
        },
        CaseDef {
            id: "kw-tilde-t4",
            summary: "normalized residue res̃(Δ^{-n/2+1}) against (n−2)/2·φ₂",
            tol: 1e-6,
            mode: TolMode::Relative,
            setup: setup_curved_t4,
            lhs: kw_residue_side,
            rhs: kw_heat_side,
            checks: None,
        },
        CaseDef {
            id: "einstein-hilbert-t4",
            summary: "res(D^{-2}) for the Lichnerowicz Laplacian against −∫r/(24π²)",
            tol: 1e-6,
            mode: TolMode::Relative,
            setup: setup_lichnerowicz,
            lhs: residue_side,
            rhs: einstein_hilbert_side,
            checks: Some(lichnerowicz_checks),
        },
        CaseDef {
            id: "eq23-sphere-s2",
            summary: "Res_{s=1} ζ(Δ_{S²}) against a₀/Γ(1)",
            tol: 1e-6,
            mode: TolMode::Relative,
            setup: setup_sphere_s2,
            lhs: sphere_zeta_side,
            rhs: sphere_heat_side,
            checks: Some(sphere_checks),
        },
        CaseDef {
            id: "eq23-sphere-s4",
            summary: "Res_{s=1} ζ(Δ_{S⁴}) against a₂/Γ(1)",
            tol: 1e-6,
            mode: TolMode::Relative,
            setup: setup_sphere_s4,
            lhs: sphere_zeta_side,
            rhs: sphere_heat_side,
            checks: Some(sphere_checks),
        },
        CaseDef {
            id: "eq22-combined",
            summary: "res(Δ^{-n/2}) on flat Tⁿ against 2·Res_{s=n/2} ζ from lattice sums",
            tol: 1e-10,
            mode: TolMode::Relative,
            setup: setup_flat_t4,
            lhs: residue_side,
            rhs: lattice_zeta_side,
            checks: Some(eq22_checks),
        },
        CaseDef {
            id: "threeway-curved-t2",
            summary: "fitted a₀ of a conformal T² spectrum against Area/4π",
            tol: 1e-2,
            mode: TolMode::Relative,
            setup: setup_curved_t2,
            lhs: fitted_a0_side,
            rhs: area_side,
            checks: Some(threeway_checks),
        },
        CaseDef {
            id: "trace-property",
            summary: "res(AB) = res(BA) for A = Δ^{-1}, B first order, on a conformal T²",
            tol: 1e-8,
            mode: TolMode::Scaled,
            setup: setup_trace,
            lhs: trace_ab_side,
            rhs: trace_ba_side,
            checks: Some(trace_checks),
        },
        CaseDef {
            id: "connection-invariance",
            summary: "res of the Lichnerowicz Laplacian under two random connections",
            tol: 1e-8,
            mode: TolMode::Relative,
            setup: setup_lichnerowicz,
            lhs: residue_side,
            rhs: second_connection_side,
            checks: None,
        },
    ]
}

pub fn find_case(id: &str) -> Result<CaseDef, VerifyError> {
    registry()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| VerifyError::UnknownCase(id.to_owned()))
}

// ---------------------------------------------------------------- setups

fn default_conformal(dim: usize) -> MetricField {
    let mut k = vec![0; dim];
    k[0] = 1;
    MetricField::conformal(dim, TrigPoly::cos_mode(k, 0.1)).expect("valid conformal factor")
}

/// The configured geometry when it fits the case, else `default`.
fn pick_metric(config: &Config, dim: usize, conformal_only: bool, default: MetricField) -> (MetricField, &'static str) {
    match &config.geometry {
        Some(g) if g.dim() == dim && (!conformal_only || g.conformal_factor().is_some()) => (g.clone(), "config"),
        _ => (default, "default"),
    }
}

fn base_setup(
    config: &Config,
    mutation: Mutation,
    dim: usize,
    power: u32,
    metric: Option<(MetricField, &'static str)>,
    op: Option<(GeneralizedLaplacian, String)>,
) -> Result<Setup, VerifyError> {
    let num = &config.numerics;
    let mut residue = ResidueSettings::for_dim(dim);
    if let Some(j) = num.jet_order {
        residue.jet_order = j;
    }
    if let Some(g) = num.x_grid {
        residue.x_grid = g;
    }
    if let Some(r) = num.sphere_rule {
        residue.sphere_rule = r;
    }
    let n = dim as i32;
    let cutoff = num.symbol_cutoff.unwrap_or(-n);
    if cutoff > -n {
        return Err(VerifyError::Config(format!(
            "numerics.symbol_cutoff = {cutoff} must be at most −n = {}",
            -n
        )));
    }
    if let Some([a, b]) = num.fit_window {
        if !(a > 0.0 && b > a) {
            return Err(VerifyError::Config(format!("numerics.fit_window [{a}, {b}] is not an interval in t > 0")));
        }
    }
    let mut parameters = Map::new();
    parameters.insert("dim".into(), json!(dim));
    parameters.insert("power".into(), json!(power));
    parameters.insert("mutation".into(), json!(mutation));
    parameters.insert("seed".into(), json!(num.seed()));
    parameters.insert(
        "numerics".into(),
        json!({
            "jet_order": residue.jet_order,
            "symbol_cutoff": cutoff,
            "x_grid": residue.x_grid,
            "sphere_rule": residue.sphere_rule,
        }),
    );
    if let Some((g, source)) = &metric {
        parameters.insert("geometry".into(), serde_json::to_value(g).unwrap_or(Value::Null));
        parameters.insert("geometry_source".into(), json!(source));
    }
    if let Some((o, desc)) = &op {
        parameters.insert("operator".into(), json!(desc));
        parameters.insert("rank".into(), json!(o.rank()));
    }
    Ok(Setup {
        dim,
        metric: metric.map(|m| m.0),
        op: op.map(|o| o.0),
        power,
        residue,
        fit_window: num.fit_window.map_or(CURVED_FIT_WINDOW, |w| (w[0], w[1])),
        fit_points: num.fit_points.unwrap_or(FIT_POINTS),
        spectral_grid: num.spectral_grid.unwrap_or(32),
        seed: num.seed(),
        mutation,
        parameters,
    })
}

fn flat_setup(config: &Config, mutation: Mutation, dim: usize) -> Result<Setup, VerifyError> {
    let g = MetricField::flat(dim);
    let op = GeneralizedLaplacian::laplace_beltrami(g.clone(), 1);
    base_setup(
        config,
        mutation,
        dim,
        (dim / 2) as u32,
        Some((g, "fixed")),
        Some((op, "laplace-beltrami".into())),
    )
}

fn setup_flat_t2(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    flat_setup(config, mutation, 2)
}

fn setup_flat_t4(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    flat_setup(config, mutation, 4)
}

/// Conformal `T⁴` with the configured (or Laplace–Beltrami) operator.
fn setup_curved_t4(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    let (g, source) = pick_metric(config, 4, false, default_conformal(4));
    let (op, desc) = match &config.operator {
        Some(o) => (o.build(&g, config.numerics.seed())?, form_name(o).to_owned()),
        None => (GeneralizedLaplacian::laplace_beltrami(g.clone(), 1), "laplace-beltrami".into()),
    };
    base_setup(config, mutation, 4, 1, Some((g, source)), Some((op, desc)))
}

fn form_name(o: &OperatorConfig) -> &'static str {
    match o {
        OperatorConfig::LaplaceBeltrami { .. } => "laplace-beltrami",
        OperatorConfig::Lichnerowicz { .. } => "lichnerowicz",
        OperatorConfig::Coefficients { .. } => "coefficients",
        OperatorConfig::Connection { .. } => "connection",
    }
}

fn lichnerowicz_operator(g: &MetricField, seed: u64) -> Result<GeneralizedLaplacian, VerifyError> {
    OperatorConfig::Lichnerowicz {
        rank: 4,
        connection: None,
        random_connection: Some(RandomConnection::default()),
    }
    .build(g, seed)
}

fn setup_lichnerowicz(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    let (g, source) = pick_metric(config, 4, false, default_conformal(4));
    let op = lichnerowicz_operator(&g, config.numerics.seed())?;
    base_setup(config, mutation, 4, 1, Some((g, source)), Some((op, "lichnerowicz".into())))
}

fn sphere_setup(config: &Config, mutation: Mutation, dim: usize, power: u32) -> Result<Setup, VerifyError> {
    let mut s = base_setup(config, mutation, dim, power, None, None)?;
    s.fit_window = config.numerics.fit_window.map_or(SPHERE_FIT_WINDOW, |w| (w[0], w[1]));
    s.parameters.insert("l_max".into(), json!(SPHERE_L_MAX));
    s.parameters.insert("fit_window".into(), json!([s.fit_window.0, s.fit_window.1]));
    s.parameters.insert("fit_points".into(), json!(s.fit_points));
    Ok(s)
}

fn setup_sphere_s2(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    sphere_setup(config, mutation, 2, 1)
}

fn setup_sphere_s4(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    sphere_setup(config, mutation, 4, 1)
}

fn setup_curved_t2(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    let (g, source) = pick_metric(config, 2, true, default_conformal(2));
    let op = GeneralizedLaplacian::laplace_beltrami(g.clone(), 1);
    let mut s = base_setup(config, mutation, 2, 1, Some((g, source)), Some((op, "laplace-beltrami".into())))?;
    s.parameters.insert("spectral_grid".into(), json!(s.spectral_grid));
    s.parameters.insert("fit_window".into(), json!([s.fit_window.0, s.fit_window.1]));
    s.parameters.insert("fit_points".into(), json!(s.fit_points));
    Ok(s)
}

fn setup_trace(config: &Config, mutation: Mutation) -> Result<Setup, VerifyError> {
    let (g, source) = pick_metric(config, 2, false, default_conformal(2));
    let mut s = base_setup(config, mutation, 2, 1, Some((g, source)), None)?;
    s.parameters.insert("pairs".into(), json!(TRACE_PAIRS));
    s.parameters.insert("rank".into(), json!(2));
    Ok(s)
}

// ------------------------------------------------------------------ sides

fn residue_diagnostics(r: &ResidueResult) -> Value {
    json!({
        "value": r.value,
        "imaginary_leak": r.imaginary_leak,
        "x_grid": r.x_grid_size,
        "sphere_rule": r.sphere_rule,
        "component_present": r.component_present,
    })
}

/// `res(Δ^{−power})` by symbol calculus.
fn residue_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let r = wodzicki_residue(s.op()?, s.power, &s.residue)?;
    Ok(SideValue::new(r.checked()?).with("residue", residue_diagnostics(&r)))
}

fn heat_coefficient(s: &Setup, k: u32) -> Result<f64, VerifyError> {
    let op = s.op()?;
    Ok(match k {
        0 => heat_coefficient_a0(op, s.residue.x_grid)?.value,
        2 => heat_coefficient_a2(op, s.residue.x_grid)?.value,
        _ => return Err(VerifyError::Config(format!("no heat coefficient a_{k}"))),
    })
}

/// `2·a_k / Γ((n − k)/2)` from heat invariants.
fn heat_prediction_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let k = s.k();
    let p = residue_power(s.dim, k)?;
    let a = heat_coefficient(s, k)?;
    let gamma = s.gamma(f64::from(p))?;
    Ok(SideValue::new(2.0 * a / gamma)
        .with("k", json!(k))
        .with("a_k", json!(a))
        .with("gamma", json!(gamma)))
}

fn eq25_heat_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let p = phi2(s.op()?, s.residue.x_grid)?;
    Ok(SideValue::new((s.dim as f64 - 2.0) * p).with("phi2", json!(p)))
}

fn eq25_residue_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let n = s.dim as f64;
    let (coarse, fine) = wodzicki_residue_with_doubling(s.op()?, s.power, &s.residue)?;
    let res = coarse.checked()?;
    fine.checked()?;
    let gamma = s.gamma(n / 2.0)?;
    let factor = (4.0 * PI).powf(n / 2.0) * gamma;
    Ok(SideValue::new(factor * res)
        .with("residue", residue_diagnostics(&coarse))
        .with("residue_doubled_grid", residue_diagnostics(&fine))
        .with("gamma", json!(gamma)))
}

fn kw_residue_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let r = wodzicki_residue(s.op()?, s.power, &s.residue)?;
    let res = r.checked()?;
    let f = kw_factor(s.dim);
    Ok(SideValue::new(f * res)
        .with("residue", residue_diagnostics(&r))
        .with("kw_factor", json!(f)))
}

fn kw_heat_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let n = s.dim as f64;
    let p = phi2(s.op()?, s.residue.x_grid)?;
    let value = if s.mutation == Mutation::KwUncorrected {
        (n - 2.0) * p / ((4.0 * PI).powf(n / 2.0) * s.gamma(n / 2.0)?)
    } else {
        (n - 2.0) / 2.0 * p
    };
    Ok(SideValue::new(value).with("phi2", json!(p)))
}

fn total_scalar_curvature(g: &MetricField, grid: usize) -> Result<f64, VerifyError> {
    Ok(try_volume_integral(
        g,
        |x| Ok(scalar_curvature(g, x, 0)?.constant_term().re),
        grid,
    )?)
}

/// `−∫ r dvol / (24π²)` by direct curvature quadrature.
fn einstein_hilbert_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let total = total_scalar_curvature(s.metric()?, s.residue.x_grid)?;
    Ok(SideValue::new(-total / (24.0 * PI * PI)).with("total_scalar_curvature", json!(total)))
}

fn second_connection_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let op = lichnerowicz_operator(s.metric()?, s.seed + 1)?;
    let r = wodzicki_residue(&op, s.power, &s.residue)?;
    Ok(SideValue::new(r.checked()?)
        .with("residue", residue_diagnostics(&r))
        .with("seed", json!(s.seed + 1)))
}

/// `Res_{s=(n−k)/2} ζ(Δ_{Sⁿ}, s)` from the Hurwitz expansion.
fn sphere_zeta_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let k = s.k();
    Ok(SideValue::new(sphere_zeta_residue(s.dim, k, HURWITZ_TERMS)?).with("k", json!(k)))
}

/// Closed-form `a_k / Γ((n − k)/2)` on the unit sphere.
fn sphere_heat_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let k = s.k();
    let a = sphere_heat_coefficient(s.dim, k)?;
    let gamma = s.gamma(f64::from(s.power))?;
    Ok(SideValue::new(a / gamma).with("a_k", json!(a)).with("gamma", json!(gamma)))
}

/// `2·Res_{s=n/2} ζ(Δ_{Tⁿ}, s)` from sum-of-squares identities.
fn lattice_zeta_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let r = flat_torus_zeta_residue(s.dim)?;
    Ok(SideValue::new(2.0 * r).with("zeta_residue", json!(r)))
}

fn curved_fit(s: &Setup) -> Result<HeatTraceFit, VerifyError> {
    let source = SpectrumSource::CurvedT2 {
        metric: s.metric()?.clone(),
        grid: s.spectral_grid,
    };
    let spec = model_spectrum(&source, f64::INFINITY)?;
    Ok(fit_heat_coefficients(&spec, 2, FIT_ORDER, s.fit_window, s.fit_points)?)
}

fn fit_diagnostics(fit: &HeatTraceFit) -> Value {
    json!({
        "coefficients": fit.coefficients,
        "uncertainties": fit.uncertainties,
        "residual_norm": fit.residual_norm,
        "tail_bound": fit.tail_bound,
    })
}

fn fitted_a0_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let fit = curved_fit(s)?;
    Ok(SideValue::new(fit.coefficient(0))
        .with("a2", json!(fit.coefficient(2)))
        .with("fit", fit_diagnostics(&fit)))
}

fn area_side(s: &Setup) -> Result<SideValue, VerifyError> {
    let area = try_volume_integral(s.metric()?, |_| Ok(1.0), s.residue.x_grid)?;
    Ok(SideValue::new(area / (4.0 * PI)).with("area", json!(area)))
}

/// Seeded rank-2 connection Laplacian and the coefficients of
/// `B = Σ a^k ∂_k + a₀` for pair `i`.
fn trace_pair(s: &Setup, i: u64) -> Result<(GeneralizedLaplacian, Vec<TrigMatrix>, TrigMatrix), VerifyError> {
    use rand::SeedableRng;
    let g = s.metric()?;
    let seed = s.seed.wrapping_mul(1000).wrapping_add(i);
    let w = random_skew_connection(2, 2, &RandomConnection::default(), seed);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let potential = TrigMatrix::random(2, 2, 1, 2, 0.3, &mut rng);
    let op = GeneralizedLaplacian::from_connection(g.clone(), 2, w, potential, 0.0)?;
    let b1 = (0..2).map(|_| TrigMatrix::random(2, 2, 1, 2, 0.5, &mut rng)).collect();
    let b0 = TrigMatrix::random(2, 2, 1, 2, 0.5, &mut rng);
    Ok((op, b1, b0))
}

/// `res(AB)` or `res(BA)` together with the L¹ norm of its density.
fn trace_residue(s: &Setup, i: u64, a_first: bool) -> Result<(f64, f64), VerifyError> {
    const JETS: usize = 2;
    let (op, b1, b0) = trace_pair(s, i)?;
    let r = integrate_residue_density(2, s.residue.x_grid, s.residue.sphere_rule, s.residue.gauss_nodes, true, |x| {
        let sigma = laplacian_symbol(&op, x, JETS)?;
        let a = negative_power_from_symbol(&sigma, 1, -3)?;
        let base = sigma.base_point().clone();
        // a^k ∂_k has symbol i a^k ξ_k; real coefficients keep both residues real.
        let coeffs = b1
            .iter()
            .map(|m| Ok(m.jet(&base, JETS)?.scale(Complex64::i())))
            .collect::<wres_core::Result<Vec<_>>>()?;
        let b = GradedSymbol::first_order_operator(sigma.quadratic_form().clone(), &coeffs, &b0.jet(&base, JETS)?, JETS)?;
        if a_first {
            compose(&a, &b, -2)
        } else {
            compose(&b, &a, -2)
        }
    })?;
    let value = r.checked()?;
    let density = r.per_point_density.as_deref().unwrap_or_default();
    let cell = (1.0 / s.residue.x_grid as f64).powi(2);
    let l1: f64 = density.iter().map(|(_, d)| d.abs()).sum::<f64>() * cell;
    Ok((value, l1))
}

fn trace_side(s: &Setup, a_first: bool) -> Result<SideValue, VerifyError> {
    // Pair 0 is the headline; the checks cover every pair.
    let mut per_pair = Vec::new();
    for i in 0..TRACE_PAIRS {
        let (v, l1) = trace_residue(s, i, a_first)?;
        per_pair.push(json!({ "pair": i, "value": v, "density_l1": l1 }));
    }
    let first = &per_pair[0];
    let mut out = SideValue::new(first["value"].as_f64().unwrap_or(f64::NAN));
    out.scale = first["density_l1"].as_f64().unwrap_or(0.0);
    Ok(out.with("pairs", Value::Array(per_pair)))
}

fn trace_ab_side(s: &Setup) -> Result<SideValue, VerifyError> {
    trace_side(s, true)
}

fn trace_ba_side(s: &Setup) -> Result<SideValue, VerifyError> {
    trace_side(s, false)
}

// ----------------------------------------------------------------- checks

fn leak_check(name: &str, d: Option<&Value>) -> Option<Check> {
    let d = d?;
    let leak = d.get("imaginary_leak")?.as_f64()?;
    let value = d.get("value")?.as_f64()?;
    Some(Check::bound(name, leak / value.abs().max(1.0), wres_core::residue::IMAGINARY_LEAK_THRESHOLD))
}

fn leak_checks(_: &Setup, l: &SideValue, r: &SideValue) -> Result<Vec<Check>, VerifyError> {
    Ok([l, r]
        .iter()
        .filter_map(|v| leak_check("imaginary-leak", v.diagnostics.get("residue")))
        .collect())
}

fn eq25_checks(_: &Setup, _: &SideValue, r: &SideValue) -> Result<Vec<Check>, VerifyError> {
    let get = |k: &str| {
        r.diagnostics
            .get(k)
            .and_then(|d| d.get("value"))
            .and_then(Value::as_f64)
            .unwrap_or(f64::NAN)
    };
    let mut checks = vec![Check::new(
        "grid-doubling",
        get("residue"),
        get("residue_doubled_grid"),
        1e-8,
        TolMode::Relative,
    )];
    checks.extend(leak_check("imaginary-leak", r.diagnostics.get("residue_doubled_grid")));
    Ok(checks)
}

fn lichnerowicz_checks(s: &Setup, l: &SideValue, r: &SideValue) -> Result<Vec<Check>, VerifyError> {
    let mut checks: Vec<Check> = leak_check("imaginary-leak", l.diagnostics.get("residue")).into_iter().collect();
    // φ₂ = −(1/3)∫r for E = −r/4 at rank 4.
    let p = phi2(s.op()?, s.residue.x_grid)?;
    let total = r.diagnostics["total_scalar_curvature"].as_f64().unwrap_or(f64::NAN);
    checks.push(Check::new("phi2-lichnerowicz", p, -total / 3.0, 1e-8, TolMode::Relative));
    Ok(checks)
}

fn sphere_fit(s: &Setup) -> Result<HeatTraceFit, VerifyError> {
    let spec = model_spectrum(&SpectrumSource::Sphere { dim: s.dim }, {
        let l = SPHERE_L_MAX as f64;
        l * (l + s.dim as f64 - 1.0)
    })?;
    Ok(fit_heat_coefficients(&spec, s.dim, FIT_ORDER, s.fit_window, s.fit_points)?)
}

fn sphere_checks(s: &Setup, l: &SideValue, _: &SideValue) -> Result<Vec<Check>, VerifyError> {
    let fit = sphere_fit(s)?;
    let mut checks = Vec::new();
    for k in (0..s.dim as u32).step_by(2) {
        let p = (s.dim as u32 - k) / 2;
        let zeta = if k == s.k() {
            l.value
        } else {
            let z = sphere_zeta_residue(s.dim, k, HURWITZ_TERMS)?;
            let closed = sphere_heat_coefficient(s.dim, k)? / s.gamma(f64::from(p))?;
            checks.push(Check::new(&format!("hurwitz-vs-closed-k{k}"), z, closed, 1e-6, TolMode::Relative));
            z
        };
        let fitted = fit.coefficient(k) / s.gamma(f64::from(p))?;
        checks.push(Check::new(&format!("fit-k{k}"), fitted, zeta, 1e-3, TolMode::Relative));
    }
    Ok(checks)
}

fn eq22_checks(s: &Setup, _: &SideValue, _: &SideValue) -> Result<Vec<Check>, VerifyError> {
    let g = MetricField::flat(2);
    let op = GeneralizedLaplacian::laplace_beltrami(g, 1);
    let mut settings = ResidueSettings::for_dim(2);
    settings.sphere_rule = s.residue.sphere_rule;
    let res = wodzicki_residue(&op, 1, &settings)?.checked()?;
    let zeta = flat_torus_zeta_residue(2)?;
    Ok(vec![Check::new("flat-t2", res, 2.0 * zeta, 1e-10, TolMode::Relative)])
}

fn threeway_checks(s: &Setup, l: &SideValue, r: &SideValue) -> Result<Vec<Check>, VerifyError> {
    let res = wodzicki_residue(s.op()?, 1, &s.residue)?.checked()?;
    let a2 = l.diagnostics["a2"].as_f64().unwrap_or(f64::NAN);
    Ok(vec![
        Check::new("residue-vs-area", res / 2.0, r.value, 1e-2, TolMode::Relative),
        Check::new("residue-vs-fit", res / 2.0, l.value, 1e-2, TolMode::Relative),
        Check::bound("a2-vanishes", a2, 1e-2),
    ])
}

/// Every pair, not only the one in the headline, must satisfy the bound.
fn trace_checks(_: &Setup, l: &SideValue, r: &SideValue) -> Result<Vec<Check>, VerifyError> {
    let pairs = |v: &SideValue| v.diagnostics["pairs"].as_array().cloned().unwrap_or_default();
    let (lp, rp) = (pairs(l), pairs(r));
    if lp.len() < TRACE_PAIRS as usize || lp.len() != rp.len() {
        return Err(VerifyError::Config("trace sides disagree on the pair count".into()));
    }
    Ok(lp
        .iter()
        .zip(&rp)
        .enumerate()
        .map(|(i, (a, b))| {
            let f = |v: &Value, k: &str| v[k].as_f64().unwrap_or(f64::NAN);
            let scale = f(a, "density_l1").max(f(b, "density_l1"));
            let err = TolMode::Scaled.error(f(a, "value"), f(b, "value"), scale);
            Check {
                name: format!("pair-{i}"),
                lhs: f(a, "value"),
                rhs: f(b, "value"),
                error: err,
                tol: 1e-8,
                mode: TolMode::Scaled,
                pass: err.is_finite() && err <= 1e-8,
            }
        })
        .collect())
}

//! Wodzicki residue: `res(P) = (2π)^{−n} ∫_{S*M} tr σ_{−n}(x, ξ) dx dξ`,
//! integrated over the coordinate unit sphere in `ξ` and the coordinate
//! torus in `x`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::spd_sqrt;
use crate::error::{Error, Result};
use crate::geometry::{pairwise_sum, sample_grid};
use crate::jet::MultiIndex;
use crate::laplacian::GeneralizedLaplacian;
use crate::special::{gamma_half, gauss_legendre};
use crate::symbol::{laplacian_symbol, negative_power_from_symbol, GradedSymbol, Mono, MAX_SYMBOL_DIM};

/// Relative bound on the discarded imaginary part.
pub const IMAGINARY_LEAK_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereRule {
    ExactMonomial,
    GaussProduct,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidueSettings {
    pub jet_order: usize,
    pub x_grid: usize,
    pub sphere_rule: SphereRule,
    /// Gauss–Legendre nodes per polar angle (the azimuth gets twice as many
    /// trapezoid points).
    pub gauss_nodes: usize,
    pub keep_density: bool,
}

impl ResidueSettings {
    /// Defaults: 32 points per axis for `n ≤ 2`, 8 otherwise.
    pub fn for_dim(dim: usize) -> Self {
        ResidueSettings {
            jet_order: 4,
            x_grid: if dim <= 2 { 32 } else { 8 },
            sphere_rule: SphereRule::ExactMonomial,
            gauss_nodes: 32,
            keep_density: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidueResult {
    pub value: f64,
    pub imaginary_leak: f64,
    pub x_grid_size: usize,
    pub sphere_rule: SphereRule,
    /// `false` when the order `−n` lies above the leading order.
    pub component_present: bool,
    /// `(x, ∫_{|ξ|=1} tr σ_{−n}(x, ξ))` in grid order.
    pub per_point_density: Option<Vec<(Vec<f64>, f64)>>,
}

impl ResidueResult {
    pub fn is_valid(&self) -> bool {
        self.imaginary_leak <= IMAGINARY_LEAK_THRESHOLD * self.value.abs().max(1.0)
    }

    /// The value, or [`Error::ImaginaryLeak`] when the leak is too large.
    pub fn checked(&self) -> Result<f64> {
        if self.is_valid() {
            Ok(self.value)
        } else {
            Err(Error::ImaginaryLeak {
                value: self.value,
                leak: self.imaginary_leak,
            })
        }
    }
}

/// `∫_{S^{n−1}} ξ^β dS`.
pub fn sphere_monomial_integral(beta: &MultiIndex) -> f64 {
    sphere_monomial(beta.exponents().iter().copied())
}

fn sphere_monomial(beta: impl Iterator<Item = u32>) -> f64 {
    let mut num = 2.0;
    let mut total = 0;
    let mut n = 0;
    for b in beta {
        if b % 2 == 1 {
            return 0.0;
        }
        num *= gamma_half(b + 1);
        total += b;
        n += 1;
    }
    num / gamma_half(total + n)
}

#[derive(Clone, Copy, Debug)]
pub struct CosphereIntegral {
    pub value: Complex64,
    pub component_present: bool,
}

/// `∫_{|ξ|=1} tr σ_{−n}(x0, ξ) dS` with `n` the symbol's dimension.
pub fn cosphere_trace_integral(sigma: &GradedSymbol, rule: SphereRule) -> Result<CosphereIntegral> {
    cosphere_with_nodes(sigma, rule, 32)
}

pub fn cosphere_with_nodes(sigma: &GradedSymbol, rule: SphereRule, nodes: usize) -> Result<CosphereIntegral> {
    let n = sigma.dim();
    let Some(c) = sigma.component(-(n as i32)) else {
        if -(n as i32) > sigma.max_order() || sigma.is_complete() {
            return Ok(CosphereIntegral {
                value: Complex64::new(0.0, 0.0),
                component_present: false,
            });
        }
        return Err(Error::Truncation {
            required: -(n as i32),
            available: sigma.cutoff(),
        });
    };
    // Trace of each numerator at the base point.
    let traced: Vec<((u32, Mono), Complex64)> = c
        .raw_terms()
        .iter()
        .map(|(k, v)| (*k, v.constant_trace()))
        .filter(|(_, t)| *t != Complex64::new(0.0, 0.0))
        .collect();
    if traced.is_empty() {
        return Ok(CosphereIntegral {
            value: Complex64::new(0.0, 0.0),
            component_present: true,
        });
    }
    let value = match rule {
        SphereRule::ExactMonomial => exact_monomial(sigma, &traced)?,
        SphereRule::GaussProduct => gauss_product(sigma, &traced, nodes)?,
    };
    Ok(CosphereIntegral {
        value,
        component_present: true,
    })
}

type Poly = HashMap<Mono, f64>;

fn exact_monomial(sigma: &GradedSymbol, traced: &[((u32, Mono), Complex64)]) -> Result<Complex64> {
    let n = sigma.dim();
    let quad = sigma.quadratic_form();
    let g_inv = quad.value();
    // L = G^{−1/2} gives Q(Lη) = |η|².
    let (_, l) = spd_sqrt(&g_inv).map_err(|_| Error::SingularMetric {
        point: quad.base_point().to_vec(),
    })?;
    let det_l = l.determinant();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || l[(i, j)] == 0.0));
    let mut polys: HashMap<Mono, Poly> = HashMap::new();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((_, beta), tr) in traced {
        let integral = if diagonal {
            let scale: f64 = (0..n).map(|i| l[(i, i)].powi(i32::from(beta[i]))).product();
            scale * sphere_monomial(beta[..n].iter().map(|&b| u32::from(b)))
        } else {
            let p = expand(&l, *beta, n, &mut polys);
            p.iter()
                .map(|(m, c)| c * sphere_monomial(m[..n].iter().map(|&b| u32::from(b))))
                .sum()
        };
        acc += tr * integral;
    }
    Ok(acc * det_l.abs())
}

/// Polynomial `(Lη)^β` in `η`, memoized on `β`.
fn expand<'a>(l: &nalgebra::DMatrix<f64>, beta: Mono, n: usize, memo: &'a mut HashMap<Mono, Poly>) -> &'a Poly {
    if !memo.contains_key(&beta) {
        let p = match beta.iter().position(|&e| e > 0) {
            None => HashMap::from([([0; MAX_SYMBOL_DIM], 1.0)]),
            Some(k) => {
                let mut lower = beta;
                lower[k] -= 1;
                let prev = expand(l, lower, n, memo).clone();
                let mut out = Poly::new();
                for (m, c) in prev {
                    for j in 0..n {
                        let w = l[(k, j)];
                        if w == 0.0 {
                            continue;
                        }
                        let mut mj = m;
                        mj[j] += 1;
                        *out.entry(mj).or_insert(0.0) += c * w;
                    }
                }
                out
            }
        };
        memo.insert(beta, p);
    }
    &memo[&beta]
}

/// Hyperspherical quadrature: Gauss–Legendre in the polar angles with the
/// `sin^k` Jacobian, trapezoid in the azimuth.
fn gauss_product(sigma: &GradedSymbol, traced: &[((u32, Mono), Complex64)], nodes: usize) -> Result<Complex64> {
    let n = sigma.dim();
    let quad = sigma.quadratic_form();
    let (psi, wpsi) = gauss_legendre(nodes, 0.0, PI);
    let naz = 2 * nodes;
    let daz = 2.0 * PI / naz as f64;
    let polar = n.saturating_sub(2);
    let mut idx = vec![0usize; polar];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut eta = vec![0.0; n];
    loop {
        let mut weight = 1.0;
        let mut s = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            eta[a] = s * psi[i].cos();
            weight *= wpsi[i] * psi[i].sin().powi((n - 2 - a) as i32);
            s *= psi[i].sin();
        }
        for t in 0..naz {
            let th = t as f64 * daz;
            eta[n - 2] = s * th.cos();
            eta[n - 1] = s * th.sin();
            let qv = quad.eval(&eta);
            if qv.abs() < 1e-300 {
                return Err(Error::SingularCovector);
            }
            let mut f = Complex64::new(0.0, 0.0);
            for ((q, beta), tr) in traced {
                let mut w = qv.powi(-(*q as i32));
                for (a, &e) in beta.iter().enumerate().take(n) {
                    w *= eta[a].powi(i32::from(e));
                }
                f += tr * w;
            }
            acc += f * (weight * daz);
        }
        // Odometer over the polar-angle indices.
        let mut a = 0;
        loop {
            if a == polar {
                return Ok(acc);
            }
            idx[a] += 1;
            if idx[a] < nodes {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// `(2π)^{−n} Σ_x h^n · density(x)` over the `gridⁿ` torus grid, with the
/// symbol at each point supplied by `symbol_at`.
pub fn integrate_residue_density<F>(
    dim: usize,
    grid: usize,
    rule: SphereRule,
    nodes: usize,
    keep_density: bool,
    symbol_at: F,
) -> Result<ResidueResult>
where
    F: Fn(&[f64]) -> Result<GradedSymbol> + Sync,
{
    if grid < 2 {
        return Err(Error::InvalidInput(format!("grid size {grid} < 2")));
    }
    let samples = sample_grid(dim, grid, |x| {
        let s = symbol_at(x)?;
        Ok((x.to_vec(), cosphere_with_nodes(&s, rule, nodes)?))
    })?;
    Ok(assemble(dim, grid, rule, keep_density, samples))
}

fn assemble(
    dim: usize,
    grid: usize,
    rule: SphereRule,
    keep_density: bool,
    samples: Vec<(Vec<f64>, CosphereIntegral)>,
) -> ResidueResult {
    let re: Vec<f64> = samples.iter().map(|(_, c)| c.value.re).collect();
    let im: Vec<f64> = samples.iter().map(|(_, c)| c.value.im).collect();
    let cell = (2.0 * PI / grid as f64).powi(dim as i32) / (2.0 * PI).powi(dim as i32);
    let component_present = samples.iter().all(|(_, c)| c.component_present);
    ResidueResult {
        value: pairwise_sum(&re) * cell,
        imaginary_leak: (pairwise_sum(&im) * cell).abs(),
        x_grid_size: grid,
        sphere_rule: rule,
        component_present,
        per_point_density: keep_density.then(|| samples.into_iter().map(|(x, c)| (x, c.value.re)).collect()),
    }
}

/// Symbol of `Δ^{−m}` at `x0` carrying exactly the jets the order-`−n`
/// component needs.
pub fn residue_symbol(op: &GeneralizedLaplacian, m: u32, x0: &[f64], jet_order: usize) -> Result<Option<GradedSymbol>> {
    let n = op.dim() as i32;
    let top = -2 * m as i32;
    if m == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    if -n > top {
        return Ok(None);
    }
    let needed = (top + n) as usize;
    if jet_order < needed {
        return Err(Error::Budget {
            required: needed,
            available: jet_order,
        });
    }
    let sigma = laplacian_symbol(op, x0, needed)?;
    negative_power_from_symbol(&sigma, m, -n).map(Some)
}

/// `res(Δ^{−m})`.
pub fn wodzicki_residue(op: &GeneralizedLaplacian, m: u32, settings: &ResidueSettings) -> Result<ResidueResult> {
    let n = op.dim();
    op.metric().validate(settings.x_grid)?;
    if m == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    if -(n as i32) > -2 * m as i32 {
        // Order −n lies above the leading order: no such component.
        return Ok(ResidueResult {
            value: 0.0,
            imaginary_leak: 0.0,
            x_grid_size: settings.x_grid,
            sphere_rule: settings.sphere_rule,
            component_present: false,
            per_point_density: None,
        });
    }
    let op = Arc::new(op.clone());
    integrate_residue_density(
        n,
        settings.x_grid,
        settings.sphere_rule,
        settings.gauss_nodes,
        settings.keep_density,
        |x| Ok(residue_symbol(&op, m, x, settings.jet_order)?.expect("component exists")),
    )
}

/// Residues on the `grid` and `2·grid` lattices from one sampling of the
/// finer one (the coarse lattice is every other fine point).
pub fn wodzicki_residue_with_doubling(
    op: &GeneralizedLaplacian,
    m: u32,
    settings: &ResidueSettings,
) -> Result<(ResidueResult, ResidueResult)> {
    let mut fine_settings = settings.clone();
    fine_settings.x_grid = 2 * settings.x_grid;
    fine_settings.keep_density = true;
    let fine = wodzicki_residue(op, m, &fine_settings)?;
    let n = op.dim();
    let g = settings.x_grid;
    let Some(density) = fine.per_point_density.as_ref() else {
        // No component: both vanish.
        let mut coarse = fine.clone();
        coarse.x_grid_size = g;
        return Ok((coarse, fine));
    };
    let fine_grid = 2 * g;
    let mut coarse_samples = Vec::with_capacity(g.pow(n as u32));
    for (idx, (x, d)) in density.iter().enumerate() {
        let mut rem = idx;
        let mut even = true;
        for _ in 0..n {
            even &= (rem % fine_grid) % 2 == 0;
            rem /= fine_grid;
        }
        if even {
            coarse_samples.push((
                x.clone(),
                CosphereIntegral {
                    value: Complex64::new(*d, 0.0),
                    component_present: true,
                },
            ));
        }
    }
    let mut coarse = assemble(n, g, settings.sphere_rule, settings.keep_density, coarse_samples);
    // Imaginary parts were not kept per point; bound by the fine leak.
    coarse.imaginary_leak = fine.imaginary_leak;
    let mut fine = fine;
    if !settings.keep_density {
        fine.per_point_density = None;
    }
    Ok((coarse, fine))
}

/// `res̃ = Γ(n/2)/(2π^{n/2}) ∫ tr σ_{−n} = 2^{n−1} π^{n/2} Γ(n/2) · res`.
pub fn kw_normalized_residue(op: &GeneralizedLaplacian, m: u32, settings: &ResidueSettings) -> Result<f64> {
    let r = wodzicki_residue(op, m, settings)?;
    Ok(kw_factor(op.dim()) * r.checked()?)
}

/// `(2π)^n / vol(S^{n−1})`.
pub fn kw_factor(n: usize) -> f64 {
    2f64.powi(n as i32 - 1) * PI.powf(n as f64 / 2.0) * gamma_half(n as u32)
}

//! Metrics on the flat torus, Levi-Civita data and volume integration.
//!
//! Conventions: the scalar curvature of the unit round sphere `Sⁿ` is
//! `n(n−1)`; for a conformal metric `e^{2f}δ` in two dimensions it is
//! `r = −2e^{−2f}(∂₁²f + ∂₂²f)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{BasePoint, Jet, JetMatrix};
use crate::trig::TrigPoly;

/// Default validation grid per axis for positive-definiteness checks.
pub const DEFAULT_VALIDATION_GRID: usize = 16;

/// Shape of a metric; conformal metrics are `e^{2f}δ_{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    Flat,
    Conformal(TrigPoly),
    General(Vec<TrigPoly>),
}

/// Riemannian metric on `[0, 2π)ⁿ` with trigonometric coefficient data.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    dim: usize,
    kind: MetricKind,
}

impl MetricField {
    pub fn flat(dim: usize) -> Self {
        MetricField {
            dim,
            kind: MetricKind::Flat,
        }
    }

    pub fn conformal(dim: usize, f: TrigPoly) -> Result<Self> {
        if f.dim() != 0 && f.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.dim(),
            });
        }
        Ok(MetricField {
            dim,
            kind: MetricKind::Conformal(f),
        })
    }

    /// General metric from row-major entries; must be symmetric.
    pub fn general(dim: usize, entries: Vec<TrigPoly>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::InvalidInput(format!(
                        "metric entries g[{i}][{j}] and g[{j}][{i}] differ"
                    )));
                }
            }
        }
        for e in &entries {
            if e.dim() != 0 && e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
        }
        Ok(MetricField {
            dim,
            kind: MetricKind::General(entries),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn is_flat(&self) -> bool {
        match &self.kind {
            MetricKind::Flat => true,
            MetricKind::Conformal(f) => f.is_zero(),
            MetricKind::General(_) => false,
        }
    }

    /// Conformal factor `f` when the metric is `e^{2f}δ` (flat counts, `f = 0`).
    pub fn conformal_factor(&self) -> Option<TrigPoly> {
        match &self.kind {
            MetricKind::Flat => Some(TrigPoly::zero(self.dim)),
            MetricKind::Conformal(f) => Some(f.clone()),
            MetricKind::General(_) => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        match &self.kind {
            MetricKind::Flat => DMatrix::identity(n, n),
            MetricKind::Conformal(f) => DMatrix::identity(n, n) * (2.0 * f.eval(x)).exp(),
            MetricKind::General(g) => DMatrix::from_fn(n, n, |i, j| g[i * n + j].eval(x)),
        }
    }

    /// `√det g(x)`
    pub fn volume_density(&self, x: &[f64]) -> f64 {
        match &self.kind {
            MetricKind::Flat => 1.0,
            MetricKind::Conformal(f) => (self.dim as f64 * f.eval(x)).exp(),
            MetricKind::General(_) => self.eval(x).determinant().max(0.0).sqrt(),
        }
    }

    /// Row-major jets `g_{ij}` at `x0`.
    pub fn component_jets(&self, x0: &BasePoint, order: usize) -> Result<Vec<Jet>> {
        if x0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x0.len(),
            });
        }
        let n = self.dim;
        let one = Complex64::new(1.0, 0.0);
        let zero = Jet::zero(x0.clone(), order)?;
        match &self.kind {
            MetricKind::Flat => {
                let id = Jet::constant(x0.clone(), order, one)?;
                Ok((0..n * n)
                    .map(|k| if k / n == k % n { id.clone() } else { zero.clone() })
                    .collect())
            }
            MetricKind::Conformal(f) => {
                let e2f = f.jet(x0, order)?.scale_re(2.0).exp();
                Ok((0..n * n)
                    .map(|k| if k / n == k % n { e2f.clone() } else { zero.clone() })
                    .collect())
            }
            MetricKind::General(g) => g.iter().map(|p| p.jet(x0, order)).collect(),
        }
    }

    pub fn jet(&self, x0: &BasePoint, order: usize) -> Result<JetMatrix> {
        JetMatrix::from_entries(&self.component_jets(x0, order)?, self.dim)
    }

    /// Checks symmetry and pointwise positive-definiteness (smallest
    /// eigenvalue above `1e−6`) on a `gridⁿ` sample grid.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let bad = (0..grid.pow(self.dim as u32)).into_par_iter().find_first(|&idx| {
            let x = grid_point(self.dim, grid, idx);
            let min_eig = match &self.kind {
                MetricKind::Flat => 1.0,
                MetricKind::Conformal(f) => (2.0 * f.eval(&x)).exp(),
                MetricKind::General(_) => self
                    .eval(&x)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min),
            };
            !(min_eig > 1e-6)
        });
        match bad {
            Some(idx) => Err(Error::SingularMetric {
                point: grid_point(self.dim, grid, idx),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum MetricSpec {
    Flat { dim: usize },
    Conformal { dim: usize, f: TrigPoly },
    General { dim: usize, g: Vec<Vec<TrigPoly>> },
}

impl Serialize for MetricField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim;
        let spec = match &self.kind {
            MetricKind::Flat => MetricSpec::Flat { dim: n },
            MetricKind::Conformal(f) => MetricSpec::Conformal { dim: n, f: f.clone() },
            MetricKind::General(g) => MetricSpec::General {
                dim: n,
                g: g.chunks(n).map(<[TrigPoly]>::to_vec).collect(),
            },
        };
        spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match MetricSpec::deserialize(d)? {
            MetricSpec::Flat { dim } => Ok(MetricField::flat(dim)),
            MetricSpec::Conformal { dim, f } => MetricField::conformal(dim, f).map_err(D::Error::custom),
            MetricSpec::General { dim, g } => {
                if g.len() != dim || g.iter().any(|row| row.len() != dim) {
                    return Err(D::Error::custom("metric \"g\" must be dim × dim"));
                }
                MetricField::general(dim, g.into_iter().flatten().collect()).map_err(D::Error::custom)
            }
        }
    }
}

/// Metric jets with their inverse and Christoffel symbols at one point.
#[derive(Clone, Debug)]
pub struct MetricJets {
    dim: usize,
    order: usize,
    /// `g_{ij}`, order `J`.
    pub g: Vec<Jet>,
    /// `g^{ij}`, order `J`.
    pub g_inv: Vec<Jet>,
    /// `Γ^k_{ij}` at index `(k·n + i)·n + j`, order `J − 1`.
    pub christoffel: Vec<Jet>,
}

impl MetricJets {
    /// Requires `order ≥ 1`.
    pub fn new(metric: &MetricField, x0: &BasePoint, order: usize) -> Result<Self> {
        let n = metric.dim();
        if order == 0 {
            return Err(Error::JetUnderflow);
        }
        let g = metric.component_jets(x0, order)?;
        let g_inv_m = JetMatrix::from_entries(&g, n)?
            .invert()
            .map_err(|_| Error::SingularMetric { point: x0.to_vec() })?;
        let g_inv: Vec<Jet> = (0..n * n).map(|k| g_inv_m.entry(k / n, k % n)).collect();
        let dg: Vec<Vec<Jet>> = (0..n)
            .map(|l| g.iter().map(|gij| gij.partial(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        // Γ_{l,ij} = ½(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})
        let mut lowered = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s = &(&dg[i][j * n + l] + &dg[j][i * n + l]) - &dg[l][i * n + j];
                    lowered.push(s.scale_re(0.5));
                }
            }
        }
        let mut christoffel = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Jet::zero(x0.clone(), order - 1)?;
                    for l in 0..n {
                        acc = &acc + &(&g_inv[k * n + l] * &lowered[(l * n + i) * n + j]);
                    }
                    christoffel.push(acc);
                }
            }
        }
        Ok(MetricJets {
            dim: n,
            order,
            g,
            g_inv,
            christoffel,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.christoffel[(k * self.dim + i) * self.dim + j]
    }

    /// `g^{ij}Γ^k_{ij}` for each `k`, order `J − 1`.
    pub fn contracted_christoffel(&self) -> Vec<Jet> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = self.gamma(k, 0, 0).scale_re(0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc = &acc + &(&self.g_inv[i * n + j] * self.gamma(k, i, j));
                    }
                }
                acc
            })
            .collect()
    }

    /// Scalar curvature jet of order `J − 2` (requires `J ≥ 2`).
    pub fn scalar_curvature(&self) -> Result<Jet> {
        let n = self.dim;
        if self.order < 2 {
            return Err(Error::JetUnderflow);
        }
        let base = self.g[0].base_point().clone();
        let out_order = self.order - 2;
        // Γ^k_{kl}
        let trace_gamma: Vec<Jet> = (0..n)
            .map(|l| {
                let mut acc = Jet::zero(base.clone(), self.order - 1).unwrap();
                for k in 0..n {
                    acc = &acc + self.gamma(k, k, l);
                }
                acc
            })
            .collect();
        let mut r = Jet::zero(base.clone(), out_order)?;
        for i in 0..n {
            for j in 0..n {
                // R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ki + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ki
                let mut ric = Jet::zero(base.clone(), out_order)?;
                for k in 0..n {
                    ric = &ric + &self.gamma(k, i, j).partial(k)?;
                }
                ric = &ric - &trace_gamma[i].partial(j)?;
                for l in 0..n {
                    ric = &ric + &(&trace_gamma[l] * self.gamma(l, i, j));
                    for k in 0..n {
                        ric = &ric - &(self.gamma(k, j, l) * self.gamma(l, k, i));
                    }
                }
                r = &r + &(&self.g_inv[i * n + j] * &ric);
            }
        }
        Ok(r)
    }
}

/// Order-`J` jet of the scalar curvature at `x0` (metric jets of order `J + 2`).
pub fn scalar_curvature(g: &MetricField, x0: &[f64], order: usize) -> Result<Jet> {
    MetricJets::new(g, &Arc::from(x0), order + 2)?.scalar_curvature()
}

/// Point `idx` of the uniform `gridⁿ` torus grid, axis 0 varying slowest.
pub fn grid_point(dim: usize, grid: usize, mut idx: usize) -> Vec<f64> {
    let h = 2.0 * PI / grid as f64;
    let mut x = vec![0.0; dim];
    for a in (0..dim).rev() {
        x[a] = (idx % grid) as f64 * h;
        idx /= grid;
    }
    x
}

/// Pairwise (tree) summation in the natural order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Evaluates `f` at every grid point (in parallel) and returns the values in
/// grid order.
pub fn sample_grid<T, F>(dim: usize, grid: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync,
{
    (0..grid.pow(dim as u32))
        .into_par_iter()
        .map(|idx| f(&grid_point(dim, grid, idx)))
        .collect()
}

/// `∫_{[0,2π)ⁿ} integrand · √det g dx` by the periodic trapezoidal rule.
pub fn try_volume_integral<F>(g: &MetricField, integrand: F, grid: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if grid < 2 {
        return Err(Error::InvalidInput(format!("grid size {grid} < 2")));
    }
    let n = g.dim();
    let values = sample_grid(n, grid, |x| Ok(integrand(x)? * g.volume_density(x)))?;
    let cell = (2.0 * PI / grid as f64).powi(n as i32);
    Ok(pairwise_sum(&values) * cell)
}

pub fn volume_integral<F>(g: &MetricField, integrand: F, grid: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    try_volume_integral(g, |x| Ok(integrand(x)), grid)
}

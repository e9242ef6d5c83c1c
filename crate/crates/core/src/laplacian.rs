//! Laplace-type operators `Δ = −(g^{ij}∂_i∂_j·Id + b^i∂_i + c)` on trivial
//! rank-`r` bundles over the torus, and their Weitzenböck normal form
//! `Δ = ∇*∇ − E`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MetricField, MetricJets};
use crate::jet::{BasePoint, Jet, JetMatrix};
use crate::trig::TrigMatrix;

/// How the lower-order coefficients are specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorForm {
    /// Raw coefficients `b^i` and `c`.
    Coefficients {
        first_order: Vec<TrigMatrix>,
        zeroth_order: TrigMatrix,
    },
    /// `∇*∇ − E` with `∇ = d + ω` and
    /// `E = potential + curvature_coupling · r · Id`.
    Connection {
        connection: Vec<TrigMatrix>,
        potential: TrigMatrix,
        curvature_coupling: f64,
    },
}

/// Second-order operator with scalar principal symbol `g^{ij}ξ_iξ_j·Id_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedLaplacian {
    metric: MetricField,
    rank: usize,
    form: OperatorForm,
}

/// Coefficient jets of `Δ` at one point.
#[derive(Clone, Debug)]
pub struct OperatorJets {
    /// `g^{ij}`, order `J`.
    pub inverse_metric: Vec<Jet>,
    /// `b^i`, order `J − 1` (saturating).
    pub first_order: Vec<JetMatrix>,
    /// `c`, order `J − 2` (saturating).
    pub zeroth_order: JetMatrix,
}

fn check_matrices(dim: usize, rank: usize, ms: &[TrigMatrix]) -> Result<()> {
    for m in ms {
        if m.rank() != rank {
            return Err(Error::DimensionMismatch {
                expected: rank,
                got: m.rank(),
            });
        }
        for p in m.entries() {
            if p.dim() != 0 && p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
    }
    Ok(())
}

impl GeneralizedLaplacian {
    /// `Δ = −(g^{ij}∂_i∂_j + b^i∂_i + c)`.
    pub fn from_coefficients(
        metric: MetricField,
        rank: usize,
        first_order: Vec<TrigMatrix>,
        zeroth_order: TrigMatrix,
    ) -> Result<Self> {
        let n = metric.dim();
        if first_order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: first_order.len(),
            });
        }
        check_matrices(n, rank, &first_order)?;
        check_matrices(n, rank, std::slice::from_ref(&zeroth_order))?;
        Ok(GeneralizedLaplacian {
            metric,
            rank,
            form: OperatorForm::Coefficients {
                first_order,
                zeroth_order,
            },
        })
    }

    /// `Δ = ∇*∇ − E`, `∇ = d + ω`, `E = potential + coupling · r · Id`.
    pub fn from_connection(
        metric: MetricField,
        rank: usize,
        connection: Vec<TrigMatrix>,
        potential: TrigMatrix,
        curvature_coupling: f64,
    ) -> Result<Self> {
        let n = metric.dim();
        if connection.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: connection.len(),
            });
        }
        check_matrices(n, rank, &connection)?;
        check_matrices(n, rank, std::slice::from_ref(&potential))?;
        Ok(GeneralizedLaplacian {
            metric,
            rank,
            form: OperatorForm::Connection {
                connection,
                potential,
                curvature_coupling,
            },
        })
    }

    /// Laplace–Beltrami operator acting componentwise on rank-`r` sections.
    pub fn laplace_beltrami(metric: MetricField, rank: usize) -> Self {
        let n = metric.dim();
        GeneralizedLaplacian {
            metric,
            rank,
            form: OperatorForm::Connection {
                connection: vec![TrigMatrix::zero(rank); n],
                potential: TrigMatrix::zero(rank),
                curvature_coupling: 0.0,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Always 2.
    pub fn order(&self) -> u32 {
        2
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn form(&self) -> &OperatorForm {
        &self.form
    }

    /// Adds `shift · Id` to the zeroth-order coefficient `c`.
    pub fn shifted(&self, shift: f64) -> Self {
        let n = self.dim();
        let s = TrigMatrix::scalar(self.rank, &crate::trig::TrigPoly::constant(n, shift));
        let form = match &self.form {
            OperatorForm::Coefficients {
                first_order,
                zeroth_order,
            } => OperatorForm::Coefficients {
                first_order: first_order.clone(),
                zeroth_order: zeroth_order.add(&s),
            },
            // c = … + E, so shifting c shifts E.
            OperatorForm::Connection {
                connection,
                potential,
                curvature_coupling,
            } => OperatorForm::Connection {
                connection: connection.clone(),
                potential: potential.add(&s),
                curvature_coupling: *curvature_coupling,
            },
        };
        GeneralizedLaplacian {
            metric: self.metric.clone(),
            rank: self.rank,
            form,
        }
    }

    /// Coefficient jets at `x0`: `g^{ij}` of order `J`, `b^i` of order
    /// `J − 1` and `c` of order `J − 2` (both saturating at 0).
    pub fn coefficient_jets(&self, x0: &BasePoint, order: usize) -> Result<OperatorJets> {
        let n = self.dim();
        let r = self.rank;
        let ob = order.saturating_sub(1);
        let oc = order.saturating_sub(2);
        match &self.form {
            OperatorForm::Coefficients {
                first_order,
                zeroth_order,
            } => {
                let g = self.metric.jet(x0, order)?;
                let g_inv = g
                    .invert()
                    .map_err(|_| Error::SingularMetric { point: x0.to_vec() })?;
                Ok(OperatorJets {
                    inverse_metric: (0..n * n).map(|k| g_inv.entry(k / n, k % n)).collect(),
                    first_order: first_order
                        .iter()
                        .map(|b| b.jet(x0, ob))
                        .collect::<Result<_>>()?,
                    zeroth_order: zeroth_order.jet(x0, oc)?,
                })
            }
            OperatorForm::Connection {
                connection,
                potential,
                curvature_coupling,
            } => {
                let mj = MetricJets::new(&self.metric, x0, order.max(2))?;
                let omega: Vec<JetMatrix> = connection
                    .iter()
                    .map(|w| w.jet(x0, ob))
                    .collect::<Result<_>>()?;
                let trace_gamma = mj.contracted_christoffel();
                // b^k = 2 g^{ik} ω_i − g^{ij} Γ^k_ij
                let mut first = Vec::with_capacity(n);
                for k in 0..n {
                    let mut b = JetMatrix::from_scalar_jet(&trace_gamma[k].truncate(ob), r).scale_re(-1.0);
                    for i in 0..n {
                        b.add_scaled(&omega[i].mul_jet(&mj.g_inv[i * n + k])?, Complex64::new(2.0, 0.0))?;
                    }
                    first.push(b.truncate(ob));
                }
                // c = g^{ij}(∂_i ω_j + ω_i ω_j − Γ^k_ij ω_k) + E
                let mut c = potential.jet(x0, oc)?;
                if *curvature_coupling != 0.0 {
                    let rj = mj.scalar_curvature()?.truncate(oc);
                    c.add_scaled(
                        &JetMatrix::from_scalar_jet(&rj, r),
                        Complex64::new(*curvature_coupling, 0.0),
                    )?;
                }
                if connection.iter().any(|w| !w.is_zero()) {
                    let omega_c: Vec<JetMatrix> = connection
                        .iter()
                        .map(|w| w.jet(x0, oc + 1))
                        .collect::<Result<_>>()?;
                    for i in 0..n {
                        for j in 0..n {
                            let mut t = omega_c[j].partial(i)?;
                            t.add_scaled(&omega_c[i].mul_truncated(&omega_c[j], oc)?, Complex64::new(1.0, 0.0))?;
                            for k in 0..n {
                                t.add_scaled(&omega_c[k].mul_jet_truncated(mj.gamma(k, i, j), oc)?, Complex64::new(-1.0, 0.0))?;
                            }
                            c.add_scaled(&t.mul_jet_truncated(&mj.g_inv[i * n + j], oc)?, Complex64::new(1.0, 0.0))?;
                        }
                    }
                }
                Ok(OperatorJets {
                    inverse_metric: mj.g_inv.iter().map(|j| j.truncate(order)).collect(),
                    first_order: first,
                    zeroth_order: c.truncate(oc),
                })
            }
        }
    }
}

/// Connection one-form `ω_i` (order `J + 1`) and endomorphism `E` (order
/// `J`) of the decomposition `Δ = ∇*∇ − E`, recovered from the raw
/// coefficients.
pub fn weitzenbock_jets(
    op: &GeneralizedLaplacian,
    x0: &BasePoint,
    order: usize,
) -> Result<(Vec<JetMatrix>, JetMatrix)> {
    let n = op.dim();
    let r = op.rank();
    let mj = MetricJets::new(op.metric(), x0, order + 2)?;
    let coeffs = op.coefficient_jets(x0, order + 2)?;
    let trace_gamma = mj.contracted_christoffel();
    let half = Complex64::new(0.5, 0.0);
    // ω_δ = ½ g_{νδ}(b^ν + g^{μσ}Γ^ν_{μσ} Id)
    let mut omega = Vec::with_capacity(n);
    for d in 0..n {
        let mut w = JetMatrix::zero(x0.clone(), order + 1, r)?;
        for nu in 0..n {
            let mut inner = coeffs.first_order[nu].clone();
            inner.add_scaled(&JetMatrix::from_scalar_jet(&trace_gamma[nu], r), Complex64::new(1.0, 0.0))?;
            w.add_scaled(&inner.mul_jet(&mj.g[nu * n + d])?, half)?;
        }
        omega.push(w);
    }
    // E = c − g^{νμ}(∂_ν ω_μ + ω_ν ω_μ − Γ^σ_{νμ} ω_σ)
    let mut e = coeffs.zeroth_order.truncate(order);
    for nu in 0..n {
        for mu in 0..n {
            let mut t = omega[mu].partial(nu)?;
            t.add_scaled(&omega[nu].mul_truncated(&omega[mu], order)?, Complex64::new(1.0, 0.0))?;
            for s in 0..n {
                t.add_scaled(&omega[s].mul_jet_truncated(mj.gamma(s, nu, mu), order)?, Complex64::new(-1.0, 0.0))?;
            }
            e.add_scaled(&t.mul_jet_truncated(&mj.g_inv[nu * n + mu], order)?, Complex64::new(-1.0, 0.0))?;
        }
    }
    Ok((omega, e))
}

/// `E(x0)` in `Δ = ∇*∇ − E`.
pub fn weitzenbock_endomorphism(op: &GeneralizedLaplacian, x0: &[f64]) -> Result<DMatrix<Complex64>> {
    let (_, e) = weitzenbock_jets(op, &Arc::from(x0), 0)?;
    Ok(e.constant_matrix())
}

/// Lichnerowicz normal form `∇*∇ + r/4` on a rank-`rank` bundle with
/// connection `ω`: the Weitzenböck endomorphism is `−r/4 · Id`.
pub fn build_lichnerowicz(
    metric: MetricField,
    rank: usize,
    connection: Vec<TrigMatrix>,
) -> Result<GeneralizedLaplacian> {
    if rank == 0 {
        return Err(Error::InvalidInput("rank must be at least 1".into()));
    }
    GeneralizedLaplacian::from_connection(metric, rank, connection, TrigMatrix::zero(rank), -0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigPoly;

    #[test]
    fn flat_operator_has_no_endomorphism() {
        let op = GeneralizedLaplacian::from_coefficients(
            MetricField::flat(2),
            1,
            vec![TrigMatrix::zero(1); 2],
            TrigMatrix::zero(1),
        )
        .unwrap();
        let e = weitzenbock_endomorphism(&op, &[0.4, 0.9]).unwrap();
        assert!(e[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn potential_passes_through() {
        let v = TrigPoly::cos_mode(vec![1, 1], 0.7).add(&TrigPoly::constant(2, 0.2));
        let op = GeneralizedLaplacian::from_coefficients(
            MetricField::flat(2),
            2,
            vec![TrigMatrix::zero(2); 2],
            TrigMatrix::scalar(2, &v),
        )
        .unwrap();
        let x = [0.3, 1.1];
        let e = weitzenbock_endomorphism(&op, &x).unwrap();
        assert!((e[(0, 0)].re - v.eval(&x)).abs() < 1e-14);
        assert!((e[(1, 1)].re - v.eval(&x)).abs() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn laplace_beltrami_has_zero_endomorphism() {
        let g = MetricField::conformal(3, TrigPoly::cos_mode(vec![1, 0, 1], 0.2)).unwrap();
        let op = GeneralizedLaplacian::laplace_beltrami(g, 1);
        let e = weitzenbock_endomorphism(&op, &[0.2, 0.5, 1.3]).unwrap();
        assert!(e[(0, 0)].norm() < 1e-13);
    }

    #[test]
    fn shift_moves_endomorphism_by_identity() {
        let g = MetricField::conformal(2, TrigPoly::cos_mode(vec![1, 0], 0.3)).unwrap();
        let op = build_lichnerowicz(g, 2, vec![TrigMatrix::zero(2); 2]).unwrap();
        let x = [0.7, 0.1];
        let e0 = weitzenbock_endomorphism(&op, &x).unwrap();
        let e1 = weitzenbock_endomorphism(&op.shifted(0.25), &x).unwrap();
        let d = e1 - e0 - DMatrix::identity(2, 2) * Complex64::new(0.25, 0.0);
        assert!(d.norm() < 1e-14);
    }

    #[test]
    fn mismatched_connection_length_rejected() {
        let r = GeneralizedLaplacian::from_connection(
            MetricField::flat(2),
            1,
            vec![TrigMatrix::zero(1)],
            TrigMatrix::zero(1),
            0.0,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}

//! Trigonometric polynomials on the flat torus `[0, 2π)ⁿ`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jet::{Jet, JetMatrix, MultiIndex};

/// `cos · cos(k·x) + sin · sin(k·x)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub k: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Finite Fourier sum. A polynomial with no terms has dimension 0 and acts as
/// the zero function in every dimension.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPoly {
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        TrigPoly {
            dim,
            terms: vec![TrigTerm {
                k: vec![0; dim],
                cos: value,
                sin: 0.0,
            }],
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<TrigTerm>) -> Result<Self> {
        for t in &terms {
            if t.k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.k.len(),
                });
            }
        }
        Ok(TrigPoly { dim, terms })
    }

    pub fn cos_mode(k: Vec<i32>, amplitude: f64) -> Self {
        TrigPoly {
            dim: k.len(),
            terms: vec![TrigTerm {
                k,
                cos: amplitude,
                sin: 0.0,
            }],
        }
    }

    pub fn sin_mode(k: Vec<i32>, amplitude: f64) -> Self {
        TrigPoly {
            dim: k.len(),
            terms: vec![TrigTerm {
                k,
                cos: 0.0,
                sin: amplitude,
            }],
        }
    }

    /// Random polynomial with frequencies in `[-max_freq, max_freq]ⁿ` and
    /// amplitudes uniform in `[-amplitude, amplitude]`.
    pub fn random<R: Rng + ?Sized>(
        dim: usize,
        max_freq: i32,
        n_terms: usize,
        amplitude: f64,
        rng: &mut R,
    ) -> Self {
        let terms = (0..n_terms)
            .map(|_| TrigTerm {
                k: (0..dim).map(|_| rng.gen_range(-max_freq..=max_freq)).collect(),
                cos: rng.gen_range(-amplitude..=amplitude),
                sin: rng.gen_range(-amplitude..=amplitude),
            })
            .collect();
        TrigPoly { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.cos == 0.0 && t.sin == 0.0)
    }

    /// Largest `|k_i|` over all terms.
    pub fn max_frequency(&self) -> i32 {
        self.terms
            .iter()
            .flat_map(|t| t.k.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if self.dim != 0 && self.dim != x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let theta: f64 = t.k.iter().zip(x).map(|(&k, &xi)| f64::from(k) * xi).sum();
                t.cos * theta.cos() + t.sin * theta.sin()
            })
            .sum()
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TrigPoly {
            dim: self.dim.max(other.dim),
            terms,
        }
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| TrigTerm {
                    k: t.k.clone(),
                    cos: t.cos * s,
                    sin: t.sin * s,
                })
                .collect(),
        }
    }

    /// `∂/∂x_axis`, again a trigonometric polynomial.
    pub fn partial(&self, axis: usize) -> TrigPoly {
        TrigPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let k = f64::from(t.k[axis]);
                    TrigTerm {
                        k: t.k.clone(),
                        cos: t.sin * k,
                        sin: -t.cos * k,
                    }
                })
                .collect(),
        }
    }

    /// Exact Taylor jet at `x0` (derivatives taken analytically).
    pub fn jet(&self, x0: &Arc<[f64]>, order: usize) -> Result<Jet> {
        self.check_point(x0)?;
        let n = x0.len();
        // Per term: phase θ, and powers k_i^e for e ≤ order.
        let prepared: Vec<(f64, f64, f64, Vec<Vec<f64>>)> = self
            .terms
            .iter()
            .map(|t| {
                let theta: f64 = t.k.iter().zip(x0.iter()).map(|(&k, &xi)| f64::from(k) * xi).sum();
                let powers = t
                    .k
                    .iter()
                    .map(|&k| {
                        let mut p = Vec::with_capacity(order + 1);
                        let mut acc = 1.0;
                        for _ in 0..=order {
                            p.push(acc);
                            acc *= f64::from(k);
                        }
                        p
                    })
                    .collect();
                (theta, t.cos, t.sin, powers)
            })
            .collect();
        Jet::from_fn(x0.clone(), order, |alpha: &MultiIndex| {
            let m = alpha.degree();
            let mut v = 0.0;
            for (theta, c, s, powers) in &prepared {
                let kp: f64 = (0..n).map(|i| powers[i][alpha.exponents()[i] as usize]).product();
                if kp == 0.0 {
                    continue;
                }
                let (sn, cs) = theta.sin_cos();
                // d^m/dθ^m of c·cos θ + s·sin θ
                let d = match m % 4 {
                    0 => c * cs + s * sn,
                    1 => -c * sn + s * cs,
                    2 => -c * cs - s * sn,
                    _ => c * sn - s * cs,
                };
                v += kp * d;
            }
            Complex64::new(v / alpha.factorial(), 0.0)
        })
    }
}

/// Free-function form of [`TrigPoly::jet`].
pub fn trig_jet(f: &TrigPoly, x0: &[f64], order: usize) -> Result<Jet> {
    f.jet(&Arc::from(x0), order)
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TrigTerm>::deserialize(d)?;
        let dim = terms.first().map_or(0, |t| t.k.len());
        TrigPoly::from_terms(dim, terms).map_err(serde::de::Error::custom)
    }
}

/// Square matrix of trigonometric polynomials (bundle endomorphism field).
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMatrix {
    rank: usize,
    entries: Vec<TrigPoly>,
}

impl TrigMatrix {
    pub fn zero(rank: usize) -> Self {
        TrigMatrix {
            rank,
            entries: vec![TrigPoly::default(); rank * rank],
        }
    }

    /// `f · Id_rank`
    pub fn scalar(rank: usize, f: &TrigPoly) -> Self {
        let mut m = Self::zero(rank);
        for i in 0..rank {
            m.entries[i * rank + i] = f.clone();
        }
        m
    }

    pub fn from_entries(rank: usize, entries: Vec<TrigPoly>) -> Result<Self> {
        if entries.len() != rank * rank {
            return Err(Error::DimensionMismatch {
                expected: rank * rank,
                got: entries.len(),
            });
        }
        Ok(TrigMatrix { rank, entries })
    }

    /// Random real antisymmetric matrix field (a unitary connection component).
    pub fn random_skew<R: Rng + ?Sized>(
        dim: usize,
        rank: usize,
        max_freq: i32,
        n_terms: usize,
        amplitude: f64,
        rng: &mut R,
    ) -> Self {
        let mut m = Self::zero(rank);
        for i in 0..rank {
            for j in (i + 1)..rank {
                let p = TrigPoly::random(dim, max_freq, n_terms, amplitude, rng);
                m.entries[j * rank + i] = p.scale(-1.0);
                m.entries[i * rank + j] = p;
            }
        }
        m
    }

    /// Random matrix field with independent entries.
    pub fn random<R: Rng + ?Sized>(
        dim: usize,
        rank: usize,
        max_freq: i32,
        n_terms: usize,
        amplitude: f64,
        rng: &mut R,
    ) -> Self {
        TrigMatrix {
            rank,
            entries: (0..rank * rank)
                .map(|_| TrigPoly::random(dim, max_freq, n_terms, amplitude, rng))
                .collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> &TrigPoly {
        &self.entries[i * self.rank + j]
    }

    pub fn entries(&self) -> &[TrigPoly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TrigPoly::is_zero)
    }

    pub fn add(&self, other: &TrigMatrix) -> TrigMatrix {
        TrigMatrix {
            rank: self.rank,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rank, self.rank, |i, j| self.entry(i, j).eval(x))
    }

    pub fn jet(&self, x0: &Arc<[f64]>, order: usize) -> Result<JetMatrix> {
        let jets = self
            .entries
            .iter()
            .map(|p| p.jet(x0, order))
            .collect::<Result<Vec<_>>>()?;
        JetMatrix::from_entries(&jets, self.rank)
    }
}

impl Serialize for TrigMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[TrigPoly]> = self.entries.chunks(self.rank).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<TrigPoly>>::deserialize(d)?;
        let rank = rows.len();
        if rows.iter().any(|r| r.len() != rank) {
            return Err(serde::de::Error::custom("matrix field must be square"));
        }
        Ok(TrigMatrix {
            rank,
            entries: rows.into_iter().flatten().collect(),
        })
    }
}

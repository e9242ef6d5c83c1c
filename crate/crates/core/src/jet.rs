//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] of order `J` at a base point `x0` stores the monomial
//! coefficients `f_α = ∂^α f(x0) / α!` for every multi-index with
//! `|α| ≤ J`, in graded-lexicographic order. Products truncate at the smaller
//! of the two orders. [`JetMatrix`] is the matrix-valued analogue used for
//! bundle endomorphisms and inverse metrics.
//!
//! Layouts (index tables, product tables, derivative shifts) are computed
//! once per dimension up to [`MAX_ORDER`] and shared by every jet of that
//! dimension.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest jet order supported by the shared layouts.
pub const MAX_ORDER: usize = 8;
/// Highest ambient dimension supported by the shared layouts.
pub const MAX_DIM: usize = 6;
/// Default threshold below which a constant term is treated as zero.
pub const DEFAULT_UNIT_THRESHOLD: f64 = 1e-12;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Exponent vector `α = (α_1, …, α_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `|α|`
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of dimension `dim` and degree `degree`, first
    /// exponent descending.
    pub fn of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=left).rev() {
                prefix.push(a);
                rec(dim, left - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            if degree == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Binomial coefficient `C(n, k)` as an integer count.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Shared index tables for all jets of one dimension.
#[derive(Debug)]
pub struct JetLayout {
    dim: usize,
    indices: Vec<MultiIndex>,
    /// `degree_starts[d]` = number of indices of degree `< d`.
    degree_starts: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(a, b, c)` with `α_a + α_b = α_c`, sorted by `c`.
    products: Vec<[u32; 3]>,
    /// `product_ends[J]` = number of product entries whose target has degree `≤ J`.
    product_ends: Vec<usize>,
    /// `raise[axis][i]` = index of `α_i + e_axis`, or `u32::MAX` past `MAX_ORDER`.
    raise: Vec<Vec<u32>>,
}

impl JetLayout {
    fn build(dim: usize) -> Self {
        let mut indices = Vec::new();
        let mut degree_starts = vec![0];
        for d in 0..=MAX_ORDER as u32 {
            indices.extend(MultiIndex::of_degree(dim, d));
            degree_starts.push(indices.len());
        }
        let lookup: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (c, gamma) in indices.iter().enumerate() {
            // Enumerate a ≤ γ componentwise; b = γ − a.
            for a in 0..degree_starts[gamma.degree() as usize + 1] {
                let alpha = &indices[a];
                if alpha.0.iter().zip(&gamma.0).all(|(x, y)| x <= y) {
                    let beta = MultiIndex(gamma.0.iter().zip(&alpha.0).map(|(y, x)| y - x).collect());
                    let b = lookup[&beta];
                    products.push([a as u32, b as u32, c as u32]);
                }
            }
        }
        let mut product_ends = Vec::with_capacity(MAX_ORDER + 1);
        for j in 0..=MAX_ORDER {
            let limit = degree_starts[j + 1] as u32;
            product_ends.push(products.partition_point(|p| p[2] < limit));
        }
        let raise = (0..dim)
            .map(|axis| {
                indices
                    .iter()
                    .map(|m| {
                        let mut e = m.0.clone();
                        e[axis] += 1;
                        lookup.get(&MultiIndex(e)).map_or(u32::MAX, |&i| i as u32)
                    })
                    .collect()
            })
            .collect();
        JetLayout {
            dim,
            indices,
            degree_starts,
            lookup,
            products,
            product_ends,
            raise,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coefficients of an order-`order` jet: `C(n + J, J)`.
    pub fn len(&self, order: usize) -> usize {
        self.degree_starts[order + 1]
    }

    pub fn multi_index(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub(crate) fn products(&self, order: usize) -> &[[u32; 3]] {
        &self.products[..self.product_ends[order]]
    }
}

static LAYOUTS: [OnceLock<JetLayout>; MAX_DIM + 1] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

/// Shared layout for dimension `dim` (1 ≤ dim ≤ [`MAX_DIM`]).
pub fn layout(dim: usize) -> Result<&'static JetLayout> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "jet dimension {dim} (supported: 1..={MAX_DIM})"
        )));
    }
    Ok(LAYOUTS[dim].get_or_init(|| JetLayout::build(dim)))
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

fn same_base(a: &Arc<[f64]>, b: &Arc<[f64]>) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

/// Base point shared between jets; cheap to clone.
pub type BasePoint = Arc<[f64]>;

/// Truncated Taylor jet with complex coefficients.
#[derive(Clone, Debug)]
pub struct Jet {
    layout: &'static JetLayout,
    base: BasePoint,
    order: usize,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn zero(base: BasePoint, order: usize) -> Result<Jet> {
        check_order(order)?;
        let layout = layout(base.len())?;
        Ok(Jet {
            layout,
            coeffs: vec![C0; layout.len(order)],
            base,
            order,
        })
    }

    pub fn constant(base: BasePoint, order: usize, value: Complex64) -> Result<Jet> {
        let mut j = Jet::zero(base, order)?;
        j.coeffs[0] = value;
        Ok(j)
    }

    /// Jet of the coordinate function `x_axis`.
    pub fn coordinate(base: BasePoint, order: usize, axis: usize) -> Result<Jet> {
        let n = base.len();
        if axis >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: axis + 1,
            });
        }
        let mut j = Jet::constant(base.clone(), order, Complex64::new(base[axis], 0.0))?;
        if order >= 1 {
            let idx = j.layout.index_of(&MultiIndex::unit(n, axis)).unwrap();
            j.coeffs[idx] = C1;
        }
        Ok(j)
    }

    /// Builds a jet from a coefficient function `α ↦ f_α`.
    pub fn from_fn(
        base: BasePoint,
        order: usize,
        mut f: impl FnMut(&MultiIndex) -> Complex64,
    ) -> Result<Jet> {
        let mut j = Jet::zero(base, order)?;
        for (i, c) in j.coeffs.iter_mut().enumerate() {
            *c = f(&j.layout.indices[i]);
        }
        Ok(j)
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.base
    }

    pub fn layout(&self) -> &'static JetLayout {
        self.layout
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `f_α`; zero when `|α|` exceeds the order.
    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        match self.layout.index_of(alpha) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => C0,
        }
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            layout: self.layout,
            base: self.base.clone(),
            order,
            coeffs: self.coeffs[..self.layout.len(order)].to_vec(),
        }
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.layout.dim != other.layout.dim {
            return Err(Error::DimensionMismatch {
                expected: self.layout.dim,
                got: other.layout.dim,
            });
        }
        if !same_base(&self.base, &other.base) {
            return Err(Error::BasePointMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order.min(other.order);
        let len = self.layout.len(order);
        Ok(Jet {
            layout: self.layout,
            base: self.base.clone(),
            order,
            coeffs: (0..len).map(|i| f(self.coeffs[i], other.coeffs[i])).collect(),
        })
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Truncated Cauchy product; the result order is the smaller input order.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order.min(other.order);
        let mut coeffs = vec![C0; self.layout.len(order)];
        for &[a, b, c] in self.layout.products(order) {
            coeffs[c as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Ok(Jet {
            layout: self.layout,
            base: self.base.clone(),
            order,
            coeffs,
        })
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            layout: self.layout,
            base: self.base.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Jet {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `Σ_k c_k (f − f(x0))^k`, i.e. `g(f)` for `g` with Taylor coefficients
    /// `c_k` at `f(x0)`. Terms beyond the jet order vanish identically.
    pub fn compose_series(&self, series: &[Complex64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = C0;
        let top = series.len().min(self.order + 1);
        let mut acc = Jet {
            layout: self.layout,
            base: self.base.clone(),
            order: self.order,
            coeffs: vec![C0; self.coeffs.len()],
        };
        for k in (0..top).rev() {
            acc = &acc * &h;
            acc.coeffs[0] += series[k];
        }
        acc
    }

    /// Multiplicative inverse, with a configurable unit threshold.
    pub fn invert_with(&self, threshold: f64) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0.norm() < threshold {
            return Err(Error::SingularJet(a0.norm()));
        }
        let inv = a0.inv();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut term = inv;
        for _ in 0..=self.order {
            series.push(term);
            term = -term * inv;
        }
        Ok(self.compose_series(&series))
    }

    pub fn invert(&self) -> Result<Jet> {
        self.invert_with(DEFAULT_UNIT_THRESHOLD)
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.coeffs[0].exp();
        let series: Vec<Complex64> = (0..=self.order)
            .map(|k| e0 / factorial(k as u32))
            .collect();
        self.compose_series(&series)
    }

    /// `∂f/∂x_axis`, one order lower.
    pub fn partial(&self, axis: usize) -> Result<Jet> {
        if axis >= self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: axis + 1,
            });
        }
        if self.order == 0 {
            return Err(Error::JetUnderflow);
        }
        let order = self.order - 1;
        let len = self.layout.len(order);
        let raise = &self.layout.raise[axis];
        let coeffs = (0..len)
            .map(|i| {
                let up = raise[i] as usize;
                let k = self.layout.indices[i].0[axis] + 1;
                self.coeffs[up] * f64::from(k)
            })
            .collect();
        Ok(Jet {
            layout: self.layout,
            base: self.base.clone(),
            order,
            coeffs,
        })
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet addition across base points")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet subtraction across base points")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet product across base points")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_re(-1.0)
    }
}

/// Matrix of jets sharing base point and order, stored coefficient-major:
/// `data[c·r² + i·r + j]` is coefficient `c` of entry `(i, j)`.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    layout: &'static JetLayout,
    base: BasePoint,
    order: usize,
    rank: usize,
    data: Vec<Complex64>,
}

impl JetMatrix {
    pub fn zero(base: BasePoint, order: usize, rank: usize) -> Result<JetMatrix> {
        check_order(order)?;
        let layout = layout(base.len())?;
        Ok(JetMatrix {
            layout,
            data: vec![C0; layout.len(order) * rank * rank],
            base,
            order,
            rank,
        })
    }

    pub fn identity(base: BasePoint, order: usize, rank: usize) -> Result<JetMatrix> {
        Self::scalar(base, order, rank, C1)
    }

    pub fn scalar(base: BasePoint, order: usize, rank: usize, value: Complex64) -> Result<JetMatrix> {
        let mut m = JetMatrix::zero(base, order, rank)?;
        for i in 0..rank {
            m.data[i * rank + i] = value;
        }
        Ok(m)
    }

    /// `jet · Id_rank`
    pub fn from_scalar_jet(jet: &Jet, rank: usize) -> JetMatrix {
        let rr = rank * rank;
        let mut data = vec![C0; jet.coeffs.len() * rr];
        for (c, v) in jet.coeffs.iter().enumerate() {
            for i in 0..rank {
                data[c * rr + i * rank + i] = *v;
            }
        }
        JetMatrix {
            layout: jet.layout,
            base: jet.base.clone(),
            order: jet.order,
            rank,
            data,
        }
    }

    /// Builds from row-major entries; all entries must share base point.
    /// The result order is the smallest entry order.
    pub fn from_entries(entries: &[Jet], rank: usize) -> Result<JetMatrix> {
        if entries.len() != rank * rank || rank == 0 {
            return Err(Error::DimensionMismatch {
                expected: rank * rank,
                got: entries.len(),
            });
        }
        let first = &entries[0];
        for e in entries {
            first.check_compatible(e)?;
        }
        let order = entries.iter().map(Jet::order).min().unwrap();
        let mut m = JetMatrix::zero(first.base.clone(), order, rank)?;
        let rr = rank * rank;
        for (k, e) in entries.iter().enumerate() {
            for c in 0..m.layout.len(order) {
                m.data[c * rr + k] = e.coeffs[c];
            }
        }
        Ok(m)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.base
    }

    pub fn entry(&self, i: usize, j: usize) -> Jet {
        let rr = self.rank * self.rank;
        let len = self.layout.len(self.order);
        Jet {
            layout: self.layout,
            base: self.base.clone(),
            order: self.order,
            coeffs: (0..len).map(|c| self.data[c * rr + i * self.rank + j]).collect(),
        }
    }

    /// Value matrix at the base point.
    pub fn constant_matrix(&self) -> DMatrix<Complex64> {
        let r = self.rank;
        DMatrix::from_fn(r, r, |i, j| self.data[i * r + j])
    }

    /// Trace of the constant term.
    pub fn constant_trace(&self) -> Complex64 {
        (0..self.rank).map(|i| self.data[i * self.rank + i]).sum()
    }

    pub fn trace(&self) -> Jet {
        let rr = self.rank * self.rank;
        let len = self.layout.len(self.order);
        Jet {
            layout: self.layout,
            base: self.base.clone(),
            order: self.order,
            coeffs: (0..len)
                .map(|c| (0..self.rank).map(|i| self.data[c * rr + i * self.rank + i]).sum())
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> JetMatrix {
        let order = order.min(self.order);
        let rr = self.rank * self.rank;
        JetMatrix {
            layout: self.layout,
            base: self.base.clone(),
            order,
            rank: self.rank,
            data: self.data[..self.layout.len(order) * rr].to_vec(),
        }
    }

    fn check_compatible(&self, other: &JetMatrix) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        if self.layout.dim != other.layout.dim {
            return Err(Error::DimensionMismatch {
                expected: self.layout.dim,
                got: other.layout.dim,
            });
        }
        if !same_base(&self.base, &other.base) {
            return Err(Error::BasePointMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &JetMatrix) -> Result<JetMatrix> {
        self.check_compatible(other)?;
        let order = self.order.min(other.order);
        let len = self.layout.len(order) * self.rank * self.rank;
        Ok(JetMatrix {
            layout: self.layout,
            base: self.base.clone(),
            order,
            rank: self.rank,
            data: (0..len).map(|i| self.data[i] + other.data[i]).collect(),
        })
    }

    pub fn try_sub(&self, other: &JetMatrix) -> Result<JetMatrix> {
        self.try_add(&other.scale_re(-1.0))
    }

    /// `self += s · other`, truncating `self` to the common order.
    pub fn add_scaled(&mut self, other: &JetMatrix, s: Complex64) -> Result<()> {
        self.check_compatible(other)?;
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        let len = self.data.len();
        for (d, o) in self.data.iter_mut().zip(&other.data[..len]) {
            *d += s * o;
        }
        Ok(())
    }

    pub fn scale(&self, s: Complex64) -> JetMatrix {
        JetMatrix {
            data: self.data.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn scale_re(&self, s: f64) -> JetMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Product truncated to `order` (and to the input orders).
    pub fn mul_truncated(&self, other: &JetMatrix, order: usize) -> Result<JetMatrix> {
        self.check_compatible(other)?;
        let order = order.min(self.order).min(other.order);
        let r = self.rank;
        let rr = r * r;
        let mut data = vec![C0; self.layout.len(order) * rr];
        if r == 1 {
            for &[a, b, c] in self.layout.products(order) {
                data[c as usize] += self.data[a as usize] * other.data[b as usize];
            }
        } else {
            for &[a, b, c] in self.layout.products(order) {
                let (a, b, c) = (a as usize * rr, b as usize * rr, c as usize * rr);
                for i in 0..r {
                    for k in 0..r {
                        let x = self.data[a + i * r + k];
                        if x == C0 {
                            continue;
                        }
                        for j in 0..r {
                            data[c + i * r + j] += x * other.data[b + k * r + j];
                        }
                    }
                }
            }
        }
        Ok(JetMatrix {
            layout: self.layout,
            base: self.base.clone(),
            order,
            rank: r,
            data,
        })
    }

    pub fn try_mul(&self, other: &JetMatrix) -> Result<JetMatrix> {
        self.mul_truncated(other, MAX_ORDER)
    }

    /// Entrywise product with a scalar jet, truncated to `order`.
    pub fn mul_jet_truncated(&self, jet: &Jet, order: usize) -> Result<JetMatrix> {
        if self.layout.dim != jet.layout.dim {
            return Err(Error::DimensionMismatch {
                expected: self.layout.dim,
                got: jet.layout.dim,
            });
        }
        if !same_base(&self.base, &jet.base) {
            return Err(Error::BasePointMismatch);
        }
        let order = order.min(self.order).min(jet.order);
        let rr = self.rank * self.rank;
        let mut data = vec![C0; self.layout.len(order) * rr];
        for &[a, b, c] in self.layout.products(order) {
            let s = jet.coeffs[b as usize];
            if s == C0 {
                continue;
            }
            let (a, c) = (a as usize * rr, c as usize * rr);
            for k in 0..rr {
                data[c + k] += self.data[a + k] * s;
            }
        }
        Ok(JetMatrix {
            layout: self.layout,
            base: self.base.clone(),
            order,
            rank: self.rank,
            data,
        })
    }

    pub fn mul_jet(&self, jet: &Jet) -> Result<JetMatrix> {
        self.mul_jet_truncated(jet, MAX_ORDER)
    }

    /// `∂/∂x_axis`, one order lower.
    pub fn partial(&self, axis: usize) -> Result<JetMatrix> {
        if axis >= self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: axis + 1,
            });
        }
        if self.order == 0 {
            return Err(Error::JetUnderflow);
        }
        let order = self.order - 1;
        let rr = self.rank * self.rank;
        let len = self.layout.len(order);
        let raise = &self.layout.raise[axis];
        let mut data = vec![C0; len * rr];
        for i in 0..len {
            let up = raise[i] as usize;
            let k = f64::from(self.layout.indices[i].0[axis] + 1);
            for e in 0..rr {
                data[i * rr + e] = self.data[up * rr + e] * k;
            }
        }
        Ok(JetMatrix {
            layout: self.layout,
            base: self.base.clone(),
            order,
            rank: self.rank,
            data,
        })
    }

    /// Inverse computed from the inverse of the constant-term matrix followed
    /// by the Neumann correction `Σ_k (−M0⁻¹H)^k M0⁻¹`, exact to the jet order.
    pub fn invert_with(&self, threshold: f64) -> Result<JetMatrix> {
        let m0 = self.constant_matrix();
        let det = m0.determinant();
        if det.norm() < threshold {
            return Err(Error::SingularMatrix(det.norm()));
        }
        let inv0 = m0
            .try_inverse()
            .ok_or(Error::SingularMatrix(det.norm()))?;
        let r = self.rank;
        let mut inv0_jet = JetMatrix::zero(self.base.clone(), self.order, r)?;
        for i in 0..r {
            for j in 0..r {
                inv0_jet.data[i * r + j] = inv0[(i, j)];
            }
        }
        // T = −M0⁻¹ H, where H is M without its constant term.
        let mut h = self.clone();
        for v in &mut h.data[..r * r] {
            *v = C0;
        }
        let t = inv0_jet.try_mul(&h)?.scale_re(-1.0);
        let mut acc = inv0_jet.clone();
        for _ in 0..self.order {
            acc = t.try_mul(&acc)?;
            acc.add_scaled(&inv0_jet, C1)?;
        }
        Ok(acc)
    }

    pub fn invert(&self) -> Result<JetMatrix> {
        self.invert_with(DEFAULT_UNIT_THRESHOLD)
    }
}

/// Free-function forms of the jet operations.
pub fn jet_multiply(a: &Jet, b: &Jet) -> Result<Jet> {
    a.try_mul(b)
}

pub fn jet_invert(a: &Jet) -> Result<Jet> {
    a.invert()
}

pub fn jet_partial(a: &Jet, axis: usize) -> Result<Jet> {
    a.partial(axis)
}

pub fn jet_matrix_invert(m: &JetMatrix) -> Result<JetMatrix> {
    m.invert()
}

//! Graded matrix-valued symbols at a base point.
//!
//! A homogeneous component of order `m` is a finite sum
//! `Σ ξ^β N_β(x) / Q(x, ξ)^q` with `|β| − 2q = m`, where
//! `Q(x, ξ) = g^{ij}(x) ξ_i ξ_j` and each `N_β` is a [`JetMatrix`]. The class
//! is closed under `∂_ξ`, `∂_x` and products, which is all the asymptotic
//! composition formula
//!
//! ```text
//! σ(A∘B) ~ Σ_α (1/α!) ∂_ξ^α σ_A · D_x^α σ_B,   D_x = −i ∂_x
//! ```
//!
//! needs. Symbols follow `σ(Σ a_α(x) D_x^α) = Σ a_α(x) ξ^α`.
//!
//! Jet budget: in a symbol with top order `M` and budget `J`, the component
//! of order `M − j` carries jets of order `J − j`. Composition keeps the
//! smaller budget and fails with [`Error::Budget`] when a requested cutoff
//! would need derivatives the jets do not hold.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{factorial, BasePoint, Jet, JetMatrix, MultiIndex};
use crate::laplacian::GeneralizedLaplacian;

/// Symbols are supported up to this ambient dimension.
pub const MAX_SYMBOL_DIM: usize = 4;

/// Packed ξ-exponent vector.
pub(crate) type Mono = [u8; MAX_SYMBOL_DIM];

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn mono_unit(axis: usize) -> Mono {
    let mut m = [0; MAX_SYMBOL_DIM];
    m[axis] = 1;
    m
}

fn mono_add(a: &Mono, b: &Mono) -> Mono {
    let mut m = *a;
    for (x, y) in m.iter_mut().zip(b) {
        *x += y;
    }
    m
}

/// The leading quadratic form `Q(x, ξ) = g^{ij}(x) ξ_i ξ_j` as jets.
#[derive(Debug)]
pub struct QuadraticForm {
    dim: usize,
    base: BasePoint,
    /// `g^{ij}`, row-major.
    inverse_metric: Vec<Jet>,
    /// `∂_l g^{ij}` at `[l][i·n + j]`.
    derivatives: Vec<Vec<Jet>>,
    /// Zero entries are skipped during differentiation.
    nonzero: Vec<bool>,
    /// Whether `g^{ij}` is independent of `x`.
    constant: bool,
}

impl QuadraticForm {
    pub fn new(inverse_metric: Vec<Jet>) -> Result<Arc<Self>> {
        let first = inverse_metric
            .first()
            .ok_or_else(|| Error::InvalidInput("empty inverse metric".into()))?;
        let dim = first.dim();
        if dim > MAX_SYMBOL_DIM {
            return Err(Error::Unsupported(format!(
                "symbol dimension {dim} (supported up to {MAX_SYMBOL_DIM})"
            )));
        }
        if inverse_metric.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: inverse_metric.len(),
            });
        }
        let base = first.base_point().clone();
        let derivatives = if first.order() == 0 {
            Vec::new()
        } else {
            (0..dim)
                .map(|l| inverse_metric.iter().map(|g| g.partial(l)).collect())
                .collect::<Result<_>>()?
        };
        let nonzero = inverse_metric.iter().map(|g| g.max_abs() > 0.0).collect();
        let constant = inverse_metric
            .iter()
            .all(|g| g.coefficients()[1..].iter().all(|c| *c == C0));
        Ok(Arc::new(QuadraticForm {
            dim,
            base,
            inverse_metric,
            derivatives,
            nonzero,
            constant,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.inverse_metric[0].order()
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.base
    }

    pub fn inverse_metric(&self) -> &[Jet] {
        &self.inverse_metric
    }

    /// `G = g^{-1}(x0)` as a real matrix.
    pub fn value(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| self.inverse_metric[i * n + j].constant_term().re)
    }

    /// `Q(x0, ξ)`
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let n = self.dim;
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += self.inverse_metric[i * n + j].constant_term().re * xi[i] * xi[j];
            }
        }
        q
    }

    fn compatible(&self, other: &QuadraticForm) -> bool {
        self.dim == other.dim
            && self.base[..] == other.base[..]
            && self
                .inverse_metric
                .iter()
                .zip(&other.inverse_metric)
                .all(|(a, b)| a.constant_term() == b.constant_term())
    }
}

/// One homogeneous component `Σ ξ^β N_β / Q^q`.
#[derive(Clone, Debug)]
pub struct SymbolComponent {
    order: i32,
    terms: BTreeMap<(u32, Mono), JetMatrix>,
}

impl SymbolComponent {
    fn empty(order: i32) -> Self {
        SymbolComponent {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(β, q, N_β)` in graded order of `(q, β)`.
    pub fn terms(&self, dim: usize) -> impl Iterator<Item = (MultiIndex, u32, &JetMatrix)> + '_ {
        self.terms.iter().map(move |((q, b), n)| {
            (
                MultiIndex::new(b[..dim].iter().map(|&e| u32::from(e)).collect()),
                *q,
                n,
            )
        })
    }

    pub(crate) fn raw_terms(&self) -> &BTreeMap<(u32, Mono), JetMatrix> {
        &self.terms
    }

    /// Largest coefficient magnitude over all jets.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(JetMatrix::max_abs).fold(0.0, f64::max)
    }

    /// Largest constant-term magnitude, i.e. the size at the base point.
    pub fn max_abs_at_base(&self) -> f64 {
        self.terms
            .values()
            .map(|n| n.constant_matrix().iter().map(|c| c.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    fn add_term(&mut self, key: (u32, Mono), value: JetMatrix, scale: Complex64) -> Result<()> {
        match self.terms.get_mut(&key) {
            Some(existing) => existing.add_scaled(&value, scale),
            None => {
                let v = if scale == C1 { value } else { value.scale(scale) };
                self.terms.insert(key, v);
                Ok(())
            }
        }
    }

    fn truncate_jets(&self, order: usize) -> SymbolComponent {
        SymbolComponent {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v.truncate(order)))
                .collect(),
        }
    }

    /// `∂/∂ξ_axis`
    fn xi_derivative(&self, quad: &QuadraticForm, axis: usize) -> Result<SymbolComponent> {
        let n = quad.dim;
        let mut out = SymbolComponent::empty(self.order - 1);
        for (&(q, beta), nb) in &self.terms {
            let b = beta[axis];
            if b > 0 {
                let mut nbeta = beta;
                nbeta[axis] -= 1;
                out.add_term((q, nbeta), nb.clone(), Complex64::new(f64::from(b), 0.0))?;
            }
            if q > 0 {
                // ∂_ξk Q^{-q} = −2q g^{kj} ξ_j Q^{-q-1}
                let s = Complex64::new(-2.0 * f64::from(q), 0.0);
                for j in 0..n {
                    let gkj = &quad.inverse_metric[axis * n + j];
                    if !quad.nonzero[axis * n + j] {
                        continue;
                    }
                    let v = if quad.constant {
                        nb.scale(gkj.constant_term())
                    } else {
                        nb.mul_jet(gkj)?
                    };
                    out.add_term((q + 1, mono_add(&beta, &mono_unit(j))), v, s)?;
                }
            }
        }
        Ok(out)
    }

    /// `∂/∂x_axis`; lowers every jet order by one.
    fn x_derivative(&self, quad: &QuadraticForm, axis: usize) -> Result<SymbolComponent> {
        let n = quad.dim;
        let mut out = SymbolComponent::empty(self.order);
        for (&(q, beta), nb) in &self.terms {
            let dn = nb.partial(axis)?;
            let out_order = dn.order();
            out.add_term((q, beta), dn, C1)?;
            if q > 0 && !quad.constant {
                // ∂_x Q^{-q} = −q (∂_x g^{ij}) ξ_i ξ_j Q^{-q-1}
                for i in 0..n {
                    for j in i..n {
                        let d = &quad.derivatives[axis][i * n + j];
                        if d.max_abs() == 0.0 {
                            continue;
                        }
                        let mult = if i == j { 1.0 } else { 2.0 };
                        let v = nb.mul_jet_truncated(d, out_order)?;
                        let key = (q + 1, mono_add(&beta, &mono_add(&mono_unit(i), &mono_unit(j))));
                        out.add_term(key, v, Complex64::new(-mult * f64::from(q), 0.0))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product of two components, jets truncated to `jet_order`.
    fn product(&self, other: &SymbolComponent, jet_order: usize, out: &mut SymbolComponent, scale: Complex64) -> Result<()> {
        for (&(qa, ba), na) in &self.terms {
            for (&(qb, bb), nb) in &other.terms {
                let v = na.mul_truncated(nb, jet_order)?;
                out.add_term((qa + qb, mono_add(&ba, &bb)), v, scale)?;
            }
        }
        Ok(())
    }

    /// Multiplies by `Q^{-1}`.
    fn divide_by_q(&self) -> SymbolComponent {
        SymbolComponent {
            order: self.order - 2,
            terms: self.terms.iter().map(|(&(q, b), v)| ((q + 1, b), v.clone())).collect(),
        }
    }

    fn scale(&self, s: Complex64) -> SymbolComponent {
        SymbolComponent {
            order: self.order,
            terms: self.terms.iter().map(|(k, v)| (*k, v.scale(s))).collect(),
        }
    }

    /// Value at `(x0, ξ)` using constant jet terms.
    fn eval(&self, quad: &QuadraticForm, rank: usize, xi: &[f64]) -> Result<DMatrix<Complex64>> {
        let qv = quad.eval(xi);
        if qv.abs() < 1e-300 {
            return Err(Error::SingularCovector);
        }
        let mut acc = DMatrix::from_element(rank, rank, C0);
        for (&(q, beta), nb) in &self.terms {
            let mut w = qv.powi(-(q as i32));
            for (a, &e) in beta.iter().enumerate().take(quad.dim) {
                w *= xi[a].powi(i32::from(e));
            }
            acc += nb.constant_matrix() * Complex64::new(w, 0.0);
        }
        Ok(acc)
    }
}

/// Graded symbol: homogeneous components from `max_order` down to `cutoff`.
#[derive(Clone, Debug)]
pub struct GradedSymbol {
    rank: usize,
    quad: Arc<QuadraticForm>,
    budget: usize,
    max_order: i32,
    cutoff: i32,
    /// All components below `cutoff` are known to vanish (differential
    /// operators with polynomial symbols).
    complete: bool,
    components: BTreeMap<i32, SymbolComponent>,
}

impl GradedSymbol {
    pub fn dim(&self) -> usize {
        self.quad.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.quad.base
    }

    pub fn quadratic_form(&self) -> &Arc<QuadraticForm> {
        &self.quad
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn max_order(&self) -> i32 {
        self.max_order
    }

    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Component of order `m`; `None` outside `[cutoff, max_order]`.
    pub fn component(&self, m: i32) -> Option<&SymbolComponent> {
        self.components.get(&m)
    }

    pub fn components(&self) -> impl Iterator<Item = &SymbolComponent> {
        self.components.values().rev()
    }

    /// Jet order carried by the component of order `m`.
    pub fn jet_order_at(&self, m: i32) -> usize {
        self.budget.saturating_sub((self.max_order - m) as usize)
    }

    /// Identity operator on rank-`rank` sections, sharing `quad`.
    pub fn identity(quad: Arc<QuadraticForm>, rank: usize, budget: usize) -> Result<Self> {
        let mut c = SymbolComponent::empty(0);
        c.terms.insert(
            (0, [0; MAX_SYMBOL_DIM]),
            JetMatrix::identity(quad.base.clone(), budget, rank)?,
        );
        Ok(GradedSymbol {
            rank,
            quad,
            budget,
            max_order: 0,
            cutoff: 0,
            complete: true,
            components: BTreeMap::from([(0, c)]),
        })
    }

    /// Symbol of the differential operator `Σ_k a^k D_k + a_0`.
    pub fn first_order_operator(
        quad: Arc<QuadraticForm>,
        coefficients: &[JetMatrix],
        constant: &JetMatrix,
        budget: usize,
    ) -> Result<Self> {
        let n = quad.dim;
        if coefficients.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coefficients.len(),
            });
        }
        let rank = constant.rank();
        let mut c1 = SymbolComponent::empty(1);
        for (k, a) in coefficients.iter().enumerate() {
            if a.order() < budget {
                return Err(Error::Budget {
                    required: budget,
                    available: a.order(),
                });
            }
            c1.add_term((0, mono_unit(k)), a.truncate(budget), C1)?;
        }
        let mut c0 = SymbolComponent::empty(0);
        c0.add_term((0, [0; MAX_SYMBOL_DIM]), constant.truncate(budget.saturating_sub(1)), C1)?;
        Ok(GradedSymbol {
            rank,
            quad,
            budget,
            max_order: 1,
            cutoff: 0,
            complete: true,
            components: BTreeMap::from([(1, c1), (0, c0)]),
        })
    }

    fn check_pair(&self, other: &GradedSymbol) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::Incompatible(format!(
                "ranks {} and {}",
                self.rank, other.rank
            )));
        }
        if !(Arc::ptr_eq(&self.quad, &other.quad) || self.quad.compatible(&other.quad)) {
            return Err(Error::Incompatible(
                "symbols live at different base points or metrics".into(),
            ));
        }
        Ok(())
    }

    /// Value of the order-`m` component at `(x0, ξ)`.
    pub fn evaluate_component(&self, m: i32, xi: &[f64]) -> Result<DMatrix<Complex64>> {
        let c = self.component(m).ok_or(Error::Truncation {
            required: m,
            available: self.cutoff,
        })?;
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        c.eval(&self.quad, self.rank, xi)
    }
}

/// Memoized `∂_ξ^α` / `∂_x^α` of the components of one symbol.
struct DerivativeCache<'a> {
    quad: &'a QuadraticForm,
    xi_side: bool,
    cache: HashMap<(i32, Mono), SymbolComponent>,
}

impl<'a> DerivativeCache<'a> {
    fn new(quad: &'a QuadraticForm, xi_side: bool) -> Self {
        DerivativeCache {
            quad,
            xi_side,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, base: &SymbolComponent, alpha: Mono) -> Result<&SymbolComponent> {
        let key = (base.order, alpha);
        if !self.cache.contains_key(&key) {
            let value = match alpha.iter().position(|&e| e > 0) {
                None => base.clone(),
                Some(k) => {
                    let mut lower = alpha;
                    lower[k] -= 1;
                    let prev = self.get(base, lower)?.clone();
                    if self.xi_side {
                        prev.xi_derivative(self.quad, k)?
                    } else {
                        prev.x_derivative(self.quad, k)?
                    }
                }
            };
            self.cache.insert(key, value);
        }
        Ok(&self.cache[&key])
    }
}

fn multi_indices(dim: usize, degree: u32) -> Vec<Mono> {
    MultiIndex::of_degree(dim, degree)
        .into_iter()
        .map(|m| {
            let mut out = [0; MAX_SYMBOL_DIM];
            for (o, &e) in out.iter_mut().zip(m.exponents()) {
                *o = e as u8;
            }
            out
        })
        .collect()
}

/// Order-`m` component of `A∘B` from the components currently present.
fn product_component(
    a: &BTreeMap<i32, SymbolComponent>,
    b: &BTreeMap<i32, SymbolComponent>,
    m: i32,
    jet_order: usize,
    dim: usize,
    a_cache: &mut DerivativeCache<'_>,
    b_cache: &mut DerivativeCache<'_>,
) -> Result<SymbolComponent> {
    let mut out = SymbolComponent::empty(m);
    for (&ma, ca) in a.iter().rev() {
        for (&mb, cb) in b.iter().rev() {
            let k = ma + mb - m;
            if k < 0 {
                continue;
            }
            for alpha in multi_indices(dim, k as u32) {
                let fact: f64 = alpha.iter().map(|&e| factorial(u32::from(e))).product();
                // (1/α!)(−i)^{|α|}
                let phase = match k % 4 {
                    0 => C1,
                    1 => Complex64::new(0.0, -1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, 1.0),
                };
                let scale = phase / fact;
                let da = a_cache.get(ca, alpha)?.clone();
                let db = b_cache.get(cb, alpha)?;
                da.product(db, jet_order, &mut out, scale)?;
            }
        }
    }
    Ok(out)
}

/// Asymptotic composition `σ(A∘B)` down to `cutoff`.
pub fn compose(a: &GradedSymbol, b: &GradedSymbol, cutoff: i32) -> Result<GradedSymbol> {
    a.check_pair(b)?;
    let max_order = a.max_order + b.max_order;
    let budget = a.budget.min(b.budget);
    if cutoff > max_order {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff} above the top order {max_order}"
        )));
    }
    let required = (max_order - cutoff) as usize;
    if required > budget {
        return Err(Error::Budget {
            required,
            available: budget,
        });
    }
    for (s, other) in [(a, b), (b, a)] {
        let needed = cutoff - other.max_order;
        if !s.complete && s.cutoff > needed {
            return Err(Error::Truncation {
                required: needed,
                available: s.cutoff,
            });
        }
    }
    let dim = a.dim();
    let mut a_cache = DerivativeCache::new(&a.quad, true);
    let mut b_cache = DerivativeCache::new(&b.quad, false);
    let mut components = BTreeMap::new();
    for m in (cutoff..=max_order).rev() {
        let jet_order = budget - (max_order - m) as usize;
        let c = product_component(&a.components, &b.components, m, jet_order, dim, &mut a_cache, &mut b_cache)?;
        components.insert(m, c);
    }
    let polynomial = |s: &GradedSymbol| s.components.values().all(|c| c.terms.keys().all(|(q, _)| *q == 0));
    let complete = a.complete && b.complete && polynomial(a) && polynomial(b) && cutoff <= 0;
    Ok(GradedSymbol {
        rank: a.rank,
        quad: if a.quad.order() >= b.quad.order() { a.quad.clone() } else { b.quad.clone() },
        budget,
        max_order,
        cutoff,
        complete,
        components,
    })
}

/// Complete symbol of `Δ` at `x0` with jet budget `jet_order`:
/// `σ₂ = Q·Id`, `σ₁ = −i b^k ξ_k`, `σ₀ = −c`.
pub fn laplacian_symbol(op: &GeneralizedLaplacian, x0: &[f64], jet_order: usize) -> Result<GradedSymbol> {
    let n = op.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let base: BasePoint = Arc::from(x0);
    let jets = op.coefficient_jets(&base, jet_order)?;
    let r = op.rank();
    let quad = QuadraticForm::new(jets.inverse_metric.clone())?;
    let mut c2 = SymbolComponent::empty(2);
    for i in 0..n {
        for j in i..n {
            let g = &jets.inverse_metric[i * n + j];
            if g.max_abs() == 0.0 {
                continue;
            }
            let mult = if i == j { 1.0 } else { 2.0 };
            let key = (0, mono_add(&mono_unit(i), &mono_unit(j)));
            c2.add_term(key, JetMatrix::from_scalar_jet(g, r), Complex64::new(mult, 0.0))?;
        }
    }
    let mut c1 = SymbolComponent::empty(1);
    for (k, b) in jets.first_order.iter().enumerate() {
        if b.max_abs() > 0.0 {
            c1.add_term((0, mono_unit(k)), b.clone(), Complex64::new(0.0, -1.0))?;
        }
    }
    let mut c0 = SymbolComponent::empty(0);
    if jets.zeroth_order.max_abs() > 0.0 {
        c0.add_term((0, [0; MAX_SYMBOL_DIM]), jets.zeroth_order.clone(), Complex64::new(-1.0, 0.0))?;
    }
    Ok(GradedSymbol {
        rank: r,
        quad,
        budget: jet_order,
        max_order: 2,
        cutoff: 0,
        complete: true,
        components: BTreeMap::from([(2, c2), (1, c1), (0, c0)]),
    })
}

fn is_laplace_type(s: &GradedSymbol) -> bool {
    if s.max_order != 2 || !s.complete {
        return false;
    }
    let Some(top) = s.component(2) else {
        return false;
    };
    let n = s.dim();
    let r = s.rank;
    // σ₂ must equal Q · Id.
    let mut expected = SymbolComponent::empty(2);
    for i in 0..n {
        for j in i..n {
            let g = &s.quad.inverse_metric[i * n + j];
            if g.max_abs() == 0.0 {
                continue;
            }
            let mult = if i == j { 1.0 } else { 2.0 };
            let key = (0, mono_add(&mono_unit(i), &mono_unit(j)));
            let _ = expected.add_term(key, JetMatrix::from_scalar_jet(g, r), Complex64::new(mult, 0.0));
        }
    }
    top.terms.len() == expected.terms.len()
        && top.terms.iter().all(|(k, v)| {
            expected.terms.get(k).is_some_and(|e| {
                let o = v.order().min(e.order());
                v.truncate(o).try_sub(&e.truncate(o)).map(|d| d.max_abs() < 1e-13).unwrap_or(false)
            })
        })
}

/// Left parametrix `q` with `σ(q∘Δ) = Id` through order `cutoff + 2`.
pub fn parametrix(sigma: &GradedSymbol, cutoff: i32) -> Result<GradedSymbol> {
    if cutoff > -2 {
        return Err(Error::InvalidInput(format!("parametrix cutoff {cutoff} > −2")));
    }
    if !is_laplace_type(sigma) {
        return Err(Error::Incompatible(
            "parametrix needs a complete Laplace-type symbol with principal part Q·Id".into(),
        ));
    }
    let budget = sigma.budget;
    let required = (-2 - cutoff) as usize;
    if required > budget {
        return Err(Error::Budget {
            required,
            available: budget,
        });
    }
    let dim = sigma.dim();
    let r = sigma.rank;
    let quad = sigma.quad.clone();
    let mut q_parts: BTreeMap<i32, SymbolComponent> = BTreeMap::new();
    let mut lead = SymbolComponent::empty(-2);
    lead.terms.insert((1, [0; MAX_SYMBOL_DIM]), JetMatrix::identity(quad.base.clone(), budget, r)?);
    q_parts.insert(-2, lead);
    let mut a_cache = DerivativeCache::new(&quad, true);
    let mut b_cache = DerivativeCache::new(&quad, false);
    for j in 1..=required {
        let m = -(j as i32);
        let jet_order = budget - j;
        // Everything at order −j except q_{−2−j}·σ₂, which is what we solve for.
        let rest = product_component(&q_parts, &sigma.components, m, jet_order, dim, &mut a_cache, &mut b_cache)?;
        let next = rest.divide_by_q().scale(Complex64::new(-1.0, 0.0)).truncate_jets(jet_order);
        q_parts.insert(m - 2, next);
    }
    Ok(GradedSymbol {
        rank: r,
        quad,
        budget,
        max_order: -2,
        cutoff,
        complete: false,
        components: q_parts,
    })
}

/// Symbol of `Δ^{−m}` at `x0` down to `cutoff`, as `m − 1` compositions of
/// the parametrix with itself.
pub fn negative_power_symbol(
    op: &GeneralizedLaplacian,
    m: u32,
    x0: &[f64],
    cutoff: i32,
    jet_order: usize,
) -> Result<GradedSymbol> {
    if m == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    let top = -2 * m as i32;
    if cutoff > top {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff} above the leading order {top}"
        )));
    }
    let sigma = laplacian_symbol(op, x0, jet_order)?;
    negative_power_from_symbol(&sigma, m, cutoff)
}

/// [`negative_power_symbol`] starting from an already computed `σ(Δ)`.
pub fn negative_power_from_symbol(sigma: &GradedSymbol, m: u32, cutoff: i32) -> Result<GradedSymbol> {
    if m == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    let q = parametrix(sigma, cutoff + 2 * (m as i32 - 1))?;
    let mut acc = q.clone();
    for k in 2..=m {
        let c = cutoff + 2 * (m as i32 - k as i32);
        acc = compose(&acc, &q, c)?;
    }
    Ok(acc)
}

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wres_core::geometry::MetricField;
use wres_core::jet::{BasePoint, Jet, JetMatrix};
use wres_core::laplacian::GeneralizedLaplacian;
use wres_core::symbol::{compose, laplacian_symbol, parametrix, GradedSymbol, QuadraticForm};
use wres_core::trig::{TrigMatrix, TrigPoly};

const JETS: usize = 8;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rank-2 connection Laplacian with random lower-order terms on a random
/// conformal T².
fn random_operator(seed: u64) -> GeneralizedLaplacian {
    let mut r = rng(seed);
    let g = MetricField::conformal(2, TrigPoly::random(2, 2, 3, 0.15, &mut r)).unwrap();
    let w = (0..2).map(|_| TrigMatrix::random_skew(2, 2, 1, 2, 0.3, &mut r)).collect();
    let p = TrigMatrix::random(2, 2, 1, 2, 0.4, &mut r);
    GeneralizedLaplacian::from_connection(g, 2, w, p, 0.0).unwrap()
}

fn point(seed: u64) -> Vec<f64> {
    let mut r = rng(seed ^ 0xabc);
    vec![r.gen_range(0.0..6.28), r.gen_range(0.0..6.28)]
}

/// Random covectors. Residuals that vanish exactly are compared at
/// `|ξ| = 1`; at short ξ a component of order −k amplifies roundoff by `|ξ|^{−k}`.
fn covectors(seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed ^ 0x77);
    (0..4).map(|_| vec![r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5)]).collect()
}

fn unit_covectors(seed: u64) -> Vec<Vec<f64>> {
    covectors(seed)
        .into_iter()
        .map(|xi| {
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            xi.iter().map(|v| v / norm).collect()
        })
        .collect()
}

/// Random first-order differential operator sharing `quad`.
fn random_first_order(quad: &Arc<QuadraticForm>, seed: u64, budget: usize) -> GradedSymbol {
    let mut r = rng(seed ^ 0x1f);
    let base: BasePoint = quad.base_point().clone();
    let coeffs: Vec<JetMatrix> = (0..2)
        .map(|_| TrigMatrix::random(2, 2, 1, 2, 0.5, &mut r).jet(&base, budget).unwrap())
        .collect();
    let c0 = TrigMatrix::random(2, 2, 1, 2, 0.5, &mut r).jet(&base, budget).unwrap();
    GradedSymbol::first_order_operator(quad.clone(), &coeffs, &c0, budget).unwrap()
}

fn eval(s: &GradedSymbol, m: i32, xi: &[f64]) -> DMatrix<Complex64> {
    match s.component(m) {
        Some(_) => s.evaluate_component(m, xi).unwrap(),
        None => DMatrix::zeros(s.rank(), s.rank()),
    }
}

fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parametrix_is_two_sided(seed in 0u64..10_000) {
        let op = random_operator(seed);
        let sigma = laplacian_symbol(&op, &point(seed), JETS).unwrap();
        let cutoff = -6;
        let q = parametrix(&sigma, cutoff).unwrap();
        let guaranteed = cutoff + 2;
        let left = compose(&q, &sigma, guaranteed).unwrap();
        let right = compose(&sigma, &q, guaranteed).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        for xi in unit_covectors(seed) {
            for prod in [&left, &right] {
                prop_assert!(max_norm(&(eval(prod, 0, &xi) - &id)) < 1e-10);
                for m in guaranteed..0 {
                    let r = max_norm(&eval(prod, m, &xi));
                    prop_assert!(r < 1e-10, "order {m}: residual {r:e}");
                }
            }
        }
    }

    #[test]
    fn components_are_homogeneous(seed in 0u64..10_000) {
        let op = random_operator(seed);
        let sigma = laplacian_symbol(&op, &point(seed), JETS).unwrap();
        let q = parametrix(&sigma, -6).unwrap();
        let b = random_first_order(sigma.quadratic_form(), seed, JETS);
        let qb = compose(&q, &b, -5).unwrap();
        for s in [&sigma, &q, &qb] {
            for c in s.components() {
                let m = c.order();
                for xi in covectors(seed) {
                    let base = eval(s, m, &xi);
                    for lambda in [2.0f64, 3.0] {
                        let scaled: Vec<f64> = xi.iter().map(|v| v * lambda).collect();
                        let expected = &base * Complex64::new(lambda.powi(m), 0.0);
                        let err = max_norm(&(eval(s, m, &scaled) - &expected));
                        prop_assert!(err <= 1e-12 * max_norm(&expected).max(1e-300), "order {m}, λ = {lambda}: {err:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn composition_is_associative(seed in 0u64..10_000) {
        let op = random_operator(seed);
        let sigma = laplacian_symbol(&op, &point(seed), JETS).unwrap();
        // Orders 1, −2 and 1; none of the products collapses to a known symbol.
        let a = random_first_order(sigma.quadratic_form(), seed, JETS);
        let b = parametrix(&sigma, -7).unwrap();
        let c = random_first_order(sigma.quadratic_form(), seed + 1, JETS);
        let cutoff = -5;
        let left = compose(&compose(&a, &b, cutoff - 1).unwrap(), &c, cutoff).unwrap();
        let right = compose(&a, &compose(&b, &c, cutoff - 1).unwrap(), cutoff).unwrap();
        for xi in unit_covectors(seed) {
            let scale = (cutoff..=0).map(|m| max_norm(&eval(&left, m, &xi))).fold(0.0, f64::max);
            for m in cutoff..=0 {
                let d = max_norm(&(eval(&left, m, &xi) - eval(&right, m, &xi)));
                prop_assert!(d < 1e-10 * scale, "order {m}: {d:e} vs scale {scale:e}");
            }
        }
    }
}

#[test]
fn commutator_of_d1_and_x1_is_minus_i() {
    // σ(D₁) = ξ₁ and σ(x₁) = x₁ with D = −i∂: [D₁, x₁] = −i.
    let base: BasePoint = Arc::from(vec![0.7, 0.2]);
    let order = 3;
    let flat = |i: usize, j: usize| {
        let v = if i == j { 1.0 } else { 0.0 };
        Jet::constant(base.clone(), order, Complex64::new(v, 0.0)).unwrap()
    };
    let quad = QuadraticForm::new(vec![flat(0, 0), flat(0, 1), flat(1, 0), flat(1, 1)]).unwrap();
    let zero = JetMatrix::zero(base.clone(), order, 1).unwrap();
    let one = JetMatrix::identity(base.clone(), order, 1).unwrap();
    let d1 = GradedSymbol::first_order_operator(quad.clone(), &[one, zero.clone()], &zero, order).unwrap();
    let x1 = JetMatrix::from_scalar_jet(&Jet::coordinate(base.clone(), order, 0).unwrap(), 1);
    let x = GradedSymbol::first_order_operator(quad, &[zero.clone(), zero], &x1, order).unwrap();
    let dx = compose(&d1, &x, 0).unwrap();
    let xd = compose(&x, &d1, 0).unwrap();
    let xi = [0.4, -1.3];
    for m in [1, 0] {
        let c = eval(&dx, m, &xi) - eval(&xd, m, &xi);
        let expected = if m == 0 { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 0.0) };
        assert!((c[(0, 0)] - expected).norm() < 1e-15, "order {m}: {}", c[(0, 0)]);
    }
}

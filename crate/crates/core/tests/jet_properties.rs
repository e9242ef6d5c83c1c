use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wres_core::jet::{BasePoint, Jet, MultiIndex};
use wres_core::trig::TrigPoly;

fn base(dim: usize, seed: u64) -> BasePoint {
    let x: Vec<f64> = (0..dim).map(|i| 0.3 + 0.7 * (seed as f64 + i as f64).sin()).collect();
    Arc::from(x)
}

fn random_jet(b: &BasePoint, order: usize, coeffs: &[f64]) -> Jet {
    let mut i = 0;
    Jet::from_fn(b.clone(), order, |_| {
        let c = Complex64::new(coeffs[i % coeffs.len()], coeffs[(i + 7) % coeffs.len()] * 0.5);
        i += 1;
        c
    })
    .unwrap()
}

fn close(a: &Jet, b: &Jet, rel: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .all(|(x, y)| (x - y).norm() <= rel * scale)
}

fn jet_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(dim, order)| {
        let coeff = proptest::collection::vec(-2.0f64..2.0, 8..40);
        (Just(dim), Just(order), coeff.clone(), coeff.clone(), coeff)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative_and_distributive((dim, order, ca, cb, cc) in jet_strategy()) {
        let b = base(dim, 1);
        let (x, y, z) = (random_jet(&b, order, &ca), random_jet(&b, order, &cb), random_jet(&b, order, &cc));
        let left = &(&x * &y) * &z;
        let right = &x * &(&y * &z);
        prop_assert!(close(&left, &right, 1e-12));
        let d1 = &x * &(&y + &z);
        let d2 = &(&x * &y) + &(&x * &z);
        prop_assert!(close(&d1, &d2, 1e-12));
    }

    #[test]
    fn leibniz_rule((dim, order, ca, cb, _) in jet_strategy(), axis in 0usize..4) {
        prop_assume!(order >= 1);
        let axis = axis % dim;
        let b = base(dim, 2);
        let (x, y) = (random_jet(&b, order, &ca), random_jet(&b, order, &cb));
        let lhs = (&x * &y).partial(axis).unwrap();
        let rhs = &(&x.partial(axis).unwrap() * &y.truncate(order - 1))
            + &(&x.truncate(order - 1) * &y.partial(axis).unwrap());
        prop_assert_eq!(lhs.order(), order - 1);
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn inverse_times_jet_is_one((dim, order, ca, _, _) in jet_strategy(), c0 in 0.5f64..3.0) {
        let b = base(dim, 3);
        let mut x = random_jet(&b, order, &ca);
        // Keep the constant term away from zero.
        x = &x + &Jet::constant(b.clone(), order, Complex64::new(c0 + x.constant_term().norm(), 0.0)).unwrap();
        let one = &x.invert().unwrap() * &x;
        let expected = Jet::constant(b.clone(), order, Complex64::new(1.0, 0.0)).unwrap();
        prop_assert!(close(&one, &expected, 1e-12));
    }

    #[test]
    fn trig_jets_match_finite_differences(seed in 0u64..1000, dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = TrigPoly::random(dim, 2, 3, 1.0, &mut rng);
        let x0 = base(dim, seed);
        let jet = f.jet(&x0, 3).unwrap();
        let h = 1e-4;
        for deg in 1..=3u32 {
            for alpha in MultiIndex::of_degree(dim, deg) {
                let fd = central_difference(&f, &x0, alpha.exponents(), h);
                let exact = jet.coefficient(&alpha).re * alpha.factorial();
                // Relative, floored at 1 near zeros of the derivative.
                let scale = exact.abs().max(1.0);
                prop_assert!((fd - exact).abs() <= 1e-6 * scale, "α = {alpha}: fd {fd} vs {exact}");
            }
        }
    }
}

/// Nested central differences `Π_i δ_i^{α_i} f / h^{|α|}`, with `f`
/// evaluated in double-double so rounding does not swamp `h^{−3}`.
fn central_difference(f: &TrigPoly, x0: &[f64], alpha: &[u32], h: f64) -> f64 {
    let dim = x0.len();
    let mut total = Dd::ZERO;
    let mut idx = vec![0u32; dim];
    loop {
        let mut w = 1.0;
        let mut shift = vec![0.0; dim];
        for i in 0..dim {
            let (k, j) = (alpha[i], idx[i]);
            w *= binom(k, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
            shift[i] = f64::from(k) / 2.0 - f64::from(j);
        }
        total = total.add(eval_dd(f, x0, &shift, h).mul_f64(w));
        let mut a = 0;
        loop {
            if a == dim {
                let deg: u32 = alpha.iter().sum();
                return total.hi / h.powi(deg as i32);
            }
            idx[a] += 1;
            if idx[a] <= alpha[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// `f(x0 + shift·h)` in double-double arithmetic.
fn eval_dd(f: &TrigPoly, x0: &[f64], shift: &[f64], h: f64) -> Dd {
    let mut acc = Dd::ZERO;
    for t in f.terms() {
        let mut theta = Dd::ZERO;
        for i in 0..x0.len() {
            let k = f64::from(t.k[i]);
            // k·x0 and k·shift·h are exact products of at most two doubles.
            theta = theta.add(Dd::prod(k, x0[i])).add(Dd::prod(k * shift[i], h));
        }
        let (s, c) = theta.sin_cos();
        acc = acc.add(c.mul_f64(t.cos)).add(s.mul_f64(t.sin));
    }
    acc
}

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let v = s - a;
        Dd {
            hi: s,
            lo: (a - (s - v)) + (b - v),
        }
    }

    fn prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let s = Dd::two_sum(s.hi, s.lo + t.hi);
        Dd::two_sum(s.hi, s.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::prod(self.hi, o.hi);
        Dd::two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f64(self, x: f64) -> Dd {
        self.mul(Dd::new(x))
    }

    fn div_f64(self, x: f64) -> Dd {
        let q = self.hi / x;
        let r = self.add(Dd::prod(q, x).neg());
        Dd::two_sum(q, r.hi / x)
    }

    /// Taylor series after reduction by multiples of π/2.
    fn sin_cos(self) -> (Dd, Dd) {
        const PI_2: Dd = Dd {
            hi: std::f64::consts::FRAC_PI_2,
            lo: 6.123233995736766e-17,
        };
        let q = (self.hi / PI_2.hi).round();
        let r = self.add(PI_2.mul_f64(q).neg());
        let (mut s, mut c) = (Dd::ZERO, Dd::ZERO);
        let mut term = Dd::new(1.0);
        for n in 0..40u32 {
            match n % 4 {
                0 => c = c.add(term),
                1 => s = s.add(term),
                2 => c = c.add(term.neg()),
                _ => s = s.add(term.neg()),
            }
            term = term.mul(r).div_f64(f64::from(n + 1));
        }
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[test]
fn coordinate_jets_compose_to_polynomials() {
    let b: BasePoint = Arc::from(vec![0.5, -1.0]);
    let x = Jet::coordinate(b.clone(), 3, 0).unwrap();
    let y = Jet::coordinate(b.clone(), 3, 1).unwrap();
    // (x y)² at (0.5, −1) = 0.25; ∂_x = 2 x y² = 1.
    let p = &(&x * &y) * &(&x * &y);
    assert!((p.constant_term().re - 0.25).abs() < 1e-15);
    assert!((p.partial(0).unwrap().constant_term().re - 1.0).abs() < 1e-15);
}

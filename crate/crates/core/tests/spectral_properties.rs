use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wres_core::geometry::MetricField;
use wres_core::heat::{heat_coefficient_a0, heat_coefficient_a2};
use wres_core::laplacian::GeneralizedLaplacian;
use wres_core::spectral::{
    curved_t2_spectrum, fit_heat_coefficients, flat_torus_zeta_residue, model_spectrum, sphere_heat_coefficient,
    sphere_spectrum, sphere_zeta, sphere_zeta_residue, HeatTraceFit, SpectrumModel, SpectrumSource,
};
use wres_core::trig::{TrigMatrix, TrigPoly};

fn curved_metric(amp: f64) -> MetricField {
    MetricField::conformal(2, TrigPoly::cos_mode(vec![1, 0], amp)).unwrap()
}

/// `2π ∫ e^{2f(x₁)} dx₁` for `f` depending on `x₁` only.
fn conformal_area(amp: f64) -> f64 {
    let m = 2000;
    let line: f64 = (0..m)
        .map(|i| (2.0 * amp * (2.0 * PI * f64::from(i) / f64::from(m)).cos()).exp())
        .sum::<f64>()
        * 2.0
        * PI
        / f64::from(m);
    2.0 * PI * line
}

type FitModel = (&'static str, SpectrumModel, usize, (f64, f64));

/// `(name, spectrum, n, window)` for every model with a fitted heat trace,
/// built once since the curved spectrum is a dense eigensolve.
fn fit_models() -> &'static [FitModel] {
    static MODELS: OnceLock<Vec<FitModel>> = OnceLock::new();
    MODELS.get_or_init(|| vec![
        ("flat T²", model_spectrum(&SpectrumSource::FlatTorus { dim: 2 }, 1200.0).unwrap(), 2, (0.05, 0.5)),
        ("S²", sphere_spectrum(2, 2000).unwrap(), 2, (2e-4, 5e-3)),
        ("S⁴", sphere_spectrum(4, 2000).unwrap(), 4, (2e-4, 5e-3)),
        ("curved T²", curved_t2_spectrum(&curved_metric(0.1), 32).unwrap(), 2, (0.06, 0.5)),
    ])
}

fn fit(spec: &SpectrumModel, n: usize, window: (f64, f64), points: usize) -> HeatTraceFit {
    fit_heat_coefficients(spec, n, 4, window, points).unwrap()
}

/// Distinct values of `|k|²` with multiplicities, by enumerating the box.
fn lattice_counts(dim: usize, cutoff: i64) -> BTreeMap<i64, u64> {
    let r = (cutoff as f64).sqrt().floor() as i64;
    let side = 2 * r + 1;
    let mut out = BTreeMap::new();
    for idx in 0..side.pow(dim as u32) {
        let mut rem = idx;
        let mut norm = 0;
        for _ in 0..dim {
            let k = rem % side - r;
            rem /= side;
            norm += k * k;
        }
        if norm <= cutoff {
            *out.entry(norm).or_insert(0) += 1;
        }
    }
    out
}

#[test]
fn flat_torus_spectra_match_lattice_enumeration() {
    for (dim, cutoff) in [(2usize, 60i64), (4, 12)] {
        let spec = model_spectrum(&SpectrumSource::FlatTorus { dim }, cutoff as f64).unwrap();
        let got: BTreeMap<i64, u64> = spec.entries.iter().map(|&(l, m)| (l.round() as i64, m)).collect();
        assert_eq!(got, lattice_counts(dim, cutoff), "T^{dim}");
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn sphere_multiplicities_are_harmonic_polynomial_dimensions() {
    // dim H_l(ℝ^{n+1}) = dim P_l − dim P_{l−2}, with dim P_l = C(l + n, n).
    for n in [2usize, 3, 4] {
        let spec = sphere_spectrum(n, 30).unwrap();
        for (l, &(lambda, mult)) in spec.entries.iter().enumerate() {
            let l = l as u64;
            let p = |d: u64| binomial(d + n as u64, n as u64);
            let expected = p(l) - if l >= 2 { p(l - 2) } else { 0 };
            assert_eq!(mult, expected, "S^{n}, l = {l}");
            assert_eq!(lambda, (l * (l + n as u64 - 1)) as f64);
        }
    }
}

#[test]
fn sphere_zeta_matches_direct_sum() {
    // ζ(Δ_{S²}, 2) = Σ_{l≥1} (2l + 1)/(l(l + 1))², tail bounded by 1/L³.
    let direct: f64 = (1..=200_000u64)
        .map(|l| {
            let l = l as f64;
            (2.0 * l + 1.0) / (l * (l + 1.0)).powi(2)
        })
        .sum();
    let z = sphere_zeta(2, 2.0, 30).unwrap();
    assert!((z - direct).abs() < 1e-10, "{z} vs {direct}");
}

#[test]
fn sphere_zeta_residues_match_pole_behaviour() {
    // ε·(ζ(s₀ + ε) − ζ(s₀ − ε))/2 → Res as ε → 0, with an O(ε²) error.
    for (n, k) in [(2usize, 0u32), (4, 0), (4, 2)] {
        let s0 = (n as f64 - k as f64) / 2.0;
        let eps = 1e-4;
        let numeric = eps * (sphere_zeta(n, s0 + eps, 30).unwrap() - sphere_zeta(n, s0 - eps, 30).unwrap()) / 2.0;
        let res = sphere_zeta_residue(n, k, 8).unwrap();
        assert!((numeric - res).abs() < 1e-6, "(n, k) = ({n}, {k}): {numeric} vs {res}");
        // aₖ/Γ((n − k)/2) with Γ(1) = Γ(2) = 1.
        assert!((res - sphere_heat_coefficient(n, k).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn flat_torus_zeta_residue_is_half_the_sphere_area() {
    // Σ'|k|^{−2s} behaves like ∫_{|x|>1} |x|^{−2s} dx = vol(S^{n−1})/(2s − n).
    for (n, area) in [(2usize, 2.0 * PI), (4, 2.0 * PI * PI)] {
        let res = flat_torus_zeta_residue(n).unwrap();
        assert!((res - area / 2.0).abs() < 1e-12 * area, "n = {n}: {res}");
    }
}

#[test]
fn odd_heat_coefficients_vanish() {
    for (name, spec, n, window) in fit_models() {
        let f = fit(spec, *n, *window, 32);
        for k in [1, 3] {
            assert!(f.coefficient(k).abs() < 0.01, "{name}: a{k} = {:e}", f.coefficient(k));
        }
    }
}

#[test]
fn fitted_a0_is_stable_under_doubling() {
    for (name, spec, n, window) in fit_models() {
        let (n, window) = (*n, *window);
        let base = fit(spec, n, window, 32);
        let variants = [
            ("points", fit(spec, n, window, 64)),
            ("window", fit(spec, n, (window.0, 2.0 * window.1), 32)),
        ];
        for (what, f) in variants {
            let delta = (f.coefficient(0) - base.coefficient(0)).abs();
            let u = base.uncertainties[&0].max(f.uncertainties[&0]);
            assert!(delta < 2.0 * u, "{name}, {what} doubled: Δa0 = {delta:e}, uncertainty {u:e}");
        }
    }
}

#[test]
fn fitted_a0_matches_weyl_volume() {
    let targets = [PI, 1.0, sphere_heat_coefficient(4, 0).unwrap(), conformal_area(0.1) / (4.0 * PI)];
    for ((name, spec, n, window), target) in fit_models().iter().zip(targets) {
        let a0 = fit(spec, *n, *window, 32).coefficient(0);
        assert!((a0 - target).abs() < 1e-3 * target, "{name}: {a0} vs {target}");
    }
}

#[test]
fn curved_spectrum_is_non_negative_with_one_zero_mode() {
    let spec = curved_t2_spectrum(&curved_metric(0.2), 24).unwrap();
    assert_eq!(spec.mode_count(), 24 * 24);
    assert_eq!(spec.zero_mode_count, 1);
    let (first, _) = spec.entries[0];
    assert!(first.abs() < 1e-9, "lowest eigenvalue {first}");
    assert!(spec.entries.iter().skip(1).all(|&(l, _)| l > 0.1));
}

#[test]
fn curved_spectrum_converges_with_grid() {
    // Low modes are resolved at 24 points per axis already.
    let coarse = curved_t2_spectrum(&curved_metric(0.1), 24).unwrap();
    let fine = &fit_models()[3].1;
    let expand = |s: &SpectrumModel| -> Vec<f64> {
        s.entries.iter().flat_map(|&(l, m)| std::iter::repeat(l).take(m as usize)).take(20).collect()
    };
    for (a, b) in expand(&coarse).iter().zip(expand(fine)) {
        assert!((a - b).abs() < 1e-8 * b.max(1.0), "{a} vs {b}");
    }
}

#[test]
fn curved_counting_function_follows_weyl_law() {
    // N(λ) ≈ Area·λ/(4π) well below the grid cutoff.
    let spec = &fit_models()[3].1;
    let area = conformal_area(0.1);
    for lambda in [60.0, 100.0] {
        let predicted = area * lambda / (4.0 * PI);
        let n = spec.counting_function(lambda) as f64;
        assert!((n - predicted).abs() < 0.1 * predicted, "N({lambda}) = {n} vs {predicted}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn heat_coefficients_ignore_the_connection(seed in 0u64..10_000) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let amp = 0.15;
        let g = curved_metric(amp);
        let p = TrigMatrix::random(2, 2, 1, 2, 0.5, &mut r);
        let ops: Vec<GeneralizedLaplacian> = (0..2)
            .map(|_| {
                let w = (0..2).map(|_| TrigMatrix::random_skew(2, 2, 2, 3, 0.4, &mut r)).collect();
                GeneralizedLaplacian::from_connection(g.clone(), 2, w, p.clone(), 0.0).unwrap()
            })
            .collect();
        // ∫ r = 0 on T², so a₂ = (4π)^{−1} ∫ tr P dvol.
        let m = 64;
        let h = 2.0 * PI / f64::from(m);
        let mut direct = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = [f64::from(i) * h, f64::from(j) * h];
                direct += p.eval(&x).trace() * (2.0 * amp * x[0].cos()).exp() * h * h;
            }
        }
        direct /= 4.0 * PI;
        for op in &ops {
            let a0 = heat_coefficient_a0(op, 32).unwrap().value;
            prop_assert!((a0 - 2.0 * conformal_area(amp) / (4.0 * PI)).abs() < 1e-10);
            let a2 = heat_coefficient_a2(op, 32).unwrap().value;
            prop_assert!((a2 - direct).abs() < 1e-10 * direct.abs().max(1.0), "{a2} vs {direct}");
        }
    }
}

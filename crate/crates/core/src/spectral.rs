//! Spectral side: exact spectra of flat tori and round spheres, a
//! pseudospectral solver for conformal 2-tori, heat traces, asymptotic
//! coefficient fits and sphere zeta residues.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{jacobi_eigen, JacobiSettings};
use crate::error::{Error, Result};
use crate::geometry::{grid_point, pairwise_sum, MetricField};
use crate::special::{gamma_half, hurwitz_zeta, hurwitz_zeta_difference};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SpectrumSource {
    FlatTorus { dim: usize },
    Sphere { dim: usize },
    CurvedT2 { metric: MetricField, grid: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumModel {
    pub source: SpectrumSource,
    /// `(eigenvalue, multiplicity)`, ascending.
    pub entries: Vec<(f64, u64)>,
    /// Largest eigenvalue included.
    pub cutoff: f64,
    pub zero_mode_count: u64,
}

impl SpectrumModel {
    pub fn mode_count(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Number of modes with eigenvalue `≤ λ`.
    pub fn counting_function(&self, lambda: f64) -> u64 {
        self.entries.iter().take_while(|e| e.0 <= lambda).map(|e| e.1).sum()
    }
}

/// Exact spectrum up to the eigenvalue `cutoff`.
pub fn model_spectrum(source: &SpectrumSource, cutoff: f64) -> Result<SpectrumModel> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} must be positive")));
    }
    match source {
        SpectrumSource::FlatTorus { dim } => flat_torus_spectrum(*dim, cutoff),
        SpectrumSource::Sphere { dim } => {
            let n = *dim as f64;
            // Largest l with l(l + n − 1) ≤ Λ.
            let l_max = ((-(n - 1.0) + ((n - 1.0).powi(2) + 4.0 * cutoff).sqrt()) / 2.0).floor() as u64;
            sphere_spectrum(*dim, l_max)
        }
        SpectrumSource::CurvedT2 { metric, grid } => {
            let mut s = curved_t2_spectrum(metric, *grid)?;
            s.entries.retain(|e| e.0 <= cutoff);
            s.cutoff = s.entries.last().map_or(0.0, |e| e.0);
            Ok(s)
        }
    }
}

fn flat_torus_spectrum(dim: usize, cutoff: f64) -> Result<SpectrumModel> {
    if dim == 0 {
        return Err(Error::InvalidInput("torus dimension must be positive".into()));
    }
    let lmax = cutoff.floor() as usize;
    let kmax = (cutoff.sqrt().floor()) as i64;
    // counts[s] = #{k ∈ Z^d : |k|² = s}, built axis by axis.
    let mut counts = vec![0u64; lmax + 1];
    counts[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u64; lmax + 1];
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for k in -kmax..=kmax {
                let t = s + (k * k) as usize;
                if t <= lmax {
                    next[t] += c;
                }
            }
        }
        counts = next;
    }
    let entries: Vec<(f64, u64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (s as f64, c))
        .collect();
    Ok(SpectrumModel {
        source: SpectrumSource::FlatTorus { dim },
        cutoff: entries.last().map_or(0.0, |e| e.0),
        entries,
        zero_mode_count: 1,
    })
}

/// Multiplicity `(2l + n − 1)(l + n − 2)! / (l! (n − 1)!)` of `l(l + n − 1)`
/// on `Sⁿ`.
pub fn sphere_multiplicity(n: usize, l: u64) -> u64 {
    if n == 1 {
        return if l == 0 { 1 } else { 2 };
    }
    // C(l + n − 2, n − 2) computed incrementally.
    let mut binom: u128 = 1;
    for i in 1..=(n as u128 - 2) {
        binom = binom * (u128::from(l) + i) / i;
    }
    let m = (2 * u128::from(l) + n as u128 - 1) * binom / (n as u128 - 1);
    m as u64
}

/// Spectrum of the Laplacian on the unit `Sⁿ` for `l = 0..=l_max`.
pub fn sphere_spectrum(dim: usize, l_max: u64) -> Result<SpectrumModel> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("sphere dimension {dim} < 2")));
    }
    let entries: Vec<(f64, u64)> = (0..=l_max)
        .map(|l| ((l * (l + dim as u64 - 1)) as f64, sphere_multiplicity(dim, l)))
        .collect();
    Ok(SpectrumModel {
        source: SpectrumSource::Sphere { dim },
        cutoff: entries.last().map_or(0.0, |e| e.0),
        entries,
        zero_mode_count: 1,
    })
}

/// `−d²/dx²` by Fourier collocation on `n` equispaced points of the circle.
fn collocation_second_derivative(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let half = (n / 2) as i64;
    DMatrix::from_fn(n, n, |j, l| {
        let d = (j as f64 - l as f64) * h;
        let mut s = 0.0;
        for k in (-half + 1)..=half {
            s += (k * k) as f64 * (k as f64 * d).cos();
        }
        s / n as f64
    })
}

/// Collocation matrix `W K W` similar to `e^{−2f} Δ_flat`.
pub fn curved_t2_matrix(metric: &MetricField, grid: usize) -> Result<DMatrix<f64>> {
    let f = metric
        .conformal_factor()
        .ok_or_else(|| Error::Unsupported("pseudospectral solver needs a conformal metric".into()))?;
    if metric.dim() != 2 {
        return Err(Error::Unsupported(format!("curved spectrum in dimension {}", metric.dim())));
    }
    if grid < 16 || grid % 2 == 1 {
        return Err(Error::InvalidInput(format!("grid {grid} must be even and at least 16")));
    }
    let d2 = collocation_second_derivative(grid);
    let m = grid * grid;
    let w: Vec<f64> = (0..m).map(|i| (-f.eval(&grid_point(2, grid, i))).exp()).collect();
    Ok(DMatrix::from_fn(m, m, |p, q| {
        let (i1, i2) = (p / grid, p % grid);
        let (j1, j2) = (q / grid, q % grid);
        let mut k = 0.0;
        if i2 == j2 {
            k += d2[(i1, j1)];
        }
        if i1 == j1 {
            k += d2[(i2, j2)];
        }
        w[p] * k * w[q]
    }))
}

/// Numerical spectrum of `Δ_g = e^{−2f} Δ_flat` on `T²` with `g = e^{2f}δ`.
pub fn curved_t2_spectrum(metric: &MetricField, grid: usize) -> Result<SpectrumModel> {
    let a = curved_t2_matrix(metric, grid)?;
    let eig = jacobi_eigen(&a, false, JacobiSettings::default())?;
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0);
    let zero_tol = 1e-9 * top;
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &l in &eig.eigenvalues {
        if l < -zero_tol {
            return Err(Error::InvalidInput(format!("negative eigenvalue {l:e} in a Laplacian spectrum")));
        }
        values.push(if l.abs() <= zero_tol { 0.0 } else { l });
    }
    let entries = group_eigenvalues(&values, 1e-9);
    let zero_mode_count = entries.iter().filter(|e| e.0 == 0.0).map(|e| e.1).sum();
    Ok(SpectrumModel {
        source: SpectrumSource::CurvedT2 {
            metric: metric.clone(),
            grid,
        },
        cutoff: entries.last().map_or(0.0, |e| e.0),
        entries,
        zero_mode_count,
    })
}

/// Merges sorted eigenvalues that agree within `rel · max(1, λ)`.
pub fn group_eigenvalues(sorted: &[f64], rel: f64) -> Vec<(f64, u64)> {
    let mut out: Vec<(f64, u64, f64)> = Vec::new();
    for &l in sorted {
        match out.last_mut() {
            Some((first, count, sum)) if (l - *first).abs() <= rel * first.abs().max(1.0) => {
                *count += 1;
                *sum += l;
            }
            _ => out.push((l, 1, l)),
        }
    }
    out.into_iter()
        .map(|(first, c, sum)| (if first == 0.0 { 0.0 } else { sum / c as f64 }, c))
        .collect()
}

/// `Tr e^{−tΔ} = Σ m e^{−tλ}`, zero modes included.
pub fn heat_trace(spec: &SpectrumModel, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("heat time {t} must be positive")));
    }
    let terms: Vec<f64> = spec
        .entries
        .par_iter()
        .map(|&(l, m)| m as f64 * (-t * l).exp())
        .collect();
    Ok(pairwise_sum(&terms))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatTraceFit {
    pub t_grid: Vec<f64>,
    /// `k → a_k`.
    pub coefficients: BTreeMap<u32, f64>,
    /// `‖row_k(A⁺)‖·‖r‖`: how far a data perturbation as large as the
    /// weighted residual can move `a_k`. The heat trace is deterministic, so
    /// the residual is truncation bias rather than noise and is not divided
    /// by the degrees of freedom.
    pub uncertainties: BTreeMap<u32, f64>,
    /// RMS of the weighted residual.
    pub residual_norm: f64,
    /// Weyl-law estimate of the truncated heat trace at `t_min`, weighted by
    /// `t_min^{n/2}` so it is comparable to a coefficient.
    pub tail_bound: f64,
}

impl HeatTraceFit {
    pub fn coefficient(&self, k: u32) -> f64 {
        self.coefficients.get(&k).copied().unwrap_or(0.0)
    }
}

/// `∫_Λ^∞ e^{−tλ} dN(λ)` for `N(λ) = C λ^{n/2}`.
fn weyl_tail(c: f64, n: usize, lambda: f64, t: f64) -> f64 {
    // C (n/2) ∫_Λ^∞ λ^{n/2 − 1} e^{−tλ} dλ; for even n the incomplete gamma
    // is a finite sum.
    let h = n / 2;
    if n % 2 == 0 && h >= 1 {
        // ∫_Λ^∞ λ^{h−1} e^{−tλ} = e^{−tΛ} Σ_{j<h} (h−1)!/(h−1−j)! Λ^{h−1−j} / t^{j+1}
        let mut s = 0.0;
        let mut fall = 1.0;
        for j in 0..h {
            s += fall * lambda.powi((h - 1 - j) as i32) / t.powi(j as i32 + 1);
            fall *= (h - 1 - j) as f64;
        }
        c * h as f64 * (-t * lambda).exp() * s
    } else {
        // Crude bound via λ^{n/2−1} ≤ Λ^{n/2−1} e^{(n/2)(λ−Λ)/Λ}.
        let rate = t - (n as f64 / 2.0) / lambda;
        c * (n as f64 / 2.0) * lambda.powf(n as f64 / 2.0 - 1.0) * (-t * lambda).exp() / rate.max(1e-300)
    }
}

/// Weighted least-squares fit of `Σ_{k ≤ K} a_k t^{(k−n)/2}` to the heat
/// trace on `points` log-spaced times in `window`, weights `t^{n/2}`.
pub fn fit_heat_coefficients(
    spec: &SpectrumModel,
    n: usize,
    k_max: u32,
    window: (f64, f64),
    points: usize,
) -> Result<HeatTraceFit> {
    let (t_min, t_max) = window;
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::InvalidInput(format!("bad fit window [{t_min}, {t_max}]")));
    }
    if k_max > 4 {
        return Err(Error::Unsupported(format!("fit order K = {k_max} > 4")));
    }
    if points < (2 * k_max as usize).max(k_max as usize + 1) {
        return Err(Error::InvalidInput(format!("{points} points too few for K = {k_max}")));
    }
    let lambda = spec.cutoff;
    if lambda * t_min < 30.0 {
        return Err(Error::FitInvalid(format!(
            "Λ·t_min = {:.3} < 30; raise the cutoff or t_min",
            lambda * t_min
        )));
    }
    let t_grid: Vec<f64> = (0..points)
        .map(|i| (t_min.ln() + (t_max / t_min).ln() * i as f64 / (points - 1) as f64).exp())
        .collect();
    let cols = k_max as usize + 1;
    let half_n = n as f64 / 2.0;
    let mut a = DMatrix::zeros(points, cols);
    let mut b = DVector::zeros(points);
    for (i, &t) in t_grid.iter().enumerate() {
        for k in 0..cols {
            // t^{n/2} · t^{(k − n)/2}
            a[(i, k)] = t.powf(k as f64 / 2.0);
        }
        b[i] = t.powf(half_n) * heat_trace(spec, t)?;
    }
    // Column scaling keeps the normal equations well conditioned.
    let scales: Vec<f64> = (0..cols).map(|k| a.column(k).norm()).collect();
    for (k, s) in scales.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::FitInvalid(format!("least squares failed: {e}")))?;
    let resid = &b - &a * &x;
    let misfit = resid.norm();
    let residual_norm = (resid.norm_squared() / points as f64).sqrt();
    // Row norms of A⁺ = V Σ⁻¹ Uᵀ.
    let v = svd.v_t.as_ref().expect("requested").transpose();
    let mut coefficients = BTreeMap::new();
    let mut uncertainties = BTreeMap::new();
    for k in 0..cols {
        let mut var = 0.0;
        for (j, s) in svd.singular_values.iter().enumerate() {
            if *s > 0.0 {
                var += (v[(k, j)] / s).powi(2);
            }
        }
        coefficients.insert(k as u32, x[k] / scales[k]);
        uncertainties.insert(k as u32, misfit * var.sqrt() / scales[k]);
    }
    // Weyl constant from the computed spectrum.
    let count = spec.mode_count() as f64;
    let c = count / lambda.powf(half_n);
    let tail_bound = t_min.powf(half_n) * weyl_tail(c, n, lambda, t_min);
    let fit = HeatTraceFit {
        t_grid,
        coefficients,
        uncertainties,
        residual_norm,
        tail_bound,
    };
    let a0 = fit.coefficient(0).abs();
    if fit.tail_bound > 0.1 * a0 {
        return Err(Error::FitInvalid(format!(
            "tail bound {:e} exceeds 10% of |a0| = {a0:e}",
            fit.tail_bound
        )));
    }
    Ok(fit)
}

/// Coefficients `m_p` of the multiplicity `Σ_p m_p μ^p`, with
/// `μ = l + (n − 1)/2`.
fn sphere_multiplicity_poly(n: usize) -> Result<Vec<f64>> {
    match n {
        2 => Ok(vec![0.0, 2.0]),
        4 => Ok(vec![0.0, -1.0 / 12.0, 0.0, 1.0 / 3.0]),
        _ => Err(Error::Unsupported(format!("sphere zeta for n = {n}"))),
    }
}

fn generalized_binomial(s: f64, j: usize) -> f64 {
    // C(s + j − 1, j) = s(s+1)…(s+j−1)/j!
    let mut v = 1.0;
    for i in 0..j {
        v *= (s + i as f64) / (i as f64 + 1.0);
    }
    v
}

/// `Res_{s=(n−k)/2} ζ(Δ_{Sⁿ}, s)` from the Hurwitz expansion
/// `λ_l^{−s} = Σ_j C(s+j−1, j) c^{2j} μ^{−2s−2j}`, `λ_l = μ² − c²`.
pub fn sphere_zeta_residue(n: usize, k: u32, j_max: usize) -> Result<f64> {
    if !matches!((n, k), (2, 0) | (4, 0) | (4, 2)) {
        return Err(Error::Unsupported(format!("sphere zeta residue for (n, k) = ({n}, {k})")));
    }
    if j_max < 2 {
        return Err(Error::InvalidInput("j_max must be at least 2".into()));
    }
    let m = sphere_multiplicity_poly(n)?;
    let c = (n as f64 - 1.0) / 2.0;
    let s0 = (n as f64 - k as f64) / 2.0;
    let mut res = 0.0;
    for j in 0..=j_max {
        for (p, mp) in m.iter().enumerate() {
            // Pole where 2s0 + 2j − p = 1.
            if (2.0 * s0 + 2.0 * j as f64 - p as f64 - 1.0).abs() < 1e-12 {
                res += generalized_binomial(s0, j) * c.powi(2 * j as i32) * mp * 0.5;
            }
        }
    }
    Ok(res)
}

/// `ζ(Δ_{Sⁿ}, s)` (zero mode excluded) from the same expansion, truncated at
/// `j_max`; for diagnostics.
pub fn sphere_zeta(n: usize, s: f64, j_max: usize) -> Result<f64> {
    let m = sphere_multiplicity_poly(n)?;
    let c = (n as f64 - 1.0) / 2.0;
    let mut total = 0.0;
    for j in 0..=j_max {
        let coef = generalized_binomial(s, j) * c.powi(2 * j as i32);
        for (p, mp) in m.iter().enumerate() {
            if *mp == 0.0 {
                continue;
            }
            total += coef * mp * hurwitz_zeta(2.0 * s + 2.0 * j as f64 - p as f64, 1.0 + c)?;
        }
    }
    Ok(total)
}

/// `Res_{s=n/2} ζ(Δ_{Tⁿ}, s)` for the flat `Tⁿ = Rⁿ/2πZⁿ`, `n ∈ {2, 4}`, from
/// the sum-of-squares generating functions
/// `Σ' |k|^{−2s} = 4 ζ(s) β(s)` (n = 2) and `8(1 − 4^{1−s}) ζ(s) ζ(s−1)`
/// (n = 4), with `β(1)` and `ζ(2)` from Hurwitz sums.
pub fn flat_torus_zeta_residue(n: usize) -> Result<f64> {
    match n {
        2 => Ok(4.0 * hurwitz_zeta_difference(1.0, 0.25, 0.75)? / 4.0),
        4 => Ok(8.0 * 0.75 * hurwitz_zeta(2.0, 1.0)?),
        _ => Err(Error::Unsupported(format!("flat torus zeta residue for n = {n}"))),
    }
}

/// Closed-form `a₀ = vol(Sⁿ)/(4π)^{n/2}` and `a₂ = (4π)^{−n/2} ∫ r/6` on the
/// unit sphere, where `r = n(n − 1)`.
pub fn sphere_heat_coefficient(n: usize, k: u32) -> Result<f64> {
    let vol = 2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n as u32 + 1);
    let norm = (4.0 * PI).powf(-(n as f64) / 2.0);
    match k {
        0 => Ok(norm * vol),
        2 => Ok(norm * vol * (n * (n - 1)) as f64 / 6.0),
        _ => Err(Error::Unsupported(format!("a_{k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigPoly;

    #[test]
    fn flat_t2_lattice_counts() {
        let s = model_spectrum(&SpectrumSource::FlatTorus { dim: 2 }, 4.0).unwrap();
        assert_eq!(s.entries, vec![(0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4)]);
        assert_eq!(s.mode_count(), 13);
    }

    fn divisor_sum(m: u64, keep: impl Fn(u64) -> bool) -> u64 {
        (1..=m).filter(|d| m % d == 0 && keep(*d)).sum::<u64>()
    }

    #[test]
    fn lattice_multiplicities_match_sum_of_squares_theorems() {
        let s2 = model_spectrum(&SpectrumSource::FlatTorus { dim: 2 }, 200.0).unwrap();
        for &(l, m) in &s2.entries[1..] {
            let l = l as u64;
            let d1 = (1..=l).filter(|d| l % d == 0 && d % 4 == 1).count() as u64;
            let d3 = (1..=l).filter(|d| l % d == 0 && d % 4 == 3).count() as u64;
            assert_eq!(m, 4 * (d1 - d3), "r2({l})");
        }
        let s4 = model_spectrum(&SpectrumSource::FlatTorus { dim: 4 }, 200.0).unwrap();
        assert_eq!(s4.entries.len(), 201);
        for &(l, m) in &s4.entries[1..] {
            let l = l as u64;
            assert_eq!(m, 8 * divisor_sum(l, |d| d % 4 != 0), "r4({l})");
        }
    }

    #[test]
    fn flat_zeta_residues() {
        assert!((flat_torus_zeta_residue(2).unwrap() - PI).abs() < 1e-13);
        assert!((flat_torus_zeta_residue(4).unwrap() - PI * PI).abs() < 1e-12);
        assert!(flat_torus_zeta_residue(3).is_err());
    }

    #[test]
    fn sphere_low_modes() {
        let s2 = sphere_spectrum(2, 3).unwrap();
        assert_eq!(s2.entries[1], (2.0, 3));
        let s4 = sphere_spectrum(4, 3).unwrap();
        assert_eq!(s4.entries[1], (4.0, 5));
        assert_eq!(sphere_multiplicity(4, 2), 14);
        let m = model_spectrum(&SpectrumSource::Sphere { dim: 2 }, 6.0).unwrap();
        assert_eq!(m.entries.last().unwrap().0, 6.0);
    }

    #[test]
    fn theta_square_identity() {
        let s = model_spectrum(&SpectrumSource::FlatTorus { dim: 2 }, 2000.0).unwrap();
        let t = 1.0;
        let theta: f64 = (-50i64..=50).map(|m| (-t * (m * m) as f64).exp()).sum();
        assert!((heat_trace(&s, t).unwrap() - theta * theta).abs() < 1e-13);
        assert!((heat_trace(&s, 60.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_torus_fit() {
        let s = model_spectrum(&SpectrumSource::FlatTorus { dim: 2 }, 2000.0).unwrap();
        let fit = fit_heat_coefficients(&s, 2, 4, (0.05, 0.5), 24).unwrap();
        assert!((fit.coefficient(0) - PI).abs() < 1e-3);
        assert!(fit.coefficient(1).abs() < 1e-3);
        assert!(fit.coefficient(2).abs() < 1e-3);
    }

    #[test]
    fn fit_rejects_short_spectrum() {
        let s = model_spectrum(&SpectrumSource::FlatTorus { dim: 2 }, 100.0).unwrap();
        assert!(matches!(
            fit_heat_coefficients(&s, 2, 4, (0.05, 0.5), 24),
            Err(Error::FitInvalid(_))
        ));
    }

    #[test]
    fn sphere_residues() {
        assert!((sphere_zeta_residue(2, 0, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!((sphere_zeta_residue(4, 0, 4).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((sphere_zeta_residue(4, 2, 4).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(sphere_zeta_residue(3, 0, 4).is_err());
        assert!((sphere_heat_coefficient(2, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((sphere_heat_coefficient(2, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((sphere_heat_coefficient(4, 0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((sphere_heat_coefficient(4, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_zeta_matches_direct_sum() {
        for (n, s) in [(2, 3.0), (4, 4.0)] {
            let spec = sphere_spectrum(n, 20000).unwrap();
            let direct: f64 = spec.entries[1..].iter().map(|(l, m)| *m as f64 * l.powf(-s)).sum();
            let h = sphere_zeta(n, s, 30).unwrap();
            assert!((h - direct).abs() < 1e-8 * direct, "n={n}: {h} vs {direct}");
        }
    }

    #[test]
    fn flat_collocation_spectrum() {
        let g = MetricField::conformal(2, TrigPoly::zero(2)).unwrap();
        let s = curved_t2_spectrum(&g, 16).unwrap();
        assert_eq!(s.zero_mode_count, 1);
        // Every eigenvalue is a sum of two squares from the resolved band.
        for (l, _) in &s.entries {
            let r = l.round();
            assert!((l - r).abs() < 1e-10);
        }
        assert_eq!(s.entries[1].1, 4);
        let skew = MetricField::general(
            2,
            vec![TrigPoly::constant(2, 1.0), TrigPoly::constant(2, 0.1), TrigPoly::constant(2, 0.1), TrigPoly::constant(2, 1.0)],
        )
        .unwrap();
        assert!(matches!(curved_t2_spectrum(&skew, 16), Err(Error::Unsupported(_))));
        assert!(curved_t2_spectrum(&g, 15).is_err());
    }
}

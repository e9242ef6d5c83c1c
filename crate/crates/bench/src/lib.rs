//! Fixtures shared by the benchmarks.

use wres_core::geometry::MetricField;
use wres_core::laplacian::GeneralizedLaplacian;
use wres_core::trig::TrigPoly;

/// `e^{2f}δ` with `f = amplitude·cos x₁`.
pub fn conformal_metric(dim: usize, amplitude: f64) -> MetricField {
    let mut k = vec![0; dim];
    k[0] = 1;
    MetricField::conformal(dim, TrigPoly::cos_mode(k, amplitude)).expect("positive conformal factor")
}

/// Scalar Laplace–Beltrami operator of [`conformal_metric`].
pub fn conformal_laplacian(dim: usize, amplitude: f64) -> GeneralizedLaplacian {
    GeneralizedLaplacian::laplace_beltrami(conformal_metric(dim, amplitude), 1)
}

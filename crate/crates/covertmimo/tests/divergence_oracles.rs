//! Independent oracles for the divergence module: the dense covariance
//! formula evaluated with explicit 2x2 complex algebra, and numerical
//! quadrature of the scalar densities.

use covertmimo::channel::{worst_case_willie_channel, ChannelMatrix, SystemConfig};
use covertmimo::divergence::{kl_isotropic, kl_willie};
use covertmimo::linalg::CMatrix;
use covertmimo::rng::{standard_complex_gaussian, stream};
use num_complex::Complex64;

/// `D(P0 || P1) = ln det(S1 S0^{-1}) + tr(S1^{-1} S0) - 2` for 2x2 complex
/// covariances, via explicit inverses and determinants.
fn dense_kl_2x2(s0: &CMatrix, s1: &CMatrix) -> f64 {
    let det = |m: &CMatrix| -> Complex64 { m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] };
    let inv = |m: &CMatrix| -> CMatrix {
        let d = det(m);
        let mut out = CMatrix::zeros(2, 2);
        out[(0, 0)] = m[(1, 1)] / d;
        out[(0, 1)] = -m[(0, 1)] / d;
        out[(1, 0)] = -m[(1, 0)] / d;
        out[(1, 1)] = m[(0, 0)] / d;
        out
    };
    let ratio = det(s1) / det(s0);
    let prod = inv(s1).mul(s0);
    (ratio.norm()).ln() + (prod[(0, 0)] + prod[(1, 1)]).re - 2.0
}

#[test]
fn matches_dense_formula_on_random_cases() {
    let mut rng = stream(2024, 0);
    for _ in 0..50 {
        let a = CMatrix::from_fn(2, 2, |_, _| standard_complex_gaussian(&mut rng));
        let q = a.adjoint().mul(&a);
        let hraw = CMatrix::from_fn(2, 2, |_, _| standard_complex_gaussian(&mut rng));
        let h = ChannelMatrix::new(hraw.clone()).unwrap();
        let sigma_w2 = 0.8;

        let d = kl_willie(&h, &q, sigma_w2).unwrap();

        let s0 = CMatrix::identity(2).scale(sigma_w2);
        let s1 = hraw.mul(&q).mul(&hraw.adjoint()).add(&s0);
        let dense = dense_kl_2x2(&s0, &s1);
        assert!(
            (d.total - dense).abs() <= 1e-10 * (1.0 + dense.abs()),
            "eigen route {:e} vs dense {:e}",
            d.total,
            dense
        );
    }
}

#[test]
fn scalar_value_matches_density_quadrature() {
    // The squared magnitude of a scalar circular Gaussian is exponential, so
    // D = int p0(r) ln(p0(r)/p1(r)) dr over the radial coordinate. Simpson
    // quadrature on [0, 60] with 1e6 panels is exact to ~1e-12 here.
    let (v0, v1) = (1.0f64, 2.0f64);
    let p = |v: f64, r: f64| (1.0 / v) * (-r / v).exp();
    let f = |r: f64| {
        let a = p(v0, r);
        let b = p(v1, r);
        a * (a / b).ln()
    };
    let (lo, hi, n) = (0.0f64, 60.0f64, 1_000_000usize);
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    let quadrature = acc * h / 3.0;

    let h_w = ChannelMatrix::new(CMatrix::identity(1)).unwrap();
    let d = kl_willie(&h_w, &CMatrix::identity(1), 1.0).unwrap();
    assert!(
        (d.total - quadrature).abs() < 1e-9,
        "{} vs quadrature {}",
        d.total,
        quadrature
    );
    // And both agree with the closed form ln 2 - 1/2.
    assert!((quadrature - (core::f64::consts::LN_2 - 0.5)).abs() < 1e-9);
}

#[test]
fn isotropic_consistency_through_channel_factory() {
    // kl_willie on the worst-case channel realization equals the closed form
    // for unsorted diagonal inputs as well.
    let cfg = SystemConfig {
        n_a: 3,
        n_b: 2,
        n_w: 2,
        sigma_b2: 1.0,
        sigma_w2: 0.6,
        power: 5.0,
        delta: 0.1,
        blocklength: 100,
        gamma_w: 1.7,
    };
    let h = worst_case_willie_channel(&cfg);
    let alloc = [0.3, 1.4, 0.9];
    let q = CMatrix::diagonal(&alloc);
    let generic = kl_willie(&h, &q, cfg.sigma_w2).unwrap();
    let closed = kl_isotropic(&alloc, cfg.gamma_w, cfg.sigma_w2, cfg.n_w);
    assert!((generic.total - closed.total).abs() < 1e-12);
    assert!((generic.capacity_term - closed.capacity_term).abs() < 1e-12);
}

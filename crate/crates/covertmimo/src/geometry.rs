//! High-dimensional sphere geometry: principal angles, null-steering
//! beamforming, and the concentration bound on random unit vectors.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;
// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::channel::random_unit_vector;
use crate::error::{Error, Result};
use crate::linalg::{inner, vec_norm};

/// Principal angle between two unit vectors.
///
/// The complex inner product carries a phase, so the angle is defined through
/// its modulus: `theta = arccos(|<u,v>|)`, always in `[0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSample {
    pub theta: f64,
    pub cos2: f64,
}

fn check_unit(name: &str, v: &[Complex64]) -> Result<()> {
    let n = vec_norm(v);
    if (n - 1.0).abs() > 1.0e-9 {
        return Err(Error::InvalidArgument(alloc::format!(
            "{name} must be a unit vector (|v| = {n})"
        )));
    }
    Ok(())
}

pub fn angle_between(u: &[Complex64], v: &[Complex64]) -> Result<AngleSample> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument("vectors must have equal dimension".to_string()));
    }
    check_unit("u", u)?;
    check_unit("v", v)?;
    let c = inner(u, v).norm().min(1.0);
    Ok(AngleSample { theta: c.acos(), cos2: c * c })
}

/// Null-steering beamformer: the unit direction orthogonal to `u_w` with
/// maximal gain toward `u_b`, i.e. the normalized projection
/// `(I - u_w u_w^H) u_b`.
pub fn null_steering(u_b: &[Complex64], u_w: &[Complex64]) -> Result<Vec<Complex64>> {
    if u_b.len() != u_w.len() {
        return Err(Error::InvalidArgument("vectors must have equal dimension".to_string()));
    }
    check_unit("u_b", u_b)?;
    check_unit("u_w", u_w)?;
    let overlap = inner(u_w, u_b);
    let residual: Vec<Complex64> =
        u_b.iter().zip(u_w.iter()).map(|(b, w)| b - overlap * w).collect();
    let n = vec_norm(&residual);
    if n < 1.0e-10 {
        return Err(Error::DegenerateGeometry(
            "directions are parallel; no null-steered component remains".to_string(),
        ));
    }
    Ok(residual.into_iter().map(|z| z / n).collect())
}

/// The single nonzero eigenvalue of `W_w Q` when both the adversary channel
/// and the input covariance are unit rank: `lambda_w * P_th * cos^2(theta)`.
pub fn unit_rank_product_eig(lambda_w: f64, p_th: f64, cos2: f64) -> f64 {
    lambda_w * p_th * cos2
}

/// Concentration bound for uniformly random unit vectors in `C^p`:
/// `Pr(|theta - pi/2| <= zeta) >= 1 - K sqrt(p) (cos zeta)^{p-2}`.
///
/// May be negative (vacuous); the caller decides whether to use it.
pub fn lemma1_bound(p: usize, zeta: f64, k: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".to_string()));
    }
    if !(zeta > 0.0 && zeta < core::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument("zeta must lie in (0, pi/2)".to_string()));
    }
    Ok(1.0 - k * (p as f64).sqrt() * zeta.cos().powi(p as i32 - 2))
}

/// Exact law of the squared overlap on the complex unit sphere:
/// `cos^2(theta) ~ Beta(1, p-1)`, so
/// `Pr(|theta - pi/2| <= zeta) = 1 - (1 - sin^2 zeta)^{p-1}`.
pub fn angle_concentration_exact(p: usize, zeta: f64) -> f64 {
    let s = zeta.sin();
    1.0 - (1.0 - s * s).powi(p as i32 - 1)
}

/// Monte Carlo estimate of the angle-concentration probability, with its
/// Wilson 95% interval and the exact Beta value for cross-checking.
#[derive(Debug, Clone, Copy)]
pub struct Lemma1Estimate {
    pub empirical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exact: f64,
    pub samples: usize,
}

/// Wilson 95% score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let nf = n as f64;
    let p_hat = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p_hat + z2 / (2.0 * nf)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn lemma1_monte_carlo(
    p: usize,
    zeta: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<Lemma1Estimate> {
    if p < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".to_string()));
    }
    if samples < 1_000 {
        return Err(Error::InvalidArgument("need at least 1000 samples".to_string()));
    }
    if !(zeta > 0.0 && zeta < core::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument("zeta must lie in (0, pi/2)".to_string()));
    }
    let mut hits = 0usize;
    for _ in 0..samples {
        let u = random_unit_vector(p, rng)?;
        let v = random_unit_vector(p, rng)?;
        let a = angle_between(&u, &v)?;
        if (a.theta - core::f64::consts::FRAC_PI_2).abs() <= zeta {
            hits += 1;
        }
    }
    let (ci_low, ci_high) = wilson_interval(hits, samples);
    Ok(Lemma1Estimate {
        empirical: hits as f64 / samples as f64,
        ci_low,
        ci_high,
        exact: angle_concentration_exact(p, zeta),
        samples,
    })
}

/// Smallest universal constant `K` for which the concentration bound holds,
/// with margin, at the lower CI edge of a Monte Carlo estimate on every grid
/// point.
pub fn calibrate_k(
    grid: &[(usize, f64)],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("calibration grid must be nonempty".to_string()));
    }
    let mut k_star = 0.0f64;
    for &(p, zeta) in grid {
        let est = lemma1_monte_carlo(p, zeta, samples, rng)?;
        // Bound holds iff 1 - K sqrt(p) cos^{p-2}(zeta) <= Pr.
        let denom = (p as f64).sqrt() * zeta.cos().powi(p as i32 - 2);
        let required = (1.0 - est.ci_low) / denom;
        k_star = k_star.max(required);
    }
    Ok(k_star)
}

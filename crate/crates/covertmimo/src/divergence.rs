//! Relative entropy at the adversary and the detection-theoretic bounds that
//! link it to detector error.
//!
//! All divergences are in nats and per channel use; the chain rule turns a
//! per-use value into a block value by multiplication with the blocklength.
//! Conversion to bits happens only at the CLI boundary.

use alloc::string::ToString;
use alloc::vec::Vec;

// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Adversary observation covariances under the two hypotheses.
///
/// `sigma0` is the noise-only covariance, `sigma1` the covariance while the
/// transmitter is active; `sigma1 - sigma0` must be PSD.
#[derive(Debug, Clone)]
pub struct GaussianPair {
    sigma0: CMatrix,
    sigma1: CMatrix,
}

impl GaussianPair {
    pub fn new(sigma0: CMatrix, sigma1: CMatrix) -> Result<Self> {
        if !sigma0.is_square() || sigma0.rows() != sigma1.rows() || !sigma1.is_square() {
            return Err(Error::InvalidArgument(
                "covariances must be square and of equal dimension".to_string(),
            ));
        }
        for (name, m) in [("sigma0", &sigma0), ("sigma1", &sigma1)] {
            let eig = linalg::eigh(m)?;
            if eig.values.iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidArgument(format_pd_error(name)));
            }
        }
        let diff = sigma1.sub(&sigma0);
        let eig = linalg::eigh(&diff)?;
        let scale = sigma0.frobenius_norm().max(sigma1.frobenius_norm());
        if eig.values.iter().any(|&v| v < -1.0e-10 * scale.max(1.0)) {
            return Err(Error::InvalidArgument(
                "sigma1 - sigma0 must be positive semidefinite".to_string(),
            ));
        }
        Ok(GaussianPair { sigma0, sigma1 })
    }

    pub fn dim(&self) -> usize {
        self.sigma0.rows()
    }

    pub fn sigma0(&self) -> &CMatrix {
        &self.sigma0
    }

    pub fn sigma1(&self) -> &CMatrix {
        &self.sigma1
    }
}

fn format_pd_error(name: &str) -> alloc::string::String {
    let mut s = alloc::string::String::new();
    s.push_str(name);
    s.push_str(" must be positive definite");
    s
}

/// Per-use relative entropy split into the adversary-capacity term and the
/// codebook-ignorance penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceBreakdown {
    /// `capacity_term + penalty_term`, always nonnegative.
    pub total: f64,
    /// Log-det term; the adversary's channel capacity, nonnegative.
    pub capacity_term: f64,
    /// Trace term minus the dimension; nonpositive.
    pub penalty_term: f64,
}

impl DivergenceBreakdown {
    pub const ZERO: DivergenceBreakdown =
        DivergenceBreakdown { total: 0.0, capacity_term: 0.0, penalty_term: 0.0 };

    fn from_mode_gains(gains: impl Iterator<Item = f64>) -> Self {
        let mut capacity = 0.0;
        let mut penalty = 0.0;
        for x in gains {
            let (c, p) = mode_terms(x);
            capacity += c;
            penalty += p;
        }
        DivergenceBreakdown { total: capacity + penalty, capacity_term: capacity, penalty_term: penalty }
    }
}

/// Per-mode contribution at normalized gain `x = lambda / sigma_w^2`:
/// capacity `ln(1+x)` and penalty `1/(1+x) - 1`.
///
/// The two terms cancel to second order, so the sum is evaluated by series
/// for small `x` to avoid catastrophic cancellation in the total.
fn mode_terms(x: f64) -> (f64, f64) {
    let capacity = x.ln_1p();
    let penalty = -x / (1.0 + x);
    (capacity, penalty)
}

/// `phi(x) = ln(1+x) + 1/(1+x) - 1`, the per-mode relative entropy at
/// normalized gain `x >= 0`. Series-evaluated below 2^-6 where the direct
/// form loses ~half the significant digits.
pub(crate) fn phi(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x > 0.015_625 {
        x.ln_1p() - x / (1.0 + x)
    } else {
        // phi(x) = sum_{k>=2} (-1)^k (1 - 1/k) x^k, alternating with
        // geometrically shrinking terms for |x| < 1.
        let mut term = x * x; // x^k
        let mut sum = 0.0;
        let mut k = 2.0;
        let mut sign = 1.0;
        loop {
            let contrib = sign * (1.0 - 1.0 / k) * term;
            sum += contrib;
            if contrib.abs() < sum.abs() * 1.0e-18 + 1.0e-320 {
                break;
            }
            term *= x;
            k += 1.0;
            sign = -sign;
        }
        sum
    }
}

/// Strictly increasing inverse of [`phi`] on `[0, inf)`, by bisection.
pub(crate) fn phi_inv(d: f64) -> f64 {
    debug_assert!(d >= 0.0);
    if d == 0.0 {
        return 0.0;
    }
    let mut hi = (2.0 * d).sqrt().max(1.0e-12);
    while phi(hi) < d {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= hi * 1.0e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues of `W Q` for Hermitian PSD `W` and `Q`, computed through the
/// similar PSD matrix `Q^{1/2} W Q^{1/2}`.
fn product_eigenvalues(w: &CMatrix, q: &CMatrix) -> Result<Vec<f64>> {
    let qe = linalg::eigh(q)?;
    let scale = q.frobenius_norm().max(1.0);
    if qe.values.iter().any(|&v| v < -1.0e-10 * scale) {
        return Err(Error::InvalidArgument(
            "input covariance must be positive semidefinite".to_string(),
        ));
    }
    let n = q.rows();
    let mut root = qe.vectors.clone();
    for c in 0..n {
        let s = qe.values[c].max(0.0).sqrt();
        for r in 0..n {
            root[(r, c)] *= s;
        }
    }
    let q_half = root.mul(&qe.vectors.adjoint());
    let symmetric = q_half.mul(w).mul(&q_half);
    let eig = linalg::eigh(&symmetric.hermitian_part())?;
    Ok(eig.values.iter().map(|&v| v.max(0.0)).collect())
}

/// Relative entropy seen by an adversary with channel `h_w` and noise
/// `sigma_w2` when the input covariance is `q` (per channel use).
pub fn kl_willie(h_w: &ChannelMatrix, q: &CMatrix, sigma_w2: f64) -> Result<DivergenceBreakdown> {
    let w_w = h_w.matrix().adjoint().mul(h_w.matrix());
    kl_willie_gram(&w_w, q, sigma_w2)
}

/// Same as [`kl_willie`] but starting from the Gram matrix `W = H^H H`.
pub fn kl_willie_gram(w_w: &CMatrix, q: &CMatrix, sigma_w2: f64) -> Result<DivergenceBreakdown> {
    if !(sigma_w2 > 0.0) {
        return Err(Error::InvalidArgument("sigma_w2 must be positive".to_string()));
    }
    if w_w.rows() != q.rows() {
        return Err(Error::InvalidArgument(
            "Gram matrix and covariance dimensions differ".to_string(),
        ));
    }
    let eigs = product_eigenvalues(w_w, q)?;
    Ok(DivergenceBreakdown::from_mode_gains(eigs.into_iter().map(|v| v / sigma_w2)))
}

/// Closed-form relative entropy against the worst-case isotropic adversary:
/// the diagonal allocation is observed through gain `gamma_w` on its first
/// `min(len, n_w)` modes.
///
/// `alloc` is assumed ordered like the (nonincreasing) eigenvalues of the
/// main channel, which is how every solver in this crate emits it.
pub fn kl_isotropic(alloc: &[f64], gamma_w: f64, sigma_w2: f64, n_w: usize) -> DivergenceBreakdown {
    let m = alloc.len().min(n_w);
    DivergenceBreakdown::from_mode_gains(
        alloc[..m].iter().map(|&lam| gamma_w * lam / sigma_w2),
    )
}

/// Pinsker's inequality: total variation is at most `sqrt(d/2)` where `d` is
/// the relative entropy over the whole block.
pub fn pinsker_bound(d_total: f64) -> Result<f64> {
    if !(d_total >= 0.0) {
        return Err(Error::InvalidArgument("relative entropy must be nonnegative".to_string()));
    }
    Ok((d_total / 2.0).sqrt())
}

/// Error floor of the optimal detector: `alpha + beta = 1 - tv`.
pub fn sum_error_floor(tv: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tv) {
        return Err(Error::InvalidArgument("total variation must lie in [0, 1]".to_string()));
    }
    Ok(1.0 - tv)
}

/// Witness for the monotonicity of the divergence in the adversary Gram
/// matrix: requires `w1 - w2` PSD and returns `(D(w1), D(w2))` after checking
/// `D(w1) >= D(w2) - 1e-10`.
pub fn kl_monotone_check(
    w1: &CMatrix,
    w2: &CMatrix,
    q: &CMatrix,
    sigma_w2: f64,
) -> Result<(f64, f64)> {
    let diff = w1.sub(w2);
    let eig = linalg::eigh(&diff)?;
    let scale = w1.frobenius_norm().max(1.0);
    if eig.values.iter().any(|&v| v < -1.0e-10 * scale) {
        return Err(Error::InvalidArgument(
            "w1 - w2 must be positive semidefinite".to_string(),
        ));
    }
    let d1 = kl_willie_gram(w1, q, sigma_w2)?.total;
    let d2 = kl_willie_gram(w2, q, sigma_w2)?.total;
    if d1 < d2 - 1.0e-10 {
        return Err(Error::Numerical(alloc::format!(
            "divergence monotonicity violated: {d1:e} < {d2:e}"
        )));
    }
    Ok((d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_unit_rank, ChannelMatrix};
    use crate::geometry::null_steering;
    use crate::rng::{standard_complex_gaussian, stream};
    use alloc::vec;
    use alloc::vec::Vec;
    use num_complex::Complex64;
    use rand::Rng;

    const LN_2: f64 = core::f64::consts::LN_2;

    #[test]
    fn zero_covariance_gives_zero() {
        let h = ChannelMatrix::new(CMatrix::identity(2)).unwrap();
        let d = kl_willie(&h, &CMatrix::zeros(2, 2), 1.0).unwrap();
        assert_eq!(d.total, 0.0);
        assert_eq!(d.capacity_term, 0.0);
        assert_eq!(d.penalty_term, 0.0);
    }

    #[test]
    fn scalar_case_is_ln2_minus_half() {
        let h = ChannelMatrix::new(CMatrix::identity(1)).unwrap();
        let d = kl_willie(&h, &CMatrix::identity(1), 1.0).unwrap();
        // ln 2 + 1/2 - 1, cross-checked by quadrature of the two densities
        // (frozen in tests/divergence_oracles.rs).
        assert!((d.total - (LN_2 - 0.5)).abs() < 1e-12);
        assert!((d.capacity_term - LN_2).abs() < 1e-12);
        assert!((d.penalty_term + 0.5).abs() < 1e-12);
    }

    #[test]
    fn null_steered_input_is_invisible() {
        let mut rng = stream(5, 1);
        let u_w = crate::channel::random_unit_vector(3, &mut rng).unwrap();
        let u_b = crate::channel::random_unit_vector(3, &mut rng).unwrap();
        let q_dir = null_steering(&u_b, &u_w).unwrap();
        let left = vec![Complex64::new(1.0, 0.0)];
        let h_w = make_unit_rank(0.7, &left, &u_w).unwrap();
        let q = linalg::outer(&q_dir, &q_dir).scale(2.5);
        let d = kl_willie(&h_w, &q, 0.3).unwrap();
        assert!(d.total.abs() < 1e-12, "total {:e}", d.total);
    }

    #[test]
    fn isotropic_examples() {
        assert_eq!(kl_isotropic(&[0.0, 0.0], 1.0, 1.0, 2).total, 0.0);

        let d = kl_isotropic(&[1.0, 1.0], 1.0, 1.0, 2);
        assert!((d.total - 2.0 * (LN_2 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn isotropic_matches_generic_path() {
        let mut rng = stream(17, 0);
        for n_w in [1usize, 2, 3, 5] {
            let cfg = crate::channel::SystemConfig {
                n_a: 3,
                n_b: 3,
                n_w,
                sigma_b2: 1.0,
                sigma_w2: 0.7,
                power: 1.0,
                delta: 0.1,
                blocklength: 100,
                gamma_w: 1.9,
            };
            let w = crate::channel::worst_case_willie(&cfg);
            for _ in 0..20 {
                let alloc: Vec<f64> = (0..3).map(|_| rng_f64(&mut rng)).collect();
                let q = CMatrix::diagonal(&alloc);
                let generic = kl_willie_gram(w.matrix(), &q, cfg.sigma_w2).unwrap();
                let closed = kl_isotropic(&alloc, cfg.gamma_w, cfg.sigma_w2, n_w);
                assert!(
                    (generic.total - closed.total).abs() <= 1e-12 * (1.0 + closed.total),
                    "n_w={n_w}: {:e} vs {:e}",
                    generic.total,
                    closed.total
                );
            }
        }
    }

    fn rng_f64(rng: &mut impl rand::Rng) -> f64 {
        rng.gen::<f64>() * 2.0
    }

    #[test]
    fn pinsker_examples() {
        assert_eq!(pinsker_bound(0.0).unwrap(), 0.0);
        let delta: f64 = 0.1;
        assert!((pinsker_bound(2.0 * delta * delta).unwrap() - delta).abs() < 1e-15);
        assert!((pinsker_bound(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(pinsker_bound(-1.0e-9).is_err());
    }

    #[test]
    fn sum_error_floor_examples() {
        assert_eq!(sum_error_floor(0.0).unwrap(), 1.0);
        assert_eq!(sum_error_floor(1.0).unwrap(), 0.0);
        assert!((sum_error_floor(0.01).unwrap() - 0.99).abs() < 1e-15);
        assert!(sum_error_floor(1.5).is_err());
        assert!(sum_error_floor(-0.1).is_err());
    }

    #[test]
    fn monotone_check_examples() {
        let q = CMatrix::identity(2);
        let w = CMatrix::identity(2);
        let (d1, d2) = kl_monotone_check(&w, &w, &q, 1.0).unwrap();
        assert_eq!(d1, d2);

        let (d1, d2) = kl_monotone_check(&CMatrix::identity(2), &CMatrix::identity(2).scale(0.5), &q, 1.0).unwrap();
        assert!(d1 > d2);

        // Ordering precondition violated.
        assert!(kl_monotone_check(
            &CMatrix::identity(2).scale(0.5),
            &CMatrix::identity(2),
            &q,
            1.0
        )
        .is_err());
    }

    #[test]
    fn monotone_over_random_ordered_pairs() {
        let mut rng = stream(23, 0);
        for _ in 0..100 {
            let dim = 2 + (rng.gen::<u32>() % 3) as usize;
            let a = CMatrix::from_fn(dim, dim, |_, _| standard_complex_gaussian(&mut rng));
            let w2 = a.adjoint().mul(&a);
            let b = CMatrix::from_fn(dim, dim, |_, _| standard_complex_gaussian(&mut rng));
            let w1 = w2.add(&b.adjoint().mul(&b));
            let c = CMatrix::from_fn(dim, dim, |_, _| standard_complex_gaussian(&mut rng));
            let q = c.adjoint().mul(&c);
            kl_monotone_check(&w1, &w2, &q, 0.8).unwrap();
        }
    }

    #[test]
    fn phi_series_agrees_with_direct_form() {
        for &x in &[0.014, 0.0157, 0.0157999, 0.02, 0.5, 3.0] {
            let direct = (1.0f64 + x).ln() + 1.0 / (1.0 + x) - 1.0;
            assert!(
                (phi(x) - direct).abs() < 1e-13 * (1.0 + direct),
                "x={x}: {:e} vs {direct:e}",
                phi(x)
            );
        }
        // Inverse round-trips across the covert operating range.
        for &d in &[1e-18, 1e-12, 1e-8, 1e-4, 0.1, 2.0] {
            let x = phi_inv(d);
            assert!((phi(x) - d).abs() <= 1e-12 * d, "d={d:e}, phi(x)={:e}", phi(x));
        }
    }

    #[test]
    fn isotropic_derivative_is_nonnegative() {
        // Forward difference of the closed form at random points.
        let mut rng = stream(31, 2);
        for _ in 0..10 {
            let lam = rng.gen::<f64>() * 3.0;
            let h = 1e-6;
            let f0 = kl_isotropic(&[lam], 1.3, 0.9, 1).total;
            let f1 = kl_isotropic(&[lam + h], 1.3, 0.9, 1).total;
            assert!(f1 - f0 >= -1e-12);
        }
    }
}

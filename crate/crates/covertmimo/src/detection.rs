//! Monte Carlo simulation of the adversary's optimal likelihood-ratio test
//! over a block of channel uses.
//!
//! The block log-likelihood ratio of circularly symmetric complex Gaussians
//! is a sum of per-use quadratic forms; the threshold that minimizes
//! `alpha + beta` is taken empirically over the pooled statistics, which
//! makes `1 - min(alpha + beta)` the plug-in estimate of total variation.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::SystemConfig;
use crate::divergence::{kl_isotropic, pinsker_bound, GaussianPair};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::optimizer::CovarianceSolution;
use crate::rng::{standard_complex_gaussian, stream};

/// Empirical detector performance over all thresholds.
#[derive(Debug, Clone, Copy)]
pub struct DetectionEstimate {
    /// False-alarm rate at the minimizing threshold.
    pub alpha: f64,
    /// Missed-detection rate at the minimizing threshold.
    pub beta: f64,
    /// `min_tau (alpha + beta) = 1 - tv_estimate`.
    pub min_sum: f64,
    /// Empirical total variation between the two block laws.
    pub tv_estimate: f64,
    pub trials: usize,
    /// Conservative 95% halfwidth for the involved proportions.
    pub ci_halfwidth: f64,
}

/// Block log-likelihood-ratio samples under both hypotheses.
///
/// Trial `t` draws from stream `t` of the master seed, so results do not
/// depend on scheduling; `llr0[t]` and `llr1[t]` use disjoint draws of the
/// same stream.
pub fn llr_samples(
    pair: &GaussianPair,
    n_uses: usize,
    trials: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_uses == 0 {
        return Err(Error::InvalidArgument("need at least one channel use".to_string()));
    }
    let chol0 = Cholesky::new(pair.sigma0())
        .map_err(|e| Error::Numerical(alloc::format!("sigma0 factorization: {e}")))?;
    let chol1 = Cholesky::new(pair.sigma1())
        .map_err(|e| Error::Numerical(alloc::format!("sigma1 factorization: {e}")))?;
    let dim = pair.dim();
    // ln p1(z) - ln p0(z) = z^H S0^{-1} z - z^H S1^{-1} z + ln|S0| - ln|S1|.
    let ld_shift = chol0.log_det() - chol1.log_det();

    let mut llr0 = Vec::with_capacity(trials);
    let mut llr1 = Vec::with_capacity(trials);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut z = vec![Complex64::new(0.0, 0.0); dim];
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for trial in 0..trials {
        let mut rng = stream(seed, trial as u64);
        let mut block = [0.0f64; 2];
        for (h, chol) in [(0usize, &chol0), (1usize, &chol1)] {
            let mut acc = 0.0;
            for _ in 0..n_uses {
                for wi in w.iter_mut() {
                    *wi = standard_complex_gaussian(&mut rng);
                }
                chol.mul_lower_into(&w, &mut z);
                let q0 = chol0.quadratic_form_into(&z, &mut scratch);
                let q1 = chol1.quadratic_form_into(&z, &mut scratch);
                acc += q0 - q1 + ld_shift;
            }
            block[h] = acc;
        }
        llr0.push(block[0]);
        llr1.push(block[1]);
    }
    Ok((llr0, llr1))
}

/// Simulates the optimal likelihood-ratio test and sweeps every threshold of
/// the pooled empirical statistics for the minimal `alpha + beta`.
pub fn simulate_lrt(
    pair: &GaussianPair,
    n_uses: usize,
    trials: usize,
    seed: u64,
) -> Result<DetectionEstimate> {
    if trials < 1_000 {
        return Err(Error::InvalidArgument("need at least 1000 trials".to_string()));
    }
    let (mut llr0, mut llr1) = llr_samples(pair, n_uses, trials, seed)?;
    llr0.sort_by(f64::total_cmp);
    llr1.sort_by(f64::total_cmp);

    // Decide "transmitting" when LLR > tau: alpha = 1 - F0(tau), beta = F1(tau).
    // The empirical minimizer of alpha + beta maximizes F0 - F1 over the
    // pooled sample points.
    let t = trials as f64;
    let mut best_diff = 0.0f64;
    let mut best = (1.0f64, 0.0f64); // (alpha, beta) at tau = -inf
    let (mut i0, mut i1) = (0usize, 0usize);
    while i0 < llr0.len() || i1 < llr1.len() {
        let tau = match (llr0.get(i0), llr1.get(i1)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        while i0 < llr0.len() && llr0[i0] <= tau {
            i0 += 1;
        }
        while i1 < llr1.len() && llr1[i1] <= tau {
            i1 += 1;
        }
        let f0 = i0 as f64 / t;
        let f1 = i1 as f64 / t;
        if f0 - f1 > best_diff {
            best_diff = f0 - f1;
            best = (1.0 - f0, f1);
        }
    }
    let tv = best_diff.max(0.0);
    Ok(DetectionEstimate {
        alpha: best.0,
        beta: best.1,
        min_sum: 1.0 - tv,
        tv_estimate: tv,
        trials,
        ci_halfwidth: 1.959_963_984_540_054 * (0.5 / t).sqrt(),
    })
}

/// Outcome of the covertness verification of a solver output.
#[derive(Debug, Clone)]
pub struct CovertnessReport {
    pub estimate: DetectionEstimate,
    /// Required detector error floor `1 - delta`.
    pub floor: f64,
    /// Pinsker cap `sqrt(n D / 2)` on total variation.
    pub pinsker_cap: f64,
    /// Total relative entropy over the simulated block.
    pub total_divergence: f64,
    /// Channel uses actually simulated per block.
    pub n_effective: u64,
    /// Input-power scale applied when the block was reduced.
    pub input_scale: f64,
    /// The blocklength was reduced to desk scale at matched total divergence.
    pub reduced_block: bool,
    pub min_sum_ok: bool,
    pub pinsker_ok: bool,
}

impl CovertnessReport {
    pub fn passed(&self) -> bool {
        self.min_sum_ok && self.pinsker_ok
    }
}

/// Largest block simulated directly; longer blocks are replaced by a shorter
/// one at matched total divergence (the LLR is an i.i.d. sum, so matching its
/// mean keeps the detector's operating regime).
const MAX_DIRECT_BLOCK: u64 = 10_000;

/// Monte Carlo check that a solution keeps the optimal detector at error sum
/// `>= 1 - delta` and that the empirical total variation respects Pinsker.
pub fn verify_covertness(
    cfg: &SystemConfig,
    sol: &CovarianceSolution,
    trials: usize,
    seed: u64,
) -> Result<CovertnessReport> {
    cfg.validate()?;
    let n = cfg.blocklength as f64;
    let budget = cfg.divergence_budget_total();
    if n * sol.constraint_value() > budget * (1.0 + 1.0e-6) + 1.0e-12 {
        return Err(Error::InvalidArgument(
            "solution violates its own covertness constraint".to_string(),
        ));
    }

    // Worst-case adversary observation: gamma_w on the M strongest modes, in
    // the eigenbasis of the input covariance.
    let m = cfg.m_active();
    let mut gains: Vec<f64> = sol.alloc.clone();
    gains.sort_by(|a, b| b.total_cmp(a));
    gains.truncate(m);

    let per_use = sol.divergence.total;
    let total_target = n * per_use;

    let (n_eff, scale) = if cfg.blocklength > MAX_DIRECT_BLOCK && per_use > 0.0 {
        let n_eff = MAX_DIRECT_BLOCK;
        let target_per_use = total_target / n_eff as f64;
        let d_scaled = |k: f64| -> f64 {
            let scaled: Vec<f64> = gains.iter().map(|&g| k * g).collect();
            kl_isotropic(&scaled, cfg.gamma_w, cfg.sigma_w2, cfg.n_w).total
        };
        let mut hi = 2.0;
        while d_scaled(hi) < target_per_use {
            hi *= 2.0;
        }
        let mut lo = 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d_scaled(mid) < target_per_use {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= hi * 1.0e-14 {
                break;
            }
        }
        (n_eff, 0.5 * (lo + hi))
    } else {
        (cfg.blocklength, 1.0)
    };

    let dim = cfg.n_w;
    let sigma0 = CMatrix::identity(dim).scale(cfg.sigma_w2);
    let mut sigma1 = sigma0.clone();
    for (i, &g) in gains.iter().enumerate().take(dim) {
        sigma1[(i, i)] += scale * cfg.gamma_w * g;
    }
    let pair = GaussianPair::new(sigma0, sigma1)?;
    let estimate = simulate_lrt(&pair, n_eff as usize, trials, seed)?;

    let floor = 1.0 - cfg.delta;
    let pinsker_cap = pinsker_bound(total_target)?;
    let margin = 3.0 * estimate.ci_halfwidth;
    Ok(CovertnessReport {
        estimate,
        floor,
        pinsker_cap,
        total_divergence: total_target,
        n_effective: n_eff,
        input_scale: scale,
        reduced_block: scale != 1.0,
        min_sum_ok: estimate.min_sum >= floor - margin,
        pinsker_ok: estimate.tv_estimate <= pinsker_cap + margin,
    })
}

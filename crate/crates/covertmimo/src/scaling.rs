//! Closed-form capacity bounds, power-threshold formulas, and the normalized
//! scaling estimators, including the massive-MIMO growth laws.

use alloc::string::ToString;
use alloc::vec::Vec;

// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::SystemConfig;
use crate::divergence::phi_inv;
use crate::error::{Error, Result};
use crate::optimizer::CovertnessMode;

/// Parameter regime a bounds report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Secret,
    NoSecret,
    Rank1Secret,
    Rank1NoSecret,
}

/// Two-sided bound on the delta-PD capacity, in nats per channel use.
#[derive(Debug, Clone, Copy)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    /// Converse slack factor, at least 1.
    pub xi: f64,
    pub regime: Regime,
    /// Set when orthogonal eigendirections make the normalized limit infinite
    /// and both ends collapse to the unconstrained capacity.
    pub l_infinite: bool,
}

/// Converse slack factor of the secret regime.
///
/// The achievability threshold comes from the linear over-bound of the
/// per-mode divergence, the converse from its exact inverse; their ratio
/// `phi^{-1}(nu) / sqrt(nu)` at the per-mode budget `nu = 2 delta^2 / (n M)`
/// is the smallest factor that makes the upper bound valid at the operating
/// point. It tends to sqrt(2) from above as the budget vanishes.
pub fn xi_secret(cfg: &SystemConfig) -> f64 {
    let nu = cfg.divergence_budget_per_use() / cfg.m_active() as f64;
    xi_from_budget(nu)
}

fn xi_from_budget(nu: f64) -> f64 {
    if nu <= 0.0 {
        return core::f64::consts::SQRT_2;
    }
    if nu < 1.0e-24 {
        // Series limit; the direct quotient loses precision here.
        return core::f64::consts::SQRT_2 * (1.0 + (2.0 / 3.0) * (2.0 * nu).sqrt());
    }
    phi_inv(nu) / nu.sqrt()
}

/// Converse slack factor of the no-secret regime, `nM / (nM - 2 delta^2)`.
pub fn xi_nosecret(cfg: &SystemConfig) -> Result<f64> {
    let nm = cfg.blocklength as f64 * cfg.m_active() as f64;
    let budget = cfg.divergence_budget_total();
    if nm <= budget {
        return Err(Error::InvalidRegime(alloc::format!(
            "need n M > 2 delta^2 (n M = {nm}, 2 delta^2 = {budget})"
        )));
    }
    Ok(nm / (nm - budget))
}

/// Square-root-law sandwich with a shared secret: per-mode argument
/// `sqrt(2) sigma_w^2 delta lambda_i / (sigma_b^2 gamma_w sqrt(n M))`.
pub fn srl_bounds_secret(cfg: &SystemConfig, eigs_b: &[f64]) -> BoundsReport {
    let n = cfg.blocklength as f64;
    let m = cfg.m_active() as f64;
    let scale = core::f64::consts::SQRT_2 * cfg.sigma_w2 * cfg.delta
        / (cfg.sigma_b2 * cfg.gamma_w * (n * m).sqrt());
    let xi = xi_secret(cfg);
    let (mut lower, mut upper) = (0.0, 0.0);
    for &lam in eigs_b.iter().take(cfg.n_active()) {
        lower += (scale * lam).ln_1p();
        upper += (xi * scale * lam).ln_1p();
    }
    BoundsReport { lower, upper, xi, regime: Regime::Secret, l_infinite: false }
}

/// No-secret sandwich: per-mode argument
/// `2 sigma_w^2 delta^2 lambda_i / (sigma_b^2 gamma_w n M)` with the exact
/// slack `nM / (nM - 2 delta^2)`.
pub fn srl_bounds_nosecret(cfg: &SystemConfig, eigs_b: &[f64]) -> Result<BoundsReport> {
    let xi = xi_nosecret(cfg)?;
    let n = cfg.blocklength as f64;
    let m = cfg.m_active() as f64;
    let scale =
        2.0 * cfg.sigma_w2 * cfg.delta * cfg.delta / (cfg.sigma_b2 * cfg.gamma_w * n * m);
    let (mut lower, mut upper) = (0.0, 0.0);
    for &lam in eigs_b.iter().take(cfg.n_active()) {
        lower += (scale * lam).ln_1p();
        upper += (xi * scale * lam).ln_1p();
    }
    Ok(BoundsReport { lower, upper, xi, regime: Regime::NoSecret, l_infinite: false })
}

/// Bounds when both channels are unit rank, with the exact product eigenvalue
/// `lambda_w P_th cos^2(theta)`. Both ends are clamped by the unconstrained
/// capacity `C = ln(1 + P lambda_b / sigma_b^2)`; orthogonal directions
/// (`cos2_theta = 0`) return `C` on both ends and set the infinite-limit flag.
pub fn rank1_bounds(
    cfg: &SystemConfig,
    lambda_b: f64,
    lambda_w: f64,
    cos2_theta: f64,
    secret: bool,
) -> Result<BoundsReport> {
    if !(0.0..=1.0).contains(&cos2_theta) {
        return Err(Error::InvalidArgument("cos2_theta must lie in [0, 1]".to_string()));
    }
    let c_max = (cfg.power * lambda_b / cfg.sigma_b2).ln_1p();
    let n = cfg.blocklength as f64;
    let regime = if secret { Regime::Rank1Secret } else { Regime::Rank1NoSecret };
    let xi = if secret {
        xi_from_budget(cfg.divergence_budget_total() / n)
    } else {
        let nm = n;
        let budget = cfg.divergence_budget_total();
        if nm <= budget {
            return Err(Error::InvalidRegime("need n > 2 delta^2".to_string()));
        }
        nm / (nm - budget)
    };
    if cos2_theta == 0.0 {
        return Ok(BoundsReport { lower: c_max, upper: c_max, xi, regime, l_infinite: true });
    }
    let arg = if secret {
        core::f64::consts::SQRT_2 * cfg.sigma_w2 * cfg.delta * lambda_b
            / (cfg.sigma_b2 * lambda_w * cos2_theta * n.sqrt())
    } else {
        2.0 * cfg.sigma_w2 * cfg.delta * cfg.delta * lambda_b
            / (cfg.sigma_b2 * lambda_w * cos2_theta * n)
    };
    Ok(BoundsReport {
        lower: arg.ln_1p().min(c_max),
        upper: (xi * arg).ln_1p().min(c_max),
        xi,
        regime,
        l_infinite: false,
    })
}

/// Bounds for a unit-rank adversary and a well-conditioned main channel with
/// per-mode gain `lambda_b` on all `N` modes.
pub fn unit_rank_willie_bounds(cfg: &SystemConfig, lambda_b: f64, lambda_w: f64) -> BoundsReport {
    let n = cfg.blocklength as f64;
    let arg = core::f64::consts::SQRT_2 * cfg.sigma_w2 * cfg.delta * lambda_b
        / (cfg.sigma_b2 * lambda_w * n.sqrt());
    let xi = xi_from_budget(cfg.divergence_budget_total() / n);
    let modes = cfg.n_active() as f64;
    BoundsReport {
        lower: modes * arg.ln_1p(),
        upper: modes * (xi * arg).ln_1p(),
        xi,
        regime: Regime::Rank1Secret,
        l_infinite: false,
    }
}

/// Limit of the secret-regime scaling bracket `[sum lambda_i s / sqrt(M),
/// xi * sum lambda_i s / sqrt(M)]` with `s = sigma_w^2 / (sigma_b^2 gamma_w)`,
/// evaluated with the slack factor at blocklength `cfg.blocklength`.
pub fn l_bracket_secret(cfg: &SystemConfig, eigs_b: &[f64]) -> (f64, f64) {
    let m = cfg.m_active() as f64;
    let s = cfg.sigma_w2 / (cfg.sigma_b2 * cfg.gamma_w);
    let base: f64 =
        eigs_b.iter().take(cfg.n_active()).map(|&lam| s * lam / m.sqrt()).sum();
    (base, xi_secret(cfg) * base)
}

/// No-secret analog: `sum sqrt(2) sigma_w^2 delta lambda_i / (sigma_b^2 gamma_w M)`.
pub fn lhat_bracket_nosecret(cfg: &SystemConfig, eigs_b: &[f64]) -> Result<(f64, f64)> {
    let m = cfg.m_active() as f64;
    let s = core::f64::consts::SQRT_2 * cfg.sigma_w2 * cfg.delta / (cfg.sigma_b2 * cfg.gamma_w);
    let base: f64 = eigs_b.iter().take(cfg.n_active()).map(|&lam| s * lam / m).sum();
    Ok((base, xi_nosecret(cfg)? * base))
}

/// Finite-ladder estimate of a normalized scaling limit.
#[derive(Debug, Clone)]
pub struct ScalingEstimate {
    /// Last ladder value.
    pub value: f64,
    /// Blocklengths visited.
    pub ladder: Vec<u64>,
    /// Normalized values along the ladder.
    pub sequence: Vec<f64>,
    /// Last two entries agree to relative tolerance 1e-3.
    pub converged: bool,
}

const LADDER_RATIO: u64 = 4;
const LADDER_RUNGS: usize = 16;
const LADDER_REL_TOL: f64 = 1.0e-3;

fn ladder_estimate(
    start: u64,
    normalizer: impl Fn(f64) -> f64,
    mut rate_fn: impl FnMut(u64) -> Result<f64>,
) -> Result<ScalingEstimate> {
    let mut ladder = Vec::new();
    let mut sequence = Vec::new();
    let mut converged = false;
    let mut n = start.max(1);
    for _ in 0..LADDER_RUNGS {
        let rate = rate_fn(n)?;
        // A zero rate normalizes to zero even when the normalizer diverges
        // (the delta = 0 budget).
        let value = if rate == 0.0 { 0.0 } else { normalizer(n as f64) * rate };
        ladder.push(n);
        sequence.push(value);
        let k = sequence.len();
        if k >= 2 {
            let (prev, cur) = (sequence[k - 2], sequence[k - 1]);
            if (cur - prev).abs() <= LADDER_REL_TOL * cur.abs().max(1.0e-300) {
                converged = true;
                break;
            }
        }
        n = n.saturating_mul(LADDER_RATIO);
    }
    Ok(ScalingEstimate {
        value: *sequence.last().unwrap(),
        ladder,
        sequence,
        converged,
    })
}

/// Square-root-normalized limit `L = lim sqrt(n / 2 delta^2) C_pd(delta; n)`,
/// estimated on a geometric blocklength ladder starting at `cfg.blocklength`.
///
/// `rate_fn` maps a blocklength to `C_pd` in nats per use.
pub fn l_estimator(
    cfg: &SystemConfig,
    rate_fn: impl FnMut(u64) -> Result<f64>,
) -> Result<ScalingEstimate> {
    let two_d2 = cfg.divergence_budget_total();
    ladder_estimate(cfg.blocklength, move |n| (n / two_d2).sqrt(), rate_fn)
}

/// Linear-normalized limit `L-hat = lim (n / sqrt(2 delta^2)) C_pd(delta; n)`.
pub fn lhat_estimator(
    cfg: &SystemConfig,
    rate_fn: impl FnMut(u64) -> Result<f64>,
) -> Result<ScalingEstimate> {
    let root = cfg.divergence_budget_total().sqrt();
    ladder_estimate(cfg.blocklength, move |n| n / root, rate_fn)
}

/// Probability that the covert rate equals the unconstrained capacity when
/// the adversary direction is uniform on the sphere.
#[derive(Debug, Clone, Copy)]
pub struct FullRateProbability {
    /// Overlap threshold `cos^2(theta) <= g` for full rate.
    pub g: f64,
    /// Concentration-lemma lower bound, before clamping.
    pub bound_raw: f64,
    /// Lower bound clamped to [0, 1].
    pub bound: f64,
    /// Exact value under the Beta(1, N_a - 1) overlap law.
    pub exact: f64,
    /// `g` exceeded 1 and was clamped.
    pub saturated: bool,
}

/// Full-rate probability at `n_a` transmit antennas; `k` is the universal
/// constant of the concentration bound.
pub fn full_rate_probability(
    cfg: &SystemConfig,
    lambda_w: f64,
    n_a: usize,
    k: f64,
    mode: CovertnessMode,
) -> Result<FullRateProbability> {
    if n_a < 2 {
        return Err(Error::InvalidArgument("n_a must be at least 2".to_string()));
    }
    let n = cfg.blocklength as f64;
    let c = core::f64::consts::SQRT_2 * cfg.sigma_w2 * cfg.delta / (lambda_w * cfg.power);
    let raw_g = match mode {
        CovertnessMode::Secret => c / n.sqrt(),
        CovertnessMode::NoSecret => c / n,
    };
    let saturated = raw_g > 1.0;
    let g = raw_g.min(1.0);
    let half_exp = (n_a as f64 - 2.0) / 2.0;
    let bound_raw = 1.0 - k * (n_a as f64).sqrt() * (half_exp * (-g).ln_1p()).exp();
    let exact = -((n_a as f64 - 1.0) * (-g).ln_1p()).exp_m1();
    Ok(FullRateProbability {
        g,
        bound_raw,
        bound: bound_raw.clamp(0.0, 1.0),
        exact: exact.clamp(0.0, 1.0),
        saturated,
    })
}

/// Massive-MIMO growth law of the maximal codebook size:
/// `sqrt(n / (K^2 N_a)) (1 + c/sqrt(n))^{(N_a-2)/2}` with a secret and
/// `sqrt(1 / (K^2 N_a)) (1 + c/n)^{(N_a-2)/2}` without, where
/// `c = sqrt(2) sigma_w^2 delta / (lambda_w P)`.
pub fn kn_growth(
    mode: CovertnessMode,
    cfg: &SystemConfig,
    lambda_w: f64,
    n_a: usize,
    k: f64,
) -> f64 {
    let n = cfg.blocklength as f64;
    let c = core::f64::consts::SQRT_2 * cfg.sigma_w2 * cfg.delta / (lambda_w * cfg.power);
    let half_exp = (n_a as f64 - 2.0) / 2.0;
    match mode {
        CovertnessMode::Secret => {
            (n / (k * k * n_a as f64)).sqrt() * (half_exp * (c / n.sqrt()).ln_1p()).exp()
        }
        CovertnessMode::NoSecret => {
            (1.0 / (k * k * n_a as f64)).sqrt() * (half_exp * (c / n).ln_1p()).exp()
        }
    }
}

//! Constrained covariance solvers for the delta-PD rate maximization.
//!
//! Both solvers share the same skeleton: the input covariance keeps the
//! eigenvectors of the main-channel Gram matrix, so the problem reduces to a
//! diagonal allocation. The allocation comes out of a dual bisection — an
//! outer loop on the divergence multiplier `eta`, an inner loop on the power
//! multiplier `lambda`, and per-mode bracketed root finding of the
//! stationarity condition. The per-mode stationarity may have several roots
//! (the divergence term is not monotone), so each candidate root competes on
//! its per-mode Lagrangian value and multi-root cases are flagged.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{GramMatrix, SystemConfig};
use crate::divergence::{self, DivergenceBreakdown};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Whether the codebook is hidden from the adversary.
///
/// With a secret the binding quantity is the full relative entropy; without
/// one it is the adversary-capacity (log-det) term alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovertnessMode {
    Secret,
    NoSecret,
}

/// Numerical knobs of the solvers.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerSettings {
    /// Relative bisection width in multiplier space.
    pub bisect_tol: f64,
    /// Relative feasibility tolerance on constraints.
    pub constraint_tol: f64,
    /// Iteration cap per bisection.
    pub max_iter: usize,
    /// Step used by the brute-force oracles (power units).
    pub grid_resolution: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            bisect_tol: 1.0e-10,
            constraint_tol: 1.0e-9,
            max_iter: 200,
            grid_resolution: 1.0e-5,
        }
    }
}

/// Solution of the constrained rate maximization.
#[derive(Debug, Clone)]
pub struct CovarianceSolution {
    /// Unitary eigenbasis (columns are the right singular vectors of `H_b`).
    pub eigvecs: CMatrix,
    /// Diagonal power allocation, aligned with the eigenvalues of `W_b`.
    pub alloc: Vec<f64>,
    /// Total transmitted power `sum(alloc)`.
    pub p_th: f64,
    /// Achieved rate in nats per channel use.
    pub rate: f64,
    /// Per-use relative entropy at the worst-case adversary.
    pub divergence: DivergenceBreakdown,
    /// Dual multiplier of the power constraint.
    pub lambda: f64,
    /// Dual multiplier of the covertness constraint.
    pub eta: f64,
    pub mode: CovertnessMode,
    /// Some per-mode stationarity profile had more than one root.
    pub multi_root: bool,
}

impl CovarianceSolution {
    /// Reassembles the covariance matrix `U diag(alloc) U^H`.
    pub fn covariance(&self) -> CMatrix {
        let n = self.alloc.len();
        let mut ul = self.eigvecs.clone();
        for c in 0..n {
            for r in 0..n {
                ul[(r, c)] *= self.alloc[c];
            }
        }
        ul.mul(&self.eigvecs.adjoint())
    }

    /// The quantity the covertness constraint binds on, per channel use.
    pub fn constraint_value(&self) -> f64 {
        match self.mode {
            CovertnessMode::Secret => self.divergence.total,
            CovertnessMode::NoSecret => self.divergence.capacity_term,
        }
    }
}

/// Per-mode covertness penalty `g` at noise-to-gain ratio `s = sigma_w^2 / gamma_w`.
fn mode_penalty(mode: CovertnessMode, s: f64, lam: f64) -> f64 {
    match mode {
        CovertnessMode::Secret => divergence::phi(lam / s),
        CovertnessMode::NoSecret => (lam / s).ln_1p(),
    }
}

fn mode_penalty_deriv(mode: CovertnessMode, s: f64, lam: f64) -> f64 {
    let t = s + lam;
    match mode {
        CovertnessMode::Secret => lam / (t * t),
        CovertnessMode::NoSecret => 1.0 / t,
    }
}

/// Worst-case per-use constraint value: the adversary observes the `m`
/// strongest allocations.
fn worst_case_constraint(alloc: &[f64], m: usize, s: f64, mode: CovertnessMode) -> f64 {
    let mut sorted: Vec<f64> = alloc.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().take(m).map(|&l| mode_penalty(mode, s, l)).sum()
}

fn rate_of(alloc: &[f64], gains: &[f64], sigma_b2: f64) -> f64 {
    alloc
        .iter()
        .zip(gains.iter())
        .map(|(&l, &g)| (l * g / sigma_b2).ln_1p())
        .sum()
}

struct ModeProblem<'a> {
    gains: &'a [f64],
    covered: &'a [bool],
    /// Per-mode upper bound (the ordering cap for uncovered modes).
    upper: &'a [f64],
    sigma_b2: f64,
    s: f64,
    mode: CovertnessMode,
}

impl ModeProblem<'_> {
    /// Maximizes `ln(1 + gain L / sigma_b2) - lambda L - eta g(L)` over
    /// `[0, upper]`. Returns the maximizer and the number of stationary roots.
    fn optimize_mode(&self, idx: usize, lambda: f64, eta: f64) -> (f64, usize) {
        let gain = self.gains[idx];
        let hi = self.upper[idx];
        if gain <= 0.0 || hi <= 0.0 {
            return (0.0, 0);
        }
        let eta_eff = if self.covered[idx] { eta } else { 0.0 };
        let objective = |l: f64| -> f64 {
            (l * gain / self.sigma_b2).ln_1p()
                - lambda * l
                - eta_eff * mode_penalty(self.mode, self.s, l)
        };
        let slope = |l: f64| -> f64 {
            gain / (self.sigma_b2 + l * gain)
                - lambda
                - eta_eff * mode_penalty_deriv(self.mode, self.s, l)
        };

        const BRACKETS: usize = 64;
        let step = hi / BRACKETS as f64;
        let mut candidates: Vec<f64> = vec![0.0, hi];
        let mut roots = 0usize;
        let mut prev_l = 0.0;
        let mut prev_slope = slope(0.0);
        for k in 1..=BRACKETS {
            let l = step * k as f64;
            let sl = slope(l);
            if prev_slope == 0.0 {
                candidates.push(prev_l);
                roots += 1;
            } else if prev_slope * sl < 0.0 {
                let (mut lo, mut hi_b) = (prev_l, l);
                let mut f_lo = prev_slope;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi_b);
                    let fm = slope(mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi_b = mid;
                        break;
                    }
                    if f_lo * fm < 0.0 {
                        hi_b = mid;
                    } else {
                        lo = mid;
                        f_lo = fm;
                    }
                }
                candidates.push(0.5 * (lo + hi_b));
                roots += 1;
            }
            prev_l = l;
            prev_slope = sl;
        }

        let mut best = 0.0;
        let mut best_val = objective(0.0);
        for &cand in &candidates {
            let v = objective(cand);
            if v > best_val {
                best_val = v;
                best = cand;
            }
        }
        (best, roots)
    }

    fn allocation(&self, lambda: f64, eta: f64) -> (Vec<f64>, bool) {
        let mut alloc = Vec::with_capacity(self.gains.len());
        let mut multi = false;
        for idx in 0..self.gains.len() {
            let (l, roots) = self.optimize_mode(idx, lambda, eta);
            multi |= roots > 1;
            alloc.push(l);
        }
        (alloc, multi)
    }

    /// Finds `lambda >= 0` meeting the power budget at fixed `eta`.
    fn inner_power(
        &self,
        eta: f64,
        power: f64,
        settings: &OptimizerSettings,
    ) -> (f64, Vec<f64>, bool) {
        let (free, multi) = self.allocation(0.0, eta);
        let free_sum: f64 = free.iter().sum();
        if free_sum <= power * (1.0 + settings.constraint_tol) {
            return (0.0, free, multi);
        }
        // sum(alloc) is nonincreasing in lambda; at lambda_hi every mode shuts off.
        let mut hi = self
            .gains
            .iter()
            .map(|&g| g / self.sigma_b2)
            .fold(0.0f64, f64::max)
            * (1.0 + 1.0e-12);
        let mut lo = 0.0;
        let mut best = free;
        let mut best_multi = multi;
        for _ in 0..settings.max_iter {
            let mid = 0.5 * (lo + hi);
            let (alloc, m) = self.allocation(mid, eta);
            let sum: f64 = alloc.iter().sum();
            if sum >= power {
                lo = mid;
            } else {
                hi = mid;
                best = alloc;
                best_multi = m;
            }
            if hi - lo <= settings.bisect_tol * hi.max(1.0e-300) {
                break;
            }
        }
        (hi, best, best_multi)
    }
}

/// Water-filling allocation `(mu - sigma_b2/lambda_i)^+` over the positive
/// eigenmodes, with the water level found by bisection.
///
/// Returns the allocation and the water level `mu`.
pub fn standard_waterfill(eigs_b: &[f64], sigma_b2: f64, p_budget: f64) -> Result<(Vec<f64>, f64)> {
    if !(p_budget >= 0.0) || !p_budget.is_finite() {
        return Err(Error::InvalidArgument("power budget must be nonnegative".to_string()));
    }
    if !(sigma_b2 > 0.0) {
        return Err(Error::InvalidArgument("sigma_b2 must be positive".to_string()));
    }
    let max_gain = eigs_b.iter().fold(0.0f64, |a, &b| a.max(b));
    if max_gain <= 0.0 {
        if p_budget > 0.0 {
            return Err(Error::DegenerateChannel(
                "cannot allocate power on an all-zero channel".to_string(),
            ));
        }
        return Ok((vec![0.0; eigs_b.len()], 0.0));
    }
    let floor = sigma_b2 / max_gain;
    if p_budget == 0.0 {
        return Ok((vec![0.0; eigs_b.len()], floor));
    }
    // Bisect on the excess t = mu - floor against per-mode offsets
    // sigma_b2/g - floor, so tiny budgets keep full relative precision
    // (the strongest mode's allocation is exactly t).
    let offsets: Vec<f64> = eigs_b
        .iter()
        .map(|&g| if g > 0.0 { sigma_b2 / g - floor } else { f64::INFINITY })
        .collect();
    let fill = |t: f64| -> f64 {
        offsets.iter().map(|&o| (t - o).max(0.0)).sum()
    };
    let mut lo = 0.0;
    let mut hi = p_budget;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid) < p_budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= p_budget * 1.0e-16 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let alloc: Vec<f64> = offsets.iter().map(|&o| (t - o).max(0.0)).collect();
    Ok((alloc, floor + t))
}

fn check_inputs(cfg: &SystemConfig, w_b: &GramMatrix) -> Result<()> {
    cfg.validate()?;
    if w_b.dim() != cfg.n_a {
        return Err(Error::InvalidArgument(alloc::format!(
            "Gram matrix dimension {} does not match n_a = {}",
            w_b.dim(),
            cfg.n_a
        )));
    }
    Ok(())
}

fn assemble(
    cfg: &SystemConfig,
    w_b: &GramMatrix,
    alloc: Vec<f64>,
    lambda: f64,
    eta: f64,
    mode: CovertnessMode,
    multi_root: bool,
) -> CovarianceSolution {
    let mut sorted = alloc.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let divergence =
        divergence::kl_isotropic(&sorted, cfg.gamma_w, cfg.sigma_w2, cfg.n_w);
    let rate = rate_of(&alloc, w_b.eigenvalues(), cfg.sigma_b2);
    CovarianceSolution {
        eigvecs: w_b.eigenvectors().clone(),
        alloc: alloc.clone(),
        p_th: alloc.iter().sum(),
        rate,
        divergence,
        lambda,
        eta,
        mode,
        multi_root,
    }
}

/// Exact solver with a shared secret: the full relative entropy per use is
/// kept at or below `2 delta^2 / n`.
pub fn solve_secret(cfg: &SystemConfig, w_b: &GramMatrix) -> Result<CovarianceSolution> {
    solve_with(cfg, w_b, CovertnessMode::Secret, &OptimizerSettings::default())
}

/// Exact solver without a shared secret: the adversary-capacity term per use
/// is kept at or below `2 delta^2 / n`.
pub fn solve_nosecret(cfg: &SystemConfig, w_b: &GramMatrix) -> Result<CovarianceSolution> {
    solve_with(cfg, w_b, CovertnessMode::NoSecret, &OptimizerSettings::default())
}

pub fn solve_with(
    cfg: &SystemConfig,
    w_b: &GramMatrix,
    mode: CovertnessMode,
    settings: &OptimizerSettings,
) -> Result<CovarianceSolution> {
    check_inputs(cfg, w_b)?;
    let gains = w_b.eigenvalues();
    if gains.iter().all(|&g| g <= 0.0) {
        return Err(Error::DegenerateChannel("main channel has no usable eigenmode".to_string()));
    }
    let budget = cfg.divergence_budget_per_use();
    let m = cfg.m_active();
    let s = cfg.sigma_w2 / cfg.gamma_w;
    let n_modes = gains.len();

    if budget <= 0.0 {
        // delta = 0: the only feasible covariance is zero.
        return Ok(assemble(cfg, w_b, vec![0.0; n_modes], 0.0, 0.0, mode, false));
    }

    // Unconstrained water-fill at full power; done if it is already covert.
    let (wf_alloc, mu) = standard_waterfill(gains, cfg.sigma_b2, cfg.power)?;
    if worst_case_constraint(&wf_alloc, m, s, mode) <= budget * (1.0 + settings.constraint_tol) {
        let lambda = if mu > 0.0 { 1.0 / mu } else { 0.0 };
        return Ok(assemble(cfg, w_b, wf_alloc, lambda, 0.0, mode, false));
    }

    // The binding adversary covers the M strongest allocations. Along the
    // sorted gains an optimum is itself sorted (pairing more power with more
    // gain never hurts the rate and leaves the covered multiset unchanged),
    // so cover the M strongest modes and cap every uncovered mode at the
    // smallest covered allocation, iterating the cap to a fixed point.
    let covered: Vec<bool> = (0..n_modes).map(|i| i < m).collect();
    let mut cap = f64::INFINITY;
    for _round in 0..32 {
        let upper: Vec<f64> = covered
            .iter()
            .map(|&c| if c { cfg.power } else { cap.min(cfg.power) })
            .collect();
        let (lambda, eta, alloc, multi) =
            solve_binding(cfg, gains, &covered, &upper, budget, s, mode, settings)?;
        let min_covered = alloc
            .iter()
            .zip(covered.iter())
            .filter(|&(_, &c)| c)
            .map(|(&l, _)| l)
            .fold(f64::INFINITY, f64::min);
        let max_uncovered = alloc
            .iter()
            .zip(covered.iter())
            .filter(|&(_, &c)| !c)
            .map(|(&l, _)| l)
            .fold(0.0f64, f64::max);
        if max_uncovered <= min_covered * (1.0 + 1.0e-9) + 1.0e-300 {
            return Ok(assemble(cfg, w_b, alloc, lambda, eta, mode, multi));
        }
        cap = min_covered;
    }
    Err(Error::Convergence {
        context: "ordering-cap fixed point".to_string(),
        residual: f64::NAN,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_binding(
    cfg: &SystemConfig,
    gains: &[f64],
    covered: &[bool],
    upper: &[f64],
    budget: f64,
    s: f64,
    mode: CovertnessMode,
    settings: &OptimizerSettings,
) -> Result<(f64, f64, Vec<f64>, bool)> {
    let dual = solve_dual(cfg, gains, covered, upper, budget, s, mode, settings)?;
    if mode == CovertnessMode::Secret {
        return Ok(dual);
    }
    // The no-secret constraint set is not convex; the dual can undershoot
    // (its per-mode profile may even be exactly flat), so refine with a
    // primal exchange pass over the adversary-budget coordinates and keep
    // the better feasible point.
    let primal = nosecret_primal(cfg, gains, covered, upper, budget, s, &dual.2);
    let rate_of_alloc = |a: &[f64]| rate_of(a, gains, cfg.sigma_b2);
    match primal {
        Some(alloc) if rate_of_alloc(&alloc) > rate_of_alloc(&dual.2) => {
            let (lambda, eta) = recover_multipliers(cfg, gains, covered, &alloc, s, mode);
            Ok((lambda, eta, alloc, dual.3))
        }
        _ => Ok(dual),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_dual(
    cfg: &SystemConfig,
    gains: &[f64],
    covered: &[bool],
    upper: &[f64],
    budget: f64,
    s: f64,
    mode: CovertnessMode,
    settings: &OptimizerSettings,
) -> Result<(f64, f64, Vec<f64>, bool)> {
    let problem = ModeProblem { gains, covered, upper, sigma_b2: cfg.sigma_b2, s, mode };
    let covered_constraint = |alloc: &[f64]| -> f64 {
        alloc
            .iter()
            .zip(covered.iter())
            .filter(|(_, &c)| c)
            .map(|(&l, _)| mode_penalty(mode, s, l))
            .sum()
    };

    // eta = 0 is infeasible here (the caller checked the water-fill), so
    // bracket the divergence multiplier geometrically and bisect.
    let mut eta_hi = 1.0e-12;
    let mut feasible: Option<(f64, Vec<f64>, bool)> = None;
    let mut last_residual = f64::NAN;
    while eta_hi <= 1.0e18 {
        let (lambda, alloc, multi) = problem.inner_power(eta_hi, cfg.power, settings);
        let d = covered_constraint(&alloc);
        last_residual = d - budget;
        if d <= budget {
            feasible = Some((lambda, alloc, multi));
            break;
        }
        eta_hi *= 10.0;
    }
    let (mut lambda_best, mut alloc_best, mut multi_best) = feasible.ok_or(Error::Convergence {
        context: "divergence multiplier bracketing".to_string(),
        residual: last_residual,
    })?;
    let mut eta_lo = if eta_hi > 1.0e-12 { eta_hi / 10.0 } else { 0.0 };
    let mut eta_best = eta_hi;
    for _ in 0..settings.max_iter {
        let mid = 0.5 * (eta_lo + eta_hi);
        let (lambda, alloc, multi) = problem.inner_power(mid, cfg.power, settings);
        let d = covered_constraint(&alloc);
        if d <= budget {
            eta_hi = mid;
            eta_best = mid;
            lambda_best = lambda;
            alloc_best = alloc;
            multi_best = multi;
        } else {
            eta_lo = mid;
        }
        if eta_hi - eta_lo <= settings.bisect_tol * eta_hi.max(1.0e-300) {
            break;
        }
    }
    Ok((lambda_best, eta_best, alloc_best, multi_best))
}

/// Primal pass for the binding no-secret case in adversary-budget
/// coordinates `u_i = ln(1 + L_i / s)`: the constraint over the covered
/// modes becomes the simplex `sum u_i = budget`, and repeated pairwise
/// redistribution (endpoints included, so vertex optima are reachable)
/// converges to a pairwise-optimal point. Exact up to scan resolution for
/// two covered modes.
fn nosecret_primal(
    cfg: &SystemConfig,
    gains: &[f64],
    covered: &[bool],
    upper: &[f64],
    budget: f64,
    s: f64,
    dual_alloc: &[f64],
) -> Option<Vec<f64>> {
    let idx: Vec<usize> = (0..gains.len())
        .filter(|&i| covered[i] && gains[i] > 0.0)
        .collect();
    if idx.is_empty() {
        return None;
    }
    // Power consumed by uncovered modes stays as the dual set it.
    let uncovered_power: f64 = dual_alloc
        .iter()
        .zip(covered.iter())
        .filter(|(_, &c)| !c)
        .map(|(&l, _)| l)
        .sum();
    let power_avail = cfg.power - uncovered_power;
    if power_avail <= 0.0 {
        return None;
    }
    let rate_u = |i: usize, u: f64| -> f64 {
        let lam = s * u.exp_m1();
        (lam * gains[i] / cfg.sigma_b2).ln_1p()
    };
    let u_cap = |i: usize| -> f64 { (upper[i].min(cfg.power) / s).ln_1p() };

    let k = idx.len();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![budget / k as f64; k]);
    for v in 0..k {
        let mut u = vec![0.0; k];
        u[v] = budget;
        starts.push(u);
    }
    starts.push(idx.iter().map(|&i| (dual_alloc[i] / s).ln_1p()).collect());

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mut u in starts {
        // Clamp to per-mode caps, dumping any excess on modes with headroom.
        let caps: Vec<f64> = idx.iter().map(|&i| u_cap(i)).collect();
        let mut excess = 0.0;
        for (ui, &ci) in u.iter_mut().zip(caps.iter()) {
            if *ui > ci {
                excess += *ui - ci;
                *ui = ci;
            }
        }
        for (ui, &ci) in u.iter_mut().zip(caps.iter()) {
            if excess <= 0.0 {
                break;
            }
            let room = ci - *ui;
            let take = room.min(excess);
            *ui += take;
            excess -= take;
        }
        if excess > budget * 1.0e-12 {
            continue;
        }

        let total_power = |u: &[f64]| -> f64 { u.iter().map(|&ui| s * ui.exp_m1()).sum() };
        if total_power(&u) > power_avail * (1.0 + 1.0e-12) {
            continue;
        }
        for _sweep in 0..64 {
            let mut improved = false;
            for a in 0..k {
                for b in (a + 1)..k {
                    let t_total = u[a] + u[b];
                    if t_total <= 0.0 {
                        continue;
                    }
                    let others_power = total_power(&u) - s * u[a].exp_m1() - s * u[b].exp_m1();
                    let pair_rate = |t: f64| -> f64 {
                        rate_u(idx[a], t) + rate_u(idx[b], t_total - t)
                    };
                    let pair_ok = |t: f64| -> bool {
                        t <= u_cap(idx[a])
                            && t_total - t <= u_cap(idx[b])
                            && others_power + s * t.exp_m1() + s * (t_total - t).exp_m1()
                                <= power_avail * (1.0 + 1.0e-12)
                    };
                    const SCAN: usize = 256;
                    let mut best_t = u[a];
                    let mut best_v = pair_rate(u[a]);
                    for step in 0..=SCAN {
                        let t = t_total * step as f64 / SCAN as f64;
                        if pair_ok(t) {
                            let v = pair_rate(t);
                            if v > best_v {
                                best_v = v;
                                best_t = t;
                            }
                        }
                    }
                    // Local refinement around the best scan point.
                    let h = t_total / SCAN as f64;
                    let (mut lo, mut hi) = ((best_t - h).max(0.0), (best_t + h).min(t_total));
                    for _ in 0..60 {
                        let m1 = lo + (hi - lo) / 3.0;
                        let m2 = hi - (hi - lo) / 3.0;
                        let v1 = if pair_ok(m1) { pair_rate(m1) } else { f64::NEG_INFINITY };
                        let v2 = if pair_ok(m2) { pair_rate(m2) } else { f64::NEG_INFINITY };
                        if v1 < v2 {
                            lo = m1;
                        } else {
                            hi = m2;
                        }
                    }
                    let t_ref = 0.5 * (lo + hi);
                    if pair_ok(t_ref) && pair_rate(t_ref) > best_v {
                        best_v = pair_rate(t_ref);
                        best_t = t_ref;
                    }
                    let current = pair_rate(u[a]);
                    if best_v > current * (1.0 + 1.0e-14) + 1.0e-300 {
                        u[a] = best_t;
                        u[b] = t_total - best_t;
                        improved = true;
                    }
                }
            }
            if !improved || k == 1 {
                break;
            }
        }
        let rate: f64 = (0..k).map(|j| rate_u(idx[j], u[j])).sum();
        if best.as_ref().map_or(true, |(r, _)| rate > *r) {
            best = Some((rate, u));
        }
    }

    let (_, u) = best?;
    let mut alloc = dual_alloc.to_vec();
    for (j, &i) in idx.iter().enumerate() {
        alloc[i] = s * u[j].exp_m1();
    }
    Some(alloc)
}

fn strongest_indices(alloc: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..alloc.len()).collect();
    idx.sort_by(|&a, &b| alloc[b].total_cmp(&alloc[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

/// Reconstructs `(lambda, eta)` for a primal solution: zero power price when
/// the budget is slack, and the covertness price read off the stationarity
/// of the strongest active mode.
fn recover_multipliers(
    cfg: &SystemConfig,
    gains: &[f64],
    covered: &[bool],
    alloc: &[f64],
    s: f64,
    mode: CovertnessMode,
) -> (f64, f64) {
    let total: f64 = alloc.iter().sum();
    let lambda = if total >= cfg.power * (1.0 - 1.0e-9) {
        // Price from an uncovered water-filled mode if one is active.
        alloc
            .iter()
            .zip(gains.iter().zip(covered.iter()))
            .filter(|&(&l, (_, &c))| !c && l > 0.0)
            .map(|(&l, (&g, _))| g / (cfg.sigma_b2 + l * g))
            .fold(0.0f64, f64::max)
    } else {
        0.0
    };
    let eta = alloc
        .iter()
        .zip(gains.iter().zip(covered.iter()))
        .filter(|&(&l, (&g, &c))| c && l > 0.0 && g > 0.0)
        .map(|(&l, (&g, _))| {
            (g / (cfg.sigma_b2 + l * g) - lambda) / mode_penalty_deriv(mode, s, l)
        })
        .fold(0.0f64, f64::max);
    (lambda, eta)
}

/// Closed-form achievable scheme with a shared secret: power threshold
/// `min(P, sqrt(2) N sigma_w^2 delta / (gamma_w sqrt(n N_w)))`, then
/// conventional water-filling.
///
/// If the water-filled allocation concentrates enough to overshoot the
/// divergence budget (possible off the well-conditioned regime the threshold
/// formula assumes), the threshold is scaled back until the scheme is covert.
pub fn achievable_scheme_secret(cfg: &SystemConfig, w_b: &GramMatrix) -> Result<CovarianceSolution> {
    check_inputs(cfg, w_b)?;
    let n = cfg.blocklength as f64;
    let p_raw = core::f64::consts::SQRT_2 * cfg.n_active() as f64 * cfg.sigma_w2 * cfg.delta
        / (cfg.gamma_w * (n * cfg.n_w as f64).sqrt());
    achievable_common(cfg, w_b, p_raw.min(cfg.power), CovertnessMode::Secret)
}

/// Closed-form achievable scheme without a shared secret: power threshold
/// `min(P, 2 N sigma_w^2 delta^2 / (gamma_w n M))`, then water-filling.
pub fn achievable_scheme_nosecret(
    cfg: &SystemConfig,
    w_b: &GramMatrix,
) -> Result<CovarianceSolution> {
    check_inputs(cfg, w_b)?;
    let n = cfg.blocklength as f64;
    let p_raw = 2.0 * cfg.n_active() as f64 * cfg.sigma_w2 * cfg.delta * cfg.delta
        / (cfg.gamma_w * n * cfg.m_active() as f64);
    achievable_common(cfg, w_b, p_raw.min(cfg.power), CovertnessMode::NoSecret)
}

fn achievable_common(
    cfg: &SystemConfig,
    w_b: &GramMatrix,
    p_th: f64,
    mode: CovertnessMode,
) -> Result<CovarianceSolution> {
    let budget = cfg.divergence_budget_per_use();
    let m = cfg.m_active();
    let s = cfg.sigma_w2 / cfg.gamma_w;
    let gains = w_b.eigenvalues();
    let constraint = |p: f64| -> Result<f64> {
        let (alloc, _) = standard_waterfill(gains, cfg.sigma_b2, p)?;
        Ok(worst_case_constraint(&alloc, m, s, mode))
    };

    let mut p_use = p_th;
    if p_th > 0.0 && constraint(p_th)? > budget {
        // Scale back to the covert boundary.
        let mut lo = 0.0;
        let mut hi = p_th;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if constraint(mid)? <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        p_use = lo;
    }
    let (alloc, mu) = standard_waterfill(gains, cfg.sigma_b2, p_use)?;
    let lambda = if mu > 0.0 { 1.0 / mu } else { 0.0 };
    Ok(assemble(cfg, w_b, alloc, lambda, 0.0, mode, false))
}

/// First-order optimality report for a solver output.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// Per-mode stationarity residual (gradient violation at the boundary).
    pub stationarity: Vec<f64>,
    pub max_stationarity: f64,
    /// Power-budget violation `max(0, sum - P)`, relative to `P`.
    pub power_violation: f64,
    /// Covertness violation `max(0, d - budget)`, relative to the budget.
    pub divergence_violation: f64,
    /// `lambda * |P - sum(alloc)|`.
    pub comp_power: f64,
    /// `eta * |budget - d|`.
    pub comp_divergence: f64,
    pub max_residual: f64,
}

/// Evaluates the stationarity and complementary-slackness residuals of a
/// solution against its own multipliers.
pub fn kkt_residual(
    sol: &CovarianceSolution,
    cfg: &SystemConfig,
    w_b: &GramMatrix,
) -> KktReport {
    let s = cfg.sigma_w2 / cfg.gamma_w;
    let m = cfg.m_active();
    let covered_set = strongest_indices(&sol.alloc, m);
    let mut covered = vec![false; sol.alloc.len()];
    for &i in &covered_set {
        covered[i] = true;
    }
    let gains = w_b.eigenvalues();
    let mut stationarity = Vec::with_capacity(sol.alloc.len());
    for i in 0..sol.alloc.len() {
        let g = gains[i];
        let l = sol.alloc[i];
        if g <= 0.0 {
            stationarity.push(0.0);
            continue;
        }
        let eta_eff = if covered[i] { sol.eta } else { 0.0 };
        let grad = g / (cfg.sigma_b2 + l * g)
            - sol.lambda
            - eta_eff * mode_penalty_deriv(sol.mode, s, l);
        if l > 0.0 {
            stationarity.push(grad.abs());
        } else {
            stationarity.push(grad.max(0.0));
        }
    }
    let max_stationarity = stationarity.iter().fold(0.0f64, |a, &b| a.max(b));
    let total: f64 = sol.alloc.iter().sum();
    let budget = cfg.divergence_budget_per_use();
    let d = sol.constraint_value();
    let power_violation = (total - cfg.power).max(0.0) / cfg.power;
    let divergence_violation = if budget > 0.0 {
        (d - budget).max(0.0) / budget
    } else {
        d.max(0.0)
    };
    let comp_power = sol.lambda * (cfg.power - total).abs();
    let comp_divergence = sol.eta * (budget - d).abs();
    let max_residual = max_stationarity
        .max(power_violation)
        .max(divergence_violation)
        .max(comp_power)
        .max(comp_divergence);
    KktReport {
        stationarity,
        max_stationarity,
        power_violation,
        divergence_violation,
        comp_power,
        comp_divergence,
        max_residual,
    }
}

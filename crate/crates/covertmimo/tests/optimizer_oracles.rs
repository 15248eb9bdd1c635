//! Brute-force oracles for the covariance solvers: exhaustive grid searches
//! over the feasible allocations, plus the sandwich and monotonicity
//! properties the solutions must satisfy.
//!
//! The oracle code below deliberately re-derives the objective and the
//! constraints from scratch instead of calling into the solver internals.

use covertmimo::channel::{GramMatrix, SystemConfig};
use covertmimo::linalg::CMatrix;
use covertmimo::optimizer::{
    achievable_scheme_nosecret, achievable_scheme_secret, kkt_residual, solve_nosecret,
    solve_secret, standard_waterfill, CovarianceSolution,
};
use covertmimo::scaling::{srl_bounds_nosecret, srl_bounds_secret};

fn gram_diag(entries: &[f64]) -> GramMatrix {
    GramMatrix::from_matrix(CMatrix::diagonal(entries)).unwrap()
}

fn scalar_cfg() -> SystemConfig {
    SystemConfig {
        n_a: 1,
        n_b: 1,
        n_w: 1,
        sigma_b2: 1.0,
        sigma_w2: 1.0,
        power: 10.0,
        delta: 0.1,
        blocklength: 10_000,
        gamma_w: 1.0,
    }
}

fn two_mode_cfg() -> SystemConfig {
    SystemConfig { n_a: 2, n_b: 2, n_w: 2, ..scalar_cfg() }
}

/// Oracle-side per-mode divergence: direct evaluation, no shared code with
/// the crate's series-corrected form.
fn oracle_secret_penalty(x: f64) -> f64 {
    (1.0 + x).ln() + 1.0 / (1.0 + x) - 1.0
}

fn oracle_nosecret_penalty(x: f64) -> f64 {
    (1.0 + x).ln()
}

/// Largest single-mode gain the budget allows, by doubling and bisection.
fn oracle_mode_cap(penalty: impl Fn(f64) -> f64, budget: f64, power: f64) -> f64 {
    if penalty(power) <= budget {
        return power;
    }
    let mut lo = 0.0;
    let mut hi = power;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if penalty(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn check_feasible(sol: &CovarianceSolution, cfg: &SystemConfig) {
    assert!(sol.alloc.iter().all(|&l| l >= 0.0));
    assert!(sol.p_th <= cfg.power + 1e-9, "power violated: {}", sol.p_th);
    let n = cfg.blocklength as f64;
    assert!(
        n * sol.constraint_value() <= cfg.divergence_budget_total() + 1e-9,
        "covertness violated: {:e}",
        n * sol.constraint_value()
    );
    // Rate recomputes from the allocation.
    let recomputed: f64 = sol
        .alloc
        .iter()
        .zip([1.0f64, 1.0].iter())
        .map(|(&l, &g)| (l * g / cfg.sigma_b2).ln_1p())
        .sum();
    if sol.alloc.len() <= 2 {
        assert!((recomputed - sol.rate).abs() <= 1e-12 * (1.0 + sol.rate.abs()));
    }
}

#[test]
fn secret_scalar_matches_grid_oracle() {
    let cfg = scalar_cfg();
    let w = gram_diag(&[1.0]);
    let sol = solve_secret(&cfg, &w).unwrap();
    check_feasible(&sol, &cfg);

    let n = cfg.blocklength as f64;
    let budget = cfg.divergence_budget_total();
    let res = 1.0e-6;
    let steps = (cfg.power / res) as usize;
    let mut best = 0.0f64;
    for k in 0..=steps {
        let lam = k as f64 * res;
        if n * oracle_secret_penalty(lam) <= budget {
            let rate = (1.0f64 + lam).ln();
            if rate > best {
                best = rate;
            }
        } else {
            break; // penalty is increasing in the allocation
        }
    }
    assert!(
        (sol.rate - best).abs() <= 1.0e-3,
        "solver {} vs oracle {}",
        sol.rate,
        best
    );
    let report = kkt_residual(&sol, &cfg, &w);
    assert!(report.max_residual <= 1e-6, "kkt residual {:e}", report.max_residual);
}

#[test]
fn nosecret_scalar_matches_grid_oracle() {
    let cfg = scalar_cfg();
    let w = gram_diag(&[1.0]);
    let sol = solve_nosecret(&cfg, &w).unwrap();
    check_feasible(&sol, &cfg);

    let n = cfg.blocklength as f64;
    let budget = cfg.divergence_budget_total();
    // Adaptive range: the constraint confines the allocation to a sliver of
    // [0, P], so the grid covers exactly the feasible segment.
    let cap = oracle_mode_cap(oracle_nosecret_penalty, budget / n, cfg.power);
    let steps = 1_000_000usize;
    let mut best = 0.0f64;
    for k in 0..=steps {
        let lam = cap * k as f64 / steps as f64;
        if n * oracle_nosecret_penalty(lam) <= budget {
            best = best.max((1.0f64 + lam).ln());
        }
    }
    assert!(
        (sol.rate - best).abs() <= 1.0e-3,
        "solver {} vs oracle {}",
        sol.rate,
        best
    );
    let report = kkt_residual(&sol, &cfg, &w);
    assert!(report.max_residual <= 1e-6, "kkt residual {:e}", report.max_residual);
}

fn grid_oracle_2d(
    cfg: &SystemConfig,
    gains: (f64, f64),
    penalty: impl Fn(f64) -> f64 + Copy,
    covered_modes: usize,
    steps: usize,
) -> f64 {
    let n = cfg.blocklength as f64;
    let budget = cfg.divergence_budget_total() / n;
    let s = cfg.sigma_w2 / cfg.gamma_w;
    let pen = move |lam: f64| penalty(lam / s);
    let cap = oracle_mode_cap(pen, budget, cfg.power);
    let mut best = 0.0f64;
    for i in 0..=steps {
        let l1 = cap * i as f64 / steps as f64;
        for j in 0..=steps {
            let l2 = cap * j as f64 / steps as f64;
            if l1 + l2 > cfg.power {
                continue;
            }
            let d = if covered_modes == 2 {
                pen(l1) + pen(l2)
            } else {
                pen(l1.max(l2))
            };
            if d <= budget {
                let rate = (l1 * gains.0 / cfg.sigma_b2).ln_1p()
                    + (l2 * gains.1 / cfg.sigma_b2).ln_1p();
                best = best.max(rate);
            }
        }
    }
    best
}

#[test]
fn secret_two_mode_matches_grid_oracle() {
    let cfg = two_mode_cfg();
    let w = gram_diag(&[1.0, 1.0]);
    let sol = solve_secret(&cfg, &w).unwrap();
    check_feasible(&sol, &cfg);
    let best = grid_oracle_2d(&cfg, (1.0, 1.0), oracle_secret_penalty, 2, 1_000);
    assert!(
        (sol.rate - best).abs() <= 1.0e-3,
        "solver {} vs oracle {}",
        sol.rate,
        best
    );
    let report = kkt_residual(&sol, &cfg, &w);
    assert!(report.max_residual <= 1e-6, "kkt residual {:e}", report.max_residual);
}

#[test]
fn nosecret_two_mode_matches_grid_oracle() {
    let cfg = two_mode_cfg();
    let w = gram_diag(&[1.0, 1.0]);
    let sol = solve_nosecret(&cfg, &w).unwrap();
    check_feasible(&sol, &cfg);
    let best = grid_oracle_2d(&cfg, (1.0, 1.0), oracle_nosecret_penalty, 2, 1_000);
    assert!(
        (sol.rate - best).abs() <= 1.0e-3,
        "solver {} vs oracle {}",
        sol.rate,
        best
    );
}

#[test]
fn uneven_gains_match_grid_oracle() {
    let mut cfg = two_mode_cfg();
    cfg.delta = 0.05;
    let gains = (1.0, 0.4);
    let w = gram_diag(&[gains.0, gains.1]);
    for secret in [true, false] {
        let sol = if secret {
            solve_secret(&cfg, &w).unwrap()
        } else {
            solve_nosecret(&cfg, &w).unwrap()
        };
        let best = if secret {
            grid_oracle_2d(&cfg, gains, oracle_secret_penalty, 2, 1_000)
        } else {
            grid_oracle_2d(&cfg, gains, oracle_nosecret_penalty, 2, 1_000)
        };
        assert!(
            (sol.rate - best).abs() <= 1.0e-3,
            "secret={secret}: solver {} vs oracle {}",
            sol.rate,
            best
        );
    }
}

#[test]
fn single_antenna_adversary_covers_strongest_mode() {
    // M = 1 < N = 2: the worst-case adversary observes only the strongest
    // allocation, so the oracle constraint is on max(L1, L2).
    let mut cfg = two_mode_cfg();
    cfg.n_w = 1;
    let w = gram_diag(&[1.0, 0.8]);
    let sol = solve_secret(&cfg, &w).unwrap();
    let n = cfg.blocklength as f64;
    let worst = sol.alloc.iter().cloned().fold(0.0f64, f64::max);
    assert!(
        n * oracle_secret_penalty(worst / (cfg.sigma_w2 / cfg.gamma_w))
            <= cfg.divergence_budget_total() + 1e-9
    );
    let best = grid_oracle_2d(&cfg, (1.0, 0.8), oracle_secret_penalty, 1, 1_000);
    assert!(
        (sol.rate - best).abs() <= 1.0e-3,
        "solver {} vs oracle {}",
        sol.rate,
        best
    );
}

#[test]
fn achievable_never_beats_exact() {
    for (cfg, gains) in [
        (scalar_cfg(), vec![1.0]),
        (two_mode_cfg(), vec![1.0, 1.0]),
        (SystemConfig { delta: 0.02, ..two_mode_cfg() }, vec![1.0, 0.5]),
    ] {
        let w = gram_diag(&gains);
        let exact = solve_secret(&cfg, &w).unwrap();
        let scheme = achievable_scheme_secret(&cfg, &w).unwrap();
        assert!(
            exact.rate >= scheme.rate - 1e-9,
            "secret: exact {} < scheme {}",
            exact.rate,
            scheme.rate
        );
        let exact = solve_nosecret(&cfg, &w).unwrap();
        let scheme = achievable_scheme_nosecret(&cfg, &w).unwrap();
        assert!(
            exact.rate >= scheme.rate - 1e-9,
            "no-secret: exact {} < scheme {}",
            exact.rate,
            scheme.rate
        );
    }
}

#[test]
fn exact_rate_sits_in_the_sandwich() {
    let mut cfg = two_mode_cfg();
    cfg.delta = 0.01;
    let w = gram_diag(&[1.0, 1.0]);
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        cfg.blocklength = n;
        let sol = solve_secret(&cfg, &w).unwrap();
        let b = srl_bounds_secret(&cfg, w.eigenvalues());
        assert!(
            sol.rate >= b.lower - 1e-15 && sol.rate <= b.upper * (1.0 + 1e-6),
            "n={n}: rate {:e} outside [{:e}, {:e}]",
            sol.rate,
            b.lower,
            b.upper
        );
        let sol = solve_nosecret(&cfg, &w).unwrap();
        let b = srl_bounds_nosecret(&cfg, w.eigenvalues()).unwrap();
        assert!(
            sol.rate >= b.lower - 1e-15 && sol.rate <= b.upper * (1.0 + 1e-6),
            "n={n} (no secret): rate {:e} outside [{:e}, {:e}]",
            sol.rate,
            b.lower,
            b.upper
        );
    }
}

#[test]
fn rate_is_monotone_in_the_parameters() {
    let w = gram_diag(&[1.0, 1.0]);

    // Nondecreasing in delta.
    let mut prev = 0.0;
    for delta in [0.01, 0.02, 0.05, 0.1, 0.2] {
        let cfg = SystemConfig { delta, ..two_mode_cfg() };
        let r = solve_secret(&cfg, &w).unwrap().rate;
        assert!(r >= prev - 1e-12, "delta={delta}: {r} < {prev}");
        prev = r;
    }

    // Nonincreasing in n (secret mode).
    let mut prev = f64::INFINITY;
    for n in [100u64, 1_000, 10_000, 100_000] {
        let cfg = SystemConfig { blocklength: n, ..two_mode_cfg() };
        let r = solve_secret(&cfg, &w).unwrap().rate;
        assert!(r <= prev + 1e-12, "n={n}: {r} > {prev}");
        prev = r;
    }

    // Nondecreasing in P.
    let mut prev = 0.0;
    for power in [1e-5, 1e-4, 1e-3, 1.0, 10.0] {
        let cfg = SystemConfig { power, ..two_mode_cfg() };
        let r = solve_secret(&cfg, &w).unwrap().rate;
        assert!(r >= prev - 1e-12, "P={power}: {r} < {prev}");
        prev = r;
    }
}

#[test]
fn waterfill_split_fraction_oracle() {
    // 1-D scan over the split fraction confirms the two-mode water-fill.
    let gains = [4.0, 1.0];
    let p = 1.0;
    let (alloc, _) = standard_waterfill(&gains, 1.0, p).unwrap();
    let mut best = (0.0f64, 0.0f64);
    let steps = 100_000usize;
    for k in 0..=steps {
        let f = k as f64 / steps as f64;
        let rate = (f * p * gains[0]).ln_1p() + ((1.0 - f) * p * gains[1]).ln_1p();
        if rate > best.0 {
            best = (rate, f);
        }
    }
    assert!((alloc[0] - best.1 * p).abs() < 1e-4, "{} vs {}", alloc[0], best.1 * p);
    let rate = (alloc[0] * gains[0]).ln_1p() + (alloc[1] * gains[1]).ln_1p();
    assert!(rate >= best.0 - 1e-9);
}

//! Nested protocol: the inner iteration finder, depth selection, termination
//! statistics, and the nested adaptive search driver.
//!
//! The decision tree is cut at depth `k`; an inner amplification round on the
//! first `k` items boosts the partially marked subspace, and the resulting
//! biased state feeds the outer search on the full space. One outer step with
//! `r` iterations after an inner round with `r_in` iterations costs
//! `(2r+1)(n + 2*r_in*k)` preparation-step units; the inner finder itself
//! charges `k(2*r_in+1)` per validation measurement.

use rand::Rng;

use crate::amptrack::{self, BiasConfig, MarkedEnsemble};
use crate::error::{Error, Result};
use crate::gas::{
    initial_incumbent, sample_rotation_count, CostLedger, GasRun, Incumbent, QSearchState,
    StartMode,
};
use crate::instances::KnapsackInstance;
use crate::ksolve;
use crate::real::Real;
use crate::stats;

/// How the cut depth is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthPolicy<R: Real> {
    /// Always cut at this depth.
    Fixed(usize),
    /// Cut at the depth whose remaining-value ratio is closest to the
    /// target (default 0.6), smallest depth on ties.
    RvtrTarget(R),
}

impl<R: Real> DepthPolicy<R> {
    pub fn default_target() -> Self {
        DepthPolicy::RvtrTarget(R::of(0.6))
    }
}

/// Remaining value-threshold ratio: profit mass of items `k..n` over the
/// incumbent value.
pub fn rvtr<R: Real>(inst: &KnapsackInstance, k: usize, y: u64) -> Result<R> {
    assert!(k <= inst.n, "depth must be at most n");
    if y == 0 {
        return Err(Error::UndefinedRatio(
            "RVTR needs a positive incumbent value".into(),
        ));
    }
    Ok(R::of_u64(inst.suffix_profit(k)) / R::of_u64(y))
}

/// Select the cut depth for the current incumbent.
pub fn choose_depth<R: Real>(
    inst: &KnapsackInstance,
    y: u64,
    policy: &DepthPolicy<R>,
) -> Result<usize> {
    if inst.n < 2 {
        return Err(Error::NoValidDepth { n: inst.n });
    }
    match *policy {
        DepthPolicy::Fixed(k) => {
            if k < 1 || k > inst.n - 1 {
                return Err(Error::InvalidParameter(format!(
                    "fixed depth {k} outside 1..={}",
                    inst.n - 1
                )));
            }
            Ok(k)
        }
        DepthPolicy::RvtrTarget(target) => {
            let mut best_k = 1;
            let mut best_dist = R::infinity();
            for k in 1..inst.n {
                let dist = (rvtr::<R>(inst, k, y)? - target).abs();
                if dist < best_dist {
                    best_dist = dist;
                    best_k = k;
                }
            }
            Ok(best_k)
        }
    }
}

/// Exact binomial confidence bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpBounds<R: Real> {
    pub p_lower: R,
    pub p_upper: R,
    pub confidence: R,
}

/// Clopper-Pearson interval for `successes` out of `trials` at the given
/// confidence level: beta-quantile bounds, exact by construction. All
/// successes force `p_upper = 1`; zero successes force `p_lower = 0`.
pub fn clopper_pearson<R: Real>(
    successes: u64,
    trials: u64,
    confidence: R,
) -> Result<CpBounds<R>> {
    if trials < 1 || successes > trials {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
        )));
    }
    if confidence <= R::zero() || confidence >= R::one() {
        return Err(Error::InvalidParameter(
            "confidence must lie strictly inside (0, 1)".into(),
        ));
    }
    let alpha = R::one() - confidence;
    let half = alpha / R::of(2.0);
    let s = R::of_u64(successes);
    let t = R::of_u64(trials);
    let p_lower = if successes == 0 {
        R::zero()
    } else {
        stats::inverse_incomplete_beta(s, t - s + R::one(), half)
    };
    let p_upper = if successes == trials {
        R::one()
    } else {
        stats::inverse_incomplete_beta(s + R::one(), t - s, R::one() - half)
    };
    Ok(CpBounds {
        p_lower,
        p_upper,
        confidence,
    })
}

/// Outcome of one inner-iteration-finder invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IifResult<R: Real> {
    pub inner_rotations: u64,
    /// Accumulated cost: `k(2*r_in+1)` per emulated measurement, failed
    /// validation rounds included.
    pub cost: R,
    /// Emulated measurements.
    pub attempts: u64,
    /// No useful inner amplification was found.
    pub degenerate: bool,
}

/// Rounds before the runaway guard fires and returns the best rotation
/// count seen so far.
pub const MAX_IIF_ROUNDS: usize = 64;

const THETA_NEAR_RIGHT_ANGLE: f64 = 1.0 - 1e-9;

/// Inner iteration finder: search for the rotation count that maximizes the
/// partially marked amplitude, validated by `validation_samples` consecutive
/// successful measurements. The value threshold is shifted by the remaining
/// profit mass; the rotation bound `m` is capped at `2^k`.
pub fn iif<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    k: usize,
    incumbent_value: u64,
    lambda: R,
    validation_samples: u64,
    rng: &mut G,
) -> Result<IifResult<R>> {
    assert!(k >= 1 && k <= inst.n, "depth must be in 1..=n");
    assert!(validation_samples >= 1, "need at least one sample");
    let marked = ksolve::enumerate_partial_marked(inst, incumbent_value as i64, k)?;
    let ens = amptrack::build_ensemble(inst, bias, &marked);
    iif_on_ensemble(&ens, k, lambda, validation_samples, rng)
}

/// Core of the finder, on an already-built partial ensemble.
pub fn iif_on_ensemble<R: Real, G: Rng>(
    ens: &MarkedEnsemble<R>,
    k: usize,
    lambda: R,
    validation_samples: u64,
    rng: &mut G,
) -> Result<IifResult<R>> {
    let step_cost = |r_in: u64| R::of_usize(k) * R::of_u64(2 * r_in + 1);
    if ens.is_empty() || ens.theta == R::zero() {
        return Ok(IifResult {
            inner_rotations: 0,
            cost: R::zero(),
            attempts: 0,
            degenerate: true,
        });
    }
    if ens.theta >= R::of(THETA_NEAR_RIGHT_ANGLE) * R::FRAC_PI_2() {
        // Already (nearly) fully amplified: the first round deterministically
        // validates r_in = 0, paying one measurement batch.
        return Ok(IifResult {
            inner_rotations: 0,
            cost: step_cost(0) * R::of_u64(validation_samples),
            attempts: validation_samples,
            degenerate: false,
        });
    }

    let m_cap = R::of(2.0).powi(k as i32);
    let mut qs = QSearchState::new(lambda);
    let mut cost = R::zero();
    let mut attempts = 0u64;
    let mut best: (u64, R) = (0, amptrack::success_probability(ens, 0));
    for _ in 0..MAX_IIF_ROUNDS {
        let r_in = sample_rotation_count(qs.m, rng);
        let p = amptrack::success_probability(ens, r_in);
        if p > best.1 {
            best = (r_in, p);
        }
        let mut successes = 0u64;
        for _ in 0..validation_samples {
            attempts += 1;
            cost = cost + step_cost(r_in);
            if R::of(rng.random::<f64>()) < p {
                successes += 1;
            } else {
                break;
            }
        }
        if successes == validation_samples {
            return Ok(IifResult {
                inner_rotations: r_in,
                cost,
                attempts,
                degenerate: false,
            });
        }
        qs.escalate_capped(m_cap);
    }
    // Runaway guard: no rotation count validated; hand back the best seen.
    Ok(IifResult {
        inner_rotations: best.0,
        cost,
        attempts,
        degenerate: true,
    })
}

/// Nested run configuration.
#[derive(Debug, Clone, Copy)]
pub struct NestedConfig<R: Real> {
    pub lambda: R,
    /// Consecutive successful validation measurements required (L).
    pub validation_samples: u64,
    pub budget: R,
    pub policy: DepthPolicy<R>,
    pub start: StartMode,
}

/// Outcome of a nested run: the generic run data plus the last inner
/// parameters in effect.
#[derive(Debug, Clone)]
pub struct NestedRun<R: Real> {
    pub run: GasRun<R>,
    pub last_depth: usize,
    pub last_inner_rotations: u64,
}

fn nested_step_cost<R: Real>(n: usize, k: usize, r_in: u64, r: u64) -> R {
    R::of_u64(2 * r + 1) * (R::of_usize(n) + R::of(2.0) * R::of_u64(r_in) * R::of_usize(k))
}

/// Build the outer-preparation ensemble for incumbent value `y`: partial
/// ensemble at depth `k`, inner amplification with `r_in` iterations,
/// extension onto the global marked set.
pub fn nested_global_ensemble<R: Real>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    y: u64,
    k: usize,
    r_in: u64,
) -> Result<MarkedEnsemble<R>> {
    let partial = ksolve::enumerate_partial_marked(inst, y as i64, k)?;
    let global = ksolve::enumerate_global_marked(inst, y as i64)?;
    let pens = amptrack::build_ensemble(inst, bias, &partial);
    let rotated = amptrack::apply_rotation(&pens, r_in);
    amptrack::extend_ensemble(inst, bias, &rotated, &global)
}

/// Full nested run. On every incumbent change the depth is re-chosen, the
/// inner iteration finder reruns (its cost lands in `ledger.inner`), and the
/// outer preparation ensemble is rebuilt. Terminates once the total cost
/// reaches the budget, evaluated after each composite step.
pub fn nested_gas<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    cfg: &NestedConfig<R>,
    rng: &mut G,
) -> Result<NestedRun<R>> {
    assert!(cfg.budget > R::zero(), "budget must be positive");
    let mut incumbent = initial_incumbent(inst, cfg.start, rng);
    let mut qs = QSearchState::new(cfg.lambda);
    let mut ledger = CostLedger::new();
    let mut trajectory = vec![(R::zero(), incumbent.value())];
    let mut segment: Option<(usize, u64, MarkedEnsemble<R>)> = None;
    let mut last_depth = 0usize;
    let mut last_inner_rotations = 0u64;

    loop {
        if segment.is_none() {
            let y = incumbent.value();
            // RVTR is undefined at y = 0 (possible only under random start);
            // every prefix is marked then, so any depth degenerates and the
            // cheapest one wins.
            let k = if y == 0 {
                1
            } else {
                choose_depth(inst, y, &cfg.policy)?
            };
            let partial = ksolve::enumerate_partial_marked(inst, y as i64, k)?;
            let pens = amptrack::build_ensemble(inst, bias, &partial);
            let iif_res =
                iif_on_ensemble(&pens, k, cfg.lambda, cfg.validation_samples, rng)?;
            ledger.add_inner(iif_res.cost);
            let r_in = iif_res.inner_rotations;
            let global = ksolve::enumerate_global_marked(inst, y as i64)?;
            let rotated = amptrack::apply_rotation(&pens, r_in);
            let ens = amptrack::extend_ensemble(inst, bias, &rotated, &global)?;
            last_depth = k;
            last_inner_rotations = r_in;
            segment = Some((k, r_in, ens));
        }
        let (k, r_in, ref ens) = *segment.as_ref().unwrap();
        let r = sample_rotation_count(qs.m, rng);
        let outcome = crate::gas::emulate_measurement(inst, ens, r, rng);
        ledger.add_outer(nested_step_cost(inst.n, k, r_in, r), r, r_in);
        match outcome {
            Some(sol) if sol.value > incumbent.value() => {
                incumbent = Incumbent::new(sol);
                qs.reset();
                trajectory.push((ledger.total(), incumbent.value()));
                segment = None;
            }
            _ => qs.escalate(),
        }
        if ledger.total() >= cfg.budget {
            return Ok(NestedRun {
                run: GasRun {
                    incumbent,
                    ledger,
                    trajectory,
                },
                last_depth,
                last_inner_rotations,
            });
        }
    }
}

/// Cost breakdown of a single-improvement nested run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementCost<R: Real> {
    pub total: R,
    pub inner: R,
    pub depth: usize,
    pub inner_rotations: u64,
}

/// Cost of improving incumbent value `y` once with the nested protocol at a
/// given depth, inner-finder cost included. `Ok(None)` when no improving
/// state exists or the safety budget runs out.
pub fn nested_cost_to_improve<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    y: u64,
    k: usize,
    lambda: R,
    validation_samples: u64,
    safety_budget: R,
    rng: &mut G,
) -> Result<Option<ImprovementCost<R>>> {
    let global = ksolve::enumerate_global_marked(inst, y as i64)?;
    if global.is_empty() {
        return Ok(None);
    }
    let partial = ksolve::enumerate_partial_marked(inst, y as i64, k)?;
    let pens = amptrack::build_ensemble(inst, bias, &partial);
    let iif_res = iif_on_ensemble(&pens, k, lambda, validation_samples, rng)?;
    let r_in = iif_res.inner_rotations;
    let rotated = amptrack::apply_rotation(&pens, r_in);
    let ens = amptrack::extend_ensemble(inst, bias, &rotated, &global)?;

    let mut qs = QSearchState::new(lambda);
    let mut cost = iif_res.cost;
    loop {
        let r = sample_rotation_count(qs.m, rng);
        cost = cost + nested_step_cost(inst.n, k, r_in, r);
        if crate::gas::emulate_measurement(inst, &ens, r, rng).is_some() {
            return Ok(Some(ImprovementCost {
                total: cost,
                inner: iif_res.cost,
                depth: k,
                inner_rotations: r_in,
            }));
        }
        qs.escalate();
        if cost >= safety_budget {
            return Ok(None);
        }
    }
}

/// Relative cost `log2(C_base / C_nested)`; positive when nesting is
/// cheaper.
pub fn relative_cost<R: Real>(c_base: R, c_nested: R) -> Result<R> {
    if c_base <= R::zero() || c_nested <= R::zero() {
        return Err(Error::UndefinedRatio(
            "relative cost needs positive costs".into(),
        ));
    }
    Ok((c_base / c_nested).log2())
}

/// Termination budget `B = C * n^t`.
pub fn budget<R: Real>(c_const: R, n: usize, t_exp: R) -> R {
    assert!(c_const > R::zero() && n >= 1);
    let base = R::of_usize(n);
    // Integer exponents stay exact.
    let power = if t_exp.fract() == R::zero() {
        base.powi(t_exp.to_i32().expect("small exponent"))
    } else {
        base.powf(t_exp)
    };
    c_const * power
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, Correlation};
    use crate::ksolve::{greedy_solution, optimal_solution};
    use crate::rng::protocol_rng;

    #[test]
    fn rvtr_formula() {
        let mut inst = generate_instance(4, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        inst.profits = vec![5, 4, 3, 2];
        assert_eq!(rvtr::<f64>(&inst, 4, 7).unwrap(), 0.0);
        assert_eq!(rvtr::<f64>(&inst, 0, 14).unwrap(), 1.0);
        assert!((rvtr::<f64>(&inst, 2, 7).unwrap() - 5.0 / 7.0).abs() < 1e-15);
        assert!(rvtr::<f64>(&inst, 2, 0).is_err());
    }

    #[test]
    fn depth_enumeration_example() {
        // Uniform profits 10, y = 30: distances |{(5-k)*10/30} - 0.6| are
        // k=1: 0.733, k=2: 0.4, k=3: 1/15, k=4: 4/15 -> k = 3.
        let mut inst = generate_instance(5, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        inst.profits = vec![10, 10, 10, 10, 10];
        let k = choose_depth(&inst, 30, &DepthPolicy::RvtrTarget(0.6f64)).unwrap();
        assert_eq!(k, 3);
        // Matches an explicit enumeration of all depths.
        let best = (1..inst.n)
            .min_by(|&a, &b| {
                let da = (rvtr::<f64>(&inst, a, 30).unwrap() - 0.6).abs();
                let db = (rvtr::<f64>(&inst, b, 30).unwrap() - 0.6).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        assert_eq!(k, best);
    }

    #[test]
    fn depth_fixed_and_errors() {
        let inst = generate_instance(6, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        assert_eq!(choose_depth(&inst, 5, &DepthPolicy::<f64>::Fixed(2)).unwrap(), 2);
        assert!(choose_depth(&inst, 5, &DepthPolicy::<f64>::Fixed(0)).is_err());
        assert!(choose_depth(&inst, 5, &DepthPolicy::<f64>::Fixed(6)).is_err());
        let one = generate_instance(1, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        assert!(choose_depth(&one, 5, &DepthPolicy::RvtrTarget(0.6f64)).is_err());
    }

    #[test]
    fn depth_tie_prefers_smallest() {
        // Profits chosen so k=1 and k=2 give RVTR symmetric around the
        // target: suffix(1)=7, suffix(2)=5, y=10, target 0.6.
        let mut inst = generate_instance(3, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        inst.profits = vec![3, 2, 5];
        let k = choose_depth(&inst, 10, &DepthPolicy::RvtrTarget(0.6f64)).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn clopper_pearson_table() {
        // All-successes row for five trials at the four standard levels.
        let cases = [(0.80f64, 0.631f64), (0.90, 0.549), (0.95, 0.478), (0.99, 0.347)];
        for &(conf, expect) in &cases {
            let b = clopper_pearson(5, 5, conf).unwrap();
            assert!(
                (b.p_lower - expect).abs() < 1e-3,
                "conf={conf}: {} vs {expect}",
                b.p_lower
            );
            assert_eq!(b.p_upper, 1.0);
        }
    }

    #[test]
    fn clopper_pearson_closed_form_all_successes() {
        // s = t: lower bound is (alpha/2)^(1/t) exactly.
        for &t in &[1u64, 3, 5, 10] {
            let conf = 0.9f64;
            let b = clopper_pearson(t, t, conf).unwrap();
            let closed = (0.05f64).powf(1.0 / t as f64);
            assert!((b.p_lower - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn clopper_pearson_edges_and_errors() {
        let b = clopper_pearson(0, 5, 0.9f64).unwrap();
        assert_eq!(b.p_lower, 0.0);
        assert!(b.p_upper < 1.0);
        assert!(clopper_pearson(6, 5, 0.9f64).is_err());
        assert!(clopper_pearson(1, 0, 0.9f64).is_err());
        assert!(clopper_pearson(1, 5, 0.0f64).is_err());
        assert!(clopper_pearson(1, 5, 1.0f64).is_err());
    }

    #[test]
    fn clopper_pearson_matches_statrs() {
        use statrs::distribution::{Beta, ContinuousCDF};
        for (s, t) in [(1u64, 5u64), (3, 5), (4, 9), (7, 20)] {
            let conf = 0.95f64;
            let b = clopper_pearson(s, t, conf).unwrap();
            let lo = Beta::new(s as f64, (t - s + 1) as f64)
                .unwrap()
                .inverse_cdf(0.025);
            let hi = Beta::new((s + 1) as f64, (t - s) as f64)
                .unwrap()
                .inverse_cdf(0.975);
            assert!((b.p_lower - lo).abs() < 1e-9);
            assert!((b.p_upper - hi).abs() < 1e-9);
        }
    }

    #[test]
    fn iif_immediate_when_fully_amplified() {
        // All depth-k prefixes marked: theta = pi/2, first round validates
        // r_in = 0 at cost L*k.
        let inst = generate_instance(8, 20, Correlation::Uncorrelated, 3, 2).unwrap();
        let bias = BiasConfig::greedy(&inst, 2.0f64);
        let k = 3;
        let y = inst.suffix_profit(k) as u64; // effective threshold 0... use 0 profit prefixes? ensure all marked: threshold -1
        let y = y.saturating_sub(1);
        let mut rng = protocol_rng(20, &[]);
        let res = iif(&inst, &bias, k, y, 8.0 / 7.0, 5, &mut rng).unwrap();
        assert_eq!(res.inner_rotations, 0);
        assert!(!res.degenerate);
        assert_eq!(res.cost, (5 * k) as f64);
        assert_eq!(res.attempts, 5);
    }

    #[test]
    fn iif_degenerate_on_empty_subspace() {
        let inst = generate_instance(8, 20, Correlation::Uncorrelated, 3, 2).unwrap();
        let bias = BiasConfig::greedy(&inst, 2.0f64);
        // Incumbent above everything reachable: no marked prefixes.
        let y = inst.total_profit() + 10;
        let mut rng = protocol_rng(21, &[]);
        let res = iif(&inst, &bias, 4, y, 8.0 / 7.0, 5, &mut rng).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.inner_rotations, 0);
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn iif_validated_rotation_is_confident() {
        // Non-degenerate convergence implies sin²((2r_in+1)θ_k) at or above
        // the 90% Clopper-Pearson lower bound for 5/5... statistically. The
        // check below is the spec's consistency test: recompute from the
        // tracked angle and compare against the table value.
        let mut checked = 0;
        for i in 1..=19 {
            let inst = generate_instance(10, 30, Correlation::Uncorrelated, 20, i).unwrap();
            let bias = BiasConfig::greedy(&inst, 10.0f64);
            let y = greedy_solution(&inst).value;
            let k = 5;
            let marked = ksolve::enumerate_partial_marked(&inst, y as i64, k).unwrap();
            let ens = amptrack::build_ensemble(&inst, &bias, &marked);
            let mut rng = protocol_rng(22, &[i]);
            let res = iif_on_ensemble(&ens, k, 8.0f64 / 7.0, 5, &mut rng).unwrap();
            if !res.degenerate && res.attempts > 0 {
                let p = amptrack::success_probability(&ens, res.inner_rotations);
                // The finder can get lucky; tolerate but count clear passes.
                if p >= 0.549 {
                    checked += 1;
                }
            }
        }
        assert!(checked >= 5, "only {checked} confidently validated runs");
    }

    #[test]
    fn iif_cost_decomposition() {
        let inst = generate_instance(10, 30, Correlation::Uncorrelated, 3, 7).unwrap();
        let bias = BiasConfig::greedy(&inst, 10.0f64);
        let y = greedy_solution(&inst).value;
        let k = 4;
        let mut rng = protocol_rng(23, &[]);
        let res = iif(&inst, &bias, k, y, 8.0 / 7.0, 5, &mut rng).unwrap();
        // Every attempt charges k(2 r_in + 1); with a single validated r_in
        // per round the total is divisible by k.
        assert!(res.cost >= 0.0);
        let per_k = res.cost / k as f64;
        assert!((per_k - per_k.round()).abs() < 1e-9);
    }

    #[test]
    fn nested_step_cost_identity() {
        // Expanded ledger form equals the factored per-step formula.
        let mut rng = protocol_rng(24, &[]);
        use rand::Rng as _;
        for _ in 0..1000 {
            let n = rng.random_range(2usize..80);
            let k = rng.random_range(1usize..n);
            let r_in = rng.random_range(0u64..50);
            let r = rng.random_range(0u64..50);
            let expanded = (k as u64 + 2 * k as u64 * r_in + (n - k) as u64
                + 2 * r * ((n - k) as u64 + 2 * k as u64 * r_in + k as u64))
                as f64;
            assert_eq!(expanded, nested_step_cost::<f64>(n, k, r_in, r));
        }
    }

    #[test]
    fn nested_reaches_optimum_with_generous_budget() {
        for i in 1..=5 {
            let inst = generate_instance(10, 25, Correlation::Uncorrelated, 3, i).unwrap();
            let bias = BiasConfig::greedy(&inst, inst.n as f64);
            let y_star = optimal_solution(&inst).value;
            let cfg = NestedConfig {
                lambda: 8.0f64 / 7.0,
                validation_samples: 5,
                budget: 300_000.0,
                policy: DepthPolicy::default_target(),
                start: StartMode::Greedy,
            };
            let mut rng = protocol_rng(25, &[i]);
            let out = nested_gas(&inst, &bias, &cfg, &mut rng).unwrap();
            assert_eq!(out.run.incumbent.value(), y_star, "instance {i}");
        }
    }

    #[test]
    fn nested_ledger_decomposition() {
        let inst = generate_instance(12, 30, Correlation::Uncorrelated, 3, 6).unwrap();
        let bias = BiasConfig::greedy(&inst, 12.0f64);
        let cfg = NestedConfig {
            lambda: 8.0f64 / 7.0,
            validation_samples: 5,
            budget: 40_000.0,
            policy: DepthPolicy::default_target(),
            start: StartMode::Greedy,
        };
        let mut rng = protocol_rng(26, &[]);
        let out = nested_gas(&inst, &bias, &cfg, &mut rng).unwrap();
        let ledger = &out.run.ledger;
        assert!((ledger.total() - (ledger.inner + ledger.outer)).abs() < 1e-9);
        // Outer decomposes exactly into (2r+1)(n + 2 r_in k) terms; k is
        // constant within a segment, recover from steps assuming the policy
        // depth... recompute with the recorded r, r_in and check cost match.
        for s in &ledger.steps {
            // cost = (2r+1)(n + 2 r_in k)  =>  k recoverable unless r_in = 0
            let base = (2 * s.rotations + 1) as f64;
            if s.inner_rotations == 0 {
                assert_eq!(s.cost, base * inst.n as f64);
            } else {
                let k = (s.cost / base - inst.n as f64) / (2.0 * s.inner_rotations as f64);
                assert!((k - k.round()).abs() < 1e-9);
                assert!(k >= 1.0 && k < inst.n as f64);
            }
        }
    }

    #[test]
    fn nested_seeded_determinism() {
        let inst = generate_instance(12, 30, Correlation::Uncorrelated, 3, 8).unwrap();
        let bias = BiasConfig::greedy(&inst, 12.0f64);
        let cfg = NestedConfig {
            lambda: 8.0f64 / 7.0,
            validation_samples: 5,
            budget: 20_000.0,
            policy: DepthPolicy::default_target(),
            start: StartMode::Greedy,
        };
        let a = nested_gas(&inst, &bias, &cfg, &mut protocol_rng(27, &[3])).unwrap();
        let b = nested_gas(&inst, &bias, &cfg, &mut protocol_rng(27, &[3])).unwrap();
        assert_eq!(a.run.trajectory, b.run.trajectory);
        assert_eq!(a.run.incumbent, b.run.incumbent);
    }

    #[test]
    fn relative_cost_values() {
        assert_eq!(relative_cost(10.0f64, 10.0).unwrap(), 0.0);
        assert_eq!(relative_cost(20.0f64, 10.0).unwrap(), 1.0);
        assert_eq!(relative_cost(10.0f64, 40.0).unwrap(), -2.0);
        assert!(relative_cost(0.0f64, 1.0).is_err());
    }

    #[test]
    fn budget_power_law() {
        assert_eq!(budget(10.0f64, 40, 1.0), 400.0);
        assert_eq!(budget(7.5f64, 40, 0.0), 7.5);
        assert_eq!(budget(10.0f64, 40, 2.0), 16000.0);
        let b = budget(10.0f64, 30, 1.5);
        assert!((b - 10.0 * 30.0f64.powf(1.5)).abs() < 1e-9);
    }
}

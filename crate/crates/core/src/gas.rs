//! Baseline adaptive amplitude-amplification search with measurement
//! emulation and cost accounting.
//!
//! Costs are measured in preparation-step units (one comparator plus two
//! controlled adders handling one item). A baseline amplification step with
//! `r` Grover iterations on `n` items costs `n(2r+1)`.

use rand::Rng;

use crate::amptrack::{self, BiasConfig, MarkedEnsemble};
use crate::error::Result;
use crate::instances::KnapsackInstance;
use crate::ksolve::{self, Solution};
use crate::real::Real;

/// Best feasible solution found so far; its value is the oracle threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incumbent {
    pub solution: Solution,
}

impl Incumbent {
    pub fn new(solution: Solution) -> Self {
        Self { solution }
    }

    pub fn value(&self) -> u64 {
        self.solution.value
    }
}

/// Per-step cost record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEntry<R: Real> {
    pub rotations: u64,
    pub inner_rotations: u64,
    pub cost: R,
}

/// Accumulated cost in preparation-step units, split into the inner
/// (iteration-finder) and outer (adaptive search) contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct CostLedger<R: Real> {
    pub inner: R,
    pub outer: R,
    pub steps: Vec<StepEntry<R>>,
}

impl<R: Real> CostLedger<R> {
    pub fn new() -> Self {
        Self {
            inner: R::zero(),
            outer: R::zero(),
            steps: Vec::new(),
        }
    }

    pub fn total(&self) -> R {
        self.inner + self.outer
    }

    pub fn add_inner(&mut self, cost: R) {
        self.inner = self.inner + cost;
    }

    pub fn add_outer(&mut self, cost: R, rotations: u64, inner_rotations: u64) {
        self.outer = self.outer + cost;
        self.steps.push(StepEntry {
            rotations,
            inner_rotations,
            cost,
        });
    }
}

impl<R: Real> Default for CostLedger<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Rotation-count bound state: `m` grows by `lambda` on failure and resets
/// to 1 on improvement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSearchState<R: Real> {
    pub m: R,
    pub lambda: R,
}

impl<R: Real> QSearchState<R> {
    pub fn new(lambda: R) -> Self {
        assert!(lambda > R::one(), "lambda must exceed 1");
        Self {
            m: R::one(),
            lambda,
        }
    }

    pub fn reset(&mut self) {
        self.m = R::one();
    }

    pub fn escalate(&mut self) {
        self.m = self.m * self.lambda;
    }

    /// Escalation with an upper cap (used by the inner iteration finder).
    pub fn escalate_capped(&mut self, cap: R) {
        self.m = (self.m * self.lambda).min(cap);
    }
}

/// Uniform rotation count from `{0, 1, ..., ceil(sqrt(m)) - 1}`.
pub fn sample_rotation_count<R: Real, G: Rng>(m: R, rng: &mut G) -> u64 {
    debug_assert!(m >= R::one());
    let bound = m.sqrt().ceil().to_u64().unwrap_or(u64::MAX).max(1);
    rng.random_range(0..bound)
}

/// Emulate one shot measurement after `r` Grover iterations on a preparation
/// ensemble: with probability `sin²((2r+1)θ)` a marked state is drawn
/// proportionally to its squared amplitude, otherwise the shot landed in the
/// unmarked rest (whose distribution is irrelevant: any such outcome fails
/// the improvement check by construction).
pub fn emulate_measurement<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    ens: &MarkedEnsemble<R>,
    rotations: u64,
    rng: &mut G,
) -> Option<Solution> {
    if ens.is_empty() {
        return None;
    }
    let p_success = amptrack::success_probability(ens, rotations);
    let u = R::of(rng.random::<f64>());
    if u >= p_success {
        return None;
    }
    let total = ens.norm_sq();
    let mut v = R::of(rng.random::<f64>()) * total;
    for &(bits, amp) in &ens.states {
        v = v - amp * amp;
        if v < R::zero() {
            return Some(Solution::from_bits(inst, bits));
        }
    }
    // Float slop: fall back to the last state.
    let bits = ens.states.last().unwrap().0;
    Some(Solution::from_bits(inst, bits))
}

/// Outcome of a full protocol run.
#[derive(Debug, Clone)]
pub struct GasRun<R: Real> {
    pub incumbent: Incumbent,
    pub ledger: CostLedger<R>,
    /// `(cumulative cost, incumbent value)` at the start and after every
    /// improvement.
    pub trajectory: Vec<(R, u64)>,
}

/// Initial incumbent selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// Start from the greedy solution (default).
    Greedy,
    /// Start from a random feasible solution (unbiased preparation walk).
    RandomFeasible,
}

pub fn initial_incumbent<G: Rng>(
    inst: &KnapsackInstance,
    start: StartMode,
    rng: &mut G,
) -> Incumbent {
    match start {
        StartMode::Greedy => Incumbent::new(ksolve::greedy_solution(inst)),
        StartMode::RandomFeasible => {
            Incumbent::new(ksolve::random_feasible_solution(inst, rng))
        }
    }
}

/// Shared by the cached runners and the one-shot step: sample a rotation
/// count, emulate the measurement, update incumbent and bound state, charge
/// `step_cost(r)`.
fn amplification_step<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    ens: &MarkedEnsemble<R>,
    incumbent: &mut Incumbent,
    qs: &mut QSearchState<R>,
    rng: &mut G,
    ledger: &mut CostLedger<R>,
    inner_rotations: u64,
    step_cost: impl Fn(u64) -> R,
) -> (bool, u64) {
    let r = sample_rotation_count(qs.m, rng);
    let outcome = emulate_measurement(inst, ens, r, rng);
    ledger.add_outer(step_cost(r), r, inner_rotations);
    match outcome {
        Some(sol) if sol.value > incumbent.value() => {
            *incumbent = Incumbent::new(sol);
            qs.reset();
            (true, r)
        }
        _ => {
            qs.escalate();
            (false, r)
        }
    }
}

fn baseline_cost<R: Real>(n: usize, r: u64) -> R {
    R::of_usize(n) * R::of_u64(2 * r + 1)
}

/// One adaptive-search step of the baseline protocol: build the global
/// marked ensemble for the current incumbent, sample a rotation count,
/// emulate the measurement, and charge `n(2r+1)`.
pub fn qsearch_step<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    incumbent: Incumbent,
    qs: QSearchState<R>,
    rng: &mut G,
    ledger: &mut CostLedger<R>,
) -> Result<(Incumbent, QSearchState<R>, u64)> {
    let marked = ksolve::enumerate_global_marked(inst, incumbent.value() as i64)?;
    let ens = amptrack::build_ensemble(inst, bias, &marked);
    let mut incumbent = incumbent;
    let mut qs = qs;
    let (_, r) = amplification_step(
        inst,
        &ens,
        &mut incumbent,
        &mut qs,
        rng,
        ledger,
        0,
        |r| baseline_cost(inst.n, r),
    );
    Ok((incumbent, qs, r))
}

/// Baseline run configuration.
#[derive(Debug, Clone, Copy)]
pub struct GasConfig<R: Real> {
    pub lambda: R,
    pub budget: R,
    pub start: StartMode,
}

/// Full baseline run: repeat steps until the accumulated cost reaches the
/// budget. The marked ensemble is rebuilt only when the incumbent changes.
pub fn baseline_gas<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    cfg: &GasConfig<R>,
    rng: &mut G,
) -> Result<GasRun<R>> {
    assert!(cfg.budget > R::zero(), "budget must be positive");
    let mut incumbent = initial_incumbent(inst, cfg.start, rng);
    let mut qs = QSearchState::new(cfg.lambda);
    let mut ledger = CostLedger::new();
    let mut trajectory = vec![(R::zero(), incumbent.value())];
    let mut ens: Option<MarkedEnsemble<R>> = None;

    loop {
        if ens.is_none() {
            let marked = ksolve::enumerate_global_marked(inst, incumbent.value() as i64)?;
            ens = Some(amptrack::build_ensemble(inst, bias, &marked));
        }
        let (improved, _) = amplification_step(
            inst,
            ens.as_ref().unwrap(),
            &mut incumbent,
            &mut qs,
            rng,
            &mut ledger,
            0,
            |r| baseline_cost(inst.n, r),
        );
        if improved {
            trajectory.push((ledger.total(), incumbent.value()));
            ens = None;
        }
        if ledger.total() >= cfg.budget {
            break;
        }
    }
    Ok(GasRun {
        incumbent,
        ledger,
        trajectory,
    })
}

/// Cost of improving the incumbent value `y` once with the baseline
/// protocol. Returns `None` if the safety budget runs out first, and
/// `Ok(None)` immediately when no improving state exists.
pub fn baseline_cost_to_improve<R: Real, G: Rng>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    y: u64,
    lambda: R,
    safety_budget: R,
    rng: &mut G,
) -> Result<Option<R>> {
    let marked = ksolve::enumerate_global_marked(inst, y as i64)?;
    if marked.is_empty() {
        return Ok(None);
    }
    let ens = amptrack::build_ensemble(inst, bias, &marked);
    let mut qs = QSearchState::new(lambda);
    let mut cost = R::zero();
    loop {
        let r = sample_rotation_count(qs.m, rng);
        cost = cost + baseline_cost(inst.n, r);
        if emulate_measurement(inst, &ens, r, rng).is_some() {
            return Ok(Some(cost));
        }
        qs.escalate();
        if cost >= safety_budget {
            return Ok(None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, Correlation};
    use crate::ksolve::{greedy_solution, optimal_solution};
    use crate::rng::protocol_rng;

    #[test]
    fn rotation_count_bounds() {
        let mut rng = protocol_rng(1, &[]);
        for _ in 0..100 {
            assert_eq!(sample_rotation_count(1.0f64, &mut rng), 0);
        }
        let mut seen = [false; 2];
        for _ in 0..200 {
            seen[sample_rotation_count(4.0f64, &mut rng) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn rotation_count_uniform_chi_square() {
        // m = 10: r uniform over {0,1,2,3}. Chi-square with 3 dof; the 3-sigma
        // style bound for the statistic is ~16.27 (p = 0.001).
        let mut rng = protocol_rng(2, &[]);
        let draws = 100_000usize;
        let mut counts = [0f64; 4];
        for _ in 0..draws {
            counts[sample_rotation_count(10.0f64, &mut rng) as usize] += 1.0;
        }
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn measurement_certain_single_state() {
        let inst = generate_instance(4, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        let ens = MarkedEnsemble {
            depth: inst.n,
            states: vec![(0b0011u64, 1.0f64)],
            theta: std::f64::consts::FRAC_PI_2,
        };
        let mut rng = protocol_rng(3, &[]);
        for _ in 0..50 {
            let sol = emulate_measurement(&inst, &ens, 0, &mut rng).unwrap();
            assert_eq!(sol.bits, 0b0011);
        }
    }

    #[test]
    fn measurement_never_succeeds_at_theta_zero() {
        let inst = generate_instance(4, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        let ens: MarkedEnsemble<f64> = MarkedEnsemble {
            depth: inst.n,
            states: vec![],
            theta: 0.0,
        };
        let mut rng = protocol_rng(4, &[]);
        for r in 0..20 {
            assert!(emulate_measurement(&inst, &ens, r, &mut rng).is_none());
        }
    }

    #[test]
    fn measurement_selection_ratio() {
        // Amplitude ratio 2:1 gives selection ratio 4:1 within the marked
        // set. Binomial with p = 0.8 over successful draws; 3-sigma band.
        let inst = generate_instance(4, 10, Correlation::Uncorrelated, 2, 1).unwrap();
        let a = 0.4f64;
        let b = 0.2f64;
        let theta = (a * a + b * b).sqrt().asin();
        let ens = MarkedEnsemble {
            depth: inst.n,
            states: vec![(0b0001u64, a), (0b0010u64, b)],
            theta,
        };
        let mut rng = protocol_rng(5, &[]);
        let mut heavy = 0u64;
        let mut successes = 0u64;
        while successes < 100_000 {
            if let Some(sol) = emulate_measurement(&inst, &ens, 0, &mut rng) {
                successes += 1;
                if sol.bits == 0b0001 {
                    heavy += 1;
                }
            }
        }
        let p_hat = heavy as f64 / successes as f64;
        let sigma = (0.8 * 0.2 / successes as f64).sqrt();
        assert!(
            (p_hat - 0.8).abs() < 3.0 * sigma,
            "p_hat = {p_hat}, sigma = {sigma}"
        );
    }

    #[test]
    fn qsearch_step_costs_and_m_updates() {
        let inst = generate_instance(10, 40, Correlation::Uncorrelated, 3, 4).unwrap();
        let bias = BiasConfig::greedy(&inst, 1.0f64);
        let y_star = optimal_solution(&inst).value;
        // Incumbent at optimum: S_global empty, never improves, m grows.
        let incumbent = Incumbent::new(optimal_solution(&inst));
        let mut ledger = CostLedger::new();
        let mut rng = protocol_rng(6, &[]);
        let qs = QSearchState::new(8.0f64 / 7.0);
        let (inc2, qs2, r) = qsearch_step(&inst, &bias, incumbent, qs, &mut rng, &mut ledger).unwrap();
        assert_eq!(inc2.value(), y_star);
        assert!((qs2.m - 8.0 / 7.0).abs() < 1e-15);
        assert_eq!(ledger.steps.len(), 1);
        let expect = inst.n as f64 * (2 * r + 1) as f64;
        assert_eq!(ledger.outer, expect);
        assert_eq!(ledger.total(), expect);
    }

    #[test]
    fn step_cost_formula() {
        // r drawn 0 with m = 1: cost n for n = 40; r = 3 costs 280.
        assert_eq!(baseline_cost::<f64>(40, 0), 40.0);
        assert_eq!(baseline_cost::<f64>(40, 3), 280.0);
    }

    #[test]
    fn baseline_reaches_optimum_with_generous_budget() {
        for i in 1..=5 {
            let inst = generate_instance(10, 25, Correlation::Uncorrelated, 3, i).unwrap();
            let bias = BiasConfig::greedy(&inst, inst.n as f64);
            let y_star = optimal_solution(&inst).value;
            let cfg = GasConfig {
                lambda: 8.0f64 / 7.0,
                budget: 200_000.0,
                start: StartMode::Greedy,
            };
            let mut rng = protocol_rng(7, &[i]);
            let run = baseline_gas(&inst, &bias, &cfg, &mut rng).unwrap();
            assert_eq!(run.incumbent.value(), y_star, "instance {i}");
            assert!(run.ledger.total() >= cfg.budget);
        }
    }

    #[test]
    fn greedy_optimal_instance_stays_put() {
        // Find an instance where greedy is optimal; any budget keeps y*.
        let mut found = false;
        for i in 1..=40 {
            let inst = generate_instance(8, 20, Correlation::Uncorrelated, 3, i).unwrap();
            if greedy_solution(&inst).value == optimal_solution(&inst).value {
                found = true;
                let bias = BiasConfig::greedy(&inst, 8.0f64);
                let cfg = GasConfig {
                    lambda: 8.0f64 / 7.0,
                    budget: 2000.0,
                    start: StartMode::Greedy,
                };
                let mut rng = protocol_rng(8, &[i]);
                let run = baseline_gas(&inst, &bias, &cfg, &mut rng).unwrap();
                assert_eq!(run.incumbent.value(), optimal_solution(&inst).value);
                assert_eq!(run.trajectory.len(), 1);
                break;
            }
        }
        assert!(found, "no greedy-optimal instance in the scan");
    }

    #[test]
    fn ledger_and_trajectory_invariants() {
        let inst = generate_instance(12, 30, Correlation::Uncorrelated, 3, 6).unwrap();
        let bias = BiasConfig::greedy(&inst, 12.0f64);
        let cfg = GasConfig {
            lambda: 8.0f64 / 7.0,
            budget: 50_000.0,
            start: StartMode::Greedy,
        };
        let mut rng = protocol_rng(9, &[]);
        let run = baseline_gas(&inst, &bias, &cfg, &mut rng).unwrap();
        // Outer equals the sum over steps of n(2r+1) to machine precision.
        let recomputed: f64 = run
            .ledger
            .steps
            .iter()
            .map(|s| inst.n as f64 * (2 * s.rotations + 1) as f64)
            .sum();
        assert_eq!(run.ledger.outer, recomputed);
        assert_eq!(run.ledger.inner, 0.0);
        // Incumbent value never decreases along the trajectory.
        for w in run.trajectory.windows(2) {
            assert!(w[0].0 <= w[1].0);
            assert!(w[0].1 < w[1].1);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let inst = generate_instance(12, 30, Correlation::Uncorrelated, 3, 7).unwrap();
        let bias = BiasConfig::greedy(&inst, 12.0f64);
        let cfg = GasConfig {
            lambda: 8.0f64 / 7.0,
            budget: 20_000.0,
            start: StartMode::Greedy,
        };
        let run1 = baseline_gas(&inst, &bias, &cfg, &mut protocol_rng(10, &[1])).unwrap();
        let run2 = baseline_gas(&inst, &bias, &cfg, &mut protocol_rng(10, &[1])).unwrap();
        assert_eq!(run1.trajectory, run2.trajectory);
        assert_eq!(run1.ledger.steps.len(), run2.ledger.steps.len());
        assert_eq!(run1.incumbent, run2.incumbent);
    }

    #[test]
    fn m_reset_contract() {
        let inst = generate_instance(10, 25, Correlation::Uncorrelated, 3, 3).unwrap();
        let bias = BiasConfig::greedy(&inst, 10.0f64);
        let lambda = 8.0f64 / 7.0;
        let mut incumbent = initial_incumbent(&inst, StartMode::Greedy, &mut protocol_rng(1, &[]));
        let mut qs = QSearchState::new(lambda);
        let mut ledger = CostLedger::new();
        let mut rng = protocol_rng(11, &[]);
        let mut expected_m = 1.0f64;
        for _ in 0..60 {
            let before = incumbent.value();
            let (inc, q, _) = qsearch_step(&inst, &bias, incumbent, qs, &mut rng, &mut ledger).unwrap();
            incumbent = inc;
            qs = q;
            if incumbent.value() > before {
                expected_m = 1.0;
            } else {
                expected_m *= lambda;
            }
            assert_eq!(qs.m, expected_m);
        }
    }
}

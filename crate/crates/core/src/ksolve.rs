//! Exact classical solving and marked-subspace extraction.
//!
//! Bitstrings are packed into `u64` with bit `i` holding the decision for
//! item `i`. Enumeration output is ordered lexicographically by
//! `(x_0, x_1, ...)` with 0 before 1, which the depth-first search produces
//! without sorting.

use crate::error::{Error, Result};
use crate::instances::{ItemOrdering, KnapsackInstance};

/// A feasible assignment with its cached value and weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Solution {
    pub bits: u64,
    pub value: u64,
    pub weight: u64,
}

impl Solution {
    /// Build from a bitstring, computing value and weight from the instance.
    pub fn from_bits(inst: &KnapsackInstance, bits: u64) -> Self {
        Self {
            bits,
            value: inst.profit_of(bits),
            weight: inst.weight_of(bits),
        }
    }

    pub const EMPTY: Solution = Solution {
        bits: 0,
        value: 0,
        weight: 0,
    };

    pub fn is_feasible(&self, inst: &KnapsackInstance) -> bool {
        self.weight <= inst.capacity
    }
}

/// One marked (partial) state: a depth-`k` prefix with its packed profit and
/// weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkedState {
    pub bits: u64,
    pub profit: u64,
    pub weight: u64,
}

/// The extracted marked subspace at some depth.
///
/// `threshold` is the effective value bound: states satisfy
/// `profit > threshold` and `weight <= capacity`. For the global set the
/// threshold is the incumbent value; for partial sets it is shifted by the
/// remaining profit mass and may be negative (then every feasible prefix is
/// marked).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSet {
    pub depth: usize,
    pub threshold: i64,
    pub states: Vec<MarkedState>,
}

impl MarkedSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Default cap on enumerated marked states (~100 MiB of states).
pub const DEFAULT_MARKED_CAP: usize = 1 << 22;

/// Default memory budget for the dynamic-programming table (1 GiB).
pub const DEFAULT_DP_BUDGET_BYTES: usize = 1 << 30;

fn density_order(inst: &KnapsackInstance) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..inst.n).collect();
    perm.sort_by(|&a, &b| {
        let lhs = inst.profits[a] as u128 * inst.weights[b] as u128;
        let rhs = inst.profits[b] as u128 * inst.weights[a] as u128;
        lhs.cmp(&rhs).reverse().then(a.cmp(&b))
    });
    perm
}

/// Greedy solution: walk items in density-descending order (ties by index)
/// and include each item iff it fits the remaining capacity.
pub fn greedy_solution(inst: &KnapsackInstance) -> Solution {
    let mut bits = 0u64;
    let mut remaining = inst.capacity;
    for i in density_order(inst) {
        if inst.weights[i] <= remaining {
            remaining -= inst.weights[i];
            bits |= 1 << i;
        }
    }
    Solution::from_bits(inst, bits)
}

/// Exact optimum by dynamic programming over capacity.
///
/// One-dimensional table with a packed decision mask per cell, so memory is
/// `O(capacity)`; the budget guards against degenerate capacities.
pub fn optimal_solution(inst: &KnapsackInstance) -> Solution {
    optimal_solution_with_budget(inst, DEFAULT_DP_BUDGET_BYTES)
        .expect("default budget exceeded; use optimal_solution_with_budget")
}

pub fn optimal_solution_with_budget(
    inst: &KnapsackInstance,
    budget_bytes: usize,
) -> Result<Solution> {
    let cells = inst.capacity as u128 + 1;
    let bytes = cells * std::mem::size_of::<(u64, u64)>() as u128;
    if bytes > budget_bytes as u128 {
        return Err(Error::ResourceBudget(format!(
            "DP table needs {bytes} bytes for capacity {} (budget {budget_bytes}); \
             consider a branch-and-bound fallback",
            inst.capacity
        )));
    }

    let cap = inst.capacity as usize;
    let mut value = vec![0u64; cap + 1];
    let mut choice = vec![0u64; cap + 1];
    for i in 0..inst.n {
        let w = inst.weights[i] as usize;
        let p = inst.profits[i];
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            let cand = value[c - w] + p;
            if cand > value[c] {
                value[c] = cand;
                choice[c] = choice[c - w] | 1 << i;
            }
        }
    }
    Ok(Solution::from_bits(inst, choice[cap]))
}

/// Density-sorted suffixes with prefix sums, for the fractional-relaxation
/// pruning bound. `starts[i]` covers items `i..depth` of the instance order.
struct SuffixRelax {
    // per start index: (prefix weights, prefix profits, item order)
    tables: Vec<(Vec<u64>, Vec<u64>, Vec<usize>)>,
}

impl SuffixRelax {
    fn build(inst: &KnapsackInstance, depth: usize) -> Self {
        let mut tables = Vec::with_capacity(depth + 1);
        for start in 0..=depth {
            let mut order: Vec<usize> = (start..depth).collect();
            order.sort_by(|&a, &b| {
                let lhs = inst.profits[a] as u128 * inst.weights[b] as u128;
                let rhs = inst.profits[b] as u128 * inst.weights[a] as u128;
                lhs.cmp(&rhs).reverse().then(a.cmp(&b))
            });
            let mut pw = Vec::with_capacity(order.len() + 1);
            let mut pp = Vec::with_capacity(order.len() + 1);
            pw.push(0u64);
            pp.push(0u64);
            for &i in &order {
                pw.push(pw.last().unwrap() + inst.weights[i]);
                pp.push(pp.last().unwrap() + inst.profits[i]);
            }
            tables.push((pw, pp, order));
        }
        Self { tables }
    }

    /// Upper bound on the profit reachable from items `start..depth` with
    /// `remaining` capacity left. Fractional part rounded up, so the bound
    /// never underestimates.
    fn bound(&self, inst: &KnapsackInstance, start: usize, remaining: u64) -> u64 {
        let (pw, pp, order) = &self.tables[start];
        // Largest t with pw[t] <= remaining.
        let t = pw.partition_point(|&w| w <= remaining) - 1;
        let mut bound = pp[t];
        if t < order.len() {
            let i = order[t];
            let room = remaining - pw[t];
            let frac =
                (room as u128 * inst.profits[i] as u128).div_ceil(inst.weights[i] as u128);
            bound += frac as u64;
        }
        bound
    }
}

/// All states `x` of length `depth` with `weight(x) <= c` and
/// `profit(x) > threshold`, in lexicographic order. Errors out past `cap`.
fn enumerate_marked(
    inst: &KnapsackInstance,
    depth: usize,
    threshold: i64,
    cap: usize,
) -> Result<Vec<MarkedState>> {
    let relax = SuffixRelax::build(inst, depth);
    let mut states = Vec::new();

    // Iterative DFS, excluding branch first for lexicographic output.
    struct Frame {
        idx: usize,
        bits: u64,
        weight: u64,
        profit: u64,
    }
    let mut stack = vec![Frame {
        idx: 0,
        bits: 0,
        weight: 0,
        profit: 0,
    }];
    while let Some(f) = stack.pop() {
        let reachable = f.profit + relax.bound(inst, f.idx, inst.capacity - f.weight);
        if (reachable as i64) <= threshold {
            continue;
        }
        if f.idx == depth {
            if states.len() >= cap {
                return Err(Error::MarkedSetCap {
                    cap,
                    seen: states.len(),
                });
            }
            states.push(MarkedState {
                bits: f.bits,
                profit: f.profit,
                weight: f.weight,
            });
            continue;
        }
        // Pushed include-branch first so the exclude-branch pops first.
        let w = inst.weights[f.idx];
        if f.weight + w <= inst.capacity {
            stack.push(Frame {
                idx: f.idx + 1,
                bits: f.bits | 1 << f.idx,
                weight: f.weight + w,
                profit: f.profit + inst.profits[f.idx],
            });
        }
        stack.push(Frame {
            idx: f.idx + 1,
            bits: f.bits,
            weight: f.weight,
            profit: f.profit,
        });
    }
    Ok(states)
}

/// `S_global(y)`: feasible full assignments with profit strictly above `y`.
pub fn enumerate_global_marked(inst: &KnapsackInstance, y: i64) -> Result<MarkedSet> {
    enumerate_global_marked_with_cap(inst, y, DEFAULT_MARKED_CAP)
}

pub fn enumerate_global_marked_with_cap(
    inst: &KnapsackInstance,
    y: i64,
    cap: usize,
) -> Result<MarkedSet> {
    Ok(MarkedSet {
        depth: inst.n,
        threshold: y,
        states: enumerate_marked(inst, inst.n, y, cap)?,
    })
}

/// `S_partial(y, k)`: depth-`k` prefixes within capacity whose packed profit
/// exceeds `y` minus the remaining profit mass.
pub fn enumerate_partial_marked(inst: &KnapsackInstance, y: i64, k: usize) -> Result<MarkedSet> {
    enumerate_partial_marked_with_cap(inst, y, k, DEFAULT_MARKED_CAP)
}

pub fn enumerate_partial_marked_with_cap(
    inst: &KnapsackInstance,
    y: i64,
    k: usize,
    cap: usize,
) -> Result<MarkedSet> {
    assert!(k >= 1 && k <= inst.n, "depth must be in 1..=n");
    let threshold = y - inst.suffix_profit(k) as i64;
    Ok(MarkedSet {
        depth: k,
        threshold,
        states: enumerate_marked(inst, k, threshold, cap)?,
    })
}

/// Classical sampling walk down the preparation tree with bias 0: every
/// feasible branch is taken with probability 1/2, infeasible items are
/// excluded with certainty. Used for the optional random-start mode.
pub fn random_feasible_solution<G: rand::Rng>(inst: &KnapsackInstance, rng: &mut G) -> Solution {
    let mut bits = 0u64;
    let mut remaining = inst.capacity;
    for i in 0..inst.n {
        if inst.weights[i] <= remaining && rng.random::<bool>() {
            bits |= 1 << i;
            remaining -= inst.weights[i];
        }
    }
    Solution::from_bits(inst, bits)
}

/// Reorder an instance into the default protocol ordering.
pub fn protocol_ordering(inst: &KnapsackInstance) -> KnapsackInstance {
    crate::instances::reorder_items(inst, ItemOrdering::DensityDescending)
}

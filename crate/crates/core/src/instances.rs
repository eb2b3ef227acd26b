//! Knapsack instance generation, characterization and serialization.
//!
//! The generator follows the classic hard-instance parameterization: weights
//! uniform in `{1..r}`, profits per correlation type, and capacity
//! `c = max(ceil(i/(S+1) * sum(w)), r + 1)` where `S` is the tightness and
//! `i` the instance index. The index acts as the random seed, so a batch
//! swept over `i` spans capacities from tight to loose. Because the capacity
//! is floored at `r + 1`, small indices can collide and batches are
//! deduplicated before use.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Correlation type between item profits and weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    /// `p_i` uniform in `{1..r}`, independent of `w_i`.
    Uncorrelated,
    /// `p_i` uniform in `[max(1, w_i - r/10), w_i + r/10]`.
    WeaklyCorrelated,
    /// `p_i = w_i + 10`.
    StronglyCorrelated,
}

impl Correlation {
    pub fn short(self) -> &'static str {
        match self {
            Correlation::Uncorrelated => "unc",
            Correlation::WeaklyCorrelated => "weak",
            Correlation::StronglyCorrelated => "strong",
        }
    }

    fn code(self) -> u64 {
        match self {
            Correlation::Uncorrelated => 1,
            Correlation::WeaklyCorrelated => 2,
            Correlation::StronglyCorrelated => 3,
        }
    }
}

/// Item ordering applied to an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemOrdering {
    AsGenerated,
    /// Sort by profit/weight ratio descending; the greedy order.
    DensityDescending,
    ValueDescending,
}

/// A binary knapsack instance plus its generator metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub n: usize,
    pub weights: Vec<u64>,
    pub profits: Vec<u64>,
    pub capacity: u64,
    pub corr_type: Correlation,
    pub range_r: u64,
    pub tightness_s: u64,
    pub index_i: u64,
    pub ordering: ItemOrdering,
}

impl KnapsackInstance {
    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn total_profit(&self) -> u64 {
        self.profits.iter().sum()
    }

    /// Profit mass of items `k..n`.
    pub fn suffix_profit(&self, k: usize) -> u64 {
        self.profits[k.min(self.n)..].iter().sum()
    }

    /// Weight of the item subset encoded in `bits` (bit `i` = item `i`).
    pub fn weight_of(&self, bits: u64) -> u64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    /// Profit of the item subset encoded in `bits`.
    pub fn profit_of(&self, bits: u64) -> u64 {
        self.profits
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Stable identifier used in output tables.
    pub fn id(&self) -> String {
        format!(
            "{}-n{}-r{}-s{}-i{}",
            self.corr_type.short(),
            self.n,
            self.range_r,
            self.tightness_s,
            self.index_i
        )
    }
}

/// Derived instance characteristics; `capweight` is kept as an exact ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMetrics {
    pub capweight: Ratio<u64>,
    pub total_weight: u64,
    pub total_profit: u64,
}

impl InstanceMetrics {
    pub fn capweight_f64(&self) -> f64 {
        *self.capweight.numer() as f64 / *self.capweight.denom() as f64
    }
}

/// Maximum item count; solution bitstrings are packed into `u64`.
pub const MAX_ITEMS: usize = 64;

/// Deterministically generate one instance.
///
/// Draw order (fixed for reproducibility): per item, first the weight, then
/// the profit if the correlation type samples one. The PRNG seed folds
/// `(n, r, corr, S, i)` through the SplitMix64 finalizer.
pub fn generate_instance(
    n: usize,
    range_r: u64,
    corr_type: Correlation,
    tightness_s: u64,
    index_i: u64,
) -> Result<KnapsackInstance> {
    if n < 1 || n > MAX_ITEMS {
        return Err(Error::InvalidParameter(format!(
            "n must be in 1..={MAX_ITEMS}, got {n}"
        )));
    }
    if range_r < 1 {
        return Err(Error::InvalidParameter("range_r must be >= 1".into()));
    }
    if corr_type == Correlation::WeaklyCorrelated && range_r < 10 {
        return Err(Error::InvalidParameter(
            "weakly correlated instances need range_r >= 10 (so r/10 >= 1)".into(),
        ));
    }
    if tightness_s < 1 {
        return Err(Error::InvalidParameter("tightness_s must be >= 1".into()));
    }
    if index_i < 1 {
        return Err(Error::InvalidParameter("index_i must be >= 1".into()));
    }

    let mut rng = SplitMix64::from_words(&[
        n as u64,
        range_r,
        corr_type.code(),
        tightness_s,
        index_i,
    ]);

    let mut weights = Vec::with_capacity(n);
    let mut profits = Vec::with_capacity(n);
    let spread = range_r / 10;
    for _ in 0..n {
        let w = rng.range_inclusive(1, range_r);
        let p = match corr_type {
            Correlation::Uncorrelated => rng.range_inclusive(1, range_r),
            Correlation::WeaklyCorrelated => {
                let lo = w.saturating_sub(spread).max(1);
                rng.range_inclusive(lo, w + spread)
            }
            Correlation::StronglyCorrelated => w + 10,
        };
        weights.push(w);
        profits.push(p);
    }

    let total_weight: u128 = weights.iter().map(|&w| w as u128).sum();
    // c = max(ceil(i * sum(w) / (S+1)), r + 1)
    let num = index_i as u128 * total_weight;
    let den = tightness_s as u128 + 1;
    let tight = num.div_ceil(den);
    let capacity = tight.max(range_r as u128 + 1) as u64;

    Ok(KnapsackInstance {
        n,
        weights,
        profits,
        capacity,
        corr_type,
        range_r,
        tightness_s,
        index_i,
        ordering: ItemOrdering::AsGenerated,
    })
}

/// Exact capacity-to-weight ratio and totals.
pub fn compute_metrics(inst: &KnapsackInstance) -> InstanceMetrics {
    let total_weight = inst.total_weight();
    assert!(total_weight > 0, "weights are positive by invariant");
    InstanceMetrics {
        capweight: Ratio::new(inst.capacity, total_weight),
        total_weight,
        total_profit: inst.total_profit(),
    }
}

/// Remove duplicate `(weights, profits, capacity)` triples, keeping the first
/// occurrence of each and the original order.
pub fn dedup_instances(batch: Vec<KnapsackInstance>) -> Vec<KnapsackInstance> {
    let mut seen: HashSet<(Vec<u64>, Vec<u64>, u64)> = HashSet::new();
    batch
        .into_iter()
        .filter(|inst| {
            seen.insert((inst.weights.clone(), inst.profits.clone(), inst.capacity))
        })
        .collect()
}

/// Permute items into the requested ordering. Ties break by original index
/// ascending; density comparisons use cross-multiplication, so they are
/// exact.
pub fn reorder_items(inst: &KnapsackInstance, ordering: ItemOrdering) -> KnapsackInstance {
    let mut perm: Vec<usize> = (0..inst.n).collect();
    match ordering {
        ItemOrdering::AsGenerated => {}
        ItemOrdering::DensityDescending => {
            perm.sort_by(|&a, &b| {
                let lhs = inst.profits[a] as u128 * inst.weights[b] as u128;
                let rhs = inst.profits[b] as u128 * inst.weights[a] as u128;
                lhs.cmp(&rhs).reverse().then(a.cmp(&b))
            });
        }
        ItemOrdering::ValueDescending => {
            perm.sort_by(|&a, &b| inst.profits[a].cmp(&inst.profits[b]).reverse().then(a.cmp(&b)));
        }
    }
    KnapsackInstance {
        weights: perm.iter().map(|&i| inst.weights[i]).collect(),
        profits: perm.iter().map(|&i| inst.profits[i]).collect(),
        ordering,
        ..inst.clone()
    }
}

/// Write a batch as newline-delimited JSON, one object per instance.
pub fn write_instances<W: Write>(mut out: W, batch: &[KnapsackInstance]) -> Result<()> {
    for inst in batch {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a newline-delimited JSON batch; blank lines are skipped.
pub fn read_instances<R: BufRead>(input: R) -> Result<Vec<KnapsackInstance>> {
    let mut batch = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        batch.push(serde_json::from_str(&line)?);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strongly_correlated_profit_offset() {
        let inst = generate_instance(3, 10, Correlation::StronglyCorrelated, 1, 1).unwrap();
        for j in 0..3 {
            assert_eq!(inst.profits[j], inst.weights[j] + 10);
        }
    }

    #[test]
    fn degenerate_range_forces_ones() {
        let inst = generate_instance(1, 1, Correlation::Uncorrelated, 1, 1).unwrap();
        assert_eq!(inst.weights, vec![1]);
        assert_eq!(inst.profits, vec![1]);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(20, 100, Correlation::Uncorrelated, 5, 3).unwrap();
        let b = generate_instance(20, 100, Correlation::Uncorrelated, 5, 3).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn weakly_correlated_profit_band() {
        // 1000 items across several instances.
        for i in 1..=10 {
            let inst = generate_instance(50, 100, Correlation::WeaklyCorrelated, 2, i).unwrap();
            for j in 0..inst.n {
                let w = inst.weights[j];
                let p = inst.profits[j];
                assert!(p >= 1);
                assert!(p + 10 >= w, "p_i >= w_i - r/10 violated: w={w} p={p}");
                assert!(p <= w + 10, "p_i <= w_i + r/10 violated: w={w} p={p}");
            }
        }
    }

    #[test]
    fn weakly_correlated_needs_range() {
        assert!(generate_instance(5, 9, Correlation::WeaklyCorrelated, 1, 1).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_instance(0, 10, Correlation::Uncorrelated, 1, 1).is_err());
        assert!(generate_instance(65, 10, Correlation::Uncorrelated, 1, 1).is_err());
        assert!(generate_instance(5, 0, Correlation::Uncorrelated, 1, 1).is_err());
        assert!(generate_instance(5, 10, Correlation::Uncorrelated, 0, 1).is_err());
        assert!(generate_instance(5, 10, Correlation::Uncorrelated, 1, 0).is_err());
    }

    #[test]
    fn capweight_exact_formula() {
        let inst = KnapsackInstance {
            n: 3,
            weights: vec![2, 3, 5],
            profits: vec![1, 1, 1],
            capacity: 4,
            corr_type: Correlation::Uncorrelated,
            range_r: 5,
            tightness_s: 1,
            index_i: 1,
            ordering: ItemOrdering::AsGenerated,
        };
        let m = compute_metrics(&inst);
        assert_eq!(m.capweight, Ratio::new(2, 5)); // 4/10 reduced
        assert_eq!(m.capweight_f64(), 0.4);
        assert_eq!(m.total_weight, 10);
    }

    #[test]
    fn capweight_one_when_capacity_is_total() {
        let mut inst = generate_instance(4, 10, Correlation::Uncorrelated, 1, 1).unwrap();
        inst.capacity = inst.total_weight();
        assert_eq!(compute_metrics(&inst).capweight, Ratio::new(1, 1));
    }

    #[test]
    fn capweight_increases_with_index_when_floor_inactive() {
        // Uncorrelated batch, n=20, S=2: capweight strictly increasing in i
        // wherever the r+1 floor is inactive.
        let mut prev: Option<Ratio<u64>> = None;
        for i in 1..=10 {
            let inst = generate_instance(20, 100, Correlation::Uncorrelated, 2, i).unwrap();
            let m = compute_metrics(&inst);
            let floor_active = inst.capacity == inst.range_r + 1;
            if let (Some(p), false) = (prev, floor_active) {
                assert!(m.capweight > p, "capweight not increasing at i={i}");
            }
            prev = Some(m.capweight);
        }
    }

    #[test]
    fn capweight_with_active_floor() {
        // Small index with S large enough that the tightness capacity falls
        // below r+1; then capweight == (r+1)/sum(w) exactly.
        let inst = generate_instance(12, 50, Correlation::Uncorrelated, 20, 1).unwrap();
        assert_eq!(inst.capacity, inst.range_r + 1);
        let m = compute_metrics(&inst);
        assert_eq!(m.capweight, Ratio::new(inst.range_r + 1, inst.total_weight()));
    }

    #[test]
    fn dedup_removes_identical_triples() {
        let a = generate_instance(6, 5, Correlation::Uncorrelated, 10, 1).unwrap();
        let b = a.clone();
        let out = dedup_instances(vec![a.clone(), b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], a);
        assert!(dedup_instances(vec![]).is_empty());
    }

    #[test]
    fn dedup_matches_pairwise_oracle() {
        // Tiny weight space plus an active capacity floor: collisions are
        // frequent, which is exactly the regime where duplicates appear.
        let batch: Vec<_> = (1..=30)
            .map(|i| generate_instance(2, 2, Correlation::StronglyCorrelated, 40, i).unwrap())
            .collect();
        let deduped = dedup_instances(batch.clone());

        // Brute-force pairwise oracle: keep element j iff no earlier element
        // has the same triple.
        let mut expected = Vec::new();
        for (j, inst) in batch.iter().enumerate() {
            let dup = batch[..j].iter().any(|other| {
                other.weights == inst.weights
                    && other.profits == inst.profits
                    && other.capacity == inst.capacity
            });
            if !dup {
                expected.push(inst.clone());
            }
        }
        assert!(expected.len() < batch.len(), "test wants real duplicates");
        assert_eq!(deduped, expected);
    }

    #[test]
    fn reorder_density_example() {
        let inst = KnapsackInstance {
            n: 2,
            weights: vec![2, 4],
            profits: vec![6, 4],
            capacity: 6,
            corr_type: Correlation::Uncorrelated,
            range_r: 6,
            tightness_s: 1,
            index_i: 1,
            ordering: ItemOrdering::AsGenerated,
        };
        let out = reorder_items(&inst, ItemOrdering::DensityDescending);
        // densities 3.0 > 1.0: order unchanged
        assert_eq!(out.weights, vec![2, 4]);
        assert_eq!(out.profits, vec![6, 4]);
        assert_eq!(out.ordering, ItemOrdering::DensityDescending);
    }

    #[test]
    fn reorder_as_generated_is_identity() {
        let inst = generate_instance(10, 30, Correlation::Uncorrelated, 3, 2).unwrap();
        let out = reorder_items(&inst, ItemOrdering::AsGenerated);
        assert_eq!(out.weights, inst.weights);
        assert_eq!(out.profits, inst.profits);
    }

    #[test]
    fn reorder_value_matches_sort_oracle() {
        let inst = generate_instance(15, 40, Correlation::Uncorrelated, 3, 7).unwrap();
        let out = reorder_items(&inst, ItemOrdering::ValueDescending);
        let mut oracle: Vec<(u64, u64)> = inst
            .profits
            .iter()
            .cloned()
            .zip(inst.weights.iter().cloned())
            .collect();
        oracle.sort_by(|a, b| b.0.cmp(&a.0));
        let got: Vec<(u64, u64)> = out
            .profits
            .iter()
            .cloned()
            .zip(out.weights.iter().cloned())
            .collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn ndjson_roundtrip() {
        let batch: Vec<_> = (1..=3)
            .map(|i| generate_instance(8, 20, Correlation::Uncorrelated, 4, i).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_instances(&mut buf, &batch).unwrap();
        let back = read_instances(buf.as_slice()).unwrap();
        assert_eq!(back, batch);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reorder_preserves_item_multiset(
                n in 1usize..20,
                r in 1u64..200,
                i in 1u64..50,
                which in 0u8..3,
            ) {
                let inst = generate_instance(n, r, Correlation::Uncorrelated, 3, i).unwrap();
                let ordering = match which {
                    0 => ItemOrdering::AsGenerated,
                    1 => ItemOrdering::DensityDescending,
                    _ => ItemOrdering::ValueDescending,
                };
                let out = reorder_items(&inst, ordering);
                let mut before: Vec<(u64, u64)> =
                    inst.weights.iter().cloned().zip(inst.profits.iter().cloned()).collect();
                let mut after: Vec<(u64, u64)> =
                    out.weights.iter().cloned().zip(out.profits.iter().cloned()).collect();
                before.sort_unstable();
                after.sort_unstable();
                prop_assert_eq!(before, after);
            }

            #[test]
            fn generator_is_pure(n in 1usize..30, r in 1u64..500, s in 1u64..20, i in 1u64..100) {
                let a = generate_instance(n, r, Correlation::Uncorrelated, s, i).unwrap();
                let b = generate_instance(n, r, Correlation::Uncorrelated, s, i).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}

//! Exact classical tracking of marked-state amplitudes through biased
//! tree-generator preparation and amplitude amplification.
//!
//! The preparation walks items in instance order. At item `i` with prefix
//! weight `W`, the amplitude picks up a factor `h_i(x_i)`:
//!
//! * `sqrt((b+1)/(b+2))` if the item fits (`W + w_i <= c`) and `x_i` matches
//!   the reference bit,
//! * `sqrt(1/(b+2))` if it fits and differs,
//! * `1` if it does not fit and `x_i = 0`,
//! * `0` if it does not fit and `x_i = 1` (the infeasible branch).
//!
//! An amplification round with `r` Grover iterations scales every marked
//! amplitude by `sin((2r+1)θ)/sin(θ)` where `θ = arcsin sqrt(Σ amp²)` of the
//! preparation ensemble, so a rotated ensemble's squared amplitudes sum to
//! the success probability `sin²((2r+1)θ)` exactly.
//!
//! Amplitudes are signed reals (the rotation factor can be negative);
//! probabilities always use squares.

use crate::instances::KnapsackInstance;
use crate::error::{Error, Result};
use crate::ksolve::MarkedSet;
use crate::real::Real;

/// Bias configuration: strength `b >= 0` plus the reference assignment the
/// preparation is biased toward. The reference is fixed at run start (the
/// greedy solution) and not refreshed when the incumbent improves.
#[derive(Debug, Clone, Copy)]
pub struct BiasConfig<R: Real> {
    pub bias: R,
    /// Reference assignment, bit `i` = item `i`.
    pub reference: u64,
}

impl<R: Real> BiasConfig<R> {
    pub fn new(bias: R, reference: u64) -> Self {
        assert!(bias >= R::zero(), "bias must be non-negative");
        Self { bias, reference }
    }

    /// Bias toward the greedy solution.
    pub fn greedy(inst: &KnapsackInstance, bias: R) -> Self {
        Self::new(bias, crate::ksolve::greedy_solution(inst).bits)
    }

    fn match_factor(&self) -> R {
        ((self.bias + R::one()) / (self.bias + R::of(2.0))).sqrt()
    }

    fn mismatch_factor(&self) -> R {
        (R::one() / (self.bias + R::of(2.0))).sqrt()
    }
}

/// Marked states with tracked amplitudes and the subspace angle
/// `theta = arcsin sqrt(Σ amp²)` of the preparation they came from.
#[derive(Debug, Clone)]
pub struct MarkedEnsemble<R: Real> {
    pub depth: usize,
    pub states: Vec<(u64, R)>,
    pub theta: R,
}

impl<R: Real> MarkedEnsemble<R> {
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Sum of squared amplitudes.
    pub fn norm_sq(&self) -> R {
        self.states.iter().map(|&(_, a)| a * a).sum()
    }
}

fn theta_of<R: Real>(norm_sq: R) -> R {
    // Clamp against ~1e-15 float overshoot before the arcsin.
    norm_sq.max(R::zero()).min(R::one()).sqrt().asin()
}

/// Single preparation-step factor `h_i(x_i)` for item `i` given the packed
/// weight of the preceding prefix.
pub fn qtg_step_factor<R: Real>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    prefix_weight: u64,
    item: usize,
    bit: bool,
) -> R {
    let fits = prefix_weight + inst.weights[item] <= inst.capacity;
    let ref_bit = bias.reference >> item & 1 == 1;
    if fits {
        if bit == ref_bit {
            bias.match_factor()
        } else {
            bias.mismatch_factor()
        }
    } else if bit {
        R::zero()
    } else {
        R::one()
    }
}

/// Raw preparation amplitude of the depth-`k` prefix of `x`: the product of
/// step factors. Zero exactly when some prefix includes an item that does
/// not fit.
pub fn partial_amplitude<R: Real>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    x: u64,
    k: usize,
) -> R {
    let mut amp = R::one();
    let mut weight = 0u64;
    for i in 0..k {
        let bit = x >> i & 1 == 1;
        amp = amp * qtg_step_factor(inst, bias, weight, i, bit);
        if amp == R::zero() {
            return R::zero();
        }
        if bit {
            weight += inst.weights[i];
        }
    }
    amp
}

/// Assign preparation amplitudes to a marked set and compute its angle.
/// Works for any depth; depth `n` gives the baseline global ensemble.
pub fn build_ensemble<R: Real>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    marked: &MarkedSet,
) -> MarkedEnsemble<R> {
    let states: Vec<(u64, R)> = marked
        .states
        .iter()
        .map(|s| (s.bits, partial_amplitude(inst, bias, s.bits, marked.depth)))
        .collect();
    let norm_sq = states.iter().map(|&(_, a)| a * a).sum();
    MarkedEnsemble {
        depth: marked.depth,
        states,
        theta: theta_of(norm_sq),
    }
}

/// Amplify a preparation ensemble with `r` Grover iterations: every marked
/// amplitude scales by `sin((2r+1)θ)/sin(θ)`; at `r = 0` the ensemble is
/// unchanged. `theta` keeps the preparation angle — the rotated ensemble is
/// no longer a preparation ensemble, and its squared amplitudes now sum to
/// the success probability `sin²((2r+1)θ)`.
pub fn apply_rotation<R: Real>(ens: &MarkedEnsemble<R>, rotations: u64) -> MarkedEnsemble<R> {
    let factor = rotation_gain(ens.theta, rotations);
    MarkedEnsemble {
        depth: ens.depth,
        states: ens.states.iter().map(|&(b, a)| (b, a * factor)).collect(),
        theta: ens.theta,
    }
}

/// Marked-amplitude gain of `r` Grover iterations at angle `theta`.
pub fn rotation_gain<R: Real>(theta: R, rotations: u64) -> R {
    if theta == R::zero() {
        return R::one();
    }
    let phase = R::of_u64(2 * rotations + 1) * theta;
    phase.sin() / theta.sin()
}

/// Extend a rotated depth-`k` ensemble through the remaining preparation
/// steps onto the global marked set, and compute the global angle. Prefix
/// closure guarantees every global state finds its prefix in `inner`.
pub fn extend_ensemble<R: Real>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    inner: &MarkedEnsemble<R>,
    global_marked: &MarkedSet,
) -> Result<MarkedEnsemble<R>> {
    let k = inner.depth;
    assert_eq!(global_marked.depth, inst.n, "extension targets full depth");
    let prefix_amp: std::collections::HashMap<u64, R> =
        inner.states.iter().cloned().collect();
    let prefix_mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };

    let mut states = Vec::with_capacity(global_marked.len());
    let mut norm_sq = R::zero();
    for s in &global_marked.states {
        let prefix = s.bits & prefix_mask;
        let mut amp = *prefix_amp
            .get(&prefix)
            .ok_or(Error::PrefixMissing { prefix, depth: k })?;
        let mut weight = inst.weight_of(prefix);
        for i in k..inst.n {
            let bit = s.bits >> i & 1 == 1;
            amp = amp * qtg_step_factor(inst, bias, weight, i, bit);
            if bit {
                weight += inst.weights[i];
            }
        }
        norm_sq = norm_sq + amp * amp;
        states.push((s.bits, amp));
    }
    Ok(MarkedEnsemble {
        depth: inst.n,
        states,
        theta: theta_of(norm_sq),
    })
}

/// Probability of measuring inside the marked subspace after `r` Grover
/// iterations on a preparation ensemble: `sin²((2r+1)θ)`.
pub fn success_probability<R: Real>(ens: &MarkedEnsemble<R>, rotations: u64) -> R {
    let s = (R::of_u64(2 * rotations + 1) * ens.theta).sin();
    s * s
}

//! Dense statevector simulation of the preparation circuit, the threshold
//! oracle and the full amplification operators. Serves as the ground truth
//! the amplitude-tracking engine is certified against.
//!
//! Register layout, least significant bits first: `n` item qubits, then the
//! capacity register (holding the remaining capacity), then the profit
//! register (holding the packed profit), then one flag qubit kept in `|−>`
//! for oracle phase kickback. The item comparator (`w_m <= C`) is evaluated
//! classically per basis state; gate-level comparator synthesis is out of
//! scope, only the unitary's action matters here.

use std::ops::Range;

use num_complex::Complex;

use crate::amptrack::BiasConfig;
use crate::error::{Error, Result};
use crate::instances::KnapsackInstance;
use crate::ksolve;
use crate::real::Real;

/// Hard cap on simulated qubits (dense f64 vector at the cap is ~1 GiB).
pub const SIM_QUBIT_CAP: usize = 26;

/// Width in bits needed to hold values `0..=v`.
fn bits_for(v: u64) -> usize {
    if v == 0 {
        0
    } else {
        64 - v.leading_zeros() as usize
    }
}

/// Three value registers plus the flag qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    pub item_qubits: usize,
    pub capacity_qubits: usize,
    pub profit_qubits: usize,
}

impl RegisterLayout {
    pub fn new(item_qubits: usize, capacity_qubits: usize, profit_qubits: usize) -> Result<Self> {
        let layout = Self {
            item_qubits,
            capacity_qubits,
            profit_qubits,
        };
        if layout.total_qubits() > SIM_QUBIT_CAP {
            return Err(Error::RegisterOverflow {
                needed: layout.total_qubits(),
                cap: SIM_QUBIT_CAP,
            });
        }
        Ok(layout)
    }

    pub fn for_instance(inst: &KnapsackInstance) -> Result<Self> {
        Self::new(
            inst.n,
            bits_for(inst.capacity),
            bits_for(inst.total_profit()),
        )
    }

    /// Item, capacity and profit registers plus the flag qubit.
    pub fn total_qubits(&self) -> usize {
        self.item_qubits + self.capacity_qubits + self.profit_qubits + 1
    }

    #[inline]
    fn cap_shift(&self) -> usize {
        self.item_qubits
    }

    #[inline]
    fn profit_shift(&self) -> usize {
        self.item_qubits + self.capacity_qubits
    }

    #[inline]
    fn flag_bit(&self) -> usize {
        self.item_qubits + self.capacity_qubits + self.profit_qubits
    }

    #[inline]
    pub fn index(&self, items: u64, cap: u64, profit: u64, flag: bool) -> usize {
        (items
            | cap << self.cap_shift()
            | profit << self.profit_shift()
            | (flag as u64) << self.flag_bit()) as usize
    }

    #[inline]
    pub fn item_bits(&self, idx: usize) -> u64 {
        idx as u64 & ((1u64 << self.item_qubits) - 1)
    }

    #[inline]
    pub fn cap_value(&self, idx: usize) -> u64 {
        (idx as u64 >> self.cap_shift()) & ((1u64 << self.capacity_qubits) - 1)
    }

    #[inline]
    pub fn profit_value(&self, idx: usize) -> u64 {
        (idx as u64 >> self.profit_shift()) & ((1u64 << self.profit_qubits) - 1)
    }
}

/// Dense complex statevector over a register layout.
#[derive(Debug, Clone)]
pub struct StateVector<R: Real> {
    pub layout: RegisterLayout,
    pub amps: Vec<Complex<R>>,
}

impl<R: Real> StateVector<R> {
    /// Pre-preparation state: items `|0..0>`, capacity register preloaded
    /// with `c`, profit `|0>`, flag `|->`.
    pub fn initial(inst: &KnapsackInstance) -> Result<Self> {
        let layout = RegisterLayout::for_instance(inst)?;
        let mut amps = vec![Complex::new(R::zero(), R::zero()); 1 << layout.total_qubits()];
        let half = R::of(std::f64::consts::FRAC_1_SQRT_2);
        amps[layout.index(0, inst.capacity, 0, false)] = Complex::new(half, R::zero());
        amps[layout.index(0, inst.capacity, 0, true)] = Complex::new(-half, R::zero());
        Ok(Self { layout, amps })
    }

    /// Uniform superposition over the profit register only (flag `|->`),
    /// for oracle tests on a bare profit register.
    pub fn profit_register_superposition(profit_qubits: usize) -> Result<Self> {
        let layout = RegisterLayout::new(0, 0, profit_qubits)?;
        let dim = 1usize << profit_qubits;
        let amp = R::one() / R::of_usize(2 * dim).sqrt();
        let mut amps = vec![Complex::new(R::zero(), R::zero()); 2 * dim];
        for p in 0..dim as u64 {
            amps[layout.index(0, 0, p, false)] = Complex::new(amp, R::zero());
            amps[layout.index(0, 0, p, true)] = Complex::new(-amp, R::zero());
        }
        Ok(Self { layout, amps })
    }

    pub fn norm_sq(&self) -> R {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn negate(&mut self) {
        for a in &mut self.amps {
            *a = -*a;
        }
    }

    /// Biased Hadamard on item qubit `m`, controlled on `w_m <= C`.
    fn biased_hadamard(&mut self, inst: &KnapsackInstance, bias: &BiasConfig<R>, m: usize) {
        let bit = 1usize << m;
        let ref_bit = bias.reference >> m & 1 == 1;
        let b = bias.bias;
        // Probability that the qubit stays |0>.
        let p0 = if ref_bit {
            R::one() / (b + R::of(2.0))
        } else {
            (b + R::one()) / (b + R::of(2.0))
        };
        let a = p0.sqrt();
        let c = (R::one() - p0).sqrt();
        let w = inst.weights[m];
        for idx in 0..self.amps.len() {
            if idx & bit == 0 && self.layout.cap_value(idx) >= w {
                let j = idx | bit;
                let x0 = self.amps[idx];
                let x1 = self.amps[j];
                self.amps[idx] = x0.scale(a) + x1.scale(c);
                self.amps[j] = x0.scale(c) - x1.scale(a);
            }
        }
    }

    /// Add `delta` (mod register size) to the capacity register wherever
    /// item qubit `m` is set.
    fn offset_capacity(&mut self, m: usize, delta: u64) {
        let modulus = 1u64 << self.layout.capacity_qubits;
        let delta = delta % modulus;
        if delta == 0 {
            return;
        }
        let bit = 1usize << m;
        let mut out = vec![Complex::new(R::zero(), R::zero()); self.amps.len()];
        for idx in 0..self.amps.len() {
            let a = self.amps[idx];
            if a == Complex::new(R::zero(), R::zero()) {
                continue;
            }
            if idx & bit != 0 {
                let cap = (self.layout.cap_value(idx) + delta) % modulus;
                let base = idx & !(((modulus - 1) as usize) << self.layout.cap_shift());
                out[base | (cap as usize) << self.layout.cap_shift()] = a;
            } else {
                out[idx] = a;
            }
        }
        self.amps = out;
    }

    /// Add `delta` (mod register size) to the profit register wherever item
    /// qubit `m` is set.
    fn offset_profit(&mut self, m: usize, delta: u64) {
        let modulus = 1u64 << self.layout.profit_qubits;
        let delta = delta % modulus;
        if delta == 0 {
            return;
        }
        let bit = 1usize << m;
        let mut out = vec![Complex::new(R::zero(), R::zero()); self.amps.len()];
        for idx in 0..self.amps.len() {
            let a = self.amps[idx];
            if a == Complex::new(R::zero(), R::zero()) {
                continue;
            }
            if idx & bit != 0 {
                let p = (self.layout.profit_value(idx) + delta) % modulus;
                let base = idx & !(((modulus - 1) as usize) << self.layout.profit_shift());
                out[base | (p as usize) << self.layout.profit_shift()] = a;
            } else {
                out[idx] = a;
            }
        }
        self.amps = out;
    }

    /// Preparation steps for `items`: per item, the comparator-controlled
    /// biased Hadamard, then controlled capacity subtraction and profit
    /// addition.
    pub fn apply_qtg(&mut self, inst: &KnapsackInstance, bias: &BiasConfig<R>, items: Range<usize>) {
        let cap_mod = 1u64 << self.layout.capacity_qubits;
        let profit_mod = 1u64 << self.layout.profit_qubits;
        for m in items {
            self.biased_hadamard(inst, bias, m);
            self.offset_capacity(m, cap_mod - inst.weights[m] % cap_mod);
            self.offset_profit(m, inst.profits[m] % profit_mod);
        }
    }

    /// Inverse preparation: reversed item order, inverted arithmetic, and
    /// the (self-inverse) biased Hadamard last.
    pub fn apply_qtg_inverse(
        &mut self,
        inst: &KnapsackInstance,
        bias: &BiasConfig<R>,
        items: Range<usize>,
    ) {
        let cap_mod = 1u64 << self.layout.capacity_qubits;
        let profit_mod = 1u64 << self.layout.profit_qubits;
        for m in items.rev() {
            self.offset_profit(m, (profit_mod - inst.profits[m] % profit_mod) % profit_mod);
            self.offset_capacity(m, inst.weights[m] % cap_mod);
            self.biased_hadamard(inst, bias, m);
        }
    }

    /// Phase `-1` on every basis state whose profit register exceeds the
    /// threshold, built from the per-zero-bit control patterns and realized
    /// as controlled-X onto the `|->` flag. A negative threshold marks
    /// everything (global phase).
    pub fn apply_threshold_oracle(&mut self, threshold: i64) {
        if threshold < 0 {
            self.negate();
            return;
        }
        let width = self.layout.profit_qubits;
        if threshold as u64 >= (1u64 << width) - 1 {
            return; // nothing in the register exceeds it
        }
        let flag = 1usize << self.layout.flag_bit();
        for pat in threshold_oracle_patterns(threshold as u64, width) {
            for idx in 0..self.amps.len() {
                if idx & flag == 0 && pat.matches(self.layout.profit_value(idx)) {
                    self.amps.swap(idx, idx | flag);
                }
            }
        }
    }

    /// Reflection about the pre-preparation basis state (items 0, capacity
    /// preload, profit 0); the flag qubit is untouched.
    pub fn apply_diffuser(&mut self, inst: &KnapsackInstance) {
        for flag in [false, true] {
            let idx = self.layout.index(0, inst.capacity, 0, flag);
            self.amps[idx] = -self.amps[idx];
        }
    }

    /// Total probability of measuring an item configuration in the global
    /// marked set, summed over consistent arithmetic registers.
    pub fn marked_probability(&self, inst: &KnapsackInstance, y: i64) -> Result<R> {
        let marked = ksolve::enumerate_global_marked(inst, y)?;
        let mut total = R::zero();
        for s in &marked.states {
            for flag in [false, true] {
                let idx = self
                    .layout
                    .index(s.bits, inst.capacity - s.weight, s.profit, flag);
                total = total + self.amps[idx].norm_sqr();
            }
        }
        Ok(total)
    }

    /// Probability of one specific item configuration at its consistent
    /// register values.
    pub fn basis_probability(&self, inst: &KnapsackInstance, bits: u64) -> R {
        let weight = inst.weight_of(bits);
        let profit = inst.profit_of(bits);
        if weight > inst.capacity {
            return R::zero();
        }
        let mut total = R::zero();
        for flag in [false, true] {
            let idx = self.layout.index(bits, inst.capacity - weight, profit, flag);
            total = total + self.amps[idx].norm_sqr();
        }
        total
    }
}

/// One Appendix-style comparator pattern: profit bits above `j` must equal
/// the threshold's, bit `j` must be 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OraclePattern {
    pub eq_mask: u64,
    pub eq_value: u64,
    pub one_bit: usize,
}

impl OraclePattern {
    #[inline]
    pub fn matches(&self, profit: u64) -> bool {
        profit & self.eq_mask == self.eq_value && profit >> self.one_bit & 1 == 1
    }
}

/// Control patterns for `p > T` on a `width`-bit register: one pattern per
/// zero bit of the threshold, scanning disagreements from the most
/// significant bit down.
pub fn threshold_oracle_patterns(threshold: u64, width: usize) -> Vec<OraclePattern> {
    debug_assert!(width == 0 || threshold < 1 << width);
    let full = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    (0..width)
        .rev()
        .filter(|&j| threshold >> j & 1 == 0)
        .map(|j| {
            let eq_mask = full & !((1u64 << (j + 1)) - 1);
            OraclePattern {
                eq_mask,
                eq_value: threshold & eq_mask,
                one_bit: j,
            }
        })
        .collect()
}

/// Statevector after the full nested operator: inner amplification on the
/// first `k` items, preparation of the rest, then `r_out` outer iterations
/// against the global oracle.
pub fn run_nested_operator<R: Real>(
    inst: &KnapsackInstance,
    bias: &BiasConfig<R>,
    k: usize,
    y: i64,
    r_in: u64,
    r_out: u64,
) -> Result<StateVector<R>> {
    assert!(k >= 1 && k <= inst.n, "depth must be in 1..=n");
    let y_inner = y - inst.suffix_profit(k) as i64;
    let mut psi = StateVector::initial(inst)?;

    let apply_x = |psi: &mut StateVector<R>| {
        psi.apply_qtg(inst, bias, 0..k);
        for _ in 0..r_in {
            // One inner Grover iteration, rightmost factor first.
            psi.apply_threshold_oracle(y_inner);
            psi.apply_qtg_inverse(inst, bias, 0..k);
            psi.apply_diffuser(inst);
            psi.apply_qtg(inst, bias, 0..k);
            psi.negate();
        }
    };
    let apply_x_dagger = |psi: &mut StateVector<R>| {
        for _ in 0..r_in {
            psi.apply_qtg_inverse(inst, bias, 0..k);
            psi.apply_diffuser(inst);
            psi.apply_qtg(inst, bias, 0..k);
            psi.apply_threshold_oracle(y_inner);
            psi.negate();
        }
        psi.apply_qtg_inverse(inst, bias, 0..k);
    };

    apply_x(&mut psi);
    psi.apply_qtg(inst, bias, k..inst.n);
    for _ in 0..r_out {
        psi.apply_threshold_oracle(y);
        psi.apply_qtg_inverse(inst, bias, k..inst.n);
        apply_x_dagger(&mut psi);
        psi.apply_diffuser(inst);
        apply_x(&mut psi);
        psi.apply_qtg(inst, bias, k..inst.n);
        psi.negate();
    }
    Ok(psi)
}

//! Self-check suite behind the `verify` subcommand: certifies the tracking
//! engine against the statevector simulator and spot-checks the oracle and
//! normalization contracts. Prints one line per check.

use knapaa_core::amptrack::{self, BiasConfig};
use knapaa_core::instances::{generate_instance, Correlation};
use knapaa_core::ksolve;
use knapaa_core::nested::{clopper_pearson, nested_global_ensemble};
use knapaa_core::qcheck::{self, StateVector};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn report(checks: &[Check]) -> bool {
    let mut all = true;
    for c in checks {
        let tagline = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tagline}] {} {}", c.name, c.detail);
        all &= c.passed;
    }
    all
}

/// Run the suite; returns true when every check passes.
pub fn run() -> bool {
    let mut checks = Vec::new();

    // Tracking vs statevector on random small configurations.
    let mut max_err = 0.0f64;
    let mut configs = 0usize;
    'outer: for i in 1..=8u64 {
        for n in 2..=4usize {
            let inst = match generate_instance(n, 4, Correlation::Uncorrelated, 2, i) {
                Ok(inst) => inst,
                Err(_) => continue,
            };
            let y = ksolve::greedy_solution(&inst).value;
            for b in [0.0f64, 1.0, 3.0] {
                let bias = BiasConfig::greedy(&inst, b);
                for k in 1..n {
                    for r_in in 0..3u64 {
                        for r_out in 0..3u64 {
                            let ens = match nested_global_ensemble(&inst, &bias, y, k, r_in) {
                                Ok(e) => e,
                                Err(_) => continue,
                            };
                            let tracked = amptrack::success_probability(&ens, r_out);
                            let psi = match qcheck::run_nested_operator(
                                &inst, &bias, k, y as i64, r_in, r_out,
                            ) {
                                Ok(p) => p,
                                Err(_) => continue,
                            };
                            let simulated = psi.marked_probability(&inst, y as i64).unwrap();
                            max_err = max_err.max((tracked - simulated).abs());
                            configs += 1;
                            if configs >= 600 {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    checks.push(Check {
        name: "tracking-vs-statevector",
        passed: max_err <= 1e-9 && configs > 100,
        detail: format!("({configs} configurations, max |dp| = {max_err:.2e})"),
    });

    // Threshold oracle, exhaustive over small widths.
    let mut oracle_ok = true;
    for width in 1..=5usize {
        for threshold in 0..1u64 << width {
            let mut psi = StateVector::<f64>::profit_register_superposition(width).unwrap();
            let before = psi.amps.clone();
            psi.apply_threshold_oracle(threshold as i64);
            for p in 0..1u64 << width {
                let idx = psi.layout.index(0, 0, p, false);
                let expect = if p > threshold {
                    -before[idx]
                } else {
                    before[idx]
                };
                oracle_ok &= psi.amps[idx] == expect;
            }
        }
    }
    checks.push(Check {
        name: "threshold-oracle-exhaustive",
        passed: oracle_ok,
        detail: "(widths 1..=5, all thresholds)".into(),
    });

    // Preparation normalization over feasible assignments.
    let mut norm_err = 0.0f64;
    for i in 1..=20u64 {
        let inst = generate_instance(12, 40, Correlation::Uncorrelated, 4, i).unwrap();
        let bias = BiasConfig::greedy(&inst, inst.n as f64);
        let total: f64 = (0u64..1 << inst.n)
            .map(|x| {
                let a = amptrack::partial_amplitude(&inst, &bias, x, inst.n);
                a * a
            })
            .sum();
        norm_err = norm_err.max((total - 1.0).abs());
    }
    checks.push(Check {
        name: "preparation-normalization",
        passed: norm_err <= 1e-12,
        detail: format!("(20 instances, max |1-sum| = {norm_err:.2e})"),
    });

    // Statevector unitarity through a full nested operator.
    let inst = generate_instance(4, 6, Correlation::Uncorrelated, 2, 3).unwrap();
    let bias = BiasConfig::greedy(&inst, 2.0f64);
    let y = ksolve::greedy_solution(&inst).value as i64;
    let psi = qcheck::run_nested_operator(&inst, &bias, 2, y, 2, 2).unwrap();
    let norm = psi.norm_sq();
    checks.push(Check {
        name: "statevector-unitarity",
        passed: (norm - 1.0).abs() <= 1e-12,
        detail: format!("(|norm-1| = {:.2e})", (norm - 1.0).abs()),
    });

    // Confidence-bound table values.
    let expected = [(0.80f64, 0.631f64), (0.90, 0.549), (0.95, 0.478), (0.99, 0.347)];
    let mut cp_ok = true;
    for &(conf, lower) in &expected {
        let b = clopper_pearson(5, 5, conf).unwrap();
        cp_ok &= (b.p_lower - lower).abs() < 1e-3 && b.p_upper == 1.0;
    }
    checks.push(Check {
        name: "confidence-bounds-table",
        passed: cp_ok,
        detail: "(all-successes row, L = 5)".into(),
    });

    report(&checks)
}

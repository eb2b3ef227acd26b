//! Result records and the common datapoint CSV schema.

use knapaa_core::instances::Correlation;

use crate::emit::fmt12;

/// Which protocol produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Baseline,
    Nested,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Baseline => "baseline",
            Protocol::Nested => "nested",
        }
    }
}

/// Datapoint column order shared by every emitted table. Fields that do not
/// apply to a given experiment stay empty.
pub const CSV_HEADER: [&str; 23] = [
    "instance_id",
    "n",
    "corr_type",
    "range_r",
    "tightness_s",
    "capweight",
    "protocol",
    "seed",
    "bias_b",
    "lambda",
    "L",
    "depth_policy",
    "k",
    "r_in",
    "C_total",
    "C_inner",
    "C_outer",
    "y_greedy",
    "y_final",
    "y_star",
    "alpha",
    "gamma",
    "c_rel",
];

/// One experiment datapoint.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance_id: String,
    pub n: usize,
    pub corr_type: Correlation,
    pub range_r: u64,
    pub tightness_s: u64,
    pub capweight: f64,
    pub protocol: Protocol,
    pub seed: u64,
    pub bias_b: f64,
    pub lambda: f64,
    pub validation_samples: u64,
    pub depth_policy: String,
    pub depth: Option<usize>,
    pub inner_rotations: Option<u64>,
    pub cost_total: f64,
    pub cost_inner: f64,
    pub cost_outer: f64,
    pub y_greedy: u64,
    pub y_final: u64,
    pub y_star: Option<u64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub c_rel: Option<f64>,
}

fn corr_name(c: Correlation) -> &'static str {
    match c {
        Correlation::Uncorrelated => "uncorrelated",
        Correlation::WeaklyCorrelated => "weakly_correlated",
        Correlation::StronglyCorrelated => "strongly_correlated",
    }
}

impl RunRecord {
    pub fn to_row(&self) -> Vec<String> {
        let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f = |v: Option<f64>| v.map(fmt12).unwrap_or_default();
        vec![
            self.instance_id.clone(),
            self.n.to_string(),
            corr_name(self.corr_type).to_string(),
            self.range_r.to_string(),
            self.tightness_s.to_string(),
            fmt12(self.capweight),
            self.protocol.name().to_string(),
            self.seed.to_string(),
            fmt12(self.bias_b),
            fmt12(self.lambda),
            self.validation_samples.to_string(),
            self.depth_policy.clone(),
            opt_u(self.depth.map(|k| k as u64)),
            opt_u(self.inner_rotations),
            fmt12(self.cost_total),
            fmt12(self.cost_inner),
            fmt12(self.cost_outer),
            self.y_greedy.to_string(),
            self.y_final.to_string(),
            opt_u(self.y_star),
            opt_f(self.alpha),
            opt_f(self.gamma),
            opt_f(self.c_rel),
        ]
    }
}

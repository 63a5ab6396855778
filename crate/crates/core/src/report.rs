//! Per-solve summary, serialized by the CLI as JSON.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub n: usize,
    pub eps: f64,
    /// ADI iterations; for nested solves, the outer count.
    pub iterations: usize,
    /// Relative Frobenius residual of the discrete equation.
    pub residual: f64,
    /// Wall-clock seconds per pipeline stage.
    pub seconds: BTreeMap<String, f64>,
    /// Fallbacks and other things worth a second look.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn new(solver: &str, n: usize, eps: f64) -> Self {
        Self {
            solver: solver.to_string(),
            n,
            eps,
            iterations: 0,
            residual: f64::NAN,
            seconds: BTreeMap::new(),
            notes: vec![],
        }
    }

    /// Runs `f` and adds its wall time to `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        *self.seconds.entry(stage.to_string()).or_insert(0.0) += t0.elapsed().as_secs_f64();
        out
    }

    pub fn total_seconds(&self) -> f64 {
        self.seconds.values().sum()
    }
}

use crate::checks::{context, registry, Check, Class, Outcome};
use crate::config::RunConfig;
use crate::io::SCHEMA;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub class: Class,
    pub status: Status,
    pub deviation: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: &'static str,
    pub config: RunConfig,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub fn run_check(cfg: &RunConfig, check: &Check) -> CheckResult {
    let tolerance = check.tolerance(cfg);
    let outcome = match context(cfg, check.name) {
        Ok(mut ctx) => (check.run)(&mut ctx),
        Err(e) => Outcome::Error(e),
    };
    let (status, deviation, reason) = match outcome {
        Outcome::Measured(d) if d < tolerance => (Status::Pass, Some(d), None),
        Outcome::Measured(d) => (Status::Fail, Some(d), None),
        Outcome::Skipped(r) => (Status::Skipped, None, Some(r)),
        Outcome::Error(r) => (Status::Error, None, Some(r)),
    };
    CheckResult { name: check.name, class: check.class, status, deviation, tolerance, reason }
}

/// Runs every check on a small worker pool; results are ordered by name.
pub fn run_suite(cfg: &RunConfig) -> SuiteReport {
    let checks = registry();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(checks.len()));
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(check) = checks.get(i) else { break };
                let r = run_check(cfg, check);
                results.lock().expect("no poisoned workers").push(r);
            });
        }
    });
    let mut checks = results.into_inner().expect("no poisoned workers");
    checks.sort_by_key(|r| r.name);
    let count = |s: Status| checks.iter().filter(|r| r.status == s).count();
    SuiteReport {
        schema: SCHEMA,
        config: cfg.clone(),
        passed: count(Status::Pass),
        failed: count(Status::Fail) + count(Status::Error),
        skipped: count(Status::Skipped),
        checks,
    }
}

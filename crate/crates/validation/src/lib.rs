//! Bookkeeping for the acceptance run: each criterion is timed, compared
//! against its runtime budget and printed as one line.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    /// Whether every numerical check of the criterion held.
    pub met: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.met && self.elapsed <= self.budget
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let slow = if self.elapsed > self.budget { " OVER BUDGET" } else { "" };
        format!(
            "[{verdict}] {}. {}: {} | {:.1} s of {:.0} s{slow}",
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        )
    }
}

/// Runs `body`, which returns `(met, detail)`; an `Err` counts as not met.
pub fn measure<F>(id: u32, title: &'static str, budget_s: f64, body: F) -> Outcome
where
    F: FnOnce() -> Result<(bool, String), String>,
{
    let start = Instant::now();
    let (met, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome { id, title, met, detail, elapsed: start.elapsed(), budget: Duration::from_secs_f64(budget_s) }
}

/// `value` lies within `center +- tol`; formatted for the detail line.
pub fn within(name: &str, value: f64, center: f64, tol: f64) -> (bool, String) {
    let ok = (value - center).abs() <= tol;
    (ok, format!("{name} = {value:.4} (want {center:.4} +- {tol}){}", if ok { "" } else { " <- out" }))
}

/// Joins several checks into one verdict and detail string.
pub fn all(parts: Vec<(bool, String)>) -> (bool, String) {
    let met = parts.iter().all(|(ok, _)| *ok);
    let detail = parts.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join("; ");
    (met, detail)
}

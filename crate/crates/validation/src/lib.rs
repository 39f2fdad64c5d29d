//! Reporting helpers for the acceptance run.

use std::time::{Duration, Instant};

/// Outcome of one acceptance check.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>3} {} ({:.2}s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs `check`, which returns `(pass, detail)`, and times it. A panic inside
/// the check is reported as a failure.
pub fn run(id: &'static str, name: &'static str, check: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (pass, detail) = match res {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let out = Outcome {
        id,
        name,
        pass,
        detail,
        elapsed,
    };
    println!("{}", out.line());
    out
}

/// Relative deviation `|x - target| / |target|`.
pub fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_failures() {
        let o = run("0", "panics", || panic!("boom"));
        assert!(!o.pass);
        assert!(o.detail.contains("boom"));
    }

    #[test]
    fn relative_error() {
        assert!((rel(1.1, 1.0) - 0.1).abs() < 1e-12);
        assert_eq!(rel(-2.0, -1.0), 1.0);
    }
}

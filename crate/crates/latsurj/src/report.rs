//! Experiment reports: JSON documents and flat CSV.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::stats::wilson_interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: String,
    pub count: u64,
    pub freq: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub prediction: Option<f64>,
    pub tail_bound: Option<f64>,
    /// `None` for purely descriptive rows.
    pub pass: Option<bool>,
    /// The check applied, e.g. `|freq - prediction| <= 0.02`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub criterion: Option<String>,
}

impl Outcome {
    pub fn new(label: impl Into<String>, count: u64, trials: u64, confidence: f64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(count, trials, confidence);
        Outcome {
            label: label.into(),
            count,
            freq: if trials == 0 { 0.0 } else { count as f64 / trials as f64 },
            ci_lo,
            ci_hi,
            prediction: None,
            tail_bound: None,
            pass: None,
            criterion: None,
        }
    }

    pub fn predicted(mut self, value: f64, tail_bound: f64) -> Self {
        self.prediction = Some(value);
        self.tail_bound = Some(tail_bound);
        self
    }

    /// Pass iff `|freq - prediction| <= tol`.
    pub fn within(mut self, tol: f64) -> Self {
        let p = self.prediction.expect("prediction set before tolerance");
        self.pass = Some((self.freq - p).abs() <= tol);
        self.criterion = Some(format!("|freq - prediction| <= {tol}"));
        self
    }

    pub fn at_least(mut self, threshold: f64) -> Self {
        self.pass = Some(self.freq >= threshold);
        self.criterion = Some(format!("freq >= {threshold}"));
        self
    }

    pub fn at_most(mut self, threshold: f64) -> Self {
        self.pass = Some(self.freq <= threshold);
        self.criterion = Some(format!("freq <= {threshold}"));
        self
    }

    pub fn check(mut self, pass: bool, criterion: impl Into<String>) -> Self {
        self.pass = Some(pass);
        self.criterion = Some(criterion.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: Value,
    pub seed: u64,
    pub trials: u64,
    pub outcomes: Vec<Outcome>,
    /// Experiment-specific detail (bound curves, per-run rows).
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub extra: Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub invocation: Option<Vec<String>>,
}

impl Report {
    pub fn new(experiment: &str, config: Value, seed: u64, trials: u64, outcomes: Vec<Outcome>) -> Self {
        let pass = outcomes.iter().all(|o| o.pass != Some(false));
        Report {
            experiment: experiment.into(),
            config,
            seed,
            trials,
            outcomes,
            extra: Value::Null,
            pass,
            runtime_ms: None,
            invocation: None,
        }
    }

    pub fn outcome(&self, label: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.label == label)
    }

    /// The report without run metadata (wall-clock time and invocation);
    /// identical for identical configuration and seed.
    pub fn result(&self) -> Report {
        Report { runtime_ms: None, invocation: None, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let mut out = String::from("experiment,label,count,trials,freq,ci_lo,ci_hi,prediction,tail_bound,pass\n");
        for o in &self.outcomes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.experiment,
                o.label,
                o.count,
                self.trials,
                o.freq,
                o.ci_lo,
                o.ci_hi,
                opt(o.prediction),
                opt(o.tail_bound),
                o.pass.map_or(String::new(), |p| p.to_string()),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn pass_aggregates_checked_rows() {
        let a = Outcome::new("a", 30, 100, 0.95).predicted(0.3, 0.0).within(0.01);
        let b = Outcome::new("b", 5, 100, 0.95);
        let r = Report::new("x", json!({}), 1, 100, vec![a.clone(), b.clone()]);
        assert!(r.pass);
        let c = Outcome::new("c", 5, 100, 0.95).at_least(0.5);
        assert!(!Report::new("x", json!({}), 1, 100, vec![a, b, c]).pass);
    }

    #[test]
    fn result_strips_run_metadata() {
        let mut r = Report::new("x", json!({"n": 3}), 7, 10, vec![Outcome::new("a", 1, 10, 0.95)]);
        r.runtime_ms = Some(12);
        r.invocation = Some(vec!["latsurj".into()]);
        let body = r.result().to_json();
        assert!(!body.contains("runtime_ms") && !body.contains("invocation"));
        assert!(r.to_json().contains("runtime_ms"));
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.to_csv().lines().count(), 2);
    }
}

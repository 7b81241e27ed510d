//! Machine-readable run reports.
//!
//! A [`RunReport`] lists named results, each tagged with where it came from
//! (`closed-form`, `solver` or `simulation`), plus boolean verdicts. Exact
//! values are carried as `num/den` strings so they survive serialization
//! without loss; `approx` holds the nearest `f64` for convenience.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::crowds::CrowdsReport;
use crate::scalar::{ExtScalar, Mode, Scalar};
use crate::simulate::{Estimate, JointCounts};
use crate::zeroconf::{CrossCheck, ZeroconfReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "solver")]
    Solver,
    #[serde(rename = "simulation")]
    Simulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultValue {
    pub name: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub mode: Mode,
    pub parameters: Vec<Parameter>,
    pub results: Vec<ResultValue>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: Vec<String>, mode: Mode) -> Self {
        RunReport {
            command,
            mode,
            parameters: Vec::new(),
            results: Vec::new(),
            verdicts: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn param(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.parameters.push(Parameter { name: name.into(), value: value.to_string() });
        self
    }

    pub fn scalar<S: Scalar>(&mut self, name: &str, value: &S, provenance: Provenance) -> &mut Self {
        let approx = Some(value.to_f64()).filter(|v| v.is_finite());
        self.results.push(ResultValue { name: name.into(), value: value.to_text(), approx, provenance });
        self
    }

    pub fn ext<S: Scalar>(&mut self, name: &str, value: &ExtScalar<S>, provenance: Provenance) -> &mut Self {
        match value {
            ExtScalar::Finite(v) => self.scalar(name, v, provenance),
            ExtScalar::Infinity => {
                self.results.push(ResultValue {
                    name: name.into(),
                    value: "inf".into(),
                    approx: None,
                    provenance,
                });
                self
            }
        }
    }

    pub fn float(&mut self, name: &str, value: f64, provenance: Provenance) -> &mut Self {
        self.results.push(ResultValue {
            name: name.into(),
            value: format!("{value:?}"),
            approx: Some(value).filter(|v| v.is_finite()),
            provenance,
        });
        self
    }

    pub fn count(&mut self, name: &str, value: u64, provenance: Provenance) -> &mut Self {
        self.results.push(ResultValue {
            name: name.into(),
            value: value.to_string(),
            approx: Some(value as f64),
            provenance,
        });
        self
    }

    pub fn verdict(&mut self, name: &str, holds: bool, note: Option<String>) -> &mut Self {
        self.verdicts.push(Verdict { name: name.into(), holds, note });
        self
    }

    pub fn cross_check<S: Scalar>(&mut self, name: &str, check: &CrossCheck<S>) -> &mut Self {
        self.scalar(&format!("{name}.closed"), &check.closed, Provenance::ClosedForm);
        self.scalar(&format!("{name}.solver"), &check.solver, Provenance::Solver);
        self.scalar(&format!("{name}.diff"), &check.diff, Provenance::Solver);
        self.verdict(&format!("{name}.agrees"), check.agrees(), None)
    }

    pub fn estimate(&mut self, name: &str, e: &Estimate) -> &mut Self {
        self.float(&format!("{name}.mean"), e.mean, Provenance::Simulation);
        self.float(&format!("{name}.std_error"), e.std_error, Provenance::Simulation);
        self.count(&format!("{name}.samples"), e.samples_used, Provenance::Simulation);
        self.count(&format!("{name}.censored"), e.censored, Provenance::Simulation)
    }

    pub fn result(&self, name: &str) -> Option<&ResultValue> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn verdict_of(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|v| v.name == name).map(|v| v.holds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat `(column, value)` pairs: parameters, then results, then
    /// verdicts, in insertion order.
    pub fn columns(&self) -> Vec<(String, String)> {
        let params = self.parameters.iter().map(|p| (p.name.clone(), p.value.clone()));
        let results = self.results.iter().map(|r| (r.name.clone(), r.value.clone()));
        let verdicts = self.verdicts.iter().map(|v| (v.name.clone(), v.holds.to_string()));
        params.chain(results).chain(verdicts).collect()
    }

    /// Plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command.join(" "));
        let _ = writeln!(out, "mode:    {}", self.mode);
        let width = self
            .parameters
            .iter()
            .map(|p| p.name.len())
            .chain(self.results.iter().map(|r| r.name.len()))
            .chain(self.verdicts.iter().map(|v| v.name.len()))
            .max()
            .unwrap_or(0);
        if !self.parameters.is_empty() {
            let _ = writeln!(out, "\nparameters");
            for p in &self.parameters {
                let _ = writeln!(out, "  {:width$}  {}", p.name, p.value);
            }
        }
        if !self.results.is_empty() {
            let _ = writeln!(out, "\nresults");
            for r in &self.results {
                let tag = match r.provenance {
                    Provenance::ClosedForm => "closed-form",
                    Provenance::Solver => "solver",
                    Provenance::Simulation => "simulation",
                };
                let approx = match r.approx {
                    Some(a) if r.value.contains('/') => format!("  (~{a:e})"),
                    _ => String::new(),
                };
                let _ = writeln!(out, "  {:width$}  {:<11}  {}{}", r.name, tag, r.value, approx);
            }
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(out, "\nverdicts");
            for v in &self.verdicts {
                let note = v.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
                let _ = writeln!(out, "  {:width$}  {}{}", v.name, v.holds, note);
            }
        }
        if let Some(ms) = self.timing_ms {
            let _ = writeln!(out, "\ntime: {ms:.1} ms");
        }
        out
    }
}

impl<S: Scalar> ZeroconfReport<S> {
    pub fn append_to(&self, report: &mut RunReport) {
        let p = &self.params;
        report
            .param("N", p.last_probe)
            .param("p", p.p.to_text())
            .param("q", p.q.to_text())
            .param("r", p.r.to_text())
            .param("E", p.e.to_text());
        report.count("states", self.state_count as u64, Provenance::Solver);
        report.cross_check("p_err_start", &self.p_err);
        for (n, check) in self.p_err_probe.iter().enumerate() {
            report.cross_check(&format!("p_err_probe{n}"), check);
        }
        report.verdict("p_err_start_iter", self.start_iter_identity, None);
        report.cross_check("cost_start", &self.cost);
        report.ext("expected_steps", &self.expected_steps, Provenance::Solver);
        let all_term = self.ae_term.iter().all(|(_, ok)| *ok);
        let failing: Vec<&str> = self.ae_term.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.as_str()).collect();
        report.verdict(
            "ae_term_all_states",
            all_term,
            (!failing.is_empty()).then(|| format!("not certified from {}", failing.join(", "))),
        );
        for audit in [&self.p_err_audit, &self.cost_audit] {
            let note = if audit.holds {
                None
            } else {
                Some(format!(
                    "published claim not reproduced: exact value {} (~{:e}) exceeds {}",
                    audit.value.to_text(),
                    audit.value.to_f64(),
                    audit.bound.to_text()
                ))
            };
            report.verdict(&format!("audit: {}", audit.claim), audit.holds, note);
        }
        if let Some(sim) = &self.simulation {
            report.estimate("p_err_start.sim", &sim.p_err);
            report.estimate("cost_start.sim", &sim.cost);
            report.verdict("p_err_start.sim_within_3se", sim.p_err.within(self.p_err.solver.to_f64(), 3.0), None);
            report.verdict("cost_start.sim_within_3se", sim.cost.within(self.cost.solver.to_f64(), 3.0), None);
        }
    }
}

impl<S: Scalar> CrowdsReport<S> {
    pub fn append_to(&self, report: &mut RunReport) {
        report.param("J", self.j).param("H", self.h).param("p_f", self.p_f.to_text());
        report.count("states", self.state_count as u64, Provenance::Solver);
        report.cross_check("hit_colls", &self.hit_colls);
        report.cross_check("first_eq_last", &self.first_eq_last);
        report.scalar("joint_first_last.max_diff", &self.joint_max_diff, Provenance::Solver);
        report.verdict("joint_first_last.agrees", self.joint_agrees, None);
        report.ext("innocence_threshold", &self.innocence.threshold, Provenance::ClosedForm);
        report.verdict("probable_innocence", self.innocence.holds, None);
        report.float("mi_exact", self.mi_exact, Provenance::ClosedForm);
        report.float("mi_solver", self.mi_solver, Provenance::Solver);
        report.float("mi_bound", self.mi_bound, Provenance::ClosedForm);
        report.verdict("mi_within_bound", self.mi_exact <= self.mi_bound + 1e-9, None);
        report.ext("expected_route_steps", &self.expected_route_steps, Provenance::Solver);
        report.verdict("ae_reach_end", self.ae_end, None);
        report.verdict("last_jondo_uniform", self.last_jondo_uniform, None);
        report.verdict("first_last_jondo_independent", self.first_last_independent, None);
        report.verdict("first_jondo_last_ncoll_independent", self.first_ncoll_independent, None);
    }
}

impl JointCounts {
    pub fn append_to(&self, report: &mut RunReport) {
        report.count("routes.samples", self.samples, Provenance::Simulation);
        report.count("routes.hit_colls", self.hits, Provenance::Simulation);
        report.count("routes.censored", self.censored, Provenance::Simulation);
        report.count("routes.shape_violations", self.shape_violations, Provenance::Simulation);
        for ((i, l), c) in &self.counts {
            report.count(&format!("routes.first={i},last_ncoll={l}"), *c, Provenance::Simulation);
        }
        if self.is_empty() {
            report.verdict("routes.hit_colls_observed", false, Some("no sampled route hit a collaborator".into()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_rational, Rational};

    #[test]
    fn rational_values_round_trip_through_json() {
        let mut report = RunReport::new(vec!["test".into()], Mode::Exact);
        let v = Rational::new(16.into(), 65024.into()) * Rational::new(7.into(), 3.into());
        report.scalar("x", &v, Provenance::Solver);
        report.ext::<Rational>("y", &ExtScalar::Infinity, Provenance::Solver);
        let back: RunReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert_eq!(parse_rational(&back.result("x").unwrap().value).unwrap(), v);
        assert!(back.to_json().contains("\"provenance\": \"solver\""));
    }
}

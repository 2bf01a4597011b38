//! Job ingestion, execution, and machine-readable reporting for the model
//! programs: parse an equation, dispatch on the requested mode, and emit a
//! versioned JSON report with deterministic content for a fixed seed.

pub mod parse;

use serde::Deserialize;
use serde_json::{json, Value};

use dpmodels::duval::{standard_model_check, CdvType};
use dpmodels::flowchart::{run_cubic, run_dp2, verify_trace, Outcome, RunConfig, Trace};
use dpmodels::polyring::Field;
use dpmodels::rigidity::{genericity_check, match_profile, rigidity_sweep, MatchOutcome};
use dpmodels::transform::TransformStep;
use dpmodels::{Ambient, AmbientSpace};

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Deserialize)]
pub struct JobSpec {
    pub ambient: String,
    pub equation: String,
    #[serde(default = "default_field")]
    pub field: String,
    pub mode: String,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_truncation")]
    pub truncation: u32,
    #[serde(default = "default_verify")]
    pub verify: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_sweep")]
    pub sweep_count: usize,
    #[serde(default = "default_blowups")]
    pub max_blowups: usize,
}

fn default_field() -> String {
    "q".into()
}
fn default_cap() -> usize {
    25
}
fn default_seed() -> u64 {
    1
}
fn default_truncation() -> u32 {
    12
}
fn default_verify() -> bool {
    true
}
fn default_samples() -> usize {
    5
}
fn default_sweep() -> usize {
    100
}
fn default_blowups() -> usize {
    12
}

pub fn ambient_by_name(name: &str) -> Result<Ambient, String> {
    match name {
        "p3" => Ok(AmbientSpace::p3()),
        "wp2111" => Ok(AmbientSpace::wp2111()),
        "wp3211" => Ok(AmbientSpace::wp3211()),
        other => Err(format!("unknown ambient {other} (use p3, wp2111, wp3211)")),
    }
}

pub fn field_by_name(name: &str) -> Result<Field, String> {
    if name == "q" {
        return Ok(Field::rationals());
    }
    if let Some(p) = name.strip_prefix("fp:") {
        let p: u64 = p.parse().map_err(|_| format!("bad prime in field spec {name}"))?;
        return Field::prime(p).map_err(|e| e.to_string());
    }
    Err(format!("unknown field {name} (use q or fp:<p>)"))
}

fn step_json(ts: &dpmodels::flowchart::TraceStep) -> Value {
    let s: &TransformStep = &ts.step;
    let inv = |i: &Option<dpmodels::transform::StateInvariants>| -> Value {
        match i {
            None => Value::Null,
            Some(v) => json!({
                "n_components": v.n_components,
                "axial": v.axial.map(|a| a.map(|x| Value::from(x)).unwrap_or(Value::String("infinite".into()))),
            }),
        }
    };
    json!({
        "rule": ts.rule,
        "weights": s.weights,
        "center": s.center,
        "c": s.t_removed,
        "mu": s.mu,
        "criterion_holds": s.criterion_holds,
        "invariants_before": inv(&s.invariants_before),
        "invariants_after": inv(&s.invariants_after),
        "discrepancy": s.discrepancy_entries.iter().map(|(n, v)| json!({"divisor": n, "coefficient": v})).collect::<Vec<_>>(),
        "witness_change": ts.witness.as_ref().map(|w| {
            w.substitutions().iter().map(|(v, p)| json!({"variable": v, "image": p.render()})).collect::<Vec<_>>()
        }),
    })
}

fn singularities_json(report: &dpmodels::duval::StandardModelReport) -> Vec<Value> {
    report
        .points
        .iter()
        .map(|p| {
            json!({
                "location": p.location,
                "verdict": p.verdict.label(),
                "sections_tried": p.sections_tried,
                "agreement": p.agreement,
            })
        })
        .collect()
}

fn trace_json(trace: &Trace, verify: Option<&dpmodels::flowchart::VerificationReport>) -> Value {
    let mut cert = json!({});
    match &trace.outcome {
        Outcome::Standard(rep) => {
            cert = json!({
                "standard": {
                    "is_standard": rep.is_standard,
                    "reasons": rep.reasons,
                }
            });
        }
        Outcome::Exceptional(e) => {
            cert = json!({
                "exceptional": {
                    "clauses": e.clauses.iter().map(|(n, ok)| json!({"clause": n, "holds": ok})).collect::<Vec<_>>(),
                    "triple_point": e.triple_point.as_ref().map(|_| "k-rational"),
                }
            });
        }
        Outcome::StandardInP6(m) => {
            cert = json!({
                "determinantal": {
                    "matrix": m.matrix.iter().map(|row| row.iter().map(|p| p.render()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "residual": m.residual.render(),
                    "fiber_degeneration_checked": m.verify_fiber_degeneration().unwrap_or(false),
                }
            });
        }
        Outcome::NeedsP6(d) => {
            cert = json!({"needs_p6": d});
        }
        _ => {}
    }
    json!({
        "outcome": trace.outcome.label(),
        "steps": trace.steps.iter().map(step_json).collect::<Vec<_>>(),
        "states": trace.states,
        "final_model": trace.final_model.render(),
        "certificates": cert,
        "verification": verify.map(|v| json!({
            "pass": v.pass,
            "first_failure": v.first_failure.as_ref().map(|(i, n)| json!({"step": i, "check": n})),
            "checks": v.checks.len(),
        })),
    })
}

/// Run a job, returning the JSON report and the process exit code
/// (0 success, 2 unresolved/cap, 1 error).
pub fn run_job(spec: &JobSpec) -> (Value, i32) {
    match run_job_inner(spec) {
        Ok((v, code)) => (v, code),
        Err(msg) => (
            json!({
                "version": REPORT_VERSION,
                "input": {"ambient": spec.ambient, "field": spec.field, "equation": spec.equation},
                "mode": spec.mode,
                "seed": spec.seed,
                "outcome": "error",
                "error": msg,
            }),
            1,
        ),
    }
}

fn run_job_inner(spec: &JobSpec) -> Result<(Value, i32), String> {
    let ambient = ambient_by_name(&spec.ambient)?;
    let field = field_by_name(&spec.field)?;
    let poly = parse::parse_equation(&spec.equation, &ambient, &field)
        .map_err(|e| e.to_string())?;
    let config = RunConfig {
        cap: spec.cap,
        seed: spec.seed,
        samples: spec.samples,
        max_blowups: spec.max_blowups,
        truncation: spec.truncation,
    };
    let input = json!({
        "ambient": spec.ambient,
        "field": spec.field,
        "equation": poly.render(),
    });
    let base = |body: Value| -> Value {
        let mut o = json!({
            "version": REPORT_VERSION,
            "input": input,
            "mode": spec.mode,
            "seed": spec.seed,
        });
        o.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
        o
    };
    match spec.mode.as_str() {
        "cubic" | "dp2" => {
            let trace = if spec.mode == "cubic" {
                run_cubic(&poly, &config).map_err(|e| e.to_string())?
            } else {
                run_dp2(&poly, &config).map_err(|e| e.to_string())?
            };
            let verification = if spec.verify { Some(verify_trace(&trace, &poly)) } else { None };
            let mut body = trace_json(&trace, verification.as_ref());
            // singularity report for standard outcomes
            if let Outcome::Standard(rep) = &trace.outcome {
                body.as_object_mut()
                    .unwrap()
                    .insert("singularities".into(), Value::Array(singularities_json(rep)));
            }
            let code = match &trace.outcome {
                Outcome::Standard(_) | Outcome::StandardInP6(_) | Outcome::Exceptional(_) => {
                    if verification.as_ref().map(|v| v.pass).unwrap_or(true) {
                        0
                    } else {
                        2
                    }
                }
                Outcome::NeedsP6(_) | Outcome::CapExceeded | Outcome::CycleDetected => 2,
            };
            Ok((base(body), code))
        }
        "classify" => {
            let rep = standard_model_check(
                &poly,
                spec.seed,
                spec.samples,
                spec.max_blowups,
                spec.truncation,
            )
            .map_err(|e| e.to_string())?;
            let all_cdv = rep.points.iter().all(|p| p.verdict != CdvType::NotCdv);
            let body = json!({
                "outcome": if rep.is_standard { "standard" } else { "not-standard" },
                "all_cdv": all_cdv,
                "reasons": rep.reasons,
                "singularities": singularities_json(&rep),
            });
            Ok((base(body), 0))
        }
        "rigidity" => {
            let m = match_profile(&poly, spec.truncation).map_err(|e| e.to_string())?;
            match m {
                MatchOutcome::NoMatch(reason) => {
                    let body = json!({
                        "outcome": "no-match",
                        "reason": reason,
                    });
                    Ok((base(body), 0))
                }
                MatchOutcome::Profile(profile) => {
                    let flags = genericity_check(&profile).map_err(|e| e.to_string())?;
                    let generic = flags.iter().all(|(_, ok)| *ok);
                    let flags_json: Vec<Value> = flags
                        .iter()
                        .map(|(n, ok)| json!({"condition": n, "holds": ok}))
                        .collect();
                    if !generic {
                        let body = json!({
                            "outcome": "not-generic",
                            "profile": profile_json(&profile),
                            "genericity": flags_json,
                            "sweep": Value::Null,
                        });
                        return Ok((base(body), 0));
                    }
                    let sweep = rigidity_sweep(
                        &poly,
                        &profile,
                        spec.sweep_count,
                        spec.seed,
                        spec.max_blowups,
                    )
                    .map_err(|e| e.to_string())?;
                    let ok = sweep.du_val == sweep.classified && sweep.classified == sweep.requested;
                    let body = json!({
                        "outcome": if ok { "all-du-val" } else { "non-du-val-member" },
                        "profile": profile_json(&profile),
                        "genericity": flags_json,
                        "sweep": {
                            "requested": sweep.requested,
                            "classified": sweep.classified,
                            "du_val": sweep.du_val,
                            "failures": sweep.failures.iter().map(|m| json!({
                                "member": m.member,
                                "points": m.points.iter().map(|(l, t)| json!({"location": l, "type": t.label()})).collect::<Vec<_>>(),
                            })).collect::<Vec<_>>(),
                        },
                    });
                    Ok((base(body), if ok { 0 } else { 2 }))
                }
            }
        }
        other => Err(format!("unknown mode {other} (use cubic, dp2, classify, rigidity)")),
    }
}

fn profile_json(p: &dpmodels::rigidity::RigidityProfile) -> Value {
    json!({
        "degree": p.degree,
        "index": p.index,
        "k": p.k_exp,
        "s": p.s_exp,
        "display_ambiguity": p.display_ambiguity,
    })
}

/// The built-in fixture corpus, as named job specs.
pub fn builtin_fixtures() -> Vec<(&'static str, &'static str)> {
    vec![
        ("cubic-tangent-cone-n1", include_str!("../fixtures/cubic_tangent_cone_n1.json")),
        ("cubic-tangent-cone-n2", include_str!("../fixtures/cubic_tangent_cone_n2.json")),
        ("cubic-tangent-cone-n3", include_str!("../fixtures/cubic_tangent_cone_n3.json")),
        ("cubic-smooth", include_str!("../fixtures/cubic_smooth.json")),
        ("classify-tangent-cone-n4", include_str!("../fixtures/classify_tangent_cone_n4.json")),
        ("dp2-u-factor", include_str!("../fixtures/dp2_u_factor.json")),
        ("dp2-linear-factor", include_str!("../fixtures/dp2_linear_factor.json")),
        ("dp2-conic-pair-k2", include_str!("../fixtures/dp2_conic_pair_k2.json")),
        ("dp2-determinantal", include_str!("../fixtures/dp2_determinantal.json")),
        ("dp2-smooth", include_str!("../fixtures/dp2_smooth.json")),
        ("rigidity-d2-generic", include_str!("../fixtures/rigidity_d2_generic.json")),
        ("rigidity-d1-generic", include_str!("../fixtures/rigidity_d1_generic.json")),
        ("rigidity-d2-nongeneric", include_str!("../fixtures/rigidity_d2_nongeneric.json")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_deterministic() {
        let spec = JobSpec {
            ambient: "p3".into(),
            equation: "x0^3 + x1^3 + x2^3 + x3^3".into(),
            field: "q".into(),
            mode: "cubic".into(),
            cap: 25,
            seed: 7,
            truncation: 12,
            verify: true,
            samples: 5,
            sweep_count: 100,
            max_blowups: 12,
        };
        let (a, c1) = run_job(&spec);
        let (b, c2) = run_job(&spec);
        assert_eq!(c1, 0);
        assert_eq!(c2, 0);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn error_reports_exit_one() {
        let spec = JobSpec {
            ambient: "p3".into(),
            equation: "x0 + ".into(),
            field: "q".into(),
            mode: "cubic".into(),
            cap: 25,
            seed: 1,
            truncation: 12,
            verify: false,
            samples: 5,
            sweep_count: 100,
            max_blowups: 12,
        };
        let (v, code) = run_job(&spec);
        assert_eq!(code, 1);
        assert!(v["error"].as_str().unwrap().contains("column 6"));
    }
}

//! Executors for the model-improvement programs: the cubic program on P^3
//! and the degree-2 program on P(2,1,1,1), with traces, invariant ledgers,
//! cycle detection, step caps, and terminal certificates. Termination of the
//! programs is monitored (cap + state hashes), not assumed.

use std::collections::BTreeSet;

use crate::ambient::AmbientKind;
use crate::duval::{standard_model_check, StandardModelReport};
use crate::error::KernelError;
use crate::fibergeom::{
    axial_multiplicity, exceptional_pattern_check, fiber_report, generic_multiplicity_along_line,
    generic_multiplicity_along_plane, multiplicity_at_point, quartic_normal_form,
    singular_locus, AxialMultiplicity, ExceptionalEvidence, QuarticCase, SingularLocus,
};
use crate::polyring::field::Scalar;
use crate::polyring::poly::DvrPolynomial;
use crate::solve::{solve_affine, SolveOutcome};
use crate::transform::{
    construct_determinantal, elementary_transform, weighted_transform, Center, CoordinateChange,
    DeterminantalModel, StateInvariants, TransformStep,
};

/// One applied step: the fired rule, the normalizing change (when the rule
/// prescribes "suitable coordinates"), the transformation data, and the
/// before/after models for replay.
#[derive(Debug)]
pub struct TraceStep {
    pub rule: String,
    pub witness: Option<CoordinateChange>,
    pub step: TransformStep,
    pub before: DvrPolynomial,
    pub after: DvrPolynomial,
}

#[derive(Debug)]
pub enum Outcome {
    Standard(StandardModelReport),
    StandardInP6(Box<DeterminantalModel>),
    Exceptional(ExceptionalEvidence),
    NeedsP6(String),
    CapExceeded,
    CycleDetected,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Standard(_) => "standard",
            Outcome::StandardInP6(_) => "standard-in-p6",
            Outcome::Exceptional(_) => "exceptional",
            Outcome::NeedsP6(_) => "needs-p6",
            Outcome::CapExceeded => "cap-exceeded",
            Outcome::CycleDetected => "cycle-detected",
        }
    }
}

#[derive(Debug)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Normalized state strings, one per visited model (including the first).
    pub states: Vec<String>,
    pub outcome: Outcome,
    pub final_model: DvrPolynomial,
}

pub struct RunConfig {
    pub cap: usize,
    pub seed: u64,
    pub samples: usize,
    pub max_blowups: usize,
    pub truncation: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { cap: 25, seed: 1, samples: 5, max_blowups: 12, truncation: 12 }
    }
}

fn state_key(f: &DvrPolynomial) -> String {
    f.normalize_leading().render()
}

/// Seeded smoothness probe for the generic fiber: specialize t at small
/// nonzero values and check the specialized hypersurface is smooth.
pub fn probe_generic_fiber_smooth(f: &DvrPolynomial, seed: u64) -> Result<(), KernelError> {
    let k = f.field.clone();
    'tau: for tau in [1i64, -1, 2, -2, 3, -3] {
        let tv = DvrPolynomial::int(&f.ambient, &k, tau);
        let g = f.substitute("t", &tv);
        if g.is_zero() {
            continue;
        }
        // vertex check for the weighted space
        if f.ambient.kind == AmbientKind::WP2111 {
            let u2 = g.coefficients_in("u");
            let vertex_value = u2
                .get(2)
                .and_then(|p| p.leading().map(|(_, c)| c.clone()))
                .unwrap_or_else(|| k.zero());
            if k.is_zero(&vertex_value) {
                continue; // fiber through the vertex: not smooth
            }
        }
        // chart-by-chart Jacobian emptiness
        let charts: Vec<usize> =
            (0..f.ambient.nvars()).filter(|&i| f.ambient.weights[i] == 1).collect();
        for (ci, &pivot) in charts.iter().enumerate() {
            let gg = g.set_var_one(&f.ambient.vars[pivot].clone());
            let live: Vec<String> = (0..f.ambient.nvars())
                .filter(|&i| i != pivot)
                .map(|i| f.ambient.vars[i].clone())
                .collect();
            let mut sys = vec![gg.clone()];
            for v in &live {
                sys.push(gg.derivative(v));
            }
            for &j in charts.iter().take(ci) {
                sys.push(DvrPolynomial::var(&f.ambient, &k, &f.ambient.vars[j]));
            }
            match solve_affine(&sys, &live, seed ^ (tau as u64) << 4 ^ ci as u64) {
                Ok(SolveOutcome::Finite(pts)) if pts.is_empty() => {}
                _ => continue 'tau,
            }
        }
        return Ok(());
    }
    Err(KernelError::geometry(
        "generic fiber smoothness probe failed at all sampled parameter values",
    ))
}

fn invariants_of(f: &DvrPolynomial, seed: u64, truncation: u32) -> Result<StateInvariants, KernelError> {
    let rep = fiber_report(f, seed)?;
    let axial = if f.ambient.kind == AmbientKind::WP2111 {
        Some(match axial_multiplicity(f, truncation)? {
            AxialMultiplicity::Finite(n) => Some(n),
            AxialMultiplicity::Infinite { .. } => None,
        })
    } else {
        None
    };
    Ok(StateInvariants { n_components: rep.n_components, axial })
}

/// The cubic program: apply the rules in priority order until none fires,
/// then certify the standard/exceptional dichotomy.
pub fn run_cubic(f: &DvrPolynomial, config: &RunConfig) -> Result<Trace, KernelError> {
    if f.ambient.kind != AmbientKind::P3 {
        return Err(KernelError::geometry("the cubic program runs on P3 models"));
    }
    if f.weighted_degree_ambient()? != 3 {
        return Err(KernelError::geometry("expected a cubic model"));
    }
    probe_generic_fiber_smooth(f, config.seed)?;
    let mut cur = f.clone();
    let mut steps: Vec<TraceStep> = vec![];
    let mut states: Vec<String> = vec![state_key(&cur)];
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(states[0].clone());
    loop {
        if steps.len() >= config.cap {
            return Ok(Trace { steps, states, outcome: Outcome::CapExceeded, final_model: cur });
        }
        match cubic_rule(&cur, config)? {
            Some((rule, center)) => {
                let inv_before = invariants_of(&cur, config.seed, config.truncation)?;
                let (next, mut step) = elementary_transform(&cur, &center)?;
                step.rule = Some(rule.clone());
                step.invariants_before = Some(inv_before);
                step.invariants_after =
                    Some(invariants_of(&next, config.seed, config.truncation)?);
                let key = state_key(&next);
                let cycled = !seen.insert(key.clone());
                states.push(key);
                steps.push(TraceStep {
                    rule,
                    witness: None,
                    step,
                    before: cur.clone(),
                    after: next.clone(),
                });
                if cycled {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::CycleDetected,
                        final_model: next,
                    });
                }
                cur = next;
            }
            None => {
                // terminal: certify the dichotomy
                let report = standard_model_check(
                    &cur,
                    config.seed,
                    config.samples,
                    config.max_blowups,
                    config.truncation,
                )?;
                if report.is_standard {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::Standard(report),
                        final_model: cur,
                    });
                }
                let exc = exceptional_pattern_check(&cur, config.seed)?;
                if exc.is_exceptional {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::Exceptional(exc),
                        final_model: cur,
                    });
                }
                return Err(KernelError::geometry(format!(
                    "certification failure: neither standard nor exceptional after termination \
                     (standard reasons: {:?}; exceptional clauses: {:?})",
                    report.reasons, exc.clauses
                )));
            }
        }
    }
}

/// Decide which cubic rule fires, in the program's priority order.
fn cubic_rule(
    f: &DvrPolynomial,
    config: &RunConfig,
) -> Result<Option<(String, Center)>, KernelError> {
    let rep = fiber_report(f, config.seed)?;
    // rule 1: a plane with generic multiplicity >= 2
    for plane in &rep.planes_over_k {
        let c = Center::plane(plane.clone())?;
        if generic_multiplicity_along_plane(f, &c)? >= 2 {
            return Ok(Some(("plane-multiplicity-2".into(), c)));
        }
    }
    // candidate k-lines come from the singular locus
    let locus = singular_locus(f, config.seed)?;
    let k_lines: Vec<Center> = match &locus {
        SingularLocus::ContainsCurve { k_lines, .. } => k_lines.clone(),
        _ => vec![],
    };
    // rule 2: a line with generic multiplicity 3
    for line in &k_lines {
        if generic_multiplicity_along_line(f, line)? >= 3 {
            return Ok(Some(("line-multiplicity-3".into(), line.clone())));
        }
    }
    // rule 3: the fiber contains a k-plane
    if let Some(plane) = rep.planes_over_k.first() {
        return Ok(Some(("plane-in-fiber".into(), Center::plane(plane.clone())?)));
    }
    // rule 4: a line with generic multiplicity 2
    for line in &k_lines {
        if generic_multiplicity_along_line(f, line)? >= 2 {
            return Ok(Some(("line-multiplicity-2".into(), line.clone())));
        }
    }
    // rule 5: a k-rational point of multiplicity 3
    if let SingularLocus::IsolatedPoints(pts) = &locus {
        let mut rational: Vec<&crate::fibergeom::SingularPoint> =
            pts.iter().filter(|p| p.is_rational()).collect();
        rational.sort_by_key(|p| p.describe(&f.ambient));
        for p in rational {
            let coords: Vec<Scalar> = p.coords.clone();
            if multiplicity_at_point(f, &coords)? >= 3 {
                let center = Center::point_at(&f.ambient, &f.field, &coords)?;
                return Ok(Some(("triple-point".into(), center)));
            }
        }
    }
    Ok(None)
}

/// The degree-2 program on P(2,1,1,1): classify the current case, pick the
/// prescribed weights (after the normal-form change), check the divisibility
/// criterion, transform; the conic-pair case with axial multiplicity one
/// leaves for the determinantal receptacle.
pub fn run_dp2(f: &DvrPolynomial, config: &RunConfig) -> Result<Trace, KernelError> {
    if f.ambient.kind != AmbientKind::WP2111 {
        return Err(KernelError::geometry("the degree-2 program runs on P(2,1,1,1) models"));
    }
    if f.weighted_degree_ambient()? != 4 {
        return Err(KernelError::geometry("expected a degree-4 model"));
    }
    probe_generic_fiber_smooth(f, config.seed)?;
    let mut cur = f.clone();
    let mut steps: Vec<TraceStep> = vec![];
    let mut states: Vec<String> = vec![state_key(&cur)];
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(states[0].clone());
    loop {
        if steps.len() >= config.cap {
            return Ok(Trace { steps, states, outcome: Outcome::CapExceeded, final_model: cur });
        }
        match dp2_rule(&cur, config)? {
            Dp2Decision::Transform { rule, witness, weights, expected_axial_shift } => {
                let inv_before = invariants_of(&cur, config.seed, config.truncation)?;
                let moved = witness.apply(&cur);
                let (next, mut step) = weighted_transform(&moved, &weights)?;
                if step.criterion_holds != Some(true) {
                    return Err(KernelError::geometry(format!(
                        "divisibility criterion failed for rule {rule} with weights {weights:?}: \
                         misclassification"
                    )));
                }
                step.rule = Some(rule.clone());
                step.invariants_before = Some(inv_before.clone());
                let inv_after = invariants_of(&next, config.seed, config.truncation)?;
                step.invariants_after = Some(inv_after.clone());
                // the axial-multiplicity transition table for the fiber cases
                if let Some(shift) = expected_axial_shift {
                    let before = inv_before.axial.flatten();
                    let after = inv_after.axial.flatten();
                    if let (Some(b), Some(a)) = (before, after) {
                        if a as i64 != b as i64 + shift {
                            return Err(KernelError::geometry(format!(
                                "axial multiplicity moved {b} -> {a}, expected shift {shift} \
                                 for rule {rule}"
                            )));
                        }
                    }
                }
                let key = state_key(&next);
                let cycled = !seen.insert(key.clone());
                states.push(key);
                steps.push(TraceStep {
                    rule,
                    witness: Some(witness),
                    step,
                    before: cur.clone(),
                    after: next.clone(),
                });
                if cycled {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::CycleDetected,
                        final_model: next,
                    });
                }
                cur = next;
            }
            Dp2Decision::Determinantal => match construct_determinantal(&cur) {
                Ok(model) => {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::StandardInP6(Box::new(model)),
                        final_model: cur,
                    })
                }
                Err(e) => {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::NeedsP6(format!(
                            "conic-pair case with axial multiplicity one: {e}"
                        )),
                        final_model: cur,
                    })
                }
            },
            Dp2Decision::Terminal(report) => {
                if report.is_standard {
                    return Ok(Trace {
                        steps,
                        states,
                        outcome: Outcome::Standard(*report),
                        final_model: cur,
                    });
                }
                return Err(KernelError::geometry(format!(
                    "degree-2 program terminated without a standard certificate: {:?}",
                    report.reasons
                )));
            }
        }
    }
}

enum Dp2Decision {
    Transform {
        rule: String,
        witness: CoordinateChange,
        weights: [u32; 4],
        /// expected k -> k + shift for the reducible-fiber cases
        expected_axial_shift: Option<i64>,
    },
    Determinantal,
    Terminal(Box<StandardModelReport>),
}

fn dp2_rule(f: &DvrPolynomial, config: &RunConfig) -> Result<Dp2Decision, KernelError> {
    let rep = fiber_report(f, config.seed)?;
    let reducible = rep.n_components > 1 || !rep.reduced;
    if reducible {
        let qnf = quartic_normal_form(f, config.seed)?;
        match qnf.case {
            QuarticCase::UFactor => {
                return Ok(Dp2Decision::Transform {
                    rule: "u-factor".into(),
                    witness: qnf.witness,
                    weights: [1, 0, 0, 0],
                    expected_axial_shift: Some(1),
                })
            }
            QuarticCase::LinearFactor => {
                return Ok(Dp2Decision::Transform {
                    rule: "linear-factor".into(),
                    witness: qnf.witness,
                    weights: [0, 1, 0, 0],
                    expected_axial_shift: Some(-1),
                })
            }
            QuarticCase::ConicPair { .. } => {
                let kax = axial_multiplicity(f, config.truncation)?;
                match kax {
                    AxialMultiplicity::Finite(kk) if kk >= 2 => {
                        return Ok(Dp2Decision::Transform {
                            rule: "conic-pair".into(),
                            witness: qnf.witness,
                            weights: [1, 1, 1, 1],
                            expected_axial_shift: Some(-2),
                        })
                    }
                    AxialMultiplicity::Finite(1) => return Ok(Dp2Decision::Determinantal),
                    AxialMultiplicity::Finite(_) => {
                        return Err(KernelError::geometry(
                            "conic-pair fiber with axial multiplicity 0: inconsistent state",
                        ))
                    }
                    AxialMultiplicity::Infinite { truncation } => {
                        return Err(KernelError::Undecided(format!(
                            "axial multiplicity exceeds truncation {truncation}"
                        )))
                    }
                }
            }
            other => {
                return Err(KernelError::geometry(format!(
                    "reducible fiber but the quartic normal form reported {other:?}"
                )))
            }
        }
    }
    // reduced irreducible fiber: singular along a curve?
    let locus = singular_locus(f, config.seed)?;
    match locus {
        SingularLocus::ContainsCurve { description, .. } => {
            let qnf = quartic_normal_form(f, config.seed)?;
            match qnf.case {
                QuarticCase::GorensteinSquareLine => Ok(Dp2Decision::Transform {
                    rule: "gorenstein-singular-line".into(),
                    witness: qnf.witness,
                    weights: [1, 1, 0, 0],
                    expected_axial_shift: None,
                }),
                QuarticCase::IndexTwoSingularLine => Ok(Dp2Decision::Transform {
                    rule: "index2-singular-line".into(),
                    witness: qnf.witness,
                    weights: [0, 1, 1, 0],
                    expected_axial_shift: None,
                }),
                other => Err(KernelError::Undecided(format!(
                    "singular along a curve ({description}) but the normal form reported {other:?}"
                ))),
            }
        }
        SingularLocus::IsolatedPoints(pts) => {
            // isolated case: find a non-terminal point, if any
            let report = standard_model_check(
                f,
                config.seed,
                config.samples,
                config.max_blowups,
                config.truncation,
            )?;
            if report.is_standard {
                return Ok(Dp2Decision::Terminal(Box::new(report)));
            }
            // a bad point exists; the vertex goes through the cone analysis,
            // other rational points move to (0,0,0,1)
            let bad: Vec<&crate::duval::PointReport> = report
                .points
                .iter()
                .filter(|p| p.verdict == crate::duval::CdvType::NotCdv)
                .collect();
            if bad.is_empty() {
                return Err(KernelError::geometry(
                    "standard check failed without a named bad point",
                ));
            }
            let bad_loc = &bad[0].location;
            if bad_loc.starts_with("vertex") {
                return vertex_rule(f);
            }
            // find the matching singular point with coordinates
            let pt = pts
                .iter()
                .filter(|p| p.is_rational() && !p.at_vertex)
                .find(|p| &p.describe(&f.ambient) == bad_loc)
                .ok_or_else(|| {
                    KernelError::Undecided(format!(
                        "non-terminal point {bad_loc} is not k-rational; the program cannot \
                         center a transformation there"
                    ))
                })?;
            let witness = move_point_to_0001(f, &pt.coords)?;
            Ok(Dp2Decision::Transform {
                rule: "nonterminal-point".into(),
                witness,
                weights: [2, 1, 1, 0],
                expected_axial_shift: None,
            })
        }
    }
}

/// The vertex case: with no cone term the full twist applies; with a rank-1
/// cone (after normalization) the asymmetric weights apply. The terminal
/// shapes were already excluded by the caller.
fn vertex_rule(f: &DvrPolynomial) -> Result<Dp2Decision, KernelError> {
    let k = f.field.clone();
    let cu = f.coefficients_in("u");
    let q_series = cu.get(1).cloned().unwrap_or_else(|| DvrPolynomial::zero(&f.ambient, &k));
    let q0 = q_series.special_fiber();
    if q0.is_zero() {
        return Ok(Dp2Decision::Transform {
            rule: "vertex-no-cone".into(),
            witness: CoordinateChange::identity(&f.ambient, &k),
            weights: [1, 1, 1, 1],
            expected_axial_shift: None,
        });
    }
    let an = crate::polyring::factor::analyze_quadratic_form(&q0)?;
    if an.rank != 1 {
        return Err(KernelError::geometry(
            "vertex cone has rank >= 2 but the terminal matcher rejected it: inconsistent state",
        ));
    }
    let (l, _) = an.square.expect("rank-1 form is a scaled square");
    // move l to x1
    let witness = linear_witness_to_x1(f, &l)?;
    Ok(Dp2Decision::Transform {
        rule: "vertex-cone-rank1".into(),
        witness,
        weights: [0, 2, 1, 1],
        expected_axial_shift: None,
    })
}

fn linear_witness_to_x1(
    f: &DvrPolynomial,
    l: &DvrPolynomial,
) -> Result<CoordinateChange, KernelError> {
    use crate::polyring::linalg::Mat;
    use crate::polyring::poly::Monomial;
    let k = f.field.clone();
    let ambient = f.ambient.clone();
    let w1: Vec<usize> = (0..ambient.nvars()).filter(|&i| ambient.weights[i] == 1).collect();
    let n = w1.len();
    let row: Vec<Scalar> = w1
        .iter()
        .map(|&i| {
            let mut m = Monomial::unit(ambient.nvars());
            m.exps[i] = 1;
            l.terms()
                .iter()
                .find(|(mm, _)| *mm == m)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(|| k.zero())
        })
        .collect();
    let mut basis = vec![row];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![k.zero(); n];
        e[i] = k.one();
        let mut cand = basis.clone();
        cand.push(e.clone());
        if Mat::new(cand.clone()).rank(&k) == cand.len() {
            basis.push(e);
        }
    }
    let mut aug = Mat::new(
        basis
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut rr = r.clone();
                for j in 0..n {
                    rr.push(if i == j { k.one() } else { k.zero() });
                }
                rr
            })
            .collect(),
    );
    let piv = aug.rref(&k);
    if piv.len() != n {
        return Err(KernelError::geometry("vertex witness change degenerated"));
    }
    let binv: Vec<Vec<Scalar>> = aug.rows.iter().map(|r| r[n..].to_vec()).collect();
    CoordinateChange::linear_w1(&ambient, &k, &binv)
}

/// Move a rational point (u0 : a1 : a2 : a3) with nonzero weight-1 part to
/// (0, 0, 0, 1): a linear change on the x's plus a u-shear.
fn move_point_to_0001(
    f: &DvrPolynomial,
    coords: &[Scalar],
) -> Result<CoordinateChange, KernelError> {
    use crate::polyring::linalg::Mat;
    let k = f.field.clone();
    let ambient = f.ambient.clone();
    let norm = crate::fibergeom::normalize_point(&ambient, &k, coords)?;
    // columns: two complements then the point's x-part; x = C y maps
    // (0,0,1) to the point
    let v: Vec<Scalar> = vec![norm[1].clone(), norm[2].clone(), norm[3].clone()];
    let mut cols: Vec<Vec<Scalar>> = vec![];
    for i in 0..3 {
        if cols.len() == 2 {
            break;
        }
        let mut e = vec![k.zero(); 3];
        e[i] = k.one();
        let mut cand = cols.clone();
        cand.push(e.clone());
        cand.push(v.clone());
        if Mat::new(cand.clone()).rank(&k) == cand.len() {
            cols.push(e);
        }
    }
    cols.push(v);
    let mat: Vec<Vec<Scalar>> =
        (0..3).map(|i| (0..3).map(|j| cols[j][i].clone()).collect()).collect();
    let xchange = CoordinateChange::linear_w1(&ambient, &k, &mat)?;
    // after the x-change the point is (u0 : 0 : 0 : 1); shear u by -u0*x3^2
    let u0 = norm[0].clone();
    if k.is_zero(&u0) {
        return Ok(xchange);
    }
    let x3 = DvrPolynomial::var(&ambient, &k, "x3");
    let shear =
        crate::transform::CoordinateChange::shear(&ambient, &k, "u", &x3.pow(2).scale(&u0).neg())?;
    Ok(xchange.then(&shear))
}

/// Verification summary for a trace replay.
#[derive(Debug)]
pub struct VerificationReport {
    pub pass: bool,
    pub checks: Vec<(String, bool)>,
    pub first_failure: Option<(usize, String)>,
}

/// Re-execute every step of a trace against the original model: the
/// generic-fiber identity F(phi) = t^c * F+, t-primitivity, weighted-degree
/// preservation, the divisibility criterion, the axial transition table for
/// the reducible-fiber rules, the plane-case ledger arithmetic, component
/// monotonicity, and cycle-freeness of the state hashes.
pub fn verify_trace(trace: &Trace, original: &DvrPolynomial) -> VerificationReport {
    let mut checks: Vec<(String, bool)> = vec![];
    let mut first_failure: Option<(usize, String)> = None;
    let note = |idx: usize,
                    name: &str,
                    ok: bool,
                    checks: &mut Vec<(String, bool)>,
                    first: &mut Option<(usize, String)>| {
        checks.push((format!("step {idx}: {name}"), ok));
        if !ok && first.is_none() {
            *first = Some((idx, name.to_string()));
        }
    };
    let mut cur = original.clone();
    for (idx, ts) in trace.steps.iter().enumerate() {
        let same_start = ts.before == cur;
        note(idx, "chain continuity", same_start, &mut checks, &mut first_failure);
        let moved = match &ts.witness {
            Some(w) => w.apply(&cur),
            None => cur.clone(),
        };
        // generic fiber identity: moved(phi) = t^c * after
        let lhs = moved.substitute_many(&ts.step.phi);
        let t = DvrPolynomial::t(&cur.ambient, &cur.field);
        let rhs = ts.after.mul(&t.pow(ts.step.t_removed));
        note(idx, "generic-fiber identity", lhs == rhs, &mut checks, &mut first_failure);
        // t-primitive output (nontrivial steps)
        let prim = ts.after.t_content().map(|c| c == 0).unwrap_or(false);
        note(idx, "t-primitive output", prim, &mut checks, &mut first_failure);
        // weighted degree preserved
        let deg_ok = match (cur.weighted_degree_ambient(), ts.after.weighted_degree_ambient()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        note(idx, "weighted degree preserved", deg_ok, &mut checks, &mut first_failure);
        // divisibility criterion for weighted steps
        if let Some(c) = ts.step.criterion_holds {
            let wsum: u32 = ts.step.weights.iter().sum();
            let ok = c && ts.step.t_removed >= wsum;
            note(idx, "divisibility criterion", ok, &mut checks, &mut first_failure);
        }
        // axial transition table for the reducible-fiber rules
        let expected_shift = match ts.rule.as_str() {
            "u-factor" => Some(1i64),
            "linear-factor" => Some(-1),
            "conic-pair" => Some(-2),
            _ => None,
        };
        if let Some(shift) = expected_shift {
            let ok = match (&ts.step.invariants_before, &ts.step.invariants_after) {
                (Some(b), Some(a)) => match (b.axial.flatten(), a.axial.flatten()) {
                    (Some(kb), Some(ka)) => ka as i64 == kb as i64 + shift,
                    _ => false,
                },
                _ => false,
            };
            note(idx, "axial transition", ok, &mut checks, &mut first_failure);
        }
        // plane/line/point ledger arithmetic: mu = t_removed and the four
        // recorded coefficients
        if let Some(mu) = ts.step.mu {
            let c_ok = mu == ts.step.t_removed as i64;
            note(idx, "content equals center multiplicity", c_ok, &mut checks, &mut first_failure);
            let d = match ts.step.center.as_deref() {
                Some(s) if s.starts_with("plane") => Some(2i64),
                Some(s) if s.starts_with("line") => Some(1),
                Some(s) if s.starts_with("point") => Some(0),
                _ => None,
            };
            if let Some(d) = d {
                let entries = &ts.step.discrepancy_entries;
                let ok = entries.contains(&("f_exc".into(), 3 - d))
                    && entries.contains(&("g_exc".into(), d + 1))
                    && entries.contains(&("strict_excess".into(), mu - 1))
                    && entries.contains(&("pushforward_g".into(), 3 - mu));
                note(idx, "discrepancy ledger", ok, &mut checks, &mut first_failure);
            }
        }
        // component count must not increase
        if let (Some(b), Some(a)) = (&ts.step.invariants_before, &ts.step.invariants_after) {
            note(
                idx,
                "component count does not increase",
                a.n_components <= b.n_components,
                &mut checks,
                &mut first_failure,
            );
        }
        cur = ts.after.clone();
    }
    // state-hash cycle freeness
    let mut uniq = BTreeSet::new();
    let no_cycle = trace.states.iter().all(|s| uniq.insert(s.clone()))
        || matches!(trace.outcome, Outcome::CycleDetected);
    checks.push(("state hashes are cycle-free".into(), no_cycle));
    if !no_cycle && first_failure.is_none() {
        first_failure = Some((trace.steps.len(), "state hashes repeat".into()));
    }
    let pass = checks.iter().all(|(_, ok)| *ok);
    VerificationReport { pass, checks, first_failure }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{Ambient, AmbientSpace};
    use crate::duval::CdvType;
    use crate::polyring::field::Field;

    fn p3() -> (Ambient, Field) {
        (AmbientSpace::p3(), Field::rationals())
    }

    fn family_2_24(n: u32) -> DvrPolynomial {
        let (a, k) = p3();
        let x0 = DvrPolynomial::var(&a, &k, "x0");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let t = DvrPolynomial::t(&a, &k);
        x0.mul(&x0.mul(&x3).add(&x1.pow(2)))
            .add(&t.mul(&x2.pow(3)))
            .add(&t.pow(n).mul(&x3.pow(3)))
    }

    #[test]
    fn smooth_cubic_standard_in_zero_steps() {
        let (a, k) = p3();
        let f = ["x0", "x1", "x2", "x3"]
            .iter()
            .map(|v| DvrPolynomial::var(&a, &k, v).pow(3))
            .reduce(|p, q| p.add(&q))
            .unwrap();
        let trace = run_cubic(&f, &RunConfig::default()).unwrap();
        assert!(matches!(trace.outcome, Outcome::Standard(_)));
        assert!(trace.steps.is_empty());
        let v = verify_trace(&trace, &f);
        assert!(v.pass, "{:?}", v.first_failure);
    }

    #[test]
    fn tangent_cone_family_n1_reaches_standard() {
        let f = family_2_24(1);
        let trace = run_cubic(&f, &RunConfig::default()).unwrap();
        match &trace.outcome {
            Outcome::Standard(rep) => {
                assert!(trace.steps.len() <= 10);
                for p in &rep.points {
                    assert!(
                        p.verdict.within_cubic_range(),
                        "verdict {:?} outside the allowed range",
                        p.verdict
                    );
                }
            }
            other => panic!("expected standard, got {other:?}"),
        }
        let v = verify_trace(&trace, &f);
        assert!(v.pass, "{:?}", v.first_failure);
    }

    #[test]
    fn dp2_u_factor_case_steps_once() {
        let a = AmbientSpace::wp2111();
        let k = Field::rationals();
        let u = DvrPolynomial::var(&a, &k, "u");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let t = DvrPolynomial::t(&a, &k);
        // F = u(u+Q) + t G, Q smooth, G generic quartic
        let q = x1.mul(&x2).add(&x3.pow(2));
        let g = x1.pow(4).add(&x2.pow(4)).add(&x3.pow(4)).add(&x1.mul(&x2).mul(&x3.pow(2)));
        let f = u.mul(&u.add(&q)).add(&t.mul(&g));
        let config = RunConfig::default();
        let trace = run_dp2(&f, &config).unwrap();
        assert!(!trace.steps.is_empty());
        assert_eq!(trace.steps[0].rule, "u-factor");
        // k: 0 -> 1 on the first step
        let b = trace.steps[0].step.invariants_before.as_ref().unwrap().axial.flatten();
        let aft = trace.steps[0].step.invariants_after.as_ref().unwrap().axial.flatten();
        assert_eq!(b, Some(0));
        assert_eq!(aft, Some(1));
        let v = verify_trace(&trace, &f);
        assert!(v.pass, "{:?}", v.first_failure);
    }

    #[test]
    fn smooth_dp2_standard_with_vertex_report() {
        let a = AmbientSpace::wp2111();
        let k = Field::rationals();
        let u = DvrPolynomial::var(&a, &k, "u");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let f = u.pow(2).add(&x1.pow(4)).add(&x2.pow(4)).add(&x3.pow(4));
        let trace = run_dp2(&f, &RunConfig::default()).unwrap();
        match &trace.outcome {
            Outcome::Standard(rep) => {
                assert!(trace.steps.is_empty());
                assert!(rep.points.iter().all(|p| p.verdict != CdvType::NotCdv));
            }
            other => panic!("expected standard, got {other:?}"),
        }
    }


    #[test]
    fn exceptional_fixture_run_and_base_change() {
        use crate::polyring::uni;
        let (a, k) = p3();
        let x0 = DvrPolynomial::var(&a, &k, "x0");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let t = DvrPolynomial::t(&a, &k);
        let norm = x1
            .pow(3)
            .add(&x2.pow(3).scale(&k.from_i64(2)))
            .add(&x3.pow(3).scale(&k.from_i64(4)))
            .sub(&x1.mul(&x2).mul(&x3).scale(&k.from_i64(6)));
        let conic = x1.pow(2).sub(&x2.mul(&x3).scale(&k.from_i64(2)));
        let f = norm
            .add(&t.mul(&x0).mul(&conic))
            .add(&t.pow(2).mul(&x0.pow(3)))
            .add(&t.pow(3).mul(&x0).mul(&x1).mul(&x2));
        let trace = run_cubic(&f, &RunConfig::default()).unwrap();
        match &trace.outcome {
            Outcome::Exceptional(e) => {
                assert!(e.clauses.iter().all(|(_, ok)| *ok), "{:?}", e.clauses);
            }
            other => panic!("expected exceptional, got {other:?}"),
        }
        // base change to the splitting field of y^3 - 2: no longer exceptional
        let cubic_poly = vec![k.from_i64(-2), k.zero(), k.zero(), k.one()];
        let split = uni::splitting_roots(&k, &cubic_poly, "c").unwrap();
        let f_l = f.map_field(&split.embed);
        let trace_l = run_cubic(&f_l, &RunConfig::default()).unwrap();
        assert!(
            !matches!(trace_l.outcome, Outcome::Exceptional(_)),
            "base-changed run must not be exceptional: {:?}",
            trace_l.outcome.label()
        );
    }


    #[test]
    fn tampered_trace_fails_verification() {
        let f = family_2_24(1);
        let mut trace = run_cubic(&f, &RunConfig::default()).unwrap();
        if trace.steps.is_empty() {
            return;
        }
        // decrement the recorded content
        trace.steps[0].step.t_removed = trace.steps[0].step.t_removed.saturating_sub(1);
        let v = verify_trace(&trace, &f);
        assert!(!v.pass);
    }
}


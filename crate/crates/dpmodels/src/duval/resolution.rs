//! Resolution of surface double points by iterated point blow-ups over the
//! algebraic closure, building the dual graph of exceptional curves. Each
//! blow-up of a double point meets the exceptional plane in a conic; its
//! components become graph vertices, and edges are recorded where curves
//! meet at smooth points of the strict transform. Since only double points
//! are ever blown up, a successful run certifies a rational double point and
//! every exceptional curve is a (-2)-curve.

use crate::ambient::{Ambient, AmbientSpace};
use crate::error::KernelError;
use crate::polyring::factor::divide_exact;
use crate::polyring::field::{Field, Scalar};
use crate::polyring::linalg::Mat;
use crate::polyring::poly::{DvrPolynomial, Monomial};
use crate::polyring::uni::{self, FieldEmbedding, UPoly};
use crate::solve::{solve_affine, SolveOutcome};

/// Truncated power series utilities over a field (vectors low-to-high).
fn series_trunc(k: &Field, a: &UPoly, prec: usize) -> UPoly {
    let mut v: UPoly = a.iter().take(prec).cloned().collect();
    uni::trim_vec(k, &mut v);
    v
}

/// a / b as power series, requiring ord(b) <= ord(a); b/s^ord must be a unit.
fn series_div(k: &Field, a: &UPoly, b: &UPoly, prec: usize) -> Result<UPoly, KernelError> {
    if a.is_empty() {
        return Ok(vec![]);
    }
    let orda = a.iter().position(|c| !k.is_zero(c)).unwrap();
    let ordb = b.iter().position(|c| !k.is_zero(c)).ok_or(KernelError::DivisionByZero)?;
    if ordb > orda {
        return Err(KernelError::geometry("series division with higher-order divisor"));
    }
    let an: UPoly = a[ordb..].to_vec();
    let bn: UPoly = b[ordb..].to_vec();
    let mut out = vec![k.zero(); prec];
    let b0inv = k.inv(&bn[0])?;
    for n in 0..prec {
        let mut acc = an.get(n).cloned().unwrap_or_else(|| k.zero());
        for i in 0..n {
            if let Some(bc) = bn.get(n - i) {
                let t = k.mul(&out[i], bc);
                acc = k.sub(&acc, &t);
            }
        }
        out[n] = k.mul(&acc, &b0inv);
    }
    uni::trim_vec(k, &mut out);
    Ok(out)
}

/// A marked exceptional curve passing through the current origin, given by a
/// truncated arc s -> (c0(s), c1(s), c2(s)) with c(0) = 0.
#[derive(Clone, Debug)]
pub struct CurveArc {
    pub curve: usize,
    pub coords: Vec<UPoly>,
}

impl CurveArc {
    fn tangent(&self, k: &Field) -> Option<Vec<Scalar>> {
        // the coefficient vector at the minimal positive order
        let ord = self
            .coords
            .iter()
            .filter_map(|c| c.iter().position(|x| !k.is_zero(x)))
            .min()?;
        Some(
            self.coords
                .iter()
                .map(|c| c.get(ord).cloned().unwrap_or_else(|| k.zero()))
                .collect(),
        )
    }

    fn map_field(&self, embed: &FieldEmbedding) -> CurveArc {
        CurveArc {
            curve: self.curve,
            coords: self.coords.iter().map(|c| embed.map_poly(c)).collect(),
        }
    }
}

/// Dual graph under construction.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub blowups: usize,
}

impl GraphBuilder {
    fn new_vertex(&mut self) -> usize {
        self.n_vertices += 1;
        self.n_vertices - 1
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        let e = if a < b { (a, b) } else { (b, a) };
        if a != b && !self.edges.contains(&e) {
            self.edges.push(e);
        }
    }
}

/// The finished dual graph: all vertices are (-2)-curves by construction
/// (only double points are ever blown up).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub self_intersections: Vec<i64>,
}

pub struct ResolutionOutcome {
    pub graph: Option<DualGraph>,
    pub depth: usize,
    pub failure: Option<String>,
}

struct Resolver {
    cap: usize,
    seed: u64,
    builder: GraphBuilder,
    failure: Option<String>,
}

/// Resolve an isolated double point of the affine surface germ f = 0 in
/// three plain variables, returning the dual graph of the exceptional curves
/// over the algebraic closure.
pub fn resolve_double_point(
    f: &DvrPolynomial,
    cap: usize,
    seed: u64,
) -> Result<ResolutionOutcome, KernelError> {
    let mut r = Resolver { cap, seed, builder: GraphBuilder::default(), failure: None };
    r.process(f.clone(), vec![], 0)?;
    let depth = r.builder.blowups;
    if let Some(reason) = r.failure {
        return Ok(ResolutionOutcome { graph: None, depth, failure: Some(reason) });
    }
    let n = r.builder.n_vertices;
    Ok(ResolutionOutcome {
        graph: Some(DualGraph {
            n_vertices: n,
            edges: r.builder.edges,
            self_intersections: vec![-2; n],
        }),
        depth,
        failure: None,
    })
}

impl Resolver {
    fn fail(&mut self, reason: impl Into<String>) {
        if self.failure.is_none() {
            self.failure = Some(reason.into());
        }
    }

    fn process(
        &mut self,
        f: DvrPolynomial,
        arcs: Vec<CurveArc>,
        depth: usize,
    ) -> Result<(), KernelError> {
        if self.failure.is_some() {
            return Ok(());
        }
        let k = f.field.clone();
        if f.is_zero() {
            self.fail("germ vanished during resolution");
            return Ok(());
        }
        let ord = f.terms().iter().map(|(m, _)| m.total_degree()).min().unwrap();
        if ord == 0 {
            self.fail("origin left the surface during resolution");
            return Ok(());
        }
        if ord == 1 {
            // smooth point: record pairwise intersections of the marked curves
            self.record_edges_at_smooth_point(&k, &arcs);
            return Ok(());
        }
        if ord >= 3 {
            self.fail(format!("multiplicity {ord} point encountered"));
            return Ok(());
        }
        if depth >= self.cap {
            self.fail(format!("blow-up cap {} exceeded", self.cap));
            return Ok(());
        }
        self.blow_up(f, arcs, depth)
    }

    fn record_edges_at_smooth_point(&mut self, k: &Field, arcs: &[CurveArc]) {
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                if arcs[i].curve == arcs[j].curve {
                    continue;
                }
                let (ta, tb) = (arcs[i].tangent(k), arcs[j].tangent(k));
                match (ta, tb) {
                    (Some(a), Some(b)) => {
                        if parallel(k, &a, &b) {
                            self.fail("exceptional curves tangent at a smooth point");
                            return;
                        }
                        self.builder.add_edge(arcs[i].curve, arcs[j].curve);
                    }
                    _ => {
                        self.fail("degenerate arc during edge recording");
                        return;
                    }
                }
            }
        }
    }

    fn blow_up(
        &mut self,
        f: DvrPolynomial,
        arcs: Vec<CurveArc>,
        depth: usize,
    ) -> Result<(), KernelError> {
        self.builder.blowups += 1;
        let k = f.field.clone();
        let prec = self.cap + 6;
        // tangent cone: the initial quadratic form
        let cone = initial_form(&f, 2);
        let conic = ConicSplit::analyze(&cone)?;
        // possibly extend the field to split a line pair
        let (k2, embed, components) = conic.split(&k)?;
        let f2 = f.map_field(&embed);
        let arcs2: Vec<CurveArc> = arcs.iter().map(|a| a.map_field(&embed)).collect();
        // allocate graph vertices
        let comp_ids: Vec<usize> = components.iter().map(|_| self.builder.new_vertex()).collect();

        // gather special directions in P^2 over k2: singular points of the
        // strict transform on E, the node of a line pair, arc arrivals
        let mut jobs: Vec<PointJob> = vec![];
        self.collect_singular_directions(&f2, &k2, &mut jobs)?;
        if self.failure.is_some() {
            return Ok(());
        }
        // node of a line pair
        if let [ConicComponent::Line(l1), ConicComponent::Line(l2)] = components.as_slice() {
            if let Some(node) = line_intersection(&k2, l1, l2) {
                push_direction(&mut jobs, &k2, node, JobTag::Node);
            }
        }
        // arc arrivals
        for arc in &arcs2 {
            match arc.tangent(&k2) {
                Some(dir) => push_direction(&mut jobs, &k2, dir, JobTag::Arrival(arc.clone())),
                None => {
                    self.fail("arc with no tangent during blow-up");
                    return Ok(());
                }
            }
        }

        // process each distinct direction
        for job in jobs {
            if self.failure.is_some() {
                return Ok(());
            }
            self.process_direction(&f2, &components, &comp_ids, job, depth, prec)?;
        }
        Ok(())
    }

    /// Singular points of the strict transform lying on the exceptional
    /// plane, found chart by chart with the canonical cover.
    fn collect_singular_directions(
        &mut self,
        f: &DvrPolynomial,
        k: &Field,
        jobs: &mut Vec<PointJob>,
    ) -> Result<(), KernelError> {
        let ambient = f.ambient.clone();
        let names: Vec<String> = ambient.vars.clone();
        for chart in 0..3 {
            let strict = strict_transform(f, chart)?;
            let live: Vec<String> =
                (0..3).filter(|&i| i != chart).map(|i| names[i].clone()).collect();
            let e_var = names[chart].clone();
            let mut system = vec![strict.clone()];
            for v in [&live[0], &live[1], &e_var] {
                system.push(strict.derivative(v));
            }
            // restrict to the exceptional plane and the canonical cover
            let e_poly = DvrPolynomial::var(&ambient, k, &e_var);
            system.push(e_poly);
            for j in (0..3).take(chart) {
                system.push(DvrPolynomial::var(&ambient, k, &names[j]));
            }
            // the solver works in the live variables + e; set up with all
            // three variables unknowns
            let unknowns: Vec<String> = names.clone();
            match solve_affine(&system, &unknowns, self.seed ^ (chart as u64))? {
                SolveOutcome::Finite(pts) => {
                    for p in pts {
                        // direction in P^2: chart coordinate = 1
                        let kk = p.field.clone();
                        let mut dir = vec![kk.zero(); 3];
                        dir[chart] = kk.one();
                        for (i, name) in names.iter().enumerate() {
                            if i != chart {
                                let idx = unknowns.iter().position(|u| u == name).unwrap();
                                dir[i] = p.coords[idx].clone();
                            }
                        }
                        jobs.push(PointJob {
                            field: p.field,
                            embed: p.embed,
                            dir,
                            tags: vec![JobTag::Singular],
                        });
                    }
                }
                SolveOutcome::PositiveDim(w) => {
                    self.fail(format!("non-isolated singularity met in resolution: {w}"));
                    return Ok(());
                }
                SolveOutcome::Undecided(w) => {
                    return Err(KernelError::Undecided(format!(
                        "resolution singular-point solve undecided: {w}"
                    )));
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn process_direction(
        &mut self,
        f: &DvrPolynomial,
        components: &[ConicComponent],
        comp_ids: &[usize],
        job: PointJob,
        depth: usize,
        prec: usize,
    ) -> Result<(), KernelError> {
        let kk = job.field.clone();
        let is_singular = job.tags.iter().any(|t| matches!(t, JobTag::Singular));
        // chart containing the direction: first nonzero coordinate
        let chart = (0..3)
            .find(|&i| !kk.is_zero(&job.dir[i]))
            .expect("projective direction");
        // normalize the direction in its chart
        let lam = kk.inv(&job.dir[chart])?;
        let dirn: Vec<Scalar> = job.dir.iter().map(|c| kk.mul(c, &lam)).collect();

        // participating curves: conic components through the direction
        let mut local_arcs: Vec<CurveArc> = vec![];
        for (comp, id) in components.iter().zip(comp_ids) {
            if comp.contains(&kk, &job.embed, &dirn)? {
                if let Some(arc) =
                    comp.arc_at(&kk, &job.embed, &dirn, chart, prec)?
                {
                    local_arcs.push(CurveArc { curve: *id, coords: arc });
                }
            }
        }
        // arriving old arcs (their tangents are k-rational data over the
        // node field; they join only when the direction matches)
        for tag in &job.tags {
            if let JobTag::Arrival(arc) = tag {
                let arc2 = arc.map_field(&job.embed);
                if let Some(new_coords) = transform_arc(&kk, &arc2.coords, chart, &dirn, prec)? {
                    local_arcs.push(CurveArc { curve: arc2.curve, coords: new_coords });
                }
            }
        }
        // also catch arrivals that were collected under a different job for
        // the same direction: the caller pushes merged tags, so nothing to do

        if is_singular {
            // recurse at the singular point
            let f_l = f.map_field(&job.embed);
            let strict = strict_transform(&f_l, chart)?;
            let shifted = shift_to_point(&strict, chart, &dirn)?;
            self.process(shifted, local_arcs, depth + 1)?;
        } else {
            // smooth point of the strict transform: record edges
            self.record_edges_at_smooth_point(&kk, &local_arcs);
        }
        Ok(())
    }
}

#[derive(Clone)]
enum JobTag {
    Singular,
    Node,
    Arrival(CurveArc),
}

struct PointJob {
    field: Field,
    embed: FieldEmbedding,
    dir: Vec<Scalar>,
    tags: Vec<JobTag>,
}

/// Add a K-rational direction job, merging with an existing equal direction.
fn push_direction(jobs: &mut Vec<PointJob>, k: &Field, dir: Vec<Scalar>, tag: JobTag) {
    // normalize
    let pivot = (0..3).find(|&i| !k.is_zero(&dir[i]));
    let Some(p) = pivot else { return };
    let lam = k.inv(&dir[p]).expect("nonzero pivot");
    let dirn: Vec<Scalar> = dir.iter().map(|c| k.mul(c, &lam)).collect();
    for job in jobs.iter_mut() {
        // match only against K-rational jobs in the same field; singular jobs
        // over extensions are matched inside process_direction via embedding
        if job.field == *k {
            let same = (0..3).all(|i| k.eq_scalar(&job.dir[i], &dirn[i]));
            if same {
                job.tags.push(tag);
                return;
            }
        } else if job.coincides_with_rational(k, &dirn) {
            job.tags.push(tag);
            return;
        }
    }
    jobs.push(PointJob {
        field: k.clone(),
        embed: FieldEmbedding::identity(k),
        dir: dirn,
        tags: vec![tag],
    });
}

impl PointJob {
    fn coincides_with_rational(&self, k: &Field, dirn: &[Scalar]) -> bool {
        // map the rational direction into this job's field and compare
        let _ = k;
        let kk = self.field.clone();
        // normalize self.dir the same way
        let pivot = (0..3).find(|&i| !kk.is_zero(&self.dir[i]));
        let Some(p) = pivot else { return false };
        let lam = match kk.inv(&self.dir[p]) {
            Ok(l) => l,
            Err(_) => return false,
        };
        (0..3).all(|i| {
            let a = kk.mul(&self.dir[i], &lam);
            let b = self.embed.map(&dirn[i]);
            kk.eq_scalar(&a, &b)
        })
    }
}

/// Initial form of the given order, as a t-free polynomial in the same
/// affine ambient (all variables plain).
pub fn initial_form(f: &DvrPolynomial, d: i64) -> DvrPolynomial {
    let terms = f
        .terms()
        .iter()
        .filter(|(m, _)| m.total_degree() == d)
        .cloned()
        .collect();
    DvrPolynomial::from_terms(&f.ambient, &f.field, terms)
}

/// Strict transform in blow-up chart j: substitute v_i -> v_i * v_j (i != j)
/// and divide by v_j^2.
fn strict_transform(f: &DvrPolynomial, chart: usize) -> Result<DvrPolynomial, KernelError> {
    let k = f.field.clone();
    let ambient = f.ambient.clone();
    let names = ambient.vars.clone();
    let e = DvrPolynomial::var(&ambient, &k, &names[chart]);
    let subs: Vec<(String, DvrPolynomial)> = (0..3)
        .filter(|&i| i != chart)
        .map(|i| {
            let v = DvrPolynomial::var(&ambient, &k, &names[i]);
            (names[i].clone(), v.mul(&e))
        })
        .collect();
    let total = f.substitute_many(&subs);
    let e2 = e.mul(&e);
    divide_exact(&total, &e2)
        .ok_or_else(|| KernelError::geometry("strict transform division failed"))
}

/// Shift the origin of a chart polynomial to the given direction point
/// (chart coordinate is 1; the others move by their direction values).
fn shift_to_point(
    f: &DvrPolynomial,
    chart: usize,
    dirn: &[Scalar],
) -> Result<DvrPolynomial, KernelError> {
    let k = f.field.clone();
    let ambient = f.ambient.clone();
    let names = ambient.vars.clone();
    let subs: Vec<(String, DvrPolynomial)> = (0..3)
        .filter(|&i| i != chart)
        .map(|i| {
            let v = DvrPolynomial::var(&ambient, &k, &names[i]);
            (
                names[i].clone(),
                v.add(&DvrPolynomial::constant(&ambient, &k, dirn[i].clone())),
            )
        })
        .collect();
    Ok(f.substitute_many(&subs))
}

/// Transform an arc through the blown-up point into chart coordinates at its
/// arrival direction: e(s) = c_chart(s), v_i(s) = c_i(s)/c_chart(s) - dir_i.
fn transform_arc(
    k: &Field,
    coords: &[UPoly],
    chart: usize,
    dirn: &[Scalar],
    prec: usize,
) -> Result<Option<Vec<UPoly>>, KernelError> {
    let denom = &coords[chart];
    if denom.iter().all(|c| k.is_zero(c)) {
        return Ok(None); // arc lies in the coordinate plane of another chart
    }
    let mut out = vec![vec![]; 3];
    for i in 0..3 {
        if i == chart {
            out[i] = series_trunc(k, denom, prec);
        } else {
            let q = series_div(k, &coords[i], denom, prec)?;
            // subtract the arrival coordinate
            let mut shifted = q;
            if shifted.is_empty() {
                shifted = vec![k.neg(&dirn[i])];
            } else {
                shifted[0] = k.sub(&shifted[0], &dirn[i]);
            }
            uni::trim_vec(k, &mut shifted);
            out[i] = shifted;
        }
    }
    // the arc must pass through the origin now
    for c in &out {
        if c.first().map(|x| !k.is_zero(x)).unwrap_or(false) {
            return Ok(None); // arrives elsewhere
        }
    }
    Ok(Some(out))
}

fn parallel(k: &Field, a: &[Scalar], b: &[Scalar]) -> bool {
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let d = k.sub(&k.mul(&a[i], &b[j]), &k.mul(&a[j], &b[i]));
            if !k.is_zero(&d) {
                return false;
            }
        }
    }
    true
}

fn line_intersection(k: &Field, l1: &[Scalar], l2: &[Scalar]) -> Option<Vec<Scalar>> {
    let rows = vec![l1.to_vec(), l2.to_vec()];
    let ns = Mat::new(rows).nullspace(k);
    if ns.len() == 1 {
        Some(ns[0].clone())
    } else {
        None
    }
}

/// Components of the exceptional conic.
#[derive(Clone)]
pub enum ConicComponent {
    /// coefficients of a linear form on the three direction coordinates
    Line(Vec<Scalar>),
    /// Gram matrix (symmetric 3x3) of a smooth conic
    Conic(Vec<Vec<Scalar>>),
}

impl ConicComponent {
    fn contains(
        &self,
        k: &Field,
        embed: &FieldEmbedding,
        dirn: &[Scalar],
    ) -> Result<bool, KernelError> {
        match self {
            ConicComponent::Line(l) => {
                let mut acc = k.zero();
                for (c, d) in l.iter().zip(dirn) {
                    acc = k.add(&acc, &k.mul(&embed.map(c), d));
                }
                Ok(k.is_zero(&acc))
            }
            ConicComponent::Conic(m) => {
                let mut acc = k.zero();
                for i in 0..3 {
                    for j in 0..3 {
                        let c = embed.map(&m[i][j]);
                        acc = k.add(&acc, &k.mul(&c, &k.mul(&dirn[i], &dirn[j])));
                    }
                }
                Ok(k.is_zero(&acc))
            }
        }
    }

    /// A truncated arc for this component at a point on it, in the chosen
    /// chart, starting at the origin after the shift.
    fn arc_at(
        &self,
        k: &Field,
        embed: &FieldEmbedding,
        dirn: &[Scalar],
        chart: usize,
        prec: usize,
    ) -> Result<Option<Vec<UPoly>>, KernelError> {
        match self {
            ConicComponent::Line(l0) => {
                let l: Vec<Scalar> = l0.iter().map(|c| embed.map(c)).collect();
                // direction vector of the line inside the plane e = 0, in the
                // chart coords: solve l . v = 0 with v[chart] = 0 component
                // free... the line in P^2 is l . x = 0; in the chart it is an
                // affine line through dirn with direction d: l . d = 0 and
                // d[chart] = 0 would leave the chart; parametrize x(s) =
                // dirn + s*d with l . d = 0, d independent of dirn.
                let rows = vec![l.clone()];
                let ns = Mat::new(rows).nullspace(k);
                // choose a kernel vector independent from dirn
                let mut d: Option<Vec<Scalar>> = None;
                for cand in &ns {
                    if !parallel(k, cand, dirn) {
                        d = Some(cand.clone());
                        break;
                    }
                }
                let Some(d) = d else { return Ok(None) };
                // in chart coords: w_i(s) = (dirn_i + s d_i)/(dirn_c + s d_c) - dirn_i
                let denom: UPoly =
                    uni::normalized(k, vec![dirn[chart].clone(), d[chart].clone()]);
                let mut out = vec![vec![]; 3];
                for i in 0..3 {
                    if i == chart {
                        out[i] = vec![]; // e = 0 on the exceptional plane
                    } else {
                        let num: UPoly =
                            uni::normalized(k, vec![dirn[i].clone(), d[i].clone()]);
                        let q = series_div(k, &num, &denom, prec)?;
                        let mut shifted = q;
                        if shifted.is_empty() {
                            shifted = vec![k.neg(&dirn[i])];
                        } else {
                            shifted[0] = k.sub(&shifted[0], &dirn[i]);
                        }
                        uni::trim_vec(k, &mut shifted);
                        out[i] = shifted;
                    }
                }
                Ok(Some(out))
            }
            ConicComponent::Conic(m0) => {
                let m: Vec<Vec<Scalar>> = m0
                    .iter()
                    .map(|r| r.iter().map(|c| embed.map(c)).collect())
                    .collect();
                // projective parametrization through p = dirn:
                // X(s) = B(r,r) p - 2 B(p,r) r, r = r0 + s r1, B(p, r0) = 0
                let b = |u: &[Scalar], v: &[Scalar]| -> Scalar {
                    let mut acc = k.zero();
                    for i in 0..3 {
                        for j in 0..3 {
                            let t = k.mul(&u[i], &k.mul(&m[i][j], &v[j]));
                            acc = k.add(&acc, &t);
                        }
                    }
                    acc
                };
                // r0: in the polar of p, not parallel to p
                let polar: Vec<Scalar> = (0..3)
                    .map(|j| {
                        let mut acc = k.zero();
                        for i in 0..3 {
                            acc = k.add(&acc, &k.mul(&dirn[i], &m[i][j]));
                        }
                        acc
                    })
                    .collect();
                let ns = Mat::new(vec![polar]).nullspace(k);
                let r0 = ns.iter().find(|v| !parallel(k, v, dirn)).cloned();
                let Some(r0) = r0 else {
                    return Err(KernelError::geometry("conic parametrization basis failed"));
                };
                // r1: any vector completing (p, r0)
                let mut r1 = None;
                for i in 0..3 {
                    let mut e = vec![k.zero(); 3];
                    e[i] = k.one();
                    let rows = vec![dirn.to_vec(), r0.clone(), e.clone()];
                    if Mat::new(rows).rank(k) == 3 {
                        r1 = Some(e);
                        break;
                    }
                }
                let r1 = r1.expect("basis completion");
                // series in s: B(r,r) = B(r0,r0) + 2s B(r0,r1) + s^2 B(r1,r1)
                let brr: UPoly = uni::normalized(
                    k,
                    vec![
                        b(&r0, &r0),
                        k.mul(&k.from_i64(2), &b(&r0, &r1)),
                        b(&r1, &r1),
                    ],
                );
                let bpr: UPoly = uni::normalized(k, vec![k.zero(), b(dirn, &r1)]); // B(p,r0)=0
                let mut homog: Vec<UPoly> = vec![];
                for i in 0..3 {
                    // X_i(s) = brr * p_i - 2 bpr * r_i(s)
                    let term1 = uni::scale(k, &dirn[i], &brr);
                    let ri: UPoly = uni::normalized(k, vec![r0[i].clone(), r1[i].clone()]);
                    let term2 = uni::scale(&k.clone(), &k.from_i64(2), &uni::mul(k, &bpr, &ri));
                    homog.push(uni::sub(k, &term1, &term2));
                }
                // chart coords: w_i = X_i / X_chart - dirn_i
                let denom = homog[chart].clone();
                if denom.first().map(|c| k.is_zero(c)).unwrap_or(true) {
                    return Err(KernelError::geometry("conic arc leaves the chart"));
                }
                let mut out = vec![vec![]; 3];
                for i in 0..3 {
                    if i == chart {
                        out[i] = vec![];
                    } else {
                        let q = series_div(k, &homog[i], &denom, prec)?;
                        let mut shifted = q;
                        if shifted.is_empty() {
                            shifted = vec![k.neg(&dirn[i])];
                        } else {
                            shifted[0] = k.sub(&shifted[0], &dirn[i]);
                        }
                        uni::trim_vec(k, &mut shifted);
                        out[i] = shifted;
                    }
                }
                Ok(Some(out))
            }
        }
    }
}

/// Decomposition of the tangent-cone conic.
pub struct ConicSplit {
    gram: Vec<Vec<Scalar>>,
    rank: usize,
}

impl ConicSplit {
    pub fn analyze(cone: &DvrPolynomial) -> Result<ConicSplit, KernelError> {
        let k = cone.field.clone();
        let half = k.inv(&k.from_i64(2))?;
        let mut gram = vec![vec![k.zero(); 3]; 3];
        for (m, c) in cone.terms() {
            let idxs: Vec<usize> =
                (0..3).flat_map(|i| std::iter::repeat(i).take(m.exps[i] as usize)).collect();
            if idxs.len() != 2 || m.t_exp() != 0 {
                return Err(KernelError::geometry("tangent cone is not quadratic"));
            }
            let (i, j) = (idxs[0], idxs[1]);
            if i == j {
                gram[i][i] = k.add(&gram[i][i], c);
            } else {
                let h = k.mul(c, &half);
                gram[i][j] = k.add(&gram[i][j], &h);
                gram[j][i] = k.add(&gram[j][i], &h);
            }
        }
        let rank = Mat::new(gram.clone()).rank(&k);
        Ok(ConicSplit { gram, rank })
    }

    /// Split into components, extending the field when a line pair is
    /// conjugate. Returns the (possibly extended) field, the embedding, and
    /// the components over it.
    pub fn split(
        &self,
        k: &Field,
    ) -> Result<(Field, FieldEmbedding, Vec<ConicComponent>), KernelError> {
        let ident = FieldEmbedding::identity(k);
        match self.rank {
            3 => Ok((k.clone(), ident, vec![ConicComponent::Conic(self.gram.clone())])),
            1 => {
                // double line: the unique row direction
                let j = (0..3)
                    .find(|&j| !k.is_zero(&self.gram[j][j]))
                    .ok_or_else(|| KernelError::geometry("rank-1 Gram without diagonal"))?;
                let inv = k.inv(&self.gram[j][j])?;
                let l: Vec<Scalar> = (0..3).map(|i| k.mul(&self.gram[j][i], &inv)).collect();
                Ok((k.clone(), ident, vec![ConicComponent::Line(l)]))
            }
            2 => {
                // two lines, possibly conjugate: restrict to a complement of
                // the radical and factor the binary quadratic
                let rad = Mat::new(self.gram.clone()).nullspace(k);
                debug_assert_eq!(rad.len(), 1);
                let mut basis: Vec<Vec<Scalar>> = vec![];
                for i in 0..3 {
                    let mut e = vec![k.zero(); 3];
                    e[i] = k.one();
                    let mut cand = rad.clone();
                    cand.extend(basis.iter().cloned());
                    cand.push(e.clone());
                    if Mat::new(cand.clone()).rank(k) == cand.len() {
                        basis.push(e);
                    }
                    if basis.len() == 2 {
                        break;
                    }
                }
                let bval = |u: &[Scalar], v: &[Scalar]| -> Scalar {
                    let mut acc = k.zero();
                    for i in 0..3 {
                        for j in 0..3 {
                            let t = k.mul(&u[i], &k.mul(&self.gram[i][j], &v[j]));
                            acc = k.add(&acc, &t);
                        }
                    }
                    acc
                };
                let a = bval(&basis[0], &basis[0]);
                let bb = k.mul(&k.from_i64(2), &bval(&basis[0], &basis[1]));
                let c = bval(&basis[1], &basis[1]);
                // roots of a s^2 + b s + c (as the ratio along the basis)
                let poly: UPoly = uni::normalized(k, vec![c.clone(), bb.clone(), a.clone()]);
                let split = uni::splitting_roots(k, &poly, "q")?;
                let kk = split.field.clone();
                let embed = split.embed.clone();
                // each root (s : 1) gives a zero direction z = s*b0 + b1; the
                // corresponding LINE is the span of (radical, z): its linear
                // form is the Gram pairing with the OTHER zero direction.
                let mut zeros: Vec<Vec<Scalar>> = vec![];
                for (r, _) in &split.roots {
                    let z: Vec<Scalar> = (0..3)
                        .map(|i| {
                            kk.add(
                                &kk.mul(r, &embed.map(&basis[0][i])),
                                &embed.map(&basis[1][i]),
                            )
                        })
                        .collect();
                    zeros.push(z);
                }
                if poly.len() == 2 {
                    // degree dropped: (a = 0) one root is the direction b0
                    zeros.push(basis[0].iter().map(|x| embed.map(x)).collect());
                }
                if zeros.len() != 2 {
                    return Err(KernelError::geometry("rank-2 conic did not split into two lines"));
                }
                let gram_l: Vec<Vec<Scalar>> = self
                    .gram
                    .iter()
                    .map(|r| r.iter().map(|x| embed.map(x)).collect())
                    .collect();
                let mk_line = |z: &Vec<Scalar>| -> Vec<Scalar> {
                    (0..3)
                        .map(|i| {
                            let mut acc = kk.zero();
                            for (j, zj) in z.iter().enumerate() {
                                acc = kk.add(&acc, &kk.mul(&gram_l[i][j], zj));
                            }
                            acc
                        })
                        .collect()
                };
                // the line through zero-direction z0 is the Gram image of z1
                // and vice versa (each form vanishes on rad and on one zero)
                let l1 = mk_line(&zeros[0]);
                let l2 = mk_line(&zeros[1]);
                Ok((kk, embed, vec![ConicComponent::Line(l2), ConicComponent::Line(l1)]))
            }
            _ => Err(KernelError::geometry("tangent cone vanished")),
        }
    }
}

/// Fresh three-variable affine ambient for germs.
pub fn germ_ambient() -> Ambient {
    AmbientSpace::affine(&["g0", "g1", "g2"])
}

/// Turn a germ over O (t special) into a plain three-variable germ.
pub fn materialize_t(f: &DvrPolynomial) -> Result<DvrPolynomial, KernelError> {
    let names = f.ambient.vars.clone();
    if names.len() != 2 {
        return Err(KernelError::geometry("expected a two-variable germ over O"));
    }
    let target = germ_ambient();
    let k = f.field.clone();
    let terms = f
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut exps = vec![0u16; 4];
            exps[0] = m.exps[0];
            exps[1] = m.exps[1];
            exps[2] = m.t_exp();
            (Monomial { exps }, c.clone())
        })
        .collect();
    Ok(DvrPolynomial::from_terms(&target, &k, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn germ(k: &Field, build: impl Fn(&DvrPolynomial, &DvrPolynomial, &DvrPolynomial) -> DvrPolynomial) -> DvrPolynomial {
        let a = germ_ambient();
        let x = DvrPolynomial::var(&a, k, "g0");
        let y = DvrPolynomial::var(&a, k, "g1");
        let z = DvrPolynomial::var(&a, k, "g2");
        build(&x, &y, &z)
    }

    fn resolve(f: &DvrPolynomial) -> ResolutionOutcome {
        resolve_double_point(f, 12, 42).unwrap()
    }

    fn is_chain(g: &DualGraph) -> bool {
        if g.n_vertices == 0 {
            return false;
        }
        if g.edges.len() != g.n_vertices - 1 {
            return false;
        }
        let mut deg = vec![0usize; g.n_vertices];
        for (a, b) in &g.edges {
            deg[*a] += 1;
            deg[*b] += 1;
        }
        deg.iter().all(|&d| d <= 2)
    }

    #[test]
    fn a1_is_one_vertex() {
        let k = Field::rationals();
        let f = germ(&k, |x, y, z| x.pow(2).add(&y.pow(2)).add(&z.pow(2)));
        let out = resolve(&f);
        let g = out.graph.expect("resolved");
        assert_eq!(g.n_vertices, 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn a2_is_two_vertex_chain() {
        let k = Field::rationals();
        let f = germ(&k, |x, y, z| x.pow(2).add(&y.pow(2)).add(&z.pow(3)));
        let out = resolve(&f);
        let g = out.graph.expect("resolved");
        assert_eq!(g.n_vertices, 2);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn a3_is_three_chain() {
        let k = Field::rationals();
        let f = germ(&k, |x, y, z| x.pow(2).add(&y.pow(2)).add(&z.pow(4)));
        let out = resolve(&f);
        let g = out.graph.expect("resolved");
        assert_eq!(g.n_vertices, 3);
        assert!(is_chain(&g));
    }

    #[test]
    fn d4_is_star() {
        let k = Field::rationals();
        // x^2 + y^2 z + z^3
        let f = germ(&k, |x, y, z| x.pow(2).add(&y.pow(2).mul(z)).add(&z.pow(3)));
        let out = resolve(&f);
        let g = out.graph.expect("resolved");
        assert_eq!(g.n_vertices, 4);
        assert_eq!(g.edges.len(), 3);
        let mut deg = vec![0usize; 4];
        for (a, b) in &g.edges {
            deg[*a] += 1;
            deg[*b] += 1;
        }
        deg.sort();
        assert_eq!(deg, vec![1, 1, 1, 3]);
    }

    #[test]
    fn multiplicity_three_fails() {
        let k = Field::rationals();
        let f = germ(&k, |x, y, z| x.pow(3).add(&y.pow(3)).add(&z.pow(3)));
        let out = resolve(&f);
        assert!(out.graph.is_none());
        assert!(out.failure.unwrap().contains("multiplicity 3"));
    }
}


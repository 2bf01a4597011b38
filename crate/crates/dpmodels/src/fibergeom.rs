//! Analysis of the special fiber and of multiplicities along k-rational
//! linear centers: the predicates driving the model-improvement programs,
//! plus quartic normal forms in P(2,1,1,1) and the exceptional-pattern
//! detector for cubic models.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ambient::{Ambient, AmbientKind, AmbientSpace};
use crate::error::KernelError;
use crate::polyring::factor::{
    analyze_quadratic_form, divide_exact, factor_over_k, form_sqrt,
};
use crate::polyring::field::{Field, Scalar};
use crate::polyring::linalg::Mat;
use crate::polyring::poly::{DvrPolynomial, Monomial};
use crate::polyring::uni::{self, FieldEmbedding, UPoly};
use crate::solve::{solve_affine, SolveOutcome};
use crate::transform::{move_center_to_standard, Center, CenterKind, CoordinateChange};

/// Three conjugate planes over a splitting field, evidence for the
/// exceptional pattern.
#[derive(Clone, Debug)]
pub struct PlaneTriple {
    pub field: Field,
    pub embed: FieldEmbedding,
    pub planes: Vec<DvrPolynomial>,
}

/// Structure of the special fiber X_0.
#[derive(Debug)]
pub struct FiberReport {
    pub n_components: usize,
    pub reduced: bool,
    /// k-rational plane factors (weight-1 linear factors of F_0).
    pub planes_over_k: Vec<DvrPolynomial>,
    /// All k-irreducible components with multiplicities.
    pub components: Vec<(DvrPolynomial, usize)>,
    pub geometric_plane_triple: Option<PlaneTriple>,
}

/// Factor the special fiber of a weighted quartic c*u^2 + u*q(x) + g(x)
/// into k-irreducible weighted components.
fn factor_weighted_quartic_fiber(
    f0: &DvrPolynomial,
    seed: u64,
) -> Result<Vec<(DvrPolynomial, usize)>, KernelError> {
    let k = f0.field.clone();
    let cu = f0.coefficients_in("u");
    let c = cu
        .get(2)
        .map(|p| p.leading().map(|(_, s)| s.clone()).unwrap_or_else(|| k.zero()))
        .unwrap_or_else(|| k.zero());
    let q = cu.get(1).cloned().unwrap_or_else(|| DvrPolynomial::zero(&f0.ambient, &k));
    let g = cu.first().cloned().unwrap_or_else(|| DvrPolynomial::zero(&f0.ambient, &k));
    let u = DvrPolynomial::var(&f0.ambient, &k, "u");
    if !k.is_zero(&c) {
        // c u^2 + u q + g: splits iff q^2 - 4cg is a square of a quadratic
        let disc = q.mul(&q).sub(&g.scale(&k.mul(&k.from_i64(4), &c)));
        if let Some(s) = form_sqrt(&disc)? {
            let inv2c = k.inv(&k.mul(&k.from_i64(2), &c))?;
            let b1 = q.add(&s).scale(&inv2c);
            let b2 = q.sub(&s).scale(&inv2c);
            let p1 = u.add(&b1);
            let p2 = u.add(&b2);
            if p1 == p2 {
                return Ok(vec![(p1, 2)]);
            }
            return Ok(vec![(p1, 1), (p2, 1)]);
        }
        return Ok(vec![(f0.scale(&k.inv(&c)?), 1)]);
    }
    if q.is_zero() {
        if g.is_zero() {
            return Err(KernelError::ZeroPolynomial);
        }
        let facs = factor_over_k(&g, seed)?;
        return Ok(facs.factors);
    }
    // u*q + g: peel off the common x-only divisor of q and g
    let qf = factor_over_k(&q, seed)?;
    let mut d = DvrPolynomial::one(&f0.ambient, &k);
    let mut rest_q = q.clone();
    let mut rest_g = g.clone();
    let mut d_factors: Vec<(DvrPolynomial, usize)> = vec![];
    for (p, mq) in &qf.factors {
        let mut count = 0usize;
        while count < *mq {
            match (divide_exact(&rest_q, p), divide_exact(&rest_g, p)) {
                (Some(nq), Some(ng)) if !rest_g.is_zero() => {
                    rest_q = nq;
                    rest_g = ng;
                    count += 1;
                }
                (Some(nq), _) if rest_g.is_zero() => {
                    rest_q = nq;
                    count += 1;
                }
                _ => break,
            }
        }
        if count > 0 {
            d = d.mul(&p.pow(count as u32));
            d_factors.push((p.clone(), count));
        }
    }
    let _ = d;
    let tail = u.mul(&rest_q).add(&rest_g);
    let mut out = d_factors;
    out.push((tail, 1));
    Ok(out)
}

/// Detect whether a k-irreducible cubic fiber is geometrically a union of
/// three conjugate planes, by adjoining a root of a line restriction and
/// refactoring over the splitting field.
fn detect_plane_triple(
    f0: &DvrPolynomial,
    seed: u64,
) -> Result<Option<PlaneTriple>, KernelError> {
    let k = f0.field.clone();
    let n = f0.ambient.nvars();
    let mut rng = StdRng::seed_from_u64(seed ^ 0x7317);
    for _attempt in 0..6 {
        // random line: x_i = a_i s + b_i w
        let coefs: Vec<(Scalar, Scalar)> = (0..n)
            .map(|_| (k.from_i64(rng.gen_range(-3..=3)), k.from_i64(rng.gen_range(-3..=3))))
            .collect();
        let mut bin = vec![k.zero(); 4];
        let mut bad = false;
        for (m, c) in f0.terms() {
            let mut poly = vec![k.one()];
            for (i, &e) in m.exps[..n].iter().enumerate() {
                for _ in 0..e {
                    let (a, b) = &coefs[i];
                    let mut next = vec![k.zero(); poly.len() + 1];
                    for (j, p) in poly.iter().enumerate() {
                        next[j] = k.add(&next[j], &k.mul(p, b));
                        next[j + 1] = k.add(&next[j + 1], &k.mul(p, a));
                    }
                    poly = next;
                }
            }
            for (j, p) in poly.iter().enumerate() {
                let t = k.mul(c, p);
                bin[j] = k.add(&bin[j], &t);
            }
        }
        if k.is_zero(&bin[3]) {
            bad = true;
        }
        if bad {
            continue;
        }
        let bin = uni::normalized(&k, bin);
        if !uni::is_squarefree(&k, &bin)? {
            continue;
        }
        let facs = uni::factor(&k, &bin)?;
        if facs.factors.len() != 1 || facs.factors[0].0.len() != 4 {
            // reducible restriction: not a conjugate triple
            return Ok(None);
        }
        // adjoin a full splitting of the cubic and refactor
        let split = uni::splitting_roots(&k, &bin, "p")?;
        let f0_l = f0.map_field(&split.embed);
        let facs_l = factor_over_k(&f0_l, seed)?;
        let planes: Vec<DvrPolynomial> = facs_l
            .factors
            .iter()
            .filter(|(p, _)| p.total_geo_degree() == 1)
            .map(|(p, _)| p.clone())
            .collect();
        if planes.len() == 3 {
            return Ok(Some(PlaneTriple { field: split.field, embed: split.embed, planes }));
        }
        return Ok(None);
    }
    Ok(None)
}

/// Factor F_0 over k and report component structure.
pub fn fiber_report(f: &DvrPolynomial, seed: u64) -> Result<FiberReport, KernelError> {
    f.weighted_degree_ambient()?;
    let f0 = f.special_fiber();
    if f0.is_zero() {
        return Err(KernelError::geometry("special fiber vanishes: non-flat input"));
    }
    let components = match f.ambient.kind {
        AmbientKind::P3 => factor_over_k(&f0, seed)?.factors,
        AmbientKind::WP2111 => factor_weighted_quartic_fiber(&f0, seed)?,
        _ => return Err(KernelError::geometry("fiber_report supports P3 and P(2,1,1,1)")),
    };
    let n_components = components.len();
    let reduced = components.iter().all(|(_, m)| *m == 1);
    let planes_over_k: Vec<DvrPolynomial> = components
        .iter()
        .filter(|(p, _)| p.total_geo_degree() == 1 && p.degree_in("u") == 0 && is_weight1_linear(p))
        .map(|(p, _)| p.clone())
        .collect();
    let geometric_plane_triple = if f.ambient.kind == AmbientKind::P3
        && n_components == 1
        && reduced
        && components[0].0.total_geo_degree() == 3
    {
        detect_plane_triple(&f0, seed)?
    } else {
        None
    };
    Ok(FiberReport { n_components, reduced, planes_over_k, components, geometric_plane_triple })
}

fn is_weight1_linear(p: &DvrPolynomial) -> bool {
    p.terms().iter().all(|(m, _)| {
        m.t_exp() == 0
            && m.geo_degree() == 1
            && m.exps[..m.nvars()]
                .iter()
                .enumerate()
                .all(|(i, &e)| e == 0 || p.ambient.weights[i] == 1)
    })
}

/// Generic multiplicity of X along a plane center: the (l, t)-adic order.
pub fn generic_multiplicity_along_plane(
    f: &DvrPolynomial,
    plane: &Center,
) -> Result<i64, KernelError> {
    if plane.kind != CenterKind::Plane {
        return Err(KernelError::geometry("expected a plane center"));
    }
    multiplicity_along_center(f, plane)
}

/// Generic multiplicity of X along a line center: the (l1, l2, t)-adic order.
pub fn generic_multiplicity_along_line(
    f: &DvrPolynomial,
    line: &Center,
) -> Result<i64, KernelError> {
    if line.kind != CenterKind::Line {
        return Err(KernelError::geometry("expected a line center"));
    }
    multiplicity_along_center(f, line)
}

fn multiplicity_along_center(f: &DvrPolynomial, center: &Center) -> Result<i64, KernelError> {
    let ch = move_center_to_standard(center, &f.ambient)?;
    let g = ch.apply(f);
    let n = f.ambient.nvars();
    let r = center.forms.len();
    Ok(g.terms()
        .iter()
        .map(|(m, _)| {
            let cut: i64 = (n - r..n).map(|i| m.exps[i] as i64).sum();
            cut + m.t_exp() as i64
        })
        .min()
        .unwrap_or(0))
}

/// Normalize projective coordinates so the pivot (first weight-1 nonzero
/// coordinate) is 1, respecting the weights.
pub fn normalize_point(
    ambient: &Ambient,
    field: &Field,
    coords: &[Scalar],
) -> Result<Vec<Scalar>, KernelError> {
    let pivot = (0..coords.len())
        .find(|&i| ambient.weights[i] == 1 && !field.is_zero(&coords[i]))
        .ok_or_else(|| KernelError::geometry("point has no weight-1 pivot (vertex point)"))?;
    let lam = field.inv(&coords[pivot])?;
    Ok(coords
        .iter()
        .enumerate()
        .map(|(i, c)| field.mul(c, &field.pow(&lam, ambient.weights[i] as u64)))
        .collect())
}

/// The affine germ of F at a point, in a fresh affine ambient carrying the
/// chart variables (pivot coordinate set to 1, origin moved to the point).
pub fn affine_germ_at(
    f: &DvrPolynomial,
    coords: &[Scalar],
) -> Result<(DvrPolynomial, Vec<String>), KernelError> {
    let k = f.field.clone();
    let norm = normalize_point(&f.ambient, &k, coords)?;
    let pivot = (0..norm.len())
        .find(|&i| f.ambient.weights[i] == 1 && k.is_one(&norm[i]))
        .expect("normalized pivot");
    let chart = f.set_var_one(&f.ambient.vars[pivot].clone());
    // shift the remaining variables by the point's coordinates
    let subs: Vec<(String, DvrPolynomial)> = (0..norm.len())
        .filter(|&i| i != pivot)
        .map(|i| {
            let v = DvrPolynomial::var(&f.ambient, &k, &f.ambient.vars[i]);
            (
                f.ambient.vars[i].clone(),
                v.add(&DvrPolynomial::constant(&f.ambient, &k, norm[i].clone())),
            )
        })
        .collect();
    let germ = chart.substitute_many(&subs);
    let names: Vec<String> =
        (0..norm.len()).filter(|&i| i != pivot).map(|i| f.ambient.vars[i].clone()).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let affine = AmbientSpace::affine(&name_refs);
    let out = germ.map_to_ambient(&affine)?;
    Ok((out, names))
}

/// Multiplicity of X at a k-rational point: the order of the affine germ.
pub fn multiplicity_at_point(f: &DvrPolynomial, coords: &[Scalar]) -> Result<i64, KernelError> {
    let (germ, _) = affine_germ_at(f, coords)?;
    if germ.is_zero() {
        return Err(KernelError::geometry("germ vanished"));
    }
    let ord = germ.order_at_origin()?;
    if ord == 0 {
        return Err(KernelError::geometry("point is not on X"));
    }
    Ok(ord)
}

/// A singular point of the total space X, possibly over an extension.
#[derive(Clone, Debug)]
pub struct SingularPoint {
    pub field: Field,
    pub embed: FieldEmbedding,
    /// Projective coordinates in ambient variable order.
    pub coords: Vec<Scalar>,
    pub at_vertex: bool,
}

impl SingularPoint {
    pub fn is_rational(&self) -> bool {
        self.coords.iter().all(|c| !matches!(c, Scalar::Ext(_)))
    }

    pub fn describe(&self, ambient: &Ambient) -> String {
        let parts: Vec<String> =
            self.coords.iter().map(|c| self.field.scalar_string(c)).collect();
        let mut s = format!("({})", parts.join(" : "));
        if let Some(e) = self.field.ext() {
            let mp: Vec<String> =
                e.minpoly.iter().map(|c| self.field.base_field().scalar_string(c)).collect();
            s.push_str(&format!(" over k({}) with minpoly [{}]", e.name, mp.join(", ")));
        }
        let _ = ambient;
        s
    }
}

#[derive(Debug)]
pub enum SingularLocus {
    IsolatedPoints(Vec<SingularPoint>),
    ContainsCurve {
        description: String,
        /// k-rational lines inside the singular locus, as centers.
        k_lines: Vec<Center>,
    },
}

/// Chart cover of the weight-1 locus: for chart i, earlier weight-1
/// variables vanish and variable i is 1.
fn weight1_charts(ambient: &Ambient) -> Vec<usize> {
    (0..ambient.nvars()).filter(|&i| ambient.weights[i] == 1).collect()
}

/// Singular points of X away from the vertex, chart by chart.
fn singular_points_in_charts(
    f: &DvrPolynomial,
    seed: u64,
) -> Result<Option<Vec<SingularPoint>>, KernelError> {
    let k = f.field.clone();
    let charts = weight1_charts(&f.ambient);
    let mut out: Vec<SingularPoint> = vec![];
    for (ci, &pivot) in charts.iter().enumerate() {
        // chart: x_pivot = 1; the cover restriction (earlier weight-1 vars
        // vanish) is imposed as extra equations AFTER differentiating.
        let g = f.set_var_one(&f.ambient.vars[pivot].clone());
        let live_vars: Vec<String> = (0..f.ambient.nvars())
            .filter(|&i| i != pivot)
            .map(|i| f.ambient.vars[i].clone())
            .collect();
        let f0 = g.special_fiber();
        let f1 = g.t_coefficient(1);
        let mut system = vec![f0.clone(), f1.clone()];
        for v in &live_vars {
            system.push(f0.derivative(v));
        }
        for &j in charts.iter().take(ci) {
            system.push(DvrPolynomial::var(&f.ambient, &k, &f.ambient.vars[j]));
        }
        match solve_affine(&system, &live_vars, seed ^ (ci as u64) << 8)? {
            SolveOutcome::Finite(pts) => {
                for p in pts {
                    let kk = p.field.clone();
                    let mut coords = vec![kk.zero(); f.ambient.nvars()];
                    coords[pivot] = kk.one();
                    for (name, val) in live_vars.iter().zip(&p.coords) {
                        let idx = f.ambient.var_index(name).unwrap();
                        coords[idx] = val.clone();
                    }
                    out.push(SingularPoint {
                        field: p.field,
                        embed: p.embed,
                        coords,
                        at_vertex: false,
                    });
                }
            }
            SolveOutcome::PositiveDim(_) => return Ok(None),
            SolveOutcome::Undecided(_) => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Is F_1 identically zero on the line cut by two k-linear forms?
fn f1_vanishes_on_line(f1: &DvrPolynomial, l1: &DvrPolynomial, l2: &DvrPolynomial) -> bool {
    // eliminate the first pivot, then reduce by the second form expressed in
    // the remaining variables
    let l2r = reduce_mod_linear(l2.clone(), l1);
    let reduced = reduce_mod_linear(reduce_mod_linear(f1.clone(), l1), &l2r);
    reduced.is_zero()
}

/// Substitute away the pivot variable of a linear form (l = 0 locus).
fn reduce_mod_linear(f: DvrPolynomial, l: &DvrPolynomial) -> DvrPolynomial {
    let k = f.field.clone();
    let n = f.ambient.nvars();
    // find pivot variable of l
    for i in 0..n {
        let mut m = Monomial::unit(n);
        m.exps[i] = 1;
        if let Some((_, c)) = l.terms().iter().find(|(mm, _)| *mm == m) {
            // x_i = -(l - c x_i)/c
            let xi = DvrPolynomial::var(&f.ambient, &k, &f.ambient.vars[i]);
            let rest = l.sub(&xi.scale(c));
            let value = rest.scale(&k.neg(&k.inv(c).unwrap()));
            return f.substitute(&f.ambient.vars[i].clone(), &value);
        }
    }
    f
}

/// Singular locus of the model X: isolated points (with evidence) or a
/// curve. The components of the fiber drive the case analysis; the residual
/// isolated points come from verified chart solves.
pub fn singular_locus(f: &DvrPolynomial, seed: u64) -> Result<SingularLocus, KernelError> {
    let k = f.field.clone();
    let report = fiber_report(f, seed)?;
    let f1_full = f.t_coefficient(1);
    let mut k_lines: Vec<Center> = vec![];
    let mut curve_descriptions: Vec<String> = vec![];

    // non-reduced components: X is singular along a curve inside them
    for (comp, mult) in &report.components {
        if *mult >= 2 {
            curve_descriptions.push(format!(
                "non-reduced fiber component ({})^{mult}",
                comp.render()
            ));
            if comp.total_geo_degree() == 1 {
                // the plane itself may contain k-lines of the singular locus;
                // the program handles this through the plane rules instead
            }
        }
    }

    // pairwise intersections of distinct reduced components
    let comps: Vec<&DvrPolynomial> = report.components.iter().map(|(c, _)| c).collect();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            let (a, b) = (comps[i], comps[j]);
            let (da, db) = (a.total_geo_degree(), b.total_geo_degree());
            if da == 1 && db == 1 {
                // line of intersection
                if f1_vanishes_on_line(&f1_full, a, b) {
                    curve_descriptions
                        .push(format!("line {{{} = {} = 0}}", a.render(), b.render()));
                    if let Ok(c) = Center::line(a.clone(), b.clone()) {
                        k_lines.push(c);
                    }
                }
            } else if (da == 1 && db == 2) || (da == 2 && db == 1) {
                let (l, q) = if da == 1 { (a, b) } else { (b, a) };
                // F1 on the conic V(l, q): restrict to l = 0 and divide by q
                let f1r = reduce_mod_linear(f1_full.clone(), l);
                let qr = reduce_mod_linear(q.clone(), l);
                let on_conic = if f1r.is_zero() {
                    true
                } else {
                    divide_exact(&f1r, &qr).is_some()
                };
                if on_conic {
                    curve_descriptions
                        .push(format!("conic {{{} = {} = 0}}", l.render(), q.render()));
                }
            } else {
                // conic-conic intersections (P(2,1,1,1) quartic case) and the
                // like: a curve through finitely many singular points; check
                // ideal membership of F1 via a linear system
                if f1_in_two_form_ideal(&f1_full, a, b)? {
                    curve_descriptions
                        .push(format!("curve {{{} = {} = 0}}", a.render(), b.render()));
                }
            }
        }
    }

    // components singular along a line of their own (rank-2 quadrics)
    for (comp, _) in &report.components {
        if comp.total_geo_degree() == 2 && comp.degree_in("u") == 0 {
            let an = analyze_quadratic_form(comp)?;
            if an.rank <= 2 {
                // radical is a positive-dimensional singular locus of the
                // component; X singular there iff F1 vanishes on it
                if let Some(rad_forms) = radical_forms(comp)? {
                    if rad_forms.len() == 2
                        && f1_vanishes_on_line(&f1_full, &rad_forms[0], &rad_forms[1])
                    {
                        curve_descriptions.push(format!(
                            "singular line of rank-{} quadric {}",
                            an.rank,
                            comp.render()
                        ));
                        if let Ok(c) = Center::line(rad_forms[0].clone(), rad_forms[1].clone()) {
                            k_lines.push(c);
                        }
                    }
                }
            }
        }
    }

    // conjugate plane triples: X may be singular along the pairwise
    // intersection lines, none of which is defined over k
    if let Some(triple) = &report.geometric_plane_triple {
        let f1_l = f.map_field(&triple.embed).t_coefficient(1);
        let mut all = true;
        for i in 0..3 {
            for j in i + 1..3 {
                if !f1_vanishes_on_line(&f1_l, &triple.planes[i], &triple.planes[j]) {
                    all = false;
                }
            }
        }
        if all {
            curve_descriptions
                .push("pairwise intersection lines of three conjugate planes".into());
        }
    }

    if !curve_descriptions.is_empty() {
        return Ok(SingularLocus::ContainsCurve {
            description: curve_descriptions.join("; "),
            k_lines,
        });
    }

    // residual isolated points from verified chart solves
    match singular_points_in_charts(f, seed)? {
        Some(mut pts) => {
            // vertex of P(2,1,1,1): on X iff the u^2 coefficient has positive
            // t-order; it is then a singular (quotient) point of the model
            if f.ambient.kind == AmbientKind::WP2111 {
                let u2 = f.coefficients_in("u").get(2).cloned();
                let on_x = match u2 {
                    None => true,
                    Some(c) => c.special_fiber().is_zero(),
                };
                if on_x {
                    let mut coords = vec![k.zero(); f.ambient.nvars()];
                    coords[0] = k.one();
                    pts.push(SingularPoint {
                        field: k.clone(),
                        embed: FieldEmbedding::identity(&k),
                        coords,
                        at_vertex: true,
                    });
                }
            }
            dedupe_points(&mut pts);
            Ok(SingularLocus::IsolatedPoints(pts))
        }
        None => {
            // chart solve could not certify finiteness; try to find a
            // k-rational singular line by random plane sections
            if let Some(line) = hunt_singular_line(f, seed)? {
                let f0 = f.special_fiber();
                let sing_on_x = f1_vanishes_on_line(&f1_full, &line.forms[0], &line.forms[1]);
                let _ = f0;
                if sing_on_x {
                    return Ok(SingularLocus::ContainsCurve {
                        description: format!("singular along {}", line.describe()),
                        k_lines: vec![line],
                    });
                }
                // line is singular on the fiber only: isolated points of X on
                // it would still have been found by charts; report undecided
            }
            Err(KernelError::Undecided(
                "singular locus: chart elimination degenerated and no k-line was found".into(),
            ))
        }
    }
}

fn dedupe_points(pts: &mut Vec<SingularPoint>) {
    let mut seen: Vec<String> = vec![];
    pts.retain(|p| {
        let key = format!(
            "{}|{:?}",
            p.coords.iter().map(|c| p.field.scalar_string(c)).collect::<Vec<_>>().join(","),
            p.field.ext().map(|e| e.minpoly.len())
        );
        if seen.contains(&key) {
            false
        } else {
            seen.push(key);
            true
        }
    });
}

/// F1 in the ideal (A, B) of two forms, decided by a linear system on the
/// cofactor coefficients.
fn f1_in_two_form_ideal(
    f1: &DvrPolynomial,
    a: &DvrPolynomial,
    b: &DvrPolynomial,
) -> Result<bool, KernelError> {
    if f1.is_zero() {
        return Ok(true);
    }
    let k = f1.field.clone();
    let ambient = f1.ambient.clone();
    let d = match f1.weighted_degree(&ambient.weights) {
        Ok(d) => d,
        Err(_) => return Ok(false),
    };
    let da = a.weighted_degree(&ambient.weights)?;
    let db = b.weighted_degree(&ambient.weights)?;
    if d < da && d < db {
        return Ok(false);
    }
    // f1 = p*a + q*b with p, q forms of the right weights
    let basis_p = weighted_monomials(&ambient, d - da);
    let basis_q = weighted_monomials(&ambient, d - db);
    // build the linear system over the monomials of weight d
    let target_monos = weighted_monomials(&ambient, d);
    let idx_of = |m: &Monomial| target_monos.iter().position(|x| x == m);
    let cols = basis_p.len() + basis_q.len();
    let mut rows = vec![vec![k.zero(); cols]; target_monos.len()];
    for (cidx, bm) in basis_p.iter().enumerate() {
        for (am, ac) in a.terms() {
            let m = bm.mul(am);
            if let Some(r) = idx_of(&m) {
                rows[r][cidx] = k.add(&rows[r][cidx], ac);
            }
        }
    }
    for (cidx, bm) in basis_q.iter().enumerate() {
        for (bm2, bc) in b.terms() {
            let m = bm.mul(bm2);
            if let Some(r) = idx_of(&m) {
                rows[r][basis_p.len() + cidx] = k.add(&rows[r][basis_p.len() + cidx], bc);
            }
        }
    }
    let rhs: Vec<Scalar> = target_monos
        .iter()
        .map(|m| {
            f1.terms()
                .iter()
                .find(|(mm, _)| mm == m)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(|| k.zero())
        })
        .collect();
    Ok(Mat::new(rows).solve(&k, &rhs).is_some())
}

/// All t-free monomials of a given weighted degree.
fn weighted_monomials(ambient: &Ambient, d: i64) -> Vec<Monomial> {
    let n = ambient.nvars();
    let mut out = vec![];
    let mut stack = vec![(0usize, Monomial::unit(n), 0i64)];
    while let Some((i, m, w)) = stack.pop() {
        if w == d && (i >= n || true) {
            if m.exps[..n].iter().enumerate().skip(i).all(|(_, &e)| e == 0) {
                out.push(m.clone());
            }
        }
        if i >= n || w > d {
            continue;
        }
        let wi = ambient.weights[i] as i64;
        let max_e = (d - w) / wi;
        for e in 0..=max_e {
            let mut mm = m.clone();
            mm.exps[i] = e as u16;
            stack.push((i + 1, mm, w + e * wi));
        }
    }
    // dedupe (the w == d early push can duplicate)
    out.sort_by(|a, b| a.cmp_graded(b));
    out.dedup();
    out
}

/// Radical (singular locus) of a rank <= 2 quadratic form, as k-linear forms.
fn radical_forms(q: &DvrPolynomial) -> Result<Option<Vec<DvrPolynomial>>, KernelError> {
    let k = q.field.clone();
    let n = q.ambient.nvars();
    let half = k.inv(&k.from_i64(2))?;
    let mut gram = vec![vec![k.zero(); n]; n];
    for (m, c) in q.terms() {
        let idxs: Vec<usize> =
            (0..n).flat_map(|i| std::iter::repeat(i).take(m.exps[i] as usize)).collect();
        let (i, j) = (idxs[0], idxs[1]);
        if i == j {
            gram[i][i] = k.add(&gram[i][i], c);
        } else {
            let h = k.mul(c, &half);
            gram[i][j] = k.add(&gram[i][j], &h);
            gram[j][i] = k.add(&gram[j][i], &h);
        }
    }
    // the radical is cut by the row space of the Gram matrix
    let mut mat = Mat::new(gram);
    let pivots = mat.rref(&k);
    let mut forms = vec![];
    for (r, _) in pivots.iter().enumerate() {
        let mut p = DvrPolynomial::zero(&q.ambient, &k);
        for (jj, c) in mat.rows[r].iter().enumerate() {
            if !k.is_zero(c) {
                p = p.add(&DvrPolynomial::var(&q.ambient, &k, &q.ambient.vars[jj]).scale(c));
            }
        }
        if !p.is_zero() {
            forms.push(p);
        }
    }
    Ok(Some(forms))
}

/// Randomized hunt for a k-rational line along which the fiber (and X) is
/// singular, via singular points of plane sections.
fn hunt_singular_line(f: &DvrPolynomial, seed: u64) -> Result<Option<Center>, KernelError> {
    if f.ambient.kind != AmbientKind::P3 {
        return Ok(None);
    }
    let k = f.field.clone();
    let f0 = f.special_fiber();
    let mut rng = StdRng::seed_from_u64(seed ^ 0x11fe);
    for _ in 0..6 {
        // two random planes; collect rational singular points of the
        // restricted plane curves
        let mut pts: Vec<Vec<Scalar>> = vec![];
        for _ in 0..2 {
            let coefs: Vec<Scalar> = (0..4).map(|_| k.from_i64(rng.gen_range(-3..=3))).collect();
            // solve the section plane for its pivot variable
            let Some(pivot) = (0..4).find(|&i| !k.is_zero(&coefs[i])) else { continue };
            let mut value = DvrPolynomial::zero(&f.ambient, &k);
            for i in 0..4 {
                if i != pivot {
                    let c = k.neg(&k.div(&coefs[i], &coefs[pivot]).unwrap());
                    value =
                        value.add(&DvrPolynomial::var(&f.ambient, &k, &f.ambient.vars[i]).scale(&c));
                }
            }
            let g = f0.substitute(&f.ambient.vars[pivot].clone(), &value);
            // singular points of the restricted curve, in the chart where the
            // last live variable is 1
            let live: Vec<usize> = (0..4).filter(|&i| i != pivot).collect();
            let chart_var = live[2];
            let mut sys = vec![];
            let g1 = g.set_var_one(&f.ambient.vars[chart_var].clone());
            sys.push(g1.clone());
            let vars: Vec<String> =
                live[..2].iter().map(|&i| f.ambient.vars[i].clone()).collect();
            for v in &vars {
                sys.push(g1.derivative(v));
            }
            if let SolveOutcome::Finite(sols) = solve_affine(&sys, &vars, seed)? {
                for s in sols.iter().filter(|s| s.is_rational()) {
                    let mut coords = vec![k.zero(); 4];
                    coords[chart_var] = k.one();
                    for (vi, val) in live[..2].iter().zip(&s.coords) {
                        // rational by the filter
                        coords[*vi] = match val {
                            Scalar::Ext(_) => unreachable!(),
                            other => other.clone(),
                        };
                    }
                    coords[pivot] = {
                        let mut acc = k.zero();
                        for i in 0..4 {
                            if i != pivot {
                                let c = k.neg(&k.div(&coefs[i], &coefs[pivot]).unwrap());
                                acc = k.add(&acc, &k.mul(&c, &coords[i]));
                            }
                        }
                        acc
                    };
                    pts.push(coords);
                }
            }
        }
        if pts.len() < 2 {
            continue;
        }
        // the line through the first two distinct points
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                if let Some(center) = line_through(&f.ambient, &k, &pts[a], &pts[b]) {
                    // verify: F0 has multiplicity >= 2 along it
                    let mu = multiplicity_along_center(&f0, &center)?;
                    if mu >= 2 {
                        return Ok(Some(center));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn line_through(
    ambient: &Ambient,
    k: &Field,
    p: &[Scalar],
    q: &[Scalar],
) -> Option<Center> {
    // cutting forms: nullspace of the 2x4 matrix [p; q]
    let rows = vec![p.to_vec(), q.to_vec()];
    let ns = Mat::new(rows).nullspace(k);
    if ns.len() != 2 {
        return None;
    }
    let mk = |v: &Vec<Scalar>| {
        let mut f = DvrPolynomial::zero(ambient, k);
        for (i, c) in v.iter().enumerate() {
            if !k.is_zero(c) {
                f = f.add(&DvrPolynomial::var(ambient, k, &ambient.vars[i]).scale(c));
            }
        }
        f
    };
    Center::line(mk(&ns[0]), mk(&ns[1])).ok()
}

/// Evidence for the exceptional pattern: geometric fiber a union of three
/// conjugate planes, X singular along the pairwise intersection lines, and
/// multiplicity two at the (k-rational) triple point.
#[derive(Debug)]
pub struct ExceptionalEvidence {
    pub is_exceptional: bool,
    pub clauses: Vec<(String, bool)>,
    pub triple_point: Option<Vec<Scalar>>,
}

pub fn exceptional_pattern_check(
    f: &DvrPolynomial,
    seed: u64,
) -> Result<ExceptionalEvidence, KernelError> {
    if f.ambient.kind != AmbientKind::P3 {
        return Err(KernelError::geometry("exceptional pattern is defined for cubic models"));
    }
    let k = f.field.clone();
    let report = fiber_report(f, seed)?;
    let mut clauses = vec![];
    let triple = report.geometric_plane_triple.as_ref();
    let c1 = report.n_components == 1 && report.planes_over_k.is_empty() && triple.is_some();
    clauses.push(("geometric fiber is a union of 3 conjugate planes, none over k".into(), c1));
    if !c1 {
        return Ok(ExceptionalEvidence { is_exceptional: false, clauses, triple_point: None });
    }
    let triple = triple.unwrap();
    let big = triple.field.clone();
    let f_l = f.map_field(&triple.embed);
    let f1_l = f_l.t_coefficient(1);
    // X singular along each pairwise intersection line (Jacobian on the line):
    // the fiber is singular along them automatically; the extra condition is
    // that F1 vanishes there too.
    let mut sing_along = true;
    for i in 0..3 {
        for j in i + 1..3 {
            if !f1_vanishes_on_line(&f1_l, &triple.planes[i], &triple.planes[j]) {
                sing_along = false;
            }
        }
    }
    clauses.push(("X is singular along the pairwise intersection curve C".into(), sing_along));
    // triple point: intersection of all three planes; necessarily k-rational
    let n = f.ambient.nvars();
    let rows: Vec<Vec<Scalar>> = triple
        .planes
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| {
                    let mut m = Monomial::unit(n);
                    m.exps[i] = 1;
                    p.terms()
                        .iter()
                        .find(|(mm, _)| *mm == m)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(|| big.zero())
                })
                .collect()
        })
        .collect();
    let ns = Mat::new(rows).nullspace(&big);
    let mut mu2 = false;
    let mut triple_point = None;
    if ns.len() == 1 {
        let coords_l = ns[0].clone();
        // normalize and check rationality
        let norm = normalize_point(&f.ambient, &big, &coords_l)?;
        let rational: Option<Vec<Scalar>> = norm
            .iter()
            .map(|c| match c {
                Scalar::Ext(_) => None,
                other => Some(other.clone()),
            })
            .collect();
        if let Some(pt) = rational {
            let mu = multiplicity_at_point(f, &pt)?;
            mu2 = mu == 2;
            triple_point = Some(pt);
        }
    }
    clauses.push(("triple point is k-rational with multiplicity 2".into(), mu2));
    let is_exceptional = c1 && sing_along && mu2;
    let _ = k;
    Ok(ExceptionalEvidence { is_exceptional, clauses, triple_point })
}

/// Quartic normal-form cases for the special fiber in P(2,1,1,1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuarticCase {
    /// u divides F_0 in suitable coordinates.
    UFactor,
    /// a weight-1 linear form divides F_0 in suitable coordinates.
    LinearFactor,
    /// F_0 = S1*S2 with smooth conics (possibly equal, possibly conjugate).
    ConicPair { conjugate: bool },
    /// reduced irreducible Gorenstein: F_0 = u^2 + x1^2*Q, singular line
    /// u = x1 = 0.
    GorensteinSquareLine,
    /// index-2 shape F_0 = u*Q + G with a common singular point moved to
    /// (0,0,1); singular along x1 = x2 = 0.
    IndexTwoSingularLine,
    /// F_0 defines a normal surface.
    Normal,
}

#[derive(Debug)]
pub struct QuarticNormalForm {
    pub case: QuarticCase,
    /// Change realizing the displayed normal form.
    pub witness: CoordinateChange,
    pub details: String,
}

pub fn quartic_normal_form(
    f: &DvrPolynomial,
    seed: u64,
) -> Result<QuarticNormalForm, KernelError> {
    if f.ambient.kind != AmbientKind::WP2111 {
        return Err(KernelError::geometry("quartic normal forms live in P(2,1,1,1)"));
    }
    let k = f.field.clone();
    let ambient = f.ambient.clone();
    let f0 = f.special_fiber();
    if f0.is_zero() {
        return Err(KernelError::geometry("special fiber vanishes"));
    }
    let cu = f0.coefficients_in("u");
    let c = cu
        .get(2)
        .map(|p| p.leading().map(|(_, s)| s.clone()).unwrap_or_else(|| k.zero()))
        .unwrap_or_else(|| k.zero());
    let q = cu.get(1).cloned().unwrap_or_else(|| DvrPolynomial::zero(&ambient, &k));
    let g = cu.first().cloned().unwrap_or_else(|| DvrPolynomial::zero(&ambient, &k));

    // (1) u | F_0 in suitable coordinates
    if !k.is_zero(&c) {
        let disc = q.mul(&q).sub(&g.scale(&k.mul(&k.from_i64(4), &c)));
        if let Some(s) = form_sqrt(&disc)? {
            let inv2c = k.inv(&k.mul(&k.from_i64(2), &c))?;
            let b2 = q.sub(&s).scale(&inv2c);
            let witness = CoordinateChange::shear(&ambient, &k, "u", &b2.neg())?;
            return Ok(QuarticNormalForm {
                case: QuarticCase::UFactor,
                witness,
                details: "fiber splits as c(u+B1)(u+B2); u-shear kills B2".into(),
            });
        }
    } else if !q.is_zero() {
        if let Some(b) = divide_exact(&g, &q) {
            let witness = CoordinateChange::shear(&ambient, &k, "u", &b.neg())?;
            return Ok(QuarticNormalForm {
                case: QuarticCase::UFactor,
                witness,
                details: "fiber is q*(u + g/q); u-shear exposes the u factor".into(),
            });
        }
    }

    // (2) weight-1 linear factor
    if k.is_zero(&c) {
        let fac_q = if q.is_zero() { None } else { Some(factor_over_k(&q, seed)?) };
        let common_linear: Option<DvrPolynomial> = match (&fac_q, q.is_zero()) {
            (_, true) => {
                // F_0 = g: any linear factor of g works
                let fg = factor_over_k(&g, seed)?;
                fg.factors.iter().find(|(p, _)| p.total_geo_degree() == 1).map(|(p, _)| p.clone())
            }
            (Some(fq), false) => fq
                .factors
                .iter()
                .filter(|(p, _)| p.total_geo_degree() == 1)
                .find(|(p, _)| divide_exact(&g, p).is_some() || g.is_zero())
                .map(|(p, _)| p.clone()),
            _ => None,
        };
        if let Some(l) = common_linear {
            let witness = linear_to_x1(&ambient, &k, &l)?;
            return Ok(QuarticNormalForm {
                case: QuarticCase::LinearFactor,
                witness,
                details: format!("linear factor {} moved to x1", l.render()),
            });
        }
    }

    // (3) conic pair
    if k.is_zero(&c) && q.is_zero() {
        let facs = factor_over_k(&g, seed)?;
        let quads: Vec<(&DvrPolynomial, usize)> = facs
            .factors
            .iter()
            .filter(|(p, _)| p.total_geo_degree() == 2)
            .map(|(p, m)| (p, *m))
            .collect();
        let total: usize = quads.iter().map(|(_, m)| m).sum();
        if total == 2 && facs.factors.iter().all(|(p, _)| p.total_geo_degree() == 2) {
            let all_rank3 = quads
                .iter()
                .map(|(p, _)| analyze_quadratic_form(p).map(|a| a.rank == 3))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .all(|b| b);
            if all_rank3 {
                return Ok(QuarticNormalForm {
                    case: QuarticCase::ConicPair { conjugate: false },
                    witness: CoordinateChange::identity(&ambient, &k),
                    details: "fiber is a product of two smooth conics over k".into(),
                });
            }
        }
        // conjugate pair over a quadratic extension
        if facs.factors.len() == 1 && facs.factors[0].1 == 1 && facs.factors[0].0.total_geo_degree() == 4 {
            if let Some(()) = conjugate_conic_pair(&g, seed)? {
                return Ok(QuarticNormalForm {
                    case: QuarticCase::ConicPair { conjugate: true },
                    witness: CoordinateChange::identity(&ambient, &k),
                    details: "fiber is a product of two conjugate smooth conics".into(),
                });
            }
        }
    }

    // (4) Gorenstein with a squared linear factor: u^2 + x1^2 Q
    if !k.is_zero(&c) {
        // normalize c = 1 and shear away the u-linear part
        let shear = CoordinateChange::shear(&ambient, &k, "u", &q.scale(&k.neg(&k.div(&k.one(), &k.mul(&k.from_i64(2), &c))?)))?;
        let f0n = shear.apply(&f0).scale(&k.inv(&c)?);
        let g2 = f0n.coefficients_in("u")[0].clone();
        if !g2.is_zero() {
            let fg = factor_over_k(&g2, seed)?;
            if let Some((l, _)) = fg.factors.iter().find(|(p, m)| p.total_geo_degree() == 1 && *m >= 2) {
                let lin = linear_to_x1(&ambient, &k, l)?;
                let witness = shear.then(&lin);
                return Ok(QuarticNormalForm {
                    case: QuarticCase::GorensteinSquareLine,
                    witness,
                    details: "F0 = u^2 + x1^2*Q; singular along u = x1 = 0".into(),
                });
            }
        }
    }

    // (5) index-2 shape: c = 0, q != 0, no common factor; common singular
    // point of the conic q and the quartic g
    if k.is_zero(&c) && !q.is_zero() {
        let an = analyze_quadratic_form(&q)?;
        if an.rank <= 2 {
            // singular point(s) of the conic: the radical
            if let Some(rad) = radical_forms(&q)? {
                // rank 2: radical is a point (two forms in the plane P^2 of
                // the x's cut a point); rank 1: a line of candidates
                let candidates = conic_singular_points(&q, &rad)?;
                for pt in candidates {
                    // need g singular there too (multiplicity >= 2)
                    if quartic_singular_at(&g, &pt)? {
                        let witness = point_to_001(&ambient, &k, &pt)?;
                        return Ok(QuarticNormalForm {
                            case: QuarticCase::IndexTwoSingularLine,
                            witness,
                            details: "F0 = u*Q + G with a common singular point at (0,0,1)".into(),
                        });
                    }
                }
            }
        }
    }

    Ok(QuarticNormalForm {
        case: QuarticCase::Normal,
        witness: CoordinateChange::identity(&ambient, &k),
        details: "no degenerate shape matched".into(),
    })
}

/// Detect a conjugate conic pair by splitting over the discriminant field of
/// a line restriction.
fn conjugate_conic_pair(g: &DvrPolynomial, seed: u64) -> Result<Option<()>, KernelError> {
    let k = g.field.clone();
    // restrict to x3 = 1, x2 = small values: get univariate quartics whose
    // quadratic factors suggest the extension
    let g1 = g.set_var_one("x3");
    for r in [0i64, 1, -1, 2, -2] {
        let spec = g1.substitute("x2", &DvrPolynomial::int(&g.ambient, &k, r));
        let upoly: UPoly = {
            let coeffs = spec.coefficients_in("x1");
            uni::normalized(
                &k,
                coeffs
                    .iter()
                    .map(|c| c.leading().map(|(_, s)| s.clone()).unwrap_or_else(|| k.zero()))
                    .collect(),
            )
        };
        if upoly.len() != 5 || !uni::is_squarefree(&k, &upoly)? {
            continue;
        }
        let facs = uni::factor(&k, &upoly)?;
        for (p, _) in &facs.factors {
            if p.len() == 3 {
                // adjoin a root of this quadratic and try the conic split
                let adj = uni::adjoin_root(&k, p, "w")?;
                let g_l = g.map_field(&adj.embed);
                let facs_l = factor_over_k(&g_l, seed)?;
                let quads = facs_l
                    .factors
                    .iter()
                    .filter(|(h, _)| h.total_geo_degree() == 2)
                    .count();
                if quads >= 1 && facs_l.factors.iter().all(|(h, _)| h.total_geo_degree() == 2) {
                    return Ok(Some(()));
                }
            }
        }
        return Ok(None);
    }
    Ok(None)
}

fn conic_singular_points(
    q: &DvrPolynomial,
    rad: &[DvrPolynomial],
) -> Result<Vec<Vec<Scalar>>, KernelError> {
    let k = q.field.clone();
    let ambient = q.ambient.clone();
    // the radical as a subspace of the x-plane: points with rad forms = 0;
    // for rank 2 it's one point, for rank 1 a line (sample is not enough for
    // a certificate, so only the rank-2 point is returned; rank-1 conics
    // were already handled as squares upstream).
    let n = ambient.nvars();
    let rows: Vec<Vec<Scalar>> = rad
        .iter()
        .map(|f| {
            (1..n)
                .map(|i| {
                    let mut m = Monomial::unit(n);
                    m.exps[i] = 1;
                    f.terms()
                        .iter()
                        .find(|(mm, _)| *mm == m)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(|| k.zero())
                })
                .collect()
        })
        .collect();
    let ns = Mat::new(rows).nullspace(&k);
    let mut out = vec![];
    if ns.len() == 1 {
        // x-coordinates of the singular point
        let mut coords = vec![k.zero(); n];
        for (i, c) in ns[0].iter().enumerate() {
            coords[i + 1] = c.clone();
        }
        out.push(coords);
    }
    Ok(out)
}

fn quartic_singular_at(g: &DvrPolynomial, pt: &[Scalar]) -> Result<bool, KernelError> {
    let k = g.field.clone();
    if g.is_zero() {
        return Ok(true);
    }
    // evaluate g and its x-partials at the point
    let geo: Vec<Scalar> = pt.to_vec();
    let t0 = k.zero();
    if !k.is_zero(&g.eval(&geo, &t0)) {
        return Ok(false);
    }
    for v in ["x1", "x2", "x3"] {
        if !k.is_zero(&g.derivative(v).eval(&geo, &t0)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Linear change on the weight-1 variables sending l to x1.
fn linear_to_x1(
    ambient: &Ambient,
    k: &Field,
    l: &DvrPolynomial,
) -> Result<CoordinateChange, KernelError> {
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
    // complete to a basis with l as the FIRST row
    let mut basis = vec![row];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![k.zero(); n];
        e[i] = k.one();
        let mut cand = basis.clone();
        cand.push(e.clone());
        if Mat::new(cand.clone()).rank(k) == cand.len() {
            basis.push(e);
        }
    }
    // substitution x = B^{-1} y sends l to y_1 (first weight-1 variable)
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
    let pivots = aug.rref(k);
    if pivots.len() != n {
        return Err(KernelError::geometry("linear normalization degenerated"));
    }
    let binv: Vec<Vec<Scalar>> = aug.rows.iter().map(|r| r[n..].to_vec()).collect();
    CoordinateChange::linear_w1(ambient, k, &binv)
}

/// Linear change moving a point of the x-plane to (0, 0, 1).
fn point_to_001(
    ambient: &Ambient,
    k: &Field,
    pt: &[Scalar],
) -> Result<CoordinateChange, KernelError> {
    let w1: Vec<usize> = (0..ambient.nvars()).filter(|&i| ambient.weights[i] == 1).collect();
    let n = w1.len();
    let v: Vec<Scalar> = w1.iter().map(|&i| pt[i].clone()).collect();
    // basis with v as the LAST column: substitution x = C y maps (0,0,1) to v
    let mut cols = vec![];
    for i in 0..n {
        if cols.len() == n - 1 {
            break;
        }
        let mut e = vec![k.zero(); n];
        e[i] = k.one();
        let mut cand: Vec<Vec<Scalar>> = cols.clone();
        cand.push(e.clone());
        cand.push(v.clone());
        if Mat::new(cand.clone()).rank(k) == cand.len() {
            cols.push(e);
        }
    }
    cols.push(v);
    let mat: Vec<Vec<Scalar>> = (0..n)
        .map(|i| (0..n).map(|j| cols[j][i].clone()).collect())
        .collect();
    CoordinateChange::linear_w1(ambient, k, &mat)
}

/// Axial multiplicity: the t-order of the u^2 coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxialMultiplicity {
    Finite(u32),
    /// u^2 absent up to the stated truncation order.
    Infinite { truncation: u32 },
}

pub fn axial_multiplicity(
    f: &DvrPolynomial,
    truncation: u32,
) -> Result<AxialMultiplicity, KernelError> {
    if f.ambient.kind != AmbientKind::WP2111 {
        return Err(KernelError::geometry("axial multiplicity lives in P(2,1,1,1)"));
    }
    f.weighted_degree_ambient()?;
    let cu = f.coefficients_in("u");
    let u2 = cu.get(2);
    match u2 {
        None => Ok(AxialMultiplicity::Infinite { truncation }),
        Some(c) if c.is_zero() => Ok(AxialMultiplicity::Infinite { truncation }),
        Some(c) => Ok(AxialMultiplicity::Finite(c.t_content()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn fiber_of_tangent_cone_family() {
        let f = family_2_24(4);
        let r = fiber_report(&f, 1).unwrap();
        assert_eq!(r.n_components, 2);
        assert!(r.reduced);
        assert_eq!(r.planes_over_k.len(), 1);
        assert!(r.geometric_plane_triple.is_none());
    }

    #[test]
    fn norm_form_fiber_has_plane_triple() {
        let (a, k) = p3();
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let t = DvrPolynomial::t(&a, &k);
        let x0 = DvrPolynomial::var(&a, &k, "x0");
        let norm = x1
            .pow(3)
            .add(&x2.pow(3).scale(&k.from_i64(2)))
            .add(&x3.pow(3).scale(&k.from_i64(4)))
            .sub(&x1.mul(&x2).mul(&x3).scale(&k.from_i64(6)));
        let f = norm.add(&t.mul(&x0.pow(3)));
        let r = fiber_report(&f, 1).unwrap();
        assert_eq!(r.n_components, 1);
        assert!(r.reduced);
        assert!(r.planes_over_k.is_empty());
        let triple = r.geometric_plane_triple.expect("conjugate plane triple");
        assert_eq!(triple.planes.len(), 3);
        assert_eq!(triple.field.ext_degree() % 3, 0);
    }

    #[test]
    fn multiplicities_along_centers() {
        let (a, k) = p3();
        let f = family_2_24(4);
        let x0 = DvrPolynomial::var(&a, &k, "x0");
        let plane = Center::plane(x0.clone()).unwrap();
        assert_eq!(generic_multiplicity_along_plane(&f, &plane).unwrap(), 1);
        // F = x3^2 x0 + t x3 G + t^2 H along plane x3 = 0 -> 2
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let t = DvrPolynomial::t(&a, &k);
        let g = x3.pow(2).mul(&x0).add(&t.mul(&x3).mul(&x1.pow(2))).add(&t.pow(2).mul(&x1.pow(3)));
        let plane3 = Center::plane(x3.clone()).unwrap();
        assert_eq!(generic_multiplicity_along_plane(&g, &plane3).unwrap(), 2);
        // line x0 = x1 = 0 on the 2.24 member
        let line = Center::line(x0.clone(), x1.clone()).unwrap();
        assert_eq!(generic_multiplicity_along_line(&f, &line).unwrap(), 1);
        // mu = 3 along a line: x2^3 + t x2^2 x0
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let h = x2.pow(3).add(&t.mul(&x2.pow(2)).mul(&x0));
        let line2 = Center::line(x2.clone(), x0.clone()).unwrap();
        assert_eq!(generic_multiplicity_along_line(&h, &line2).unwrap(), 3);
    }

    #[test]
    fn point_multiplicity_on_tangent_cone_family() {
        let (_, k) = p3();
        let f = family_2_24(4);
        let pt = [k.zero(), k.zero(), k.zero(), k.one()];
        assert_eq!(multiplicity_at_point(&f, &pt).unwrap(), 2);
        // cone over three planes with a t-term: multiplicity 3 at the vertex
        let (a, _) = p3();
        let x0 = DvrPolynomial::var(&a, &k, "x0");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let t = DvrPolynomial::t(&a, &k);
        // the t-term controls the order: with t^2 the vertex has order 2,
        // with t^3 the full cone multiplicity 3 shows through
        let g2 = x0.mul(&x1).mul(&x2).add(&t.pow(2).mul(&x3.pow(3)));
        assert_eq!(multiplicity_at_point(&g2, &pt).unwrap(), 2);
        let g3 = x0.mul(&x1).mul(&x2).add(&t.pow(3).mul(&x3.pow(3)));
        assert_eq!(multiplicity_at_point(&g3, &pt).unwrap(), 3);
    }

    #[test]
    fn singular_locus_of_tangent_cone_family() {
        let f = family_2_24(4);
        match singular_locus(&f, 3).unwrap() {
            SingularLocus::IsolatedPoints(pts) => {
                assert_eq!(pts.len(), 1);
                let p = &pts[0];
                assert!(p.is_rational());
                // (0:0:0:1)
                let k = p.field.clone();
                assert!(k.is_zero(&p.coords[0]));
                assert!(k.is_zero(&p.coords[1]));
                assert!(k.is_zero(&p.coords[2]));
                assert!(!k.is_zero(&p.coords[3]));
            }
            other => panic!("expected isolated points, got {other:?}"),
        }
    }

    #[test]
    fn smooth_model_has_empty_singular_locus() {
        let (a, k) = p3();
        let f = ["x0", "x1", "x2", "x3"]
            .iter()
            .map(|v| DvrPolynomial::var(&a, &k, v).pow(3))
            .reduce(|p, q| p.add(&q))
            .unwrap();
        match singular_locus(&f, 3).unwrap() {
            SingularLocus::IsolatedPoints(pts) => assert!(pts.is_empty()),
            other => panic!("expected no singular points, got {other:?}"),
        }
    }

    #[test]
    fn quartic_cases() {
        let a = AmbientSpace::wp2111();
        let k = Field::rationals();
        let u = DvrPolynomial::var(&a, &k, "u");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        // u(u+Q)
        let q = x1.mul(&x2).add(&x3.pow(2));
        let f1 = u.mul(&u.add(&q));
        assert_eq!(quartic_normal_form(&f1, 1).unwrap().case, QuarticCase::UFactor);
        // (x1^2 - x2 x3) * S2
        let s1 = x1.pow(2).sub(&x2.mul(&x3));
        let s2 = x1.pow(2).add(&x2.pow(2)).add(&x1.mul(&x3)).sub(&x3.pow(2));
        let f2 = s1.mul(&s2);
        assert_eq!(
            quartic_normal_form(&f2, 1).unwrap().case,
            QuarticCase::ConicPair { conjugate: false }
        );
        // u^2 + x1^2 Q
        let f3 = u.pow(2).add(&x1.pow(2).mul(&q));
        assert_eq!(quartic_normal_form(&f3, 1).unwrap().case, QuarticCase::GorensteinSquareLine);
        // x1 * (u*x2 + cubic)
        let f4 = x1.mul(&u.mul(&x2).add(&x3.pow(3)).add(&x2.pow(3)));
        assert_eq!(quartic_normal_form(&f4, 1).unwrap().case, QuarticCase::LinearFactor);
        // smooth: u^2 + x1^4 + x2^4 + x3^4
        let f5 = u.pow(2).add(&x1.pow(4)).add(&x2.pow(4)).add(&x3.pow(4));
        assert_eq!(quartic_normal_form(&f5, 1).unwrap().case, QuarticCase::Normal);
    }

    #[test]
    fn axial_multiplicity_cases() {
        let a = AmbientSpace::wp2111();
        let k = Field::rationals();
        let u = DvrPolynomial::var(&a, &k, "u");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        let x2 = DvrPolynomial::var(&a, &k, "x2");
        let x3 = DvrPolynomial::var(&a, &k, "x3");
        let t = DvrPolynomial::t(&a, &k);
        let g = x1.pow(4).add(&x2.pow(4)).add(&x3.pow(4));
        let f0 = u.pow(2).add(&g);
        assert_eq!(axial_multiplicity(&f0, 12).unwrap(), AxialMultiplicity::Finite(0));
        let s1 = x1.pow(2).sub(&x2.mul(&x3));
        let s2 = x1.pow(2).add(&x2.mul(&x3));
        let f1 = s1.mul(&s2).add(&u.pow(2).mul(&t)).add(&t.mul(&g));
        assert_eq!(axial_multiplicity(&f1, 12).unwrap(), AxialMultiplicity::Finite(1));
        let f_inf = s1.mul(&s2).add(&t.mul(&g));
        assert_eq!(
            axial_multiplicity(&f_inf, 12).unwrap(),
            AxialMultiplicity::Infinite { truncation: 12 }
        );
    }


    fn norm_form_exceptional_fixture() -> DvrPolynomial {
        // fiber: the norm form of x1 + c x2 + c^2 x3 (c^3 = 2), a cone over
        // three conjugate planes meeting along C; the t-term lies in the
        // ideal of C, and the t^2-term drops the multiplicity at the triple
        // point (1:0:0:0) to two.
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
        norm.add(&t.mul(&x0).mul(&conic))
            .add(&t.pow(2).mul(&x0.pow(3)))
            .add(&t.pow(3).mul(&x0).mul(&x1).mul(&x2))
    }

    #[test]
    fn exceptional_fixture_detected() {
        let f = norm_form_exceptional_fixture();
        let e = exceptional_pattern_check(&f, 5).unwrap();
        for (name, ok) in &e.clauses {
            eprintln!("clause: {name} -> {ok}");
        }
        assert!(e.is_exceptional);
    }

    #[test]
    fn exceptional_pattern_negative_on_standard_fixture() {
        let f = family_2_24(1);
        let e = exceptional_pattern_check(&f, 5).unwrap();
        assert!(!e.is_exceptional);
        // plane + quadric fiber: the 2-plane is over k, so clause 1 fails
        assert!(!e.clauses[0].1);
    }
}

//! Exact solving of small polynomial systems (<= 3 unknowns, low degree) by
//! resultant elimination and back-substitution, with roots taken in algebraic
//! extensions when needed. Everything is verified by evaluation, so the
//! randomized retries can never produce a wrong point.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ambient::Ambient;
use crate::error::KernelError;
use crate::polyring::factor::divide_exact;
use crate::polyring::field::{Field, Scalar};
use crate::polyring::poly::DvrPolynomial;
use crate::polyring::uni::{self, FieldEmbedding, UPoly};

/// An affine point with coordinates in an extension of the base field.
#[derive(Clone, Debug)]
pub struct ExtPoint {
    pub field: Field,
    pub embed: FieldEmbedding,
    pub coords: Vec<Scalar>,
}

impl ExtPoint {
    pub fn is_rational(&self) -> bool {
        self.coords.iter().all(|c| !matches!(c, Scalar::Ext(_)))
    }

    pub fn describe(&self, names: &[String]) -> String {
        let parts: Vec<String> = names
            .iter()
            .zip(&self.coords)
            .map(|(n, c)| format!("{n} = {}", self.field.scalar_string(c)))
            .collect();
        let mut s = format!("({})", parts.join(", "));
        if let Some(e) = self.field.ext() {
            let mp: Vec<String> = e.minpoly.iter().map(|c| self.field.base_field().scalar_string(c)).collect();
            s.push_str(&format!(" where {} has minimal polynomial [{}]", e.name, mp.join(", ")));
        }
        s
    }
}

#[derive(Debug)]
pub enum SolveOutcome {
    Finite(Vec<ExtPoint>),
    PositiveDim(String),
    Undecided(String),
}

/// Resultant of f and g with respect to one variable, by fraction-free
/// Bareiss elimination of the Sylvester matrix over the polynomial ring.
pub fn resultant_var(
    f: &DvrPolynomial,
    g: &DvrPolynomial,
    var: &str,
) -> Result<DvrPolynomial, KernelError> {
    let k = f.field.clone();
    let ambient = f.ambient.clone();
    let fc = f.coefficients_in(var);
    let gc = g.coefficients_in(var);
    let m = fc.len() - 1;
    let n = gc.len() - 1;
    if m == 0 {
        return Ok(fc[0].pow(n as u32));
    }
    if n == 0 {
        return Ok(gc[0].pow(m as u32));
    }
    let size = m + n;
    let zero = DvrPolynomial::zero(&ambient, &k);
    let mut mat = vec![vec![zero.clone(); size]; size];
    for i in 0..n {
        for (j, c) in fc.iter().enumerate() {
            mat[i][i + (m - j)] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in gc.iter().enumerate() {
            mat[n + i][i + (n - j)] = c.clone();
        }
    }
    // Bareiss
    let mut denom = DvrPolynomial::one(&ambient, &k);
    let mut sign = false;
    for p in 0..size - 1 {
        if mat[p][p].is_zero() {
            let swap = (p + 1..size).find(|&r| !mat[r][p].is_zero());
            match swap {
                Some(r) => {
                    mat.swap(p, r);
                    sign = !sign;
                }
                None => return Ok(zero),
            }
        }
        for i in p + 1..size {
            for j in p + 1..size {
                let a = mat[p][p].mul(&mat[i][j]);
                let b = mat[i][p].mul(&mat[p][j]);
                let num = a.sub(&b);
                mat[i][j] = if num.is_zero() {
                    zero.clone()
                } else {
                    divide_exact(&num, &denom)
                        .ok_or_else(|| KernelError::geometry("bareiss division not exact"))?
                };
            }
            mat[i][p] = zero.clone();
        }
        denom = mat[p][p].clone();
    }
    let mut det = mat[size - 1][size - 1].clone();
    if sign {
        det = det.neg();
    }
    Ok(det)
}

fn to_uni_in(f: &DvrPolynomial, var: &str) -> UPoly {
    let k = &f.field;
    let coeffs = f.coefficients_in(var);
    let out: Vec<Scalar> = coeffs
        .iter()
        .map(|c| {
            debug_assert!(c.total_geo_degree() == 0 && c.max_t_exp() == 0);
            c.leading().map(|(_, s)| s.clone()).unwrap_or_else(|| k.zero())
        })
        .collect();
    uni::normalized(k, out)
}

/// Solve a t-free system in the named variables. Points are verified against
/// every equation; extensions are introduced as needed (tower cap applies).
pub fn solve_affine(
    polys: &[DvrPolynomial],
    vars: &[String],
    seed: u64,
) -> Result<SolveOutcome, KernelError> {
    if polys.is_empty() {
        return Ok(SolveOutcome::PositiveDim("no equations".into()));
    }
    let base = polys[0].field.clone();
    match solve_rec(&base, polys, vars, true) {
        Ok(out) => Ok(out),
        Err(KernelError::Undecided(_)) => {
            // retry under random linear changes of the unknowns
            let ambient = polys[0].ambient.clone();
            for attempt in 0..4u64 {
                let mut rng = StdRng::seed_from_u64(seed ^ (0x50_1e ^ attempt.wrapping_mul(0x9e37)));
                let change = random_var_change(&ambient, &base, vars, &mut rng);
                let Some((fwd, back)) = change else { continue };
                let moved: Vec<DvrPolynomial> =
                    polys.iter().map(|p| p.substitute_many(&fwd)).collect();
                if let Ok(out) = solve_rec(&base, &moved, vars, true) {
                    return Ok(map_points_back(out, &back, vars));
                }
            }
            Ok(SolveOutcome::Undecided("elimination degenerated under retries".into()))
        }
        Err(e) => Err(e),
    }
}

fn random_var_change(
    ambient: &Ambient,
    k: &Field,
    vars: &[String],
    rng: &mut StdRng,
) -> Option<(Vec<(String, DvrPolynomial)>, Vec<Vec<Scalar>>)> {
    // unit upper-triangular mix of the unknowns; returns the forward
    // substitution and the matrix (for mapping points back)
    let n = vars.len();
    if n < 2 {
        return None;
    }
    let mut mat = vec![vec![k.zero(); n]; n];
    for i in 0..n {
        mat[i][i] = k.one();
        for j in i + 1..n {
            mat[i][j] = k.from_i64(rng.gen_range(-2..=2));
        }
    }
    let mut fwd = vec![];
    for (i, v) in vars.iter().enumerate() {
        let mut p = DvrPolynomial::zero(ambient, k);
        for (j, w) in vars.iter().enumerate() {
            if !k.is_zero(&mat[i][j]) {
                p = p.add(&DvrPolynomial::var(ambient, k, w).scale(&mat[i][j]));
            }
        }
        fwd.push((v.clone(), p));
    }
    Some((fwd, mat))
}

fn map_points_back(out: SolveOutcome, mat: &[Vec<Scalar>], vars: &[String]) -> SolveOutcome {
    // zeros of F(A x) are A^{-1} zeros(F)... we solved G = F∘A, so original
    // zeros are A * (solved points).
    let n = vars.len();
    match out {
        SolveOutcome::Finite(pts) => SolveOutcome::Finite(
            pts.into_iter()
                .map(|p| {
                    let k = p.field.clone();
                    let coords: Vec<Scalar> = (0..n)
                        .map(|i| {
                            let mut acc = k.zero();
                            for (j, c) in p.coords.iter().enumerate() {
                                let m = k.lift(&mat[i][j]);
                                acc = k.add(&acc, &k.mul(&m, c));
                            }
                            acc
                        })
                        .collect();
                    ExtPoint { field: p.field, embed: p.embed, coords }
                })
                .collect(),
        ),
        other => other,
    }
}

/// `original` marks systems made of the caller's actual equations; only for
/// those is a positive-dimension verdict sound. Resultant-derived systems can
/// vanish spuriously, so degeneracy there surfaces as Undecided (and the
/// caller retries under a random change of variables).
fn solve_rec(
    k: &Field,
    polys: &[DvrPolynomial],
    vars: &[String],
    original: bool,
) -> Result<SolveOutcome, KernelError> {
    let k = k.clone();
    let live: Vec<&DvrPolynomial> = polys.iter().filter(|p| !p.is_zero()).collect();
    if live.iter().any(|p| p.total_geo_degree() == 0) {
        return Ok(SolveOutcome::Finite(vec![]));
    }
    if live.is_empty() {
        return if vars.is_empty() {
            Ok(SolveOutcome::Finite(vec![ExtPoint {
                field: k.clone(),
                embed: FieldEmbedding::identity(&k),
                coords: vec![],
            }]))
        } else if original {
            Ok(SolveOutcome::PositiveDim("all equations vanish".into()))
        } else {
            Err(KernelError::Undecided("derived system vanished".into()))
        };
    }
    if vars.is_empty() {
        return Ok(SolveOutcome::Finite(vec![]));
    }
    // substitute away a linear equation first: keeps resultant degrees down
    if let Some(out) = try_linear_substitution(&k, &live, vars, original)? {
        return Ok(out);
    }
    let var = vars.last().unwrap().clone();
    let rest_vars = &vars[..vars.len() - 1];
    if rest_vars.is_empty() {
        // univariate: gcd of all equations
        let mut g: UPoly = vec![];
        for p in &live {
            let up = to_uni_in(p, &var);
            g = if g.is_empty() { up } else { uni::gcd(&k, &g, &up)? };
        }
        if g.is_empty() {
            return if original {
                Ok(SolveOutcome::PositiveDim("univariate system vanished".into()))
            } else {
                Err(KernelError::Undecided("derived univariate system vanished".into()))
            };
        }
        if g.len() == 1 {
            return Ok(SolveOutcome::Finite(vec![]));
        }
        let split = uni::splitting_roots(&k, &g, "r")?;
        let pts = split
            .roots
            .into_iter()
            .map(|(r, _)| ExtPoint {
                field: split.field.clone(),
                embed: split.embed.clone(),
                coords: vec![r],
            })
            .collect();
        return Ok(SolveOutcome::Finite(pts));
    }
    let (with_v, without_v): (Vec<&DvrPolynomial>, Vec<&DvrPolynomial>) =
        live.iter().partition(|p| p.degree_in(&var) > 0);
    if with_v.is_empty() {
        // v is free; the fiber over any solution of the rest is infinite
        let sub = solve_rec(
            &k,
            &without_v.iter().map(|p| (*p).clone()).collect::<Vec<_>>(),
            rest_vars,
            original,
        )?;
        return match sub {
            SolveOutcome::Finite(pts) if pts.is_empty() => Ok(SolveOutcome::Finite(vec![])),
            SolveOutcome::Finite(_) if original => {
                Ok(SolveOutcome::PositiveDim(format!("{var} is unconstrained")))
            }
            SolveOutcome::Finite(_) => {
                Err(KernelError::Undecided(format!("{var} free in a derived system")))
            }
            other => Ok(other),
        };
    }
    // derived system: resultants against a lowest-degree pivot + v-free
    // equations (pairing every equation with one pivot keeps the projection
    // complete while controlling degree growth)
    let mut derived: Vec<DvrPolynomial> = without_v.iter().map(|p| (*p).clone()).collect();
    if with_v.len() == 1 && derived.is_empty() {
        return Err(KernelError::Undecided(
            "single equation with a free variable block".into(),
        ));
    }
    let mut ordered: Vec<&DvrPolynomial> = with_v.clone();
    ordered.sort_by_key(|p| (p.degree_in(&var), p.total_geo_degree(), p.num_terms()));
    let pivot = ordered[0];
    for q in ordered.iter().skip(1) {
        let r = resultant_var(pivot, q, &var)?;
        if !r.is_zero() {
            derived.push(r);
        }
    }
    if derived.is_empty() {
        return Err(KernelError::Undecided("all resultants vanished".into()));
    }
    let sub = solve_rec(&k, &derived, rest_vars, false)?;
    let partials = match sub {
        SolveOutcome::Finite(pts) => pts,
        other => return Ok(other),
    };
    let mut out: Vec<ExtPoint> = vec![];
    for p in partials {
        let kk = p.field.clone();
        // substitute the partial point, collect univariates in v
        let mut g: UPoly = vec![];
        let mut all_zero = true;
        for q in &live {
            let q_l = q.map_field(&p.embed);
            let spec = substitute_point_partial(&q_l, rest_vars, &p.coords);
            let up = to_uni_in(&spec, &var);
            if !up.is_empty() {
                all_zero = false;
                g = if g.is_empty() { up } else { uni::gcd(&kk, &g, &up)? };
            }
        }
        if all_zero {
            if original {
                return Ok(SolveOutcome::PositiveDim(format!(
                    "{var} unconstrained over a partial solution"
                )));
            }
            return Err(KernelError::Undecided(format!(
                "{var} unconstrained over a partial solution of a derived system"
            )));
        }
        if g.len() <= 1 {
            continue; // inconsistent at this partial point
        }
        let split = uni::splitting_roots(&kk, &g, "s")?;
        for (r, _) in split.roots {
            let coords: Vec<Scalar> =
                p.coords.iter().map(|c| split.embed.map(c)).chain([r.clone()]).collect();
            let embed = FieldEmbedding::compose(&p.embed, &split.embed);
            let cand = ExtPoint { field: split.field.clone(), embed, coords };
            // verify on all original equations
            let ok = polys.iter().all(|q| {
                let q_l = q.map_field(&cand.embed);
                let val = eval_at(&q_l, vars, &cand.coords);
                cand.field.is_zero(&val)
            });
            if ok {
                out.push(cand);
            }
        }
    }
    Ok(SolveOutcome::Finite(out))
}

/// Substitute away one affine-linear equation: solve it for a variable and
/// eliminate that variable from the system. Sound for both the original and
/// derived systems since the solution sets correspond exactly.
fn try_linear_substitution(
    k: &Field,
    live: &[&DvrPolynomial],
    vars: &[String],
    original: bool,
) -> Result<Option<SolveOutcome>, KernelError> {
    let Some(lin) = live.iter().find(|p| p.total_geo_degree() == 1) else {
        return Ok(None);
    };
    let k = k.clone();
    let Some((i, var)) = vars.iter().enumerate().find(|(_, v)| lin.degree_in(v) > 0) else {
        return Ok(None);
    };
    let coeffs = lin.coefficients_in(var);
    let c = coeffs[1]
        .leading()
        .map(|(_, s)| s.clone())
        .expect("linear coefficient present");
    let value = coeffs[0].scale(&k.neg(&k.inv(&c)?));
    let lin_ptr = *lin as *const DvrPolynomial;
    let reduced: Vec<DvrPolynomial> = live
        .iter()
        .filter(|p| **p as *const DvrPolynomial != lin_ptr)
        .map(|p| p.substitute(var, &value))
        .collect();
    let sub_vars: Vec<String> =
        vars.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
    let sub = solve_rec(&k, &reduced, &sub_vars, original)?;
    match sub {
        SolveOutcome::Finite(pts) => {
            let mut out = vec![];
            for p in pts {
                let kk = p.field.clone();
                let value_l = value.map_field(&p.embed);
                let vval = eval_at(&value_l, &sub_vars, &p.coords);
                let mut coords = Vec::with_capacity(vars.len());
                let mut it = p.coords.iter();
                for j in 0..vars.len() {
                    if j == i {
                        coords.push(vval.clone());
                    } else {
                        coords.push(it.next().unwrap().clone());
                    }
                }
                let _ = kk;
                out.push(ExtPoint { field: p.field, embed: p.embed, coords });
            }
            Ok(Some(SolveOutcome::Finite(out)))
        }
        other => Ok(Some(other)),
    }
}

fn substitute_point_partial(
    f: &DvrPolynomial,
    vars: &[String],
    coords: &[Scalar],
) -> DvrPolynomial {
    let k = f.field.clone();
    let subs: Vec<(String, DvrPolynomial)> = vars
        .iter()
        .zip(coords)
        .map(|(v, c)| (v.clone(), DvrPolynomial::constant(&f.ambient, &k, c.clone())))
        .collect();
    f.substitute_many(&subs)
}

pub fn eval_at(f: &DvrPolynomial, vars: &[String], coords: &[Scalar]) -> Scalar {
    let k = f.field.clone();
    let spec = substitute_point_partial(f, vars, coords);
    debug_assert!(spec.total_geo_degree() <= 0);
    spec.leading().map(|(_, c)| c.clone()).unwrap_or_else(|| k.zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientSpace;

    #[test]
    fn solve_two_conics() {
        let a = AmbientSpace::affine(&["x", "y"]);
        let k = Field::rationals();
        let x = DvrPolynomial::var(&a, &k, "x");
        let y = DvrPolynomial::var(&a, &k, "y");
        // x^2 + y^2 - 5 = 0, x - y - 1 = 0 -> (2,1), (-1,-2)
        let f = x.pow(2).add(&y.pow(2)).sub(&DvrPolynomial::int(&a, &k, 5));
        let g = x.sub(&y).sub(&DvrPolynomial::int(&a, &k, 1));
        let out = solve_affine(&[f, g], &["x".into(), "y".into()], 1).unwrap();
        match out {
            SolveOutcome::Finite(pts) => {
                assert_eq!(pts.len(), 2);
                for p in &pts {
                    assert!(p.is_rational());
                }
            }
            other => panic!("expected finite: {other:?}"),
        }
    }

    #[test]
    fn solve_with_extension_roots() {
        let a = AmbientSpace::affine(&["x", "y"]);
        let k = Field::rationals();
        let x = DvrPolynomial::var(&a, &k, "x");
        let y = DvrPolynomial::var(&a, &k, "y");
        // x^2 - 2 = 0, y - x = 0 -> two conjugate points over Q(sqrt 2)
        let f = x.pow(2).sub(&DvrPolynomial::int(&a, &k, 2));
        let g = y.sub(&x);
        let out = solve_affine(&[f, g], &["x".into(), "y".into()], 1).unwrap();
        match out {
            SolveOutcome::Finite(pts) => {
                assert_eq!(pts.len(), 2);
                for p in &pts {
                    assert!(!p.is_rational());
                    assert_eq!(p.field.ext_degree(), 2);
                }
            }
            other => panic!("expected finite: {other:?}"),
        }
    }

    #[test]
    fn positive_dimension_detected() {
        let a = AmbientSpace::affine(&["x", "y"]);
        let k = Field::rationals();
        let x = DvrPolynomial::var(&a, &k, "x");
        // single equation x = 0 in two unknowns: y free
        let out = solve_affine(&[x.clone()], &["x".into(), "y".into()], 1).unwrap();
        assert!(matches!(out, SolveOutcome::PositiveDim(_)));
    }

    #[test]
    fn inconsistent_system_is_empty() {
        let a = AmbientSpace::affine(&["x"]);
        let k = Field::rationals();
        let x = DvrPolynomial::var(&a, &k, "x");
        let f = x.pow(2).sub(&DvrPolynomial::int(&a, &k, 1));
        let g = x.sub(&DvrPolynomial::int(&a, &k, 3));
        let out = solve_affine(&[f, g], &["x".into()], 1).unwrap();
        match out {
            SolveOutcome::Finite(pts) => assert!(pts.is_empty()),
            other => panic!("expected empty: {other:?}"),
        }
    }
}

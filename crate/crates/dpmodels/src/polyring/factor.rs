//! Factorization of t-free forms of degree <= 4 in <= 4 variables over the
//! residue field, the exact scope the geometry needs: plane/line extraction,
//! quadric rank analysis, perfect squares, and the conic-pair split of
//! quartics. Linear factors over extensions (conjugate components) come from
//! the same machinery run over the extended field.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ambient::Ambient;
use crate::error::KernelError;

use super::field::{Field, Scalar};
use super::linalg::Mat;
use super::poly::{DvrPolynomial, Monomial};
use super::uni::{self, UPoly};

/// Exact division: Some(q) with f = q*g, None when not divisible.
pub fn divide_exact(f: &DvrPolynomial, g: &DvrPolynomial) -> Option<DvrPolynomial> {
    if g.is_zero() {
        return None;
    }
    let k = f.field.clone();
    let mut rem = f.clone();
    let mut quot = DvrPolynomial::zero(&f.ambient, &k);
    let (gm, gc) = g.leading().unwrap().clone();
    while !rem.is_zero() {
        let (rm, rc) = rem.leading().unwrap().clone();
        if !gm.divides(&rm) {
            return None;
        }
        let qm = rm.div(&gm);
        let qc = k.div(&rc, &gc).ok()?;
        let t = DvrPolynomial::from_terms(&f.ambient, &k, vec![(qm, qc)]);
        quot = quot.add(&t);
        rem = rem.sub(&t.mul(g));
    }
    Some(quot)
}

/// Test whether a scalar is a square in k; returns a square root when so.
pub fn sqrt_scalar(k: &Field, c: &Scalar) -> Result<Option<Scalar>, KernelError> {
    if k.is_zero(c) {
        return Ok(Some(k.zero()));
    }
    let poly: UPoly = vec![k.neg(c), k.zero(), k.one()];
    Ok(uni::any_root_in_field(k, &poly)?)
}

/// Square root of a form: Some(h) with f = h^2.
pub fn form_sqrt(f: &DvrPolynomial) -> Result<Option<DvrPolynomial>, KernelError> {
    if f.is_zero() {
        return Ok(Some(f.clone()));
    }
    let k = f.field.clone();
    let (lm, lc) = f.leading().unwrap().clone();
    if lm.exps.iter().any(|e| e % 2 != 0) {
        return Ok(None);
    }
    let Some(root_c) = sqrt_scalar(&k, &lc)? else {
        return Ok(None);
    };
    let half = Monomial { exps: lm.exps.iter().map(|e| e / 2).collect() };
    let mut h = DvrPolynomial::from_terms(&f.ambient, &k, vec![(half, root_c)]);
    let two = k.from_i64(2);
    loop {
        let r = f.sub(&h.mul(&h));
        if r.is_zero() {
            return Ok(Some(h));
        }
        let (rm, rc) = r.leading().unwrap().clone();
        let (hm, hc) = h.leading().unwrap().clone();
        if !hm.divides(&rm) {
            return Ok(None);
        }
        let nm = rm.div(&hm);
        let nc = k.div(&rc, &k.mul(&two, &hc)).map_err(|_| KernelError::DivisionByZero)?;
        let term = DvrPolynomial::from_terms(&f.ambient, &k, vec![(nm.clone(), nc)]);
        // the new term must come strictly below the current leading term
        if h.leading().map(|(m, _)| nm.cmp_graded(m) != std::cmp::Ordering::Less).unwrap_or(true) {
            return Ok(None);
        }
        h = h.add(&term);
    }
}

/// Variables actually appearing in f.
pub fn support(f: &DvrPolynomial) -> Vec<usize> {
    let n = f.ambient.nvars();
    let mut seen = vec![false; n];
    for (m, _) in f.terms() {
        for (i, s) in seen.iter_mut().enumerate() {
            if m.exps[i] > 0 {
                *s = true;
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

fn linear_form(ambient: &Ambient, k: &Field, coeffs: &[(usize, Scalar)]) -> DvrPolynomial {
    let n = ambient.nvars();
    let terms = coeffs
        .iter()
        .filter(|(_, c)| !k.is_zero(c))
        .map(|(i, c)| {
            let mut m = Monomial::unit(n);
            m.exps[*i] = 1;
            (m, c.clone())
        })
        .collect();
    DvrPolynomial::from_terms(ambient, k, terms)
}

/// Normalize a linear form so its first nonzero coefficient is 1.
pub fn normalize_linear(l: &DvrPolynomial) -> DvrPolynomial {
    let k = &l.field;
    for i in 0..l.ambient.nvars() {
        let mut m = Monomial::unit(l.ambient.nvars());
        m.exps[i] = 1;
        if let Some((_, c)) = l.terms().iter().find(|(mm, _)| *mm == m) {
            let inv = k.inv(c).expect("nonzero leading coefficient");
            return l.scale(&inv);
        }
    }
    l.clone()
}

/// All k-rational linear factors of a t-free form in weight-1 variables,
/// with multiplicity, plus the residual cofactor.
///
/// Strategy: restrict to three generic parameter planes, factor the binary
/// restrictions, and lift compatible combinations through a linear system;
/// candidates are verified by exact division, with seeded retries on
/// degenerate plane choices.
pub fn linear_factors(
    f: &DvrPolynomial,
    seed: u64,
) -> Result<(Vec<(DvrPolynomial, usize)>, DvrPolynomial), KernelError> {
    let k = f.field.clone();
    let mut rest = f.clone();
    let mut found: Vec<(DvrPolynomial, usize)> = vec![];
    loop {
        if rest.total_geo_degree() < 1 {
            break;
        }
        let sup = support(&rest);
        if sup.is_empty() {
            break;
        }
        let candidate: Option<DvrPolynomial> = if sup.len() == 1 {
            // power of one variable: x_i itself divides
            let l = linear_form(&rest.ambient, &k, &[(sup[0], k.one())]);
            divide_exact(&rest, &l).map(|_| l)
        } else if rest.total_geo_degree() == 1 {
            Some(rest.clone())
        } else {
            one_linear_factor(&rest, seed)?.map(|(l, _)| l)
        };
        match candidate {
            Some(l) => {
                let l = normalize_linear(&l);
                let q = divide_exact(&rest, &l).expect("verified divisor");
                if let Some(entry) = found.iter_mut().find(|(g, _)| *g == l) {
                    entry.1 += 1;
                } else {
                    found.push((l, 1));
                }
                rest = q;
            }
            None => break,
        }
    }
    Ok((found, rest))
}

/// Find one linear factor of a multi-variable form, if any.
fn one_linear_factor(
    f: &DvrPolynomial,
    seed: u64,
) -> Result<Option<(DvrPolynomial, DvrPolynomial)>, KernelError> {
    let k = f.field.clone();
    let sup = support(f);
    if sup.len() < 2 {
        return Ok(None);
    }
    for attempt in 0..6u64 {
        let mut rng = StdRng::seed_from_u64(seed ^ (attempt.wrapping_mul(0x9e37_79b9)));
        // three parameter planes x_i = a_i s + b_i w
        let mut planes = vec![];
        for _ in 0..3 {
            let coefs: Vec<(Scalar, Scalar)> = (0..f.ambient.nvars())
                .map(|_| (k.from_i64(rng.gen_range(-4..=4)), k.from_i64(rng.gen_range(-4..=4))))
                .collect();
            planes.push(coefs);
        }
        let mut restrictions = vec![];
        let mut degenerate = false;
        for coefs in &planes {
            let b = restrict_form_to_plane(f, coefs);
            match b {
                Some(bin) if bin.len() == f.total_geo_degree() as usize + 1 => {
                    restrictions.push(bin)
                }
                _ => {
                    degenerate = true;
                    break;
                }
            }
        }
        if degenerate {
            continue;
        }
        // factor each binary restriction over k (as univariate in s after
        // dehomogenizing w = 1, plus the possible factor s = infinity)
        let mut factor_sets: Vec<Vec<(Scalar, Scalar)>> = vec![]; // (beta, gamma): beta*s + gamma*w
        for bin in &restrictions {
            let mut lines = vec![];
            // w | bin? only when the top coefficient vanishes, which we
            // excluded by requiring full length; roots of bin(s, 1):
            let uni_poly: UPoly = bin.clone();
            let roots = uni::roots_in_field(&k, &uni_poly)?;
            for (r, _) in roots {
                lines.push((k.one(), k.neg(&r))); // s - r  (beta=1, gamma=-r)
            }
            factor_sets.push(lines);
        }
        if factor_sets.iter().any(|s| s.is_empty()) {
            // no k-linear factor visible on some plane: if f had one, the
            // restriction would show it (planes are in general position)
            return Ok(None);
        }
        // try all combinations
        for l1 in &factor_sets[0] {
            for l2 in &factor_sets[1] {
                for l3 in &factor_sets[2] {
                    if let Some(l) = lift_linear(f, &planes, &[l1, l2, l3]) {
                        if let Some(q) = divide_exact(f, &l) {
                            return Ok(Some((l, q)));
                        }
                    }
                }
            }
        }
        // combinations failed; retry with new planes
    }
    Ok(None)
}

/// Restrict a form to x_i = a_i s + b_i w; returns coefficients of s^j w^(d-j)
/// low-to-high in s, or None if it vanishes.
fn restrict_form_to_plane(
    f: &DvrPolynomial,
    coefs: &[(Scalar, Scalar)],
) -> Option<Vec<Scalar>> {
    let k = &f.field;
    let d = f.total_geo_degree() as usize;
    let mut out = vec![k.zero(); d + 1];
    for (m, c) in f.terms() {
        if m.t_exp() != 0 {
            return None;
        }
        // expand prod (a_i s + b_i w)^{e_i}
        let mut poly = vec![k.one()]; // in s, degree j coeff of s^j w^{..}
        for (i, &e) in m.exps[..m.nvars()].iter().enumerate() {
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
            out[j] = k.add(&out[j], &t);
        }
    }
    while out.last().map(|c| k.is_zero(c)).unwrap_or(false) {
        out.pop();
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// Solve for l = sum a_i x_i restricting to the prescribed binary linear form
/// on each plane (up to scale); unique solution up to scale or None.
fn lift_linear(
    f: &DvrPolynomial,
    planes: &[Vec<(Scalar, Scalar)>],
    lines: &[&(Scalar, Scalar)],
) -> Option<DvrPolynomial> {
    let k = &f.field;
    let n = f.ambient.nvars();
    // Unknowns: a_0..a_{n-1}, and scales c_1, c_2, c_3 per plane; equations:
    // restriction of l to plane j equals c_j * (beta_j s + gamma_j w):
    //   sum_i a_i A_{ji} = c_j beta_j ; sum_i a_i B_{ji} = c_j gamma_j.
    let cols = n + planes.len();
    let mut rows = vec![];
    for (j, coefs) in planes.iter().enumerate() {
        let (beta, gamma) = lines[j];
        let mut r1 = vec![k.zero(); cols];
        let mut r2 = vec![k.zero(); cols];
        for i in 0..n {
            r1[i] = coefs[i].0.clone();
            r2[i] = coefs[i].1.clone();
        }
        r1[n + j] = k.neg(beta);
        r2[n + j] = k.neg(gamma);
        rows.push(r1);
        rows.push(r2);
    }
    let mat = Mat::new(rows);
    let ns = mat.nullspace(k);
    if ns.len() != 1 {
        return None;
    }
    let v = &ns[0];
    let coeffs: Vec<(usize, Scalar)> = (0..n).map(|i| (i, v[i].clone())).collect();
    let l = linear_form(&f.ambient, k, &coeffs);
    if l.is_zero() {
        None
    } else {
        Some(normalize_linear(&l))
    }
}

/// Rank and structure of a t-free quadratic form in weight-1 variables.
pub struct QuadraticForm {
    pub rank: usize,
    /// Some((l, c)) when rank 1 and F = c*l^2.
    pub square: Option<(DvrPolynomial, Scalar)>,
    /// Some((l1, l2, c)) when rank 2 and split over k: F = c*l1*l2.
    pub split: Option<(DvrPolynomial, DvrPolynomial, Scalar)>,
    /// Rank-2 discriminant class when not split (extension needed).
    pub nonsplit_disc: Option<Scalar>,
}

pub fn analyze_quadratic_form(f: &DvrPolynomial) -> Result<QuadraticForm, KernelError> {
    let k = f.field.clone();
    let n = f.ambient.nvars();
    // Gram matrix (ch != 2, 3 guaranteed by field constructors).
    let half = k.inv(&k.from_i64(2))?;
    let mut gram = vec![vec![k.zero(); n]; n];
    for (m, c) in f.terms() {
        if m.t_exp() != 0 || m.geo_degree() != 2 {
            return Err(KernelError::geometry("not a quadratic form"));
        }
        let idxs: Vec<usize> = (0..n)
            .flat_map(|i| std::iter::repeat(i).take(m.exps[i] as usize))
            .collect();
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
    let mut out = QuadraticForm { rank, square: None, split: None, nonsplit_disc: None };
    match rank {
        0 | 3 | 4 => {}
        1 => {
            // F = c * l^2 with l read off a nonzero diagonal row.
            let j = (0..n)
                .find(|&j| !k.is_zero(&gram[j][j]))
                .expect("rank-1 symmetric matrix has a nonzero diagonal");
            let c = gram[j][j].clone();
            let inv = k.inv(&c)?;
            let coeffs: Vec<(usize, Scalar)> =
                (0..n).map(|i| (i, k.mul(&gram[j][i], &inv))).collect();
            let l = linear_form(&f.ambient, &k, &coeffs);
            debug_assert_eq!(l.mul(&l).scale(&c), *f);
            out.square = Some((l, c));
        }
        2 => {
            // Restrict to a 2-dim complement of the radical and factor the
            // binary quadratic by its discriminant.
            let rad = Mat::new(gram.clone()).nullspace(&k);
            debug_assert_eq!(rad.len(), n - 2);
            // choose two coordinate vectors independent from the radical
            let mut basis: Vec<Vec<Scalar>> = vec![];
            for i in 0..n {
                let mut cand: Vec<Vec<Scalar>> = rad.clone();
                cand.extend(basis.iter().cloned());
                let mut e = vec![k.zero(); n];
                e[i] = k.one();
                cand.push(e.clone());
                let rows: Vec<Vec<Scalar>> = cand;
                if Mat::new(rows.clone()).rank(&k) == rows.len() {
                    basis.push(e);
                }
                if basis.len() == 2 {
                    break;
                }
            }
            let ev = |v: &[Scalar], w: &[Scalar]| -> Scalar {
                let mut acc = k.zero();
                for i in 0..n {
                    for j in 0..n {
                        let t = k.mul(&v[i], &k.mul(&gram[i][j], &w[j]));
                        acc = k.add(&acc, &t);
                    }
                }
                acc
            };
            let a = ev(&basis[0], &basis[0]);
            let b = k.mul(&k.from_i64(2), &ev(&basis[0], &basis[1]));
            let cq = ev(&basis[1], &basis[1]);
            // a s^2 + b s w + c w^2, not identically zero on this plane
            let disc = k.sub(&k.mul(&b, &b), &k.mul(&k.from_i64(4), &k.mul(&a, &cq)));
            if let Some(r) = sqrt_scalar(&k, &disc)? {
                // binary splits: roots (-b ± r) / 2a (a != 0 case) else handle a = 0
                if !k.is_zero(&a) {
                    let inv2a = k.inv(&k.mul(&k.from_i64(2), &a))?;
                    let s1 = k.mul(&k.add(&k.neg(&b), &r), &inv2a);
                    let s2 = k.mul(&k.sub(&k.neg(&b), &r), &inv2a);
                    // a(s - s1 w)(s - s2 w): factors l1 = s - s1 w pulled back
                    let l1 = pullback_binary_linear(f, &gram, &basis, &k.one(), &k.neg(&s1))?;
                    let l2 = pullback_binary_linear(f, &gram, &basis, &k.one(), &k.neg(&s2))?;
                    let (l1, l2) = (normalize_linear(&l1), normalize_linear(&l2));
                    let prod = l1.mul(&l2);
                    let c = leading_ratio(f, &prod)?;
                    out.split = Some((l1, l2, c));
                } else {
                    // a = 0: w | form: factors w and (b s + c w)
                    let l1 = pullback_binary_linear(f, &gram, &basis, &k.zero(), &k.one())?;
                    let l2 = pullback_binary_linear(f, &gram, &basis, &b, &cq)?;
                    let (l1, l2) = (normalize_linear(&l1), normalize_linear(&l2));
                    let prod = l1.mul(&l2);
                    let c = leading_ratio(f, &prod)?;
                    out.split = Some((l1, l2, c));
                }
            } else {
                out.nonsplit_disc = Some(disc);
            }
        }
        _ => {}
    }
    Ok(out)
}

/// Pull a binary linear form beta*s + gamma*w on the chosen plane back to an
/// actual linear factor of the rank-2 form, using the Gram pairing.
fn pullback_binary_linear(
    f: &DvrPolynomial,
    gram: &[Vec<Scalar>],
    basis: &[Vec<Scalar>],
    beta: &Scalar,
    gamma: &Scalar,
) -> Result<DvrPolynomial, KernelError> {
    // The linear functional x -> <v, x> with v = conjugate direction: for a
    // rank-2 form q(x) = c * l1(x) l2(x), the factor vanishing on the kernel
    // of (beta, gamma) on the plane is proportional to <M u, x>, where u is
    // the plane vector NOT annihilated... We avoid case analysis: the zero
    // direction w0 = gamma_dir satisfies beta*s + gamma*w = 0, i.e.
    // w0 = gamma * b0 - beta * b1; the factor is <M w0', x> for the OTHER
    // root direction w0'. Since l1(x) vanishes exactly on rad + k*w0, l1 is
    // proportional to the functional <M v, x> for any v with <M v, w0> = 0,
    // v not in rad. Take v = w0 itself: <M w0, w0> = q(w0) = 0 since w0 is a
    // root direction. So l1 ~ <M w0, x> unless M w0 = 0 (w0 in radical,
    // impossible for a root direction of a rank-2 restriction on a
    // complement).
    let k = &f.field;
    let n = gram.len();
    let mut w0 = vec![k.zero(); n];
    for i in 0..n {
        let t1 = k.mul(gamma, &basis[0][i]);
        let t2 = k.mul(beta, &basis[1][i]);
        w0[i] = k.sub(&t1, &t2);
    }
    let mut coeffs: Vec<(usize, Scalar)> = vec![];
    for i in 0..n {
        let mut acc = k.zero();
        for (j, w) in w0.iter().enumerate() {
            let t = k.mul(&gram[i][j], w);
            acc = k.add(&acc, &t);
        }
        coeffs.push((i, acc));
    }
    let l = linear_form(&f.ambient, k, &coeffs);
    if l.is_zero() {
        return Err(KernelError::geometry("rank-2 factor direction degenerated"));
    }
    Ok(l)
}

fn leading_ratio(f: &DvrPolynomial, g: &DvrPolynomial) -> Result<Scalar, KernelError> {
    // c with f = c*g, assuming proportionality.
    let k = &f.field;
    let (mf, cf) = f.leading().ok_or(KernelError::ZeroPolynomial)?;
    let (mg, cg) = g.leading().ok_or(KernelError::ZeroPolynomial)?;
    if mf != mg {
        return Err(KernelError::geometry("forms not proportional"));
    }
    let c = k.div(cf, cg)?;
    if f.sub(&g.scale(&c)).is_zero() {
        Ok(c)
    } else {
        Err(KernelError::geometry("forms not proportional"))
    }
}

/// Factor a binary form (two variables) completely over k.
fn factor_binary_form(
    f: &DvrPolynomial,
    vi: usize,
    vj: usize,
) -> Result<Vec<(DvrPolynomial, usize)>, KernelError> {
    let k = f.field.clone();
    let d = f.total_geo_degree() as usize;
    // coefficients of x_i^a x_j^(d-a)
    let mut coeffs = vec![k.zero(); d + 1];
    for (m, c) in f.terms() {
        coeffs[m.exps[vi] as usize] = c.clone();
    }
    let facs = uni::factor(&k, &coeffs)?;
    let mut out = vec![];
    // The x_j-power is the degree drop of the dehomogenized polynomial; the
    // x_i-power is the factor "s" found by the univariate factorization.
    let poly_deg = coeffs.iter().rposition(|c| !k.is_zero(c)).unwrap();
    if d > poly_deg {
        let xj = var_poly(f, vj);
        out.push((xj, d - poly_deg));
    }
    for (g, mult) in &facs.factors {
        // homogenize g(s) -> form in (x_i, x_j)
        let dg = g.len() - 1;
        let mut terms = vec![];
        for (a, c) in g.iter().enumerate() {
            if k.is_zero(c) {
                continue;
            }
            let mut m = Monomial::unit(f.ambient.nvars());
            m.exps[vi] = a as u16;
            m.exps[vj] = (dg - a) as u16;
            terms.push((m, c.clone()));
        }
        out.push((DvrPolynomial::from_terms(&f.ambient, &k, terms), *mult));
    }
    Ok(out)
}

fn var_poly(f: &DvrPolynomial, i: usize) -> DvrPolynomial {
    let mut m = Monomial::unit(f.ambient.nvars());
    m.exps[i] = 1;
    DvrPolynomial::from_terms(&f.ambient, &f.field, vec![(m, f.field.one())])
}

enum SplitOutcome {
    Split(DvrPolynomial, DvrPolynomial),
    NoSplit,
    Degenerate,
}

/// Split a 3-variable quartic form with no linear factors into two quadratic
/// forms over k, when possible: perfect squares first, then a specialization
/// + Hensel lift + truncation search.
fn conic_pair_split(
    f: &DvrPolynomial,
    seed: u64,
) -> Result<Option<(DvrPolynomial, DvrPolynomial)>, KernelError> {
    if let Some(h) = form_sqrt(f)? {
        return Ok(Some((h.clone(), h)));
    }
    let k = f.field.clone();
    let sup = support(f);
    if sup.len() > 3 {
        return Err(KernelError::Undecided(
            "quartic in 4 variables with no linear factor: 2+2 split not attempted".into(),
        ));
    }
    // Mix the other variables into x_a so the x_a^4 coefficient is nonzero,
    // then work monically in x_a.
    let va = sup[0];
    for attempt in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(seed ^ attempt.wrapping_mul(0xabcd_1234).wrapping_add(1));
        let (fw, back) = random_mix_into(f, &sup, va, &mut rng);
        let a4 = {
            let mut m = Monomial::unit(f.ambient.nvars());
            m.exps[va] = 4;
            fw.terms().iter().find(|(mm, _)| *mm == m).map(|(_, c)| c.clone())
        };
        let Some(a4c) = a4 else { continue };
        let fw = fw.scale(&k.inv(&a4c)?);
        let (vb, vz) = (sup[1], sup[2]);
        // dehomogenize by the third variable: bivariate, monic deg 4 in x_a
        let g = fw.set_var_one(&f.ambient.vars[vz].clone());
        match bivariate_quartic_22_split(&g, va, vb)? {
            SplitOutcome::Split(p, q) => {
                let ph = rehomogenize(&p, vz, 2);
                let qh = rehomogenize(&q, vz, 2);
                let p0 = ph.substitute_many(&back);
                let q0 = qh.substitute_many(&back);
                let prod = p0.mul(&q0);
                let c = leading_ratio(f, &prod)?;
                let p0 = p0.scale(&c);
                debug_assert_eq!(p0.mul(&q0), *f);
                return Ok(Some((p0, q0)));
            }
            SplitOutcome::NoSplit => return Ok(None),
            SplitOutcome::Degenerate => continue,
        }
    }
    Err(KernelError::Undecided("conic-pair split: specializations stayed degenerate".into()))
}

fn specialize_var(f: &DvrPolynomial, v: usize, value: &Scalar) -> DvrPolynomial {
    let k = &f.field;
    let val = DvrPolynomial::constant(&f.ambient, k, value.clone());
    f.substitute(&f.ambient.vars[v].clone(), &val)
}

fn to_uni(f: &DvrPolynomial, v: usize) -> UPoly {
    let k = &f.field;
    let d = f.terms().iter().map(|(m, _)| m.exps[v]).max().unwrap_or(0) as usize;
    let mut out = vec![k.zero(); d + 1];
    for (m, c) in f.terms() {
        out[m.exps[v] as usize] = k.add(&out[m.exps[v] as usize], c);
    }
    uni::normalized(k, out)
}

fn rehomogenize(f: &DvrPolynomial, vz: usize, target: i64) -> DvrPolynomial {
    let k = &f.field;
    let terms = f
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut m = m.clone();
            let deg = m.geo_degree();
            assert!(deg <= target);
            m.exps[vz] += (target - deg) as u16;
            (m, c.clone())
        })
        .collect();
    DvrPolynomial::from_terms(&f.ambient, k, terms)
}

fn random_mix_into(
    f: &DvrPolynomial,
    sup: &[usize],
    va: usize,
    rng: &mut StdRng,
) -> (DvrPolynomial, Vec<(String, DvrPolynomial)>) {
    let k = &f.field;
    // x_i -> x_i + c_i * x_a for i != a in the support; inverse flips signs.
    let aname = f.ambient.vars[va].clone();
    let xa = DvrPolynomial::var(&f.ambient, k, &aname);
    let mut fwd = vec![];
    let mut back = vec![];
    for &i in sup.iter().filter(|&&i| i != va) {
        let c = k.from_i64(rng.gen_range(-3..=3));
        let name = f.ambient.vars[i].clone();
        let xi = DvrPolynomial::var(&f.ambient, k, &name);
        fwd.push((name.clone(), xi.add(&xa.scale(&c))));
        back.push((name, xi.add(&xa.scale(&k.neg(&c)))));
    }
    (f.substitute_many(&fwd), back)
}

/// 2+2 split of a bivariate quartic g(x_a, x_b), monic of degree 4 in x_a.
fn bivariate_quartic_22_split(
    g: &DvrPolynomial,
    va: usize,
    vb: usize,
) -> Result<SplitOutcome, KernelError> {
    let k = g.field.clone();
    for r in [0i64, 1, -1, 2, -2, 3, -3, 4, -4] {
        let rv = k.from_i64(r);
        let spec = specialize_var(g, vb, &rv);
        let f0 = to_uni(&spec, va);
        if f0.len() != 5 || !uni::is_squarefree(&k, &f0)? {
            continue;
        }
        let f0 = uni::monic(&k, &f0)?;
        let facs = uni::factor(&k, &f0)?;
        let parts: Vec<UPoly> = facs.factors.iter().map(|(p, _)| p.clone()).collect();
        // enumerate subsets with degree sum 2
        let subsets = degree2_subsets(&k, &parts);
        for g0 in subsets {
            let (h0, rem) = uni::divrem(&k, &f0, &g0)?;
            if !rem.is_empty() {
                continue;
            }
            if let Some((p, q)) = hensel_bivariate(g, va, vb, &rv, &g0, &h0)? {
                return Ok(SplitOutcome::Split(p, q));
            }
        }
        return Ok(SplitOutcome::NoSplit); // good specialization, no split works
    }
    Ok(SplitOutcome::Degenerate)
}

fn degree2_subsets(k: &Field, parts: &[UPoly]) -> Vec<UPoly> {
    let mut out = vec![];
    for (i, p) in parts.iter().enumerate() {
        if p.len() == 3 {
            out.push(p.clone());
        }
        if p.len() == 2 {
            for q in parts.iter().skip(i + 1) {
                if q.len() == 2 {
                    out.push(uni::mul(k, p, q));
                }
            }
        }
    }
    out
}

/// Lift g0*h0 = g(x_a, r) to mod (x_b - r)^3, truncate, verify.
fn hensel_bivariate(
    g: &DvrPolynomial,
    va: usize,
    vb: usize,
    r: &Scalar,
    g0: &UPoly,
    h0: &UPoly,
) -> Result<Option<(DvrPolynomial, DvrPolynomial)>, KernelError> {
    let k = g.field.clone();
    // work with s = x_b - r: G(x_a, s) has series coefficients in s, mod s^3
    const M: usize = 3;
    // sigma*g0 + tau*h0 = 1
    let (sigma, tau) = match bezout_pair(&k, g0, h0) {
        Some(st) => st,
        None => return Ok(None),
    };
    // coefficients of G as polys in s (truncated)
    let dga = g.terms().iter().map(|(m, _)| m.exps[va]).max().unwrap_or(0) as usize;
    let mut gs: Vec<Vec<Scalar>> = vec![vec![k.zero(); M]; dga + 1];
    {
        // substitute x_b = s + r and collect per power of x_a and s
        for (m, c) in g.terms() {
            let ea = m.exps[va] as usize;
            let eb = m.exps[vb] as usize;
            // (s + r)^eb
            let mut pow = vec![k.one()];
            for _ in 0..eb {
                let mut next = vec![k.zero(); pow.len() + 1];
                for (j, p) in pow.iter().enumerate() {
                    next[j] = k.add(&next[j], &k.mul(p, r));
                    next[j + 1] = k.add(&next[j + 1], p);
                }
                pow = next;
            }
            for (j, p) in pow.iter().enumerate().take(M) {
                let t = k.mul(c, p);
                gs[ea][j] = k.add(&gs[ea][j], &t);
            }
        }
    }
    // series polys: a[j][i] = coeff of s^j in x_a^i
    let mut a: Vec<Vec<Scalar>> = vec![g0.to_vec(), vec![k.zero(); g0.len()], vec![k.zero(); g0.len()]];
    let mut b: Vec<Vec<Scalar>> = vec![h0.to_vec(), vec![k.zero(); h0.len()], vec![k.zero(); h0.len()]];
    a[0].resize(g0.len(), k.zero());
    b[0].resize(h0.len(), k.zero());
    for j in 1..M {
        // e_j = coeff of s^j in (G - a*b)
        let mut ej = vec![k.zero(); dga + 1];
        for (i, c) in gs.iter().enumerate() {
            ej[i] = c[j].clone();
        }
        // subtract sum over j1+j2=j of a[j1]*b[j2]
        for j1 in 0..=j {
            let j2 = j - j1;
            if j1 >= a.len() || j2 >= b.len() {
                continue;
            }
            let prod = uni::mul(&k, &a[j1], &b[j2]);
            for (i, c) in prod.iter().enumerate() {
                if i <= dga {
                    ej[i] = k.sub(&ej[i], c);
                }
            }
        }
        let ej = uni::normalized(&k, ej);
        if ej.is_empty() {
            continue;
        }
        // corrections: da = tau*e mod g0, db = sigma*e mod h0
        let da = uni::divrem(&k, &uni::mul(&k, &tau, &ej), g0)?.1;
        let db = uni::divrem(&k, &uni::mul(&k, &sigma, &ej), h0)?.1;
        for (i, c) in da.iter().enumerate() {
            a[j][i] = k.add(&a[j][i], c);
        }
        for (i, c) in db.iter().enumerate() {
            b[j][i] = k.add(&b[j][i], c);
        }
    }
    // reconstruct candidate P(x_a, x_b) = sum_j a[j](x_a) * (x_b - r)^j
    let p = series_to_poly(g, va, vb, r, &a);
    let q = series_to_poly(g, va, vb, r, &b);
    if p.mul(&q) == *g {
        Ok(Some((p, q)))
    } else {
        Ok(None)
    }
}

fn bezout_pair(k: &Field, a: &UPoly, b: &UPoly) -> Option<(UPoly, UPoly)> {
    // sigma*a + tau*b = 1
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    let mut s0: UPoly = vec![k.one()];
    let mut s1: UPoly = vec![];
    let mut t0: UPoly = vec![];
    let mut t1: UPoly = vec![k.one()];
    while !r1.is_empty() {
        let (q, r) = uni::divrem(k, &r0, &r1).ok()?;
        let s = uni::sub(k, &s0, &uni::mul(k, &q, &s1));
        let t = uni::sub(k, &t0, &uni::mul(k, &q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    if r0.len() != 1 {
        return None;
    }
    let c = k.inv(&r0[0]).ok()?;
    Some((uni::scale(k, &c, &s0), uni::scale(k, &c, &t0)))
}

fn series_to_poly(
    g: &DvrPolynomial,
    va: usize,
    vb: usize,
    r: &Scalar,
    series: &[Vec<Scalar>],
) -> DvrPolynomial {
    let k = &g.field;
    let xa = var_poly(g, va);
    let xb = var_poly(g, vb);
    let s = xb.sub(&DvrPolynomial::constant(&g.ambient, k, r.clone()));
    let mut out = DvrPolynomial::zero(&g.ambient, k);
    for (j, coeffs) in series.iter().enumerate() {
        let mut piece = DvrPolynomial::zero(&g.ambient, k);
        for (i, c) in coeffs.iter().enumerate() {
            if k.is_zero(c) {
                continue;
            }
            piece = piece.add(&xa.pow(i as u32).scale(c));
        }
        out = out.add(&piece.mul(&s.pow(j as u32)));
    }
    out
}

/// A factor list: (irreducible-over-k factor, multiplicity), with a unit.
pub struct FormFactors {
    pub unit: Scalar,
    pub factors: Vec<(DvrPolynomial, usize)>,
}

/// Factorization of a t-free polynomial of total degree <= 4 in <= 4
/// variables into k-irreducibles. Weighted variables (u in P(2,1,1,1)) are
/// handled through their quadratic-in-u structure by the callers; this entry
/// point treats all variables as plain.
pub fn factor_over_k(f: &DvrPolynomial, seed: u64) -> Result<FormFactors, KernelError> {
    let k = f.field.clone();
    if f.is_zero() {
        return Err(KernelError::ZeroPolynomial);
    }
    if f.max_t_exp() != 0 {
        return Err(KernelError::geometry("factor_over_k expects a t-free input"));
    }
    if f.weighted_degree(&vec![1; f.ambient.nvars()]).is_err() {
        return Err(KernelError::geometry("factor_over_k expects a homogeneous form"));
    }
    let d = f.total_geo_degree();
    let sup = support(f);
    if d > 4 || sup.len() > 4 {
        return Err(KernelError::FactorOutOfRange { degree: d, vars: sup.len() });
    }
    let mut unit = k.one();
    let mut factors: Vec<(DvrPolynomial, usize)> = vec![];
    let push = |factors: &mut Vec<(DvrPolynomial, usize)>, g: DvrPolynomial, m: usize| {
        if let Some(e) = factors.iter_mut().find(|(h, _)| *h == g) {
            e.1 += m;
        } else {
            factors.push((g, m));
        }
    };

    // constants
    if d == 0 {
        unit = f.leading().unwrap().1.clone();
        return Ok(FormFactors { unit, factors });
    }

    // binary forms go straight to univariate machinery
    if sup.len() <= 2 && is_form(f) {
        let (vi, vj) = (sup[0], *sup.get(1).unwrap_or(&sup[0]));
        if sup.len() == 1 {
            let l = var_poly(f, vi);
            push(&mut factors, l, d as usize);
            unit = f.leading().unwrap().1.clone();
            finish(&k, f, &mut unit, &mut factors)?;
            return Ok(FormFactors { unit, factors });
        }
        for (g, m) in factor_binary_form(f, vi, vj)? {
            push(&mut factors, normalize_factor(&g), m);
        }
        finish(&k, f, &mut unit, &mut factors)?;
        return Ok(FormFactors { unit, factors });
    }

    // strip linear factors
    let (linears, mut rest) = linear_factors(f, seed)?;
    for (l, m) in linears {
        push(&mut factors, l, m);
    }
    let rd = rest.total_geo_degree();
    match rd {
        0 => {}
        1 => {
            push(&mut factors, normalize_factor(&rest), 1);
            rest = DvrPolynomial::one(&f.ambient, &k);
        }
        2 => {
            // an irreducible-over-k quadratic (no k-linear factors remain)
            push(&mut factors, normalize_factor(&rest), 1);
            rest = DvrPolynomial::one(&f.ambient, &k);
        }
        3 => {
            // cubic with no linear factor over k is k-irreducible
            push(&mut factors, normalize_factor(&rest), 1);
            rest = DvrPolynomial::one(&f.ambient, &k);
        }
        4 => {
            if is_form(&rest) {
                if let Some((p, q)) = conic_pair_split(&rest, seed)? {
                    if p == q {
                        push(&mut factors, normalize_factor(&p), 2);
                    } else {
                        push(&mut factors, normalize_factor(&p), 1);
                        push(&mut factors, normalize_factor(&q), 1);
                    }
                } else {
                    push(&mut factors, normalize_factor(&rest), 1);
                }
            } else {
                push(&mut factors, normalize_factor(&rest), 1);
            }
            rest = DvrPolynomial::one(&f.ambient, &k);
        }
        _ => unreachable!("degree bounded by 4"),
    }
    let _ = rest;
    finish(&k, f, &mut unit, &mut factors)?;
    Ok(FormFactors { unit, factors })
}

fn is_form(f: &DvrPolynomial) -> bool {
    f.weighted_degree(&vec![1; f.ambient.nvars()]).is_ok()
}

fn normalize_factor(g: &DvrPolynomial) -> DvrPolynomial {
    g.normalize_leading()
}

fn finish(
    k: &Field,
    f: &DvrPolynomial,
    unit: &mut Scalar,
    factors: &mut Vec<(DvrPolynomial, usize)>,
) -> Result<(), KernelError> {
    factors.sort_by(|a, b| {
        a.0.total_geo_degree()
            .cmp(&b.0.total_geo_degree())
            .then_with(|| a.0.render().cmp(&b.0.render()))
    });
    let mut prod = DvrPolynomial::one(&f.ambient, k);
    for (g, m) in factors.iter() {
        prod = prod.mul(&g.pow(*m as u32));
    }
    let c = leading_ratio(f, &prod)?;
    *unit = c;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientSpace;

    fn v(a: &Ambient, k: &Field, n: &str) -> DvrPolynomial {
        DvrPolynomial::var(a, k, n)
    }

    #[test]
    fn factors_fiber_of_tangent_cone_cubic() {
        // x0*(x0*x3 + x1^2) -> [(x0, 1), (x0*x3 + x1^2, 1)]
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let x0 = v(&a, &k, "x0");
        let x1 = v(&a, &k, "x1");
        let x3 = v(&a, &k, "x3");
        let f = x0.mul(&x0.mul(&x3).add(&x1.mul(&x1)));
        let facs = factor_over_k(&f, 7).unwrap();
        assert_eq!(facs.factors.len(), 2);
        assert!(facs.factors.iter().any(|(g, m)| *m == 1 && g.total_geo_degree() == 1));
        assert!(facs.factors.iter().any(|(g, m)| *m == 1 && g.total_geo_degree() == 2));
    }

    #[test]
    fn perfect_square_quartic() {
        // (x1^2 - x2*x3)^2
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let x1 = v(&a, &k, "x1");
        let x2 = v(&a, &k, "x2");
        let x3 = v(&a, &k, "x3");
        let s = x1.pow(2).sub(&x2.mul(&x3));
        let f = s.pow(2);
        let facs = factor_over_k(&f, 3).unwrap();
        assert_eq!(facs.factors.len(), 1);
        assert_eq!(facs.factors[0].1, 2);
        assert_eq!(facs.factors[0].0.total_geo_degree(), 2);
    }

    #[test]
    fn norm_form_is_irreducible_over_q() {
        // x1^3 + 2 x2^3 + 4 x3^3 - 6 x1 x2 x3: the norm form of
        // x1 + 2^(1/3) x2 + 2^(2/3) x3, irreducible over Q.
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let x1 = v(&a, &k, "x1");
        let x2 = v(&a, &k, "x2");
        let x3 = v(&a, &k, "x3");
        let f = x1
            .pow(3)
            .add(&x2.pow(3).scale(&k.from_i64(2)))
            .add(&x3.pow(3).scale(&k.from_i64(4)))
            .sub(&x1.mul(&x2).mul(&x3).scale(&k.from_i64(6)));
        let facs = factor_over_k(&f, 11).unwrap();
        assert_eq!(facs.factors.len(), 1);
        assert_eq!(facs.factors[0].1, 1);
        assert_eq!(facs.factors[0].0.total_geo_degree(), 3);
    }

    #[test]
    fn norm_form_splits_into_conjugate_planes_over_cubic_field() {
        // Independent oracle: over Q(c) with c^3 = 2, the norm form should
        // acquire the linear factor x1 + c x2 + c^2 x3.
        let a = AmbientSpace::p3();
        let q = Field::rationals();
        let minpoly: UPoly = vec![q.from_i64(-2), q.zero(), q.zero(), q.one()];
        let adj = uni::adjoin_root(&q, &minpoly, "c").unwrap();
        let kk = adj.field.clone();
        let c = adj.root.clone();
        let x1 = v(&a, &kk, "x1");
        let x2 = v(&a, &kk, "x2");
        let x3 = v(&a, &kk, "x3");
        let f = x1
            .pow(3)
            .add(&x2.pow(3).scale(&kk.from_i64(2)))
            .add(&x3.pow(3).scale(&kk.from_i64(4)))
            .sub(&x1.mul(&x2).mul(&x3).scale(&kk.from_i64(6)));
        let facs = factor_over_k(&f, 11).unwrap();
        // linear * quadratic over Q(2^(1/3))
        let degs: Vec<i64> = facs.factors.iter().map(|(g, _)| g.total_geo_degree()).collect();
        assert!(degs.contains(&1), "expected a plane factor over the cubic field, got degrees {degs:?}");
        // the plane is x1 + c x2 + c^2 x3 (up to normalization)
        let plane = facs.factors.iter().find(|(g, _)| g.total_geo_degree() == 1).unwrap();
        let expect = x1.add(&x2.scale(&c)).add(&x3.scale(&kk.mul(&c, &c)));
        assert_eq!(plane.0, normalize_linear(&expect));
    }

    #[test]
    fn conic_pair_splits_over_k() {
        // (x1^2 - x2 x3)(x1^2 + x1 x2 - x3^2 + x2^2)
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let x1 = v(&a, &k, "x1");
        let x2 = v(&a, &k, "x2");
        let x3 = v(&a, &k, "x3");
        let s1 = x1.pow(2).sub(&x2.mul(&x3));
        let s2 = x1.pow(2).add(&x1.mul(&x2)).sub(&x3.pow(2)).add(&x2.pow(2));
        let f = s1.mul(&s2);
        let facs = factor_over_k(&f, 5).unwrap();
        assert_eq!(facs.factors.len(), 2);
        for (g, m) in &facs.factors {
            assert_eq!(*m, 1);
            assert_eq!(g.total_geo_degree(), 2);
        }
    }

    #[test]
    fn quadratic_form_rank_and_split() {
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let x1 = v(&a, &k, "x1");
        let x2 = v(&a, &k, "x2");
        let x3 = v(&a, &k, "x3");
        // rank 3
        let q3 = x1.pow(2).sub(&x2.mul(&x3));
        assert_eq!(analyze_quadratic_form(&q3).unwrap().rank, 3);
        // rank 1
        let q1 = x1.add(&x2).pow(2);
        let an = analyze_quadratic_form(&q1).unwrap();
        assert_eq!(an.rank, 1);
        assert!(an.square.is_some());
        // rank 2 split: x1^2 - x2^2
        let q2 = x1.pow(2).sub(&x2.pow(2));
        let an = analyze_quadratic_form(&q2).unwrap();
        assert_eq!(an.rank, 2);
        let (l1, l2, c) = an.split.unwrap();
        assert_eq!(l1.mul(&l2).scale(&c), q2);
        // rank 2 non-split: x1^2 + x2^2 over Q
        let qn = x1.pow(2).add(&x2.pow(2));
        let an = analyze_quadratic_form(&qn).unwrap();
        assert_eq!(an.rank, 2);
        assert!(an.split.is_none());
    }

    #[test]
    fn division_and_sqrt() {
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let x1 = v(&a, &k, "x1");
        let x2 = v(&a, &k, "x2");
        let f = x1.pow(2).sub(&x2.pow(2));
        let g = x1.sub(&x2);
        let q = divide_exact(&f, &g).unwrap();
        assert_eq!(q, x1.add(&x2));
        assert!(divide_exact(&f, &x1.add(&x1)).is_none());
        let s = x1.pow(2).add(&x1.mul(&x2).scale(&k.from_i64(2))).add(&x2.pow(2));
        let h = form_sqrt(&s).unwrap().unwrap();
        assert_eq!(h.mul(&h), s);
        assert!(form_sqrt(&f).unwrap().is_none());
    }
}

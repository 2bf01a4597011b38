//! Dense univariate polynomial algorithms over the kernel fields: division,
//! gcd, resultants, squarefree decomposition, and full factorization over Q,
//! F_q, and simple extensions Q(a) (via Trager norms). Also extension
//! building: adjoining a root of an irreducible polynomial, flattening towers
//! through a primitive element.
//!
//! Polynomials are plain `Vec<Scalar>`, low-to-high, with no trailing zeros.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::field::{base_divrem, trim, Base, Field, Scalar};
use crate::error::KernelError;

pub type UPoly = Vec<Scalar>;

/// Maximum total extension degree over the prime field. Twelve suffices for
/// resolutions over Q; the extra headroom covers one cubic step over a
/// sextic base after a splitting-field base change.
pub const TOWER_CAP: usize = 18;

pub fn deg(f: &UPoly) -> Option<usize> {
    if f.is_empty() {
        None
    } else {
        Some(f.len() - 1)
    }
}

pub fn normalized(k: &Field, mut f: UPoly) -> UPoly {
    trim(k, &mut f);
    f
}

pub fn trim_vec(k: &Field, f: &mut UPoly) {
    trim(k, f);
}

pub fn add(k: &Field, a: &UPoly, b: &UPoly) -> UPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| k.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| k.zero());
        out.push(k.add(&x, &y));
    }
    normalized(k, out)
}

pub fn sub(k: &Field, a: &UPoly, b: &UPoly) -> UPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| k.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| k.zero());
        out.push(k.sub(&x, &y));
    }
    normalized(k, out)
}

pub fn mul(k: &Field, a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![k.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if k.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = k.mul(x, y);
            out[i + j] = k.add(&out[i + j], &t);
        }
    }
    normalized(k, out)
}

pub fn scale(k: &Field, c: &Scalar, f: &UPoly) -> UPoly {
    normalized(k, f.iter().map(|x| k.mul(c, x)).collect())
}

pub fn divrem(k: &Field, a: &UPoly, b: &UPoly) -> Result<(UPoly, UPoly), KernelError> {
    base_divrem(k, a, b)
}

pub fn monic(k: &Field, f: &UPoly) -> Result<UPoly, KernelError> {
    let lc = f.last().ok_or(KernelError::ZeroPolynomial)?;
    let inv = k.inv(lc)?;
    Ok(scale(k, &inv, f))
}

pub fn gcd(k: &Field, a: &UPoly, b: &UPoly) -> Result<UPoly, KernelError> {
    let mut r0 = normalized(k, a.clone());
    let mut r1 = normalized(k, b.clone());
    while !r1.is_empty() {
        let (_, r) = divrem(k, &r0, &r1)?;
        r0 = r1;
        r1 = r;
    }
    if r0.is_empty() {
        Ok(r0)
    } else {
        monic(k, &r0)
    }
}

pub fn derivative(k: &Field, f: &UPoly) -> UPoly {
    if f.len() <= 1 {
        return vec![];
    }
    let mut out = Vec::with_capacity(f.len() - 1);
    for (i, c) in f.iter().enumerate().skip(1) {
        out.push(k.mul(&k.from_i64(i as i64), c));
    }
    normalized(k, out)
}

pub fn eval(k: &Field, f: &UPoly, x: &Scalar) -> Scalar {
    let mut acc = k.zero();
    for c in f.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

/// f(y + c) by repeated synthetic division.
pub fn shift(k: &Field, f: &UPoly, c: &Scalar) -> UPoly {
    let mut out = f.clone();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = k.mul(&out[j + 1], c);
            out[j] = k.add(&out[j], &t);
        }
    }
    normalized(k, out)
}

pub fn compose(k: &Field, f: &UPoly, g: &UPoly) -> UPoly {
    let mut acc: UPoly = vec![];
    for c in f.iter().rev() {
        acc = mul(k, &acc, g);
        if acc.is_empty() {
            acc = vec![c.clone()];
        } else {
            acc[0] = k.add(&acc[0], c);
        }
        acc = normalized(k, acc);
    }
    acc
}

pub fn pow_mod(k: &Field, f: &UPoly, e: &BigUint, m: &UPoly) -> Result<UPoly, KernelError> {
    let (_, base) = divrem(k, f, m)?;
    let mut acc = vec![k.one()];
    for bit in (0..e.bits()).rev() {
        acc = divrem(k, &mul(k, &acc, &acc), m)?.1;
        if e.bit(bit) {
            acc = divrem(k, &mul(k, &acc, &base), m)?.1;
        }
    }
    Ok(acc)
}

/// Resultant of two nonzero polynomials via the Euclidean remainder sequence.
pub fn resultant(k: &Field, a: &UPoly, b: &UPoly) -> Result<Scalar, KernelError> {
    let mut f = normalized(k, a.clone());
    let mut g = normalized(k, b.clone());
    if f.is_empty() || g.is_empty() {
        return Ok(k.zero());
    }
    let mut acc = k.one();
    let mut sign_flip = false;
    loop {
        let df = f.len() - 1;
        let dg = g.len() - 1;
        if dg == 0 {
            // res(f, c) = c^deg f
            acc = k.mul(&acc, &k.pow(&g[0], df as u64));
            if sign_flip {
                acc = k.neg(&acc);
            }
            return Ok(acc);
        }
        let (_, r) = divrem(k, &f, &g)?;
        if r.is_empty() {
            return Ok(k.zero());
        }
        let dr = r.len() - 1;
        // res(f, g) = (-1)^{df*dg} lc(g)^{df-dr} res(g, r)
        acc = k.mul(&acc, &k.pow(&g[dg], (df - dr) as u64));
        if (df * dg) % 2 == 1 {
            sign_flip = !sign_flip;
        }
        f = g;
        g = r;
    }
}

/// Discriminant up to the standard normalization: res(f, f') / lc(f).
pub fn discriminant(k: &Field, f: &UPoly) -> Result<Scalar, KernelError> {
    let d = derivative(k, f);
    if d.is_empty() {
        return Ok(k.zero());
    }
    let r = resultant(k, f, &d)?;
    let lc = f.last().unwrap();
    k.div(&r, lc)
}

pub fn is_squarefree(k: &Field, f: &UPoly) -> Result<bool, KernelError> {
    if f.len() <= 1 {
        return Ok(true);
    }
    let d = derivative(k, f);
    if d.is_empty() {
        return Ok(false);
    }
    Ok(gcd(k, f, &d)?.len() == 1)
}

/// Squarefree part (product of distinct irreducible factors).
pub fn squarefree_part(k: &Field, f: &UPoly) -> Result<UPoly, KernelError> {
    if f.len() <= 1 {
        return monic(k, f);
    }
    let d = derivative(k, f);
    if d.is_empty() {
        // Characteristic p: f is a p-th power, take the p-th root and recurse.
        let r = pth_root(k, f)?;
        return squarefree_part(k, &r);
    }
    let g = gcd(k, f, &d)?;
    let (q, r) = divrem(k, f, &g)?;
    debug_assert!(r.is_empty());
    if g.len() == 1 {
        return monic(k, &q);
    }
    // q may still miss factors whose multiplicity is divisible by p.
    let extra = squarefree_part(k, &g)?;
    let shared = gcd(k, &q, &extra)?;
    let (more, r2) = divrem(k, &extra, &shared)?;
    debug_assert!(r2.is_empty());
    Ok(normalized(k, mul(k, &q, &more)))
}

fn pth_root(k: &Field, f: &UPoly) -> Result<UPoly, KernelError> {
    let p = k.characteristic() as usize;
    assert!(p > 0, "p-th root only in characteristic p");
    let mut out = vec![k.zero(); (f.len() - 1) / p + 1];
    for (i, c) in f.iter().enumerate() {
        if k.is_zero(c) {
            continue;
        }
        if i % p != 0 {
            return Err(KernelError::geometry("polynomial is not a p-th power"));
        }
        out[i / p] = frobenius_root(k, c);
    }
    Ok(normalized(k, out))
}

fn frobenius_root(k: &Field, c: &Scalar) -> Scalar {
    // In F_{p^m}: c^{1/p} = c^{p^{m-1}}.
    let p = k.characteristic();
    let m = k.ext_degree() as u32;
    if m <= 1 {
        return c.clone();
    }
    let e = BigUint::from(p).pow(m - 1);
    pow_scalar(k, c, &e)
}

fn pow_scalar(k: &Field, a: &Scalar, e: &BigUint) -> Scalar {
    let mut acc = k.one();
    let mut b = a.clone();
    let mut e = e.clone();
    while !e.is_zero() {
        if e.bit(0) {
            acc = k.mul(&acc, &b);
        }
        b = k.mul(&b, &b);
        e >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

/// Factorization of a nonzero univariate polynomial over its field:
/// `unit * prod factor_i ^ mult_i` with monic irreducible factors,
/// canonically sorted.
#[derive(Clone, Debug)]
pub struct UniFactors {
    pub unit: Scalar,
    pub factors: Vec<(UPoly, usize)>,
}

pub fn factor(k: &Field, f: &UPoly) -> Result<UniFactors, KernelError> {
    let f = normalized(k, f.clone());
    if f.is_empty() {
        return Err(KernelError::ZeroPolynomial);
    }
    let unit = f.last().unwrap().clone();
    if f.len() == 1 {
        return Ok(UniFactors { unit, factors: vec![] });
    }
    let fm = monic(k, &f)?;
    let sq = squarefree_split(k, &fm)?;
    let mut factors = vec![];
    for (part, mult) in sq {
        if part.len() <= 1 {
            continue;
        }
        let irr = factor_squarefree(k, &part)?;
        for g in irr {
            factors.push((g, mult));
        }
    }
    sort_factors(k, &mut factors);
    verify_factorization(k, &f, &unit, &factors)?;
    Ok(UniFactors { unit, factors })
}

fn sort_factors(k: &Field, factors: &mut [(UPoly, usize)]) {
    factors.sort_by(|a, b| {
        a.0.len()
            .cmp(&b.0.len())
            .then_with(|| format_poly_key(k, &a.0).cmp(&format_poly_key(k, &b.0)))
            .then_with(|| a.1.cmp(&b.1))
    });
}

fn format_poly_key(k: &Field, f: &UPoly) -> String {
    f.iter().map(|c| k.scalar_string(c)).collect::<Vec<_>>().join(",")
}

fn verify_factorization(
    k: &Field,
    f: &UPoly,
    unit: &Scalar,
    factors: &[(UPoly, usize)],
) -> Result<(), KernelError> {
    let mut prod = vec![unit.clone()];
    for (g, m) in factors {
        for _ in 0..*m {
            prod = mul(k, &prod, g);
        }
    }
    if sub(k, &prod, f).is_empty() {
        Ok(())
    } else {
        Err(KernelError::geometry("internal: factorization failed the product check"))
    }
}

/// Yun-style squarefree decomposition; handles p-th powers in char p.
fn squarefree_split(k: &Field, f: &UPoly) -> Result<Vec<(UPoly, usize)>, KernelError> {
    if f.len() <= 1 {
        return Ok(vec![]);
    }
    let d = derivative(k, f);
    if d.is_empty() {
        let p = k.characteristic() as usize;
        let root = pth_root(k, f)?;
        let inner = squarefree_split(k, &root)?;
        return Ok(inner.into_iter().map(|(g, m)| (g, m * p)).collect());
    }
    let mut out: Vec<(UPoly, usize)> = vec![];
    let g = gcd(k, f, &d)?;
    let (mut w, r) = divrem(k, f, &g)?;
    debug_assert!(r.is_empty());
    let mut rest = g;
    let mut mult = 1usize;
    while w.len() > 1 {
        let next = gcd(k, &w, &rest)?;
        let (part, r1) = divrem(k, &w, &next)?;
        debug_assert!(r1.is_empty());
        if part.len() > 1 {
            out.push((part, mult));
        }
        let (rest2, r2) = divrem(k, &rest, &next)?;
        debug_assert!(r2.is_empty());
        w = next;
        rest = rest2;
        mult += 1;
    }
    if rest.len() > 1 {
        // Remaining p-th-power content.
        let inner = squarefree_split(k, &rest)?;
        for (g, m) in inner {
            out.push((g, m));
        }
    }
    Ok(out)
}

fn factor_squarefree(k: &Field, f: &UPoly) -> Result<Vec<UPoly>, KernelError> {
    match (k.base(), k.ext()) {
        (Base::Q, None) => factor_sf_rationals(f),
        (Base::Q, Some(_)) => factor_sf_trager(k, f),
        (Base::Fp(_), _) => factor_sf_finite(k, f),
    }
}

// --- finite fields: Cantor-Zassenhaus -------------------------------------

fn field_order(k: &Field) -> BigUint {
    let p = BigUint::from(k.characteristic());
    p.pow(k.ext_degree() as u32)
}

fn factor_sf_finite(k: &Field, f: &UPoly) -> Result<Vec<UPoly>, KernelError> {
    let q = field_order(k);
    let mut out = vec![];
    // Distinct-degree splitting.
    let mut rest = f.clone();
    let mut h = vec![k.zero(), k.one()]; // y
    let mut d = 0usize;
    while rest.len() > 1 {
        d += 1;
        if 2 * d > rest.len() - 1 {
            out.push(rest.clone());
            break;
        }
        h = pow_mod(k, &h, &q, &rest)?;
        let hy = sub(k, &h, &vec![k.zero(), k.one()]);
        let g = gcd(k, &rest, &hy)?;
        if g.len() > 1 {
            equal_degree_split(k, &g, d, &q, &mut out)?;
            let (q2, r2) = divrem(k, &rest, &g)?;
            debug_assert!(r2.is_empty());
            rest = q2;
            let (_, hr) = divrem(k, &h, &rest)?;
            h = hr;
        }
        if rest.len() == 2 {
            out.push(rest.clone());
            break;
        }
    }
    Ok(out)
}

fn equal_degree_split(
    k: &Field,
    f: &UPoly,
    d: usize,
    q: &BigUint,
    out: &mut Vec<UPoly>,
) -> Result<(), KernelError> {
    let n = f.len() - 1;
    if n == d {
        out.push(f.clone());
        return Ok(());
    }
    // (q^d - 1)/2; q is odd since p >= 5.
    let e = (q.pow(d as u32) - BigUint::one()) >> 1;
    let mut rng = StdRng::seed_from_u64(0x5eed_cafe ^ (n as u64) << 8 ^ d as u64);
    loop {
        let r: UPoly = normalized(
            k,
            (0..n).map(|_| random_scalar(k, &mut rng)).collect::<Vec<_>>(),
        );
        if r.len() <= 1 {
            continue;
        }
        let s = pow_mod(k, &r, &e, f)?;
        let s1 = sub(k, &s, &vec![k.one()]);
        let g = gcd(k, f, &s1)?;
        if g.len() > 1 && g.len() < f.len() {
            equal_degree_split(k, &g, d, q, out)?;
            let (h, rr) = divrem(k, f, &g)?;
            debug_assert!(rr.is_empty());
            equal_degree_split(k, &h, d, q, out)?;
            return Ok(());
        }
    }
}

fn random_scalar(k: &Field, rng: &mut StdRng) -> Scalar {
    match (k.base(), k.ext()) {
        (Base::Fp(p), None) => Scalar::Fp(rng.gen_range(0..*p)),
        (Base::Fp(p), Some(e)) => {
            let d = e.minpoly.len() - 1;
            let v: Vec<Scalar> = (0..d).map(|_| Scalar::Fp(rng.gen_range(0..*p))).collect();
            Scalar::Ext(v)
        }
        (Base::Q, _) => k.from_i64(rng.gen_range(-10..=10)),
    }
}

// --- rationals: Zassenhaus via Z[y] ----------------------------------------

fn rat(c: &Scalar) -> &num_rational::BigRational {
    match c {
        Scalar::Rat(r) => r,
        _ => unreachable!("rational scalar expected"),
    }
}

/// Clear denominators: returns the primitive integer polynomial with positive
/// leading coefficient, proportional to f.
fn to_primitive_int(f: &UPoly) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for c in f {
        den = den.lcm(rat(c).denom());
    }
    let mut ints: Vec<BigInt> = f.iter().map(|c| (rat(c) * &den).to_integer()).collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = g.gcd(c);
    }
    if !g.is_zero() && !g.is_one() {
        for c in ints.iter_mut() {
            *c = &*c / &g;
        }
    }
    if ints.last().map(|c| c.is_negative()).unwrap_or(false) {
        for c in ints.iter_mut() {
            *c = -&*c;
        }
    }
    ints
}

fn factor_sf_rationals(f: &UPoly) -> Result<Vec<UPoly>, KernelError> {
    let q = Field::rationals();
    let n = f.len() - 1;
    if n == 1 {
        return Ok(vec![monic(&q, f)?]);
    }
    let zf = to_primitive_int(f);
    let int_factors = factor_int_squarefree(&zf)?;
    let mut out = vec![];
    for g in int_factors {
        let gq: UPoly = g
            .iter()
            .map(|c| Scalar::Rat(num_rational::BigRational::from_integer(c.clone())))
            .collect();
        out.push(monic(&q, &gq)?);
    }
    Ok(out)
}

fn zpoly_norm2(f: &[BigInt]) -> BigInt {
    // ceil of the 2-norm; an upper integer bound suffices.
    let s: BigInt = f.iter().map(|c| c * c).sum();
    let mut r = s.sqrt();
    if &r * &r < s {
        r += 1;
    }
    r
}

fn zpoly_eval_mod(f: &[BigInt], p: u64) -> Vec<u64> {
    f.iter()
        .map(|c| {
            let m = c.mod_floor(&BigInt::from(p));
            m.to_u64().unwrap()
        })
        .collect()
}

/// Zassenhaus factorization of a primitive squarefree integer polynomial.
fn factor_int_squarefree(f: &[BigInt]) -> Result<Vec<Vec<BigInt>>, KernelError> {
    let n = f.len() - 1;
    if n <= 1 {
        return Ok(vec![f.to_vec()]);
    }
    let lc = f.last().unwrap().clone();

    // Monic transform: G(y) = lc^(n-1) F(y/lc) is monic with integer coeffs,
    // G_i = f_i * lc^(n-1-i) for i < n.
    let mut g: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    g[n] = BigInt::one();
    let mut pw = BigInt::one();
    for i in (0..n).rev() {
        g[i] = &f[i] * &pw;
        pw *= &lc;
    }

    // Pick a prime keeping G squarefree, preferring few modular factors.
    let primes = [
        5u64, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
        97, 101, 103,
    ];
    let mut best: Option<(u64, Vec<UPoly>, Field)> = None;
    let mut tried = 0;
    for &p in &primes {
        if (&g[n] % BigInt::from(p)).is_zero() {
            continue;
        }
        let kp = Field::prime(p)?;
        let gp: UPoly = zpoly_eval_mod(&g, p).into_iter().map(Scalar::Fp).collect();
        let gp = normalized(&kp, gp);
        if !is_squarefree(&kp, &gp)? {
            continue;
        }
        let gm = monic(&kp, &gp)?;
        let facs = factor_sf_finite(&kp, &gm)?;
        let better = match &best {
            None => true,
            Some((_, fb, _)) => facs.len() < fb.len(),
        };
        if better {
            best = Some((p, facs, kp));
        }
        tried += 1;
        if tried >= 4 || best.as_ref().map(|(_, f, _)| f.len()).unwrap_or(99) == 1 {
            break;
        }
    }
    let (p, mod_factors, _kp) =
        best.ok_or_else(|| KernelError::geometry("no usable prime for factorization"))?;
    if mod_factors.len() == 1 {
        return Ok(vec![f.to_vec()]);
    }

    // Hensel lift to p^e > 2 * Mignotte-style bound for monic factors of G.
    let bound: BigInt = (BigInt::from(2).pow(n as u32 + 1)) * zpoly_norm2(&g);
    let mut pe = BigInt::from(p);
    let mut e = 1u32;
    while pe < &bound * 2 {
        pe *= BigInt::from(p);
        e += 1;
    }
    let lifted = hensel_lift_tree(&g, &mod_factors, p, e)?;

    // Recombination over subsets; factors of the monic G map back to factors
    // of F via y -> lc*y and primitive part.
    let mut remaining: Vec<Vec<BigInt>> = lifted;
    let mut g_rest = g.clone();
    let mut out: Vec<Vec<BigInt>> = vec![];
    let mut subset_size = 1usize;
    'outer: while 2 * subset_size <= remaining.len() {
        let idxs: Vec<usize> = (0..remaining.len()).collect();
        for combo in combinations(&idxs, subset_size) {
            let mut cand = vec![BigInt::one()];
            for &i in &combo {
                cand = zmul_mod(&cand, &remaining[i], &pe);
            }
            symmetric_reduce(&mut cand, &pe);
            if let Some(quot) = zdiv_exact(&g_rest, &cand) {
                out.push(cand);
                g_rest = quot;
                let mut keep = vec![];
                for (i, f_) in remaining.into_iter().enumerate() {
                    if !combo.contains(&i) {
                        keep.push(f_);
                    }
                }
                remaining = keep;
                continue 'outer;
            }
        }
        subset_size += 1;
    }
    if g_rest.len() > 1 {
        out.push(g_rest);
    }

    // Undo the monic transform.
    let mut result = vec![];
    for h in out {
        let m = h.len() - 1;
        let mut back: Vec<BigInt> = Vec::with_capacity(m + 1);
        let mut pw = BigInt::one();
        for c in h.iter() {
            back.push(c * &pw);
            pw *= &lc;
        }
        // primitive part
        let mut gcd_all = BigInt::zero();
        for c in &back {
            gcd_all = gcd_all.gcd(c);
        }
        if !gcd_all.is_zero() && !gcd_all.is_one() {
            for c in back.iter_mut() {
                *c = &*c / &gcd_all;
            }
        }
        if back.last().unwrap().is_negative() {
            for c in back.iter_mut() {
                *c = -&*c;
            }
        }
        result.push(back);
    }
    Ok(result)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let n = items.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn zmul_mod(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (&out[i + j] + x * y) % m;
        }
    }
    while out.last().map(|c| c.is_zero()).unwrap_or(false) {
        out.pop();
    }
    out
}

fn symmetric_reduce(f: &mut [BigInt], m: &BigInt) {
    let half = m / 2;
    for c in f.iter_mut() {
        let mut r = &*c % m;
        if r.is_negative() {
            r += m;
        }
        if r > half {
            r -= m;
        }
        *c = r;
    }
}

/// Exact division in Z[y]; None when not divisible.
fn zdiv_exact(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    if b.is_empty() || a.len() < b.len() {
        return None;
    }
    let mut r: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    let mut q = vec![BigInt::zero(); a.len() - db];
    while r.len() >= b.len() {
        let dr = r.len() - 1;
        let (c, rem) = r[dr].div_rem(lead);
        if !rem.is_zero() {
            return None;
        }
        q[dr - db] = c.clone();
        for (j, bj) in b.iter().enumerate() {
            r[dr - db + j] = &r[dr - db + j] - &c * bj;
        }
        while r.last().map(|c| c.is_zero()).unwrap_or(false) {
            r.pop();
        }
        if r.is_empty() {
            break;
        }
        if r.len() < b.len() {
            return None;
        }
    }
    if r.is_empty() {
        Some(q)
    } else {
        None
    }
}

/// Binary-tree multifactor Hensel lifting for a monic squarefree G.
fn hensel_lift_tree(
    g: &[BigInt],
    mod_factors: &[UPoly],
    p: u64,
    e: u32,
) -> Result<Vec<Vec<BigInt>>, KernelError> {
    if mod_factors.len() == 1 {
        let mut out = g.to_vec();
        let pe = BigInt::from(p).pow(e);
        symmetric_reduce(&mut out, &pe);
        return Ok(vec![out]);
    }
    let kp = Field::prime(p)?;
    let (left, right) = mod_factors.split_at(mod_factors.len() / 2);
    let mut gl = vec![kp.one()];
    for f in left {
        gl = mul(&kp, &gl, f);
    }
    let mut gr = vec![kp.one()];
    for f in right {
        gr = mul(&kp, &gr, f);
    }
    let (gl_z, gr_z) = hensel_pair(g, &gl, &gr, p, e)?;
    let mut out = hensel_lift_tree(&gl_z, left, p, e)?;
    out.extend(hensel_lift_tree(&gr_z, right, p, e)?);
    Ok(out)
}

/// Linear Hensel lifting of a monic coprime pair from mod p to mod p^e.
fn hensel_pair(
    g: &[BigInt],
    a0: &UPoly,
    b0: &UPoly,
    p: u64,
    e: u32,
) -> Result<(Vec<BigInt>, Vec<BigInt>), KernelError> {
    let kp = Field::prime(p)?;
    // Bezout: s*a0 + t*b0 = 1 over F_p.
    let (s, t) = bezout(&kp, a0, b0)?;
    let pz = BigInt::from(p);
    let to_z = |f: &UPoly| -> Vec<BigInt> {
        f.iter()
            .map(|c| match c {
                Scalar::Fp(x) => BigInt::from(*x),
                _ => unreachable!(),
            })
            .collect()
    };
    let mut a = to_z(a0);
    let mut b = to_z(b0);
    let mut modulus = pz.clone();
    for _ in 1..e {
        // d = (g - a*b)/modulus mod p
        let prod = zmul_full(&a, &b);
        let diff = zsub(g, &prod);
        let d: Vec<BigInt> = diff.iter().map(|c| c / &modulus).collect();
        let d_mod: UPoly = d
            .iter()
            .map(|c| Scalar::Fp(c.mod_floor(&pz).to_u64().unwrap()))
            .collect();
        let d_mod = normalized(&kp, d_mod);
        if !d_mod.is_empty() {
            // da = t*d mod a0, db = s*d mod b0 (over F_p)
            let da = divrem(&kp, &mul(&kp, &t, &d_mod), a0)?.1;
            let db = divrem(&kp, &mul(&kp, &s, &d_mod), b0)?.1;
            for (i, c) in da.iter().enumerate() {
                if let Scalar::Fp(x) = c {
                    a[i] += &modulus * BigInt::from(*x);
                }
            }
            for (i, c) in db.iter().enumerate() {
                if let Scalar::Fp(x) = c {
                    b[i] += &modulus * BigInt::from(*x);
                }
            }
        }
        modulus *= &pz;
    }
    symmetric_reduce(&mut a, &modulus);
    symmetric_reduce(&mut b, &modulus);
    Ok((a, b))
}

fn zmul_full(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn zsub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(BigInt::zero);
        let y = b.get(i).cloned().unwrap_or_else(BigInt::zero);
        out.push(x - y);
    }
    out
}

fn bezout(k: &Field, a: &UPoly, b: &UPoly) -> Result<(UPoly, UPoly), KernelError> {
    // s*a + t*b = 1 when gcd(a, b) = 1.
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    let mut s0: UPoly = vec![k.one()];
    let mut s1: UPoly = vec![];
    let mut t0: UPoly = vec![];
    let mut t1: UPoly = vec![k.one()];
    while !r1.is_empty() {
        let (q, r) = divrem(k, &r0, &r1)?;
        let s = sub(k, &s0, &mul(k, &q, &s1));
        let t = sub(k, &t0, &mul(k, &q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    if r0.len() != 1 {
        return Err(KernelError::geometry("hensel pair not coprime"));
    }
    let c = k.inv(&r0[0])?;
    Ok((scale(k, &c, &s0), scale(k, &c, &t0)))
}

// --- extensions of Q: Trager ------------------------------------------------

/// Resultant with respect to z of m(z) and G(y, z), where G is given as a
/// polynomial in z with UPoly-in-y coefficients. Computed by evaluation at
/// integer points and Lagrange interpolation in y.
fn resultant_z(
    k: &Field,
    m: &UPoly,
    g_z: &[UPoly],
    y_degree_bound: usize,
) -> Result<UPoly, KernelError> {
    let npts = y_degree_bound + 1;
    let mut xs = vec![];
    let mut ys = vec![];
    let mut v: i64 = 0;
    while xs.len() < npts {
        let x = k.from_i64(v);
        // evaluate G(y=v, z) as a UPoly in z
        let gz: UPoly = normalized(
            k,
            g_z.iter().map(|cy| eval(k, cy, &x)).collect::<Vec<_>>(),
        );
        let r = if gz.is_empty() { k.zero() } else { resultant(k, m, &gz)? };
        xs.push(x);
        ys.push(r);
        v = if v >= 0 { -(v + 1) } else { -v };
    }
    interpolate(k, &xs, &ys)
}

pub fn interpolate(k: &Field, xs: &[Scalar], ys: &[Scalar]) -> Result<UPoly, KernelError> {
    // Newton form.
    let n = xs.len();
    let mut coef = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = k.sub(&coef[i], &coef[i - 1]);
            let den = k.sub(&xs[i], &xs[i - j]);
            coef[i] = k.div(&num, &den)?;
        }
    }
    let mut poly: UPoly = vec![];
    for i in (0..n).rev() {
        // poly = poly*(y - xs[i]) + coef[i]
        let lin = vec![k.neg(&xs[i]), k.one()];
        poly = mul(k, &poly, &lin);
        if poly.is_empty() {
            poly = vec![coef[i].clone()];
        } else {
            poly[0] = k.add(&poly[0], &coef[i]);
        }
        poly = normalized(k, poly);
    }
    Ok(poly)
}

/// Trager's algorithm over Q(a): reduce to factorization of a norm over Q.
fn factor_sf_trager(k: &Field, f: &UPoly) -> Result<Vec<UPoly>, KernelError> {
    let q = k.base_field();
    let ext = k.ext().unwrap();
    let m = &ext.minpoly;
    let n = m.len() - 1;
    let df = f.len() - 1;
    if df == 1 {
        return Ok(vec![monic(k, f)?]);
    }
    let alpha = k.generator()?;
    for shift_c in 0i64..40 {
        let s_vals: &[i64] = if shift_c == 0 { &[0] } else { &[shift_c, -shift_c] };
        for &s in s_vals {
            // g(y) = f(y - s*alpha)
            let sa = k.mul(&k.from_i64(s), &alpha);
            let lin = vec![k.neg(&sa), k.one()];
            let g = compose(k, f, &lin);
            // Express g as a polynomial in z (= alpha) with Q[y] coefficients.
            let mut g_z: Vec<UPoly> = vec![vec![]; n.max(1)];
            for (i, c) in g.iter().enumerate() {
                let coords: Vec<Scalar> = match c {
                    Scalar::Ext(v) => v.clone(),
                    other => {
                        let mut v = vec![q.zero(); n];
                        v[0] = other.clone();
                        v
                    }
                };
                for (j, cj) in coords.iter().enumerate() {
                    if q.is_zero(cj) {
                        continue;
                    }
                    while g_z[j].len() <= i {
                        g_z[j].push(q.zero());
                    }
                    g_z[j][i] = cj.clone();
                }
            }
            let norm = resultant_z(&q, m, &g_z, n * df)?;
            let norm = normalized(&q, norm);
            if norm.len() < n * df + 1 {
                continue; // degenerate leading behavior, try another shift
            }
            if !is_squarefree(&q, &norm)? {
                continue;
            }
            let norm_factors = factor_sf_rationals(&norm)?;
            if norm_factors.len() == 1 {
                return Ok(vec![monic(k, f)?]);
            }
            let mut out = vec![];
            for nf in norm_factors {
                let nf_k: UPoly = nf.iter().map(|c| k.lift(c)).collect();
                let gi = gcd(k, &g, &nf_k)?;
                if gi.len() > 1 {
                    // shift back: factor of f is gi(y + s*alpha)
                    let lin_back = vec![sa.clone(), k.one()];
                    out.push(monic(k, &compose(k, &gi, &lin_back))?);
                }
            }
            let total: usize = out.iter().map(|g| g.len() - 1).sum();
            if total == df {
                return Ok(out);
            }
        }
    }
    Err(KernelError::geometry("trager: no squarefree norm found"))
}

// ---------------------------------------------------------------------------
// Extension building
// ---------------------------------------------------------------------------

/// A field homomorphism `src -> dst` determined by where the generator goes.
#[derive(Clone, Debug)]
pub struct FieldEmbedding {
    pub src: Field,
    pub dst: Field,
    gen_image: Option<Scalar>,
}

impl FieldEmbedding {
    pub fn identity(f: &Field) -> Self {
        FieldEmbedding { src: f.clone(), dst: f.clone(), gen_image: f.generator().ok() }
    }

    pub fn map(&self, s: &Scalar) -> Scalar {
        match s {
            Scalar::Ext(v) => {
                let g = self.gen_image.as_ref().expect("embedding of an extension needs a generator image");
                let bf = self.src.base_field();
                let mut acc = self.dst.zero();
                for c in v.iter().rev() {
                    acc = self.dst.mul(&acc, g);
                    if !bf.is_zero(c) {
                        acc = self.dst.add(&acc, &self.dst.lift(c));
                    }
                }
                acc
            }
            other => self.dst.lift(other),
        }
    }

    pub fn map_poly(&self, f: &UPoly) -> UPoly {
        normalized(&self.dst, f.iter().map(|c| self.map(c)).collect())
    }

    /// Compose src -> mid -> dst.
    pub fn compose(first: &FieldEmbedding, second: &FieldEmbedding) -> FieldEmbedding {
        FieldEmbedding {
            src: first.src.clone(),
            dst: second.dst.clone(),
            gen_image: first.gen_image.as_ref().map(|g| second.map(g)),
        }
    }
}

/// Result of adjoining a root: the (flattened) extension field, the embedding
/// of the old field, and the designated root.
pub struct RootAdjunction {
    pub field: Field,
    pub embed: FieldEmbedding,
    pub root: Scalar,
}

/// Adjoin a root of `g`, irreducible over `k`. Towers are flattened through a
/// primitive element so the result is always a simple extension of the base.
pub fn adjoin_root(k: &Field, g: &UPoly, name: &str) -> Result<RootAdjunction, KernelError> {
    let g = monic(k, g)?;
    let dg = g.len() - 1;
    if dg == 1 {
        let root = k.neg(&g[0]);
        return Ok(RootAdjunction { field: k.clone(), embed: FieldEmbedding::identity(k), root });
    }
    let new_total = k.ext_degree() * dg;
    if new_total > TOWER_CAP {
        return Err(KernelError::TowerTooDeep(new_total, TOWER_CAP));
    }
    match k.ext() {
        None => {
            let l = Field::with_extension(k, g.clone(), name);
            let root = l.generator()?;
            let embed = FieldEmbedding { src: k.clone(), dst: l.clone(), gen_image: None };
            Ok(RootAdjunction { field: l, embed, root })
        }
        Some(_) => match k.base() {
            Base::Q => adjoin_root_primitive(k, &g, name),
            Base::Fp(_) => adjoin_root_finite(k, &g, name),
        },
    }
}

fn adjoin_root_primitive(k: &Field, g: &UPoly, name: &str) -> Result<RootAdjunction, KernelError> {
    let q = k.base_field();
    let ext = k.ext().unwrap();
    let m = &ext.minpoly;
    let n = m.len() - 1;
    let dg = g.len() - 1;
    let alpha = k.generator()?;
    for c in 1i64..60 {
        for &cc in &[c, -c] {
            // gamma = beta + cc*alpha, where g(beta) = 0.
            // M(y) = Res_z(m(z), G(y - cc*z, z)), G = g with alpha -> z.
            let mut g_z: Vec<UPoly> = vec![vec![]; n];
            let sa = k.mul(&k.from_i64(cc), &alpha);
            let lin = vec![k.neg(&sa), k.one()];
            let gs = compose(k, g, &lin);
            for (i, coeff) in gs.iter().enumerate() {
                let coords: Vec<Scalar> = match coeff {
                    Scalar::Ext(v) => v.clone(),
                    other => {
                        let mut v = vec![q.zero(); n];
                        v[0] = other.clone();
                        v
                    }
                };
                for (j, cj) in coords.iter().enumerate() {
                    if q.is_zero(cj) {
                        continue;
                    }
                    while g_z[j].len() <= i {
                        g_z[j].push(q.zero());
                    }
                    g_z[j][i] = cj.clone();
                }
            }
            let mpoly = resultant_z(&q, m, &g_z, n * dg)?;
            let mpoly = normalized(&q, mpoly);
            if mpoly.len() != n * dg + 1 || !is_squarefree(&q, &mpoly)? {
                continue;
            }
            let mfacs = factor_sf_rationals(&mpoly)?;
            if mfacs.len() != 1 {
                continue; // gamma not primitive for this shift
            }
            let minpoly = monic(&q, &mpoly)?;
            let l = Field::with_extension(&q, minpoly, name);
            let gamma = l.generator()?;
            // alpha in L: the unique root of m shared with g(gamma - cc*z).
            // Compute gcd over L of m(z) and G(gamma - cc*z, z) in z.
            let m_l: UPoly = m.iter().map(|x| l.lift(x)).collect();
            // G(gamma - cc z, z): build from g_z: sum_j g_z[j](gamma - cc z)?? No:
            // G(y, z) = sum_j z^j * g_z[j](y).  Substituting y = gamma - cc*z is
            // awkward; instead rebuild from g directly: g = sum_i c_i y^i with
            // c_i in Q(alpha); here we need h(z) = sum_i c_i(z) (gamma - cc z)^i
            // where c_i(z) replaces alpha by z.
            let mut h: UPoly = vec![];
            let lin_z = vec![gamma.clone(), l.from_i64(-cc)]; // gamma - cc*z
            let mut pw: UPoly = vec![l.one()];
            for coeff in g.iter() {
                let coords: Vec<Scalar> = match coeff {
                    Scalar::Ext(v) => v.clone(),
                    other => {
                        let mut v = vec![q.zero(); n];
                        v[0] = other.clone();
                        v
                    }
                };
                // c_i(z) as a poly in z over L
                let ci: UPoly = normalized(&l, coords.iter().map(|x| l.lift(x)).collect());
                let term = mul(&l, &ci, &pw);
                h = add(&l, &h, &term);
                pw = mul(&l, &pw, &lin_z);
            }
            let d = gcd(&l, &m_l, &h)?;
            if d.len() != 2 {
                continue;
            }
            let alpha_img = l.neg(&l.div(&d[0], &d[1])?);
            let beta = l.sub(&gamma, &l.mul(&l.from_i64(cc), &alpha_img));
            let embed = FieldEmbedding { src: k.clone(), dst: l.clone(), gen_image: Some(alpha_img) };
            return Ok(RootAdjunction { field: l, embed, root: beta });
        }
    }
    Err(KernelError::geometry("primitive element search failed"))
}

fn adjoin_root_finite(k: &Field, g: &UPoly, name: &str) -> Result<RootAdjunction, KernelError> {
    // Build F_{p^(n*dg)} fresh, then embed by root-finding.
    let p = k.characteristic();
    let q = k.base_field();
    let n = k.ext_degree();
    let dg = g.len() - 1;
    let total = n * dg;
    let mut rng = StdRng::seed_from_u64(0xfeed ^ p ^ (total as u64) << 16);
    let l = loop {
        let mut cand: UPoly = (0..total).map(|_| Scalar::Fp(rng.gen_range(0..p))).collect();
        cand.push(q.one());
        let cand = normalized(&q, cand);
        if cand.len() != total + 1 {
            continue;
        }
        if is_irreducible_finite(&q, &cand)? {
            break Field::with_extension(&q, cand, name);
        }
    };
    // Embed alpha: a root of the old minimal polynomial inside L.
    let m_l: UPoly = k.ext().unwrap().minpoly.iter().map(|x| l.lift(x)).collect();
    let alpha_img = any_root_in_field(&l, &m_l)?
        .ok_or_else(|| KernelError::geometry("embedding root must exist in F_q tower"))?;
    let embed = FieldEmbedding { src: k.clone(), dst: l.clone(), gen_image: Some(alpha_img) };
    // The designated root of g inside L.
    let g_l = embed.map_poly(g);
    let root = any_root_in_field(&l, &g_l)?
        .ok_or_else(|| KernelError::geometry("adjoined root must exist in F_q tower"))?;
    Ok(RootAdjunction { field: l, embed, root })
}

fn is_irreducible_finite(k: &Field, f: &UPoly) -> Result<bool, KernelError> {
    if !is_squarefree(k, f)? {
        return Ok(false);
    }
    Ok(factor_sf_finite(k, &monic(k, f)?)?.len() == 1)
}

/// Some root of f lying in k itself, if any.
pub fn any_root_in_field(k: &Field, f: &UPoly) -> Result<Option<Scalar>, KernelError> {
    let facs = factor(k, f)?;
    for (g, _) in &facs.factors {
        if g.len() == 2 {
            return Ok(Some(k.neg(&g[0])));
        }
    }
    Ok(None)
}

/// All roots of f in k with multiplicities.
pub fn roots_in_field(k: &Field, f: &UPoly) -> Result<Vec<(Scalar, usize)>, KernelError> {
    let facs = factor(k, f)?;
    let mut out = vec![];
    for (g, m) in &facs.factors {
        if g.len() == 2 {
            out.push((k.neg(&g[0]), *m));
        }
    }
    Ok(out)
}

/// All roots of f over an extension large enough to split it, together with
/// the field and the embedding from `k`. The tower is capped at `TOWER_CAP`.
pub struct SplitRoots {
    pub field: Field,
    pub embed: FieldEmbedding,
    pub roots: Vec<(Scalar, usize)>,
}

pub fn splitting_roots(k: &Field, f: &UPoly, gen_prefix: &str) -> Result<SplitRoots, KernelError> {
    let mut field = k.clone();
    let mut embed = FieldEmbedding::identity(k);
    let mut current = f.clone();
    let mut counter = 0usize;
    loop {
        let facs = factor(&field, &current)?;
        let mut nonlinear: Option<UPoly> = None;
        for (g, _) in &facs.factors {
            if g.len() > 2 {
                nonlinear = Some(g.clone());
                break;
            }
        }
        match nonlinear {
            None => {
                let mut roots = vec![];
                for (g, m) in &facs.factors {
                    if g.len() == 2 {
                        roots.push((field.neg(&g[0]), *m));
                    }
                }
                return Ok(SplitRoots { field, embed, roots });
            }
            Some(g) => {
                counter += 1;
                let name = format!("{gen_prefix}{counter}");
                let adj = adjoin_root(&field, &g, &name)?;
                current = adj.embed.map_poly(&current);
                embed = FieldEmbedding {
                    src: k.clone(),
                    dst: adj.field.clone(),
                    gen_image: embed.gen_image.as_ref().map(|gi| adj.embed.map(gi)),
                };
                field = adj.field;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(coeffs: &[i64]) -> UPoly {
        let q = Field::rationals();
        normalized(&q, coeffs.iter().map(|&c| q.from_i64(c)).collect())
    }

    #[test]
    fn divrem_and_gcd() {
        let q = Field::rationals();
        // (y^2 - 1) = (y - 1)(y + 1)
        let f = qp(&[-1, 0, 1]);
        let g = qp(&[-1, 1]);
        let (quot, rem) = divrem(&q, &f, &g).unwrap();
        assert!(rem.is_empty());
        assert_eq!(quot, qp(&[1, 1]));
        let d = gcd(&q, &f, &qp(&[1, 1])).unwrap();
        assert_eq!(d, qp(&[1, 1]));
    }

    #[test]
    fn resultant_of_common_root_vanishes() {
        let q = Field::rationals();
        let f = qp(&[-2, 0, 1]); // y^2 - 2
        let g = qp(&[-4, 0, 0, 0, 1]); // y^4 - 4
        assert!(q.is_zero(&resultant(&q, &f, &g).unwrap()));
        let h = qp(&[1, 1]);
        assert!(!q.is_zero(&resultant(&q, &f, &h).unwrap()));
    }

    #[test]
    fn factor_over_q_quartic() {
        let q = Field::rationals();
        // (y^2-2)(y^2+1)(y-3)
        let f = mul(&q, &mul(&q, &qp(&[-2, 0, 1]), &qp(&[1, 0, 1])), &qp(&[-3, 1]));
        let facs = factor(&q, &f).unwrap();
        assert_eq!(facs.factors.len(), 3);
        let degs: Vec<usize> = facs.factors.iter().map(|(g, _)| g.len() - 1).collect();
        assert_eq!(degs, vec![1, 2, 2]);
    }

    #[test]
    fn factor_over_q_with_multiplicity() {
        let q = Field::rationals();
        // (y-1)^2 (y+2)^3
        let mut f = vec![q.one()];
        for _ in 0..2 {
            f = mul(&q, &f, &qp(&[-1, 1]));
        }
        for _ in 0..3 {
            f = mul(&q, &f, &qp(&[2, 1]));
        }
        let facs = factor(&q, &f).unwrap();
        let mut mults: Vec<usize> = facs.factors.iter().map(|(_, m)| *m).collect();
        mults.sort();
        assert_eq!(mults, vec![2, 3]);
    }

    #[test]
    fn factor_over_fp() {
        let k = Field::prime(7).unwrap();
        // y^2 + 1 is irreducible mod 7 (since -1 is not a QR mod 7)
        let f: UPoly = vec![k.one(), k.zero(), k.one()];
        let facs = factor(&k, &f).unwrap();
        assert_eq!(facs.factors.len(), 1);
        // y^2 - 2 splits mod 7 (3^2 = 2)
        let g: UPoly = vec![k.from_i64(-2), k.zero(), k.one()];
        let facs = factor(&k, &g).unwrap();
        assert_eq!(facs.factors.len(), 2);
    }

    #[test]
    fn adjoin_and_factor_over_extension() {
        let q = Field::rationals();
        // K = Q(i)
        let adj = adjoin_root(&q, &qp(&[1, 0, 1]), "i").unwrap();
        let k = adj.field.clone();
        let i = adj.root.clone();
        // y^2 + 1 splits over K
        let f: UPoly = vec![k.one(), k.zero(), k.one()];
        let facs = factor(&k, &f).unwrap();
        assert_eq!(facs.factors.len(), 2);
        let roots = roots_in_field(&k, &f).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().any(|(r, _)| k.eq_scalar(r, &i)));
        // y^2 - 2 stays irreducible over Q(i)
        let g: UPoly = vec![k.from_i64(-2), k.zero(), k.one()];
        let facs = factor(&k, &g).unwrap();
        assert_eq!(facs.factors.len(), 1);
    }

    #[test]
    fn tower_flattening_produces_primitive_field() {
        let q = Field::rationals();
        let adj1 = adjoin_root(&q, &qp(&[-2, 0, 1]), "r").unwrap(); // Q(sqrt 2)
        let k1 = adj1.field.clone();
        let sqrt2 = adj1.root.clone();
        // adjoin sqrt 3 on top
        let g: UPoly = vec![k1.from_i64(-3), k1.zero(), k1.one()];
        let adj2 = adjoin_root(&k1, &g, "s").unwrap();
        let l = adj2.field.clone();
        assert_eq!(l.ext_degree(), 4);
        let sqrt2_l = adj2.embed.map(&sqrt2);
        let sqrt3_l = adj2.root.clone();
        assert!(l.eq_scalar(&l.mul(&sqrt2_l, &sqrt2_l), &l.from_i64(2)));
        assert!(l.eq_scalar(&l.mul(&sqrt3_l, &sqrt3_l), &l.from_i64(3)));
        let prod = l.mul(&sqrt2_l, &sqrt3_l);
        assert!(l.eq_scalar(&l.mul(&prod, &prod), &l.from_i64(6)));
    }

    #[test]
    fn splitting_roots_of_cubic() {
        let q = Field::rationals();
        // y^3 - 2: splitting field has degree 6
        let f = qp(&[-2, 0, 0, 1]);
        let split = splitting_roots(&q, &f, "c").unwrap();
        assert_eq!(split.roots.len(), 3);
        assert_eq!(split.field.ext_degree(), 6);
        for (r, m) in &split.roots {
            assert_eq!(*m, 1);
            let cube = split.field.mul(r, &split.field.mul(r, r));
            assert!(split.field.eq_scalar(&cube, &split.field.from_i64(2)));
        }
    }

    #[test]
    fn finite_field_extension_roots() {
        let k = Field::prime(7).unwrap();
        let f: UPoly = vec![k.one(), k.zero(), k.one()]; // y^2+1 irreducible mod 7
        let adj = adjoin_root(&k, &f, "w").unwrap();
        let l = adj.field.clone();
        assert_eq!(l.ext_degree(), 2);
        let w = adj.root.clone();
        assert!(l.eq_scalar(&l.mul(&w, &w), &l.from_i64(-1)));
        // over F_49, y^2+1 splits
        let f_l: UPoly = vec![l.one(), l.zero(), l.one()];
        let facs = factor(&l, &f_l).unwrap();
        assert_eq!(facs.factors.len(), 2);
    }

    #[test]
    fn rational_roots_and_eval() {
        let q = Field::rationals();
        // 6y^2 - 5y + 1 = (2y-1)(3y-1)
        let f = qp(&[1, -5, 6]);
        let roots = roots_in_field(&q, &f).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, _) in &roots {
            assert!(q.is_zero(&eval(&q, &f, r)));
        }
    }
}

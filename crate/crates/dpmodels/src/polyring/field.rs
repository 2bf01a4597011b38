//! Exact coefficient fields: the rationals, prime fields F_p (p >= 5), and
//! simple algebraic extensions of either, used when geometry forces a base
//! change (conjugate components, blow-up centers over k-bar).
//!
//! A `Field` is a cheap handle (Arc) describing the base and an optional
//! extension `k(a)` with a stored monic minimal polynomial. Towers are kept
//! flat: composing two extensions goes through a primitive element, see
//! `uni::adjoin_root`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::KernelError;

/// Base residue field selector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    /// The rational numbers.
    Q,
    /// The prime field F_p. The residue characteristic must avoid 2 and 3.
    Fp(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    /// Monic minimal polynomial over the base, low-to-high, length = degree + 1.
    pub minpoly: Vec<Scalar>,
    /// Printable generator name.
    pub name: String,
}

#[derive(Debug, PartialEq, Eq)]
pub struct FieldData {
    pub base: Base,
    pub ext: Option<Extension>,
}

/// Handle to a coefficient field. Clones are cheap and comparisons are
/// structural.
#[derive(Clone, Debug)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Field {}

/// An exact field element. `Ext` coordinates are always padded to the
/// extension degree and hold base scalars only, so structural equality and
/// hashing agree with field equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Fp(u64),
    Ext(Vec<Scalar>),
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    // Deterministic Miller-Rabin for u64.
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p.
    pow_mod(a, p - 2, p)
}

impl Field {
    pub fn rationals() -> Field {
        Field(Arc::new(FieldData { base: Base::Q, ext: None }))
    }

    /// Prime field F_p. Rejects p < 5, composite p, and ch = 2, 3.
    pub fn prime(p: u64) -> Result<Field, KernelError> {
        if p < 5 || p == 2 || p == 3 || !is_prime_u64(p) || p > (1 << 31) {
            return Err(KernelError::BadResidueField(p));
        }
        Ok(Field(Arc::new(FieldData { base: Base::Fp(p), ext: None })))
    }

    pub(crate) fn with_extension(base: &Field, minpoly: Vec<Scalar>, name: &str) -> Field {
        debug_assert!(base.ext().is_none());
        Field(Arc::new(FieldData {
            base: base.base().clone(),
            ext: Some(Extension { minpoly, name: name.to_string() }),
        }))
    }

    pub fn base(&self) -> &Base {
        &self.0.base
    }

    pub fn ext(&self) -> Option<&Extension> {
        self.0.ext.as_ref()
    }

    /// The underlying prime or 0 for characteristic zero.
    pub fn characteristic(&self) -> u64 {
        match self.0.base {
            Base::Q => 0,
            Base::Fp(p) => p,
        }
    }

    /// Field of the extension coordinates (self without the extension).
    pub fn base_field(&self) -> Field {
        match self.0.base {
            Base::Q => Field::rationals(),
            Base::Fp(p) => Field(Arc::new(FieldData { base: Base::Fp(p), ext: None })),
        }
    }

    /// Degree over the base field (1 when no extension).
    pub fn ext_degree(&self) -> usize {
        self.ext().map(|e| e.minpoly.len() - 1).unwrap_or(1)
    }

    pub fn zero(&self) -> Scalar {
        match self.0.base {
            Base::Q => Scalar::Rat(BigRational::zero()),
            Base::Fp(_) => Scalar::Fp(0),
        }
    }

    pub fn one(&self) -> Scalar {
        match self.0.base {
            Base::Q => Scalar::Rat(BigRational::one()),
            Base::Fp(_) => Scalar::Fp(1),
        }
    }

    /// The extension generator as an element, or an error for base fields.
    pub fn generator(&self) -> Result<Scalar, KernelError> {
        let e = self.ext().ok_or(KernelError::NoExtension)?;
        let d = e.minpoly.len() - 1;
        let bf = self.base_field();
        let mut v = vec![bf.zero(); d];
        if d == 1 {
            // Degree-1 "extension": generator is the root itself.
            v[0] = bf.neg(&e.minpoly[0]);
        } else {
            v[1] = bf.one();
        }
        Ok(Scalar::Ext(v))
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self.0.base {
            Base::Q => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            Base::Fp(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                Scalar::Fp(r)
            }
        }
    }

    pub fn from_bigint(&self, n: &BigInt) -> Scalar {
        match self.0.base {
            Base::Q => Scalar::Rat(BigRational::from_integer(n.clone())),
            Base::Fp(p) => {
                let m = n.mod_floor_u64(p);
                Scalar::Fp(m)
            }
        }
    }

    pub fn from_rational(&self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        match self.0.base {
            Base::Q => Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den))),
            Base::Fp(p) => {
                let n = num.rem_euclid(p as i64) as u64;
                let d = den.rem_euclid(p as i64) as u64;
                assert!(d != 0, "denominator divisible by p");
                Scalar::Fp(mul_mod(n, inv_mod(d, p), p))
            }
        }
    }

    /// Lift a base scalar into this (possibly extended) field.
    pub fn lift(&self, s: &Scalar) -> Scalar {
        match (self.ext(), s) {
            (None, _) => s.clone(),
            (Some(_), Scalar::Ext(_)) => s.clone(),
            (Some(e), _) => {
                let d = e.minpoly.len() - 1;
                let bf = self.base_field();
                let mut v = vec![bf.zero(); d];
                if d == 0 {
                    unreachable!("degree-0 extension");
                }
                v[0] = s.clone();
                self.normalize_ext(Scalar::Ext(v))
            }
        }
    }

    fn normalize_ext(&self, s: Scalar) -> Scalar {
        // Degree-1 extensions collapse to base scalars via the stored root.
        if let (Some(e), Scalar::Ext(v)) = (self.ext(), &s) {
            if e.minpoly.len() == 2 {
                return v[0].clone();
            }
        }
        s
    }

    pub fn is_zero(&self, s: &Scalar) -> bool {
        match s {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp(x) => *x == 0,
            Scalar::Ext(v) => {
                let bf = self.base_field();
                v.iter().all(|c| bf.is_zero(c))
            }
        }
    }

    pub fn is_one(&self, s: &Scalar) -> bool {
        self.eq_scalar(s, &self.lift(&self.one()))
    }

    pub fn eq_scalar(&self, a: &Scalar, b: &Scalar) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    fn binop(&self, a: &Scalar, b: &Scalar, f: &mut dyn FnMut(&Field, &Scalar, &Scalar) -> Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Ext(_), Scalar::Ext(_)) => f(self, a, b),
            (Scalar::Ext(_), _) => f(self, a, &self.lift(b)),
            (_, Scalar::Ext(_)) => f(self, &self.lift(a), b),
            _ => f(self, a, b),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.binop(a, b, &mut |fld, a, b| match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Scalar::Fp(x), Scalar::Fp(y)) => {
                let p = fld.characteristic();
                Scalar::Fp((x + y) % p)
            }
            (Scalar::Ext(x), Scalar::Ext(y)) => {
                let bf = fld.base_field();
                Scalar::Ext(x.iter().zip(y.iter()).map(|(u, v)| bf.add(u, v)).collect())
            }
            _ => unreachable!("mixed scalar kinds"),
        })
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Fp(x) => {
                let p = self.characteristic();
                Scalar::Fp(if *x == 0 { 0 } else { p - x })
            }
            Scalar::Ext(v) => {
                let bf = self.base_field();
                Scalar::Ext(v.iter().map(|c| bf.neg(c)).collect())
            }
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.binop(a, b, &mut |fld, a, b| match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp(mul_mod(*x, *y, fld.characteristic())),
            (Scalar::Ext(x), Scalar::Ext(y)) => fld.ext_mul(x, y),
            _ => unreachable!("mixed scalar kinds"),
        })
    }

    fn ext_mul(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        let e = self.ext().expect("ext element in base field");
        let bf = self.base_field();
        let d = e.minpoly.len() - 1;
        let mut prod = vec![bf.zero(); 2 * d - 1];
        for (i, xi) in x.iter().enumerate() {
            if bf.is_zero(xi) {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if bf.is_zero(yj) {
                    continue;
                }
                let t = bf.mul(xi, yj);
                prod[i + j] = bf.add(&prod[i + j], &t);
            }
        }
        // Reduce modulo the monic minimal polynomial.
        for i in (d..prod.len()).rev() {
            let c = prod[i].clone();
            if bf.is_zero(&c) {
                continue;
            }
            prod[i] = bf.zero();
            for (j, mj) in e.minpoly.iter().take(d).enumerate() {
                let t = bf.mul(&c, mj);
                prod[i - d + j] = bf.sub(&prod[i - d + j], &t);
            }
        }
        prod.truncate(d);
        self.normalize_ext(Scalar::Ext(prod))
    }

    pub fn inv(&self, a: &Scalar) -> Result<Scalar, KernelError> {
        if self.is_zero(a) {
            return Err(KernelError::DivisionByZero);
        }
        Ok(match a {
            Scalar::Rat(x) => Scalar::Rat(x.recip()),
            Scalar::Fp(x) => Scalar::Fp(inv_mod(*x, self.characteristic())),
            Scalar::Ext(v) => self.ext_inv(v)?,
        })
    }

    fn ext_inv(&self, v: &[Scalar]) -> Result<Scalar, KernelError> {
        // Extended Euclid of v against the minimal polynomial over the base.
        let e = self.ext().expect("ext element in base field");
        let bf = self.base_field();
        let d = e.minpoly.len() - 1;
        let mut r0: Vec<Scalar> = e.minpoly.clone();
        let mut r1: Vec<Scalar> = v.to_vec();
        trim(&bf, &mut r1);
        let mut s0: Vec<Scalar> = vec![];
        let mut s1: Vec<Scalar> = vec![bf.one()];
        while !r1.is_empty() {
            let (q, r) = base_divrem(&bf, &r0, &r1)?;
            let s = base_sub(&bf, &s0, &base_mul(&bf, &q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.len() != 1 {
            return Err(KernelError::NotInvertible);
        }
        let c = bf.inv(&r0[0])?;
        let mut out: Vec<Scalar> = s0.iter().map(|x| bf.mul(x, &c)).collect();
        out.resize(d, bf.zero());
        Ok(self.normalize_ext(Scalar::Ext(out)))
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, KernelError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// Number of elements for finite fields, None for characteristic 0.
    pub fn order(&self) -> Option<u128> {
        match self.0.base {
            Base::Q => None,
            Base::Fp(p) => {
                let d = self.ext_degree() as u32;
                Some((p as u128).pow(d))
            }
        }
    }

    pub fn scalar_string(&self, s: &Scalar) -> String {
        match s {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp(x) => format!("{x}"),
            Scalar::Ext(v) => {
                let bf = self.base_field();
                let name = self.ext().map(|e| e.name.as_str()).unwrap_or("a");
                let mut parts = vec![];
                for (i, c) in v.iter().enumerate() {
                    if bf.is_zero(c) {
                        continue;
                    }
                    let cs = bf.scalar_string(c);
                    let part = match i {
                        0 => cs,
                        1 if cs == "1" => name.to_string(),
                        1 => format!("{cs}*{name}"),
                        _ if cs == "1" => format!("{name}^{i}"),
                        _ => format!("{cs}*{name}^{i}"),
                    };
                    parts.push(part);
                }
                if parts.is_empty() {
                    "0".to_string()
                } else {
                    parts.join(" + ")
                }
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base() {
            Base::Q => write!(f, "Q")?,
            Base::Fp(p) => write!(f, "F{p}")?,
        }
        if let Some(e) = self.ext() {
            write!(f, "({})[deg {}]", e.name, e.minpoly.len() - 1)?;
        }
        Ok(())
    }
}

// Small helpers for base-field polynomial vectors (used by ext arithmetic;
// the full univariate toolkit lives in `uni`).

pub(crate) fn trim(f: &Field, v: &mut Vec<Scalar>) {
    while v.last().map(|c| f.is_zero(c)).unwrap_or(false) {
        v.pop();
    }
}

pub(crate) fn base_mul(f: &Field, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = f.mul(x, y);
            out[i + j] = f.add(&out[i + j], &t);
        }
    }
    let mut out = out;
    trim(f, &mut out);
    out
}

pub(crate) fn base_sub(f: &Field, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        out.push(f.sub(&x, &y));
    }
    trim(f, &mut out);
    out
}

pub(crate) fn base_divrem(
    f: &Field,
    a: &[Scalar],
    b: &[Scalar],
) -> Result<(Vec<Scalar>, Vec<Scalar>), KernelError> {
    if b.is_empty() {
        return Err(KernelError::DivisionByZero);
    }
    let mut r: Vec<Scalar> = a.to_vec();
    trim(f, &mut r);
    let db = b.len() - 1;
    let lead_inv = f.inv(&b[db])?;
    if r.len() < b.len() {
        return Ok((vec![], r));
    }
    let mut q = vec![f.zero(); r.len() - db];
    while r.len() >= b.len() {
        let dr = r.len() - 1;
        let c = f.mul(&r[dr], &lead_inv);
        q[dr - db] = c.clone();
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(&c, bj);
            r[dr - db + j] = f.sub(&r[dr - db + j], &t);
        }
        trim(f, &mut r);
        if r.is_empty() {
            break;
        }
    }
    trim(f, &mut q);
    Ok((q, r))
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        use num_traits::ToPrimitive;
        let m = self % BigInt::from(p);
        let m = if m.is_negative() { m + BigInt::from(p) } else { m };
        m.to_u64().expect("reduced residue fits u64")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic() {
        let q = Field::rationals();
        let a = q.from_rational(1, 2);
        let b = q.from_rational(1, 3);
        let s = q.add(&a, &b);
        assert_eq!(q.scalar_string(&s), "5/6");
        let p = q.mul(&a, &b);
        assert_eq!(q.scalar_string(&p), "1/6");
        assert!(q.is_one(&q.mul(&a, &q.inv(&a).unwrap())));
    }

    #[test]
    fn prime_field_validation() {
        assert!(Field::prime(2).is_err());
        assert!(Field::prime(3).is_err());
        assert!(Field::prime(4).is_err());
        assert!(Field::prime(5).is_ok());
        assert!(Field::prime(10007).is_ok());
    }

    #[test]
    fn fp_arithmetic() {
        let f = Field::prime(7).unwrap();
        let a = f.from_i64(3);
        let b = f.from_i64(5);
        assert_eq!(f.mul(&a, &b), Scalar::Fp(1));
        assert_eq!(f.inv(&a).unwrap(), Scalar::Fp(5));
        assert_eq!(f.from_i64(-1), Scalar::Fp(6));
    }

    #[test]
    fn quadratic_extension_arithmetic() {
        // Q(i): minpoly y^2 + 1.
        let q = Field::rationals();
        let minpoly = vec![q.one(), q.zero(), q.one()];
        let k = Field::with_extension(&q, minpoly, "i");
        let i = k.generator().unwrap();
        let i2 = k.mul(&i, &i);
        assert!(k.eq_scalar(&i2, &k.from_i64(-1)));
        let inv_i = k.inv(&i).unwrap();
        assert!(k.eq_scalar(&inv_i, &k.neg(&i)));
        // (1+i)(1-i) = 2
        let one = k.lift(&k.one());
        let a = k.add(&one, &i);
        let b = k.sub(&one, &i);
        assert!(k.eq_scalar(&k.mul(&a, &b), &k.from_i64(2)));
    }
}

//! Sparse exact-coefficient polynomials over O = k[t] localized at (t), in
//! the geometric variables of an ambient space plus the parameter t.
//!
//! Terms are kept sorted in the canonical order (graded lex, t last), so
//! structural equality, hashing, and printing are all canonical.

use std::cmp::Ordering;
use std::fmt;

use crate::ambient::{same_ambient, Ambient};
use crate::error::KernelError;

use super::field::{Field, Scalar};

/// Exponent vector: geometric variables in ambient order, then t.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub exps: Vec<u16>,
}

impl Monomial {
    pub fn unit(nvars: usize) -> Monomial {
        Monomial { exps: vec![0; nvars + 1] }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len() - 1
    }

    pub fn t_exp(&self) -> u16 {
        *self.exps.last().unwrap()
    }

    pub fn geo_degree(&self) -> i64 {
        self.exps[..self.exps.len() - 1].iter().map(|&e| e as i64).sum()
    }

    pub fn total_degree(&self) -> i64 {
        self.exps.iter().map(|&e| e as i64).sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> i64 {
        self.exps[..self.exps.len() - 1]
            .iter()
            .zip(weights)
            .map(|(&e, &w)| e as i64 * w as i64)
            .sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a - b).collect(),
        }
    }

    /// Canonical order: graded (total degree incl. t), then lex with the
    /// geometric variables first and t last.
    pub fn cmp_graded(&self, other: &Monomial) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

/// F = sum of coefficient * monomial, over an ambient and a field. Immutable
/// after construction; all operations are pure.
#[derive(Clone)]
pub struct DvrPolynomial {
    pub ambient: Ambient,
    pub field: Field,
    /// Sorted ascending by `cmp_graded`, no zero coefficients.
    terms: Vec<(Monomial, Scalar)>,
}

impl PartialEq for DvrPolynomial {
    fn eq(&self, other: &Self) -> bool {
        *self.ambient == *other.ambient && self.field == other.field && {
            self.terms.len() == other.terms.len()
                && self
                    .terms
                    .iter()
                    .zip(&other.terms)
                    .all(|(a, b)| a.0 == b.0 && self.field.eq_scalar(&a.1, &b.1))
        }
    }
}
impl Eq for DvrPolynomial {}

impl fmt::Debug for DvrPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl DvrPolynomial {
    pub fn zero(ambient: &Ambient, field: &Field) -> DvrPolynomial {
        DvrPolynomial { ambient: ambient.clone(), field: field.clone(), terms: vec![] }
    }

    pub fn constant(ambient: &Ambient, field: &Field, c: Scalar) -> DvrPolynomial {
        let mut p = Self::zero(ambient, field);
        if !field.is_zero(&c) {
            p.terms.push((Monomial::unit(ambient.nvars()), c));
        }
        p
    }

    pub fn one(ambient: &Ambient, field: &Field) -> DvrPolynomial {
        Self::constant(ambient, field, field.one())
    }

    pub fn int(ambient: &Ambient, field: &Field, n: i64) -> DvrPolynomial {
        Self::constant(ambient, field, field.from_i64(n))
    }

    pub fn var(ambient: &Ambient, field: &Field, name: &str) -> DvrPolynomial {
        let mut m = Monomial::unit(ambient.nvars());
        if name == "t" {
            *m.exps.last_mut().unwrap() = 1;
        } else {
            let i = ambient
                .var_index(name)
                .unwrap_or_else(|| panic!("unknown variable {name} in ambient"));
            m.exps[i] = 1;
        }
        DvrPolynomial {
            ambient: ambient.clone(),
            field: field.clone(),
            terms: vec![(m, field.one())],
        }
    }

    pub fn t(ambient: &Ambient, field: &Field) -> DvrPolynomial {
        Self::var(ambient, field, "t")
    }

    pub fn from_terms(
        ambient: &Ambient,
        field: &Field,
        terms: Vec<(Monomial, Scalar)>,
    ) -> DvrPolynomial {
        let mut p = DvrPolynomial { ambient: ambient.clone(), field: field.clone(), terms };
        p.canonicalize();
        p
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.0.cmp_graded(&b.0));
        let mut out: Vec<(Monomial, Scalar)> = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.drain(..) {
            if let Some(last) = out.last_mut() {
                if last.0 == m {
                    last.1 = self.field.add(&last.1, &c);
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !self.field.is_zero(c));
        self.terms = out;
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading term in the canonical order.
    pub fn leading(&self) -> Option<&(Monomial, Scalar)> {
        self.terms.last()
    }

    pub fn checked_add(&self, other: &DvrPolynomial) -> Result<DvrPolynomial, KernelError> {
        same_ambient(&self.ambient, &other.ambient)?;
        if self.field != other.field {
            return Err(KernelError::FieldMismatch);
        }
        let mut out: Vec<(Monomial, Scalar)> =
            Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp_graded(&other.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.field.add(&self.terms[i].1, &other.terms[j].1);
                    if !self.field.is_zero(&c) {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Ok(DvrPolynomial { ambient: self.ambient.clone(), field: self.field.clone(), terms: out })
    }

    pub fn checked_mul(&self, other: &DvrPolynomial) -> Result<DvrPolynomial, KernelError> {
        same_ambient(&self.ambient, &other.ambient)?;
        if self.field != other.field {
            return Err(KernelError::FieldMismatch);
        }
        let mut acc: Vec<(Monomial, Scalar)> = vec![];
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                acc.push((ma.mul(mb), self.field.mul(ca, cb)));
            }
        }
        let mut p = DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: acc,
        };
        p.canonicalize();
        Ok(p)
    }

    pub fn add(&self, other: &DvrPolynomial) -> DvrPolynomial {
        self.checked_add(other).expect("ambient/field mismatch in add")
    }

    pub fn sub(&self, other: &DvrPolynomial) -> DvrPolynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &DvrPolynomial) -> DvrPolynomial {
        self.checked_mul(other).expect("ambient/field mismatch in mul")
    }

    pub fn neg(&self) -> DvrPolynomial {
        DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), self.field.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> DvrPolynomial {
        if self.field.is_zero(c) {
            return Self::zero(&self.ambient, &self.field);
        }
        DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), self.field.mul(c, x))).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> DvrPolynomial {
        let mut acc = Self::one(&self.ambient, &self.field);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn mul_term(&self, m: &Monomial, c: &Scalar) -> DvrPolynomial {
        if self.field.is_zero(c) {
            return Self::zero(&self.ambient, &self.field);
        }
        DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mm.mul(m), self.field.mul(cc, c)))
                .collect(),
        }
    }

    /// Replace `var` by t^e * var; term count is unchanged.
    pub fn substitute_scale(&self, var: &str, e: u32) -> Result<DvrPolynomial, KernelError> {
        if var == "t" {
            return Err(KernelError::ScaleParameter);
        }
        let idx = self
            .ambient
            .var_index(var)
            .ok_or_else(|| KernelError::geometry(format!("unknown variable {var}")))?;
        let tslot = self.ambient.nvars();
        let mut terms = self.terms.clone();
        for (m, _) in terms.iter_mut() {
            let add_t = m.exps[idx] as u32 * e;
            m.exps[tslot] = (m.exps[tslot] as u32 + add_t)
                .try_into()
                .expect("t-exponent overflow");
        }
        let mut p =
            DvrPolynomial { ambient: self.ambient.clone(), field: self.field.clone(), terms };
        p.canonicalize();
        Ok(p)
    }

    /// Largest d with t^d dividing F.
    pub fn t_content(&self) -> Result<u32, KernelError> {
        if self.is_zero() {
            return Err(KernelError::ZeroPolynomial);
        }
        Ok(self.terms.iter().map(|(m, _)| m.t_exp() as u32).min().unwrap())
    }

    /// Exact division by t^d.
    pub fn divide_t(&self, d: u32) -> DvrPolynomial {
        let tslot = self.ambient.nvars();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut m = m.clone();
                let e = m.exps[tslot] as u32;
                assert!(e >= d, "t-division not exact");
                m.exps[tslot] = (e - d) as u16;
                (m, c.clone())
            })
            .collect();
        DvrPolynomial { ambient: self.ambient.clone(), field: self.field.clone(), terms }
    }

    /// F mod t: the terms with t-exponent zero.
    pub fn special_fiber(&self) -> DvrPolynomial {
        DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.t_exp() == 0).cloned().collect(),
        }
    }

    /// Coefficient of t^m as a t-free polynomial.
    pub fn t_coefficient(&self, order: u32) -> DvrPolynomial {
        let tslot = self.ambient.nvars();
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.t_exp() as u32 == order)
            .map(|(m, c)| {
                let mut m = m.clone();
                m.exps[tslot] = 0;
                (m, c.clone())
            })
            .collect();
        DvrPolynomial { ambient: self.ambient.clone(), field: self.field.clone(), terms }
    }

    pub fn max_t_exp(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.t_exp() as u32).max().unwrap_or(0)
    }

    /// Minimum of (t-exponent + total geometric degree) over the monomials.
    pub fn order_at_origin(&self) -> Result<i64, KernelError> {
        if self.is_zero() {
            return Err(KernelError::ZeroPolynomial);
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, _)| m.t_exp() as i64 + m.geo_degree())
            .min()
            .unwrap())
    }

    /// Sum of the monomials of order exactly d; d must be the actual order.
    pub fn initial_part(&self, d: i64) -> Result<DvrPolynomial, KernelError> {
        let actual = self.order_at_origin()?;
        if actual != d {
            return Err(KernelError::OrderMismatch { requested: d, actual });
        }
        Ok(DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.t_exp() as i64 + m.geo_degree() == d)
                .cloned()
                .collect(),
        })
    }

    /// Initial form with t replaced by the fresh variable tau; homogeneous of
    /// degree `order_at_origin` in (tau, x...).
    pub fn tangent_cone(&self) -> Result<DvrPolynomial, KernelError> {
        let d = self.order_at_origin()?;
        let init = self.initial_part(d)?;
        let mut names: Vec<&str> = vec!["tau"];
        let owned: Vec<String> = self.ambient.vars.clone();
        names.extend(owned.iter().map(|s| s.as_str()));
        let cone_ambient = crate::ambient::AmbientSpace::affine(&names);
        let n_old = self.ambient.nvars();
        let terms = init
            .terms
            .iter()
            .map(|(m, c)| {
                let mut exps = vec![0u16; n_old + 2];
                exps[0] = m.t_exp();
                for i in 0..n_old {
                    exps[1 + i] = m.exps[i];
                }
                (Monomial { exps }, c.clone())
            })
            .collect();
        Ok(DvrPolynomial { ambient: cone_ambient, field: self.field.clone(), terms })
    }

    /// Common weighted degree of all terms (t has weight 0), or the error
    /// describing the first mixed pair.
    pub fn weighted_degree(&self, weights: &[u32]) -> Result<i64, KernelError> {
        if self.is_zero() {
            return Err(KernelError::ZeroPolynomial);
        }
        let mut it = self.terms.iter();
        let d0 = it.next().unwrap().0.weighted_degree(weights);
        for (m, _) in it {
            let d = m.weighted_degree(weights);
            if d != d0 {
                return Err(KernelError::Inhomogeneous(d0, d));
            }
        }
        Ok(d0)
    }

    pub fn weighted_degree_ambient(&self) -> Result<i64, KernelError> {
        self.weighted_degree(&self.ambient.weights)
    }

    pub fn total_geo_degree(&self) -> i64 {
        self.terms.iter().map(|(m, _)| m.geo_degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: &str) -> i64 {
        let idx = match self.var_slot(var) {
            Some(i) => i,
            None => return 0,
        };
        self.terms.iter().map(|(m, _)| m.exps[idx] as i64).max().unwrap_or(0)
    }

    fn var_slot(&self, var: &str) -> Option<usize> {
        if var == "t" {
            Some(self.ambient.nvars())
        } else {
            self.ambient.var_index(var)
        }
    }

    /// Substitute a polynomial for a variable (or for t).
    pub fn substitute(&self, var: &str, value: &DvrPolynomial) -> DvrPolynomial {
        same_ambient(&self.ambient, &value.ambient).expect("substitute: ambient mismatch");
        let idx = self.var_slot(var).unwrap_or_else(|| panic!("unknown variable {var}"));
        let mut powers: Vec<DvrPolynomial> = vec![Self::one(&self.ambient, &self.field)];
        let mut acc = Self::zero(&self.ambient, &self.field);
        for (m, c) in &self.terms {
            let e = m.exps[idx] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap().mul(value);
                powers.push(next);
            }
            let mut rest = m.clone();
            rest.exps[idx] = 0;
            let term = powers[e].mul_term(&rest, c);
            acc = acc.add(&term);
        }
        acc
    }

    /// Simultaneous substitution of variables (not t).
    pub fn substitute_many(&self, map: &[(String, DvrPolynomial)]) -> DvrPolynomial {
        // Substitute through fresh accumulation to keep it simultaneous.
        let mut acc = Self::zero(&self.ambient, &self.field);
        let idxs: Vec<(usize, &DvrPolynomial)> = map
            .iter()
            .map(|(v, p)| {
                same_ambient(&self.ambient, &p.ambient).expect("substitute_many: ambient mismatch");
                (self.var_slot(v).unwrap_or_else(|| panic!("unknown variable {v}")), p)
            })
            .collect();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut term = Self::constant(&self.ambient, &self.field, c.clone());
            for (idx, p) in &idxs {
                let e = rest.exps[*idx];
                if e > 0 {
                    rest.exps[*idx] = 0;
                    term = term.mul(&p.pow(e as u32));
                }
            }
            acc = acc.add(&term.mul_term(&rest, &self.field.one()));
        }
        acc
    }

    /// Set a variable to 1 (chart dehomogenization), staying in the same
    /// ambient with that exponent dropped to zero.
    pub fn set_var_one(&self, var: &str) -> DvrPolynomial {
        let idx = self.var_slot(var).unwrap_or_else(|| panic!("unknown variable {var}"));
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut m = m.clone();
                m.exps[idx] = 0;
                (m, c.clone())
            })
            .collect();
        let mut p =
            DvrPolynomial { ambient: self.ambient.clone(), field: self.field.clone(), terms };
        p.canonicalize();
        p
    }

    /// Coefficients by the power of a variable, index = power.
    pub fn coefficients_in(&self, var: &str) -> Vec<DvrPolynomial> {
        let idx = self.var_slot(var).unwrap_or_else(|| panic!("unknown variable {var}"));
        let d = self.terms.iter().map(|(m, _)| m.exps[idx]).max().unwrap_or(0) as usize;
        let mut out = vec![Self::zero(&self.ambient, &self.field); d + 1];
        for (m, c) in &self.terms {
            let e = m.exps[idx] as usize;
            let mut mm = m.clone();
            mm.exps[idx] = 0;
            out[e].terms.push((mm, c.clone()));
        }
        for p in out.iter_mut() {
            p.canonicalize();
        }
        out
    }

    pub fn derivative(&self, var: &str) -> DvrPolynomial {
        let idx = self.var_slot(var).unwrap_or_else(|| panic!("unknown variable {var}"));
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps[idx] > 0)
            .map(|(m, c)| {
                let mut m = m.clone();
                let e = m.exps[idx];
                m.exps[idx] = e - 1;
                (m, self.field.mul(c, &self.field.from_i64(e as i64)))
            })
            .collect();
        let mut p =
            DvrPolynomial { ambient: self.ambient.clone(), field: self.field.clone(), terms };
        p.canonicalize();
        p
    }

    /// Evaluate at a full point (geometric coordinates + t).
    pub fn eval(&self, geo: &[Scalar], t: &Scalar) -> Scalar {
        let k = &self.field;
        let mut acc = k.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.exps[..m.nvars()].iter().enumerate() {
                if e > 0 {
                    term = k.mul(&term, &k.pow(&geo[i], e as u64));
                }
            }
            let te = m.t_exp();
            if te > 0 {
                term = k.mul(&term, &k.pow(t, te as u64));
            }
            acc = k.add(&acc, &term);
        }
        acc
    }

    /// Drop terms of total degree (incl. t) above the bound.
    pub fn truncate_total_degree(&self, bound: i64) -> DvrPolynomial {
        DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() <= bound)
                .cloned()
                .collect(),
        }
    }

    /// Drop terms with t-exponent above the bound.
    pub fn truncate_t(&self, bound: u32) -> DvrPolynomial {
        DvrPolynomial {
            ambient: self.ambient.clone(),
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| (m.t_exp() as u32) <= bound)
                .cloned()
                .collect(),
        }
    }

    /// Map into another ambient by variable names. Variables absent from the
    /// target must not actually occur.
    pub fn map_to_ambient(&self, target: &Ambient) -> Result<DvrPolynomial, KernelError> {
        let n_new = target.nvars();
        let slot_map: Vec<Option<usize>> =
            self.ambient.vars.iter().map(|v| target.var_index(v)).collect();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut exps = vec![0u16; n_new + 1];
            for (i, &e) in m.exps[..m.nvars()].iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match slot_map[i] {
                    Some(j) => exps[j] = e,
                    None => {
                        return Err(KernelError::geometry(format!(
                            "variable {} missing in target ambient",
                            self.ambient.vars[i]
                        )))
                    }
                }
            }
            exps[n_new] = m.t_exp();
            terms.push((Monomial { exps }, c.clone()));
        }
        let mut p = DvrPolynomial { ambient: target.clone(), field: self.field.clone(), terms };
        p.canonicalize();
        Ok(p)
    }

    /// Map coefficients through a field embedding.
    pub fn map_field(&self, embed: &super::uni::FieldEmbedding) -> DvrPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), embed.map(c)))
            .filter(|(_, c)| !embed.dst.is_zero(c))
            .collect();
        DvrPolynomial { ambient: self.ambient.clone(), field: embed.dst.clone(), terms }
    }

    /// Normalize the leading coefficient to 1 (state hashing).
    pub fn normalize_leading(&self) -> DvrPolynomial {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = self.field.inv(c).expect("leading coefficient invertible");
                self.scale(&inv)
            }
        }
    }

    /// Canonical textual form; used for state hashes and reports.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let k = &self.field;
        let mut parts = vec![];
        for (m, c) in self.terms.iter().rev() {
            let mut factors = vec![];
            let cs = k.scalar_string(c);
            for (i, &e) in m.exps[..m.nvars()].iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.ambient.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.ambient.vars[i], e)),
                }
            }
            match m.t_exp() {
                0 => {}
                1 => factors.push("t".to_string()),
                e => factors.push(format!("t^{e}")),
            }
            let body = factors.join("*");
            let part = if body.is_empty() {
                cs
            } else if cs == "1" {
                body
            } else if cs == "-1" {
                format!("-{body}")
            } else if cs.contains(' ') || cs.contains('+') {
                format!("({cs})*{body}")
            } else {
                format!("{cs}*{body}")
            };
            parts.push(part);
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

impl fmt::Display for DvrPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientSpace;

    fn setup() -> (Ambient, Field) {
        (AmbientSpace::p3(), Field::rationals())
    }

    fn v(a: &Ambient, k: &Field, name: &str) -> DvrPolynomial {
        DvrPolynomial::var(a, k, name)
    }

    #[test]
    fn add_inverse_is_zero() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        assert!(x.add(&x.neg()).is_zero());
    }

    #[test]
    fn direct_add() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        let t = DvrPolynomial::t(&a, &k);
        // (x^2+t) + t = x^2 + 2t
        let f = x.mul(&x).add(&t);
        let s = f.add(&t);
        assert_eq!(s.render(), "x0^2 + 2*t");
    }

    #[test]
    fn mul_unit_and_difference_of_squares() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        let t = DvrPolynomial::t(&a, &k);
        let one = DvrPolynomial::one(&a, &k);
        let f = x.add(&t);
        assert_eq!(f.mul(&one), f);
        let g = x.sub(&t);
        let prod = f.mul(&g);
        assert_eq!(prod.render(), "x0^2 - t^2");
    }

    #[test]
    fn substitute_scale_single_monomial() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        let f = x.mul(&x);
        let g = f.substitute_scale("x0", 1).unwrap();
        assert_eq!(g.render(), "x0^2*t^2");
        assert_eq!(g.num_terms(), f.num_terms());
        assert!(f.substitute_scale("t", 1).is_err());
    }

    #[test]
    fn t_content_and_fiber() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        let t = DvrPolynomial::t(&a, &k);
        // t^2 x + t^3 -> content 2
        let f = t.pow(2).mul(&x).add(&t.pow(3));
        assert_eq!(f.t_content().unwrap(), 2);
        let g = x.add(&t);
        assert_eq!(g.t_content().unwrap(), 0);
        // special fiber
        let h = x.mul(&x).add(&t.mul(&v(&a, &k, "x1")));
        assert_eq!(h.special_fiber().render(), "x0^2");
        assert!(t.mul(&x).special_fiber().is_zero());
    }

    #[test]
    fn order_and_initial_and_cone() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        let y = v(&a, &k, "x1");
        let t = DvrPolynomial::t(&a, &k);
        // x^2 + t^4 -> order 2
        let f = x.pow(2).add(&t.pow(4));
        assert_eq!(f.order_at_origin().unwrap(), 2);
        // t*x*y + t^3 -> 3
        let g = t.mul(&x).mul(&y).add(&t.pow(3));
        assert_eq!(g.order_at_origin().unwrap(), 3);
        // initial part
        let h = x.pow(2).add(&x.mul(&y)).add(&t.mul(&y.pow(3)));
        let init = h.initial_part(2).unwrap();
        assert_eq!(init.render(), "x0^2 + x0*x1");
        assert!(h.initial_part(3).is_err());
        // x^2 + t*x + t^3: both x^2 and t*x have order 2
        let p = x.pow(2).add(&t.mul(&x)).add(&t.pow(3));
        let cone = p.tangent_cone().unwrap();
        assert_eq!(cone.render(), "x0^2 + tau*x0");
        // x^2 + t*y: both monomials order 2, cone keeps both
        let q = x.pow(2).add(&t.mul(&y));
        assert_eq!(q.tangent_cone().unwrap().render(), "x0^2 + tau*x1");
    }

    #[test]
    fn weighted_degrees() {
        let a = AmbientSpace::wp2111();
        let k = Field::rationals();
        let u = DvrPolynomial::var(&a, &k, "u");
        let x1 = DvrPolynomial::var(&a, &k, "x1");
        assert_eq!(u.pow(2).weighted_degree_ambient().unwrap(), 4);
        // u^2 + x1^3: 4 vs 3 -> error
        assert!(u.pow(2).add(&x1.pow(3)).weighted_degree_ambient().is_err());
        // single term of weight 5 is fine
        let m = x1
            .mul(&DvrPolynomial::var(&a, &k, "x2"))
            .mul(&DvrPolynomial::var(&a, &k, "x3"))
            .mul(&u);
        assert_eq!(m.weighted_degree_ambient().unwrap(), 5);
    }

    #[test]
    fn substitution_and_coefficients() {
        let (a, k) = setup();
        let x = v(&a, &k, "x0");
        let y = v(&a, &k, "x1");
        let f = x.pow(2).add(&x.mul(&y)).add(&y.pow(2));
        let g = f.substitute("x0", &y);
        assert_eq!(g.render(), "3*x1^2");
        let coeffs = f.coefficients_in("x0");
        assert_eq!(coeffs.len(), 3);
        assert_eq!(coeffs[0].render(), "x1^2");
        assert_eq!(coeffs[1].render(), "x1");
        assert_eq!(coeffs[2].render(), "1");
    }
}

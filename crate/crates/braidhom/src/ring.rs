//! Exact Laurent-polynomial arithmetic over Q and over prime fields F_p.
//!
//! `LaurentPoly` stores coefficients in ascending exponent order starting at
//! `low`. The representation is canonical: the coefficient vector is empty for
//! the zero polynomial, and otherwise its first and last entries are nonzero.
//! All arithmetic is exact; rationals are arbitrary precision and F_p elements
//! are residues in `0..p`.
//!
//! Units of F[t^±1] are the monomials c·t^k with c ≠ 0. The canonical
//! representative of a nonzero polynomial modulo units is monic with nonzero
//! constant term; `unit_normalize` produces it together with the unit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not a prime number")]
    NotPrime(u64),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("zero input to {0}")]
    ZeroInput(&'static str),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("inexact division: {1} does not divide {0}")]
    NotDivisible(String, String),
    #[error("{0} requires an argument >= 1")]
    ZeroArgument(&'static str),
}

/// The coefficient field: Q or F_p with p prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    repr: FieldRepr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum FieldRepr {
    Rationals,
    Prime(u64),
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec {
            repr: FieldRepr::Rationals,
        }
    }

    /// A prime field F_p. Fails if `p` is not prime.
    pub fn prime(p: u64) -> Result<Self, RingError> {
        if is_prime(p) {
            Ok(FieldSpec {
                repr: FieldRepr::Prime(p),
            })
        } else {
            Err(RingError::NotPrime(p))
        }
    }

    pub fn is_rationals(&self) -> bool {
        self.repr == FieldRepr::Rationals
    }

    pub fn prime_modulus(&self) -> Option<u64> {
        match self.repr {
            FieldRepr::Rationals => None,
            FieldRepr::Prime(p) => Some(p),
        }
    }

    /// Machine token: `q`, `f2`, `f3`, `f5`, or `fp:<p>`.
    pub fn token(&self) -> String {
        match self.repr {
            FieldRepr::Rationals => "q".to_string(),
            FieldRepr::Prime(p @ (2 | 3 | 5)) => format!("f{p}"),
            FieldRepr::Prime(p) => format!("fp:{p}"),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            FieldRepr::Rationals => write!(f, "Q"),
            FieldRepr::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Euler's totient, by trial-division factorization.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut phi = n;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            phi -= phi / d;
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid on i128; p prime and a != 0 mod p
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "element not invertible mod {p}");
    t.rem_euclid(p as i128) as u64
}

fn mod_mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Coeffs {
    Rat(Vec<BigRational>),
    Mod(Vec<u64>),
}

impl Coeffs {
    fn len(&self) -> usize {
        match self {
            Coeffs::Rat(v) => v.len(),
            Coeffs::Mod(v) => v.len(),
        }
    }

    fn is_zero_at(&self, i: usize) -> bool {
        match self {
            Coeffs::Rat(v) => v[i].is_zero(),
            Coeffs::Mod(v) => v[i] == 0,
        }
    }
}

/// A Laurent polynomial over a fixed coefficient field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    field: FieldSpec,
    low: i64,
    coeffs: Coeffs,
}

impl LaurentPoly {
    fn empty_coeffs(field: FieldSpec) -> Coeffs {
        match field.prime_modulus() {
            None => Coeffs::Rat(Vec::new()),
            Some(_) => Coeffs::Mod(Vec::new()),
        }
    }

    pub fn zero(field: FieldSpec) -> Self {
        LaurentPoly {
            field,
            low: 0,
            coeffs: Self::empty_coeffs(field),
        }
    }

    pub fn one(field: FieldSpec) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: FieldSpec, c: i64) -> Self {
        Self::monomial(field, c, 0)
    }

    /// The indeterminate t.
    pub fn t(field: FieldSpec) -> Self {
        Self::monomial(field, 1, 1)
    }

    /// c·t^exp.
    pub fn monomial(field: FieldSpec, c: i64, exp: i64) -> Self {
        Self::from_int_coeffs(field, exp, &[c])
    }

    /// (−t)^e = (−1)^e · t^e, for any integer e.
    pub fn neg_t_pow(field: FieldSpec, e: i64) -> Self {
        let sign = if e.rem_euclid(2) == 0 { 1 } else { -1 };
        Self::monomial(field, sign, e)
    }

    /// From integer coefficients `cs[i]` of t^(low+i); reduces into the field.
    pub fn from_int_coeffs(field: FieldSpec, low: i64, cs: &[i64]) -> Self {
        let coeffs = match field.prime_modulus() {
            None => Coeffs::Rat(cs.iter().map(|&c| BigRational::from_integer(c.into())).collect()),
            Some(p) => Coeffs::Mod(cs.iter().map(|&c| (c.rem_euclid(p as i64)) as u64).collect()),
        };
        let mut poly = LaurentPoly { field, low, coeffs };
        poly.canonicalize();
        poly
    }

    fn from_rat_coeffs(field: FieldSpec, low: i64, cs: Vec<BigRational>) -> Self {
        debug_assert!(field.is_rationals());
        let mut poly = LaurentPoly {
            field,
            low,
            coeffs: Coeffs::Rat(cs),
        };
        poly.canonicalize();
        poly
    }

    fn from_mod_coeffs(field: FieldSpec, low: i64, cs: Vec<u64>) -> Self {
        let mut poly = LaurentPoly {
            field,
            low,
            coeffs: Coeffs::Mod(cs),
        };
        poly.canonicalize();
        poly
    }

    /// Trim leading/trailing zeros and adjust `low`.
    fn canonicalize(&mut self) {
        let len = self.coeffs.len();
        let mut start = 0;
        while start < len && self.coeffs.is_zero_at(start) {
            start += 1;
        }
        if start == len {
            self.low = 0;
            self.coeffs = Self::empty_coeffs(self.field);
            return;
        }
        let mut end = len;
        while end > start && self.coeffs.is_zero_at(end - 1) {
            end -= 1;
        }
        self.low += start as i64;
        match &mut self.coeffs {
            Coeffs::Rat(v) => {
                v.drain(end..);
                v.drain(..start);
            }
            Coeffs::Mod(v) => {
                v.drain(end..);
                v.drain(..start);
            }
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 0
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one(self.field)
    }

    /// True iff the polynomial is a unit of F[t^±1], i.e. a single monomial.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// Exponent of the least term (0 for the zero polynomial).
    pub fn low_exponent(&self) -> i64 {
        self.low
    }

    /// Exponent of the greatest term, None for zero.
    pub fn degree(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.low + self.coeffs.len() as i64 - 1)
        }
    }

    /// Degree spread high − low; the Euclidean norm used for pivoting.
    /// Returns 0 for the zero polynomial (which is never a valid pivot).
    pub fn span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn check_field(&self, other: &Self) -> Result<(), RingError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(RingError::FieldMismatch(self.field, other.field))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RingError> {
        self.check_field(other)?;
        Ok(self.add_impl(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, RingError> {
        self.check_field(other)?;
        Ok(self.add_impl(other, true))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check_field(other)?;
        Ok(self.mul_impl(other))
    }

    fn add_impl(&self, other: &Self, subtract: bool) -> Self {
        if self.is_zero() {
            return if subtract { other.neg() } else { other.clone() };
        }
        if other.is_zero() {
            return self.clone();
        }
        let low = self.low.min(other.low);
        let high = (self.low + self.coeffs.len() as i64).max(other.low + other.coeffs.len() as i64);
        let len = (high - low) as usize;
        match (&self.coeffs, &other.coeffs) {
            (Coeffs::Rat(a), Coeffs::Rat(b)) => {
                let mut out = vec![BigRational::zero(); len];
                for (i, c) in a.iter().enumerate() {
                    out[(self.low - low) as usize + i] += c;
                }
                for (i, c) in b.iter().enumerate() {
                    let slot = &mut out[(other.low - low) as usize + i];
                    if subtract {
                        *slot -= c;
                    } else {
                        *slot += c;
                    }
                }
                Self::from_rat_coeffs(self.field, low, out)
            }
            (Coeffs::Mod(a), Coeffs::Mod(b)) => {
                let p = self.field.prime_modulus().unwrap();
                let mut out = vec![0u64; len];
                for (i, &c) in a.iter().enumerate() {
                    let slot = &mut out[(self.low - low) as usize + i];
                    *slot = (*slot + c) % p;
                }
                for (i, &c) in b.iter().enumerate() {
                    let slot = &mut out[(other.low - low) as usize + i];
                    let c = if subtract { (p - c) % p } else { c };
                    *slot = (*slot + c) % p;
                }
                Self::from_mod_coeffs(self.field, low, out)
            }
            _ => unreachable!("field agreement checked"),
        }
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field);
        }
        let low = self.low + other.low;
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        match (&self.coeffs, &other.coeffs) {
            (Coeffs::Rat(a), Coeffs::Rat(b)) => {
                let mut out = vec![BigRational::zero(); len];
                for (i, ca) in a.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (j, cb) in b.iter().enumerate() {
                        if cb.is_zero() {
                            continue;
                        }
                        out[i + j] += ca * cb;
                    }
                }
                Self::from_rat_coeffs(self.field, low, out)
            }
            (Coeffs::Mod(a), Coeffs::Mod(b)) => {
                let p = self.field.prime_modulus().unwrap();
                let mut out = vec![0u64; len];
                for (i, &ca) in a.iter().enumerate() {
                    if ca == 0 {
                        continue;
                    }
                    for (j, &cb) in b.iter().enumerate() {
                        if cb == 0 {
                            continue;
                        }
                        out[i + j] = (out[i + j] + mod_mul(ca, cb, p)) % p;
                    }
                }
                Self::from_mod_coeffs(self.field, low, out)
            }
            _ => unreachable!("field agreement checked"),
        }
    }

    pub fn neg(&self) -> Self {
        match &self.coeffs {
            Coeffs::Rat(v) => LaurentPoly {
                field: self.field,
                low: self.low,
                coeffs: Coeffs::Rat(v.iter().map(|c| -c).collect()),
            },
            Coeffs::Mod(v) => {
                let p = self.field.prime_modulus().unwrap();
                LaurentPoly {
                    field: self.field,
                    low: self.low,
                    coeffs: Coeffs::Mod(v.iter().map(|&c| (p - c) % p).collect()),
                }
            }
        }
    }

    /// Division with remainder: self = q·divisor + r with span(r) < span(divisor)
    /// (r = 0 when the division is exact). Total on nonzero divisors because
    /// units t^k are invertible.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), RingError> {
        self.check_field(divisor)?;
        if divisor.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok((Self::zero(self.field), Self::zero(self.field)));
        }
        // Work on the unit-stripped parts: polynomial division in F[t].
        match (&self.coeffs, &divisor.coeffs) {
            (Coeffs::Rat(a), Coeffs::Rat(b)) => {
                let mut rem = a.clone();
                let db = b.len() - 1;
                let lead_inv = b[db].recip();
                let mut quot = vec![BigRational::zero(); rem.len().saturating_sub(db)];
                while rem.len() > db {
                    let k = rem.len() - 1 - db;
                    let factor = &rem[rem.len() - 1] * &lead_inv;
                    if !factor.is_zero() {
                        for (j, cb) in b.iter().enumerate() {
                            if !cb.is_zero() {
                                let v = &factor * cb;
                                rem[k + j] -= v;
                            }
                        }
                        quot[k] = factor;
                    }
                    rem.pop();
                }
                let q = Self::from_rat_coeffs(self.field, self.low - divisor.low, quot);
                let r = Self::from_rat_coeffs(self.field, self.low, rem);
                Ok((q, r))
            }
            (Coeffs::Mod(a), Coeffs::Mod(b)) => {
                let p = self.field.prime_modulus().unwrap();
                let mut rem = a.clone();
                let db = b.len() - 1;
                let lead_inv = mod_inv(b[db], p);
                let mut quot = vec![0u64; rem.len().saturating_sub(db)];
                while rem.len() > db {
                    let k = rem.len() - 1 - db;
                    let factor = mod_mul(rem[rem.len() - 1], lead_inv, p);
                    if factor != 0 {
                        for (j, &cb) in b.iter().enumerate() {
                            if cb != 0 {
                                let v = mod_mul(factor, cb, p);
                                rem[k + j] = (rem[k + j] + p - v) % p;
                            }
                        }
                        quot[k] = factor;
                    }
                    rem.pop();
                }
                let q = Self::from_mod_coeffs(self.field, self.low - divisor.low, quot);
                let r = Self::from_mod_coeffs(self.field, self.low, rem);
                Ok((q, r))
            }
            _ => unreachable!("field agreement checked"),
        }
    }

    /// Exact division; errors if the remainder is nonzero.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, RingError> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(RingError::NotDivisible(self.to_string(), divisor.to_string()))
        }
    }

    pub fn divides(&self, other: &Self) -> bool {
        match other.div_rem(self) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => false,
        }
    }

    /// Split a nonzero polynomial as unit · canon, where the unit is the
    /// monomial c_top·t^low and canon is monic with nonzero constant term.
    pub fn unit_normalize(&self) -> Result<(Self, Self), RingError> {
        if self.is_zero() {
            return Err(RingError::ZeroInput("unit_normalize"));
        }
        let unit = match &self.coeffs {
            Coeffs::Rat(v) => LaurentPoly {
                field: self.field,
                low: self.low,
                coeffs: Coeffs::Rat(vec![v[v.len() - 1].clone()]),
            },
            Coeffs::Mod(v) => LaurentPoly {
                field: self.field,
                low: self.low,
                coeffs: Coeffs::Mod(vec![v[v.len() - 1]]),
            },
        };
        let canon = self.mul_impl(&unit.unit_inverse());
        Ok((unit, canon))
    }

    /// Canonical representative modulo units; zero maps to zero.
    pub fn canonical(&self) -> Self {
        match self.unit_normalize() {
            Ok((_, canon)) => canon,
            Err(_) => Self::zero(self.field),
        }
    }

    /// Inverse of a unit monomial c·t^k. Panics if self is not a unit.
    pub(crate) fn unit_inverse(&self) -> Self {
        assert!(self.is_unit(), "unit_inverse on a non-unit");
        match &self.coeffs {
            Coeffs::Rat(v) => LaurentPoly {
                field: self.field,
                low: -self.low,
                coeffs: Coeffs::Rat(vec![v[0].recip()]),
            },
            Coeffs::Mod(v) => {
                let p = self.field.prime_modulus().unwrap();
                LaurentPoly {
                    field: self.field,
                    low: -self.low,
                    coeffs: Coeffs::Mod(vec![mod_inv(v[0], p)]),
                }
            }
        }
    }

    /// Monic generator (with nonzero constant term) of the ideal (self, other).
    pub fn gcd(&self, other: &Self) -> Result<Self, RingError> {
        self.check_field(other)?;
        if self.is_zero() && other.is_zero() {
            return Err(RingError::ZeroInput("gcd"));
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.canonical())
    }

    /// Sum of the coefficients, i.e. the value at t = 1, as a constant.
    pub fn eval_at_one(&self) -> Self {
        match &self.coeffs {
            Coeffs::Rat(v) => {
                let mut acc = BigRational::zero();
                for c in v {
                    acc += c;
                }
                Self::from_rat_coeffs(self.field, 0, vec![acc])
            }
            Coeffs::Mod(v) => {
                let p = self.field.prime_modulus().unwrap();
                let mut acc = 0u64;
                for &c in v {
                    acc = (acc + c) % p;
                }
                Self::from_mod_coeffs(self.field, 0, vec![acc])
            }
        }
    }

    /// Coefficient list reversed, keeping the same low exponent.
    pub fn reversed(&self) -> Self {
        match &self.coeffs {
            Coeffs::Rat(v) => {
                let mut w = v.clone();
                w.reverse();
                Self::from_rat_coeffs(self.field, self.low, w)
            }
            Coeffs::Mod(v) => {
                let mut w = v.clone();
                w.reverse();
                Self::from_mod_coeffs(self.field, self.low, w)
            }
        }
    }

    /// Numerator/denominator pairs of the rational coefficients, in order.
    /// Empty for prime-field polynomials.
    pub(crate) fn rational_coefficients(&self) -> Vec<(BigInt, BigInt)> {
        match &self.coeffs {
            Coeffs::Rat(v) => v.iter().map(|c| (c.numer().clone(), c.denom().clone())).collect(),
            Coeffs::Mod(_) => Vec::new(),
        }
    }

    /// The constant unit given by a nonzero rational scalar.
    pub(crate) fn from_rational_unit(field: FieldSpec, scale: BigRational) -> Self {
        debug_assert!(field.is_rationals() && !scale.is_zero());
        Self::from_rat_coeffs(field, 0, vec![scale])
    }

    /// Map an integer-coefficient polynomial into another field.
    /// Errors if a rational coefficient is not integral (cannot happen for the
    /// cyclotomic and q-factorial polynomials this is used on).
    pub fn map_to_field(&self, field: FieldSpec) -> Result<Self, RingError> {
        if field == self.field {
            return Ok(self.clone());
        }
        match (&self.coeffs, field.prime_modulus()) {
            (Coeffs::Rat(v), Some(p)) => {
                let mut out = Vec::with_capacity(v.len());
                for c in v {
                    if !c.denom().is_one() {
                        return Err(RingError::NotDivisible(self.to_string(), field.to_string()));
                    }
                    let m: BigInt = c.numer() % BigInt::from(p);
                    let m = if m.is_negative() { m + BigInt::from(p) } else { m };
                    let digits = m.to_u64_digits().1;
                    out.push(digits.first().copied().unwrap_or(0));
                }
                Ok(Self::from_mod_coeffs(field, self.low, out))
            }
            (Coeffs::Mod(v), None) => Ok(Self::from_rat_coeffs(
                field,
                self.low,
                v.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
            )),
            _ => Err(RingError::FieldMismatch(self.field, field)),
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in 0..self.coeffs.len() {
            if self.coeffs.is_zero_at(i) {
                continue;
            }
            let exp = self.low + i as i64;
            let (neg, mag) = match &self.coeffs {
                Coeffs::Rat(v) => {
                    let c = &v[i];
                    (c.is_negative(), c.abs().to_string())
                }
                Coeffs::Mod(v) => (false, v[i].to_string()),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_coeff = mag == "1";
            match (exp, unit_coeff) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{mag}*t")?,
                (e, true) => write!(f, "t^{e}")?,
                (e, false) => write!(f, "{mag}*t^{e}")?,
            }
        }
        Ok(())
    }
}

/// The cyclotomic polynomial μ_d, by the recursion
/// μ_d = (t^d − 1) / Π_{e|d, e<d} μ_e, reduced into the given field.
pub fn cyclotomic(d: u64, field: FieldSpec) -> Result<LaurentPoly, RingError> {
    if d == 0 {
        return Err(RingError::ZeroArgument("cyclotomic"));
    }
    let divisors: Vec<u64> = (1..=d).filter(|e| d % e == 0).collect();
    let mut table: Vec<LaurentPoly> = Vec::with_capacity(divisors.len());
    for (idx, &e) in divisors.iter().enumerate() {
        let mut cs = vec![0i64; e as usize + 1];
        cs[0] = -1;
        cs[e as usize] = 1;
        let mut num = LaurentPoly::from_int_coeffs(field, 0, &cs);
        for (jdx, &ej) in divisors.iter().enumerate().take(idx) {
            if e % ej == 0 {
                num = num.exact_div(&table[jdx])?;
            }
        }
        table.push(num);
    }
    Ok(table.pop().expect("d is its own divisor"))
}

/// The q-integer [j]_t = 1 + t + … + t^{j−1}.
pub fn q_integer(j: u64, field: FieldSpec) -> Result<LaurentPoly, RingError> {
    if j == 0 {
        return Err(RingError::ZeroArgument("q_integer"));
    }
    Ok(LaurentPoly::from_int_coeffs(field, 0, &vec![1i64; j as usize]))
}

/// The q-factorial [m]_t! = Π_{j=1..m} [j]_t.
pub fn q_factorial(m: u64, field: FieldSpec) -> Result<LaurentPoly, RingError> {
    if m == 0 {
        return Err(RingError::ZeroArgument("q_factorial"));
    }
    let mut acc = LaurentPoly::one(field);
    for j in 1..=m {
        acc = acc.checked_mul(&q_integer(j, field)?)?;
    }
    Ok(acc)
}

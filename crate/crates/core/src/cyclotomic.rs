//! Roots of unity and exact elements of ℤ[ζ_N].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Integer polynomial, coefficients listed from degree 0 upwards.
pub type IntPoly = Vec<BigInt>;

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Distinct prime divisors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

/// The value e^{2πi·e/N}.
#[derive(Clone, Copy, Debug)]
pub struct RootOfUnity {
    order: u64,
    exp: u64,
}

impl RootOfUnity {
    pub fn new(order: u64, exp: i64) -> Self {
        assert!(order > 0, "root of unity of order 0");
        let e = (exp as i128).rem_euclid(order as i128) as u64;
        RootOfUnity { order, exp: e }
    }

    pub fn one(order: u64) -> Self {
        Self::new(order, 0)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    /// Same value written with order `m`.
    pub fn rescale(&self, m: u64) -> Result<Self> {
        if m != 0 && !m.is_multiple_of(self.order) {
            return self.minimal().rescale_exact(m);
        }
        self.rescale_exact(m)
    }

    fn rescale_exact(&self, m: u64) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(self.order) {
            return Err(Error::OrderMismatch(format!(
                "{} does not divide {}",
                self.order, m
            )));
        }
        Ok(RootOfUnity {
            order: m,
            exp: self.exp * (m / self.order),
        })
    }

    /// Representation with the smallest possible order.
    pub fn minimal(&self) -> Self {
        let g = gcd_u64(self.exp, self.order);
        RootOfUnity {
            order: self.order / g,
            exp: self.exp / g,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = lcm_u64(self.order, other.order);
        let a = self.exp as u128 * (m / self.order) as u128;
        let b = other.exp as u128 * (m / other.order) as u128;
        RootOfUnity {
            order: m,
            exp: ((a + b) % m as u128) as u64,
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        let e = (self.exp as i128 * k as i128).rem_euclid(self.order as i128);
        RootOfUnity {
            order: self.order,
            exp: e as u64,
        }
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.minimal();
        let theta = std::f64::consts::TAU * (m.exp as f64) / (m.order as f64);
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl PartialEq for RootOfUnity {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.minimal(), other.minimal());
        a.order == b.order && a.exp == b.exp
    }
}

impl Eq for RootOfUnity {}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ζ_{}^{}", self.order, self.exp)
    }
}

/// A matrix entry: zero or a single root of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycScalar {
    Zero,
    Unit(RootOfUnity),
}

impl CycScalar {
    pub fn is_zero(&self) -> bool {
        matches!(self, CycScalar::Zero)
    }

    pub fn eval_complex(&self) -> Complex64 {
        match self {
            CycScalar::Zero => Complex64::new(0.0, 0.0),
            CycScalar::Unit(z) => z.to_complex(),
        }
    }
}

impl From<Option<RootOfUnity>> for CycScalar {
    fn from(v: Option<RootOfUnity>) -> Self {
        v.map_or(CycScalar::Zero, CycScalar::Unit)
    }
}

/// Element of ℤ[ζ_N] stored as a dense vector over exponents 0..N.
///
/// Arithmetic happens in the group ring ℤ[x]/(x^N − 1); `reduce` maps to
/// the canonical remainder modulo Φ_N.
#[derive(Clone, Debug)]
pub struct CycInt {
    order: u64,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    pub fn zero(order: u64) -> Self {
        assert!(order > 0, "cyclotomic ring of order 0");
        CycInt {
            order,
            coeffs: vec![BigInt::zero(); order as usize],
        }
    }

    pub fn from_int(order: u64, value: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = value.into();
        z
    }

    pub fn monomial(order: u64, exp: i64, coeff: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[(exp as i128).rem_euclid(order as i128) as usize] = coeff.into();
        z
    }

    pub fn unit(z: RootOfUnity) -> Self {
        Self::monomial(z.order, z.exp as i64, 1)
    }

    /// Sum of `coeff·ζ_N^exp` over the given pairs.
    pub fn from_terms(order: u64, terms: &[(i64, i64)]) -> Self {
        let mut z = Self::zero(order);
        for &(e, c) in terms {
            z.add_unit(e, &BigInt::from(c));
        }
        z
    }

    /// Group-ring vector with machine-integer coefficients.
    pub fn from_i64_slice(coeffs: &[i64]) -> Self {
        CycInt {
            order: coeffs.len() as u64,
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Raw group-ring coefficient at exponent `e`.
    pub fn coeff(&self, e: u64) -> &BigInt {
        &self.coeffs[(e % self.order) as usize]
    }

    pub fn rescale(&self, m: u64) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(self.order) {
            return Err(Error::OrderMismatch(format!(
                "{} does not divide {}",
                self.order, m
            )));
        }
        let step = (m / self.order) as usize;
        let mut out = Self::zero(m);
        for (e, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[e * step] = c.clone();
            }
        }
        Ok(out)
    }

    fn lift_pair(a: &CycInt, b: &CycInt) -> (CycInt, CycInt) {
        if a.order == b.order {
            return (a.clone(), b.clone());
        }
        let m = lcm_u64(a.order, b.order);
        (a.rescale(m).unwrap(), b.rescale(m).unwrap())
    }

    /// Adds `c·ζ_N^e` in place.
    pub fn add_unit(&mut self, e: i64, c: &BigInt) {
        let i = (e as i128).rem_euclid(self.order as i128) as usize;
        self.coeffs[i] += c;
    }

    /// Adds `ζ_N^e · other` in place; both must share the order.
    pub fn add_rotated(&mut self, other: &CycInt, e: u64) {
        assert_eq!(self.order, other.order, "order mismatch in add_rotated");
        let n = self.order as usize;
        let e = (e % self.order) as usize;
        for (i, c) in other.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let j = if i + e >= n { i + e - n } else { i + e };
                self.coeffs[j] += c;
            }
        }
    }

    /// Product with a root of unity.
    pub fn mul_unit(&self, z: &RootOfUnity) -> CycInt {
        let m = lcm_u64(self.order, z.order);
        let base = if m == self.order {
            self.clone()
        } else {
            self.rescale(m).unwrap()
        };
        let e = z.rescale(m).unwrap().exp;
        let mut out = CycInt::zero(m);
        out.add_rotated(&base, e);
        out
    }

    pub fn scale(&self, k: &BigInt) -> CycInt {
        CycInt {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Image under ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> CycInt {
        let n = self.order as usize;
        let mut out = CycInt::zero(self.order);
        for (e, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[(n - e) % n] = c.clone();
            }
        }
        out
    }

    /// Nonzero group-ring terms.
    fn support(&self) -> Vec<(usize, &BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    fn mul_same_order(&self, other: &CycInt) -> CycInt {
        let n = self.order as usize;
        let a = self.support();
        let b = other.support();
        if a.is_empty() || b.is_empty() {
            return CycInt::zero(self.order);
        }
        let small = |t: &[(usize, &BigInt)]| -> Option<(Vec<(usize, i128)>, u64)> {
            let mut bits = 0;
            let mut v = Vec::with_capacity(t.len());
            for (e, c) in t {
                let x = c.to_i64()?;
                bits = bits.max(64 - x.unsigned_abs().leading_zeros() as u64);
                v.push((*e, x as i128));
            }
            Some((v, bits))
        };
        if let (Some((sa, ba)), Some((sb, bb))) = (small(&a), small(&b)) {
            let terms = a.len().min(b.len()) as u64;
            let tbits = 64 - terms.leading_zeros() as u64;
            if ba + bb + tbits < 120 {
                let mut acc = vec![0i128; n];
                for &(ea, ca) in &sa {
                    for &(eb, cb) in &sb {
                        let j = if ea + eb >= n { ea + eb - n } else { ea + eb };
                        acc[j] += ca * cb;
                    }
                }
                return CycInt {
                    order: self.order,
                    coeffs: acc.into_iter().map(BigInt::from).collect(),
                };
            }
        }
        let mut out = CycInt::zero(self.order);
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                out.coeffs[(ea + eb) % n] += *ca * *cb;
            }
        }
        out
    }

    /// Canonical remainder modulo Φ_N.
    pub fn reduce(&self) -> CycInt {
        let phi = cyclotomic_poly_fast(self.order);
        let deg = phi.len() - 1;
        if let Some(r) = reduce_i128(&self.coeffs, &phi, deg) {
            let mut coeffs: Vec<BigInt> = r.into_iter().map(BigInt::from).collect();
            coeffs.resize(self.order as usize, BigInt::zero());
            return CycInt {
                order: self.order,
                coeffs,
            };
        }
        let mut c = self.coeffs.clone();
        for j in (deg..c.len()).rev() {
            if c[j].is_zero() {
                continue;
            }
            let lead = std::mem::take(&mut c[j]);
            for (i, p) in phi.iter().enumerate().take(deg) {
                if *p != 0 {
                    c[j - deg + i] -= &lead * BigInt::from(*p);
                }
            }
        }
        CycInt {
            order: self.order,
            coeffs: c,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.reduce().coeffs.iter().all(|c| c.is_zero())
    }

    /// z·conj(z) in canonical form.
    pub fn abs_sq(&self) -> CycInt {
        (self * &self.conj()).reduce()
    }

    /// The value as an integer, when it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.reduce();
        if r.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(r.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Nonzero terms of the canonical form, exponents ascending.
    pub fn terms(&self) -> Vec<(u64, BigInt)> {
        self.reduce()
            .coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e as u64, c))
            .collect()
    }

    pub fn eval_complex(&self) -> Complex64 {
        let n = self.order as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in self.support() {
            let c = c.to_f64().unwrap_or(f64::NAN);
            let theta = std::f64::consts::TAU * (e as f64) / n;
            acc += Complex64::new(theta.cos(), theta.sin()) * c;
        }
        acc
    }

    /// Canonical JSON form `{"order": N, "terms": [[e, "c"], ...]}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .into_iter()
            .map(|(e, c)| json!([e, c.to_string()]))
            .collect();
        json!({ "order": self.order, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<CycInt> {
        let bad = || Error::InvalidInput("malformed cyclotomic integer".into());
        let order = v.get("order").and_then(Value::as_u64).ok_or_else(bad)?;
        if order == 0 {
            return Err(bad());
        }
        let mut z = CycInt::zero(order);
        for t in v.get("terms").and_then(Value::as_array).ok_or_else(bad)? {
            let e = t.get(0).and_then(Value::as_i64).ok_or_else(bad)?;
            let c: BigInt = t
                .get(1)
                .and_then(Value::as_str)
                .and_then(|s| s.parse().ok())
                .ok_or_else(bad)?;
            z.add_unit(e, &c);
        }
        Ok(z)
    }
}

fn reduce_i128(coeffs: &[BigInt], phi: &[i128], deg: usize) -> Option<Vec<i128>> {
    let mut c: Vec<i128> = coeffs
        .iter()
        .map(|x| x.to_i64().map(i128::from))
        .collect::<Option<_>>()?;
    let nz: Vec<(usize, i128)> = phi[..deg]
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != 0)
        .map(|(i, p)| (i, *p))
        .collect();
    for j in (deg..c.len()).rev() {
        let lead = c[j];
        if lead == 0 {
            continue;
        }
        c[j] = 0;
        for &(i, p) in &nz {
            let k = j - deg + i;
            c[k] = c[k].checked_sub(lead.checked_mul(p)?)?;
        }
    }
    if c.iter().any(|x| x.unsigned_abs() > i64::MAX as u128) {
        return None;
    }
    c.truncate(deg.max(1));
    Some(c)
}

impl PartialEq for CycInt {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl<'a> Add<&'a CycInt> for &'a CycInt {
    type Output = CycInt;
    fn add(self, rhs: &CycInt) -> CycInt {
        let (mut a, b) = CycInt::lift_pair(self, rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }
}

impl<'a> Sub<&'a CycInt> for &'a CycInt {
    type Output = CycInt;
    fn sub(self, rhs: &CycInt) -> CycInt {
        let (mut a, b) = CycInt::lift_pair(self, rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x -= y;
        }
        a
    }
}

impl<'a> Mul<&'a CycInt> for &'a CycInt {
    type Output = CycInt;
    fn mul(self, rhs: &CycInt) -> CycInt {
        if self.order == rhs.order {
            return self.mul_same_order(rhs);
        }
        let (a, b) = CycInt::lift_pair(self, rhs);
        a.mul_same_order(&b)
    }
}

impl Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = terms
            .iter()
            .map(|(e, c)| match e {
                0 => c.to_string(),
                _ => format!("{}·ζ_{}^{}", c, self.order, e),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn poly_div_exact_i128(num: &[i128], den: &[i128]) -> Vec<i128> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i128; num.len() - dn];
    for j in (0..q.len()).rev() {
        let c = rem[j + dn];
        q[j] = c;
        if c != 0 {
            for (i, d) in den.iter().enumerate() {
                rem[j + i] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Φ_N with machine coefficients, via Φ_{mp}(x) = Φ_m(x^p)/Φ_m(x) and
/// Φ_N(x) = Φ_{rad N}(x^{N/rad N}).
fn cyclotomic_poly_fast(n: u64) -> Vec<i128> {
    let primes = prime_factors(n);
    let mut f: Vec<i128> = vec![-1, 1];
    let mut rad = 1u64;
    for p in primes {
        let p = p as usize;
        let mut up = vec![0i128; (f.len() - 1) * p + 1];
        for (i, c) in f.iter().enumerate() {
            up[i * p] = *c;
        }
        f = poly_div_exact_i128(&up, &f);
        rad *= p as u64;
    }
    let s = (n / rad) as usize;
    if s == 1 {
        return f;
    }
    let mut out = vec![0i128; (f.len() - 1) * s + 1];
    for (i, c) in f.iter().enumerate() {
        out[i * s] = *c;
    }
    out
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> IntPoly {
    let dn = den.len() - 1;
    assert!(den[dn].is_one(), "divisor must be monic");
    let mut rem = num.to_vec();
    let mut q = vec![BigInt::zero(); num.len() - dn];
    for j in (0..q.len()).rev() {
        let c = rem[j + dn].clone();
        if !c.is_zero() {
            for (i, d) in den.iter().enumerate() {
                rem[j + i] -= &c * d;
            }
        }
        q[j] = c;
    }
    assert!(rem.iter().all(|r| r.is_zero()), "inexact polynomial division");
    q
}

pub fn poly_mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Φ_N by dividing x^N − 1 by Φ_d for every proper divisor d.
pub fn cyclotomic_poly(n: u64) -> IntPoly {
    assert!(n >= 1, "cyclotomic_poly needs N >= 1");
    let mut memo: BTreeMap<u64, IntPoly> = BTreeMap::new();
    for d in divisors(n) {
        let mut num = vec![BigInt::zero(); d as usize + 1];
        num[0] = -BigInt::one();
        num[d as usize] = BigInt::one();
        for (e, phi_e) in memo.iter() {
            if d % e == 0 {
                num = poly_div_exact(&num, phi_e);
            }
        }
        memo.insert(d, num);
    }
    memo.remove(&n).unwrap()
}

/// Rendering such as `x^2 - x + 1`.
pub fn poly_to_string(p: &[BigInt]) -> String {
    let mut parts = Vec::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let mono = match i {
            0 => mag.to_string(),
            1 if mag.is_one() => "x".to_string(),
            1 => format!("{}x", mag),
            _ if mag.is_one() => format!("x^{}", i),
            _ => format!("{}x^{}", mag, i),
        };
        let sign = if c.is_negative() { "-" } else { "+" };
        if parts.is_empty() {
            parts.push(if c.is_negative() { format!("-{}", mono) } else { mono });
        } else {
            parts.push(format!("{} {}", sign, mono));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn rescale_examples() {
        let z = RootOfUnity::new(3, 1).rescale(6).unwrap();
        assert_eq!((z.order(), z.exponent()), (6, 2));
        let z = RootOfUnity::new(2, 1).rescale(2).unwrap();
        assert_eq!((z.order(), z.exponent()), (2, 1));
        let z = RootOfUnity::new(5, 4).rescale(10).unwrap();
        assert_eq!((z.order(), z.exponent()), (10, 8));
        assert!(matches!(
            RootOfUnity::new(4, 1).rescale(6),
            Err(Error::OrderMismatch(_))
        ));
    }

    #[test]
    fn root_products_use_lcm() {
        let z = RootOfUnity::new(4, 1).mul(&RootOfUnity::new(6, 1));
        assert_eq!((z.order(), z.exponent()), (12, 5));
        assert_eq!(RootOfUnity::new(6, 3), RootOfUnity::new(2, 1));
        assert!(RootOfUnity::new(7, 3).pow(7).is_one());
    }

    #[test]
    fn reduce_examples() {
        assert!(CycInt::from_terms(3, &[(0, 1), (1, 1), (2, 1)]).is_zero());
        let t: Vec<(i64, i64)> = (0..10).map(|j| (j, 1)).collect();
        assert!(CycInt::from_terms(10, &t).is_zero());
        let z = CycInt::monomial(6, 1, 1).reduce();
        assert_eq!(z.terms(), vec![(1, BigInt::from(1))]);
        // ζ₆² = ζ₆ − 1
        let z = CycInt::monomial(6, 2, 1);
        assert_eq!(
            z.terms(),
            vec![(0, BigInt::from(-1)), (1, BigInt::from(1))]
        );
    }

    #[test]
    fn cyclotomic_poly_examples() {
        assert_eq!(cyclotomic_poly(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_poly(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(9), ints(&[1, 0, 0, 1, 0, 0, 1]));
        assert_eq!(poly_to_string(&cyclotomic_poly(6)), "x^2 - x + 1");
        // first cyclotomic polynomial with a coefficient outside {-1,0,1}
        assert!(cyclotomic_poly(105).contains(&BigInt::from(-2)));
    }

    #[test]
    fn cyclotomic_product_identity() {
        for n in 1..=200u64 {
            let mut prod = ints(&[1]);
            for d in divisors(n) {
                prod = poly_mul(&prod, &cyclotomic_poly(d));
            }
            let mut expect = vec![BigInt::zero(); n as usize + 1];
            expect[0] = BigInt::from(-1);
            expect[n as usize] = BigInt::from(1);
            assert_eq!(prod, expect, "N = {n}");
            assert_eq!(cyclotomic_poly(n).len() as u64 - 1, euler_phi(n));
        }
    }

    #[test]
    fn fast_route_matches_division() {
        for n in 1..=300u64 {
            let fast: IntPoly = cyclotomic_poly_fast(n)
                .into_iter()
                .map(BigInt::from)
                .collect();
            assert_eq!(fast, cyclotomic_poly(n), "N = {n}");
        }
    }

    #[test]
    fn abs_sq_examples() {
        assert!(CycInt::zero(5).abs_sq().is_zero());
        assert_eq!(
            CycInt::monomial(8, 1, 1).abs_sq().as_integer(),
            Some(BigInt::from(1))
        );
        let z = CycInt::from_terms(5, &[(0, 2), (1, 1), (2, 1), (3, 1), (4, 1)]);
        assert_eq!(z.abs_sq().as_integer(), Some(BigInt::from(1)));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(CycInt::zero(4).eval_complex(), Complex64::new(0.0, 0.0));
        let z = CycInt::monomial(4, 1, 2).eval_complex();
        assert!((z - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        let z = CycInt::from_terms(3, &[(0, 1), (1, 1)]).eval_complex();
        assert!((z - Complex64::new(0.5, 0.75f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn mixed_orders_combine_at_lcm() {
        let a = CycInt::monomial(4, 1, 1);
        let b = CycInt::monomial(6, 1, 1);
        let s = &a + &b;
        assert_eq!(s.order(), 12);
        let expect = a.eval_complex() + b.eval_complex();
        assert!((s.eval_complex() - expect).norm() < 1e-12);
        assert_eq!(&a * &b, CycInt::monomial(12, 5, 1));
    }

    #[test]
    fn big_coefficients_take_the_slow_path() {
        let big = BigInt::from(1u64 << 62) * BigInt::from(1u64 << 62);
        let z = CycInt::monomial(15, 9, big.clone());
        let w = CycInt::monomial(15, 7, big.clone());
        let p = (&z * &w).reduce();
        assert_eq!(p, CycInt::monomial(15, 1, &big * &big));
    }

    #[test]
    fn json_round_trip() {
        let z = CycInt::from_terms(6, &[(2, 3), (1, -1)]);
        let v = z.to_json();
        assert_eq!(v["order"], 6);
        assert_eq!(v["terms"], json!([[0, "-3"], [1, "2"]]));
        assert_eq!(CycInt::from_json(&v).unwrap(), z);
    }

    fn cyc_strategy() -> impl Strategy<Value = (u64, Vec<(i64, i64)>)> {
        (1u64..=60).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n as i64, -9i64..=9), 0..=8),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_axioms((n, ta) in cyc_strategy(), tb in prop::collection::vec((0i64..60, -9i64..=9), 0..=8), tc in prop::collection::vec((0i64..60, -9i64..=9), 0..=8)) {
            let a = CycInt::from_terms(n, &ta);
            let b = CycInt::from_terms(n, &tb);
            let c = CycInt::from_terms(n, &tc);
            prop_assert_eq!((&(&a * &b) * &c).reduce().terms(), (&a * &(&b * &c)).reduce().terms());
            prop_assert_eq!((&a * &(&b + &c)).reduce().terms(), (&(&a * &b) + &(&a * &c)).reduce().terms());
            prop_assert_eq!((&a * &b).reduce().terms(), (&b * &a).reduce().terms());
            prop_assert_eq!((&a.reduce() * &b.reduce()).reduce().terms(), (&a * &b).reduce().terms());
        }

        #[test]
        fn reduce_is_idempotent((n, t) in cyc_strategy()) {
            let z = CycInt::from_terms(n, &t);
            let r = z.reduce();
            prop_assert_eq!(r.reduce().terms(), r.terms());
            prop_assert!((r.eval_complex() - z.eval_complex()).norm() < 1e-8);
        }

        #[test]
        fn abs_sq_matches_float((n, t) in cyc_strategy()) {
            let z = CycInt::from_terms(n, &t);
            let s = z.abs_sq().eval_complex();
            prop_assert!((s.re - z.eval_complex().norm_sqr()).abs() <= 1e-8);
            prop_assert!(s.im.abs() <= 1e-8);
            let conj = z.conj().eval_complex();
            prop_assert!((conj - z.eval_complex().conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_test_soundness() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut zeros = 0;
        for _ in 0..1000 {
            let n = rng.gen_range(1..=30u64);
            let len = rng.gen_range(0..=8);
            let t: Vec<(i64, i64)> = (0..len)
                .map(|_| (rng.gen_range(0..n as i64), rng.gen_range(-2..=2)))
                .collect();
            let mut z = CycInt::from_terms(n, &t);
            if rng.gen_bool(0.3) {
                // force a vanishing sum of a full coset
                let d = *divisors(n).last().unwrap();
                let shift = rng.gen_range(0..n as i64);
                for j in 0..d as i64 {
                    z.add_unit(shift + j * (n / d) as i64, &BigInt::from(1));
                }
            }
            if z.is_zero() {
                zeros += 1;
                assert!(z.eval_complex().norm() <= 1e-8);
            } else {
                assert!(z.eval_complex().norm() > 1e-12);
            }
        }
        assert!(zeros > 10);
    }
}

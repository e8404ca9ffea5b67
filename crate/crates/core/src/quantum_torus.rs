//! The quantum torus in the θ-basis and the SL(2,ℤ) automorphisms F_{A,±}.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::cyclotomic::{CycInt, IntPoly, RootOfUnity};
use crate::error::{Error, Result};

/// Branch of the lift: F_{A,+} or F_{A,−}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            _ => Err(Error::InvalidInput(format!("unknown sign {s:?}"))),
        }
    }
}

/// A matrix [[a,b],[c,d]] in SL(2,ℤ) acting on row vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MappingClass {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl MappingClass {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::NotSl2z(a, b, c, d));
        }
        Ok(MappingClass { a, b, c, d })
    }

    pub fn identity() -> Self {
        MappingClass { a: 1, b: 0, c: 0, d: 1 }
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn is_periodic(&self) -> bool {
        self.trace().abs() <= 1 || self.is_identity() || self.neg().is_identity()
    }

    pub fn neg(&self) -> Self {
        MappingClass {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Matrix product self·other.
    pub fn mul(&self, o: &Self) -> Self {
        MappingClass {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Row-vector action (i,j) ↦ (i,j)A.
    pub fn act(&self, v: (i64, i64)) -> (i64, i64) {
        (v.0 * self.a + v.1 * self.c, v.0 * self.b + v.1 * self.d)
    }

    /// Smallest k ≤ 12 with A^k = Id.
    pub fn order(&self) -> Option<u32> {
        let mut p = *self;
        for k in 1..=12 {
            if p.is_identity() {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }
}

impl fmt::Display for MappingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl std::str::FromStr for MappingClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<i64> = s
            .split(',')
            .map(|x| x.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("bad matrix {s:?}")))?;
        if v.len() != 4 {
            return Err(Error::InvalidInput(format!("matrix needs four entries, got {s:?}")));
        }
        MappingClass::new(v[0], v[1], v[2], v[3])
    }
}

/// scalar·θ_{(a,b)} with scalar a power of q^{1/2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThetaMonomial {
    pub scalar: RootOfUnity,
    pub lattice: (i64, i64),
}

/// Finite sum Σ c_{(a,b)}·θ_{(a,b)} over a fixed level n.
#[derive(Clone, Debug)]
pub struct QTElement {
    n: u64,
    terms: BTreeMap<(i64, i64), CycInt>,
}

/// The quantum torus at q^{1/2} = e^{πi/n}.
#[derive(Clone, Copy, Debug)]
pub struct QuantumTorus {
    n: u64,
}

impl QuantumTorus {
    pub fn new(n: u64) -> Result<Self> {
        crate::ensure_odd(n as i64)?;
        Ok(QuantumTorus { n })
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn qh(&self) -> RootOfUnity {
        RootOfUnity::new(2 * self.n, 1)
    }

    pub fn theta_mul(&self, m1: &ThetaMonomial, m2: &ThetaMonomial) -> ThetaMonomial {
        let (a, b) = m1.lattice;
        let (c, d) = m2.lattice;
        ThetaMonomial {
            scalar: m1.scalar.mul(&m2.scalar).mul(&self.qh().pow(a * d - b * c)),
            lattice: (a + c, b + d),
        }
    }

    pub fn zero(&self) -> QTElement {
        QTElement {
            n: self.n,
            terms: BTreeMap::new(),
        }
    }

    pub fn theta(&self, a: i64, b: i64) -> QTElement {
        self.scaled_theta(CycInt::from_int(2 * self.n, 1), a, b)
    }

    pub fn scaled_theta(&self, c: CycInt, a: i64, b: i64) -> QTElement {
        let mut x = self.zero();
        x.terms.insert((a, b), c);
        x.canonicalize()
    }

    pub fn constant(&self, c: i64) -> QTElement {
        self.scaled_theta(CycInt::from_int(2 * self.n, c), 0, 0)
    }

    pub fn mul(&self, x: &QTElement, y: &QTElement) -> QTElement {
        let qh = self.qh();
        let mut out = self.zero();
        for (&(a, b), cx) in &x.terms {
            for (&(c, d), cy) in &y.terms {
                let coef = (cx * cy).mul_unit(&qh.pow(a * d - b * c));
                out.add_term((a + c, b + d), &coef);
            }
        }
        out.canonicalize()
    }

    /// Evaluates an integer polynomial at x.
    pub fn eval_poly(&self, p: &[BigInt], x: &QTElement) -> QTElement {
        let mut acc = self.zero();
        for c in p.iter().rev() {
            acc = self.mul(&acc, x);
            acc.add_term((0, 0), &CycInt::from_int(2 * self.n, c.clone()));
        }
        acc.canonicalize()
    }

    /// Image of the (a,b) torus link: θ_{(a,b)} + θ_{(−a,−b)} for primitive
    /// (a,b), T_k of the primitive image otherwise.
    pub fn fg_image(&self, a: i64, b: i64) -> Result<QTElement> {
        if a == 0 && b == 0 {
            return Err(Error::UndefinedLink);
        }
        let k = a.gcd(&b);
        let (a1, b1) = (a / k, b / k);
        let base = self.theta(a1, b1).add(&self.theta(-a1, -b1));
        if k == 1 {
            return Ok(base);
        }
        Ok(self.eval_poly(&chebyshev_t(k as u32), &base))
    }
}

impl QTElement {
    pub fn level(&self) -> u64 {
        self.n
    }

    fn add_term(&mut self, key: (i64, i64), c: &CycInt) {
        match self.terms.get_mut(&key) {
            Some(v) => *v = &*v + c,
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    fn canonicalize(mut self) -> Self {
        self.terms = self
            .terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.reduce()))
            .collect();
        self
    }

    pub fn add(&self, other: &QTElement) -> QTElement {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        out.canonicalize()
    }

    pub fn scale(&self, c: &CycInt) -> QTElement {
        QTElement {
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
        .canonicalize()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &CycInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: i64, b: i64) -> Option<&CycInt> {
        self.terms.get(&(a, b))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<(i64, i64)> {
        self.terms.keys().copied().collect()
    }
}

impl PartialEq for QTElement {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(other.terms.iter())
                .all(|((k1, c1), (k2, c2))| k1 == k2 && c1 == c2)
    }
}

/// Chebyshev polynomial with T_0 = 2, T_1 = x, T_k = x·T_{k−1} − T_{k−2}.
pub fn chebyshev_t(k: u32) -> IntPoly {
    let mut prev: IntPoly = vec![BigInt::from(2)];
    let mut cur: IntPoly = vec![BigInt::zero(), BigInt::from(1)];
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// F_{A,+}(θ_v) = θ_{vA}, F_{A,−}(θ_v) = θ_{−vA}, extended linearly.
pub fn apply_fa(a: &MappingClass, sign: Sign, x: &QTElement) -> QTElement {
    let s = sign.as_i64();
    let mut out = QTElement {
        n: x.n,
        terms: BTreeMap::new(),
    };
    for (&(i, j), c) in &x.terms {
        out.add_term(a.act((s * i, s * j)), c);
    }
    out.canonicalize()
}

/// Same rule on a single monomial.
pub fn apply_fa_monomial(a: &MappingClass, sign: Sign, m: &ThetaMonomial) -> ThetaMonomial {
    let s = sign.as_i64();
    ThetaMonomial {
        scalar: m.scalar,
        lattice: a.act((s * m.lattice.0, s * m.lattice.1)),
    }
}

/// Whether ab + a + b ≡ gcd(a,b) (mod 2).
pub fn gcd_parity_check(a: i64, b: i64) -> Result<bool> {
    if a == 0 && b == 0 {
        return Err(Error::UndefinedLink);
    }
    let g = a.gcd(&b);
    Ok((a * b + a + b - g).rem_euclid(2) == 0)
}

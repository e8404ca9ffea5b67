//! Irreducible representations ρ_{u,v} of the quantum torus and invariant
//! characters of mapping classes.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cyclotomic::{lcm_u64, CycInt, RootOfUnity};
use crate::error::{Error, Result};
use crate::matrix::{CycMatrix, ScaledPermMatrix, Unit};
use crate::quantum_torus::{MappingClass, QTElement, QuantumTorus, Sign};

/// Eigenvalue pair λ_j = e^{2πi·angle_j} with lift offsets (r₁, r₂).
///
/// Angles keep the representative they were given: the lift
/// u = −e^{±2πi·angle₁/n}·q^{r₁} depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusCharacter {
    pub angle1: Rational64,
    pub angle2: Rational64,
    pub sign: Sign,
    pub r1: i64,
    pub r2: i64,
}

/// Complex eigenvalue pair for the float backend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatCharacter {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub sign: Sign,
    pub r1: i64,
    pub r2: i64,
}

/// Lift data (u, v) together with q^{1/2} at level n.
#[derive(Clone, Debug)]
pub struct Lift<S> {
    pub n: u64,
    pub u: S,
    pub v: S,
    pub qh: S,
    pub sign: Sign,
}

impl TorusCharacter {
    pub fn new(angle1: Rational64, angle2: Rational64, sign: Sign) -> Self {
        TorusCharacter {
            angle1,
            angle2,
            sign,
            r1: 0,
            r2: 0,
        }
    }

    pub fn trivial(sign: Sign) -> Self {
        Self::new(Rational64::zero(), Rational64::zero(), sign)
    }

    pub fn with_lifts(mut self, r1: i64, r2: i64) -> Self {
        self.r1 = r1;
        self.r2 = r2;
        self
    }

    fn denominator(&self) -> u64 {
        self.angle1.denom().lcm(self.angle2.denom()).unsigned_abs()
    }

    /// Smallest N with u, v, q^{1/2} all in μ_N.
    pub fn ring_order(&self, n: u64) -> u64 {
        lcm_u64(2 * n, n * self.denominator())
    }

    pub fn lambda1(&self) -> RootOfUnity {
        angle_root(self.angle1)
    }

    pub fn lambda2(&self) -> RootOfUnity {
        angle_root(self.angle2)
    }

    fn lift_exponent(&self, angle: Rational64, r: i64, n: u64) -> i64 {
        let big_n = self.ring_order(n) as i64;
        let s = self.sign.as_i64();
        let e = angle * Rational64::from_integer(big_n / n as i64) * s;
        debug_assert!(e.is_integer());
        big_n / 2 + e.to_integer() + 2 * r * (big_n / (2 * n as i64))
    }

    /// u = −e^{±2πi·angle₁/n}·q^{r₁}, v likewise, in μ_N.
    pub fn lift(&self, n: u64) -> Result<Lift<RootOfUnity>> {
        crate::ensure_odd(n as i64)?;
        let big_n = self.ring_order(n);
        Ok(Lift {
            n,
            u: RootOfUnity::new(big_n, self.lift_exponent(self.angle1, self.r1, n)),
            v: RootOfUnity::new(big_n, self.lift_exponent(self.angle2, self.r2, n)),
            qh: RootOfUnity::new(2 * n, 1),
            sign: self.sign,
        })
    }

    /// The same lift evaluated in complex doubles.
    pub fn float_lift(&self, n: u64) -> Result<Lift<Complex64>> {
        let l = self.lift(n)?;
        Ok(Lift {
            n,
            u: l.u.to_complex(),
            v: l.v.to_complex(),
            qh: l.qh.to_complex(),
            sign: self.sign,
        })
    }

    fn invariance_forms(&self, a: &MappingClass) -> (Rational64, Rational64) {
        let s = self.sign.as_i64();
        let (p1, p2) = (self.angle1, self.angle2);
        let k1 = p1 * (a.a - s) + p2 * a.b;
        let k2 = p1 * a.c + p2 * (a.d - s);
        (k1, k2)
    }

    /// Whether λ₁^{a∓1}λ₂^b = 1 and λ₁^cλ₂^{d∓1} = 1.
    pub fn is_invariant(&self, a: &MappingClass) -> bool {
        let (k1, k2) = self.invariance_forms(a);
        k1.is_integer() && k2.is_integer()
    }

    /// Integers (s₁, s₂) entering the closed-form trace.
    pub fn s_values(&self, a: &MappingClass) -> Option<(i64, i64)> {
        if !self.is_invariant(a) {
            return None;
        }
        let (k1, k2) = self.invariance_forms(a);
        let (k1, k2) = (k1.to_integer(), k2.to_integer());
        let (r1, r2) = (self.r1, self.r2);
        match self.sign {
            Sign::Plus => Some((
                r1 * (a.a - 1) + r2 * a.b + k1,
                r1 * a.c + r2 * (a.d - 1) + k2,
            )),
            Sign::Minus => Some((
                r1 * (a.a + 1) + r2 * a.b - k1,
                r1 * a.c + r2 * (a.d + 1) - k2,
            )),
        }
    }
}

fn angle_root(p: Rational64) -> RootOfUnity {
    RootOfUnity::new(p.denom().unsigned_abs(), *p.numer())
}

impl FloatCharacter {
    /// u = −|w|^{1/n}e^{i·arg(w)/n}·q^{r₁} with w = λ₁^{±1}.
    pub fn lift(&self, n: u64) -> Result<Lift<Complex64>> {
        crate::ensure_odd(n as i64)?;
        if self.lambda1.norm() == 0.0 || self.lambda2.norm() == 0.0 {
            return Err(Error::InvalidInput("eigenvalues must be nonzero".into()));
        }
        let q = Complex64::root_of_unity(n, 1);
        let root = |w: Complex64, r: i64| {
            let w = if self.sign == Sign::Plus { w } else { w.inv() };
            -Complex64::from_polar(w.norm().powf(1.0 / n as f64), w.arg() / n as f64) * q.powi(r as i32)
        };
        Ok(Lift {
            n,
            u: root(self.lambda1, self.r1),
            v: root(self.lambda2, self.r2),
            qh: Complex64::root_of_unity(2 * n, 1),
            sign: self.sign,
        })
    }
}

impl<S: Unit> Lift<S> {
    pub fn q(&self) -> S {
        self.qh.pow(2)
    }

    /// λ₁ recovered from the lift.
    pub fn lambda1(&self) -> S {
        self.lambda_from(&self.u)
    }

    pub fn lambda2(&self) -> S {
        self.lambda_from(&self.v)
    }

    fn lambda_from(&self, w: &S) -> S {
        let l = w.pow(self.n as i64).mul(&S::root_of_unity(2, 1));
        match self.sign {
            Sign::Plus => l,
            Sign::Minus => l.inv(),
        }
    }

    pub fn check_invariant(&self, a: &MappingClass) -> Result<()> {
        let s = self.sign.as_i64();
        let (l1, l2) = (self.lambda1(), self.lambda2());
        let e1 = l1.pow(a.a - s).mul(&l2.pow(a.b));
        let e2 = l1.pow(a.c).mul(&l2.pow(a.d - s));
        if e1.is_one() && e2.is_one() {
            Ok(())
        } else {
            Err(Error::NotInvariant(format!(
                "character is not fixed by {} on the {} branch",
                a,
                self.sign.name()
            )))
        }
    }
}

impl Lift<RootOfUnity> {
    pub fn ring_order(&self) -> u64 {
        lcm_u64(lcm_u64(self.u.order(), self.v.order()), self.qh.order())
    }
}

/// The pair ρ_{u,v}(X), ρ_{u,v}(Y).
#[derive(Clone, Debug)]
pub struct TorusRep<S> {
    pub n: u64,
    pub u: S,
    pub v: S,
    pub qh: S,
    pub x: ScaledPermMatrix<S>,
    pub y: ScaledPermMatrix<S>,
}

/// ρ(X)e_i = u·q^i·e_i, ρ(Y)e_i = v·e_{i+1}.
pub fn build_rho<S: Unit>(n: u64, u: S, v: S) -> Result<TorusRep<S>> {
    crate::ensure_odd(n as i64)?;
    let nn = n as usize;
    let qh = S::root_of_unity(2 * n, 1);
    let q = qh.pow(2);
    let x = ScaledPermMatrix::diagonal((0..nn).map(|i| u.mul(&q.pow(i as i64))).collect());
    let y = ScaledPermMatrix::from_entries(nn, (0..nn).map(|i| ((i + 1) % nn, i, v.clone())).collect());
    Ok(TorusRep { n, u, v, qh, x, y })
}

impl<S: Unit> TorusRep<S> {
    pub fn from_lift(lift: &Lift<S>) -> Result<Self> {
        build_rho(lift.n, lift.u.clone(), lift.v.clone())
    }

    /// ρ(θ_{(a,b)}) = q^{−ab/2}·X^a·Y^b.
    pub fn theta(&self, a: i64, b: i64) -> ScaledPermMatrix<S> {
        let xa = self.x.pow_monomial(a).expect("X is monomial");
        let yb = self.y.pow_monomial(b).expect("Y is monomial");
        xa.mul(&yb).expect("monomial product").scale(&self.qh.pow(-a * b))
    }

    /// XY = q·YX.
    pub fn relation_holds(&self) -> bool {
        let q = self.qh.pow(2);
        let xy = self.x.mul(&self.y).unwrap();
        let yx = self.y.mul(&self.x).unwrap().scale(&q);
        xy.same(&yx)
    }
}

impl TorusRep<RootOfUnity> {
    pub fn ring_order(&self) -> u64 {
        lcm_u64(lcm_u64(self.u.order(), self.v.order()), self.qh.order())
    }

    /// ρ applied to a quantum-torus element.
    pub fn evaluate_qt(&self, x: &QTElement) -> CycMatrix {
        let mut order = self.ring_order();
        for (_, c) in x.terms() {
            order = lcm_u64(order, c.order());
        }
        let n = self.n as usize;
        let mut out = CycMatrix::zero(n, order);
        for (&(a, b), c) in x.terms() {
            let c = c.rescale(order).expect("coefficient order divides ring order");
            let m = self.theta(a, b);
            for (i, row) in m.rows().iter().enumerate() {
                for (j, z) in row {
                    let cur = out.get(i, *j).clone();
                    out.set(i, *j, &cur + &c.mul_unit(z));
                }
            }
        }
        out
    }
}

/// Checks ρ(θ_{(na,nb)} + θ_{(−na,−nb)}) = (−1)^{ab+a+b}(λ₁^aλ₂^b + λ₁^{−a}λ₂^{−b})·Id.
pub fn classical_shadow_check(n: u64, character: &TorusCharacter, a: i64, b: i64) -> Result<bool> {
    if a == 0 && b == 0 {
        return Err(Error::UndefinedLink);
    }
    let lift = character.lift(n)?;
    let rep = TorusRep::from_lift(&lift)?;
    let qt = QuantumTorus::new(n)?;
    let ni = n as i64;
    let elem = qt.theta(ni * a, ni * b).add(&qt.theta(-ni * a, -ni * b));
    let image = rep.evaluate_qt(&elem);
    let mono = character.lambda1().pow(a).mul(&character.lambda2().pow(b));
    let sign = if (a * b + a + b).rem_euclid(2) == 0 { 1 } else { -1 };
    let scalar = (&CycInt::unit(mono) + &CycInt::unit(mono.inv())).scale(&BigInt::from(sign));
    let expect = CycMatrix::scalar(n as usize, &scalar.rescale(lcm_u64(scalar.order(), image.order()))?);
    Ok(expect.order() == image.order() && expect.equals(&image))
}

/// Solution set of the invariance equations for one mapping class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantFamily {
    /// Unique angles for the chosen (k₁,k₂); λ₁^D = λ₂^D = 1 with D = 2 ∓ (a+d).
    Isolated {
        angle1: (i64, i64),
        angle2: (i64, i64),
        determinant: i64,
    },
    /// Singular system: the listed rows (e₁,e₂) impose λ₁^{e₁}λ₂^{e₂} = 1.
    Constrained { constraints: Vec<(i64, i64)> },
    /// Every character is invariant.
    All,
}

impl InvariantFamily {
    pub fn angles(&self) -> Option<(Rational64, Rational64)> {
        match self {
            InvariantFamily::Isolated { angle1, angle2, .. } => Some((
                Rational64::new(angle1.0, angle1.1),
                Rational64::new(angle2.0, angle2.1),
            )),
            _ => None,
        }
    }
}

/// Solves (a∓1)p₁ + b·p₂ = k₁, c·p₁ + (d∓1)p₂ = k₂ for the angles p_j.
pub fn solve_invariant_characters(a: &MappingClass, sign: Sign, k: (i64, i64)) -> InvariantFamily {
    let s = sign.as_i64();
    let (m11, m12, m21, m22) = (a.a - s, a.b, a.c, a.d - s);
    let det = m11 * m22 - m12 * m21;
    if det == 0 {
        let rows: Vec<(i64, i64)> = [(m11, m12), (m21, m22)]
            .into_iter()
            .filter(|r| *r != (0, 0))
            .collect();
        if rows.is_empty() {
            return InvariantFamily::All;
        }
        let mut constraints: Vec<(i64, i64)> = Vec::new();
        for r in rows {
            if !constraints.contains(&r) {
                constraints.push(r);
            }
        }
        return InvariantFamily::Constrained { constraints };
    }
    let p1 = Rational64::new(k.0 * m22 - m12 * k.1, det);
    let p2 = Rational64::new(m11 * k.1 - m21 * k.0, det);
    InvariantFamily::Isolated {
        angle1: (*p1.numer(), *p1.denom()),
        angle2: (*p2.numer(), *p2.denom()),
        determinant: det,
    }
}

/// Bases of the two invariant subspaces for u, v ∈ {±1}.
#[derive(Clone, Debug)]
pub struct Subreps {
    pub v1: Vec<Vec<i64>>,
    pub v2: Vec<Vec<i64>>,
    pub closed: bool,
    pub independent: bool,
}

pub fn decompose_subreps(n: u64, u: i64, v: i64) -> Result<Subreps> {
    if u.abs() != 1 || v.abs() != 1 {
        return Err(Error::NotDegenerate(format!("u = {u}, v = {v}")));
    }
    if n == 1 {
        return Err(Error::TooSmall(1));
    }
    crate::ensure_odd(n as i64)?;
    let nn = n as usize;
    let half = (nn - 1) / 2;
    let basis = |k: usize, s: i64| {
        let mut w = vec![0i64; nn];
        w[k] += 1;
        w[nn - k] += s;
        w
    };
    let mut v1 = vec![{
        let mut e0 = vec![0i64; nn];
        e0[0] = 1;
        e0
    }];
    v1.extend((1..=half).map(|k| basis(k, 1)));
    let v2: Vec<Vec<i64>> = (1..=half).map(|k| basis(k, -1)).collect();

    let unit = |s: i64| RootOfUnity::new(2, if s == 1 { 0 } else { 1 });
    let rep = build_rho(n, unit(u), unit(v))?;
    let qt = QuantumTorus::new(n)?;
    let gens = [qt.fg_image(1, 0)?, qt.fg_image(0, 1)?, qt.fg_image(1, 1)?];
    let order = rep.ring_order();
    let mut closed = true;
    for g in &gens {
        let m = rep.evaluate_qt(g);
        for (space, even) in [(&v1, true), (&v2, false)] {
            for w in space.iter() {
                let vec: Vec<CycInt> = w.iter().map(|&c| CycInt::from_int(order, c)).collect();
                let img = m.apply(&vec);
                closed &= in_subspace(&img, even);
            }
        }
    }
    let mut all = v1.clone();
    all.extend(v2.iter().cloned());
    let independent = integer_rank(&all) == nn;
    Ok(Subreps {
        v1,
        v2,
        closed,
        independent,
    })
}

fn in_subspace(w: &[CycInt], even: bool) -> bool {
    let n = w.len();
    if !even && !w[0].is_zero() {
        return false;
    }
    (1..n).all(|j| {
        if even {
            w[j] == w[n - j]
        } else {
            (&w[j] + &w[n - j]).is_zero()
        }
    })
}

/// Rank over ℚ by fraction-free elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            for j in col + 1..cols {
                let v = &m[rank][col] * &m[i][j] - &m[i][col] * &m[rank][j];
                m[i][j] = v / &prev;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

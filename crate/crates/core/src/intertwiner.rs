//! Closed-torus intertwiners Λ̄_n (plus branch) and Λ̃_n (minus branch),
//! their traces, determinants and Gauss-sum closed forms.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclotomic::{CycInt, RootOfUnity};
use crate::error::{Error, Result};
use crate::matrix::{group_ring_power, log_abs_det, ScaledPermMatrix, Unit};
use crate::quantum_torus::{MappingClass, Sign};
use crate::torus_rep::{Lift, TorusCharacter, TorusRep};
use crate::EXACT_ORDER_CAP;

/// Largest dimension accepted by the float determinant check.
pub const DET_DIM_CAP: u64 = 401;

/// (m, r, s) with b·r + s·n = m = gcd(b, n) > 0.
pub fn bezout(b: i64, n: i64) -> (i64, i64, i64) {
    let e = b.extended_gcd(&n);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// The coefficients r_k of the vector fixed by the twisted X-action.
#[derive(Clone, Debug)]
pub struct RCoefficients<S> {
    pub n: u64,
    pub m: u64,
    pub n_prime: u64,
    pub r: i64,
    pub s: i64,
    pub k0: u64,
    pub values: Vec<Option<S>>,
}

fn qh_pow<S: Unit>(qh: &S, n: u64, e: i128) -> S {
    qh.pow(e.rem_euclid(2 * n as i128) as i64)
}

pub fn build_r_coeffs<S: Unit>(a: &MappingClass, lift: &Lift<S>) -> Result<RCoefficients<S>> {
    let n = lift.n as i64;
    let (m, r, s) = bezout(a.b, n);
    build_r_coeffs_with(a, lift, r, s, m)
}

/// Same as [`build_r_coeffs`] with a caller-chosen Bézout pair.
pub fn build_r_coeffs_with<S: Unit>(
    a: &MappingClass,
    lift: &Lift<S>,
    r: i64,
    s: i64,
    m: i64,
) -> Result<RCoefficients<S>> {
    crate::ensure_odd(lift.n as i64)?;
    lift.check_invariant(a)?;
    let n = lift.n as i64;
    if a.b * r + s * n != m || m <= 0 || n % m != 0 {
        return Err(Error::InvalidInput("inconsistent Bézout data".into()));
    }
    let np = n / m;
    let (u, v, qh) = (&lift.u, &lift.v, &lift.qh);
    let nu = lift.n;
    let (aa, bb) = (a.a as i128, a.b as i128);
    let (npi, ri) = (np as i128, r as i128);

    // step = the factor multiplying r_k per application of the recursion
    let (step, dir) = match lift.sign {
        Sign::Plus => (v.pow(a.b).mul(&u.pow(a.a - 1)), 1i128),
        Sign::Minus => (v.pow(-a.b).mul(&u.pow(-a.a - 1)), -1i128),
    };
    let base = step
        .pow(np)
        .mul(&qh_pow(qh, nu, aa * bb * npi * npi));
    let hits: Vec<i64> = (0..m)
        .filter(|&k| {
            base.mul(&qh_pow(qh, nu, dir * 2 * aa * npi * k as i128))
                .is_one()
        })
        .collect();
    if hits.len() != 1 {
        return Err(Error::InvalidWeightSystem(format!(
            "{} candidates for k0 in [0,{m})",
            hits.len()
        )));
    }
    let k0 = hits[0];
    let mut values: Vec<Option<S>> = vec![None; n as usize];
    for t in 0..np {
        let ti = t as i128;
        let idx = (k0 as i128 + dir * ti * m as i128).rem_euclid(n as i128) as usize;
        let tr = (ti * ri).rem_euclid(2 * n as i128) as i64;
        let e = dir * 2 * ti * ri * aa * k0 as i128 + aa * bb * ti * ti * ri * ri;
        values[idx] = Some(step.pow(tr).mul(&qh_pow(qh, nu, e)));
    }
    Ok(RCoefficients {
        n: nu,
        m: m as u64,
        n_prime: np as u64,
        r,
        s,
        k0: k0 as u64,
        values,
    })
}

/// Constructed intertwiner together with the data it was built from.
#[derive(Clone, Debug)]
pub struct IntertwinerResult<S> {
    pub mapping: MappingClass,
    pub n: u64,
    pub lift: Lift<S>,
    pub coeffs: RCoefficients<S>,
    pub matrix: ScaledPermMatrix<S>,
    pub rep: TorusRep<S>,
    /// Set when the minus-branch index shift had to be flipped to intertwine.
    pub index_shift_flipped: bool,
}

fn assemble<S: Unit>(a: &MappingClass, lift: &Lift<S>, coeffs: &RCoefficients<S>, flip: bool) -> ScaledPermMatrix<S> {
    let n = lift.n as i64;
    let (u, v, qh) = (&lift.u, &lift.v, &lift.qh);
    let (c, d) = (a.c as i128, a.d as i128);
    let (col_step, dir, shift) = match lift.sign {
        Sign::Plus => (v.pow(a.d - 1).mul(&u.pow(a.c)), 1i128, -1i64),
        Sign::Minus => (v.pow(-a.d - 1).mul(&u.pow(-a.c)), -1i128, 1i64),
    };
    let shift = if flip { -shift } else { shift };
    let mut entries = Vec::new();
    for k in 0..n {
        for t in 0..n {
            let idx = (k + shift * t * a.d).rem_euclid(n) as usize;
            let Some(rv) = &coeffs.values[idx] else { continue };
            let (ki, ti) = (k as i128, t as i128);
            let e = dir * 2 * c * ti * ki - c * d * ti * ti;
            let val = rv.mul(&col_step.pow(t)).mul(&qh_pow(qh, lift.n, e));
            entries.push((k as usize, t as usize, val));
        }
    }
    ScaledPermMatrix::from_entries(n as usize, entries)
}

/// Λ̄_{k,t} = r_{k−td}(v^{d−1}u^c)^t q^{c(tk−dt²/2)} on the plus branch,
/// Λ̃_{k,t} = r_{k+td}(v^{−d−1}u^{−c})^t q^{−tck−cdt²/2} on the minus branch.
pub fn build_intertwiner<S: Unit>(a: &MappingClass, lift: &Lift<S>) -> Result<IntertwinerResult<S>> {
    let coeffs = build_r_coeffs(a, lift)?;
    let rep = TorusRep::from_lift(lift)?;
    let mut result = IntertwinerResult {
        mapping: *a,
        n: lift.n,
        lift: lift.clone(),
        matrix: assemble(a, lift, &coeffs, false),
        coeffs,
        rep,
        index_shift_flipped: false,
    };
    if lift.sign == Sign::Minus && !verify_intertwining(&result) {
        let flipped = assemble(a, lift, &result.coeffs, true);
        let candidate = IntertwinerResult {
            matrix: flipped,
            index_shift_flipped: true,
            ..result.clone()
        };
        if verify_intertwining(&candidate) {
            result = candidate;
        }
    }
    Ok(result)
}

impl<S: Unit> IntertwinerResult<S> {
    pub fn sign(&self) -> Sign {
        self.lift.sign
    }

    pub fn m(&self) -> u64 {
        self.coeffs.m
    }

    pub fn n_prime(&self) -> u64 {
        self.coeffs.n_prime
    }

    /// Scalar (n′)^{−1/2} making |det| = 1.
    pub fn normalization(&self) -> f64 {
        (self.n_prime() as f64).powf(-0.5)
    }

    /// log|det| of the unnormalized matrix, (n/2)·log n′.
    pub fn abs_det_log(&self) -> f64 {
        self.n as f64 / 2.0 * (self.n_prime() as f64).ln()
    }

    pub fn trace_complex(&self) -> Complex64 {
        self.matrix.trace_complex()
    }

    /// |Trace| of the normalized matrix.
    pub fn abs_trace_normalized(&self) -> f64 {
        self.trace_complex().norm() * self.normalization()
    }
}

impl IntertwinerResult<RootOfUnity> {
    pub fn ring_order(&self) -> u64 {
        self.lift.ring_order()
    }

    pub fn trace_exact(&self) -> CycInt {
        self.matrix.trace_exact(self.ring_order())
    }
}

/// Checks Λ·ρ(W) = ρ(F_{A,±}(W))·Λ for W ∈ {X, Y, X⁻¹, Y⁻¹}.
pub fn verify_intertwining<S: Unit>(res: &IntertwinerResult<S>) -> bool {
    let s = res.sign().as_i64();
    let a = &res.mapping;
    [(1, 0), (0, 1), (-1, 0), (0, -1)].iter().all(|&(i, j)| {
        let w = res.rep.theta(i, j);
        let (fi, fj) = a.act((s * i, s * j));
        let fw = res.rep.theta(fi, fj);
        match (res.matrix.mul(&w), fw.mul(&res.matrix)) {
            (Ok(lhs), Ok(rhs)) => lhs.same(&rhs),
            _ => false,
        }
    })
}

/// Shape checks: n′ unit entries in every row and column.
pub fn check_pattern<S: Unit>(res: &IntertwinerResult<S>) -> bool {
    let np = res.n_prime() as usize;
    res.matrix.nnz_per_row().iter().all(|&k| k == np)
        && res.matrix.nnz_per_col().iter().all(|&k| k == np)
        && res
            .matrix
            .rows()
            .iter()
            .flatten()
            .all(|(_, v)| (v.to_complex().norm() - 1.0).abs() < 1e-9)
}

/// Outcome of the float determinant check.
#[derive(Clone, Debug, Serialize)]
pub struct DetCheck {
    pub log_abs_det: f64,
    pub expected: f64,
    pub blocks: usize,
    pub worst_block_error: f64,
    pub ok: bool,
}

/// Compares log|det Λ| with (n/2)·log n′ and every column block
/// {l + t·m} with (n′/2)·log n′.
pub fn abs_det_check<S: Unit>(res: &IntertwinerResult<S>) -> Result<DetCheck> {
    if res.n > DET_DIM_CAP {
        return Err(Error::TooLarge(format!("n = {} exceeds {}", res.n, DET_DIM_CAP)));
    }
    let dense = res.matrix.to_dense_complex();
    let total = log_abs_det(&dense);
    let expected = res.abs_det_log();
    let total_ok = (total - expected).exp_m1().abs() <= 1e-6;

    let (n, m, np) = (res.n as usize, res.m() as usize, res.n_prime() as usize);
    let block_expected = np as f64 / 2.0 * (np as f64).ln();
    let mut worst: f64 = 0.0;
    let mut blocks_ok = true;
    for l in 0..m {
        let cols: Vec<usize> = (0..np).map(|t| l + t * m).collect();
        let mut rows: Vec<usize> = (0..n)
            .filter(|&i| cols.iter().any(|&j| dense[(i, j)].norm() > 0.0))
            .collect();
        rows.sort_unstable();
        if rows.len() != np {
            blocks_ok = false;
            continue;
        }
        let block = nalgebra::DMatrix::from_fn(np, np, |i, j| dense[(rows[i], cols[j])]);
        let err = (log_abs_det(&block) - block_expected).exp_m1().abs();
        worst = worst.max(err);
    }
    blocks_ok &= worst <= 1e-8;
    Ok(DetCheck {
        log_abs_det: total,
        expected,
        blocks: m,
        worst_block_error: worst,
        ok: total_ok && blocks_ok,
    })
}

/// Which linear coefficient of the closed-form trace is used:
/// A = s₁(1+d) − s₂b, B = s₁(1−d) + s₂b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    A,
    B,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::A => "A",
            Variant::B => "B",
        }
    }
}

/// The variant that reproduces the matrix trace on each branch.
pub fn matching_variant_for(sign: Sign) -> Variant {
    match sign {
        Sign::Plus => Variant::B,
        Sign::Minus => Variant::A,
    }
}

/// Both variants of Σ_t ((−1)^{Tr·r})^t q^{(r/2)(Tr·t² + 2·lin·t)} with
/// Tr = a+d∓2, unnormalized, in ℤ[ζ_{2n}].
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub variant_a: CycInt,
    pub variant_b: CycInt,
}

impl ClosedForm {
    pub fn get(&self, v: Variant) -> &CycInt {
        match v {
            Variant::A => &self.variant_a,
            Variant::B => &self.variant_b,
        }
    }
}

pub fn closed_form_trace(a: &MappingClass, n: u64, s1: i64, s2: i64, r: i64, sign: Sign) -> Result<ClosedForm> {
    crate::ensure_odd(n as i64)?;
    if a.b.gcd(&(n as i64)) != 1 {
        return Err(Error::NotCoprime { b: a.b, n: n as i64 });
    }
    let tr = match sign {
        Sign::Plus => a.trace() - 2,
        Sign::Minus => a.trace() + 2,
    } as i128;
    let lin_a = (s1 * (1 + a.d) - s2 * a.b) as i128;
    let lin_b = (s1 * (1 - a.d) + s2 * a.b) as i128;
    let parity = (tr * r as i128).rem_euclid(2);
    let two_n = 2 * n as i128;
    let sum = |lin: i128| {
        let mut z = CycInt::zero(2 * n);
        let one = BigInt::from(1);
        for t in 0..n as i128 {
            let e = n as i128 * parity * t + r as i128 * (tr * t * t + 2 * lin * t);
            z.add_unit(e.rem_euclid(two_n) as i64, &one);
        }
        z
    };
    Ok(ClosedForm {
        variant_a: sum(lin_a),
        variant_b: sum(lin_b),
    })
}

/// Variant equal to the matrix trace exactly, else up to a unit ζ_N^e.
/// The branch's own variant is tried first, as both can coincide.
pub fn match_variant(trace: &CycInt, forms: &ClosedForm, sign: Sign) -> Option<(Variant, bool)> {
    let order = match matching_variant_for(sign) {
        Variant::A => [Variant::A, Variant::B],
        Variant::B => [Variant::B, Variant::A],
    };
    for v in order {
        if forms.get(v) == trace {
            return Some((v, true));
        }
    }
    let ring = trace.order().lcm(&forms.variant_a.order());
    let t = trace.rescale(ring).ok()?;
    for v in order {
        let f = forms.get(v).rescale(ring).ok()?;
        if (0..ring).any(|e| f.mul_unit(&RootOfUnity::new(ring, e as i64)) == t) {
            return Some((v, false));
        }
    }
    None
}

/// Σ_{t<n} (−q^{1/2})^{k·t²} in ℤ[ζ_{2n}].
pub fn gauss_sum(k: i64, n: u64) -> CycInt {
    let two_n = 2 * n as i128;
    let mut z = CycInt::zero(2 * n);
    let one = BigInt::from(1);
    for t in 0..n as i128 {
        let e = (n as i128 + 1) * k as i128 * t * t;
        z.add_unit(e.rem_euclid(two_n) as i64, &one);
    }
    z
}

/// Result of raising a periodic intertwiner to the order of its class.
#[derive(Clone, Debug)]
pub struct PeriodicPower {
    pub k: u32,
    pub is_scalar: bool,
    /// c with Λ^k = c·Id for the unnormalized Λ.
    pub scalar: Option<CycInt>,
    /// Whether c·(n′)^{−k/2} has modulus one (exact: |c|² = n′^k).
    pub unit_modulus: bool,
}

/// Computes Λ^k exactly where k is the order of A (plus) or −A (minus).
pub fn periodic_power_check(a: &MappingClass, res: &IntertwinerResult<RootOfUnity>) -> Result<PeriodicPower> {
    if !a.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    let effective = match res.sign() {
        Sign::Plus => *a,
        Sign::Minus => a.neg(),
    };
    let k = effective.order().ok_or(Error::NotPeriodic)?;
    let order = res.ring_order();
    if order > EXACT_ORDER_CAP {
        return Err(Error::RingTooLarge(order));
    }
    let n = res.n as usize;
    let table = res.matrix.exponent_table(order);
    let power = group_ring_power(&table, order, k)?;
    let diag = &power[0];
    let mut is_scalar = true;
    for i in 0..n {
        for j in 0..n {
            let e = &power[i * n + j];
            let ok = if i == j {
                e == diag || CycInt::from_i64_slice(e) == CycInt::from_i64_slice(diag)
            } else {
                e.iter().all(|&c| c == 0) || CycInt::from_i64_slice(e).is_zero()
            };
            if !ok {
                is_scalar = false;
                break;
            }
        }
        if !is_scalar {
            break;
        }
    }
    let scalar = is_scalar.then(|| CycInt::from_i64_slice(diag).reduce());
    let unit_modulus = scalar.as_ref().is_some_and(|c| {
        c.abs_sq().as_integer() == Some(BigInt::from(res.n_prime()).pow(k))
    });
    Ok(PeriodicPower {
        k,
        is_scalar,
        scalar,
        unit_modulus,
    })
}

/// Whether |Trace|² agrees exactly across the given lift offsets.
pub fn trace_independence_check(
    a: &MappingClass,
    n: u64,
    character: &TorusCharacter,
    lifts: &[(i64, i64)],
) -> Result<bool> {
    let mut first: Option<CycInt> = None;
    for &(r1, r2) in lifts {
        let lift = character.with_lifts(r1, r2).lift(n)?;
        let t = build_intertwiner(a, &lift)?.trace_exact().abs_sq();
        match &first {
            None => first = Some(t),
            Some(f) if *f != t => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

/// |T|² ≤ n³·n′ for the unnormalized trace T.
pub fn trace_bound_holds(abs_sq: &CycInt, n: u64, n_prime: u64) -> bool {
    let limit = BigInt::from(n).pow(3) * BigInt::from(n_prime);
    match abs_sq.as_integer() {
        Some(v) => v <= limit,
        None => abs_sq.eval_complex().re <= limit.to_f64().unwrap_or(f64::INFINITY) * (1.0 + 1e-12),
    }
}

/// How a trace row was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TracePath {
    ClosedForm,
    ExactMatrix,
    FloatMatrix,
}

impl TracePath {
    pub fn tag(self) -> &'static str {
        match self {
            TracePath::ClosedForm => "closed_form",
            TracePath::ExactMatrix => "exact_matrix",
            TracePath::FloatMatrix => "float_matrix",
        }
    }
}

/// Arithmetic backend requested for a job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
    Auto,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            "auto" => Ok(Mode::Auto),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}"))),
        }
    }
}

/// One measured |Trace Λ_n| of the normalized intertwiner.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub n: u64,
    pub abs_trace: f64,
    pub abs_trace_sq_exact: Option<BigInt>,
    pub is_exact_zero: bool,
    pub log_trace_over_n: f64,
    pub variant_matched: Option<Variant>,
    pub path: TracePath,
    /// Intertwining identity, only on matrix paths.
    pub verified: Option<bool>,
    pub bound_ok: bool,
}

fn exact_row_fields(n: u64, trace: &CycInt, n_prime: u64) -> (f64, Option<BigInt>, bool, bool) {
    let sq = trace.abs_sq();
    let zero = sq.terms().is_empty();
    let exact = sq.as_integer().and_then(|v| {
        let (q, r) = v.div_rem(&BigInt::from(n_prime));
        r.is_zero().then_some(q)
    });
    let abs = match &exact {
        Some(v) => v.to_f64().unwrap_or(f64::INFINITY).sqrt(),
        None => (sq.eval_complex().re.max(0.0) / n_prime as f64).sqrt(),
    };
    (abs, exact, zero, trace_bound_holds(&sq, n, n_prime))
}

fn log_over_n(abs: f64, zero: bool, n: u64) -> f64 {
    if zero || abs == 0.0 {
        f64::NEG_INFINITY
    } else {
        abs.ln() / n as f64
    }
}

/// Computes |Trace Λ_n| by the cheapest valid path.
///
/// With `allow_closed_form`, the Gauss-sum formula is used whenever
/// gcd(b,n) = 1 and (s₁, s₂) are integers.
pub fn trace_row(
    a: &MappingClass,
    character: &TorusCharacter,
    n: u64,
    mode: Mode,
    allow_closed_form: bool,
) -> Result<TraceRow> {
    crate::ensure_odd(n as i64)?;
    if !character.is_invariant(a) {
        return Err(Error::NotInvariant(format!("{:?} under {}", character, a)));
    }
    let coprime = a.b.gcd(&(n as i64)) == 1;
    let order = character.ring_order(n);
    if mode != Mode::Float && allow_closed_form && coprime {
        if let Some((s1, s2)) = character.s_values(a) {
            let (_, r, _) = bezout(a.b, n as i64);
            let variant = matching_variant_for(character.sign);
            let forms = closed_form_trace(a, n, s1, s2, r, character.sign)?;
            let (abs, exact, zero, bound) = exact_row_fields(n, forms.get(variant), n);
            return Ok(TraceRow {
                n,
                abs_trace: abs,
                abs_trace_sq_exact: exact,
                is_exact_zero: zero,
                log_trace_over_n: log_over_n(abs, zero, n),
                variant_matched: Some(variant),
                path: TracePath::ClosedForm,
                verified: None,
                bound_ok: bound,
            });
        }
    }
    if mode == Mode::Float || (mode == Mode::Auto && order > EXACT_ORDER_CAP) {
        let res = build_intertwiner(a, &character.float_lift(n)?)?;
        let abs = res.abs_trace_normalized();
        let np = res.n_prime() as f64;
        let nf = n as f64;
        return Ok(TraceRow {
            n,
            abs_trace: abs,
            abs_trace_sq_exact: None,
            is_exact_zero: false,
            log_trace_over_n: log_over_n(abs, false, n),
            variant_matched: None,
            path: TracePath::FloatMatrix,
            verified: Some(verify_intertwining(&res)),
            bound_ok: abs * abs * np <= nf.powi(3) * np * (1.0 + 1e-9),
        });
    }
    if order > EXACT_ORDER_CAP {
        return Err(Error::RingTooLarge(order));
    }
    let res = build_intertwiner(a, &character.lift(n)?)?;
    let trace = res.trace_exact();
    let (abs, exact, zero, bound) = exact_row_fields(n, &trace, res.n_prime());
    let variant = match (coprime, character.s_values(a)) {
        (true, Some((s1, s2))) => {
            let (_, r, _) = bezout(a.b, n as i64);
            let forms = closed_form_trace(a, n, s1, s2, r, character.sign)?;
            match_variant(&trace, &forms, character.sign).map(|(v, _)| v)
        }
        _ => None,
    };
    Ok(TraceRow {
        n,
        abs_trace: abs,
        abs_trace_sq_exact: exact,
        is_exact_zero: zero,
        log_trace_over_n: log_over_n(abs, zero, n),
        variant_matched: variant,
        path: TracePath::ExactMatrix,
        verified: Some(verify_intertwining(&res) && check_pattern(&res)),
        bound_ok: bound,
    })
}

/// Summary statistics over a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    /// Largest log|Trace|/n over nonzero rows.
    pub max_log_trace_over_n: Option<f64>,
    pub zeros: Vec<u64>,
    /// Every nonzero row satisfies log|Trace|/n ≤ 1.5·log(n)/n.
    pub growth_bound_ok: bool,
    pub all_verified: bool,
}

pub fn summarize(rows: &[TraceRow]) -> SweepSummary {
    let nonzero: Vec<&TraceRow> = rows.iter().filter(|r| r.log_trace_over_n.is_finite()).collect();
    SweepSummary {
        max_log_trace_over_n: nonzero
            .iter()
            .map(|r| r.log_trace_over_n)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x)))),
        zeros: rows.iter().filter(|r| r.is_exact_zero).map(|r| r.n).collect(),
        growth_bound_ok: nonzero
            .iter()
            .all(|r| r.log_trace_over_n <= 1.5 * (r.n as f64).ln() / r.n as f64 + 1e-12),
        all_verified: rows.iter().all(|r| r.verified != Some(false) && r.bound_ok),
    }
}

/// Rows for every n in `n_list`, computed in parallel and sorted by n.
pub fn asymptotic_sweep(
    a: &MappingClass,
    character: &TorusCharacter,
    n_list: &[u64],
    mode: Mode,
) -> Result<(Vec<TraceRow>, SweepSummary)> {
    let mut rows: Vec<TraceRow> = n_list
        .par_iter()
        .map(|&n| trace_row(a, character, n, mode, true))
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.n);
    let summary = summarize(&rows);
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn mc(a: i64, b: i64, c: i64, d: i64) -> MappingClass {
        MappingClass::new(a, b, c, d).unwrap()
    }

    fn rat(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    fn example_a() -> MappingClass {
        mc(2, 1, -7, -3)
    }

    fn example_char() -> TorusCharacter {
        TorusCharacter::new(rat(-5, 3), rat(8, 3), Sign::Plus)
    }

    fn exact(a: &MappingClass, ch: &TorusCharacter, n: u64) -> IntertwinerResult<RootOfUnity> {
        build_intertwiner(a, &ch.lift(n).unwrap()).unwrap()
    }

    fn normalized_sq(res: &IntertwinerResult<RootOfUnity>) -> Option<BigInt> {
        let v = res.trace_exact().abs_sq().as_integer()?;
        let np = BigInt::from(res.n_prime());
        (&v % &np).is_zero().then(|| v / np)
    }

    #[test]
    fn bezout_identity() {
        for (b, n) in [(1, 5), (3, 9), (0, 7), (-7, 15), (6, 9)] {
            let (m, r, s) = bezout(b, n);
            assert_eq!(b * r + s * n, m);
            assert_eq!(m, b.gcd(&n));
        }
    }

    #[test]
    fn r_coeffs_b_zero_is_delta() {
        let a = mc(1, 0, 3, 1);
        let res = build_r_coeffs(&a, &TorusCharacter::trivial(Sign::Plus).lift(9).unwrap()).unwrap();
        assert_eq!((res.m, res.n_prime), (9, 1));
        let support: Vec<usize> = (0..9).filter(|&k| res.values[k].is_some()).collect();
        assert_eq!(support, vec![res.k0 as usize]);
    }

    #[test]
    fn r_coeffs_example_instance() {
        let a = example_a();
        let lift = example_char().lift(5).unwrap();
        let rc = build_r_coeffs(&a, &lift).unwrap();
        assert_eq!((rc.m, rc.n_prime, rc.k0), (1, 5, 0));
        assert!(rc.values.iter().all(Option::is_some));
        // r_k = v^{krb} u^{kr(a-1)} q^{ab k² r²/2}
        let (u, v, qh) = (lift.u, lift.v, lift.qh);
        for k in 0..5i64 {
            let e = k * rc.r;
            let expect = v.pow(e).mul(&u.pow(e)).mul(&qh.pow(2 * e * e));
            assert_eq!(rc.values[e.rem_euclid(5) as usize].unwrap(), expect);
        }
    }

    #[test]
    fn r_coeffs_recursion_and_bezout_independence() {
        let cases = [
            (mc(2, 1, -7, -3), example_char()),
            (mc(1, 3, 0, 1), TorusCharacter::trivial(Sign::Plus)),
            (mc(4, 3, 5, 4), TorusCharacter::trivial(Sign::Plus)),
            (mc(2, 3, 1, 2), TorusCharacter::trivial(Sign::Minus)),
            (mc(-1, 3, 0, -1), TorusCharacter::trivial(Sign::Minus)),
        ];
        for (a, ch) in cases {
            for n in [5u64, 9, 15] {
                let lift = ch.lift(n).unwrap();
                let rc = build_r_coeffs(&a, &lift).unwrap();
                assert_eq!(rc.values.iter().filter(|v| v.is_some()).count() as u64, rc.n_prime);
                let ni = n as i64;
                let (u, v, qh) = (lift.u, lift.v, lift.qh);
                if ch.sign == Sign::Plus {
                    for k in 0..ni {
                        for t in 0..ni {
                            let lhs = rc.values[(k + t * a.b).rem_euclid(ni) as usize];
                            let f = v
                                .pow(t * a.b)
                                .mul(&u.pow(t * (a.a - 1)))
                                .mul(&qh.pow(a.a * (2 * t * k + a.b * t * t)));
                            let rhs = rc.values[k as usize].map(|x| x.mul(&f));
                            assert_eq!(lhs, rhs, "{a} n={n} k={k} t={t}");
                        }
                    }
                }
                let j = 1 + (n as i64 / rc.m as i64);
                let alt = build_r_coeffs_with(
                    &a,
                    &lift,
                    rc.r + (n as i64 / rc.m as i64) * j,
                    rc.s - (a.b / rc.m as i64) * j,
                    rc.m as i64,
                )
                .unwrap();
                assert_eq!(alt.values, rc.values, "{a} n={n}");
            }
        }
    }

    #[test]
    fn invariance_violation_is_reported() {
        let ch = TorusCharacter::new(rat(0, 1), rat(1, 4), Sign::Plus);
        let err = build_r_coeffs(&mc(1, 1, 0, 1), &ch.lift(5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotInvariant(_)));
    }

    #[test]
    fn identity_intertwiner() {
        let ch = TorusCharacter::new(rat(1, 5), rat(2, 7), Sign::Plus);
        let res = exact(&MappingClass::identity(), &ch, 7);
        assert!(verify_intertwining(&res));
        assert_eq!(res.n_prime(), 1);
        assert!(res.matrix.is_monomial());
        assert!((0..7).all(|i| res.matrix.get(i, i).is_some()));
    }

    #[test]
    fn example_zero_trace_at_nine() {
        let res = exact(&example_a(), &example_char(), 9);
        assert!(verify_intertwining(&res));
        assert!(res.trace_exact().is_zero());
    }

    #[test]
    fn example_minus_branch_unit_trace() {
        let res = exact(&example_a(), &TorusCharacter::trivial(Sign::Minus), 7);
        assert_eq!(res.lift.u, RootOfUnity::new(2, 1));
        assert!(verify_intertwining(&res));
        assert!(!res.index_shift_flipped);
        assert_eq!(normalized_sq(&res), Some(BigInt::from(1)));
    }

    #[test]
    fn verify_examples() {
        let res = exact(&mc(1, 1, 0, 1), &TorusCharacter::trivial(Sign::Plus), 5);
        assert!(verify_intertwining(&res));
        let res = exact(&example_a(), &example_char(), 15);
        assert!(verify_intertwining(&res));
        assert!(check_pattern(&res));
    }

    #[test]
    fn tampered_matrix_fails_verification() {
        let mut res = exact(&example_a(), &example_char(), 5);
        let mut rows: Vec<Vec<(usize, RootOfUnity)>> = res.matrix.rows().to_vec();
        rows[0][0].1 = rows[0][0].1.mul(&RootOfUnity::new(5, 1));
        res.matrix = ScaledPermMatrix::from_rows(5, rows);
        assert!(!verify_intertwining(&res));
    }

    #[test]
    fn intertwining_on_many_instances() {
        let mats = [
            mc(2, 1, -7, -3),
            mc(1, 1, 0, 1),
            mc(0, 1, -1, 2),
            mc(1, 3, 0, 1),
            mc(1, 0, 2, 1),
            mc(-1, 0, 3, -1),
            mc(0, 1, -1, 0),
            mc(0, 1, -1, -1),
            mc(0, -1, 1, 1),
            mc(3, 5, 1, 2),
            mc(2, 3, 1, 2),
            mc(5, 3, 3, 2),
        ];
        for a in mats {
            for sign in [Sign::Plus, Sign::Minus] {
                for k in [(0, 0), (1, 1), (1, 0)] {
                    let fam = crate::torus_rep::solve_invariant_characters(&a, sign, k);
                    let ch = match fam.angles() {
                        Some((p1, p2)) => TorusCharacter::new(p1, p2, sign),
                        None => TorusCharacter::trivial(sign),
                    };
                    if !ch.is_invariant(&a) {
                        continue;
                    }
                    for n in [3u64, 5, 9, 15] {
                        let Ok(res) = build_intertwiner(&a, &ch.lift(n).unwrap()) else {
                            continue;
                        };
                        assert!(verify_intertwining(&res), "{a} {sign:?} {k:?} n={n}");
                        assert!(!res.index_shift_flipped);
                        assert!(check_pattern(&res));
                        let det = abs_det_check(&res).unwrap();
                        assert!(det.ok, "{a} {sign:?} n={n} {det:?}");
                        let sq = res.trace_exact().abs_sq();
                        assert!(trace_bound_holds(&sq, n, res.n_prime()));
                    }
                }
            }
        }
    }

    #[test]
    fn det_examples() {
        let res = exact(&mc(1, 0, 3, 1), &TorusCharacter::trivial(Sign::Plus), 9);
        assert_eq!(res.n_prime(), 1);
        let d = abs_det_check(&res).unwrap();
        assert!(d.ok && d.log_abs_det.abs() < 1e-9);
        let res = exact(&mc(1, 3, 0, 1), &TorusCharacter::trivial(Sign::Plus), 9);
        assert_eq!((res.m(), res.n_prime()), (3, 3));
        let d = abs_det_check(&res).unwrap();
        assert!(d.ok && (d.log_abs_det - 4.5 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(d.blocks, 3);
        let res = exact(&example_a(), &example_char(), 5);
        let d = abs_det_check(&res).unwrap();
        assert!(d.ok && (d.log_abs_det - 2.5 * 5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn closed_form_examples() {
        // s1 = s2 = 1, r = 1: Σ (−1)^t q^{(−3t² + 10t)/2}
        let a = example_a();
        assert_eq!(example_char().s_values(&a), Some((1, 1)));
        for n in [5u64, 7, 11] {
            let cf = closed_form_trace(&a, n, 1, 1, 1, Sign::Plus).unwrap();
            let mut expect = CycInt::zero(2 * n);
            for t in 0..n as i64 {
                expect.add_unit(n as i64 * t + (-3 * t * t + 10 * t), &BigInt::from(1));
            }
            assert_eq!(cf.variant_b, expect);
        }
        // a+d = 2 with vanishing linear term sums to n
        let cf = closed_form_trace(&mc(1, 1, 0, 1), 7, 0, 0, 1, Sign::Plus).unwrap();
        assert_eq!(cf.variant_b.as_integer(), Some(BigInt::from(7)));
        // trace-1 periodic class on the minus branch reduces to the k = 3 Gauss sum
        let a = mc(0, -1, 1, 1);
        for n in [5u64, 7, 9] {
            let (_, r, _) = bezout(a.b, n as i64);
            let cf = closed_form_trace(&a, n, 0, 0, r, Sign::Minus).unwrap();
            assert_eq!(cf.variant_a.abs_sq(), gauss_sum(3, n).abs_sq());
        }
        assert_eq!(
            closed_form_trace(&mc(1, 3, 0, 1), 9, 0, 0, 1, Sign::Plus).unwrap_err(),
            Error::NotCoprime { b: 3, n: 9 }
        );
    }

    #[test]
    fn closed_form_matches_matrix_trace() {
        let cases = [
            (mc(2, 1, -7, -3), example_char()),
            (mc(2, 1, -7, -3), TorusCharacter::trivial(Sign::Minus)),
            (mc(1, 1, 0, 1), TorusCharacter::trivial(Sign::Plus)),
            (mc(0, 1, -1, 2), TorusCharacter::trivial(Sign::Plus)),
            (mc(3, 5, 1, 2), TorusCharacter::trivial(Sign::Plus)),
            (mc(3, 5, 1, 2), TorusCharacter::new(rat(1, 3), rat(2, 3), Sign::Plus)),
            (mc(0, 1, -1, -1), TorusCharacter::trivial(Sign::Minus)),
            (mc(0, -1, 1, 1), TorusCharacter::trivial(Sign::Plus)),
            (mc(0, 1, -1, 0), TorusCharacter::new(rat(1, 2), rat(1, 2), Sign::Plus)),
            (mc(2, 1, 1, 1), TorusCharacter::new(rat(0, 1), rat(0, 1), Sign::Minus)),
        ];
        for (a, ch) in cases {
            for n in [5u64, 7, 11, 13] {
                if a.b.gcd(&(n as i64)) != 1 {
                    continue;
                }
                for (r1, r2) in [(0, 0), (1, 0), (2, 3)] {
                    let ch = ch.with_lifts(r1, r2);
                    let (s1, s2) = ch.s_values(&a).unwrap();
                    let res = exact(&a, &ch, n);
                    let (_, r, _) = bezout(a.b, n as i64);
                    let forms = closed_form_trace(&a, n, s1, s2, r, ch.sign).unwrap();
                    let trace = res.trace_exact();
                    let m = match_variant(&trace, &forms, ch.sign);
                    assert_eq!(m, Some((matching_variant_for(ch.sign), true)), "{a} {ch:?} n={n}");
                    assert_eq!(forms.get(matching_variant_for(ch.sign)).abs_sq(), trace.abs_sq());
                }
            }
        }
    }

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_sum(0, 7).as_integer(), Some(BigInt::from(7)));
        assert_eq!(gauss_sum(1, 3).abs_sq().as_integer(), Some(BigInt::from(3)));
        assert_eq!(gauss_sum(6, 9).abs_sq().as_integer(), Some(BigInt::from(27)));
        for k in 0..=12 {
            for n in [3u64, 5, 9, 15, 21] {
                let expect = BigInt::from(k.gcd(&(n as i64)) * n as i64);
                assert_eq!(gauss_sum(k, n).abs_sq().as_integer(), Some(expect));
            }
        }
    }

    #[test]
    fn periodic_power_examples() {
        let cases = [
            (mc(0, 1, -1, 0), Sign::Plus, 4),
            (mc(0, 1, -1, 0), Sign::Minus, 4),
            (mc(0, 1, -1, -1), Sign::Plus, 3),
            (mc(0, 1, -1, -1), Sign::Minus, 6),
            (mc(0, -1, 1, 1), Sign::Plus, 6),
            (MappingClass::identity(), Sign::Plus, 1),
        ];
        for (a, sign, k) in cases {
            for n in [3u64, 5, 9] {
                let res = exact(&a, &TorusCharacter::trivial(sign), n);
                let p = periodic_power_check(&a, &res).unwrap();
                assert_eq!(p.k, k);
                assert!(p.is_scalar && p.unit_modulus, "{a} {sign:?} n={n}");
            }
        }
        let res = exact(&mc(1, 1, 0, 1), &TorusCharacter::trivial(Sign::Plus), 5);
        assert_eq!(periodic_power_check(&mc(1, 1, 0, 1), &res).unwrap_err(), Error::NotPeriodic);
    }

    #[test]
    fn periodic_unit_traces() {
        for (a, sign) in [
            (mc(0, 1, -1, 0), Sign::Plus),
            (mc(0, 1, -1, 0), Sign::Minus),
            (mc(0, 1, -1, -1), Sign::Minus),
            (mc(0, -1, 1, 1), Sign::Plus),
        ] {
            for n in [3u64, 5, 7, 9, 15] {
                let res = exact(&a, &TorusCharacter::trivial(sign), n);
                assert_eq!(normalized_sq(&res), Some(BigInt::from(1)), "{a} {sign:?} n={n}");
            }
        }
    }

    #[test]
    fn trace_independence_examples() {
        let lifts = [(0, 0), (1, 0), (2, 3)];
        assert!(trace_independence_check(&example_a(), 5, &example_char(), &lifts).unwrap());
        let ch = TorusCharacter::trivial(Sign::Plus);
        assert!(trace_independence_check(&mc(1, 0, 4, 1), 9, &ch, &[(0, 0), (0, 1), (0, 4)]).unwrap());
        assert!(trace_independence_check(&MappingClass::identity(), 7, &ch, &lifts).unwrap());
    }

    #[test]
    fn float_backend_agrees_with_exact() {
        for n in [5u64, 9] {
            let exact_res = exact(&example_a(), &example_char(), n);
            let float_res = build_intertwiner(&example_a(), &example_char().float_lift(n).unwrap()).unwrap();
            assert!(verify_intertwining(&float_res));
            assert!((float_res.trace_complex() - exact_res.trace_exact().eval_complex()).norm() < 1e-8);
        }
    }

    #[test]
    fn sweep_examples() {
        let ns: Vec<u64> = (3..=33).step_by(2).collect();
        let (rows, summary) = asymptotic_sweep(&example_a(), &example_char(), &ns, Mode::Auto).unwrap();
        assert_eq!(summary.zeros, vec![3, 9, 15, 21, 27, 33]);
        assert!(summary.growth_bound_ok && summary.all_verified);
        assert!(rows.iter().all(|r| r.path == TracePath::ClosedForm));
        let ch = TorusCharacter::trivial(Sign::Plus);
        let (rows, _) = asymptotic_sweep(&mc(1, 1, 0, 1), &ch, &[5, 7, 9], Mode::Exact).unwrap();
        for r in &rows {
            assert_eq!(r.abs_trace_sq_exact, Some(BigInt::from(r.n)));
            assert!((r.log_trace_over_n - (r.n as f64).ln() / (2.0 * r.n as f64)).abs() < 1e-12);
        }
        let (rows, _) = asymptotic_sweep(&mc(0, 1, -1, 0), &ch, &[5, 7, 9], Mode::Auto).unwrap();
        assert!(rows.iter().all(|r| r.log_trace_over_n.abs() < 1e-12));
        let row = trace_row(&example_a(), &example_char(), 9, Mode::Exact, false).unwrap();
        assert_eq!(row.path, TracePath::ExactMatrix);
        assert!(row.is_exact_zero && row.verified == Some(true));
        let row = trace_row(&example_a(), &example_char(), 7, Mode::Float, true).unwrap();
        assert_eq!(row.path, TracePath::FloatMatrix);
        let exact_row = trace_row(&example_a(), &example_char(), 7, Mode::Exact, false).unwrap();
        assert!((row.abs_trace - exact_row.abs_trace).abs() < 1e-9);
        assert_eq!(exact_row.variant_matched, Some(Variant::B));
    }
}

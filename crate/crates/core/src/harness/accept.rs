//! The acceptance suite: twelve criteria, each tagged with the module it
//! exercises and reporting a single pass/fail line with measured values.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::GaussFn;
use crate::cyclotomic::RootOfUnity;
use crate::error::{Error, Result};
use crate::intertwiner::{
    abs_det_check, build_intertwiner, gauss_sum, periodic_power_check, trace_bound_holds, trace_row,
    verify_intertwining, IntertwinerResult, Mode, TracePath,
};
use crate::punctured_torus::{
    build_cf_rep, build_periodic_intertwiner, random_unit_triple, shadow_equations_check, structure_check,
};
use crate::quantum_torus::{MappingClass, Sign};
use crate::torus_rep::{decompose_subreps, solve_invariant_characters, TorusCharacter};

/// Options for a suite run.
#[derive(Clone, Debug)]
pub struct AcceptOptions {
    /// Module name or criterion number to keep.
    pub only: Option<String>,
    pub gauss: GaussFn,
    /// Seed for the random unit triples.
    pub seed: u64,
}

impl Default for AcceptOptions {
    fn default() -> Self {
        AcceptOptions {
            only: None,
            gauss: gauss_sum,
            seed: 20_240_601,
        }
    }
}

type Check = fn(&AcceptOptions) -> Result<(bool, String)>;

/// One acceptance criterion.
#[derive(Clone, Copy)]
pub struct Criterion {
    pub id: u32,
    pub module: &'static str,
    pub name: &'static str,
    /// Wall-clock limit in seconds, when one applies.
    pub limit_s: Option<f64>,
    check: Check,
}

/// Result of one criterion.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} [{}] {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.module,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, module, name, limit_s, check| Criterion {
        id,
        module,
        name,
        limit_s,
        check,
    };
    vec![
        c(1, "intertwiner", "example_zero_traces", Some(5.0), crit_zero_traces as Check),
        c(2, "intertwiner", "example_minus_branch", Some(30.0), crit_minus_branch),
        c(3, "intertwiner", "sqrt_n_law", None, crit_sqrt_n),
        c(4, "intertwiner", "gauss_sum_identity", Some(60.0), crit_gauss),
        c(5, "intertwiner", "determinant_law", None, crit_determinant),
        c(6, "intertwiner", "intertwining_exactness", None, crit_intertwining),
        c(7, "intertwiner", "trace_bound", None, crit_trace_bound),
        c(8, "torus_rep", "subrepresentation_decomposition", None, crit_subreps),
        c(9, "punctured_torus", "punctured_torus_intertwiner", None, crit_punctured),
        c(10, "punctured_torus", "chekhov_fock_structure", None, crit_chekhov_fock),
        c(11, "intertwiner", "periodicity", None, crit_periodic),
        c(12, "intertwiner", "asymptotic_behavior", Some(300.0), crit_asymptotic),
    ]
}

/// Criteria kept by `only` (a module name or a criterion number).
pub fn select(only: Option<&str>) -> Result<Vec<Criterion>> {
    let all = criteria();
    let Some(f) = only else { return Ok(all) };
    let kept: Vec<Criterion> = all
        .into_iter()
        .filter(|c| c.module == f || c.id.to_string() == f || c.name == f)
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput(format!("no criterion matches {f:?}")));
    }
    Ok(kept)
}

pub fn run_criterion(c: &Criterion, opts: &AcceptOptions) -> Outcome {
    let start = Instant::now();
    let (mut passed, mut detail) = match (c.check)(opts) {
        Ok(r) => r,
        Err(e) => (false, format!("error {}: {e}", e.kind())),
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = c.limit_s {
        if seconds >= limit {
            passed = false;
            detail.push_str(&format!("; exceeded {limit} s"));
        }
    }
    Outcome {
        id: c.id,
        module: c.module,
        name: c.name,
        passed,
        detail,
        seconds,
    }
}

/// Runs the selected criteria in order, calling `report` after each.
pub fn run_all(opts: &AcceptOptions, mut report: impl FnMut(&Outcome)) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for c in select(opts.only.as_deref())? {
        let o = run_criterion(&c, opts);
        report(&o);
        out.push(o);
    }
    Ok(out)
}

fn mc(a: i64, b: i64, c: i64, d: i64) -> MappingClass {
    MappingClass::new(a, b, c, d).expect("fixed matrices are in SL(2,Z)")
}

fn rat(p: i64, q: i64) -> Rational64 {
    Rational64::new(p, q)
}

fn odd(a: u64, b: u64) -> Vec<u64> {
    (a..=b).filter(|n| n % 2 == 1).collect()
}

fn example_a() -> MappingClass {
    mc(2, 1, -7, -3)
}

/// λ₁ = e^{2πi/3}, λ₂ = e^{4πi/3}.
fn example_char() -> TorusCharacter {
    TorusCharacter::new(rat(1, 3), rat(2, 3), Sign::Plus)
}

fn exact(a: &MappingClass, ch: &TorusCharacter, n: u64) -> Result<IntertwinerResult<RootOfUnity>> {
    build_intertwiner(a, &ch.lift(n)?)
}

/// |Trace|² of the normalized intertwiner, when it is an integer.
fn normalized_sq(res: &IntertwinerResult<RootOfUnity>) -> Option<BigInt> {
    let v = res.trace_exact().abs_sq().as_integer()?;
    let (q, r) = v.div_rem(&BigInt::from(res.n_prime()));
    r.is_zero().then_some(q)
}

fn list(ns: &[u64]) -> String {
    format!("{ns:?}")
}

fn crit_zero_traces(_: &AcceptOptions) -> Result<(bool, String)> {
    let (a, ch) = (example_a(), example_char());
    let zero_ns = [3u64, 9, 15, 21, 27, 33];
    let nonzero_ns = [5u64, 7, 11, 13];
    let mut bad = Vec::new();
    for &n in &zero_ns {
        if !exact(&a, &ch, n)?.trace_exact().is_zero() {
            bad.push(n);
        }
    }
    for &n in &nonzero_ns {
        if exact(&a, &ch, n)?.trace_exact().is_zero() {
            bad.push(n);
        }
    }
    Ok((
        bad.is_empty(),
        format!("zero at {}, nonzero at {}, mismatches {}", list(&zero_ns), list(&nonzero_ns), list(&bad)),
    ))
}

fn crit_minus_branch(_: &AcceptOptions) -> Result<(bool, String)> {
    let a = example_a();
    let ch = TorusCharacter::trivial(Sign::Minus);
    let ns = odd(3, 101);
    let minus_one = RootOfUnity::new(2, 1);
    let bad: Vec<u64> = ns
        .par_iter()
        .map(|&n| {
            let res = exact(&a, &ch, n)?;
            let lift_ok = res.lift.u == minus_one && res.lift.v == minus_one;
            Ok((n, lift_ok && normalized_sq(&res) == Some(BigInt::from(1))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| n)
        .collect();
    Ok((
        bad.is_empty(),
        format!("|Trace|^2 = 1 with u = v = -1 for {} odd n in 3..=101; failures {}", ns.len(), list(&bad)),
    ))
}

fn sqrt_n_matrices() -> [MappingClass; 2] {
    [mc(1, 1, 0, 1), mc(0, 1, -1, 2)]
}

fn crit_sqrt_n(_: &AcceptOptions) -> Result<(bool, String)> {
    let ch = TorusCharacter::trivial(Sign::Plus);
    let ns = odd(3, 99);
    let mut bad = Vec::new();
    for a in sqrt_n_matrices() {
        let fails: Vec<u64> = ns
            .par_iter()
            .map(|&n| Ok((n, normalized_sq(&exact(&a, &ch, n)?) == Some(BigInt::from(n)))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n)
            .collect();
        if !fails.is_empty() {
            bad.push(format!("{a}: {fails:?}"));
        }
    }
    Ok((
        bad.is_empty(),
        format!("|Trace|^2 = n for [[1,1],[0,1]] and [[0,1],[-1,2]], odd n in 3..=99; failures {bad:?}"),
    ))
}

fn crit_gauss(opts: &AcceptOptions) -> Result<(bool, String)> {
    let ns = odd(3, 99);
    let gauss = opts.gauss;
    let bad: Vec<(i64, u64)> = (0..=24i64)
        .into_par_iter()
        .flat_map_iter(|k| ns.iter().map(move |&n| (k, n)))
        .filter(|&(k, n)| {
            let expect = BigInt::from(k.gcd(&(n as i64)) * n as i64);
            gauss(k, n).abs_sq().as_integer() != Some(expect)
        })
        .collect();
    Ok((
        bad.is_empty(),
        format!("|G(k,n)|^2 = gcd(k,n)·n for 0 <= k <= 24, odd n in 3..=99 ({} pairs); failures {:?}", 25 * ns.len(), &bad[..bad.len().min(5)]),
    ))
}

fn det_instances() -> Vec<(MappingClass, TorusCharacter)> {
    let t = TorusCharacter::trivial(Sign::Plus);
    vec![
        (mc(1, 0, 2, 1), t),
        (mc(1, 0, 3, 1), TorusCharacter::new(rat(1, 3), rat(1, 5), Sign::Plus)),
        (example_a(), example_char()),
        (mc(1, 1, 0, 1), t),
        (mc(1, 3, 0, 1), t),
        (mc(2, 3, 1, 2), t),
        (mc(1, 5, 0, 1), t),
        (mc(3, 5, 1, 2), t),
    ]
}

fn crit_determinant(_: &AcceptOptions) -> Result<(bool, String)> {
    let ns = [9u64, 15, 25, 45];
    let mut checked = 0;
    let mut with_blocks = 0;
    let mut worst_block: f64 = 0.0;
    let mut worst_total: f64 = 0.0;
    let mut bad = Vec::new();
    for (a, ch) in det_instances() {
        for &n in &ns {
            let res = exact(&a, &ch, n)?;
            let d = abs_det_check(&res)?;
            checked += 1;
            if res.m() > 1 {
                with_blocks += 1;
            }
            worst_block = worst_block.max(d.worst_block_error);
            worst_total = worst_total.max((d.log_abs_det - d.expected).exp_m1().abs());
            if !d.ok {
                bad.push(format!("{a} n={n}"));
            }
        }
    }
    Ok((
        bad.is_empty() && with_blocks > 0,
        format!(
            "{checked} instances ({with_blocks} with m > 1), worst relative det error {worst_total:.2e}, worst block error {worst_block:.2e}; failures {bad:?}"
        ),
    ))
}

fn solved(a: MappingClass, sign: Sign, k: (i64, i64)) -> (MappingClass, TorusCharacter) {
    let (p1, p2) = solve_invariant_characters(&a, sign, k)
        .angles()
        .expect("isolated solution");
    (a, TorusCharacter::new(p1, p2, sign))
}

/// Twenty (A, character) instances covering both branches and b = 0.
fn intertwining_instances() -> Vec<(MappingClass, TorusCharacter)> {
    let plus = TorusCharacter::trivial(Sign::Plus);
    let minus = TorusCharacter::trivial(Sign::Minus);
    let ang = |p: (i64, i64), q: (i64, i64), s| TorusCharacter::new(rat(p.0, p.1), rat(q.0, q.1), s);
    vec![
        (example_a(), example_char()),
        (example_a(), minus),
        (mc(1, 1, 0, 1), plus),
        (mc(0, 1, -1, 2), plus),
        (mc(1, 0, 2, 1), plus),
        (mc(1, 0, 3, 1), ang((1, 3), (1, 5), Sign::Plus)),
        (mc(-1, 0, 3, -1), ang((1, 3), (2, 7), Sign::Minus)),
        (mc(1, 3, 0, 1), plus),
        (mc(2, 3, 1, 2), plus),
        (mc(2, 3, 1, 2), minus),
        (mc(3, 5, 1, 2), ang((1, 3), (2, 3), Sign::Plus)),
        (mc(0, 1, -1, 0), plus),
        (mc(0, 1, -1, 0), ang((1, 2), (1, 2), Sign::Minus)),
        (mc(0, 1, -1, -1), minus),
        (mc(0, -1, 1, 1), plus),
        (mc(-1, 0, 0, -1), ang((1, 5), (2, 7), Sign::Minus)),
        (MappingClass::identity(), ang((1, 3), (1, 5), Sign::Plus)),
        (mc(1, 1, 0, 1), ang((1, 4), (1, 2), Sign::Minus)),
        (mc(5, 3, 3, 2), plus),
        solved(mc(4, -1, 1, 0), Sign::Minus, (1, 1)),
    ]
}

fn crit_intertwining(_: &AcceptOptions) -> Result<(bool, String)> {
    let inst = intertwining_instances();
    let ns = [5u64, 9, 15, 27];
    let mut bad = Vec::new();
    let mut degenerate = 0;
    let mut minus = 0;
    for (a, ch) in &inst {
        if !ch.is_invariant(a) {
            bad.push(format!("{a} not invariant"));
            continue;
        }
        degenerate += usize::from(a.b == 0);
        minus += usize::from(ch.sign == Sign::Minus);
        for &n in &ns {
            if !verify_intertwining(&exact(a, ch, n)?) {
                bad.push(format!("{a} {} n={n}", ch.sign.name()));
            }
        }
    }
    Ok((
        bad.is_empty() && inst.len() == 20 && degenerate > 0 && minus > 0,
        format!(
            "{} instances ({minus} minus, {degenerate} with b = 0) at n in {:?}; failures {bad:?}",
            inst.len(),
            ns
        ),
    ))
}

fn crit_trace_bound(opts: &AcceptOptions) -> Result<(bool, String)> {
    let mut cases: Vec<(MappingClass, TorusCharacter, u64)> = Vec::new();
    for n in [3u64, 9, 15, 21, 27, 33, 5, 7, 11, 13] {
        cases.push((example_a(), example_char(), n));
    }
    for n in odd(3, 101) {
        cases.push((example_a(), TorusCharacter::trivial(Sign::Minus), n));
    }
    for a in sqrt_n_matrices() {
        for n in odd(3, 99) {
            cases.push((a, TorusCharacter::trivial(Sign::Plus), n));
        }
    }
    for (a, ch) in det_instances() {
        for n in [9u64, 15, 25, 45] {
            cases.push((a, ch, n));
        }
    }
    for (a, ch) in intertwining_instances() {
        for n in [5u64, 9, 15, 27] {
            cases.push((a, ch, n));
        }
    }
    let bad: Vec<String> = cases
        .par_iter()
        .map(|(a, ch, n)| {
            let res = exact(a, ch, *n)?;
            let ok = trace_bound_holds(&res.trace_exact().abs_sq(), *n, res.n_prime());
            Ok((!ok).then(|| format!("{a} n={n}")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let gauss = opts.gauss;
    let gauss_bad = (0..=24i64)
        .flat_map(|k| odd(3, 99).into_iter().map(move |n| (k, n)))
        .filter(|&(k, n)| {
            let sq = gauss(k, n).abs_sq();
            !trace_bound_holds(&sq, n, 1)
        })
        .count();
    Ok((
        bad.is_empty() && gauss_bad == 0,
        format!(
            "|Trace|^2 <= n^3·n' on {} intertwiner instances and all Gauss sums; failures {bad:?}, Gauss failures {gauss_bad}",
            cases.len()
        ),
    ))
}

fn crit_subreps(_: &AcceptOptions) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    let ns = odd(3, 31);
    for s in [1i64, -1] {
        for &n in &ns {
            let d = decompose_subreps(n, s, s)?;
            let ok = d.v1.len() as u64 == n.div_ceil(2) && d.v2.len() as u64 == (n - 1) / 2 && d.closed && d.independent;
            if !ok {
                bad.push(format!("u=v={s} n={n}"));
            }
        }
    }
    Ok((
        bad.is_empty(),
        format!("dim V1 = (n+1)/2, dim V2 = (n-1)/2, both invariant, u = v = ±1, odd n in 3..=31; failures {bad:?}"),
    ))
}

fn crit_punctured(opts: &AcceptOptions) -> Result<(bool, String)> {
    let gauss = opts.gauss;
    let rows: Vec<(u64, bool)> = odd(3, 99)
        .par_iter()
        .map(|&n| {
            let lam = build_periodic_intertwiner(n)?;
            let sq = lam.trace_exact().abs_sq().as_integer();
            let g = gauss(12, n).abs_sq().as_integer();
            let expect = BigInt::from(6u64.gcd(&n) * n);
            let mut ok = sq.as_ref() == Some(&expect) && g.as_ref() == Some(&expect);
            if n <= 31 {
                ok &= lam.verify_conjugation() && lam.det_check()?.1;
            }
            Ok((n, ok))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<u64> = rows.iter().filter(|r| !r.1).map(|r| r.0).collect();
    Ok((
        bad.is_empty(),
        format!(
            "conjugation and |det| = n^(n/2) for n <= 31; |Trace|^2 = gcd(6,n) by matrix and Gauss paths for odd n in 3..=99; failures {bad:?}"
        ),
    ))
}

fn crit_chekhov_fock(opts: &AcceptOptions) -> Result<(bool, String)> {
    let per_n = 50;
    let ns = [3u64, 5, 7, 9];
    let jobs: Vec<(u64, [RootOfUnity; 3])> = ns
        .iter()
        .flat_map(|&n| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ n);
            (0..per_n).map(move |_| (n, random_unit_triple(n, &mut rng))).collect::<Vec<_>>()
        })
        .collect();
    let bad: Vec<String> = jobs
        .par_iter()
        .map(|(n, r)| {
            let rep = build_cf_rep(*n, r[0], r[1], r[2])?;
            let s = structure_check(&rep)?;
            let sh = shadow_equations_check(&rep)?;
            Ok((!(s.ok() && sh.ok())).then(|| format!("n={n} r={:?} {s:?}", r.map(|z| z.to_string()))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((
        bad.is_empty(),
        format!(
            "skein relations, P central and scalar, shadow equations, T_n(p) relation for {per_n} triples per n in {ns:?}; failures {}",
            bad.len()
        ),
    ))
}

fn periodic_cases() -> [(MappingClass, Sign); 4] {
    [
        (mc(0, 1, -1, 0), Sign::Plus),
        (mc(0, 1, -1, 0), Sign::Minus),
        (mc(0, 1, -1, -1), Sign::Minus),
        (mc(0, -1, 1, 1), Sign::Plus),
    ]
}

fn crit_periodic(_: &AcceptOptions) -> Result<(bool, String)> {
    let ns = odd(3, 99);
    let mut bad = Vec::new();
    for (a, sign) in periodic_cases() {
        let ch = TorusCharacter::trivial(sign);
        let fails: Vec<u64> = ns
            .par_iter()
            .map(|&n| {
                let res = exact(&a, &ch, n)?;
                let p = periodic_power_check(&a, &res)?;
                Ok((n, p.is_scalar && p.unit_modulus && normalized_sq(&res) == Some(BigInt::from(1))))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n)
            .collect();
        if !fails.is_empty() {
            bad.push(format!("{a} {}: {fails:?}", sign.name()));
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "Λ^k scalar of modulus n'^(k/2) and |Trace|^2 = 1 for [[0,1],[-1,0]] (both branches), [[0,1],[-1,-1]] (minus), [[0,-1],[1,1]] (plus), odd n in 3..=99; failures {bad:?}"
        ),
    ))
}

fn crit_asymptotic(opts: &AcceptOptions) -> Result<(bool, String)> {
    let ns = odd(101, 501);
    let (a, ch) = (example_a(), example_char());
    let rows = ns
        .par_iter()
        .map(|&n| trace_row(&a, &ch, n, Mode::Auto, true))
        .collect::<Result<Vec<_>>>()?;
    let closed = rows.iter().all(|r| r.path == TracePath::ClosedForm);
    let growth_ok = rows
        .iter()
        .filter(|r| !r.is_exact_zero)
        .all(|r| r.log_trace_over_n <= 1.5 * (r.n as f64).ln() / r.n as f64);
    let big = rows.iter().filter(|r| r.abs_trace >= 1.0).count();
    let example_max = rows
        .iter()
        .filter(|r| !r.is_exact_zero)
        .map(|r| r.log_trace_over_n)
        .fold(f64::NEG_INFINITY, f64::max);

    let limit = 3f64.ln() / (2.0 * 101.0) + 1e-9;
    let mut periodic_max = f64::NEG_INFINITY;
    for (pa, sign) in periodic_cases() {
        let pch = TorusCharacter::trivial(sign);
        let prow = ns
            .par_iter()
            .map(|&n| trace_row(&pa, &pch, n, Mode::Auto, true))
            .collect::<Result<Vec<_>>>()?;
        for r in prow {
            periodic_max = periodic_max.max(r.log_trace_over_n);
        }
    }
    let gauss = opts.gauss;
    let punctured_max = ns
        .par_iter()
        .map(|&n| {
            let sq = gauss(12, n).abs_sq().as_integer().unwrap_or_default();
            let (q, _) = sq.div_rem(&BigInt::from(n));
            let v: f64 = q.to_string().parse().unwrap_or(f64::NAN);
            if v > 0.0 {
                v.sqrt().ln() / n as f64
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let ok = closed && growth_ok && big > 0 && periodic_max <= limit && punctured_max <= limit;
    Ok((
        ok,
        format!(
            "{} rows in 101..=501: closed form {closed}, growth bound {growth_ok}, {big} rows with |Trace| >= 1, example max log|Trace|/n {example_max:.6}, periodic max {periodic_max:.3e}, punctured max {punctured_max:.6} (limit {limit:.6})",
            rows.len()
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select(None).unwrap().len(), 12);
        assert_eq!(select(Some("punctured_torus")).unwrap().len(), 2);
        assert_eq!(select(Some("torus_rep")).unwrap()[0].id, 8);
        assert_eq!(select(Some("4")).unwrap()[0].name, "gauss_sum_identity");
        assert!(select(Some("nothing")).is_err());
    }

    #[test]
    fn tampered_gauss_fails() {
        let opts = AcceptOptions {
            only: Some("4".into()),
            gauss: super::super::tampered_gauss_sum,
            ..Default::default()
        };
        let out = run_all(&opts, |_| {}).unwrap();
        assert!(!out[0].passed);
        assert!(out[0].line().starts_with("FAIL  4 [intertwiner]"));
    }

    #[test]
    fn instance_sets_are_invariant() {
        for (a, ch) in intertwining_instances().into_iter().chain(det_instances()) {
            assert!(ch.is_invariant(&a), "{a} {ch:?}");
        }
    }
}

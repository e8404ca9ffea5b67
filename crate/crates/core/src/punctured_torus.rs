//! Chekhov–Fock algebra of the once-punctured torus: representations, the
//! skein embedding of K₁, K₂, K₃, P, the classical-shadow equations and the
//! explicit intertwiner for the order-3 class [[0,1],[−1,−1]].

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclotomic::{lcm_u64, CycInt, RootOfUnity};
use crate::error::{Error, Result};
use crate::intertwiner::{gauss_sum, DET_DIM_CAP};
use crate::matrix::{log_abs_det, CycMatrix, ScaledPermMatrix, Unit};

/// Irreducible representation ρ_{r₁,r₂,r₃} of the Chekhov–Fock algebra.
#[derive(Clone, Debug)]
pub struct CFRep<S> {
    pub n: u64,
    pub r: [S; 3],
    pub x: [ScaledPermMatrix<S>; 3],
    pub qh: S,
    /// two_sigma[i][j] = e with X_i X_j = q^e X_j X_i, e ∈ (−n/2, n/2].
    pub two_sigma: [[i64; 3]; 3],
}

fn commutation_exponent<S: Unit>(a: &ScaledPermMatrix<S>, b: &ScaledPermMatrix<S>, n: u64) -> Result<i64> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    let (j, x) = ab.rows()[0]
        .first()
        .ok_or_else(|| Error::RelationFailed("zero row".into()))?;
    let y = ba
        .get(0, *j)
        .ok_or_else(|| Error::RelationFailed("supports differ".into()))?;
    let e = x
        .mul(&y.inv())
        .log_in(n)
        .ok_or_else(|| Error::RelationFailed("ratio is not a power of q".into()))?;
    if !ab.same(&ba.scale(&S::root_of_unity(n, e))) {
        return Err(Error::RelationFailed("generators do not q-commute".into()));
    }
    let n = n as i64;
    Ok(if 2 * e > n { e - n } else { e })
}

/// X₁w_i = r₁q^i w_i, X₂w_i = r₂q^{−i}w_{i+1}, X₃w_i = r₃w_{i−1}.
pub fn build_cf_rep<S: Unit>(n: u64, r1: S, r2: S, r3: S) -> Result<CFRep<S>> {
    crate::ensure_odd(n as i64)?;
    let q = |e: i64| S::root_of_unity(n, e);
    let nn = n as usize;
    let x1 = ScaledPermMatrix::diagonal((0..nn).map(|i| r1.mul(&q(i as i64))).collect());
    let x2 = ScaledPermMatrix::from_entries(
        nn,
        (0..nn).map(|i| ((i + 1) % nn, i, r2.mul(&q(-(i as i64))))).collect(),
    );
    let x3 = ScaledPermMatrix::from_entries(nn, (0..nn).map(|i| ((i + nn - 1) % nn, i, r3.clone())).collect());
    let x = [x1, x2, x3];
    // at n = 1 all residues vanish and the oriented triangulation value is used
    let mut two_sigma = [[0, 1, -1], [-1, 0, 1], [1, -1, 0]];
    if n > 1 {
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    two_sigma[i][j] = commutation_exponent(&x[i], &x[j], n)?;
                }
            }
        }
    }
    if (two_sigma[0][1], two_sigma[1][2], two_sigma[2][0]) != (1, 1, 1) {
        return Err(Error::RelationFailed(format!("commutation exponents {two_sigma:?}")));
    }
    Ok(CFRep {
        n,
        r: [r1, r2, r3],
        x,
        qh: S::root_of_unity(2 * n, 1),
        two_sigma,
    })
}

impl<S: Unit> CFRep<S> {
    /// Weyl-normalized monomial [X_{i₁}^{p₁}…X_{i_k}^{p_k}].
    pub fn weyl(&self, word: &[(usize, i64)]) -> Result<ScaledPermMatrix<S>> {
        let mut total = 0i64;
        for (a, &(i, p)) in word.iter().enumerate() {
            for &(j, s) in &word[a + 1..] {
                total += p * s * self.two_sigma[i][j];
            }
        }
        let mut m = ScaledPermMatrix::identity(self.n as usize);
        for &(i, p) in word {
            m = m.mul(&self.x[i].pow_monomial(p)?)?;
        }
        Ok(m.scale(&self.qh.pow(-total)))
    }

    /// The three monomials of K_i = [X_jX_k] + [X_j⁻¹X_k⁻¹] + [X_jX_k⁻¹].
    pub fn k_terms(&self, i: usize) -> Result<[ScaledPermMatrix<S>; 3]> {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        Ok([
            self.weyl(&[(j, 1), (k, 1)])?,
            self.weyl(&[(j, -1), (k, -1)])?,
            self.weyl(&[(j, 1), (k, -1)])?,
        ])
    }

    /// The two monomials of P = [X₁²X₂²X₃²] + [X₁⁻²X₂⁻²X₃⁻²].
    pub fn p_terms(&self) -> Result<[ScaledPermMatrix<S>; 2]> {
        Ok([
            self.weyl(&[(0, 2), (1, 2), (2, 2)])?,
            self.weyl(&[(0, -2), (1, -2), (2, -2)])?,
        ])
    }
}

impl CFRep<RootOfUnity> {
    /// Order of the cyclotomic ring holding all entries.
    pub fn ring_order(&self) -> u64 {
        self.r
            .iter()
            .fold(2 * self.n, |acc, r| lcm_u64(acc, r.minimal().order()))
    }

    fn cyc(&self, m: &ScaledPermMatrix<RootOfUnity>) -> CycMatrix {
        m.to_cyc_matrix(self.ring_order())
    }

    fn unit(&self, z: RootOfUnity) -> CycInt {
        CycInt::unit(z.minimal()).rescale(self.ring_order()).expect("ring order divisible")
    }
}

/// Random exact triple drawn from the 12n-th roots of unity.
pub fn random_unit_triple<R: Rng>(n: u64, rng: &mut R) -> [RootOfUnity; 3] {
    let order = 12 * n;
    std::array::from_fn(|_| RootOfUnity::new(order, rng.gen_range(0..order as i64)))
}

/// Images of K₁, K₂, K₃ and P as dense cyclotomic matrices.
#[derive(Clone, Debug)]
pub struct SkeinImages {
    pub k: [CycMatrix; 3],
    pub p: CycMatrix,
}

pub fn embed_skein_generators(rep: &CFRep<RootOfUnity>) -> Result<SkeinImages> {
    let sum = |ms: &[ScaledPermMatrix<RootOfUnity>]| {
        ms.iter()
            .map(|m| rep.cyc(m))
            .reduce(|a, b| a.add(&b))
            .expect("nonempty")
    };
    let k = [
        sum(&rep.k_terms(0)?),
        sum(&rep.k_terms(1)?),
        sum(&rep.k_terms(2)?),
    ];
    let p = sum(&rep.p_terms()?);
    Ok(SkeinImages { k, p })
}

/// Exact outcome of the structural identities for one representation.
#[derive(Clone, Debug, Serialize)]
pub struct StructureCheck {
    pub skein_relations: bool,
    pub p_formula: bool,
    pub p_central: bool,
    pub p_scalar: bool,
}

impl StructureCheck {
    pub fn ok(&self) -> bool {
        self.skein_relations && self.p_formula && self.p_central && self.p_scalar
    }
}

/// q^{−1/2}K_iK_{i+1} − q^{1/2}K_{i+1}K_i − (q^{−1}−q)K_{i+2} for i = 0, 1, 2.
pub fn skein_residuals(rep: &CFRep<RootOfUnity>, im: &SkeinImages) -> [CycMatrix; 3] {
    let qh = rep.qh;
    let q = qh.pow(2);
    std::array::from_fn(|i| {
        let (a, b, c) = (&im.k[i], &im.k[(i + 1) % 3], &im.k[(i + 2) % 3]);
        let coeff = &rep.unit(q.inv()) - &rep.unit(q);
        a.mul(b)
            .scale_unit(&qh.inv())
            .sub(&b.mul(a).scale_unit(&qh))
            .sub(&c.scale(&coeff))
    })
}

/// r₁²r₂²r₃²q + r₁⁻²r₂⁻²r₃⁻²q⁻¹.
pub fn expected_p_scalar(rep: &CFRep<RootOfUnity>) -> CycInt {
    let r = rep.r[0].mul(&rep.r[1]).mul(&rep.r[2]).pow(2);
    let q = rep.qh.pow(2);
    &rep.unit(r.mul(&q)) + &rep.unit(r.mul(&q).inv())
}

pub fn structure_check(rep: &CFRep<RootOfUnity>) -> Result<StructureCheck> {
    let im = embed_skein_generators(rep)?;
    let skein_relations = skein_residuals(rep, &im).iter().all(CycMatrix::is_zero);
    let n = rep.n as usize;
    let order = rep.ring_order();
    let (qh, q) = (rep.qh, rep.qh.pow(2));
    let [k1, k2, k3] = &im.k;
    let formula = k1
        .mul(k2)
        .mul(k3)
        .scale_unit(&qh.inv())
        .sub(&k1.mul(k1).scale_unit(&q.inv()))
        .sub(&k2.mul(k2).scale_unit(&q))
        .sub(&k3.mul(k3).scale_unit(&q.inv()))
        .add(&CycMatrix::scalar(n, &(&rep.unit(q) + &rep.unit(q.inv()))));
    let p_formula = formula.equals(&im.p);
    let p_central = im.k.iter().all(|k| im.p.mul(k).equals(&k.mul(&im.p)));
    let p_scalar = im
        .p
        .as_scalar()
        .is_some_and(|c| c == expected_p_scalar(rep) && c.order() == order);
    Ok(StructureCheck {
        skein_relations,
        p_formula,
        p_central,
        p_scalar,
    })
}

/// T_k(M) with T₀ = 2, T₁ = x, reducing after every step.
pub fn chebyshev_matrix(k: u64, m: &CycMatrix) -> CycMatrix {
    let n = m.dim();
    let two = CycMatrix::scalar(n, &CycInt::from_int(m.order(), 2));
    if k == 0 {
        return two;
    }
    let (mut prev, mut cur) = (two, m.reduce());
    for _ in 1..k {
        let next = m.mul(&cur).sub(&prev).reduce();
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// T_k(x) for a scalar cyclotomic integer.
pub fn chebyshev_scalar(k: u64, x: &CycInt) -> CycInt {
    let two = CycInt::from_int(x.order(), 2);
    if k == 0 {
        return two;
    }
    let (mut prev, mut cur) = (two, x.clone());
    for _ in 1..k {
        let next = (&(x * &cur) - &prev).reduce();
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Classical-shadow data read off a representation.
#[derive(Clone, Debug)]
pub struct ShadowCheck {
    /// t_i with T_n(K_i) = t_i·Id.
    pub t: [CycInt; 3],
    pub p: CycInt,
    /// r_j^n r_k^n + r_j^{−n} r_k^{−n} + r_j^n r_k^{−n} = −t_i for each i.
    pub shadow_equations: bool,
    /// T_n(p) = −t₁t₂t₃ − t₁² − t₂² − t₃² + 2.
    pub trace_relation: bool,
}

impl ShadowCheck {
    pub fn ok(&self) -> bool {
        self.shadow_equations && self.trace_relation
    }
}

pub fn shadow_equations_check(rep: &CFRep<RootOfUnity>) -> Result<ShadowCheck> {
    let im = embed_skein_generators(rep)?;
    let n = rep.n;
    let mut t: Vec<CycInt> = Vec::with_capacity(3);
    for (i, k) in im.k.iter().enumerate() {
        let s = chebyshev_matrix(n, k)
            .as_scalar()
            .ok_or_else(|| Error::ShadowFailure(format!("T_n(K{}) is not scalar", i + 1)))?;
        t.push(s.reduce());
    }
    let t: [CycInt; 3] = t.try_into().expect("three values");
    let p = im
        .p
        .as_scalar()
        .ok_or_else(|| Error::ShadowFailure("P is not scalar".into()))?
        .reduce();
    let ni = n as i64;
    let shadow_equations = (0..3).all(|i| {
        let (rj, rk) = (&rep.r[(i + 1) % 3], &rep.r[(i + 2) % 3]);
        let (a, b) = (rj.pow(ni), rk.pow(ni));
        let lhs = &(&rep.unit(a.mul(&b)) + &rep.unit(a.mul(&b).inv())) + &rep.unit(a.mul(&b.inv()));
        lhs == -&t[i]
    });
    let prod = &(&t[0] * &t[1]) * &t[2];
    let squares = &(&(&t[0] * &t[0]) + &(&t[1] * &t[1])) + &(&t[2] * &t[2]);
    let rhs = &(&(-&prod) - &squares) + &CycInt::from_int(prod.order(), 2);
    let trace_relation = chebyshev_scalar(n, &p) == rhs;
    Ok(ShadowCheck {
        t,
        p,
        shadow_equations,
        trace_relation,
    })
}

/// With x = [X₂X₃], y = [X₂X₃⁻¹]: xy = q⁻²yx and
/// T_n(x + x⁻¹ + y) = xⁿ + x⁻ⁿ + yⁿ.
pub fn chebyshev_trace_relation_check(rep: &CFRep<RootOfUnity>) -> Result<bool> {
    let x = rep.weyl(&[(1, 1), (2, 1)])?;
    let y = rep.weyl(&[(1, 1), (2, -1)])?;
    let xi = x.inverse_monomial()?;
    let q = rep.qh.pow(2);
    let commute = x.mul(&y)?.same(&y.mul(&x)?.scale(&q.pow(-2)));
    let n = rep.n as i64;
    let lhs = chebyshev_matrix(rep.n, &rep.cyc(&x).add(&rep.cyc(&xi)).add(&rep.cyc(&y)));
    let rhs = rep
        .cyc(&x.pow_monomial(n)?)
        .add(&rep.cyc(&x.pow_monomial(-n)?))
        .add(&rep.cyc(&y.pow_monomial(n)?));
    Ok(commute && lhs.equals(&rhs))
}

/// Representation of the square-root algebra: Y₁w_i = y₁q^{4i}w_i,
/// Y₂w_i = y₂q^{−2i}w_{i+1}, Y₃w_i = y₃q^{−2i}w_{i−1}.
#[derive(Clone, Debug)]
pub struct SqCFRep<S> {
    pub n: u64,
    pub y: [S; 3],
    pub mats: [ScaledPermMatrix<S>; 3],
}

pub fn build_sq_rep<S: Unit>(n: u64, y1: S, y2: S, y3: S) -> Result<SqCFRep<S>> {
    crate::ensure_odd(n as i64)?;
    let q = |e: i64| S::root_of_unity(n, e);
    let nn = n as usize;
    let m1 = ScaledPermMatrix::diagonal((0..nn).map(|i| y1.mul(&q(4 * i as i64))).collect());
    let m2 = ScaledPermMatrix::from_entries(
        nn,
        (0..nn).map(|i| ((i + 1) % nn, i, y2.mul(&q(-2 * i as i64)))).collect(),
    );
    let m3 = ScaledPermMatrix::from_entries(
        nn,
        (0..nn)
            .map(|i| ((i + nn - 1) % nn, i, y3.mul(&q(-2 * i as i64))))
            .collect(),
    );
    let mats = [m1, m2, m3];
    let q4 = q(4);
    for i in 0..3 {
        let (a, b) = (&mats[i], &mats[(i + 1) % 3]);
        if !a.mul(b)?.same(&b.mul(a)?.scale(&q4)) {
            return Err(Error::RelationFailed(format!("Y{}Y{} ≠ q⁴Y{}Y{}", i + 1, (i + 1) % 3 + 1, (i + 1) % 3 + 1, i + 1)));
        }
    }
    Ok(SqCFRep { n, y: [y1, y2, y3], mats })
}

/// The dense intertwiner Λ_{i,k} = q^{k²+i²+4ik+i−k} for the relabeling
/// Y₁ → Y₃, Y₂ → Y₁, Y₃ → Y₂.
#[derive(Clone, Debug)]
pub struct PuncturedIntertwiner {
    pub n: u64,
    pub rep: SqCFRep<RootOfUnity>,
    /// Exponents of q; entry (i, k) is q^{exponents[i][k]}.
    pub exponents: Vec<Vec<u64>>,
}

impl PuncturedIntertwiner {
    pub fn entry(&self, i: usize, k: usize) -> RootOfUnity {
        RootOfUnity::new(self.n, self.exponents[i][k] as i64)
    }

    pub fn to_dense_complex(&self) -> DMatrix<Complex64> {
        let n = self.n as usize;
        DMatrix::from_fn(n, n, |i, k| self.entry(i, k).to_complex())
    }

    /// Unnormalized trace Σ_i q^{6i²}.
    pub fn trace_exact(&self) -> CycInt {
        let mut z = CycInt::zero(self.n);
        let one = BigInt::from(1);
        for i in 0..self.n as usize {
            z.add_unit(self.exponents[i][i] as i64, &one);
        }
        z
    }

    /// ρ′(Y_i)·Λ = Λ·ρ(Y_i) for i = 1, 2, 3, checked entrywise.
    pub fn verify_conjugation(&self) -> bool {
        let m = &self.rep.mats;
        [(2, 0), (0, 1), (1, 2)]
            .iter()
            .all(|&(l, r)| self.left_mul(&m[l]) == self.right_mul(&m[r]))
    }

    fn left_mul(&self, m: &ScaledPermMatrix<RootOfUnity>) -> Vec<Vec<RootOfUnity>> {
        let n = self.n as usize;
        (0..n)
            .map(|i| {
                let (j, s) = &m.rows()[i][0];
                (0..n).map(|k| s.mul(&self.entry(*j, k))).collect()
            })
            .collect()
    }

    fn right_mul(&self, m: &ScaledPermMatrix<RootOfUnity>) -> Vec<Vec<RootOfUnity>> {
        let n = self.n as usize;
        let mut out = vec![vec![RootOfUnity::one(1); n]; n];
        for (j, row) in m.rows().iter().enumerate() {
            let (k, s) = &row[0];
            for (i, out_row) in out.iter_mut().enumerate() {
                out_row[*k] = self.entry(i, j).mul(s);
            }
        }
        out
    }

    /// Whether |det Λ| = n^{n/2} within relative 1e−6.
    pub fn det_check(&self) -> Result<(f64, bool)> {
        if self.n > DET_DIM_CAP {
            return Err(Error::TooLarge(format!("n = {} exceeds {}", self.n, DET_DIM_CAP)));
        }
        let nf = self.n as f64;
        let l = log_abs_det(&self.to_dense_complex());
        Ok((l, (l - nf / 2.0 * nf.ln()).exp_m1().abs() <= 1e-6))
    }
}

pub fn build_periodic_intertwiner(n: u64) -> Result<PuncturedIntertwiner> {
    crate::ensure_odd(n as i64)?;
    if n < 3 {
        return Err(Error::TooSmall(n as i64));
    }
    let one = RootOfUnity::one(1);
    let rep = build_sq_rep(n, one, one, one)?;
    let ni = n as i64;
    let exponents = (0..ni)
        .map(|i| {
            (0..ni)
                .map(|k| (k * k + i * i + 4 * i * k + i - k).rem_euclid(ni) as u64)
                .collect()
        })
        .collect();
    Ok(PuncturedIntertwiner { n, rep, exponents })
}

/// One row of the punctured-torus trace sweep.
#[derive(Clone, Debug)]
pub struct PuncturedRow {
    pub n: u64,
    pub abs_trace: f64,
    /// |Trace(n^{−1/2}Λ)|², equal to gcd(6, n).
    pub abs_trace_sq_exact: BigInt,
    pub log_trace_over_n: f64,
    /// |Trace|² from the matrix diagonal, on the matrix path only.
    pub matrix_abs_trace_sq: Option<BigInt>,
    pub conjugation_ok: Option<bool>,
    pub consistent: bool,
}

/// Normalized |Trace|² from the Gauss sum Σ (−q^{1/2})^{12t²} = Σ q^{6t²}.
pub fn punctured_trace_sq(n: u64) -> Result<BigInt> {
    crate::ensure_odd(n as i64)?;
    let v = gauss_sum(12, n)
        .abs_sq()
        .as_integer()
        .ok_or_else(|| Error::RelationFailed("|S|² is not an integer".into()))?;
    let (q, r) = v.div_rem(&BigInt::from(n));
    if r != BigInt::from(0) {
        return Err(Error::RelationFailed("|S|² not divisible by n".into()));
    }
    Ok(q)
}

/// Rows for each n; the matrix path runs for n ≤ `matrix_cap`.
pub fn periodic_trace_sweep(n_list: &[u64], matrix_cap: u64) -> Result<Vec<PuncturedRow>> {
    let mut rows: Vec<PuncturedRow> = n_list
        .par_iter()
        .map(|&n| {
            if n < 3 {
                return Err(Error::TooSmall(n as i64));
            }
            let sq = punctured_trace_sq(n)?;
            let (matrix_sq, conj) = if n <= matrix_cap {
                let lam = build_periodic_intertwiner(n)?;
                let t = lam.trace_exact().abs_sq().as_integer();
                let t = t.map(|v| v / BigInt::from(n));
                (t, Some(lam.verify_conjugation()))
            } else {
                (None, None)
            };
            let abs = sq.to_f64().unwrap_or(f64::NAN).sqrt();
            let consistent = sq == BigInt::from(6u64.gcd(&n)) && matrix_sq.as_ref().is_none_or(|m| *m == sq);
            Ok(PuncturedRow {
                n,
                abs_trace: abs,
                log_trace_over_n: abs.ln() / n as f64,
                abs_trace_sq_exact: sq,
                matrix_abs_trace_sq: matrix_sq,
                conjugation_ok: conj,
                consistent,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

/// Float search for M ≠ 0 with M·X_i = X′_i·M for all i, via the null space
/// of the stacked linear system. Returns M when it is invertible.
pub fn find_cf_isomorphism<S: Unit>(a: &CFRep<S>, b: &CFRep<S>) -> Option<DMatrix<Complex64>> {
    let n = a.n as usize;
    if b.n as usize != n {
        return None;
    }
    let nn = n * n;
    let mut sys = DMatrix::<Complex64>::zeros(3 * nn, nn);
    // (M A − B M)_{ij} = Σ_k M_{ik}A_{kj} − Σ_k B_{ik}M_{kj}; unknown M_{ik} at i·n + k
    for g in 0..3 {
        let (ma, mb) = (a.x[g].to_dense_complex(), b.x[g].to_dense_complex());
        for i in 0..n {
            for j in 0..n {
                let row = g * nn + i * n + j;
                for k in 0..n {
                    sys[(row, i * n + k)] += ma[(k, j)];
                    sys[(row, k * n + j)] -= mb[(i, k)];
                }
            }
        }
    }
    let svd = sys.svd(false, true);
    let v_t = svd.v_t?;
    let (idx, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))?;
    if *smin > 1e-9 {
        return None;
    }
    let m = DMatrix::from_fn(n, n, |i, k| v_t[(idx, i * n + k)].conj());
    let det = m.determinant().norm();
    (det > 1e-8).then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> RootOfUnity {
        RootOfUnity::one(1)
    }

    fn trivial(n: u64) -> CFRep<RootOfUnity> {
        build_cf_rep(n, one(), one(), one()).unwrap()
    }

    #[test]
    fn cf_rep_examples() {
        let r = [RootOfUnity::new(7, 2), RootOfUnity::new(5, 1), RootOfUnity::new(3, 1)];
        let rep = build_cf_rep(1, r[0], r[1], r[2]).unwrap();
        for (m, v) in rep.x.iter().zip(&r) {
            assert_eq!(m.get(0, 0), Some(v));
        }
        let rep = trivial(3);
        let q = |e| RootOfUnity::new(3, e);
        for i in 0..3 {
            assert_eq!(rep.x[0].get(i, i), Some(&q(i as i64)));
            assert_eq!(rep.x[1].get((i + 1) % 3, i), Some(&q(-(i as i64))));
            assert_eq!(rep.x[2].get((i + 2) % 3, i), Some(&one()));
        }
        assert_eq!(rep.two_sigma[0][1], 1);
        assert_eq!(rep.two_sigma[1][0], -1);
        let rep = trivial(5);
        let lhs = rep.x[1].mul(&rep.x[2]).unwrap();
        let rhs = rep.x[2].mul(&rep.x[1]).unwrap().scale(&RootOfUnity::new(5, 1));
        assert!(lhs.same(&rhs));
        assert_eq!(build_cf_rep(4, one(), one(), one()).unwrap_err(), Error::EvenLevel(4));
    }

    #[test]
    fn triple_product_is_scalar() {
        for n in [1u64, 3, 5, 9] {
            let r = [RootOfUnity::new(36, 5), RootOfUnity::new(12, 7), RootOfUnity::new(4, 3)];
            let rep = build_cf_rep(n, r[0], r[1], r[2]).unwrap();
            let w = rep.weyl(&[(0, 1), (1, 1), (2, 1)]).unwrap();
            let c = r[0].mul(&r[1]).mul(&r[2]).mul(&RootOfUnity::new(2 * n, 1));
            assert!(w.same(&ScaledPermMatrix::identity(n as usize).scale(&c)), "n={n}");
        }
    }

    #[test]
    fn commutation_relations_up_to_51() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in (1..=51).step_by(2) {
            let r = random_unit_triple(n, &mut rng);
            let rep = build_cf_rep(n, r[0], r[1], r[2]).unwrap();
            let q = RootOfUnity::new(n, 1);
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let lhs = rep.x[i].mul(&rep.x[j]).unwrap();
                let rhs = rep.x[j].mul(&rep.x[i]).unwrap().scale(&q);
                assert!(lhs.same(&rhs));
            }
            let sq = build_sq_rep(n, r[0], r[1], r[2]).unwrap();
            assert_eq!(sq.mats.len(), 3);
        }
    }

    #[test]
    fn structure_trivial_and_random() {
        let s = structure_check(&trivial(5)).unwrap();
        assert!(s.ok(), "{s:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3u64, 5] {
            for _ in 0..3 {
                let r = random_unit_triple(n, &mut rng);
                let rep = build_cf_rep(n, r[0], r[1], r[2]).unwrap();
                let im = embed_skein_generators(&rep).unwrap();
                assert!(skein_residuals(&rep, &im).iter().all(CycMatrix::is_zero));
                assert!(structure_check(&rep).unwrap().ok());
            }
        }
    }

    #[test]
    fn misprinted_p_is_not_central() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_unit_triple(5, &mut rng);
        let rep = build_cf_rep(5, r[0], r[1], r[2]).unwrap();
        let order = rep.ring_order();
        let bad = rep
            .weyl(&[(0, 2), (1, 2), (0, 2)])
            .unwrap()
            .to_cyc_matrix(order)
            .add(&rep.weyl(&[(0, -2), (1, -2), (0, -2)]).unwrap().to_cyc_matrix(order));
        let im = embed_skein_generators(&rep).unwrap();
        assert!(!im.k.iter().all(|k| bad.mul(k).equals(&k.mul(&bad))));
    }

    #[test]
    fn shadow_trivial_three() {
        let rep = trivial(3);
        let s = shadow_equations_check(&rep).unwrap();
        for t in &s.t {
            assert_eq!(t.as_integer(), Some(BigInt::from(-3)));
        }
        let q = RootOfUnity::new(3, 1);
        let pq = &CycInt::unit(q).rescale(6).unwrap() + &CycInt::unit(q.inv()).rescale(6).unwrap();
        assert_eq!(s.p, pq);
        assert_eq!(chebyshev_scalar(3, &s.p).as_integer(), Some(BigInt::from(2)));
        assert!(s.ok());
    }

    #[test]
    fn shadow_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let r = random_unit_triple(5, &mut rng);
            let rep = build_cf_rep(5, r[0], r[1], r[2]).unwrap();
            assert!(shadow_equations_check(&rep).unwrap().ok());
        }
    }

    #[test]
    fn chebyshev_trace_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [3u64, 5, 7] {
            let r = random_unit_triple(n, &mut rng);
            assert!(chebyshev_trace_relation_check(&build_cf_rep(n, r[0], r[1], r[2]).unwrap()).unwrap());
        }
    }

    #[test]
    fn sq_rep_examples() {
        let rep = build_sq_rep(1, one(), one(), one()).unwrap();
        assert!(rep.mats.iter().all(|m| m.get(0, 0) == Some(&one())));
        let rep = build_sq_rep(3, one(), one(), one()).unwrap();
        for i in 0..3 {
            assert_eq!(rep.mats[0].get(i, i), Some(&RootOfUnity::new(3, 4 * i as i64)));
        }
        let rep = build_sq_rep(5, one(), one(), one()).unwrap();
        let lhs = rep.mats[2].mul(&rep.mats[0]).unwrap();
        let rhs = rep.mats[0].mul(&rep.mats[2]).unwrap().scale(&RootOfUnity::new(5, 4));
        assert!(lhs.same(&rhs));
    }

    #[test]
    fn periodic_intertwiner_examples() {
        for (n, g) in [(3u64, 3), (5, 1), (9, 3)] {
            let lam = build_periodic_intertwiner(n).unwrap();
            assert!(lam.verify_conjugation());
            let sq = lam.trace_exact().abs_sq().as_integer().unwrap();
            assert_eq!(sq, BigInt::from(g * n));
            assert!(lam.det_check().unwrap().1);
        }
        let lam = build_periodic_intertwiner(3).unwrap();
        assert_eq!(lam.trace_exact().as_integer(), Some(BigInt::from(3)));
        assert_eq!(build_periodic_intertwiner(6).unwrap_err(), Error::EvenLevel(6));
    }

    #[test]
    fn broken_entry_fails_conjugation() {
        let mut lam = build_periodic_intertwiner(7).unwrap();
        lam.exponents[2][3] = (lam.exponents[2][3] + 1) % 7;
        assert!(!lam.verify_conjugation());
    }

    #[test]
    fn sweep_values() {
        let ns: Vec<u64> = (3..=99).step_by(2).collect();
        let rows = periodic_trace_sweep(&ns, 99).unwrap();
        assert!(rows.iter().all(|r| r.consistent && r.conjugation_ok == Some(true)));
        for r in &rows {
            let expect = if r.n % 3 == 0 { 3f64.sqrt() } else { 1.0 };
            assert!((r.abs_trace - expect).abs() < 1e-12);
            assert_eq!(gauss_sum(12, r.n), build_periodic_intertwiner(r.n).unwrap().trace_exact().rescale(2 * r.n).unwrap());
        }
        let best = rows.iter().max_by(|a, b| a.log_trace_over_n.total_cmp(&b.log_trace_over_n)).unwrap();
        assert_eq!(best.n, 3);
        let past_three = rows.iter().filter(|r| r.n > 3).max_by(|a, b| a.log_trace_over_n.total_cmp(&b.log_trace_over_n)).unwrap();
        assert_eq!(past_three.n, 9);
        assert!((past_three.log_trace_over_n - 3f64.sqrt().ln() / 9.0).abs() < 1e-12);
        assert_eq!(periodic_trace_sweep(&[1], 99).unwrap_err(), Error::TooSmall(1));
    }

    #[test]
    fn isomorphism_oracle_n3() {
        // equal invariants: r_i³ and r₁r₂r₃ agree
        let z = |e| RootOfUnity::new(36, e);
        let a = build_cf_rep(3, z(1), z(2), z(5)).unwrap();
        let b = build_cf_rep(3, z(13), z(14), z(-19)).unwrap();
        assert!(find_cf_isomorphism(&a, &b).is_some());
        let c = build_cf_rep(3, z(2), z(2), z(5)).unwrap();
        assert!(find_cf_isomorphism(&a, &c).is_none());
    }
}

//! Sparse unit-entry matrices, dense cyclotomic matrices and float helpers.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

use crate::cyclotomic::{CycInt, RootOfUnity};
use crate::error::{Error, Result};

/// Tolerance for float-mode scalar comparisons.
pub const FLOAT_TOL: f64 = 1e-9;

/// Nonzero scalars that appear as matrix entries: exact roots of unity or
/// complex doubles.
pub trait Unit: Clone + std::fmt::Debug + Send + Sync {
    fn root_of_unity(order: u64, exp: i64) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn pow(&self, k: i64) -> Self;
    fn same(&self, other: &Self) -> bool;
    fn to_complex(&self) -> Complex64;
    /// Exponent e with self = ζ_n^e, if there is one.
    fn log_in(&self, n: u64) -> Option<i64>;

    fn inv(&self) -> Self {
        self.pow(-1)
    }

    fn is_one(&self) -> bool {
        self.same(&Self::root_of_unity(1, 0))
    }
}

impl Unit for RootOfUnity {
    fn root_of_unity(order: u64, exp: i64) -> Self {
        RootOfUnity::new(order, exp)
    }
    fn mul(&self, other: &Self) -> Self {
        RootOfUnity::mul(self, other)
    }
    fn pow(&self, k: i64) -> Self {
        RootOfUnity::pow(self, k)
    }
    fn same(&self, other: &Self) -> bool {
        self == other
    }
    fn to_complex(&self) -> Complex64 {
        RootOfUnity::to_complex(self)
    }
    fn log_in(&self, n: u64) -> Option<i64> {
        let m = self.minimal();
        if !n.is_multiple_of(m.order()) {
            return None;
        }
        Some((m.exponent() * (n / m.order())) as i64)
    }
}

impl Unit for Complex64 {
    fn root_of_unity(order: u64, exp: i64) -> Self {
        RootOfUnity::new(order, exp).to_complex()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn pow(&self, k: i64) -> Self {
        self.powi(k as i32)
    }
    fn same(&self, other: &Self) -> bool {
        (self - other).norm() <= FLOAT_TOL * (1.0 + self.norm().max(other.norm()))
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn log_in(&self, n: u64) -> Option<i64> {
        if (self.norm() - 1.0).abs() > FLOAT_TOL {
            return None;
        }
        let e = (self.arg() * n as f64 / std::f64::consts::TAU).round() as i64;
        let e = e.rem_euclid(n as i64);
        self.same(&Self::root_of_unity(n, e)).then_some(e)
    }
}

/// n×n matrix whose nonzero entries are units; rows hold (column, value)
/// pairs sorted by column.
#[derive(Clone, Debug)]
pub struct ScaledPermMatrix<S> {
    n: usize,
    rows: Vec<Vec<(usize, S)>>,
}

impl<S: Unit> ScaledPermMatrix<S> {
    pub fn from_rows(n: usize, mut rows: Vec<Vec<(usize, S)>>) -> Self {
        assert_eq!(rows.len(), n);
        for r in rows.iter_mut() {
            r.sort_by_key(|(c, _)| *c);
        }
        ScaledPermMatrix { n, rows }
    }

    /// Builds from a list of (row, column, value) entries.
    pub fn from_entries(n: usize, entries: Vec<(usize, usize, S)>) -> Self {
        let mut rows = vec![Vec::new(); n];
        for (i, j, v) in entries {
            rows[i].push((j, v));
        }
        Self::from_rows(n, rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal((0..n).map(|_| S::root_of_unity(1, 0)).collect())
    }

    pub fn diagonal(d: Vec<S>) -> Self {
        let n = d.len();
        Self::from_entries(n, d.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<(usize, S)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&S> {
        self.rows[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .ok()
            .map(|k| &self.rows[i][k].1)
    }

    pub fn nnz_per_row(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn nnz_per_col(&self) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for r in &self.rows {
            for (j, _) in r {
                c[*j] += 1;
            }
        }
        c
    }

    /// True when every row and column holds exactly one entry.
    pub fn is_monomial(&self) -> bool {
        self.nnz_per_row().iter().all(|&k| k == 1) && self.nnz_per_col().iter().all(|&k| k == 1)
    }

    pub fn scale(&self, s: &S) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|(j, v)| (*j, s.mul(v))).collect())
            .collect();
        ScaledPermMatrix { n: self.n, rows }
    }

    /// Product in which no two contributions may land on the same entry.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.n, other.n);
        let mut rows = Vec::with_capacity(self.n);
        for r in &self.rows {
            let mut out: Vec<(usize, S)> = Vec::new();
            for (k, a) in r {
                for (j, b) in &other.rows[*k] {
                    out.push((*j, a.mul(b)));
                }
            }
            out.sort_by_key(|(c, _)| *c);
            if out.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidInput(
                    "product of unit matrices is not a unit matrix".into(),
                ));
            }
            rows.push(out);
        }
        Ok(ScaledPermMatrix { n: self.n, rows })
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                entries.push((*j, i, v.clone()));
            }
        }
        Self::from_entries(self.n, entries)
    }

    /// Inverse of a monomial matrix.
    pub fn inverse_monomial(&self) -> Result<Self> {
        if !self.is_monomial() {
            return Err(Error::InvalidInput("matrix is not monomial".into()));
        }
        let mut entries = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            let (j, v) = &r[0];
            entries.push((*j, i, v.inv()));
        }
        Ok(Self::from_entries(self.n, entries))
    }

    /// Integer power of a monomial matrix.
    pub fn pow_monomial(&self, k: i64) -> Result<Self> {
        let base = if k < 0 {
            self.inverse_monomial()?
        } else {
            if !self.is_monomial() {
                return Err(Error::InvalidInput("matrix is not monomial".into()));
            }
            self.clone()
        };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(self.n);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// Entrywise equality with matching support.
    pub fn same(&self, other: &Self) -> bool {
        self.n == other.n
            && self.rows.iter().zip(other.rows.iter()).all(|(a, b)| {
                a.len() == b.len()
                    && a.iter()
                        .zip(b.iter())
                        .all(|((i, x), (j, y))| i == j && x.same(y))
            })
    }

    pub fn trace_complex(&self) -> Complex64 {
        (0..self.n)
            .filter_map(|i| self.get(i, i))
            .map(|v| v.to_complex())
            .sum()
    }

    pub fn to_dense_complex(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.n, self.n, Complex64::new(0.0, 0.0));
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                m[(i, *j)] = v.to_complex();
            }
        }
        m
    }
}

impl ScaledPermMatrix<RootOfUnity> {
    /// Exact trace in ℤ[ζ_N].
    pub fn trace_exact(&self, order: u64) -> CycInt {
        let mut t = CycInt::zero(order);
        for i in 0..self.n {
            if let Some(v) = self.get(i, i) {
                let e = v.rescale(order).expect("entry order divides ring order");
                t.add_unit(e.exponent() as i64, &BigInt::from(1));
            }
        }
        t
    }

    pub fn to_cyc_matrix(&self, order: u64) -> CycMatrix {
        let mut m = CycMatrix::zero(self.n, order);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                let e = v.rescale(order).expect("entry order divides ring order");
                m.entries[i * self.n + j].add_unit(e.exponent() as i64, &BigInt::from(1));
            }
        }
        m
    }

    /// Table of exponents in ℤ/N (None for zero entries).
    pub fn exponent_table(&self, order: u64) -> Vec<Vec<Option<u64>>> {
        let mut t = vec![vec![None; self.n]; self.n];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                t[i][*j] = Some(v.rescale(order).expect("entry order").exponent());
            }
        }
        t
    }
}

/// Dense n×n matrix over ℤ[ζ_N], entries kept in the group ring.
#[derive(Clone, Debug)]
pub struct CycMatrix {
    n: usize,
    order: u64,
    entries: Vec<CycInt>,
}

impl CycMatrix {
    pub fn zero(n: usize, order: u64) -> Self {
        CycMatrix {
            n,
            order,
            entries: vec![CycInt::zero(order); n * n],
        }
    }

    pub fn scalar(n: usize, s: &CycInt) -> Self {
        let mut m = Self::zero(n, s.order());
        for i in 0..n {
            m.entries[i * n + i] = s.clone();
        }
        m
    }

    pub fn identity(n: usize, order: u64) -> Self {
        Self::scalar(n, &CycInt::from_int(order, 1))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &CycInt {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycInt) {
        assert_eq!(v.order(), self.order);
        self.entries[i * self.n + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        CycMatrix {
            n: self.n,
            order: self.order,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a - b)
            .collect();
        CycMatrix {
            n: self.n,
            order: self.order,
            entries,
        }
    }

    pub fn scale(&self, s: &CycInt) -> Self {
        let entries: Vec<CycInt> = self.entries.iter().map(|a| a * s).collect();
        let order = entries.first().map_or(self.order, |e| e.order());
        CycMatrix {
            n: self.n,
            order,
            entries,
        }
    }

    pub fn scale_unit(&self, z: &RootOfUnity) -> Self {
        let entries: Vec<CycInt> = self.entries.iter().map(|a| a.mul_unit(z)).collect();
        CycMatrix {
            n: self.n,
            order: self.order,
            entries,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n, self.order);
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.terms_hint_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.entries[k * n + j];
                    if b.terms_hint_zero() {
                        continue;
                    }
                    let p = a * b;
                    let slot = &mut out.entries[i * n + j];
                    *slot = &*slot + &p;
                }
            }
        }
        out
    }

    /// Canonical reduction of every entry.
    pub fn reduce(&self) -> Self {
        CycMatrix {
            n: self.n,
            order: self.order,
            entries: self.entries.iter().map(CycInt::reduce).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(CycInt::is_zero)
    }

    /// Value c when the matrix equals c·Id.
    pub fn as_scalar(&self) -> Option<CycInt> {
        let n = self.n;
        let c = self.entries[0].clone();
        for i in 0..n {
            for j in 0..n {
                let e = &self.entries[i * n + j];
                let ok = if i == j { *e == c } else { e.is_zero() };
                if !ok {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Product with a column vector.
    pub fn apply(&self, v: &[CycInt]) -> Vec<CycInt> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = CycInt::zero(self.order);
                for (j, x) in v.iter().enumerate() {
                    let e = &self.entries[i * n + j];
                    if !e.terms_hint_zero() && !x.terms_hint_zero() {
                        acc = &acc + &(e * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn to_dense_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entries[i * self.n + j].eval_complex())
    }
}

impl CycInt {
    /// Cheap check for an all-zero group-ring vector (no reduction).
    pub fn terms_hint_zero(&self) -> bool {
        (0..self.order()).all(|e| self.coeff(e).is_zero())
    }
}

/// log|det M| from an LU factorization with partial pivoting.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> f64 {
    let lu = m.clone().lu();
    lu.u().diagonal().iter().map(|d| d.norm().ln()).sum()
}

/// Powers of a unit matrix computed in the group ring ℤ[x]/(x^N − 1) with
/// machine integers.
///
/// `table[i][j]` is the exponent of entry (i, j) or None for zero. Returns
/// the entries of M^k row-major as coefficient vectors of length N.
pub fn group_ring_power(table: &[Vec<Option<u64>>], order: u64, k: u32) -> Result<Vec<Vec<i64>>> {
    let n = table.len();
    let big_n = order as usize;
    if k == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    let bound = (n as f64).powi(k as i32 - 1);
    if bound >= 2f64.powi(62) {
        return Err(Error::TooLarge(format!("{n}^{} overflows the power buffer", k - 1)));
    }
    let mut cur: Vec<Vec<i64>> = vec![vec![0; big_n]; n * n];
    for i in 0..n {
        for j in 0..n {
            if let Some(e) = table[i][j] {
                cur[i * n + j][e as usize] = 1;
            }
        }
    }
    for _ in 1..k {
        let mut next: Vec<Vec<i64>> = vec![vec![0; big_n]; n * n];
        for i in 0..n {
            for t in 0..n {
                let src = &cur[i * n + t];
                if src.iter().all(|&c| c == 0) {
                    continue;
                }
                for (j, e) in table[t].iter().enumerate() {
                    let Some(e) = e else { continue };
                    let e = *e as usize;
                    let dst = &mut next[i * n + j];
                    let (head, tail) = dst.split_at_mut(e);
                    let split = big_n - e;
                    for (d, s) in tail.iter_mut().zip(&src[..split]) {
                        *d += s;
                    }
                    for (d, s) in head.iter_mut().zip(&src[split..]) {
                        *d += s;
                    }
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}

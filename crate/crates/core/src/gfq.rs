//! Linear algebra over `GF(p^e)` and exhaustive enumeration of subspaces,
//! subspace profiles and invariant flags.
//!
//! Field elements are encoded as integers in `[0, q)` whose base-`p` digits
//! (least significant first) are the coefficients of the element in the
//! polynomial basis. For prime `q` the encoding is the residue itself.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eisenstein::EisensteinInt;
use crate::identities::{binomial_exponent, CompositionTriple};
use crate::qlaurent::{choose2, EvalValue, LaurentPoly, Var};
use crate::verification::{Comparison, VerificationResult};

/// Largest field order accepted by [`FieldCtx::new`].
pub const FIELD_CEILING: u32 = 81;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GfError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field order {q} exceeds the ceiling {ceiling}")]
    TooLarge { q: u32, ceiling: u32 },
    #[error("element {value} is out of range for GF({q})")]
    ElementOutOfRange { value: u32, q: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subspace is not invariant under the matrix")]
    NotInvariant,
    #[error("invalid dimension sequence {seq:?} for ambient dimension {n}")]
    InvalidSequence { seq: Vec<usize>, n: usize },
    #[error("parts {parts:?} sum past the ambient dimension {n}")]
    PartsTooLarge { parts: Vec<usize>, n: usize },
    #[error("GF({q}) has too few elements for {needed} distinct nonzero eigenvalues")]
    FieldTooSmall { q: u32, needed: usize },
    #[error("malformed matrix file: {0}")]
    Parse(String),
}

/// An element of a finite field, in the digit encoding described above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arithmetic tables for `GF(p^e)`.
pub struct FieldCtx {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Remainder of `a` modulo monic `b` over `F_p`; coefficients little-endian.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().expect("nonempty");
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &c) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn digits(mut x: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(x % p);
        x /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Monic polynomial of degree `deg` whose lower coefficients are the digits of `tail`.
fn monic(tail: u32, p: u32, deg: usize) -> Vec<u32> {
    let mut c = digits(tail, p, deg);
    c.push(1);
    c
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for tail in 0..p.pow(d as u32) {
            if poly_rem(f, &monic(tail, p, d), p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// `GF(q)` with the smallest monic irreducible modulus, where polynomials
    /// are ordered by the integer whose base-`p` digits are their lower
    /// coefficients.
    pub fn new(q: u32) -> Result<Arc<FieldCtx>, GfError> {
        Self::with_ceiling(q, FIELD_CEILING)
    }

    pub fn with_ceiling(q: u32, ceiling: u32) -> Result<Arc<FieldCtx>, GfError> {
        let (p, e) = prime_power(q).ok_or(GfError::NotPrimePower(q))?;
        if q > ceiling {
            return Err(GfError::TooLarge { q, ceiling });
        }
        let deg = e as usize;
        let modulus = (0..q)
            .map(|tail| monic(tail, p, deg))
            .find(|f| is_irreducible(f, p))
            .expect("an irreducible polynomial of every degree exists");

        let n = q as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for x in 0..q {
            let dx = digits(x, p, deg);
            for y in 0..q {
                let dy = digits(y, p, deg);
                let sum: Vec<u32> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % p).collect();
                add[(x * q + y) as usize] = undigits(&sum, p);
                let mut prod = vec![0u32; 2 * deg - 1];
                for (i, a) in dx.iter().enumerate() {
                    for (j, b) in dy.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + a * b) % p;
                    }
                }
                let mut reduced = poly_rem(&prod, &modulus, p);
                reduced.resize(deg, 0);
                mul[(x * q + y) as usize] = undigits(&reduced, p);
            }
        }
        let neg = (0..q)
            .map(|x| (0..q).find(|&y| add[(x * q + y) as usize] == 0).expect("additive inverse"))
            .collect();
        let inv = (0..q)
            .map(|x| if x == 0 { 0 } else { (1..q).find(|&y| mul[(x * q + y) as usize] == 1).expect("field") })
            .collect();
        Ok(Arc::new(FieldCtx {
            p,
            e,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
        }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Coefficients of the modulus, constant term first, ending with the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elem(&self, index: u32) -> Result<FieldElem, GfError> {
        if index < self.q {
            Ok(FieldElem(index))
        } else {
            Err(GfError::ElementOutOfRange { value: index, q: self.q })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    /// Polynomial-basis coefficients of `x`.
    pub fn coeffs(&self, x: FieldElem) -> Vec<u32> {
        digits(x.0, self.p, self.e as usize)
    }

    #[inline]
    pub fn add(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        FieldElem(self.add[(x.0 * self.q + y.0) as usize])
    }

    #[inline]
    pub fn mul(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        FieldElem(self.mul[(x.0 * self.q + y.0) as usize])
    }

    #[inline]
    pub fn neg(&self, x: FieldElem) -> FieldElem {
        FieldElem(self.neg[x.0 as usize])
    }

    #[inline]
    pub fn sub(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        self.add(x, self.neg(y))
    }

    pub fn inv(&self, x: FieldElem) -> Option<FieldElem> {
        (!x.is_zero()).then(|| FieldElem(self.inv[x.0 as usize]))
    }

    /// `acc += c · v`.
    fn axpy(&self, acc: &mut [FieldElem], c: FieldElem, v: &[FieldElem]) {
        if c.is_zero() {
            return;
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = self.add(*a, self.mul(c, x));
        }
    }

    fn scale_in_place(&self, v: &mut [FieldElem], c: FieldElem) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }
}

/// A dense matrix over a finite field.
#[derive(Clone)]
pub struct Matrix {
    ctx: Arc<FieldCtx>,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data && *self.ctx == *other.ctx
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix(GF({}), {}x{}, {:?})", self.ctx.q, self.rows, self.cols, self.index_rows())
    }
}

impl Matrix {
    pub fn zero(ctx: &Arc<FieldCtx>, rows: usize, cols: usize) -> Self {
        Self {
            ctx: ctx.clone(),
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn identity(ctx: &Arc<FieldCtx>, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    /// Builds a matrix from rows of encoded element indices.
    pub fn from_rows(ctx: &Arc<FieldCtx>, rows: &[Vec<u32>]) -> Result<Self, GfError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(GfError::DimensionMismatch("ragged rows".into()));
            }
            for &x in r {
                data.push(ctx.elem(x)?);
            }
        }
        Ok(Self {
            ctx: ctx.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diagonal(ctx: &Arc<FieldCtx>, entries: &[u32]) -> Result<Self, GfError> {
        let n = entries.len();
        let mut m = Self::zero(ctx, n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, ctx.elem(x)?);
        }
        Ok(m)
    }

    /// Diagonal matrix with the distinct eigenvalues encoded `1, 2, ..., n`.
    pub fn distinct_diagonal(ctx: &Arc<FieldCtx>, n: usize) -> Result<Self, GfError> {
        if (ctx.q as usize) <= n {
            return Err(GfError::FieldTooSmall { q: ctx.q, needed: n });
        }
        let entries: Vec<u32> = (1..=n as u32).collect();
        Self::diagonal(ctx, &entries)
    }

    /// The `index`-th `n × n` matrix, reading base-`q` digits row-major with
    /// the last entry most significant.
    pub fn from_index(ctx: &Arc<FieldCtx>, n: usize, mut index: u64) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for slot in m.data.iter_mut() {
            *slot = FieldElem((index % ctx.q as u64) as u32);
            index /= ctx.q as u64;
        }
        m
    }

    pub fn random(ctx: &Arc<FieldCtx>, n: usize, rng: &mut impl Rng) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for slot in m.data.iter_mut() {
            *slot = FieldElem(rng.random_range(0..ctx.q));
        }
        m
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: FieldElem) {
        self.data[r * self.cols + c] = x;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn index_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).iter().map(|x| x.0).collect()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `M · v` for a column vector `v`.
    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(FieldElem::ZERO, |acc, (&a, &x)| self.ctx.add(acc, self.ctx.mul(a, x)))
            })
            .collect()
    }

    /// Parses the text format: a header line `q n`, then `n` rows of `n`
    /// encoded elements.
    pub fn parse(text: &str) -> Result<Self, GfError> {
        Self::parse_with_ceiling(text, FIELD_CEILING)
    }

    pub fn parse_with_ceiling(text: &str, ceiling: u32) -> Result<Self, GfError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| GfError::Parse("empty input".into()))?;
        let nums = |line: &str| -> Result<Vec<u32>, GfError> {
            line.split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| GfError::Parse(format!("bad integer `{t}`"))))
                .collect()
        };
        let head = nums(header)?;
        let [q, n] = head[..] else {
            return Err(GfError::Parse("header must be `q n`".into()));
        };
        let ctx = FieldCtx::with_ceiling(q, ceiling)?;
        let n = n as usize;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| GfError::Parse(format!("expected {n} rows, found {i}")))?;
            let row = nums(line)?;
            if row.len() != n {
                return Err(GfError::Parse(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= q) {
                return Err(GfError::Parse(format!("entry {bad} is not in [0, {q})")));
            }
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(GfError::Parse("trailing data after matrix rows".into()));
        }
        if n == 0 {
            return Ok(Self::zero(&ctx, 0, 0));
        }
        Self::from_rows(&ctx, &rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.ctx.q, self.rows);
        for r in self.index_rows() {
            let cells: Vec<String> = r.iter().map(u32::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Reduced row echelon form and rank. Zero rows are moved to the bottom.
pub fn rref(m: &Matrix) -> (Matrix, usize) {
    let ctx = m.ctx.clone();
    let mut rows: Vec<Vec<FieldElem>> = (0..m.rows).map(|r| m.row(r).to_vec()).collect();
    let mut rank = 0;
    for col in 0..m.cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = ctx.inv(rows[rank][col]).expect("nonzero pivot");
        ctx.scale_in_place(&mut rows[rank], inv);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let c = ctx.neg(row[col]);
                ctx.axpy(row, c, &pivot_row);
            }
        }
        rank += 1;
    }
    let data = rows.into_iter().flatten().collect();
    (
        Matrix {
            ctx,
            rows: m.rows,
            cols: m.cols,
            data,
        },
        rank,
    )
}

/// A basis kept in reduced row echelon form under incremental insertion.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    ctx: Arc<FieldCtx>,
    dim: usize,
    rows: Vec<Vec<FieldElem>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(ctx: &Arc<FieldCtx>, dim: usize) -> Self {
        Self {
            ctx: ctx.clone(),
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `v` minus its projection onto the span along the pivot coordinates.
    pub fn reduce(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let c = self.ctx.neg(r[p]);
                self.ctx.axpy(&mut r, c, row);
            }
        }
        r
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: &[FieldElem]) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = self.ctx.inv(r[p]).expect("nonzero");
        self.ctx.scale_in_place(&mut r, inv);
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let c = self.ctx.neg(row[p]);
                self.ctx.axpy(row, c, &r);
            }
        }
        let at = self.pivots.partition_point(|&x| x < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, r);
        true
    }

    pub fn into_subspace(self) -> Subspace {
        let mut basis = Matrix::zero(&self.ctx, self.rows.len(), self.dim);
        basis.data = self.rows.into_iter().flatten().collect();
        Subspace {
            basis,
            pivots: self.pivots,
        }
    }
}

/// A subspace of `GF(q)^n`, stored as its canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    basis: Matrix,
    pivots: Vec<usize>,
}

impl std::hash::Hash for Subspace {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.basis.cols.hash(state);
        self.basis.data.hash(state);
    }
}

impl Subspace {
    pub fn zero(ctx: &Arc<FieldCtx>, n: usize) -> Self {
        EchelonBasis::new(ctx, n).into_subspace()
    }

    pub fn full(ctx: &Arc<FieldCtx>, n: usize) -> Self {
        Self::span(ctx, n, (0..n).map(|i| unit(n, i)))
    }

    /// Span of arbitrary vectors.
    pub fn span<I, V>(ctx: &Arc<FieldCtx>, n: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[FieldElem]>,
    {
        let mut b = EchelonBasis::new(ctx, n);
        for v in vectors {
            b.insert(v.as_ref());
        }
        b.into_subspace()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_vectors(&self) -> impl Iterator<Item = &[FieldElem]> {
        (0..self.basis.rows).map(move |r| self.basis.row(r))
    }

    fn echelon(&self) -> EchelonBasis {
        EchelonBasis {
            ctx: self.basis.ctx.clone(),
            dim: self.basis.cols,
            rows: self.basis_vectors().map(<[FieldElem]>::to_vec).collect(),
            pivots: self.pivots.clone(),
        }
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        self.echelon().contains(v)
    }

    /// Whether `T(W) ⊆ W`.
    pub fn is_invariant(&self, t: &Matrix) -> bool {
        let e = self.echelon();
        self.basis_vectors().all(|w| e.contains(&t.apply(w)))
    }
}

fn unit(n: usize, i: usize) -> Vec<FieldElem> {
    let mut v = vec![FieldElem::ZERO; n];
    v[i] = FieldElem::ONE;
    v
}

/// All `d`-subsets of `0..n` in lexicographic order.
pub fn pivot_sets(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < d - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d <= n {
        rec(0, n, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// Streams the subspaces whose RREF basis has the given pivot columns, by
/// running an odometer over the free entries.
pub struct PivotCell {
    ctx: Arc<FieldCtx>,
    n: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    digits: Vec<u32>,
    done: bool,
}

impl PivotCell {
    pub fn new(ctx: &Arc<FieldCtx>, n: usize, pivots: Vec<usize>) -> Self {
        let mut free = Vec::new();
        for (r, &p) in pivots.iter().enumerate() {
            for c in p + 1..n {
                if !pivots.contains(&c) {
                    free.push((r, c));
                }
            }
        }
        let digits = vec![0; free.len()];
        Self {
            ctx: ctx.clone(),
            n,
            pivots,
            free,
            digits,
            done: false,
        }
    }

    /// Number of subspaces in this cell, `q^{#free entries}`.
    pub fn size(&self) -> u64 {
        (self.ctx.q as u64).pow(self.free.len() as u32)
    }
}

impl Iterator for PivotCell {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        let mut basis = Matrix::zero(&self.ctx, self.pivots.len(), self.n);
        for (r, &p) in self.pivots.iter().enumerate() {
            basis.set(r, p, FieldElem::ONE);
        }
        for (&(r, c), &x) in self.free.iter().zip(&self.digits) {
            basis.set(r, c, FieldElem(x));
        }
        self.done = true;
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.ctx.q {
                self.done = false;
                break;
            }
            *d = 0;
        }
        Some(Subspace {
            basis,
            pivots: self.pivots.clone(),
        })
    }
}

/// Every `d`-dimensional subspace of `GF(q)^n`, each exactly once, grouped by
/// pivot set.
pub fn enumerate_subspaces(ctx: &Arc<FieldCtx>, n: usize, d: usize) -> impl Iterator<Item = Subspace> {
    let ctx = ctx.clone();
    pivot_sets(n, d)
        .into_iter()
        .flat_map(move |pivots| PivotCell::new(&ctx, n, pivots))
}

/// Every subspace of `GF(q)^n`, by increasing dimension.
pub fn enumerate_all_subspaces(ctx: &Arc<FieldCtx>, n: usize) -> impl Iterator<Item = Subspace> {
    let ctx = ctx.clone();
    (0..=n).flat_map(move |d| enumerate_subspaces(&ctx, n, d))
}

/// A weakly decreasing sequence of positive dimension jumps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DimensionSequence(pub Vec<usize>);

impl DimensionSequence {
    pub fn new(parts: Vec<usize>) -> Self {
        Self(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Checks `n ≥ j1 ≥ j2 ≥ ... > 0` and `Σ j_i ≤ n`.
    pub fn validate(&self, n: usize) -> Result<(), GfError> {
        let ok = self.0.iter().all(|&j| j > 0)
            && self.0.windows(2).all(|w| w[0] >= w[1])
            && self.0.iter().sum::<usize>() <= n;
        if ok {
            Ok(())
        } else {
            Err(GfError::InvalidSequence {
                seq: self.0.clone(),
                n,
            })
        }
    }
}

impl fmt::Display for DimensionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_square(t: &Matrix, n: usize) -> Result<(), GfError> {
    if !t.is_square() || t.rows != n {
        return Err(GfError::DimensionMismatch(format!(
            "matrix is {}x{}, ambient dimension is {n}",
            t.rows, t.cols
        )));
    }
    Ok(())
}

/// Jumps `dim W^(i) - dim W^(i-1)` of the chain `W^(1) = W`,
/// `W^(i+1) = W^(i) + T(W^(i))`, until it stabilizes.
pub fn dimension_sequence(t: &Matrix, w: &Subspace) -> Result<DimensionSequence, GfError> {
    check_square(t, w.ambient_dim())?;
    let mut span = w.echelon();
    let mut frontier: Vec<Vec<FieldElem>> = w.basis_vectors().map(<[FieldElem]>::to_vec).collect();
    let mut jumps = Vec::new();
    while !frontier.is_empty() {
        jumps.push(frontier.len());
        let mut next = Vec::new();
        for v in &frontier {
            let tv = t.apply(v);
            if span.insert(&tv) {
                next.push(tv);
            }
        }
        frontier = next;
    }
    Ok(DimensionSequence(jumps))
}

/// Number of subspaces whose dimension sequence under `T` equals `lam`.
/// The empty sequence matches only the zero subspace.
pub fn sigma_count(t: &Matrix, lam: &DimensionSequence) -> Result<u64, GfError> {
    let n = t.rows;
    check_square(t, n)?;
    lam.validate(n)?;
    let Some(&d) = lam.parts().first() else {
        return Ok(1);
    };
    let counts: Result<Vec<u64>, GfError> = pivot_sets(n, d)
        .into_par_iter()
        .map(|pivots| {
            let mut count = 0;
            for w in PivotCell::new(&t.ctx, n, pivots) {
                if dimension_sequence(t, &w)? == *lam {
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect();
    Ok(counts?.into_iter().sum())
}

/// Matrix of the map induced by `T` on `GF(q)^n / W`, in the basis of unit
/// vectors at the non-pivot coordinates of `W`.
pub fn quotient_action(t: &Matrix, w: &Subspace) -> Result<Matrix, GfError> {
    let n = w.ambient_dim();
    check_square(t, n)?;
    if !w.is_invariant(t) {
        return Err(GfError::NotInvariant);
    }
    let free: Vec<usize> = (0..n).filter(|c| !w.pivots.contains(c)).collect();
    let e = w.echelon();
    let mut out = Matrix::zero(&t.ctx, free.len(), free.len());
    for (j, &c) in free.iter().enumerate() {
        let image = e.reduce(&t.apply(&unit(n, c)));
        for (i, &r) in free.iter().enumerate() {
            out.set(i, j, image[r]);
        }
    }
    Ok(out)
}

/// Number of chains `W_1 ⊂ ... ⊂ W_k` of `T`-invariant subspaces with
/// `dim W_i / W_{i-1} = parts[i]` (and `W_0 = 0`).
pub fn flag_count(t: &Matrix, parts: &[usize]) -> Result<u64, GfError> {
    let n = t.rows;
    check_square(t, n)?;
    if parts.iter().sum::<usize>() > n {
        return Err(GfError::PartsTooLarge {
            parts: parts.to_vec(),
            n,
        });
    }
    Ok(flag_count_rec(t, parts))
}

fn flag_count_rec(t: &Matrix, parts: &[usize]) -> u64 {
    let Some((&first, rest)) = parts.split_first() else {
        return 1;
    };
    let n = t.rows;
    let mut total = 0;
    for w in enumerate_subspaces(&t.ctx, n, first) {
        if !w.is_invariant(t) {
            continue;
        }
        if rest.is_empty() {
            total += 1;
        } else {
            let quotient = quotient_action(t, &w).expect("invariant by construction");
            total += flag_count_rec(&quotient, rest);
        }
    }
    total
}

fn side_value(poly: &LaurentPoly, q: u32) -> EvalValue {
    poly.eval_q(q as i64).expect("q is nonzero")
}

/// The `s` with `num = q^s · den`, searched over `|s| < 64`.
pub(crate) fn power_ratio(num: &BigRational, den: &BigRational, q: u32) -> Option<i64> {
    if den.is_zero() || num.is_zero() {
        return None;
    }
    let ratio = num / den;
    let qr = BigRational::from_integer(BigInt::from(q));
    let mut up = BigRational::one();
    for t in 0..64 {
        if up == ratio {
            return Some(t);
        }
        if up.recip() == ratio {
            return Some(-t);
        }
        up = &up * &qr;
    }
    None
}

fn matrix_note(t: &Matrix) -> String {
    t.index_rows()
        .iter()
        .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Profile `(m, m)` against the invariant-subspace count formula
/// `q^{C(m,2)} Σ_j (-1)^j q^{C(m-j+1,2)} Y_(j)`.
pub fn verify_eq_mm(t: &Matrix, m: usize) -> Result<VerificationResult, GfError> {
    check_square(t, 2 * m)?;
    let q = t.ctx.q;
    let lam = DimensionSequence(if m == 0 { vec![] } else { vec![m, m] });
    let sigma = sigma_count(t, &lam)?;
    let mi = m as i64;
    let mut rhs = LaurentPoly::zero();
    for j in 0..=2 * m {
        let y = flag_count(t, &[j])?;
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let c = EisensteinInt::from(sign * y as i64);
        rhs.add_assign_poly(&LaurentPoly::var_pow(Var::Q, choose2(mi) + choose2(mi - j as i64 + 1)).scale(&c));
    }
    let mut r = VerificationResult::new("eqmm", &[("q", q as i64), ("m", mi)])
        .with(Comparison::new("sigma_(m,m) = flag formula", EvalValue::from_int(sigma), side_value(&rhs, q)));
    r.note("matrix", matrix_note(t));
    Ok(r)
}

/// Right side of the triple-profile formula as a polynomial in `q` with the
/// flag counts of `T` as coefficients:
/// `q^{m²-m} Σ_{j1+j2+j3=3m} q^{(ΣC(j_i,2) - g)/3} Y_j ω^{j2+2j3}`.
pub fn triple_profile_rhs(t: &Matrix, m: usize) -> Result<LaurentPoly, GfError> {
    check_square(t, 3 * m)?;
    let mi = m as i64;
    let mut rhs = LaurentPoly::zero();
    for j in CompositionTriple::all(3 * mi) {
        let y = flag_count(t, &[j.j1 as usize, j.j2 as usize, j.j3 as usize])?;
        if y == 0 {
            continue;
        }
        let e = binomial_exponent(j).expect("composition exponents are integral");
        let c = EisensteinInt::from(y as i64) * EisensteinInt::omega_pow(j.omega_index());
        rhs.add_assign_poly(&LaurentPoly::var_pow(Var::Q, mi * mi - mi + e).scale(&c));
    }
    Ok(rhs)
}

/// Profile `(m, m, m)` against the conjectured flag formula. The
/// `sigma_over_rhs` note records the power of `q` relating the two sides
/// whenever one exists.
pub fn verify_conj5(t: &Matrix, m: usize) -> Result<VerificationResult, GfError> {
    check_square(t, 3 * m)?;
    let q = t.ctx.q;
    let lam = DimensionSequence(if m == 0 { vec![] } else { vec![m, m, m] });
    let sigma = EvalValue::from_int(sigma_count(t, &lam)?);
    let rhs = side_value(&triple_profile_rhs(t, m)?, q);
    let omega = EvalValue {
        one: rhs.omega.clone(),
        omega: BigRational::zero(),
    };
    let mut r = VerificationResult::new("conj5", &[("q", q as i64), ("m", m as i64)])
        .with(Comparison::new("omega component of rhs = 0", omega, EvalValue::zero()));
    r.note("matrix", matrix_note(t));
    let ratio = if sigma.one.is_zero() && rhs.one.is_zero() {
        "0/0".to_string()
    } else {
        match power_ratio(&sigma.one, &rhs.one, q) {
            Some(s) => format!("q^{s}"),
            None => "not a power of q".to_string(),
        }
    };
    r.note("sigma_over_rhs", ratio);
    r.push(Comparison::new("sigma_(m,m,m) = flag formula", sigma, rhs));
    Ok(r)
}

/// `count` matrices drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_matrices(ctx: &Arc<FieldCtx>, n: usize, count: usize, seed: u64) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Matrix::random(ctx, n, &mut rng)).collect()
}

/// Number of `n × n` matrices over `GF(q)`, if it fits in a `u64`.
pub fn matrix_space_size(q: u32, n: usize) -> Option<u64> {
    (q as u64).checked_pow((n * n) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlaurent::qbinom;
    use std::collections::{BTreeMap, HashSet};

    fn f(q: u32) -> Arc<FieldCtx> {
        FieldCtx::new(q).unwrap()
    }

    fn mat(ctx: &Arc<FieldCtx>, rows: &[&[u32]]) -> Matrix {
        Matrix::from_rows(ctx, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn gaussian_at(n: usize, d: usize, q: u32) -> u64 {
        let v = qbinom(n as i64, d as i64, Var::Q).eval_q(q as i64).unwrap();
        v.one.to_integer().try_into().unwrap()
    }

    #[test]
    fn field_construction() {
        let f5 = f(5);
        assert_eq!((f5.p(), f5.degree()), (5, 1));
        assert_eq!(f5.modulus(), &[0, 1]);
        assert_eq!(f(4).modulus(), &[1, 1, 1]);
        assert_eq!(f(8).modulus(), &[1, 1, 0, 1]);
        assert_eq!(f(9).modulus(), &[1, 0, 1]);
        assert_eq!(FieldCtx::new(6).unwrap_err(), GfError::NotPrimePower(6));
        assert_eq!(FieldCtx::new(1).unwrap_err(), GfError::NotPrimePower(1));
        assert_eq!(FieldCtx::new(121).unwrap_err(), GfError::TooLarge { q: 121, ceiling: 81 });
        assert!(FieldCtx::new(81).is_ok());
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16] {
            let k = f(q);
            let els: Vec<_> = k.elements().collect();
            for &x in &els {
                assert_eq!(k.add(x, k.neg(x)), FieldElem::ZERO);
                assert_eq!(k.mul(x, FieldElem::ONE), x);
                if let Some(i) = k.inv(x) {
                    assert_eq!(k.mul(x, i), FieldElem::ONE);
                }
                for &y in &els {
                    assert_eq!(k.mul(x, y), k.mul(y, x));
                    for &z in &els {
                        assert_eq!(k.mul(x, k.add(y, z)), k.add(k.mul(x, y), k.mul(x, z)));
                        assert_eq!(k.mul(k.mul(x, y), z), k.mul(x, k.mul(y, z)));
                    }
                }
            }
            // the multiplicative group is cyclic of order q-1
            let has_generator = els.iter().skip(1).any(|&g| {
                let mut seen = HashSet::new();
                let mut x = FieldElem::ONE;
                for _ in 0..q - 1 {
                    seen.insert(x);
                    x = k.mul(x, g);
                }
                seen.len() == (q - 1) as usize
            });
            assert!(has_generator, "q={q}");
            assert_eq!(k.coeffs(FieldElem(q - 1)).len(), k.degree() as usize);
        }
    }

    #[test]
    fn rref_examples() {
        let k = f(2);
        let id = Matrix::identity(&k, 3);
        assert_eq!(rref(&id), (id.clone(), 3));
        let z = Matrix::zero(&k, 3, 3);
        assert_eq!(rref(&z), (z.clone(), 0));
        let m = mat(&k, &[&[1, 1], &[1, 1]]);
        assert_eq!(rref(&m), (mat(&k, &[&[1, 1], &[0, 0]]), 1));
        let k5 = f(5);
        let m = mat(&k5, &[&[0, 2, 4], &[3, 1, 0]]);
        let (r, rank) = rref(&m);
        assert_eq!(rank, 2);
        assert_eq!(r, mat(&k5, &[&[1, 0, 1], &[0, 1, 2]]));
    }

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        for q in [2, 3, 4] {
            let k = f(q);
            for n in 0..=5 {
                for d in 0..=n {
                    // 4^{9}-sized cells at n = 6 are covered by the integration tests
                    let count = enumerate_subspaces(&k, n, d).count() as u64;
                    assert_eq!(count, gaussian_at(n, d, q), "q={q} n={n} d={d}");
                }
            }
        }
        assert_eq!(enumerate_subspaces(&f(2), 3, 1).count(), 7);
        assert_eq!(enumerate_subspaces(&f(2), 6, 3).count(), 1395);
        let zero: Vec<_> = enumerate_subspaces(&f(3), 4, 0).collect();
        assert_eq!(zero, vec![Subspace::zero(&f(3), 4)]);
    }

    #[test]
    fn enumerated_subspaces_are_canonical_and_distinct() {
        let k = f(3);
        let all: Vec<_> = enumerate_subspaces(&k, 4, 2).collect();
        let distinct: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), all.len());
        for w in &all {
            let (r, rank) = rref(w.basis());
            assert_eq!(rank, 2);
            assert_eq!(&r, w.basis());
            // re-spanning through a different generating set gives the same form
            let mixed: Vec<Vec<FieldElem>> = vec![
                w.basis_vectors().fold(vec![FieldElem::ZERO; 4], |mut acc, v| {
                    k.axpy(&mut acc, FieldElem(2), v);
                    acc
                }),
                w.basis().row(0).to_vec(),
            ];
            assert_eq!(&Subspace::span(&k, 4, mixed), w);
        }
    }

    #[test]
    fn dimension_sequence_examples() {
        let k = f(3);
        let zero = Matrix::zero(&k, 3, 3);
        let w = Subspace::span(&k, 3, [vec![FieldElem(1), FieldElem(2), FieldElem(0)]]);
        assert_eq!(dimension_sequence(&zero, &w).unwrap(), DimensionSequence(vec![1]));
        // e1 -> e2 -> e3 -> 0, acting on column vectors
        let shift = mat(&k, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]);
        let e1 = Subspace::span(&k, 3, [unit(3, 0)]);
        assert_eq!(dimension_sequence(&shift, &e1).unwrap(), DimensionSequence(vec![1, 1, 1]));
        let full = Subspace::full(&k, 3);
        assert_eq!(dimension_sequence(&shift, &full).unwrap(), DimensionSequence(vec![3]));
        assert!(dimension_sequence(&Matrix::zero(&k, 2, 2), &w).is_err());
    }

    #[test]
    fn dimension_sequences_partition_all_subspaces() {
        let k = f(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let t = Matrix::random(&k, 4, &mut rng);
            let mut by_seq: BTreeMap<DimensionSequence, u64> = BTreeMap::new();
            let mut total = 0;
            for w in enumerate_all_subspaces(&k, 4) {
                let s = dimension_sequence(&t, &w).unwrap();
                s.validate(4).unwrap();
                *by_seq.entry(s).or_default() += 1;
                total += 1;
            }
            assert_eq!(by_seq[&DimensionSequence::default()], 1);
            let summed: u64 = by_seq.keys().map(|s| sigma_count(&t, s).unwrap()).sum();
            assert_eq!(summed, total);
        }
    }

    #[test]
    fn sigma_examples() {
        let k5 = f(5);
        let t = Matrix::diagonal(&k5, &[1, 2]).unwrap();
        assert_eq!(sigma_count(&t, &DimensionSequence(vec![1, 1])).unwrap(), 4);
        let k7 = f(7);
        let t = Matrix::diagonal(&k7, &[1, 2, 3]).unwrap();
        assert_eq!(sigma_count(&t, &DimensionSequence(vec![1, 1, 1])).unwrap(), 36);
        for m in 1..=2 {
            let scalar = Matrix::diagonal(&f(3), &vec![2; 2 * m]).unwrap();
            assert_eq!(sigma_count(&scalar, &DimensionSequence(vec![m, m])).unwrap(), 0);
        }
        assert!(sigma_count(&t, &DimensionSequence(vec![1, 2])).is_err());
        assert!(sigma_count(&t, &DimensionSequence(vec![2, 2])).is_err());
        assert_eq!(sigma_count(&t, &DimensionSequence::default()).unwrap(), 1);
    }

    #[test]
    fn quotient_examples() {
        let k5 = f(5);
        let t = Matrix::diagonal(&k5, &[1, 2]).unwrap();
        assert_eq!(quotient_action(&t, &Subspace::zero(&k5, 2)).unwrap(), t);
        assert_eq!(quotient_action(&t, &Subspace::full(&k5, 2)).unwrap(), Matrix::zero(&k5, 0, 0));
        let e1 = Subspace::span(&k5, 2, [unit(2, 0)]);
        assert_eq!(quotient_action(&t, &e1).unwrap(), mat(&k5, &[&[2]]));
        let diag_line = Subspace::span(&k5, 2, [vec![FieldElem(1), FieldElem(1)]]);
        assert_eq!(quotient_action(&t, &diag_line), Err(GfError::NotInvariant));
    }

    #[test]
    fn flag_examples() {
        let k2 = f(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 0..=4 {
            let t = Matrix::random(&k2, n, &mut rng);
            assert_eq!(flag_count(&t, &[n]).unwrap(), 1);
        }
        for m in 1..=2 {
            let t = Matrix::zero(&f(3), 2 * m, 2 * m);
            for j in 0..=2 * m {
                assert_eq!(flag_count(&t, &[j]).unwrap(), gaussian_at(2 * m, j, 3));
            }
        }
        for _ in 0..10 {
            let t = Matrix::random(&k2, 3, &mut rng);
            assert_eq!(flag_count(&t, &[1, 2]).unwrap(), flag_count(&t, &[2, 1]).unwrap());
        }
        let t = Matrix::zero(&k2, 3, 3);
        assert!(flag_count(&t, &[2, 2]).is_err());
    }

    #[test]
    fn eq_mm_examples() {
        let r = verify_eq_mm(&Matrix::zero(&f(2), 2, 2), 1).unwrap();
        assert!(r.is_verified());
        assert_eq!(r.comparisons[0].lhs, EvalValue::from_int(0).into());
        let r = verify_eq_mm(&Matrix::diagonal(&f(5), &[1, 2]).unwrap(), 1).unwrap();
        assert!(r.is_verified());
        assert_eq!(r.comparisons[0].rhs, EvalValue::from_int(4).into());
        for t in seeded_matrices(&f(2), 4, 3, 99) {
            assert!(verify_eq_mm(&t, 2).unwrap().is_verified());
        }
        assert!(verify_eq_mm(&Matrix::zero(&f(2), 3, 3), 1).is_err());
    }

    #[test]
    fn conj5_scalar_matrix_holds() {
        let r = verify_conj5(&Matrix::zero(&f(2), 3, 3), 1).unwrap();
        assert!(r.is_verified());
        assert_eq!(r.notes["sigma_over_rhs"], "0/0");
    }

    #[test]
    fn conj5_distinct_eigenvalues_off_by_q() {
        // the literal prefactor q^{m²-m} leaves the right side at 36/7
        let r = verify_conj5(&Matrix::distinct_diagonal(&f(7), 3).unwrap(), 1).unwrap();
        assert_eq!(r.comparisons[1].lhs, EvalValue::from_int(36).into());
        let expected = EvalValue {
            one: BigRational::new(36.into(), 7.into()),
            omega: BigRational::zero(),
        };
        assert_eq!(r.comparisons[1].rhs, expected.into());
        assert!(r.comparisons[0].holds());
        assert!(!r.is_verified());
        assert_eq!(r.notes["sigma_over_rhs"], "q^1");
    }

    #[test]
    fn matrix_file_format() {
        let m = Matrix::parse("7 3\n1 0 0\n0 2 0\n0 0 3\n").unwrap();
        assert_eq!(m, Matrix::diagonal(&f(7), &[1, 2, 3]).unwrap());
        assert_eq!(Matrix::parse(&m.to_text()).unwrap(), m);
        let g4 = Matrix::parse("4 2\n 2 3\n1 0").unwrap();
        assert_eq!(g4.ctx().order(), 4);
        assert_eq!(g4.ctx().coeffs(g4.get(0, 1)), vec![1, 1]);
        for bad in ["", "6 2\n1 0\n0 1", "5 2\n1 0\n0", "5 2\n1 0\n0 5", "5 2\n1 0", "5 2\n1 0\n0 1\n1 1", "5\n"] {
            assert!(Matrix::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn indexed_matrices_cover_the_space() {
        let k = f(2);
        let all: HashSet<Vec<Vec<u32>>> = (0..matrix_space_size(2, 2).unwrap())
            .map(|i| Matrix::from_index(&k, 2, i).index_rows())
            .collect();
        assert_eq!(all.len(), 16);
        assert_eq!(matrix_space_size(3, 3), Some(19683));
    }

    #[test]
    fn seeded_matrices_are_reproducible() {
        let k = f(3);
        assert_eq!(seeded_matrices(&k, 3, 4, 5), seeded_matrices(&k, 3, 4, 5));
        assert_ne!(seeded_matrices(&k, 3, 4, 5), seeded_matrices(&k, 3, 4, 6));
    }

    #[test]
    fn distinct_diagonal_needs_room() {
        assert_eq!(
            Matrix::distinct_diagonal(&f(3), 3).unwrap_err(),
            GfError::FieldTooSmall { q: 3, needed: 3 }
        );
    }

    #[test]
    fn echelon_insert_keeps_rref() {
        let k = f(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m = Matrix::random(&k, 4, &mut rng);
            let mut e = EchelonBasis::new(&k, 4);
            for r in 0..4 {
                e.insert(m.row(r));
            }
            let (r, rank) = rref(&m);
            let s = e.into_subspace();
            assert_eq!(s.dim(), rank);
            for i in 0..rank {
                assert_eq!(s.basis().row(i), r.row(i));
            }
        }
    }
}

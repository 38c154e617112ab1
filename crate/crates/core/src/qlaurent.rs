//! Sparse Laurent polynomials in the ordered variables `(q, p, z)` with
//! Eisenstein-integer coefficients, and the q-factorial builders on top.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::eisenstein::EisensteinInt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("q-shifted factorial length must be non-negative, got {0}")]
    NegativeLength(i64),
    #[error("cannot evaluate {var}^{exp} at {var} = 0")]
    ZeroBase { var: Var, exp: i64 },
}

/// One of the three fixed indeterminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Q,
    P,
    Z,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::Q => "q",
            Var::P => "p",
            Var::Z => "z",
        })
    }
}

/// Exponents of `q`, `p` and `z`. Ordering is lexicographic on `(eq, ep, ez)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ExponentVector {
    pub eq: i64,
    pub ep: i64,
    pub ez: i64,
}

impl ExponentVector {
    pub const ZERO: Self = Self { eq: 0, ep: 0, ez: 0 };

    pub fn new(eq: i64, ep: i64, ez: i64) -> Self {
        Self { eq, ep, ez }
    }

    pub fn of(var: Var, exp: i64) -> Self {
        match var {
            Var::Q => Self::new(exp, 0, 0),
            Var::P => Self::new(0, exp, 0),
            Var::Z => Self::new(0, 0, exp),
        }
    }

    pub fn get(&self, var: Var) -> i64 {
        match var {
            Var::Q => self.eq,
            Var::P => self.ep,
            Var::Z => self.ez,
        }
    }
}

impl Add for ExponentVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.eq + o.eq, self.ep + o.ep, self.ez + o.ez)
    }
}

/// `x(x-1)/2`, valid for every integer `x`.
pub fn choose2(x: i64) -> i64 {
    x * (x - 1) / 2
}

/// Exact value `one + omega·ω` of an evaluated polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvalValue {
    pub one: BigRational,
    pub omega: BigRational,
}

impl EvalValue {
    pub fn zero() -> Self {
        Self {
            one: BigRational::zero(),
            omega: BigRational::zero(),
        }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Self {
            one: BigRational::from_integer(v.into()),
            omega: BigRational::zero(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.omega.is_zero()
    }
}

impl fmt::Display for EvalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.omega.is_zero() {
            write!(f, "{}", self.one)
        } else {
            write!(f, "{} + ({})ω", self.one, self.omega)
        }
    }
}

/// A Laurent polynomial in `q, p, z`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<ExponentVector, EisensteinInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(EisensteinInt::one(), ExponentVector::ZERO)
    }

    pub fn constant(c: EisensteinInt) -> Self {
        Self::monomial(c, ExponentVector::ZERO)
    }

    pub fn monomial(c: EisensteinInt, e: ExponentVector) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// `var^exp` with unit coefficient.
    pub fn var_pow(var: Var, exp: i64) -> Self {
        Self::monomial(EisensteinInt::one(), ExponentVector::of(var, exp))
    }

    pub fn q() -> Self {
        Self::var_pow(Var::Q, 1)
    }

    pub fn p() -> Self {
        Self::var_pow(Var::P, 1)
    }

    pub fn z() -> Self {
        Self::var_pow(Var::Z, 1)
    }

    /// Univariate polynomial `Σ coeffs[i]·var^(shift + i)`.
    pub fn from_coeffs(var: Var, shift: i64, coeffs: &[BigInt]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                (
                    ExponentVector::of(var, shift + i as i64),
                    EisensteinInt::from(c.clone()),
                )
            })
            .collect();
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending `(eq, ep, ez)` order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &EisensteinInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExponentVector) -> EisensteinInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    /// True when every coefficient lies in `Z`.
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(EisensteinInt::is_rational)
    }

    /// The polynomial formed by the ω-coordinates of all coefficients.
    pub fn omega_part(&self) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| !c.b.is_zero())
            .map(|(e, c)| (*e, EisensteinInt::from(c.b.clone())))
            .collect();
        Self { terms }
    }

    pub fn min_exponent(&self, var: Var) -> Option<i64> {
        self.terms.keys().map(|e| e.get(var)).min()
    }

    pub fn max_exponent(&self, var: Var) -> Option<i64> {
        self.terms.keys().map(|e| e.get(var)).max()
    }

    /// Adds `c·x^e` in place.
    pub fn add_term(&mut self, e: ExponentVector, c: &EisensteinInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add_assign_poly(&mut self, other: &LaurentPoly) {
        for (e, c) in &other.terms {
            self.add_term(*e, c);
        }
    }

    pub fn scale(&self, c: &EisensteinInt) -> LaurentPoly {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, x)| (*e, x * c))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        Self { terms }
    }

    /// Multiplies by the monomial `x^shift`.
    pub fn shift(&self, shift: ExponentVector) -> LaurentPoly {
        let terms = self.terms.iter().map(|(e, c)| (*e + shift, c.clone())).collect();
        Self { terms }
    }

    pub fn shift_var(&self, var: Var, exp: i64) -> LaurentPoly {
        self.shift(ExponentVector::of(var, exp))
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Replaces every `z^a` by `q^(a·q_exp)`.
    pub fn substitute_z(&self, q_exp: i64) -> LaurentPoly {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(ExponentVector::new(e.eq + e.ez * q_exp, e.ep, 0), c);
        }
        out
    }

    /// Replaces every `p^a` by `q^a`.
    pub fn identify_p_with_q(&self) -> LaurentPoly {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(ExponentVector::new(e.eq + e.ep, 0, e.ez), c);
        }
        out
    }

    /// Keeps the terms whose exponents satisfy `keep`.
    pub fn filter_terms(&self, keep: impl Fn(&ExponentVector) -> bool) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| keep(e))
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        Self { terms }
    }

    /// Coefficient of `z^k`, as a polynomial in `q` and `p`.
    pub fn z_coefficient(&self, k: i64) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.ez == k)
            .map(|(e, c)| (ExponentVector::new(e.eq, e.ep, 0), c.clone()))
            .collect();
        Self { terms }
    }

    /// Exact evaluation at rational points; the result is split into its
    /// `1` and `ω` coordinates.
    pub fn eval(&self, qv: &BigRational, pv: &BigRational, zv: &BigRational) -> Result<EvalValue, PolyError> {
        let mut out = EvalValue::zero();
        for (e, c) in &self.terms {
            let w = rational_pow(qv, e.eq, Var::Q)?
                * rational_pow(pv, e.ep, Var::P)?
                * rational_pow(zv, e.ez, Var::Z)?;
            out.one += &w * BigRational::from_integer(c.a.clone());
            out.omega += w * BigRational::from_integer(c.b.clone());
        }
        Ok(out)
    }

    /// Evaluates a polynomial in `q` alone at an integer point.
    pub fn eval_q(&self, qv: i64) -> Result<EvalValue, PolyError> {
        let one = BigRational::one();
        self.eval(&BigRational::from_integer(qv.into()), &one, &one)
    }

    /// Term list in the JSON interchange layout.
    pub fn to_json_terms(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(e, c)| TermRecord {
                eq: e.eq,
                ep: e.ep,
                ez: e.ez,
                a: c.a.to_string(),
                b: c.b.to_string(),
            })
            .collect()
    }
}

fn rational_pow(base: &BigRational, exp: i64, var: Var) -> Result<BigRational, PolyError> {
    if exp == 0 {
        return Ok(BigRational::one());
    }
    if base.is_zero() {
        return if exp > 0 {
            Ok(BigRational::zero())
        } else {
            Err(PolyError::ZeroBase { var, exp })
        };
    }
    let magnitude = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    Ok(if exp > 0 { magnitude } else { magnitude.recip() })
}

/// One entry of the sorted JSON term list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub eq: i64,
    pub ep: i64,
    pub ez: i64,
    pub a: String,
    pub b: String,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_terms().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let records = Vec::<TermRecord>::deserialize(d)?;
        let mut out = LaurentPoly::zero();
        for r in records {
            let a: BigInt = r.a.parse().map_err(D::Error::custom)?;
            let b: BigInt = r.b.parse().map_err(D::Error::custom)?;
            out.add_term(ExponentVector::new(r.eq, r.ep, r.ez), &EisensteinInt::new(a, b));
        }
        Ok(out)
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out.add_assign_poly(rhs);
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self.add_assign_poly(&rhs);
        self
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        let terms = self.terms.iter().map(|(e, c)| (*e, -c)).collect();
        LaurentPoly { terms }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut acc: BTreeMap<ExponentVector, EisensteinInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                *acc.entry(*e1 + *e2).or_default() += &(c1 * c2);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        LaurentPoly { terms: acc }
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = [(Var::Q, e.eq), (Var::P, e.ep), (Var::Z, e.ez)]
                .iter()
                .filter(|(_, x)| *x != 0)
                .map(|(v, x)| if *x == 1 { v.to_string() } else { format!("{v}^{x}") })
                .collect();
            let (negative, body) = if c.b.is_zero() {
                (c.a.is_negative(), c.a.abs().to_string())
            } else {
                (false, c.to_string())
            };
            if i > 0 {
                f.write_str(if negative { " - " } else { " + " })?;
            } else if negative {
                f.write_str("-")?;
            }
            if mono.is_empty() {
                f.write_str(&body)?;
            } else if body == "1" {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "{}*{}", body, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

/// q-shifted factorial `∏_{j<k} (1 - first·base^j)`.
pub fn poch(first: &LaurentPoly, base: Var, k: i64) -> Result<LaurentPoly, PolyError> {
    if k < 0 {
        return Err(PolyError::NegativeLength(k));
    }
    let one = LaurentPoly::one();
    let mut out = LaurentPoly::one();
    for j in 0..k {
        let factor = &one - &first.shift_var(base, j);
        out = &out * &factor;
    }
    Ok(out)
}

type CoeffRow = Vec<Arc<Vec<BigInt>>>;

fn qbinom_table() -> &'static Mutex<Vec<CoeffRow>> {
    static TABLE: OnceLock<Mutex<Vec<CoeffRow>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![vec![Arc::new(vec![BigInt::one()])]]))
}

/// Coefficients (ascending powers) of the Gaussian binomial `[n, r]`, for
/// `0 <= r <= n`. Rows are built by `[n, r] = [n-1, r-1] + base^r [n-1, r]`
/// and memoized process-wide.
pub fn qbinom_coeffs(n: usize, r: usize) -> Arc<Vec<BigInt>> {
    assert!(r <= n, "qbinom_coeffs requires r <= n");
    let mut table = qbinom_table().lock().unwrap_or_else(|e| e.into_inner());
    while table.len() <= n {
        let prev = table.last().expect("row 0 is seeded");
        let len = prev.len() + 1;
        let mut row: CoeffRow = Vec::with_capacity(len);
        for r in 0..len {
            let mut coeffs = vec![BigInt::zero(); r * (len - 1 - r) + 1];
            if r >= 1 {
                for (i, c) in prev[r - 1].iter().enumerate() {
                    coeffs[i] += c;
                }
            }
            if r < prev.len() {
                for (i, c) in prev[r].iter().enumerate() {
                    coeffs[i + r] += c;
                }
            }
            row.push(Arc::new(coeffs));
        }
        table.push(row);
    }
    table[n][r].clone()
}

/// Gaussian binomial `[n, r]` in the given base; zero when `r < 0` or `r > n`.
pub fn qbinom(n: i64, r: i64, base: Var) -> LaurentPoly {
    if r < 0 || n < 0 || r > n {
        return LaurentPoly::zero();
    }
    LaurentPoly::from_coeffs(base, 0, &qbinom_coeffs(n as usize, r as usize))
}

/// q-multinomial `[n; j1, j2, j3]` in base `q`, vanishing when a part is
/// negative or the parts overshoot `n`.
pub fn qmultinomial3(n: i64, j1: i64, j2: i64, j3: i64) -> LaurentPoly {
    if j1 < 0 || j2 < 0 || j3 < 0 || j1 + j2 + j3 > n {
        return LaurentPoly::zero();
    }
    // the leftover part n - j1 - j2 - j3 is implicit in the binomial chain
    &(&qbinom(n, j1, Var::Q) * &qbinom(n - j1, j2, Var::Q)) * &qbinom(n - j1 - j2, j3, Var::Q)
}

//! Both sides of the cube-root-of-unity q-series identities, built as exact
//! Laurent polynomials, together with the residue-class sums used to prove
//! them.
//!
//! Every sum runs over all integer indices and relies on the vanishing of
//! out-of-range Gaussian binomials to terminate.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics;
use crate::eisenstein::EisensteinInt;
use crate::qlaurent::{choose2, poch, qbinom, qmultinomial3, ExponentVector, LaurentPoly, PolyError, Var};
use crate::verification::{Comparison, VerificationResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentityError {
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("exponent numerator {numerator} is not divisible by 3 ({context})")]
    NonIntegralExponent { numerator: i64, context: String },
    #[error("index pair (k={k}, n={n}) violates n <= k <= 2n")]
    OutOfRange { k: i64, n: i64 },
    #[error("parameter {0} must be non-negative")]
    NegativeParameter(i64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A composition `(j1, j2, j3)` of a fixed total into three non-negative parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompositionTriple {
    pub j1: i64,
    pub j2: i64,
    pub j3: i64,
}

impl CompositionTriple {
    pub fn new(j1: i64, j2: i64, j3: i64) -> Self {
        Self { j1, j2, j3 }
    }

    pub fn total(&self) -> i64 {
        self.j1 + self.j2 + self.j3
    }

    /// Exponent of ω attached to this composition, `j2 + 2·j3`.
    pub fn omega_index(&self) -> i64 {
        self.j2 + 2 * self.j3
    }

    /// All compositions of `total`, ordered by `j1` then `j2`.
    pub fn all(total: i64) -> impl Iterator<Item = CompositionTriple> {
        (0..=total.max(-1)).flat_map(move |j1| (0..=total - j1).map(move |j2| CompositionTriple::new(j1, j2, total - j1 - j2)))
    }
}

/// Correction term of the q-exponent: `2j2 + j3` when `j2 + 2j3 ≡ 2 (mod 3)`,
/// `j2 + 2j3` otherwise.
pub fn exponent_correction(j: CompositionTriple) -> i64 {
    if j.omega_index().rem_euclid(3) == 2 {
        2 * j.j2 + j.j3
    } else {
        j.omega_index()
    }
}

/// The same correction in the `(k, n) = (j2 + 2j3, j2 + j3)` coordinates.
pub fn exponent_correction_kn(k: i64, n: i64) -> Result<i64, IdentityError> {
    if !(n <= k && k <= 2 * n) {
        return Err(IdentityError::OutOfRange { k, n });
    }
    Ok(if k.rem_euclid(3) == 2 { 3 * n - k } else { k })
}

fn exact_third(numerator: i64, context: impl FnOnce() -> String) -> Result<i64, IdentityError> {
    if numerator.rem_euclid(3) != 0 {
        return Err(IdentityError::NonIntegralExponent {
            numerator,
            context: context(),
        });
    }
    Ok(numerator / 3)
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn signed(p: LaurentPoly, n: i64) -> LaurentPoly {
    if sign(n) == 1 {
        p
    } else {
        -p
    }
}

fn mono(c: EisensteinInt, eq: i64, ep: i64, ez: i64) -> LaurentPoly {
    LaurentPoly::monomial(c, ExponentVector::new(eq, ep, ez))
}

/// Kronecker delta `δ_{m,0}` as a constant polynomial.
pub fn delta0(m: i64) -> LaurentPoly {
    if m == 0 {
        LaurentPoly::one()
    } else {
        LaurentPoly::zero()
    }
}

/// `(z; base)_len`.
pub fn z_poch(base: Var, len: i64) -> Result<LaurentPoly, IdentityError> {
    Ok(poch(&LaurentPoly::z(), base, len)?)
}

/// q-exponent of the composition term in the `δ_{m,0}` sum:
/// `(Σ C(j_i, 2) - g) / 3`.
pub fn binomial_exponent(j: CompositionTriple) -> Result<i64, IdentityError> {
    let numerator = choose2(j.j1) + choose2(j.j2) + choose2(j.j3) - exponent_correction(j);
    exact_third(numerator, || format!("composition ({}, {}, {})", j.j1, j.j2, j.j3))
}

/// q-exponent of the composition term in the `z`-refined sum:
/// `(j2² + j2·j3 + j3² - g) / 3`.
pub fn quadratic_exponent(j: CompositionTriple) -> Result<i64, IdentityError> {
    let numerator = j.j2 * j.j2 + j.j2 * j.j3 + j.j3 * j.j3 - exponent_correction(j);
    exact_third(numerator, || format!("composition ({}, {}, {})", j.j1, j.j2, j.j3))
}

/// `Σ_{j1+j2+j3=3m} q^{(ΣC(j_i,2) - g)/3} [3m; j] ω^{j2+2j3}`, which should
/// equal `δ_{m,0}`.
pub fn cube_root_sum(m: i64) -> Result<LaurentPoly, IdentityError> {
    let mut out = LaurentPoly::zero();
    for j in CompositionTriple::all(3 * m) {
        let e = binomial_exponent(j)?;
        let term = qmultinomial3(3 * m, j.j1, j.j2, j.j3)
            .shift_var(Var::Q, e)
            .scale(&EisensteinInt::omega_pow(j.omega_index()));
        out.add_assign_poly(&term);
    }
    Ok(out)
}

/// `Σ_{j1+j2+j3=3m} q^{(j2²+j2j3+j3² - g)/3} z^{j2+j3} [3m; j] ω^{j2+2j3}`,
/// which should equal `(z;q)_{3m}`.
pub fn cube_root_z_sum(m: i64) -> Result<LaurentPoly, IdentityError> {
    let mut out = LaurentPoly::zero();
    for j in CompositionTriple::all(3 * m) {
        let e = quadratic_exponent(j)?;
        let term = qmultinomial3(3 * m, j.j1, j.j2, j.j3)
            .shift(ExponentVector::new(e, 0, j.j2 + j.j3))
            .scale(&EisensteinInt::omega_pow(j.omega_index()));
        out.add_assign_poly(&term);
    }
    Ok(out)
}

/// Inner exponent `(k² - g(k,n))/3 - kn` of the re-indexed sums.
pub fn inner_exponent(k: i64, n: i64) -> Result<i64, IdentityError> {
    let g = exponent_correction_kn(k, n)?;
    Ok(exact_third(k * k - g, || format!("n={n}, k={k}"))? - k * n)
}

/// The composition sum re-indexed by `n = j2 + j3` and `k = j2 + 2j3`:
/// `Σ_n q^{n²} z^n Σ_k q^{(k²-g(k,n))/3 - kn} [3m; 3m-n, 2n-k, k-n] ω^k`.
pub fn reindexed_z_sum(m: i64) -> Result<LaurentPoly, IdentityError> {
    let mut out = LaurentPoly::zero();
    for n in 0..=3 * m {
        for k in (n - 1)..=(2 * n + 1) {
            let coeff = qmultinomial3(3 * m, 3 * m - n, 2 * n - k, k - n);
            if coeff.is_zero() {
                continue;
            }
            let e = inner_exponent(k, n).map_err(|err| annotate(err, m))?;
            let term = coeff
                .shift(ExponentVector::new(n * n + e, 0, n))
                .scale(&EisensteinInt::omega_pow(k));
            out.add_assign_poly(&term);
        }
    }
    Ok(out)
}

fn annotate(err: IdentityError, m: i64) -> IdentityError {
    match err {
        IdentityError::NonIntegralExponent { numerator, context } => IdentityError::NonIntegralExponent {
            numerator,
            context: format!("m={m}, {context}"),
        },
        other => other,
    }
}

/// `Σ_k q^{(k²-g(k,n))/3 - kn} [n; k-n]_q ω^k`, the inner sum shared by the
/// bibasic identity and its series limit.
pub fn inner_omega_sum(n: i64) -> Result<LaurentPoly, IdentityError> {
    let mut out = LaurentPoly::zero();
    for k in (n - 1)..=(2 * n + 1) {
        let coeff = qbinom(n, k - n, Var::Q);
        if coeff.is_zero() {
            continue;
        }
        let term = coeff
            .shift_var(Var::Q, inner_exponent(k, n)?)
            .scale(&EisensteinInt::omega_pow(k));
        out.add_assign_poly(&term);
    }
    Ok(out)
}

/// The inner sum split by `k mod 3` (classes 0, 1, 2), without the ω factor.
pub fn inner_sum_by_class(n: i64) -> Result<[LaurentPoly; 3], IdentityError> {
    let mut parts = [LaurentPoly::zero(), LaurentPoly::zero(), LaurentPoly::zero()];
    for k in (n - 1)..=(2 * n + 1) {
        let coeff = qbinom(n, k - n, Var::Q);
        if coeff.is_zero() {
            continue;
        }
        parts[k.rem_euclid(3) as usize].add_assign_poly(&coeff.shift_var(Var::Q, inner_exponent(k, n)?));
    }
    Ok(parts)
}

/// `Σ_n q^{C(n+1,2)} p^{C(n,2)} z^n [3m; n]_p Σ_k q^{(k²-g)/3 - kn} [n; k-n]_q ω^k`,
/// which should equal `(z;p)_{3m}`.
pub fn bibasic_sum(m: i64) -> Result<LaurentPoly, IdentityError> {
    let mut out = LaurentPoly::zero();
    for n in 0..=3 * m {
        let outer = qbinom(3 * m, n, Var::P).shift(ExponentVector::new(choose2(n + 1), choose2(n), n));
        let inner = inner_omega_sum(n).map_err(|err| annotate(err, m))?;
        out.add_assign_poly(&(&outer * &inner));
    }
    Ok(out)
}

/// Residue class of the summation index `k` in the three-part split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidueClass {
    /// `k ↦ 3k`
    Zero,
    /// `k ↦ 3k + 1`
    One,
    /// `k ↦ 3k - 1`
    MinusOne,
}

impl ResidueClass {
    pub const ALL: [ResidueClass; 3] = [ResidueClass::Zero, ResidueClass::One, ResidueClass::MinusOne];

    /// Position in the `[class 0, class 1, class 2]` ordering.
    pub fn index(&self) -> usize {
        match self {
            ResidueClass::Zero => 0,
            ResidueClass::One => 1,
            ResidueClass::MinusOne => 2,
        }
    }
}

/// The `k`-th summand of a residue-class sum:
/// - class 0: `q^{3k²-k-3kn} [n; 3k-n]`
/// - class 1: `q^{3k²+k-3kn-n} [n; 3k+1-n]`
/// - class -1: `q^{3k²-k-3kn} [n; 3k-1-n]`
pub fn residue_summand(class: ResidueClass, n: i64, k: i64) -> LaurentPoly {
    let (exp, bottom) = match class {
        ResidueClass::Zero => (3 * k * k - k - 3 * k * n, 3 * k - n),
        ResidueClass::One => (3 * k * k + k - 3 * k * n - n, 3 * k + 1 - n),
        ResidueClass::MinusOne => (3 * k * k - k - 3 * k * n, 3 * k - 1 - n),
    };
    qbinom(n, bottom, Var::Q).shift_var(Var::Q, exp)
}

/// Indices `k` that can contribute to a residue-class sum at `n`.
pub fn residue_index_range(n: i64) -> std::ops::RangeInclusive<i64> {
    -1..=(n + 1)
}

/// Residue-class sum over all integers `k`.
pub fn residue_sum(class: ResidueClass, n: i64) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for k in residue_index_range(n) {
        out.add_assign_poly(&residue_summand(class, n, k));
    }
    out
}

/// Difference of the class-0 and class-(-1) sums.
pub fn residue_gap(n: i64) -> LaurentPoly {
    &residue_sum(ResidueClass::Zero, n) - &residue_sum(ResidueClass::MinusOne, n)
}

/// Terminating q-binomial theorem at length `n`.
pub fn check_qbinomial_theorem(n: i64) -> Result<VerificationResult, IdentityError> {
    if n < 0 {
        return Err(IdentityError::NegativeParameter(n));
    }
    let mut lhs = LaurentPoly::zero();
    for j in 0..=n {
        lhs.add_assign_poly(&signed(qbinom(n, j, Var::Q).shift(ExponentVector::new(choose2(j), 0, j)), j));
    }
    Ok(VerificationResult::new(Identity::QBinomialTheorem.name(), &[("n", n)])
        .with(Comparison::new("expansion = (z;q)_n", lhs, z_poch(Var::Q, n)?)))
}

/// `Σ_j (-1)^j q^{C(j,2) - mj} [2m; j] = δ_{m,0}`.
pub fn check_alternating_qbinomial(m: i64) -> Result<VerificationResult, IdentityError> {
    if m < 0 {
        return Err(IdentityError::NegativeParameter(m));
    }
    let mut lhs = LaurentPoly::zero();
    for j in 0..=2 * m {
        lhs.add_assign_poly(&signed(qbinom(2 * m, j, Var::Q).shift_var(Var::Q, choose2(j) - m * j), j));
    }
    Ok(VerificationResult::new(Identity::AlternatingQBinomial.name(), &[("m", m)])
        .with(Comparison::new("alternating sum = delta", lhs, delta0(m))))
}

/// The `δ_{m,0}` composition sum, with the observed exponent range and the
/// per-term offset against the `z`-refined sum at `z = q^{-m}` recorded as notes.
pub fn check_cube_root_sum(m: i64) -> Result<VerificationResult, IdentityError> {
    if m < 0 {
        return Err(IdentityError::NegativeParameter(m));
    }
    let lhs = cube_root_sum(m)?;
    let mut result = VerificationResult::new(Identity::CubeRootSum.name(), &[("m", m)])
        .with(Comparison::new("sum = delta", lhs, delta0(m)));
    let mut min_exp = i64::MAX;
    let mut offsets = Vec::new();
    for j in CompositionTriple::all(3 * m) {
        let e = binomial_exponent(j)?;
        min_exp = min_exp.min(e);
        let substituted = quadratic_exponent(j)? - m * (j.j2 + j.j3);
        offsets.push(e - substituted);
    }
    result.note("min_q_exponent", min_exp);
    offsets.dedup();
    let offset = match offsets.as_slice() {
        [single] => single.to_string(),
        _ => "varies".to_string(),
    };
    result.note("offset_vs_substituted", offset);
    Ok(result)
}

pub fn check_cube_root_z_sum(m: i64) -> Result<VerificationResult, IdentityError> {
    if m < 0 {
        return Err(IdentityError::NegativeParameter(m));
    }
    let lhs = cube_root_z_sum(m)?;
    let mut result = VerificationResult::new(Identity::CubeRootZSum.name(), &[("m", m)]);
    if m > 0 {
        result.push(Comparison::new("sum at z=q^-m = 0", lhs.substitute_z(-m), LaurentPoly::zero()));
    }
    result.push(Comparison::new("sum = (z;q)_3m", lhs, z_poch(Var::Q, 3 * m)?));
    Ok(result)
}

pub fn check_reindexing(m: i64) -> Result<VerificationResult, IdentityError> {
    if m < 0 {
        return Err(IdentityError::NegativeParameter(m));
    }
    let reindexed = reindexed_z_sum(m)?;
    Ok(VerificationResult::new(Identity::Reindexing.name(), &[("m", m)])
        .with(Comparison::new("reindexed = composition form", reindexed.clone(), cube_root_z_sum(m)?))
        .with(Comparison::new("reindexed = (z;q)_3m", reindexed, z_poch(Var::Q, 3 * m)?)))
}

pub fn check_bibasic(m: i64) -> Result<VerificationResult, IdentityError> {
    if m < 0 {
        return Err(IdentityError::NegativeParameter(m));
    }
    let lhs = bibasic_sum(m)?;
    Ok(VerificationResult::new(Identity::Bibasic.name(), &[("m", m)])
        .with(Comparison::new("p=q specialization = reindexed sum", lhs.identify_p_with_q(), reindexed_z_sum(m)?))
        .with(Comparison::new("sum = (z;p)_3m", lhs, z_poch(Var::P, 3 * m)?)))
}

/// Residue sums: class 1 equals class -1, the gap has closed form
/// `(-1)^n q^{-C(n+1,2)}`, and the gap satisfies `gap(n) = -q^{-n} gap(n-1)`.
pub fn check_residue_sums(n: i64) -> Result<VerificationResult, IdentityError> {
    if n < 0 {
        return Err(IdentityError::NegativeParameter(n));
    }
    let s2 = residue_sum(ResidueClass::One, n);
    let s3 = residue_sum(ResidueClass::MinusOne, n);
    let gap = &residue_sum(ResidueClass::Zero, n) - &s3;
    let closed = signed(LaurentPoly::var_pow(Var::Q, -choose2(n + 1)), n);
    let mut result = VerificationResult::new(Identity::ResidueSums.name(), &[("n", n)])
        .with(Comparison::new("class 1 = class -1", s2, s3))
        .with(Comparison::new("gap = closed form", gap.clone(), closed));
    if n >= 1 {
        let previous = -residue_gap(n - 1).shift_var(Var::Q, -n);
        result.push(Comparison::new("gap recurrence", gap, previous));
    }
    Ok(result)
}

/// `q^{C(n+1,2)} (S0 + ω S1 + ω² S-1) = (-1)^n`: the `z^n` coefficient of the
/// infinite bibasic series after removing the common factor
/// `p^{C(n,2)} / (p;p)_n`.
pub fn check_series_coefficient(n: i64) -> Result<VerificationResult, IdentityError> {
    if n < 0 {
        return Err(IdentityError::NegativeParameter(n));
    }
    let mut combined = LaurentPoly::zero();
    for class in ResidueClass::ALL {
        combined.add_assign_poly(&residue_sum(class, n).scale(&EisensteinInt::omega_pow(class.index() as i64)));
    }
    let lhs = combined.shift_var(Var::Q, choose2(n + 1));
    Ok(VerificationResult::new(Identity::SeriesCoefficient.name(), &[("n", n)])
        .with(Comparison::new("inner k-sum = class combination", inner_omega_sum(n)?, combined))
        .with(Comparison::new("coefficient = (-1)^n", lhs, LaurentPoly::constant(sign(n).into()))))
}

/// Total q-degree used by the truncated single-base series check.
pub const TRUNCATED_Q_DEGREE: i64 = 30;

/// Coefficients of `1/(q;q)_j` up to `q^deg`, as a product of geometric series.
pub fn inverse_q_factorial_series(j: i64, deg: i64) -> Vec<BigInt> {
    let len = (deg.max(-1) + 1) as usize;
    let mut series = vec![BigInt::zero(); len];
    if len == 0 {
        return series;
    }
    series[0] = BigInt::one();
    for i in 1..=j.max(0) as usize {
        // multiply by 1/(1 - q^i): s[t] += s[t - i], ascending
        for t in i..len {
            let prev = series[t - i].clone();
            series[t] += prev;
        }
    }
    series
}

fn truncated_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Left side of the single-base infinite series, truncated to
/// `q`-degree `q_deg` and `z`-degree `z_deg`.
pub fn partial_theta_series(q_deg: i64, z_deg: i64) -> Result<LaurentPoly, IdentityError> {
    let mut out = LaurentPoly::zero();
    for n in 0..=z_deg {
        for k in n..=2 * n {
            let shift = n * n + inner_exponent(k, n)?;
            if shift > q_deg {
                continue;
            }
            let room = q_deg - shift;
            let a = inverse_q_factorial_series(k - n, room);
            let b = inverse_q_factorial_series(2 * n - k, room);
            let prod = truncated_mul(&a, &b, (room + 1) as usize);
            let term = LaurentPoly::from_coeffs(Var::Q, shift, &prod)
                .shift_var(Var::Z, n)
                .scale(&EisensteinInt::omega_pow(k));
            out.add_assign_poly(&term);
        }
    }
    Ok(out)
}

/// `∏_{j=0}^{q_deg} (1 - z q^j)` truncated to the same box.
pub fn truncated_infinite_poch(q_deg: i64, z_deg: i64) -> LaurentPoly {
    let one = LaurentPoly::one();
    let mut out = LaurentPoly::one();
    for j in 0..=q_deg {
        let factor = &one - &mono(EisensteinInt::one(), j, 0, 1);
        out = (&out * &factor).filter_terms(|e| e.eq <= q_deg && e.ez <= z_deg);
    }
    out
}

pub fn check_partial_theta_truncated(z_deg: i64) -> Result<VerificationResult, IdentityError> {
    if z_deg < 0 {
        return Err(IdentityError::NegativeParameter(z_deg));
    }
    let lhs = partial_theta_series(TRUNCATED_Q_DEGREE, z_deg)?;
    let rhs = truncated_infinite_poch(TRUNCATED_Q_DEGREE, z_deg);
    Ok(VerificationResult::new(
        Identity::PartialThetaTruncated.name(),
        &[("q_degree", TRUNCATED_Q_DEGREE), ("z_degree", z_deg)],
    )
    .with(Comparison::new("truncated series = truncated (z;q)_inf", lhs, rhs)))
}

/// `Σ_n q^{n²} z^n [3m; n] (-1)^n q^{-C(n+1,2)} = (z;q)_{3m}`.
pub fn check_outer_sum(m: i64) -> Result<VerificationResult, IdentityError> {
    if m < 0 {
        return Err(IdentityError::NegativeParameter(m));
    }
    let mut lhs = LaurentPoly::zero();
    for n in 0..=3 * m {
        let term = qbinom(3 * m, n, Var::Q).shift(ExponentVector::new(n * n - choose2(n + 1), 0, n));
        lhs.add_assign_poly(&signed(term, n));
    }
    Ok(VerificationResult::new(Identity::OuterSum.name(), &[("m", m)])
        .with(Comparison::new("outer sum = (z;q)_3m", lhs, z_poch(Var::Q, 3 * m)?)))
}

/// Every registered check, keyed by its command-line name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    CubeRootSum,
    CubeRootZSum,
    Reindexing,
    Bibasic,
    QBinomialTheorem,
    AlternatingQBinomial,
    ResidueSums,
    SeriesCoefficient,
    PartialThetaTruncated,
    OuterSum,
    Touchard,
    Extension,
}

impl Identity {
    pub const ALL: [Identity; 12] = [
        Identity::CubeRootSum,
        Identity::CubeRootZSum,
        Identity::Reindexing,
        Identity::Bibasic,
        Identity::QBinomialTheorem,
        Identity::AlternatingQBinomial,
        Identity::ResidueSums,
        Identity::SeriesCoefficient,
        Identity::PartialThetaTruncated,
        Identity::OuterSum,
        Identity::Touchard,
        Identity::Extension,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Identity::CubeRootSum => "conjecture1",
            Identity::CubeRootZSum => "theorem2",
            Identity::Reindexing => "eq8gen-equivalence",
            Identity::Bibasic => "theorem3",
            Identity::QBinomialTheorem => "qbinomial-theorem",
            Identity::AlternatingQBinomial => "conj-1d",
            Identity::ResidueSums => "prop6",
            Identity::SeriesCoefficient => "corollary-coefficient",
            Identity::PartialThetaTruncated => "cor1a-truncated",
            Identity::OuterSum => "eq21",
            Identity::Touchard => "touchard",
            Identity::Extension => "extension",
        }
    }

    /// Largest parameter accepted without an explicit override.
    pub fn desk_limit(&self) -> i64 {
        match self {
            Identity::CubeRootSum
            | Identity::CubeRootZSum
            | Identity::Reindexing
            | Identity::Bibasic
            | Identity::OuterSum
            | Identity::Extension => 4,
            Identity::Touchard => 6,
            Identity::AlternatingQBinomial => 10,
            Identity::PartialThetaTruncated => 8,
            Identity::QBinomialTheorem | Identity::ResidueSums | Identity::SeriesCoefficient => 40,
        }
    }

    /// Runs the check at one parameter value. The extension check yields one
    /// result per interlacing convention when calibration finds none.
    pub fn check(&self, param: i64) -> Result<Vec<VerificationResult>, IdentityError> {
        Ok(match self {
            Identity::CubeRootSum => vec![check_cube_root_sum(param)?],
            Identity::CubeRootZSum => vec![check_cube_root_z_sum(param)?],
            Identity::Reindexing => vec![check_reindexing(param)?],
            Identity::Bibasic => vec![check_bibasic(param)?],
            Identity::QBinomialTheorem => vec![check_qbinomial_theorem(param)?],
            Identity::AlternatingQBinomial => vec![check_alternating_qbinomial(param)?],
            Identity::ResidueSums => vec![check_residue_sums(param)?],
            Identity::SeriesCoefficient => vec![check_series_coefficient(param)?],
            Identity::PartialThetaTruncated => vec![check_partial_theta_truncated(param)?],
            Identity::OuterSum => vec![check_outer_sum(param)?],
            Identity::Touchard => {
                if param < 0 {
                    return Err(IdentityError::NegativeParameter(param));
                }
                vec![combinatorics::check_touchard(param as usize)]
            }
            Identity::Extension => {
                if param < 0 {
                    return Err(IdentityError::NegativeParameter(param));
                }
                combinatorics::check_extension_calibrated(param as usize)
            }
        })
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = IdentityError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| IdentityError::UnknownIdentity(s.to_string()))
    }
}

/// Runs a registered check for every parameter in `0..=param_max`. Parameter
/// values are evaluated in parallel; results come back in parameter order.
pub fn verify_range(identity: &str, param_max: i64) -> Result<Vec<VerificationResult>, IdentityError> {
    let id: Identity = identity.parse()?;
    let per_param: Vec<Vec<VerificationResult>> = (0..=param_max)
        .into_par_iter()
        .map(|param| id.check(param))
        .collect::<Result<_, _>>()?;
    Ok(per_param.into_iter().flatten().collect())
}

//! Consistency checks between finite-field counts and the combinatorial
//! generating functions evaluated at `q`.

use crate::combinatorics::{crossing_side, interlacing_side, Convention};
use crate::gfq::{flag_count, power_ratio, sigma_count, DimensionSequence, FieldCtx, GfError, Matrix};
use crate::qlaurent::EvalValue;
use crate::verification::{Comparison, VerificationResult};

/// Parameter points of the crossing bridge.
pub const CROSSING_POINTS: [(u32, usize); 3] = [(5, 1), (7, 1), (7, 2)];

/// `σ_(m,m)` of a diagonal matrix with `2m` distinct eigenvalues against
/// `(q-1)^m Σ_σ q^{crossings(σ)}` at `q`.
pub fn crossing_bridge(q: u32, m: usize) -> Result<VerificationResult, GfError> {
    let ctx = FieldCtx::new(q)?;
    let t = Matrix::distinct_diagonal(&ctx, 2 * m)?;
    let lam = DimensionSequence::new(if m == 0 { vec![] } else { vec![m, m] });
    let sigma = sigma_count(&t, &lam)?;
    let mut r = VerificationResult::new("crossing-bridge", &[("q", q as i64), ("m", m as i64)]);
    r.push(Comparison::new(
        "top flag count = 1",
        EvalValue::from_int(flag_count(&t, &[2 * m])?),
        EvalValue::from_int(1),
    ));
    let poly = crossing_side(m).eval_q(q as i64).expect("q is nonzero");
    let sigma = EvalValue::from_int(sigma);
    note_ratio(&mut r, &sigma, &poly, q);
    r.push(Comparison::new("sigma_(m,m) = crossing polynomial at q", sigma, poly));
    Ok(r)
}

fn note_ratio(r: &mut VerificationResult, sigma: &EvalValue, poly: &EvalValue, q: u32) {
    let ratio = match power_ratio(&sigma.one, &poly.one, q) {
        Some(s) => format!("q^{s}"),
        None => "not a power of q".to_string(),
    };
    r.note("sigma_over_polynomial", ratio);
}

/// `σ_(1,1,1)` of `diag(1, 2, 3)` over `GF(q)` against
/// `(q-1)^2 Σ_π q^{interlacings(π)}` at `q`, under both conventions.
pub fn interlacing_bridge(q: u32) -> Result<VerificationResult, GfError> {
    let ctx = FieldCtx::new(q)?;
    let t = Matrix::distinct_diagonal(&ctx, 3)?;
    let sigma = EvalValue::from_int(sigma_count(&t, &DimensionSequence::new(vec![1, 1, 1]))?);
    let mut r = VerificationResult::new("interlacing-bridge", &[("q", q as i64), ("m", 1)]);
    for convention in Convention::ALL {
        let poly = interlacing_side(1, convention).eval_q(q as i64).expect("q is nonzero");
        if convention == Convention::Ordered {
            note_ratio(&mut r, &sigma, &poly, q);
        }
        r.push(Comparison::new(
            format!("sigma_(1,1,1) = interlacing polynomial at q ({convention})"),
            sigma.clone(),
            poly,
        ));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_points() {
        for (q, m) in [(5, 1), (7, 1)] {
            assert!(crossing_bridge(q, m).unwrap().is_verified(), "q={q} m={m}");
        }
        // the count carries an extra q^{C(m,2)}: 2268 = 7 · 324
        let r = crossing_bridge(7, 2).unwrap();
        assert!(!r.is_verified());
        assert_eq!(r.comparisons[1].lhs, EvalValue::from_int(2268).into());
        assert_eq!(r.comparisons[1].rhs, EvalValue::from_int(324).into());
        assert_eq!(r.notes["sigma_over_polynomial"], "q^1");
    }

    #[test]
    fn interlacing_at_seven() {
        let r = interlacing_bridge(7).unwrap();
        assert!(r.is_verified());
        assert_eq!(r.comparisons[0].lhs, EvalValue::from_int(36).into());
    }

    #[test]
    fn field_too_small() {
        assert!(crossing_bridge(3, 2).is_err());
    }
}

//! Reference constructions used by the CLI and the test suites.

use crate::agcode::{
    build_monomial_code, build_one_point_code, find_hermitian_so_monomials, is_hermitian_self_orthogonal, LinearCode,
};
use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::gf::{build_field, Field};
use crate::stabilizer::{from_hermitian_so_code, StabilizerCode};

/// Node budget for the self-orthogonal monomial search.
pub const MONOMIAL_SEARCH_BUDGET: u64 = 2_000_000;

/// The Hermitian curve `y^q + y = x^{q+1}` and its field `F_{q²}`.
pub fn hermitian(q: u32) -> Result<(CurveSpec, Field)> {
    Ok((CurveSpec::new(q, q + 1)?, build_field(q, 2)?))
}

/// Largest `s` for which the one-point code is Hermitian self-orthogonal,
/// scanning `0..limit`. Self-orthogonality is monotone in `s`, so this is
/// the threshold.
pub fn so_threshold(curve: &CurveSpec, field: &Field, limit: u32) -> Result<Option<u32>> {
    let mut last = None;
    for s in 0..limit {
        if is_hermitian_self_orthogonal(&build_one_point_code(curve, field, s)?)? {
            last = Some(s);
        } else {
            break;
        }
    }
    Ok(last)
}

/// A Hermitian self-orthogonal evaluation code of dimension `k`: the
/// one-point code when one has dimension `k` and is self-orthogonal,
/// otherwise the first self-orthogonal monomial subcode.
pub fn so_code_of_dimension(curve: &CurveSpec, field: &Field, k: usize) -> Result<LinearCode> {
    let monomials = find_hermitian_so_monomials(curve, field, k, MONOMIAL_SEARCH_BUDGET)?
        .ok_or_else(|| Error::validation(format!("no Hermitian self-orthogonal monomial code of dimension {k}")))?;
    let s = monomials.iter().map(|e| curve.pole_order(*e)).max().unwrap_or(0);
    if monomials == curve.monomial_basis(s as i64) {
        build_one_point_code(curve, field, s)
    } else {
        build_monomial_code(curve, field, &monomials)
    }
}

/// The `[[27, 13]]_3` code from the 7-dimensional Hermitian self-orthogonal
/// monomial subcode on `y³ + y = x⁴`.
pub fn qutrit_k13() -> Result<StabilizerCode> {
    let (curve, field) = hermitian(3)?;
    from_hermitian_so_code(&so_code_of_dimension(&curve, &field, 7)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_at_q3() {
        let (c, f) = hermitian(3).unwrap();
        assert_eq!(so_threshold(&c, &f, 33).unwrap(), Some(7));
    }

    #[test]
    fn small_dimensions_are_one_point() {
        let (c, f) = hermitian(3).unwrap();
        let code = so_code_of_dimension(&c, &f, 5).unwrap();
        assert_eq!(code.s, Some(7));
        assert_eq!(code.monomials.as_ref().unwrap(), &c.monomial_basis(7));
    }
}

//! The plane curve `y^q + y = x^m` with `|m − q| = 1`.
//!
//! Only the affine rational points and the Weierstrass semigroup at the single
//! point at infinity are modelled. `x` has pole order `q` and `y` pole order `m`
//! there, so the monomials `x^i y^j` with `0 ≤ j < q` have pairwise distinct
//! pole orders `i·q + j·m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Felt, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub q: u32,
    pub m: u32,
}

impl CurveSpec {
    pub fn new(q: u32, m: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::config(format!("q = {q} is not a field order")));
        }
        if q.abs_diff(m) != 1 || m < 2 {
            return Err(Error::config(format!("need |m − q| = 1 and m ≥ 2, got q={q}, m={m}")));
        }
        Ok(CurveSpec { q, m })
    }

    /// `(q − 1)(m − 1) / 2`.
    pub fn genus(&self) -> u32 {
        (self.q - 1) * (self.m - 1) / 2
    }

    /// Pole order at infinity of `x^i y^j`.
    pub fn pole_order(&self, e: MonomialExponent) -> u32 {
        e.i * self.q + e.j * self.m
    }

    fn check_field(&self, field: &Field) -> Result<()> {
        if field.q_sub() != Some(self.q) {
            return Err(Error::config(format!(
                "curve over q={} needs F_{{q^2}}, got field of order {}",
                self.q,
                field.order()
            )));
        }
        Ok(())
    }

    /// All `(x, y) ∈ F_{q²}²` on the curve, ordered by `(index(x), index(y))`.
    pub fn enumerate_affine_points(&self, field: &Field) -> Result<Vec<AffinePoint>> {
        self.check_field(field)?;
        let elems = field.enumerate();
        let xm: Vec<Felt> = elems.iter().map(|&x| field.pow(x, self.m as u64)).collect();
        let lhs: Vec<Felt> = elems.iter().map(|&y| field.add(field.pow(y, self.q as u64), y)).collect();
        let mut pts = Vec::new();
        for &x in &elems {
            for &y in &elems {
                if lhs[y.index()] == xm[x.index()] {
                    pts.push(AffinePoint { x, y });
                }
            }
        }
        Ok(pts)
    }

    /// `ℓ(s·P∞)`: the number of monomials with pole order at most `s`.
    pub fn rr_dimension(&self, s: i64) -> usize {
        if s < 0 {
            return 0;
        }
        let s = s as u64;
        (0..self.q as u64)
            .map(|j| j * self.m as u64)
            .filter(|&pj| pj <= s)
            .map(|pj| ((s - pj) / self.q as u64 + 1) as usize)
            .sum()
    }

    /// Monomials spanning `L(s·P∞)`, by increasing pole order (ties: smaller `j`).
    pub fn monomial_basis(&self, s: i64) -> Vec<MonomialExponent> {
        if s < 0 {
            return Vec::new();
        }
        let s = s as u32;
        let mut out: Vec<MonomialExponent> = (0..self.q)
            .flat_map(|j| {
                let rem = s.checked_sub(j * self.m);
                let imax = rem.map(|r| r / self.q);
                imax.into_iter().flat_map(move |imax| (0..=imax).map(move |i| MonomialExponent { i, j }))
            })
            .collect();
        out.sort_by_key(|e| (self.pole_order(*e), e.j));
        out
    }

    /// Monomials `x^i y^j` with `i < q²`, `j < q`, in pole order. Their
    /// evaluations at the affine points span every function on the points
    /// when `m = q + 1`.
    pub fn reduced_monomials(&self) -> Vec<MonomialExponent> {
        let q2 = self.q * self.q;
        let mut out: Vec<MonomialExponent> =
            (0..self.q).flat_map(|j| (0..q2).map(move |i| MonomialExponent { i, j })).collect();
        out.sort_by_key(|e| (self.pole_order(*e), e.j));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffinePoint {
    pub x: Felt,
    pub y: Felt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonomialExponent {
    pub i: u32,
    pub j: u32,
}

impl MonomialExponent {
    pub fn eval(self, field: &Field, pt: &AffinePoint) -> Felt {
        field.mul(field.pow(pt.x, self.i as u64), field.pow(pt.y, self.j as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    fn brute_lattice_count(q: u32, m: u32, s: i64) -> usize {
        let mut n = 0;
        for i in 0..=(s.max(0) as u32) {
            for j in 0..q {
                if ((i * q + j * m) as i64) <= s {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn genus_values() {
        assert_eq!(CurveSpec::new(3, 4).unwrap().genus(), 3);
        assert_eq!(CurveSpec::new(5, 6).unwrap().genus(), 10);
        assert_eq!(CurveSpec::new(2, 3).unwrap().genus(), 1);
        assert_eq!(CurveSpec::new(3, 2).unwrap().genus(), 1);
    }

    #[test]
    fn singular_parameters_rejected() {
        assert!(CurveSpec::new(3, 5).is_err());
        assert!(CurveSpec::new(3, 3).is_err());
    }

    #[test]
    fn hermitian_point_counts() {
        let c = CurveSpec::new(3, 4).unwrap();
        let f9 = build_field(3, 2).unwrap();
        let pts = c.enumerate_affine_points(&f9).unwrap();
        assert_eq!(pts.len(), 27);
        assert!(pts.contains(&AffinePoint { x: Felt::ZERO, y: Felt::ZERO }));
        assert_eq!(pts.iter().filter(|p| p.x.is_zero()).count(), 3);
        assert!(pts.windows(2).all(|w| (w[0].x, w[0].y) < (w[1].x, w[1].y)));

        let c5 = CurveSpec::new(5, 6).unwrap();
        let f25 = build_field(5, 2).unwrap();
        assert_eq!(c5.enumerate_affine_points(&f25).unwrap().len(), 125);
    }

    #[test]
    fn wrong_field_is_config_error() {
        let c = CurveSpec::new(3, 4).unwrap();
        let f25 = build_field(5, 2).unwrap();
        assert!(matches!(c.enumerate_affine_points(&f25), Err(Error::Config(_))));
    }

    #[test]
    fn rr_dimension_examples() {
        let c = CurveSpec::new(3, 4).unwrap();
        assert_eq!(c.rr_dimension(9), 7);
        assert_eq!(c.rr_dimension(7), 5);
        assert_eq!(c.rr_dimension(0), 1);
        assert_eq!(c.rr_dimension(-1), 0);
        for s in -3..60 {
            assert_eq!(c.rr_dimension(s), brute_lattice_count(3, 4, s), "s={s}");
        }
    }

    #[test]
    fn monomial_basis_examples() {
        let c = CurveSpec::new(3, 4).unwrap();
        let b: Vec<(u32, u32)> = c.monomial_basis(9).iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(b, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0)]);
        let poles: Vec<u32> = c.monomial_basis(9).iter().map(|e| c.pole_order(*e)).collect();
        assert_eq!(poles, vec![0, 3, 4, 6, 7, 8, 9]);
        assert_eq!(c.monomial_basis(2), vec![MonomialExponent { i: 0, j: 0 }]);
        let c5 = CurveSpec::new(5, 6).unwrap();
        assert_eq!(c5.monomial_basis(4), vec![MonomialExponent { i: 0, j: 0 }]);
    }

    #[test]
    fn semigroup_properties() {
        for (q, m) in [(2, 3), (3, 4), (3, 2), (5, 6), (5, 4)] {
            let c = CurveSpec::new(q, m).unwrap();
            let g = c.genus() as i64;
            let smax = 3 * (q * q) as i64;
            let basis = c.monomial_basis(smax);
            assert_eq!(basis.len(), c.rr_dimension(smax));
            let poles: std::collections::HashSet<u32> = basis.iter().map(|e| c.pole_order(*e)).collect();
            assert_eq!(poles.len(), basis.len(), "pole orders distinct for q={q} m={m}");
            for s in (2 * g - 1).max(0)..=smax {
                assert_eq!(c.rr_dimension(s) as i64, s - g + 1, "Riemann–Roch q={q} m={m} s={s}");
            }
            let gaps = (1..=smax).filter(|&s| c.rr_dimension(s) == c.rr_dimension(s - 1)).count();
            assert_eq!(gaps as i64, g);
        }
    }
}

//! Small finite fields: prime fields `F_p` and quadratic extensions
//! `F_{p^2} = F_p[β]/(modulus)`.
//!
//! Elements are identified by their canonical index `Σ coeffs[i]·p^i`, where
//! `coeffs` is the coefficient vector in the basis `1, β`. All arithmetic is
//! done once, by polynomial arithmetic modulo `(p, modulus)`, when the field is
//! built; afterwards every operation is a table lookup.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed modulus table. Coefficients are listed lowest degree first.
///
/// Prime fields use the identity representation `β − 0`.
const MODULI: &[(u32, u32, &[u32])] = &[
    (2, 1, &[0, 1]),
    (3, 1, &[0, 1]),
    (5, 1, &[0, 1]),
    // β² + β + 1
    (2, 2, &[1, 1, 1]),
    // β² + 1
    (3, 2, &[1, 0, 1]),
    // β² + 4β + 2 (Conway)
    (5, 2, &[2, 4, 1]),
];

/// Serializable description of a field: characteristic, extension degree and
/// modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub ext_deg: u32,
    pub modulus: Vec<u32>,
    /// Order of the subfield `F_q` when this is `F_{q^2}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_sub: Option<u32>,
}

impl FieldSpec {
    pub fn order(&self) -> usize {
        (self.p as usize).pow(self.ext_deg)
    }
}

/// A field element, stored as its canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Felt(u16);

impl Felt {
    pub const ZERO: Felt = Felt(0);
    pub const ONE: Felt = Felt(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A finite field with precomputed operation tables.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    order: usize,
    add: Vec<Felt>,
    mul: Vec<Felt>,
    neg: Vec<Felt>,
    inv: Vec<Felt>,
    conj: Option<Vec<Felt>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

/// Builds `F_{p^ext_deg}` from the fixed modulus table.
pub fn build_field(p: u32, ext_deg: u32) -> Result<Field> {
    let modulus = MODULI
        .iter()
        .find(|(mp, me, _)| *mp == p && *me == ext_deg)
        .map(|(_, _, m)| m.to_vec())
        .ok_or_else(|| Error::config(format!("unsupported field: p={p}, ext_deg={ext_deg}")))?;
    let q_sub = (ext_deg == 2).then_some(p);
    Field::from_spec(FieldSpec { p, ext_deg, modulus, q_sub })
}

impl Field {
    /// Builds a field from a (possibly deserialized) spec, validating it.
    pub fn from_spec(spec: FieldSpec) -> Result<Field> {
        let p = spec.p;
        if !is_prime(p) {
            return Err(Error::config(format!("characteristic {p} is not prime")));
        }
        if !(1..=2).contains(&spec.ext_deg) {
            return Err(Error::config(format!("extension degree {} unsupported", spec.ext_deg)));
        }
        let d = spec.ext_deg as usize;
        if spec.modulus.len() != d + 1 || spec.modulus[d] != 1 || spec.modulus.iter().any(|&c| c >= p) {
            return Err(Error::config("modulus must be monic with coefficients in [0, p)"));
        }
        if d == 2 && (0..p).any(|x| poly_eval(&spec.modulus, x, p) == 0) {
            return Err(Error::config("quadratic modulus has a root in F_p"));
        }
        match spec.q_sub {
            Some(qs) if d != 2 || qs * qs != p.pow(2) => {
                return Err(Error::config("q_sub must satisfy q_sub^2 = field order"))
            }
            None if d == 2 => return Err(Error::config("quadratic extension requires q_sub")),
            _ => {}
        }

        let order = spec.order();
        let coeffs: Vec<Vec<u32>> = (0..order).map(|i| index_to_coeffs(i, p, d)).collect();
        let mut add = vec![Felt::ZERO; order * order];
        let mut mul = vec![Felt::ZERO; order * order];
        for a in 0..order {
            for b in 0..order {
                let sum: Vec<u32> = coeffs[a].iter().zip(&coeffs[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * order + b] = Felt(coeffs_to_index(&sum, p) as u16);
                let prod = poly_mul_mod(&coeffs[a], &coeffs[b], &spec.modulus, p);
                mul[a * order + b] = Felt(coeffs_to_index(&prod, p) as u16);
            }
        }
        let neg =
            (0..order).map(|a| Felt((0..order).find(|&b| add[a * order + b] == Felt::ZERO).unwrap() as u16)).collect();
        let inv = (0..order)
            .map(|a| {
                if a == 0 {
                    Felt::ZERO
                } else {
                    Felt((1..order).find(|&b| mul[a * order + b] == Felt::ONE).expect("field has inverses") as u16)
                }
            })
            .collect();
        let mut field = Field { spec, order, add, mul, neg, inv, conj: None };
        if let Some(qs) = field.spec.q_sub {
            let conj = (0..order).map(|a| field.pow(Felt(a as u16), qs as u64)).collect();
            field.conj = Some(conj);
        }
        Ok(field)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Subfield order when this is a quadratic extension.
    pub fn q_sub(&self) -> Option<u32> {
        self.spec.q_sub
    }

    pub fn elem(&self, index: usize) -> Result<Felt> {
        if index < self.order {
            Ok(Felt(index as u16))
        } else {
            Err(Error::validation(format!("element index {index} out of range for field of order {}", self.order)))
        }
    }

    /// The element `c0 + c1·β` (reduced mod p).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Felt {
        let p = self.spec.p;
        let reduced: Vec<u32> = coeffs.iter().map(|c| c % p).collect();
        Felt(coeffs_to_index(&reduced, p) as u16)
    }

    pub fn coeffs(&self, a: Felt) -> Vec<u32> {
        index_to_coeffs(a.index(), self.spec.p, self.spec.ext_deg as usize)
    }

    /// The generator `β` of a quadratic extension.
    pub fn beta(&self) -> Felt {
        debug_assert_eq!(self.spec.ext_deg, 2);
        Felt(self.spec.p as u16)
    }

    /// All elements in canonical index order.
    pub fn enumerate(&self) -> Vec<Felt> {
        (0..self.order).map(|i| Felt(i as u16)).collect()
    }

    #[inline]
    pub fn add(&self, a: Felt, b: Felt) -> Felt {
        self.add[a.index() * self.order + b.index()]
    }

    #[inline]
    pub fn sub(&self, a: Felt, b: Felt) -> Felt {
        self.add(a, self.neg[b.index()])
    }

    #[inline]
    pub fn neg(&self, a: Felt) -> Felt {
        self.neg[a.index()]
    }

    #[inline]
    pub fn mul(&self, a: Felt, b: Felt) -> Felt {
        self.mul[a.index() * self.order + b.index()]
    }

    pub fn inv(&self, a: Felt) -> Result<Felt> {
        if a.is_zero() {
            Err(Error::Arithmetic("inverse of zero".into()))
        } else {
            Ok(self.inv[a.index()])
        }
    }

    pub fn div(&self, a: Felt, b: Felt) -> Result<Felt> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn arith(&self, op: ArithOp, a: Felt, b: Felt) -> Result<Felt> {
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, a: Felt, mut e: u64) -> Felt {
        let mut base = a;
        let mut acc = Felt::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The conjugation `a ↦ a^q` of `F_{q^2}` over `F_q`.
    pub fn conj_q(&self, a: Felt) -> Result<Felt> {
        match &self.conj {
            Some(t) => Ok(t[a.index()]),
            None => Err(Error::config("conjugation requires a quadratic extension field")),
        }
    }

    /// Whether `a` lies in the prime subfield.
    pub fn in_prime_subfield(&self, a: Felt) -> bool {
        a.index() < self.spec.p as usize
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn poly_eval(coeffs: &[u32], x: u32, p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

fn index_to_coeffs(mut i: usize, p: u32, d: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push((i % p as usize) as u32);
        i /= p as usize;
    }
    out
}

fn coeffs_to_index(c: &[u32], p: u32) -> usize {
    c.iter().rev().fold(0, |acc, &x| acc * p as usize + x as usize)
}

/// Product of two degree-`<d` polynomials reduced by a monic degree-`d` modulus.
fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let d = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * d];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (d..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for k in 0..d {
            let sub = c * modulus[k] % p;
            prod[deg - d + k] = (prod[deg - d + k] + p - sub) % p;
        }
    }
    prod.truncate(d);
    prod
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> Field {
        build_field(3, 2).unwrap()
    }

    #[test]
    fn prime_field_addition() {
        let f = build_field(3, 1).unwrap();
        assert_eq!(f.order(), 3);
        assert_eq!(f.add(Felt(2), Felt(2)), Felt(1));
        assert_eq!(f.enumerate(), vec![Felt(0), Felt(1), Felt(2)]);
    }

    #[test]
    fn moduli_have_no_roots() {
        // Exhaustive evaluation of the quadratic moduli over the prime field.
        for &(p, d, m) in MODULI.iter().filter(|(_, d, _)| *d == 2) {
            let roots: Vec<u32> = (0..p).filter(|&x| poly_eval(m, x, p) == 0).collect();
            assert!(roots.is_empty(), "p={p} d={d} roots {roots:?}");
        }
        // β²+1 over F_3: values 1, 2, 2
        let vals: Vec<u32> = (0..3).map(|x| poly_eval(&[1, 0, 1], x, 3)).collect();
        assert_eq!(vals, vec![1, 2, 2]);
    }

    #[test]
    fn f9_beta_squared_is_minus_one() {
        let f = f9();
        let b = f.beta();
        assert_eq!(f.mul(b, b), Felt(2));
        assert_eq!(f.spec().modulus, vec![1, 0, 1]);
    }

    #[test]
    fn f9_division_matches_brute_force_inverse() {
        let f = f9();
        let b = f.beta();
        let brute = f.enumerate().into_iter().find(|&x| f.mul(b, x) == Felt::ONE).unwrap();
        let two_beta = f.from_coeffs(&[0, 2]);
        assert_eq!(brute, two_beta);
        assert_eq!(f.div(Felt::ONE, b).unwrap(), two_beta);
        assert_eq!(f.arith(ArithOp::Div, Felt::ONE, b).unwrap(), two_beta);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let f = f9();
        assert!(matches!(f.div(Felt::ONE, Felt::ZERO), Err(Error::Arithmetic(_))));
    }

    #[test]
    fn conjugation_examples() {
        let f = f9();
        assert_eq!(f.conj_q(Felt(2)).unwrap(), Felt(2));
        assert_eq!(f.conj_q(f.beta()).unwrap(), f.from_coeffs(&[0, 2]));
        // (1+β)^3 by repeated multiplication
        let a = f.from_coeffs(&[1, 1]);
        let cube = f.mul(a, f.mul(a, a));
        assert_eq!(cube, f.from_coeffs(&[1, 2]));
        assert_eq!(f.conj_q(a).unwrap(), cube);
    }

    #[test]
    fn conjugation_needs_extension() {
        let f = build_field(5, 1).unwrap();
        assert!(matches!(f.conj_q(Felt::ONE), Err(Error::Config(_))));
    }

    #[test]
    fn unsupported_field_is_config_error() {
        assert!(matches!(build_field(7, 2), Err(Error::Config(_))));
        assert!(matches!(build_field(3, 3), Err(Error::Config(_))));
    }

    #[test]
    fn enumeration_order() {
        let f = f9();
        let all = f.enumerate();
        assert_eq!(all.len(), 9);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(f.coeffs(*a), vec![(i % 3) as u32, (i / 3) as u32]);
        }
        let f25 = build_field(5, 2).unwrap();
        let set: std::collections::HashSet<_> = f25.enumerate().into_iter().collect();
        assert_eq!(set.len(), 25);
    }

    #[test]
    fn rejects_reducible_modulus() {
        let spec = FieldSpec { p: 3, ext_deg: 2, modulus: vec![2, 0, 1], q_sub: Some(3) };
        assert!(Field::from_spec(spec).is_err());
    }

    #[test]
    fn spec_serializes_with_modulus() {
        let f = build_field(5, 2).unwrap();
        let s = serde_json::to_string(f.spec()).unwrap();
        assert_eq!(s, r#"{"p":5,"ext_deg":2,"modulus":[2,4,1],"q_sub":5}"#);
        let back: FieldSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(&back, f.spec());
    }
}

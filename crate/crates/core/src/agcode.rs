//! Evaluation codes on the curve `y^q + y = x^m` over `F_{q²}`.
//!
//! The main construction is the one-point code `C(D, s·P∞)`: every monomial
//! of `L(s·P∞)` is evaluated at all affine rational points. A code can also be
//! built from an arbitrary monomial set, which is how Hermitian self-orthogonal
//! subcodes of prescribed dimension are obtained.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{AffinePoint, CurveSpec, MonomialExponent};
use crate::error::{Error, Result};
use crate::gf::{Felt, Field, FieldSpec};
use crate::linalg::{self, Echelon};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCode {
    pub field: Field,
    pub curve: CurveSpec,
    /// `deg G` of the one-point divisor; for monomial subcodes, the largest pole
    /// order used. `None` for codes not given by evaluation (e.g. duals).
    pub s: Option<u32>,
    pub n: usize,
    pub k: usize,
    pub gen: Vec<Vec<Felt>>,
    pub points: Vec<AffinePoint>,
    /// Monomial of each generator row, when the code is an evaluation code.
    pub monomials: Option<Vec<MonomialExponent>>,
}

impl LinearCode {
    /// Designed distance `n − s` when meaningful.
    pub fn designed_distance(&self) -> Option<i64> {
        self.s.map(|s| self.n as i64 - s as i64)
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.field, &self.gen, self.n)
    }

    pub fn echelon(&self) -> Echelon<Felt> {
        linalg::rref(&self.field, &self.gen, self.n)
    }

    /// Whether the two codes span the same subspace.
    pub fn same_row_space(&self, other: &LinearCode) -> bool {
        self.n == other.n && linalg::row_space_eq(&self.field, &self.gen, &other.gen, self.n)
    }

    /// Whether every row of `self` is Euclidean-orthogonal to every row of `other`.
    pub fn euclidean_orthogonal_to(&self, other: &LinearCode) -> bool {
        let f = &self.field;
        self.gen.iter().all(|a| other.gen.iter().all(|b| dot(f, a, b).is_zero()))
    }
}

fn dot(f: &Field, a: &[Felt], b: &[Felt]) -> Felt {
    a.iter().zip(b).fold(Felt::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// `⟨a, b⟩_H = Σ a_i · b_i^q`.
pub fn hermitian_product(f: &Field, a: &[Felt], b: &[Felt]) -> Result<Felt> {
    let mut acc = Felt::ZERO;
    for (&x, &y) in a.iter().zip(b) {
        acc = f.add(acc, f.mul(x, f.conj_q(y)?));
    }
    Ok(acc)
}

fn points_for(curve: &CurveSpec, field: &Field) -> Result<Vec<AffinePoint>> {
    curve.enumerate_affine_points(field)
}

/// `C(D, s·P∞)` with `D` the sum of all affine rational points.
pub fn build_one_point_code(curve: &CurveSpec, field: &Field, s: u32) -> Result<LinearCode> {
    let points = points_for(curve, field)?;
    let n = points.len();
    let limit = n + 2 * curve.genus() as usize;
    if s as usize >= limit {
        return Err(Error::validation(format!("s = {s} must be below n + 2g = {limit}")));
    }
    let basis = curve.monomial_basis(s as i64);
    let mut code = from_monomials(curve, field, points, &basis)?;
    code.s = Some(s);
    Ok(code)
}

/// Evaluation code spanned by an explicit monomial set. Rows dependent on
/// earlier ones (possible once pole orders reach `n`) are dropped.
pub fn build_monomial_code(curve: &CurveSpec, field: &Field, monomials: &[MonomialExponent]) -> Result<LinearCode> {
    let points = points_for(curve, field)?;
    let mut code = from_monomials(curve, field, points, monomials)?;
    code.s = Some(monomials.iter().map(|e| curve.pole_order(*e)).max().unwrap_or(0));
    Ok(code)
}

fn evaluate(field: &Field, points: &[AffinePoint], e: MonomialExponent) -> Vec<Felt> {
    points.iter().map(|p| e.eval(field, p)).collect()
}

fn from_monomials(
    curve: &CurveSpec,
    field: &Field,
    points: Vec<AffinePoint>,
    monomials: &[MonomialExponent],
) -> Result<LinearCode> {
    let n = points.len();
    let rows: Vec<Vec<Felt>> = monomials.iter().map(|&e| evaluate(field, &points, e)).collect();
    let keep = linalg::independent_rows(field, &rows, n);
    let gen: Vec<Vec<Felt>> = keep.iter().map(|&i| rows[i].clone()).collect();
    let used: Vec<MonomialExponent> = keep.iter().map(|&i| monomials[i]).collect();
    Ok(LinearCode { field: field.clone(), curve: *curve, s: None, n, k: gen.len(), gen, points, monomials: Some(used) })
}

/// Euclidean dual, as the nullspace of the generator matrix.
pub fn dual_code(c: &LinearCode) -> LinearCode {
    let gen = c.echelon().nullspace(&c.field);
    LinearCode {
        field: c.field.clone(),
        curve: c.curve,
        s: None,
        n: c.n,
        k: gen.len(),
        gen,
        points: c.points.clone(),
        monomials: None,
    }
}

/// True iff all Hermitian inner products of generator rows vanish.
pub fn is_hermitian_self_orthogonal(c: &LinearCode) -> Result<bool> {
    if c.field.q_sub().is_none() {
        return Err(Error::config("Hermitian self-orthogonality needs a quadratic extension field"));
    }
    for a in &c.gen {
        for b in &c.gen {
            if !hermitian_product(&c.field, a, b)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Finds the lexicographically first (in pole order) set of `k` monomials
/// whose evaluations are pairwise Hermitian-orthogonal and linearly
/// independent. Candidates are `x^i y^j` with `i < q²`, `j < q`.
///
/// For `k` up to the largest self-orthogonal one-point dimension this returns
/// exactly the one-point basis.
pub fn find_hermitian_so_monomials(
    curve: &CurveSpec,
    field: &Field,
    k: usize,
    node_budget: u64,
) -> Result<Option<Vec<MonomialExponent>>> {
    let points = points_for(curve, field)?;
    let n = points.len();
    let cands = curve.reduced_monomials();
    let evals: Vec<Vec<Felt>> = cands.iter().map(|&e| evaluate(field, &points, e)).collect();
    let m = cands.len();
    let compat: Vec<Vec<bool>> = (0..m)
        .into_par_iter()
        .map(|a| {
            (0..m)
                .map(|b| hermitian_product(field, &evals[a], &evals[b]).map(|h| h.is_zero()).unwrap_or(false))
                .collect()
        })
        .collect();
    let usable: Vec<usize> = (0..m).filter(|&a| compat[a][a]).collect();

    struct Search<'a> {
        field: &'a Field,
        evals: &'a [Vec<Felt>],
        compat: &'a [Vec<bool>],
        usable: &'a [usize],
        k: usize,
        n: usize,
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn dfs(&mut self, chosen: &mut Vec<usize>, ech: &Echelon<Felt>, from: usize) -> Result<bool> {
            if chosen.len() == self.k {
                return Ok(true);
            }
            for pos in from..self.usable.len() {
                if self.usable.len() - pos < self.k - chosen.len() {
                    break;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::Budget { needed: self.nodes as u128, budget: self.budget as u128 });
                }
                let c = self.usable[pos];
                if !chosen.iter().all(|&d| self.compat[c][d]) {
                    continue;
                }
                let mut next = ech.clone();
                if !next.insert(self.field, &self.evals[c]) {
                    continue;
                }
                chosen.push(c);
                if self.dfs(chosen, &next, pos + 1)? {
                    return Ok(true);
                }
                chosen.pop();
            }
            Ok(false)
        }
    }

    let mut search =
        Search { field, evals: &evals, compat: &compat, usable: &usable, k, n, nodes: 0, budget: node_budget };
    let mut chosen = Vec::new();
    let start = Echelon { rows: Vec::new(), pivots: Vec::new(), ncols: search.n };
    if search.dfs(&mut chosen, &start, 0)? {
        Ok(Some(chosen.into_iter().map(|i| cands[i]).collect()))
    } else {
        Ok(None)
    }
}

/// Exact minimum distance by enumerating all `|F|^k − 1` nonzero codewords.
///
/// Returns `Ok(None)` for the zero code.
pub fn min_distance_exact(c: &LinearCode, budget: u128) -> Result<Option<usize>> {
    let f = &c.field;
    let needed = (f.order() as u128).checked_pow(c.k as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    if c.k == 0 {
        return Ok(None);
    }
    let p = f.p() as u8;
    let d = f.spec().ext_deg as usize;
    let n = c.n;
    // F_p-generators: every row times every power of β, as coefficient vectors.
    let mut gens: Vec<Vec<u8>> = Vec::with_capacity(c.k * d);
    for row in &c.gen {
        let mut scaled = row.clone();
        for t in 0..d {
            if t > 0 {
                scaled = scaled.iter().map(|&x| f.mul(x, f.from_coeffs(&[0, 1]))).collect();
            }
            gens.push(scaled.iter().flat_map(|&x| f.coeffs(x).into_iter().map(|v| v as u8)).collect());
        }
    }
    let digits = gens.len();
    // Parallelise over the top digits.
    let top = digits.min(((64f64).ln() / (p as f64).ln()).ceil() as usize);
    let low = digits - top;
    let chunks = (p as u64).pow(top as u32);
    let best = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut word = vec![0u8; n * d];
            let mut rest = chunk;
            for g in &gens[low..] {
                let digit = (rest % p as u64) as u8;
                rest /= p as u64;
                for (w, &x) in word.iter_mut().zip(g) {
                    *w = ((*w as u16 + digit as u16 * x as u16) % p as u16) as u8;
                }
            }
            let weight = |w: &[u8]| w.chunks(d).filter(|sym| sym.iter().any(|&v| v != 0)).count();
            let mut best = if chunk == 0 { usize::MAX } else { weight(&word) };
            let mut counter = vec![0u8; low];
            loop {
                // odometer step: each digit change is +1, i.e. add its generator
                let mut pos = 0;
                loop {
                    if pos == low {
                        return best;
                    }
                    for (w, &x) in word.iter_mut().zip(&gens[pos]) {
                        *w = (*w + x) % p;
                    }
                    counter[pos] += 1;
                    if counter[pos] == p {
                        counter[pos] = 0;
                        pos += 1;
                    } else {
                        break;
                    }
                }
                best = best.min(weight(&word));
            }
        })
        .min()
        .unwrap_or(usize::MAX);
    Ok(Some(best))
}

/// Published closed-form parameter expressions, evaluated literally. These
/// are used for audit tables only; codes are never built from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublishedFormulas {
    pub q: i64,
    pub r: i64,
    /// `#{(i, j) : i ≥ 0, 0 ≤ j ≤ q−1, i·q + j·(q−1) ≤ r}`
    pub t: i64,
    /// `(case number, k_r)` for every dimension case whose range contains `r`.
    pub k_cases: Vec<(u8, i64)>,
    /// `q³ − r(q² − q + 1)`
    pub designed_d: i64,
    /// `[[q³, q³ + q² − 3q − 2r, r + 2q − q²]]`
    pub quantum_params: (i64, i64, i64),
    /// `r ≤ q² + q − 3`
    pub so_by_theorem: bool,
    /// `2r ≤ q³ + q² − 3q`
    pub so_by_dual_bound: bool,
}

fn t_count(q: i64, r: i64) -> i64 {
    if r < 0 {
        return 0;
    }
    (0..q).filter(|j| j * (q - 1) <= r).map(|j| (r - j * (q - 1)) / q + 1).sum()
}

pub fn published_formulas(q: i64, r: i64) -> PublishedFormulas {
    let q2 = q * q;
    let q3 = q2 * q;
    let mut k_cases = Vec::new();
    if r < 0 {
        k_cases.push((1, 0));
    }
    if (0..=q2 - 3 * q).contains(&r) {
        k_cases.push((2, t_count(q, r)));
    }
    if r > q2 - 3 * q && r < q3 {
        k_cases.push((3, r * (q2 - q + 1) - (q - 1) * (q - 2) / 2));
    }
    if (q3..=q3 + q2 - 3 * q).contains(&r) {
        k_cases.push((4, q3 - t_count(q, q3 + q2 - 3 * q - r)));
    }
    if r > q3 - q2 - 3 * q {
        k_cases.push((5, q3));
    }
    PublishedFormulas {
        q,
        r,
        t: t_count(q, r),
        k_cases,
        designed_d: q3 - r * (q2 - q + 1),
        quantum_params: (q3, q3 + q2 - 3 * q - 2 * r, r + 2 * q - q2),
        so_by_theorem: r <= q2 + q - 3,
        so_by_dual_bound: 2 * r <= q3 + q2 - 3 * q,
    }
}

/// The `r` range of the quantum-code theorem: `q² − 2 ≤ r ≤ q² + q − 3`.
pub fn theorem_r_range(q: i64) -> std::ops::RangeInclusive<i64> {
    (q * q - 2)..=(q * q + q - 3)
}

/// The `r` values of the worked examples (`q = 3` and `q = 5`). For `q = 5`
/// these lie outside [`theorem_r_range`].
pub fn example_r_values(q: i64) -> Vec<i64> {
    match q {
        3 => (7..=9).collect(),
        5 => (18..=22).collect(),
        _ => Vec::new(),
    }
}

/// On-disk form of a [`LinearCode`]. Elements are canonical indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    pub p: u32,
    pub ext_deg: u32,
    pub modulus: Vec<u32>,
    pub q: u32,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    pub n: usize,
    pub k: usize,
    pub generator: Vec<Vec<usize>>,
    pub points: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monomials: Option<Vec<(u32, u32)>>,
}

impl CodeFile {
    pub fn from_code(c: &LinearCode) -> Self {
        let spec = c.field.spec();
        CodeFile {
            p: spec.p,
            ext_deg: spec.ext_deg,
            modulus: spec.modulus.clone(),
            q: c.curve.q,
            m: c.curve.m,
            s: c.s,
            n: c.n,
            k: c.k,
            generator: c.gen.iter().map(|r| r.iter().map(|x| x.index()).collect()).collect(),
            points: c.points.iter().map(|p| (p.x.index(), p.y.index())).collect(),
            monomials: c.monomials.as_ref().map(|ms| ms.iter().map(|e| (e.i, e.j)).collect()),
        }
    }

    pub fn to_code(&self) -> Result<LinearCode> {
        let q_sub = (self.ext_deg == 2).then_some(self.p);
        let field =
            Field::from_spec(FieldSpec { p: self.p, ext_deg: self.ext_deg, modulus: self.modulus.clone(), q_sub })?;
        let curve = CurveSpec::new(self.q, self.m)?;
        let elem = |i: usize| field.elem(i);
        let gen = self
            .generator
            .iter()
            .map(|r| r.iter().map(|&i| elem(i)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let points = self
            .points
            .iter()
            .map(|&(x, y)| Ok(AffinePoint { x: elem(x)?, y: elem(y)? }))
            .collect::<Result<Vec<_>>>()?;
        if points.len() != self.n || gen.len() != self.k || gen.iter().any(|r| r.len() != self.n) {
            return Err(Error::validation("code file dimensions are inconsistent"));
        }
        let code = LinearCode {
            field,
            curve,
            s: self.s,
            n: self.n,
            k: self.k,
            gen,
            points,
            monomials: self.monomials.as_ref().map(|ms| ms.iter().map(|&(i, j)| MonomialExponent { i, j }).collect()),
        };
        if code.rank() != code.k {
            return Err(Error::validation("generator matrix is not of full rank"));
        }
        Ok(code)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(self).expect("code file serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }
}

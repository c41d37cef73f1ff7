//! Qudit stabilizer codes over a prime field `F_q` in symplectic form.
//!
//! A Pauli operator `X^a Z^b` on `n` qudits is the exponent pair `(a | b)`.
//! Two operators commute iff their symplectic product
//! `Σ_j (u.x[j]·v.z[j] − u.z[j]·v.x[j])` vanishes mod `q`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agcode::{is_hermitian_self_orthogonal, LinearCode};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon, FieldArith, Zq};

/// Exponent vectors of a Pauli operator `X^x Z^z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliVec {
    pub x: Vec<u8>,
    pub z: Vec<u8>,
}

impl PauliVec {
    pub fn identity(n: usize) -> Self {
        PauliVec { x: vec![0; n], z: vec![0; n] }
    }

    /// `X^a Z^b` on qudit `j`, identity elsewhere.
    pub fn single(n: usize, j: usize, a: u8, b: u8) -> Self {
        let mut p = Self::identity(n);
        p.x[j] = a;
        p.z[j] = b;
        p
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(&a, &b)| a != 0 || b != 0).count()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&v| v == 0)
    }

    /// Exponent-wise sum mod `q`.
    pub fn add_assign(&mut self, q: u8, other: &PauliVec) {
        let f = Zq(q);
        for (a, &b) in self.x.iter_mut().zip(&other.x) {
            *a = f.add(*a, b);
        }
        for (a, &b) in self.z.iter_mut().zip(&other.z) {
            *a = f.add(*a, b);
        }
    }

    pub fn scaled(&self, q: u8, c: u8) -> PauliVec {
        let f = Zq(q);
        PauliVec { x: self.x.iter().map(|&a| f.mul(a, c)).collect(), z: self.z.iter().map(|&a| f.mul(a, c)).collect() }
    }

    /// `(x | z)` as one vector of length `2n`.
    pub fn to_symplectic(&self) -> Vec<u8> {
        self.x.iter().chain(&self.z).copied().collect()
    }

    pub fn from_symplectic(v: &[u8]) -> Self {
        let n = v.len() / 2;
        PauliVec { x: v[..n].to_vec(), z: v[n..].to_vec() }
    }
}

pub fn symplectic_product(q: u8, u: &PauliVec, v: &PauliVec) -> Result<u8> {
    if u.len() != v.len() {
        return Err(Error::validation(format!("length mismatch: {} vs {}", u.len(), v.len())));
    }
    Ok(symplectic_unchecked(q, u, v))
}

fn symplectic_unchecked(q: u8, u: &PauliVec, v: &PauliVec) -> u8 {
    let mut acc: u32 = 0;
    let qq = q as u32;
    for j in 0..u.len() {
        acc += u.x[j] as u32 * v.z[j] as u32 + (qq - u.z[j] as u32) * v.x[j] as u32;
    }
    (acc % qq) as u8
}

/// Stabilizer measurement outcomes, one per check, in `F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Syndrome(pub Vec<u8>);

impl Syndrome {
    pub fn zeros(len: usize) -> Self {
        Syndrome(vec![0; len])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Number of nonzero components.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&v| v != 0).count()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualClass {
    Identity,
    Stabilizer,
    Logical,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerCode {
    q: u8,
    n: usize,
    k_q: usize,
    checks: Vec<PauliVec>,
    logicals: Vec<PauliVec>,
    check_echelon: Echelon<u8>,
    /// `x_cols[j]` is the syndrome of `X` on qudit `j`; likewise `z_cols`.
    x_cols: Vec<Vec<u8>>,
    z_cols: Vec<Vec<u8>>,
}

impl StabilizerCode {
    /// Builds a code from independent, pairwise commuting checks; logical
    /// operators are derived by symplectic Gram–Schmidt.
    pub fn new(q: u8, n: usize, checks: Vec<PauliVec>) -> Result<Self> {
        validate_q(q)?;
        for c in &checks {
            if c.len() != n || c.x.iter().chain(&c.z).any(|&v| v >= q) {
                return Err(Error::validation("check row has wrong length or entries outside [0, q)"));
            }
        }
        check_commuting(q, &checks)?;
        let f = Zq(q);
        let rows: Vec<Vec<u8>> = checks.iter().map(PauliVec::to_symplectic).collect();
        let check_echelon = linalg::rref(&f, &rows, 2 * n);
        if check_echelon.rank() != checks.len() {
            return Err(Error::validation(format!(
                "checks are dependent: rank {} of {} rows",
                check_echelon.rank(),
                checks.len()
            )));
        }
        let k_q = n - checks.len();
        let logicals = logical_basis(q, n, &checks, &check_echelon)?;
        let (x_cols, z_cols) = columns(q, n, &checks);
        Ok(StabilizerCode { q, n, k_q, checks, logicals, check_echelon, x_cols, z_cols })
    }

    /// Builds a code with externally supplied logical operators, validating
    /// their commutation relations.
    pub fn with_logicals(q: u8, n: usize, checks: Vec<PauliVec>, logicals: Vec<PauliVec>) -> Result<Self> {
        let mut code = Self::new(q, n, checks)?;
        if logicals.len() != 2 * code.k_q || logicals.iter().any(|l| l.len() != n) {
            return Err(Error::validation("need 2·k_q logical operators of length n"));
        }
        for l in &logicals {
            if code.checks.iter().any(|c| symplectic_unchecked(q, c, l) != 0) {
                return Err(Error::validation("logical operator does not commute with the checks"));
            }
        }
        for (a, la) in logicals.iter().enumerate() {
            for (b, lb) in logicals.iter().enumerate() {
                let want = if a / 2 == b / 2 && a % 2 == 0 && b == a + 1 {
                    1
                } else if a / 2 == b / 2 && a % 2 == 1 && a == b + 1 {
                    q - 1
                } else {
                    0
                };
                if symplectic_unchecked(q, la, lb) != want {
                    return Err(Error::validation("logical operators are not a canonical symplectic basis"));
                }
            }
        }
        code.logicals = logicals;
        Ok(code)
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_q(&self) -> usize {
        self.k_q
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn checks(&self) -> &[PauliVec] {
        &self.checks
    }

    pub fn logicals(&self) -> &[PauliVec] {
        &self.logicals
    }

    /// Syndrome of `X^1` on qudit `j`.
    pub fn x_column(&self, j: usize) -> &[u8] {
        &self.x_cols[j]
    }

    /// Syndrome of `Z^1` on qudit `j`.
    pub fn z_column(&self, j: usize) -> &[u8] {
        &self.z_cols[j]
    }

    pub fn syndrome(&self, e: &PauliVec) -> Syndrome {
        let f = Zq(self.q);
        let mut s = vec![0u8; self.checks.len()];
        for j in 0..self.n {
            let (a, b) = (e.x[j], e.z[j]);
            if a != 0 {
                for (si, &c) in s.iter_mut().zip(&self.x_cols[j]) {
                    *si = f.add(*si, f.mul(a, c));
                }
            }
            if b != 0 {
                for (si, &c) in s.iter_mut().zip(&self.z_cols[j]) {
                    *si = f.add(*si, f.mul(b, c));
                }
            }
        }
        Syndrome(s)
    }

    /// Whether `v` lies in the stabilizer group (row space of the checks).
    pub fn in_stabilizer_group(&self, v: &PauliVec) -> bool {
        self.check_echelon.contains(&Zq(self.q), &v.to_symplectic())
    }

    pub fn classify_residual(&self, r: &PauliVec) -> ResidualClass {
        if r.is_identity() {
            ResidualClass::Identity
        } else if !self.syndrome(r).is_zero() {
            ResidualClass::Unresolved
        } else if self.in_stabilizer_group(r) {
            ResidualClass::Stabilizer
        } else {
            ResidualClass::Logical
        }
    }

    /// Verifies every invariant of the code; used by `code verify`.
    pub fn validate(&self) -> Result<()> {
        check_commuting(self.q, &self.checks)?;
        Self::with_logicals(self.q, self.n, self.checks.clone(), self.logicals.clone()).map(|_| ())
    }
}

fn validate_q(q: u8) -> Result<()> {
    if q < 2 || (2..q).any(|d| q.is_multiple_of(d)) {
        return Err(Error::validation(format!("q = {q} must be prime")));
    }
    Ok(())
}

fn check_commuting(q: u8, checks: &[PauliVec]) -> Result<()> {
    for (i, a) in checks.iter().enumerate() {
        for b in &checks[i + 1..] {
            if symplectic_unchecked(q, a, b) != 0 {
                return Err(Error::validation(format!("check {i} does not commute with a later check")));
            }
        }
    }
    Ok(())
}

fn columns(q: u8, n: usize, checks: &[PauliVec]) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let f = Zq(q);
    // ⟨c, X_j⟩ = −c.z[j], ⟨c, Z_j⟩ = c.x[j]
    let x_cols = (0..n).map(|j| checks.iter().map(|c| f.neg(c.z[j])).collect()).collect();
    let z_cols = (0..n).map(|j| checks.iter().map(|c| c.x[j]).collect()).collect();
    (x_cols, z_cols)
}

/// Logical operators `[u1, v1, u2, v2, …]` with `⟨u_i, v_i⟩ = 1` and all other
/// pairs orthogonal, completing the checks to a basis of their normalizer.
fn logical_basis(q: u8, n: usize, checks: &[PauliVec], check_echelon: &Echelon<u8>) -> Result<Vec<PauliVec>> {
    let f = Zq(q);
    // v is in the normalizer iff (−c.z | c.x) · (v.x | v.z) = 0 for every check c
    let constraints: Vec<Vec<u8>> =
        checks.iter().map(|c| c.z.iter().map(|&v| f.neg(v)).chain(c.x.iter().copied()).collect()).collect();
    let normalizer = linalg::rref(&f, &constraints, 2 * n).nullspace(&f);
    let mut ech = check_echelon.clone();
    let mut pool: Vec<PauliVec> =
        normalizer.into_iter().filter(|v| ech.insert(&f, v)).map(|v| PauliVec::from_symplectic(&v)).collect();

    let mut out = Vec::with_capacity(pool.len());
    while !pool.is_empty() {
        let u = pool.remove(0);
        let Some(pos) = pool.iter().position(|w| symplectic_unchecked(q, &u, w) != 0) else {
            return Err(Error::Internal("normalizer complement is degenerate".into()));
        };
        let w = pool.remove(pos);
        let scale = f.inv(symplectic_unchecked(q, &u, &w));
        let v = w.scaled(q, scale);
        for w in pool.iter_mut() {
            // w ← w − ⟨w, v⟩·u + ⟨w, u⟩·v
            let a = symplectic_unchecked(q, w, &v);
            let b = symplectic_unchecked(q, w, &u);
            w.add_assign(q, &u.scaled(q, f.neg(a)));
            w.add_assign(q, &v.scaled(q, b));
        }
        out.push(u);
        out.push(v);
    }
    Ok(out)
}

/// Stabilizer code of a Hermitian self-orthogonal code `C ⊆ F_{q²}^n`.
///
/// Each generator `c` and its multiple `β·c` are expanded over the basis
/// `{1, β}` as `c = a + β·b ↦ (a | b)`. Since
/// `u·v̄ − ū·v = (β^q − β)·(a·d − b·c)` coordinatewise, Hermitian
/// self-orthogonality makes all expanded rows commute.
pub fn from_hermitian_so_code(c: &LinearCode) -> Result<StabilizerCode> {
    let f = &c.field;
    let Some(q) = f.q_sub() else {
        return Err(Error::config("stabilizer construction needs a code over F_{q²}"));
    };
    if !is_hermitian_self_orthogonal(c)? {
        return Err(Error::validation("code is not Hermitian self-orthogonal"));
    }
    let q = q as u8;
    let beta = f.beta();
    let expand = |row: &[crate::gf::Felt]| {
        let mut p = PauliVec::identity(c.n);
        for (j, &v) in row.iter().enumerate() {
            let co = f.coeffs(v);
            p.x[j] = co[0] as u8;
            p.z[j] = co[1] as u8;
        }
        p
    };
    let mut rows = Vec::with_capacity(2 * c.k);
    for g in &c.gen {
        rows.push(expand(g));
        let bg: Vec<_> = g.iter().map(|&v| f.mul(beta, v)).collect();
        rows.push(expand(&bg));
    }
    if let Err(e) = check_commuting(q, &rows) {
        return Err(Error::Internal(format!("expanded rows fail to commute: {e}")));
    }
    let sym: Vec<Vec<u8>> = rows.iter().map(PauliVec::to_symplectic).collect();
    let keep = linalg::independent_rows(&Zq(q), &sym, 2 * c.n);
    let checks: Vec<PauliVec> = keep.into_iter().map(|i| rows[i].clone()).collect();
    let code = StabilizerCode::new(q, c.n, checks)?;
    if code.k_q != c.n - 2 * c.k {
        return Err(Error::Internal(format!("k_q = {} but n − 2k = {}", code.k_q, c.n - 2 * c.k)));
    }
    Ok(code)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceReport {
    pub wmax: usize,
    /// Least weight of an operator classified logical, if any has weight ≤ wmax.
    pub verified_min_weight_logical: Option<usize>,
    pub witness: Option<PauliVec>,
    pub candidates: u128,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of Pauli operators of weight 1..=wmax.
pub fn low_weight_count(n: usize, q: u8, wmax: usize) -> u128 {
    let per = (q as u128).pow(2) - 1;
    (1..=wmax).map(|w| binomial(n, w) * per.pow(w as u32)).sum()
}

fn combinations(n: usize, w: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, w: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == w {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < w - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, w, &mut Vec::with_capacity(w), &mut out);
    out
}

/// Enumerates every Pauli of weight `≤ wmax` and returns the least weight of
/// one that commutes with all checks but is not a stabilizer. `None` means
/// the distance exceeds `wmax`.
pub fn distance_lower_bound(code: &StabilizerCode, wmax: usize, budget: u128) -> Result<DistanceReport> {
    let candidates = low_weight_count(code.n, code.q, wmax);
    if candidates > budget {
        return Err(Error::Budget { needed: candidates, budget });
    }
    let q = code.q;
    let f = Zq(q);
    let r = code.num_checks();
    // per-qudit syndromes of all q²−1 nontrivial single-qudit Paulis
    let paulis: Vec<(u8, u8)> = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).skip(1).collect();
    let table: Vec<Vec<Vec<u8>>> = (0..code.n)
        .map(|j| {
            paulis
                .iter()
                .map(|&(a, b)| {
                    (0..r).map(|i| f.add(f.mul(a, code.x_cols[j][i]), f.mul(b, code.z_cols[j][i]))).collect()
                })
                .collect()
        })
        .collect();
    for w in 1..=wmax {
        let supports = combinations(code.n, w);
        let found = supports.par_iter().find_map_first(|supp| {
            let mut choice = vec![0usize; w];
            let mut acc = vec![0u8; r];
            loop {
                acc.iter_mut().for_each(|v| *v = 0);
                for (&j, &c) in supp.iter().zip(&choice) {
                    for (a, &t) in acc.iter_mut().zip(&table[j][c]) {
                        *a = f.add(*a, t);
                    }
                }
                if acc.iter().all(|&v| v == 0) {
                    let mut e = PauliVec::identity(code.n);
                    for (&j, &c) in supp.iter().zip(&choice) {
                        (e.x[j], e.z[j]) = paulis[c];
                    }
                    if !code.in_stabilizer_group(&e) {
                        return Some(e);
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == w {
                        return None;
                    }
                    choice[pos] += 1;
                    if choice[pos] == paulis.len() {
                        choice[pos] = 0;
                        pos += 1;
                    } else {
                        break;
                    }
                }
            }
        });
        if let Some(e) = found {
            return Ok(DistanceReport { wmax, verified_min_weight_logical: Some(w), witness: Some(e), candidates });
        }
    }
    Ok(DistanceReport { wmax, verified_min_weight_logical: None, witness: None, candidates })
}

/// On-disk form of a [`StabilizerCode`]; rows are `(x | z)` exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerFile {
    pub q: u8,
    pub n: usize,
    pub k_q: usize,
    pub checks: Vec<Vec<u8>>,
    #[serde(default)]
    pub logicals: Vec<Vec<u8>>,
}

impl StabilizerFile {
    pub fn from_code(c: &StabilizerCode) -> Self {
        StabilizerFile {
            q: c.q,
            n: c.n,
            k_q: c.k_q,
            checks: c.checks.iter().map(PauliVec::to_symplectic).collect(),
            logicals: c.logicals.iter().map(PauliVec::to_symplectic).collect(),
        }
    }

    /// Validates commutation, rank and logical pairing. An empty logical list
    /// is filled in by symplectic Gram–Schmidt.
    pub fn to_code(&self) -> Result<StabilizerCode> {
        let n = self.n;
        if self.checks.iter().chain(&self.logicals).any(|r| r.len() != 2 * n) {
            return Err(Error::validation("every row must have length 2n"));
        }
        let checks: Vec<PauliVec> = self.checks.iter().map(|r| PauliVec::from_symplectic(r)).collect();
        let code = if self.logicals.is_empty() {
            StabilizerCode::new(self.q, n, checks)?
        } else {
            let logicals = self.logicals.iter().map(|r| PauliVec::from_symplectic(r)).collect();
            StabilizerCode::with_logicals(self.q, n, checks, logicals)?
        };
        if code.k_q != self.k_q {
            return Err(Error::validation(format!("k_q = {} but checks give {}", self.k_q, code.k_q)));
        }
        Ok(code)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(self).expect("stabilizer file serializes");
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

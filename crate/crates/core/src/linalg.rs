//! Dense Gaussian elimination over a finite field.
//!
//! Pivoting is fixed: columns are scanned left to right and the first row
//! (in current order) with a nonzero entry becomes the pivot. Results are
//! therefore reproducible bit for bit.

use std::fmt::Debug;

use crate::gf::{Felt, Field};

pub trait FieldArith {
    type Elem: Copy + Eq + Debug;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    /// Inverse of a nonzero element.
    fn inv(&self, a: Self::Elem) -> Self::Elem;

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }
}

impl FieldArith for Field {
    type Elem = Felt;

    fn zero(&self) -> Felt {
        Felt::ZERO
    }
    fn one(&self) -> Felt {
        Felt::ONE
    }
    fn add(&self, a: Felt, b: Felt) -> Felt {
        Field::add(self, a, b)
    }
    fn sub(&self, a: Felt, b: Felt) -> Felt {
        Field::sub(self, a, b)
    }
    fn mul(&self, a: Felt, b: Felt) -> Felt {
        Field::mul(self, a, b)
    }
    fn inv(&self, a: Felt) -> Felt {
        Field::inv(self, a).expect("pivot is nonzero")
    }
}

/// Integers modulo a prime `q < 256`, on raw `u8` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zq(pub u8);

impl Zq {
    #[inline]
    pub fn modulus(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }
}

impl FieldArith for Zq {
    type Elem = u8;

    fn zero(&self) -> u8 {
        0
    }
    fn one(&self) -> u8 {
        1
    }
    #[inline]
    fn add(&self, a: u8, b: u8) -> u8 {
        ((a as u16 + b as u16) % self.0 as u16) as u8
    }
    #[inline]
    fn sub(&self, a: u8, b: u8) -> u8 {
        ((a as u16 + self.0 as u16 - b as u16) % self.0 as u16) as u8
    }
    #[inline]
    fn mul(&self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.0 as u16) as u8
    }
    fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        (1..self.0).find(|&b| self.mul(a, b) == 1).expect("prime modulus")
    }
}

/// A matrix in reduced row-echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon<E> {
    pub rows: Vec<Vec<E>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl<E: Copy + Eq + Debug> Echelon<E> {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the echelon rows; the result is zero iff `v` lies in
    /// the row space.
    pub fn reduce<F: FieldArith<Elem = E>>(&self, f: &F, v: &[E]) -> Vec<E> {
        let mut out = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = out[pc];
            if !f.is_zero(c) {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = f.sub(*o, f.mul(c, r));
                }
            }
        }
        out
    }

    pub fn contains<F: FieldArith<Elem = E>>(&self, f: &F, v: &[E]) -> bool {
        self.reduce(f, v).iter().all(|&x| f.is_zero(x))
    }

    /// Adds `v` to the row space, keeping the reduced form. Returns false if
    /// `v` was already in the span.
    pub fn insert<F: FieldArith<Elem = E>>(&mut self, f: &F, v: &[E]) -> bool {
        let mut red = self.reduce(f, v);
        let Some(pc) = red.iter().position(|&x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(red[pc]);
        for x in red.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[pc];
            if !f.is_zero(c) {
                for (x, &r) in row.iter_mut().zip(&red) {
                    *x = f.sub(*x, f.mul(c, r));
                }
            }
        }
        let at = self.pivots.partition_point(|&p| p < pc);
        self.rows.insert(at, red);
        self.pivots.insert(at, pc);
        true
    }

    /// Basis of the right nullspace `{v : M·vᵀ = 0}`, one vector per free column
    /// in increasing column order.
    pub fn nullspace<F: FieldArith<Elem = E>>(&self, f: &F) -> Vec<Vec<E>> {
        let mut is_pivot = vec![false; self.ncols];
        for &pc in &self.pivots {
            is_pivot[pc] = true;
        }
        (0..self.ncols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![f.zero(); self.ncols];
                v[free] = f.one();
                for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                    v[pc] = f.sub(f.zero(), row[free]);
                }
                v
            })
            .collect()
    }
}

/// Reduced row-echelon form of `rows` (each of length `ncols`).
pub fn rref<F: FieldArith>(f: &F, rows: &[Vec<F::Elem>], ncols: usize) -> Echelon<F::Elem> {
    let mut m: Vec<Vec<F::Elem>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(piv) = (r..m.len()).find(|&i| !f.is_zero(m[i][c])) else {
            continue;
        };
        m.swap(r, piv);
        let inv = f.inv(m[r][c]);
        for x in m[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if f.is_zero(factor) {
                continue;
            }
            for (x, &p) in row.iter_mut().zip(&pivot_row) {
                *x = f.sub(*x, f.mul(factor, p));
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Echelon { rows: m, pivots, ncols }
}

pub fn rank<F: FieldArith>(f: &F, rows: &[Vec<F::Elem>], ncols: usize) -> usize {
    rref(f, rows, ncols).rank()
}

/// Indices of the rows that are linearly independent of all earlier rows.
pub fn independent_rows<F: FieldArith>(f: &F, rows: &[Vec<F::Elem>], ncols: usize) -> Vec<usize> {
    let mut ech = Echelon { rows: Vec::new(), pivots: Vec::new(), ncols };
    rows.iter().enumerate().filter(|(_, row)| ech.insert(f, row)).map(|(i, _)| i).collect()
}

/// Whether two matrices have the same row space.
pub fn row_space_eq<F: FieldArith>(f: &F, a: &[Vec<F::Elem>], b: &[Vec<F::Elem>], ncols: usize) -> bool {
    let ra = rref(f, a, ncols);
    let rb = rref(f, b, ncols);
    ra.rank() == rb.rank() && ra.rows == rb.rows
}

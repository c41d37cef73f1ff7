//! Greedy syndrome-weight descent with single-qudit pure Pauli powers.

use crate::linalg::{FieldArith, Zq};
use crate::stabilizer::{PauliVec, StabilizerCode, Syndrome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliKind {
    X,
    Z,
}

/// `X^exponent` or `Z^exponent` on one qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub qudit: usize,
    pub kind: PauliKind,
    pub exponent: u8,
}

impl Action {
    pub fn to_pauli(self, n: usize) -> PauliVec {
        match self.kind {
            PauliKind::X => PauliVec::single(n, self.qudit, self.exponent, 0),
            PauliKind::Z => PauliVec::single(n, self.qudit, 0, self.exponent),
        }
    }

    /// Adds this action to `c` in place (exponent-wise mod `q`).
    pub fn apply_to(self, q: u8, c: &mut PauliVec) {
        let f = Zq(q);
        let slot = match self.kind {
            PauliKind::X => &mut c.x[self.qudit],
            PauliKind::Z => &mut c.z[self.qudit],
        };
        *slot = f.add(*slot, self.exponent);
    }
}

/// All single-qudit pure powers, ordered by qudit, then X before Z, then
/// exponent ascending. Size `2(q−1)n`.
pub fn action_set(q: u8, n: usize) -> Vec<Action> {
    let mut out = Vec::with_capacity(2 * (q as usize - 1) * n);
    for qudit in 0..n {
        for kind in [PauliKind::X, PauliKind::Z] {
            for exponent in 1..q {
                out.push(Action { qudit, kind, exponent });
            }
        }
    }
    out
}

/// The action set of a code together with the syndrome of every action.
#[derive(Debug, Clone)]
pub struct ActionTable {
    q: u8,
    actions: Vec<Action>,
    syndromes: Vec<Vec<u8>>,
}

impl ActionTable {
    pub fn new(code: &StabilizerCode) -> Self {
        let q = code.q();
        let f = Zq(q);
        let actions = action_set(q, code.n());
        let syndromes = actions
            .iter()
            .map(|a| {
                let col = match a.kind {
                    PauliKind::X => code.x_column(a.qudit),
                    PauliKind::Z => code.z_column(a.qudit),
                };
                col.iter().map(|&c| f.mul(a.exponent, c)).collect()
            })
            .collect();
        ActionTable { q, actions, syndromes }
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn syndrome_len(&self) -> usize {
        self.syndromes.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Position of `a` in the action order.
    pub fn index_of(&self, a: Action) -> usize {
        let per = self.q as usize - 1;
        let kind = match a.kind {
            PauliKind::X => 0,
            PauliKind::Z => 1,
        };
        a.qudit * 2 * per + kind * per + a.exponent as usize - 1
    }

    /// Pure actions whose product is the inverse of `r`, in action order.
    pub fn inverse_actions(&self, r: &PauliVec) -> Vec<usize> {
        let f = Zq(self.q);
        let mut out = Vec::new();
        for j in 0..r.len() {
            for (kind, e) in [(PauliKind::X, r.x[j]), (PauliKind::Z, r.z[j])] {
                if e != 0 {
                    out.push(self.index_of(Action { qudit: j, kind, exponent: f.neg(e) }));
                }
            }
        }
        out
    }

    pub fn action(&self, idx: usize) -> Action {
        self.actions[idx]
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// State after applying action `idx`: `s + syndrome(action)`.
    pub fn apply(&self, s: &Syndrome, idx: usize) -> Syndrome {
        let f = Zq(self.q);
        Syndrome(s.0.iter().zip(&self.syndromes[idx]).map(|(&a, &b)| f.add(a, b)).collect())
    }

    fn weight_after(&self, s: &Syndrome, idx: usize) -> usize {
        let q = self.q as u16;
        s.0.iter().zip(&self.syndromes[idx]).filter(|(&a, &b)| !(a as u16 + b as u16).is_multiple_of(q)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOutcome {
    pub correction: PauliVec,
    pub residual: Syndrome,
    pub steps: usize,
}

/// Repeatedly applies the action with the largest strictly positive drop in
/// syndrome weight (first in action order on ties). Stops at the zero
/// syndrome, when no action helps, or after `max_iters` steps.
pub fn greedy_decode(table: &ActionTable, n: usize, s0: &Syndrome, max_iters: usize) -> GreedyOutcome {
    let mut s = s0.clone();
    let mut correction = PauliVec::identity(n);
    let mut steps = 0;
    while !s.is_zero() && steps < max_iters {
        let w = s.weight();
        let mut best: Option<(usize, usize)> = None;
        for idx in 0..table.len() {
            let after = table.weight_after(&s, idx);
            if after < w && best.is_none_or(|(_, b)| after < b) {
                best = Some((idx, after));
            }
        }
        let Some((idx, _)) = best else { break };
        s = table.apply(&s, idx);
        table.action(idx).apply_to(table.q, &mut correction);
        steps += 1;
    }
    GreedyOutcome { correction, residual: s, steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k13_code() -> StabilizerCode {
        crate::presets::qutrit_k13().unwrap()
    }

    #[test]
    fn action_set_sizes_and_order() {
        assert_eq!(action_set(3, 27).len(), 108);
        assert_eq!(action_set(2, 5).len(), 10);
        let a = action_set(3, 27);
        assert_eq!(a[0], Action { qudit: 0, kind: PauliKind::X, exponent: 1 });
        assert_eq!(a[1], Action { qudit: 0, kind: PauliKind::X, exponent: 2 });
        assert_eq!(a[2], Action { qudit: 0, kind: PauliKind::Z, exponent: 1 });
        assert_eq!(a[4], Action { qudit: 1, kind: PauliKind::X, exponent: 1 });
    }

    #[test]
    fn index_of_inverts_action_order() {
        let t = ActionTable::new(&k13_code());
        for (i, &a) in t.actions().iter().enumerate() {
            assert_eq!(t.index_of(a), i);
        }
        let mut r = PauliVec::single(27, 4, 1, 2);
        r.x[9] = 2;
        let inv = t.inverse_actions(&r);
        assert_eq!(inv.len(), 3);
        for idx in inv {
            t.action(idx).apply_to(3, &mut r);
        }
        assert!(r.is_identity());
    }

    #[test]
    fn zero_syndrome_is_left_alone() {
        let code = k13_code();
        let t = ActionTable::new(&code);
        let out = greedy_decode(&t, 27, &Syndrome::zeros(14), 54);
        assert_eq!(out.steps, 0);
        assert!(out.correction.is_identity());
    }

    #[test]
    fn every_pure_single_qudit_error_is_corrected() {
        let code = k13_code();
        let t = ActionTable::new(&code);
        for a in action_set(3, 27) {
            let e = a.to_pauli(27);
            let out = greedy_decode(&t, 27, &code.syndrome(&e), 54);
            assert!(out.residual.is_zero(), "{a:?}");
            let mut r = e.clone();
            r.add_assign(3, &out.correction);
            assert!(r.is_identity(), "{a:?}");
        }
    }

    #[test]
    fn some_weight_two_error_stalls() {
        let code = k13_code();
        let t = ActionTable::new(&code);
        let singles = action_set(3, 27);
        let stalled = singles.iter().enumerate().any(|(i, a)| {
            singles[i + 1..].iter().filter(|b| b.qudit != a.qudit).any(|b| {
                let mut e = a.to_pauli(27);
                e.add_assign(3, &b.to_pauli(27));
                !greedy_decode(&t, 27, &code.syndrome(&e), 54).residual.is_zero()
            })
        });
        assert!(stalled);
    }

    #[test]
    fn correction_explains_syndrome_change() {
        let code = k13_code();
        let t = ActionTable::new(&code);
        let f = Zq(3);
        for j in 0..27 {
            let e = PauliVec::single(27, j, 1, 2);
            let s0 = code.syndrome(&e);
            let out = greedy_decode(&t, 27, &s0, 54);
            // applied actions move the syndrome by their own syndrome
            let sc = code.syndrome(&out.correction);
            let expect: Vec<u8> = out.residual.0.iter().zip(&s0.0).map(|(&r, &s)| f.sub(r, s)).collect();
            assert_eq!(sc.0, expect);
            assert!(out.steps <= s0.weight());
        }
    }
}

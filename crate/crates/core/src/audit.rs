//! Audit tables: measured code parameters next to the published closed forms.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::agcode::{
    build_one_point_code, example_r_values, is_hermitian_self_orthogonal, min_distance_exact, published_formulas,
    theorem_r_range, LinearCode,
};
use crate::error::{Error, Result};
use crate::presets;
use crate::stabilizer::{distance_lower_bound, from_hermitian_so_code};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Match,
    Mismatch,
    Unverified,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Match => "MATCH",
            Status::Mismatch => "MISMATCH",
            Status::Unverified => "UNVERIFIED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistanceBound {
    Exact(usize),
    AtLeast(i64),
}

impl fmt::Display for DistanceBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceBound::Exact(d) => write!(f, "{d}"),
            DistanceBound::AtLeast(d) => write!(f, "≥{d}"),
        }
    }
}

/// One row of the one-point sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OnePointRow {
    pub s: u32,
    pub n: usize,
    pub k: usize,
    pub self_orthogonal: bool,
    pub distance: DistanceBound,
    /// `n − 2k` when self-orthogonal.
    pub quantum_k: Option<usize>,
    /// `s − 2g + 2`, a lower bound on the quantum distance from the dual code.
    pub quantum_d_bound: Option<i64>,
}

pub fn one_point_sweep(q: u32, s_min: u32, s_max: u32, distance_budget: u128) -> Result<Vec<OnePointRow>> {
    if s_min > s_max {
        return Err(Error::validation(format!("s-min {s_min} exceeds s-max {s_max}")));
    }
    let (curve, field) = presets::hermitian(q)?;
    let g = curve.genus() as i64;
    (s_min..=s_max)
        .map(|s| {
            let c = build_one_point_code(&curve, &field, s)?;
            let so = is_hermitian_self_orthogonal(&c)?;
            let distance = match min_distance_exact(&c, distance_budget) {
                Ok(Some(d)) => DistanceBound::Exact(d),
                Ok(None) => DistanceBound::AtLeast(c.n as i64 + 1),
                Err(Error::Budget { .. }) => DistanceBound::AtLeast((c.n as i64 - s as i64).max(1)),
                Err(e) => return Err(e),
            };
            Ok(OnePointRow {
                s,
                n: c.n,
                k: c.k,
                self_orthogonal: so,
                distance,
                quantum_k: so.then(|| c.n - 2 * c.k),
                quantum_d_bound: so.then_some(s as i64 - 2 * g + 2),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub q: u32,
    /// Largest `s` with a self-orthogonal one-point code.
    pub measured: Option<u32>,
    /// Whether self-orthogonality never reappears after first failing.
    pub monotone: bool,
    pub theorem_max: i64,
    pub theorem_status: Status,
    pub dual_bound_max: i64,
    pub dual_bound_status: Status,
}

pub fn threshold_report(q: u32) -> Result<ThresholdReport> {
    let (curve, field) = presets::hermitian(q)?;
    let n = q * q * q;
    let limit = n + 2 * curve.genus();
    let flags = (0..limit)
        .map(|s| is_hermitian_self_orthogonal(&build_one_point_code(&curve, &field, s)?))
        .collect::<Result<Vec<bool>>>()?;
    let first_fail = flags.iter().position(|&f| !f).unwrap_or(flags.len());
    let monotone = flags[first_fail..].iter().all(|&f| !f);
    let measured = first_fail.checked_sub(1).map(|s| s as u32);
    let qi = q as i64;
    let theorem_max = *theorem_r_range(qi).end();
    let dual_bound_max = (qi * qi * qi + qi * qi - 3 * qi) / 2;
    let status = |m: i64| if measured.map(i64::from) == Some(m) { Status::Match } else { Status::Mismatch };
    Ok(ThresholdReport {
        q,
        measured,
        monotone,
        theorem_max,
        theorem_status: status(theorem_max),
        dual_bound_max,
        dual_bound_status: status(dual_bound_max),
    })
}

/// A published `[[n, K, d]]_q` claim next to what the code construction gives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimRow {
    pub q: u32,
    pub r: i64,
    pub claimed: (i64, i64, i64),
    /// How the `K` was realized, or why it could not be.
    pub realizer: String,
    pub measured_n: Option<usize>,
    pub measured_k: Option<usize>,
    pub wmax: usize,
    /// Least logical weight found up to `wmax`; `None` means the distance exceeds `wmax`.
    pub min_logical_weight: Option<usize>,
    pub status: Status,
}

fn describe(c: &LinearCode) -> String {
    match (&c.monomials, c.s) {
        (Some(ms), Some(s)) if *ms == c.curve.monomial_basis(s as i64) => format!("one-point s={s}"),
        (Some(ms), _) => {
            let poles: Vec<String> = ms.iter().map(|e| c.curve.pole_order(*e).to_string()).collect();
            format!("monomial subcode, poles {{{}}}", poles.join(","))
        }
        _ => "unknown".into(),
    }
}

pub fn claim_rows(q: u32, wmax: usize, candidate_budget: u128) -> Result<Vec<ClaimRow>> {
    let (curve, field) = presets::hermitian(q)?;
    let mut rows = Vec::new();
    for r in example_r_values(q as i64) {
        let pf = published_formulas(q as i64, r);
        let (n, kq, d) = pf.quantum_params;
        let mut row = ClaimRow {
            q,
            r,
            claimed: (n, kq, d),
            realizer: String::new(),
            measured_n: None,
            measured_k: None,
            wmax,
            min_logical_weight: None,
            status: Status::Mismatch,
        };
        if kq < 0 || (n - kq) % 2 != 0 {
            row.realizer = "no classical dimension gives this K".into();
            rows.push(row);
            continue;
        }
        let k = ((n - kq) / 2) as usize;
        let code = match presets::so_code_of_dimension(&curve, &field, k) {
            Ok(c) => c,
            Err(Error::Validation(msg)) => {
                row.realizer = msg;
                rows.push(row);
                continue;
            }
            Err(e) => return Err(e),
        };
        row.realizer = describe(&code);
        let stab = from_hermitian_so_code(&code)?;
        row.measured_n = Some(stab.n());
        row.measured_k = Some(stab.k_q());
        let rep = distance_lower_bound(&stab, wmax, candidate_budget)?;
        row.min_logical_weight = rep.verified_min_weight_logical;
        let params_ok = stab.n() as i64 == n && stab.k_q() as i64 == kq;
        row.status = match rep.verified_min_weight_logical {
            _ if !params_ok => Status::Mismatch,
            Some(w) if w as i64 == d => Status::Match,
            Some(_) => Status::Mismatch,
            None if (wmax as i64) < d => Status::Unverified,
            None => Status::Mismatch,
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn render_one_point(q: u32, rows: &[OnePointRow]) -> String {
    let mut s = format!("one-point codes on y^{q} + y = x^{}, n = {}\n", q + 1, q * q * q);
    let _ = writeln!(s, "{:>4} {:>4} {:>4} {:>4} {:>6} {:>4} {:>8}", "s", "n", "k", "SO", "d", "K", "d_q >=");
    for r in rows {
        let opt = |v: Option<i64>| v.map_or("-".to_string(), |x| x.to_string());
        let _ = writeln!(
            s,
            "{:>4} {:>4} {:>4} {:>4} {:>6} {:>4} {:>8}",
            r.s,
            r.n,
            r.k,
            if r.self_orthogonal { "yes" } else { "no" },
            r.distance.to_string(),
            opt(r.quantum_k.map(|v| v as i64)),
            opt(r.quantum_d_bound),
        );
    }
    s
}

pub fn render_threshold(t: &ThresholdReport) -> String {
    let measured = t.measured.map_or("none".to_string(), |v| v.to_string());
    format!(
        "self-orthogonality threshold q={}: measured s <= {measured} (monotone: {})\n  \
         theorem bound r <= q^2+q-3 = {}: {}\n  \
         dual-containment bound 2r <= q^3+q^2-3q, r <= {}: {}\n",
        t.q,
        if t.monotone { "yes" } else { "no" },
        t.theorem_max,
        t.theorem_status,
        t.dual_bound_max,
        t.dual_bound_status,
    )
}

pub fn render_claims(rows: &[ClaimRow]) -> String {
    let mut s = String::from("published quantum parameters vs construction\n");
    for r in rows {
        let (n, k, d) = r.claimed;
        let measured = match (r.measured_n, r.measured_k) {
            (Some(mn), Some(mk)) => {
                let d = match r.min_logical_weight {
                    Some(w) => w.to_string(),
                    None => format!(">{}", r.wmax),
                };
                format!("[[{mn},{mk},{d}]]")
            }
            _ => "-".into(),
        };
        let _ = writeln!(
            s,
            "  q={} r={:>2}: claimed [[{n},{k},{d}]]_{}  measured {measured}  via {}  {}",
            r.q, r.r, r.q, r.realizer, r.status
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q3_sweep_rows() {
        let rows = one_point_sweep(3, 0, 10, 10_000_000).unwrap();
        assert_eq!(rows[0].k, 1);
        assert_eq!(rows[0].distance, DistanceBound::Exact(27));
        assert!(rows[7].self_orthogonal && !rows[8].self_orthogonal);
        assert_eq!(rows[7].quantum_k, Some(17));
        assert_eq!(rows[9].k, 7);
    }

    #[test]
    fn q3_threshold() {
        let t = threshold_report(3).unwrap();
        assert_eq!(t.measured, Some(7));
        assert!(t.monotone);
        assert_eq!((t.theorem_max, t.theorem_status), (9, Status::Mismatch));
        assert_eq!(t.dual_bound_max, 13);
    }
}

//! Monte Carlo estimation of decoder failure rates.
//!
//! Every trial draws its error from `trial_stream(seed, trial)`, so decoders
//! evaluated with the same seed see identical errors and the totals do not
//! depend on how trials are spread over threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{trial_stream, NoiseModel, NoiseRegistry};
use crate::decoder::Decoder;
use crate::error::{Error, Result};
use crate::stabilizer::{PauliVec, ResidualClass, StabilizerCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialResult {
    Success,
    LogicalFailure,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub result: TrialResult,
    pub greedy_steps: usize,
    pub rl_steps: usize,
    pub error_weight: usize,
    /// The greedy stage left a nonzero syndrome.
    pub greedy_stalled: bool,
}

impl TrialOutcome {
    pub fn failed(&self) -> bool {
        self.result != TrialResult::Success
    }
}

/// Decodes a given error and classifies the residual operator `e + correction`.
pub fn decode_error(code: &StabilizerCode, decoder: &dyn Decoder, e: &PauliVec) -> TrialOutcome {
    let out = decoder.decode(&code.syndrome(e));
    let mut r = e.clone();
    r.add_assign(code.q(), &out.correction);
    let result = match code.classify_residual(&r) {
        ResidualClass::Identity | ResidualClass::Stabilizer => TrialResult::Success,
        ResidualClass::Logical => TrialResult::LogicalFailure,
        ResidualClass::Unresolved => TrialResult::Unresolved,
    };
    debug_assert_eq!(result == TrialResult::Unresolved, !out.final_syndrome.is_zero());
    TrialOutcome {
        result,
        greedy_steps: out.greedy_steps,
        rl_steps: out.rl_steps,
        error_weight: e.weight(),
        greedy_stalled: !out.greedy_residual.is_zero(),
    }
}

pub fn run_trial(
    code: &StabilizerCode,
    decoder: &dyn Decoder,
    noise: &dyn NoiseModel,
    rng: &mut dyn rand::RngCore,
) -> TrialOutcome {
    let e = noise.sample_error(code.q(), code.n(), rng);
    decode_error(code, decoder, &e)
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).max(0.0).min(phat) };
    let hi = if failures == trials { 1.0 } else { (centre + half).min(1.0).max(phat) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub decoder: String,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SweepRow {
    pub fn new(p: f64, decoder: &str, trials: u64, failures: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials);
        SweepRow {
            p,
            decoder: decoder.to_string(),
            trials,
            failures,
            rate: failures as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    /// Whether the two 95% intervals are disjoint.
    pub fn separated_from(&self, other: &SweepRow) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Per-decoder counts from one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecoderTally {
    pub failures: u64,
    pub logical: u64,
    pub unresolved: u64,
    pub greedy_stalled: u64,
    /// Stalled trials whose syndrome the second stage brought to zero.
    pub rl_cleared: u64,
    /// Cleared trials that also ended in the stabilizer group.
    pub rl_cleared_success: u64,
    /// `rl_steps_hist[k]`: cleared trials that took `k` second-stage steps.
    pub rl_steps_hist: Vec<u64>,
}

impl DecoderTally {
    fn record(&mut self, o: &TrialOutcome) {
        match o.result {
            TrialResult::Success => {}
            TrialResult::LogicalFailure => self.logical += 1,
            TrialResult::Unresolved => self.unresolved += 1,
        }
        if o.failed() {
            self.failures += 1;
        }
        if o.greedy_stalled {
            self.greedy_stalled += 1;
            if o.result != TrialResult::Unresolved {
                self.rl_cleared += 1;
                if o.result == TrialResult::Success {
                    self.rl_cleared_success += 1;
                }
                if self.rl_steps_hist.len() <= o.rl_steps {
                    self.rl_steps_hist.resize(o.rl_steps + 1, 0);
                }
                self.rl_steps_hist[o.rl_steps] += 1;
            }
        }
    }

    fn merge(mut self, other: DecoderTally) -> DecoderTally {
        self.failures += other.failures;
        self.logical += other.logical;
        self.unresolved += other.unresolved;
        self.greedy_stalled += other.greedy_stalled;
        self.rl_cleared += other.rl_cleared;
        self.rl_cleared_success += other.rl_cleared_success;
        if self.rl_steps_hist.len() < other.rl_steps_hist.len() {
            self.rl_steps_hist.resize(other.rl_steps_hist.len(), 0);
        }
        for (a, b) in self.rl_steps_hist.iter_mut().zip(other.rl_steps_hist) {
            *a += b;
        }
        self
    }

    /// Lower median of second-stage steps over cleared trials.
    pub fn median_rl_steps(&self) -> Option<usize> {
        let total: u64 = self.rl_steps_hist.iter().sum();
        if total == 0 {
            return None;
        }
        let mut seen = 0;
        for (k, &c) in self.rl_steps_hist.iter().enumerate() {
            seen += c;
            if 2 * seen >= total {
                return Some(k);
            }
        }
        None
    }

    pub fn cleared_fraction(&self) -> Option<f64> {
        (self.greedy_stalled > 0).then(|| self.rl_cleared as f64 / self.greedy_stalled as f64)
    }
}

/// Several decoders run on the same error samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedEvaluation {
    pub rows: Vec<SweepRow>,
    pub tallies: Vec<DecoderTally>,
    /// Trials keyed by which decoders failed (bit `i` set: decoder `i` failed).
    /// Trials nobody failed are omitted.
    pub failure_patterns: BTreeMap<u32, u64>,
}

impl PairedEvaluation {
    /// Trials failed by decoder `i` but not by decoder `j`.
    pub fn failed_only_by(&self, i: usize, j: usize) -> u64 {
        self.failure_patterns.iter().filter(|(m, _)| *m & (1 << i) != 0 && *m & (1 << j) == 0).map(|(_, c)| c).sum()
    }

    pub fn failed_by_both(&self, i: usize, j: usize) -> u64 {
        let both = (1 << i) | (1 << j);
        self.failure_patterns.iter().filter(|(m, _)| *m & both == both).map(|(_, c)| c).sum()
    }
}

#[derive(Debug, Clone, Default)]
struct Acc {
    tallies: Vec<DecoderTally>,
    patterns: BTreeMap<u32, u64>,
}

impl Acc {
    fn new(k: usize) -> Self {
        Acc { tallies: vec![DecoderTally::default(); k], patterns: BTreeMap::new() }
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.tallies = self.tallies.into_iter().zip(other.tallies).map(|(a, b)| a.merge(b)).collect();
        for (m, c) in other.patterns {
            *self.patterns.entry(m).or_default() += c;
        }
        self
    }
}

pub fn evaluate_paired(
    code: &StabilizerCode,
    decoders: &[&dyn Decoder],
    noise: &dyn NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<PairedEvaluation> {
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    if decoders.is_empty() || decoders.len() > 32 {
        return Err(Error::validation("need between 1 and 32 decoders"));
    }
    let k = decoders.len();
    let acc = (0..trials)
        .into_par_iter()
        .fold(
            || Acc::new(k),
            |mut acc, t| {
                let e = noise.sample_error(code.q(), code.n(), &mut trial_stream(seed, t));
                let mut mask = 0u32;
                for (i, d) in decoders.iter().enumerate() {
                    let o = decode_error(code, *d, &e);
                    if o.failed() {
                        mask |= 1 << i;
                    }
                    acc.tallies[i].record(&o);
                }
                if mask != 0 {
                    *acc.patterns.entry(mask).or_default() += 1;
                }
                acc
            },
        )
        .reduce(|| Acc::new(k), Acc::merge);
    let rows = decoders
        .iter()
        .zip(&acc.tallies)
        .map(|(d, t)| SweepRow::new(noise.p(), d.name(), trials, t.failures))
        .collect();
    Ok(PairedEvaluation { rows, tallies: acc.tallies, failure_patterns: acc.patterns })
}

pub fn estimate_failure_rate(
    code: &StabilizerCode,
    decoder: &dyn Decoder,
    noise: &dyn NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<SweepRow> {
    Ok(evaluate_paired(code, &[decoder], noise, trials, seed)?.rows.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub seed: u64,
    pub evaluation: PairedEvaluation,
}

/// Paired evaluation at each `p`; point `i` uses seed `seed + i`.
pub fn sweep(
    code: &StabilizerCode,
    decoders: &[&dyn Decoder],
    noise_kind: &str,
    noise_registry: &NoiseRegistry,
    p_list: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if p_list.is_empty() {
        return Err(Error::validation("p list is empty"));
    }
    let models = p_list.iter().map(|&p| noise_registry.create(noise_kind, p)).collect::<Result<Vec<_>>>()?;
    models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let s = seed.wrapping_add(i as u64);
            Ok(SweepPoint { p: m.p(), seed: s, evaluation: evaluate_paired(code, decoders, m.as_ref(), trials, s)? })
        })
        .collect()
}

pub fn sweep_rows(points: &[SweepPoint]) -> Vec<SweepRow> {
    points.iter().flat_map(|pt| pt.evaluation.rows.iter().cloned()).collect()
}

/// Places where a decoder's rate drops as `p` grows, in row order.
pub fn monotonicity_flags(rows: &[SweepRow]) -> Vec<String> {
    let mut by_decoder: BTreeMap<&str, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        by_decoder.entry(&r.decoder).or_default().push(r);
    }
    let mut flags = Vec::new();
    for (name, mut rs) in by_decoder {
        rs.sort_by(|a, b| a.p.total_cmp(&b.p));
        for w in rs.windows(2) {
            if w[1].rate < w[0].rate {
                flags.push(format!(
                    "{name}: rate falls from {} at p={} to {} at p={}",
                    w[0].rate, w[0].p, w[1].rate, w[1].p
                ));
            }
        }
    }
    flags
}

pub fn csv_text(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()
        .map_err(|e| Error::format(origin, e))
}

pub fn write_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let text = csv_text(rows)?;
    std::fs::write(path.as_ref(), text).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_csv(&text, path.as_ref())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Failure rate against `p` on log–log axes, one polyline per decoder.
/// Zero rates are drawn on the bottom edge.
pub fn render_svg(rows: &[SweepRow]) -> String {
    let (w, h) = (800.0, 600.0);
    let (left, right, top, bottom) = (90.0, 170.0, 40.0, 70.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let ps: Vec<f64> = rows.iter().map(|r| r.p).filter(|&p| p > 0.0).collect();
    let rates: Vec<f64> = rows.iter().map(|r| r.rate).filter(|&v| v > 0.0).collect();
    let decade = |v: f64, up: bool| if up { v.log10().ceil() } else { v.log10().floor() };
    let (x0, mut x1) = match (ps.iter().copied().reduce(f64::min), ps.iter().copied().reduce(f64::max)) {
        (Some(a), Some(b)) => (decade(a, false), decade(b, true)),
        _ => (-3.0, 0.0),
    };
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let (y0, mut y1) = match (rates.iter().copied().reduce(f64::min), rates.iter().copied().reduce(f64::max)) {
        (Some(a), Some(b)) => (decade(a, false), decade(b, true).min(0.0)),
        _ => (-4.0, 0.0),
    };
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |p: f64| left + (p.log10() - x0) / (x1 - x0) * pw;
    let sy = |r: f64| if r <= 0.0 { top + ph } else { top + ph - (r.log10().max(y0) - y0) / (y1 - y0) * ph };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#);
    let _ = writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">1e{d}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    for d in (x0 as i32)..=(x1 as i32) {
        let x = sx(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{top}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/>"##, top + ph);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" font-size="12" text-anchor="middle">1e{d}</text>"#,
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">physical error probability p</text>"#,
        left + pw / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="24" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 24 {:.1})">decoding failure rate</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    let mut by_decoder: BTreeMap<&str, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.p > 0.0) {
        by_decoder.entry(&r.decoder).or_default().push(r);
    }
    for (i, (name, mut rs)) in by_decoder.into_iter().enumerate() {
        rs.sort_by(|a, b| a.p.total_cmp(&b.p));
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = rs.iter().map(|r| format!("{:.1},{:.1}", sx(r.p), sy(r.rate))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for r in &rs {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{colour}"/>"#, sx(r.p), sy(r.rate));
        }
        let ly = top + 20.0 + 22.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ =
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="13">{}</text>"#, lx + 30.0, ly + 4.0, xml_escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the SVG, then the CSV; a failure leaves no CSV behind.
pub fn write_sweep_outputs(rows: &[SweepRow], csv_path: &Path, svg_path: Option<&Path>) -> Result<()> {
    let csv = csv_text(rows)?;
    if let Some(path) = svg_path {
        std::fs::write(path, render_svg(rows)).map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(csv_path, csv).map_err(|e| Error::io(csv_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{UniformPauli, Xz3};
    use crate::decoder::GreedyDecoder;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.003_826).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4, "{lo} {hi}");
        assert_eq!(wilson_interval(7, 7).1, 1.0);
    }

    #[test]
    fn zero_noise_never_fails() {
        let code = crate::presets::qutrit_k13().unwrap();
        let g = GreedyDecoder::new(&code);
        let row = estimate_failure_rate(&code, &g, &Xz3::new(0.0).unwrap(), 1000, 1).unwrap();
        assert_eq!((row.failures, row.rate, row.ci_low), (0, 0.0, 0.0));
        assert!(row.ci_high > 0.0);
    }

    #[test]
    fn deterministic_and_thread_count_independent() {
        let code = crate::presets::qutrit_k13().unwrap();
        let g = GreedyDecoder::new(&code);
        let noise = UniformPauli::new(0.05).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| evaluate_paired(&code, &[&g, &g], &noise, 3000, 8).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(3));
        assert_eq!(a.rows[0].failures, a.rows[1].failures);
        assert_eq!(a.failed_only_by(0, 1), 0);
        assert_eq!(a.failed_by_both(0, 1), a.rows[0].failures);
    }

    #[test]
    fn row_invariants() {
        for (f, n) in [(0, 10), (3, 10), (10, 10), (1, 100_000)] {
            let r = SweepRow::new(0.01, "greedy", n, f);
            assert!(r.ci_low <= r.rate && r.rate <= r.ci_high);
            assert_eq!(r.rate, f as f64 / n as f64);
        }
    }

    #[test]
    fn csv_round_trip_and_svg_shape() {
        let rows = vec![
            SweepRow::new(0.005, "greedy", 1000, 41),
            SweepRow::new(0.005, "rl-on-greedy", 1000, 3),
            SweepRow::new(0.05, "greedy", 1000, 474),
            SweepRow::new(0.05, "rl-on-greedy", 1000, 0),
        ];
        let text = csv_text(&rows).unwrap();
        assert!(text.starts_with("p,decoder,trials,failures,rate,ci_low,ci_high\n"));
        assert_eq!(parse_csv(&text, Path::new("mem")).unwrap(), rows);
        let svg = render_svg(&rows);
        assert!(svg.contains(r#"width="800" height="600""#));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn monotonicity_flags_report_drops() {
        let rows = vec![SweepRow::new(0.01, "g", 100, 5), SweepRow::new(0.02, "g", 100, 3)];
        assert_eq!(monotonicity_flags(&rows).len(), 1);
        assert!(monotonicity_flags(&rows[..1]).is_empty());
    }

    #[test]
    fn unwritable_path_leaves_no_csv() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("out.csv");
        let svg = dir.path().join("missing").join("out.svg");
        let rows = vec![SweepRow::new(0.01, "g", 10, 1)];
        let err = write_sweep_outputs(&rows, &csv, Some(&svg)).unwrap_err();
        assert!(err.is_io());
        assert!(!csv.exists());
        let err = write_sweep_outputs(&rows, &dir.path().join("nope").join("x.csv"), None).unwrap_err();
        assert!(err.is_io());
    }
}

//! I.i.d. single-qudit noise models.
//!
//! Models are selected by name through a [`NoiseRegistry`]; both built-in
//! kinds leave a qudit untouched with probability `1 − p`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stabilizer::PauliVec;

/// Deterministic random stream for one trial: ChaCha8 keyed by the master
/// seed, with the trial index as stream id. Independent of execution order.
pub fn trial_stream(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

pub trait NoiseModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn p(&self) -> f64;

    /// Draws the error on one qudit as `(x exponent, z exponent)`.
    fn sample_qudit(&self, q: u8, rng: &mut dyn RngCore) -> (u8, u8);

    fn sample_error(&self, q: u8, n: usize, rng: &mut dyn RngCore) -> PauliVec {
        let mut e = PauliVec::identity(n);
        for j in 0..n {
            (e.x[j], e.z[j]) = self.sample_qudit(q, rng);
        }
        e
    }
}

fn check_p(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::validation(format!("error probability {p} outside [0, 1]")))
    }
}

/// Each qudit is hit with probability `p` by one of the `q² − 1` non-identity
/// Paulis, uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPauli {
    p: f64,
}

impl UniformPauli {
    pub fn new(p: f64) -> Result<Self> {
        Ok(UniformPauli { p: check_p(p)? })
    }
}

impl NoiseModel for UniformPauli {
    fn name(&self) -> &'static str {
        "uniform_pauli"
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn sample_qudit(&self, q: u8, rng: &mut dyn RngCore) -> (u8, u8) {
        if rng.random::<f64>() >= self.p {
            return (0, 0);
        }
        let idx = rng.random_range(1..(q as u16 * q as u16));
        ((idx / q as u16) as u8, (idx % q as u16) as u8)
    }
}

/// Each qudit is hit with probability `p`; the error is X-type, Z-type or
/// XZ-type with probability `p/3` each, nonzero exponents drawn uniformly
/// from `1..q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Xz3 {
    p: f64,
}

impl Xz3 {
    pub fn new(p: f64) -> Result<Self> {
        Ok(Xz3 { p: check_p(p)? })
    }
}

impl NoiseModel for Xz3 {
    fn name(&self) -> &'static str {
        "xz3"
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn sample_qudit(&self, q: u8, rng: &mut dyn RngCore) -> (u8, u8) {
        if rng.random::<f64>() >= self.p {
            return (0, 0);
        }
        let kind = rng.random_range(0..3u8);
        let mut exp = || rng.random_range(1..q);
        match kind {
            0 => (exp(), 0),
            1 => (0, exp()),
            _ => {
                let a = exp();
                (a, exp())
            }
        }
    }
}

pub type NoiseFactory = fn(f64) -> Result<Box<dyn NoiseModel>>;

/// Noise models by name.
pub struct NoiseRegistry {
    entries: BTreeMap<&'static str, NoiseFactory>,
}

impl NoiseRegistry {
    pub fn empty() -> Self {
        NoiseRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, name: &'static str, factory: NoiseFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn create(&self, name: &str, p: f64) -> Result<Box<dyn NoiseModel>> {
        let factory = self.entries.get(name).ok_or_else(|| {
            Error::validation(format!("unknown noise model '{name}' (known: {})", self.names().join(", ")))
        })?;
        factory(p)
    }
}

impl Default for NoiseRegistry {
    fn default() -> Self {
        let mut r = NoiseRegistry::empty();
        r.register("uniform_pauli", |p| Ok(Box::new(UniformPauli::new(p)?)));
        r.register("xz3", |p| Ok(Box::new(Xz3::new(p)?)));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: usize = 100_000;

    #[test]
    fn p_zero_never_errs() {
        let reg = NoiseRegistry::default();
        for name in reg.names() {
            let m = reg.create(name, 0.0).unwrap();
            let mut rng = trial_stream(1, 0);
            for _ in 0..100 {
                assert!(m.sample_error(3, 27, &mut rng).is_identity());
            }
        }
    }

    #[test]
    fn p_one_hits_every_qudit() {
        let m = UniformPauli::new(1.0).unwrap();
        let mut rng = trial_stream(2, 0);
        for _ in 0..100 {
            assert_eq!(m.sample_error(3, 27, &mut rng).weight(), 27);
        }
    }

    #[test]
    fn invalid_p_rejected() {
        assert!(Xz3::new(1.5).is_err());
        assert!(NoiseRegistry::default().create("bitflip", 0.1).is_err());
    }

    #[test]
    fn mean_weight_is_binomial() {
        let (n, p) = (27usize, 0.05);
        for name in ["uniform_pauli", "xz3"] {
            let m = NoiseRegistry::default().create(name, p).unwrap();
            let mut total = 0usize;
            for t in 0..SAMPLES {
                total += m.sample_error(3, n, &mut trial_stream(7, t as u64)).weight();
            }
            let mean = total as f64 / SAMPLES as f64;
            let sigma = (n as f64 * p * (1.0 - p) / SAMPLES as f64).sqrt();
            assert!((mean - 1.35).abs() <= 3.0 * sigma, "{name}: mean {mean}, σ {sigma}");
        }
    }

    #[test]
    fn per_qudit_marginal_and_xz3_types() {
        let p = 0.2;
        let m = Xz3::new(p).unwrap();
        let mut rng = trial_stream(11, 0);
        let mut counts = [0usize; 4];
        for _ in 0..SAMPLES {
            let (a, b) = m.sample_qudit(3, &mut rng);
            let t = match (a != 0, b != 0) {
                (false, false) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (true, true) => 3,
            };
            counts[t] += 1;
        }
        let nn = SAMPLES as f64;
        let hit = (nn - counts[0] as f64) / nn;
        let s_hit = (p * (1.0 - p) / nn).sqrt();
        assert!((hit - p).abs() <= 4.0 * s_hit);
        let pt = p / 3.0;
        let s_t = (pt * (1.0 - pt) / nn).sqrt();
        for c in &counts[1..] {
            assert!((*c as f64 / nn - pt).abs() <= 4.0 * s_t, "{counts:?}");
        }
    }

    #[test]
    fn uniform_pauli_covers_all_nontrivial_paulis() {
        let m = UniformPauli::new(1.0).unwrap();
        let mut rng = trial_stream(5, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            seen.insert(m.sample_qudit(3, &mut rng));
        }
        assert_eq!(seen.len(), 8);
        assert!(!seen.contains(&(0, 0)));
    }

    #[test]
    fn streams_are_reproducible() {
        let m = Xz3::new(0.1).unwrap();
        let a = m.sample_error(3, 27, &mut trial_stream(42, 9));
        let b = m.sample_error(3, 27, &mut trial_stream(42, 9));
        assert_eq!(a, b);
        let seq = |seed| (0..50).map(|t| m.sample_error(3, 27, &mut trial_stream(seed, t))).collect::<Vec<_>>();
        assert_eq!(seq(3), seq(3));
        assert_ne!(seq(3), seq(4));
    }
}

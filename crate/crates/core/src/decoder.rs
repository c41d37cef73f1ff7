//! Decoders behind a common trait, selected by name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::decoder_greedy::{greedy_decode, ActionTable};
use crate::decoder_rl::{rl_decode, QNetwork};
use crate::error::{Error, Result};
use crate::stabilizer::{PauliVec, StabilizerCode, Syndrome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub correction: PauliVec,
    /// Syndrome after all corrections; nonzero means the decoder gave up.
    pub final_syndrome: Syndrome,
    /// Syndrome left by the greedy stage.
    pub greedy_residual: Syndrome,
    pub greedy_steps: usize,
    pub rl_steps: usize,
}

pub trait Decoder: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn decode(&self, s0: &Syndrome) -> DecodeResult;
}

#[derive(Debug, Clone)]
pub struct GreedyDecoder {
    table: Arc<ActionTable>,
    n: usize,
    max_iters: usize,
}

impl GreedyDecoder {
    pub fn new(code: &StabilizerCode) -> Self {
        GreedyDecoder { table: Arc::new(ActionTable::new(code)), n: code.n(), max_iters: 2 * code.n() }
    }
}

impl Decoder for GreedyDecoder {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn decode(&self, s0: &Syndrome) -> DecodeResult {
        let g = greedy_decode(&self.table, self.n, s0, self.max_iters);
        DecodeResult {
            correction: g.correction,
            final_syndrome: g.residual.clone(),
            greedy_residual: g.residual,
            greedy_steps: g.steps,
            rl_steps: 0,
        }
    }
}

/// Greedy descent, then the Q-network policy on whatever syndrome remains.
#[derive(Debug, Clone)]
pub struct RlOnGreedyDecoder {
    greedy: GreedyDecoder,
    net: Arc<QNetwork>,
    max_steps: usize,
}

impl RlOnGreedyDecoder {
    pub fn new(code: &StabilizerCode, net: Arc<QNetwork>, max_steps: usize) -> Result<Self> {
        let greedy = GreedyDecoder::new(code);
        let want_in = code.num_checks() * code.q() as usize;
        if net.input_len() != want_in || net.output_len() != greedy.table.len() {
            return Err(Error::validation(format!(
                "model shape {:?} does not fit this code (need input {want_in}, output {})",
                net.layer_sizes(),
                greedy.table.len()
            )));
        }
        Ok(RlOnGreedyDecoder { greedy, net, max_steps })
    }
}

impl Decoder for RlOnGreedyDecoder {
    fn name(&self) -> &'static str {
        "rl-on-greedy"
    }

    fn decode(&self, s0: &Syndrome) -> DecodeResult {
        let mut out = self.greedy.decode(s0);
        if !out.final_syndrome.is_zero() {
            let q = self.greedy.table.q();
            let rl = rl_decode(&self.greedy.table, self.greedy.n, &self.net, &out.final_syndrome, self.max_steps);
            out.correction.add_assign(q, &rl.correction);
            out.final_syndrome = rl.final_syndrome;
            out.rl_steps = rl.steps;
        }
        out
    }
}

/// What a decoder factory may draw on.
#[derive(Debug, Clone, Copy)]
pub struct DecoderContext<'a> {
    pub code: &'a StabilizerCode,
    pub net: Option<&'a Arc<QNetwork>>,
    pub max_steps: usize,
}

pub type DecoderFactory = fn(&DecoderContext<'_>) -> Result<Box<dyn Decoder>>;

pub struct DecoderRegistry {
    entries: BTreeMap<&'static str, DecoderFactory>,
}

impl DecoderRegistry {
    pub fn empty() -> Self {
        DecoderRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, name: &'static str, factory: DecoderFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn create(&self, name: &str, ctx: &DecoderContext<'_>) -> Result<Box<dyn Decoder>> {
        let factory = self.entries.get(name).ok_or_else(|| {
            Error::validation(format!("unknown decoder '{name}' (known: {})", self.names().join(", ")))
        })?;
        factory(ctx)
    }
}

impl Default for DecoderRegistry {
    fn default() -> Self {
        let mut r = DecoderRegistry::empty();
        r.register("greedy", |ctx| Ok(Box::new(GreedyDecoder::new(ctx.code))));
        r.register("rl-on-greedy", |ctx| {
            let net = ctx.net.ok_or_else(|| Error::validation("decoder 'rl-on-greedy' needs a trained model"))?;
            Ok(Box::new(RlOnGreedyDecoder::new(ctx.code, Arc::clone(net), ctx.max_steps)?))
        });
        r
    }
}

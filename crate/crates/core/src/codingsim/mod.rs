//! Block random-coding simulations over fading networks, and erasure coding
//! for the broadcast superposition scheme.
//!
//! Every trial draws its fading states, message and coding functions from
//! streams keyed by `(seed, trial, ...)`, so reports do not depend on how
//! trials are spread across threads.

mod bc;
mod linear;
mod lookup;

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::network::NetworkSpec;
use crate::rng::{derive_seed, CounterStream};

pub use bc::{bc_payload_failure_rate, bc_superposition_sim, BcSimReport};

/// Largest message size, in bits, for the lookup scheme.
pub const MAX_LOOKUP_BITS: usize = 16;

/// Stream tags under `(seed, trial)`.
pub(crate) const TAG_FADING: u64 = 0;
pub(crate) const TAG_MESSAGE: u64 = 1;
pub(crate) const TAG_CODE: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Independent random functions, tabulated on demand; the destination
    /// tries every message.
    LookupRandom,
    /// Random GF(2) linear maps; the destination solves a linear system.
    LinearRandom,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lookup" | "lookup-random" => Ok(Self::LookupRandom),
            "linear" | "linear-random" => Ok(Self::LinearRandom),
            other => Err(invalid(format!(
                "unknown scheme '{other}' (lookup or linear)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LookupRandom => "lookup-random",
            Self::LinearRandom => "linear-random",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    /// Bits per timestep.
    pub rate: f64,
    /// Timesteps per block.
    pub block_len: usize,
    /// Blocks `B`; the message has `floor(n R B)` bits.
    pub blocks: usize,
    /// Extra blocks for the pipeline to drain.
    pub slack: usize,
    pub trials: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    /// `slack` defaults to the longest source-sink path.
    pub fn new(
        net: &NetworkSpec,
        rate: f64,
        block_len: usize,
        blocks: usize,
        trials: usize,
    ) -> Self {
        Self {
            rate,
            block_len,
            blocks,
            slack: net.longest_path_len(),
            trials,
            seed: 0,
            scheme: Scheme::LinearRandom,
        }
    }

    /// `floor(n R B)`.
    pub fn message_bits(&self) -> usize {
        (self.block_len as f64 * self.rate * self.blocks as f64 + 1e-9).floor() as usize
    }

    pub fn total_blocks(&self) -> usize {
        self.blocks + self.slack
    }

    /// `R B / (B + L)`.
    pub fn effective_rate(&self) -> f64 {
        self.rate * self.blocks as f64 / self.total_blocks() as f64
    }

    pub fn validate(&self, net: &NetworkSpec) -> Result<()> {
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(invalid(format!(
                "rate must be finite and >= 0, got {}",
                self.rate
            )));
        }
        if self.block_len == 0 || self.blocks == 0 || self.trials == 0 {
            return Err(invalid("block length, blocks and trials must be positive"));
        }
        let depth = net.longest_path_len();
        if depth == 0 {
            return Err(invalid("sink is not reachable from the source"));
        }
        if self.slack < depth {
            return Err(invalid(format!(
                "slack {} is shorter than the longest source-sink path {depth}",
                self.slack
            )));
        }
        if self.scheme == Scheme::LookupRandom {
            let nrb = self.block_len as f64 * self.rate * self.blocks as f64;
            if nrb > MAX_LOOKUP_BITS as f64 + 1e-9 {
                return Err(Error::TooLarge {
                    what: "lookup message space exponent n*R*B",
                    size: nrb.ceil() as u128,
                    limit: MAX_LOOKUP_BITS as u128,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub rate: f64,
    pub block_len: usize,
    pub blocks: usize,
    pub trials: usize,
    pub decode_errors: usize,
    pub error_rate: f64,
    /// Trials where some edge's empirical level frequencies strayed more than
    /// three standard deviations from its pmf.
    pub atypical_fading_flag_count: usize,
    pub effective_rate: f64,
}

/// Runs `cfg.trials` independent trials of the block coding scheme.
pub fn simulate_random_coding(net: &NetworkSpec, cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate(net)?;
    let outcomes: Vec<(bool, bool)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let fading = Fading::draw(net, cfg, trial);
            let ok = match cfg.scheme {
                Scheme::LinearRandom => linear::run_trial(net, cfg, &fading, trial),
                Scheme::LookupRandom => lookup::run_trial(net, cfg, &fading, trial),
            };
            (!ok, fading.is_atypical(net))
        })
        .collect();
    let decode_errors = outcomes.iter().filter(|o| o.0).count();
    Ok(SimReport {
        rate: cfg.rate,
        block_len: cfg.block_len,
        blocks: cfg.blocks,
        trials: cfg.trials,
        decode_errors,
        error_rate: decode_errors as f64 / cfg.trials as f64,
        atypical_fading_flag_count: outcomes.iter().filter(|o| o.1).count(),
        effective_rate: cfg.effective_rate(),
    })
}

/// Edge levels for every timestep of one trial, `levels[t * |E| + e]`.
pub(crate) struct Fading {
    edges: usize,
    levels: Vec<usize>,
}

impl Fading {
    fn draw(net: &NetworkSpec, cfg: &SimConfig, trial: u64) -> Self {
        let mut stream = CounterStream::new(derive_seed(cfg.seed, &[trial, TAG_FADING]));
        let e = net.edges().len();
        let steps = cfg.block_len * cfg.total_blocks();
        let levels = (0..steps * e)
            .map(|i| net.edges()[i % e].pmf.sample_with(stream.uniform(i as u64)))
            .collect();
        Self { edges: e, levels }
    }

    fn at(&self, t: usize) -> &[usize] {
        &self.levels[t * self.edges..(t + 1) * self.edges]
    }

    fn is_atypical(&self, net: &NetworkSpec) -> bool {
        let steps = self.levels.len() / self.edges.max(1);
        if steps == 0 {
            return false;
        }
        let n = steps as f64;
        net.edges().iter().enumerate().any(|(e, edge)| {
            let mut counts = vec![0usize; edge.pmf.max_level() + 1];
            for t in 0..steps {
                counts[self.levels[t * self.edges + e]] += 1;
            }
            counts.iter().enumerate().any(|(lvl, &c)| {
                let p = edge.pmf.prob(lvl);
                let sd = (n * p * (1.0 - p)).sqrt();
                (c as f64 - n * p).abs() > 3.0 * sd + 1e-9
            })
        })
    }
}

/// A received or transmitted bit, either concrete or as a linear form.
pub(crate) trait Symbol: Clone {
    fn xor_assign(&mut self, other: &Self);
}

impl Symbol for bool {
    fn xor_assign(&mut self, other: &Self) {
        *self ^= *other;
    }
}

impl Symbol for Vec<u64> {
    fn xor_assign(&mut self, other: &Self) {
        crate::gf2::xor_words(self, other);
    }
}

/// Runs the `B + L` block pipeline.
///
/// `encode(node, block, received)` returns the node's `n·l` transmitted
/// symbols for `block` (timestep-major, top level first), given everything it
/// received in the previous block. `observe` sees each symbol the sink
/// receives, in order, and may stop the run early.
pub(crate) fn run_pipeline<T: Symbol>(
    net: &NetworkSpec,
    cfg: &SimConfig,
    fading: &Fading,
    zero: &T,
    mut encode: impl FnMut(usize, usize, &[T]) -> Vec<T>,
    mut observe: impl FnMut(&T) -> ControlFlow<()>,
) {
    let nodes = net.nodes().len();
    let n = cfg.block_len;
    let in_edges: Vec<Vec<usize>> = (0..nodes)
        .map(|v| {
            (0..net.edges().len())
                .filter(|&e| net.edges()[e].to == v)
                .collect()
        })
        .collect();
    let mut received: Vec<Vec<T>> = vec![Vec::new(); nodes];
    for block in 0..cfg.total_blocks() {
        let tx: Vec<Vec<T>> = (0..nodes)
            .map(|v| {
                if v == net.sink() {
                    Vec::new()
                } else {
                    encode(v, block, &received[v])
                }
            })
            .collect();
        for r in received.iter_mut() {
            r.clear();
        }
        for t in 0..n {
            let levels = fading.at(block * n + t);
            for v in 0..nodes {
                let ins = &in_edges[v];
                let Some(m_hat) = ins.iter().map(|&e| levels[e]).max() else {
                    continue;
                };
                for i in 0..m_hat {
                    let mut bit = zero.clone();
                    for &e in ins {
                        let shift = m_hat - levels[e];
                        if i >= shift {
                            let from = net.edges()[e].from;
                            let l = net.nodes()[from].levels;
                            bit.xor_assign(&tx[from][t * l + i - shift]);
                        }
                    }
                    if v == net.sink() && observe(&bit).is_break() {
                        return;
                    }
                    received[v].push(bit);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    pub(crate) const LINE: &str = "\
node S levels=1
node A levels=1
node D levels=1
edge S A pmf=0:0.5,1:0.5
edge A D pmf=0:0.5,1:0.5
source S
sink D
";

    pub(crate) const DIAMOND: &str = "\
node S levels=2
node A levels=2
node B levels=2
node D levels=2
edge S A pmf=1:0.5,2:0.5
edge S B pmf=1:0.5,2:0.5
edge A D pmf=1:0.5,2:0.5
edge B D pmf=1:0.5,2:0.5
source S
sink D
";

    fn cfg(
        net: &NetworkSpec,
        rate: f64,
        n: usize,
        b: usize,
        trials: usize,
        scheme: Scheme,
    ) -> SimConfig {
        SimConfig {
            scheme,
            seed: 42,
            ..SimConfig::new(net, rate, n, b, trials)
        }
    }

    #[test]
    fn noiseless_pipe_decodes() {
        let net =
            parse_network("node S levels=2\nnode D levels=2\nedge S D pmf=2:1\nsource S\nsink D")
                .unwrap();
        let r =
            simulate_random_coding(&net, &cfg(&net, 2.0, 8, 4, 50, Scheme::LinearRandom)).unwrap();
        assert_eq!(r.decode_errors, 0);
        assert_eq!(r.atypical_fading_flag_count, 0);
        assert!((r.effective_rate - 2.0 * 4.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let net = parse_network(LINE).unwrap();
        let mut c = cfg(&net, 1.0, 8, 4, 1, Scheme::LookupRandom);
        assert!(matches!(
            simulate_random_coding(&net, &c),
            Err(Error::TooLarge { .. })
        ));
        c.scheme = Scheme::LinearRandom;
        c.slack = 1;
        assert!(simulate_random_coding(&net, &c).is_err());
        c.slack = 2;
        c.trials = 0;
        assert!(simulate_random_coding(&net, &c).is_err());
    }

    #[test]
    fn effective_rate_grows_with_blocks() {
        let net = parse_network(DIAMOND).unwrap();
        let rates: Vec<f64> = (1..20)
            .map(|b| cfg(&net, 1.5, 8, b, 1, Scheme::LinearRandom).effective_rate())
            .collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
        assert!(rates.iter().all(|&r| r < 1.5));
    }

    #[test]
    fn schemes_agree_on_line_network() {
        let net = parse_network(LINE).unwrap();
        for (rate, n, expect_ok) in [(0.125, 8, true), (1.0, 4, false)] {
            let lin =
                simulate_random_coding(&net, &cfg(&net, rate, n, 4, 40, Scheme::LinearRandom))
                    .unwrap();
            let look =
                simulate_random_coding(&net, &cfg(&net, rate, n, 4, 40, Scheme::LookupRandom))
                    .unwrap();
            for r in [&lin, &look] {
                if expect_ok {
                    assert!(r.error_rate <= 0.2, "{r:?}");
                } else {
                    assert!(r.error_rate >= 0.8, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let net = parse_network(DIAMOND).unwrap();
        let c = cfg(&net, 1.7, 16, 4, 24, Scheme::LinearRandom);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_random_coding(&net, &c).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn atypical_flag_catches_skewed_draws() {
        let net = parse_network(LINE).unwrap();
        let c = cfg(&net, 0.1, 64, 4, 1, Scheme::LinearRandom);
        let mut f = Fading::draw(&net, &c, 0);
        // exactly balanced levels on both edges
        for (i, l) in f.levels.iter_mut().enumerate() {
            *l = i / 2 % 2;
        }
        assert!(!f.is_atypical(&net));
        f.levels.iter_mut().for_each(|l| *l = 1);
        assert!(f.is_atypical(&net));
    }
}

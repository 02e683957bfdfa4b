//! Unstructured random coding: each node applies an independent random
//! function per block, and the sink tests every candidate message.

use std::ops::ControlFlow;

use super::{run_pipeline, Fading, SimConfig, TAG_CODE, TAG_MESSAGE};
use crate::network::NetworkSpec;
use crate::rng::{derive_seed, mix64, CounterStream};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// `f(input)` for the function keyed by `key`: `out` pseudorandom bits,
/// independent across distinct inputs. Empty inputs map to zeros.
fn random_function(key: u64, input: &[bool], out: usize) -> Vec<bool> {
    if input.is_empty() {
        return vec![false; out];
    }
    let mut h = mix64(key ^ input.len() as u64);
    for (w, chunk) in input.chunks(64).enumerate() {
        let word = chunk
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | u64::from(b) << i);
        h = mix64(h ^ mix64(word ^ GOLDEN.wrapping_mul(w as u64 + 1)));
    }
    (0..out)
        .map(|i| mix64(h ^ GOLDEN.wrapping_mul(i as u64 / 64 + 1)) >> (i % 64) & 1 == 1)
        .collect()
}

fn sink_run(
    net: &NetworkSpec,
    cfg: &SimConfig,
    fading: &Fading,
    code_key: u64,
    message: &[bool],
    mut observe: impl FnMut(bool) -> ControlFlow<()>,
) {
    let n = cfg.block_len;
    let encode = |node: usize, block: usize, input: &[bool]| {
        let key = mix64(code_key ^ mix64((node as u64) << 32 | block as u64));
        let input = if node == net.source() { message } else { input };
        random_function(key, input, n * net.nodes()[node].levels)
    };
    run_pipeline(net, cfg, fading, &false, encode, |&b| observe(b));
}

/// One trial; `true` if the true message is the only one consistent with
/// the sink's observation.
pub(super) fn run_trial(net: &NetworkSpec, cfg: &SimConfig, fading: &Fading, trial: u64) -> bool {
    let k = cfg.message_bits();
    let code_key = derive_seed(cfg.seed, &[trial, TAG_CODE]);
    let true_index = CounterStream::new(derive_seed(cfg.seed, &[trial, TAG_MESSAGE])).word(0)
        & ((1u64 << k) - 1);
    let bits_of = |m: u64| -> Vec<bool> { (0..k).map(|i| m >> i & 1 == 1).collect() };

    let mut observed = Vec::new();
    sink_run(net, cfg, fading, code_key, &bits_of(true_index), |b| {
        observed.push(b);
        ControlFlow::Continue(())
    });

    let mut consistent = 0;
    let mut found_true = false;
    for candidate in 0..1u64 << k {
        let mut pos = 0;
        let mut matches = true;
        sink_run(net, cfg, fading, code_key, &bits_of(candidate), |b| {
            if observed[pos] != b {
                matches = false;
                return ControlFlow::Break(());
            }
            pos += 1;
            ControlFlow::Continue(())
        });
        if matches {
            consistent += 1;
            found_true |= candidate == true_index;
            if consistent > 1 {
                return false;
            }
        }
    }
    consistent == 1 && found_true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_function_is_deterministic_and_input_sensitive() {
        let a = random_function(7, &[true, false, true], 100);
        assert_eq!(a, random_function(7, &[true, false, true], 100));
        assert_ne!(a, random_function(7, &[true, false, false], 100));
        assert_ne!(a, random_function(8, &[true, false, true], 100));
        assert_ne!(a, random_function(7, &[true, false, true, false], 100));
        assert_eq!(random_function(7, &[], 5), vec![false; 5]);
        let ones = a.iter().filter(|&&b| b).count();
        assert!((25..=75).contains(&ones));
    }
}

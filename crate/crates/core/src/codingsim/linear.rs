//! Random linear coding: every symbol is tracked as a linear form in the
//! message bits, so the sink's decoder is Gaussian elimination.

use std::ops::ControlFlow;

use rand::RngCore;

use super::{run_pipeline, Fading, SimConfig, TAG_CODE, TAG_MESSAGE};
use crate::gf2::{dot, words_for, xor_words, Eliminator, Insertion, LevelVector};
use crate::network::NetworkSpec;
use crate::rng::{derive_seed, stream};

fn mask_tail(words: &mut [u64], bits: usize) {
    if !bits.is_multiple_of(64) {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << (bits % 64)) - 1;
        }
    }
}

/// One trial; `true` if the sink recovers the message.
///
/// The source sends a fresh random linear encoding of the whole message in
/// every block. A relay sends `G · y`, with `G` uniform and `y` everything it
/// heard in the previous block; in the first block that is nothing, so it
/// sends zeros.
pub(super) fn run_trial(net: &NetworkSpec, cfg: &SimConfig, fading: &Fading, trial: u64) -> bool {
    let k = cfg.message_bits();
    let width = words_for(k);
    let mut message = vec![0u64; width];
    fill(&mut stream(cfg.seed, &[trial, TAG_MESSAGE]), &mut message);
    mask_tail(&mut message, k);

    let n = cfg.block_len;
    let encode = |node: usize, block: usize, input: &[Vec<u64>]| -> Vec<Vec<u64>> {
        let out = n * net.nodes()[node].levels;
        let mut rng = stream(
            derive_seed(cfg.seed, &[trial, TAG_CODE]),
            &[node as u64, block as u64],
        );
        if node == net.source() {
            return (0..out)
                .map(|_| {
                    let mut row = vec![0u64; width];
                    fill(&mut rng, &mut row);
                    mask_tail(&mut row, k);
                    row
                })
                .collect();
        }
        let mut coeffs = vec![0u64; words_for(input.len())];
        (0..out)
            .map(|_| {
                let mut row = vec![0u64; width];
                fill(&mut rng, &mut coeffs);
                for (w, &bits) in coeffs.iter().enumerate() {
                    let mut bits = bits;
                    while bits != 0 {
                        let j = w * 64 + bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        if j < input.len() {
                            xor_words(&mut row, &input[j]);
                        }
                    }
                }
                row
            })
            .collect()
    };

    let mut decoder = Eliminator::new(k);
    let mut consistent = true;
    run_pipeline(net, cfg, fading, &vec![0u64; width], encode, |row| {
        if decoder.insert(row, dot(row, &message)) == Insertion::Inconsistent {
            consistent = false;
        }
        if decoder.is_full_rank() || !consistent {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    consistent
        && decoder.is_full_rank()
        && decoder.particular_solution() == LevelVector::from_words(&message, k)
}

fn fill(rng: &mut impl RngCore, words: &mut [u64]) {
    for w in words {
        *w = rng.next_u64();
    }
}

//! Superposition coding over the broadcast channel, with the `V` levels
//! protected by a systematic random linear erasure code.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use super::{TAG_CODE, TAG_FADING, TAG_MESSAGE};
use crate::channels::BcChannel;
use crate::error::{invalid, Result};
use crate::gf2::{dot, get_bit, words_for, Eliminator, LevelVector};
use crate::regions::bc_inner_sweep;
use crate::rng::{derive_seed, stream, CounterStream};

const TAG_U: u64 = 3;
/// Payload grid step, in bits per timestep.
const GRID_STEPS_PER_BIT: usize = 20;
const FAILURE_THRESHOLD: f64 = 1e-2;
pub const MIN_BLOCK_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BcSimReport {
    pub i0: usize,
    pub block_len: usize,
    pub trials: usize,
    /// `V` payload bits at the reported operating point.
    pub payload_bits: usize,
    /// Fewest `U` bits per timestep delivered to receiver 1 in any trial.
    pub r1_achieved: f64,
    pub r2_achieved: f64,
    pub failure_rate: f64,
    /// `E[#V levels received]` for this split.
    pub r2_target: f64,
}

struct Layout {
    n: usize,
    m1: usize,
    i0: usize,
    block_len: usize,
    /// 1-based input level carried by each `V` rank; top levels first.
    v_levels: Vec<usize>,
}

impl Layout {
    fn new(ch: &BcChannel, i0: usize, block_len: usize) -> Result<Self> {
        if i0 > ch.m1() {
            return Err(invalid(format!("split i0 = {i0} exceeds m1 = {}", ch.m1())));
        }
        if block_len < MIN_BLOCK_LEN {
            return Err(invalid(format!(
                "block length must be at least {MIN_BLOCK_LEN}, got {block_len}"
            )));
        }
        Ok(Self {
            n: ch.n(),
            m1: ch.m1(),
            i0,
            block_len,
            v_levels: (1..=i0).chain(ch.m1() + 1..=ch.n()).collect(),
        })
    }

    fn slots(&self) -> usize {
        self.v_levels.len() * self.block_len
    }
}

struct TrialOutcome {
    decoded: bool,
    u_bits_delivered: usize,
}

/// Parity row for codeword slot `slot`: `k` uniform bits.
fn parity_row(code: &mut CounterStream, slot: usize, k: usize) -> Vec<u64> {
    let w = words_for(k);
    let mut row = vec![0u64; w];
    code.fill_words((slot * w) as u64, &mut row);
    if !k.is_multiple_of(64) {
        row[w - 1] &= (1u64 << (k % 64)) - 1;
    }
    row
}

fn run_trial(ch: &BcChannel, lay: &Layout, k: usize, seed: u64, trial: u64) -> TrialOutcome {
    let (bl, slots) = (lay.block_len, lay.slots());
    let mut fading = CounterStream::new(derive_seed(seed, &[trial, TAG_FADING]));
    let m2: Vec<usize> = (0..bl)
        .map(|t| ch.pmf2().sample_with(fading.uniform(t as u64)))
        .collect();

    let mut payload = vec![0u64; words_for(k)];
    let mut rng = stream(seed, &[trial, TAG_MESSAGE]);
    payload.iter_mut().for_each(|w| *w = rng.next_u64());
    if !k.is_multiple_of(64) {
        *payload.last_mut().unwrap() &= (1u64 << (k % 64)) - 1;
    }
    let mut code = CounterStream::new(derive_seed(seed, &[trial, TAG_CODE, k as u64]));
    let codeword: Vec<bool> = (0..slots)
        .map(|s| {
            if s < k {
                get_bit(&payload, s)
            } else {
                dot(&parity_row(&mut code, s, k), &payload)
            }
        })
        .collect();

    let mut u_rng = stream(seed, &[trial, TAG_U]);
    let u_len = lay.m1 - lay.i0;
    let mut u_bits_delivered = 0;
    let mut received: Vec<Option<bool>> = vec![None; slots];
    for t in 0..bl {
        let u: Vec<bool> = (0..u_len).map(|_| u_rng.next_u32() & 1 == 1).collect();
        let mut x = vec![false; lay.n];
        for (i, &b) in u.iter().enumerate() {
            x[lay.i0 + i] = b;
        }
        for (r, &lvl) in lay.v_levels.iter().enumerate() {
            x[lvl - 1] = codeword[r * bl + t];
        }
        let (y1, y2) = ch
            .outputs(&LevelVector::new(x), m2[t])
            .expect("input length and level are in range");
        u_bits_delivered += u
            .iter()
            .enumerate()
            .filter(|&(i, &b)| y1.level((lay.i0 + i + 1) as isize) == b)
            .count();
        for (r, &lvl) in lay.v_levels.iter().enumerate() {
            if lvl <= y2.len() {
                received[r * bl + t] = Some(y2.level(lvl as isize));
            }
        }
    }

    TrialOutcome {
        decoded: decode(&received, k, &mut code) == Some(payload),
        u_bits_delivered,
    }
}

/// Recovers the payload from the surviving codeword slots.
fn decode(received: &[Option<bool>], k: usize, code: &mut CounterStream) -> Option<Vec<u64>> {
    let mut known = vec![0u64; words_for(k)];
    let mut unknown = Vec::new();
    for (s, r) in received.iter().take(k).enumerate() {
        match r {
            Some(true) => known[s / 64] |= 1 << (s % 64),
            Some(false) => {}
            None => unknown.push(s),
        }
    }
    if unknown.is_empty() {
        return Some(known);
    }
    let parity: Vec<usize> = (k..received.len())
        .filter(|&s| received[s].is_some())
        .collect();
    if parity.len() < unknown.len() {
        return None;
    }
    let mut elim = Eliminator::new(unknown.len());
    let mut compact = vec![0u64; words_for(unknown.len())];
    for s in parity {
        let row = parity_row(code, s, k);
        // erased positions of `known` are zero, so this is the known part
        let rhs = received[s].unwrap() ^ dot(&row, &known);
        compact.iter_mut().for_each(|w| *w = 0);
        for (c, &pos) in unknown.iter().enumerate() {
            if get_bit(&row, pos) {
                compact[c / 64] |= 1 << (c % 64);
            }
        }
        elim.insert(&compact, rhs);
        if elim.is_full_rank() {
            break;
        }
    }
    if !elim.is_full_rank() {
        return None;
    }
    let solved = elim.particular_solution();
    for (c, &pos) in unknown.iter().enumerate() {
        if solved.bits()[c] {
            known[pos / 64] |= 1 << (pos % 64);
        }
    }
    Some(known)
}

fn run_payload(ch: &BcChannel, lay: &Layout, k: usize, trials: usize, seed: u64) -> (usize, usize) {
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(ch, lay, k, seed, trial))
        .collect();
    let failures = outcomes.iter().filter(|o| !o.decoded).count();
    let min_u = outcomes
        .iter()
        .map(|o| o.u_bits_delivered)
        .min()
        .unwrap_or(0);
    (failures, min_u)
}

/// Failure rate of the `V` erasure code at a fixed payload size.
pub fn bc_payload_failure_rate(
    ch: &BcChannel,
    i0: usize,
    block_len: usize,
    payload_bits: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let lay = Layout::new(ch, i0, block_len)?;
    if payload_bits > lay.slots() {
        return Err(invalid(format!(
            "payload {payload_bits} exceeds the {} available V slots",
            lay.slots()
        )));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let (failures, _) = run_payload(ch, &lay, payload_bits, trials, seed);
    Ok(failures as f64 / trials as f64)
}

/// Sweeps the `V` payload downward in steps of 1/20 bit per timestep and
/// reports the largest one decoded with failure rate below 1%.
///
/// `V` occupies the top `i0` levels and the bottom `n − m1`; the `U` levels
/// in between go to receiver 1 uncoded. Codeword slot `r·block_len + t` sits
/// on the `r`-th `V` level at timestep `t`, so the systematic part fills the
/// most reliable levels first.
pub fn bc_superposition_sim(
    ch: &BcChannel,
    i0: usize,
    block_len: usize,
    trials: usize,
    seed: u64,
) -> Result<BcSimReport> {
    let lay = Layout::new(ch, i0, block_len)?;
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let top = lay.v_levels.len() * GRID_STEPS_PER_BIT;
    for g in (0..=top).rev() {
        let k = g * block_len / GRID_STEPS_PER_BIT;
        let (failures, min_u) = run_payload(ch, &lay, k, trials, seed);
        let failure_rate = failures as f64 / trials as f64;
        if failure_rate < FAILURE_THRESHOLD || k == 0 {
            return Ok(BcSimReport {
                i0,
                block_len,
                trials,
                payload_bits: k,
                r1_achieved: min_u as f64 / block_len as f64,
                r2_achieved: k as f64 / block_len as f64,
                failure_rate,
                r2_target: bc_inner_sweep(ch)[i0].r2,
            });
        }
    }
    unreachable!("an empty payload always decodes")
}

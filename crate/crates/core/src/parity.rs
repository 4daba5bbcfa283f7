//! Hand-built sampling programs for the even-parity distribution, plus a
//! reduction that turns a standard-mode program into a single circuit
//! guessing the parity of its seeded block.
//!
//! The target is the uniform distribution over n-bit strings with an
//! even number of ones. Three constructions produce it or approximate
//! it:
//!
//! * [`revision_sampler`] finishes in two rounds by drawing a uniform
//!   prefix sum and differencing it in place on the second round.
//! * [`remask_sampler`] never rewrites: it drafts pair parities, then
//!   remasks and repairs pairs over a fixed six-round schedule.
//! * [`standard_sampler`] leaks parity through its intermediate states;
//!   [`advantage_circuit`] turns that leak into a parity guesser whose
//!   exact accuracy [`advantage_accuracy`] computes by enumeration.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circuit::builder::{CircuitBuilder, Wire};
use crate::circuit::{Circuit, EvalError, Evaluator, GateOp};
use crate::dist::Distribution;
use crate::dyadic::Dyadic;
use crate::gadgets::{bin, bits_for};
use crate::compile::StateWires;
use crate::machine::{Mode, SamplerSpec};

/// The even-parity distribution on `n`-bit strings.
#[derive(Clone, Debug)]
pub struct ParityTarget {
    pub n: usize,
    pub distribution: Distribution,
}

/// Uniform distribution over the `2^{n-1}` even-parity strings of
/// length `n` (keys over `0`/`1`). Supports `1 <= n <= 20`.
pub fn parity_target(n: usize) -> ParityTarget {
    assert!((1..=20).contains(&n), "length out of range: {n}");
    let mut distribution = Distribution::new();
    for word in 0u32..1 << n {
        if word.count_ones() % 2 == 0 {
            let key: String =
                (0..n).map(|i| if (word >> i) & 1 == 1 { '1' } else { '0' }).collect();
            distribution.add(key, Dyadic::pow2_inv(n as u32 - 1));
        }
    }
    ParityTarget { n, distribution }
}

/// Two-round rewrite sampler for the even-parity target.
///
/// Round 1 fills positions `1..n-1` with coins and pins position `n`
/// to zero; round 2 rewrites every position to the difference of its
/// value and its left neighbour's, which telescopes to an even-parity
/// string. The rounds are told apart by the maskedness of position 1,
/// so every predictor touches at most three state bits and one coin no
/// matter how long the string is.
pub fn revision_sampler(n: usize) -> SamplerSpec {
    assert!(n >= 1, "need at least one position");

    let mut fb = CircuitBuilder::new();
    let _st = StateWires::declare(&mut fb, n, 0);
    let all = fb.const_true();
    let f = fb.finish(&vec![all; n]);

    let mut predictors = Vec::with_capacity(n);
    for j in 1..=n {
        let mut pb = CircuitBuilder::new();
        let st = StateWires::declare(&mut pb, n, 0);
        let drafting = st.mask(1);
        let fresh = if j < n { pb.random() } else { pb.const_false() };
        let revised = if j == 1 {
            st.val(1)
        } else {
            pb.xor(st.val(j), st.val(j - 1))
        };
        let draft = pb.and(drafting, fresh);
        let fix = {
            let later = pb.not(drafting);
            pb.and(later, revised)
        };
        let out = pb.or(draft, fix);
        let zero = pb.const_false();
        predictors.push(pb.finish(&[zero, out]));
    }

    SamplerSpec {
        mode: Mode::Revision,
        positions: n,
        rounds: 2,
        prompt_len: 0,
        output_len: n,
        step_indexed: false,
        f,
        g: None,
        predictors,
    }
}

/// Round count of [`remask_sampler`], independent of the string length.
pub const REMASK_ROUNDS: usize = 6;

/// Remask-mode sampler for the even-parity target on even `n`.
///
/// Positions pair up into blocks (odd, even). The schedule, steered by
/// the round index appended to the program state:
///
/// 1. draft coins on all odd positions, except the last one, pinned 0;
/// 2. write each block's parity target onto its even position, then
///    remask every odd position and the even positions of blocks whose
///    parity came out 0, leaving `M0` blocks as `MM` and `M1` as `Mb`;
/// 3. in `M1` blocks, draw the odd coin; blocks now reading `bb` have
///    the wrong parity, so their even position is remasked to `bM`;
/// 4. rewrite those to `ba`, giving every `M1` block odd parity;
/// 5. draw the odd coin of the untouched `MM` blocks;
/// 6. copy it onto their even position for even parity per block.
///
/// Block parities are differences of neighbouring draft coins with the
/// last pinned to 0, so the number of odd-parity blocks is even and the
/// result is exactly the even-parity distribution.
pub fn remask_sampler(n: usize) -> SamplerSpec {
    assert!(n >= 2 && n % 2 == 0, "need an even number of positions, got {n}");
    let step = bits_for(REMASK_ROUNDS - 1);

    // Selection: odd positions fire on rounds 1, 3 (block still Mb), and
    // 5 (block still MM); even positions on rounds 2 and 4 (block bM).
    let mut fb = CircuitBuilder::new();
    let st = StateWires::declare(&mut fb, n, step);
    let at: Vec<Wire> = (0..REMASK_ROUNDS)
        .map(|r| fb.eq_const(&st.step, &bin(r, step)))
        .collect();
    let fouts: Vec<Wire> = (1..=n)
        .map(|j| {
            if j % 2 == 1 {
                let unfixed = fb.not(st.mask(j + 1));
                let repair = {
                    let own = fb.and(st.mask(j), unfixed);
                    fb.and(at[2], own)
                };
                let leftover = fb.and(at[4], st.mask(j));
                let a = fb.or(at[0], repair);
                fb.or(a, leftover)
            } else {
                let odd_done = fb.not(st.mask(j - 1));
                let repair = {
                    let own = fb.and(st.mask(j), odd_done);
                    fb.and(at[3], own)
                };
                fb.or(at[1], repair)
            }
        })
        .collect();
    let f = fb.finish(&fouts);

    // Remask: after round 2, all odds plus the evens that read 0; after
    // round 3, the evens of blocks reading 11 (wrong parity).
    let mut gb = CircuitBuilder::new();
    let st = StateWires::declare(&mut gb, n, step);
    let at: Vec<Wire> = (0..REMASK_ROUNDS)
        .map(|r| gb.eq_const(&st.step, &bin(r, step)))
        .collect();
    let gouts: Vec<Wire> = (1..=n)
        .map(|j| {
            if j % 2 == 1 {
                at[1]
            } else {
                let zero_parity = {
                    let v = gb.not(st.val(j));
                    gb.and(at[1], v)
                };
                let wrong = {
                    let both = gb.and(st.val(j - 1), st.val(j));
                    gb.and(at[2], both)
                };
                gb.or(zero_parity, wrong)
            }
        })
        .collect();
    let g = gb.finish(&gouts);

    let mut predictors = Vec::with_capacity(n);
    for j in 1..=n {
        let mut pb = CircuitBuilder::new();
        let st = StateWires::declare(&mut pb, n, step);
        let at: Vec<Wire> = (0..REMASK_ROUNDS)
            .map(|r| pb.eq_const(&st.step, &bin(r, step)))
            .collect();
        let out = if j % 2 == 1 {
            if j < n - 1 {
                pb.random()
            } else {
                // Last odd position: pinned on the draft round, a fair
                // coin whenever it is repaired later.
                let r = pb.random();
                let later = pb.not(at[0]);
                pb.and(later, r)
            }
        } else {
            let parity = if j == 2 {
                st.val(1)
            } else {
                pb.xor(st.val(j - 1), st.val(j - 3))
            };
            let draft = pb.and(at[1], parity);
            let flip = {
                let v = pb.not(st.val(j - 1));
                pb.and(at[3], v)
            };
            let copy = pb.and(at[5], st.val(j - 1));
            let a = pb.or(draft, flip);
            pb.or(a, copy)
        };
        let zero = pb.const_false();
        predictors.push(pb.finish(&[zero, out]));
    }

    SamplerSpec {
        mode: Mode::Remask,
        positions: n,
        rounds: REMASK_ROUNDS,
        prompt_len: 0,
        output_len: n,
        step_indexed: true,
        f,
        g: Some(g),
        predictors,
    }
}

/// Three-round standard-mode sampler whose last `m` positions come out
/// uniform, with the final position completing the parity of everything
/// before it. Its intermediate states carry more parity information
/// than its output: see [`advantage_circuit`].
pub fn standard_sampler(n: usize, m: usize) -> SamplerSpec {
    build_standard(n, m, false)
}

/// Same selection schedule as [`standard_sampler`] but every position
/// writes the constant 1, so the non-seeded block is never all zero.
pub fn constant_standard_sampler(n: usize, m: usize) -> SamplerSpec {
    build_standard(n, m, true)
}

fn build_standard(n: usize, m: usize, constant: bool) -> SamplerSpec {
    assert!(m >= 1 && m < n, "need 1 <= m < n, got m={m}, n={n}");

    // Round 1: the head block 1..n-m. Round 2: positions up to n-1,
    // recognized by position 1 being decoded and n-m+1 not yet. Round 3
    // picks up the leftovers (position n alone).
    let mut fb = CircuitBuilder::new();
    let st = StateWires::declare(&mut fb, n, 0);
    let first = st.mask(1);
    let second = {
        let started = fb.not(st.mask(1));
        fb.and(started, st.mask(n - m + 1))
    };
    let fouts: Vec<Wire> = (1..=n)
        .map(|j| {
            if j <= n - m {
                first
            } else if j < n {
                second
            } else {
                fb.const_false()
            }
        })
        .collect();
    let f = fb.finish(&fouts);

    let mut predictors = Vec::with_capacity(n);
    for j in 1..=n {
        let mut pb = CircuitBuilder::new();
        let st = StateWires::declare(&mut pb, n, 0);
        let out = if constant {
            pb.const_true()
        } else if j < n {
            pb.random()
        } else {
            let vals: Vec<Wire> = (1..n).map(|i| st.val(i)).collect();
            pb.xor_tree(&vals)
        };
        let zero = pb.const_false();
        predictors.push(pb.finish(&[zero, out]));
    }

    SamplerSpec {
        mode: Mode::Standard,
        positions: n,
        rounds: 3,
        prompt_len: 0,
        output_len: m,
        step_indexed: false,
        f,
        g: None,
        predictors,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdvantageError {
    #[error("the parity reduction needs a standard-mode program, got {0}")]
    Mode(&'static str),
    #[error("seeded position {0} is out of range")]
    SeedRange(usize),
    #[error("seeding every position leaves nothing to observe")]
    NothingMasked,
}

/// One circuit simulating `rounds_after` rounds of a standard-mode
/// program whose first selection wrote the circuit's input bits into
/// `seeded`, then guessing the parity of those bits: it answers 0 when
/// every non-seeded position ended decoded to 0 (one wide AND over
/// their wires) and a fresh coin otherwise.
pub fn advantage_circuit(
    spec: &SamplerSpec,
    seeded: &[usize],
    rounds_after: usize,
) -> Result<Circuit, AdvantageError> {
    if spec.mode != Mode::Standard {
        return Err(AdvantageError::Mode(spec.mode.name()));
    }
    let l = spec.positions;
    let seeds: BTreeSet<usize> = seeded.iter().copied().collect();
    if let Some(&bad) = seeds.iter().find(|&&p| p == 0 || p > l) {
        return Err(AdvantageError::SeedRange(bad));
    }
    if seeds.len() == l {
        return Err(AdvantageError::NothingMasked);
    }
    assert!(rounds_after >= 1, "need at least one simulated round");

    let mut b = CircuitBuilder::new();
    let mut mask = Vec::with_capacity(l);
    let mut val = Vec::with_capacity(l);
    for pos in 1..=l {
        if seeds.contains(&pos) {
            let x = b.input();
            mask.push(b.const_false());
            val.push(x);
        } else {
            mask.push(b.const_true());
            val.push(b.const_false());
        }
    }

    for round in 2..=rounds_after + 1 {
        let mut xenc = Vec::with_capacity(2 * l + spec.step_bits());
        for j in 0..l {
            xenc.push(mask[j]);
            xenc.push(val[j]);
        }
        if spec.step_indexed {
            for bit in bin(round - 1, spec.step_bits()) {
                xenc.push(b.const_bit(bit));
            }
        }
        let fraw = b.embed(&spec.f, &xenc);
        let final_round = round == spec.rounds;
        let mut next_mask = Vec::with_capacity(l);
        let mut next_val = Vec::with_capacity(l);
        for j in 0..l {
            let sel = if final_round { b.or(fraw[j], mask[j]) } else { fraw[j] };
            let skip = b.not(sel);
            let p = b.embed(&spec.predictors[j], &xenc);
            let keep_m = b.and(skip, mask[j]);
            let take_m = b.and(sel, p[0]);
            next_mask.push(b.or(keep_m, take_m));
            let keep_v = b.and(skip, val[j]);
            let take_v = b.and(sel, p[1]);
            next_val.push(b.or(keep_v, take_v));
        }
        mask = next_mask;
        val = next_val;
    }

    let mut blank: Vec<Wire> = Vec::new();
    for pos in 1..=l {
        if !seeds.contains(&pos) {
            blank.push(b.not(mask[pos - 1]));
            blank.push(b.not(val[pos - 1]));
        }
    }
    let all_zero = b.gate(GateOp::And, &blank);
    let coin = b.random();
    let guess = {
        let informative = b.not(all_zero);
        b.and(informative, coin)
    };
    Ok(b.finish(&[guess]))
}

/// Probability that the circuit's one output bit equals the parity of
/// its input bits, under uniform inputs, by exhausting inputs and
/// coins. Exact.
pub fn advantage_accuracy(circuit: &Circuit, max_coins: u32) -> Result<Dyadic, EvalError> {
    let ev = Evaluator::new(circuit)?;
    let n = ev.num_inputs();
    assert!(n < 26, "too many inputs to enumerate");
    let mut hits = Dyadic::zero();
    for word in 0u32..1 << n {
        let x: Vec<bool> = (0..n).map(|i| (word >> i) & 1 == 1).collect();
        let key = if word.count_ones() % 2 == 1 { "1" } else { "0" };
        let d = ev.output_distribution(&x, max_coins)?;
        if let Some(p) = d.get(key) {
            hits = hits.add(p);
        }
    }
    Ok(hits.mul(&Dyadic::pow2_inv(n as u32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::assert_equal;
    use crate::machine::enumerate::{
        exact_output_distribution, state_distribution_after, Budget,
    };
    use crate::machine::Machine;

    #[test]
    fn target_enumerates_even_parity_strings() {
        let t = parity_target(2);
        assert_eq!(t.distribution.len(), 2);
        assert_eq!(t.distribution.get("00"), Some(&Dyadic::pow2_inv(1)));
        assert_eq!(t.distribution.get("11"), Some(&Dyadic::pow2_inv(1)));

        let t = parity_target(3);
        for key in ["000", "011", "101", "110"] {
            assert_eq!(t.distribution.get(key), Some(&Dyadic::pow2_inv(2)), "{key}");
        }

        let t = parity_target(1);
        assert_eq!(t.distribution.get("0"), Some(&Dyadic::one()));

        let t = parity_target(5);
        assert_eq!(t.distribution.len(), 16);
        for (key, p) in t.distribution.iter() {
            assert_eq!(key.chars().filter(|&c| c == '1').count() % 2, 0);
            assert_eq!(p, &Dyadic::pow2_inv(4));
        }
    }

    #[test]
    fn rewrite_sampler_hits_the_target_in_two_rounds() {
        for n in 1..=6 {
            let spec = revision_sampler(n);
            assert_eq!(spec.rounds, 2);
            let machine = Machine::new(&spec).unwrap();
            let got = exact_output_distribution(&machine, &[], &Budget::default()).unwrap();
            assert_equal(&got, &parity_target(n).distribution)
                .unwrap_or_else(|e| panic!("n={n}:\n{e}"));
        }
    }

    #[test]
    fn rewrite_sampler_pins_the_last_draft_to_zero() {
        let spec = revision_sampler(4);
        let machine = Machine::new(&spec).unwrap();
        let snap = state_distribution_after(&machine, &[], 1, &Budget::default()).unwrap();
        assert_eq!(snap.len(), 8);
        for (key, p) in snap.iter() {
            assert!(key.ends_with('a'), "draft {key} should pin position 4");
            assert_eq!(p, &Dyadic::pow2_inv(3));
        }
    }

    #[test]
    fn rewrite_predictors_read_a_constant_number_of_wires() {
        for n in [1, 2, 9, 16] {
            let spec = revision_sampler(n);
            for pred in &spec.predictors {
                let mut inputs = BTreeSet::new();
                let mut randoms = BTreeSet::new();
                for &o in &pred.outputs {
                    let (i, r) = pred.cone_leaves(o);
                    inputs.extend(i);
                    randoms.extend(r);
                }
                assert!(inputs.len() <= 3, "n={n}: {} state bits", inputs.len());
                assert!(randoms.len() <= 1);
                assert!(inputs.len() + randoms.len() <= 4);
            }
        }
    }

    #[test]
    fn remask_sampler_hits_the_target_on_a_fixed_schedule() {
        for n in [2usize, 4, 6] {
            let spec = remask_sampler(n);
            assert_eq!(spec.rounds, REMASK_ROUNDS);
            let machine = Machine::new(&spec).unwrap();
            let got = exact_output_distribution(&machine, &[], &Budget::default()).unwrap();
            assert_equal(&got, &parity_target(n).distribution)
                .unwrap_or_else(|e| panic!("n={n}:\n{e}"));
        }
    }

    #[test]
    fn remask_blocks_are_drafted_remasked_and_repaired() {
        let spec = remask_sampler(4);
        let machine = Machine::new(&spec).unwrap();
        let block = |key: &str, i: usize| key[2 * i..2 * i + 2].to_string();

        // After round 2 every block reads MM or Mb.
        let snap = state_distribution_after(&machine, &[], 2, &Budget::default()).unwrap();
        for key in snap.support() {
            for i in 0..2 {
                assert!(matches!(block(key, i).as_str(), "MM" | "Mb"), "{key}");
            }
        }
        // Round 3 can leave a wrong-parity block remasked as bM.
        let snap = state_distribution_after(&machine, &[], 3, &Budget::default()).unwrap();
        assert!(snap.support().any(|k| (0..2).any(|i| block(k, i) == "bM")));
        for key in snap.support() {
            for i in 0..2 {
                assert!(matches!(block(key, i).as_str(), "MM" | "ab" | "bM"), "{key}");
            }
        }
        // Round 4 repairs them; only the untouched MM blocks remain.
        let snap = state_distribution_after(&machine, &[], 4, &Budget::default()).unwrap();
        for key in snap.support() {
            for i in 0..2 {
                assert!(matches!(block(key, i).as_str(), "MM" | "ab" | "ba"), "{key}");
            }
        }
    }

    #[test]
    fn leaky_sampler_outputs_are_uniform() {
        let spec = standard_sampler(4, 2);
        assert_eq!(spec.rounds, 3);
        let machine = Machine::new(&spec).unwrap();
        let got = exact_output_distribution(&machine, &[], &Budget::default()).unwrap();
        assert_eq!(got.len(), 4);
        for (_, p) in got.iter() {
            assert_eq!(p, &Dyadic::pow2_inv(2));
        }
    }

    #[test]
    fn guesser_accuracy_matches_the_closed_form() {
        for m in 1..=3u32 {
            let spec = standard_sampler(m as usize + 2, m as usize);
            let c = advantage_circuit(&spec, &[1, 2], 2).unwrap();
            let acc = advantage_accuracy(&c, 24).unwrap();
            assert_eq!(acc, Dyadic::from_ratio((1 << m) + 1, m + 1), "m={m}");
        }
    }

    #[test]
    fn constant_program_gives_no_advantage() {
        let spec = constant_standard_sampler(4, 2);
        let c = advantage_circuit(&spec, &[1, 2], 2).unwrap();
        let acc = advantage_accuracy(&c, 24).unwrap();
        assert_eq!(acc, Dyadic::pow2_inv(1));
    }

    #[test]
    fn reduction_rejects_other_modes() {
        let spec = revision_sampler(3);
        let err = advantage_circuit(&spec, &[1], 1).unwrap_err();
        assert_eq!(err, AdvantageError::Mode("revision"));
    }
}

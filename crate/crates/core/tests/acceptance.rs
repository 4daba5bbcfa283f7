//! End-to-end acceptance checks, one test per stated goal. Every
//! distribution comparison in here is exact dyadic equality; nothing
//! tolerates drift. Each test prints a single PASS line on success
//! (visible with `--nocapture`).

use std::collections::BTreeSet;

use dlmc_core::circuit::{Circuit, Evaluator};
use dlmc_core::compile::{compile, Strategy};
use dlmc_core::corpus;
use dlmc_core::dist::assert_equal;
use dlmc_core::dist_check::verify_exact;
use dlmc_core::dyadic::Dyadic;
use dlmc_core::gadgets::{add_one, bin, bits_for, identify, mux, shift_r};
use dlmc_core::machine::enumerate::{
    exact_output_distribution, state_distribution_after, strict_output_distribution, Budget,
};
use dlmc_core::machine::Machine;
use dlmc_core::parity::{
    advantage_accuracy, advantage_circuit, constant_standard_sampler, parity_target,
    remask_sampler, revision_sampler, standard_sampler, REMASK_ROUNDS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 0x0a11_c0de;
const CORPUS_SIZE: usize = 200;

/// The shared circuit corpus. Regenerated from a fixed seed so every
/// criterion sees the same circuits.
fn shared_corpus() -> Vec<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| corpus::random_circuit(&mut rng)).collect()
}

/// All `2^n` prompts of length `n`, most significant bit first.
fn all_prompts(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n)
        .map(|v| (0..n).map(|j| (v >> (n - 1 - j)) & 1 == 1).collect())
        .collect()
}

fn ceil_log2(k: usize) -> usize {
    assert!(k >= 2);
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

#[test]
fn criterion_1_trace_programs_reproduce_every_circuit_law() {
    let mut laws = 0usize;
    for (i, c) in shared_corpus().iter().enumerate() {
        let compiled = compile(c, Strategy::Trace).unwrap();
        assert_eq!(
            compiled.spec.rounds,
            compiled.circuit.depth(),
            "circuit {i}: round count must equal circuit depth"
        );
        assert_eq!(
            compiled.spec.positions,
            compiled.circuit.size(),
            "circuit {i}: one position per vertex"
        );
        for q in all_prompts(c.num_inputs()) {
            let report =
                verify_exact(&compiled.spec, c, &q, &Budget::default(), 8).unwrap();
            assert!(report.is_match(), "circuit {i}, prompt {q:?}:\n{report}");
            laws += 1;
        }
    }
    println!("criterion 1: PASS ({CORPUS_SIZE} circuits, {laws} prompt laws, exact)");
}

#[test]
fn criterion_2_remask_programs_match_exactly_within_the_width_bound() {
    let mut laws = 0usize;
    for (i, c) in shared_corpus().iter().enumerate() {
        let compiled = compile(c, Strategy::Remask).unwrap();
        let w = compiled.circuit.width();
        let d = compiled.circuit.depth();
        let tag = bits_for(d);
        assert_eq!(d % 2, 0, "circuit {i}: depth must be evened out");
        assert_eq!(compiled.spec.positions, 2 * w + 2 * tag, "circuit {i}: L = 2w + 2|tag|");
        assert_eq!(compiled.spec.rounds, d + 1, "circuit {i}: d+1 rounds");
        let machine = Machine::new(&compiled.spec).unwrap();
        for q in all_prompts(c.num_inputs()) {
            let report =
                verify_exact(&compiled.spec, c, &q, &Budget::default(), 8).unwrap();
            assert!(report.is_match(), "circuit {i}, prompt {q:?}:\n{report}");
            laws += 1;
            for t in 1..compiled.spec.rounds {
                let snap =
                    state_distribution_after(&machine, &q, t, &Budget::default()).unwrap();
                for key in snap.support() {
                    let unmasked = key.chars().filter(|&ch| ch != 'M').count();
                    assert!(
                        unmasked <= w + tag,
                        "circuit {i}, prompt {q:?}, round {t}: {unmasked} unmasked \
                         positions in {key}, bound is {}",
                        w + tag
                    );
                }
            }
        }
    }
    println!(
        "criterion 2: PASS ({CORPUS_SIZE} circuits, {laws} prompt laws, exact, \
         per-round unmasked count within w + |tag|)"
    );
}

#[test]
fn criterion_3_revision_programs_match_exactly_at_width_plus_tag() {
    let mut laws = 0usize;
    for (i, c) in shared_corpus().iter().enumerate() {
        let compiled = compile(c, Strategy::Revision).unwrap();
        let w = compiled.circuit.width();
        let d = compiled.circuit.depth();
        assert_eq!(
            compiled.spec.positions,
            w + bits_for(d),
            "circuit {i}: L = w + |tag|"
        );
        assert_eq!(compiled.spec.rounds, d + 1, "circuit {i}: d+1 rounds");
        for q in all_prompts(c.num_inputs()) {
            let report =
                verify_exact(&compiled.spec, c, &q, &Budget::default(), 8).unwrap();
            assert!(report.is_match(), "circuit {i}, prompt {q:?}:\n{report}");
            laws += 1;
        }
    }
    println!("criterion 3: PASS ({CORPUS_SIZE} circuits, {laws} prompt laws, exact)");
}

#[test]
fn criterion_4_two_round_parity_with_constant_size_cones() {
    for n in 1..=16 {
        let spec = revision_sampler(n);
        assert_eq!(spec.rounds, 2, "n={n}: exactly two rounds");
        let machine = Machine::new(&spec).unwrap();
        let got = exact_output_distribution(&machine, &[], &Budget::default()).unwrap();
        assert_equal(&got, &parity_target(n).distribution)
            .unwrap_or_else(|diff| panic!("n={n}:\n{diff}"));
        for (j, pred) in spec.predictors.iter().enumerate() {
            let mut state_bits = BTreeSet::new();
            let mut coins = BTreeSet::new();
            for &out in &pred.outputs {
                let (ins, rnds) = pred.cone_leaves(out);
                state_bits.extend(ins);
                coins.extend(rnds);
            }
            assert!(
                state_bits.len() <= 4,
                "n={n}, position {}: cone reads {} state bits",
                j + 1,
                state_bits.len()
            );
            assert!(coins.len() <= 1, "n={n}, position {}: more than one coin", j + 1);
        }
    }
    println!(
        "criterion 4: PASS (n = 1..=16, two rounds, every output cone reads \
         at most 4 state bits and 1 coin)"
    );
}

#[test]
fn criterion_5_remask_parity_runs_in_one_constant_round_count() {
    let mut round_counts = BTreeSet::new();
    for n in (2..=16).step_by(2) {
        let spec = remask_sampler(n);
        round_counts.insert(spec.rounds);
        let machine = Machine::new(&spec).unwrap();
        let got = exact_output_distribution(&machine, &[], &Budget::default()).unwrap();
        assert_equal(&got, &parity_target(n).distribution)
            .unwrap_or_else(|diff| panic!("n={n}:\n{diff}"));
    }
    assert_eq!(round_counts, BTreeSet::from([REMASK_ROUNDS]));
    println!(
        "criterion 5: PASS (even n = 2..=16, exact, always {REMASK_ROUNDS} rounds)"
    );
}

#[test]
fn criterion_6_guesser_accuracy_equals_the_reduction_identity() {
    for m in 1..=6u32 {
        let spec = standard_sampler(m as usize + 2, m as usize);
        let guesser = advantage_circuit(&spec, &[1, 2], 2).unwrap();
        let acc = advantage_accuracy(&guesser, 24).unwrap();
        let want = Dyadic::from_ratio((1 << m) + 1, m + 1);
        assert_eq!(acc, want, "m={m}: accuracy {acc} instead of {want}");
    }
    let spec = constant_standard_sampler(4, 2);
    let guesser = advantage_circuit(&spec, &[1, 2], 2).unwrap();
    assert_eq!(advantage_accuracy(&guesser, 24).unwrap(), Dyadic::pow2_inv(1));
    println!(
        "criterion 6: PASS (m = 1..=6 gives exactly 1/2 + 1/2^(m+1), \
         constant program gives exactly 1/2)"
    );
}

#[test]
fn criterion_7_gadgets_match_their_oracles_and_depth_budgets() {
    let mut evals = 0usize;

    // Shifters: first output pinned true, the rest displaced by one,
    // the last input dropped.
    for k in 1..=12 {
        let ev = Evaluator::new(&shift_r(k)).unwrap();
        for q in all_prompts(k) {
            let got = ev.eval(&q, &[]);
            let mut want = vec![true];
            want.extend_from_slice(&q[..k - 1]);
            assert_eq!(got, want, "shift_r({k}) on {q:?}");
            evals += 1;
        }
    }

    // Incrementers, wraparound included: all-ones comes back as zeros.
    for k in 1..=12 {
        let ev = Evaluator::new(&add_one(k)).unwrap();
        for (v, q) in all_prompts(k).into_iter().enumerate() {
            let got = ev.eval(&q, &[]);
            let want = bin((v + 1) % (1 << k), k);
            assert_eq!(got, want, "add_one({k}) on {v}");
            evals += 1;
        }
    }
    let ones = vec![true; 12];
    assert_eq!(Evaluator::new(&add_one(12)).unwrap().eval(&ones, &[]), vec![false; 12]);

    // Pattern matchers: every pattern for small arities, a spread of
    // patterns above that.
    for k in 1..=12usize {
        let patterns: Vec<Vec<bool>> = if k <= 6 {
            all_prompts(k)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let mut ps = vec![vec![false; k], vec![true; k]];
            ps.push((0..k).map(|j| j % 2 == 0).collect());
            for _ in 0..3 {
                ps.push((0..k).map(|_| rng.random()).collect());
            }
            ps
        };
        for pat in &patterns {
            let ev = Evaluator::new(&identify(pat)).unwrap();
            for q in all_prompts(k) {
                let got = ev.eval(&q, &[]);
                assert_eq!(got, vec![q == *pat], "identify({pat:?}) on {q:?}");
                evals += 1;
            }
        }
    }

    // Selectors: selector value v in 1..=branches forwards branch v's
    // payload, anything else gives all zeros.
    for (s, b, p) in [
        (1usize, 1usize, 1usize),
        (1, 1, 4),
        (2, 1, 2),
        (2, 2, 2),
        (2, 3, 1),
        (2, 3, 2),
        (2, 2, 4),
        (2, 3, 3),
        (3, 4, 1),
        (3, 5, 1),
        (3, 2, 3),
        (3, 7, 1),
        (4, 5, 1),
    ] {
        let ev = Evaluator::new(&mux(s, b, p)).unwrap();
        for q in all_prompts(s + b * p) {
            let v = q[..s].iter().fold(0usize, |acc, &bit| acc << 1 | bit as usize);
            let want = if (1..=b).contains(&v) {
                q[s + (v - 1) * p..s + v * p].to_vec()
            } else {
                vec![false; p]
            };
            assert_eq!(ev.eval(&q, &[]), want, "mux({s},{b},{p}) on {q:?}");
            evals += 1;
        }
    }

    // Depth audits. The shifter never grows; the others stay within
    // one doubling tree plus fixed overhead.
    for k in 1..=64usize {
        assert_eq!(shift_r(k).depth(), 3, "shift_r({k}) depth");

        let inc_budget = if k == 1 { 2 } else { ceil_log2(k) + 3 };
        assert!(
            add_one(k).depth() <= inc_budget,
            "add_one({k}) depth {} over budget {inc_budget}",
            add_one(k).depth()
        );

        let pat: Vec<bool> = (0..k).map(|j| j % 2 == 0).collect();
        let id_budget = if k == 1 { 2 } else { ceil_log2(k) + 2 };
        assert!(
            identify(&pat).depth() <= id_budget,
            "identify of width {k} depth {} over budget {id_budget}",
            identify(&pat).depth()
        );

        let s = bits_for(k);
        let mux_budget = if s == 1 { 4 } else { ceil_log2(s) + 4 };
        assert!(
            mux(s, k, 2).depth() <= mux_budget,
            "mux({s},{k},2) depth {} over budget {mux_budget}",
            mux(s, k, 2).depth()
        );
    }

    println!(
        "criterion 7: PASS ({evals} exhaustive gadget evaluations, depth within \
         budget for every width up to 64)"
    );
}

#[test]
fn criterion_8_machine_semantics_hold_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ce);

    // Dual-route enumeration: the per-position factored walk must agree
    // with brute force over every coin of every component invocation.
    // Kept to specs with few coins so the brute-force side stays small.
    let mut dual_checked = 0usize;
    let mut draws = 0usize;
    while dual_checked < 40 && draws < 3000 {
        draws += 1;
        let spec = corpus::random_standard_spec(&mut rng);
        let coins: usize = spec.f.num_randoms()
            + spec.predictors.iter().map(|p| p.num_randoms()).sum::<usize>();
        if coins > 5 {
            continue;
        }
        let machine = Machine::new(&spec).unwrap();
        for q in all_prompts(spec.prompt_len) {
            let lazy = exact_output_distribution(&machine, &q, &Budget::default()).unwrap();
            let strict = strict_output_distribution(&machine, &q, 16).unwrap();
            assert_equal(&lazy, &strict)
                .unwrap_or_else(|diff| panic!("routes disagree on {q:?}:\n{diff}"));
        }
        dual_checked += 1;
    }
    assert!(dual_checked >= 25, "only {dual_checked} specs were cheap enough");

    // Trace discipline on sampled runs: untouched positions keep their
    // tokens, nothing decoded goes back to masked without a remask
    // pass, and a seeded run is exactly reproducible and replayable.
    let mut runs = 0usize;
    for _ in 0..60 {
        let spec = corpus::random_standard_spec(&mut rng);
        let machine = Machine::new(&spec).unwrap();
        let prompt: Vec<bool> = (0..spec.prompt_len).map(|_| rng.random()).collect();
        for seed in 0..3u64 {
            let first = machine.run(&prompt, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let again = machine.run(&prompt, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(first.trace, again.trace, "same seed, different trace");

            for rec in &first.trace.rounds {
                let pre: Vec<char> = rec.pre_state.chars().collect();
                let post: Vec<char> = rec.post_state.chars().collect();
                assert!(rec.remasked.is_empty(), "no remasking outside remask mode");
                for pos in 1..=spec.positions {
                    if !rec.selected.contains(&pos) {
                        assert_eq!(
                            pre[pos - 1],
                            post[pos - 1],
                            "round {} rewrote unselected position {pos}",
                            rec.round
                        );
                    }
                    if pre[pos - 1] != 'M' {
                        assert_ne!(
                            post[pos - 1], 'M',
                            "round {} re-masked decoded position {pos}",
                            rec.round
                        );
                    }
                }
            }

            assert_eq!(machine.replay(&first.trace).unwrap(), first.output);
            let audit = machine.audit(&first.trace);
            assert!(audit.is_ok(), "audit found problems: {:?}", audit.problems);
            runs += 1;
        }
    }
    println!(
        "criterion 8: PASS ({dual_checked} dual-route enumerations, {runs} seeded runs \
         with identity-on-untouched, monotone decoding, exact replay)"
    );
}

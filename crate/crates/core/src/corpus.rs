//! Random instance generators for tests: small well-formed circuits,
//! deliberately mis-laid ones, and hand-rolled standard-mode sampling
//! programs. Sizes are kept small enough that exact enumeration of
//! every generated instance stays cheap.

use rand::Rng;

use crate::circuit::builder::{CircuitBuilder, Wire};
use crate::circuit::{Circuit, GateOp, Vertex};
use crate::machine::{Mode, SamplerSpec};

const MAX_COINS: usize = 6;

/// A small random circuit, already in normal shape (built through the
/// builder). Up to four inputs (none at all roughly a quarter of the
/// time), at most [`MAX_COINS`] random vertices, a few layers of mixed
/// gates with duplicate arguments allowed.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R) -> Circuit {
    let n_inputs = if rng.random_bool(0.25) { 0 } else { rng.random_range(1..=4) };
    let mut b = CircuitBuilder::new();
    let mut coins = 0usize;
    let mut pool: Vec<Wire> = (0..n_inputs).map(|_| b.input()).collect();
    if pool.is_empty() {
        coins += 1;
        pool.push(b.random());
    }

    let levels = rng.random_range(1..=4);
    for _ in 0..levels {
        if coins < MAX_COINS && rng.random_bool(0.3) {
            coins += 1;
            pool.push(b.random());
        }
        let width = rng.random_range(1..=4);
        let mut next = Vec::with_capacity(width);
        for _ in 0..width {
            let (op, arity) = match rng.random_range(0..5) {
                0 => (GateOp::And, rng.random_range(2..=3)),
                1 => (GateOp::Or, rng.random_range(2..=3)),
                2 => (GateOp::Not, 1),
                3 => (GateOp::Id, 1),
                _ => (GateOp::Maj, rng.random_range(1..=3)),
            };
            let args: Vec<Wire> =
                (0..arity).map(|_| pool[rng.random_range(0..pool.len())]).collect();
            next.push(b.gate(op, &args));
        }
        // Keep a few old wires reachable so edges of every length occur.
        if rng.random_bool(0.5) {
            next.push(pool[rng.random_range(0..pool.len())]);
        }
        pool = next;
    }

    let m = rng.random_range(1..=pool.len().min(3));
    let outputs: Vec<Wire> = pool[pool.len() - m..].to_vec();
    b.finish(&outputs)
}

/// A structurally sound circuit whose placement is garbage: random
/// layer labels and shuffled id spacing. Normalization must repair it
/// without changing its law.
pub fn random_messy_circuit<R: Rng + ?Sized>(rng: &mut R) -> Circuit {
    let clean = random_circuit(rng);
    let mut vertices: Vec<Vertex> = clean.vertices.clone();
    for v in &mut vertices {
        v.layer = rng.random_range(1..=8);
    }
    // Spread the ids out, preserving order so args stay resolvable.
    let mut next_id = 0usize;
    let mut new_id = vec![0usize; vertices.len() + 1];
    for v in &vertices {
        next_id += rng.random_range(1..=3);
        new_id[v.id] = next_id;
    }
    let vertices: Vec<Vertex> = vertices
        .into_iter()
        .map(|v| Vertex {
            id: new_id[v.id],
            layer: v.layer,
            kind: v.kind,
            args: v.args.iter().map(|&a| new_id[a]).collect(),
        })
        .collect();
    let outputs = clean.outputs.iter().map(|&o| new_id[o]).collect();
    Circuit { vertices, outputs }
}

/// A random expression over already-declared wires, with a bounded
/// number of fresh coins.
fn random_expr<R: Rng + ?Sized>(
    rng: &mut R,
    b: &mut CircuitBuilder,
    leaves: &[Wire],
    coins_left: &mut usize,
    depth: usize,
) -> Wire {
    if depth == 0 || rng.random_bool(0.3) {
        return if *coins_left > 0 && rng.random_bool(0.35) {
            *coins_left -= 1;
            b.random()
        } else {
            leaves[rng.random_range(0..leaves.len())]
        };
    }
    let x = random_expr(rng, b, leaves, coins_left, depth - 1);
    match rng.random_range(0..4) {
        0 => b.not(x),
        1 => {
            let y = random_expr(rng, b, leaves, coins_left, depth - 1);
            b.and(x, y)
        }
        2 => {
            let y = random_expr(rng, b, leaves, coins_left, depth - 1);
            b.or(x, y)
        }
        _ => {
            let y = random_expr(rng, b, leaves, coins_left, depth - 1);
            b.xor(x, y)
        }
    }
}

/// A random standard-mode sampling program. Selection outputs are
/// conjoined with the position's own mask bit, so the program never
/// tries to re-sample a decoded position, whatever the expressions do.
pub fn random_standard_spec<R: Rng + ?Sized>(rng: &mut R) -> SamplerSpec {
    let l = rng.random_range(2..=4);
    let rounds = rng.random_range(1..=3);
    let prompt_len = rng.random_range(0..=l - 1);

    let mut fb = CircuitBuilder::new();
    let st = crate::compile::StateWires::declare(&mut fb, l, 0);
    let leaves: Vec<Wire> =
        (1..=l).flat_map(|p| [st.mask(p), st.val(p)]).collect();
    let mut f_coins = 2usize;
    let fouts: Vec<Wire> = (1..=l)
        .map(|p| {
            let raw = random_expr(rng, &mut fb, &leaves, &mut f_coins, 2);
            fb.and(raw, st.mask(p))
        })
        .collect();
    let f = fb.finish(&fouts);

    let mut predictors = Vec::with_capacity(l);
    for _ in 0..l {
        let mut pb = CircuitBuilder::new();
        let st = crate::compile::StateWires::declare(&mut pb, l, 0);
        let leaves: Vec<Wire> =
            (1..=l).flat_map(|p| [st.mask(p), st.val(p)]).collect();
        let mut coins = 2usize;
        let out = random_expr(rng, &mut pb, &leaves, &mut coins, 2);
        let zero = pb.const_false();
        predictors.push(pb.finish(&[zero, out]));
    }

    SamplerSpec {
        mode: Mode::Standard,
        positions: l,
        rounds,
        prompt_len,
        output_len: rng.random_range(1..=l),
        step_indexed: false,
        f,
        g: None,
        predictors,
    }
}

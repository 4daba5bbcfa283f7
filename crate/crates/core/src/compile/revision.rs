//! Revision-mode compiler: one work block, rewritten in place.
//!
//! The state is `[ work: w ][ counter: d* ]` with `d* = bits_for(d)`.
//! Rewriting is allowed, so layer `k + 1` overwrites the head of the
//! work block at round `k + 1`; every predictor reads the pre-round
//! state, which still holds layer `k`. The counter is stored in clear
//! value bits and stepped by hardwired constants. Round 1 only seeds
//! the counter (and draws layer-1 coins when there is no prompt), the
//! middle rounds rewrite the whole state, and the final round copies
//! the last layer's output positions onto the state's tail, where the
//! machine reads them off.

use crate::circuit::builder::{CircuitBuilder, Wire};
use crate::circuit::normalize::normalize;
use crate::circuit::{Circuit, VertexKind};
use crate::gadgets::{bin, bits_for};
use crate::machine::{Mode, SamplerSpec};

use super::{Compiled, CompileError, StateWires};

pub fn compile(circuit: &Circuit) -> Result<Compiled, CompileError> {
    let c = normalize(circuit).map_err(CompileError::Unsound)?;
    let d = c.depth();
    let w = c.width();
    let n = c.num_inputs();
    let m = c.num_outputs();
    let dstar = bits_for(d);
    let l = w + dstar;
    let starts = c.layer_starts();
    let widths = c.layer_widths();

    // Written positions per counter value: round 1 touches everything
    // but the prompt, middle rounds rewrite the whole state, the final
    // round re-targets the tail.
    let in_branch = |k: usize, pos: usize| -> bool {
        match k {
            0 => pos > n,
            _ if k < d => true,
            _ => pos > l - m,
        }
    };

    let mut fb = CircuitBuilder::new();
    let st = StateWires::declare(&mut fb, l, 0);
    let cnt: Vec<Wire> = (1..=dstar).map(|j| st.val(w + j)).collect();
    let sels: Vec<Wire> =
        (0..=d).map(|k| fb.eq_const(&cnt, &bin(k, dstar))).collect();
    let fouts: Vec<Wire> = (1..=l)
        .map(|pos| {
            let terms: Vec<Wire> =
                (0..=d).filter(|&k| in_branch(k, pos)).map(|k| sels[k]).collect();
            if terms.is_empty() {
                fb.const_false()
            } else {
                fb.or_wide(&terms)
            }
        })
        .collect();
    let f = fb.finish(&fouts);

    let mut predictors = Vec::with_capacity(l);
    for pos in 1..=l {
        let mut pb = CircuitBuilder::new();
        let st = StateWires::declare(&mut pb, l, 0);
        let cnt: Vec<Wire> = (1..=dstar).map(|j| st.val(w + j)).collect();
        let mut terms = Vec::new();
        for k in 0..d {
            if !in_branch(k, pos) {
                continue;
            }
            let value = if pos > w {
                // Counter bit: step to the constant k + 1.
                if bin(k + 1, dstar)[pos - w - 1] {
                    Some(pb.const_true())
                } else {
                    None
                }
            } else if pos <= widths[k] {
                // Work position: vertex `pos` of layer k + 1.
                let v = &c.vertices[starts[k] + pos - 2];
                match v.kind {
                    VertexKind::Random => Some(pb.random()),
                    VertexKind::Gate(op) => {
                        let args: Vec<Wire> = v
                            .args
                            .iter()
                            .map(|&a| st.val(a - starts[k - 1] + 1))
                            .collect();
                        Some(pb.gate(op, &args))
                    }
                    VertexKind::Input => unreachable!("layer 1 inputs are never rewritten"),
                }
            } else {
                // Stale work position: park a fixed token.
                None
            };
            if let Some(value) = value {
                let sel = pb.eq_const(&cnt, &bin(k, dstar));
                terms.push(pb.and(sel, value));
            }
        }
        if in_branch(d, pos) {
            // Final round: copy the output bit from its head position.
            let sel = pb.eq_const(&cnt, &bin(d, dstar));
            let src = st.val(pos - (l - widths[d - 1]));
            terms.push(pb.and(sel, src));
        }
        let zero = pb.const_false();
        let out = if terms.is_empty() { zero } else { pb.or_wide(&terms) };
        predictors.push(pb.finish(&[zero, out]));
    }

    let spec = SamplerSpec {
        mode: Mode::Revision,
        positions: l,
        rounds: d + 1,
        prompt_len: n,
        output_len: m,
        step_indexed: false,
        f,
        g: None,
        predictors,
    };
    Ok(Compiled { spec, circuit: c })
}

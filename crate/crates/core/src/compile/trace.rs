//! Standard-mode compiler: one state position per vertex.
//!
//! The program's state mirrors the circuit vertex for vertex (`L = N`),
//! prompt bits seeding the input positions. Each round decodes one whole
//! layer (`D = d`): the selection circuit finds the first layer whose
//! positions are still masked by testing decodedness at each layer's
//! first position, and the predictor for position `j` evaluates vertex
//! `j`'s operation over the value bits of its argument positions (or
//! draws a private coin for a random vertex). With a prompt present,
//! layer 1 is born decoded and round `t` decodes layer `t + 1`; with no
//! prompt, round `t` decodes layer `t`.

use crate::circuit::builder::{CircuitBuilder, Wire};
use crate::circuit::normalize::normalize;
use crate::circuit::{Circuit, VertexKind};
use crate::gadgets::shift_r;
use crate::machine::{Mode, SamplerSpec};

use super::{Compiled, CompileError, StateWires};

pub fn compile(circuit: &Circuit) -> Result<Compiled, CompileError> {
    let c = normalize(circuit).map_err(CompileError::Unsound)?;
    let l = c.size();
    let d = c.depth();
    let starts = c.layer_starts();

    // Selection: layer i is decoded iff its first position is unmasked;
    // pick the earliest undecoded layer, one round each.
    let mut fb = CircuitBuilder::new();
    let st = StateWires::declare(&mut fb, l, 0);
    let decoded: Vec<Wire> = starts.iter().map(|&s| fb.not(st.mask(s))).collect();
    let shifted = fb.embed(&shift_r(d), &decoded);
    let delta: Vec<Wire> = (0..d)
        .map(|i| {
            let undecoded = fb.not(decoded[i]);
            fb.and(shifted[i], undecoded)
        })
        .collect();
    let fouts: Vec<Wire> = c.vertices.iter().map(|v| delta[v.layer - 1]).collect();
    let f = fb.finish(&fouts);

    let mut predictors = Vec::with_capacity(l);
    for v in &c.vertices {
        let mut pb = CircuitBuilder::new();
        let st = StateWires::declare(&mut pb, l, 0);
        let zero = pb.const_false();
        let out = match v.kind {
            // Prompt positions are never selected; emit a fixed token.
            VertexKind::Input => zero,
            VertexKind::Random => pb.random(),
            VertexKind::Gate(op) => {
                let args: Vec<Wire> = v.args.iter().map(|&a| st.val(a)).collect();
                pb.gate(op, &args)
            }
        };
        predictors.push(pb.finish(&[zero, out]));
    }

    let spec = SamplerSpec {
        mode: Mode::Standard,
        positions: l,
        rounds: d,
        prompt_len: c.num_inputs(),
        output_len: c.num_outputs(),
        step_indexed: false,
        f,
        g: None,
        predictors,
    };
    Ok(Compiled { spec, circuit: c })
}

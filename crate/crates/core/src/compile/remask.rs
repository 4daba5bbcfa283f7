//! Remask-mode compiler: two alternating work blocks and two counters.
//!
//! The circuit is normalized to even depth first. The state layout is
//!
//! ```text
//!   [ work A: w ][ counter A: d* ][ counter B: d* ][ work B: w ]
//! ```
//!
//! with `d* = bits_for(d)`. Odd layers live head-aligned in block A,
//! even layers tail-aligned in block B, so the prompt seeds the head and
//! the outputs land on the tail. Round `k + 1` reads the counter value
//! `k` and computes layer `k + 1` into the idle block while writing the
//! constant `k + 1` into that block's counter; the remask circuit then
//! masks whichever side holds the smaller counter, keeping at most
//! `w + d*` positions unmasked after every non-final round. The counter
//! is read from side B when position 1 is masked and side A otherwise,
//! and a side whose counter still reads zero was never written, so it is
//! left alone. The final round reads counter value `d`, matches no
//! branch, and merely fills the masked stale side with fixed tokens.

use crate::circuit::builder::{CircuitBuilder, Wire};
use crate::circuit::normalize::normalize_even;
use crate::circuit::{Circuit, VertexKind};
use crate::gadgets::{bin, bits_for};
use crate::machine::{Mode, SamplerSpec};

use super::{Compiled, CompileError, StateWires};

/// Per-layer position maps for the alternating layout.
struct Layout {
    w: usize,
    dstar: usize,
    l: usize,
    starts: Vec<usize>,
    widths: Vec<usize>,
}

impl Layout {
    fn new(c: &Circuit) -> Layout {
        let w = c.width();
        let dstar = bits_for(c.depth());
        Layout {
            w,
            dstar,
            l: 2 * w + 2 * dstar,
            starts: c.layer_starts(),
            widths: c.layer_widths(),
        }
    }

    /// State position of the `j`-th vertex of layer `i` (both one-based).
    fn pos(&self, layer: usize, j: usize) -> usize {
        if layer % 2 == 1 {
            j
        } else {
            self.l - self.widths[layer - 1] + j
        }
    }

    /// State position of the vertex with this id.
    fn pos_of_id(&self, c: &Circuit, id: usize) -> usize {
        let layer = c.vertices[id - 1].layer;
        self.pos(layer, id - self.starts[layer - 1] + 1)
    }

    fn cnt_a(&self, j: usize) -> usize {
        self.w + j
    }

    fn cnt_b(&self, j: usize) -> usize {
        self.w + self.dstar + j
    }

    /// Positions written in the branch for counter value `k` (the round
    /// computing layer `k + 1`), work block first, then the counter.
    fn sampled(&self, k: usize, prompt_len: usize) -> Vec<usize> {
        let mut s = Vec::new();
        if k == 0 {
            for j in prompt_len + 1..=self.widths[0] {
                s.push(self.pos(1, j));
            }
            for j in 1..=self.dstar {
                s.push(self.cnt_a(j));
            }
        } else if k % 2 == 1 {
            for j in 1..=self.widths[k] {
                s.push(self.pos(k + 1, j));
            }
            for j in 1..=self.dstar {
                s.push(self.cnt_b(j));
            }
        } else {
            for j in 1..=self.widths[k] {
                s.push(self.pos(k + 1, j));
            }
            for j in 1..=self.dstar {
                s.push(self.cnt_a(j));
            }
        }
        s.sort_unstable();
        s
    }
}

/// Wires of the counter as currently addressed: side B when position 1
/// is masked, side A otherwise.
fn counter_read(b: &mut CircuitBuilder, st: &StateWires, lay: &Layout) -> Vec<Wire> {
    let side_b = st.mask(1);
    let side_a = b.not(side_b);
    (1..=lay.dstar)
        .map(|j| {
            let from_b = b.and(side_b, st.val(lay.cnt_b(j)));
            let from_a = b.and(side_a, st.val(lay.cnt_a(j)));
            b.or(from_a, from_b)
        })
        .collect()
}

/// Value wire for the given vertex, reading arguments from the encoded
/// pre-round state; random vertices draw a private coin.
fn vertex_value(
    b: &mut CircuitBuilder,
    st: &StateWires,
    c: &Circuit,
    lay: &Layout,
    id: usize,
) -> Wire {
    let v = &c.vertices[id - 1];
    match v.kind {
        VertexKind::Random => b.random(),
        VertexKind::Gate(op) => {
            let args: Vec<Wire> =
                v.args.iter().map(|&a| st.val(lay.pos_of_id(c, a))).collect();
            b.gate(op, &args)
        }
        VertexKind::Input => unreachable!("inputs are prompt-seeded, never sampled"),
    }
}

pub fn compile(circuit: &Circuit) -> Result<Compiled, CompileError> {
    let c = normalize_even(circuit).map_err(CompileError::Unsound)?;
    let d = c.depth();
    let n = c.num_inputs();
    let m = c.num_outputs();
    let lay = Layout::new(&c);
    let l = lay.l;

    // Selection: decode the counter, then fire the branch's positions.
    let mut fb = CircuitBuilder::new();
    let st = StateWires::declare(&mut fb, l, 0);
    let read = counter_read(&mut fb, &st, &lay);
    let sels: Vec<Wire> =
        (0..d).map(|k| fb.eq_const(&read, &bin(k, lay.dstar))).collect();
    let mut member = vec![Vec::new(); l + 1];
    for (k, &sel) in sels.iter().enumerate() {
        for pos in lay.sampled(k, n) {
            member[pos].push(sel);
        }
    }
    let fouts: Vec<Wire> = (1..=l)
        .map(|pos| {
            if member[pos].is_empty() {
                fb.const_false()
            } else {
                fb.or_wide(&member[pos])
            }
        })
        .collect();
    let f = fb.finish(&fouts);

    // Remask: compare the two counters and mask the stale side; a side
    // whose counter reads zero was never written and is left alone.
    let mut gb = CircuitBuilder::new();
    let st = StateWires::declare(&mut gb, l, 0);
    let cnt_a: Vec<Wire> = (1..=lay.dstar).map(|j| st.val(lay.cnt_a(j))).collect();
    let cnt_b: Vec<Wire> = (1..=lay.dstar).map(|j| st.val(lay.cnt_b(j))).collect();
    let a_stale = gb.lt(&cnt_a, &cnt_b);
    let b_written = {
        let zero = gb.eq_const(&cnt_b, &bin(0, lay.dstar));
        gb.not(zero)
    };
    let b_stale = {
        let not_lt = gb.not(a_stale);
        gb.and(not_lt, b_written)
    };
    let gouts: Vec<Wire> = (1..=l)
        .map(|pos| if pos <= lay.w + lay.dstar { a_stale } else { b_stale })
        .collect();
    let g = gb.finish(&gouts);

    // Predictors: per position, mux the per-branch value over the
    // decoded counter; counters take the hardwired constant k + 1.
    let mut predictors = Vec::with_capacity(l);
    for pos in 1..=l {
        let mut pb = CircuitBuilder::new();
        let st = StateWires::declare(&mut pb, l, 0);
        let read = counter_read(&mut pb, &st, &lay);
        let mut terms = Vec::new();
        for k in 0..d {
            let in_work = lay.sampled(k, n).contains(&pos);
            let is_cnt_a = (1..=lay.dstar).any(|j| lay.cnt_a(j) == pos);
            let is_cnt_b = (1..=lay.dstar).any(|j| lay.cnt_b(j) == pos);
            if is_cnt_a || is_cnt_b {
                let takes = if k == 0 || k % 2 == 0 { is_cnt_a } else { is_cnt_b };
                if takes {
                    let j = if is_cnt_a { pos - lay.w } else { pos - lay.w - lay.dstar };
                    if bin(k + 1, lay.dstar)[j - 1] {
                        terms.push(pb.eq_const(&read, &bin(k, lay.dstar)));
                    }
                }
            } else if in_work {
                let layer = k + 1;
                let j = if layer % 2 == 1 { pos } else { pos - (l - lay.widths[k]) };
                let id = lay.starts[k] + j - 1;
                let sel = pb.eq_const(&read, &bin(k, lay.dstar));
                let val = vertex_value(&mut pb, &st, &c, &lay, id);
                terms.push(pb.and(sel, val));
            }
        }
        let zero = pb.const_false();
        let out = if terms.is_empty() { zero } else { pb.or_wide(&terms) };
        predictors.push(pb.finish(&[zero, out]));
    }

    let spec = SamplerSpec {
        mode: Mode::Remask,
        positions: l,
        rounds: d + 1,
        prompt_len: n,
        output_len: m,
        step_indexed: false,
        f,
        g: Some(g),
        predictors,
    };
    Ok(Compiled { spec, circuit: c })
}

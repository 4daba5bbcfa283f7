//! Programmatic circuit construction.
//!
//! The builder tracks a DAG of wires; `finish` runs the shared layering
//! pipeline, so every built circuit comes out normalized: layer gaps are
//! bridged with identity chains, outputs are routed to the last layer and
//! renumbered into tail position, and so on. Callers combine wires freely
//! without thinking about layers.

use super::normalize::{rebuild, Proto};
use super::{Circuit, GateOp, VertexKind};

/// Handle to a vertex under construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wire(usize);

#[derive(Default)]
pub struct CircuitBuilder {
    protos: Vec<Proto>,
    const_true: Option<Wire>,
    const_false: Option<Wire>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        CircuitBuilder::default()
    }

    pub fn input(&mut self) -> Wire {
        self.push(VertexKind::Input, vec![])
    }

    pub fn inputs(&mut self, count: usize) -> Vec<Wire> {
        (0..count).map(|_| self.input()).collect()
    }

    /// A fresh uniform coin.
    pub fn random(&mut self) -> Wire {
        self.push(VertexKind::Random, vec![])
    }

    fn push(&mut self, kind: VertexKind, args: Vec<usize>) -> Wire {
        self.protos.push(Proto { kind, args });
        Wire(self.protos.len() - 1)
    }

    pub fn gate(&mut self, op: GateOp, args: &[Wire]) -> Wire {
        assert!(op.arity_ok(args.len()), "{op} gate with arity {}", args.len());
        self.push(VertexKind::Gate(op), args.iter().map(|w| w.0).collect())
    }

    pub fn and(&mut self, a: Wire, b: Wire) -> Wire {
        self.gate(GateOp::And, &[a, b])
    }

    pub fn or(&mut self, a: Wire, b: Wire) -> Wire {
        self.gate(GateOp::Or, &[a, b])
    }

    pub fn not(&mut self, a: Wire) -> Wire {
        self.gate(GateOp::Not, &[a])
    }

    pub fn id(&mut self, a: Wire) -> Wire {
        self.gate(GateOp::Id, &[a])
    }

    pub fn maj(&mut self, args: &[Wire]) -> Wire {
        self.gate(GateOp::Maj, args)
    }

    /// Single wide gate; a one-element slice passes through.
    pub fn and_wide(&mut self, args: &[Wire]) -> Wire {
        match args.len() {
            0 => panic!("and over nothing"),
            1 => args[0],
            _ => self.gate(GateOp::And, args),
        }
    }

    pub fn or_wide(&mut self, args: &[Wire]) -> Wire {
        match args.len() {
            0 => panic!("or over nothing"),
            1 => args[0],
            _ => self.gate(GateOp::Or, args),
        }
    }

    /// Balanced fan-in-two tree.
    pub fn and_tree(&mut self, args: &[Wire]) -> Wire {
        self.tree(GateOp::And, args)
    }

    pub fn or_tree(&mut self, args: &[Wire]) -> Wire {
        self.tree(GateOp::Or, args)
    }

    fn tree(&mut self, op: GateOp, args: &[Wire]) -> Wire {
        assert!(!args.is_empty());
        let mut level: Vec<Wire> = args.to_vec();
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            for pair in level.chunks(2) {
                next.push(if pair.len() == 2 { self.gate(op, pair) } else { pair[0] });
            }
            level = next;
        }
        level[0]
    }

    /// `(a | b) & !(a & b)`.
    pub fn xor(&mut self, a: Wire, b: Wire) -> Wire {
        let o = self.or(a, b);
        let n = self.and(a, b);
        let n = self.not(n);
        self.and(o, n)
    }

    pub fn xor_tree(&mut self, args: &[Wire]) -> Wire {
        assert!(!args.is_empty());
        let mut level: Vec<Wire> = args.to_vec();
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            for pair in level.chunks(2) {
                next.push(if pair.len() == 2 { self.xor(pair[0], pair[1]) } else { pair[0] });
            }
            level = next;
        }
        level[0]
    }

    fn anchor(&mut self) -> Wire {
        if self.protos.is_empty() {
            self.random()
        } else {
            Wire(0)
        }
    }

    /// A wire that always carries true: `anchor | !anchor`. Cached.
    pub fn const_true(&mut self) -> Wire {
        if let Some(w) = self.const_true {
            return w;
        }
        let a = self.anchor();
        let n = self.not(a);
        let w = self.or(a, n);
        self.const_true = Some(w);
        w
    }

    pub fn const_false(&mut self) -> Wire {
        if let Some(w) = self.const_false {
            return w;
        }
        let a = self.anchor();
        let n = self.not(a);
        let w = self.and(a, n);
        self.const_false = Some(w);
        w
    }

    pub fn const_bit(&mut self, b: bool) -> Wire {
        if b {
            self.const_true()
        } else {
            self.const_false()
        }
    }

    /// True when `bits` (most significant first) spell out `pattern`.
    /// Literals feed a balanced and-tree. An empty pattern is true.
    pub fn eq_const(&mut self, bits: &[Wire], pattern: &[bool]) -> Wire {
        assert_eq!(bits.len(), pattern.len());
        if bits.is_empty() {
            return self.const_true();
        }
        let lits: Vec<Wire> = bits
            .iter()
            .zip(pattern)
            .map(|(&w, &want)| if want { self.id(w) } else { self.not(w) })
            .collect();
        self.and_tree(&lits)
    }

    /// `bits + 1 mod 2^k`, most significant bit first. Carries come from
    /// suffix-ands computed by doubling, so depth grows logarithmically.
    pub fn increment(&mut self, bits: &[Wire]) -> Vec<Wire> {
        let k = bits.len();
        assert!(k >= 1);
        if k == 1 {
            return vec![self.not(bits[0])];
        }
        // suffix[j] = and(bits[j..])
        let mut suffix: Vec<Wire> = bits.to_vec();
        let mut stride = 1;
        while stride < k {
            let prev = suffix.clone();
            for j in 0..k {
                if j + stride < k {
                    suffix[j] = self.and(prev[j], prev[j + stride]);
                }
            }
            stride *= 2;
        }
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            if j == k - 1 {
                out.push(self.not(bits[j]));
            } else {
                // bits[j] xor suffix[j + 1], sharing the suffix-and:
                // (bits[j] | suffix[j+1]) & !(bits[j] & suffix[j+1])
                // and the conjunction is exactly suffix[j].
                let o = self.or(bits[j], suffix[j + 1]);
                let n = self.not(suffix[j]);
                out.push(self.and(o, n));
            }
        }
        out
    }

    /// Unsigned `a < b`, both most-significant-first and equally wide.
    pub fn lt(&mut self, a: &[Wire], b: &[Wire]) -> Wire {
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        let mut eqs: Vec<Wire> = Vec::with_capacity(a.len());
        let mut terms = Vec::with_capacity(a.len());
        for j in 0..a.len() {
            let na = self.not(a[j]);
            let mut factors = eqs.clone();
            factors.push(na);
            factors.push(b[j]);
            terms.push(self.and_tree(&factors));
            // a[j] == b[j] as (a & b) | (!a & !b)
            let both = self.and(a[j], b[j]);
            let nb = self.not(b[j]);
            let neither = self.and(na, nb);
            eqs.push(self.or(both, neither));
        }
        self.or_tree(&terms)
    }

    /// Multi-way selection. Branch `j` drives the output while `selector`
    /// equals `patterns[j]`; when nothing matches, the output is all
    /// zeros. Lanes are and-gated and merged with one wide or.
    pub fn select(&mut self, selector: &[Wire], branches: &[(Vec<bool>, Vec<Wire>)]) -> Vec<Wire> {
        assert!(!branches.is_empty());
        let width = branches[0].1.len();
        let eqs: Vec<Wire> =
            branches.iter().map(|(p, _)| self.eq_const(selector, p)).collect();
        (0..width)
            .map(|i| {
                let lanes: Vec<Wire> = branches
                    .iter()
                    .zip(&eqs)
                    .map(|((_, wires), &e)| {
                        assert_eq!(wires.len(), width, "ragged select branch");
                        self.and(e, wires[i])
                    })
                    .collect();
                self.or_wide(&lanes)
            })
            .collect()
    }

    /// Inlines a structurally sound circuit: its inputs are replaced by
    /// the given wires, its random vertices become fresh coins, and its
    /// output wires are returned.
    pub fn embed(&mut self, c: &Circuit, inputs: &[Wire]) -> Vec<Wire> {
        assert_eq!(inputs.len(), c.num_inputs(), "embed input count");
        let order = super::topo_indices(c).expect("embed requires a sound circuit");
        let index: std::collections::BTreeMap<usize, usize> =
            c.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        let mut wire_of = vec![Wire(usize::MAX); c.vertices.len()];
        let mut next_input = 0;
        // Inputs map in declaration order.
        for (i, v) in c.vertices.iter().enumerate() {
            if v.kind == VertexKind::Input {
                wire_of[i] = inputs[next_input];
                next_input += 1;
            }
        }
        for &i in &order {
            let v = &c.vertices[i];
            match v.kind {
                VertexKind::Input => {}
                VertexKind::Random => wire_of[i] = self.random(),
                VertexKind::Gate(op) => {
                    let args: Vec<Wire> = v.args.iter().map(|a| wire_of[index[a]]).collect();
                    wire_of[i] = self.gate(op, &args);
                }
            }
        }
        c.outputs.iter().map(|o| wire_of[index[o]]).collect()
    }

    pub fn finish(self, outputs: &[Wire]) -> Circuit {
        assert!(!outputs.is_empty(), "finish requires outputs");
        rebuild(self.protos, outputs.iter().map(|w| w.0).collect(), false)
    }

    /// Like `finish`, padded to even depth.
    pub fn finish_even(self, outputs: &[Wire]) -> Circuit {
        assert!(!outputs.is_empty(), "finish requires outputs");
        rebuild(self.protos, outputs.iter().map(|w| w.0).collect(), true)
    }
}

/// Convenience: a circuit computing xor of `n` inputs.
pub fn xor_circuit(n: usize) -> Circuit {
    assert!(n >= 1);
    let mut b = CircuitBuilder::new();
    let ins = b.inputs(n);
    let out = b.xor_tree(&ins);
    // A single input is its own xor; give it a gate so depth >= 2.
    let out = if n == 1 { b.id(out) } else { out };
    b.finish(&[out])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Evaluator;
    use crate::gadgets::bin;

    fn eval1(c: &Circuit, inputs: &[bool]) -> bool {
        c.eval(inputs, &[]).unwrap()[0]
    }

    #[test]
    fn built_circuits_are_valid() {
        let mut b = CircuitBuilder::new();
        let x = b.input();
        let y = b.input();
        let w = b.xor(x, y);
        let c = b.finish(&[w]);
        assert!(c.validate().is_valid(), "{}", c.validate());
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_eq!(eval1(&c, &[x, y]), x ^ y);
        }
    }

    #[test]
    fn constants_are_constant() {
        // Anchor is a coin here; the constants must not depend on it.
        let mut b = CircuitBuilder::new();
        let _coin = b.random();
        let t = b.const_true();
        let f = b.const_false();
        let c = b.finish(&[t, f]);
        let ev = Evaluator::new(&c).unwrap();
        for coin in [false, true] {
            assert_eq!(ev.eval(&[], &[coin]), vec![true, false]);
        }
    }

    #[test]
    fn increment_wraps_mod_pow2() {
        for k in 1..=6usize {
            let mut b = CircuitBuilder::new();
            let ins = b.inputs(k);
            let outs = b.increment(&ins);
            let c = b.finish(&outs);
            assert!(c.validate().is_valid(), "{}", c.validate());
            for v in 0..(1u32 << k) {
                let bits: Vec<bool> = (0..k).map(|j| (v >> (k - 1 - j)) & 1 == 1).collect();
                let out = c.eval(&bits, &[]).unwrap();
                let got = out.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                assert_eq!(got, (v + 1) % (1 << k), "k={k} v={v}");
            }
        }
    }

    #[test]
    fn lt_matches_unsigned_compare() {
        for k in 1..=4usize {
            let mut b = CircuitBuilder::new();
            let a = b.inputs(k);
            let bb = b.inputs(k);
            let w = b.lt(&a, &bb);
            let c = b.finish(&[w]);
            for x in 0..(1u32 << k) {
                for y in 0..(1u32 << k) {
                    let mut bits = Vec::new();
                    for j in 0..k {
                        bits.push((x >> (k - 1 - j)) & 1 == 1);
                    }
                    for j in 0..k {
                        bits.push((y >> (k - 1 - j)) & 1 == 1);
                    }
                    assert_eq!(eval1(&c, &bits), x < y, "k={k} {x} < {y}");
                }
            }
        }
    }

    #[test]
    fn eq_const_and_select() {
        let mut b = CircuitBuilder::new();
        let sel = b.inputs(2);
        let payload = b.inputs(2);
        let t = b.const_true();
        let f = b.const_false();
        // selector 01 -> payload, selector 10 -> (1, 0), else zeros.
        let branches = vec![
            (bin(1, 2), payload.clone()),
            (bin(2, 2), vec![t, f]),
        ];
        let outs = b.select(&sel, &branches);
        let c = b.finish(&outs);
        let cases = [
            ([false, false], [true, true], [false, false]),
            ([false, true], [true, false], [true, false]),
            ([true, false], [false, true], [true, false]),
            ([true, true], [true, true], [false, false]),
        ];
        for (sel, pay, want) in cases {
            let mut ins = sel.to_vec();
            ins.extend_from_slice(&pay);
            assert_eq!(c.eval(&ins, &[]).unwrap(), want.to_vec());
        }
    }

    #[test]
    fn embed_instantiates_fresh_coins() {
        // A one-coin circuit embedded twice gives two independent coins.
        let mut inner_b = CircuitBuilder::new();
        let r = inner_b.random();
        let out = inner_b.id(r);
        let inner = inner_b.finish(&[out]);

        let mut b = CircuitBuilder::new();
        let a = b.embed(&inner, &[]);
        let c2 = b.embed(&inner, &[]);
        let w = b.xor(a[0], c2[0]);
        let c = b.finish(&[w]);
        assert_eq!(c.num_randoms(), 2);
        let d = c.output_distribution(&[], 4).unwrap();
        assert_eq!(d.get("0"), d.get("1"));
    }

    #[test]
    fn xor_circuit_families() {
        for n in 1..=5usize {
            let c = xor_circuit(n);
            assert!(c.validate().is_valid());
            for word in 0u32..(1 << n) {
                let bits: Vec<bool> = (0..n).map(|j| (word >> j) & 1 == 1).collect();
                let want = bits.iter().filter(|&&b| b).count() % 2 == 1;
                assert_eq!(eval1(&c, &bits), want);
            }
        }
    }
}

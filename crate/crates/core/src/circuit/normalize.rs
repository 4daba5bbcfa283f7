//! Repairs placement violations: relayers vertices, pads long edges with
//! identity chains, routes outputs to the last layer, renumbers ids.
//!
//! Normalization never touches semantics: inputs keep their relative
//! order, outputs keep their declared order and meaning, and no random
//! vertex is added or removed, so the output distribution on every input
//! is preserved (coins may be consumed in a different order).

use super::{topo_indices, Circuit, ValidationReport, Vertex, VertexKind};
use crate::circuit::GateOp;
use std::collections::BTreeMap;

/// Normalizes a structurally sound circuit. Already-valid circuits are
/// returned unchanged.
pub fn normalize(c: &Circuit) -> Result<Circuit, ValidationReport> {
    normalize_opts(c, false)
}

/// Like [`normalize`], additionally padding the result to even depth.
pub fn normalize_even(c: &Circuit) -> Result<Circuit, ValidationReport> {
    normalize_opts(c, true)
}

fn normalize_opts(c: &Circuit, even_depth: bool) -> Result<Circuit, ValidationReport> {
    let report = c.validate();
    if !report.is_structurally_sound() {
        return Err(report);
    }
    if report.is_valid() && (!even_depth || c.depth() % 2 == 0) {
        return Ok(c.clone());
    }
    let order = topo_indices(c).expect("sound circuit has a topo order");
    let mut proto_of_index = vec![0usize; c.vertices.len()];
    for (p, &i) in order.iter().enumerate() {
        proto_of_index[i] = p;
    }
    let index: BTreeMap<usize, usize> =
        c.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let mut protos = Vec::with_capacity(c.vertices.len());
    for &i in &order {
        let v = &c.vertices[i];
        protos.push(Proto {
            kind: v.kind,
            args: v.args.iter().map(|a| proto_of_index[index[a]]).collect(),
        });
    }
    let outputs: Vec<usize> = c.outputs.iter().map(|o| proto_of_index[index[o]]).collect();
    Ok(rebuild(protos, outputs, even_depth))
}

/// A vertex before layers and ids are assigned. `args` index earlier
/// entries of the proto list (topological order is required).
#[derive(Clone, Debug)]
pub(crate) struct Proto {
    pub kind: VertexKind,
    pub args: Vec<usize>,
}

/// Assigns layers and ids from scratch. Shared by `normalize` and by the
/// circuit builder, so circuits from either path have identical shape
/// guarantees:
///
/// * inputs in layer 1, in their declaration order;
/// * gates at their longest-path layer; random vertices directly below
///   their shallowest consumer (layer 1 only for input-free circuits);
/// * every edge spans exactly one layer (identity padding);
/// * outputs are the trailing ids of the last layer, in declared order,
///   and are pairwise distinct (duplicates get their own identity tails);
/// * ids are 1..=N, non-decreasing in layer.
pub(crate) fn rebuild(mut protos: Vec<Proto>, outputs: Vec<usize>, even_depth: bool) -> Circuit {
    assert!(!outputs.is_empty(), "rebuild requires at least one output");
    let n_inputs = protos.iter().filter(|p| p.kind == VertexKind::Input).count();
    let random_base = if n_inputs == 0 { 1 } else { 2 };

    // Longest-path layering with provisional random placement.
    let mut layer = vec![0usize; protos.len()];
    for i in 0..protos.len() {
        layer[i] = match protos[i].kind {
            VertexKind::Input => 1,
            VertexKind::Random => random_base,
            VertexKind::Gate(_) => {
                1 + protos[i].args.iter().map(|&a| layer[a]).max().expect("gate has args")
            }
        };
    }
    // Lift each random to sit directly below its shallowest consumer.
    let mut min_consumer = vec![usize::MAX; protos.len()];
    for i in 0..protos.len() {
        for &a in &protos[i].args {
            min_consumer[a] = min_consumer[a].min(layer[i]);
        }
    }
    for i in 0..protos.len() {
        if protos[i].kind == VertexKind::Random && min_consumer[i] != usize::MAX {
            layer[i] = min_consumer[i] - 1;
        }
    }

    let base_depth = layer.iter().copied().max().unwrap_or(1);
    let mut depth = base_depth;
    let has_dup = {
        let mut seen = std::collections::BTreeSet::new();
        outputs.iter().any(|&o| !seen.insert(o))
    };
    if has_dup {
        depth += 1;
    }
    if even_depth && depth % 2 == 1 {
        depth += 1;
    }

    // Identity padding, memoized per (vertex, target layer).
    let mut pad_memo: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    fn pad_to(
        src: usize,
        target: usize,
        protos: &mut Vec<Proto>,
        layer: &mut Vec<usize>,
        memo: &mut BTreeMap<(usize, usize), usize>,
    ) -> usize {
        if layer[src] == target {
            return src;
        }
        if let Some(&hit) = memo.get(&(src, target)) {
            return hit;
        }
        let below = pad_to(src, target - 1, protos, layer, memo);
        protos.push(Proto { kind: VertexKind::Gate(GateOp::Id), args: vec![below] });
        layer.push(target);
        let id = protos.len() - 1;
        memo.insert((src, target), id);
        id
    }

    // Bridge every long edge.
    for i in 0..protos.len() {
        if let VertexKind::Gate(_) = protos[i].kind {
            let target = layer[i] - 1;
            let args = protos[i].args.clone();
            let padded: Vec<usize> = args
                .into_iter()
                .map(|a| pad_to(a, target, &mut protos, &mut layer, &mut pad_memo))
                .collect();
            protos[i].args = padded;
        }
    }

    // Route outputs to the last layer. With duplicates, every output gets
    // a private identity tail so the final vertices are distinct.
    let finals: Vec<usize> = outputs
        .iter()
        .map(|&o| {
            if has_dup {
                let below = pad_to(o, depth - 1, &mut protos, &mut layer, &mut pad_memo);
                protos.push(Proto { kind: VertexKind::Gate(GateOp::Id), args: vec![below] });
                layer.push(depth);
                protos.len() - 1
            } else {
                pad_to(o, depth, &mut protos, &mut layer, &mut pad_memo)
            }
        })
        .collect();

    // Renumber: by layer, creation order within a layer, except that the
    // last layer lists non-outputs first and then the outputs in declared
    // order.
    let is_final: BTreeMap<usize, usize> =
        finals.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut order: Vec<usize> = (0..protos.len()).collect();
    order.sort_by_key(|&p| {
        let out_rank = if layer[p] == depth {
            match is_final.get(&p) {
                Some(&k) => (1, k),
                None => (0, p),
            }
        } else {
            (0, p)
        };
        (layer[p], out_rank)
    });
    let mut id_of = vec![0usize; protos.len()];
    for (k, &p) in order.iter().enumerate() {
        id_of[p] = k + 1;
    }
    let vertices: Vec<Vertex> = order
        .iter()
        .map(|&p| Vertex {
            id: id_of[p],
            layer: layer[p],
            kind: protos[p].kind,
            args: protos[p].args.iter().map(|&a| id_of[a]).collect(),
        })
        .collect();
    let outputs: Vec<usize> = finals.iter().map(|&p| id_of[p]).collect();
    Circuit { vertices, outputs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Evaluator, Violation};
    use crate::dist::assert_equal;

    fn v(id: usize, layer: usize, kind: VertexKind, args: &[usize]) -> Vertex {
        Vertex { id, layer, kind, args: args.to_vec() }
    }

    #[test]
    fn already_valid_circuits_pass_through() {
        // Single coin copied once: two vertices, depth two.
        let c = Circuit {
            vertices: vec![
                v(1, 1, VertexKind::Random, &[]),
                v(2, 2, VertexKind::Gate(GateOp::Id), &[1]),
            ],
            outputs: vec![2],
        };
        assert!(c.validate().is_valid());
        let n = normalize(&c).unwrap();
        assert_eq!(n, c);
        assert_eq!(n.size(), 2);
        assert_eq!(n.depth(), 2);
    }

    #[test]
    fn repairs_layers_spans_and_output_position() {
        // Messy: garbage layers, an edge that would span three layers,
        // output not at the last layer, ids with gaps.
        let c = Circuit {
            vertices: vec![
                v(10, 7, VertexKind::Input, &[]),
                v(20, 1, VertexKind::Input, &[]),
                v(5, 2, VertexKind::Gate(GateOp::And), &[10, 20]),
                v(9, 9, VertexKind::Gate(GateOp::Or), &[5, 20]),
                v(3, 4, VertexKind::Gate(GateOp::Not), &[9]),
            ],
            outputs: vec![3, 5],
        };
        assert!(c.validate().is_structurally_sound());
        assert!(!c.validate().is_valid());
        let n = normalize(&c).unwrap();
        assert!(n.validate().is_valid(), "{}", n.validate());
        // Same input/output behaviour.
        for word in 0u32..4 {
            let x = [(word & 1) == 1, (word & 2) == 2];
            let a = x[0] && x[1];
            let o = a || x[1];
            let want = vec![!o, a];
            assert_eq!(n.eval(&x, &[]).unwrap(), want);
        }
        // Idempotent.
        assert_eq!(normalize(&n).unwrap(), n);
    }

    #[test]
    fn duplicate_outputs_get_identity_tails() {
        // One coin declared as both outputs: the repaired circuit must
        // emit 00 and 11 with probability one half each.
        let c = Circuit {
            vertices: vec![v(1, 1, VertexKind::Random, &[])],
            outputs: vec![1, 1],
        };
        assert!(c.validate().placement.contains(&Violation::DuplicateOutput { id: 1 }));
        let n = normalize(&c).unwrap();
        assert!(n.validate().is_valid(), "{}", n.validate());
        assert_eq!(n.outputs.len(), 2);
        assert_ne!(n.outputs[0], n.outputs[1]);
        let d = n.output_distribution(&[], 4).unwrap();
        let mut want = crate::dist::Distribution::new();
        want.add("00".into(), crate::dyadic::Dyadic::pow2_inv(1));
        want.add("11".into(), crate::dyadic::Dyadic::pow2_inv(1));
        assert_eq!(assert_equal(&d, &want), Ok(()));
    }

    #[test]
    fn even_depth_padding() {
        // Depth 1 (a single input, also the output) becomes depth 2.
        let c = Circuit {
            vertices: vec![v(1, 1, VertexKind::Input, &[])],
            outputs: vec![1],
        };
        assert!(c.validate().is_valid());
        let n = normalize_even(&c).unwrap();
        assert!(n.validate().is_valid(), "{}", n.validate());
        assert_eq!(n.depth(), 2);
        assert_eq!(n.eval(&[true], &[]).unwrap(), vec![true]);
        // Even input stays untouched.
        assert_eq!(normalize_even(&n).unwrap(), n);
    }

    #[test]
    fn distribution_is_preserved() {
        // Mix of coins and gates with bad placement.
        let c = Circuit {
            vertices: vec![
                v(1, 1, VertexKind::Input, &[]),
                v(2, 1, VertexKind::Random, &[]),
                v(3, 5, VertexKind::Random, &[]),
                v(4, 3, VertexKind::Gate(GateOp::Or), &[1, 2]),
                v(5, 2, VertexKind::Gate(GateOp::And), &[4, 3]),
            ],
            outputs: vec![5, 4],
        };
        let n = normalize(&c).unwrap();
        assert!(n.validate().is_valid(), "{}", n.validate());
        let ev_before = Evaluator::new(&c).unwrap();
        let ev_after = Evaluator::new(&n).unwrap();
        for x in [false, true] {
            let before = ev_before.output_distribution(&[x], 8).unwrap();
            let after = ev_after.output_distribution(&[x], 8).unwrap();
            assert_eq!(assert_equal(&before, &after), Ok(()));
        }
    }

    #[test]
    fn structural_problems_are_not_repaired() {
        let c = Circuit {
            vertices: vec![v(1, 1, VertexKind::Gate(GateOp::Not), &[2])],
            outputs: vec![1],
        };
        assert!(normalize(&c).is_err());
    }
}

//! Reusable circuit building blocks with audited depths.
//!
//! Each gadget is a complete valid circuit; callers either evaluate it
//! directly or inline it into a larger build with `CircuitBuilder::embed`.
//! Depths are exact and frozen in the tests:
//!
//! | gadget          | depth                                |
//! |-----------------|--------------------------------------|
//! | `shift_r(k)`    | 3                                    |
//! | `add_one(k)`    | 2 for k = 1, otherwise ceil(lg k) + 3|
//! | `identify(p)`   | 2 for k = 1, otherwise ceil(lg k) + 2|
//! | `mux(s, k, t)`  | identify depth of `s` plus 2         |

use crate::circuit::builder::CircuitBuilder;
use crate::circuit::Circuit;

/// `value` as `width` bits, most significant first.
pub fn bin(value: usize, width: usize) -> Vec<bool> {
    assert!(width >= usize::BITS as usize || value < (1 << width), "{value} needs more than {width} bits");
    (0..width).map(|j| (value >> (width - 1 - j)) & 1 == 1).collect()
}

/// Number of bits needed to write any of `0..=max` in binary.
pub fn bits_for(max: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) <= max {
        bits += 1;
    }
    bits.max(1)
}

/// Shift right by one: output 1 is constant true, output `j` copies
/// input `j - 1`. The constant head is what lets a chain of these
/// bootstrap a progression from nothing.
pub fn shift_r(k: usize) -> Circuit {
    assert!(k >= 1);
    let mut b = CircuitBuilder::new();
    let ins = b.inputs(k);
    let mut outs = vec![b.const_true()];
    outs.extend(ins[..k - 1].iter().copied());
    b.finish(&outs)
}

/// Increment modulo `2^k`, most significant bit first.
pub fn add_one(k: usize) -> Circuit {
    assert!(k >= 1);
    let mut b = CircuitBuilder::new();
    let ins = b.inputs(k);
    let outs = b.increment(&ins);
    b.finish(&outs)
}

/// One output: true exactly when the input spells `pattern`.
pub fn identify(pattern: &[bool]) -> Circuit {
    assert!(!pattern.is_empty());
    let mut b = CircuitBuilder::new();
    let ins = b.inputs(pattern.len());
    let out = b.eq_const(&ins, pattern);
    b.finish(&[out])
}

/// `branches`-way multiplexer: inputs are `selector_width` selector bits
/// followed by `branches * payload` payload bits. When the selector
/// reads `v` in `1..=branches`, the output is branch `v`'s payload;
/// selector zero (or out of range) yields all zeros.
pub fn mux(selector_width: usize, branches: usize, payload: usize) -> Circuit {
    assert!(selector_width >= 1 && branches >= 1 && payload >= 1);
    assert!(
        branches < (1usize << selector_width),
        "selector too narrow for {branches} branches"
    );
    let mut b = CircuitBuilder::new();
    let sel = b.inputs(selector_width);
    let lanes: Vec<(Vec<bool>, Vec<crate::circuit::builder::Wire>)> = (1..=branches)
        .map(|v| (bin(v, selector_width), b.inputs(payload)))
        .collect();
    let outs = b.select(&sel, &lanes);
    b.finish(&outs)
}

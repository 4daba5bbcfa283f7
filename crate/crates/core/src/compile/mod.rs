//! Compilers from layered circuits to sampler programs.
//!
//! Each strategy turns a circuit into a program whose output distribution
//! on a prompt equals the circuit's output distribution on that input,
//! exactly. They trade shape differently:
//!
//! * [`trace`]: standard mode, one state position per circuit vertex
//!   (`L = N`), one round per layer (`D = d`);
//! * [`remask`]: remask mode, two alternating work blocks plus two
//!   counter blocks (`L = 2w + 2⌈log2(d+1)⌉`, `D = d + 1`), keeping the
//!   unmasked footprint small;
//! * [`revision`]: revision mode, a single work block overwritten in
//!   place (`L = w + ⌈log2(d+1)⌉`, `D = d + 1`).
//!
//! Compilation normalizes the circuit first (the remask strategy also
//! pads it to even depth); the normalized circuit rides along in the
//! result as the reference for verification.

pub mod remask;
pub mod revision;
pub mod trace;

use crate::circuit::builder::{CircuitBuilder, Wire};
use crate::circuit::{Circuit, ValidationReport};
use crate::machine::SamplerSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Trace,
    Remask,
    Revision,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Trace => "trace",
            Strategy::Remask => "remask",
            Strategy::Revision => "revision",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "trace" => Some(Strategy::Trace),
            "remask" => Some(Strategy::Remask),
            "revision" => Some(Strategy::Revision),
            _ => None,
        }
    }

    pub fn all() -> [Strategy; 3] {
        [Strategy::Trace, Strategy::Remask, Strategy::Revision]
    }
}

/// A compiled program together with the normalized circuit it simulates.
pub struct Compiled {
    pub spec: SamplerSpec,
    pub circuit: Circuit,
}

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("circuit cannot be normalized:\n{0}")]
    Unsound(ValidationReport),
    #[error("circuit has no inputs or randoms to drive it")]
    NoSources,
}

pub fn compile(circuit: &Circuit, strategy: Strategy) -> Result<Compiled, CompileError> {
    match strategy {
        Strategy::Trace => trace::compile(circuit),
        Strategy::Remask => remask::compile(circuit),
        Strategy::Revision => revision::compile(circuit),
    }
}

// ---------------------------------------------------------------------------
// Shared construction helpers

/// Input wires of a component circuit: the encoded state, two bits per
/// position, then any step-counter bits.
pub(crate) struct StateWires {
    masks: Vec<Wire>,
    vals: Vec<Wire>,
    pub step: Vec<Wire>,
}

impl StateWires {
    pub fn declare(b: &mut CircuitBuilder, positions: usize, step_bits: usize) -> StateWires {
        let mut masks = Vec::with_capacity(positions);
        let mut vals = Vec::with_capacity(positions);
        for _ in 0..positions {
            masks.push(b.input());
            vals.push(b.input());
        }
        let step = (0..step_bits).map(|_| b.input()).collect();
        StateWires { masks, vals, step }
    }

    /// Mask bit of the one-based position.
    pub fn mask(&self, pos: usize) -> Wire {
        self.masks[pos - 1]
    }

    /// Value bit of the one-based position.
    pub fn val(&self, pos: usize) -> Wire {
        self.vals[pos - 1]
    }
}

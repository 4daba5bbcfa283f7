//! Layered Boolean circuits, masked-token sampling programs, compilers
//! from the former to the latter, and exact distribution checking.
//!
//! The pipeline: build or parse a [`Circuit`], [`compile`](compile())
//! it with one of three strategies into a [`SamplerSpec`], run the spec
//! on a [`Machine`] (or enumerate its exact output law), and compare
//! that law against the circuit's own brute-force distribution.

pub mod circuit;
pub mod compile;
pub mod corpus;
pub mod dist;
pub mod dist_check;
pub mod dyadic;
pub mod gadgets;
pub mod machine;
pub mod parity;
pub mod token;

pub use circuit::builder::CircuitBuilder;
pub use circuit::{Circuit, Evaluator};
pub use compile::{compile, Compiled, Strategy};
pub use dist::Distribution;
pub use dyadic::Dyadic;
pub use machine::{Machine, Mode, SamplerSpec, Trace};
pub use token::Token;

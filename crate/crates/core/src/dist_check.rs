//! Front door for distribution verification: exact comparison of a
//! sampling program against a circuit's brute-force law, and seeded
//! Monte-Carlo estimation for cases too large to enumerate. Acceptance
//! checks use the exact route only; the sampler is for triage.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Evaluator};
use crate::dist::{assert_equal, tvd, DiffReport, Distribution, EmpiricalDist};
use crate::dyadic::Dyadic;
use crate::machine::enumerate::{exact_output_distribution, Budget};
use crate::machine::{Machine, MachineError, SamplerSpec};

/// Outcome of one exact comparison run.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Exact law of the sampling program.
    pub machine: Distribution,
    /// Exact law of the reference circuit.
    pub oracle: Distribution,
    /// Per-key differences, when any.
    pub diff: Option<DiffReport>,
    /// Total variation distance between the two.
    pub distance: Dyadic,
}

impl VerifyReport {
    pub fn is_match(&self) -> bool {
        self.diff.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.diff {
            None => write!(f, "exact match over {} outcome(s)", self.machine.len()),
            Some(diff) => {
                writeln!(f, "MISMATCH (tvd = {})", self.distance)?;
                write!(f, "{diff}")
            }
        }
    }
}

/// Enumerates the program's output law on `prompt` and compares it,
/// key by key, with the circuit's law on the same input bits.
pub fn verify_exact(
    spec: &SamplerSpec,
    circuit: &Circuit,
    prompt: &[bool],
    budget: &Budget,
    max_coins: u32,
) -> Result<VerifyReport, MachineError> {
    let machine = Machine::new(spec)?;
    let got = exact_output_distribution(&machine, prompt, budget)?;
    let want = Evaluator::new(circuit)?.output_distribution(prompt, max_coins)?;
    let diff = assert_equal(&got, &want).err();
    let distance = tvd(&got, &want);
    Ok(VerifyReport { machine: got, oracle: want, diff, distance })
}

/// Frequency estimate over `samples` seeded runs. The same seed always
/// produces the same estimate.
pub fn monte_carlo(
    spec: &SamplerSpec,
    prompt: &[bool],
    samples: u64,
    seed: u64,
) -> Result<EmpiricalDist, MachineError> {
    assert!(samples >= 1, "need at least one sample");
    let machine = Machine::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut emp = EmpiricalDist::default();
    for _ in 0..samples {
        emp.record(machine.run(prompt, &mut rng)?.output);
    }
    Ok(emp)
}

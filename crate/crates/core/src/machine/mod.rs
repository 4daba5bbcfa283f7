//! The masked-token sampling machine.
//!
//! A sampler program works on a length-`L` token string over `{a, b, M}`.
//! It starts from the prompt followed by masks and runs a fixed number of
//! rounds. Each round:
//!
//! 1. a selection circuit `F` reads the encoded state and picks a set `S`
//!    of positions (in the final round, every still-masked position joins
//!    `S` as well);
//! 2. every selected position draws a token from its own predictor
//!    circuit, all against the same pre-round state, with private coins:
//!    the new tokens are written simultaneously and their joint
//!    distribution is the product of the per-position ones;
//! 3. in remask mode (and never in the final round) a circuit `G` reads
//!    the post-write state and masks the positions it selects.
//!
//! In standard and remask modes, rounds before the last may select only
//! masked positions and must write unmasked tokens; revision mode may
//! rewrite anything. The program's output is the last `output_len` tokens
//! after the final round.
//!
//! Programs may be step-indexed: the current round number (zero-based,
//! most significant bit first) is appended to every circuit's input.

pub mod enumerate;
pub mod manifest;

use crate::circuit::{Circuit, EvalError, Evaluator, ValidationReport};
use crate::gadgets::{bin, bits_for};
use crate::token::{bits_key, output_key, parse_bits, parse_state, state_string, Token};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Masked positions only; unmasking is monotone.
    Standard,
    /// Like standard, plus a remasking circuit after every non-final round.
    Remask,
    /// Any position may be selected and rewritten each round.
    Revision,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Remask => "remask",
            Mode::Revision => "revision",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "standard" => Some(Mode::Standard),
            "remask" => Some(Mode::Remask),
            "revision" => Some(Mode::Revision),
            _ => None,
        }
    }
}

/// A complete sampler program.
#[derive(Clone, Debug)]
pub struct SamplerSpec {
    pub mode: Mode,
    /// Length of the token string (`L`).
    pub positions: usize,
    /// Number of rounds (`D`).
    pub rounds: usize,
    /// Leading positions seeded from the prompt (`n`).
    pub prompt_len: usize,
    /// Trailing positions read off as the output (`m`).
    pub output_len: usize,
    pub step_indexed: bool,
    /// Selection circuit: `state_arity` inputs, `positions` outputs.
    pub f: Circuit,
    /// Remask circuit, present exactly in remask mode.
    pub g: Option<Circuit>,
    /// One predictor per position, two outputs each (token encoding).
    pub predictors: Vec<Circuit>,
}

impl SamplerSpec {
    /// Width of the round counter appended to circuit inputs.
    pub fn step_bits(&self) -> usize {
        if self.step_indexed {
            bits_for(self.rounds.saturating_sub(1))
        } else {
            0
        }
    }

    /// Input arity every component circuit must have.
    pub fn state_arity(&self) -> usize {
        2 * self.positions + self.step_bits()
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.positions == 0 {
            return Err(SpecError::ZeroPositions);
        }
        if self.rounds == 0 {
            return Err(SpecError::ZeroRounds);
        }
        if self.prompt_len > self.positions {
            return Err(SpecError::PromptLen { n: self.prompt_len, l: self.positions });
        }
        if self.output_len == 0 || self.output_len > self.positions {
            return Err(SpecError::OutputLen { m: self.output_len, l: self.positions });
        }
        match (self.mode, &self.g) {
            (Mode::Remask, None) => return Err(SpecError::MissingRemask),
            (Mode::Standard | Mode::Revision, Some(_)) => return Err(SpecError::UnexpectedRemask),
            _ => {}
        }
        if self.predictors.len() != self.positions {
            return Err(SpecError::PredictorCount {
                expected: self.positions,
                got: self.predictors.len(),
            });
        }
        let arity = self.state_arity();
        let mut components: Vec<(String, &Circuit, usize)> =
            vec![("selection circuit".into(), &self.f, self.positions)];
        if let Some(g) = &self.g {
            components.push(("remask circuit".into(), g, self.positions));
        }
        for (i, p) in self.predictors.iter().enumerate() {
            components.push((format!("predictor {}", i + 1), p, 2));
        }
        for (which, c, outs) in components {
            let report = c.validate();
            if !report.is_valid() {
                return Err(SpecError::Component { which, report: Box::new(report) });
            }
            if c.num_inputs() != arity {
                return Err(SpecError::Arity { which, expected: arity, got: c.num_inputs() });
            }
            if c.num_outputs() != outs {
                return Err(SpecError::Outputs { which, expected: outs, got: c.num_outputs() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("program needs at least one position")]
    ZeroPositions,
    #[error("program needs at least one round")]
    ZeroRounds,
    #[error("prompt length {n} exceeds {l} positions")]
    PromptLen { n: usize, l: usize },
    #[error("output length {m} is invalid for {l} positions")]
    OutputLen { m: usize, l: usize },
    #[error("remask mode requires a remask circuit")]
    MissingRemask,
    #[error("only remask mode carries a remask circuit")]
    UnexpectedRemask,
    #[error("expected {expected} predictors, got {got}")]
    PredictorCount { expected: usize, got: usize },
    #[error("{which} is not a valid circuit:\n{report}")]
    Component { which: String, report: Box<ValidationReport> },
    #[error("{which}: expected {expected} inputs, got {got}")]
    Arity { which: String, expected: usize, got: usize },
    #[error("{which}: expected {expected} outputs, got {got}")]
    Outputs { which: String, expected: usize, got: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum MachineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("expected {expected} prompt bits, got {got}")]
    PromptLen { expected: usize, got: usize },
    #[error("round {round}: selected already-unmasked position {position}")]
    SampledUnmasked { round: usize, position: usize },
    #[error("round {round}, position {position}: predictor emitted the invalid encoding 11")]
    InvalidToken { round: usize, position: usize },
    #[error("round {round}, position {position}: wrote the mask outside revision mode")]
    MaskedWrite { round: usize, position: usize },
    #[error("exact enumeration exceeded the budget of {limit} nodes")]
    BudgetExceeded { limit: u64 },
    #[error("trace mismatch: {0}")]
    TraceMismatch(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

// ---------------------------------------------------------------------------
// Traces

/// Everything drawn and decided during one sampled run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub prompt: String,
    pub rounds: Vec<RoundRecord>,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub pre_state: String,
    pub f_coins: Vec<bool>,
    /// Positions sampled this round, ascending, one-based.
    pub selected: Vec<usize>,
    pub samples: Vec<SampleRecord>,
    pub g_coins: Vec<bool>,
    /// Positions remasked this round, ascending, one-based.
    pub remasked: Vec<usize>,
    pub post_state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub position: usize,
    pub coins: Vec<bool>,
    pub token: char,
}

/// Outcome of checking a trace against a program.
#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub problems: Vec<String>,
}

impl AuditReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "trace is consistent")
        } else {
            writeln!(f, "trace has {} problem(s):", self.problems.len())?;
            for p in &self.problems {
                writeln!(f, "  {p}")?;
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: String,
    pub final_state: Vec<Token>,
    pub trace: Trace,
}

// ---------------------------------------------------------------------------
// The machine

/// A validated program with all component circuits compiled for
/// evaluation.
pub struct Machine<'a> {
    spec: &'a SamplerSpec,
    f: Evaluator,
    g: Option<Evaluator>,
    predictors: Vec<Evaluator>,
}

impl<'a> Machine<'a> {
    pub fn new(spec: &'a SamplerSpec) -> Result<Machine<'a>, SpecError> {
        spec.validate()?;
        let compile = |c: &Circuit| Evaluator::new(c).expect("validated component");
        Ok(Machine {
            spec,
            f: compile(&spec.f),
            g: spec.g.as_ref().map(compile),
            predictors: spec.predictors.iter().map(compile).collect(),
        })
    }

    pub fn spec(&self) -> &SamplerSpec {
        self.spec
    }

    fn initial_state(&self, prompt: &[bool]) -> Result<Vec<Token>, MachineError> {
        if prompt.len() != self.spec.prompt_len {
            return Err(MachineError::PromptLen {
                expected: self.spec.prompt_len,
                got: prompt.len(),
            });
        }
        let mut state: Vec<Token> = prompt.iter().map(|&b| Token::from_value_bit(b)).collect();
        state.resize(self.spec.positions, Token::M);
        Ok(state)
    }

    /// Encoded circuit input for the given state and (one-based) round.
    fn encode(&self, state: &[Token], round: usize) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.spec.state_arity());
        for t in state {
            let (m, v) = t.encode();
            bits.push(m);
            bits.push(v);
        }
        if self.spec.step_indexed {
            bits.extend(bin(round - 1, self.spec.step_bits()));
        }
        bits
    }

    /// Applies the selection rules to raw `F` output bits.
    fn select(
        &self,
        state: &[Token],
        round: usize,
        fbits: &[bool],
    ) -> Result<Vec<usize>, MachineError> {
        let final_round = round == self.spec.rounds;
        let mut selected = Vec::new();
        for (i, &b) in fbits.iter().enumerate() {
            let pos = i + 1;
            if b {
                if !final_round && self.spec.mode != Mode::Revision && !state[i].is_masked() {
                    return Err(MachineError::SampledUnmasked { round, position: pos });
                }
                selected.push(pos);
            } else if final_round && state[i].is_masked() {
                selected.push(pos);
            }
        }
        Ok(selected)
    }

    fn decode_sample(
        &self,
        bits: &[bool],
        round: usize,
        position: usize,
    ) -> Result<Token, MachineError> {
        let token = Token::decode(bits[0], bits[1])
            .ok_or(MachineError::InvalidToken { round, position })?;
        if token.is_masked() && self.spec.mode != Mode::Revision {
            return Err(MachineError::MaskedWrite { round, position });
        }
        Ok(token)
    }

    fn remask_round(&self, round: usize) -> bool {
        self.spec.mode == Mode::Remask && round < self.spec.rounds
    }

    fn draw<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<bool> {
        (0..count).map(|_| rng.random()).collect()
    }

    /// Samples one run, recording every coin and decision.
    pub fn run<R: Rng + ?Sized>(
        &self,
        prompt: &[bool],
        rng: &mut R,
    ) -> Result<RunOutcome, MachineError> {
        let mut state = self.initial_state(prompt)?;
        let mut rounds = Vec::with_capacity(self.spec.rounds);
        for round in 1..=self.spec.rounds {
            let pre_state = state_string(&state);
            let xenc = self.encode(&state, round);
            let f_coins = Self::draw(rng, self.f.num_randoms());
            let fbits = self.f.eval(&xenc, &f_coins);
            let selected = self.select(&state, round, &fbits)?;
            let mut samples = Vec::with_capacity(selected.len());
            for &pos in &selected {
                let pred = &self.predictors[pos - 1];
                let coins = Self::draw(rng, pred.num_randoms());
                let bits = pred.eval(&xenc, &coins);
                let token = self.decode_sample(&bits, round, pos)?;
                samples.push(SampleRecord { position: pos, coins, token: token.to_char() });
            }
            for s in &samples {
                state[s.position - 1] = Token::from_char(s.token).expect("token char");
            }
            let mut g_coins = Vec::new();
            let mut remasked = Vec::new();
            if self.remask_round(round) {
                let g = self.g.as_ref().expect("remask mode has g");
                let xenc = self.encode(&state, round);
                g_coins = Self::draw(rng, g.num_randoms());
                let gbits = g.eval(&xenc, &g_coins);
                for (i, &b) in gbits.iter().enumerate() {
                    if b {
                        remasked.push(i + 1);
                        state[i] = Token::M;
                    }
                }
            }
            rounds.push(RoundRecord {
                round,
                pre_state,
                f_coins,
                selected,
                samples,
                g_coins,
                remasked,
                post_state: state_string(&state),
            });
        }
        let output = output_key(&state[self.spec.positions - self.spec.output_len..]);
        let trace = Trace { prompt: bits_key(prompt), rounds, output: output.clone() };
        Ok(RunOutcome { output, final_state: state, trace })
    }

    /// Re-executes a trace with its recorded coins and reports every
    /// inconsistency against the program.
    pub fn audit(&self, trace: &Trace) -> AuditReport {
        let mut problems = Vec::new();
        self.reexecute(trace, &mut problems);
        AuditReport { problems }
    }

    /// Deterministic re-run from recorded coins; fails on the first
    /// divergence from the trace.
    pub fn replay(&self, trace: &Trace) -> Result<String, MachineError> {
        let report = self.audit(trace);
        match report.problems.into_iter().next() {
            None => Ok(trace.output.clone()),
            Some(p) => Err(MachineError::TraceMismatch(p)),
        }
    }

    fn reexecute(&self, trace: &Trace, problems: &mut Vec<String>) {
        let prompt = match parse_bits(&trace.prompt) {
            Ok(p) => p,
            Err(e) => {
                problems.push(format!("prompt: {e}"));
                return;
            }
        };
        let mut state = match self.initial_state(&prompt) {
            Ok(s) => s,
            Err(e) => {
                problems.push(e.to_string());
                return;
            }
        };
        if trace.rounds.len() != self.spec.rounds {
            problems.push(format!(
                "trace has {} rounds, program has {}",
                trace.rounds.len(),
                self.spec.rounds
            ));
            return;
        }
        for (k, rec) in trace.rounds.iter().enumerate() {
            let round = k + 1;
            if rec.round != round {
                problems.push(format!("record {k} is labelled round {}", rec.round));
            }
            if rec.pre_state != state_string(&state) {
                problems.push(format!(
                    "round {round}: recorded pre-state {} differs from {}",
                    rec.pre_state,
                    state_string(&state)
                ));
                // Trust the record from here so later rounds stay checkable.
                match parse_state(&rec.pre_state) {
                    Ok(s) if s.len() == self.spec.positions => state = s,
                    _ => {
                        problems.push(format!("round {round}: unreadable pre-state"));
                        return;
                    }
                }
            }
            let xenc = self.encode(&state, round);
            if rec.f_coins.len() != self.f.num_randoms() {
                problems.push(format!("round {round}: selection coin count mismatch"));
                return;
            }
            let fbits = self.f.eval(&xenc, &rec.f_coins);
            match self.select(&state, round, &fbits) {
                Ok(selected) => {
                    if selected != rec.selected {
                        problems.push(format!(
                            "round {round}: selection {:?} differs from recorded {:?}",
                            selected, rec.selected
                        ));
                    }
                }
                Err(e) => problems.push(format!("round {round}: {e}")),
            }
            // Check each recorded sample against its predictor.
            for s in &rec.samples {
                if s.position == 0 || s.position > self.spec.positions {
                    problems.push(format!("round {round}: sample at bad position {}", s.position));
                    continue;
                }
                let pred = &self.predictors[s.position - 1];
                if s.coins.len() != pred.num_randoms() {
                    problems.push(format!(
                        "round {round}, position {}: predictor coin count mismatch",
                        s.position
                    ));
                    continue;
                }
                let bits = pred.eval(&xenc, &s.coins);
                match self.decode_sample(&bits, round, s.position) {
                    Ok(token) => {
                        if token.to_char() != s.token {
                            problems.push(format!(
                                "round {round}, position {}: predictor yields {}, trace says {}",
                                s.position,
                                token.to_char(),
                                s.token
                            ));
                        }
                        state[s.position - 1] = token;
                    }
                    Err(e) => problems.push(e.to_string()),
                }
            }
            let recorded_positions: Vec<usize> = rec.samples.iter().map(|s| s.position).collect();
            if recorded_positions != rec.selected {
                problems.push(format!(
                    "round {round}: samples cover {:?}, selection was {:?}",
                    recorded_positions, rec.selected
                ));
            }
            let mut remasked = Vec::new();
            if self.remask_round(round) {
                let g = self.g.as_ref().expect("remask mode has g");
                if rec.g_coins.len() != g.num_randoms() {
                    problems.push(format!("round {round}: remask coin count mismatch"));
                    return;
                }
                let xenc = self.encode(&state, round);
                let gbits = g.eval(&xenc, &rec.g_coins);
                for (i, &b) in gbits.iter().enumerate() {
                    if b {
                        remasked.push(i + 1);
                        state[i] = Token::M;
                    }
                }
            }
            if remasked != rec.remasked {
                problems.push(format!(
                    "round {round}: remasked {:?}, trace says {:?}",
                    remasked, rec.remasked
                ));
            }
            if rec.post_state != state_string(&state) {
                problems.push(format!(
                    "round {round}: recorded post-state {} differs from {}",
                    rec.post_state,
                    state_string(&state)
                ));
            }
        }
        let output = output_key(&state[self.spec.positions - self.spec.output_len..]);
        if output != trace.output {
            problems.push(format!(
                "trace output {} differs from re-derived {output}",
                trace.output
            ));
        }
    }
}

//! Exact output distributions for sampler programs.
//!
//! Two independent routes compute the same distribution:
//!
//! * [`exact_output_distribution`] walks the round tree, querying each
//!   component circuit through its lazy three-valued enumerator so coins
//!   that cannot influence the round are never branched on;
//! * [`strict_output_distribution`] enumerates every coin vector of every
//!   circuit invocation in full.
//!
//! Both are exact (all probabilities are dyadic rationals); the strict
//! route exists as a check on the lazy one and scales much worse.

use crate::dist::Distribution;
use crate::dyadic::Dyadic;
use crate::token::{output_key, state_string, Token};

use super::{Machine, MachineError};
use crate::circuit::EvalError;

/// Node budget for the lazy walk; the default handles every program in
/// the test corpus with room to spare.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_nodes: u64,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_nodes: 1 << 24 }
    }
}

/// Exact distribution of the program's output string on this prompt.
pub fn exact_output_distribution(
    machine: &Machine,
    prompt: &[bool],
    budget: &Budget,
) -> Result<Distribution, MachineError> {
    walk(machine, prompt, None, budget)
}

/// Exact distribution of the whole state (keys over `a`/`b`/`M`) right
/// after the given round; zero means the initial state. Values past the
/// final round are clamped to it.
pub fn state_distribution_after(
    machine: &Machine,
    prompt: &[bool],
    rounds: usize,
    budget: &Budget,
) -> Result<Distribution, MachineError> {
    walk(machine, prompt, Some(rounds), budget)
}

fn walk(
    machine: &Machine,
    prompt: &[bool],
    stop_after: Option<usize>,
    budget: &Budget,
) -> Result<Distribution, MachineError> {
    let state = machine.initial_state(prompt)?;
    let mut w = Walk {
        machine,
        stop_after,
        max_nodes: budget.max_nodes,
        nodes: 0,
        dist: Distribution::new(),
    };
    w.descend(state, 1, Dyadic::one())?;
    Ok(w.dist)
}

struct Walk<'m, 'a> {
    machine: &'m Machine<'a>,
    stop_after: Option<usize>,
    max_nodes: u64,
    nodes: u64,
    dist: Distribution,
}

impl Walk<'_, '_> {
    fn charge(&mut self, amount: u64) -> Result<(), MachineError> {
        self.nodes = self.nodes.saturating_add(amount);
        if self.nodes > self.max_nodes {
            Err(MachineError::BudgetExceeded { limit: self.max_nodes })
        } else {
            Ok(())
        }
    }

    fn record(&mut self, state: &[Token], prob: Dyadic) {
        let spec = self.machine.spec;
        let key = match self.stop_after {
            Some(_) => state_string(state),
            None => output_key(&state[spec.positions - spec.output_len..]),
        };
        self.dist.add(key, prob);
    }

    fn descend(&mut self, state: Vec<Token>, round: usize, prob: Dyadic) -> Result<(), MachineError> {
        self.charge(1)?;
        let spec = self.machine.spec;
        let done = round > spec.rounds || self.stop_after.is_some_and(|t| round > t);
        if done {
            self.record(&state, prob);
            return Ok(());
        }
        let xenc = self.machine.encode(&state, round);
        let fdist = self.machine.f.lazy_distribution(&xenc);
        for (fkey, fp) in fdist.iter() {
            let fbits: Vec<bool> = fkey.chars().map(|c| c == '1').collect();
            let selected = self.machine.select(&state, round, &fbits)?;

            // Joint token distribution over the selected positions is the
            // product of the per-position ones, all reading the pre-round
            // state.
            let mut combos: Vec<(Vec<Token>, Dyadic)> = vec![(Vec::new(), Dyadic::one())];
            for &pos in &selected {
                let pdist = self.machine.predictors[pos - 1].lazy_distribution(&xenc);
                let mut next = Vec::with_capacity(combos.len() * pdist.len());
                for (tkey, tp) in pdist.iter() {
                    let bits: Vec<bool> = tkey.chars().map(|c| c == '1').collect();
                    let token = self.machine.decode_sample(&bits, round, pos)?;
                    for (tokens, cp) in &combos {
                        let mut t = tokens.clone();
                        t.push(token);
                        next.push((t, cp.mul(tp)));
                    }
                }
                combos = next;
                self.charge(combos.len() as u64)?;
            }

            let branch = prob.mul(fp);
            for (tokens, cp) in combos {
                let mut st = state.clone();
                for (k, &pos) in selected.iter().enumerate() {
                    st[pos - 1] = tokens[k];
                }
                let p = branch.mul(&cp);
                if self.machine.remask_round(round) {
                    let g = self.machine.g.as_ref().expect("remask mode has g");
                    let xpost = self.machine.encode(&st, round);
                    let gdist = g.lazy_distribution(&xpost);
                    for (gkey, gp) in gdist.iter() {
                        let mut masked = st.clone();
                        for (i, c) in gkey.chars().enumerate() {
                            if c == '1' {
                                masked[i] = Token::M;
                            }
                        }
                        self.descend(masked, round + 1, p.mul(gp))?;
                    }
                } else {
                    self.descend(st, round + 1, p.clone())?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Strict route

/// Exact output distribution by full enumeration of every coin of every
/// circuit invocation. Reference implementation; exponential in the total
/// coin count per round.
pub fn strict_output_distribution(
    machine: &Machine,
    prompt: &[bool],
    max_coins: u32,
) -> Result<Distribution, MachineError> {
    let state = machine.initial_state(prompt)?;
    let mut dist = Distribution::new();
    strict_round(machine, state, 1, Dyadic::one(), max_coins, &mut dist)?;
    Ok(dist)
}

fn coin_vectors(count: usize, max_coins: u32) -> Result<Vec<Vec<bool>>, MachineError> {
    if count as u32 > max_coins || count >= 32 {
        return Err(MachineError::Eval(EvalError::TooManyCoins {
            coins: count,
            budget: max_coins,
        }));
    }
    let mut out = Vec::with_capacity(1 << count);
    for word in 0u64..(1u64 << count) {
        out.push((0..count).map(|k| (word >> k) & 1 == 1).collect());
    }
    Ok(out)
}

fn strict_round(
    machine: &Machine,
    state: Vec<Token>,
    round: usize,
    prob: Dyadic,
    max_coins: u32,
    dist: &mut Distribution,
) -> Result<(), MachineError> {
    let spec = machine.spec;
    if round > spec.rounds {
        dist.add(output_key(&state[spec.positions - spec.output_len..]), prob);
        return Ok(());
    }
    let xenc = machine.encode(&state, round);
    let pf = Dyadic::pow2_inv(machine.f.num_randoms() as u32);
    for fc in coin_vectors(machine.f.num_randoms(), max_coins)? {
        let fbits = machine.f.eval(&xenc, &fc);
        let selected = machine.select(&state, round, &fbits)?;
        strict_samples(machine, &state, &selected, 0, &xenc, round, prob.mul(&pf), max_coins, dist)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn strict_samples(
    machine: &Machine,
    state: &[Token],
    selected: &[usize],
    idx: usize,
    xenc: &[bool],
    round: usize,
    prob: Dyadic,
    max_coins: u32,
    dist: &mut Distribution,
) -> Result<(), MachineError> {
    if idx == selected.len() {
        if machine.remask_round(round) {
            let g = machine.g.as_ref().expect("remask mode has g");
            let xpost = machine.encode(state, round);
            let pg = Dyadic::pow2_inv(g.num_randoms() as u32);
            for gc in coin_vectors(g.num_randoms(), max_coins)? {
                let gbits = g.eval(&xpost, &gc);
                let mut masked = state.to_vec();
                for (i, &b) in gbits.iter().enumerate() {
                    if b {
                        masked[i] = Token::M;
                    }
                }
                strict_round(machine, masked, round + 1, prob.mul(&pg), max_coins, dist)?;
            }
        } else {
            strict_round(machine, state.to_vec(), round + 1, prob, max_coins, dist)?;
        }
        return Ok(());
    }
    let pos = selected[idx];
    let pred = &machine.predictors[pos - 1];
    let pp = Dyadic::pow2_inv(pred.num_randoms() as u32);
    for pc in coin_vectors(pred.num_randoms(), max_coins)? {
        let bits = pred.eval(xenc, &pc);
        let token = machine.decode_sample(&bits, round, pos)?;
        let mut st = state.to_vec();
        st[pos - 1] = token;
        strict_samples(machine, &st, selected, idx + 1, xenc, round, prob.mul(&pp), max_coins, dist)?;
    }
    Ok(())
}

//! Exact finite distributions over strings, with dyadic probabilities.

use crate::dyadic::Dyadic;
use std::collections::BTreeMap;
use std::fmt;

/// An exact distribution: map from outcome string to dyadic probability.
///
/// Outcome keys are opaque; the enumerators in this crate use `0`/`1` for
/// noiseless outputs and `a`/`b`/`M` for intermediate sampler states.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Distribution {
    entries: BTreeMap<String, Dyadic>,
}

impl Distribution {
    pub fn new() -> Self {
        Distribution { entries: BTreeMap::new() }
    }

    /// A point mass on a single outcome.
    pub fn point(key: impl Into<String>) -> Self {
        let mut d = Distribution::new();
        d.add(key.into(), Dyadic::one());
        d
    }

    /// Adds probability mass to an outcome, merging with existing mass.
    pub fn add(&mut self, key: String, p: Dyadic) {
        if p.is_zero() {
            return;
        }
        match self.entries.get_mut(&key) {
            Some(q) => *q = q.add(&p),
            None => {
                self.entries.insert(key, p);
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&Dyadic> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Dyadic)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn total(&self) -> Dyadic {
        let mut t = Dyadic::zero();
        for p in self.entries.values() {
            t = t.add(p);
        }
        t
    }

    /// True when the probabilities sum to exactly one.
    pub fn is_normalized(&self) -> bool {
        self.total().is_one()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, p)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {p}")?;
        }
        write!(f, "}}")
    }
}

/// One differing outcome between two distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffEntry {
    pub key: String,
    pub left: Dyadic,
    pub right: Dyadic,
}

/// Report produced when two distributions are not identical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffReport {
    pub entries: Vec<DiffEntry>,
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "distributions differ on {} outcome(s):", self.entries.len())?;
        for e in &self.entries {
            writeln!(f, "  {}: {} vs {}", e.key, e.left, e.right)?;
        }
        Ok(())
    }
}

impl std::error::Error for DiffReport {}

/// Exact equality after reduction; on mismatch returns the per-key diff.
pub fn assert_equal(left: &Distribution, right: &Distribution) -> Result<(), DiffReport> {
    let mut entries = Vec::new();
    let keys: std::collections::BTreeSet<&String> =
        left.support().chain(right.support()).collect();
    for key in keys {
        let l = left.get(key).cloned().unwrap_or_else(Dyadic::zero);
        let r = right.get(key).cloned().unwrap_or_else(Dyadic::zero);
        if l != r {
            entries.push(DiffEntry { key: key.clone(), left: l, right: r });
        }
    }
    if entries.is_empty() {
        Ok(())
    } else {
        Err(DiffReport { entries })
    }
}

/// Total variation distance `1/2 * sum |p - q|`, exact.
pub fn tvd(left: &Distribution, right: &Distribution) -> Dyadic {
    let keys: std::collections::BTreeSet<&String> =
        left.support().chain(right.support()).collect();
    let mut sum = Dyadic::zero();
    for key in keys {
        let l = left.get(key).cloned().unwrap_or_else(Dyadic::zero);
        let r = right.get(key).cloned().unwrap_or_else(Dyadic::zero);
        sum = sum.add(&l.abs_diff(&r));
    }
    sum.halve()
}

/// Frequency counts from sampling; probabilities have denominator `samples`.
#[derive(Clone, Debug, Default)]
pub struct EmpiricalDist {
    pub counts: BTreeMap<String, u64>,
    pub samples: u64,
}

impl EmpiricalDist {
    pub fn record(&mut self, key: String) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.samples += 1;
    }

    pub fn frequency(&self, key: &str) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        *self.counts.get(key).unwrap_or(&0) as f64 / self.samples as f64
    }
}

/// Total variation distance between an exact and an empirical distribution.
///
/// Report value only; exact equality checks never go through sampling.
pub fn empirical_tvd(exact: &Distribution, emp: &EmpiricalDist) -> f64 {
    let mut keys: std::collections::BTreeSet<&String> = exact.support().collect();
    keys.extend(emp.counts.keys());
    let mut sum = 0.0;
    for key in keys {
        let p = exact.get(key).map(|d| d.to_f64()).unwrap_or(0.0);
        let q = emp.frequency(key);
        sum += (p - q).abs();
    }
    sum / 2.0
}

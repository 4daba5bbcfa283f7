//! Layered Boolean circuit IR: vertices, validation, evaluation, exact
//! output distributions.
//!
//! A circuit is a DAG of vertices, each assigned to a layer. Layer 1 holds
//! the inputs (or, for input-free circuits, random vertices). Every gate
//! reads only from the layer directly below it, and the declared outputs
//! sit in the last layer. `validate` reports how far a circuit is from
//! that shape; `normalize` repairs everything repairable.
//!
//! Random vertices model private coin flips: every evaluation draws each
//! one independently and uniformly. The exact output distribution of a
//! circuit is therefore a dyadic-probability distribution over output bit
//! strings, computed here by brute-force enumeration of the coins.

pub mod builder;
pub mod netlist;
pub mod normalize;

use crate::dist::Distribution;
use crate::dyadic::Dyadic;
use crate::token::bits_key;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

// ---------------------------------------------------------------------------
// Gate operations

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateOp {
    And,
    Or,
    Not,
    Id,
    Maj,
}

impl GateOp {
    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "and",
            GateOp::Or => "or",
            GateOp::Not => "not",
            GateOp::Id => "id",
            GateOp::Maj => "maj",
        }
    }

    pub fn parse(s: &str) -> Option<GateOp> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Some(GateOp::And),
            "or" => Some(GateOp::Or),
            "not" => Some(GateOp::Not),
            "id" => Some(GateOp::Id),
            "maj" => Some(GateOp::Maj),
            _ => None,
        }
    }

    /// And/Or take two or more arguments, Not/Id exactly one, Maj one or
    /// more (ties resolve to false).
    pub fn arity_ok(self, arity: usize) -> bool {
        match self {
            GateOp::And | GateOp::Or => arity >= 2,
            GateOp::Not | GateOp::Id => arity == 1,
            GateOp::Maj => arity >= 1,
        }
    }

    pub fn eval(self, args: &[bool]) -> bool {
        match self {
            GateOp::And => args.iter().all(|&a| a),
            GateOp::Or => args.iter().any(|&a| a),
            GateOp::Not => !args[0],
            GateOp::Id => args[0],
            GateOp::Maj => {
                let t = args.iter().filter(|&&a| a).count();
                2 * t > args.len()
            }
        }
    }

    /// Three-valued evaluation: `U` means "depends on unset coins".
    /// Sound and precise: the result is known exactly when every
    /// completion of the unknowns agrees.
    pub fn eval_tri(self, args: &[Tri]) -> Tri {
        match self {
            GateOp::And => {
                if args.contains(&Tri::F) {
                    Tri::F
                } else if args.contains(&Tri::U) {
                    Tri::U
                } else {
                    Tri::T
                }
            }
            GateOp::Or => {
                if args.contains(&Tri::T) {
                    Tri::T
                } else if args.contains(&Tri::U) {
                    Tri::U
                } else {
                    Tri::F
                }
            }
            GateOp::Not => args[0].not(),
            GateOp::Id => args[0],
            GateOp::Maj => {
                let k = args.len();
                let t = args.iter().filter(|&&a| a == Tri::T).count();
                let u = args.iter().filter(|&&a| a == Tri::U).count();
                if 2 * t > k {
                    Tri::T
                } else if 2 * (t + u) <= k {
                    Tri::F
                } else {
                    Tri::U
                }
            }
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Three-valued logic used for partial evaluation under unset coins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    F,
    T,
    U,
}

impl Tri {
    pub fn known(b: bool) -> Tri {
        if b {
            Tri::T
        } else {
            Tri::F
        }
    }

    pub fn not(self) -> Tri {
        match self {
            Tri::F => Tri::T,
            Tri::T => Tri::F,
            Tri::U => Tri::U,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Tri::F => Some(false),
            Tri::T => Some(true),
            Tri::U => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Vertices and circuits

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Input,
    Random,
    Gate(GateOp),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: usize,
    pub layer: usize,
    pub kind: VertexKind,
    /// Argument vertex ids; meaningful only for gates.
    pub args: Vec<usize>,
}

/// A layered Boolean circuit.
///
/// `vertices` is kept in declaration order; for normalized circuits that
/// coincides with id order (ids run 1..=N, non-decreasing in layer).
/// Input order and random-coin order are both declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    pub vertices: Vec<Vertex>,
    /// Output vertex ids, in output order.
    pub outputs: Vec<usize>,
}

impl Circuit {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn depth(&self) -> usize {
        self.vertices.iter().map(|v| v.layer).max().unwrap_or(0)
    }

    pub fn width(&self) -> usize {
        self.layer_widths().into_iter().max().unwrap_or(0)
    }

    /// Vertex count per layer; index `l - 1` holds layer `l`.
    pub fn layer_widths(&self) -> Vec<usize> {
        let d = self.depth();
        let mut w = vec![0usize; d];
        for v in &self.vertices {
            if v.layer >= 1 && v.layer <= d {
                w[v.layer - 1] += 1;
            }
        }
        w
    }

    pub fn num_inputs(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Input).count()
    }

    pub fn num_randoms(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Random).count()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Input ids in declaration order.
    pub fn input_ids(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Input)
            .map(|v| v.id)
            .collect()
    }

    /// Random-vertex ids in declaration order; coin `k` feeds the `k`-th.
    pub fn random_ids(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Random)
            .map(|v| v.id)
            .collect()
    }

    pub fn vertex(&self, id: usize) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    /// Ids in layer `l`, ascending.
    pub fn layer_members(&self, layer: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .vertices
            .iter()
            .filter(|v| v.layer == layer)
            .map(|v| v.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Smallest id in each layer; index `l - 1` holds layer `l`.
    /// Meaningful for normalized circuits, where each layer is a
    /// contiguous id range.
    pub fn layer_starts(&self) -> Vec<usize> {
        let d = self.depth();
        let mut starts = vec![usize::MAX; d];
        for v in &self.vertices {
            if v.layer >= 1 && v.layer <= d {
                starts[v.layer - 1] = starts[v.layer - 1].min(v.id);
            }
        }
        starts
    }

    fn index_of(&self) -> BTreeMap<usize, usize> {
        self.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect()
    }

    /// Ids of all vertices the given vertex depends on, itself included.
    pub fn cone_of(&self, id: usize) -> BTreeSet<usize> {
        let index = self.index_of();
        let mut cone = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if !cone.insert(cur) {
                continue;
            }
            if let Some(&i) = index.get(&cur) {
                for &a in &self.vertices[i].args {
                    stack.push(a);
                }
            }
        }
        cone
    }

    /// Input ids and random ids in the dependency cone of `id`.
    pub fn cone_leaves(&self, id: usize) -> (Vec<usize>, Vec<usize>) {
        let cone = self.cone_of(id);
        let mut inputs = Vec::new();
        let mut randoms = Vec::new();
        for v in &self.vertices {
            if cone.contains(&v.id) {
                match v.kind {
                    VertexKind::Input => inputs.push(v.id),
                    VertexKind::Random => randoms.push(v.id),
                    VertexKind::Gate(_) => {}
                }
            }
        }
        (inputs, randoms)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_valid()
    }

    /// Evaluates on concrete inputs and coins (coin `k` = `randoms[k]`,
    /// declaration order). Works on any structurally sound circuit.
    pub fn eval(&self, inputs: &[bool], randoms: &[bool]) -> Result<Vec<bool>, EvalError> {
        Evaluator::new(self)?.eval_checked(inputs, randoms)
    }

    /// Exact output distribution on a concrete input, by brute-force
    /// enumeration of all coin assignments. This is the reference oracle;
    /// it never short-circuits.
    pub fn output_distribution(
        &self,
        inputs: &[bool],
        max_coins: u32,
    ) -> Result<Distribution, EvalError> {
        Evaluator::new(self)?.output_distribution(inputs, max_coins)
    }
}

// ---------------------------------------------------------------------------
// Validation

/// A single way a circuit deviates from well-formedness.
///
/// Structural violations make the DAG meaningless and cannot be repaired.
/// Placement violations only concern layers, numbering and output
/// position; `normalize` repairs all of them.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    // structural
    #[error("duplicate vertex id {id}")]
    DuplicateId { id: usize },
    #[error("vertex {id} references undefined argument {arg}")]
    UndefinedArg { id: usize, arg: usize },
    #[error("output list references undefined vertex {id}")]
    UndefinedOutput { id: usize },
    #[error("{kind} vertex {id} must not have arguments")]
    ArgsOnSource { kind: &'static str, id: usize },
    #[error("vertex {id}: {op} gate with arity {arity}")]
    BadArity { id: usize, op: GateOp, arity: usize },
    #[error("vertex {id} lies on a cycle")]
    Cycle { id: usize },
    #[error("no outputs declared")]
    NoOutputs,
    // placement
    #[error("vertex {id} has layer 0")]
    LayerZero { id: usize },
    #[error("input vertex {id} at layer {layer}, expected layer 1")]
    InputLayer { id: usize, layer: usize },
    #[error("random vertex {id} in layer 1 of a circuit with inputs")]
    RandomInFirstLayer { id: usize },
    #[error("vertex {id} reads {arg} across layers {from} -> {to}")]
    EdgeSpan { id: usize, arg: usize, from: usize, to: usize },
    #[error("output {id} at layer {layer}, expected last layer {depth}")]
    OutputLayer { id: usize, layer: usize, depth: usize },
    #[error("vertex {id} is declared as an output more than once")]
    DuplicateOutput { id: usize },
    #[error("layer {layer} is empty")]
    EmptyLayer { layer: usize },
    #[error("vertex ids are not exactly 1..={size}")]
    NonContiguousIds { size: usize },
    #[error("vertex {id} breaks id-by-layer ordering")]
    IdLayerOrder { id: usize },
    #[error("outputs are not the trailing ids of the last layer in output order")]
    OutputsNotAligned,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub structural: Vec<Violation>,
    pub placement: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.structural.is_empty() && self.placement.is_empty()
    }

    pub fn is_structurally_sound(&self) -> bool {
        self.structural.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for v in &self.structural {
            writeln!(f, "structural: {v}")?;
        }
        for v in &self.placement {
            writeln!(f, "placement: {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Topological order of vertex indices, or the index of some vertex on a
/// cycle.
pub(crate) fn topo_indices(c: &Circuit) -> Result<Vec<usize>, usize> {
    let index = c.index_of();
    let n = c.vertices.len();
    let mut indegree = vec![0usize; n];
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, v) in c.vertices.iter().enumerate() {
        for a in &v.args {
            if let Some(&j) = index.get(a) {
                indegree[i] += 1;
                consumers[j].push(i);
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    let mut head = 0;
    while head < queue.len() {
        let i = queue[head];
        head += 1;
        order.push(i);
        for &j in &consumers[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push(j);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&i| indegree[i] > 0).unwrap())
    }
}

fn validate(c: &Circuit) -> ValidationReport {
    let mut structural = Vec::new();
    let mut placement = Vec::new();

    let mut seen = BTreeSet::new();
    for v in &c.vertices {
        if !seen.insert(v.id) {
            structural.push(Violation::DuplicateId { id: v.id });
        }
    }
    let ids = seen;

    for v in &c.vertices {
        match v.kind {
            VertexKind::Input | VertexKind::Random => {
                if !v.args.is_empty() {
                    let kind = if v.kind == VertexKind::Input { "input" } else { "random" };
                    structural.push(Violation::ArgsOnSource { kind, id: v.id });
                }
            }
            VertexKind::Gate(op) => {
                if !op.arity_ok(v.args.len()) {
                    structural.push(Violation::BadArity { id: v.id, op, arity: v.args.len() });
                }
                for &a in &v.args {
                    if !ids.contains(&a) {
                        structural.push(Violation::UndefinedArg { id: v.id, arg: a });
                    }
                }
            }
        }
    }

    if c.outputs.is_empty() {
        structural.push(Violation::NoOutputs);
    }
    for &o in &c.outputs {
        if !ids.contains(&o) {
            structural.push(Violation::UndefinedOutput { id: o });
        }
    }

    if structural.is_empty() {
        if let Err(i) = topo_indices(c) {
            structural.push(Violation::Cycle { id: c.vertices[i].id });
        }
    }
    if !structural.is_empty() {
        // Placement is meaningless on a broken DAG.
        return ValidationReport { structural, placement };
    }

    let n_inputs = c.num_inputs();
    let depth = c.depth();
    let index = c.index_of();

    for v in &c.vertices {
        if v.layer == 0 {
            placement.push(Violation::LayerZero { id: v.id });
            continue;
        }
        match v.kind {
            VertexKind::Input => {
                if v.layer != 1 {
                    placement.push(Violation::InputLayer { id: v.id, layer: v.layer });
                }
            }
            VertexKind::Random => {
                if v.layer == 1 && n_inputs > 0 {
                    placement.push(Violation::RandomInFirstLayer { id: v.id });
                }
            }
            VertexKind::Gate(_) => {
                for &a in &v.args {
                    let al = c.vertices[index[&a]].layer;
                    if al + 1 != v.layer {
                        placement.push(Violation::EdgeSpan {
                            id: v.id,
                            arg: a,
                            from: al,
                            to: v.layer,
                        });
                    }
                }
            }
        }
    }

    let mut out_seen = BTreeSet::new();
    for &o in &c.outputs {
        if !out_seen.insert(o) {
            placement.push(Violation::DuplicateOutput { id: o });
        }
        let l = c.vertices[index[&o]].layer;
        if l != depth {
            placement.push(Violation::OutputLayer { id: o, layer: l, depth });
        }
    }

    for (i, w) in c.layer_widths().iter().enumerate() {
        if *w == 0 {
            placement.push(Violation::EmptyLayer { layer: i + 1 });
        }
    }

    let n = c.size();
    let contiguous = (1..=n).all(|id| index.contains_key(&id));
    if !contiguous {
        placement.push(Violation::NonContiguousIds { size: n });
    } else {
        let mut prev_layer = 0;
        for id in 1..=n {
            let l = c.vertices[index[&id]].layer;
            if l < prev_layer {
                placement.push(Violation::IdLayerOrder { id });
                break;
            }
            prev_layer = l;
        }
        // Outputs must occupy the trailing ids, in declared order.
        let m = c.outputs.len();
        if m <= n {
            let aligned = c.outputs.iter().enumerate().all(|(k, &o)| o == n - m + 1 + k);
            if !aligned && out_seen.len() == m {
                placement.push(Violation::OutputsNotAligned);
            }
        }
    }

    ValidationReport { structural, placement }
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("circuit is not structurally sound:\n{0}")]
    NotSound(ValidationReport),
    #[error("expected {expected} input bits, got {got}")]
    InputLen { expected: usize, got: usize },
    #[error("expected {expected} coin bits, got {got}")]
    CoinLen { expected: usize, got: usize },
    #[error("circuit draws {coins} coins, enumeration budget is {budget} bits")]
    TooManyCoins { coins: usize, budget: u32 },
}

enum Step {
    Input(usize),
    Random(usize),
    Gate(GateOp, Vec<usize>),
}

/// A circuit compiled to a flat evaluation schedule.
///
/// Slots are topologically ordered; step `k` writes slot `k`. Built once,
/// evaluated many times.
pub struct Evaluator {
    steps: Vec<Step>,
    outputs: Vec<usize>,
    n_inputs: usize,
    n_randoms: usize,
}

impl Evaluator {
    pub fn new(c: &Circuit) -> Result<Evaluator, EvalError> {
        let report = c.validate();
        if !report.is_structurally_sound() {
            return Err(EvalError::NotSound(report));
        }
        let order = topo_indices(c).expect("sound circuit has a topo order");
        let mut slot_of_index = vec![0usize; c.vertices.len()];
        for (slot, &i) in order.iter().enumerate() {
            slot_of_index[i] = slot;
        }
        let index = c.index_of();
        // Coin ordinals follow declaration order, matching Circuit::eval.
        let mut ordinal_of_index = BTreeMap::new();
        let mut n_inputs = 0;
        let mut n_randoms = 0;
        for (i, v) in c.vertices.iter().enumerate() {
            match v.kind {
                VertexKind::Input => {
                    ordinal_of_index.insert(i, n_inputs);
                    n_inputs += 1;
                }
                VertexKind::Random => {
                    ordinal_of_index.insert(i, n_randoms);
                    n_randoms += 1;
                }
                VertexKind::Gate(_) => {}
            }
        }
        let mut steps = Vec::with_capacity(c.vertices.len());
        for &i in &order {
            let v = &c.vertices[i];
            steps.push(match v.kind {
                VertexKind::Input => Step::Input(ordinal_of_index[&i]),
                VertexKind::Random => Step::Random(ordinal_of_index[&i]),
                VertexKind::Gate(op) => {
                    let args = v.args.iter().map(|a| slot_of_index[index[a]]).collect();
                    Step::Gate(op, args)
                }
            });
        }
        let outputs = c.outputs.iter().map(|o| slot_of_index[index[o]]).collect();
        Ok(Evaluator { steps, outputs, n_inputs, n_randoms })
    }

    pub fn num_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn num_randoms(&self) -> usize {
        self.n_randoms
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    fn check_inputs(&self, inputs: &[bool]) -> Result<(), EvalError> {
        if inputs.len() != self.n_inputs {
            return Err(EvalError::InputLen { expected: self.n_inputs, got: inputs.len() });
        }
        Ok(())
    }

    pub fn eval_checked(&self, inputs: &[bool], randoms: &[bool]) -> Result<Vec<bool>, EvalError> {
        self.check_inputs(inputs)?;
        if randoms.len() != self.n_randoms {
            return Err(EvalError::CoinLen { expected: self.n_randoms, got: randoms.len() });
        }
        Ok(self.eval(inputs, randoms))
    }

    /// Unchecked fast path; lengths must match.
    pub fn eval(&self, inputs: &[bool], randoms: &[bool]) -> Vec<bool> {
        let mut slots = vec![false; self.steps.len()];
        let mut arg_buf = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            slots[k] = match step {
                Step::Input(i) => inputs[*i],
                Step::Random(r) => randoms[*r],
                Step::Gate(op, args) => {
                    arg_buf.clear();
                    arg_buf.extend(args.iter().map(|&a| slots[a]));
                    op.eval(&arg_buf)
                }
            };
        }
        self.outputs.iter().map(|&o| slots[o]).collect()
    }

    /// Exact output distribution by full enumeration of all coins.
    pub fn output_distribution(
        &self,
        inputs: &[bool],
        max_coins: u32,
    ) -> Result<Distribution, EvalError> {
        self.check_inputs(inputs)?;
        let r = self.n_randoms;
        if r as u32 > max_coins || r >= 64 {
            return Err(EvalError::TooManyCoins { coins: r, budget: max_coins });
        }
        let mut dist = Distribution::new();
        let p = Dyadic::pow2_inv(r as u32);
        let mut coins = vec![false; r];
        for word in 0u64..(1u64 << r) {
            for (k, c) in coins.iter_mut().enumerate() {
                *c = (word >> k) & 1 == 1;
            }
            let out = self.eval(inputs, &coins);
            dist.add(bits_key(&out), p.clone());
        }
        Ok(dist)
    }

    fn eval_tri(&self, inputs: &[bool], coins: &[Option<bool>], slots: &mut Vec<Tri>) {
        slots.clear();
        let mut arg_buf = Vec::new();
        for step in &self.steps {
            let v = match step {
                Step::Input(i) => Tri::known(inputs[*i]),
                Step::Random(r) => match coins[*r] {
                    Some(b) => Tri::known(b),
                    None => Tri::U,
                },
                Step::Gate(op, args) => {
                    arg_buf.clear();
                    arg_buf.extend(args.iter().map(|&a| slots[a]));
                    op.eval_tri(&arg_buf)
                }
            };
            slots.push(v);
        }
    }

    /// First unset coin reachable from an unknown output through
    /// unknown-valued vertices only. Such a coin always exists while any
    /// output is unknown, and assigning it makes progress.
    fn blocking_coin(&self, coins: &[Option<bool>], slots: &[Tri]) -> usize {
        let mut best = usize::MAX;
        let mut visited = vec![false; self.steps.len()];
        let mut stack: Vec<usize> = self
            .outputs
            .iter()
            .copied()
            .filter(|&o| slots[o] == Tri::U)
            .collect();
        while let Some(s) = stack.pop() {
            if visited[s] {
                continue;
            }
            visited[s] = true;
            match &self.steps[s] {
                Step::Input(_) => {}
                Step::Random(r) => {
                    if coins[*r].is_none() {
                        best = best.min(*r);
                    }
                }
                Step::Gate(_, args) => {
                    for &a in args {
                        if slots[a] == Tri::U {
                            stack.push(a);
                        }
                    }
                }
            }
        }
        debug_assert!(best != usize::MAX, "unknown output without a live coin");
        best
    }

    /// Exact output distribution, branching only on coins that actually
    /// block an output. Equivalent to `output_distribution` but skips
    /// coins made irrelevant by the concrete input.
    pub fn lazy_distribution(&self, inputs: &[bool]) -> Distribution {
        let mut dist = Distribution::new();
        let mut coins: Vec<Option<bool>> = vec![None; self.n_randoms];
        let mut slots = Vec::with_capacity(self.steps.len());
        self.descend(inputs, &mut coins, &mut slots, Dyadic::one(), &mut dist);
        dist
    }

    fn descend(
        &self,
        inputs: &[bool],
        coins: &mut Vec<Option<bool>>,
        slots: &mut Vec<Tri>,
        prob: Dyadic,
        dist: &mut Distribution,
    ) {
        self.eval_tri(inputs, coins, slots);
        let mut key = String::with_capacity(self.outputs.len());
        let mut unknown = false;
        for &o in &self.outputs {
            match slots[o].as_bool() {
                Some(b) => key.push(if b { '1' } else { '0' }),
                None => {
                    unknown = true;
                    break;
                }
            }
        }
        if !unknown {
            dist.add(key, prob);
            return;
        }
        let r = self.blocking_coin(coins, slots);
        let half = prob.halve();
        for b in [false, true] {
            coins[r] = Some(b);
            self.descend(inputs, coins, slots, half.clone(), dist);
        }
        coins[r] = None;
    }
}

//! `dlmc`: compile layered circuits into masked-token sampling programs,
//! run them, and check their output laws.
//!
//! Exit codes: 0 success, 1 domain failure (bad file, mismatch, dirty
//! audit), 2 usage.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dlmc_core::circuit::{netlist, Circuit, Evaluator};
use dlmc_core::compile::{compile, Strategy};
use dlmc_core::dist::{assert_equal, empirical_tvd};
use dlmc_core::dist_check::{monte_carlo, verify_exact};
use dlmc_core::gadgets::bin;
use dlmc_core::machine::enumerate::{exact_output_distribution, Budget};
use dlmc_core::machine::manifest::{load_spec, save_spec};
use dlmc_core::machine::{Machine, RoundRecord, SamplerSpec, Trace};
use dlmc_core::parity::{
    advantage_accuracy, advantage_circuit, parity_target, remask_sampler, revision_sampler,
};
use dlmc_core::token::parse_bits;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "dlmc", version, about = "Circuit-to-sampler compiler and checker")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a circuit netlist into a sampling program directory.
    Compile {
        /// One of: trace, remask, revision.
        #[arg(long)]
        strategy: String,
        /// Circuit netlist to read.
        #[arg(long = "in")]
        input: PathBuf,
        /// Program directory to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// One sampled run of a program; prints the output string.
    Run {
        /// Program directory.
        #[arg(long)]
        spec: PathBuf,
        /// Prompt bits, e.g. `10`; omit when the program takes none.
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record the full run, one JSON line per round.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Frequency estimate of the output law over many seeded runs.
    Sample {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 10000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Compare a program's output law against a circuit's, exactly by
    /// default or empirically with --samples.
    Verify {
        /// Circuit netlist giving the reference law.
        #[arg(long)]
        circuit: PathBuf,
        /// Program directory.
        #[arg(long)]
        spec: PathBuf,
        /// Check a single prompt instead of all of them.
        #[arg(long)]
        input: Option<String>,
        /// Exact enumeration (the default).
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Empirical check with this many runs per prompt.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cap on enumeration branches in exact mode.
        #[arg(long, default_value_t = 1 << 24)]
        branch_budget: u64,
        /// Cap on random bits when enumerating circuit laws.
        #[arg(long, default_value_t = 24)]
        enum_budget: u32,
        #[arg(long)]
        json: bool,
    },
    /// Check a recorded trace against a program and replay it.
    Audit {
        #[arg(long)]
        spec: PathBuf,
        /// Trace file as written by `run --trace-out`.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run once and print the round-by-round record.
    Trace {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Built-in even-parity samplers and the masked-block guessing game.
    Parity(ParityArgs),
}

#[derive(Args)]
struct ParityArgs {
    #[command(subcommand)]
    action: Option<ParityAction>,
    /// One of: revision, remask.
    #[arg(long)]
    mode: Option<String>,
    /// String length; remask needs it even. At most 20.
    #[arg(long)]
    n: Option<usize>,
    /// Enumerate the sampler exactly and compare with the target.
    #[arg(long)]
    verify: bool,
    /// Save the sampler as a program directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum ParityAction {
    /// Accuracy of the all-zeros-else-guess circuit built from a
    /// standard-mode program, reported as an exact reduced fraction.
    Advantage {
        /// Program directory; must be standard mode with a coinless
        /// selection circuit.
        #[arg(long)]
        spec: PathBuf,
        /// Rounds to simulate after the seeded one.
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 24)]
        enum_budget: u32,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Compile { strategy, input, out, json } => cmd_compile(&strategy, &input, &out, json),
        Cmd::Run { spec, input, seed, trace_out, json } => {
            cmd_run(&spec, &input, seed, trace_out.as_deref(), json)
        }
        Cmd::Sample { spec, input, samples, seed, json } => {
            cmd_sample(&spec, &input, samples, seed, json)
        }
        Cmd::Verify {
            circuit,
            spec,
            input,
            exact: _,
            samples,
            seed,
            branch_budget,
            enum_budget,
            json,
        } => cmd_verify(
            &circuit,
            &spec,
            input.as_deref(),
            samples,
            seed,
            branch_budget,
            enum_budget,
            json,
        ),
        Cmd::Audit { spec, trace, json } => cmd_audit(&spec, &trace, json),
        Cmd::Trace { spec, input, seed, json } => cmd_trace(&spec, &input, seed, json),
        Cmd::Parity(args) => match args.action {
            Some(ParityAction::Advantage { spec, rounds, enum_budget, json }) => {
                cmd_advantage(&spec, rounds, enum_budget, json)
            }
            None => cmd_parity(args),
        },
    }
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    netlist::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn read_spec(dir: &Path) -> Result<SamplerSpec> {
    load_spec(dir).map_err(|e| anyhow!("loading program {}: {e}", dir.display()))
}

fn prompt_bits(s: &str) -> Result<Vec<bool>> {
    parse_bits(s).map_err(|e| anyhow!("bad --input: {e}"))
}

fn bits_string(bits: &[bool]) -> String {
    if bits.is_empty() {
        "(none)".into()
    } else {
        bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

fn cmd_compile(strategy: &str, input: &Path, out: &Path, json: bool) -> Result<ExitCode> {
    let strategy = Strategy::parse(strategy)
        .ok_or_else(|| anyhow!("unknown strategy {strategy:?}; use trace, remask or revision"))?;
    let circuit = read_circuit(input)?;
    let compiled = compile(&circuit, strategy)?;
    let files = save_spec(&compiled.spec, out)?;
    if json {
        println!(
            "{}",
            json!({
                "strategy": strategy.name(),
                "mode": compiled.spec.mode.name(),
                "positions": compiled.spec.positions,
                "rounds": compiled.spec.rounds,
                "prompt_len": compiled.spec.prompt_len,
                "output_len": compiled.spec.output_len,
                "files": files,
            })
        );
    } else {
        println!(
            "compiled with {}: mode={}, positions={}, rounds={}, prompt {} bits, output {} bits",
            strategy.name(),
            compiled.spec.mode.name(),
            compiled.spec.positions,
            compiled.spec.rounds,
            compiled.spec.prompt_len,
            compiled.spec.output_len,
        );
        println!("wrote {} files under {}", files.len(), out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn trace_to_jsonl(trace: &Trace) -> Result<String> {
    let mut out = serde_json::to_string(&json!({ "prompt": trace.prompt }))?;
    out.push('\n');
    for rec in &trace.rounds {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&json!({ "output": trace.output }))?);
    out.push('\n');
    Ok(out)
}

fn trace_from_jsonl(text: &str) -> Result<Trace> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() < 3 {
        bail!("trace file needs a prompt line, round lines and an output line");
    }
    let head: serde_json::Value = serde_json::from_str(lines[0]).context("prompt line")?;
    let prompt = head
        .get("prompt")
        .and_then(|v| v.as_str())
        .context("first line must carry the prompt")?
        .to_string();
    let tail: serde_json::Value =
        serde_json::from_str(lines[lines.len() - 1]).context("output line")?;
    let output = tail
        .get("output")
        .and_then(|v| v.as_str())
        .context("last line must carry the output")?
        .to_string();
    let rounds = lines[1..lines.len() - 1]
        .iter()
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str::<RoundRecord>(l).with_context(|| format!("round line {}", i + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trace { prompt, rounds, output })
}

fn cmd_run(
    dir: &Path,
    input: &str,
    seed: u64,
    trace_out: Option<&Path>,
    json: bool,
) -> Result<ExitCode> {
    let spec = read_spec(dir)?;
    let machine = Machine::new(&spec)?;
    let prompt = prompt_bits(input)?;
    let outcome = machine.run(&prompt, &mut ChaCha8Rng::seed_from_u64(seed))?;
    if let Some(path) = trace_out {
        fs::write(path, trace_to_jsonl(&outcome.trace)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        println!(
            "{}",
            json!({
                "output": outcome.output,
                "rounds": outcome.trace.rounds.len(),
                "seed": seed,
            })
        );
    } else {
        println!("{}", outcome.output);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(dir: &Path, input: &str, samples: u64, seed: u64, json: bool) -> Result<ExitCode> {
    let spec = read_spec(dir)?;
    let prompt = prompt_bits(input)?;
    let emp = monte_carlo(&spec, &prompt, samples, seed)?;
    if json {
        println!(
            "{}",
            json!({ "samples": emp.samples, "seed": seed, "counts": emp.counts })
        );
    } else {
        for (key, count) in &emp.counts {
            println!("{key}  {count}  {:.6}", *count as f64 / emp.samples as f64);
        }
        println!("({} samples, seed {seed})", emp.samples);
    }
    Ok(ExitCode::SUCCESS)
}

/// Prompts to check: the given one, or all of them when none is named.
fn prompts_to_check(spec: &SamplerSpec, input: Option<&str>) -> Result<Vec<Vec<bool>>> {
    match input {
        Some(s) => Ok(vec![prompt_bits(s)?]),
        None => {
            let n = spec.prompt_len;
            if n > 12 {
                bail!("{n} prompt bits is too many to sweep; pass --input");
            }
            Ok((0..1usize << n)
                .map(|v| (0..n).map(|j| (v >> (n - 1 - j)) & 1 == 1).collect())
                .collect())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    circuit_path: &Path,
    dir: &Path,
    input: Option<&str>,
    samples: Option<u64>,
    seed: u64,
    branch_budget: u64,
    enum_budget: u32,
    json: bool,
) -> Result<ExitCode> {
    let circuit = read_circuit(circuit_path)?;
    let spec = read_spec(dir)?;
    let prompts = prompts_to_check(&spec, input)?;
    let budget = Budget { max_nodes: branch_budget };

    let mut all_ok = true;
    let mut rows = Vec::new();
    for (i, q) in prompts.iter().enumerate() {
        let shown = bits_string(q);
        match samples {
            None => {
                let report = verify_exact(&spec, &circuit, q, &budget, enum_budget)?;
                let ok = report.is_match();
                all_ok &= ok;
                if json {
                    rows.push(json!({
                        "input": shown,
                        "match": ok,
                        "outcomes": report.machine.len(),
                        "tvd": report.distance.to_string(),
                    }));
                } else if ok {
                    println!("input {shown}: exact match ({} outcomes)", report.machine.len());
                } else {
                    println!("input {shown}: MISMATCH");
                    print!("{report}");
                }
            }
            Some(n) => {
                let emp = monte_carlo(&spec, q, n, seed.wrapping_add(i as u64))?;
                let oracle = circuit.output_distribution(q, enum_budget)?;
                let distance = empirical_tvd(&oracle, &emp);
                let impossible: Vec<&String> = emp
                    .counts
                    .keys()
                    .filter(|k| oracle.get(k).is_none())
                    .collect();
                let ok = impossible.is_empty();
                all_ok &= ok;
                if json {
                    rows.push(json!({
                        "input": shown,
                        "match": ok,
                        "samples": n,
                        "empirical_tvd": distance,
                        "impossible_outcomes": impossible,
                    }));
                } else if ok {
                    println!("input {shown}: {n} samples, empirical tvd {distance:.6}");
                } else {
                    println!(
                        "input {shown}: MISMATCH, sampled outcomes the circuit never \
                         produces: {impossible:?}"
                    );
                }
            }
        }
    }
    if json {
        println!("{}", json!({ "ok": all_ok, "inputs": rows }));
    } else if all_ok {
        println!("ok ({} prompts)", prompts.len());
    } else {
        println!("FAILED");
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_audit(dir: &Path, trace_path: &Path, json: bool) -> Result<ExitCode> {
    let spec = read_spec(dir)?;
    let machine = Machine::new(&spec)?;
    let text = fs::read_to_string(trace_path)
        .with_context(|| format!("reading {}", trace_path.display()))?;
    let trace = trace_from_jsonl(&text)?;
    let audit = machine.audit(&trace);
    let replayed = machine.replay(&trace).map(|out| out == trace.output);
    let replay_ok = matches!(replayed, Ok(true));
    let ok = audit.is_ok() && replay_ok;
    if json {
        println!(
            "{}",
            json!({
                "ok": ok,
                "problems": audit.problems,
                "replay_matches": replay_ok,
            })
        );
    } else if ok {
        println!("audit clean; replay reproduces the recorded output");
    } else {
        for p in &audit.problems {
            println!("problem: {p}");
        }
        match replayed {
            Ok(true) => {}
            Ok(false) => println!("problem: replay disagrees with the recorded output"),
            Err(e) => println!("problem: replay failed: {e}"),
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_trace(dir: &Path, input: &str, seed: u64, json: bool) -> Result<ExitCode> {
    let spec = read_spec(dir)?;
    let machine = Machine::new(&spec)?;
    let prompt = prompt_bits(input)?;
    let outcome = machine.run(&prompt, &mut ChaCha8Rng::seed_from_u64(seed))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&outcome.trace)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("prompt: {}", if outcome.trace.prompt.is_empty() { "(none)" } else { &outcome.trace.prompt });
    for rec in &outcome.trace.rounds {
        let sampled: Vec<String> =
            rec.samples.iter().map(|s| format!("{}:{}", s.position, s.token)).collect();
        let mut line = format!("round {}: {} -> {}", rec.round, rec.pre_state, rec.post_state);
        if !sampled.is_empty() {
            line.push_str(&format!("   wrote {}", sampled.join(" ")));
        }
        if !rec.remasked.is_empty() {
            line.push_str(&format!("   remasked {:?}", rec.remasked));
        }
        println!("{line}");
    }
    println!("output: {}", outcome.output);
    Ok(ExitCode::SUCCESS)
}

fn cmd_parity(args: ParityArgs) -> Result<ExitCode> {
    let mode = args.mode.as_deref().ok_or_else(|| anyhow!("--mode is required"))?;
    let n = args.n.ok_or_else(|| anyhow!("--n is required"))?;
    if !(1..=20).contains(&n) {
        bail!("--n must be between 1 and 20");
    }
    let spec = match mode {
        "revision" => revision_sampler(n),
        "remask" => {
            if n % 2 != 0 {
                bail!("the remask sampler needs an even --n");
            }
            remask_sampler(n)
        }
        other => bail!("unknown mode {other:?}; use revision or remask"),
    };

    let mut files = Vec::new();
    if let Some(dir) = &args.out {
        files = save_spec(&spec, dir)?;
    }

    let mut matched = None;
    if args.verify {
        let machine = Machine::new(&spec)?;
        let got = exact_output_distribution(&machine, &[], &Budget::default())?;
        matched = Some(assert_equal(&got, &parity_target(n).distribution));
    }

    if args.json {
        println!(
            "{}",
            json!({
                "mode": spec.mode.name(),
                "n": n,
                "positions": spec.positions,
                "rounds": spec.rounds,
                "verified": matched.as_ref().map(|r| r.is_ok()),
                "files": files,
            })
        );
    } else {
        match &matched {
            Some(Ok(())) => println!("exact match, {} rounds", spec.rounds),
            Some(Err(diff)) => {
                println!("MISMATCH against the parity target:");
                print!("{diff}");
            }
            None => println!(
                "{} sampler for n={n}: positions={}, rounds={}",
                spec.mode.name(),
                spec.positions,
                spec.rounds
            ),
        }
        if let Some(dir) = &args.out {
            println!("wrote {} files under {}", files.len(), dir.display());
        }
    }
    Ok(match matched {
        Some(Err(_)) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}

/// Positions the program would select on the all-masked state in round
/// one. The selection circuit must be coinless for this to be a set.
fn first_selection(spec: &SamplerSpec) -> Result<Vec<usize>> {
    if spec.f.num_randoms() > 0 {
        bail!("the selection circuit draws coins; the first selection is not a fixed set");
    }
    let mut enc = Vec::with_capacity(spec.state_arity());
    for _ in 0..spec.positions {
        enc.push(true); // masked
        enc.push(false);
    }
    if spec.step_indexed {
        enc.extend(bin(0, spec.step_bits()));
    }
    let fbits = Evaluator::new(&spec.f)?.eval(&enc, &[]);
    Ok((1..=spec.positions).filter(|&p| fbits[p - 1]).collect())
}

fn cmd_advantage(dir: &Path, rounds: usize, enum_budget: u32, json: bool) -> Result<ExitCode> {
    let spec = read_spec(dir)?;
    let seeds = first_selection(&spec)?;
    if seeds.is_empty() {
        bail!("the program selects nothing in round one; there is no seeded block");
    }
    let guesser = advantage_circuit(&spec, &seeds, rounds)?;
    let accuracy = advantage_accuracy(&guesser, enum_budget)?;
    if json {
        println!(
            "{}",
            json!({
                "seeded": seeds,
                "rounds_after_seeding": rounds,
                "accuracy": accuracy.to_string(),
                "accuracy_approx": accuracy.to_f64(),
            })
        );
    } else {
        println!(
            "seeded positions {seeds:?}, {rounds} rounds simulated: accuracy {accuracy} ({})",
            accuracy.to_f64()
        );
    }
    Ok(ExitCode::SUCCESS)
}

//! The `bairc` command line.
//!
//! Exit codes: 0 success, 1 validation or domain failure, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::complexity::{complexity_report, family_condition_ok};
use crate::experiments::{
    deterministic_laws, gen_appendix_b5_family, gen_figure1_pair, gen_synthetic, gen_theorem2_family,
    gen_theorem3_family, run_sweep, uniform_laws, write_sweep_csv, ConsumptionKind, ConsumptionPattern, RewardShape,
    SetupSpec, SweepConfig,
};
use crate::external::{run_external_trials, ExternalInstance};
use crate::harness::{run_trials, summarize, write_trials_csv, TrialResult};
use crate::model::{BernoulliBound, Instance};
use crate::strategies::{PolicyKind, PolicySpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bairc",
    version,
    about = "Best arm identification under resource constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Estimate the failure probability of a policy on an instance.
    Run(RunArgs),
    /// Run a sweep described by a JSON config and write its CSV table.
    Sweep(SweepArgs),
    /// Print the complexity measures and bounds of an instance.
    Complexity(ComplexityArgs),
    /// Check an instance file.
    Validate(InstanceArg),
    /// Write a generated instance family to files.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct InstanceArg {
    /// Instance file.
    #[arg(value_name = "INSTANCE", required_unless_present = "instance")]
    path: Option<PathBuf>,
    #[arg(long, value_name = "FILE", conflicts_with = "path")]
    instance: Option<PathBuf>,
}

impl InstanceArg {
    fn get(&self) -> &Path {
        self.path
            .as_deref()
            .or(self.instance.as_deref())
            .expect("clap enforces one of the two")
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, default_value = "shrr")]
    policy: PolicyKind,
    /// Policy parameter override `key=value`; repeatable.
    #[arg(long = "policy-param", value_name = "KEY=VALUE")]
    policy_param: Vec<String>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write per-trial rows to this CSV file.
    #[arg(long = "emit-trials", value_name = "CSV")]
    emit_trials: Option<PathBuf>,
    /// Write the summary line here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep config (JSON).
    #[arg(value_name = "CONFIG")]
    config: PathBuf,
    /// Output CSV; overrides the config's `out`. Standard output if neither is set.
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    #[command(flatten)]
    instance: InstanceArg,
    /// Derive Bernoulli envelopes with b = max(d, 1 - d) instead of 1.
    #[arg(long = "tight-bernoulli-b")]
    tight_bernoulli_b: bool,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
    /// Output directory.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LawKind {
    Deterministic,
    Uniform,
}

#[derive(Debug, Subcommand)]
enum GenFamily {
    /// Deterministic/Bernoulli consumption pair with mean `d`.
    Figure1 {
        #[arg(long)]
        d: f64,
    },
    /// A synthetic benchmark instance.
    Synthetic {
        #[arg(long)]
        reward_shape: RewardShape,
        #[arg(long)]
        pattern: ConsumptionPattern,
        #[arg(long)]
        kind: ConsumptionKind,
        #[arg(long)]
        k: usize,
        /// One per resource; repeatable.
        #[arg(long = "budget", required = true)]
        budgets: Vec<f64>,
    },
    /// Gaussian-reward lower-bound family, one resource.
    Theorem2 {
        #[arg(long, value_delimiter = ',', required = true)]
        rewards: Vec<f64>,
        /// Decreasing consumption means.
        #[arg(long, value_delimiter = ',', required = true)]
        consumption: Vec<f64>,
        #[arg(long, value_enum, default_value = "deterministic")]
        law: LawKind,
        #[arg(long)]
        budget: f64,
    },
    /// Bernoulli-consumption lower-bound family, one resource.
    Theorem3 {
        #[arg(long, value_delimiter = ',', required = true)]
        rewards: Vec<f64>,
        #[arg(long = "base-means", value_delimiter = ',', required = true)]
        base_means: Vec<f64>,
        #[arg(long)]
        scale: f64,
        #[arg(long)]
        budget: f64,
    },
    /// Counterexample family for the refined measures.
    B5 {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        budget: f64,
    },
}

macro_rules! value_enum_from_str {
    ($($ty:ty),+) => {$(
        impl clap::builder::ValueParserFactory for $ty {
            type Parser = clap::builder::ValueParser;
            fn value_parser() -> Self::Parser {
                clap::builder::ValueParser::new(|s: &str| s.parse::<$ty>().map_err(|e| e.to_string()))
            }
        }
    )+};
}

value_enum_from_str!(PolicyKind, RewardShape, ConsumptionPattern, ConsumptionKind);

/// A failure that maps to exit code 1.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Cmd::Run(a) => cmd_run(&a, stdout, stderr),
        Cmd::Sweep(a) => cmd_sweep(&a, stdout),
        Cmd::Complexity(a) => cmd_complexity(&a, stdout),
        Cmd::Validate(a) => cmd_validate(&a, stdout),
        Cmd::Gen(a) => cmd_gen(&a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Reads and validates a model instance file.
pub fn parse_instance(path: &Path) -> Result<Instance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if is_external(&text) {
        return Err(format!(
            "{}: external arms have no closed-form means; use them with `run` only",
            path.display()
        ));
    }
    Instance::from_json_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn is_external(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("external_arms").map(|_| ()))
        .is_some()
}

fn write_output(out: Option<&Path>, stdout: &mut dyn Write, content: &[u8]) -> CmdResult {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => Ok(stdout.write_all(content)?),
    }
}

fn emit_trials(path: &Path, results: &[TrialResult], num_resources: usize) -> CmdResult {
    let file = fs::File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    write_trials_csv(std::io::BufWriter::new(file), results, num_resources)?;
    Ok(())
}

fn cmd_run(a: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let mut spec = PolicySpec::new(a.policy);
    spec.params.apply(a.policy, &a.policy_param)?;
    let text = fs::read_to_string(&a.instance).map_err(|e| Failure(format!("{}: {e}", a.instance.display())))?;

    let line = if is_external(&text) {
        let inst = ExternalInstance::from_json_str(&text)?;
        let run = run_external_trials(&inst, &spec, a.trials, a.seed)?;
        if run.clamp_warnings > 0 {
            writeln!(stderr, "warning: {} rewards clamped to [0, 1]", run.clamp_warnings)?;
        }
        if let Some(path) = &a.emit_trials {
            emit_trials(path, &run.results, 1)?;
        }
        let mut counts = vec![0u64; inst.external_arms.len()];
        for r in &run.results {
            counts[r.psi] += 1;
        }
        let mut value = match inst.best_arm {
            Some(best) => serde_json::to_value(summarize(&run.results, best, a.seed))?,
            None => json!({ "trials": a.trials, "seed": a.seed }),
        };
        value["recommendations"] = json!(counts);
        value["clamp_warnings"] = json!(run.clamp_warnings);
        value["timeouts"] = json!(run.timeouts);
        serde_json::to_string(&value)?
    } else {
        let inst = Instance::from_json_str(&text).map_err(|e| Failure(format!("{}: {e}", a.instance.display())))?;
        let results = run_trials(&inst, &spec, a.trials, a.seed, a.threads)?;
        if let Some(path) = &a.emit_trials {
            emit_trials(path, &results, inst.num_resources())?;
        }
        serde_json::to_string(&summarize(&results, inst.best_arm(), a.seed))?
    };
    write_output(a.out.as_deref(), stdout, format!("{line}\n").as_bytes())
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> CmdResult {
    let text = fs::read_to_string(&a.config).map_err(|e| Failure(format!("{}: {e}", a.config.display())))?;
    let mut config = SweepConfig::from_json_str(&text)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(trials) = a.trials {
        config.trials = trials;
    }
    let threads = a.threads.or(config.threads).unwrap_or(0);
    let rows = run_sweep(&config, threads)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows)?;
    write_output(a.out.as_deref().or(config.out.as_deref()), stdout, &buf)
}

fn cmd_complexity(a: &ComplexityArgs, stdout: &mut dyn Write) -> CmdResult {
    let mut inst = parse_instance(a.instance.get()).map_err(Failure)?;
    if a.tight_bernoulli_b {
        inst = inst.with_bernoulli_bound(BernoulliBound::Tight);
    }
    let report = complexity_report(&inst)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(a.out.as_deref(), stdout, text.as_bytes())
}

fn cmd_validate(a: &InstanceArg, stdout: &mut dyn Write) -> CmdResult {
    let path = a.get();
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    if is_external(&text) {
        let inst = ExternalInstance::from_json_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        writeln!(stdout, "ok: external, K={}", inst.external_arms.len())?;
    } else {
        let inst = Instance::from_json_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        writeln!(
            stdout,
            "ok: K={}, L={}, best arm {}",
            inst.num_arms(),
            inst.num_resources(),
            inst.best_arm()
        )?;
    }
    Ok(())
}

fn write_family(dir: &Path, stem: &str, family: &[Instance], stdout: &mut dyn Write) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    for (i, q) in family.iter().enumerate() {
        let path = dir.join(format!("{stem}_q{}.json", i + 1));
        fs::write(&path, q.to_json_pretty() + "\n").map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(())
}

fn write_named(dir: &Path, named: &[(String, Instance)], stdout: &mut dyn Write) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    for (name, q) in named {
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, q.to_json_pretty() + "\n").map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs, stdout: &mut dyn Write) -> CmdResult {
    match &a.family {
        GenFamily::Figure1 { d } => {
            let (det, sto) = gen_figure1_pair(*d)?;
            write_named(
                &a.out,
                &[(format!("figure1_d{d}_det"), det), (format!("figure1_d{d}_sto"), sto)],
                stdout,
            )
        }
        GenFamily::Synthetic {
            reward_shape,
            pattern,
            kind,
            k,
            budgets,
        } => {
            let spec = SetupSpec {
                reward_shape: *reward_shape,
                consumption_pattern: *pattern,
                consumption_kind: *kind,
                num_arms: *k,
                budgets: budgets.clone(),
            };
            let q = gen_synthetic(&spec)?;
            let name = format!("synthetic_{reward_shape}_{pattern}_{kind}_K{k}");
            write_named(&a.out, &[(name, q)], stdout)
        }
        GenFamily::Theorem2 {
            rewards,
            consumption,
            law,
            budget,
        } => {
            let laws = match law {
                LawKind::Deterministic => deterministic_laws(consumption),
                LawKind::Uniform => {
                    if consumption.iter().any(|&d| d > 0.5) {
                        return Err(Failure("uniform laws need consumption means <= 1/2".into()));
                    }
                    uniform_laws(consumption)
                }
            };
            let family = gen_theorem2_family(rewards, &[laws], &[*budget])?;
            write_family(&a.out, &format!("theorem2_K{}", rewards.len()), &family, stdout)?;
            let ok = family_condition_ok(&family)?;
            if !ok {
                writeln!(stdout, "note: budget condition not met; the lower bound does not apply")?;
            }
            Ok(())
        }
        GenFamily::Theorem3 {
            rewards,
            base_means,
            scale,
            budget,
        } => {
            let family = gen_theorem3_family(rewards, std::slice::from_ref(base_means), *scale, &[*budget])?;
            write_family(&a.out, &format!("theorem3_K{}", rewards.len()), &family, stdout)
        }
        GenFamily::B5 { k, budget } => {
            let family = gen_appendix_b5_family(*k, *budget)?;
            write_family(&a.out, &format!("b5_K{k}"), &family, stdout)
        }
    }
}

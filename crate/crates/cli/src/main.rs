use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use approachlab::corpus::{corpus_instance, CorpusParams, CORPUS_NAMES};
use approachlab::equivalence::{
    canonicalize, check_external, decide_proper, EquivStatus, EquivalenceVerdict,
};
use approachlab::instances::{classify, ClassKind};
use approachlab::learners::{rate_sweep, run, sweep_csv, AdversarySpec, LearnerSpec, SweepSetup};
use approachlab::reductions::{
    classical_reduce, halfspace_action, orthant_reduce, tight_improper_reduce,
    weighted_to_improper, weighted_to_proper,
};
use approachlab::{Error, Instance, Polytope, Rational, Vector};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "approachlab",
    version,
    about = "Approachability and phi-regret lab bench"
)]
struct Cli {
    /// Suppress human-readable output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Directory searched for `<name>.json` when an input path does not exist.
    #[arg(long, global = true, value_name = "DIR")]
    corpus_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a regret instance as external, proper, improper or invalid.
    Classify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Validate an instance and report fixed points or a failure witness.
    Verify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Apply a reduction and write the target instance.
    Reduce {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// JSON array of positive rationals.
        #[arg(long, value_name = "FILE")]
        weights: Option<PathBuf>,
        /// JSON object with "target", "ball" and "directions".
        #[arg(long, value_name = "FILE")]
        directions: Option<PathBuf>,
    },
    /// Decide linear equivalence to an external or proper instance.
    Equiv {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Check::Auto)]
        check: Check,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run a learner against an adversary.
    Simulate {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// hedge[:i,j,..], ggm, blackwell, static:<vertex> or static:<x1>,<x2>,..
        #[arg(long)]
        learner: String,
        /// iid[:<seed>], best-response or replay:<file>
        #[arg(long)]
        adversary: String,
        #[arg(short = 'T', value_name = "ROUNDS")]
        horizon: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Estimate final loss / sqrt(T) over horizons and seeds.
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Write a bundled example instance.
    Examples {
        /// Example name; omit to list the available names.
        name: Option<String>,
        #[arg(long)]
        dprime: Option<usize>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        d1: Option<usize>,
        #[arg(long)]
        d2: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(short = 'o', long = "out", value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Classical,
    TightImproper,
    WeightedImproper,
    WeightedProper,
    Orthant,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    External,
    Proper,
    Auto,
}

/// Writes to stdout, ignoring a closed pipe.
fn write_stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

struct Ctx {
    quiet: bool,
    json: bool,
    corpus_dir: Option<PathBuf>,
}

impl Ctx {
    fn say(&self, text: impl AsRef<str>) {
        if !self.quiet && !self.json {
            write_stdout(&format!("{}\n", text.as_ref()));
        }
    }

    fn emit_json(&self, value: &serde_json::Value) {
        if self.json {
            write_stdout(&format!(
                "{}\n",
                serde_json::to_string_pretty(value).expect("json value")
            ));
        }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.exists() {
            return path.to_path_buf();
        }
        if let Some(dir) = &self.corpus_dir {
            let mut name = path.as_os_str().to_owned();
            if path.extension().is_none() {
                name.push(".json");
            }
            let candidate = dir.join(name);
            if candidate.exists() {
                return candidate;
            }
        }
        path.to_path_buf()
    }

    fn load(&self, path: &Path) -> anyhow::Result<Instance> {
        let path = self.resolve(path);
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Instance::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn default_seed() -> anyhow::Result<u64> {
    match std::env::var("APPROACHLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("APPROACHLAB_SEED={s:?} is not an integer")),
        Err(_) => Ok(0),
    }
}

fn negative(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_classify(ctx: &Ctx, input: &Path) -> anyhow::Result<ExitCode> {
    let inst = ctx.load(input)?;
    let r = inst
        .as_regret()
        .ok_or_else(|| anyhow!("classify expects a regret instance"))?;
    let c = classify(r)?;
    ctx.say(format!("{}: {:?}", r.name, c.kind));
    ctx.emit_json(&serde_json::to_value(&c)?);
    Ok(negative(c.kind.is_valid()))
}

fn cmd_verify(ctx: &Ctx, input: &Path) -> anyhow::Result<ExitCode> {
    match ctx.load(input)? {
        Instance::Regret(r) => {
            let c = classify(&r)?;
            ctx.say(format!("{}: {:?}", r.name, c.kind));
            for (label, x) in &c.fixed_points {
                ctx.say(format!("  fixed point of {label}: {x}"));
            }
            if let Some(w) = &c.witness {
                ctx.say(format!(
                    "  {} has no fixed point in P; <p - phi(p), w> > 0 on P for w = {}",
                    w.label, w.direction
                ));
            }
            ctx.emit_json(&serde_json::to_value(&c)?);
            Ok(negative(c.kind.is_valid()))
        }
        Instance::Approachability(a) => {
            let k = a.u.len();
            let mut failing = None;
            for (i, u) in a.u.iter().enumerate() {
                match halfspace_action(&a, &Vector::unit(k, i)) {
                    Ok(_) => {}
                    Err(Error::NotApproachable { .. }) => {
                        failing = Some(u.label.clone());
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            match &failing {
                None => ctx.say(format!(
                    "{}: approachability instance, {} constraints, each satisfiable against every loss",
                    a.name, k
                )),
                Some(label) => ctx.say(format!(
                    "{}: constraint {label} exceeds 0 for some loss whatever the action",
                    a.name
                )),
            }
            ctx.emit_json(&json!({
                "kind": "approachability",
                "name": a.name,
                "constraints": k,
                "unsatisfiable_constraint": failing,
            }));
            Ok(negative(failing.is_none()))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrthantFile {
    target: Polytope,
    ball: Polytope,
    directions: Vec<Vector>,
}

#[derive(Serialize)]
struct Sidecar {
    method: &'static str,
    source: String,
    target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bijection: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<serde_json::Value>,
}

fn cmd_reduce(
    ctx: &Ctx,
    method: Method,
    input: &Path,
    out: &Path,
    weights: Option<&Path>,
    directions: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let inst = ctx.load(input)?;
    let regret = || {
        inst.as_regret()
            .cloned()
            .ok_or_else(|| anyhow!("this method expects a regret instance"))
    };
    let load_weights = || -> anyhow::Result<Vec<Rational>> {
        read_json(weights.ok_or_else(|| anyhow!("--weights is required for weighted reductions"))?)
    };
    let (target, sidecar): (Instance, Sidecar) = match method {
        Method::Classical => {
            let red = classical_reduce(&inst.to_approachability())?;
            let bij = red
                .source
                .u
                .iter()
                .map(|u| (u.label.clone(), u.label.clone()))
                .collect();
            let sc = Sidecar {
                method: "classical",
                source: red.source.name.clone(),
                target: red.target.name.clone(),
                bijection: Some(bij),
                details: Some(json!({
                    "pairing": red.pairing,
                    "action_oracle": "halfspace_action",
                    "loss_map": "l' = -pairing ((p, 1) (x) (l, 1))",
                })),
            };
            (red.target.into(), sc)
        }
        Method::TightImproper => {
            let red = tight_improper_reduce(&inst.to_approachability())?;
            let sc = Sidecar {
                method: "tight-improper",
                source: red.source.name.clone(),
                target: red.target.name.clone(),
                bijection: Some(red.bijection.clone()),
                details: Some(json!({ "augmented": red.augmented, "M_B": red.m_b })),
            };
            (red.target.into(), sc)
        }
        Method::WeightedImproper => {
            let r = regret()?;
            let w = load_weights()?;
            let t = weighted_to_improper(&r, &w)?;
            let sc = Sidecar {
                method: "weighted-improper",
                source: r.name.clone(),
                target: t.name.clone(),
                bijection: Some(
                    r.phi
                        .iter()
                        .map(|g| (g.label.clone(), g.label.clone()))
                        .collect(),
                ),
                details: Some(json!({ "weights": w })),
            };
            (t.into(), sc)
        }
        Method::WeightedProper => {
            let r = regret()?;
            let w = load_weights()?;
            let (t, big_w) = weighted_to_proper(&r, &w)?;
            let sc = Sidecar {
                method: "weighted-proper",
                source: r.name.clone(),
                target: t.name.clone(),
                bijection: Some(
                    r.phi
                        .iter()
                        .map(|g| (g.label.clone(), g.label.clone()))
                        .collect(),
                ),
                details: Some(json!({ "weights": w, "loss_scale": big_w })),
            };
            (t.into(), sc)
        }
        Method::Orthant => {
            let a = inst.to_approachability();
            let path = directions
                .ok_or_else(|| anyhow!("--directions is required for the orthant reduction"))?;
            let spec: OrthantFile = read_json(path)?;
            let t = orthant_reduce(
                &a.name,
                &a.p,
                &a.l,
                &a.u,
                &spec.target,
                &spec.ball,
                &spec.directions,
            )?;
            let sc = Sidecar {
                method: "orthant",
                source: a.name.clone(),
                target: t.name.clone(),
                bijection: None,
                details: Some(json!({ "directions": spec.directions })),
            };
            (t.into(), sc)
        }
    };
    write(out, &target.to_json())?;
    let sidecar_path = out.with_file_name("reduction.json");
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    write(&sidecar_path, &text)?;
    ctx.say(format!(
        "wrote {} ({}) and {}",
        out.display(),
        target.name(),
        sidecar_path.display()
    ));
    ctx.emit_json(&serde_json::to_value(&sidecar)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_equiv(
    ctx: &Ctx,
    input: &Path,
    check: Check,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let inst = ctx.load(input)?;
    let r = inst
        .as_regret()
        .ok_or_else(|| anyhow!("equiv expects a regret instance"))?;
    let c = classify(r)?;
    if c.kind == ClassKind::Invalid {
        let label = c.witness.map(|w| w.label).unwrap_or_default();
        ctx.say(format!(
            "{}: invalid instance ({label} has no fixed point in P)",
            r.name
        ));
        return Ok(ExitCode::from(2));
    }
    let lin = canonicalize(r)?;
    let verdict: EquivalenceVerdict = match check {
        Check::External => check_external(&lin)?,
        Check::Proper => decide_proper(&lin, trials, seed)?,
        Check::Auto => {
            let v = check_external(&lin)?;
            if v.status == EquivStatus::ExternalEquivalent {
                v
            } else {
                decide_proper(&lin, trials, seed)?
            }
        }
    };
    let text = verdict.to_json();
    if let Some(out) = out {
        write(out, &text)?;
    }
    ctx.say(format!("{}: {:?}", r.name, verdict.status));
    if let Some(s) = &verdict.s {
        ctx.say(format!("  S = {:?}", s.to_rows()));
    }
    if let Some(ob) = &verdict.obstruction {
        ctx.say(format!("  obstruction: {}", serde_json::to_string(ob)?));
    }
    if ctx.json {
        write_stdout(&text);
    }
    Ok(negative(matches!(
        verdict.status,
        EquivStatus::ExternalEquivalent | EquivStatus::ProperEquivalent
    )))
}

fn parse_adversary(spec: &str) -> anyhow::Result<AdversarySpec> {
    if let Some(path) = spec.strip_prefix("replay:") {
        let losses: Vec<Vector> = read_json(Path::new(path))?;
        return Ok(AdversarySpec::Replay { losses });
    }
    Ok(spec.parse()?)
}

fn cmd_simulate(
    ctx: &Ctx,
    input: &Path,
    learner: &str,
    adversary: &str,
    horizon: usize,
    seed: u64,
    trace: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let inst = ctx.load(input)?;
    let learner: LearnerSpec = learner.parse()?;
    let adversary = parse_adversary(adversary)?;
    let t = run(&inst, &learner, &adversary, horizon, seed)?;
    if let Some(path) = trace {
        write(path, &t.to_json())?;
    }
    let summary = json!({
        "instance": t.metadata.instance,
        "learner": t.metadata.learner,
        "adversary": t.metadata.adversary,
        "T": horizon,
        "seed": seed,
        "final_loss": t.cumulative.last().cloned().unwrap_or_else(Rational::zero),
        "final_loss_over_sqrt_t": t.final_loss_over_sqrt_t,
        "inner_regret": t.inner_cumulative.as_ref().and_then(|v| v.last().cloned()),
    });
    ctx.say(format!(
        "{} vs {} on {}: T={} final loss {} ({:.6} sqrt(T))",
        t.metadata.learner,
        t.metadata.adversary,
        t.metadata.instance,
        horizon,
        t.cumulative.last().cloned().unwrap_or_else(Rational::zero),
        t.final_loss_over_sqrt_t
    ));
    ctx.emit_json(&summary);
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RestrictedFamily {
    play: Vector,
    losses: Vec<Vector>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    /// Path relative to the config file, or a corpus name.
    instance: String,
    #[serde(default)]
    reduction: Option<String>,
    learner: String,
    adversary: String,
    /// Source rounds `(play, loss)` mapped through the classical reduction.
    #[serde(default)]
    restricted_family: Option<RestrictedFamily>,
    horizons: Vec<usize>,
    seeds: Vec<u64>,
}

fn cmd_sweep(ctx: &Ctx, config: &Path, csv: Option<&Path>) -> anyhow::Result<ExitCode> {
    let cfg: SweepConfig = read_json(config)?;
    let rel = config
        .parent()
        .unwrap_or(Path::new("."))
        .join(&cfg.instance);
    let mut instance = if rel.exists() {
        ctx.load(&rel)?
    } else if CORPUS_NAMES.contains(&cfg.instance.as_str()) {
        corpus_instance(&cfg.instance, &CorpusParams::default())?
    } else {
        ctx.load(Path::new(&cfg.instance))?
    };
    let mut reduction = None;
    match cfg.reduction.as_deref() {
        None => {}
        Some("classical") => {
            let red = classical_reduce(&instance.to_approachability())?;
            instance = red.target.clone().into();
            reduction = Some(red);
        }
        Some(other) => bail!("unsupported sweep reduction {other:?}; expected \"classical\""),
    }
    let mut adversary = parse_adversary(&cfg.adversary)?;
    if let Some(fam) = &cfg.restricted_family {
        let red = reduction
            .as_ref()
            .ok_or_else(|| anyhow!("restricted_family needs \"reduction\": \"classical\""))?;
        let family = fam
            .losses
            .iter()
            .map(|l| red.map_loss(&fam.play, l))
            .collect::<approachlab::Result<Vec<_>>>()?;
        let seed = match adversary {
            AdversarySpec::Iid { seed } => seed,
            _ => bail!("restricted_family needs an iid adversary"),
        };
        adversary = AdversarySpec::IidFamily { seed, family };
    }
    let setup = SweepSetup {
        instance,
        learner: cfg.learner.parse()?,
        adversary,
    };
    let rows = rate_sweep(&setup, &cfg.horizons, &cfg.seeds)?;
    let text = sweep_csv(&rows);
    if let Some(path) = csv {
        write(path, &text)?;
    }
    if !ctx.quiet && (csv.is_none() || ctx.json) {
        write_stdout(&text);
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_examples(
    ctx: &Ctx,
    name: Option<&str>,
    dprime: Option<usize>,
    eps: Option<&str>,
    d1: Option<usize>,
    d2: Option<usize>,
    n: Option<usize>,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let Some(name) = name else {
        for n in CORPUS_NAMES {
            write_stdout(&format!("{n}\n"));
        }
        return Ok(ExitCode::SUCCESS);
    };
    let mut params = CorpusParams::default();
    if let Some(v) = dprime {
        params.dprime = v;
    }
    if let Some(v) = eps {
        params.eps = v.parse()?;
    }
    if let Some(v) = d1 {
        params.d1 = v;
    }
    if let Some(v) = d2 {
        params.d2 = v;
    }
    if let Some(v) = n {
        params.n = v;
    }
    let inst = corpus_instance(name, &params)?;
    match out {
        Some(path) => {
            write(path, &inst.to_json())?;
            ctx.say(format!("wrote {} to {}", inst.name(), path.display()));
        }
        None => write_stdout(&inst.to_json()),
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let ctx = Ctx {
        quiet: cli.quiet,
        json: cli.json,
        corpus_dir: cli.corpus_dir,
    };
    match cli.command {
        Command::Classify { input } => cmd_classify(&ctx, &input),
        Command::Verify { input } => cmd_verify(&ctx, &input),
        Command::Reduce {
            method,
            input,
            out,
            weights,
            directions,
        } => cmd_reduce(
            &ctx,
            method,
            &input,
            &out,
            weights.as_deref(),
            directions.as_deref(),
        ),
        Command::Equiv {
            input,
            check,
            trials,
            seed,
            out,
        } => {
            let seed = seed.map_or_else(default_seed, Ok)?;
            cmd_equiv(&ctx, &input, check, trials, seed, out.as_deref())
        }
        Command::Simulate {
            input,
            learner,
            adversary,
            horizon,
            seed,
            trace,
        } => {
            let seed = seed.map_or_else(default_seed, Ok)?;
            cmd_simulate(
                &ctx,
                &input,
                &learner,
                &adversary,
                horizon,
                seed,
                trace.as_deref(),
            )
        }
        Command::Sweep { config, csv } => cmd_sweep(&ctx, &config, csv.as_deref()),
        Command::Examples {
            name,
            dprime,
            eps,
            d1,
            d2,
            n,
            out,
        } => cmd_examples(
            &ctx,
            name.as_deref(),
            dprime,
            eps.as_deref(),
            d1,
            d2,
            n,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

mod serve;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use reqlift_core::corpus::{load_config, load_corpus, perturb_with, write_corpus, Config, PerturbationRule, RequirementDoc};
use reqlift_core::ir::default_rules;
use reqlift_core::ltl::{parse_with_vars, Ltl};
use reqlift_core::metrics::fmeasure;
use reqlift_core::pipeline::compile_corpus;
use reqlift_core::workbench::{cmd_check, cmd_compile, read_formulas, CheckMode, CheckReport, NamedFormula};
use serde_json::json;

#[derive(Parser)]
#[command(name = "reqlift", version, about = "Requirements to temporal logic, models and games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Inputs {
    /// Corpus file(s) of `source_tag | sentence` lines.
    #[arg(long, required = true)]
    corpus: Vec<PathBuf>,
    /// Glossary and variable partition.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Consistency,
    Theorem,
    Realizability,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a corpus into formulas, a transition model and a symbol table.
    Compile {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Print the symbol table as JSON.
        #[arg(long)]
        dump_types: bool,
        /// Write one predicate graph per requirement in Graphviz format.
        #[arg(long)]
        dot: bool,
    },
    /// Check compiled formulas.
    Check {
        /// Formula file written by `compile`.
        #[arg(long)]
        formulas: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "consistency")]
        mode: Mode,
        /// Formula to verify in theorem mode.
        #[arg(long)]
        theorem: Option<String>,
        /// Environment assumption added before checking realizability.
        #[arg(long)]
        assume: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the Moore machine in Graphviz format.
        #[arg(long)]
        dot: bool,
    },
    /// Compare generated formulas with ground truth, pairwise by position.
    Score {
        #[arg(long)]
        ground: PathBuf,
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rewrite a corpus with a perturbation rule and score the recompiled formulas.
    Perturb {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        rule: PerturbationRule,
        /// Write the perturbed corpus here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the interactive game and assumption review.
    Serve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        assume: Vec<String>,
        /// TCP port for the JSON-lines protocol.
        #[arg(long)]
        port: Option<u16>,
        /// Port for the websocket bridge.
        #[arg(long)]
        ws_port: Option<u16>,
        /// Speak the protocol on stdin and stdout.
        #[arg(long)]
        stdio: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn docs(paths: &[PathBuf]) -> Result<Vec<RequirementDoc>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(load_corpus(p).with_context(|| format!("loading {}", p.display()))?);
    }
    for (i, d) in out.iter_mut().enumerate() {
        d.id = i as u32 + 1;
    }
    Ok(out)
}

fn vars(config: &Config) -> BTreeSet<String> {
    config.partition.declared().cloned().collect()
}

fn formula(text: &str, config: &Config) -> Result<Ltl> {
    parse_with_vars(text, &vars(config)).with_context(|| format!("parsing {text:?}"))
}

fn formulas(path: &Path, config: &Config) -> Result<Vec<NamedFormula>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_formulas(&text, &vars(config)).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn compile(inputs: &Inputs, out: &Path, dump_types: bool, dot: bool) -> Result<u8> {
    let config = config(inputs.config.as_deref())?;
    let docs = docs(&inputs.corpus)?;
    let a = cmd_compile(&docs, &config)?;
    for e in &a.errors {
        eprintln!("error: {e}");
    }
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    write(&out.join("formulas.ltl"), a.formulas_text())?;
    write(&out.join("model.sal"), a.model.to_sal())?;
    let symbols = serde_json::to_string_pretty(&a.symbols.to_json())?;
    write(&out.join("symbols.json"), &symbols)?;
    if dump_types {
        println!("{symbols}");
    }
    if dot {
        let (compiled, _) = compile_corpus(&docs, &config, &default_rules());
        for c in &compiled {
            write(&out.join("graphs").join(format!("{}.dot", c.doc.id)), c.graph.to_dot())?;
        }
    }
    info!("wrote {} formulas to {}", a.formulas.len(), out.display());
    eprintln!("{} formulas, {} errors, {} warnings", a.formulas.len(), a.errors.len(), a.warnings.len());
    Ok(a.exit_code() as u8)
}

#[allow(clippy::too_many_arguments)]
fn check(
    path: &Path,
    config_path: Option<&Path>,
    mode: Mode,
    theorem: Option<&str>,
    assume: &[String],
    out: &Path,
    dot: bool,
) -> Result<u8> {
    let config = config(config_path)?;
    let fs_ = formulas(path, &config)?;
    let mode = match mode {
        Mode::Consistency => CheckMode::Consistency,
        Mode::Theorem => {
            let Some(t) = theorem else { bail!("theorem mode needs --theorem") };
            CheckMode::Theorem(formula(t, &config)?)
        }
        Mode::Realizability => CheckMode::Realizability {
            assumptions: assume.iter().map(|a| formula(a, &config)).collect::<Result<_>>()?,
        },
    };
    let report = cmd_check(&fs_, &config, &mode)?;
    println!("{}", report.summary());
    match &report {
        CheckReport::Realizable { machine, .. } => {
            let path = out.join("moore.json");
            write(&path, serde_json::to_string_pretty(&machine.to_json())?)?;
            if dot {
                write(&out.join("moore.dot"), machine.to_dot())?;
            }
            println!("machine: {}", path.display());
        }
        CheckReport::Unrealizable { counterstrategy } => {
            let spec = &counterstrategy.spec;
            let (memory, _, _) = counterstrategy.plays();
            let summary = json!({
                "inputs": spec.inputs,
                "outputs": spec.outputs,
                "initial_input": spec.valuation(counterstrategy.initial_input)
                    .into_iter().filter(|(k, _)| spec.inputs.contains(k)).collect::<std::collections::BTreeMap<_, _>>(),
                "plays": memory.len(),
            });
            let path = out.join("counterstrategy.json");
            write(&path, serde_json::to_string_pretty(&summary)?)?;
            println!("counterstrategy: {}", path.display());
        }
        _ => {}
    }
    Ok(match report {
        CheckReport::Consistent { .. } | CheckReport::Holds | CheckReport::Realizable { .. } => 0,
        _ => 1,
    })
}

fn score(ground: &Path, generated: &Path, config_path: Option<&Path>) -> Result<u8> {
    let config = config(config_path)?;
    let g = formulas(ground, &config)?;
    let h = formulas(generated, &config)?;
    if g.len() != h.len() {
        bail!("{} ground formulas but {} generated", g.len(), h.len());
    }
    let mut total = 0.0;
    for (a, b) in g.iter().zip(&h) {
        let r = fmeasure(&a.formula, &b.formula);
        total += r.f_measure;
        println!("{}", json!({"formula": a.name, "precision": r.precision, "recall": r.recall, "f_measure": r.f_measure}));
    }
    let mean = if g.is_empty() { 0.0 } else { total / g.len() as f64 };
    println!("{}", json!({"mean_f_measure": mean}));
    Ok(0)
}

fn perturb(inputs: &Inputs, rule: PerturbationRule, out: Option<&Path>) -> Result<u8> {
    let config = config(inputs.config.as_deref())?;
    let docs = docs(&inputs.corpus)?;
    let perturbed: Vec<_> = docs.iter().map(|d| perturb_with(d, rule, &config.glossary)).collect();
    let new_docs: Vec<RequirementDoc> = perturbed.iter().map(|p| p.doc.clone()).collect();
    if let Some(path) = out {
        write(path, write_corpus(&new_docs))?;
    }
    let rules = default_rules();
    let (before, _) = compile_corpus(&docs, &config, &rules);
    for (d, p) in docs.iter().zip(&perturbed) {
        if !p.affected {
            continue;
        }
        let original = before.iter().find(|c| c.doc.id == d.id).map(|c| c.formula().clone());
        let (after, errors) = compile_corpus(std::slice::from_ref(&p.doc), &config, &rules);
        let line = match (original, after.first(), errors.first()) {
            (Some(o), Some(c), _) => {
                let r = fmeasure(&o, c.formula());
                json!({"id": d.id, "text": p.doc.text, "formula": c.formula().to_string(), "f_measure": r.f_measure})
            }
            (_, _, Some(e)) => json!({"id": d.id, "text": p.doc.text, "error": e.to_string()}),
            _ => json!({"id": d.id, "text": p.doc.text, "error": "original requirement did not compile"}),
        };
        println!("{line}");
    }
    eprintln!("{} of {} requirements affected by {rule}", perturbed.iter().filter(|p| p.affected).count(), docs.len());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Compile { inputs, out, dump_types, dot } => compile(&inputs, &out, dump_types, dot),
        Command::Check { formulas, config, mode, theorem, assume, out, dot } => {
            check(&formulas, config.as_deref(), mode, theorem.as_deref(), &assume, &out, dot)
        }
        Command::Score { ground, generated, config } => score(&ground, &generated, config.as_deref()),
        Command::Perturb { inputs, rule, out } => perturb(&inputs, rule, out.as_deref()),
        Command::Serve { inputs, assume, port, ws_port, stdio, out } => {
            let config = config(inputs.config.as_deref())?;
            let docs = docs(&inputs.corpus)?;
            let assumptions = assume.iter().map(|a| formula(a, &config)).collect::<Result<Vec<_>>>()?;
            let server = serve::Server::new(&docs, &config, &assumptions, out)?;
            if stdio {
                server.stdio()?;
            } else if port.is_none() && ws_port.is_none() {
                bail!("serve needs --port, --ws-port or --stdio");
            } else {
                server.listen(port, ws_port)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Command-line front end.
//!
//! Every command renders a report as a table, JSON or CSV. Output depends only
//! on the arguments (and seed), never on the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::bounds::{
    absent_group_sweep, achievable_rate, append_sweep, classify, increment_sweep, min_mais_oracle,
    row_subset_sweep, DEFAULT_BUDGET,
};
use crate::digraph::{build_digraph, check_properties, group_presence};
use crate::error::Error;
use crate::instance::{DecodingChoice, Instance};
use crate::mais::mais_of;
use crate::scheme::{build_plan, simulate};

#[derive(Parser, Debug)]
#[command(
    name = "gpicod",
    version,
    about = "Pliable index codes for g-group complete-{s} PICOD(t)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; `curve` defaults to csv, everything else to table.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write output to FILE instead of standard output.
    #[arg(long, value_name = "FILE", global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regime, exact rate or bounds, and the achievable rate.
    Rate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Also run the exhaustive min-MAIS oracle to refine the lower bound.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Dump the transmission plan.
    Plan {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Encode and decode random messages through the plan.
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Smallest MAIS over every decoding choice.
    MinMais {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the minimizing choice as JSON.
        #[arg(long, value_name = "FILE")]
        witness: Option<PathBuf>,
        /// Write the minimizing choice's digraph, layered by its MAIS.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// MAIS and structural checks for one decoding choice.
    Mais {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_name = "FILE")]
        choice: PathBuf,
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Achievable rate against t.
    Curve {
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 's')]
        s: usize,
        #[arg(short = 'g')]
        g: usize,
        #[arg(long, default_value_t = 1)]
        t_min: usize,
        /// Defaults to the largest valid t, g(m-s).
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Exhaustive or sampled check of one converse lemma.
    LemmaCheck {
        #[arg(value_enum)]
        which: Lemma,
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    Lemma2,
    Lemma6,
    Lemma9,
    Corollary7,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    #[arg(short = 'm')]
    pub m: Option<usize>,
    #[arg(short = 's')]
    pub s: Option<usize>,
    #[arg(short = 'g')]
    pub g: Option<usize>,
    #[arg(short = 't')]
    pub t: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub field_width: u32,
    /// Read the instance from a JSON file instead of -m/-s/-g/-t.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["m", "s", "g", "t"])]
    pub instance: Option<PathBuf>,
}

impl InstanceArgs {
    pub fn resolve(&self) -> anyhow::Result<Instance> {
        if let Some(path) = &self.instance {
            let text = read(path)?;
            return serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInstance(format!("{}: {e}", path.display())).into());
        }
        match (self.m, self.s, self.g, self.t) {
            (Some(m), Some(s), Some(g), Some(t)) => {
                Ok(Instance::with_field_width(m, s, g, t, self.field_width)?)
            }
            _ => Err(
                Error::InvalidInstance("give -m, -s, -g and -t, or --instance FILE".into()).into(),
            ),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Largest choice space the exhaustive search will walk.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// Rendered command output and whether every check passed.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

/// 1 for failed checks and falsifications, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Falsification(_) | Error::Undelivered { .. }) => 1,
        _ => 2,
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let fmt = cli.format;
    match &cli.command {
        Command::Rate {
            instance,
            oracle,
            search,
        } => {
            let inst = instance.resolve()?;
            let mut report = classify(inst.m(), inst.s(), inst.g(), inst.t())?;
            if *oracle {
                report.refine(&min_mais_oracle(&inst, search.budget, search.workers)?);
            }
            render(fmt, &report, true)
        }
        Command::Plan { instance } => {
            let plan = build_plan(&instance.resolve()?);
            match fmt.unwrap_or(Format::Table) {
                Format::Table => Ok(Outcome {
                    text: plan_table(&plan),
                    passed: true,
                }),
                f => render(Some(f), &plan, true),
            }
        }
        Command::Simulate {
            instance,
            trials,
            seed,
        } => {
            let plan = build_plan(&instance.resolve()?);
            let report = simulate(&plan, *trials, *seed)?;
            let passed = report.passed();
            match fmt.unwrap_or(Format::Table) {
                Format::Table => {
                    let mut text = plan_table(&plan);
                    text.push_str(&table(&serde_json::to_value(&report)?));
                    let _ = writeln!(text, "result: {}", if passed { "PASS" } else { "FAIL" });
                    Ok(Outcome { text, passed })
                }
                f => render(Some(f), &report, passed),
            }
        }
        Command::MinMais {
            instance,
            search,
            witness,
            dot,
        } => {
            let inst = instance.resolve()?;
            let result = min_mais_oracle(&inst, search.budget, search.workers)?;
            if let Some(path) = witness {
                write(path, &result.argmin.to_json())?;
            }
            if let Some(path) = dot {
                let dg = build_digraph(&inst, &result.argmin)?;
                let layering = dg.layering(mais_of(&dg).mask())?;
                write(path, &dg.to_dot(Some(&layering)))?;
            }
            let report = MinMaisReport {
                instance: inst,
                value: result.value,
                exhaustive: result.exhaustive,
                choices: result.choices,
                witness_index: result.argmin_index,
                witness: serde_json::from_str(&result.argmin.to_json())?,
            };
            render(fmt, &report, true)
        }
        Command::Mais {
            instance,
            choice,
            dot,
        } => {
            let inst = instance.resolve()?;
            let d = DecodingChoice::from_json(&inst, &read(choice)?)?;
            let dg = build_digraph(&inst, &d)?;
            let w = mais_of(&dg);
            let layering = dg.layering(w.mask())?;
            if let Some(path) = dot {
                write(path, &dg.to_dot(Some(&layering)))?;
            }
            let properties = check_properties(&dg, &layering);
            let presence = group_presence(&inst, w.labels(dg.graph()));
            let passed = properties.all_passed();
            let report = MaisReport {
                instance: inst,
                nodes: dg.node_count(),
                edges: dg.graph().edge_count(),
                mais: w.size,
                witness: w.nodes.iter().map(|&v| dg.node(v).to_string()).collect(),
                layers: layering
                    .layers
                    .iter()
                    .map(|l| l.iter().map(|&v| dg.node(v).to_string()).collect())
                    .collect(),
                properties: serde_json::to_value(&properties)?,
                presence: serde_json::to_value(&presence)?,
            };
            render(fmt, &report, passed)
        }
        Command::Curve {
            m,
            s,
            g,
            t_min,
            t_max,
        } => {
            let t_max = t_max.unwrap_or(g * m.saturating_sub(*s));
            let rows = curve_rows(*m, *s, *g, *t_min..=t_max)?;
            match fmt.unwrap_or(Format::Csv) {
                Format::Csv => Ok(Outcome {
                    text: curve_csv(&rows),
                    passed: true,
                }),
                Format::Json => render(Some(Format::Json), &rows, true),
                Format::Table => Ok(Outcome {
                    text: curve_csv(&rows).replace(',', "\t"),
                    passed: true,
                }),
            }
        }
        Command::LemmaCheck {
            which,
            instance,
            trials,
            seed,
            search,
        } => lemma_check(fmt, *which, instance, *trials, *seed, search),
    }
}

fn lemma_check(
    fmt: Option<Format>,
    which: Lemma,
    instance: &InstanceArgs,
    trials: usize,
    seed: u64,
    search: &SearchArgs,
) -> anyhow::Result<Outcome> {
    let (value, failures) = match which {
        Lemma::Lemma9 => {
            let Some(s) = instance.s else {
                bail!(Error::Hypothesis("lemma9 needs -s".into()));
            };
            let sweep = row_subset_sweep(s)?;
            (serde_json::to_value(&sweep)?, sweep.failures)
        }
        Lemma::Lemma2 => {
            let sweep = append_sweep(&instance.resolve()?, trials, seed)?;
            (serde_json::to_value(&sweep)?, sweep.failures)
        }
        Lemma::Lemma6 => {
            let sweep = increment_sweep(&instance.resolve()?, search.budget, search.workers)?;
            (serde_json::to_value(&sweep)?, sweep.falsifications)
        }
        Lemma::Corollary7 => {
            let sweep = absent_group_sweep(&instance.resolve()?, search.budget, search.workers)?;
            let failures = if sweep.passed() {
                Vec::new()
            } else {
                sweep.counterexamples.clone()
            };
            (serde_json::to_value(&sweep)?, failures)
        }
    };
    if let Some(first) = failures.first() {
        return Err(Error::Falsification(format!(
            "{} counterexample(s); first: {first}\n{}",
            failures.len(),
            serde_json::to_string_pretty(&value)?
        ))
        .into());
    }
    render(fmt, &value, true)
}

#[derive(Serialize)]
struct MinMaisReport {
    instance: Instance,
    value: usize,
    exhaustive: bool,
    choices: u64,
    witness_index: u64,
    witness: Value,
}

#[derive(Serialize)]
struct MaisReport {
    instance: Instance,
    nodes: usize,
    edges: usize,
    mais: usize,
    witness: Vec<String>,
    layers: Vec<Vec<String>>,
    properties: Value,
    presence: Value,
}

/// One point of the achievable-rate curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveRow {
    pub t: usize,
    pub achievable: usize,
    pub regime: String,
    pub exact_lower: usize,
    pub exact_upper: usize,
}

pub fn curve_rows(
    m: usize,
    s: usize,
    g: usize,
    ts: std::ops::RangeInclusive<usize>,
) -> crate::Result<Vec<CurveRow>> {
    ts.map(|t| {
        let r = classify(m, s, g, t)?;
        Ok(CurveRow {
            t,
            achievable: achievable_rate(m, s, g, t)?,
            regime: r.regime.to_string(),
            exact_lower: r.lower,
            exact_upper: r.upper,
        })
    })
    .collect()
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("t,achievable,regime,exact_lower,exact_upper\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.t, r.achievable, r.regime, r.exact_lower, r.exact_upper
        );
    }
    out
}

fn plan_table(plan: &crate::scheme::CodePlan) -> String {
    let mut out = format!("instance: {}\nrate: {}\n", plan.instance.label(), plan.rate);
    for r in &plan.rounds {
        let _ = writeln!(
            out,
            "slot {}: {:?} round, {} symbol(s), messages {:?}",
            r.slot, r.kind, r.symbol_count, r.message_indices
        );
    }
    out
}

fn render<T: Serialize>(fmt: Option<Format>, value: &T, passed: bool) -> anyhow::Result<Outcome> {
    let v = serde_json::to_value(value)?;
    let text = match fmt.unwrap_or(Format::Table) {
        Format::Json => serde_json::to_string_pretty(&v)? + "\n",
        Format::Csv => csv(&v),
        Format::Table => table(&v),
    };
    Ok(Outcome { text, passed })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn table(v: &Value) -> String {
    let Value::Object(map) = v else {
        return scalar(v) + "\n";
    };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    map.iter()
        .map(|(k, v)| format!("{k:<width$}  {}\n", scalar(v)))
        .collect()
}

fn csv(v: &Value) -> String {
    let quote = |s: String| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s
        }
    };
    let Value::Object(map) = v else {
        return quote(scalar(v)) + "\n";
    };
    let mut out = String::from("key,value\n");
    for (k, v) in map {
        let _ = writeln!(out, "{k},{}", quote(scalar(v)));
    }
    out
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{approximate_volume, validate_plan, PlanOptions};
use crate::geometry::DEFAULT_DIMENSION_CAP;
use crate::hypergraph::Hypergraph;
use crate::oracle::{volume_bruteforce_with_cap, volume_montecarlo, xi_bruteforce_with_cap};
use crate::polymer::{box_side, Mode};
use crate::rational::{decimal_string, fraction_string, parse_fraction, pow, to_float, Float, Rational};

/// Significant digits in decimal output.
pub const DECIMAL_DIGITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Graph,
    Mcs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleArg {
    None,
    Ie,
    Volume,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Approximate the volume of the truncated fractional matching polytope of a
/// hypergraph.
#[derive(Debug, Parser)]
#[command(name = "matchvol", version)]
pub struct Cli {
    /// Instance file: one hyperedge per line, `#` starts a comment.
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation parameter as an exact rational `p/q`.
    #[arg(long)]
    pub delta: String,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Decay rate `p/q`; defaults to the largest certified rate.
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long, value_enum, default_value_t = OracleArg::None)]
    pub oracle: OracleArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the truncation depth.
    #[arg(long)]
    pub max_cluster_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
    pub dimension_cap: usize,
    /// Run outside the certified range; the result carries no guarantee.
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRecord {
    pub kind: OracleArg,
    /// Volume according to the oracle, as a decimal string.
    pub volume: String,
    /// Exact volume as `p/q` for the exact oracles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `|approximation - oracle| / oracle`.
    pub relative_discrepancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub mode: Mode,
    pub n: usize,
    pub m_edges: usize,
    pub delta: String,
    pub epsilon: f64,
    pub rho: String,
    pub truncation_depth: usize,
    pub log_xi: String,
    pub log_volume: String,
    pub volume: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_volume: Option<String>,
    /// Number of connected cluster supports evaluated.
    pub cluster_count: usize,
    pub polymer_count: usize,
    pub max_cluster_size: usize,
    pub tail_bound: f64,
    pub guarantee: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
    pub wall_time_ms: u64,
}

impl ResultRecord {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("mode", self.mode.to_string());
        line("n", self.n.to_string());
        line("m_edges", self.m_edges.to_string());
        line("delta", self.delta.clone());
        line("epsilon", self.epsilon.to_string());
        line("rho", self.rho.clone());
        line("truncation_depth", self.truncation_depth.to_string());
        line("log_xi", self.log_xi.clone());
        line("log_volume", self.log_volume.clone());
        line("volume", self.volume.clone());
        if let Some(v) = &self.exact_volume {
            line("exact_volume", v.clone());
        }
        line("cluster_count", self.cluster_count.to_string());
        line("polymer_count", self.polymer_count.to_string());
        line("max_cluster_size", self.max_cluster_size.to_string());
        line("tail_bound", format!("{:e}", self.tail_bound));
        line("guarantee", self.guarantee.to_string());
        for w in &self.warnings {
            line("warning", w.clone());
        }
        if let Some(o) = &self.oracle {
            line("oracle", format!("{:?}", o.kind).to_lowercase());
            line("oracle_volume", o.volume.clone());
            if let Some(e) = &o.exact {
                line("oracle_exact", e.clone());
            }
            if let Some(s) = o.std_error {
                line("oracle_std_error", format!("{s:e}"));
            }
            line("relative_discrepancy", format!("{:e}", o.relative_discrepancy));
        }
        line("wall_time_ms", self.wall_time_ms.to_string());
        out
    }
}

fn relative(approx: &Float, reference: &Float) -> f64 {
    let diff = approx.clone() - reference.clone();
    (diff / reference.clone()).to_f64().value().abs()
}

fn exact_oracle(kind: OracleArg, exact: Rational, approx: &Float) -> OracleRecord {
    let value = to_float(&exact);
    OracleRecord {
        kind,
        volume: decimal_string(&value, DECIMAL_DIGITS),
        exact: Some(fraction_string(&exact)),
        std_error: None,
        samples: None,
        seed: None,
        relative_discrepancy: relative(approx, &value),
    }
}

/// Parses the instance and runs the pipeline.
pub fn execute(cli: &Cli) -> Result<ResultRecord> {
    let text = std::fs::read_to_string(&cli.input)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", cli.input.display()))))?;
    let h = Hypergraph::parse(&text)?;
    let delta = parse_fraction(&cli.delta)?;
    let rho = cli.rho.as_deref().map(parse_fraction).transpose()?;
    let options = PlanOptions {
        mode: match cli.mode {
            ModeArg::Auto => None,
            ModeArg::Graph => Some(Mode::Graph),
            ModeArg::Mcs => Some(Mode::Mcs),
        },
        rho,
        max_cluster_size: cli.max_cluster_size,
        dimension_cap: cli.dimension_cap,
        force: cli.force,
    };
    let plan = validate_plan(&h, &delta, cli.epsilon, &options)?;
    let result = approximate_volume(&h, &plan)?;

    let oracle = match cli.oracle {
        OracleArg::None => None,
        OracleArg::Ie => {
            let xi = xi_bruteforce_with_cap(&h, &delta, cli.dimension_cap)?;
            let exact = xi * pow(&box_side(&h, &delta), h.num_edges());
            Some(exact_oracle(cli.oracle, exact, &result.volume))
        }
        OracleArg::Volume => {
            let exact = volume_bruteforce_with_cap(&h, &delta, cli.dimension_cap)?;
            Some(exact_oracle(cli.oracle, exact, &result.volume))
        }
        OracleArg::Mc => {
            let mc = volume_montecarlo(&h, &delta, cli.mc_samples, cli.seed)?;
            let approx = result.volume.to_f64().value();
            Some(OracleRecord {
                kind: cli.oracle,
                volume: format!("{:e}", mc.estimate),
                exact: None,
                std_error: Some(mc.std_error),
                samples: Some(mc.samples),
                seed: Some(mc.seed),
                relative_discrepancy: ((approx - mc.estimate) / mc.estimate).abs(),
            })
        }
    };

    let d = &result.diagnostics;
    Ok(ResultRecord {
        mode: plan.mode,
        n: h.num_vertices(),
        m_edges: h.num_edges(),
        delta: fraction_string(&plan.delta),
        epsilon: plan.epsilon,
        rho: fraction_string(&plan.rho),
        truncation_depth: plan.truncation_depth,
        log_xi: fraction_string(&result.log_xi),
        log_volume: decimal_string(&result.log_volume, DECIMAL_DIGITS),
        volume: decimal_string(&result.volume, DECIMAL_DIGITS),
        exact_volume: result.exact_volume.as_ref().map(fraction_string),
        cluster_count: d.support_count,
        polymer_count: d.polymer_count,
        max_cluster_size: d.max_cluster_size,
        tail_bound: d.tail_bound,
        guarantee: d.guarantee,
        warnings: d.warnings.clone(),
        oracle,
        wall_time_ms: d.wall_time_ms,
    })
}

/// Full CLI behaviour: returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(record) => {
            let body = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&record).expect("record serializes");
                    s.push('\n');
                    s
                }
                Format::Text => record.to_text(),
            };
            if stdout.write_all(body.as_bytes()).is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

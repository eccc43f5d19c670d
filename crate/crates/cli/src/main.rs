//! `uqsp`: run verification suites, inspect chains, solve and check Bethe roots.
//!
//! Exit codes: 0 when everything requested passes, 1 on any failure, 2 on a
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use uqsp_core::error::Error;
use uqsp_core::scalar_field::Backend;
use uqsp_core::verify_harness::{
    chain_report, profile_specs, run_suite, solve_report, Profile, Status, Suite, SuiteReport,
    SuiteSpec, DEFAULT_TRIALS,
};

#[derive(Parser)]
#[command(
    name = "uqsp",
    version,
    about = "U_q(sp(2n)) Bethe ansatz verification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite (--suite), or every suite of a profile (--suite all / --profile)
    Verify(Opts),
    /// Vacuum index, vacuum weights and spectrum of one chain
    Chain(Opts),
    /// Solve the Bethe equations with the nested vacuum
    BetheSolve(Opts),
    /// Check given roots (--u) end to end
    BetheCheck(Opts),
    /// Run a profile (quick by default) and print the summary table
    Report(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Deformation parameter, "p/r" or a float
    #[arg(long)]
    q: Option<String>,
    /// Comma-separated inhomogeneities
    #[arg(long)]
    inhom: Option<String>,
    /// Comma-separated Bethe roots for bethe-check
    #[arg(long)]
    u: Option<String>,
    /// Spectral parameter for the chain command
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact or float
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// quick or full
    #[arg(long)]
    profile: Option<String>,
    /// Write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "perturb-r", hide = true)]
    perturb_r: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(untagged)]
enum ListArg {
    List(Vec<String>),
    Joined(String),
    #[default]
    Missing,
}

impl ListArg {
    fn joined(self) -> Option<String> {
        match self {
            ListArg::List(v) => Some(v.join(",")),
            ListArg::Joined(s) => Some(s),
            ListArg::Missing => None,
        }
    }
}

/// Config file schema, mirroring the flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    suite: Option<String>,
    n: Option<usize>,
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    q: Option<String>,
    #[serde(default)]
    inhom: ListArg,
    #[serde(default)]
    u: ListArg,
    x: Option<String>,
    trials: Option<usize>,
    seed: Option<u64>,
    backend: Option<String>,
    tol: Option<f64>,
    profile: Option<String>,
    out: Option<PathBuf>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::ConfigError(msg.into())
}

impl Opts {
    fn merged(self) -> Result<Opts, Error> {
        let path = match &self.config {
            Some(p) => p.clone(),
            None => return Ok(self),
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let f: FileConfig = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("bad config {}: {e}", path.display())))?;
        Ok(Opts {
            suite: self.suite.or(f.suite),
            n: self.n.or(f.n),
            l: self.l.or(f.l),
            m: self.m.or(f.m),
            q: self.q.or(f.q),
            inhom: self.inhom.or(f.inhom.joined()),
            u: self.u.or(f.u.joined()),
            x: self.x.or(f.x),
            trials: self.trials.or(f.trials),
            seed: self.seed.or(f.seed),
            backend: self.backend.or(f.backend),
            tol: self.tol.or(f.tol),
            profile: self.profile.or(f.profile),
            out: self.out.or(f.out),
            config: self.config,
            perturb_r: self.perturb_r,
        })
    }

    fn list(s: &Option<String>) -> Option<Vec<String>> {
        s.as_ref().map(|v| {
            v.split(',')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .collect()
        })
    }

    /// A suite spec from the options; `suite` decides the defaults.
    fn spec(&self, suite: Suite) -> Result<SuiteSpec, Error> {
        let mut s = SuiteSpec::new(suite, self.n.unwrap_or(1));
        if let Some(b) = &self.backend {
            s.backend = b.parse::<Backend>()?;
        }
        let inhom = Self::list(&self.inhom);
        s.l = self.l.or(inhom.as_ref().map(|v| v.len())).unwrap_or(1);
        s.m = self.m.unwrap_or(1);
        s.trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        s.seed = self.seed.unwrap_or(0);
        if let Some(t) = self.tol {
            s.tolerance = t;
        }
        s.q = self.q.clone();
        s.inhom = inhom;
        s.us = Self::list(&self.u);
        s.perturb = self.perturb_r.clone();
        Ok(s)
    }

    fn profile(&self) -> Result<Option<Profile>, Error> {
        match (&self.profile, self.suite.as_deref()) {
            (Some(p), _) => Ok(Some(p.parse()?)),
            (None, Some("all")) => Ok(Some(Profile::Quick)),
            _ => Ok(None),
        }
    }
}

fn write_out(path: &Option<PathBuf>, json: &str) -> Result<(), Error> {
    if let Some(p) = path {
        write_file(p, json)?;
    }
    Ok(())
}

fn write_file(p: &Path, json: &str) -> Result<(), Error> {
    fs::write(p, format!("{json}\n"))
        .map_err(|e| config_error(format!("cannot write {}: {e}", p.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn print_table(reports: &[SuiteReport]) {
    for r in reports {
        println!("{}", r.summary());
        for (term, v) in &r.adopted_variants {
            println!("    adopted {term}: {v}");
        }
        for d in r
            .details
            .iter()
            .filter(|d| d.counted && d.status != Status::Pass)
        {
            let note = d.note.as_deref().unwrap_or("");
            println!("    trial {} {}: {:?} {note}", d.trial, d.case, d.status);
        }
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("{passed}/{} suites passed", reports.len());
}

fn run_reports(specs: &[SuiteSpec], out: &Option<PathBuf>, single: bool) -> Result<bool, Error> {
    let reports: Vec<SuiteReport> = specs.iter().map(run_suite).collect::<Result<_, _>>()?;
    print_table(&reports);
    if single {
        write_out(out, &reports[0].to_json())?;
    } else {
        write_out(out, &to_json(&reports))?;
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn verify(o: &Opts) -> Result<bool, Error> {
    if let Some(p) = o.profile()? {
        let mut specs = profile_specs(p, o.seed.unwrap_or(0));
        if o.perturb_r.is_some() {
            for s in &mut specs {
                s.perturb = o.perturb_r.clone();
            }
        }
        return run_reports(&specs, &o.out, false);
    }
    let suite: Suite = o
        .suite
        .as_deref()
        .ok_or_else(|| config_error("--suite is required (or --profile)"))?
        .parse()?;
    run_reports(&[o.spec(suite)?], &o.out, true)
}

fn report(o: &Opts) -> Result<bool, Error> {
    let p = o.profile()?.unwrap_or(Profile::Quick);
    let mut specs = profile_specs(p, o.seed.unwrap_or(0));
    if o.perturb_r.is_some() {
        for s in &mut specs {
            s.perturb = o.perturb_r.clone();
        }
    }
    run_reports(&specs, &o.out, false)
}

fn chain(o: &Opts) -> Result<bool, Error> {
    let spec = o.spec(Suite::Rtt)?;
    let r = chain_report(&spec, o.x.as_deref())?;
    println!(
        "n={} L={} q={} inhom=[{}] dim={} vacuum=e_{}^L",
        spec.n,
        spec.l,
        r.q,
        r.inhom.join(", "),
        r.state_dim,
        r.vacuum_index
    );
    for (i, w) in &r.weights {
        println!("  λ_{i}({}) = {w}", r.x);
    }
    if let Some(sp) = &r.spectrum {
        println!("  spectrum of H({}): {}", r.x, sp.join(", "));
    }
    write_out(&o.out, &to_json(&r))?;
    Ok(true)
}

fn bethe_solve(o: &Opts) -> Result<bool, Error> {
    let mut spec = o.spec(Suite::Thm1)?;
    spec.backend = Backend::Float;
    let r = solve_report(&spec)?;
    println!(
        "n={} L={} M={} q={} inhom=[{}]",
        spec.n,
        spec.l,
        spec.m,
        r.q,
        r.inhom.join(", ")
    );
    for root in &r.roots {
        println!(
            "  u = {}   (|A/B - 1| = {:e}, |V| = {:e})",
            root.us.join(","),
            root.ratio_residual,
            root.b_vector_norm
        );
    }
    if let Some(n) = &r.note {
        println!("  {n}");
    }
    write_out(&o.out, &to_json(&r))?;
    Ok(r.status == Status::Pass)
}

fn bethe_check(o: &Opts) -> Result<bool, Error> {
    if o.u.is_none() || o.q.is_none() || o.inhom.is_none() {
        return Err(config_error("bethe-check needs --u, --q and --inhom"));
    }
    let mut spec = o.spec(Suite::Thm1)?;
    spec.backend = Backend::Float;
    spec.m = spec.us.as_ref().map(|u| u.len()).unwrap_or(0);
    spec.trials = o.trials.unwrap_or(1);
    run_reports(&[spec], &o.out, true)
}

type Handler = fn(&Opts) -> Result<bool, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (opts, run): (Opts, Handler) = match cli.command {
        Command::Verify(o) => (o, verify),
        Command::Chain(o) => (o, chain),
        Command::BetheSolve(o) => (o, bethe_solve),
        Command::BetheCheck(o) => (o, bethe_check),
        Command::Report(o) => (o, report),
    };
    match opts.merged().and_then(|o| run(&o)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let kind = match &e {
                Error::ConfigError(_) => "config",
                _ => "runtime",
            };
            let rec = serde_json::json!({ "error": kind, "message": e.to_string() });
            eprintln!("{rec}");
            if matches!(e, Error::ConfigError(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

//! `advshare`: validate stabilizer codes, list advance shareable share sets
//! and run the sharing protocol on a dense simulator.
//!
//! One JSON report goes to stdout; a short summary goes to stderr unless
//! `--json-only` is given.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use advshare_core::advance::dual_min_weight;
use advshare_core::sim::DEFAULT_STATE_BUDGET;
use advshare_core::{
    enumerate_advance_shareable, parse_code, AccessLabel, AdvanceScheme, EnumerationBudget, Error,
    ShareSet, StabilizerCode,
};
use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use report::{
    AccessReport, CircuitReport, CodeReport, ErrorReport, NormalFormReport, PlanReport, Report,
    SetReport, ShareableReport, Status, TranscriptReport,
};

const EXIT_INVALID: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Tolerance for fidelities and mutual information in the demo checks.
const TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "advshare",
    version,
    about = "Advance sharing of quantum secrets over stabilizer codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a code file and report [[n,k,d]]_p.
    Validate(Options),
    /// List advance shareable sets with their certificates.
    Analyze(Options),
    /// Run encode, erase, decode and reconstruct for every qualified set.
    Demo(Options),
}

#[derive(clap::Args)]
struct Options {
    /// Code file: header `p=<prime> n=<count>`, then rows `x.. | z..`.
    file: PathBuf,
    /// Advance shares for `demo`, 1-based and comma separated.
    #[arg(long = "J", value_delimiter = ',', value_name = "a,b,...")]
    advance: Vec<usize>,
    /// Largest set size listed by `analyze` (default n).
    #[arg(long, value_name = "m")]
    max_size: Option<usize>,
    /// Seed for the random secrets and measurement outcomes.
    #[arg(long, default_value_t = 0, value_name = "s")]
    seed: u64,
    /// Random secrets per qualified set; 0 prints the access table only.
    #[arg(long, default_value_t = 1, value_name = "t")]
    trials: usize,
    /// Most codewords an exhaustive distance scan may visit.
    #[arg(long, value_name = "N")]
    budget: Option<u128>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    json_only: bool,
}

/// Report under construction plus the summary lines and exit status.
struct Outcome {
    report: Report,
    summary: Vec<String>,
    exit: u8,
}

impl Outcome {
    fn new(command: &str) -> Outcome {
        Outcome {
            report: Report::new(command),
            summary: Vec::new(),
            exit: 0,
        }
    }

    fn fail(&mut self, e: &Error) {
        self.report.status = Status::Error;
        self.report.error = Some(ErrorReport::from_error(e));
        self.summary.push(format!("error: {e}"));
        self.exit = exit_code(e);
        if self.exit == EXIT_BUDGET {
            self.report.partial = true;
        }
    }

    /// Marks the report partial without failing it.
    fn budget_hit(&mut self, what: &str, e: &Error) {
        self.report.partial = true;
        self.summary.push(format!("partial: {what}: {e}"));
        self.exit = self.exit.max(EXIT_BUDGET);
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::NotCommutative { .. }
        | Error::RowsDependent { .. }
        | Error::UnsupportedModulus(_)
        | Error::OutOfRange { .. }
        | Error::ShareIndexOutOfRange { .. }
        | Error::NotAdvanceShareable(_)
        | Error::NoLogicalQudits => EXIT_INVALID,
        Error::EnumerationLimit { .. } | Error::DenseBudget { .. } => EXIT_BUDGET,
        _ => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    let (name, opts) = match &cli.command {
        Command::Validate(o) => ("validate", o),
        Command::Analyze(o) => ("analyze", o),
        Command::Demo(o) => ("demo", o),
    };
    let mut out = Outcome::new(name);
    if let Some(code) = load(&mut out, opts) {
        let budget = opts.budget.map(EnumerationBudget).unwrap_or_default();
        match name {
            "validate" => validate(&mut out, &code, budget),
            "analyze" => analyze(&mut out, &code, opts, budget),
            _ => demo(&mut out, &code, opts, budget),
        }
    }

    let json = serde_json::to_string_pretty(&out.report).expect("report serializes");
    println!("{json}");
    if !opts.json_only {
        for line in &out.summary {
            eprintln!("{line}");
        }
    }
    ExitCode::from(out.exit)
}

fn load(out: &mut Outcome, opts: &Options) -> Option<StabilizerCode> {
    let text = match std::fs::read_to_string(&opts.file) {
        Ok(t) => t,
        Err(e) => {
            out.report.status = Status::Error;
            out.report.error = Some(ErrorReport {
                kind: "io",
                message: format!("{}: {e}", opts.file.display()),
                line: None,
                rows: None,
            });
            out.summary
                .push(format!("error: cannot read {}: {e}", opts.file.display()));
            out.exit = EXIT_INVALID;
            return None;
        }
    };
    match parse_code(&text) {
        Ok(code) => Some(code),
        Err(e) => {
            out.fail(&e);
            None
        }
    }
}

/// Attaches the code section; a distance scan over budget leaves `d` null.
fn describe_code(out: &mut Outcome, code: &StabilizerCode, budget: EnumerationBudget) {
    let distance = if code.k() == 0 {
        None
    } else {
        match code.code_distance(budget) {
            Ok(d) => Some(d),
            Err(e @ Error::EnumerationLimit { .. }) => {
                out.budget_hit("code distance", &e);
                None
            }
            Err(e) => {
                out.fail(&e);
                return;
            }
        }
    };
    let section = CodeReport::new(code, distance);
    out.summary.insert(0, section.parameters.clone());
    out.report.code = Some(section);
}

fn validate(out: &mut Outcome, code: &StabilizerCode, budget: EnumerationBudget) {
    describe_code(out, code, budget);
}

fn analyze(out: &mut Outcome, code: &StabilizerCode, opts: &Options, budget: EnumerationBudget) {
    describe_code(out, code, budget);
    if out.report.status == Status::Error {
        return;
    }
    let max_size = opts.max_size.unwrap_or(code.n());
    let dual_distance = match dual_min_weight(code, budget) {
        Ok(d) => Some(d),
        Err(e @ Error::EnumerationLimit { .. }) => {
            out.budget_hit("dual distance", &e);
            None
        }
        Err(e) => return out.fail(&e),
    };
    match enumerate_advance_shareable(code, max_size, budget) {
        Ok(sets) => {
            out.summary.push(format!(
                "{} advance shareable set(s) of size at most {max_size}",
                sets.len()
            ));
            for s in &sets {
                out.summary.push(format!("  {}", s.shares));
            }
            out.report.shareable = Some(ShareableReport {
                max_size,
                dual_distance,
                sets: sets.iter().map(SetReport::new).collect(),
            });
        }
        Err(e) => out.fail(&e),
    }
}

fn demo(out: &mut Outcome, code: &StabilizerCode, opts: &Options, budget: EnumerationBudget) {
    describe_code(out, code, budget);
    if out.report.status == Status::Error {
        return;
    }
    let result = (|| -> advshare_core::Result<()> {
        let j = ShareSet::new(code.n(), opts.advance.iter().copied())?;
        let scheme = AdvanceScheme::new(code.clone(), &j, budget)?;
        let plan = scheme.plan();
        out.summary
            .push(format!("advance shares {j}: {}", plan.parameters));
        out.report.normal_form = Some(NormalFormReport::new(&plan.normal_form));
        out.report.plan = Some(PlanReport::new(plan));
        out.report.circuit = Some(CircuitReport::new(scheme.synthesis()));

        if opts.trials == 0 {
            let table = scheme.access_table(false, DEFAULT_STATE_BUDGET)?;
            out.report.access_table = Some(table.iter().map(AccessReport::new).collect());
            return Ok(());
        }

        let table = match scheme.access_table(true, DEFAULT_STATE_BUDGET) {
            Ok(t) => t,
            Err(e @ Error::DenseBudget { .. }) => {
                out.budget_hit("simulation", &e);
                let t = scheme.access_table(false, DEFAULT_STATE_BUDGET)?;
                out.report.access_table = Some(t.iter().map(AccessReport::new).collect());
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        for row in &table {
            let info = row.mutual_information.unwrap_or(f64::NAN);
            let entropic = AccessLabel::from_mutual_information(info, code.k(), 1e-6);
            if entropic != row.label {
                return Err(Error::Invariant(format!(
                    "shares {} are {} but I(R:A) = {info}",
                    row.shares,
                    row.label.as_str()
                )));
            }
        }
        out.report.access_table = Some(table.iter().map(AccessReport::new).collect());

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let transcript =
            scheme.run_trials(opts.trials, DEFAULT_STATE_BUDGET, opts.seed, &mut rng)?;
        let section = TranscriptReport::new(&transcript, opts.trials);
        out.summary.push(format!(
            "{} run(s) over qualified sets, min fidelity {}",
            section.runs.len(),
            section
                .min_fidelity
                .map_or("n/a".into(), |f| format!("{f:.12}"))
        ));
        let bad = section.min_fidelity.filter(|f| *f < 1.0 - TOL);
        out.report.transcript = Some(section);
        if let Some(f) = bad {
            return Err(Error::Invariant(format!("reconstruction fidelity {f}")));
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.fail(&e);
    }
    if let Some(table) = &out.report.access_table {
        for label in [
            AccessLabel::Qualified,
            AccessLabel::Intermediate,
            AccessLabel::Forbidden,
        ] {
            let count = table.iter().filter(|r| r.label == label.as_str()).count();
            out.summary
                .push(format!("{}: {count} set(s)", label.as_str()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error() {
        let parse = Error::Parse {
            line: 2,
            message: "x".into(),
        };
        assert_eq!(exit_code(&parse), EXIT_INVALID);
        assert_eq!(
            exit_code(&Error::NotAdvanceShareable("{1}".into())),
            EXIT_INVALID
        );
        let over = Error::DenseBudget {
            required: 9,
            budget: 1,
        };
        assert_eq!(exit_code(&over), EXIT_BUDGET);
        assert_eq!(exit_code(&Error::Invariant("x".into())), EXIT_INTERNAL);
    }

    #[test]
    fn failing_on_budget_flags_partial() {
        let mut out = Outcome::new("validate");
        out.fail(&Error::EnumerationLimit {
            required: 9,
            budget: 1,
        });
        assert!(out.report.partial);
        assert_eq!(out.exit, EXIT_BUDGET);
        assert_eq!(
            out.report.error.as_ref().unwrap().kind,
            "enumeration_budget"
        );
    }

    #[test]
    fn comma_separated_advance_shares() {
        let cli = Cli::try_parse_from(["advshare", "demo", "f.code", "--J", "1,3", "--json-only"])
            .unwrap();
        let Command::Demo(o) = cli.command else {
            panic!()
        };
        assert_eq!(o.advance, vec![1, 3]);
        assert!(o.json_only);
        assert_eq!((o.seed, o.trials), (0, 1));
    }
}

//! The JSON document written to standard output.

use advshare_core::sim::{AccessRow, ProtocolTranscript};
use advshare_core::{
    CodeParameters, EaqeccPlan, Error, NormalForm, PauliOperator, ShareableSet, StabilizerCode,
    Synthesis,
};
use serde::Serialize;

pub const SCHEMA_ID: &str = "advshare-report/v1";

#[derive(Serialize, Default)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub status: Status,
    /// Set when an enumeration or dense budget cut some section short.
    pub partial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shareable: Option<ShareableReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalFormReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub access_table: Option<Vec<AccessReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<TranscriptReport>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: SCHEMA_ID,
            command: command.to_string(),
            ..Report::default()
        }
    }
}

#[derive(Serialize, Default, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[default]
    Ok,
    Error,
}

#[derive(Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<[usize; 2]>,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> ErrorReport {
        let (line, rows) = match e {
            Error::Parse { line, .. } => (Some(*line), None),
            Error::NotCommutative { first, second, .. } => (None, Some([*first, *second])),
            Error::GramMismatch(a, b) => (None, Some([*a, *b])),
            _ => (None, None),
        };
        ErrorReport {
            kind: error_kind(e),
            message: e.to_string(),
            line,
            rows,
        }
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::NotCommutative { .. } => "not_commutative",
        Error::RowsDependent { .. } => "rows_dependent",
        Error::UnsupportedModulus(_) | Error::OutOfRange { .. } => "bad_value",
        Error::ShareIndexOutOfRange { .. } => "bad_share",
        Error::NotAdvanceShareable(_) => "not_advance_shareable",
        Error::NoLogicalQudits => "no_logical_qudits",
        Error::EnumerationLimit { .. } => "enumeration_budget",
        Error::DenseBudget { .. } => "dense_budget",
        _ => "internal",
    }
}

#[derive(Serialize)]
pub struct CodeReport {
    pub p: u8,
    pub n: usize,
    pub k: usize,
    pub generators: Vec<String>,
    pub check_matrix: Vec<Vec<u8>>,
    pub distance: Option<usize>,
    pub parameters: String,
}

impl CodeReport {
    pub fn new(code: &StabilizerCode, distance: Option<usize>) -> CodeReport {
        let h = code.check_matrix();
        CodeReport {
            p: code.modulus().get(),
            n: code.n(),
            k: code.k(),
            generators: code.generators().iter().map(|g| g.to_string()).collect(),
            check_matrix: (0..h.rows()).map(|r| h.row(r).to_vec()).collect(),
            distance,
            parameters: CodeParameters {
                n: code.n(),
                k: code.k(),
                d: distance,
                p: code.modulus().get(),
            }
            .to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct ShareableReport {
    pub max_size: usize,
    /// Minimum weight of the dual space, when it fit the budget.
    pub dual_distance: Option<usize>,
    pub sets: Vec<SetReport>,
}

#[derive(Serialize)]
pub struct SetReport {
    pub shares: Vec<usize>,
    pub certificates: Certificates,
}

/// `theorem1` is the exact shortening test, `theorem2` the dual distance
/// bound (null when that distance was out of budget).
#[derive(Serialize)]
pub struct Certificates {
    #[serde(rename = "theorem1")]
    pub shortening: bool,
    #[serde(rename = "theorem2")]
    pub dual_distance: Option<bool>,
}

impl SetReport {
    pub fn new(set: &ShareableSet) -> SetReport {
        SetReport {
            shares: set.shares.indices().to_vec(),
            certificates: Certificates {
                shortening: set.exact,
                dual_distance: set.sufficient,
            },
        }
    }
}

#[derive(Serialize)]
pub struct NormalFormReport {
    pub advance_shares: Vec<usize>,
    pub check_matrix: Vec<Vec<u8>>,
    pub mu: Vec<u8>,
}

impl NormalFormReport {
    pub fn new(form: &NormalForm) -> NormalFormReport {
        let h = &form.check;
        NormalFormReport {
            advance_shares: form.shares.indices().to_vec(),
            check_matrix: (0..h.rows()).map(|r| h.row(r).to_vec()).collect(),
            mu: form.mu.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct PlanReport {
    pub parameters: String,
    pub register: Vec<usize>,
    pub pair_shares: Vec<usize>,
    pub ancilla_shares: Vec<usize>,
    pub secret_shares: Vec<usize>,
    pub source: Vec<String>,
    pub target: Vec<String>,
}

fn paulis(ops: &[PauliOperator]) -> Vec<String> {
    ops.iter().map(|o| o.to_string()).collect()
}

impl PlanReport {
    pub fn new(plan: &EaqeccPlan) -> PlanReport {
        PlanReport {
            parameters: plan.parameters.to_string(),
            register: plan.complement.clone(),
            pair_shares: plan.pair_shares.clone(),
            ancilla_shares: plan.ancilla_shares.clone(),
            secret_shares: plan.secret_shares.clone(),
            source: paulis(&plan.source),
            target: paulis(&plan.target),
        }
    }
}

#[derive(Serialize)]
pub struct CircuitReport {
    pub qudits: usize,
    pub gates: Vec<String>,
    /// Residual phases in powers of `exp(i*pi/p)`.
    pub zeta_phases: Vec<u8>,
}

impl CircuitReport {
    pub fn new(syn: &Synthesis) -> CircuitReport {
        CircuitReport {
            qudits: syn.circuit.m(),
            gates: syn.circuit.gates().iter().map(|g| g.to_string()).collect(),
            zeta_phases: syn.zeta_phases.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct AccessReport {
    pub shares: Vec<usize>,
    pub label: &'static str,
    pub mutual_information: Option<f64>,
}

impl AccessReport {
    pub fn new(row: &AccessRow) -> AccessReport {
        AccessReport {
            shares: row.shares.indices().to_vec(),
            label: row.label.as_str(),
            mutual_information: row.mutual_information,
        }
    }
}

#[derive(Serialize)]
pub struct TranscriptReport {
    pub seed: u64,
    pub trials_per_set: usize,
    pub syndromes: Vec<u8>,
    pub runs: Vec<RunReport>,
    pub min_fidelity: Option<f64>,
}

#[derive(Serialize)]
pub struct RunReport {
    pub qualified: Vec<usize>,
    pub erased: Vec<usize>,
    pub measured: Vec<u8>,
    pub correction: String,
    pub fidelity: f64,
}

impl TranscriptReport {
    pub fn new(t: &ProtocolTranscript, trials_per_set: usize) -> TranscriptReport {
        let runs: Vec<RunReport> = t
            .trials
            .iter()
            .map(|r| RunReport {
                qualified: r.qualified.indices().to_vec(),
                erased: r.record.erased.indices().to_vec(),
                measured: r.record.measured.clone(),
                correction: r.record.correction.to_string(),
                fidelity: r.fidelity,
            })
            .collect();
        TranscriptReport {
            seed: t.seed,
            trials_per_set,
            syndromes: t.syndromes.clone(),
            min_fidelity: runs.iter().map(|r| r.fidelity).reduce(f64::min),
            runs,
        }
    }
}

//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any failed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use advshare_core::advance::dual_min_weight;
use advshare_core::clifford::{conjugation_residual, DEFAULT_UNITARY_BUDGET};
use advshare_core::sim::DEFAULT_STATE_BUDGET;
use advshare_core::{
    classify_access, construct_eaqecc, is_advance_shareable, is_advance_shareable_sufficient,
    normal_form, parse_code, AccessLabel, AdvanceScheme, CodeParameters, EnumerationBudget,
    Modulus, PauliOperator, QuditState, ShareSet, StabilizerCode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUDGET: EnumerationBudget = EnumerationBudget::DEFAULT;

type Outcome = Result<String, String>;

fn codes_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../codes")
}

fn load(name: &str) -> StabilizerCode {
    let text = std::fs::read_to_string(codes_dir().join(name)).expect("fixture file");
    parse_code(&text).expect("valid fixture")
}

fn fixtures() -> Vec<(&'static str, StabilizerCode)> {
    vec![
        ("xxxx_zzzz", load("xxxx_zzzz.code")),
        ("five_qubit", load("five_qubit.code")),
        ("qutrit_3_1_2", load("qutrit_3_1_2.code")),
    ]
}

fn set(n: usize, idx: &[usize]) -> ShareSet {
    ShareSet::new(n, idx.iter().copied()).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn xxxx_zzzz_parameters() -> Outcome {
    let start = Instant::now();
    let text =
        std::fs::read_to_string(codes_dir().join("xxxx_zzzz.code")).map_err(|e| e.to_string())?;
    let code = parse_code(&text).map_err(|e| e.to_string())?;
    let d = code.code_distance(BUDGET).map_err(|e| e.to_string())?;
    let params = CodeParameters {
        n: code.n(),
        k: code.k(),
        d: Some(d),
        p: code.modulus().get(),
    };
    let elapsed = start.elapsed();
    ensure(params.to_string() == "[[4,2,2]]_2", format!("got {params}"))?;
    ensure(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("{params} in {elapsed:?}"))
}

fn xxxx_zzzz_shortening() -> Outcome {
    let code = load("xxxx_zzzz.code");
    let j = set(4, &[4]);
    let short = code
        .stabilizer_space()
        .shorten(&j)
        .map_err(|e| e.to_string())?;
    let expected = code.num_generators() - 2;
    ensure(
        short.dim() == 0 && expected == 0,
        format!("dimension {}", short.dim()),
    )?;
    ensure(
        is_advance_shareable(&code, &j).unwrap(),
        "exact test rejected {4}",
    )?;
    Ok("dim f(S) shortened on {4} = 0 = 2 - 2".into())
}

fn xxxx_zzzz_dual_weight() -> Outcome {
    let code = load("xxxx_zzzz.code");
    let dual = code.normalizer_space();
    let mut visited = 0usize;
    let mut best = usize::MAX;
    dual.for_each_nonzero_codeword(BUDGET, |w| {
        visited += 1;
        best = best.min(advshare_core::symplectic::symplectic_weight(w, 4));
        true
    })
    .map_err(|e| e.to_string())?;
    ensure(visited == 63, format!("scanned {visited} codewords"))?;
    ensure(best == 2, format!("minimum weight {best}"))?;
    ensure(
        dual_min_weight(&code, BUDGET).unwrap() == 2,
        "library disagrees with scan",
    )?;
    Ok(format!("d_min = {best} over {visited} nonzero codewords"))
}

fn xxxx_zzzz_plan() -> Outcome {
    let code = load("xxxx_zzzz.code");
    let plan = construct_eaqecc(&code, &set(4, &[4]), BUDGET).map_err(|e| e.to_string())?;
    let p = code.modulus();
    let xxx = PauliOperator::new(p, 0, &[1, 1, 1], &[0, 0, 0]).unwrap();
    let zzz = PauliOperator::new(p, 0, &[0, 0, 0], &[1, 1, 1]).unwrap();
    ensure(
        plan.source == vec![xxx, zzz],
        format!("source {:?}", plan.source),
    )?;
    let params = plan.parameters.to_string();
    ensure(
        params.starts_with("[[3,2,2;1]]"),
        format!("parameters {params}"),
    )?;
    let shown: Vec<String> = plan.source.iter().map(|g| g.to_string()).collect();
    Ok(format!(
        "source {} and parameters {params}",
        shown.join(", ")
    ))
}

fn xxxx_zzzz_end_to_end() -> Outcome {
    let start = Instant::now();
    let code = load("xxxx_zzzz.code");
    let scheme =
        AdvanceScheme::new(code.clone(), &set(4, &[4]), BUDGET).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_fidelity = 1.0f64;
    for a in ShareSet::subsets_up_to(4, 3)
        .into_iter()
        .filter(|a| a.len() == 3)
    {
        let secret = QuditState::random(code.modulus(), 2, &mut rng);
        let encoded = scheme
            .encode(&secret, DEFAULT_STATE_BUDGET)
            .map_err(|e| e.to_string())?;
        let rec = scheme
            .reconstruct(&encoded, &a, &secret, &mut rng)
            .map_err(|e| format!("{a}: {e}"))?;
        worst_fidelity = worst_fidelity.min(rec.fidelity);
    }
    let encoded = scheme
        .encode_with_reference::<f64>(DEFAULT_STATE_BUDGET)
        .map_err(|e| e.to_string())?;
    ensure(
        encoded.state.m() == 6,
        "expected 6 qubits with the reference",
    )?;
    let mut worst_info = 0.0f64;
    for share in 1..=4 {
        let info = AdvanceScheme::mutual_information(&encoded, &set(4, &[share]))
            .map_err(|e| e.to_string())?;
        worst_info = worst_info.max(info);
    }
    let elapsed = start.elapsed();
    ensure(
        worst_fidelity >= 1.0 - 1e-9,
        format!("fidelity {worst_fidelity}"),
    )?;
    ensure(
        worst_info <= 1e-6,
        format!("singleton I(R:A) = {worst_info}"),
    )?;
    ensure(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "min fidelity {worst_fidelity:.12}, max singleton I(R:A) {worst_info:.2e}, {elapsed:?}"
    ))
}

/// 60 random stabilizers with p in {2, 3} and n in 1..=5, seeded.
fn random_sweep() -> Vec<StabilizerCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..60)
        .map(|i| {
            let p = if i % 2 == 0 { 2 } else { 3 };
            let n = rng.random_range(1..=5);
            let r = rng.random_range(0..=n);
            StabilizerCode::random(Modulus::new(p).unwrap(), n, r, &mut rng)
        })
        .collect()
}

fn exact_test_sweep() -> Outcome {
    let mut codes = random_sweep();
    codes.extend(fixtures().into_iter().map(|(_, c)| c));
    let mut checked = 0;
    let mut shareable = 0;
    for code in &codes {
        for j in ShareSet::all_subsets(code.n()) {
            let exact = is_advance_shareable(code, &j).map_err(|e| e.to_string())?;
            let form = normal_form(code, &j);
            if let Ok(f) = &form {
                f.verify(code.check_matrix())
                    .map_err(|e| format!("{j}: {e}"))?;
            }
            ensure(
                exact == form.is_ok(),
                format!("counterexample: {:?} with J = {j}", code.check_matrix()),
            )?;
            checked += 1;
            shareable += exact as usize;
        }
    }
    Ok(format!(
        "{} stabilizers, {checked} sets, {shareable} shareable, 0 counterexamples",
        codes.len()
    ))
}

fn sufficient_test_sweep() -> Outcome {
    let mut codes = random_sweep();
    codes.extend(fixtures().into_iter().map(|(_, c)| c));
    let mut certified = 0;
    let mut missed = 0;
    for code in &codes {
        for j in ShareSet::all_subsets(code.n()) {
            let exact = is_advance_shareable(code, &j).unwrap();
            let sufficient =
                is_advance_shareable_sufficient(code, &j, BUDGET).map_err(|e| e.to_string())?;
            ensure(
                !sufficient || exact,
                format!("unsound on {:?} with J = {j}", code.check_matrix()),
            )?;
            certified += sufficient as usize;
            missed += (exact && !sufficient) as usize;
        }
    }
    Ok(format!(
        "{certified} sets certified, 0 unsound; {missed} shareable sets the shortcut misses"
    ))
}

fn conjugation_contract() -> Outcome {
    let mut plans = 0;
    let mut worst = 0.0f64;
    for (name, code) in fixtures() {
        for j in ShareSet::all_subsets(code.n()) {
            if !is_advance_shareable(&code, &j).unwrap() {
                continue;
            }
            let scheme = AdvanceScheme::new(code.clone(), &j, BUDGET)
                .map_err(|e| format!("{name} {j}: {e}"))?;
            let plan = scheme.plan();
            let r = conjugation_residual::<f64>(
                scheme.synthesis(),
                &plan.source,
                &plan.target,
                DEFAULT_UNITARY_BUDGET,
            )
            .map_err(|e| format!("{name} {j}: {e}"))?;
            ensure(r <= 1e-9, format!("{name} {j}: residual {r:e}"))?;
            worst = worst.max(r);
            plans += 1;
        }
    }
    Ok(format!("{plans} plans, worst residual {worst:.2e}"))
}

fn access_cross_validation() -> Outcome {
    let mut rows = 0;
    for (name, code, j) in [
        ("xxxx_zzzz", load("xxxx_zzzz.code"), set(4, &[4])),
        ("five_qubit", load("five_qubit.code"), set(5, &[5])),
    ] {
        let scheme = AdvanceScheme::new(code.clone(), &j, BUDGET).map_err(|e| e.to_string())?;
        let table = scheme
            .access_table(true, DEFAULT_STATE_BUDGET)
            .map_err(|e| e.to_string())?;
        ensure(
            table.len() == 1 << code.n(),
            "table does not cover every subset",
        )?;
        for row in table {
            let info = row.mutual_information.unwrap();
            let entropic = AccessLabel::from_mutual_information(info, code.k(), 1e-6);
            ensure(
                entropic == row.label,
                format!(
                    "{name} {}: algebraic {} but I(R:A) = {info}",
                    row.shares, row.label
                ),
            )?;
            rows += 1;
        }
    }
    Ok(format!("{rows} subsets agree"))
}

fn baseline_equivalence() -> Outcome {
    let code = load("xxxx_zzzz.code");
    let tables: Vec<_> = [ShareSet::empty(4), set(4, &[4])]
        .iter()
        .map(|j| {
            AdvanceScheme::new(code.clone(), j, BUDGET)
                .and_then(|s| s.access_table(true, DEFAULT_STATE_BUDGET))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (a, b) in tables[0].iter().zip(&tables[1]) {
        let (ia, ib) = (a.mutual_information.unwrap(), b.mutual_information.unwrap());
        ensure(
            a.shares == b.shares && a.label == b.label && (ia - ib).abs() <= 1e-9,
            format!("{}: {} ({ia}) vs {} ({ib})", a.shares, a.label, b.label),
        )?;
        ensure(
            classify_access(&code, &a.shares).unwrap() == a.label,
            "labels depend on the encoding",
        )?;
    }
    Ok(format!("{} subsets identical", tables[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 [[4,2,2]] parameters", xxxx_zzzz_parameters),
        ("2 [[4,2,2]] shortening", xxxx_zzzz_shortening),
        ("3 [[4,2,2]] dual minimum weight", xxxx_zzzz_dual_weight),
        ("4 [[4,2,2]] entanglement-assisted plan", xxxx_zzzz_plan),
        ("5 [[4,2,2]] end to end", xxxx_zzzz_end_to_end),
        ("6 exact test equivalence sweep", exact_test_sweep),
        ("7 sufficient test soundness sweep", sufficient_test_sweep),
        ("8 conjugation contract", conjugation_contract),
        (
            "9 access structure cross-validation",
            access_cross_validation,
        ),
        ("10 baseline equivalence", baseline_equivalence),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}

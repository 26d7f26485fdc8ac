//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL` line to standard error, bypassing output capture.

use std::io::Write;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use mallows::stats::TestReport;
use mallows::verify::{
    ghp_suite, imt_suite, local_suite, oracle_suite, phi_suite, records_suite, rooted_suite,
    ssc_suite, structural_suite, GhpParams, ImtParams, LocalParams, OracleParams, PhiParams,
    RecordsParams, RootedParams, SscParams,
};

// Runtime limits are wall-clock, so criteria run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

const SEED: u64 = 20_240_601;

fn report_line(n: u32, title: &str, pass: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "criterion {n:>2}: {} {title} [{:.1} s] {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn summary(reports: &[TestReport]) -> String {
    reports
        .iter()
        .map(|r| {
            format!(
                "{}{}={:.4}/{:.4}{}",
                r.name,
                r.params
                    .iter()
                    .filter(|(k, _)| ["n", "q", "k", "radius"].contains(&k.as_str()))
                    .map(|(k, v)| format!("[{k}={v}]"))
                    .collect::<String>(),
                r.statistic,
                r.threshold,
                if r.pass { "" } else { "!" }
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn check(n: u32, title: &str, limit: Duration, run: impl FnOnce() -> Vec<TestReport>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let reports = run();
    let elapsed = start.elapsed();
    let pass = !reports.is_empty() && reports.iter().all(|r| r.pass) && elapsed < limit;
    report_line(n, title, pass, elapsed, &summary(&reports));
    assert!(pass, "criterion {n} failed: {}", summary(&reports));
}

#[test]
fn criterion_01_oracle_equivalence() {
    check(1, "stream sampler matches enumeration", Duration::from_secs(30), || {
        let p = OracleParams {
            qs: vec![0.2, 0.5, 0.8],
            ns: vec![2, 3, 4, 5],
            trials: 200_000,
            alpha: Some(0.001),
        };
        oracle_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_02_spine_sizes() {
    check(2, "spine sizes of the two-sided limit", Duration::from_secs(120), || {
        let p = ImtParams {
            q: 0.5,
            radius: 2,
            trials: 100_000,
            alpha: Some(0.001),
        };
        imt_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_03_local_convergence() {
    check(3, "ball census of a large tree", Duration::from_secs(300), || {
        let p = LocalParams {
            qs: vec![0.3, 0.5, 0.8],
            radii: vec![1, 2],
            n: 100_000,
            trials: 100_000,
        };
        local_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_04_rooted_convergence() {
    check(4, "root ball law", Duration::from_secs(60), || {
        let p = RootedParams {
            q: 0.5,
            radius: 2,
            n: 10_000,
            trials: 10_000,
        };
        rooted_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_05_ghp_distortion() {
    check(5, "spine-order correspondence distortion", Duration::from_secs(180), || {
        let p = GhpParams {
            q: 0.5,
            n_small: 1_000,
            n_large: 100_000,
            trials: 20,
            ..GhpParams::default()
        };
        ghp_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_06_subtree_sizes() {
    check(6, "subtree-size ratios", Duration::from_secs(120), || {
        let p = SscParams {
            q: 0.5,
            depth: 3,
            n: 100_000,
            trials: 20,
            tolerance: 0.01,
            required: 19,
        };
        ssc_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_07_gap_invariance() {
    check(7, "gap rearrangement invariance and power", Duration::from_secs(120), || {
        let p = PhiParams {
            q: 0.5,
            ns: vec![1, 3, 10],
            window: 1,
            trials: 100_000,
            ..PhiParams::default()
        };
        phi_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_08_records_and_free_spaces() {
    check(8, "records growth, free-space decay, subtree bound", Duration::from_secs(60), || {
        let p = RecordsParams {
            qs: vec![0.3, 0.5, 0.8],
            n: 100_000,
            streams: 100,
            horizon: 1_000,
            record_tolerance: 0.01,
            free_space_tolerance: 0.005,
        };
        records_suite(&p, SEED).unwrap()
    });
}

#[test]
fn criterion_09_structural_invariants() {
    check(9, "exact structural invariants", Duration::from_secs(60), || {
        structural_suite(SEED).unwrap()
    });
}

#[test]
fn criterion_10_determinism() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_mallows"))
            .args(["verify", "all", "--seed", "7", "--threads", "1"])
            .env_remove("MALLOWS_SEED")
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let lines = a.stdout.iter().filter(|&&c| c == b'\n').count();
    let pass = !a.stdout.is_empty() && a.stdout == b.stdout && a.status.code() == b.status.code();
    report_line(
        10,
        "verify all twice gives identical bytes",
        pass,
        start.elapsed(),
        &format!("{lines} reports, {} bytes", a.stdout.len()),
    );
    assert!(pass, "report streams differ");
}

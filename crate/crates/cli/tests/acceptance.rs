//! Acceptance criteria. Prints one `criterion N: PASS|FAIL` line each and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

use qlink_core::monte_carlo::{memory_error_for_ratio, serial_penalty_ratio, DEFAULT_MEMORY_RATIO};
use qlink_core::{
    allowable_pt, builtin_codes, default_steane_encoder, p_block_error, serial_penalty_mc,
    simulate_block_transfer, steane_713_target, validate_encoder, CodeStack, LinkParams, McConfig,
    McSettings, ModelMode, QecCode,
};

type Outcome = Result<String, String>;

fn qlink(args: &[&str]) -> (String, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qlink"))
        .args(args)
        .output()
        .expect("qlink runs");
    let elapsed = start.elapsed();
    assert!(
        out.status.success(),
        "qlink {args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    (String::from_utf8(out.stdout).unwrap(), elapsed)
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

/// `x` to `sf` significant figures, as text.
fn round_sf(x: f64, sf: usize) -> String {
    format!("{:.*e}", sf - 1, x)
}

fn table_reproduction() -> Outcome {
    // (stack, t, printed value, printed significant figures)
    let printed: [(&str, f64, f64, usize); 21] = [
        ("none", 1e5, 1e-6, 1),
        ("none", 1e8, 1e-9, 1),
        ("none", 1e11, 1e-12, 1),
        ("7-1-3", 1e5, 2.2e-4, 2),
        ("7-1-3", 1e8, 7e-6, 1),
        ("7-1-3", 1e11, 2.2e-7, 2),
        ("23-1-7", 1e5, 3.3e-3, 2),
        ("23-1-7", 1e8, 5.8e-4, 2),
        ("23-1-7", 1e11, 1e-4, 1),
        ("7-1-3+7-1-3", 1e5, 3.2e-3, 2),
        ("7-1-3+7-1-3", 1e8, 5.7e-4, 2),
        ("7-1-3+7-1-3", 1e11, 1e-4, 1),
        ("23-1-7+7-1-3", 1e5, 0.013, 2),
        ("23-1-7+7-1-3", 1e8, 5.3e-3, 2),
        ("23-1-7+7-1-3", 1e11, 2.2e-3, 2),
        ("7-1-3+23-1-7", 1e5, 0.013, 2),
        ("7-1-3+23-1-7", 1e8, 5.3e-3, 2),
        ("7-1-3+23-1-7", 1e11, 2.2e-3, 2),
        ("23-1-7+23-1-7", 1e5, 0.025, 2),
        ("23-1-7+23-1-7", 1e8, 0.016, 2),
        ("23-1-7+23-1-7", 1e11, 0.010, 2),
    ];
    let (out, elapsed) = qlink(&["table3"]);
    let rows = csv_rows(&out);
    if rows.len() != printed.len() {
        return Err(format!("{} rows, expected {}", rows.len(), printed.len()));
    }
    let mut mismatches = Vec::new();
    for (row, &(stack, t, value, sf)) in rows.iter().zip(&printed) {
        let (got_stack, got_t): (&str, f64) = (&row[0], row[2].parse().unwrap());
        if got_stack != stack || got_t != t {
            return Err(format!(
                "row order: got {got_stack} t={got_t}, expected {stack} t={t}"
            ));
        }
        let computed: f64 = row[4].parse().unwrap();
        if round_sf(computed, sf) != round_sf(value, sf) {
            mismatches.push(format!(
                "{stack} t={t:e}: {computed:.4e} vs printed {value}"
            ));
        }
    }
    within(elapsed, Duration::from_secs(1))?;
    if mismatches.is_empty() {
        Ok("21/21 entries match at printed precision".into())
    } else {
        Err(format!(
            "{}/21 entries match; {}",
            21 - mismatches.len(),
            mismatches.join("; ")
        ))
    }
}

fn cut_reproduction() -> Outcome {
    let (out, elapsed) = qlink(&["cut", "--circuit", "default"]);
    let rows = csv_rows(&out);
    let col = |i: usize| rows.iter().map(|r| r[i].to_string()).collect::<Vec<_>>();
    let telegate = col(1);
    let teledata = col(2);
    let directions = col(3);
    let want = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    if telegate != want(&["2", "3", "4", "3", "3", "2"])
        || teledata != want(&["1", "2", "3", "3", "2", "1"])
        || directions != want(&["B->A", "B->A", "B->A", "A->B", "A->B", "A->B"])
    {
        return Err(format!(
            "telegate {telegate:?} teledata {teledata:?} directions {directions:?}"
        ));
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("telegate {telegate:?}, teledata {teledata:?}"))
}

fn dqec_constants() -> Outcome {
    let (out, _) = qlink(&["dqec-cost", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let inm = &v["in_motion"];
    let d = v["static_cycle"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["breakpoint"] == "d")
        .expect("cut d");
    let got = (
        inm["telegate"]["per_syndrome"].as_u64(),
        inm["teledata"]["per_syndrome"].as_u64(),
        inm["telegate"]["per_cycle"].as_u64(),
        inm["teledata"]["per_cycle"].as_u64(),
        d["teledata"].as_u64(),
        inm["teledata"]["worst_case_block_teleports"].as_u64(),
    );
    if got == (Some(17), Some(12), Some(204), Some(144), Some(36), Some(36)) {
        Ok("per-syndrome 17/12, per-cycle 204/144, static at d 36, worst-case block 36".into())
    } else {
        Err(format!("got {got:?}"))
    }
}

fn serial_memory_penalty() -> Outcome {
    let p_t = 1e-3;
    let steane = QecCode::steane();
    let golay = QecCode::golay();
    let ratio = |code: &QecCode| {
        let p_m = memory_error_for_ratio(code, p_t, DEFAULT_MEMORY_RATIO);
        serial_penalty_ratio(code, p_t, p_m).unwrap()
    };
    let (r7, r23) = (ratio(&steane), ratio(&golay));

    // The CLI default memory error must give the same analytic ratio.
    let (out, _) = qlink(&[
        "recommend",
        "--stack",
        "7-1-3",
        "--pt",
        "1e-3",
        "--format",
        "json",
    ]);
    let cli: Value = serde_json::from_str(&out).unwrap();
    let cli_ratio = cli["reliability_ratio"].as_f64().unwrap();

    let p_m = memory_error_for_ratio(&steane, p_t, DEFAULT_MEMORY_RATIO);
    let settings = McSettings {
        trials: 10_000_000,
        seed: 2_718,
        workers: workers(),
    };
    let mc = serial_penalty_mc(&steane, p_t, p_m, settings).unwrap();
    let detail = format!(
        "analytic 7-1-3 {r7:.5}, 23-1-7 {r23:.5}; MC 7-1-3 ratio {:.4} CI [{:.4}, {:.4}] ({} / {} failures)",
        mc.ratio.unwrap_or(f64::NAN),
        mc.ci_low.unwrap_or(f64::NAN),
        mc.ci_high.unwrap_or(f64::NAN),
        mc.serial.failures,
        mc.parallel.failures,
    );
    let ok = (1.24..=1.26).contains(&r7)
        && (1.50..=1.56).contains(&r23)
        && (cli_ratio - r7).abs() <= 1e-12 * r7
        && mc.contains(r7);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn weight_histogram(n: u32) -> Vec<u64> {
    let mut counts = vec![0u64; n as usize + 1];
    for pattern in 0u64..(1 << n) {
        counts[pattern.count_ones() as usize] += 1;
    }
    counts
}

fn oracle_equivalence() -> Outcome {
    let z = 3.0;
    let codes: Vec<QecCode> = builtin_codes()
        .into_iter()
        .filter(|c| matches!(c.n(), 5 | 7 | 23))
        .collect();
    let mut worst_rel = 0.0f64;
    let mut misses = Vec::new();
    for (i, code) in codes.iter().enumerate() {
        let counts = weight_histogram(code.n());
        let n = code.n() as i32;
        for (j, p) in [0.003, 0.01, 0.03].into_iter().enumerate() {
            let exact = p_block_error(code.n(), code.min_fail(), p, ModelMode::ExactTail).unwrap();
            let brute: f64 = counts
                .iter()
                .enumerate()
                .skip(code.min_fail() as usize)
                .map(|(w, &c)| c as f64 * p.powi(w as i32) * (1.0 - p).powi(n - w as i32))
                .sum();
            worst_rel = worst_rel.max(((exact - brute) / brute).abs());

            let est = simulate_block_transfer(&McConfig {
                stack: CodeStack::single(code.clone()).unwrap(),
                link: LinkParams::parallel(p, 0.0),
                trials: 1_000_000,
                seed: 500 + (i * 10 + j) as u64,
                workers: workers(),
            })
            .unwrap();
            let (lo, hi) = est.interval(z);
            if !(lo <= exact && exact <= hi) {
                misses.push(format!("{code} p={p}: [{lo:.3e}, {hi:.3e}] vs {exact:.3e}"));
            }
        }
    }
    let detail = format!("9/9 grid points within 3 sigma; worst enumeration error {worst_rel:.1e}");
    if misses.is_empty() && worst_rel <= 1e-12 {
        Ok(detail)
    } else {
        Err(format!("{}; misses: {}", detail, misses.join("; ")))
    }
}

fn closed_form_coincidence() -> Outcome {
    let a: CodeStack = "23-1-7+7-1-3".parse().unwrap();
    let b: CodeStack = "7-1-3+23-1-7".parse().unwrap();
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for t in [1e5, 1e8, 1e11] {
        let pa = allowable_pt(&a, t, 0.1, ModelMode::LeadingOrder).unwrap();
        let pb = allowable_pt(&b, t, 0.1, ModelMode::LeadingOrder).unwrap();
        let rel = ((pa - pb) / pb).abs();
        worst = worst.max(rel);
        cells.push(format!("t={t:e}: {pa:.6e} vs {pb:.6e}"));
    }
    let detail = format!(
        "worst relative difference {worst:.3e} (tolerance 1e-12); {}",
        cells.join("; ")
    );
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn encoder_validity() -> Outcome {
    let start = Instant::now();
    let circuit = default_steane_encoder();
    let target = steane_713_target();
    let base = validate_encoder(&circuit, &target).unwrap();
    if !base.valid {
        return Err(format!("default encoder invalid: {base:?}"));
    }
    let survivors: Vec<usize> = (0..circuit.gates().len())
        .filter(|&i| {
            validate_encoder(&circuit.without_gate(i), &target)
                .unwrap()
                .valid
        })
        .collect();
    if !survivors.is_empty() {
        return Err(format!("deletions of gates {survivors:?} still validate"));
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "valid; all {} single-gate deletions rejected",
        circuit.gates().len()
    ))
}

fn determinism() -> Outcome {
    let base = [
        "mc", "--stack", "7-1-3", "--serial", "--pt", "1e-2", "--pm", "1e-3", "--trials", "1e6",
        "--seed", "31337", "--format", "json",
    ];
    let mut counts = Vec::new();
    for w in ["1", "2", "8"] {
        let mut args = base.to_vec();
        args.extend(["--workers", w]);
        let (out, _) = qlink(&args);
        let v: Value = serde_json::from_str(&out).unwrap();
        counts.push(v["failures"].as_u64().unwrap());
    }
    if counts.windows(2).all(|w| w[0] == w[1]) {
        Ok(format!("{} failures for workers 1, 2 and 8", counts[0]))
    } else {
        Err(format!("failure counts differ: {counts:?}"))
    }
}

fn headline_claim() -> Outcome {
    let (out, _) = qlink(&[
        "workload",
        "--bits",
        "1024",
        "--adder",
        "lookahead",
        "--format",
        "json",
    ]);
    let w: Value = serde_json::from_str(&out).unwrap();
    if w["t"].as_f64() != Some(6e10) {
        return Err(format!("1024-bit high anchor is {}, expected 6e10", w["t"]));
    }
    let (out, _) = qlink(&[
        "analyze",
        "--stack",
        "23-1-7+23-1-7",
        "--t",
        "6e10",
        "--target-pf",
        "0.1",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let p = v["allowable_pt"].as_f64().unwrap();
    let detail = format!("allowable p_t = {p:.6e} at t = 6e10");
    if p >= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, table_reproduction),
        (2, cut_reproduction),
        (3, dqec_constants),
        (4, serial_memory_penalty),
        (5, oracle_equivalence),
        (6, closed_form_coincidence),
        (7, encoder_validity),
        (8, determinism),
        (9, headline_claim),
    ];
    let mut failed = Vec::new();
    for (n, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({secs:.2} s) {detail}"),
            Err(detail) => {
                println!("criterion {n}: FAIL ({secs:.2} s) {detail}");
                failed.push(n);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!(
            "acceptance: {} of 9 criteria fail: {failed:?}",
            failed.len()
        );
        std::process::exit(1);
    }
}

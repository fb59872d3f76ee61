//! Acceptance run: one PASS/FAIL line per criterion, then a nonzero exit if any failed.

use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use tsirelson::families::{max_weight_subfamily, FamilySpec};
use tsirelson::norm::{brute_force_norm_oracle, norm, norm_value, NormOptions};
use tsirelson::parameters::SpaceSpec;
use tsirelson::rational::q;
use tsirelson::vectors::{check_basic_scc, repeated_average, FinVector, IncreasingSeq};
use tsirelson::verify::{run_suite, Summary, DEFAULT_SEED};
use tsirelson::Q;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn suite(name: &str) -> Result<(Summary, Duration), String> {
    let t = Instant::now();
    let s = run_suite(name, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    if !s.passed {
        return Err(format!("{name}: {:?} failures {:?}", s.counts, s.failures));
    }
    Ok((s, elapsed))
}

fn count(s: &Summary, key: &str) -> u64 {
    s.counts.get(key).copied().unwrap_or(0)
}

fn describe(s: &Summary, d: Duration) -> String {
    let parts: Vec<String> = s.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{} in {:.2?}", parts.join(" "), d)
}

fn c1_schreier() -> Outcome {
    let (s, d) = suite("schreier-eq")?;
    ensure(count(&s, "checked") == 2 * 4096, "not every subset of {1..12} was checked for both n")?;
    ensure(count(&s, "mismatches") == 0, "mismatch")?;
    ensure(d < Duration::from_secs(60), "slower than 60 s")?;
    Ok(describe(&s, d))
}

fn c2_tsirelson_toy() -> Outcome {
    let spec = SpaceSpec::tsirelson_toy();
    let mut seen = Vec::new();
    for k in 2..=5u64 {
        let x = FinVector::indicator(k..2 * k);
        let expected = q(k as i64, 2);
        let r = norm(&x, &spec, &NormOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.value == expected, format!("k = {k}: dp gave {}", r.value))?;
        let o = brute_force_norm_oracle(&x, &spec, 3).map_err(|e| e.to_string())?;
        ensure(o == expected, format!("k = {k}: oracle gave {o}"))?;
        seen.push(format!("{k}:{expected}"));
    }
    Ok(format!("norms {}", seen.join(" ")))
}

/// Norm of the indicator of any `n` points in `T[(A_3, 1/2)]`, by recursion on
/// the lengths of at most three successive pieces.
fn a3_indicator_norms(max: usize) -> Vec<Q> {
    let half = q(1, 2);
    let mut g = vec![Q::zero(); max + 1];
    for n in 1..=max {
        let mut best = Q::one();
        for a in 0..=n {
            for b in 0..=n - a {
                let v = &half * (&g[a] + &g[b] + &g[n - a - b]);
                if v > best {
                    best = v;
                }
            }
        }
        g[n] = best;
    }
    g
}

fn c3_a3_toy() -> Outcome {
    let spec = SpaceSpec::a3_toy();
    let local = a3_indicator_norms(9);
    for k in 1..=2u32 {
        let n = 3u64.pow(k);
        let x = FinVector::indicator(1..=n);
        let expected = q(3i64.pow(k), 2i64.pow(k));
        let dp = norm_value(&x, &spec).map_err(|e| e.to_string())?;
        ensure(dp == expected, format!("k = {k}: dp gave {dp}"))?;
        ensure(local[n as usize] == expected, format!("k = {k}: recursion gave {}", local[n as usize]))?;
        if k == 1 {
            let o = brute_force_norm_oracle(&x, &spec, 3).map_err(|e| e.to_string())?;
            ensure(o == expected, format!("oracle gave {o}"))?;
        }
    }
    Ok("3/2 and 9/4 from the dp, the length recursion and (k = 1) the oracle".into())
}

fn c4_oracle() -> Outcome {
    let (s, d) = suite("oracle-eq")?;
    ensure(count(&s, "samples") >= 500, "fewer than 500 samples")?;
    ensure(count(&s, "mismatches") == 0, "mismatch")?;
    Ok(describe(&s, d))
}

fn c5_axioms() -> Outcome {
    let (s, d) = suite("norm-axioms")?;
    ensure(count(&s, "samples") >= 1000, "fewer than 1000 samples")?;
    ensure(count(&s, "violations") == 0, "violation")?;
    Ok(describe(&s, d))
}

fn c6_segmentations() -> Outcome {
    let (s, d) = suite("norm-axioms")?;
    ensure(count(&s, "segmentations") >= 200, "fewer than 200 segmentations")?;
    Ok(describe(&s, d))
}

fn c7_scc() -> Outcome {
    let (s, d) = suite("scc")?;
    ensure(count(&s, "mismatches") == 0 && count(&s, "violations") == 0, "scc suite reported problems")?;
    let x = repeated_average(&IncreasingSeq::from(4), 2).map_err(|e| e.to_string())?;
    let c = check_basic_scc(&x, 2, &q(1, 3)).map_err(|e| e.to_string())?;
    ensure(c.passed, "the n = 2 average failed its check")?;
    ensure(c.certificate.smallness == q(1, 4), format!("smallness {}", c.certificate.smallness))?;
    let weights = x.coefficients();
    let exhaustive = max_weight_subfamily(&x.support(), &weights, &FamilySpec::s(1)).map_err(|e| e.to_string())?;
    ensure(exhaustive == q(1, 4), format!("max_weight_subfamily gave {exhaustive}"))?;
    for (lo, hi, w) in [(4, 7, 16), (8, 15, 32), (16, 31, 64), (32, 63, 128)] {
        ensure((lo..=hi).all(|i| x.get(i) == q(1, w)), format!("weights on [{lo},{hi}] differ from 1/{w}"))?;
    }
    ensure(x.len() == 60, "support of the n = 2 average is not {4..63}")?;
    Ok(format!("{}; n = 2 smallness 1/4", describe(&s, d)))
}

fn c8_sigma() -> Outcome {
    let (s, d) = suite("sigma")?;
    ensure(count(&s, "sequences") >= 10_000, "fewer than 10^4 sequences")?;
    Ok(describe(&s, d))
}

fn c9_dependent() -> Outcome {
    let (s, d) = suite("dependent")?;
    ensure(count(&s, "mutations") == 5 && count(&s, "misattributed") == 0, "mutation attribution")?;
    Ok(describe(&s, d))
}

fn c10_admi() -> Outcome {
    let (s, d) = suite("admi")?;
    ensure(count(&s, "violations") == 0, "violation")?;
    Ok(describe(&s, d))
}

fn c11_w4() -> Outcome {
    let (s, d) = suite("w4")?;
    ensure(count(&s, "pairs") >= 100 && count(&s, "revalidated") >= 100, "too few pairs")?;
    ensure(count(&s, "invalid") > 0 && count(&s, "accepted-invalid") == 0, "invalid F not rejected")?;
    Ok(describe(&s, d))
}

fn c12_tight() -> Outcome {
    let (s, d) = suite("tight")?;
    ensure(count(&s, "instances") >= 20 && count(&s, "not-one") == 0, "x*(x) differs from 1")?;
    Ok(describe(&s, d))
}

fn cli(args: &[&str], stdin: &str) -> Result<(i32, Vec<u8>), String> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tsirelson"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn units(idx: impl Iterator<Item = u64>) -> String {
    let v: Vec<String> = idx.map(|i| format!("{{\"coords\":{{\"{i}\":\"1\"}}}}")).collect();
    format!("[{}]", v.join(","))
}

fn c13_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let table = dir.path().join("sigma.json");
    let (code, seeded) = cli(&["sigma"], r#"{"sequences":[[[3,3],[6,6]],[[1,2]]]}"#)?;
    ensure(code == 0, "sigma failed")?;
    let v: serde_json::Value = serde_json::from_slice(&seeded).map_err(|e| e.to_string())?;
    std::fs::write(&table, v["table"].to_string()).map_err(|e| e.to_string())?;
    let table = table.to_str().unwrap();
    let pair = format!(
        r#"{{"blocksY":{},"blocksZ":{},"j":0}}"#,
        units((1..=8).map(|k| 3 * k)),
        units((1..=8).map(|k| 3 * k + 1))
    );
    let witness = format!(r#"{{"blocks":{},"j":0}}"#, units(3..=12));
    let cases: Vec<(Vec<&str>, String)> = vec![
        (vec!["norm"], r#"{"x":{"coords":{"4":"1","5":"-2/3","6":"1/2","9":"3"}}}"#.into()),
        (vec!["build-pair", "--sigma-table", table], pair.clone()),
        (vec!["build-pair"], pair),
        (vec!["build-witness", "--sigma-table", table], witness),
        (vec!["sigma", "--sigma-table", table], r#"{"sequences":[[[2,5],[7,9]]]}"#.into()),
        (vec!["verify", "dependent"], String::new()),
    ];
    for (args, input) in &cases {
        let first = cli(args, input)?;
        for _ in 0..2 {
            let again = cli(args, input)?;
            ensure(again == first, format!("{args:?}: outputs differ between runs"))?;
        }
        ensure(first.0 == 0, format!("{args:?}: exit code {}", first.0))?;
    }
    Ok(format!("{} commands, 3 runs each, byte-identical", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("schreier equality S_n = S_n^M", c1_schreier),
        ("tsirelson toy norms |F|/2", c2_tsirelson_toy),
        ("A_3 toy norms (3/2)^k", c3_a3_toy),
        ("dp and oracle agree", c4_oracle),
        ("norm axioms", c5_axioms),
        ("admissible segmentation inequality", c6_segmentations),
        ("scc suite", c7_scc),
        ("coding function suite", c8_sigma),
        ("dependent sequence suite", c9_dependent),
        ("admi bound", c10_admi),
        ("W_4 and G-operation", c11_w4),
        ("tightness witness x*(x) = 1", c12_tight),
        ("CLI determinism", c13_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

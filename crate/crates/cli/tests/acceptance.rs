//! Acceptance criteria for the primary component. Prints one line per
//! criterion and exits non-zero if any fails.

#[path = "../../core/tests/common/fuzz.rs"]
mod fuzz;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use fecraft_core::engine::{run_session, BenchReport, Decision, IterationRecord, NoHooks, Session, SessionConfig};
use fecraft_core::fedsl::{evaluate, parse, reference_evaluate, validate};
use fecraft_core::llm::ScriptedBackend;
use fecraft_core::models::logistic::{gradient, loss};
use fecraft_core::models::roc_auc;
use fecraft_core::prompt::{build_prompt, PromptContext, ERROR_FEEDBACK_PREFIX};
use fecraft_core::tabular::{
    gen_tictactoe, summarize, write_csv, CellRef, Column, Table, SQUARE_NAMES, TICTACTOE_DESCRIPTION,
};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const TTT_MIN_GAIN_ITER1: f64 = 0.05;
const TTT_MIN_AUC_ITER2: f64 = 0.95;
const TTT_MAX_SECS: u64 = 60;
const RECOVERY_MAX_SECS: u64 = 10;
const PRODUCT_MIN_SCORE: f64 = 0.05;
const NOISE_MIN_REJECTED: usize = 9;
const NOISE_SEEDS: u64 = 10;
const RULE_MAX_SECS: u64 = 60;
const AUC_INSTANCES: usize = 200;
const AUC_TOL: f64 = 1e-9;
const FUZZ_PAIRS: u64 = 1000;
const GRAD_INSTANCES: usize = 50;
const GRAD_H: f64 = 1e-5;
const GRAD_MAX_REL: f64 = 1e-4;
/// Denominator floor of the relative gradient error, for entries near zero.
const GRAD_REL_FLOOR: f64 = 1e-6;
const EVAL_REPETITIONS: usize = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Hash-before/after pairs of every rejected or errored iteration, with the
/// criterion they came from.
type Rollbacks = Vec<(String, usize, String, String)>;

fn note_rollbacks(src: &str, s: &Session, out: &mut Rollbacks) {
    for r in &s.iterations {
        if r.decision != Decision::Accepted {
            out.push((src.to_string(), r.index, r.table_hash_before.clone(), r.table_hash_after.clone()));
        }
    }
}

fn block(body: &str) -> String {
    format!("Reasoning omitted.\n```fedsl\n{body}\n```end\n")
}

const LINES: [[usize; 3]; 8] = [[0, 1, 2], [3, 4, 5], [6, 7, 8], [0, 3, 6], [1, 4, 7], [2, 5, 8], [0, 4, 8], [2, 4, 6]];

fn wins_script(name: &str, mark: &str, squares: &[String]) -> String {
    wins_script_with(name, mark, squares, &format!("Number of completed lines for {mark}."))
}

fn wins_script_with(name: &str, mark: &str, squares: &[String], usefulness: &str) -> String {
    let terms: Vec<String> = LINES
        .iter()
        .map(|l| {
            let eqs: Vec<String> = l.iter().map(|&i| format!("col(\"{}\") == \"{mark}\"", squares[i])).collect();
            format!("as_number({})", eqs.join(" and "))
        })
        .collect();
    block(&format!("feature \"{name}\" {{\n    usefulness: \"{usefulness}\"\n    expr: {}\n}}", terms.join(" + ")))
}

fn square_names() -> Vec<String> {
    SQUARE_NAMES.iter().map(|s| s.to_string()).collect()
}

fn ttt_subsample(seed: u64) -> Table {
    let full = gen_tictactoe();
    let mut idx: Vec<usize> = (0..full.row_count()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(full.row_count() / 10);
    idx.sort_unstable();
    full.take(&idx)
}

fn criterion_1(rb: &mut Rollbacks) -> Outcome {
    let start = Instant::now();
    let seed = 0;
    let table = ttt_subsample(seed);
    let sq = square_names();
    let backend = ScriptedBackend::new(vec![
        wins_script("number-of-x-wins", "x", &sq),
        wins_script("number-of-o-wins", "o", &sq),
    ]);
    let mut config = SessionConfig::new("Class", TICTACTOE_DESCRIPTION, seed);
    config.iterations = 2;
    let s = match run_session(config, table, &backend, &NoHooks) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("session failed: {e}")),
    };
    note_rollbacks("1", &s, rb);
    let secs = start.elapsed();
    let base = s.baseline.mean.roc_auc;
    let it = &s.iterations;
    let after1 = it[0].outcome.as_ref().map_or(f64::NAN, |o| o.mean_after.roc_auc);
    let after2 = s.report(true).current.roc_auc;
    let decisions: Vec<Decision> = it.iter().map(|r| r.decision).collect();
    let scores: Vec<String> =
        it.iter().map(|r| r.outcome.as_ref().map_or("-".into(), |o| format!("{:.4}", o.decision_score))).collect();
    let pass = decisions == [Decision::Accepted, Decision::Accepted]
        && after1 - base >= TTT_MIN_GAIN_ITER1
        && after2 >= TTT_MIN_AUC_ITER2
        && secs < Duration::from_secs(TTT_MAX_SECS);
    outcome(
        pass,
        format!(
            "rows {}, baseline AUC {base:.4}, after iter 1 {after1:.4} (gain {:.4}, need >= {TTT_MIN_GAIN_ITER1}), \
             after iter 2 {after2:.4} (need >= {TTT_MIN_AUC_ITER2}), decisions {decisions:?}, scores {scores:?}, {:.1}s",
            s.baseline.row_count,
            after1 - base,
            secs.as_secs_f64()
        ),
    )
}

fn recovery_table() -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 300;
    let mut age = vec![];
    let mut fare = vec![];
    let mut y = vec![];
    for _ in 0..n {
        let a: f64 = rng.random_range(1.0..80.0);
        let f: f64 = rng.random_range(5.0..120.0);
        let survived = (a < 16.0) || rng.random_bool(0.3);
        age.push(if rng.random_bool(0.2) { None } else { Some((a * 2.0).round() / 2.0) });
        fare.push(Some((f * 100.0).round() / 100.0));
        y.push(Some(if survived { "yes" } else { "no" }));
    }
    Table::new(
        vec![Column::number("Age", age), Column::number("Fare", fare), Column::category("Survived", &y)],
        "Survived",
    )
    .unwrap()
}

fn criterion_2(rb: &mut Rollbacks) -> Outcome {
    let start = Instant::now();
    let strict =
        block("feature \"age_years\" {\n    usefulness: \"Whole years of age.\"\n    expr: as_int(col(\"Age\"))\n}");
    let fixed = block(
        "feature \"age_years\" {\n    usefulness: \"Whole years of age; unknown ages set to -1.\"\n    expr: as_int(fill_missing(col(\"Age\"), -1))\n}",
    );
    let backend = ScriptedBackend::new(vec![strict, fixed]);
    let mut config = SessionConfig::new("Survived", "Passengers of a ship; whether they survived.", 3);
    config.iterations = 2;
    let s = match run_session(config, recovery_table(), &backend, &NoHooks) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("session failed: {e}")),
    };
    note_rollbacks("2", &s, rb);
    let secs = start.elapsed();
    let first = &s.iterations[0];
    let second = &s.iterations[1];
    let Some(err) = &first.error else {
        return outcome(false, format!("iteration 1 did not fail: {:?}", first.decision));
    };
    let expected_line = format!("{ERROR_FEEDBACK_PREFIX}{}", err.message);
    let pass = first.decision == Decision::Error
        && err.message.contains("cannot convert missing value to integer")
        && second.prompt.contains(&expected_line)
        && second.outcome.is_some()
        && matches!(second.decision, Decision::Accepted | Decision::Rejected)
        && secs < Duration::from_secs(RECOVERY_MAX_SECS);
    outcome(
        pass,
        format!(
            "iter 1 error \"{}\"; found verbatim in iter 2 prompt: {}; iter 2 decision {:?}; {:.1}s",
            err.message,
            second.prompt.contains(&expected_line),
            second.decision,
            secs.as_secs_f64()
        ),
    )
}

fn xor_table(seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 400;
    let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<Option<&str>> = (0..n)
        .map(|i| {
            let s = x1[i] * x2[i] > 0.0;
            let s = if rng.random_bool(0.1) { !s } else { s };
            Some(if s { "pos" } else { "neg" })
        })
        .collect();
    Table::new(
        vec![
            Column::number("x1", x1.into_iter().map(Some).collect()),
            Column::number("x2", x2.into_iter().map(Some).collect()),
            Column::category("y", &y),
        ],
        "y",
    )
    .unwrap()
}

fn criterion_3(rb: &mut Rollbacks) -> Outcome {
    let start = Instant::now();
    let product = block("feature \"x1_times_x2\" {\n    usefulness: \"Sign agreement of x1 and x2.\"\n    expr: col(\"x1\") * col(\"x2\")\n}");
    // Fractional part of a large linear mix: uniform on [0, 1) and unrelated to the label.
    let noise = block(
        "feature \"noise\" {\n    usefulness: \"Control feature.\"\n    \
         expr: abs(col(\"x1\") * 9973 + col(\"x2\") * 7919 - as_int(col(\"x1\") * 9973 + col(\"x2\") * 7919))\n}",
    );
    let mut product_ok = 0;
    let mut noise_rejected = 0;
    let mut min_product = f64::INFINITY;
    let mut noise_scores = vec![];
    for seed in 0..NOISE_SEEDS {
        let backend = ScriptedBackend::new(vec![product.clone(), noise.clone()]);
        let mut config = SessionConfig::new("y", "Two measurements and a label.", seed);
        config.iterations = 2;
        let s = match run_session(config, xor_table(seed), &backend, &NoHooks) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("seed {seed}: session failed: {e}")),
        };
        note_rollbacks("3", &s, rb);
        let p = s.iterations[0].outcome.as_ref().map_or(f64::NAN, |o| o.decision_score);
        let q = s.iterations[1].outcome.as_ref().map_or(f64::NAN, |o| o.decision_score);
        min_product = min_product.min(p);
        if p > PRODUCT_MIN_SCORE && s.iterations[0].decision == Decision::Accepted {
            product_ok += 1;
        }
        if q <= 0.0 && s.iterations[1].decision == Decision::Rejected {
            noise_rejected += 1;
        }
        noise_scores.push(format!("{q:.4}"));
    }
    let secs = start.elapsed();
    let pass = product_ok == NOISE_SEEDS as usize
        && noise_rejected >= NOISE_MIN_REJECTED
        && secs < Duration::from_secs(RULE_MAX_SECS);
    outcome(
        pass,
        format!(
            "product accepted with score > {PRODUCT_MIN_SCORE} in {product_ok}/{NOISE_SEEDS} (min {min_product:.4}); \
             noise rejected with score <= 0 in {noise_rejected}/{NOISE_SEEDS} (need >= {NOISE_MIN_REJECTED}), \
             noise scores {noise_scores:?}; {:.1}s",
            secs.as_secs_f64()
        ),
    )
}

/// Pair-counting AUC of `pos` over `neg`: wins plus half ties over all pairs.
fn pair_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in pos {
        for &n in neg {
            s += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

fn oracle_auc(scores: &Array2<f64>, labels: &[usize]) -> f64 {
    let k = scores.ncols();
    let scored = |class: usize, col: usize| -> Vec<f64> {
        (0..labels.len()).filter(|&i| labels[i] == class).map(|i| scores[[i, col]]).collect()
    };
    if k == 2 {
        return pair_auc(&scored(1, 1), &scored(0, 1));
    }
    let mut pairs = vec![];
    for i in 0..k {
        for j in i + 1..k {
            pairs.push((pair_auc(&scored(i, i), &scored(j, i)) + pair_auc(&scored(j, j), &scored(i, j))) / 2.0);
        }
    }
    pairs.iter().sum::<f64>() / pairs.len() as f64
}

fn criterion_4() -> Outcome {
    let worked = roc_auc(
        &Array2::from_shape_vec((4, 2), vec![0.9, 0.1, 0.6, 0.4, 0.65, 0.35, 0.2, 0.8]).unwrap(),
        &[0, 0, 1, 1],
    );
    let worked_ok = worked.as_ref().is_ok_and(|v| *v == 0.75);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < AUC_INSTANCES {
        let k = if done % 2 == 0 { 2 } else { 3 };
        let n = rng.random_range(6..60);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        if (0..k).any(|c| !labels.contains(&c)) {
            continue;
        }
        // Coarse grid so that ties are common.
        let scores = Array2::from_shape_fn((n, k), |_| (rng.random_range(0..12) as f64) / 11.0);
        match roc_auc(&scores, &labels) {
            Ok(v) => worst = worst.max((v - oracle_auc(&scores, &labels)).abs()),
            Err(e) => return outcome(false, format!("roc_auc failed: {e}")),
        }
        done += 1;
    }
    outcome(
        worked_ok && worst <= AUC_TOL,
        format!("worked example {worked:?} (want 0.75); max |roc_auc - oracle| over {AUC_INSTANCES} instances {worst:.2e} (tol {AUC_TOL:e})"),
    )
}

fn criterion_5() -> Outcome {
    let mut ok_tables = 0;
    let mut errors = 0;
    for seed in 0..FUZZ_PAIRS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..80);
        let table = fuzz::sample_table(&mut rng, n);
        let as_int_weight = if seed % 3 == 0 { 6 } else { 0 };
        let src = fuzz::random_script(&mut rng, as_int_weight);
        let script = match parse(&src) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("generator produced unparsable script {src}: {e}")),
        };
        let typed = match validate(&script, &table.schema(), table.target()) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("generator produced invalid script {src}: {e}")),
        };
        match (evaluate(&typed, &table), reference_evaluate(&script, &table)) {
            (Ok(a), Ok(b)) if a == b => ok_tables += 1,
            (Err(a), Err(b)) if a == b => errors += 1,
            (a, b) => {
                return outcome(false, format!("seed {seed} disagrees on\n{src}\nvectorized: {a:?}\nreference: {b:?}"))
            }
        }
    }
    outcome(true, format!("{FUZZ_PAIRS} pairs identical ({ok_tables} tables, {errors} matching errors)"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..GRAD_INSTANCES {
        let n = rng.random_range(3..25);
        let d = rng.random_range(1..6);
        let k = rng.random_range(2..5);
        let l2 = [0.0, 1e-3, 0.1][rng.random_range(0..3)];
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let w = Array2::from_shape_fn((d, k), |_| rng.random_range(-1.0..1.0));
        let b = Array1::from_shape_fn(k, |_| rng.random_range(-1.0..1.0));
        let (gw, gb) = gradient(x.view(), &y, &w, &b, l2);
        let rel = |g: f64, fd: f64| (g - fd).abs() / g.abs().max(fd.abs()).max(GRAD_REL_FLOOR);
        for i in 0..d {
            for c in 0..k {
                let (mut wp, mut wm) = (w.clone(), w.clone());
                wp[[i, c]] += GRAD_H;
                wm[[i, c]] -= GRAD_H;
                let fd = (loss(x.view(), &y, &wp, &b, l2) - loss(x.view(), &y, &wm, &b, l2)) / (2.0 * GRAD_H);
                worst = worst.max(rel(gw[[i, c]], fd));
            }
        }
        for c in 0..k {
            let (mut bp, mut bm) = (b.clone(), b.clone());
            bp[c] += GRAD_H;
            bm[c] -= GRAD_H;
            let fd = (loss(x.view(), &y, &w, &bp, l2) - loss(x.view(), &y, &w, &bm, l2)) / (2.0 * GRAD_H);
            worst = worst.max(rel(gb[c], fd));
        }
    }
    outcome(
        worst < GRAD_MAX_REL,
        format!(
            "max relative error {worst:.2e} over {GRAD_INSTANCES} instances (limit {GRAD_MAX_REL:e}, h {GRAD_H:e})"
        ),
    )
}

fn cli(args: &[&str]) -> i32 {
    let mut v = vec!["fecraft"];
    v.extend_from_slice(args);
    fecraft::run(v)
}

/// JSON files with wall-clock fields removed; other files byte for byte.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("wall_time_secs");
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut out = vec![];
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let rel = p.strip_prefix(dir).unwrap().display().to_string();
            let bytes = std::fs::read(&p).unwrap();
            let bytes = if rel.ends_with(".json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                strip(&mut v);
                serde_json::to_vec(&v).unwrap()
            } else {
                bytes
            };
            out.push((rel, bytes));
        }
    }
    out.sort();
    out
}

fn write_playbook(path: &Path, responses: &[String]) {
    std::fs::write(path, serde_json::to_string(responses).unwrap()).unwrap();
}

fn criterion_7(work: &Path) -> Outcome {
    let data = work.join("ttt.csv");
    write_csv(&ttt_subsample(7), &data).unwrap();
    let sq = square_names();
    let playbook = work.join("replay.json");
    write_playbook(
        &playbook,
        &[
            wins_script("number-of-x-wins", "x", &sq),
            "I am not sure what to add here.".to_string(),
            wins_script("number-of-o-wins", "o", &sq),
        ],
    );
    let desc = work.join("desc.txt");
    std::fs::write(&desc, TICTACTOE_DESCRIPTION).unwrap();
    let mut snaps = vec![];
    for run in ["replay_a", "replay_b"] {
        let out = work.join(run);
        let code = cli(&[
            "run",
            "--data",
            data.to_str().unwrap(),
            "--target",
            "Class",
            "--description",
            desc.to_str().unwrap(),
            "--llm",
            "scripted",
            "--playbook",
            playbook.to_str().unwrap(),
            "--iterations",
            "3",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return outcome(false, format!("run exited with {code}"));
        }
        snaps.push(snapshot(&out));
    }
    let files = snaps[0].len();
    let same = snaps[0] == snaps[1];
    outcome(same && files > 0, format!("{files} files compared, identical: {same}"))
}

fn criterion_8(rb: &Rollbacks) -> Outcome {
    let bad: Vec<String> =
        rb.iter().filter(|(_, _, b, a)| b != a).map(|(c, i, _, _)| format!("criterion {c} iteration {i}")).collect();
    outcome(
        bad.is_empty() && !rb.is_empty(),
        format!("{} rejected or errored iterations checked; hash changed in {bad:?}", rb.len()),
    )
}

fn words(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| w.len() >= 3).map(str::to_string).collect()
}

fn cell_values(t: &Table) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in t.columns() {
        for r in 0..t.row_count() {
            match c.cell(r) {
                CellRef::Category(s) | CellRef::Text(s) => {
                    out.insert(s.to_lowercase());
                }
                _ => {}
            }
        }
    }
    out
}

/// Words that a blinded prompt contains for any table.
fn template_vocabulary() -> String {
    let t = Table::new(
        vec![Column::number("q", vec![Some(1.0), Some(2.0)]), Column::category("z", &[Some("u"), Some("v")])],
        "z",
    )
    .unwrap();
    let ctx = PromptContext {
        description: String::new(),
        column_summaries: summarize(&t, 2, 0),
        train_row_count: 2,
        target_name: "z".into(),
        accepted_scripts: vec![],
        feedback: None,
        blinded: true,
    };
    build_prompt(&ctx).to_lowercase()
}

fn criterion_9(work: &Path) -> Outcome {
    let table = gen_tictactoe();
    let data = work.join("blind.csv");
    write_csv(&table, &data).unwrap();
    let desc = work.join("blind_desc.txt");
    std::fs::write(&desc, TICTACTOE_DESCRIPTION).unwrap();
    let blinded: Vec<String> = (0..9).map(|i| format!("c{i}")).collect();
    let playbook = work.join("blind.json");
    // A blinded model never sees the description, so its replies use their own words.
    let reply =
        |name: &str, mark: &str| wins_script_with(name, mark, &blinded, &format!("Count of triples equal to {mark}."));
    write_playbook(&playbook, &[reply("f1", "x"), "nothing".into(), reply("f2", "o")]);
    let out = work.join("blind_session");
    let code = cli(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "Class",
        "--description",
        desc.to_str().unwrap(),
        "--llm",
        "scripted",
        "--playbook",
        playbook.to_str().unwrap(),
        "--iterations",
        "3",
        "--blind",
        "--out",
        out.to_str().unwrap(),
    ]);
    if code != 0 {
        return outcome(false, format!("run exited with {code}"));
    }
    let template = template_vocabulary();
    let values = cell_values(&table);
    let tokens: Vec<String> = words(TICTACTOE_DESCRIPTION)
        .into_iter()
        .filter(|w| !template.contains(&w.to_lowercase()) && !values.contains(&w.to_lowercase()))
        .collect();
    let mut needles: Vec<String> = table.columns().iter().map(|c| c.name().to_string()).collect();
    needles.extend(tokens.iter().cloned());
    let mut leaks = vec![];
    let mut scanned = 0;
    let mut prompts = 0;
    for (file, bytes) in snapshot(&out) {
        let text = String::from_utf8_lossy(&bytes);
        scanned += 1;
        if file.starts_with("iterations") {
            let rec: IterationRecord = serde_json::from_slice(&std::fs::read(out.join(&file)).unwrap()).unwrap();
            prompts += usize::from(!rec.prompt.is_empty());
        }
        for n in &needles {
            if text.contains(n.as_str()) {
                leaks.push(format!("{n} in {file}"));
            }
        }
    }
    outcome(
        leaks.is_empty() && prompts == 3,
        format!(
            "{scanned} files ({prompts} prompts) scanned for {} column names and {} description tokens; leaks {leaks:?}",
            table.columns().len(),
            tokens.len()
        ),
    )
}

fn criterion_10(work: &Path) -> Outcome {
    let data = work.join("eval.csv");
    write_csv(&ttt_subsample(10), &data).unwrap();
    let script = work.join("identity.fedsl");
    std::fs::write(&script, "").unwrap();
    let out = work.join("eval_out");
    let reps = EVAL_REPETITIONS.to_string();
    let code = cli(&[
        "eval",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "Class",
        "--script",
        script.to_str().unwrap(),
        "--repetitions",
        &reps,
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    if code != 0 {
        return outcome(false, format!("eval exited with {code}"));
    }
    let report: BenchReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let distinct: BTreeSet<u64> = report.seeds.iter().copied().collect();
    let identical = report.rows.iter().all(|r| r.mean_with == r.mean_without && r.delta == 0.0 && r.with == r.without);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    outcome(
        identical && report.repetitions == EVAL_REPETITIONS && distinct.len() == EVAL_REPETITIONS && csv.contains('±'),
        format!(
            "{} rows, with == without: {identical}; seeds {:?} ({} distinct)",
            report.rows.len(),
            report.seeds,
            distinct.len()
        ),
    )
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let mut rb = Rollbacks::new();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "tic-tac-toe reproduction", criterion_1(&mut rb)),
        (2, "error recovery", criterion_2(&mut rb)),
        (3, "accept/reject rule", criterion_3(&mut rb)),
        (4, "roc_auc vs pair-counting oracle", criterion_4()),
        (5, "vectorized vs reference interpreter", criterion_5()),
        (6, "logistic gradient check", criterion_6()),
        (7, "replay determinism", criterion_7(work.path())),
        (8, "rollback safety", criterion_8(&rb)),
        (9, "semantic blinding", criterion_9(work.path())),
        (10, "benchmark protocol echo", criterion_10(work.path())),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag} {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

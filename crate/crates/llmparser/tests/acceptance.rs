//! Acceptance suite: one line per criterion, each checked at its stated
//! tolerance and within its runtime budget.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use llmparser::dataset::{load_dataset, DatasetFormat};
use llmparser::inference::{parse_corpus, GenerationConfig, MockBackend, ParseOptions};
use llmparser::shots_file::write_shots;
use llmparser_core::evaluate::{build_report, group_accuracy, paired_t_test, parsing_accuracy};
use llmparser_core::prompt::{build_prompt, extract_template, render_completed_pair, RESPONSE_MARKER};
use llmparser_core::sampler::sample_shots_detailed;
use llmparser_core::{
    mask_numbers, Corpus, GenerationSettings, ParseEntry, ParseRun, PromptMode, PromptStyle, SamplerConfig, ShotSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_for(corpus: &Corpus, templates: Vec<String>) -> ParseRun {
    assert_eq!(templates.len(), corpus.len());
    ParseRun {
        entries: templates
            .into_iter()
            .enumerate()
            .map(|(i, t)| ParseEntry::succeeded(i, t, 0.0, 1))
            .collect(),
        settings: GenerationSettings::for_style(PromptStyle::T5),
        style: PromptStyle::T5,
        mode: PromptMode::FineTune,
        wall_clock_secs: 0.0,
    }
}

/// GA by direct comparison of index sets, O(n^2).
fn brute_force_ga(parsed: &[String], truth: &[String]) -> f64 {
    let n = parsed.len();
    let correct = (0..n)
        .filter(|&i| (0..n).all(|j| (parsed[j] == parsed[i]) == (truth[j] == truth[i])))
        .count();
    correct as f64 / n as f64
}

fn spark_example() -> Outcome {
    let (pairs, parsed) = common::spark_example();
    let corpus = Corpus::from_pairs("Spark", "spark-example", pairs).unwrap();
    let report = build_report(&run_for(&corpus, parsed), &corpus, None).map_err(|e| e.to_string())?;
    ensure((report.ga - 4.0 / 7.0).abs() <= 1e-12, || format!("GA {}", report.ga))?;
    ensure((report.pa - 3.0 / 7.0).abs() <= 1e-12, || format!("PA {}", report.pa))?;
    Ok(format!("GA {:.6} PA {:.6}", report.ga, report.pa))
}

fn perfect_parser() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = common::dataset_in(dir.path(), "Synthetic_2k.log_structured.csv", &common::synthetic_pairs(2000, 10, 77));
    let corpus = load_dataset(&path, DatasetFormat::StructuredCsv).map_err(|e| e.to_string())?;
    let mut config = GenerationConfig::for_style(PromptStyle::T5, "in-process");
    config.parallelism = 8;
    let backend = MockBackend::echo_truth(&corpus);
    let run = parse_corpus(&corpus, &ParseOptions::fine_tuned(PromptStyle::T5), &config, &backend)
        .map_err(|e| e.to_string())?;
    let report = build_report(&run, &corpus, None).map_err(|e| e.to_string())?;
    ensure(run.entries.len() == 2000, || format!("{} entries", run.entries.len()))?;
    ensure(report.ga == 1.0 && report.pa == 1.0, || format!("GA {} PA {}", report.ga, report.pa))?;
    Ok(format!("2000 logs, GA {} PA {}", report.ga, report.pa))
}

fn brute_force_ga_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let n = rng.random_range(1..=12);
        let labels = rng.random_range(1..=4);
        let parsed: Vec<String> = (0..n).map(|_| format!("P{}", rng.random_range(0..labels))).collect();
        let truth: Vec<String> = (0..n).map(|_| format!("T{}", rng.random_range(0..labels))).collect();
        let ga = group_accuracy(&parsed, &truth).map_err(|e| e.to_string())?;
        let oracle = brute_force_ga(&parsed, &truth);
        ensure(ga == oracle, || format!("case {case}: {ga} vs oracle {oracle} for {parsed:?} / {truth:?}"))?;
    }
    Ok("1000 instances identical".into())
}

fn shots_bytes(s: &ShotSet) -> Vec<u8> {
    let mut buf = Vec::new();
    write_shots(&mut buf, s).unwrap();
    buf
}

fn sampler_determinism_and_coverage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cluster_counts = Vec::new();
    for case in 0..100 {
        let n = rng.random_range(1..=200);
        let k = rng.random_range(1..=10).min(n);
        let corpus = common::synthetic_corpus("Synth", n, k, rng.random());
        let seed: u64 = rng.random();
        let c50 = SamplerConfig::new(50, seed);
        let a = sample_shots_detailed(&corpus, &c50, None).map_err(|e| format!("case {case}: {e}"))?;
        let b = sample_shots_detailed(&corpus, &c50, None).map_err(|e| format!("case {case}: {e}"))?;
        ensure(shots_bytes(&a.shots) == shots_bytes(&b.shots), || format!("case {case}: nondeterministic"))?;

        let lead = 50.min(a.clusters.len());
        let distinct: BTreeSet<usize> = a.shots.shots[..lead].iter().map(|s| s.cluster_id).collect();
        ensure(distinct.len() == lead, || {
            format!("case {case}: first {lead} shots span {} clusters", distinct.len())
        })?;

        let small = sample_shots_detailed(&corpus, &SamplerConfig::new(25, seed), None)
            .map_err(|e| format!("case {case}: {e}"))?;
        ensure(a.shots.shots.starts_with(&small.shots.shots), || format!("case {case}: N=25 not a prefix of N=50"))?;
        cluster_counts.push(a.clusters.len());
    }
    cluster_counts.sort_unstable();
    Ok(format!(
        "100 corpora, clusters min {} median {} max {}",
        cluster_counts[0],
        cluster_counts[50],
        cluster_counts[99]
    ))
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const POOL: &[char] = &[
        '0', '1', '2', '5', '9', 'a', 'Z', 'x', ' ', '.', ':', '-', '_', '#', '/', 'é', '東', '٣', '\t', '<', '*', '>',
    ];
    let len = rng.random_range(0..40);
    (0..len).map(|_| POOL[rng.random_range(0..POOL.len())]).collect()
}

fn masking() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let x = random_text(&mut rng);
        let once = mask_numbers(&x);
        ensure(mask_numbers(&once) == once, || format!("not idempotent on {x:?}"))?;
        ensure(!once.chars().any(|c| c.is_ascii_digit()), || format!("digits survive in {once:?}"))?;
    }
    Ok("10000 strings".into())
}

fn random_template(rng: &mut ChaCha8Rng) -> String {
    const WORDS: &[&str] = &[
        "<*>", "Got", "task", "block", "blk_<*>", "src:", "/<*>:<*>", "(TID", "<*>)", "it's", "'quoted'", "a=b",
        "#1", "naïve", "東京", "ms.", "[preauth]", "\"x\"", "-", "ok",
    ];
    loop {
        let n = rng.random_range(1..=8);
        let t = (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ");
        let quoted = t.len() >= 2 && t.starts_with('\'') && t.ends_with('\'');
        if !quoted && !t.contains(RESPONSE_MARKER) {
            return t;
        }
    }
}

fn prompt_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let template = random_template(&mut rng);
        let log = template.replace("<*>", "17");
        for style in [PromptStyle::T5, PromptStyle::Alpaca] {
            let pair = render_completed_pair(style, &log, &template).map_err(|e| e.to_string())?;
            let open = build_prompt(style, &log, None).map_err(|e| e.to_string())?.text;
            let completion = pair
                .strip_prefix(open.as_str())
                .ok_or_else(|| format!("{style:?} pair does not extend its prompt"))?;
            let back = extract_template(style, completion).map_err(|e| format!("{template:?}: {e}"))?;
            ensure(back == template, || format!("{style:?}: {template:?} came back as {back:?}"))?;
            if style == PromptStyle::Alpaca {
                let whole = extract_template(style, &pair).map_err(|e| e.to_string())?;
                ensure(whole == template, || format!("alpaca full text: {whole:?}"))?;
            }
        }
    }
    Ok("500 templates x 2 styles".into())
}

fn corrupt_k() -> Outcome {
    let pairs = common::synthetic_pairs(2000, 10, 5);
    let corpus = Corpus::from_pairs("Synth", "corrupt", pairs.clone()).unwrap();
    let n = pairs.len();
    let mut config = GenerationConfig::for_style(PromptStyle::T5, "in-process");
    config.parallelism = 8;
    let mut seen = Vec::new();
    for k in 0..=5 {
        let mut chosen: Vec<&str> = Vec::new();
        for (_, t) in &pairs {
            if chosen.len() < k && t.contains("<*>") && !chosen.contains(&t.as_str()) {
                chosen.push(t);
            }
        }
        let m = pairs.iter().filter(|(_, t)| chosen.contains(&t.as_str())).count();
        let backend = MockBackend::corrupt_k(&corpus, k);
        let run = parse_corpus(&corpus, &ParseOptions::fine_tuned(PromptStyle::T5), &config, &backend)
            .map_err(|e| e.to_string())?;
        let report = build_report(&run, &corpus, None).map_err(|e| e.to_string())?;
        let expected = (n - m) as f64 / n as f64;
        ensure(report.pa == expected, || format!("k={k}: PA {} expected {expected} (m={m})", report.pa))?;
        seen.push(format!("k{k}:m{m}"));
    }
    Ok(format!("n={n} {}", seen.join(" ")))
}

fn duplicate_exclusion() -> Outcome {
    // Templates without variables repeat verbatim; keep first occurrences so every log is unique.
    let mut contents = BTreeSet::new();
    let pairs: Vec<(String, String)> = common::synthetic_pairs(600, 10, 6)
        .into_iter()
        .filter(|(l, _)| contents.insert(l.clone()))
        .collect();
    let corpus = Corpus::from_pairs("Synth", "dups", pairs.clone()).unwrap();

    let shots = sample_shots_detailed(&corpus, &SamplerConfig::new(50, 11), None)
        .map_err(|e| e.to_string())?
        .shots;
    ensure(shots.len() == 50, || format!("{} shots", shots.len()))?;
    let shot_logs: BTreeSet<&str> = shots.shots.iter().map(|s| s.log.as_str()).collect();
    for log in &shot_logs {
        let hits = pairs.iter().filter(|(l, _)| l == log).count();
        ensure(hits == 1, || format!("shot {log:?} occurs {hits} times"))?;
    }

    // Splitting one template's logs keeps both metrics away from 0 and 1.
    let split = pairs[1].1.clone();
    let parsed: Vec<String> = pairs
        .iter()
        .enumerate()
        .map(|(i, (_, t))| if *t == split && i % 2 == 0 { format!("{t} x") } else { t.clone() })
        .collect();
    let report = build_report(&run_for(&corpus, parsed.clone()), &corpus, Some(&shots)).map_err(|e| e.to_string())?;
    ensure(report.n_excluded == Some(50), || format!("n_excluded {:?}", report.n_excluded))?;

    let keep: Vec<usize> = (0..pairs.len()).filter(|&i| !shot_logs.contains(pairs[i].0.as_str())).collect();
    let p: Vec<String> = keep.iter().map(|&i| parsed[i].clone()).collect();
    let t: Vec<String> = keep.iter().map(|&i| pairs[i].1.clone()).collect();
    let pa = parsing_accuracy(&p, &t).map_err(|e| e.to_string())?;
    let ga = brute_force_ga(&p, &t);
    ensure(report.pa_excl == Some(pa), || format!("pa_excl {:?} vs {pa}", report.pa_excl))?;
    ensure(report.ga_excl == Some(ga), || format!("ga_excl {:?} vs {ga}", report.ga_excl))?;
    Ok(format!("n_excluded 50, GA_excl {ga:.4} PA_excl {pa:.4}"))
}

fn statrs_t_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    (t, 2.0 * dist.cdf(-t.abs()))
}

fn t_test_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(5..=16);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| x - rng.random_range(-0.2..0.3)).collect();
        let ours = paired_t_test(&a, &b).map_err(|e| format!("case {case}: {e}"))?;
        let (t, p) = statrs_t_test(&a, &b);
        let err = (ours.t - t).abs().max((ours.p - p).abs());
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("case {case}: t {} vs {t}, p {} vs {p}", ours.t, ours.p))?;
    }
    Ok(format!("100 samples, worst deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("seven-log Spark oracle", 1, spark_example),
        ("perfect-parser identity", 30, perfect_parser),
        ("brute-force GA equivalence", 10, brute_force_ga_equivalence),
        ("sampler determinism and coverage", 30, sampler_determinism_and_coverage),
        ("masking idempotence and digit-freedom", 5, masking),
        ("prompt round-trip", 5, prompt_round_trip),
        ("corrupt-k sensitivity", 30, corrupt_k),
        ("duplicate-excluded protocol", 5, duplicate_exclusion),
        ("paired t-test vs oracle", 5, t_test_oracle),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = check();
        let elapsed = t0.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {budget}s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} [{}] {name} ({:.3}s / {budget}s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

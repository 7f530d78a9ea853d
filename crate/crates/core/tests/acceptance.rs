//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viramkit::backends::stub::StubServer;
use viramkit::backends::{BackendError, EndpointConfig, HttpBackend, LanguageTag, MockTranslator, ScriptedChat, Translator};
use viramkit::corpus::{
    load_benchmark, make_variant, normalize_ws, BenchmarkFormat, ParallelCorpus, ParallelPair, PunctuationInventory,
    VariantKind,
};
use viramkit::metrics::{chrf, corpus_bleu, MetricConfig};
use viramkit::prompts::{parse_reply, reference_shots, render_prompt, Strategy, TemplateSet};
use viramkit::restorer::{apply_labels, derive_labels, evaluate_restorer, train, LabelSet, TrainConfig};
use viramkit::runner::{render_report, run_pipeline, Pipeline, ReportFormat, ReportRow, ReportTable, RunOptions};

type Check = Result<String, String>;
type Named = (&'static str, Box<dyn Fn() -> Check>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn metric_identity() -> Check {
    let mut pool = common::read_lines("bleu20.ref");
    pool.extend(common::read_lines("roundtrip.txt"));
    let corpus: Vec<String> = pool.iter().cycle().take(100).cloned().collect();
    let t = Instant::now();
    let b = corpus_bleu(&corpus, &corpus, &MetricConfig::default()).map_err(|e| e.to_string())?.score;
    let c1 = chrf(&corpus, &corpus, &MetricConfig::chrf_pp()).map_err(|e| e.to_string())?.score;
    let c2 = chrf(&corpus, &corpus, &MetricConfig::chrf2_pp()).map_err(|e| e.to_string())?.score;
    let secs = t.elapsed().as_secs_f64();
    ensure!(b == 100.0 && c1 == 100.0 && c2 == 100.0, "BLEU {b}, chrF++ {c1}, chrF2++ {c2}");
    ensure!(secs < 1.0, "took {secs:.3}s");
    Ok(format!("100 sentences in {:.1} ms", secs * 1000.0))
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vocab = ["a", "b", "c", "d"];
    let sent = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(0..=8);
        (0..n).map(|_| vocab[rng.random_range(0..4)]).collect::<Vec<_>>().join(" ")
    };
    let cases = 2000;
    for case in 0..cases {
        let n = rng.random_range(1..=5);
        let hyps: Vec<String> = (0..n).map(|_| sent(&mut rng)).collect();
        let refs: Vec<String> = (0..n).map(|_| sent(&mut rng)).collect();
        let b = corpus_bleu(&hyps, &refs, &MetricConfig::default()).map_err(|e| e.to_string())?.score;
        ensure!(common::rel_close(b, common::oracle_bleu(&hyps, &refs), 1e-9), "case {case}: BLEU {b} on {hyps:?}/{refs:?}");
        for beta in [1.0, 2.0] {
            let c = chrf(&hyps, &refs, &MetricConfig::default().with_beta(beta)).map_err(|e| e.to_string())?.score;
            let o = common::oracle_chrf(&hyps, &refs, beta);
            ensure!(common::rel_close(c, o, 1e-9), "case {case}: chrF(beta={beta}) {c} vs {o}");
        }
    }
    Ok(format!("{cases} random corpora"))
}

fn golden_bleu() -> Check {
    let g: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(common::golden("bleu20_sacrebleu.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let want = g["score"].as_f64().ok_or("golden has no score")?;
    let got = corpus_bleu(&common::read_lines("bleu20.hyp"), &common::read_lines("bleu20.ref"), &MetricConfig::default())
        .map_err(|e| e.to_string())?
        .score;
    ensure!((got - want).abs() <= 0.1, "{got:.4} vs golden {want:.4}");
    Ok(format!("{got:.4} vs golden {want:.4}"))
}

fn variants() -> Check {
    let inv = PunctuationInventory::default();
    let pairs = common::rule_corpus(1000, 11)
        .into_iter()
        .enumerate()
        .map(|(i, s)| ParallelPair::new(s, format!("लक्ष्य {i}.")).unwrap())
        .collect();
    let base = ParallelCorpus::new("base", pairs);
    let t = Instant::now();
    let without = make_variant(&base, VariantKind::WithoutPunct, &inv).map_err(|e| e.to_string())?;
    let combined = make_variant(&base, VariantKind::Combined2x, &inv).map_err(|e| e.to_string())?;
    let alt = make_variant(&base, VariantKind::AlternateX, &inv).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    ensure!(combined.len() == 2000, "Combined2x has {} pairs", combined.len());
    ensure!(without.pairs.iter().all(|p| !p.source.chars().any(|c| inv.contains(c))), "mark left in WithoutPunct");
    for (i, p) in alt.pairs.iter().enumerate() {
        let stripped = &without.pairs[i].source;
        let expected = if i % 2 == 0 { &base.pairs[i].source } else { stripped };
        ensure!(&p.source == expected, "AlternateX parity broken at {i}");
    }
    for v in [&without, &combined, &alt] {
        for (i, p) in v.pairs.iter().enumerate() {
            ensure!(p.target.as_bytes() == base.pairs[i % 1000].target.as_bytes(), "{} target {i} changed", v.variant);
        }
    }
    ensure!(secs < 1.0, "took {secs:.3}s");
    Ok(format!("{:.1} ms", secs * 1000.0))
}

fn learnability() -> Check {
    let inv = PunctuationInventory::default();
    let all: Vec<_> = common::rule_corpus(250, 7)
        .iter()
        .map(|s| derive_labels(s, &inv, &LabelSet::default()).unwrap())
        .collect();
    let cfg = TrainConfig { epochs: 5, seed: 7, label_set: LabelSet::default() };
    let t = Instant::now();
    let model = train(&all[..200], &cfg).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let f1 = evaluate_restorer(&model, &all[200..]).map_err(|e| e.to_string())?.macro_f1;
    let again = train(&all[..200], &cfg).map_err(|e| e.to_string())?;
    ensure!(f1 >= 0.95, "held-out macro-F1 {f1:.4}");
    ensure!(secs < 60.0, "training took {secs:.1}s");
    ensure!(model.to_text() == again.to_text(), "retraining with seed 7 differs");
    Ok(format!("macro-F1 {f1:.4}, trained in {:.0} ms", secs * 1000.0))
}

fn round_trip() -> Check {
    let inv = PunctuationInventory::default();
    let lines = common::read_lines("roundtrip.txt");
    for s in &lines {
        let l = derive_labels(s, &inv, &LabelSet::default()).map_err(|e| e.to_string())?;
        ensure!(apply_labels(&l) == normalize_ws(s), "{s:?} -> {:?}", apply_labels(&l));
    }
    Ok(format!("{} sentences", lines.len()))
}

fn ordering() -> Check {
    let bench = common::rule_benchmark(30, 21);
    let t = Arc::new(
        MockTranslator::from_pairs(bench.iter().map(|b| (b.english_meant.clone(), b.marathi_meant.clone()))).with_passthrough(true),
    );
    let opts = RunOptions::default();
    let pipelines = [
        ("Baseline", Pipeline::Baseline { translator: t.clone() }),
        (
            "CascadeNative",
            Pipeline::CascadeNative { model: Arc::new(common::perfect_rule_model()), inventory: Default::default(), translator: t.clone() },
        ),
        ("Oracle", Pipeline::Oracle { translator: t }),
    ];
    let mut table = ReportTable::default();
    let mut bleu = Vec::new();
    for (label, p) in &pipelines {
        let out = run_pipeline(label, p, &bench, &opts).map_err(|e| e.to_string())?;
        bleu.push(out.report.as_ref().ok_or("no report")?.bleu);
        table.rows.push(ReportRow::from(&out));
    }
    ensure!(bleu[0] < 100.0 && bleu[1] == 100.0 && bleu[2] == 100.0, "BLEU {bleu:?}");
    let md = render_report(&table, ReportFormat::Markdown).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = md.lines().skip(2).map(|l| l.split('|').nth(1).unwrap_or("").trim()).collect();
    ensure!(rows == ["Baseline", "CascadeNative", "Oracle"], "rows {rows:?}");
    Ok(format!("Baseline {:.2} < CascadeNative {:.2} = Oracle {:.2}", bleu[0], bleu[1], bleu[2]))
}

fn prompts() -> Check {
    for s in Strategy::ALL {
        let shots = if s.shot_count() == 3 { reference_shots() } else { Vec::new() };
        let sentence = if s.uses_meant_input() { "Let us eat, grandma." } else { "let us eat grandma" };
        let got = render_prompt(s, sentence, &shots).map_err(|e| e.to_string())?;
        let want = std::fs::read(common::golden(&format!("prompts/{}.txt", s.template_name()))).map_err(|e| e.to_string())?;
        ensure!(got.as_bytes() == want.as_slice(), "{s} differs from golden");
        let answer = if s.is_restore_then_translate() {
            "Step 1 (Restoration): Let us eat, grandma.\nStep 2 (Translation): चला खाऊया, आजी.\nReasoning: vocative"
        } else {
            "Marathi Translation (Devanagari Script): चला खाऊया, आजी."
        };
        for raw in [answer.to_string(), format!("{got}\n{answer}")] {
            let p = parse_reply(s, &raw).map_err(|e| format!("{s}: {e}"))?;
            ensure!(p.marathi == "चला खाऊया, आजी.", "{s}: parsed {:?}", p.marathi);
            if s.is_restore_then_translate() {
                ensure!(p.restored_english.as_deref() == Some("Let us eat, grandma."), "{s}: restored {:?}", p.restored_english);
            }
        }
    }
    Ok("5 templates, 10 replies".into())
}

fn shot_exclusion() -> Check {
    let bench = load_benchmark(&common::fixture("benchmark54.tsv"), BenchmarkFormat::Tsv).map_err(|e| e.to_string())?;
    ensure!(bench.len() == 54, "fixture has {} rows", bench.len());
    let ids: Vec<String> = ["v004", "v017", "v033"].iter().map(|s| s.to_string()).collect();
    let p = Pipeline::LlmPrompting {
        strategy: Strategy::ThreeShotDirect,
        chat: Arc::new(ScriptedChat::constant("Marathi Translation (Devanagari Script): क")),
        shot_ids: Some(ids.clone()),
        templates: TemplateSet::embedded(),
    };
    let out = run_pipeline("three_direct", &p, &bench, &RunOptions::default()).map_err(|e| e.to_string())?;
    let shot: HashSet<&String> = ids.iter().collect();
    let overlap = out.records.iter().filter(|r| shot.contains(&r.instance_id)).count();
    ensure!(out.records.len() == 51 && overlap == 0, "{} evaluated, {overlap} overlapping", out.records.len());
    Ok("51 evaluated, 0 overlap".into())
}

struct Capture(std::sync::Mutex<Vec<String>>);

impl log::Log for Capture {
    fn enabled(&self, _: &log::Metadata) -> bool {
        true
    }
    fn log(&self, r: &log::Record) {
        self.0.lock().unwrap().push(format!("{} {}", r.target(), r.args()));
    }
    fn flush(&self) {}
}

fn backend_contract(logs: &'static Capture) -> Check {
    let stub = StubServer::builder().translate(|s| format!("[{s}]")).start().map_err(|e| e.to_string())?;
    let (en, mr) = (LanguageTag::english(), LanguageTag::marathi());
    let input: Vec<String> = (0..37).map(|i| format!("s{i}")).collect();
    for batch in [1, 7, 16] {
        for parallel in [1, 4] {
            let b = HttpBackend::new(EndpointConfig { batch_size: batch, max_parallel: parallel, ..EndpointConfig::new(stub.url()) })
                .map_err(|e| e.to_string())?;
            let out = b.translate_batch(&input, &en, &mr).map_err(|e| e.to_string())?;
            ensure!(out.len() == input.len(), "length {} at batch {batch} x {parallel}", out.len());
            ensure!(out.iter().zip(&input).all(|(o, i)| *o == format!("[{i}]")), "order broken at batch {batch} x {parallel}");
        }
    }

    let slow = StubServer::builder().delay(Duration::from_millis(300)).start().map_err(|e| e.to_string())?;
    let cfg = EndpointConfig { timeout_secs: 0.1, max_retries: 2, retry_backoff_secs: 0.01, ..EndpointConfig::new(slow.url()) };
    match HttpBackend::new(cfg).map_err(|e| e.to_string())?.translate_batch(&input[..1], &en, &mr) {
        Err(BackendError::Unavailable { attempts: 3, .. }) => {}
        other => return Err(format!("expected 3 bounded attempts, got {other:?}")),
    }
    std::thread::sleep(Duration::from_millis(500));
    ensure!(slow.requests("/translate") == 3, "server saw {} attempts", slow.requests("/translate"));

    const TOKEN: &str = "acceptance-token-5b2e";
    std::env::set_var("VIRAMKIT_ACCEPTANCE_TOKEN", TOKEN);
    let guarded = StubServer::builder().require_token(TOKEN).stall_first(1, Duration::from_millis(300)).start().map_err(|e| e.to_string())?;
    let cfg = EndpointConfig {
        auth_token_env: Some("VIRAMKIT_ACCEPTANCE_TOKEN".into()),
        timeout_secs: 0.1,
        retry_backoff_secs: 0.01,
        ..EndpointConfig::new(guarded.url())
    };
    HttpBackend::new(cfg).map_err(|e| e.to_string())?.translate_batch(&input[..2], &en, &mr).map_err(|e| e.to_string())?;
    let lines = logs.0.lock().unwrap();
    ensure!(!lines.is_empty(), "no log lines captured");
    ensure!(lines.iter().all(|l| !l.contains(TOKEN)), "token found in logs");
    Ok(format!("6 batch/parallel combinations, 3 bounded attempts, {} log lines clean", lines.len()))
}

fn main() {
    let logs: &'static Capture = Box::leak(Box::new(Capture(Default::default())));
    log::set_logger(logs).expect("logger");
    log::set_max_level(log::LevelFilter::Trace);

    let checks: Vec<Named> = vec![
        ("metric identity", Box::new(metric_identity)),
        ("metric oracle equivalence", Box::new(metric_oracle)),
        ("external golden BLEU", Box::new(golden_bleu)),
        ("variant construction", Box::new(variants)),
        ("restorer learnability", Box::new(learnability)),
        ("label round-trip", Box::new(round_trip)),
        ("pipeline ordering", Box::new(ordering)),
        ("prompt goldens", Box::new(prompts)),
        ("shot exclusion", Box::new(shot_exclusion)),
        ("backend contract", Box::new(move || backend_contract(logs))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

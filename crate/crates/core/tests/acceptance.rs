//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criterion 7 needs real data and is skipped unless `VMR_QVH_DATASET` and
//! `VMR_QVH_FEATURES` point at an annotation file and an extracted feature
//! root.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use vmr_core::harness::features::FeatureRoot;
use vmr_core::harness::jsonl::{load_dataset, load_predictions, predictions_to_string};
use vmr_core::harness::report::headline_row;
use vmr_core::harness::sweep::evaluate_output;
use vmr_core::harness::{run_oracle, run_pipeline, PipelineConfig};
use vmr_core::metrics::{evaluate, EvalReport};
use vmr_core::oracle::{oracle_merge, oracle_scores};
use vmr_core::postprocess::simple_watershed;
use vmr_core::proposals::{detect_shots, DEFAULT_MIN_SHOT_LEN_S};
use vmr_core::synthetic::block_track;
use vmr_core::{PredictionRecord, QueryRecord, ScoredMoment, TimeInterval};

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn iv(s: f64, e: f64) -> TimeInterval {
    TimeInterval::new(s, e).unwrap()
}

// --- 1 -------------------------------------------------------------------

#[derive(Deserialize)]
struct Headline {
    r1_at_0_5: f64,
    r1_at_0_7: f64,
    map_at_0_5: f64,
    map_at_0_75: f64,
    map_avg: f64,
}

impl Headline {
    fn values(&self) -> [f64; 5] {
        [self.r1_at_0_5, self.r1_at_0_7, self.map_at_0_5, self.map_at_0_75, self.map_avg]
    }
}

#[derive(Deserialize)]
struct Expected {
    unrounded: Headline,
    rounded: Headline,
}

fn round2(v: f64) -> f64 {
    format!("{v:.2}").parse().unwrap()
}

fn metric_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let dir = fixtures().join("metric_oracle");
    let text = std::fs::read_to_string(dir.join("expected.json")).map_err(|e| e.to_string())?;
    let expected: BTreeMap<String, Expected> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    check(expected.len() >= 50, || format!("only {} fixtures", expected.len()))?;
    let mut worst: f64 = 0.0;
    for (case, exp) in &expected {
        let preds = load_predictions(dir.join(case).join("predictions.jsonl")).map_err(|e| e.to_string())?;
        let gts = load_dataset(dir.join(case).join("dataset.jsonl")).map_err(|e| e.to_string())?;
        check(gts.len() <= 20 && preds.iter().all(|p| p.moments().len() <= 10), || format!("{case}: fixture too large"))?;
        check(gts.iter().all(|g| g.gt_windows().len() <= 8), || format!("{case}: too many gt windows"))?;
        let got = evaluate(&preds, &gts).map_err(|e| e.to_string())?.headline();
        for (k, ((g, u), r)) in got.iter().zip(exp.unrounded.values()).zip(exp.rounded.values()).enumerate() {
            worst = worst.max((g - u).abs());
            check((g - u).abs() <= 1e-6, || format!("{case} metric {k}: {g} vs oracle {u}"))?;
            check(round2(*g) == r, || format!("{case} metric {k}: rounds to {} vs oracle {r}", round2(*g)))?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} fixtures, max |diff| {worst:.1e}, {elapsed:.2?}", expected.len()))
}

// --- 2 -------------------------------------------------------------------

fn perfect_predictor_identity() -> Outcome {
    let mut datasets = vec![load_dataset(fixtures().join("synthetic/dataset.jsonl")).map_err(|e| e.to_string())?];
    for i in 0..50 {
        let path = fixtures().join(format!("metric_oracle/case_{i:02}/dataset.jsonl"));
        datasets.push(load_dataset(path).map_err(|e| e.to_string())?);
    }
    for gts in &datasets {
        let preds: Vec<PredictionRecord> = gts
            .iter()
            .map(|g| {
                let ms = g.gt_windows().iter().map(|w| ScoredMoment::new(*w, 1.0).unwrap()).collect();
                PredictionRecord::new(g.qid, g.vid.clone(), ms)
            })
            .collect();
        let r = evaluate(&preds, gts).map_err(|e| e.to_string())?;
        check(r.headline() == [100.0; 5], || format!("headline {:?}", r.headline()))?;
        check(headline_row(&r) == "100.00 100.00 100.00 100.00 100.00", || headline_row(&r))?;
    }
    Ok(format!("{} datasets, all five metrics exactly 100", datasets.len()))
}

// --- 3 -------------------------------------------------------------------

fn synthetic_shot_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut total_cuts = 0;
    for t in 0..100 {
        let blocks = rng.gen_range(1..=10);
        let fps: f32 = rng.gen_range(10.0..=30.0);
        let noise: u8 = rng.gen_range(0..=20);
        let separation: u8 = rng.gen_range(noise + 5..=90);
        let b = block_track(&mut rng, blocks, fps, noise, separation, DEFAULT_MIN_SHOT_LEN_S).map_err(|e| e.to_string())?;
        let lambda = loop {
            let l = rng.gen_range(b.noise..b.separation);
            if l > b.noise {
                break l;
            }
        };
        let shots = detect_shots(&b.track, lambda, DEFAULT_MIN_SHOT_LEN_S).map_err(|e| e.to_string())?;
        let fps = b.track.fps() as f64;
        let got: Vec<f64> = shots.iter().skip(1).map(|s| s.start()).collect();
        let want: Vec<f64> = b.cut_frames.iter().map(|&f| f as f64 / fps).collect();
        check(got == want, || format!("track {t}: B={blocks} λ={lambda:.2}: cuts {got:?}, want {want:?}"))?;
        check(shots.len() == blocks, || format!("track {t}: {} shots for {blocks} blocks", shots.len()))?;
        total_cuts += want.len();
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("100 tracks, {total_cuts} cuts recovered frame-exactly, {elapsed:.2?}"))
}

// --- 4 -------------------------------------------------------------------

fn random_sequence(rng: &mut ChaCha8Rng) -> Vec<ScoredMoment> {
    let n = rng.gen_range(1..=40);
    let mut t = rng.gen_range(0.0..5.0);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen_bool(0.1) {
            t += rng.gen_range(0.5..3.0);
        }
        let len = rng.gen_range(0.2..12.0);
        // Coarse scores make exact ties with γ common.
        let score = if rng.gen_bool(0.5) { rng.gen_range(0..=10) as f64 / 10.0 } else { rng.gen_range(0.0..=1.0) };
        out.push(ScoredMoment::new(iv(t, t + len), score).unwrap());
        t += len;
    }
    out
}

fn covered(ms: &[ScoredMoment]) -> f64 {
    ms.iter().map(|m| m.interval.length()).sum()
}

fn watershed_properties() -> Outcome {
    let a = |s, e, c| ScoredMoment::new(iv(s, e), c).unwrap();
    let example = [a(0.0, 5.0, 0.8), a(5.0, 9.0, 0.75), a(9.0, 12.0, 0.3), a(12.0, 20.0, 0.9)];
    let merged = simple_watershed(&example, 0.7).map_err(|e| e.to_string())?;
    check(merged == vec![a(0.0, 9.0, 0.8), a(9.0, 12.0, 0.3), a(12.0, 20.0, 0.9)], || format!("worked example gave {merged:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let seq = random_sequence(&mut rng);
        let mut gammas: Vec<f64> = (0..6).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect();
        gammas.push(rng.gen_range(0.0..=1.0));
        gammas.sort_by(f64::total_cmp);
        let mut prev_count = 0;
        for &g in &gammas {
            let once = simple_watershed(&seq, g).map_err(|e| e.to_string())?;
            let twice = simple_watershed(&once, g).map_err(|e| e.to_string())?;
            check(once == twice, || format!("case {case}: not idempotent at γ={g}"))?;
            let (before, after) = (covered(&seq), covered(&once));
            check((before - after).abs() <= 1e-9 * before.max(1.0), || format!("case {case}: duration {before} -> {after}"))?;
            check(once.first().unwrap().start() == seq[0].start() && once.last().unwrap().end() == seq.last().unwrap().end(), || {
                format!("case {case}: span changed")
            })?;
            check(once.len() >= prev_count, || format!("case {case}: count fell to {} when γ rose to {g}", once.len()))?;
            prev_count = once.len();
        }
    }
    Ok("worked example + 1000 sequences x 7 γ values: idempotent, duration-preserving, count monotone".into())
}

// --- 5 -------------------------------------------------------------------

/// Up to `max` disjoint windows on a 2 s grid inside `[0, duration)`.
fn random_gt(rng: &mut ChaCha8Rng, qid: u64, duration: f64, max: usize) -> QueryRecord {
    let cells = (duration / 2.0) as usize;
    let n = rng.gen_range(1..=max);
    let mut points: Vec<usize> = rand::seq::index::sample(rng, cells, 2 * n).into_vec();
    points.sort_unstable();
    let windows = points.chunks(2).map(|c| iv(2.0 * c[0] as f64, 2.0 * c[1] as f64)).collect();
    QueryRecord::new(qid, "v", "q", duration, windows).unwrap()
}

fn random_partition(rng: &mut ChaCha8Rng, duration: f64) -> Vec<TimeInterval> {
    let mut out = Vec::new();
    let mut t = 0.0;
    while t < duration {
        let end = (t + rng.gen_range(0.5..15.0f64)).min(duration);
        if duration - end < 0.25 {
            out.push(iv(t, duration));
            break;
        }
        out.push(iv(t, end));
        t = end;
    }
    out
}

fn oracle_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // (a) ground-truth windows padded with their complement.
    for qid in 0..100 {
        let g = random_gt(&mut rng, qid, 150.0, 8);
        let mut segs = Vec::new();
        let mut t = 0.0;
        for w in g.gt_windows() {
            if w.start() > t {
                segs.push(iv(t, w.start()));
            }
            segs.push(*w);
            t = w.end();
        }
        if t < 150.0 {
            segs.push(iv(t, 150.0));
        }
        for (name, ms) in [("scores", oracle_scores(&segs, &g)), ("merge", oracle_merge(&segs, &g))] {
            let p = PredictionRecord::new(qid, "v", ms.map_err(|e| e.to_string())?);
            let r = evaluate(&[p], std::slice::from_ref(&g)).map_err(|e| e.to_string())?;
            check(r.headline() == [100.0; 5], || format!("(a) query {qid} oracle_{name}: {:?}", r.headline()))?;
        }
    }

    // (b) random partitions, random ground truth.
    let (mut merged, mut scored, mut gts) = (Vec::new(), Vec::new(), Vec::new());
    let mut single_window_checked = 0;
    for qid in 0..100 {
        let duration = rng.gen_range(30.0..150.0f64).round();
        let segs = random_partition(&mut rng, duration);
        let g = random_gt(&mut rng, qid, duration, 4);
        let m = PredictionRecord::new(qid, "v", oracle_merge(&segs, &g).map_err(|e| e.to_string())?);
        let s = PredictionRecord::new(qid, "v", oracle_scores(&segs, &g).map_err(|e| e.to_string())?);
        if g.gt_windows().len() == 1 {
            let one = std::slice::from_ref(&g);
            let (rm, rs) = (evaluate(std::slice::from_ref(&m), one).unwrap(), evaluate(std::slice::from_ref(&s), one).unwrap());
            check(rm.map_avg >= rs.map_avg, || format!("(b) single-window query {qid}: {} < {}", rm.map_avg, rs.map_avg))?;
            single_window_checked += 1;
        }
        merged.push(m);
        scored.push(s);
        gts.push(g);
    }
    let rm = evaluate(&merged, &gts).map_err(|e| e.to_string())?;
    let rs = evaluate(&scored, &gts).map_err(|e| e.to_string())?;
    check(rm.map_avg >= rs.map_avg, || format!("(b) avg mAP merge {} < scores {}", rm.map_avg, rs.map_avg))?;

    // (c) bounds versus the pipeline on the synthetic fixtures.
    let dir = fixtures().join("synthetic");
    let dataset = load_dataset(dir.join("dataset.jsonl")).map_err(|e| e.to_string())?;
    let root = FeatureRoot::new(dir.join("features"));
    let ws = PipelineConfig::shot_frames_watershed();
    let plain = PipelineConfig { lambda: ws.lambda, ..PipelineConfig::shot_frames() };
    let bounds = run_oracle(&ws, &dataset, &root).map_err(|e| e.to_string())?;
    let b_scores = evaluate(&bounds.scores, &dataset).map_err(|e| e.to_string())?;
    let b_merge = evaluate(&bounds.merged, &dataset).map_err(|e| e.to_string())?;
    let pipeline = |c: &PipelineConfig| -> Result<EvalReport, String> {
        let out = run_pipeline(c, &dataset, &root).map_err(|e| e.to_string())?;
        evaluate_output(&out, &dataset, c.max_preds).map_err(|e| e.to_string())
    };
    let (p_plain, p_ws) = (pipeline(&plain)?, pipeline(&ws)?);
    let dominates = |bound: &EvalReport, p: &EvalReport| bound.headline().iter().zip(p.headline()).all(|(b, p)| *b >= p);
    check(dominates(&b_scores, &p_plain), || format!("(c) oracle_scores {:?} vs pipeline {:?}", b_scores.headline(), p_plain.headline()))?;
    check(dominates(&b_merge, &p_plain), || format!("(c) oracle_merge {:?} vs pipeline {:?}", b_merge.headline(), p_plain.headline()))?;
    check(dominates(&b_merge, &p_ws), || format!("(c) oracle_merge {:?} vs watershed pipeline {:?}", b_merge.headline(), p_ws.headline()))?;

    Ok(format!(
        "(a) 100/100 perfect; (b) merge {:.2} >= scores {:.2} avg mAP, {single_window_checked} single-window queries checked individually; \
         (c) R1@0.5 bounds {:.2}/{:.2} vs pipeline {:.2}/{:.2}",
        rm.map_avg, rs.map_avg, b_scores.r1_at_0_5, b_merge.r1_at_0_5, p_plain.r1_at_0_5, p_ws.r1_at_0_5
    ))
}

// --- 6 -------------------------------------------------------------------

fn determinism() -> Outcome {
    let dir = fixtures().join("synthetic");
    let dataset = load_dataset(dir.join("dataset.jsonl")).map_err(|e| e.to_string())?;
    let root = FeatureRoot::new(dir.join("features"));
    let config = PipelineConfig::shot_frames_watershed();
    let a = run_pipeline(&config, &dataset, &root).map_err(|e| e.to_string())?;
    let b = run_pipeline(&config, &dataset, &root).map_err(|e| e.to_string())?;
    let (ja, jb) = (predictions_to_string(&a.predictions), predictions_to_string(&b.predictions));
    check(ja == jb, || "prediction JSONL differs between runs".into())?;
    let golden = std::fs::read_to_string(dir.join("golden_predictions.jsonl")).map_err(|e| e.to_string())?;
    check(ja == golden, || "predictions differ from the committed golden file".into())?;
    let (ra, rb) = (evaluate(&a.predictions, &dataset).unwrap(), evaluate(&b.predictions, &dataset).unwrap());
    check(ra == rb, || "reports differ".into())?;
    Ok(format!("{} bytes of JSONL identical across runs and to golden; {}", ja.len(), headline_row(&ra)))
}

// --- 7 -------------------------------------------------------------------

const PUBLISHED: [f64; 5] = [48.33, 30.96, 46.94, 25.75, 27.96];

fn full_reproduction() -> Option<Outcome> {
    let dataset = std::env::var_os("VMR_QVH_DATASET")?;
    let features = std::env::var_os("VMR_QVH_FEATURES")?;
    Some((|| {
        let dataset = load_dataset(Path::new(&dataset)).map_err(|e| e.to_string())?;
        let root = FeatureRoot::new(features);
        let config = PipelineConfig::shot_frames_watershed();
        let out = run_pipeline(&config, &dataset, &root).map_err(|e| e.to_string())?;
        let r = evaluate_output(&out, &dataset, config.max_preds).map_err(|e| e.to_string())?;
        let got = r.headline();
        let detail = format!("{} (published {:?}), {} queries, {} skipped", headline_row(&r), PUBLISHED, r.num_queries, out.skipped.len());
        check(got.iter().zip(PUBLISHED).all(|(g, p)| (g - p).abs() <= 5.0), || format!("outside ±5: {detail}"))?;
        Ok(detail)
    })())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("metric-oracle equivalence", metric_oracle_equivalence),
        ("perfect-predictor identity", perfect_predictor_identity),
        ("synthetic shot recovery", synthetic_shot_recovery),
        ("watershed property suite", watershed_properties),
        ("oracle-bound sanity", oracle_sanity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {detail}", i + 1);
            }
        }
    }
    match full_reproduction() {
        None => println!("criterion 7 (full reproduction): SKIPPED - set VMR_QVH_DATASET and VMR_QVH_FEATURES to run"),
        Some(Ok(detail)) => println!("criterion 7 (full reproduction): PASS - {detail}"),
        Some(Err(detail)) => {
            failed += 1;
            println!("criterion 7 (full reproduction): FAIL - {detail}");
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! One pass/fail line per acceptance criterion, written straight to stderr so
//! it shows up without `--nocapture`.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::checks::{
    attention_case, auc_monotone_invariant, denoising_invariance_err, encode_case, gate_case,
    gate_shrinkage_violations, model_case,
};
use common::metrics::{auc_oracle_mismatches, table3_max_gap};
use common::wavelet::{oracle_err, parseval_err, reconstruction_err, ORACLE_LENGTHS, PR_LENGTHS};
use gama::bench::{run_bench, BenchConfig, EncoderKind};
use gama::experiment::{run_denoising, ExperimentConfig};
use gama::wavelet::{BaseName, BoundaryMode};
use gama::{relaimpr, EncoderConfig};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, elapsed: Duration, outcome: &Outcome) {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    let line = format!(
        "acceptance {id} {name:<24} {verdict}  ({:.1}s) {}\n",
        elapsed.as_secs_f64(),
        outcome.detail
    );
    std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
}

fn wavelet_correctness() -> Outcome {
    let (mut pr, mut parseval, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    for name in BaseName::ALL {
        for n in PR_LENGTHS {
            pr = pr.max(reconstruction_err(name, n, 0));
            parseval = parseval.max(parseval_err(name, n, 0));
        }
        for n in ORACLE_LENGTHS {
            for boundary in [BoundaryMode::Periodic, BoundaryMode::Zero] {
                oracle = oracle.max(oracle_err(name, n, boundary, 0));
            }
        }
    }
    Outcome {
        pass: pr < 1e-10 && parseval < 1e-9 && oracle < 1e-12,
        detail: format!("reconstruction {pr:.1e}, parseval {parseval:.1e}, matrix oracle {oracle:.1e}"),
    }
}

fn gradient_suite() -> Outcome {
    const TOL: f64 = 1e-4;
    let shapes = [(4, 16), (4, 128), (16, 16), (16, 128)];
    let gate = (0..100).map(gate_case).fold(0.0, f64::max);
    let att = (0..100).map(attention_case).fold(0.0, f64::max);
    let enc = (0..100u64)
        .map(|s| {
            let (d, n) = shapes[s as usize % shapes.len()];
            encode_case(s, d, n)
        })
        .fold(0.0, f64::max);
    let (mut model, mut probed, mut kinks) = (0.0f64, 0, 0);
    for seed in 0..100 {
        let c = model_case(seed);
        model = model.max(c.max_rel_err);
        probed += c.probed;
        kinks += c.kinks;
    }
    Outcome {
        pass: gate < TOL && att < TOL && enc < TOL && model < TOL,
        detail: format!(
            "max rel err gate {gate:.1e}, attention {att:.1e}, encode {enc:.1e}, model {model:.1e} \
             ({kinks} of {probed} model coordinates skipped at ReLU kinks)"
        ),
    }
}

fn metric_fidelity() -> Outcome {
    let all = relaimpr(0.6324, 0.6147).unwrap();
    let cold = relaimpr(0.5901, 0.5680).unwrap();
    let mismatches = auc_oracle_mismatches(50, 200, 3);
    let gap = table3_max_gap();
    Outcome {
        pass: (all - 15.43).abs() <= 0.01 && (cold - 32.5).abs() <= 0.01 && mismatches == 0,
        detail: format!(
            "relaimpr {all:.4}% and {cold:.4}%, worst table gap {gap:.4} pp, {mismatches} of 50 AUC sets differ from the pairwise oracle"
        ),
    }
}

fn complexity() -> Outcome {
    let start = Instant::now();
    let config = BenchConfig {
        encoders: vec![EncoderKind::GamaAvg, EncoderKind::GamaAtt, EncoderKind::SelfAttnNaive],
        ..BenchConfig::default()
    };
    let report = run_bench(&config).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(300);
    let mut parts = Vec::new();
    for r in report.scaling_ratios() {
        let ok = match r.encoder {
            EncoderKind::GamaAvg | EncoderKind::GamaAtt => r.ratio <= 2.6,
            EncoderKind::SelfAttnNaive => r.from < 1024 || r.ratio >= 3.4,
            EncoderKind::AvgPool => true,
        };
        pass &= ok;
        parts.push(format!("{} {}→{} {:.2}", r.encoder.as_str(), r.from, r.to, r.ratio));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

struct Denoising {
    none: (f64, f64),
    avgpool: (f64, f64),
    gama: (f64, f64),
    elapsed: Duration,
}

fn denoising_runs() -> Denoising {
    let start = Instant::now();
    let encoder = EncoderConfig::default();
    let mut sums = [(0.0, 0.0); 3];
    for seed in SEEDS {
        let results = run_denoising(&ExperimentConfig::denoising(seed), &encoder).unwrap();
        for (sum, r) in sums.iter_mut().zip(&results) {
            sum.0 += r.auc_all;
            sum.1 += r.auc_cold;
        }
    }
    let k = SEEDS.len() as f64;
    let mean = |s: (f64, f64)| (s.0 / k, s.1 / k);
    Denoising {
        none: mean(sums[0]),
        avgpool: mean(sums[1]),
        gama: mean(sums[2]),
        elapsed: start.elapsed(),
    }
}

fn denoising_effectiveness(d: &Denoising) -> Outcome {
    let (none, ap, gama) = (d.none.0, d.avgpool.0, d.gama.0);
    Outcome {
        pass: gama >= ap + 0.005 && ap > none && gama > none && d.elapsed < Duration::from_secs(900),
        detail: format!(
            "mean test AUC none {none:.4}, ap-e {ap:.4}, gama-att {gama:.4} over {} seeds",
            SEEDS.len()
        ),
    }
}

fn cold_start(d: &Denoising) -> Outcome {
    let full_gain = d.gama.0 - d.none.0;
    let cold_gain = d.gama.1 - d.none.1;
    Outcome {
        pass: cold_gain >= full_gain,
        detail: format!(
            "gama-att gain over backbone: cold {cold_gain:+.4} (AUC {:.4} vs {:.4}), full {full_gain:+.4}",
            d.gama.1, d.none.1
        ),
    }
}

fn invariance() -> Outcome {
    let denoise = (0..200).map(denoising_invariance_err).fold(0.0, f64::max);
    let monotone = (0..200).all(auc_monotone_invariant);
    let shrink = gate_shrinkage_violations(10_000, 17);
    Outcome {
        pass: denoise < 1e-9 && monotone && shrink == 0,
        detail: format!(
            "dropped-band perturbation {denoise:.1e}, AUC monotone-invariant {monotone}, {shrink} gate violations in 10^4"
        ),
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Duration, Outcome) {
    let start = Instant::now();
    let out = f();
    (start.elapsed(), out)
}

#[test]
fn acceptance_criteria() {
    let mut passed = Vec::new();

    let (t, mut o) = timed(wavelet_correctness);
    o.pass &= t < Duration::from_secs(5);
    report(1, "wavelet correctness", t, &o);
    passed.push(o.pass);

    let (t, mut o) = timed(gradient_suite);
    o.pass &= t < Duration::from_secs(30);
    report(2, "gradient suite", t, &o);
    passed.push(o.pass);

    let (t, o) = timed(metric_fidelity);
    report(3, "metric fidelity", t, &o);
    passed.push(o.pass);

    let (t, o) = timed(complexity);
    report(4, "complexity scaling", t, &o);
    passed.push(o.pass);

    let runs = denoising_runs();
    let o = denoising_effectiveness(&runs);
    report(5, "denoising effectiveness", runs.elapsed, &o);
    passed.push(o.pass);
    let o = cold_start(&runs);
    report(6, "cold-start direction", runs.elapsed, &o);
    passed.push(o.pass);

    let (t, o) = timed(invariance);
    report(7, "invariance suite", t, &o);
    passed.push(o.pass);

    let failed: Vec<usize> = passed
        .iter()
        .enumerate()
        .filter(|(_, p)| !**p)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}

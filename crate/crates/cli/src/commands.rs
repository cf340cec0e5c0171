use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gama::bench::run_bench;
use gama::checkpoint;
use gama::data::{
    build_samples, cold_filter, load_csv, split_time_for_fraction, synth_generate, write_csv, Dataset, InteractionLog,
    SampleConfig,
};
use gama::experiment::{prepare, run_branch, ExperimentConfig, Splits};
use gama::wavelet::{decompose, make_base, read_matrix_csv, write_dump};
use gama::{evaluate, relaimpr, train, CtrModel, EvalReport, ExposureBranch, ModelConfig, Split};

use crate::config::RunConfig;
use crate::error::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// `<stem>_<suffix>.csv` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn decompose_cmd(config: &RunConfig, input: &Path, out: &Path) -> Result<(), CliError> {
    let signal = read_matrix_csv(input)?;
    let enc = &config.encoder;
    let dec = decompose(&signal, &make_base(enc.base), enc.level, enc.boundary)?;
    fs::create_dir_all(out)?;
    write_dump(out, &dec)?;
    println!(
        "decomposed {}x{} signal with {} at level {} ({}) into {}",
        signal.channels(),
        signal.steps(),
        enc.base,
        enc.level,
        enc.boundary,
        out.display()
    );
    Ok(())
}

pub fn synth_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let log = synth_generate(config.synth())?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_csv(out, &log)?;
    println!(
        "wrote {} rows for {} users to {}",
        log.len(),
        config.synth().n_users,
        out.display()
    );
    Ok(())
}

fn load_or_synth(config: &RunConfig, log: Option<&Path>) -> Result<(InteractionLog, i64), CliError> {
    match log {
        Some(path) => {
            let (log, report) = load_csv(path)?;
            if report.skipped > 0 {
                eprintln!("skipped {} malformed rows in {}", report.skipped, path.display());
            }
            let (lo, hi) = log
                .time_range()
                .ok_or_else(|| CliError::Runtime(format!("{} has no rows", path.display())))?;
            let split = config
                .split_time
                .unwrap_or(lo + ((hi - lo) as f64 * config.experiment.split_fraction).round() as i64);
            Ok((log, split))
        }
        None => {
            let split = config
                .split_time
                .unwrap_or_else(|| split_time_for_fraction(config.synth(), config.experiment.split_fraction));
            Ok((synth_generate(config.synth())?, split))
        }
    }
}

fn splits_for(config: &RunConfig, model: &ModelConfig, log: Option<&Path>) -> Result<Splits, CliError> {
    let (log, split_time) = load_or_synth(config, log)?;
    let (train, test) = build_samples(
        &log,
        &SampleConfig {
            split_time,
            exposure_len: model.exposure_len,
            behavior_len: config.synth().behavior_len,
            attribution_window: config.experiment.attribution_window,
            vocab: model.vocab,
        },
    );
    let cold = cold_filter(&test);
    Ok(Splits { train, test, cold })
}

fn model_config(config: &RunConfig) -> ModelConfig {
    ModelConfig {
        branch: config.branch(),
        ..config.experiment.model.clone()
    }
}

pub fn train_cmd(config: &RunConfig, log: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let model_config = model_config(config);
    model_config.validate()?;
    let splits = splits_for(config, &model_config, log)?;
    println!(
        "training {} on {} samples ({} positive)",
        model_config.branch,
        splits.train.len(),
        splits.train.positives()
    );
    let outcome = train(&splits.train, &model_config, &config.experiment.train, None)?;
    for e in &outcome.epochs {
        println!("epoch {} steps {} loss {:.5}", e.epoch, e.steps, e.train_loss);
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    checkpoint::save(out, &outcome.model)?;
    println!("saved checkpoint to {}", out.display());
    Ok(())
}

fn eval_split(model: &CtrModel, data: &Dataset, split: Split, base_auc: Option<f64>) -> Result<EvalReport, CliError> {
    if data.is_empty() {
        return Err(CliError::Runtime(format!("the {split} split is empty")));
    }
    Ok(evaluate(model, data, split, base_auc)?)
}

pub fn eval_cmd(
    config: &RunConfig,
    model_path: Option<&Path>,
    log: Option<&Path>,
    auc: Option<f64>,
    base_auc: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(auc) = auc {
        let base = base_auc.ok_or_else(|| CliError::Config("--auc needs --base-auc".into()))?;
        let pct = relaimpr(auc, base).map_err(|e| CliError::Config(e.to_string()))?;
        println!("relaimpr {pct:.2}% (auc {auc}, base {base})");
        return Ok(());
    }
    let path = model_path.ok_or_else(|| CliError::Config("eval needs --model or --auc".into()))?;
    let model = checkpoint::load(path)?;
    let splits = splits_for(config, &model.config, log)?;
    let reports = [
        eval_split(&model, &splits.test, Split::All, base_auc)?,
        eval_split(&model, &splits.cold, Split::Cold, None)?,
    ];
    let mut csv = config.header();
    for (k, v) in checkpoint::config_lines(&model.config) {
        writeln!(csv, "# model.{k} = {v}").unwrap();
    }
    csv.push_str(EvalReport::CSV_HEADER);
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
        match r.relaimpr_vs_base {
            Some(p) => println!(
                "{} auc {:.4} relaimpr {p:.2}% ({} samples)",
                r.split, r.auc, r.n_samples
            ),
            None => println!("{} auc {:.4} ({} samples)", r.split, r.auc, r.n_samples),
        }
    }
    if let Some(out) = out {
        write_file(out, &csv)?;
    }
    Ok(())
}

pub fn bench_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let report = run_bench(&config.bench)?;
    let header = config.header();
    write_file(out, &format!("{header}{}", report.to_csv()))?;
    write_file(&sibling(out, "plot"), &format!("{header}{}", report.to_plot_csv()))?;
    write_file(&sibling(out, "ratios"), &format!("{header}{}", report.ratios_csv()))?;
    for c in &report.cells {
        println!(
            "{:<16} N={:<5} median {:>10.1} us  tp99 {:>10.1} us",
            c.encoder.as_str(),
            c.length,
            c.median_us,
            c.tp99_us
        );
    }
    for r in report.scaling_ratios() {
        println!("{:<16} T({})/T({}) = {:.2}", r.encoder.as_str(), r.to, r.from, r.ratio);
    }
    Ok(())
}

pub fn sweep_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let n = config.synth().exposure_len;
    if let Some(&j) = config
        .sweep_levels
        .iter()
        .find(|&&j| j >= usize::BITS as usize || n >> j == 0)
    {
        return Err(CliError::Config(format!(
            "sweep level {j} needs exposure_len >= 2^{j}, got {n}"
        )));
    }
    let exp = ExperimentConfig {
        model: model_config(config),
        ..config.experiment.clone()
    };
    let splits = prepare(&exp)?;
    let mut csv = config.header();
    csv.push_str("base,level,keep,auc_all,auc_cold\n");
    for &base in &config.sweep_bases {
        for &level in &config.sweep_levels {
            let enc = config.encoder_at(base, level);
            let r = run_branch(&exp, &splits, ExposureBranch::Gama(enc.clone()))?;
            let keep = enc.kept.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
            println!("{base:<6} level {level}  auc {:.4}  cold {:.4}", r.auc_all, r.auc_cold);
            writeln!(csv, "{base},{level},{keep},{:.6},{:.6}", r.auc_all, r.auc_cold).unwrap();
        }
    }
    write_file(out, &csv)
}

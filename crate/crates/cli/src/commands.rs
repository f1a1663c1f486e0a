use std::fs;
use std::path::{Path, PathBuf};

use simlpe::data::{derive_seed, generate_synthetic_set, import_csv, read_motion, write_motion};
use simlpe::eval::format_table;
use simlpe::gradcheck::{run_gradcheck, GradcheckOptions};
use simlpe::model::{load_checkpoint, save_checkpoint, Architecture};
use simlpe::{
    evaluate, rollout, train_model, Error, EvalReport, LastFrame, LossTrace, Model, ModelConfig,
    MotionSequence, Result, Scalar, SyntheticSpec, TrainOptions, WindowSet,
};

use crate::config::{Precision, RunConfig};

/// Sub-stream indices for `derive_seed`, so one seed drives every source.
const TRAIN_DATA_STREAM: u64 = 100;
const TEST_DATA_STREAM: u64 = 200;

pub enum Outcome {
    Success,
    VerificationFailed,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn load_sequence(path: &Path, cfg: &RunConfig) -> Result<MotionSequence> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut seq = if is_csv {
        import_csv(path, cfg.synth.frame_rate, cfg.synth.num_joints)?
    } else {
        read_motion(path)?
    };
    if cfg.subsample > 1 {
        seq = seq.subsample(cfg.subsample)?;
    }
    if let Some(root) = cfg.root_joint {
        seq = seq.center_on_root(root)?;
    }
    Ok(seq)
}

fn sequences(
    cfg: &RunConfig,
    paths: &[PathBuf],
    count: usize,
    stream: u64,
    role: &str,
) -> Result<Vec<MotionSequence>> {
    if cfg.synthetic {
        let spec = SyntheticSpec {
            seed: derive_seed(cfg.seed, stream),
            ..cfg.synth.clone()
        };
        return generate_synthetic_set(&spec, count);
    }
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no {role} data: set {role}_data or pass --synthetic"
        )));
    }
    paths.iter().map(|p| load_sequence(p, cfg)).collect()
}

fn train_set(cfg: &RunConfig) -> Result<WindowSet> {
    let seqs = sequences(
        cfg,
        &cfg.train_data,
        cfg.train_sequences,
        TRAIN_DATA_STREAM,
        "train",
    )?;
    WindowSet::new(seqs, cfg.input_len, cfg.output_len, cfg.train_stride)
}

fn test_set(cfg: &RunConfig, input_len: usize) -> Result<WindowSet> {
    let seqs = sequences(
        cfg,
        &cfg.test_data,
        cfg.test_sequences,
        TEST_DATA_STREAM,
        "test",
    )?;
    let fps = seqs
        .first()
        .map(MotionSequence::frame_rate)
        .ok_or_else(|| Error::EmptyInput("no test sequences".into()))?;
    let future = simlpe::eval::rollout_frames(&cfg.horizons, fps)?;
    let set = WindowSet::new(seqs, input_len, future, cfg.eval_stride)?;
    if set.is_empty() {
        return Err(Error::Config(format!(
            "test sequences are shorter than the {} frames one evaluation window needs",
            input_len + future
        )));
    }
    Ok(set)
}

fn options(cfg: &RunConfig) -> TrainOptions {
    TrainOptions {
        schedule: cfg.schedule,
        weights: cfg.weights,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        log_every: cfg.log_every,
        ..Default::default()
    }
}

fn fit<S: Scalar>(config: ModelConfig, data: &WindowSet, cfg: &RunConfig) -> Result<Model<S>> {
    let model = Model::<S>::init(config, cfg.seed)?;
    eprintln!(
        "training {} ({} parameters) for {} steps on {} windows, {}",
        tag(&config),
        model.param_count(),
        cfg.schedule.total_steps,
        data.len(),
        S::NAME
    );
    let (model, trace) = train_model(model, data, &options(cfg))?;
    log_trace(&trace);
    Ok(model)
}

fn log_trace(trace: &LossTrace) {
    for r in &trace.records {
        eprintln!("step {:>6}  lr {:.1e}  loss {:.4}", r.step, r.lr, r.total);
    }
}

pub fn tag(config: &ModelConfig) -> String {
    match config.arch {
        Architecture::SiMlpe => format!("siMLPe-{}", config.num_blocks),
        Architecture::OneFc => "One-FC".into(),
    }
}

fn train_impl<S: Scalar>(cfg: &RunConfig) -> Result<()> {
    let data = train_set(cfg)?;
    let channels = data
        .channels()
        .ok_or_else(|| Error::EmptyInput("training data has no sequences".into()))?;
    let config = cfg.model_config(channels);
    config.validate()?;
    ensure_dir(&cfg.out)?;
    let model = Model::<S>::init(config, cfg.seed)?;
    println!("parameters: {}", model.param_count());
    let (model, trace) = train_model(model, &data, &options(cfg))?;
    log_trace(&trace);
    let ckpt = cfg.checkpoint_path();
    save_checkpoint(&model, &ckpt)?;
    let trace_path = cfg.out.join("loss_trace.csv");
    trace.write_csv(&trace_path)?;
    println!("checkpoint: {}", ckpt.display());
    println!("loss trace: {}", trace_path.display());
    Ok(())
}

fn report_files(cfg: &RunConfig, prefix: &str, reports: &[EvalReport]) -> Result<()> {
    ensure_dir(&cfg.out)?;
    for r in reports {
        let slug = r
            .model_tag
            .to_lowercase()
            .replace(|c: char| !c.is_ascii_alphanumeric(), "_");
        let path = cfg.out.join(format!("{prefix}_{slug}.csv"));
        write_text(&path, &r.to_csv())?;
        eprintln!("wrote {}", path.display());
    }
    print!("{}", format_table(reports));
    Ok(())
}

fn check_channels(config: &ModelConfig, data: &WindowSet) -> Result<()> {
    if data.channels() != Some(config.channels) {
        return Err(Error::Config(format!(
            "checkpoint expects {} channels ({} joints), test data has {:?}",
            config.channels,
            config.num_joints(),
            data.channels()
        )));
    }
    Ok(())
}

fn eval_impl<S: Scalar>(cfg: &RunConfig) -> Result<()> {
    let model = load_checkpoint::<S>(cfg.checkpoint_path())?;
    let config = *model.config();
    let data = test_set(cfg, config.input_len)?;
    check_channels(&config, &data)?;
    let last = LastFrame {
        input_len: config.input_len,
        output_len: config.output_len,
    };
    let reports = vec![
        evaluate::<S, _>(&last, &data, &cfg.horizons, "Last-Frame")?,
        evaluate(&model, &data, &cfg.horizons, &tag(&config))?,
    ];
    report_files(cfg, "eval", &reports)
}

fn baseline_impl<S: Scalar>(cfg: &RunConfig) -> Result<()> {
    let one_fc = match &cfg.checkpoint {
        Some(path) => {
            let m = load_checkpoint::<S>(path)?;
            if m.config().arch != Architecture::OneFc {
                return Err(Error::Config(format!(
                    "{} holds a {} model, not One-FC",
                    path.display(),
                    tag(m.config())
                )));
            }
            m
        }
        None => {
            let data = train_set(cfg)?;
            let channels = data
                .channels()
                .ok_or_else(|| Error::EmptyInput("training data has no sequences".into()))?;
            let config = ModelConfig::one_fc(cfg.input_len, cfg.output_len, channels);
            fit::<S>(config, &data, cfg)?
        }
    };
    let config = *one_fc.config();
    let data = test_set(cfg, config.input_len)?;
    check_channels(&config, &data)?;
    let last = LastFrame {
        input_len: config.input_len,
        output_len: config.output_len,
    };
    let reports = vec![
        evaluate::<S, _>(&last, &data, &cfg.horizons, "Last-Frame")?,
        evaluate(&one_fc, &data, &cfg.horizons, "One-FC")?,
    ];
    report_files(cfg, "baseline", &reports)
}

fn predict_impl<S: Scalar>(
    cfg: &RunConfig,
    input: &Path,
    frames: usize,
    output: &Path,
) -> Result<()> {
    let model = load_checkpoint::<S>(cfg.checkpoint_path())?;
    let config = *model.config();
    let seq = load_sequence(input, cfg)?;
    if seq.channels() != config.channels {
        return Err(Error::Config(format!(
            "checkpoint expects {} joints, {} has {}",
            config.num_joints(),
            input.display(),
            seq.num_joints()
        )));
    }
    if seq.num_frames() < config.input_len {
        return Err(Error::Config(format!(
            "{} has {} frames; the model needs at least {} observed frames",
            input.display(),
            seq.num_frames(),
            config.input_len
        )));
    }
    if frames == 0 {
        return Err(Error::Config("--frames must be at least 1".into()));
    }
    let x = seq.window::<S>(seq.num_frames() - config.input_len, config.input_len)?;
    let pred = rollout(&model, &x, frames)?;
    let out = MotionSequence::from_matrix(seq.frame_rate(), &pred)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_motion(&out, output)?;
    println!("wrote {} frames to {}", out.num_frames(), output.display());
    Ok(())
}

macro_rules! dispatch {
    ($cfg:expr, $f:ident $(, $arg:expr)*) => {
        match $cfg.precision {
            Precision::F32 => $f::<f32>($cfg $(, $arg)*),
            Precision::F64 => $f::<f64>($cfg $(, $arg)*),
        }
    };
}

pub fn train(cfg: &RunConfig) -> Result<Outcome> {
    dispatch!(cfg, train_impl).map(|()| Outcome::Success)
}

pub fn eval(cfg: &RunConfig) -> Result<Outcome> {
    dispatch!(cfg, eval_impl).map(|()| Outcome::Success)
}

pub fn baseline(cfg: &RunConfig) -> Result<Outcome> {
    dispatch!(cfg, baseline_impl).map(|()| Outcome::Success)
}

pub fn predict(
    cfg: &RunConfig,
    input: &Path,
    frames: usize,
    output: Option<&Path>,
) -> Result<Outcome> {
    let default = cfg.out.join("prediction.motn");
    let output = output.unwrap_or(&default);
    dispatch!(cfg, predict_impl, input, frames, output).map(|()| Outcome::Success)
}

pub fn gradcheck(opts: &GradcheckOptions) -> Result<Outcome> {
    let report = run_gradcheck(opts)?;
    print!("{}", report.render());
    if report.passed() {
        println!("all components below {:.0e}", report.tolerance);
        Ok(Outcome::Success)
    } else {
        println!("gradient check FAILED (tolerance {:.0e})", report.tolerance);
        Ok(Outcome::VerificationFailed)
    }
}

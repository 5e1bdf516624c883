use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use ebim::attack::{self, AttackConfig, AttackGoal, AttackReport, EntropyParams};
use ebim::dataset::{shapes, Dataset};
use ebim::image::{contrast_maximized_difference, norms, GrayscaleMode, Norms};
use ebim::maps::{self, Phi};
use ebim::model::{load_weights, save_weights, train as sgd, TrainConfig};
use ebim::pnm::{load_image, save_image};
use ebim::stats::{read_jsonl, run_hypothesis_battery, summarize, Battery, BatteryRow, ParticipantSummary};
use ebim::{reference, Model, Prediction};
use ebim_study::{Study, StudyConfig};
use serde::Serialize;

use crate::manifest::{write_json, RunManifest};
use crate::{
    AttackArgs, CliError, CompareArgs, EntropyArgs, EntropyMapArgs, GrayscaleArg, MethodArg,
    PerlinArgs, ServeArgs, StatsArgs, TrainArgs,
};

type Result<T, E = CliError> = std::result::Result<T, E>;

fn require(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}

fn report_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

impl EntropyArgs {
    fn params(&self) -> EntropyParams {
        EntropyParams {
            radius: self.entropy_radius,
            bins: self.entropy_bins,
            phi: match self.gamma {
                Some(gamma) => Phi::NormalizeGamma { gamma },
                None => Phi::Binarize {
                    threshold: self.entropy_threshold,
                },
            },
            grayscale: match self.grayscale {
                GrayscaleArg::Mean => GrayscaleMode::Mean,
                GrayscaleArg::Luminance => GrayscaleMode::Luminance,
            },
        }
    }
}

#[derive(Serialize)]
struct TrainReport {
    architecture: String,
    parameters: usize,
    train_samples: usize,
    test_samples: usize,
    train_accuracy: f64,
    test_accuracy: Option<f64>,
    epoch_losses: Vec<f64>,
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let seed = (a.seed.seed.is_some() || a.seed.random_seed).then(|| a.seed.resolve());
    let (init, shuffle, data_seed, test_seed) = match seed {
        Some(s) => (s, s, s, s.wrapping_add(1)),
        None => (
            reference::INIT_SEED,
            reference::train_config().seed,
            reference::TRAIN_SEED,
            reference::TEST_SEED,
        ),
    };
    let data = match &a.data {
        Some(dir) => Dataset::load_dir(require(dir)?)?,
        None => shapes(a.per_class, data_seed),
    };
    let test = match (&a.test_data, &a.data) {
        (Some(dir), _) => Some(Dataset::load_dir(require(dir)?)?),
        (None, None) => Some(shapes(reference::TEST_PER_CLASS, test_seed)),
        (None, Some(_)) => None,
    };
    let model = Model::reference(data.shape(), data.classes(), init)?;
    let config = TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        batch_size: a.batch_size,
        seed: shuffle,
    };
    let trained = sgd(&model, &data, test.as_ref(), &config)?;
    save_weights(&trained.model, &a.out)?;

    let report = TrainReport {
        architecture: trained.model.to_string(),
        parameters: trained.model.parameter_count(),
        train_samples: data.len(),
        test_samples: test.as_ref().map_or(0, Dataset::len),
        train_accuracy: trained.train_accuracy,
        test_accuracy: trained.test_accuracy,
        epoch_losses: trained.epoch_losses.clone(),
    };
    let report_file = report_path(&a.out);
    write_json(&report_file, &report)?;
    println!(
        "trained {} parameters for {} epochs: train accuracy {:.4}, test accuracy {}",
        report.parameters,
        a.epochs,
        report.train_accuracy,
        report.test_accuracy.map_or("n/a".into(), |t| format!("{t:.4}"))
    );

    let mut manifest = RunManifest::new("train", a)?;
    if let Some(s) = seed {
        manifest = manifest.seed(s);
    }
    manifest.output(&a.out)?.output(&report_file)?.write_beside(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct AttackCommandReport {
    #[serde(flatten)]
    attack: AttackReport,
    image: PathBuf,
    adversarial: PathBuf,
}

pub fn attack(a: &AttackArgs) -> Result<()> {
    let model = load_weights(require(&a.weights)?)?;
    let x = load_image(require(&a.image)?)?;
    let cfg = AttackConfig {
        goal: match a.target_label {
            Some(label) => AttackGoal::Targeted { label },
            None => AttackGoal::Untargeted,
        },
        certainty_threshold: a.certainty,
        stepsize: a.stepsize,
        max_iterations: a.max_iter,
        linf_budget: a.linf_budget,
    };
    let result = match a.method {
        MethodArg::Fgsm => {
            if a.target_label.is_some() {
                return Err(CliError::Usage("FGSM is untargeted; drop --target-label".into()));
            }
            attack::fgsm(&model, &x, a.epsilon)?
        }
        MethodArg::Bim => attack::bim(&model, &x, &cfg)?,
        MethodArg::Ebim => attack::ebim(&model, &x, &cfg, &a.entropy.params())?,
        MethodArg::Localized => {
            let path = a
                .map
                .as_ref()
                .ok_or_else(|| CliError::Usage("--method localized needs --map".into()))?;
            let map = maps::load_map(require(path)?)?.into_strength_map()?;
            attack::localized_bim(&model, &x, &cfg, &map)?
        }
    };
    save_image(&result.adversarial, &a.out)?;
    let report = result.report();
    let report_file = a.report.clone().unwrap_or_else(|| report_path(&a.out));
    write_json(
        &report_file,
        &AttackCommandReport {
            attack: report.clone(),
            image: a.image.clone(),
            adversarial: a.out.clone(),
        },
    )?;
    println!(
        "{:?}: {} after {} iterations; label {} ({:.4}) -> {} ({:.4}); kappa {:.4}; linf {:.4}, l2 {:.4}, l0 {}",
        report.method,
        if report.success { "success" } else { "goal not reached" },
        report.iterations_used,
        report.original_label,
        report.original_certainty,
        report.final_label,
        report.final_certainty,
        report.kappa,
        report.norms.linf,
        report.norms.l2,
        report.norms.l0,
    );

    let mut manifest = RunManifest::new("attack", a)?.input(&a.weights)?.input(&a.image)?;
    if let (MethodArg::Localized, Some(map)) = (a.method, &a.map) {
        manifest = manifest.input(map)?;
    }
    manifest.output(&a.out)?.output(&report_file)?.write_beside(&a.out)?;
    Ok(())
}

pub fn entropy_map(a: &EntropyMapArgs) -> Result<()> {
    let x = load_image(require(&a.image)?)?;
    let params = a.entropy.params();
    let s = maps::local_entropy(&x.to_grayscale_with(params.grayscale), params.radius, params.bins)?;
    let e = maps::phi(&s, params.phi)?;
    maps::save_map(&e, &a.out)?;
    let mut manifest = RunManifest::new("entropy-map", a)?.input(&a.image)?.output(&a.out)?;
    if let Some(p) = &a.entropy_out {
        maps::save_map(&s, p)?;
        manifest = manifest.output(p)?;
    }
    if let Some(p) = &a.pgm {
        save_image(&maps::entropy_to_pgm(&s), p)?;
        manifest = manifest.output(p)?;
    }
    if let Some(p) = &a.strength_pgm {
        save_image(&maps::strength_to_pgm(&e), p)?;
        manifest = manifest.output(p)?;
    }
    println!(
        "local entropy max {:.4} bits (attainable {:.4}); kappa {:.4}",
        s.max(),
        s.attainable_max(),
        e.kappa()
    );
    manifest.write_beside(&a.out)?;
    Ok(())
}

pub fn perlin(a: &PerlinArgs) -> Result<()> {
    let seed = a.seed.resolve();
    let noise = maps::perlin_map(a.width, a.height, a.cell, a.octaves, seed)?;
    let map = match a.kappa {
        Some(k) if a.binary => maps::binarize_to_kappa(&noise, k, a.kappa_tolerance)?,
        Some(k) => maps::adjust_to_kappa(&noise, k, a.kappa_tolerance)?,
        None => noise,
    };
    maps::save_map(&map, &a.out)?;
    let mut manifest = RunManifest::new("perlin", a)?.seed(seed).output(&a.out)?;
    if let Some(p) = &a.pgm {
        save_image(&maps::strength_to_pgm(&map), p)?;
        manifest = manifest.output(p)?;
    }
    println!("perlin map {}x{}, seed {seed}, kappa {:.4}", a.width, a.height, map.kappa());
    manifest.write_beside(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct PredictionSummary {
    label: usize,
    certainty: f64,
}

impl From<Prediction> for PredictionSummary {
    fn from(p: Prediction) -> Self {
        Self {
            label: p.label,
            certainty: p.certainty,
        }
    }
}

#[derive(Serialize)]
struct CompareReport {
    original: PathBuf,
    modified: PathBuf,
    norms: Norms,
    original_prediction: Option<PredictionSummary>,
    modified_prediction: Option<PredictionSummary>,
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let x = load_image(require(&a.original)?)?;
    let y = load_image(require(&a.modified)?)?;
    let n = norms(&x, &y)?;
    let (before, after) = match &a.weights {
        Some(w) => {
            let m = load_weights(require(w)?)?;
            (Some(m.forward(&x)?.into()), Some(m.forward(&y)?.into()))
        }
        None => (None, None),
    };
    write_json(
        &a.out,
        &CompareReport {
            original: a.original.clone(),
            modified: a.modified.clone(),
            norms: n,
            original_prediction: before,
            modified_prediction: after,
        },
    )?;
    let mut manifest = RunManifest::new("compare", a)?.input(&a.original)?.input(&a.modified)?;
    if let Some(w) = &a.weights {
        manifest = manifest.input(w)?;
    }
    manifest = manifest.output(&a.out)?;
    if let Some(p) = &a.diff {
        save_image(&contrast_maximized_difference(&x, &y)?, p)?;
        manifest = manifest.output(p)?;
    }
    println!("linf {:.6}, l2 {:.6}, l0 {}", n.linf, n.l2, n.l0);
    manifest.write_beside(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct StatsReport {
    responses: usize,
    participants: Vec<ParticipantSummary>,
    results: Vec<BatteryRow>,
    battery: Battery,
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let path = require(&a.responses)?;
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let records = read_jsonl(BufReader::new(file))?;
    let participants = summarize(&records)?;
    let battery = run_hypothesis_battery(&participants, a.alpha)?;
    print!("{}", battery.render_table());
    write_json(
        &a.out,
        &StatsReport {
            responses: records.len(),
            participants,
            results: battery.rows(),
            battery,
        },
    )?;
    RunManifest::new("stats", a)?
        .input(&a.responses)?
        .output(&a.out)?
        .write_beside(&a.out)?;
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let config = StudyConfig::load(require(&a.study)?)?;
    let trials = config.trial_count();
    let study = Study::open(config, &a.responses)?;
    RunManifest::new("serve", a)?
        .input(&a.study)?
        .write_beside(&a.responses)?;
    let addr = format!("{}:{}", a.host, a.port);
    let io = |source| CliError::Io {
        path: PathBuf::from(&addr),
        source,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(io)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(io)?;
        println!(
            "serving {trials} trials per session on http://{}",
            listener.local_addr().map_err(io)?
        );
        ebim_study::serve(listener, study).await.map_err(io)
    })
}

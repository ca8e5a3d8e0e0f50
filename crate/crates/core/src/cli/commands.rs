use std::path::Path;
use std::time::Instant;

use rand::seq::IndexedRandom;
use serde_json::json;
use split_ensemble::cluster::{cluster_features, ClusterAssignment};
use split_ensemble::config::{ClusterMode, RunConfig};
use split_ensemble::data::{
    gen_toy, load_cluster_spec, load_dataset, write_cluster_spec, write_dataset, Dataset, FoldManifest,
    StandardizationStats, ToyKind, ToySpec,
};
use split_ensemble::ensemble::{ClusterPredictive, Ensemble, EnsembleConfig, EnsemblePrediction};
use split_ensemble::eval::{
    calibration_curve, entropy_analysis, write_calibration_csv, write_density_csv, write_entropy_csv,
    CalibrationCurve, CrossFoldSummary, EvaluationReport, ShiftSpec, DEFAULT_LEVELS,
};
use split_ensemble::plot::{LineChart, Series};
use split_ensemble::protocol::{run_depc_fold, run_fold, ClusterSource};
use split_ensemble::rng::keyed_rng;
use split_ensemble::{Error, Result};

use super::rundir::RunDir;
use super::{cluster_flags, toy_flags, train_flags, CheckpointArgs, Cli, ClusterArgs, OodArgs, ToyArgs, TrainArgs};

const OOD_STREAM: u64 = 0x00d_5e1ec7;

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => super::rundir::io_err(path, io),
        other => Error::Numerical(format!("{}: {other:?}", path.display())),
    }
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| super::rundir::io_err(path, e))
}

fn load_config_data(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg.data_path();
    if !path.exists() {
        return Err(Error::Dataset {
            name: cfg.dataset.clone(),
            message: format!("data file {} not found", path.display()),
        });
    }
    load_dataset(&path, &cfg.dataset, cfg.target.as_deref())
}

fn load_eval_data(path: &Path, target: Option<&str>) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::Dataset {
            name: path.display().to_string(),
            message: "data file not found".into(),
        });
    }
    let name = path.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
    load_dataset(path, &name, target)
}

fn load_checkpoint(args: &CheckpointArgs) -> Result<(Ensemble, Dataset)> {
    let ensemble = Ensemble::load(&args.checkpoint)?;
    let data = load_eval_data(&args.data, args.target.as_deref())?;
    if data.d() != ensemble.d() {
        return Err(Error::Dataset {
            name: data.name.clone(),
            message: format!("{} features but the checkpoint expects {}", data.d(), ensemble.d()),
        });
    }
    Ok((ensemble, data))
}

fn cluster_source(cfg: &RunConfig, data: &Dataset) -> Result<ClusterSource> {
    Ok(match &cfg.clusters {
        ClusterMode::Hierarchical => ClusterSource::Hierarchical {
            threshold: cfg.threshold,
            transform: cfg.distance,
        },
        ClusterMode::Spec(path) => ClusterSource::Fixed {
            assignment: load_cluster_spec(path, data, true)?,
        },
        ClusterMode::Singletons => ClusterSource::Singletons,
        ClusterMode::Unified => ClusterSource::Unified,
    })
}

fn format_clusters(assignment: &ClusterAssignment, names: &[String]) -> String {
    assignment
        .named(names)
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cluster(cli: &Cli, args: &ClusterArgs, run: &mut RunDir) -> Result<()> {
    let cfg = cli.resolve(args.data.dataset.as_deref(), args.data.data.as_deref(), cluster_flags(args))?;
    run.set("config", &cfg);
    let data = load_config_data(&cfg)?;
    let (dendrogram, assignment) = cluster_features(&data.x, &data.feature_names, cfg.distance, cfg.threshold, false)?;
    let spec = run.file("clusters.txt")?;
    write_cluster_spec(&spec, &assignment, &data)?;
    run.write_json(
        "dendrogram.json",
        &json!({
            "feature_names": data.feature_names,
            "distance": cfg.distance,
            "threshold": cfg.threshold,
            "cut_distance": cfg.threshold * dendrogram.max_distance(),
            "leaves": dendrogram.leaves,
            "merges": dendrogram.merges,
        }),
    )?;
    println!(
        "{}: k = {} at threshold {} ({})",
        data.name,
        assignment.k(),
        cfg.threshold,
        cfg.distance
    );
    println!("{}", format_clusters(&assignment, &data.feature_names));
    Ok(())
}

fn curve_rows(ensemble: &Ensemble) -> Vec<Vec<String>> {
    ensemble
        .members
        .iter()
        .flat_map(|m| {
            m.curve
                .iter()
                .enumerate()
                .map(move |(e, l)| vec![m.member.to_string(), (e + 1).to_string(), l.to_string()])
        })
        .collect()
}

pub fn train(cli: &Cli, args: &TrainArgs, run: &mut RunDir) -> Result<()> {
    let cfg = cli.resolve(args.data.dataset.as_deref(), args.data.data.as_deref(), train_flags(args))?;
    run.set("config", &cfg);
    let data = load_config_data(&cfg)?;
    let source = cluster_source(&cfg, &data)?;
    let folds = FoldManifest::new(data.n(), cfg.folds, cfg.test_fraction, cfg.seed)?;
    let folds_path = run.file("folds.json")?;
    folds.save(&folds_path)?;
    let ens_cfg = cfg.ensemble(cli.parallel());
    let depc_cfg = EnsembleConfig {
        parallel: cli.parallel(),
        ..EnsembleConfig::depc(cfg.seed)
    };
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut depc_reports = Vec::new();
    for split in folds.folds.iter().take(cfg.fold_count()) {
        let f = split.fold;
        let at_fold = |e: Error| match e {
            Error::Diverged { .. } | Error::NonFiniteLoss { .. } | Error::NonFiniteGradient { .. } => {
                Error::Numerical(format!("fold {f}: {e}"))
            }
            other => other,
        };
        let fr = run_fold(&data, split, &source, &ens_cfg).map_err(at_fold)?;
        let dir = format!("fold_{f:02}");
        let ens_dir = run.file(&format!("{dir}/ensemble/manifest.json"))?;
        fr.ensemble.save(ens_dir.parent().expect("nested path"))?;
        fr.report.save_json(&run.file(&format!("{dir}/report.json"))?)?;
        write_csv(
            &run.file(&format!("{dir}/curves.csv"))?,
            &["member".into(), "epoch".into(), "train_nll".into()],
            curve_rows(&fr.ensemble),
        )?;
        write_dataset(&run.file(&format!("{dir}/test.csv"))?, &data.subset(&split.test))?;
        write_cluster_spec(&run.file(&format!("{dir}/clusters.txt"))?, fr.assignment(), &data)?;
        let mut line = format!(
            "fold {f:2} k={} rmse {:.3} nll {:.3}",
            fr.assignment().k(),
            fr.report.rmse,
            fr.report.mean_cluster_nll
        );
        if cfg.depc {
            let dr = run_depc_fold(&data, split, fr.assignment(), &depc_cfg).map_err(at_fold)?;
            dr.report.save_json(&run.file(&format!("{dir}/report_depc.json"))?)?;
            line += &format!(" | depc rmse {:.3} nll {:.3}", dr.report.rmse, dr.report.mean_cluster_nll);
            depc_reports.push(dr.report);
        }
        println!("{line}  [{:.1}s]", start.elapsed().as_secs_f64());
        reports.push(fr.report);
    }
    let summary = CrossFoldSummary::new(&reports)?;
    println!("RMSE {}", summary.rmse);
    println!("NLL  {}", summary.mean_cluster_nll);
    let depc_summary = if depc_reports.is_empty() {
        None
    } else {
        let s = CrossFoldSummary::new(&depc_reports)?;
        println!("DEPC RMSE {}", s.rmse);
        println!("DEPC NLL  {}", s.mean_cluster_nll);
        Some(s)
    };
    run.write_json("summary.json", &json!({ "split_ensemble": summary, "depc": depc_summary }))?;
    Ok(())
}

fn prediction_rows(preds: &[EnsemblePrediction], targets: &[f64]) -> Vec<Vec<String>> {
    preds
        .iter()
        .zip(targets)
        .map(|(p, y)| {
            let mut r = vec![y.to_string(), p.mean.to_string()];
            r.extend(p.variances.iter().map(|v| v.to_string()));
            r
        })
        .collect()
}

fn cluster_header(first: &[&str], prefix: &str, k: usize) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain((0..k).map(|i| format!("{prefix}{i}")))
        .collect()
}

pub fn eval(_cli: &Cli, args: &CheckpointArgs, run: &mut RunDir) -> Result<()> {
    run.set("inputs", json!({ "checkpoint": args.checkpoint, "data": args.data, "target": args.target }));
    let (ensemble, data) = load_checkpoint(args)?;
    let preds = ensemble.predict_batch(&data.x)?;
    let report = EvaluationReport::new(&preds, &data.y, None)?;
    report.save_json(&run.file("report.json")?)?;
    write_csv(
        &run.file("predictions.csv")?,
        &cluster_header(&["target", "mean"], "variance_", ensemble.k()),
        prediction_rows(&preds, &data.y),
    )?;
    println!("n = {}  RMSE {:.4}", report.n_test, report.rmse);
    for (i, nll) in report.cluster_nll.iter().enumerate() {
        println!("cluster {i} NLL {nll:.4}");
    }
    println!("mean cluster NLL {:.4}", report.mean_cluster_nll);
    Ok(())
}

fn calibration_chart(curves: &[CalibrationCurve]) -> LineChart {
    let mut chart = LineChart::new("Calibration", "interval level", "observed fraction");
    chart.x_range = Some((0.0, 1.0));
    chart.y_range = Some((0.0, 1.0));
    for c in curves {
        chart = chart.with_series(Series::new(format!("cluster {}", c.cluster), c.points.clone()));
    }
    chart.with_series(Series::new("ideal", vec![(0.0, 0.0), (1.0, 1.0)]).dashed())
}

pub fn calibrate(_cli: &Cli, args: &CheckpointArgs, run: &mut RunDir) -> Result<()> {
    run.set("inputs", json!({ "checkpoint": args.checkpoint, "data": args.data, "target": args.target }));
    let (ensemble, data) = load_checkpoint(args)?;
    let preds = ensemble.predict_batch(&data.x)?;
    let curves = calibration_curve(&preds, &data.y, &DEFAULT_LEVELS)?;
    write_calibration_csv(&run.file("calibration.csv")?, &curves)?;
    calibration_chart(&curves).save(&run.file("calibration.svg")?)?;
    for c in &curves {
        let pts: Vec<String> = c.points.iter().map(|(_, o)| format!("{o:.2}")).collect();
        println!(
            "cluster {}: {}  (max deviation {:.3})",
            c.cluster,
            pts.join(" "),
            c.max_deviation()
        );
    }
    Ok(())
}

fn feature_index(data: &Dataset, key: &str) -> Result<usize> {
    data.feature_index(key)
        .or_else(|| key.parse::<usize>().ok().filter(|&i| i < data.d()))
        .ok_or_else(|| Error::Config(format!("unknown feature '{key}'")))
}

/// One feature from each of two distinct clusters, chosen with the seed.
fn random_features(assignment: &ClusterAssignment, seed: u64) -> Result<[usize; 2]> {
    if assignment.k() < 2 {
        return Err(Error::Config("shift analysis needs at least two clusters".into()));
    }
    let mut rng = keyed_rng(seed, &[OOD_STREAM]);
    let ids: Vec<usize> = (0..assignment.k()).collect();
    let pick: Vec<usize> = ids.choose_multiple(&mut rng, 2).copied().collect();
    let f = |c: usize, rng: &mut _| *assignment.cluster(c).choose(rng).expect("clusters are non-empty");
    Ok([f(pick[0], &mut rng), f(pick[1], &mut rng)])
}

pub fn ood(cli: &Cli, args: &OodArgs, run: &mut RunDir) -> Result<()> {
    let seed = cli.plain_seed()?;
    let (ensemble, data) = load_checkpoint(&args.input)?;
    let features = match args.features.len() {
        0 => random_features(&ensemble.assignment, seed)?,
        2 => [
            feature_index(&data, &args.features[0])?,
            feature_index(&data, &args.features[1])?,
        ],
        n => return Err(Error::Config(format!("--features needs exactly two features, got {n}"))),
    };
    let spec = |f: usize, stream: u64| ShiftSpec {
        noise_mean: args.noise_mean,
        noise_std: args.noise_std,
        ..ShiftSpec::new(vec![f], split_ensemble::rng::derive_seed(seed, &[OOD_STREAM, stream]))
    };
    let (s1, s2) = (spec(features[0], 1), spec(features[1], 2));
    let names = [&data.feature_names[features[0]], &data.feature_names[features[1]]];
    run.set(
        "inputs",
        json!({
            "checkpoint": args.input.checkpoint, "data": args.input.data, "target": args.input.target,
            "seed": seed, "features": names, "noise_mean": args.noise_mean, "noise_std": args.noise_std,
        }),
    );
    let x = ensemble.stats.transform_x(&data.x)?;
    let report = entropy_analysis(&ensemble, &x, &s1, &s2)?;
    write_entropy_csv(&run.file("entropy.csv")?, &report)?;
    write_density_csv(&run.file("density.csv")?, &report)?;
    for i in 0..report.k {
        let mut chart = LineChart::new(format!("Cluster {i} entropy"), "entropy (nats)", "density");
        for d in report.densities.iter().filter(|d| d.cluster == i) {
            let s = Series::new(d.condition.clone(), d.points.clone());
            chart = chart.with_series(if d.condition == "in" { s } else { s.dashed() });
        }
        chart.save(&run.file(&format!("density_cluster{i}.svg"))?)?;
    }
    let mean_of = |name: &str| report.condition(name).map(|c| c.mean.clone()).unwrap_or_default();
    let deltas = json!({
        "features": names,
        "feature_clusters": features.iter().map(|&f| ensemble.assignment.cluster_of(f)).collect::<Vec<_>>(),
        "mean_entropy": { "in": mean_of("in"), "ood1": mean_of("ood1"), "ood2": mean_of("ood2") },
        "delta": { "ood1": report.deltas("ood1"), "ood2": report.deltas("ood2") },
    });
    run.write_json("deltas.json", &deltas)?;
    println!("ood1 shifts {} (cluster {:?})", names[0], ensemble.assignment.cluster_of(features[0]));
    println!("ood2 shifts {} (cluster {:?})", names[1], ensemble.assignment.cluster_of(features[1]));
    println!("cluster    in      Δood1   Δood2");
    let (d1, d2) = (report.deltas("ood1").unwrap_or_default(), report.deltas("ood2").unwrap_or_default());
    for (i, m) in mean_of("in").iter().enumerate() {
        println!("{i:7} {m:7.3} {:+7.3} {:+7.3}", d1[i], d2[i]);
    }
    Ok(())
}

pub fn toy(cli: &Cli, args: &ToyArgs, run: &mut RunDir) -> Result<()> {
    let kind: ToyKind = args.kind.parse()?;
    let cfg = cli.resolve(Some(kind.name()), None, toy_flags(args))?;
    let spec = ToySpec::new(kind).with_noise(args.noise).with_n(args.n.unwrap_or(kind.default_n()));
    run.set("config", &cfg);
    run.set("toy", &spec);
    let data = gen_toy(&spec, cfg.seed)?;
    write_dataset(&run.file("train.csv")?, &data)?;
    let d = data.d();
    let assignment = match &cfg.clusters {
        ClusterMode::Singletons => ClusterAssignment::singletons(d),
        ClusterMode::Unified => ClusterAssignment::unified(d),
        ClusterMode::Spec(path) => load_cluster_spec(path, &data, true)?,
        ClusterMode::Hierarchical => cluster_features(&data.x, &data.feature_names, cfg.distance, cfg.threshold, false)?.1,
    };
    let stats = StandardizationStats::fit(&data)?;
    let ensemble = Ensemble::train(&stats.transform(&data)?, &assignment, &stats, &cfg.ensemble(cli.parallel()))?;
    let ens_dir = run.file("ensemble/manifest.json")?;
    ensemble.save(ens_dir.parent().expect("nested path"))?;
    write_csv(
        &run.file("curves.csv")?,
        &["member".into(), "epoch".into(), "train_nll".into()],
        curve_rows(&ensemble),
    )?;

    // each input swept over [-6, 6] with the others held at 1
    let grid: Vec<f64> = (0..=120).map(|i| -6.0 + 0.1 * i as f64).collect();
    let mut rows = Vec::new();
    for j in 0..d {
        let c = assignment.cluster_of(j).expect("exhaustive assignment");
        let mut mean = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut truth = Vec::new();
        for &t in &grid {
            let mut x = vec![1.0; d];
            x[j] = t;
            let p = ensemble.predict(&x)?;
            let y_true = t.powi(kind.power());
            let sd = p.cluster_variance(c).sqrt();
            mean.push((t, p.mean));
            lo.push((t, p.mean - 3.0 * sd));
            hi.push((t, p.mean + 3.0 * sd));
            truth.push((t, y_true));
            let mut r = vec![data.feature_names[j].clone(), t.to_string(), y_true.to_string(), p.mean.to_string()];
            r.extend(p.variances.iter().map(|v| v.sqrt().to_string()));
            rows.push(r);
        }
        let name = &data.feature_names[j];
        let mut chart = LineChart::new(format!("{} along {name}", kind.name()), name.as_str(), "y")
            .with_series(Series::new("mean", mean))
            .with_series(Series::new("mean - 3 sd", lo).dashed())
            .with_series(Series::new("mean + 3 sd", hi).dashed())
            .with_series(Series::new("truth", truth).dashed());
        chart.x_range = Some((-6.0, 6.0));
        chart.save(&run.file(&format!("toy_{name}.svg"))?)?;
    }
    write_csv(
        &run.file("grid.csv")?,
        &cluster_header(&["input", "x", "truth", "mean"], "sd_", ensemble.k()),
        rows,
    )?;
    let first: f64 = ensemble.members.iter().filter_map(|m| m.curve.first()).sum::<f64>() / ensemble.members.len() as f64;
    let last: f64 = ensemble.members.iter().filter_map(|m| m.curve.last()).sum::<f64>() / ensemble.members.len() as f64;
    println!(
        "{}: n = {}, k = {}, mean training NLL {first:.3} -> {last:.3}",
        kind.name(),
        data.n(),
        ensemble.k()
    );
    Ok(())
}

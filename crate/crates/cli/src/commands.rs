use std::collections::HashMap;
use std::path::{Path, PathBuf};

use czforge::annotations::{dataset_stats, filter_records, parse_cvat_xml, parse_dataset_config, serialize_yolo_label, Split};
use czforge::augment::{apply_pipeline, parse_pipeline, preset, AugmentPipeline};
use czforge::dataset::{self, labels_dir_for, load_flat, prepare_output, split_dirs, write_flat, write_split, StoredRecord};
use czforge::error::{Error, Result};
use czforge::eval::{evaluate, load_prediction_dir, EvalConfig};
use czforge::exec;
use czforge::imaging::{load_image, save_image};
use czforge::splitter::{assign_splits, partition, SplitSpec};
use czforge::synthgen::{generate_dataset, SceneDistribution};
use czforge::{ClassRegistry, DatasetConfig, Workers};

use crate::{Command, DriftArgs, OutArgs};

pub fn run(cmd: Command, workers: Workers) -> Result<()> {
    match cmd {
        Command::Gen {
            out,
            count,
            seed,
            width,
            height,
            drift,
        } => {
            let drift = load_drift(&drift, false)?;
            let dist = SceneDistribution {
                width,
                height,
                ..SceneDistribution::default()
            };
            dist.validate()?;
            prepare(&out, &[])?;
            let m = generate_dataset(&out.out, count, &dist, drift.as_ref(), seed, workers)?;
            let omitted: usize = m.images.iter().map(|i| i.omitted).sum();
            println!(
                "generated {} scenes into {} (cone {}, barrier {}, beacon {}; {omitted} obstacles omitted)",
                m.count,
                out.out.display(),
                m.class_counts[0],
                m.class_counts[1],
                m.class_counts[2]
            );
            Ok(())
        }
        Command::Augment {
            input,
            out,
            drift,
            seed,
            config,
        } => {
            let mut pipeline = load_drift(&drift, true)?.expect("required pipeline");
            if let Some(s) = seed {
                pipeline = pipeline.with_seed(s);
            }
            let registry = registry(config.as_deref())?;
            let records = load_flat(&input, &registry, workers)?;
            prepare(&out, &[&input])?;
            augment(&records, &pipeline, &out.out, workers)?;
            println!("augmented {} images into {}", records.len(), out.out.display());
            Ok(())
        }
        Command::Split {
            input,
            out,
            ratios,
            seed,
            config,
            dry_run,
        } => {
            let spec = SplitSpec::new(SplitSpec::parse_ratios(&ratios)?, seed)?;
            let registry = registry(config.as_deref())?;
            let stored = load_flat(&input, &registry, workers)?;
            let records: Vec<_> = stored.iter().map(|s| s.record.clone()).collect();
            let (assignment, report) = assign_splits(&records, &spec, &registry)?;
            prepare(&out, &[&input])?;
            let parts = partition(stored, &assignment);
            if dry_run {
                std::fs::create_dir_all(&out.out).map_err(|e| Error::io(&out.out, e))?;
                for (split, recs) in parts.iter() {
                    let list: String = recs.iter().map(|r| format!("{}\n", r.image_path.display())).collect();
                    write_text(&out.out.join(format!("{split}.txt")), &list)?;
                }
            } else {
                write_split(&out.out, &parts, &registry, workers)?;
            }
            write_text(&out.out.join("split_report.json"), &report.to_json())?;
            print!("{}", report.to_table());
            Ok(())
        }
        Command::Convert {
            cvat,
            images,
            out,
            config,
        } => {
            let registry = registry(config.as_deref())?;
            let text = std::fs::read_to_string(&cvat).map_err(|e| Error::io(&cvat, e))?;
            let records = parse_cvat_xml(&text, &registry).map_err(|e| Error::in_file(&cvat, e))?;
            let mut inputs: Vec<&Path> = vec![&cvat];
            if let Some(d) = &images {
                inputs.push(d);
            }
            prepare(&out, &inputs)?;
            match &images {
                Some(dir) => {
                    let by_stem = image_index(dir)?;
                    let stored = records
                        .into_iter()
                        .map(|record| {
                            let image_path = by_stem.get(&record.image_id).cloned().ok_or_else(|| {
                                Error::in_file(&cvat, Error::Dataset(format!("no image for `{}` in {}", record.image_id, dir.display())))
                            })?;
                            Ok(StoredRecord { record, image_path })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    write_flat(&out.out, &stored, workers)?;
                    println!("converted {} images into {}", stored.len(), out.out.display());
                }
                None => {
                    let labels = out.out.join("labels");
                    std::fs::create_dir_all(&labels).map_err(|e| Error::io(&labels, e))?;
                    for r in &records {
                        write_text(&labels.join(format!("{}.txt", r.image_id)), &serialize_yolo_label(&r.annotations))?;
                    }
                    println!("converted {} label files into {}", records.len(), labels.display());
                }
            }
            Ok(())
        }
        Command::Filter {
            input,
            out,
            max_area,
            config,
        } => {
            let registry = registry(config.as_deref())?;
            let stored = load_flat(&input, &registry, workers)?;
            let mut paths: HashMap<String, PathBuf> =
                stored.iter().map(|s| (s.record.image_id.clone(), s.image_path.clone())).collect();
            let outcome = filter_records(stored.into_iter().map(|s| s.record).collect(), max_area)?;
            prepare(&out, &[&input])?;
            let kept: Vec<StoredRecord> = outcome
                .kept
                .into_iter()
                .map(|record| {
                    let image_path = paths.remove(&record.image_id).expect("known image");
                    StoredRecord { record, image_path }
                })
                .collect();
            write_flat(&out.out, &kept, workers)?;
            let mut log = String::new();
            for (rec, reason) in &outcome.removed {
                let mut v = serde_json::to_value(reason).expect("reason serializes");
                v["image_id"] = rec.image_id.clone().into();
                log.push_str(&v.to_string());
                log.push('\n');
            }
            write_text(&out.out.join("removed.jsonl"), &log)?;
            println!("kept {}, removed {}", kept.len(), outcome.removed.len());
            Ok(())
        }
        Command::Stats { config, json } => {
            let (cfg, splits) = dataset::load_config_dataset(&config, workers)?;
            let records = splits.map(|_, v| v.iter().map(|s| s.record.clone()).collect());
            let stats = dataset_stats(&records, &cfg.classes);
            if json {
                println!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
            } else {
                print!("{}", stats.to_table());
            }
            Ok(())
        }
        Command::Eval {
            config,
            split,
            pred,
            out,
            conf,
            iou,
        } => {
            let split: Split = split.parse()?;
            let cfg = read_config(&config)?;
            let eval_cfg = EvalConfig {
                iou_thresholds: EvalConfig::parse_thresholds(&iou)?,
                conf_threshold: conf,
                ..EvalConfig::default()
            };
            eval_cfg.validate()?;
            let base = config.parent().unwrap_or(Path::new("."));
            let images_dir = split_dirs(&cfg, base).get(split).clone();
            let stored = dataset::load_pair(&images_dir, &labels_dir_for(&images_dir), &cfg.classes, workers)?;
            let records: Vec<_> = stored.into_iter().map(|s| s.record).collect();
            let ids: Vec<&str> = records.iter().map(|r| r.image_id.as_str()).collect();
            let preds = load_prediction_dir(&pred, &ids, &cfg.classes)?;
            let report = evaluate(&records, &preds, &cfg.classes, &eval_cfg, workers)?;
            prepare(&out, &[&config, &pred, &images_dir])?;
            write_text(&out.out.join("report.json"), &report.to_json())?;
            write_text(&out.out.join("report.csv"), &report.to_csv())?;
            report.write_curves(&out.out.join("curves"))?;
            print!("{}", report.to_table());
            Ok(())
        }
    }
}

fn prepare(out: &OutArgs, inputs: &[&Path]) -> Result<()> {
    prepare_output(&out.out, inputs, out.force)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_config(path: &Path) -> Result<DatasetConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_config(&text).map_err(|e| Error::in_file(path, e))
}

fn registry(config: Option<&Path>) -> Result<ClassRegistry> {
    match config {
        Some(p) => Ok(read_config(p)?.classes),
        None => Ok(ClassRegistry::default()),
    }
}

fn load_drift(args: &DriftArgs, required: bool) -> Result<Option<AugmentPipeline>> {
    match (&args.preset, &args.pipeline) {
        (Some(name), _) => preset(name).map(Some),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_pipeline(&text).map(Some).map_err(|e| Error::in_file(path, e))
        }
        (None, None) if required => Err(Error::InvalidParam("one of --preset or --pipeline is required".into())),
        (None, None) => Ok(None),
    }
}

fn image_index(dir: &Path) -> Result<HashMap<String, PathBuf>> {
    let mut out = HashMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "ppm")) {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), p.clone());
            }
        }
    }
    Ok(out)
}

fn augment(records: &[StoredRecord], pipeline: &AugmentPipeline, out: &Path, workers: Workers) -> Result<()> {
    let images = out.join("images");
    let labels = out.join("labels");
    for d in [&images, &labels] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let provenance = exec::try_map(workers, records, |_, s| {
        let id = &s.record.image_id;
        let img = load_image(&s.image_path)?;
        let (img, anns, prov) = apply_pipeline(&img, &s.record.annotations, pipeline, id).map_err(|e| Error::in_file(&s.image_path, e))?;
        save_image(&img, images.join(format!("{id}.png")))?;
        write_text(&labels.join(format!("{id}.txt")), &serialize_yolo_label(&anns))?;
        Ok(serde_json::to_string(&prov).expect("provenance serializes"))
    })?;
    let mut text = provenance.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_text(&out.join("provenance.jsonl"), &text)
}

use std::path::Path;
use std::process::{Command, Output};

use czforge::annotations::{Annotation, NormBBox, Split, Splits};
use czforge::dataset::{write_split, StoredRecord};
use czforge::imaging::{save_image, Rgb8Image};
use czforge::{ClassRegistry, ImageRecord, Workers};

fn czforge(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_czforge")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn generate_split_stats_eval() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let o = czforge(&["gen", "--out", "g", "-n", "30", "--width", "160", "--height", "160", "--seed", "3"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = czforge(&["split", "--input", "g", "--out", "s", "--ratios", "0.6,0.2,0.2", "--seed", "1"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("max deviation"));
    assert!(d.join("s/split_report.json").exists());

    let o = czforge(&["stats", "--config", "s/data.yaml"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.starts_with("Type"), "{table}");
    let total_images: usize = table.lines().nth(4).unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert_eq!(total_images, 30);

    // Ground truth as predictions: a perfect score.
    std::fs::create_dir(d.join("pred")).unwrap();
    for e in std::fs::read_dir(d.join("s/labels/test")).unwrap() {
        let p = e.unwrap().path();
        let lines: String = std::fs::read_to_string(&p)
            .unwrap()
            .lines()
            .map(|l| {
                let (c, rest) = l.split_once(' ').unwrap();
                format!("{c} 1.0 {rest}\n")
            })
            .collect();
        std::fs::write(d.join("pred").join(p.file_name().unwrap()), lines).unwrap();
    }
    let o = czforge(&["eval", "--config", "s/data.yaml", "--pred", "pred", "--out", "e"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("e/report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["map50_95"], 1.0);
    let csv = std::fs::read_to_string(d.join("e/report.csv")).unwrap();
    assert!(csv.starts_with("Class,Precision,Recall,mAP50,mAP50-95,"));
    assert!(d.join("e/curves/pr_cone_iou50.csv").exists());
    assert!(d.join("e/curves/pr_beacon_iou95.csv").exists());

    // An orphan prediction file is a data error naming the file.
    std::fs::write(d.join("pred/ghost.txt"), "").unwrap();
    let o = czforge(&["eval", "--config", "s/data.yaml", "--pred", "pred", "--out", "e2"], d);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ghost.txt"), "{}", stderr(&o));
}

#[test]
fn generation_independent_of_workers() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    for (dir, w) in [("a", "1"), ("b", "8")] {
        let o = czforge(&["--workers", w, "gen", "--out", dir, "-n", "6", "--width", "96", "--height", "96", "--preset", "light_drift"], d);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(tree(&d.join("a")), tree(&d.join("b")));
    for (dir, w) in [("aa", "1"), ("bb", "8")] {
        let o = czforge(&["--workers", w, "augment", "--input", "a", "--out", dir, "--preset", "geometric", "--seed", "4"], d);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(tree(&d.join("aa")), tree(&d.join("bb")));
    assert_eq!(std::fs::read_to_string(d.join("aa/provenance.jsonl")).unwrap().lines().count(), 6);
}

#[test]
fn exit_codes_and_diagnostics() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    // Usage errors.
    assert_eq!(code(&czforge(&["gen"], d)), 1);
    assert_eq!(code(&czforge(&["frobnicate"], d)), 1);
    assert_eq!(code(&czforge(&["--help"], d)), 0);
    // Parameter validation.
    let o = czforge(&["split", "--input", "x", "--out", "y", "--ratios", "0.5,0.5,0.5"], d);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("sum"), "{}", stderr(&o));
    assert_eq!(code(&czforge(&["augment", "--input", "x", "--out", "y", "--preset", "nope"], d)), 1);
    // Missing input: filesystem error naming the path.
    let o = czforge(&["stats", "--config", "missing.yaml"], d);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("missing.yaml"));

    // Bad label: data error naming file and line.
    assert_eq!(code(&czforge(&["gen", "--out", "g", "-n", "3", "--width", "64", "--height", "64"], d)), 0);
    std::fs::write(d.join("g/labels/scene_000001.txt"), "0 0.5 0.5 0.1 0.1\n0 0.5 1.7 0.1 0.1\n").unwrap();
    let o = czforge(&["filter", "--input", "g", "--out", "f"], d);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("scene_000001.txt") && err.contains("cy out of range, line 2"), "{err}");

    // Existing output is protected unless forced, and never when it holds the input.
    std::fs::write(d.join("g/labels/scene_000001.txt"), "0 0.5 0.5 0.1 0.1\n").unwrap();
    assert_eq!(code(&czforge(&["gen", "--out", "g", "-n", "1"], d)), 1);
    assert_eq!(code(&czforge(&["filter", "--input", "g", "--out", "f"], d)), 0);
    assert_eq!(code(&czforge(&["filter", "--input", "g", "--out", "f"], d)), 1);
    assert_eq!(code(&czforge(&["filter", "--input", "g", "--out", "f", "--force"], d)), 0);
    assert_eq!(code(&czforge(&["filter", "--input", "g", "--out", ".", "--force"], d)), 1);
    assert!(d.join("g/labels/scene_000001.txt").exists());
}

#[test]
fn filter_and_convert() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    std::fs::create_dir_all(d.join("raw")).unwrap();
    for name in ["f1", "f2", "f3"] {
        save_image(&Rgb8Image::filled(200, 100, [9, 9, 9]), d.join(format!("raw/{name}.png"))).unwrap();
    }
    let xml = r#"<?xml version="1.0" encoding="utf-8"?>
<annotations>
  <version>1.1</version>
  <image id="0" name="f1.png" width="200" height="100">
    <box label="cone" occluded="0" xtl="10" ytl="20" xbr="30" ybr="60"/>
  </image>
  <image id="1" name="f2.png" width="200" height="100">
    <box label="barrier" occluded="0" xtl="0" ytl="0" xbr="180" ybr="90"/>
  </image>
  <image id="2" name="f3.png" width="200" height="100"/>
</annotations>"#;
    std::fs::write(d.join("export.xml"), xml).unwrap();
    let o = czforge(&["convert", "--cvat", "export.xml", "--images", "raw", "--out", "yolo"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(d.join("yolo/labels/f1.txt")).unwrap(), "0 0.100000 0.400000 0.100000 0.400000\n");

    let o = czforge(&["filter", "--input", "yolo", "--out", "kept", "--max-area", "0.5"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "kept 1, removed 2");
    let log = std::fs::read_to_string(d.join("kept/removed.jsonl")).unwrap();
    assert!(log.contains("\"image_id\":\"f2\"") && log.contains("too_close"));
    assert!(log.contains("\"image_id\":\"f3\"") && log.contains("no_objects"));
    assert!(d.join("kept/images/f1.png").exists() && !d.join("kept/images/f2.png").exists());

    std::fs::write(d.join("bad.xml"), xml.replace("cone", "truck")).unwrap();
    let o = czforge(&["convert", "--cvat", "bad.xml", "--out", "y2"], d);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.xml") && stderr(&o).contains("truck"), "{}", stderr(&o));
}

#[test]
fn stats_table_counts_per_split() {
    let t = tempfile::tempdir().unwrap();
    let reg = ClassRegistry::new(["beacon", "cone", "barrier"]).unwrap();
    let blank = t.path().join("blank.png");
    save_image(&Rgb8Image::filled(4, 4, [0, 0, 0]), &blank).unwrap();
    let counts = [[1126, 530, 1072], [240, 120, 240], [10, 10, 10]];
    let mut splits: Splits<Vec<StoredRecord>> = Splits::default();
    let mut n = 0;
    for (si, split) in Split::ALL.into_iter().enumerate() {
        for class in 0..3u32 {
            let mut left = counts[si][class as usize];
            while left > 0 {
                let k = left.min(3);
                left -= k;
                let anns = (0..k).map(|_| Annotation::new(class, NormBBox { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5 })).collect();
                splits.get_mut(split).push(StoredRecord {
                    record: ImageRecord::new(format!("i{n}"), 4, 4, anns).unwrap(),
                    image_path: blank.clone(),
                });
                n += 1;
            }
        }
    }
    write_split(&t.path().join("ds"), &splits, &reg, Workers::Auto).unwrap();
    let o = czforge(&["stats", "--config", "ds/data.yaml"], t.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[0], ["Type", "Beacon", "Cone", "Barrier", "Images"]);
    assert_eq!(rows[1][..4], ["Train", "1126", "530", "1072"]);
    assert_eq!(rows[2][..4], ["Validation", "240", "120", "240"]);
    assert_eq!(rows[3][..4], ["Test", "10", "10", "10"]);
}

#[test]
fn split_dry_run_writes_lists() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(code(&czforge(&["gen", "--out", "g", "-n", "20", "--width", "96", "--height", "96"], d)), 0);
    let o = czforge(&["split", "--input", "g", "--out", "m", "--dry-run"], d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut all: Vec<String> = ["train", "val", "test"]
        .iter()
        .flat_map(|s| std::fs::read_to_string(d.join(format!("m/{s}.txt"))).unwrap().lines().map(str::to_string).collect::<Vec<_>>())
        .collect();
    all.sort();
    assert_eq!(all.len(), 20);
    all.dedup();
    assert_eq!(all.len(), 20);
    assert!(all.iter().all(|p| d.join(p).exists()), "{all:?}");
    assert!(d.join("m/split_report.json").exists() && !d.join("m/images").exists());
}

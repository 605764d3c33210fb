use serde::{Deserialize, Serialize};

use super::{ClassRegistry, Split, Splits};
use crate::error::{Error, Result};
use crate::kvconf::{Document, Value};

/// Contents of a dataset config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub root_path: String,
    pub split_paths: Splits<String>,
    pub classes: ClassRegistry,
}

/// Parse a dataset config file:
///
/// ```text
/// path: datasets/cz
/// train: images/train
/// val: images/val
/// test: images/test
/// names:
///   0: cone
///   1: barrier
///   2: beacon
/// ```
///
/// `path` defaults to `.` when absent.
pub fn parse_dataset_config(text: &str) -> Result<DatasetConfig> {
    let doc = Document::parse(text)?;
    let root_path = doc.scalar("path")?.unwrap_or(".").to_string();

    let mut paths: Vec<String> = Vec::with_capacity(3);
    for split in Split::ALL {
        let p = doc
            .scalar(split.as_str())?
            .ok_or_else(|| Error::Config(format!("missing split: {split}")))?;
        paths.push(p.to_string());
    }
    let [train, val, test]: [String; 3] = paths.try_into().expect("three splits");

    let names = doc
        .get("names")
        .ok_or_else(|| Error::Config("missing key: names".into()))?;
    let entries = match &names.value {
        Value::Map(m) if !m.is_empty() => m,
        _ => {
            return Err(Error::Config(format!(
                "`names` must be an indented `id: name` map, line {}",
                names.line
            )))
        }
    };
    let mut pairs = Vec::with_capacity(entries.len());
    for e in entries {
        let id: u32 = e
            .key
            .parse()
            .map_err(|_| Error::Config(format!("class id `{}` is not a non-negative integer, line {}", e.key, e.line)))?;
        pairs.push((id, e.value.clone()));
    }
    let classes = ClassRegistry::from_entries(pairs)?;

    Ok(DatasetConfig {
        root_path,
        split_paths: Splits { train, val, test },
        classes,
    })
}

impl DatasetConfig {
    /// Render in the same dialect `parse_dataset_config` reads.
    pub fn to_text(&self) -> String {
        let mut s = format!("path: {}\n", self.root_path);
        for (split, p) in self.split_paths.iter() {
            s.push_str(&format!("{split}: {p}\n"));
        }
        s.push_str("names:\n");
        for (id, name) in self.classes.iter() {
            s.push_str(&format!("  {id}: {name}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "# construction zone\npath: ../datasets/cz\ntrain: images/train\nval: images/val\ntest: images/test\n";

    #[test]
    fn three_class_config() {
        let text = format!("{BASE}names:\n  0: cone\n  1: barrier\n  2: beacon\n");
        let cfg = parse_dataset_config(&text).unwrap();
        assert_eq!(cfg.classes, ClassRegistry::default());
        assert_eq!(cfg.root_path, "../datasets/cz");
        assert_eq!(cfg.split_paths.val, "images/val");
        assert_eq!(parse_dataset_config(&cfg.to_text()).unwrap().classes, cfg.classes);
    }

    #[test]
    fn missing_test_split() {
        let text = "path: x\ntrain: a\nval: b\nnames:\n  0: cone\n";
        assert_eq!(parse_dataset_config(text).unwrap_err().to_string(), "config: missing split: test");
    }

    #[test]
    fn non_contiguous_ids() {
        let text = format!("{BASE}names:\n  0: cone\n  2: beacon\n");
        assert!(parse_dataset_config(&text).unwrap_err().to_string().contains("non-contiguous class ids"));
    }

    #[test]
    fn duplicate_ids_and_missing_names() {
        let text = format!("{BASE}names:\n  0: cone\n  0: beacon\n");
        assert!(parse_dataset_config(&text).unwrap_err().to_string().contains("duplicate class id 0"));
        assert!(parse_dataset_config(BASE).unwrap_err().to_string().contains("missing key: names"));
        let text = format!("{BASE}names: cone\n");
        assert!(parse_dataset_config(&text).is_err());
    }

    #[test]
    fn out_of_order_ids_are_sorted() {
        let text = format!("{BASE}names:\n  1: barrier\n  0: cone\n");
        let cfg = parse_dataset_config(&text).unwrap();
        assert_eq!(cfg.classes.names(), ["cone", "barrier"]);
    }
}

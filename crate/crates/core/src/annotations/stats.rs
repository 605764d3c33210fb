use serde::{Deserialize, Serialize};

use super::{ClassRegistry, ImageRecord, Split, Splits};

/// Object counts per class per split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub classes: Vec<String>,
    /// Indexed by class id.
    pub objects: Splits<Vec<usize>>,
    pub images: Splits<usize>,
    /// Per-class totals over all splits.
    pub totals: Vec<usize>,
}

pub fn dataset_stats(records: &Splits<Vec<ImageRecord>>, registry: &ClassRegistry) -> DatasetStats {
    let n = registry.len();
    let objects = records.map(|_, recs| {
        let mut counts = vec![0usize; n];
        for r in recs {
            for (c, k) in counts.iter_mut().zip(r.class_counts(n)) {
                *c += k;
            }
        }
        counts
    });
    let totals = (0..n)
        .map(|c| Split::ALL.iter().map(|s| objects.get(*s)[c]).sum())
        .collect();
    DatasetStats {
        classes: registry.names().to_vec(),
        objects,
        images: records.map(|_, r| r.len()),
        totals,
    }
}

impl DatasetStats {
    pub fn count(&self, split: Split, class: &str) -> Option<usize> {
        let idx = self.classes.iter().position(|c| c == class)?;
        Some(self.objects.get(split)[idx])
    }

    /// Aligned text table: one row per split plus a total row, one column per
    /// class.
    pub fn to_table(&self) -> String {
        let rows: Vec<(String, Vec<usize>, usize)> = Split::ALL
            .iter()
            .map(|s| {
                let label = match s {
                    Split::Train => "Train",
                    Split::Val => "Validation",
                    Split::Test => "Test",
                };
                (label.to_string(), self.objects.get(*s).clone(), *self.images.get(*s))
            })
            .chain(std::iter::once((
                "Total".to_string(),
                self.totals.clone(),
                Split::ALL.iter().map(|s| *self.images.get(*s)).sum(),
            )))
            .collect();

        let header: Vec<String> = std::iter::once("Type".to_string())
            .chain(self.classes.iter().map(|c| capitalize(c)))
            .chain(std::iter::once("Images".to_string()))
            .collect();
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for (label, counts, images) in &rows {
            widths[0] = widths[0].max(label.len());
            for (i, c) in counts.iter().chain(std::iter::once(images)).enumerate() {
                widths[i + 1] = widths[i + 1].max(c.to_string().len());
            }
        }

        let mut out = String::new();
        let line = |cells: Vec<String>, out: &mut String| {
            let mut s = format!("{:<w$}", cells[0], w = widths[0]);
            for (c, w) in cells.iter().zip(&widths).skip(1) {
                s.push_str(&format!("  {c:>w$}"));
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(header, &mut out);
        for (label, counts, images) in rows {
            let cells = std::iter::once(label)
                .chain(counts.iter().map(ToString::to_string))
                .chain(std::iter::once(images.to_string()))
                .collect();
            line(cells, &mut out);
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::{Annotation, NormBBox};

    fn rec(id: &str, classes: &[u32]) -> ImageRecord {
        let b = NormBBox { cx: 0.5, cy: 0.5, w: 0.1, h: 0.1 };
        ImageRecord::new(id, 8, 8, classes.iter().map(|&c| Annotation::new(c, b)).collect()).unwrap()
    }

    #[test]
    fn empty_dataset_is_all_zero() {
        let s = dataset_stats(&Splits::default(), &ClassRegistry::default());
        assert_eq!(s.objects.train, vec![0, 0, 0]);
        assert_eq!(s.totals, vec![0, 0, 0]);
    }

    #[test]
    fn counts_and_totals() {
        let splits = Splits {
            train: vec![rec("a", &[0, 0]), rec("b", &[2])],
            val: vec![rec("c", &[1, 2, 2])],
            test: vec![],
        };
        let s = dataset_stats(&splits, &ClassRegistry::default());
        assert_eq!(s.count(Split::Train, "cone"), Some(2));
        assert_eq!(s.objects.val, vec![0, 1, 2]);
        assert_eq!(s.totals, vec![2, 1, 3]);
        assert_eq!(s.images.train, 2);
        let table = s.to_table();
        assert!(table.starts_with("Type        Cone  Barrier  Beacon  Images\n"), "{table}");
        assert!(table.contains("Validation     0        1       2       1\n"), "{table}");
    }
}

//! Seeded, class-stratified train/val/test assignment.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotations::{ClassRegistry, ImageRecord, Split, Splits};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Train, val, test. Non-negative and summing to 1.
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(ratios: [f64; 3], seed: u64) -> Result<Self> {
        let s = Self { ratios, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParam(format!("split ratios {:?} must be non-negative", self.ratios)));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParam(format!("split ratios sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Parse `0.8,0.1,0.1`.
    pub fn parse_ratios(s: &str) -> Result<[f64; 3]> {
        let bad = || Error::InvalidParam(format!("invalid split ratios `{s}` (expected train,val,test)"));
        let v: Vec<f64> = s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        v.try_into().map_err(|_| bad())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSplitRow {
    pub class_id: u32,
    pub name: String,
    pub total: usize,
    /// Train, val, test.
    pub achieved: [usize; 3],
    pub target: [f64; 3],
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub spec: SplitSpec,
    pub images: [usize; 3],
    pub classes: Vec<ClassSplitRow>,
    /// Largest |achieved − target| over classes and splits.
    pub max_deviation: f64,
}

impl SplitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<10} {:>6} {:>14} {:>14} {:>14} {:>8}\n",
            "Class", "Total", "Train", "Val", "Test", "MaxDev"
        );
        for r in &self.classes {
            let cell = |i: usize| format!("{} ({:.1})", r.achieved[i], r.target[i]);
            let _ = writeln!(
                s,
                "{:<10} {:>6} {:>14} {:>14} {:>14} {:>8.2}",
                r.name,
                r.total,
                cell(0),
                cell(1),
                cell(2),
                r.max_deviation
            );
        }
        let _ = writeln!(
            s,
            "images: train {} val {} test {}; max deviation {:.2}",
            self.images[0], self.images[1], self.images[2], self.max_deviation
        );
        s
    }
}

/// Assign each record to a split.
///
/// Records are visited in a seeded shuffle, stably reordered so that images
/// with more objects come first. Each record goes to the split where the
/// worst resulting overshoot `(current_c + n_c − target_c) / m_c` is
/// smallest, `m_c` being the largest per-image count of class `c`. Ties go
/// to the largest object-weighted deficit `Σ_c n_c · (target_c − current_c)`,
/// then to the earlier split. A record without objects goes to the split
/// furthest below its image-count target. Only splits with a positive ratio
/// are candidates.
pub fn assign_splits(records: &[ImageRecord], spec: &SplitSpec, registry: &ClassRegistry) -> Result<(Vec<Split>, SplitReport)> {
    spec.validate()?;
    let n = registry.len();
    let counts: Vec<Vec<usize>> = records.iter().map(|r| r.class_counts(n)).collect();
    for r in records {
        if let Some(a) = r.annotations.iter().find(|a| !registry.contains(a.class_id)) {
            return Err(Error::Dataset(format!("{}: unknown class id {}", r.image_id, a.class_id)));
        }
    }
    let mut totals = vec![0usize; n];
    for c in &counts {
        for (t, v) in totals.iter_mut().zip(c) {
            *t += v;
        }
    }
    let target: Vec<[f64; 3]> = totals
        .iter()
        .map(|&t| spec.ratios.map(|r| r * t as f64))
        .collect();
    let image_target = spec.ratios.map(|r| r * records.len() as f64);
    let candidates: Vec<usize> = (0..3).filter(|&s| spec.ratios[s] > 0.0).collect();

    let mut per_image_max = vec![0usize; n];
    for c in &counts {
        for (m, v) in per_image_max.iter_mut().zip(c) {
            *m = (*m).max(*v);
        }
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    order.sort_by_key(|&i| std::cmp::Reverse(counts[i].iter().sum::<usize>()));

    let mut current = vec![[0usize; 3]; n];
    let mut images = [0usize; 3];
    let mut assignment = vec![Split::Train; records.len()];
    for i in order {
        let c = &counts[i];
        let has_objects = c.iter().any(|&v| v > 0);
        let best = if has_objects {
            let overshoot = |s: usize| {
                (0..n)
                    .filter(|&k| c[k] > 0)
                    .map(|k| (current[k][s] as f64 + c[k] as f64 - target[k][s]) / per_image_max[k] as f64)
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let deficit = |s: usize| -> f64 { (0..n).map(|k| c[k] as f64 * (target[k][s] - current[k][s] as f64)).sum() };
            pick(&candidates, |a, b| {
                overshoot(a)
                    .total_cmp(&overshoot(b))
                    .then_with(|| deficit(b).total_cmp(&deficit(a)))
            })
        } else {
            pick(&candidates, |a, b| (image_target[b] - images[b] as f64).total_cmp(&(image_target[a] - images[a] as f64)))
        };
        for k in 0..n {
            current[k][best] += c[k];
        }
        images[best] += 1;
        assignment[i] = Split::ALL[best];
    }

    let classes: Vec<ClassSplitRow> = registry
        .iter()
        .map(|(id, name)| {
            let k = id as usize;
            let dev = (0..3)
                .map(|s| (current[k][s] as f64 - target[k][s]).abs())
                .fold(0.0, f64::max);
            ClassSplitRow {
                class_id: id,
                name: name.to_string(),
                total: totals[k],
                achieved: current[k],
                target: target[k],
                max_deviation: dev,
            }
        })
        .collect();
    let max_deviation = classes.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    Ok((
        assignment,
        SplitReport {
            spec: *spec,
            images,
            classes,
            max_deviation,
        },
    ))
}

/// First candidate that no later one beats under `cmp` (less is better).
fn pick(candidates: &[usize], cmp: impl Fn(usize, usize) -> std::cmp::Ordering) -> usize {
    let mut best = candidates[0];
    for &s in &candidates[1..] {
        if cmp(s, best).is_lt() {
            best = s;
        }
    }
    best
}

/// Distribute `items` by `assignment`, keeping input order within a split.
pub fn partition<T>(items: Vec<T>, assignment: &[Split]) -> Splits<Vec<T>> {
    assert_eq!(items.len(), assignment.len(), "one split per item");
    let mut out = Splits {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (item, s) in items.into_iter().zip(assignment) {
        out.get_mut(*s).push(item);
    }
    out
}

/// [`assign_splits`] followed by [`partition`].
pub fn stratified_split(
    records: Vec<ImageRecord>,
    spec: &SplitSpec,
    registry: &ClassRegistry,
) -> Result<(Splits<Vec<ImageRecord>>, SplitReport)> {
    let (assignment, report) = assign_splits(&records, spec, registry)?;
    Ok((partition(records, &assignment), report))
}

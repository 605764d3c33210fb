use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_op, AugmentOp, DEFAULT_FILL, DEFAULT_MIN_VISIBILITY};
use crate::annotations::Annotation;
use crate::error::{Error, Result};
use crate::imaging::{Rgb, Rgb8Image};
use crate::kvconf::{Document, Value};
use crate::seed::derive_seed;

/// A fixed value or a closed range sampled uniformly per image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Fixed(f64),
    Range(f64, f64),
}

impl Param {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Param::Fixed(v) => v,
            Param::Range(lo, hi) => lo + (hi - lo) * rng.gen::<f64>(),
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            Param::Fixed(v) => (v, v),
            Param::Range(lo, hi) => (lo, hi),
        }
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Fixed(v)
    }
}

/// An op whose parameters may still be ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OpTemplate {
    Brightness { gain: Param },
    Contrast { factor: Param },
    Saturation { factor: Param },
    HueShift { degrees: Param },
    GaussianNoise { sigma: Param },
    GaussianBlur { sigma: Param },
    #[serde(rename = "hflip")]
    HFlip,
    #[serde(rename = "vflip")]
    VFlip,
    Rotate { degrees: Param },
    Shear { kx: Param, ky: Param },
    ScaleTranslate { sx: Param, sy: Param, tx: Param, ty: Param },
}

impl OpTemplate {
    /// Parameters are drawn in declaration order; the noise seed is drawn
    /// last.
    fn sample(&self, rng: &mut ChaCha8Rng) -> AugmentOp {
        match self {
            OpTemplate::Brightness { gain } => AugmentOp::Brightness { gain: gain.sample(rng) },
            OpTemplate::Contrast { factor } => AugmentOp::Contrast { factor: factor.sample(rng) },
            OpTemplate::Saturation { factor } => AugmentOp::Saturation { factor: factor.sample(rng) },
            OpTemplate::HueShift { degrees } => AugmentOp::HueShift { degrees: degrees.sample(rng) },
            OpTemplate::GaussianNoise { sigma } => {
                let sigma = sigma.sample(rng);
                AugmentOp::GaussianNoise { sigma, seed: rng.gen() }
            }
            OpTemplate::GaussianBlur { sigma } => AugmentOp::GaussianBlur { sigma: sigma.sample(rng) },
            OpTemplate::HFlip => AugmentOp::HFlip,
            OpTemplate::VFlip => AugmentOp::VFlip,
            OpTemplate::Rotate { degrees } => AugmentOp::Rotate { degrees: degrees.sample(rng) },
            OpTemplate::Shear { kx, ky } => {
                let kx = kx.sample(rng);
                AugmentOp::Shear { kx, ky: ky.sample(rng) }
            }
            OpTemplate::ScaleTranslate { sx, sy, tx, ty } => {
                let sx = sx.sample(rng);
                let sy = sy.sample(rng);
                let tx = tx.sample(rng);
                AugmentOp::ScaleTranslate { sx, sy, tx, ty: ty.sample(rng) }
            }
        }
    }

    /// Op built from either end of every range. Parameter domains are
    /// intervals, so checking the corners covers every sample.
    fn corner(&self, pick_hi: bool) -> AugmentOp {
        let p = |v: &Param| {
            let (lo, hi) = v.bounds();
            if pick_hi {
                hi
            } else {
                lo
            }
        };
        match self {
            OpTemplate::Brightness { gain } => AugmentOp::Brightness { gain: p(gain) },
            OpTemplate::Contrast { factor } => AugmentOp::Contrast { factor: p(factor) },
            OpTemplate::Saturation { factor } => AugmentOp::Saturation { factor: p(factor) },
            OpTemplate::HueShift { degrees } => AugmentOp::HueShift { degrees: p(degrees) },
            OpTemplate::GaussianNoise { sigma } => AugmentOp::GaussianNoise { sigma: p(sigma), seed: 0 },
            OpTemplate::GaussianBlur { sigma } => AugmentOp::GaussianBlur { sigma: p(sigma) },
            OpTemplate::HFlip => AugmentOp::HFlip,
            OpTemplate::VFlip => AugmentOp::VFlip,
            OpTemplate::Rotate { degrees } => AugmentOp::Rotate { degrees: p(degrees) },
            OpTemplate::Shear { kx, ky } => AugmentOp::Shear { kx: p(kx), ky: p(ky) },
            OpTemplate::ScaleTranslate { sx, sy, tx, ty } => AugmentOp::ScaleTranslate {
                sx: p(sx),
                sy: p(sy),
                tx: p(tx),
                ty: p(ty),
            },
        }
    }

    fn params(&self) -> Vec<&Param> {
        match self {
            OpTemplate::Brightness { gain: a }
            | OpTemplate::Contrast { factor: a }
            | OpTemplate::Saturation { factor: a }
            | OpTemplate::HueShift { degrees: a }
            | OpTemplate::GaussianNoise { sigma: a }
            | OpTemplate::GaussianBlur { sigma: a }
            | OpTemplate::Rotate { degrees: a } => vec![a],
            OpTemplate::Shear { kx, ky } => vec![kx, ky],
            OpTemplate::ScaleTranslate { sx, sy, tx, ty } => vec![sx, sy, tx, ty],
            OpTemplate::HFlip | OpTemplate::VFlip => vec![],
        }
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        for p in self.params() {
            let (lo, hi) = p.bounds();
            if !(lo <= hi) {
                return Err(Error::InvalidParam(format!("range [{lo}, {hi}] is empty")));
            }
        }
        if let OpTemplate::Shear { kx, ky } = self {
            // The singular set kx·ky = 1 is not convex; reject ranges that could hit it.
            let (a, b) = (kx.bounds(), ky.bounds());
            let products = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
            let max = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max >= 1.0 - 1e-6 {
                return Err(Error::InvalidParam("shear: kx·ky may reach 1 (singular)".into()));
            }
        }
        self.corner(false).validate()?;
        self.corner(true).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub op: OpTemplate,
    pub probability: f64,
}

impl Step {
    pub fn new(op: OpTemplate, probability: f64) -> Self {
        Self { op, probability }
    }

    pub fn always(op: OpTemplate) -> Self {
        Self::new(op, 1.0)
    }
}

/// Ordered, seeded list of transforms. An empty list is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPipeline {
    pub name: Option<String>,
    pub steps: Vec<Step>,
    pub master_seed: u64,
    pub min_visibility: f64,
    pub fill: Rgb,
}

impl Default for AugmentPipeline {
    fn default() -> Self {
        Self {
            name: None,
            steps: Vec::new(),
            master_seed: 0,
            min_visibility: DEFAULT_MIN_VISIBILITY,
            fill: DEFAULT_FILL,
        }
    }
}

impl AugmentPipeline {
    pub fn new(steps: Vec<Step>, master_seed: u64) -> Result<Self> {
        let p = Self {
            steps,
            master_seed,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_visibility > 0.0 && self.min_visibility <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "min_visibility must be in (0, 1], got {}",
                self.min_visibility
            )));
        }
        for (i, s) in self.steps.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.probability) {
                return Err(Error::InvalidParam(format!("step {}: probability {} not in [0, 1]", i + 1, s.probability)));
            }
            s.op.validate()
                .map_err(|e| Error::InvalidParam(format!("step {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn is_photometric_only(&self) -> bool {
        self.steps.iter().all(|s| s.op.corner(false).is_photometric())
    }

    pub fn image_seed(&self, image_id: &str) -> u64 {
        derive_seed(self.master_seed, image_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub name: String,
    pub applied: bool,
    /// Sampled op, present when the step fired.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub op: Option<AugmentOp>,
}

/// Everything needed to replay one image's augmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentProvenance {
    pub image_id: String,
    pub seed: u64,
    pub fill: Rgb,
    pub min_visibility: f64,
    pub steps: Vec<StepRecord>,
    pub boxes_in: usize,
    pub boxes_out: usize,
}

/// Run `pipeline` on one image.
///
/// The per-image stream is ChaCha8 seeded with `derive_seed(master_seed,
/// image_id)`. For every step one uniform draw decides whether it fires
/// (`u < probability`); a firing step then samples its parameters from the
/// same stream.
pub fn apply_pipeline(
    image: &Rgb8Image,
    annotations: &[Annotation],
    pipeline: &AugmentPipeline,
    image_id: &str,
) -> Result<(Rgb8Image, Vec<Annotation>, AugmentProvenance)> {
    pipeline.validate()?;
    let seed = pipeline.image_seed(image_id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = image.clone();
    let mut anns = annotations.to_vec();
    let mut records = Vec::with_capacity(pipeline.steps.len());

    for (i, step) in pipeline.steps.iter().enumerate() {
        let fires = rng.gen::<f64>() < step.probability;
        let name = step.op.corner(false).name().to_string();
        if !fires {
            records.push(StepRecord {
                step: i,
                name,
                applied: false,
                op: None,
            });
            continue;
        }
        let op = step.op.sample(&mut rng);
        let (next_img, next_anns) = apply_op(&img, &anns, &op, pipeline.fill, pipeline.min_visibility)?;
        img = next_img;
        anns = next_anns;
        records.push(StepRecord {
            step: i,
            name,
            applied: true,
            op: Some(op),
        });
    }

    let prov = AugmentProvenance {
        image_id: image_id.to_string(),
        seed,
        fill: pipeline.fill,
        min_visibility: pipeline.min_visibility,
        steps: records,
        boxes_in: annotations.len(),
        boxes_out: anns.len(),
    };
    Ok((img, anns, prov))
}

/// Re-apply the ops recorded in `prov`.
pub fn replay(
    image: &Rgb8Image,
    annotations: &[Annotation],
    prov: &AugmentProvenance,
) -> Result<(Rgb8Image, Vec<Annotation>)> {
    let mut img = image.clone();
    let mut anns = annotations.to_vec();
    for op in prov.steps.iter().filter_map(|s| s.op.as_ref()) {
        let (i, a) = apply_op(&img, &anns, op, prov.fill, prov.min_visibility)?;
        img = i;
        anns = a;
    }
    Ok((img, anns))
}

/// Parse a pipeline file.
///
/// ```text
/// name: my_drift
/// master_seed: 7
/// min_visibility: 0.3
/// fill: 114,114,114
/// steps:
///   - brightness gain=[0.4, 0.8] p=0.5
///   - gaussian_blur sigma=3
///   - hflip p=0.5
/// ```
///
/// `p` defaults to 1. Shear parameters default to 0, scale factors to 1 and
/// translations to 0; every other parameter is required.
pub fn parse_pipeline(text: &str) -> Result<AugmentPipeline> {
    let doc = Document::parse(text)?;
    let mut p = AugmentPipeline::default();
    for e in &doc.entries {
        let scalar = |what: &str| -> Result<&str> {
            match &e.value {
                Value::Scalar(s) => Ok(s),
                _ => Err(Error::Config(format!("`{what}` must be a scalar, line {}", e.line))),
            }
        };
        match e.key.as_str() {
            "name" => p.name = Some(scalar("name")?.to_string()),
            "master_seed" | "seed" => {
                p.master_seed = scalar("master_seed")?
                    .parse()
                    .map_err(|_| Error::Config(format!("master_seed must be an unsigned integer, line {}", e.line)))?
            }
            "min_visibility" => {
                p.min_visibility = scalar("min_visibility")?
                    .parse()
                    .map_err(|_| Error::Config(format!("min_visibility must be a number, line {}", e.line)))?
            }
            "fill" => p.fill = parse_rgb(scalar("fill")?).ok_or_else(|| Error::Config(format!("fill must be `r,g,b`, line {}", e.line)))?,
            "steps" => match &e.value {
                Value::List(items) => {
                    for item in items {
                        p.steps.push(
                            parse_step(&item.value).map_err(|m| Error::Config(format!("{m}, line {}", item.line)))?,
                        );
                    }
                }
                Value::Map(m) if m.is_empty() => {}
                _ => return Err(Error::Config(format!("`steps` must be a `- op key=value` list, line {}", e.line))),
            },
            other => return Err(Error::Config(format!("unknown key `{other}`, line {}", e.line))),
        }
    }
    p.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(p)
}

fn parse_rgb(s: &str) -> Option<Rgb> {
    let parts: Vec<u8> = s.split(',').map(|t| t.trim().parse().ok()).collect::<Option<_>>()?;
    parts.try_into().ok()
}

fn parse_step(text: &str) -> Result<Step, String> {
    let text = text.trim();
    let (name, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let mut args: Vec<(String, Param)> = Vec::new();
    let mut probability = 1.0;
    for (key, raw) in split_args(rest)? {
        if key == "p" || key == "prob" || key == "probability" {
            probability = raw.parse().map_err(|_| format!("probability `{raw}` is not a number"))?;
        } else {
            if args.iter().any(|(k, _)| *k == key) {
                return Err(format!("duplicate parameter `{key}`"));
            }
            args.push((key, parse_param(&raw)?));
        }
    }
    let mut take = |key: &str, default: Option<f64>| -> Result<Param, String> {
        match args.iter().position(|(k, _)| k == key) {
            Some(i) => Ok(args.remove(i).1),
            None => default
                .map(Param::Fixed)
                .ok_or_else(|| format!("{name}: missing parameter `{key}`")),
        }
    };
    let op = match name {
        "brightness" => OpTemplate::Brightness { gain: take("gain", None)? },
        "contrast" => OpTemplate::Contrast { factor: take("factor", None)? },
        "saturation" => OpTemplate::Saturation { factor: take("factor", None)? },
        "hue_shift" | "hue" => OpTemplate::HueShift { degrees: take("degrees", None)? },
        "gaussian_noise" | "noise" => OpTemplate::GaussianNoise { sigma: take("sigma", None)? },
        "gaussian_blur" | "blur" => OpTemplate::GaussianBlur { sigma: take("sigma", None)? },
        "hflip" => OpTemplate::HFlip,
        "vflip" => OpTemplate::VFlip,
        "rotate" => OpTemplate::Rotate { degrees: take("degrees", None)? },
        "shear" => OpTemplate::Shear {
            kx: take("kx", Some(0.0))?,
            ky: take("ky", Some(0.0))?,
        },
        "scale_translate" => OpTemplate::ScaleTranslate {
            sx: take("sx", Some(1.0))?,
            sy: take("sy", Some(1.0))?,
            tx: take("tx", Some(0.0))?,
            ty: take("ty", Some(0.0))?,
        },
        other => return Err(format!("unknown op `{other}`")),
    };
    if let Some((k, _)) = args.first() {
        return Err(format!("{name}: unknown parameter `{k}`"));
    }
    Ok(Step { op, probability })
}

/// Split `k=v k2=[a, b]` into pairs; brackets may contain spaces.
fn split_args(s: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = s.trim().chars().peekable();
    while chars.peek().is_some() {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key.push(c);
            chars.next();
        }
        if key.is_empty() {
            break;
        }
        if chars.next() != Some('=') {
            return Err(format!("expected `{key}=value`"));
        }
        let mut val = String::new();
        let mut depth = 0;
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() && depth == 0 {
                break;
            }
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ => {}
            }
            val.push(c);
            chars.next();
        }
        if val.is_empty() {
            return Err(format!("missing value for `{key}`"));
        }
        out.push((key, val));
    }
    Ok(out)
}

fn parse_param(raw: &str) -> Result<Param, String> {
    let num = |t: &str| -> Result<f64, String> {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{}` is not a number", t.trim()))
    };
    if let Some(inner) = raw.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let (lo, hi) = inner.split_once(',').ok_or_else(|| format!("range `{raw}` must be `[min, max]`"))?;
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(format!("range `{raw}` has min > max"));
        }
        Ok(if lo == hi { Param::Fixed(lo) } else { Param::Range(lo, hi) })
    } else {
        num(raw).map(Param::Fixed)
    }
}

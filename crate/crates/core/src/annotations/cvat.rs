use super::{Annotation, ClassRegistry, ImageRecord, NormBBox};
use crate::error::{Error, Result};

const UNSUPPORTED_SHAPES: &[&str] = &[
    "polygon", "polyline", "points", "mask", "cuboid", "ellipse", "skeleton",
];

/// Parse the image/box subset of a "CVAT for images 1.1" XML export.
///
/// Pixel boxes are clipped to the image and normalized by its dimensions.
/// Tracks and non-rectangular shapes are rejected.
pub fn parse_cvat_xml(text: &str, registry: &ClassRegistry) -> Result<Vec<ImageRecord>> {
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::Cvat(format!("malformed markup: {e}")))?;
    let root = doc.root_element();
    if root.tag_name().name() != "annotations" {
        return Err(Error::Cvat(format!(
            "expected <annotations> root, found <{}>",
            root.tag_name().name()
        )));
    }

    let mut records = Vec::new();
    for node in root.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "image" => records.push(parse_image(node, registry)?),
            "track" => return Err(Error::Cvat(format!("tracks are not supported (line {})", line_of(&doc, node)))),
            _ => {}
        }
    }
    Ok(records)
}

fn line_of(doc: &roxmltree::Document, node: roxmltree::Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str> {
    node.attribute(name)
        .ok_or_else(|| Error::Cvat(format!("<{}> is missing attribute `{name}`", node.tag_name().name())))
}

fn num_attr(node: roxmltree::Node, name: &str) -> Result<f64> {
    let raw = attr(node, name)?;
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Cvat(format!("attribute `{name}` is not a number: `{raw}`"))),
    }
}

fn stem(name: &str) -> &str {
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    match base.rfind('.') {
        Some(i) if i > 0 => &base[..i],
        _ => base,
    }
}

fn parse_image(node: roxmltree::Node, registry: &ClassRegistry) -> Result<ImageRecord> {
    let name = attr(node, "name")?;
    let image_id = stem(name).to_string();
    let dim = |key: &str| -> Result<u32> {
        let raw = attr(node, key)?;
        raw.trim()
            .parse::<u32>()
            .ok()
            .filter(|v| *v > 0)
            .ok_or_else(|| Error::Cvat(format!("image `{name}`: invalid {key} `{raw}`")))
    };
    let (width, height) = (dim("width")?, dim("height")?);

    let mut annotations = Vec::new();
    for child in node.children().filter(|n| n.is_element()) {
        let tag = child.tag_name().name();
        if UNSUPPORTED_SHAPES.contains(&tag) {
            return Err(Error::Cvat(format!("image `{name}`: <{tag}> shapes are not supported")));
        }
        if tag != "box" {
            continue;
        }
        let label = attr(child, "label")?;
        let class_id = registry
            .id(label)
            .ok_or_else(|| Error::Cvat(format!("image `{name}`: unknown label `{label}`")))?;
        let (xtl, ytl) = (num_attr(child, "xtl")?, num_attr(child, "ytl")?);
        let (xbr, ybr) = (num_attr(child, "xbr")?, num_attr(child, "ybr")?);
        if xbr <= xtl || ybr <= ytl {
            return Err(Error::Cvat(format!(
                "image `{name}`: degenerate box ({xtl}, {ytl}, {xbr}, {ybr})"
            )));
        }
        let (w, h) = (f64::from(width), f64::from(height));
        let bbox = NormBBox::from_corners(
            xtl.clamp(0.0, w) / w,
            ytl.clamp(0.0, h) / h,
            xbr.clamp(0.0, w) / w,
            ybr.clamp(0.0, h) / h,
        );
        bbox.check()
            .map_err(|cause| Error::Cvat(format!("image `{name}`: box outside the image ({cause})")))?;
        annotations.push(Annotation { class_id, bbox });
    }
    ImageRecord::new(image_id, width, height, annotations).map_err(|e| Error::Cvat(e.to_string()))
}

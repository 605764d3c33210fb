//! PNG and binary PPM (P6) encoding.

use std::fs;
use std::io::{BufReader, Read};
use std::path::Path;

use super::Rgb8Image;
use crate::error::{Error, Result};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Load a PNG (8-bit RGB or RGBA, alpha dropped) or a P6 PPM, detected by
/// content.
pub fn load_image(path: impl AsRef<Path>) -> Result<Rgb8Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Image(msg) => Error::Image(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Save as PPM when the extension is `.ppm`, otherwise as PNG.
pub fn save_image(image: &Rgb8Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_ppm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    let bytes = if is_ppm { encode_ppm(image) } else { encode_png(image)? };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn decode(bytes: &[u8]) -> Result<Rgb8Image> {
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else {
        Err(Error::Image("unsupported format (expected PNG or P6 PPM)".into()))
    }
}

/// Width and height without decoding pixel data.
pub fn read_dimensions(path: impl AsRef<Path>) -> Result<(u32, u32)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut head = Vec::with_capacity(64);
    file.take(64).read_to_end(&mut head).map_err(|e| Error::io(path, e))?;
    if head.starts_with(PNG_MAGIC) {
        // IHDR is always the first chunk.
        if head.len() < 24 || &head[12..16] != b"IHDR" {
            return Err(Error::Image(format!("{}: truncated PNG header", path.display())));
        }
        let w = u32::from_be_bytes(head[16..20].try_into().unwrap());
        let h = u32::from_be_bytes(head[20..24].try_into().unwrap());
        return Ok((w, h));
    }
    let img = load_image(path)?;
    Ok((img.width(), img.height()))
}

pub fn decode_png(bytes: &[u8]) -> Result<Rgb8Image> {
    let decoder = png::Decoder::new(BufReader::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Image(format!("invalid PNG: {e}")))?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if depth != png::BitDepth::Eight {
        return Err(Error::Image(format!("unsupported bit depth {}", depth as u8)));
    }
    let channels = match color {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => return Err(Error::Image(format!("unsupported color type {other:?}"))),
    };
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Image(format!("truncated or corrupt PNG: {e}")))?;
    let buf = &buf[..frame.buffer_size()];
    let data = if channels == 3 {
        buf.to_vec()
    } else {
        buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect()
    };
    Rgb8Image::from_raw(frame.width, frame.height, data)
}

pub fn encode_png(image: &Rgb8Image) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, image.width(), image.height());
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Image(format!("PNG encode: {e}")))?;
        writer
            .write_image_data(image.as_bytes())
            .map_err(|e| Error::Image(format!("PNG encode: {e}")))?;
    }
    Ok(out)
}

pub fn encode_ppm(image: &Rgb8Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.as_bytes());
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Rgb8Image> {
    let mut pos = 2;
    let mut header = [0u32; 3];
    for slot in header.iter_mut() {
        // Whitespace and comments before each header field.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Image("malformed PPM header".into()))?;
    }
    let [width, height, maxval] = header;
    if maxval != 255 {
        return Err(Error::Image(format!("unsupported bit depth (PPM maxval {maxval})")));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Image("malformed PPM header".into()));
    }
    pos += 1;
    let need = width as usize * height as usize * 3;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Image(format!("truncated PPM: need {need} pixel bytes, have {}", bytes.len() - pos)))?;
    Rgb8Image::from_raw(width, height, data.to_vec())
}

//! 8-bit RGB raster buffers.

mod color;
mod io;

pub use color::{hsv_to_rgb, rgb_to_hsv, HsvPixel};
pub use io::{decode_png, decode_ppm, encode_png, encode_ppm, load_image, read_dimensions, save_image};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Row-major packed RGB image, no padding.
#[derive(Clone, PartialEq, Eq)]
pub struct Rgb8Image {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Rgb8Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rgb8Image({}x{})", self.width, self.height)
    }
}

impl Rgb8Image {
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!("zero dimension {width}x{height}")));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::Image(format!(
                "buffer holds {} bytes, {width}x{height} RGB needs {expected}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        assert!(width > 0 && height > 0, "zero image dimension");
        let data = color.repeat(width as usize * height as usize);
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, c: Rgb) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&c);
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize * 3;
        &self.data[y as usize * w..(y as usize + 1) * w]
    }

    /// Apply `f` to every pixel.
    pub fn map_pixels(&self, mut f: impl FnMut(Rgb) -> Rgb) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(3) {
            data.extend_from_slice(&f([px[0], px[1], px[2]]));
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Round to nearest and clamp into the byte range.
#[inline]
pub fn clamp_u8(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        v.round().clamp(0.0, 255.0) as u8
    }
}

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use super::ImageBuffer;
use crate::error::{Error, Result};

fn from_dynamic(img: image::DynamicImage) -> Result<ImageBuffer> {
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    ImageBuffer::from_rgb8(w as usize, h as usize, rgb.as_raw())
}

fn to_rgb_image(img: &ImageBuffer) -> RgbImage {
    RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_rgb8())
        .expect("buffer length matches dimensions")
}

/// Loads a PNG or JPEG file as 8-bit RGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = image::load_from_memory(&bytes).map_err(|source| Error::Image { path: path.to_path_buf(), source })?;
    from_dynamic(img)
}

pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::Codec(e.to_string()))?;
    from_dynamic(img)
}

pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    to_rgb_image(img).write_to(&mut out, ImageFormat::Png).map_err(|e| Error::Codec(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn save_png(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

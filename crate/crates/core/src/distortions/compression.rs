use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::ExtendedColorType;

use crate::error::{Error, Result};
use crate::imgproc::{decode_image, ImageBuffer};

/// Pluggable JPEG2000-style codec. `encode` targets a bit budget in bits per pixel.
pub trait Jpeg2000Codec: Send + Sync {
    fn name(&self) -> &str;
    fn encode(&self, img: &ImageBuffer, bpp: f64) -> Result<Vec<u8>>;
    fn decode(&self, bytes: &[u8]) -> Result<ImageBuffer>;
}

pub(super) fn jpeg2000(img: &ImageBuffer, bpp: f64, codec: &dyn Jpeg2000Codec) -> Result<ImageBuffer> {
    let bytes = codec.encode(img, bpp)?;
    let out = codec.decode(&bytes)?;
    if out.dims() != img.dims() {
        return Err(Error::Codec(format!("{} returned {:?} for a {:?} input", codec.name(), out.dims(), img.dims())));
    }
    Ok(out)
}

pub(crate) fn encode_jpeg(img: &ImageBuffer, quality: u8) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    JpegEncoder::new_with_quality(&mut buf, quality)
        .encode(&img.to_rgb8(), img.width() as u32, img.height() as u32, ExtendedColorType::Rgb8)
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(buf.into_inner())
}

/// Baseline JPEG encode and decode in memory.
pub(super) fn jpeg(img: &ImageBuffer, quality: f64) -> Result<ImageBuffer> {
    let bytes = encode_jpeg(img, quality.round().clamp(1.0, 100.0) as u8)?;
    decode_image(&bytes)
}

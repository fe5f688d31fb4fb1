//! Image files: PNG (8/16-bit), PGM/PPM and the raw `F32M` float format.
//!
//! `F32M` layout: the magic bytes `F32M`, then width, height and channel
//! count as little-endian `u32`, then the samples as little-endian `f32`,
//! row-major and interleaved. It is lossless and carries no colour tag; its
//! samples are always taken as linear.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use dpdof_core::color::{linear_to_srgb, srgb_to_linear};
use dpdof_core::{ColorSpace, FieldKind, FieldMap, Image};
use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};

pub const F32M_MAGIC: &[u8; 4] = b"F32M";
const HEADER_LEN: usize = 16;

/// Encodes an image as `F32M` bytes.
pub fn encode_f32m(image: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * image.data().len());
    out.extend_from_slice(F32M_MAGIC);
    for v in [image.width(), image.height(), image.channels()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in image.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_f32m(bytes: &[u8], path: &Path) -> Result<Image> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != F32M_MAGIC {
        return Err(Error::format(path, "not an F32M file"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (w, h, c) = (word(4), word(8), word(12));
    let n = w
        .checked_mul(h)
        .and_then(|v| v.checked_mul(c))
        .ok_or_else(|| Error::format(path, "F32M dimensions overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * n {
        return Err(Error::format(
            path,
            format!("F32M header says {w}x{h}x{c} but holds {} samples", body.len() / 4),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(Image::new(w, h, c, data, ColorSpace::Linear)?)
}

/// Loads an image and returns it in linear light.
///
/// Integer formats are scaled to `[0, 1]`; when `encoding` is
/// [`ColorSpace::Srgb`] the colour channels are then linearized (alpha
/// never is). `F32M` files are returned unchanged.
pub fn load_image(path: impl AsRef<Path>, encoding: ColorSpace) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    if bytes.starts_with(F32M_MAGIC) {
        return decode_f32m(&bytes, path);
    }
    let format = image::guess_format(&bytes).map_err(|source| Error::Decode {
        path: path.into(),
        source,
    })?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
        return Err(Error::format(path, format!("unsupported format {format:?}")));
    }
    let dynamic = image::load_from_memory_with_format(&bytes, format).map_err(|source| Error::Decode {
        path: path.into(),
        source,
    })?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let color = dynamic.color();
    let channels = color.channel_count() as usize;
    let sixteen = color.bytes_per_pixel() / color.channel_count() > 1;
    let mut data: Vec<f32> = match (channels, sixteen) {
        (1, false) => dynamic.into_luma8().into_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        (2, false) => dynamic.into_luma_alpha8().into_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        (3, false) => dynamic.into_rgb8().into_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        (4, false) => dynamic.into_rgba8().into_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        (1, true) => dynamic.into_luma16().into_raw().iter().map(|&v| v as f32 / 65535.0).collect(),
        (2, true) => dynamic.into_luma_alpha16().into_raw().iter().map(|&v| v as f32 / 65535.0).collect(),
        (3, true) => dynamic.into_rgb16().into_raw().iter().map(|&v| v as f32 / 65535.0).collect(),
        (4, true) => dynamic.into_rgba16().into_raw().iter().map(|&v| v as f32 / 65535.0).collect(),
        _ => return Err(Error::format(path, format!("unsupported pixel layout {color:?}"))),
    };
    if encoding == ColorSpace::Srgb {
        let colour = if channels % 2 == 0 { channels - 1 } else { channels };
        for px in data.chunks_exact_mut(channels) {
            px[..colour].iter_mut().for_each(|v| *v = srgb_to_linear(*v));
        }
    }
    Ok(Image::new(w, h, channels, data, ColorSpace::Linear)?)
}

/// Loads a single-channel map. Multi-channel integer files contribute their
/// first channel. With `expect` set, other dimensions are an error.
pub fn load_field(path: impl AsRef<Path>, kind: FieldKind, expect: Option<(usize, usize)>) -> Result<FieldMap> {
    let path = path.as_ref();
    let image = load_image(path, ColorSpace::Linear)?;
    if let Some(dims) = expect {
        if image.dims() != dims {
            return Err(Error::format(
                path,
                format!("expected {}x{}, found {}x{}", dims.0, dims.1, image.width(), image.height()),
            ));
        }
    }
    Ok(image.channel(0, kind))
}

fn quantize(v: f32, max: f32) -> f32 {
    (v.clamp(0.0, 1.0) * max).round()
}

/// Integer samples of `image` in the encoding written to disk: linear
/// colour images are sRGB-encoded (alpha excepted), grey maps are written
/// as they are.
fn encoded_samples(image: &Image) -> Vec<f32> {
    let ch = image.channels();
    let colour = if ch % 2 == 0 { ch - 1 } else { ch };
    let mut data = image.data().to_vec();
    if image.colorspace() == ColorSpace::Linear && ch >= 3 {
        for px in data.chunks_exact_mut(ch) {
            px[..colour].iter_mut().for_each(|v| *v = linear_to_srgb(*v));
        }
    }
    data
}

fn dynamic_image(image: &Image, sixteen: bool) -> DynamicImage {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let data = encoded_samples(image);
    if sixteen {
        let px: Vec<u16> = data.iter().map(|&v| quantize(v, 65535.0) as u16).collect();
        match image.channels() {
            1 => DynamicImage::ImageLuma16(ImageBuffer::from_raw(w, h, px).unwrap()),
            2 => DynamicImage::ImageLumaA16(ImageBuffer::from_raw(w, h, px).unwrap()),
            3 => DynamicImage::ImageRgb16(ImageBuffer::from_raw(w, h, px).unwrap()),
            _ => DynamicImage::ImageRgba16(ImageBuffer::from_raw(w, h, px).unwrap()),
        }
    } else {
        let px: Vec<u8> = data.iter().map(|&v| quantize(v, 255.0) as u8).collect();
        match image.channels() {
            1 => DynamicImage::ImageLuma8(ImageBuffer::from_raw(w, h, px).unwrap()),
            2 => DynamicImage::ImageLumaA8(ImageBuffer::from_raw(w, h, px).unwrap()),
            3 => DynamicImage::ImageRgb8(ImageBuffer::from_raw(w, h, px).unwrap()),
            _ => DynamicImage::ImageRgba8(ImageBuffer::from_raw(w, h, px).unwrap()),
        }
    }
}

/// Saves by extension: `.f32m` is written raw; `.png`, `.pgm` and `.ppm`
/// are 8-bit. Linear RGB(A) is sRGB-encoded on the way out, one- and
/// two-channel maps are not; load the latter back with
/// [`ColorSpace::Linear`]. Use
/// [`save_image_png16`] for 16-bit output.
pub fn save_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = match ext.as_str() {
        "f32m" => encode_f32m(image),
        "png" => encode_with(&dynamic_image(image, false), ImageFormat::Png, path)?,
        "pgm" | "ppm" | "pnm" => {
            let rgb = if image.channels() % 2 == 0 { drop_alpha(image) } else { image.clone() };
            encode_with(&dynamic_image(&rgb, false), ImageFormat::Pnm, path)?
        }
        _ => return Err(Error::format(path, "unknown extension; use .png, .pgm, .ppm or .f32m")),
    };
    fs::write(path, bytes).map_err(Error::io(path))
}

pub fn save_image_png16(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_with(&dynamic_image(image, true), ImageFormat::Png, path)?;
    fs::write(path, bytes).map_err(Error::io(path))
}

fn drop_alpha(image: &Image) -> Image {
    let ch = image.channels();
    let keep = ch - 1;
    let data = image
        .data()
        .chunks_exact(ch)
        .flat_map(|p| p[..keep].to_vec())
        .collect();
    Image::new(image.width(), image.height(), keep, data, image.colorspace()).expect("same size")
}

fn encode_with(image: &DynamicImage, format: ImageFormat, path: &Path) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    image.write_to(&mut buf, format).map_err(|source| Error::Decode {
        path: path.into(),
        source,
    })?;
    Ok(buf.into_inner())
}

pub fn save_field(field: &FieldMap, path: impl AsRef<Path>) -> Result<()> {
    save_image(&field.clone().into_image(), path)
}

/// Writes `field` as an 8-bit grey PNG stretched from its minimum to its
/// maximum (a constant map is written mid-grey).
pub fn save_normalized_png(field: &FieldMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (lo, hi) = field.min_max();
    let span = hi - lo;
    let px: Vec<u8> = field
        .data()
        .iter()
        .map(|&v| if span > 0.0 { quantize((v - lo) / span, 255.0) as u8 } else { 128 })
        .collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(field.width() as u32, field.height() as u32, px).expect("size");
    let bytes = encode_with(&DynamicImage::ImageLuma8(buf), ImageFormat::Png, path)?;
    fs::write(path, bytes).map_err(Error::io(path))
}

/// Quantizes linear RGB to the 8-bit sRGB bytes [`save_image`] would write.
pub fn encode_srgb8(image: &Image) -> Vec<u8> {
    dynamic_image(&image.to_rgb(), false).into_rgb8().into_raw()
}

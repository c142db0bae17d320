//! Lossless RGB images, block-variance maps and the candidate slot set.
//!
//! Candidate (pixel, channel) slots come from the blocks with the highest
//! luminance variance; flat regions stay untouched so the embedding hides
//! in edges and texture.

use std::io::Cursor;

use image::{DynamicImage, ImageFormat};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("unsupported image: {0}")]
    UnsupportedImage(String),
    #[error("candidate selection produced no slots")]
    EmptyCandidateSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// 8-bit RGB raster, channels interleaved, rows top-to-bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::MalformedImage(format!(
                "zero dimension ({width}x{height})"
            )));
        }
        // Slot indices are u32; cap total slots (pixels * 3) accordingly.
        if width as u64 * height as u64 > (u32::MAX / 3) as u64 {
            return Err(ImageError::MalformedImage(format!(
                "{width}x{height} exceeds the supported pixel count"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(ImageError::MalformedImage(format!(
                "value count {} does not match {width}x{height}x3 = {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Solid-color image, handy for tests and synthetic covers.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        Self::from_raw(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> u32 {
        self.width * self.height
    }

    /// Total number of channel values (`width * height * 3`).
    pub fn value_count(&self) -> usize {
        self.data.len()
    }

    /// Channel value at a row-major pixel index; `channel` is 0, 1 or 2.
    #[inline]
    pub fn value(&self, pixel: u32, channel: u8) -> u8 {
        self.data[pixel as usize * 3 + channel as usize]
    }

    #[inline]
    pub fn set_value(&mut self, pixel: u32, channel: u8, value: u8) {
        self.data[pixel as usize * 3 + channel as usize] = value;
    }

    pub fn rgb(&self, pixel: u32) -> [u8; 3] {
        let at = pixel as usize * 3;
        [self.data[at], self.data[at + 1], self.data[at + 2]]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// Rounded ITU-R BT.601 luminance per pixel.
    pub fn luminance(&self) -> Vec<u8> {
        self.data
            .chunks_exact(3)
            .map(|px| luma(px[0], px[1], px[2]))
            .collect()
    }
}

#[inline]
pub(crate) fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

/// Decodes a lossless PNG or BMP into an [`RasterImage`], discarding alpha.
///
/// Lossy containers and bit depths other than 8 are rejected: their
/// re-encoding would destroy embedded LSBs.
pub fn load_image(raw: &[u8]) -> Result<RasterImage, ImageError> {
    let format = image::guess_format(raw)
        .map_err(|e| ImageError::MalformedImage(format!("unrecognized container: {e}")))?;
    match format {
        ImageFormat::Png | ImageFormat::Bmp => {}
        other => {
            return Err(ImageError::UnsupportedImage(format!(
                "{other:?} container (only lossless PNG/BMP supported)"
            )))
        }
    }
    let decoded = image::load_from_memory_with_format(raw, format)
        .map_err(|e| ImageError::MalformedImage(e.to_string()))?;
    let (rgb, width, height) = match decoded {
        DynamicImage::ImageRgb8(img) => {
            let (w, h) = (img.width(), img.height());
            (img.into_raw(), w, h)
        }
        DynamicImage::ImageRgba8(img) => {
            let (w, h) = (img.width(), img.height());
            let mut data = Vec::with_capacity(w as usize * h as usize * 3);
            for px in img.pixels() {
                data.extend_from_slice(&px.0[..3]);
            }
            (data, w, h)
        }
        other => {
            return Err(ImageError::UnsupportedImage(format!(
                "{:?} color layout (only 8-bit RGB/RGBA supported)",
                other.color()
            )))
        }
    };
    RasterImage::from_raw(width, height, rgb)
}

/// Encodes to 8-bit RGB PNG. `load_image(save_image(img)) == img` for every
/// valid image.
pub fn save_image(img: &RasterImage) -> Vec<u8> {
    let buffer = image::RgbImage::from_raw(img.width, img.height, img.data.clone())
        .expect("RasterImage invariants guarantee a well-formed buffer");
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageRgb8(buffer)
        .write_to(&mut out, ImageFormat::Png)
        .expect("PNG encoding of a valid RGB image cannot fail");
    out.into_inner()
}

/// Per-block luminance variance, blocks in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceMap {
    block_size: u32,
    blocks_x: u32,
    blocks_y: u32,
    variances: Vec<f64>,
}

impl VarianceMap {
    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.variances.len()
    }

    pub fn blocks_x(&self) -> u32 {
        self.blocks_x
    }

    pub fn blocks_y(&self) -> u32 {
        self.blocks_y
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

/// Population variance of rounded luminance per `block_size`-sized block;
/// edge blocks use their actual (smaller) pixel count.
pub fn block_variance_map(img: &RasterImage, block_size: u32) -> Result<VarianceMap, ImageError> {
    if block_size == 0 {
        return Err(ImageError::InvalidParameter(
            "block size must be at least 1".into(),
        ));
    }
    let blocks_x = img.width.div_ceil(block_size);
    let blocks_y = img.height.div_ceil(block_size);
    let luma = img.luminance();

    let mut variances = Vec::with_capacity(blocks_x as usize * blocks_y as usize);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let x0 = bx * block_size;
            let y0 = by * block_size;
            let x1 = (x0 + block_size).min(img.width);
            let y1 = (y0 + block_size).min(img.height);

            let mut sum: i64 = 0;
            let mut sum_sq: i64 = 0;
            for y in y0..y1 {
                let row = y as usize * img.width as usize;
                for x in x0..x1 {
                    let v = luma[row + x as usize] as i64;
                    sum += v;
                    sum_sq += v * v;
                }
            }
            let n = ((x1 - x0) * (y1 - y0)) as i64;
            // var = E[L^2] - E[L]^2, kept exact in integers until one divide.
            let var = (n * sum_sq - sum * sum) as f64 / (n * n) as f64;
            variances.push(var);
        }
    }
    Ok(VarianceMap {
        block_size,
        blocks_x,
        blocks_y,
        variances,
    })
}

/// One embeddable channel value: a row-major pixel index plus channel 0..=2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub pixel: u32,
    pub channel: u8,
}

/// Deterministic ordered list of embeddable slots.
///
/// Order: blocks by variance descending (ties broken by lower block index),
/// then pixel index ascending within a block, then channel ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    slots: Vec<Slot>,
    width: u32,
    height: u32,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    #[inline]
    pub fn slot(&self, index: usize) -> Slot {
        self.slots[index]
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn source_dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// Selects the `ceil(top_fraction * block_count)` highest-variance blocks
/// and emits every (pixel, channel) slot inside them.
pub fn candidate_positions(
    vmap: &VarianceMap,
    img: &RasterImage,
    top_fraction: f64,
) -> Result<CandidateSet, ImageError> {
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(ImageError::InvalidParameter(format!(
            "top fraction {top_fraction} outside (0, 1]"
        )));
    }
    let expected_blocks =
        img.width.div_ceil(vmap.block_size) as usize * img.height.div_ceil(vmap.block_size) as usize;
    if vmap.block_count() != expected_blocks {
        return Err(ImageError::InvalidParameter(
            "variance map was not computed from this image".into(),
        ));
    }

    let mut order: Vec<usize> = (0..vmap.block_count()).collect();
    order.sort_by(|&a, &b| {
        vmap.variances[b]
            .total_cmp(&vmap.variances[a])
            .then(a.cmp(&b))
    });
    let selected = (top_fraction * vmap.block_count() as f64).ceil() as usize;
    let selected = selected.clamp(1, vmap.block_count());

    let bs = vmap.block_size;
    let mut slots = Vec::new();
    for &block in &order[..selected] {
        let bx = block as u32 % vmap.blocks_x;
        let by = block as u32 / vmap.blocks_x;
        let x0 = bx * bs;
        let y0 = by * bs;
        let x1 = (x0 + bs).min(img.width);
        let y1 = (y0 + bs).min(img.height);
        for y in y0..y1 {
            for x in x0..x1 {
                let pixel = y * img.width + x;
                for channel in 0..3u8 {
                    slots.push(Slot { pixel, channel });
                }
            }
        }
    }
    if slots.is_empty() {
        return Err(ImageError::EmptyCandidateSet);
    }
    Ok(CandidateSet {
        slots,
        width: img.width,
        height: img.height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(width: u32, height: u32) -> RasterImage {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for y in 0..height {
            for x in 0..width {
                let v = if (x + y) % 2 == 0 { 0 } else { 255 };
                data.extend_from_slice(&[v, v, v]);
            }
        }
        RasterImage::from_raw(width, height, data).unwrap()
    }

    #[test]
    fn png_round_trip_is_exact() {
        let img = checkerboard(13, 7);
        let bytes = save_image(&img);
        assert_eq!(load_image(&bytes).unwrap(), img);
    }

    #[test]
    fn single_black_pixel_round_trips() {
        let img = RasterImage::from_raw(1, 1, vec![0, 0, 0]).unwrap();
        let decoded = load_image(&save_image(&img)).unwrap();
        assert_eq!(decoded.rgb(0), [0, 0, 0]);
    }

    #[test]
    fn known_pixels_survive_decode() {
        let img = RasterImage::from_raw(
            2,
            2,
            vec![1, 2, 3, 10, 20, 30, 100, 110, 120, 200, 210, 220],
        )
        .unwrap();
        let decoded = load_image(&save_image(&img)).unwrap();
        assert_eq!(decoded.as_bytes(), img.as_bytes());
    }

    #[test]
    fn large_round_trip_preserves_every_value() {
        let mut data = Vec::with_capacity(512 * 512 * 3);
        let mut state = 0x9E3779B9u32;
        for _ in 0..512 * 512 * 3 {
            state = state.wrapping_mul(1664525).wrapping_add(1013904223);
            data.push((state >> 24) as u8);
        }
        let img = RasterImage::from_raw(512, 512, data).unwrap();
        let decoded = load_image(&save_image(&img)).unwrap();
        assert!(decoded.as_bytes().iter().eq(img.as_bytes().iter()));
    }

    #[test]
    fn bmp_read_is_supported() {
        let rgb = image::RgbImage::from_fn(5, 3, |x, y| {
            image::Rgb([(x * 40) as u8, (y * 70) as u8, 200])
        });
        let mut bytes = Cursor::new(Vec::new());
        DynamicImage::ImageRgb8(rgb)
            .write_to(&mut bytes, ImageFormat::Bmp)
            .unwrap();
        let img = load_image(&bytes.into_inner()).unwrap();
        assert_eq!((img.width(), img.height()), (5, 3));
        assert_eq!(img.rgb(6), [40, 70, 200]);
    }

    #[test]
    fn rgba_alpha_is_discarded() {
        let rgba = image::RgbaImage::from_fn(2, 1, |x, _| image::Rgba([x as u8, 5, 9, 77]));
        let mut bytes = Cursor::new(Vec::new());
        DynamicImage::ImageRgba8(rgba)
            .write_to(&mut bytes, ImageFormat::Png)
            .unwrap();
        let img = load_image(&bytes.into_inner()).unwrap();
        assert_eq!(img.rgb(0), [0, 5, 9]);
        assert_eq!(img.rgb(1), [1, 5, 9]);
    }

    #[test]
    fn jpeg_container_rejected() {
        // JFIF signature is enough for container sniffing.
        let fake_jpeg = [0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, b'J', b'F', b'I', b'F', 0x00];
        let err = load_image(&fake_jpeg).unwrap_err();
        assert!(matches!(err, ImageError::UnsupportedImage(_)));
    }

    #[test]
    fn truncated_png_rejected() {
        let bytes = save_image(&checkerboard(8, 8));
        let err = load_image(&bytes[..bytes.len() / 2]).unwrap_err();
        assert!(matches!(err, ImageError::MalformedImage(_)));
    }

    #[test]
    fn sixteen_bit_png_rejected() {
        let gray16 = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_pixel(
            2,
            2,
            image::Luma([1000u16]),
        );
        let mut bytes = Cursor::new(Vec::new());
        DynamicImage::ImageLuma16(gray16)
            .write_to(&mut bytes, ImageFormat::Png)
            .unwrap();
        let err = load_image(&bytes.into_inner()).unwrap_err();
        assert!(matches!(err, ImageError::UnsupportedImage(_)));
    }

    #[test]
    fn constant_image_has_zero_variance() {
        let img = RasterImage::filled(16, 16, [42, 42, 42]).unwrap();
        let vmap = block_variance_map(&img, 8).unwrap();
        assert_eq!(vmap.block_count(), 4);
        assert!(vmap.variances().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn checkerboard_block_variance() {
        // Luminance alternates 0/255: mean 127.5, every deviation 127.5.
        let img = checkerboard(8, 8);
        let vmap = block_variance_map(&img, 8).unwrap();
        assert_eq!(vmap.block_count(), 1);
        assert_eq!(vmap.variances()[0], 16256.25);
    }

    #[test]
    fn single_bright_pixel_variance() {
        // One L=8 pixel among 63 zeros: mean 1/8, variance 63/64.
        let mut img = RasterImage::filled(8, 8, [0, 0, 0]).unwrap();
        img.set_value(0, 0, 8);
        img.set_value(0, 1, 8);
        img.set_value(0, 2, 8);
        let vmap = block_variance_map(&img, 8).unwrap();
        assert_eq!(vmap.variances()[0], 0.984375);
    }

    #[test]
    fn edge_blocks_use_actual_pixel_count() {
        // 9x8 with block size 8: right edge block is 1x8.
        let mut img = RasterImage::filled(9, 8, [0, 0, 0]).unwrap();
        // Make one pixel of the 1x8 edge block bright: n=8, mean=255/8.
        img.set_value(8, 0, 255);
        img.set_value(8, 1, 255);
        img.set_value(8, 2, 255);
        let vmap = block_variance_map(&img, 8).unwrap();
        assert_eq!(vmap.block_count(), 2);
        let n = 8f64;
        let expected = (n * 255.0 * 255.0 - 255.0 * 255.0) / (n * n);
        assert_eq!(vmap.variances()[1], expected);
    }

    #[test]
    fn full_fraction_covers_every_slot() {
        let img = checkerboard(16, 8);
        let vmap = block_variance_map(&img, 8).unwrap();
        let set = candidate_positions(&vmap, &img, 1.0).unwrap();
        assert_eq!(set.len(), 16 * 8 * 3);
    }

    #[test]
    fn tie_break_prefers_lower_block_index() {
        let img = RasterImage::filled(16, 16, [7, 7, 7]).unwrap();
        let vmap = block_variance_map(&img, 8).unwrap();
        let set = candidate_positions(&vmap, &img, 0.5).unwrap();
        // Blocks 0 and 1 (top row) win the all-zero tie.
        assert_eq!(set.len(), 2 * 64 * 3);
        assert!(set.slots().iter().all(|s| s.pixel < 8 * 16));
    }

    #[test]
    fn selects_highest_variance_blocks() {
        // 16x16, blocks of 8 -> 4 blocks. Give blocks distinct variances
        // by brightening a different number of pixels in each.
        let mut img = RasterImage::filled(16, 16, [0, 0, 0]).unwrap();
        let brighten = |img: &mut RasterImage, bx: u32, by: u32, count: u32| {
            for i in 0..count {
                let pixel = (by * 8 + i / 8) * 16 + bx * 8 + i % 8;
                for c in 0..3 {
                    img.set_value(pixel, c, 255);
                }
            }
        };
        brighten(&mut img, 0, 0, 5); // block 0
        brighten(&mut img, 1, 0, 1); // block 1
        brighten(&mut img, 0, 1, 9); // block 2
        brighten(&mut img, 1, 1, 1); // block 3
        let vmap = block_variance_map(&img, 8).unwrap();
        let set = candidate_positions(&vmap, &img, 0.5).unwrap();
        assert_eq!(set.len(), 2 * 64 * 3);
        // Block 2 has the highest variance and is emitted first.
        assert!(set.slot(0).pixel >= 8 * 16);
        let in_block = |pixel: u32, bx: u32, by: u32| {
            let (x, y) = (pixel % 16, pixel / 16);
            x / 8 == bx && y / 8 == by
        };
        assert!(set.slots().iter().all(|s| {
            in_block(s.pixel, 0, 1) || in_block(s.pixel, 0, 0)
        }));
    }

    #[test]
    fn ordering_is_deterministic() {
        let img = checkerboard(32, 32);
        let vmap = block_variance_map(&img, 8).unwrap();
        let a = candidate_positions(&vmap, &img, 0.4).unwrap();
        let b = candidate_positions(&vmap, &img, 0.4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn growing_fraction_keeps_selected_blocks() {
        let img = checkerboard(32, 32);
        let vmap = block_variance_map(&img, 8).unwrap();
        let small = candidate_positions(&vmap, &img, 0.25).unwrap();
        let large = candidate_positions(&vmap, &img, 0.75).unwrap();
        assert_eq!(&large.slots()[..small.len()], small.slots());
    }

    #[test]
    fn zero_top_fraction_rejected() {
        let img = checkerboard(8, 8);
        let vmap = block_variance_map(&img, 8).unwrap();
        let err = candidate_positions(&vmap, &img, 0.0).unwrap_err();
        assert!(matches!(err, ImageError::InvalidParameter(_)));
    }
}

//! Cover/stego quality metrics: MSE, PSNR, SSIM and histogram distances.
//!
//! SSIM follows the standard form
//! `((2*mx*my + C1) * (2*cov + C2)) / ((mx^2 + my^2 + C1) * (vx + vy + C2))`
//! evaluated on rounded luminance over uniform 8x8 sliding windows with
//! stride 1, `C1 = (0.01*255)^2`, `C2 = (0.03*255)^2`, population statistics
//! per window, and the plain mean over all windows. Window sums are kept as
//! exact integers (integral images) so results are reproducible bit for bit.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::image::RasterImage;

pub const SSIM_WINDOW: usize = 8;
pub const SSIM_C1: f64 = 6.5025; // (0.01 * 255)^2
pub const SSIM_C2: f64 = 58.5225; // (0.03 * 255)^2

/// PSNR peak value for 8-bit channels.
pub const PSNR_PEAK_SQ: f64 = 255.0 * 255.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("image {0}x{1} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")]
    ImageTooSmall(u32, u32),
}

fn check_dims(a: &RasterImage, b: &RasterImage) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

/// Mean squared error over all `width * height * 3` channel values.
pub fn mse(cover: &RasterImage, stego: &RasterImage) -> Result<f64, MetricsError> {
    check_dims(cover, stego)?;
    let sum: u64 = cover
        .as_bytes()
        .iter()
        .zip(stego.as_bytes())
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / cover.value_count() as f64)
}

/// Peak signal-to-noise ratio in decibels, with an explicit sentinel for
/// identical images instead of a division by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Infinite,
    Decibels(f64),
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Self {
        if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Decibels(10.0 * (PSNR_PEAK_SQ / mse).log10())
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Psnr::Infinite)
    }

    /// Value with `Infinite` (and anything above) collapsed to `cap`.
    pub fn capped(&self, cap: f64) -> f64 {
        match *self {
            Psnr::Infinite => cap,
            Psnr::Decibels(db) => db.min(cap),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Psnr::Infinite => f64::INFINITY,
            Psnr::Decibels(db) => db,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Infinite => write!(f, "inf"),
            Psnr::Decibels(db) => write!(f, "{db}"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Psnr::Infinite => serializer.serialize_str("inf"),
            Psnr::Decibels(db) => serializer.serialize_f64(*db),
        }
    }
}

pub fn psnr(cover: &RasterImage, stego: &RasterImage) -> Result<Psnr, MetricsError> {
    Ok(Psnr::from_mse(mse(cover, stego)?))
}

/// Integral image with a zero top row and left column: entry
/// `(y + 1) * (w + 1) + (x + 1)` holds the sum over `[0..=x, 0..=y]`.
#[inline]
fn integral_index(w: usize, x: usize, y: usize) -> usize {
    y * (w + 1) + x
}

pub(crate) struct SsimScratch {
    int_y: Vec<i64>,
    int_yy: Vec<i64>,
    int_xy: Vec<i64>,
}

impl SsimScratch {
    pub(crate) fn new() -> Self {
        Self {
            int_y: Vec::new(),
            int_yy: Vec::new(),
            int_xy: Vec::new(),
        }
    }
}

/// Per-window `(sum, sum of squares)` of the cover luminance, windows in
/// row-major order. Computed once per cover and reused across evaluations.
pub(crate) fn cover_window_sums(lx: &[u8], w: usize, h: usize) -> Vec<(i64, i64)> {
    let stride = w + 1;
    let mut int_x = vec![0i64; stride * (h + 1)];
    let mut int_xx = vec![0i64; stride * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            let v = lx[y * w + x] as i64;
            let at = integral_index(w, x + 1, y + 1);
            int_x[at] = v + int_x[at - 1] + int_x[at - stride] - int_x[at - stride - 1];
            int_xx[at] = v * v + int_xx[at - 1] + int_xx[at - stride] - int_xx[at - stride - 1];
        }
    }
    let k = SSIM_WINDOW;
    let mut windows = Vec::with_capacity((h - k + 1) * (w - k + 1));
    for wy in 0..=h - k {
        for wx in 0..=w - k {
            let a = integral_index(w, wx, wy);
            let b = integral_index(w, wx + k, wy);
            let c = integral_index(w, wx, wy + k);
            let d = integral_index(w, wx + k, wy + k);
            windows.push((
                int_x[d] - int_x[b] - int_x[c] + int_x[a],
                int_xx[d] - int_xx[b] - int_xx[c] + int_xx[a],
            ));
        }
    }
    windows
}

#[inline]
fn window_ssim(n: f64, s1x: i64, s2x: i64, s1y: i64, s2y: i64, s12: i64) -> f64 {
    let mx = s1x as f64 / n;
    let my = s1y as f64 / n;
    let vx = s2x as f64 / n - mx * mx;
    let vy = s2y as f64 / n - my * my;
    let cov = s12 as f64 / n - mx * my;
    ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2))
}

/// SSIM of stego luminance `ly` against a cover whose per-window sums were
/// precomputed by [`cover_window_sums`]. `lx` must be that same cover
/// luminance; the cross integral needs it.
pub(crate) fn ssim_with_cached_cover(
    cover_windows: &[(i64, i64)],
    lx: &[u8],
    ly: &[u8],
    w: usize,
    h: usize,
    scratch: &mut SsimScratch,
) -> f64 {
    let stride = w + 1;
    let cells = stride * (h + 1);
    scratch.int_y.clear();
    scratch.int_y.resize(cells, 0);
    scratch.int_yy.clear();
    scratch.int_yy.resize(cells, 0);
    scratch.int_xy.clear();
    scratch.int_xy.resize(cells, 0);
    let int_y = &mut scratch.int_y;
    let int_yy = &mut scratch.int_yy;
    let int_xy = &mut scratch.int_xy;

    for y in 0..h {
        for x in 0..w {
            let vy = ly[y * w + x] as i64;
            let vx = lx[y * w + x] as i64;
            let at = integral_index(w, x + 1, y + 1);
            int_y[at] = vy + int_y[at - 1] + int_y[at - stride] - int_y[at - stride - 1];
            int_yy[at] = vy * vy + int_yy[at - 1] + int_yy[at - stride] - int_yy[at - stride - 1];
            int_xy[at] = vx * vy + int_xy[at - 1] + int_xy[at - stride] - int_xy[at - stride - 1];
        }
    }

    let k = SSIM_WINDOW;
    let n = (k * k) as f64;
    let mut sum = 0.0;
    let mut window = 0;
    for wy in 0..=h - k {
        for wx in 0..=w - k {
            let a = integral_index(w, wx, wy);
            let b = integral_index(w, wx + k, wy);
            let c = integral_index(w, wx, wy + k);
            let d = integral_index(w, wx + k, wy + k);
            let (s1x, s2x) = cover_windows[window];
            sum += window_ssim(
                n,
                s1x,
                s2x,
                int_y[d] - int_y[b] - int_y[c] + int_y[a],
                int_yy[d] - int_yy[b] - int_yy[c] + int_yy[a],
                int_xy[d] - int_xy[b] - int_xy[c] + int_xy[a],
            );
            window += 1;
        }
    }
    sum / cover_windows.len() as f64
}

/// Structural similarity on luminance; see the module docs for the exact
/// variant.
pub fn ssim(cover: &RasterImage, stego: &RasterImage) -> Result<f64, MetricsError> {
    check_dims(cover, stego)?;
    let (w, h) = (cover.width() as usize, cover.height() as usize);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(MetricsError::ImageTooSmall(cover.width(), cover.height()));
    }
    let lx = cover.luminance();
    let ly = stego.luminance();
    let cover_windows = cover_window_sums(&lx, w, h);
    let mut scratch = SsimScratch::new();
    Ok(ssim_with_cached_cover(
        &cover_windows,
        &lx,
        &ly,
        w,
        h,
        &mut scratch,
    ))
}

/// L1 and chi-square distance between 256-bin histograms of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramDistance {
    pub l1: u64,
    pub chi_square: f64,
}

fn channel_histogram(img: &RasterImage, channel: usize) -> [u64; 256] {
    let mut bins = [0u64; 256];
    for px in img.as_bytes().chunks_exact(3) {
        bins[px[channel] as usize] += 1;
    }
    bins
}

/// Per-channel histogram distances; chi-square skips bins where both
/// histograms are empty to avoid 0/0.
pub fn compare_histograms(
    cover: &RasterImage,
    stego: &RasterImage,
) -> Result<[HistogramDistance; 3], MetricsError> {
    check_dims(cover, stego)?;
    let mut out = [HistogramDistance {
        l1: 0,
        chi_square: 0.0,
    }; 3];
    for (channel, entry) in out.iter_mut().enumerate() {
        let a = channel_histogram(cover, channel);
        let b = channel_histogram(stego, channel);
        let mut l1 = 0u64;
        let mut chi = 0.0f64;
        for bin in 0..256 {
            let (x, y) = (a[bin], b[bin]);
            l1 += x.abs_diff(y);
            if x + y > 0 {
                let diff = x as f64 - y as f64;
                chi += diff * diff / (x + y) as f64;
            }
        }
        *entry = HistogramDistance {
            l1,
            chi_square: chi,
        };
    }
    Ok(out)
}

/// All metrics for one cover/stego pair.
///
/// Serializes to a flat JSON object and to one CSV row with columns
/// `mse,psnr,ssim,l1_r,l1_g,l1_b,chi_square_r,chi_square_g,chi_square_b`
/// (PSNR rendered as `inf` for identical images).
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr: Psnr,
    pub ssim: f64,
    pub histogram: [HistogramDistance; 3],
}

impl QualityReport {
    pub const CSV_HEADER: &'static str =
        "mse,psnr,ssim,l1_r,l1_g,l1_b,chi_square_r,chi_square_g,chi_square_b";

    pub fn compute(cover: &RasterImage, stego: &RasterImage) -> Result<Self, MetricsError> {
        let mse = mse(cover, stego)?;
        Ok(Self {
            mse,
            psnr: Psnr::from_mse(mse),
            ssim: ssim(cover, stego)?,
            histogram: compare_histograms(cover, stego)?,
        })
    }

    pub fn csv_row(&self) -> String {
        let [r, g, b] = &self.histogram;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.mse,
            self.psnr,
            self.ssim,
            r.l1,
            g.l1,
            b.l1,
            r.chi_square,
            g.chi_square,
            b.chi_square
        )
    }
}

impl Serialize for QualityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("QualityReport", 9)?;
        s.serialize_field("mse", &self.mse)?;
        s.serialize_field("psnr", &self.psnr)?;
        s.serialize_field("ssim", &self.ssim)?;
        s.serialize_field("l1_r", &self.histogram[0].l1)?;
        s.serialize_field("l1_g", &self.histogram[1].l1)?;
        s.serialize_field("l1_b", &self.histogram[2].l1)?;
        s.serialize_field("chi_square_r", &self.histogram[0].chi_square)?;
        s.serialize_field("chi_square_g", &self.histogram[1].chi_square)?;
        s.serialize_field("chi_square_b", &self.histogram[2].chi_square)?;
        s.end()
    }
}

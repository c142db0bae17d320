//! The objective the optimizer maximizes:
//! `Z = alpha * SSIM + (1 - alpha) * min(PSNR, 100) / 100`.
//!
//! One candidate position is scored by decoding it to a plan, simulating
//! the embedding, and comparing the simulated stego against the cover.
//! Nothing is materialized: squared error comes straight from the changed
//! values, and SSIM reuses per-window cover sums precomputed once per run,
//! so an evaluation costs far less than an actual embed-plus-metrics pass
//! while producing bit-identical numbers.

use std::cell::RefCell;

use super::{decode_plan, LsbDepth, StegoError};
use crate::bitstream::BitStream;
use crate::image::{luma, CandidateSet, RasterImage};
use crate::metrics::{cover_window_sums, ssim_with_cached_cover, Psnr, SsimScratch, SSIM_WINDOW};

/// Weight between structure preservation and raw signal fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessConfig {
    /// SSIM weight in [0, 1]; PSNR gets `1 - alpha`.
    pub alpha: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

impl FitnessConfig {
    pub fn validate(&self) -> Result<(), StegoError> {
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return Err(StegoError::InvalidConfig(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        Ok(())
    }
}

struct EvalScratch {
    rgb: Vec<u8>,
    luma: Vec<u8>,
    touched: Vec<u32>,
    ssim: SsimScratch,
}

thread_local! {
    static SCRATCH: RefCell<EvalScratch> = RefCell::new(EvalScratch {
        rgb: Vec::new(),
        luma: Vec::new(),
        touched: Vec::new(),
        ssim: SsimScratch::new(),
    });
}

/// Reusable fitness state for one (cover, candidates, payload) triple.
///
/// Evaluations are pure with respect to the shared borrowed inputs and use
/// per-thread scratch buffers, so one evaluator may be called from many
/// threads concurrently.
pub struct FitnessEvaluator<'a> {
    cover: &'a RasterImage,
    candidates: &'a CandidateSet,
    bits: &'a BitStream,
    config: FitnessConfig,
    lsb_depth: LsbDepth,
    cover_luma: Vec<u8>,
    cover_windows: Vec<(i64, i64)>,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(
        cover: &'a RasterImage,
        candidates: &'a CandidateSet,
        bits: &'a BitStream,
        config: FitnessConfig,
        lsb_depth: LsbDepth,
    ) -> Result<Self, StegoError> {
        config.validate()?;
        let (w, h) = (cover.width() as usize, cover.height() as usize);
        if w < SSIM_WINDOW || h < SSIM_WINDOW {
            return Err(crate::metrics::MetricsError::ImageTooSmall(
                cover.width(),
                cover.height(),
            )
            .into());
        }
        if candidates.source_dims() != (cover.width(), cover.height()) {
            return Err(StegoError::InvalidConfig(
                "candidate set was built from an image with different dimensions".into(),
            ));
        }
        let cover_luma = cover.luminance();
        let cover_windows = cover_window_sums(&cover_luma, w, h);
        Ok(Self {
            cover,
            candidates,
            bits,
            config,
            lsb_depth,
            cover_luma,
            cover_windows,
        })
    }

    /// Score a position, propagating decode/capacity errors.
    pub fn try_evaluate(&self, position: &[f64]) -> Result<f64, StegoError> {
        let plan = decode_plan(position, self.candidates, self.lsb_depth)?;
        if (plan.capacity_bits() as u64) < self.bits.len() as u64 {
            return Err(StegoError::CapacityExceeded {
                required: self.bits.len() as u64,
                available: plan.capacity_bits() as u64,
            });
        }

        let (w, h) = (self.cover.width() as usize, self.cover.height() as usize);
        let depth = self.lsb_depth.bits() as usize;
        let score = SCRATCH.with(|cell| {
            let scratch = &mut *cell.borrow_mut();
            scratch.rgb.clear();
            scratch.rgb.extend_from_slice(self.cover.as_bytes());
            scratch.luma.clear();
            scratch.luma.extend_from_slice(&self.cover_luma);
            scratch.touched.clear();

            // Simulated embedding: only changed values matter.
            let mut squared_error = 0u64;
            let mut cursor = 0;
            for slot in plan.slots() {
                if cursor >= self.bits.len() {
                    break;
                }
                let at = slot.pixel as usize * 3 + slot.channel as usize;
                let old = scratch.rgb[at];
                let mut value = old;
                for k in 0..depth {
                    if cursor >= self.bits.len() {
                        break;
                    }
                    let target = depth - 1 - k;
                    let bit = self.bits.bit(cursor).expect("cursor in range") as u8;
                    value = value & !(1 << target) | bit << target;
                    cursor += 1;
                }
                if value != old {
                    scratch.rgb[at] = value;
                    let diff = value as i64 - old as i64;
                    squared_error += (diff * diff) as u64;
                    scratch.touched.push(slot.pixel);
                }
            }
            for &pixel in &scratch.touched {
                let at = pixel as usize * 3;
                scratch.luma[pixel as usize] = luma(
                    scratch.rgb[at],
                    scratch.rgb[at + 1],
                    scratch.rgb[at + 2],
                );
            }

            let mse = squared_error as f64 / self.cover.value_count() as f64;
            let psnr = Psnr::from_mse(mse);
            let ssim = ssim_with_cached_cover(
                &self.cover_windows,
                &self.cover_luma,
                &scratch.luma,
                w,
                h,
                &mut scratch.ssim,
            );
            self.config.alpha * ssim + (1.0 - self.config.alpha) * psnr.capped(100.0) / 100.0
        });
        Ok(score)
    }

    /// Infallible objective for the optimizer; positions the decoder
    /// cannot use score negative infinity.
    pub fn evaluate(&self, position: &[f64]) -> f64 {
        self.try_evaluate(position).unwrap_or(f64::NEG_INFINITY)
    }
}

/// One-shot form of the fitness: builds the evaluator, scores `position`.
pub fn fitness(
    cover: &RasterImage,
    candidates: &CandidateSet,
    position: &[f64],
    bits: &BitStream,
    config: FitnessConfig,
    lsb_depth: LsbDepth,
) -> Result<f64, StegoError> {
    FitnessEvaluator::new(cover, candidates, bits, config, lsb_depth)?.try_evaluate(position)
}

//! End-to-end hide and recover runs.
//!
//! Embedding frames the audio, restricts candidates to high-variance
//! blocks, lets the configured optimizer pick slot assignments under the
//! PSNR/SSIM fitness, embeds the winning plan and packages the key the
//! receiver replays. Payloads that exceed candidate capacity are rejected
//! up front; depth 2 is the supported capacity escape hatch.

use std::fmt;
use std::str::FromStr;

use super::{
    capacity, decode_plan, embed_bits, extract_bits, FitnessConfig, FitnessEvaluator, LsbDepth,
    StegoError, StegoKey,
};
use crate::audio::{deframe_payload, frame_payload, AudioPayload};
use crate::image::{block_variance_map, candidate_positions, RasterImage};
use crate::metrics::QualityReport;
use crate::optimizer::{
    hho_optimize, random_search, OptimizationResult, OptimizerParams, SearchProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Hho,
    Random,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizerKind::Hho => write!(f, "hho"),
            OptimizerKind::Random => write!(f, "random"),
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hho" => Ok(OptimizerKind::Hho),
            "random" => Ok(OptimizerKind::Random),
            other => Err(format!("unknown optimizer '{other}' (expected hho|random)")),
        }
    }
}

/// Full pipeline configuration for one embedding run.
#[derive(Debug, Clone)]
pub struct EmbedSettings {
    pub optimizer: OptimizerKind,
    pub params: OptimizerParams,
    pub fitness: FitnessConfig,
    pub lsb_depth: LsbDepth,
    pub block_size: u32,
    pub top_fraction: f64,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Hho,
            params: OptimizerParams::default(),
            fitness: FitnessConfig::default(),
            lsb_depth: LsbDepth::One,
            block_size: 8,
            top_fraction: 0.5,
        }
    }
}

/// Everything an embedding run produces.
#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub stego: RasterImage,
    pub key: StegoKey,
    pub quality: QualityReport,
    pub optimization: OptimizationResult,
}

pub fn run_embedding(
    cover: &RasterImage,
    audio: &AudioPayload,
    settings: &EmbedSettings,
) -> Result<EmbedOutcome, StegoError> {
    settings.fitness.validate()?;
    let bits = frame_payload(audio)?;
    let vmap = block_variance_map(cover, settings.block_size)?;
    let candidates = candidate_positions(&vmap, cover, settings.top_fraction)?;

    let available = capacity(&candidates, settings.lsb_depth);
    if bits.len() as u64 > available {
        return Err(StegoError::CapacityExceeded {
            required: bits.len() as u64,
            available,
        });
    }

    let dimension = bits.len().div_ceil(settings.lsb_depth.bits() as usize);
    let evaluator = FitnessEvaluator::new(
        cover,
        &candidates,
        &bits,
        settings.fitness,
        settings.lsb_depth,
    )?;
    let problem = SearchProblem::uniform(
        dimension,
        0.0,
        (candidates.len() - 1) as f64,
        |position: &[f64]| evaluator.evaluate(position),
    )?;
    let optimization = match settings.optimizer {
        OptimizerKind::Hho => hho_optimize(&problem, &settings.params)?,
        OptimizerKind::Random => random_search(&problem, &settings.params)?,
    };

    let plan = decode_plan(&optimization.best_position, &candidates, settings.lsb_depth)?;
    let stego = embed_bits(cover, &plan, &bits)?;
    let quality = QualityReport::compute(cover, &stego)?;
    let key = StegoKey::new(
        cover.width(),
        cover.height(),
        settings.lsb_depth,
        bits.len() as u64,
        plan.slots().to_vec(),
    )?;
    Ok(EmbedOutcome {
        stego,
        key,
        quality,
        optimization,
    })
}

/// Replays the key against a stego image and recovers the audio payload,
/// bit-exact. A checksum failure means the wrong key, the wrong image, or
/// a carrier that went through lossy processing.
pub fn run_extraction(stego: &RasterImage, key: &StegoKey) -> Result<AudioPayload, StegoError> {
    if (key.width(), key.height()) != (stego.width(), stego.height()) {
        return Err(StegoError::KeyMismatch(format!(
            "key was made for a {}x{} image, stego is {}x{}",
            key.width(),
            key.height(),
            stego.width(),
            stego.height()
        )));
    }
    let plan = key.plan();
    let bits = extract_bits(stego, &plan, key.payload_bit_length() as usize)?;
    Ok(deframe_payload(&bits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioError;
    use crate::image::{load_image, save_image};
    use crate::stego::{read_key, write_key};

    fn textured_cover(width: u32, height: u32, phase: u32) -> RasterImage {
        let mut data = Vec::new();
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&[
                    ((x * 37 + y * 11 + phase) % 256) as u8,
                    ((x * 5 + y * 53 + phase * 7) % 256) as u8,
                    ((x * 13 + y * 29) % 256) as u8,
                ]);
            }
        }
        RasterImage::from_raw(width, height, data).unwrap()
    }

    fn short_audio(bytes: usize) -> AudioPayload {
        let data: Vec<u8> = (0..bytes).map(|i| (i * 31 % 256) as u8).collect();
        AudioPayload::new(8000, 1, 8, data).unwrap()
    }

    fn quick_settings(seed: u64) -> EmbedSettings {
        EmbedSettings {
            params: OptimizerParams {
                population_size: 4,
                max_iterations: 3,
                seed,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn embed_then_extract_recovers_audio() {
        let cover = textured_cover(48, 32, 0);
        let audio = short_audio(40);
        let outcome = run_embedding(&cover, &audio, &quick_settings(1)).unwrap();
        let recovered = run_extraction(&outcome.stego, &outcome.key).unwrap();
        assert_eq!(recovered, audio);
    }

    #[test]
    fn stego_survives_lossless_save_and_load() {
        let cover = textured_cover(48, 32, 3);
        let audio = short_audio(24);
        let outcome = run_embedding(&cover, &audio, &quick_settings(2)).unwrap();
        let reloaded = load_image(&save_image(&outcome.stego)).unwrap();
        let key = read_key(&write_key(&outcome.key)).unwrap();
        assert_eq!(run_extraction(&reloaded, &key).unwrap(), audio);
    }

    #[test]
    fn over_capacity_is_rejected_before_optimizing() {
        let cover = textured_cover(16, 16, 0);
        // Half the blocks of a 16x16 cover give 384 slots; this payload
        // frames to far more bits than that.
        let audio = short_audio(500);
        let err = run_embedding(&cover, &audio, &quick_settings(1)).unwrap_err();
        match err {
            StegoError::CapacityExceeded {
                required,
                available,
            } => {
                assert_eq!(required, (24 + 500) * 8);
                assert_eq!(available, 384);
            }
            other => panic!("expected CapacityExceeded, got {other:?}"),
        }
    }

    #[test]
    fn depth_two_doubles_capacity() {
        let cover = textured_cover(16, 16, 5);
        let audio = short_audio(60); // (24 + 60) * 8 = 672 bits > 384, <= 768
        let mut settings = quick_settings(4);
        settings.lsb_depth = LsbDepth::Two;
        let outcome = run_embedding(&cover, &audio, &settings).unwrap();
        assert_eq!(run_extraction(&outcome.stego, &outcome.key).unwrap(), audio);
    }

    #[test]
    fn mismatched_dimensions_fail_key_check() {
        let cover = textured_cover(48, 32, 1);
        let audio = short_audio(16);
        let outcome = run_embedding(&cover, &audio, &quick_settings(3)).unwrap();
        let other = textured_cover(32, 48, 1);
        let err = run_extraction(&other, &outcome.key).unwrap_err();
        assert!(matches!(err, StegoError::KeyMismatch(_)));
    }

    #[test]
    fn key_from_a_different_run_fails_checksum() {
        let cover_a = textured_cover(48, 32, 2);
        let cover_b = textured_cover(48, 32, 9);
        let audio = short_audio(32);
        let a = run_embedding(&cover_a, &audio, &quick_settings(7)).unwrap();
        let b = run_embedding(&cover_b, &audio, &quick_settings(8)).unwrap();
        let err = run_extraction(&a.stego, &b.key).unwrap_err();
        assert!(matches!(
            err,
            StegoError::Audio(AudioError::ChecksumMismatch { .. })
                | StegoError::Audio(AudioError::BadMagic)
                | StegoError::Audio(AudioError::VersionMismatch { .. })
                | StegoError::Audio(AudioError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn random_optimizer_round_trips_too() {
        let cover = textured_cover(48, 32, 4);
        let audio = short_audio(20);
        let mut settings = quick_settings(5);
        settings.optimizer = OptimizerKind::Random;
        let outcome = run_embedding(&cover, &audio, &settings).unwrap();
        assert_eq!(run_extraction(&outcome.stego, &outcome.key).unwrap(), audio);
    }

    #[test]
    fn same_settings_same_seed_identical_outputs() {
        let cover = textured_cover(48, 32, 6);
        let audio = short_audio(16);
        let a = run_embedding(&cover, &audio, &quick_settings(11)).unwrap();
        let b = run_embedding(&cover, &audio, &quick_settings(11)).unwrap();
        assert_eq!(a.stego, b.stego);
        assert_eq!(a.key, b.key);
        assert_eq!(a.optimization, b.optimization);
    }

    #[test]
    fn empty_audio_still_round_trips() {
        let cover = textured_cover(48, 32, 8);
        let audio = AudioPayload::new(44100, 2, 16, vec![]).unwrap();
        let outcome = run_embedding(&cover, &audio, &quick_settings(12)).unwrap();
        assert_eq!(run_extraction(&outcome.stego, &outcome.key).unwrap(), audio);
    }

    #[test]
    fn optimizer_kind_parses() {
        assert_eq!("hho".parse::<OptimizerKind>().unwrap(), OptimizerKind::Hho);
        assert_eq!(
            "random".parse::<OptimizerKind>().unwrap(),
            OptimizerKind::Random
        );
        assert!("pso".parse::<OptimizerKind>().is_err());
    }
}

//! Hide WAV audio inside lossless RGB images.
//!
//! The payload is framed into a checksummed bitstream and written into the
//! least significant bits of pixels picked from high-variance image blocks.
//! Which pixels exactly is decided by a Harris Hawks Optimization run that
//! maximizes a weighted PSNR/SSIM score, so the stego image stays as close
//! to the cover as the payload allows. Extraction replays the chosen
//! positions from a compact binary key file and recovers the audio
//! bit-exactly.
//!
//! ```no_run
//! use stegohawk::image::load_image;
//! use stegohawk::audio::parse_wav;
//! use stegohawk::stego::{run_embedding, run_extraction, EmbedSettings};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let cover = load_image(&std::fs::read("cover.png")?)?;
//! let audio = parse_wav(&std::fs::read("secret.wav")?)?;
//! let outcome = run_embedding(&cover, &audio, &EmbedSettings::default())?;
//! let recovered = run_extraction(&outcome.stego, &outcome.key)?;
//! assert_eq!(recovered, audio);
//! # Ok(())
//! # }
//! ```

pub mod audio;
pub mod bitstream;
pub mod cli;
pub mod image;
pub mod metrics;
pub mod optimizer;
pub mod stego;

pub use audio::AudioPayload;
pub use bitstream::BitStream;
pub use image::{CandidateSet, RasterImage, VarianceMap};
pub use metrics::QualityReport;
pub use optimizer::{OptimizationResult, OptimizerParams, SearchProblem};
pub use stego::{EmbedSettings, EmbeddingPlan, StegoKey};

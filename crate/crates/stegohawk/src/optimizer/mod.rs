//! Population-based maximization over bounded continuous vectors.
//!
//! Two optimizers share one problem interface and one result contract:
//! Harris Hawks Optimization ([`hho_optimize`]) and a uniform
//! [`random_search`] baseline. Runs are deterministic for a fixed seed:
//! every hawk draws from its own sub-stream derived from
//! `(seed, iteration, hawk)`, and updates are proposed against a snapshot
//! of the previous generation and applied in fixed hawk order, so results
//! do not depend on evaluation scheduling.

mod hho;
mod levy;
mod random;

pub use hho::hho_optimize;
pub use levy::levy_step;
pub use random::random_search;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptimizerError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),
}

/// A bounded continuous maximization problem.
///
/// The objective must be deterministic for a fixed position and safe to
/// call concurrently; evaluations within one iteration may be batched.
pub struct SearchProblem<F> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> SearchProblem<F> {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, objective: F) -> Result<Self, OptimizerError> {
        if lower.is_empty() {
            return Err(OptimizerError::InvalidBounds(
                "dimension must be at least 1".into(),
            ));
        }
        if lower.len() != upper.len() {
            return Err(OptimizerError::InvalidBounds(format!(
                "lower has {} coordinates, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(OptimizerError::InvalidBounds(format!(
                    "non-finite bound at coordinate {i}"
                )));
            }
            if lo > hi {
                return Err(OptimizerError::InvalidBounds(format!(
                    "lower {lo} > upper {hi} at coordinate {i}"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            objective,
        })
    }

    /// Same bounds on every coordinate.
    pub fn uniform(
        dimension: usize,
        lower: f64,
        upper: f64,
        objective: F,
    ) -> Result<Self, OptimizerError> {
        Self::new(vec![lower; dimension], vec![upper; dimension], objective)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    pub fn evaluate(&self, position: &[f64]) -> f64 {
        (self.objective)(position)
    }
}

/// Knobs shared by both optimizers.
///
/// A `stagnation_epsilon` of zero disables early termination: best-so-far
/// is non-decreasing, so the improvement can never fall below zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerParams {
    pub population_size: usize,
    pub max_iterations: usize,
    pub stagnation_window: usize,
    pub stagnation_epsilon: f64,
    pub levy_beta: f64,
    pub seed: u64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            population_size: 30,
            max_iterations: 200,
            stagnation_window: 30,
            stagnation_epsilon: 1e-6,
            levy_beta: 1.5,
            seed: 42,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.population_size < 2 {
            return Err(OptimizerError::InvalidParams(
                "population size must be at least 2".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(OptimizerError::InvalidParams(
                "max iterations must be at least 1".into(),
            ));
        }
        if self.stagnation_window == 0 {
            return Err(OptimizerError::InvalidParams(
                "stagnation window must be at least 1".into(),
            ));
        }
        if self.stagnation_epsilon.is_nan() || self.stagnation_epsilon < 0.0 {
            return Err(OptimizerError::InvalidParams(
                "stagnation epsilon must be non-negative".into(),
            ));
        }
        if !(self.levy_beta > 1.0 && self.levy_beta <= 2.0) {
            return Err(OptimizerError::InvalidParams(format!(
                "levy beta {} outside (1, 2]",
                self.levy_beta
            )));
        }
        Ok(())
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after each completed iteration; non-decreasing.
    pub history: Vec<f64>,
    /// Cumulative objective evaluations after each completed iteration.
    pub evaluation_history: Vec<u64>,
    pub iterations_run: usize,
    pub evaluations: u64,
}

impl OptimizationResult {
    /// History as CSV with columns `iteration,best_fitness,evaluations`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,best_fitness,evaluations\n");
        for (i, (fit, evals)) in self.history.iter().zip(&self.evaluation_history).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, fit, evals));
        }
        out
    }
}

/// Current escape energy `2 * e0 * (1 - t / t_max)`: starts at twice the
/// initial energy and decays linearly to zero.
pub fn escape_energy(e0: f64, t: usize, t_max: usize) -> f64 {
    2.0 * e0 * (1.0 - t as f64 / t_max as f64)
}

/// True once the best-so-far history improved by less than `epsilon` over
/// the last `window` iterations (needs `window + 1` entries to judge).
pub fn detect_stagnation(history: &[f64], window: usize, epsilon: f64) -> bool {
    if history.len() < window + 1 {
        return false;
    }
    let last = history[history.len() - 1];
    let reference = history[history.len() - 1 - window];
    last - reference < epsilon
}

/// Independent RNG sub-stream for one hawk in one iteration, derived from
/// the run seed alone so parallel evaluation cannot change the draws.
pub(crate) fn hawk_rng(seed: u64, iteration: usize, hawk: usize) -> ChaCha8Rng {
    let mixed = splitmix(splitmix(seed ^ ((iteration as u64) << 1)).wrapping_add(hawk as u64));
    ChaCha8Rng::seed_from_u64(mixed)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sample_uniform<R: Rng>(rng: &mut R, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(&lo, &hi)| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            }
        })
        .collect()
}

pub(crate) fn clamp_to_bounds(position: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &lo), &hi) in position.iter_mut().zip(lower).zip(upper) {
        *v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
    }
}

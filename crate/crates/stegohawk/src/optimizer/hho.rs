//! Harris Hawks Optimization.
//!
//! The canonical formulation: each iteration every hawk draws an initial
//! escape energy `e0`, the decayed energy `e` switches it between
//! exploration (`|e| >= 1`) and four exploitation moves selected by
//! `|e| >= 0.5` and the escape probability `r >= 0.5` (soft besiege, hard
//! besiege, and both with progressive rapid dives driven by Levy flights).
//! Dive candidates replace a hawk only when they improve its fitness;
//! exploration and plain besiege moves replace unconditionally, and the
//! best position ever evaluated is tracked separately.
//!
//! Moves are proposed against a snapshot of the previous generation and
//! applied in hawk order, so a run is reproducible for a fixed seed no
//! matter how evaluations are scheduled.

use rand::Rng;

use super::{
    clamp_to_bounds, detect_stagnation, escape_energy, hawk_rng, levy_step, sample_uniform,
    OptimizationResult, OptimizerError, OptimizerParams, SearchProblem,
};

pub fn hho_optimize<F>(
    problem: &SearchProblem<F>,
    params: &OptimizerParams,
) -> Result<OptimizationResult, OptimizerError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    params.validate()?;
    let dim = problem.dimension();
    let lower = problem.lower();
    let upper = problem.upper();
    let pop = params.population_size;
    let t_max = params.max_iterations;

    let mut init_rng = hawk_rng(params.seed, usize::MAX, 0);
    let mut positions: Vec<Vec<f64>> = (0..pop)
        .map(|_| sample_uniform(&mut init_rng, lower, upper))
        .collect();
    let mut fitness: Vec<f64> = positions.iter().map(|x| problem.evaluate(x)).collect();
    let mut evaluations = pop as u64;

    let mut best_fitness = f64::NEG_INFINITY;
    let mut best_position = positions[0].clone();
    for (x, &f) in positions.iter().zip(&fitness) {
        if f > best_fitness {
            best_fitness = f;
            best_position = x.clone();
        }
    }

    let mut history = Vec::new();
    let mut evaluation_history = Vec::new();
    let mut iterations_run = 0;

    for t in 0..t_max {
        let snapshot = positions.clone();
        let mean = column_mean(&snapshot);

        for i in 0..pop {
            let mut rng = hawk_rng(params.seed, t, i);
            let e0: f64 = rng.random_range(-1.0..=1.0);
            let e = escape_energy(e0, t, t_max);
            let x = &snapshot[i];

            if e.abs() >= 1.0 {
                // Exploration: perch on a random hawk or drift relative to
                // the population mean, chosen by a uniform coin.
                let q: f64 = rng.random();
                let mut candidate: Vec<f64> = if q < 0.5 {
                    let other = &snapshot[rng.random_range(0..pop)];
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    (0..dim)
                        .map(|d| other[d] - r1 * (other[d] - 2.0 * r2 * x[d]).abs())
                        .collect()
                } else {
                    let r3: f64 = rng.random();
                    let r4: f64 = rng.random();
                    (0..dim)
                        .map(|d| {
                            (best_position[d] - mean[d])
                                - r3 * (lower[d] + r4 * (upper[d] - lower[d]))
                        })
                        .collect()
                };
                clamp_to_bounds(&mut candidate, lower, upper);
                fitness[i] = problem.evaluate(&candidate);
                evaluations += 1;
                positions[i] = candidate;
                continue;
            }

            let r: f64 = rng.random();
            if r >= 0.5 {
                let mut candidate: Vec<f64> = if e.abs() >= 0.5 {
                    // Soft besiege.
                    let j = 2.0 * (1.0 - rng.random::<f64>());
                    (0..dim)
                        .map(|d| {
                            (best_position[d] - x[d]) - e * (j * best_position[d] - x[d]).abs()
                        })
                        .collect()
                } else {
                    // Hard besiege.
                    (0..dim)
                        .map(|d| best_position[d] - e * (best_position[d] - x[d]).abs())
                        .collect()
                };
                clamp_to_bounds(&mut candidate, lower, upper);
                fitness[i] = problem.evaluate(&candidate);
                evaluations += 1;
                positions[i] = candidate;
                continue;
            }

            // Progressive rapid dives; the hard variant rams toward the
            // population mean instead of the hawk itself.
            let j = 2.0 * (1.0 - rng.random::<f64>());
            let reference = if e.abs() >= 0.5 { x } else { &mean };
            let mut dive: Vec<f64> = (0..dim)
                .map(|d| best_position[d] - e * (j * best_position[d] - reference[d]).abs())
                .collect();
            clamp_to_bounds(&mut dive, lower, upper);
            let scale: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let levy = levy_step(dim, params.levy_beta, &mut rng);
            let mut levy_dive: Vec<f64> = (0..dim)
                .map(|d| dive[d] + scale[d] * levy[d])
                .collect();
            clamp_to_bounds(&mut levy_dive, lower, upper);

            // Greedy selection: try the plain dive first, then the Levy
            // dive, keep the hawk if neither improves.
            let dive_fitness = problem.evaluate(&dive);
            evaluations += 1;
            if dive_fitness > fitness[i] {
                positions[i] = dive;
                fitness[i] = dive_fitness;
            } else {
                let levy_fitness = problem.evaluate(&levy_dive);
                evaluations += 1;
                if levy_fitness > fitness[i] {
                    positions[i] = levy_dive;
                    fitness[i] = levy_fitness;
                }
            }
        }

        for (x, &f) in positions.iter().zip(&fitness) {
            if f > best_fitness {
                best_fitness = f;
                best_position = x.clone();
            }
        }

        iterations_run = t + 1;
        history.push(best_fitness);
        evaluation_history.push(evaluations);
        if detect_stagnation(&history, params.stagnation_window, params.stagnation_epsilon) {
            break;
        }
    }

    Ok(OptimizationResult {
        best_position,
        best_fitness,
        history,
        evaluation_history,
        iterations_run,
        evaluations,
    })
}

fn column_mean(positions: &[Vec<f64>]) -> Vec<f64> {
    let dim = positions[0].len();
    let mut mean = vec![0.0; dim];
    for x in positions {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    let n = positions.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    mean
}

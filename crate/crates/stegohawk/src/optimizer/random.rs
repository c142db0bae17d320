//! Uniform random search behind the same interface and result contract as
//! the HHO optimizer; the baseline the paired benchmarks compare against.

use super::{
    detect_stagnation, hawk_rng, sample_uniform, OptimizationResult, OptimizerError,
    OptimizerParams, SearchProblem,
};

pub fn random_search<F>(
    problem: &SearchProblem<F>,
    params: &OptimizerParams,
) -> Result<OptimizationResult, OptimizerError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    params.validate()?;
    let lower = problem.lower();
    let upper = problem.upper();

    let mut best_position: Vec<f64> = Vec::new();
    let mut best_fitness = f64::NEG_INFINITY;
    let mut evaluations = 0u64;
    let mut history = Vec::new();
    let mut evaluation_history = Vec::new();
    let mut iterations_run = 0;

    for t in 0..params.max_iterations {
        for i in 0..params.population_size {
            let mut rng = hawk_rng(params.seed, t, i);
            let candidate = sample_uniform(&mut rng, lower, upper);
            let f = problem.evaluate(&candidate);
            evaluations += 1;
            if best_position.is_empty() || f > best_fitness {
                best_fitness = f;
                best_position = candidate;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::hho_optimize;

    fn sphere(x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn degenerate_bounds_return_that_point() {
        let problem = SearchProblem::uniform(2, 1.25, 1.25, sphere).unwrap();
        let params = OptimizerParams {
            max_iterations: 3,
            ..Default::default()
        };
        let result = random_search(&problem, &params).unwrap();
        assert_eq!(result.best_position, vec![1.25, 1.25]);
    }

    #[test]
    fn history_is_monotone() {
        let problem = SearchProblem::uniform(3, -4.0, 4.0, sphere).unwrap();
        let params = OptimizerParams {
            max_iterations: 50,
            stagnation_epsilon: 0.0,
            ..Default::default()
        };
        let result = random_search(&problem, &params).unwrap();
        assert!(result.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(result.evaluations, 50 * 30);
    }

    #[test]
    fn same_seed_is_deterministic() {
        let problem = SearchProblem::uniform(3, -4.0, 4.0, sphere).unwrap();
        let params = OptimizerParams {
            max_iterations: 20,
            ..Default::default()
        };
        let a = random_search(&problem, &params).unwrap();
        let b = random_search(&problem, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hho_beats_random_on_sphere_at_equal_budget() {
        // Paired seeds, same evaluation budget; compare medians.
        let seeds = [11u64, 12, 13, 14, 15, 16, 17, 18, 19, 20];
        let mut hho_scores = Vec::new();
        let mut random_scores = Vec::new();
        for &seed in &seeds {
            let problem = SearchProblem::uniform(4, -5.0, 5.0, sphere).unwrap();
            let params = OptimizerParams {
                seed,
                max_iterations: 60,
                stagnation_epsilon: 0.0,
                ..Default::default()
            };
            let hho = hho_optimize(&problem, &params).unwrap();
            let budget_iterations =
                (hho.evaluations as usize).div_ceil(params.population_size);
            let random = random_search(
                &problem,
                &OptimizerParams {
                    max_iterations: budget_iterations,
                    ..params
                },
            )
            .unwrap();
            hho_scores.push(hho.best_fitness);
            random_scores.push(random.best_fitness);
        }
        hho_scores.sort_by(f64::total_cmp);
        random_scores.sort_by(f64::total_cmp);
        let mid = seeds.len() / 2;
        assert!(
            hho_scores[mid] >= random_scores[mid],
            "median HHO {} worse than median random {}",
            hho_scores[mid],
            random_scores[mid]
        );
    }
}

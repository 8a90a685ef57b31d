//! Negatively correlated search over box-bounded real vectors.
//!
//! Each individual is an isotropic Gaussian search process. Every
//! generation it proposes one offspring; the offspring replaces its parent
//! when its fitness, weighed against how far its distribution sits from
//! the rest of the population, wins the comparison against a randomized
//! trade-off coefficient. Step sizes follow a 1/5 success rule.

use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::X_MAX;
use crate::rng;
use crate::scalar::{squared_distance, Scalar};

/// Bhattacharyya distance between `N(mean1, sigma1^2 I)` and
/// `N(mean2, sigma2^2 I)`.
pub fn bhattacharyya<T: Scalar>(mean1: &[T], sigma1: T, mean2: &[T], sigma2: T) -> Result<T> {
    if !(sigma1 > T::zero() && sigma2 > T::zero()) {
        return Err(Error::Domain(format!(
            "Bhattacharyya distance needs positive sigmas, got {sigma1} and {sigma2}"
        )));
    }
    if mean1.len() != mean2.len() {
        return Err(Error::Dimension {
            expected: mean1.len(),
            actual: mean2.len(),
        });
    }
    Ok(bhattacharyya_unchecked(mean1, sigma1, mean2, sigma2))
}

#[inline]
fn bhattacharyya_unchecked<T: Scalar>(mean1: &[T], sigma1: T, mean2: &[T], sigma2: T) -> T {
    let s = (sigma1 * sigma1 + sigma2 * sigma2) / T::lit(2.0);
    let dim = T::count(mean1.len());
    squared_distance(mean1, mean2) / (T::lit(8.0) * s)
        + dim / T::lit(2.0) * (s / (sigma1 * sigma2)).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NcsConfig {
    /// Number of search processes `n`.
    pub population: usize,
    /// Generations `G`.
    pub generations: usize,
    /// Generations between step-size updates.
    pub epoch: usize,
    /// Step-size multiplier in (0, 1).
    pub r: f64,
    /// Initial step size; `None` means a tenth of `upper`.
    pub sigma0: Option<f64>,
    /// Search box is `[0, upper]^L`.
    pub upper: f64,
    pub seed: u64,
}

impl Default for NcsConfig {
    fn default() -> Self {
        NcsConfig {
            population: 10,
            generations: 100,
            epoch: 10,
            r: 0.99,
            sigma0: None,
            upper: X_MAX,
            seed: 0,
        }
    }
}

impl NcsConfig {
    pub fn initial_sigma(&self) -> f64 {
        self.sigma0.unwrap_or(0.1 * self.upper)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::Config("population must be at least 1".into()));
        }
        if self.epoch == 0 {
            return Err(Error::Config("epoch must be at least 1".into()));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::Config(format!("r must be in (0, 1), got {}", self.r)));
        }
        if !(self.upper > 0.0 && self.upper <= X_MAX) {
            return Err(Error::Config(format!(
                "upper bound must be in (0, {X_MAX}], got {}",
                self.upper
            )));
        }
        if !(self.initial_sigma() > 0.0) {
            return Err(Error::Config("sigma0 must be positive".into()));
        }
        Ok(())
    }
}

/// One objective evaluation. Generation 0 is the initial population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcsTraceEntry<T> {
    pub evaluation: usize,
    pub generation: usize,
    pub individual: usize,
    pub fitness: T,
    /// Whether the evaluated point became (or already was) the individual's mean.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcsOutcome<T> {
    pub best: Vec<T>,
    pub best_fitness: T,
    pub evaluations: usize,
    pub trace: Vec<NcsTraceEntry<T>>,
    pub final_sigmas: Vec<T>,
}

struct Individual<T> {
    mean: Vec<T>,
    sigma: T,
    fitness: T,
    successes: usize,
}

/// Minimizes `objective` over `[0, upper]^dim`.
///
/// Individual 0 starts at the origin, the others uniformly in the box.
/// Exactly `population * (generations + 1)` evaluations are made, in a
/// fixed order, and the best point ever evaluated is returned.
pub fn ncs_minimize<T, F>(mut objective: F, dim: usize, cfg: &NcsConfig) -> Result<NcsOutcome<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::Domain("search dimension must be at least 1".into()));
    }
    let n = cfg.population;
    let upper = T::lit(cfg.upper);
    let sigma0 = T::lit(cfg.initial_sigma());
    let box_dist = Uniform::new_inclusive(0.0, cfg.upper).expect("validated bounds");

    let mut trace = Vec::with_capacity(n * (cfg.generations + 1));
    let mut best: Option<(T, Vec<T>)> = None;
    let record = |x: &[T], f: T, best: &mut Option<(T, Vec<T>)>| {
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            *best = Some((f, x.to_vec()));
        }
    };

    let mut pop: Vec<Individual<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let mean: Vec<T> = if i == 0 {
            vec![T::zero(); dim]
        } else {
            let mut rng = rng::stream(&[rng::domain::NCS_INIT, cfg.seed, i as u64]);
            (0..dim).map(|_| T::lit(box_dist.sample(&mut rng))).collect()
        };
        let fitness = objective(&mean);
        record(&mean, fitness, &mut best);
        trace.push(NcsTraceEntry {
            evaluation: trace.len(),
            generation: 0,
            individual: i,
            fitness,
            accepted: true,
        });
        pop.push(Individual {
            mean,
            sigma: sigma0,
            fitness,
            successes: 0,
        });
    }

    let generations = cfg.generations;
    for t in 1..=generations {
        let lambda_std = (0.1 - 0.1 * t as f64 / generations as f64).max(0.0);
        let lambda = {
            let mut rng = rng::stream(&[rng::domain::NCS_LAMBDA, cfg.seed, t as u64]);
            let z: f64 = StandardNormal.sample(&mut rng);
            T::lit(1.0 + lambda_std * z)
        };

        let offspring: Vec<Vec<T>> = pop
            .iter()
            .enumerate()
            .map(|(i, ind)| {
                let mut rng =
                    rng::stream(&[rng::domain::NCS_OFFSPRING, cfg.seed, i as u64, t as u64]);
                ind.mean
                    .iter()
                    .map(|&m| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (m + ind.sigma * T::lit(z)).max(T::zero()).min(upper)
                    })
                    .collect()
            })
            .collect();
        let child_fitness: Vec<T> = offspring
            .iter()
            .map(|x| {
                let f = objective(x);
                record(x, f, &mut best);
                f
            })
            .collect();

        let accept = acceptance(&pop, &offspring, &child_fitness, lambda);

        for (i, ((child, f), ok)) in offspring
            .into_iter()
            .zip(child_fitness)
            .zip(accept)
            .enumerate()
        {
            trace.push(NcsTraceEntry {
                evaluation: trace.len(),
                generation: t,
                individual: i,
                fitness: f,
                accepted: ok,
            });
            if ok {
                let ind = &mut pop[i];
                ind.mean = child;
                ind.fitness = f;
                ind.successes += 1;
            }
        }

        if t % cfg.epoch == 0 {
            let r = T::lit(cfg.r);
            for ind in &mut pop {
                // success rate compared with 1/5 in integer arithmetic
                match (5 * ind.successes).cmp(&cfg.epoch) {
                    std::cmp::Ordering::Greater => ind.sigma = ind.sigma / r,
                    std::cmp::Ordering::Less => ind.sigma = ind.sigma * r,
                    std::cmp::Ordering::Equal => {}
                }
                ind.successes = 0;
            }
        }
    }

    let (best_fitness, best) = best.expect("population is non-empty");
    Ok(NcsOutcome {
        best,
        best_fitness,
        evaluations: trace.len(),
        final_sigmas: pop.iter().map(|p| p.sigma).collect(),
        trace,
    })
}

/// Replacement decisions for one generation, all taken against the
/// parents of that generation.
fn acceptance<T: Scalar>(pop: &[Individual<T>], offspring: &[Vec<T>], child_fitness: &[T], lambda: T) -> Vec<bool> {
    let n = pop.len();
    if n == 1 {
        return vec![child_fitness[0] < pop[0].fitness];
    }
    let shift = pop
        .iter()
        .map(|p| p.fitness)
        .chain(child_fitness.iter().copied())
        .fold(T::infinity(), T::min);
    let half = T::lit(0.5);
    let share = |mine: T, other: T| {
        let total = mine + other;
        if total > T::zero() {
            mine / total
        } else {
            half
        }
    };

    (0..n)
        .map(|i| {
            let sigma = pop[i].sigma;
            let mut parent_div = T::infinity();
            let mut child_div = T::infinity();
            for other in pop.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o) {
                parent_div = parent_div.min(bhattacharyya_unchecked(&pop[i].mean, sigma, &other.mean, other.sigma));
                child_div = child_div.min(bhattacharyya_unchecked(&offspring[i], sigma, &other.mean, other.sigma));
            }
            let f_child = share(child_fitness[i] - shift, pop[i].fitness - shift);
            let d_child = share(child_div, parent_div);
            f_child < lambda * d_child
        })
        .collect()
}

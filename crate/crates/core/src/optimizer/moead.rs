//! MOEA/D with Tchebycheff decomposition over an integer grid.
//!
//! Variables are searched in grid-index space: simulated binary crossover
//! and polynomial mutation act on real-valued indices, which are then
//! rounded and clamped onto the grid. Every distinct candidate is
//! evaluated once. The external archive holds the nondominated set of
//! everything evaluated so far.
//!
//! Each generation draws its variation randomness from a ChaCha stream
//! keyed by `(generation, subproblem)`, so results depend only on the seed,
//! not on how evaluations are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pareto::{insert_nondominated, ObjectiveBounds};
use super::weights::weight_vectors;
use super::{Bounds, Candidate, Evaluated, ObjectiveTriple, ParetoFront, N_OBJECTIVES};
use crate::error::{Error, Result};

/// Lower bound applied to zero weights in the Tchebycheff function.
pub const WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoeadConfig {
    /// Simplex-lattice divisions `h`; the population is `C(h + 2, 2)`.
    pub divisions: usize,
    pub neighborhood: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    /// SBX distribution index.
    pub eta_crossover: f64,
    /// Per-variable mutation probability.
    pub mutation_probability: f64,
    /// Polynomial mutation distribution index.
    pub eta_mutation: f64,
    /// Supplied per run, never read from a config file.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self {
            divisions: 13,
            neighborhood: 10,
            generations: 200,
            crossover_probability: 1.0,
            eta_crossover: 20.0,
            mutation_probability: 0.5,
            eta_mutation: 20.0,
            seed: 0,
        }
    }
}

impl MoeadConfig {
    pub fn population(&self) -> usize {
        let h = self.divisions;
        (h + 1) * (h + 2) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.divisions < 1 {
            return Err(Error::Input("moead.divisions must be >= 1".into()));
        }
        let pop = self.population();
        if pop < 3 {
            return Err(Error::Input(format!("moead population must be >= 3, got {pop}")));
        }
        if self.neighborhood < 1 || self.neighborhood > pop {
            return Err(Error::Input(format!(
                "moead.neighborhood must be within 1..={pop}, got {}",
                self.neighborhood
            )));
        }
        for (name, p) in [
            ("moead.crossover_probability", self.crossover_probability),
            ("moead.mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Input(format!("{name} must be within [0, 1], got {p}")));
            }
        }
        if !(self.eta_crossover >= 0.0 && self.eta_mutation >= 0.0) {
            return Err(Error::Input("moead distribution indices must be >= 0".into()));
        }
        Ok(())
    }
}

/// `max_i max(λ_i, WEIGHT_FLOOR)·|f_i - z*_i|`.
pub fn tchebycheff(f: &[f64; N_OBJECTIVES], lambda: &[f64], z_star: &[f64; N_OBJECTIVES]) -> f64 {
    f.iter()
        .zip(lambda)
        .zip(z_star)
        .map(|((fi, li), zi)| li.max(WEIGHT_FLOOR) * (fi - zi).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoeadResult {
    pub archive: ParetoFront,
    /// Distinct candidates evaluated.
    pub evaluations: usize,
    /// Final subproblem population.
    pub population: Vec<Candidate>,
}

/// Grid-index representation of a candidate.
type Genome = [usize; 2];

struct Space {
    counts: [usize; 2],
    bounds: Bounds,
}

impl Space {
    fn decode(&self, g: Genome) -> Candidate {
        Candidate {
            n_pv: self.bounds.n_pv.value(g[0]),
            n_ht: self.bounds.n_ht.value(g[1]),
        }
    }

    fn encode(&self, c: Candidate) -> Genome {
        [
            ((c.n_pv - self.bounds.n_pv.min) / self.bounds.n_pv.step) as usize,
            ((c.n_ht - self.bounds.n_ht.min) / self.bounds.n_ht.step) as usize,
        ]
    }

    /// Round and clamp a real-valued genome onto the grid.
    fn repair(&self, x: [f64; 2]) -> Genome {
        let mut g = [0; 2];
        for k in 0..2 {
            let hi = (self.counts[k] - 1) as f64;
            g[k] = x[k].round().clamp(0.0, hi) as usize;
        }
        g
    }
}

fn sbx_pair(rng: &mut ChaCha8Rng, a: f64, b: f64, lo: f64, hi: f64, eta: f64) -> (f64, f64) {
    if (a - b).abs() < 1e-14 || hi <= lo {
        return (a, b);
    }
    let u: f64 = rng.random();
    let beta = if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    };
    let c1 = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
    let c2 = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
    (c1.clamp(lo, hi), c2.clamp(lo, hi))
}

fn polynomial_mutation(rng: &mut ChaCha8Rng, x: f64, lo: f64, hi: f64, eta: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let u: f64 = rng.random();
    let delta = if u < 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0)) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(1.0 / (eta + 1.0))
    };
    // Grid indices are coarse: guarantee a move of at least one cell when
    // mutation fires, otherwise rounding would undo most small steps.
    let step = delta * (hi - lo);
    let step = if step.abs() < 1.0 { step.signum() } else { step };
    (x + step).clamp(lo, hi)
}

fn offspring(cfg: &MoeadConfig, space: &Space, rng: &mut ChaCha8Rng, p1: Genome, p2: Genome) -> Genome {
    let mut child = [p1[0] as f64, p1[1] as f64];
    let crossover = rng.random::<f64>() < cfg.crossover_probability;
    for k in 0..2 {
        let hi = (space.counts[k] - 1) as f64;
        if crossover {
            let (c1, c2) = sbx_pair(rng, p1[k] as f64, p2[k] as f64, 0.0, hi, cfg.eta_crossover);
            child[k] = if rng.random::<bool>() { c1 } else { c2 };
        }
        if rng.random::<f64>() < cfg.mutation_probability {
            child[k] = polynomial_mutation(rng, child[k], 0.0, hi, cfg.eta_mutation);
        }
    }
    space.repair(child)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Memo<'a, F> {
    evaluator: &'a F,
    values: BTreeMap<Candidate, ObjectiveTriple>,
    archive: ParetoFront,
}

impl<F> Memo<'_, F>
where
    F: Fn(Candidate) -> Result<ObjectiveTriple> + Sync,
{
    /// Evaluate every not-yet-seen candidate of `batch` (in parallel) and
    /// fold the results into the archive in candidate order.
    fn evaluate(&mut self, batch: &[Candidate]) -> Result<()> {
        let mut fresh: Vec<Candidate> = batch.iter().copied().filter(|c| !self.values.contains_key(c)).collect();
        fresh.sort();
        fresh.dedup();
        let evaluator = self.evaluator;
        let results = fresh
            .par_iter()
            .map(|&candidate| {
                let f = evaluator(candidate).map_err(|e| Error::Evaluation {
                    candidate,
                    source: Box::new(e),
                })?;
                if !f.is_finite() {
                    return Err(Error::Evaluation {
                        candidate,
                        source: Box::new(Error::UndefinedMetric(format!("non-finite objectives {f:?}"))),
                    });
                }
                Ok(Evaluated { candidate, objectives: f })
            })
            .collect::<Result<Vec<_>>>()?;
        for e in results {
            self.values.insert(e.candidate, e.objectives);
            insert_nondominated(&mut self.archive, e);
        }
        Ok(())
    }

    fn get(&self, c: &Candidate) -> &ObjectiveTriple {
        &self.values[c]
    }
}

/// Run MOEA/D over the grid described by `bounds`.
pub fn moead_run<F>(cfg: &MoeadConfig, bounds: &Bounds, evaluator: F) -> Result<MoeadResult>
where
    F: Fn(Candidate) -> Result<ObjectiveTriple> + Sync,
{
    cfg.validate()?;
    bounds.validate()?;
    let space = Space {
        counts: [bounds.n_pv.count(), bounds.n_ht.count()],
        bounds: *bounds,
    };
    let weights = weight_vectors(cfg.divisions, N_OBJECTIVES);
    let n = weights.len();
    let neighbors: Vec<Vec<usize>> = weights
        .iter()
        .map(|wi| {
            let mut idx: Vec<(f64, usize)> = weights
                .iter()
                .enumerate()
                .map(|(j, wj)| (wi.iter().zip(wj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), j))
                .collect();
            idx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            idx.into_iter().take(cfg.neighborhood).map(|(_, j)| j).collect()
        })
        .collect();

    let mut memo = Memo {
        evaluator: &evaluator,
        values: BTreeMap::new(),
        archive: Vec::new(),
    };

    let mut init_rng = stream_rng(cfg.seed, 0);
    let mut population: Vec<Candidate> = (0..n)
        .map(|_| {
            let g = [
                init_rng.random_range(0..space.counts[0]),
                init_rng.random_range(0..space.counts[1]),
            ];
            space.decode(g)
        })
        .collect();
    memo.evaluate(&population)?;

    for generation in 0..cfg.generations {
        let children: Vec<Candidate> = (0..n)
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, ((generation as u64 + 1) << 32) | i as u64);
                let hood = &neighbors[i];
                let a = hood[rng.random_range(0..hood.len())];
                let b = if hood.len() > 1 {
                    let mut b = hood[rng.random_range(0..hood.len())];
                    while b == a {
                        b = hood[rng.random_range(0..hood.len())];
                    }
                    b
                } else {
                    a
                };
                let child = offspring(
                    cfg,
                    &space,
                    &mut rng,
                    space.encode(population[a]),
                    space.encode(population[b]),
                );
                space.decode(child)
            })
            .collect();
        memo.evaluate(&children)?;

        let norm = ObjectiveBounds::of(population.iter().chain(&children).map(|c| memo.get(c)))
            .expect("population is nonempty");
        let zero = [0.0; N_OBJECTIVES];
        for (i, child) in children.iter().enumerate() {
            let fy = norm.normalize(memo.get(child));
            for &j in &neighbors[i] {
                let fx = norm.normalize(memo.get(&population[j]));
                if tchebycheff(&fy, &weights[j], &zero) < tchebycheff(&fx, &weights[j], &zero) {
                    population[j] = *child;
                }
            }
        }
    }

    Ok(MoeadResult {
        archive: memo.archive,
        evaluations: memo.values.len(),
        population,
    })
}

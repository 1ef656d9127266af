//! Generational operators shared by UMDA_c and the GA baseline.
//!
//! Both algorithms run the same loop: evaluate, keep the best
//! `floor(pop_size * survivor_rate)` rows unchanged, and refill the rest of
//! the population with new rows. They differ only in how the new rows are
//! produced:
//!
//! * UMDA_c fits an independent normal per column of the survivor matrix and
//!   samples every gene from it ([`UnivariateModel`]).
//! * The GA copies every gene from a uniformly chosen survivor in that column
//!   and adds Gaussian noise with standard deviation `mutation_rate`
//!   ([`ga_sample`]).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::ParameterVector;
use crate::seed::{derive_rng, Stream};

/// Lower bound applied to every estimated column standard deviation.
pub const STD_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "umda_c")]
    UmdaC,
    #[serde(rename = "ga")]
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::UmdaC, Algorithm::Ga];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::UmdaC => "umda_c",
            Algorithm::Ga => "ga",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown algorithm `{s}` (expected umda_c or ga)")))
    }
}

/// Hyperparameters of one evolutionary run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub survivor_rate: f64,
    pub individual_evals: usize,
    /// Standard deviation of the GA's additive noise; unused by UMDA_c.
    pub mutation_rate: f64,
    pub master_seed: u64,
    /// Re-score survivors every generation instead of carrying their fitness over.
    #[serde(default)]
    pub reevaluate_survivors: bool,
}

impl EvolutionConfig {
    /// Defaults scaled by the parameter count `n`: population `6n`, `3n` generations.
    pub fn for_param_count(n: usize, master_seed: u64) -> Self {
        Self {
            pop_size: 6 * n,
            generations: 3 * n,
            survivor_rate: 0.5,
            individual_evals: 3,
            mutation_rate: 0.1,
            master_seed,
            reevaluate_survivors: false,
        }
    }

    pub fn survivor_count(&self) -> usize {
        (self.pop_size as f64 * self.survivor_rate).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::config("evolution.pop_size", format!("must be at least 2, got {}", self.pop_size)));
        }
        if self.generations == 0 {
            return Err(Error::config("evolution.generations", "must be positive"));
        }
        if !(self.survivor_rate > 0.0 && self.survivor_rate <= 1.0) {
            return Err(Error::config(
                "evolution.survivor_rate",
                format!("must lie in (0, 1], got {}", self.survivor_rate),
            ));
        }
        if self.survivor_count() == 0 {
            return Err(Error::config(
                "evolution.survivor_rate",
                format!(
                    "keeps no survivors: floor({} * {}) = 0",
                    self.pop_size, self.survivor_rate
                ),
            ));
        }
        if self.individual_evals == 0 {
            return Err(Error::config("evolution.individual_evals", "must be positive"));
        }
        if !(self.mutation_rate >= 0.0 && self.mutation_rate.is_finite()) {
            return Err(Error::config(
                "evolution.mutation_rate",
                format!("must be a finite non-negative number, got {}", self.mutation_rate),
            ));
        }
        Ok(())
    }
}

/// Rows of parameter vectors with their (possibly not yet known) fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    individuals: Vec<ParameterVector>,
    fitnesses: Vec<Option<f64>>,
}

impl Population {
    /// Builds an unevaluated population; all rows must share one length.
    pub fn new(individuals: Vec<ParameterVector>) -> Result<Self> {
        if let Some(first) = individuals.first() {
            if let Some(i) = individuals.iter().position(|r| r.len() != first.len()) {
                return Err(Error::Structural(format!(
                    "row {i} has length {}, row 0 has {}",
                    individuals[i].len(),
                    first.len()
                )));
            }
        }
        let fitnesses = vec![None; individuals.len()];
        Ok(Self { individuals, fitnesses })
    }

    pub fn with_fitnesses(individuals: Vec<ParameterVector>, fitnesses: Vec<f64>) -> Result<Self> {
        if individuals.len() != fitnesses.len() {
            return Err(Error::Structural(format!(
                "{} rows but {} fitness values",
                individuals.len(),
                fitnesses.len()
            )));
        }
        let mut pop = Self::new(individuals)?;
        pop.fitnesses = fitnesses.into_iter().map(Some).collect();
        Ok(pop)
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Genes per individual.
    pub fn dim(&self) -> usize {
        self.individuals.first().map_or(0, ParameterVector::len)
    }

    pub fn individuals(&self) -> &[ParameterVector] {
        &self.individuals
    }

    pub fn individual(&self, i: usize) -> &ParameterVector {
        &self.individuals[i]
    }

    pub fn fitnesses(&self) -> &[Option<f64>] {
        &self.fitnesses
    }

    pub fn fitness(&self, i: usize) -> Option<f64> {
        self.fitnesses[i]
    }

    pub fn set_fitness(&mut self, i: usize, value: f64) {
        self.fitnesses[i] = Some(value);
    }

    /// Indices of rows whose fitness is not known yet.
    pub fn unevaluated(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fitnesses[i].is_none()).collect()
    }

    fn known_fitnesses(&self) -> Result<Vec<f64>> {
        self.fitnesses
            .iter()
            .enumerate()
            .map(|(i, f)| f.ok_or_else(|| Error::Contract(format!("fitness of row {i} is unset"))))
            .collect()
    }

    /// `(best, mean, worst)` over evaluated rows.
    pub fn fitness_summary(&self) -> Result<(f64, f64, f64)> {
        let f = self.known_fitnesses()?;
        if f.is_empty() {
            return Err(Error::Contract("empty population has no fitness summary".into()));
        }
        let best = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = f.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        Ok((best, mean, worst))
    }
}

/// Every gene i.i.d. standard normal; fitnesses unset.
pub fn init_population<R: Rng + ?Sized>(pop_size: usize, n: usize, rng: &mut R) -> Result<Population> {
    if pop_size < 2 || n == 0 {
        return Err(Error::Input(format!(
            "population needs at least 2 rows and 1 gene, got {pop_size} x {n}"
        )));
    }
    let rows = (0..pop_size)
        .map(|_| ParameterVector::new((0..n).map(|_| StandardNormal.sample(rng)).collect()))
        .collect();
    Population::new(rows)
}

/// Truncation selection: the `floor(len * survivor_rate)` fittest rows, best first.
///
/// Equal fitness is resolved by original row index, lower first.
pub fn select_survivors(pop: &Population, survivor_rate: f64) -> Result<Population> {
    if !(survivor_rate > 0.0 && survivor_rate <= 1.0) {
        return Err(Error::Input(format!("survivor rate {survivor_rate} not in (0, 1]")));
    }
    let fitness = pop.known_fitnesses()?;
    let keep = (pop.len() as f64 * survivor_rate).floor() as usize;
    if keep == 0 {
        return Err(Error::Input(format!(
            "survivor rate {survivor_rate} keeps no rows of a population of {}",
            pop.len()
        )));
    }
    let mut order: Vec<usize> = (0..pop.len()).collect();
    // sort_by is stable, so equal fitness keeps index order
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    order.truncate(keep);
    Ok(Population {
        individuals: order.iter().map(|&i| pop.individuals[i].clone()).collect(),
        fitnesses: order.iter().map(|&i| pop.fitnesses[i]).collect(),
    })
}

/// Independent normal per gene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateModel {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl UnivariateModel {
    /// Column means and population standard deviations of the survivor
    /// matrix, with each deviation floored at [`STD_FLOOR`].
    pub fn estimate(survivors: &Population) -> Result<Self> {
        if survivors.is_empty() {
            return Err(Error::Input("cannot estimate a model from zero survivors".into()));
        }
        let n = survivors.dim();
        let mut means = vec![0.0; n];
        let mut m2 = vec![0.0; n];
        // Welford, one row at a time
        for (k, row) in survivors.individuals.iter().enumerate() {
            let count = (k + 1) as f64;
            for (j, &x) in row.as_slice().iter().enumerate() {
                let delta = x - means[j];
                means[j] += delta / count;
                m2[j] += delta * (x - means[j]);
            }
        }
        let m = survivors.len() as f64;
        let stds = m2.iter().map(|s| (s / m).max(0.0).sqrt().max(STD_FLOOR)).collect();
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Draws `count` new individuals, gene `j` from `N(means[j], stds[j]^2)`.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<ParameterVector> {
        let columns: Vec<Normal<f64>> = self
            .means
            .iter()
            .zip(&self.stds)
            .map(|(&m, &s)| Normal::new(m, s).expect("floored std is positive and finite"))
            .collect();
        (0..count)
            .map(|_| ParameterVector::new(columns.iter().map(|d| d.sample(rng)).collect()))
            .collect()
    }
}

/// Free-function form of [`UnivariateModel::estimate`].
pub fn umda_estimate(survivors: &Population) -> Result<UnivariateModel> {
    UnivariateModel::estimate(survivors)
}

/// Free-function form of [`UnivariateModel::sample`].
pub fn umda_sample<R: Rng + ?Sized>(model: &UnivariateModel, count: usize, rng: &mut R) -> Vec<ParameterVector> {
    model.sample(count, rng)
}

/// GA offspring: per gene, copy the value from a uniformly drawn survivor and
/// add `N(0, mutation_rate^2)` noise.
pub fn ga_sample<R: Rng + ?Sized>(
    survivors: &Population,
    count: usize,
    mutation_rate: f64,
    rng: &mut R,
) -> Result<Vec<ParameterVector>> {
    if survivors.is_empty() {
        return Err(Error::Input("GA sampling needs at least one survivor".into()));
    }
    if !(mutation_rate >= 0.0 && mutation_rate.is_finite()) {
        return Err(Error::Input(format!("mutation rate {mutation_rate} must be finite and >= 0")));
    }
    let n = survivors.dim();
    let m = survivors.len();
    let noise = Normal::new(0.0, mutation_rate).expect("validated above");
    Ok((0..count)
        .map(|_| {
            ParameterVector::new(
                (0..n)
                    .map(|j| {
                        let donor = rng.random_range(0..m);
                        let gene = survivors.individuals[donor].as_slice()[j];
                        if mutation_rate > 0.0 {
                            gene + noise.sample(rng)
                        } else {
                            gene
                        }
                    })
                    .collect(),
            )
        })
        .collect())
}

/// Survivors (unchanged, fitness kept) followed by the new, unevaluated rows.
pub fn next_generation(
    survivors: Population,
    new_individuals: Vec<ParameterVector>,
    pop_size: usize,
) -> Result<Population> {
    let total = survivors.len() + new_individuals.len();
    if total != pop_size {
        return Err(Error::Structural(format!(
            "{} survivors + {} new rows = {total}, population size is {pop_size}",
            survivors.len(),
            new_individuals.len()
        )));
    }
    let n = survivors.dim();
    if let Some(bad) = new_individuals.iter().find(|r| r.len() != n) {
        return Err(Error::Structural(format!(
            "new row has length {}, survivors have {n}",
            bad.len()
        )));
    }
    let Population {
        mut individuals,
        mut fitnesses,
    } = survivors;
    fitnesses.extend(std::iter::repeat_n(None, new_individuals.len()));
    individuals.extend(new_individuals);
    Ok(Population { individuals, fitnesses })
}

/// Fitness statistics of one generation's population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutcome {
    pub history: Vec<GenerationStats>,
    /// Highest recorded fitness over the whole run.
    pub best_params: ParameterVector,
    pub best_fitness: f64,
    pub best_generation: usize,
    /// Model fitted to the last generation's survivors.
    pub final_model: UnivariateModel,
    pub final_population: Population,
}

/// Runs the generational loop.
///
/// `evaluate(generation, population, indices)` must return one fitness per
/// index in `indices`. Only rows without a fitness are passed, unless
/// `cfg.reevaluate_survivors` is set, in which case every row is re-scored.
pub fn evolve<F>(cfg: &EvolutionConfig, n: usize, algorithm: Algorithm, mut evaluate: F) -> Result<EvolutionOutcome>
where
    F: FnMut(usize, &Population, &[usize]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let mut pop = init_population(cfg.pop_size, n, &mut derive_rng(cfg.master_seed, Stream::Init, &[]))?;
    let mut history = Vec::with_capacity(cfg.generations);
    let mut best: Option<(f64, ParameterVector, usize)> = None;
    let mut final_model = None;

    for generation in 0..cfg.generations {
        let indices = if cfg.reevaluate_survivors {
            (0..pop.len()).collect()
        } else {
            pop.unevaluated()
        };
        let scores = evaluate(generation, &pop, &indices)?;
        if scores.len() != indices.len() {
            return Err(Error::Structural(format!(
                "evaluator returned {} scores for {} individuals",
                scores.len(),
                indices.len()
            )));
        }
        for (&i, &f) in indices.iter().zip(&scores) {
            if !f.is_finite() {
                return Err(Error::NonFiniteFitness {
                    generation,
                    index: i,
                    value: f,
                });
            }
            pop.set_fitness(i, f);
        }
        for i in 0..pop.len() {
            let f = pop.fitness(i).expect("all rows evaluated");
            if best.as_ref().is_none_or(|(b, _, _)| f > *b) {
                best = Some((f, pop.individual(i).clone(), generation));
            }
        }
        let (b, mean, worst) = pop.fitness_summary()?;
        history.push(GenerationStats {
            generation,
            best: b,
            mean,
            worst,
        });

        let survivors = select_survivors(&pop, cfg.survivor_rate)?;
        let model = UnivariateModel::estimate(&survivors)?;
        if generation + 1 < cfg.generations {
            let count = cfg.pop_size - survivors.len();
            let mut rng = derive_rng(cfg.master_seed, Stream::Breed, &[generation as u64]);
            let fresh = match algorithm {
                Algorithm::UmdaC => model.sample(count, &mut rng),
                Algorithm::Ga => ga_sample(&survivors, count, cfg.mutation_rate, &mut rng)?,
            };
            pop = next_generation(survivors, fresh, cfg.pop_size)?;
        }
        final_model = Some(model);
    }

    let (best_fitness, best_params, best_generation) = best.expect("at least one generation");
    Ok(EvolutionOutcome {
        history,
        best_params,
        best_fitness,
        best_generation,
        final_model: final_model.expect("at least one generation"),
        final_population: pop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec())
    }

    fn scored(rows: &[&[f64]], f: &[f64]) -> Population {
        Population::with_fitnesses(rows.iter().map(|r| pv(r)).collect(), f.to_vec()).unwrap()
    }

    #[test]
    fn init_shape_and_determinism() {
        let a = init_population(4, 3, &mut rng_from_seed(5)).unwrap();
        assert_eq!((a.len(), a.dim()), (4, 3));
        assert!(a.individuals().iter().all(ParameterVector::is_finite));
        assert!(a.fitnesses().iter().all(Option::is_none));
        assert_eq!(a, init_population(4, 3, &mut rng_from_seed(5)).unwrap());
        assert!(init_population(1, 3, &mut rng_from_seed(5)).is_err());
    }

    #[test]
    fn init_moments_are_standard_normal() {
        let pop = init_population(1000, 100, &mut rng_from_seed(17)).unwrap();
        let xs: Vec<f64> = pop.individuals().iter().flat_map(|r| r.as_slice().to_vec()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn selection_examples() {
        let pop = scored(&[&[0.0], &[1.0], &[2.0], &[3.0]], &[3.0, 1.0, 2.0, 0.0]);
        let s = select_survivors(&pop, 0.5).unwrap();
        assert_eq!(s.individuals(), &[pv(&[0.0]), pv(&[2.0])]);
        assert_eq!(s.fitnesses(), &[Some(3.0), Some(2.0)]);

        let flat = scored(&[&[0.0], &[1.0], &[2.0], &[3.0]], &[7.0; 4]);
        let s = select_survivors(&flat, 0.5).unwrap();
        assert_eq!(s.individuals(), &[pv(&[0.0]), pv(&[1.0])]);
    }

    #[test]
    fn selection_keeps_exactly_half_at_default_rate() {
        let pop = init_population(60, 10, &mut rng_from_seed(1)).unwrap();
        let f: Vec<f64> = (0..60).map(|i| (i * 37 % 60) as f64).collect();
        let pop = Population::with_fitnesses(pop.individuals().to_vec(), f).unwrap();
        assert_eq!(select_survivors(&pop, 0.5).unwrap().len(), 30);
    }

    #[test]
    fn selection_requires_fitness() {
        let pop = init_population(4, 2, &mut rng_from_seed(1)).unwrap();
        assert!(matches!(select_survivors(&pop, 0.5), Err(Error::Contract(_))));
    }

    #[test]
    fn estimate_examples() {
        let m = UnivariateModel::estimate(&scored(&[&[1.0, 3.0], &[2.0, 4.0]], &[0.0, 0.0])).unwrap();
        // columns are (1, 2) and (3, 4)
        assert_eq!(m.means, vec![1.5, 3.5]);
        assert_eq!(m.stds, vec![0.5, 0.5]);

        let m = UnivariateModel::estimate(&scored(&[&[1.0, 2.0], &[3.0, 4.0]], &[0.0, 0.0])).unwrap();
        assert_eq!(m.means, vec![2.0, 3.0]);
        assert_eq!(m.stds, vec![1.0, 1.0]);

        let m = UnivariateModel::estimate(&scored(&[&[5.0, -1.0]], &[0.0])).unwrap();
        assert_eq!(m.means, vec![5.0, -1.0]);
        assert_eq!(m.stds, vec![STD_FLOOR, STD_FLOOR]);
    }

    #[test]
    fn estimate_matches_two_pass_column_oracle() {
        let mut rng = rng_from_seed(99);
        let pop = init_population(50, 20, &mut rng).unwrap();
        let rows: Vec<Vec<f64>> = pop
            .individuals()
            .iter()
            .map(|r| r.as_slice().iter().map(|x| 3.0 * x + 1.0).collect())
            .collect();
        let survivors = Population::new(rows.iter().cloned().map(ParameterVector::new).collect()).unwrap();
        let model = UnivariateModel::estimate(&survivors).unwrap();
        for j in 0..20 {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / 50.0;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 50.0;
            assert!((model.means[j] - mean).abs() < 1e-12);
            assert!((model.stds[j] - var.sqrt().max(STD_FLOOR)).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_model_concentrates() {
        let model = UnivariateModel {
            means: vec![0.0, 0.0],
            stds: vec![STD_FLOOR, STD_FLOOR],
        };
        for s in model.sample(1000, &mut rng_from_seed(2)) {
            assert!(s.as_slice().iter().all(|x| x.abs() < 6.0 * STD_FLOOR));
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let model = UnivariateModel {
            means: vec![2.0, 3.0],
            stds: vec![1.0, 1.0],
        };
        assert_eq!(model.sample(10, &mut rng_from_seed(4)), model.sample(10, &mut rng_from_seed(4)));
        let surv = scored(&[&[1.0, 2.0], &[3.0, 4.0]], &[0.0, 0.0]);
        assert_eq!(
            ga_sample(&surv, 10, 0.1, &mut rng_from_seed(4)).unwrap(),
            ga_sample(&surv, 10, 0.1, &mut rng_from_seed(4)).unwrap()
        );
    }

    #[test]
    fn ga_noiseless_genes_come_from_the_same_column() {
        let surv = scored(&[&[1.0, 10.0], &[2.0, 20.0], &[3.0, 30.0]], &[0.0; 3]);
        for child in ga_sample(&surv, 200, 0.0, &mut rng_from_seed(8)).unwrap() {
            assert!([1.0, 2.0, 3.0].contains(&child.as_slice()[0]));
            assert!([10.0, 20.0, 30.0].contains(&child.as_slice()[1]));
        }
    }

    #[test]
    fn next_generation_is_elitist() {
        let surv = scored(&[&[1.0], &[2.0]], &[5.0, 4.0]);
        let next = next_generation(surv.clone(), vec![pv(&[9.0]), pv(&[8.0])], 4).unwrap();
        assert_eq!(&next.individuals()[..2], surv.individuals());
        assert_eq!(next.fitnesses(), &[Some(5.0), Some(4.0), None, None]);
        assert!(matches!(
            next_generation(surv, vec![pv(&[9.0])], 4),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = EvolutionConfig::for_param_count(10, 0);
        assert_eq!((c.pop_size, c.generations, c.individual_evals), (60, 30, 3));
        assert_eq!(c.survivor_count(), 30);
        c.validate().unwrap();
        let bad = EvolutionConfig {
            survivor_rate: 1.5,
            ..c.clone()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("survivor_rate"));
        let none = EvolutionConfig {
            pop_size: 3,
            survivor_rate: 0.2,
            ..c
        };
        assert!(none.validate().is_err());
    }

    fn sphere(target: &[f64]) -> impl Fn(&ParameterVector) -> f64 + '_ {
        move |p| -p.as_slice().iter().zip(target).map(|(x, t)| (x - t).powi(2)).sum::<f64>()
    }

    fn run_sphere(alg: Algorithm, seed: u64, target: &[f64]) -> EvolutionOutcome {
        let cfg = EvolutionConfig {
            pop_size: 30,
            generations: 40,
            master_seed: seed,
            ..EvolutionConfig::for_param_count(target.len(), seed)
        };
        let f = sphere(target);
        evolve(&cfg, target.len(), alg, |_, pop, idx| Ok(idx.iter().map(|&i| f(pop.individual(i))).collect())).unwrap()
    }

    #[test]
    fn best_fitness_never_decreases() {
        for alg in Algorithm::ALL {
            let out = run_sphere(alg, 3, &[0.5, -0.5, 1.0]);
            assert_eq!(out.history.len(), 40);
            for w in out.history.windows(2) {
                assert!(w[1].best >= w[0].best, "{alg}: {:?}", w);
            }
            assert_eq!(out.best_fitness, out.history.last().unwrap().best);
        }
    }

    #[test]
    fn trajectory_is_a_function_of_the_seed() {
        let a = run_sphere(Algorithm::UmdaC, 11, &[1.0, 2.0]);
        let b = run_sphere(Algorithm::UmdaC, 11, &[1.0, 2.0]);
        assert_eq!(a, b);
        let c = run_sphere(Algorithm::UmdaC, 12, &[1.0, 2.0]);
        assert_ne!(a.best_params, c.best_params);
    }

    #[test]
    fn non_finite_fitness_aborts() {
        let cfg = EvolutionConfig::for_param_count(2, 0);
        let err = evolve(&cfg, 2, Algorithm::Ga, |_, _, idx| Ok(vec![f64::NAN; idx.len()])).unwrap_err();
        assert!(matches!(err, Error::NonFiniteFitness { generation: 0, .. }));
    }

    #[test]
    fn survivors_are_not_rescored_by_default() {
        let cfg = EvolutionConfig::for_param_count(2, 0);
        let mut calls = Vec::new();
        evolve(&cfg, 2, Algorithm::UmdaC, |_, _, idx| {
            calls.push(idx.len());
            Ok(vec![0.0; idx.len()])
        })
        .unwrap();
        assert_eq!(calls[0], 12);
        assert!(calls[1..].iter().all(|&c| c == 6));

        let cfg = EvolutionConfig {
            reevaluate_survivors: true,
            ..cfg
        };
        let mut calls = Vec::new();
        evolve(&cfg, 2, Algorithm::UmdaC, |_, _, idx| {
            calls.push(idx.len());
            Ok(vec![0.0; idx.len()])
        })
        .unwrap();
        assert!(calls.iter().all(|&c| c == 12));
    }

    proptest! {
        #[test]
        fn survivors_dominate_the_rest(
            f in proptest::collection::vec(-100.0f64..100.0, 2..40),
            rate in 0.05f64..=1.0,
        ) {
            let rows: Vec<ParameterVector> = (0..f.len()).map(|i| pv(&[i as f64])).collect();
            let pop = Population::with_fitnesses(rows, f.clone()).unwrap();
            prop_assume!((f.len() as f64 * rate).floor() >= 1.0);
            let s = select_survivors(&pop, rate).unwrap();
            let chosen: Vec<usize> = s.individuals().iter().map(|r| r.as_slice()[0] as usize).collect();
            let min_kept = chosen.iter().map(|&i| f[i]).fold(f64::INFINITY, f64::min);
            for (i, &fi) in f.iter().enumerate() {
                if !chosen.contains(&i) {
                    prop_assert!(fi <= min_kept);
                }
            }
        }

        #[test]
        fn ga_noiseless_closure(seed in any::<u64>(), m in 1usize..8, n in 1usize..6) {
            let mut rng = rng_from_seed(seed);
            let surv = init_population(m.max(2), n, &mut rng).unwrap();
            let surv = Population::new(surv.individuals()[..m].to_vec()).unwrap();
            for child in ga_sample(&surv, 20, 0.0, &mut rng).unwrap() {
                for j in 0..n {
                    let g = child.as_slice()[j];
                    prop_assert!(surv.individuals().iter().any(|r| r.as_slice()[j] == g));
                }
            }
        }
    }
}

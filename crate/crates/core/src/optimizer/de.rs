//! Differential evolution (best/1/bin) as a batch candidate generator.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Closed box of the search space, one interval per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Coordinates that are angles on `[0, pi]`, repaired by reflection
    /// instead of clamping.
    pub angular: Vec<bool>,
}

impl Bounds {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Clamps plain coordinates and folds angles back into `[0, pi]`.
    pub fn repair(&self, v: &mut [f64]) {
        for (d, x) in v.iter_mut().enumerate() {
            if self.angular[d] {
                *x = reflect_angle(*x);
            } else {
                *x = x.clamp(self.lower[d], self.upper[d]);
            }
        }
    }
}

/// Reflects an angle into `[0, pi]`; the map is `2 pi` periodic.
pub fn reflect_angle(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t > PI {
        2.0 * PI - t
    } else {
        t
    }
}

/// Latin hypercube sample of `count` points: every coordinate hits each of
/// `count` equal strata exactly once.
pub fn latin_hypercube(bounds: &Bounds, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; bounds.dim()]; count];
    let mut strata: Vec<usize> = (0..count).collect();
    for d in 0..bounds.dim() {
        strata.shuffle(rng);
        let (lo, hi) = (bounds.lower[d], bounds.upper[d]);
        for (k, p) in points.iter_mut().enumerate() {
            let u = (strata[k] as f64 + rng.gen::<f64>()) / count as f64;
            p[d] = lo + u * (hi - lo);
        }
    }
    points
}

/// Batch generator driven by [`super::solve_ofmp`]: each `propose` returns a
/// batch, and `observe` receives the objective totals of the evaluated prefix
/// of that batch in order.
pub trait CandidateGenerator {
    fn propose(&mut self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>>;
    fn observe(&mut self, totals: &[f64]);
}

#[derive(Debug, Clone)]
pub struct DifferentialEvolution {
    bounds: Bounds,
    mutation: (f64, f64),
    recombination: f64,
    population: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    trials: Vec<Vec<f64>>,
}

impl DifferentialEvolution {
    /// `initial` seeds the population and is returned by the first
    /// `propose`.
    pub fn new(bounds: Bounds, initial: Vec<Vec<f64>>, mutation: (f64, f64), recombination: f64) -> Self {
        let n = initial.len();
        Self {
            bounds,
            mutation,
            recombination,
            population: Vec::new(),
            fitness: vec![f64::INFINITY; n],
            trials: initial,
        }
    }

    fn best_index(&self) -> usize {
        let mut best = 0;
        for (k, f) in self.fitness.iter().enumerate() {
            if *f < self.fitness[best] {
                best = k;
            }
        }
        best
    }

    pub fn population(&self) -> &[Vec<f64>] {
        &self.population
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }
}

impl CandidateGenerator for DifferentialEvolution {
    fn propose(&mut self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        if self.population.is_empty() {
            return self.trials.clone();
        }
        let n = self.population.len();
        let dim = self.bounds.dim();
        let best = self.population[self.best_index()].clone();
        let f = rng.gen_range(self.mutation.0..self.mutation.1);
        self.trials = (0..n)
            .map(|m| {
                let r1 = loop {
                    let r = rng.gen_range(0..n);
                    if r != m {
                        break r;
                    }
                };
                let r2 = loop {
                    let r = rng.gen_range(0..n);
                    if r != m && r != r1 {
                        break r;
                    }
                };
                let forced = rng.gen_range(0..dim);
                let member = &self.population[m];
                let mut trial: Vec<f64> = (0..dim)
                    .map(|d| {
                        let cross = rng.gen::<f64>() < self.recombination;
                        if cross || d == forced {
                            best[d] + f * (self.population[r1][d] - self.population[r2][d])
                        } else {
                            member[d]
                        }
                    })
                    .collect();
                self.bounds.repair(&mut trial);
                trial
            })
            .collect();
        self.trials.clone()
    }

    fn observe(&mut self, totals: &[f64]) {
        if self.population.is_empty() {
            self.population = self.trials.clone();
            for (k, t) in totals.iter().enumerate() {
                self.fitness[k] = *t;
            }
            return;
        }
        for (k, t) in totals.iter().enumerate() {
            if *t <= self.fitness[k] {
                self.fitness[k] = *t;
                self.population[k] = self.trials[k].clone();
            }
        }
    }
}

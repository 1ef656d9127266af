//! Bayesian signed-rank comparison of two algorithms with a region of
//! practical equivalence (rope).
//!
//! The paired differences `z_1..z_m` are augmented with a prior
//! pseudo-observation `z_0`. Each Monte Carlo draw samples weights
//! `w ~ Dirichlet(s, 1, ..., 1)` over the augmented sample and scores every
//! pair `i <= j` by its Walsh average `(z_i + z_j) / 2`, with pair weight
//! `2 w_i w_j` off the diagonal and `w_i^2` on it:
//!
//! * `p_left`: mass of pairs below `-rope` (A worse than B),
//! * `p_rope`: mass of pairs in `[-rope, rope]`,
//! * `p_right`: mass of pairs above `rope` (A better than B).
//!
//! Draws are generated in fixed-size chunks, each from its own derived
//! stream, so the result does not depend on how chunks are spread over
//! threads.

use std::path::Path;

use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::SummaryRow;
use crate::seed::{derive_rng, Stream};

/// Monte Carlo draws per independently seeded chunk.
pub const MC_CHUNK: usize = 1000;

/// Paired per-repetition differences, `A - B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDifferences(Vec<f64>);

impl PairedDifferences {
    pub fn new(diffs: Vec<f64>) -> Result<Self> {
        if diffs.len() < 2 {
            return Err(Error::Input(format!(
                "the signed-rank comparison needs at least 2 paired differences, got {}",
                diffs.len()
            )));
        }
        if let Some(i) = diffs.iter().position(|d| !d.is_finite()) {
            return Err(Error::Input(format!("difference {i} is not finite")));
        }
        Ok(Self(diffs))
    }

    /// Pairs `a` and `b` by repetition index. Both must cover the same repetitions.
    pub fn from_summaries(a: &[SummaryRow], b: &[SummaryRow]) -> Result<Self> {
        let mut a: Vec<_> = a.iter().map(|r| (r.repetition, r.avg_reward_100)).collect();
        let mut b: Vec<_> = b.iter().map(|r| (r.repetition, r.avg_reward_100)).collect();
        a.sort_by_key(|r| r.0);
        b.sort_by_key(|r| r.0);
        for w in a.windows(2).chain(b.windows(2)) {
            if w[0].0 == w[1].0 {
                return Err(Error::Input(format!("repetition {} appears twice", w[0].0)));
            }
        }
        let reps = |v: &[(usize, f64)]| v.iter().map(|r| r.0).collect::<Vec<_>>();
        if reps(&a) != reps(&b) {
            return Err(Error::Input(format!(
                "repetition sets differ: {:?} vs {:?}",
                reps(&a),
                reps(&b)
            )));
        }
        Self::new(a.iter().zip(&b).map(|(x, y)| x.1 - y.1).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|d| -d).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RopeConfig {
    pub rope_radius: f64,
    /// Dirichlet weight `s` of the prior pseudo-observation.
    pub prior_strength: f64,
    /// Location `z_0` of the prior pseudo-observation.
    pub prior_pseudo_observation: f64,
    pub mc_samples: usize,
}

impl Default for RopeConfig {
    fn default() -> Self {
        Self {
            rope_radius: 0.1,
            prior_strength: 0.5,
            prior_pseudo_observation: 0.0,
            mc_samples: 50_000,
        }
    }
}

impl RopeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rope_radius > 0.0 && self.rope_radius.is_finite()) {
            return Err(Error::Input(format!("rope radius must be positive, got {}", self.rope_radius)));
        }
        if !(self.prior_strength > 0.0 && self.prior_strength.is_finite()) {
            return Err(Error::Input(format!(
                "prior strength must be positive, got {}",
                self.prior_strength
            )));
        }
        if !self.prior_pseudo_observation.is_finite() {
            return Err(Error::Input("prior pseudo-observation must be finite".into()));
        }
        if self.mc_samples < 1000 {
            return Err(Error::Input(format!(
                "at least 1000 Monte Carlo samples are required, got {}",
                self.mc_samples
            )));
        }
        Ok(())
    }
}

/// Posterior probabilities of (A worse, equivalent, A better).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTriple {
    pub p_left: f64,
    pub p_rope: f64,
    pub p_right: f64,
}

impl PosteriorTriple {
    pub fn sum(&self) -> f64 {
        self.p_left + self.p_rope + self.p_right
    }

    pub fn swapped(&self) -> Self {
        Self {
            p_left: self.p_right,
            p_rope: self.p_rope,
            p_right: self.p_left,
        }
    }
}

#[derive(Clone, Copy)]
enum Region {
    Left,
    Rope,
    Right,
}

/// Monte Carlo posterior of the signed-rank comparison; one triple per draw.
pub fn bayesian_signed_rank(diffs: &PairedDifferences, cfg: &RopeConfig, seed: u64) -> Result<Vec<PosteriorTriple>> {
    cfg.validate()?;
    let mut z = Vec::with_capacity(diffs.0.len() + 1);
    z.push(cfg.prior_pseudo_observation);
    z.extend_from_slice(&diffs.0);
    let k = z.len();

    // Walsh-average region of every ordered pair; symmetric in (i, j)
    let regions: Vec<Region> = (0..k * k)
        .map(|ij| {
            let walsh = (z[ij / k] + z[ij % k]) / 2.0;
            if walsh < -cfg.rope_radius {
                Region::Left
            } else if walsh > cfg.rope_radius {
                Region::Right
            } else {
                Region::Rope
            }
        })
        .collect();
    let prior = Gamma::new(cfg.prior_strength, 1.0)
        .map_err(|e| Error::Input(format!("invalid prior strength: {e}")))?;

    let chunks = cfg.mc_samples.div_ceil(MC_CHUNK);
    let draws: Vec<Vec<PosteriorTriple>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_rng(seed, Stream::MonteCarlo, &[c as u64]);
            let len = MC_CHUNK.min(cfg.mc_samples - c * MC_CHUNK);
            let mut w = vec![0.0; k];
            (0..len)
                .map(|_| {
                    w[0] = prior.sample(&mut rng);
                    for wi in &mut w[1..] {
                        *wi = Exp1.sample(&mut rng);
                    }
                    let total: f64 = w.iter().sum();
                    w.iter_mut().for_each(|wi| *wi /= total);
                    let mut acc = [0.0; 3];
                    for i in 0..k {
                        let mut row = [0.0; 3];
                        for j in 0..k {
                            row[regions[i * k + j] as usize] += w[j];
                        }
                        for r in 0..3 {
                            acc[r] += w[i] * row[r];
                        }
                    }
                    PosteriorTriple {
                        p_left: acc[Region::Left as usize],
                        p_rope: acc[Region::Rope as usize],
                        p_right: acc[Region::Right as usize],
                    }
                })
                .collect()
        })
        .collect();
    Ok(draws.into_iter().flatten().collect())
}

/// Component-wise mean of the posterior draws.
pub fn summarize(triples: &[PosteriorTriple]) -> Result<PosteriorTriple> {
    if triples.is_empty() {
        return Err(Error::Input("cannot summarize an empty posterior sample".into()));
    }
    let n = triples.len() as f64;
    let (l, r, g) = triples
        .iter()
        .fold((0.0, 0.0, 0.0), |(l, r, g), t| (l + t.p_left, r + t.p_rope, g + t.p_right));
    Ok(PosteriorTriple {
        p_left: l / n,
        p_rope: r / n,
        p_right: g / n,
    })
}

/// Triangle vertices for the simplex plot.
pub const VERTEX_LEFT: [f64; 2] = [0.0, 0.0];
pub const VERTEX_ROPE: [f64; 2] = [0.5, 0.866_025_403_784_438_6];
pub const VERTEX_RIGHT: [f64; 2] = [1.0, 0.0];

/// Barycentric position of one triple in the equilateral triangle.
pub fn simplex_point(t: &PosteriorTriple) -> [f64; 2] {
    [
        t.p_left * VERTEX_LEFT[0] + t.p_rope * VERTEX_ROPE[0] + t.p_right * VERTEX_RIGHT[0],
        t.p_left * VERTEX_LEFT[1] + t.p_rope * VERTEX_ROPE[1] + t.p_right * VERTEX_RIGHT[1],
    ]
}

pub fn simplex_coordinates(triples: &[PosteriorTriple]) -> Vec<[f64; 2]> {
    triples.iter().map(simplex_point).collect()
}

/// A boundary between two dominance regions, as a line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySegment {
    pub name: &'static str,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// The three loci where two probabilities tie for the maximum: segments from
/// the centroid to the midpoints of the triangle's edges.
pub fn dominance_boundaries() -> [BoundarySegment; 3] {
    let third = 1.0 / 3.0;
    let c = simplex_point(&PosteriorTriple {
        p_left: third,
        p_rope: third,
        p_right: third,
    });
    let seg = |name, p_left, p_rope, p_right| {
        let m = simplex_point(&PosteriorTriple { p_left, p_rope, p_right });
        BoundarySegment {
            name,
            x0: c[0],
            y0: c[1],
            x1: m[0],
            y1: m[1],
        }
    };
    [
        seg("left=rope", 0.5, 0.5, 0.0),
        seg("left=right", 0.5, 0.0, 0.5),
        seg("rope=right", 0.0, 0.5, 0.5),
    ]
}

pub fn write_posterior_csv(path: &Path, triples: &[PosteriorTriple]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for t in triples {
        w.serialize(t)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_simplex_points_csv(path: &Path, points: &[[f64; 2]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y"])?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_boundaries_csv(path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in dominance_boundaries() {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

//! Seeded sampling of tangent points and test vectors.
//!
//! The generator is xoshiro256** seeded from a `u64` through SplitMix64 (the
//! reference seeding procedure for the xoshiro family). A uniform real in
//! `[0, 1)` is `(next_u64 >> 11) · 2⁻⁵³`, mapped affinely onto each interval.
//! Points draw base coordinates first (`x1..xn`), then fiber coordinates
//! (`y1..yn`), and redraw the fiber vector while `‖y‖ < min_fiber_norm`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::TangentPoint;

/// Axis-aligned sampling region in `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub x: Vec<(f64, f64)>,
    pub y: Vec<(f64, f64)>,
    pub min_fiber_norm: f64,
}

impl SamplingBox {
    /// `[-2, 2]` in every coordinate, fiber vectors with `‖y‖ ≥ 0.1`.
    pub fn default_for(dim: usize) -> Self {
        SamplingBox::uniform(dim, (-2.0, 2.0), (-2.0, 2.0))
    }

    pub fn uniform(dim: usize, x: (f64, f64), y: (f64, f64)) -> Self {
        SamplingBox {
            x: vec![x; dim],
            y: vec![y; dim],
            min_fiber_norm: 0.1,
        }
    }

    /// Replaces the interval of base coordinate `i` (zero-based).
    pub fn with_base_interval(mut self, i: usize, lo: f64, hi: f64) -> Self {
        self.x[i] = (lo, hi);
        self
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.x.len() != self.y.len() {
            return Err(Error::invalid(
                "sampling box needs matching base and fiber intervals",
            ));
        }
        for &(lo, hi) in self.x.iter().chain(&self.y) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!(
                    "invalid sampling interval [{lo}, {hi}]"
                )));
            }
        }
        let reach: f64 = self
            .y
            .iter()
            .map(|&(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        if reach < self.min_fiber_norm {
            return Err(Error::invalid(
                "fiber box lies inside the excluded ball around y = 0",
            ));
        }
        Ok(())
    }
}

/// Deterministic sampler; identical seeds give identical streams.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: Xoshiro256StarStar,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn point(&mut self, region: &SamplingBox) -> Result<TangentPoint> {
        region.validate()?;
        let x: Vec<f64> = region
            .x
            .iter()
            .map(|&(lo, hi)| self.uniform(lo, hi))
            .collect();
        for _ in 0..10_000 {
            let y: Vec<f64> = region
                .y
                .iter()
                .map(|&(lo, hi)| self.uniform(lo, hi))
                .collect();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= region.min_fiber_norm {
                return TangentPoint::new(x, y);
            }
        }
        Err(Error::invalid(
            "could not draw a fiber vector outside the excluded ball",
        ))
    }

    pub fn points(&mut self, region: &SamplingBox, count: usize) -> Result<Vec<TangentPoint>> {
        (0..count).map(|_| self.point(region)).collect()
    }

    /// Vector with entries uniform in `[-1, 1)`.
    pub fn vector(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.uniform(-1.0, 1.0)).collect()
    }
}

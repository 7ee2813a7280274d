//! Seed-partitioned Monte Carlo reduction and area partitions for
//! goodness-of-fit tests.
//!
//! Samples are drawn in fixed-size chunks; chunk `k` uses a ChaCha8 stream
//! derived from `(seed, k)`. Chunks run in parallel and are reduced in chunk
//! order, so results are bit-identical for a given seed regardless of the
//! number of worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::surface::FlatSurface;

/// Samples per chunk.
pub const CHUNK: usize = 4096;

/// Largest tolerated fraction of degenerate (resampled) draws.
pub const DEGENERACY_BUDGET: f64 = 1e-3;

/// Random stream for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Running sums for a vector-valued integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub resamples: usize,
}

impl Moments {
    pub fn new(dims: usize) -> Self {
        Moments { count: 0, sum: vec![0.0; dims], sum_sq: vec![0.0; dims], max_abs: vec![0.0; dims], resamples: 0 }
    }

    #[inline]
    pub fn push(&mut self, values: &[f64]) {
        self.count += 1;
        for (k, &v) in values.iter().enumerate() {
            self.sum[k] += v;
            self.sum_sq[k] += v * v;
            self.max_abs[k] = self.max_abs[k].max(v.abs());
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.resamples += other.resamples;
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
            self.max_abs[k] = self.max_abs[k].max(other.max_abs[k]);
        }
    }

    pub fn mean(&self, k: usize) -> f64 {
        self.sum[k] / self.count as f64
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn stderr(&self, k: usize) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return f64::INFINITY;
        }
        let mean = self.mean(k);
        let var = ((self.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Runs `draw` for `samples` accepted samples, retrying draws that fail with
/// a resampleable error, and reduces the results in chunk order.
///
/// `draw` receives the chunk's random stream and an output buffer of length
/// `dims`. Aborts with [`Error::ExcessiveDegeneracy`] when more than 0.1% of
/// draws were degenerate.
pub fn integrate<F>(samples: usize, seed: u64, dims: usize, draw: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(samples - c * CHUNK);
            let mut rng = chunk_rng(seed, c as u64);
            let mut m = Moments::new(dims);
            let mut buf = vec![0.0; dims];
            while m.count < n {
                match draw(&mut rng, &mut buf) {
                    Ok(()) => m.push(&buf),
                    Err(e) if e.is_resampleable() => {
                        m.resamples += 1;
                        if m.resamples > n {
                            return Err(Error::ExcessiveDegeneracy { resamples: m.resamples, samples: n });
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::new(dims);
    for p in partials {
        total.merge(&p?);
    }
    if total.resamples as f64 > DEGENERACY_BUDGET * samples as f64 {
        return Err(Error::ExcessiveDegeneracy { resamples: total.resamples, samples });
    }
    Ok(total)
}

/// A partition of the surface into axis-aligned rectangles of the polygon's
/// bounding-box grid that lie entirely inside the polygon.
#[derive(Debug, Clone)]
pub struct GridPartition {
    min: Vec2,
    cell: Vec2,
    cols: usize,
    rows: usize,
    /// Grid index -> partition cell, `None` for cells outside the polygon.
    index: Vec<Option<usize>>,
    areas: Vec<f64>,
}

impl GridPartition {
    /// Fails unless the kept cells tile the polygon exactly.
    pub fn new(surface: &FlatSurface, cols: usize, rows: usize) -> Result<Self> {
        let (min, max) = surface.bounding_box();
        let cell = Vec2::new((max.x - min.x) / cols as f64, (max.y - min.y) / rows as f64);
        let mut index = vec![None; cols * rows];
        let mut areas = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let lo = Vec2::new(min.x + c as f64 * cell.x, min.y + r as f64 * cell.y);
                let corners = [lo, lo + Vec2::new(cell.x, 0.0), lo + cell, lo + Vec2::new(0.0, cell.y)];
                let center = lo + cell * 0.5;
                if surface.contains(center) {
                    if !corners.iter().all(|&p| surface.contains(p)) {
                        return Err(Error::InvalidArgument(format!(
                            "{cols}x{rows} grid cell at ({}, {}) straddles the boundary",
                            lo.x, lo.y
                        )));
                    }
                    index[r * cols + c] = Some(areas.len());
                    areas.push(cell.x * cell.y);
                }
            }
        }
        let total: f64 = areas.iter().sum();
        if (total - surface.area()).abs() > 1e-9 * surface.area() {
            return Err(Error::InvalidArgument(format!("{cols}x{rows} grid does not tile the polygon")));
        }
        Ok(GridPartition { min, cell, cols, rows, index, areas })
    }

    /// First grid shape yielding exactly six cells.
    pub fn six_cells(surface: &FlatSurface) -> Result<Self> {
        for (c, r) in [(2, 3), (3, 2), (2, 4), (4, 2), (1, 6), (6, 1), (3, 3)] {
            if let Ok(p) = GridPartition::new(surface, c, r) {
                if p.len() == 6 {
                    return Ok(p);
                }
            }
        }
        Err(Error::UnsupportedSurface(surface.name().into()))
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn cell_of(&self, p: Vec2) -> Option<usize> {
        let c = ((p.x - self.min.x) / self.cell.x).floor();
        let r = ((p.y - self.min.y) / self.cell.y).floor();
        if c < 0.0 || r < 0.0 {
            return None;
        }
        let (c, r) = ((c as usize).min(self.cols - 1), (r as usize).min(self.rows - 1));
        self.index[r * self.cols + c]
    }

    /// Pearson statistic against counts proportional to cell area.
    pub fn chi_square(&self, counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        let total: f64 = self.areas.iter().sum();
        counts
            .iter()
            .zip(&self.areas)
            .map(|(&o, &a)| {
                let e = n as f64 * a / total;
                (o as f64 - e).powi(2) / e
            })
            .sum()
    }
}

//! Simple random samples without replacement from a population.

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::direct::direct_cell;
use crate::error::{Error, Result};
use crate::panel::DirectTable;
use crate::rng::{substream, Purpose};
use crate::sim::population::Population;

/// Direct estimates from one sample of `sample_sizes[i]` units per cell.
///
/// Each cell is sampled independently; sampled units are summed in unit
/// order so a census reproduces `μ_true` bit for bit.
pub fn draw_replicate(population: &Population, sample_sizes: &[usize], seed: u64, replicate: u64) -> Result<DirectTable> {
    let index = population.index;
    check_sizes(population, sample_sizes)?;
    let mut rng = substream(seed, Purpose::Replicate, replicate);
    let cells = (0..index.len())
        .map(|i| {
            let (a, t) = index.unflat(i);
            let pool = &population.units[a];
            let mut picked = sample(&mut rng, pool.len(), sample_sizes[i]).into_vec();
            picked.sort_unstable();
            let values: Vec<f64> = picked.iter().map(|&k| population.y[t][pool[k]]).collect();
            direct_cell(&values)
        })
        .collect();
    DirectTable::new(index, cells)
}

fn check_sizes(population: &Population, sample_sizes: &[usize]) -> Result<()> {
    let index = population.index;
    if sample_sizes.len() != index.len() {
        return Err(Error::InvalidConfig(format!(
            "{} sample sizes for {} cells",
            sample_sizes.len(),
            index.len()
        )));
    }
    for (i, &n) in sample_sizes.iter().enumerate() {
        let (a, t) = index.unflat(i);
        if n > population.units[a].len() {
            return Err(Error::SampleExceedsPopulation {
                area: a + 1,
                time: t + 1,
                requested: n,
                available: population.units[a].len(),
            });
        }
    }
    Ok(())
}

/// `r` independent replicate tables, replicate `k` on stream `k`.
pub fn draw_replicates(population: &Population, sample_sizes: &[usize], r: usize, seed: u64) -> Result<Vec<DirectTable>> {
    check_sizes(population, sample_sizes)?;
    (0..r as u64)
        .into_par_iter()
        .map(|k| draw_replicate(population, sample_sizes, seed, k))
        .collect()
}

//! Thread-pool orchestration whose output does not depend on the pool size.

use std::ops::Range;

use rayon::prelude::*;
use scvx_core::fit::{collect_sweep, run_cell, SamplePoint, SweepCell, SweepOutcome};
use scvx_core::pareto::{sample_pareto, ParetoSample, SampleMeta, SampleOptions, SampleOutcome};
use scvx_core::simplex::WeightVector;
use scvx_core::{ElasticNetProblem, Error, SolverConfig};

use crate::error::{Result, ScvxError};

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ScvxError::Usage(format!("cannot start {threads} worker threads: {e}")))
}

/// Maximal runs of grid points sharing `w1`. In revlex grid order these
/// are contiguous.
pub fn w1_chunks(grid: &[WeightVector]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=grid.len() {
        if i == grid.len() || grid[i][0].to_bits() != grid[start][0].to_bits() {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Samples each `w1` chunk independently (warm starts stay inside a chunk)
/// and concatenates in grid order. `threads == 0` uses every core.
pub fn sample_parallel(
    problem: &ElasticNetProblem,
    grid: &[WeightVector],
    config: &SolverConfig,
    options: SampleOptions,
    meta: SampleMeta,
    threads: usize,
) -> Result<SampleOutcome> {
    config.validate()?;
    let chunks = w1_chunks(grid);
    let results: Vec<scvx_core::Result<SampleOutcome>> = pool(threads)?.install(|| {
        chunks
            .par_iter()
            .map(|r| sample_pareto(problem, &grid[r.clone()], config, options, SampleMeta::default()))
            .collect()
    });
    let mut records = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (range, res) in chunks.iter().zip(results) {
        match res {
            Ok(out) => {
                records.extend(out.sample.records);
                failures.extend(out.failures.into_iter().map(|mut f| {
                    f.index += range.start;
                    f
                }));
            }
            Err(Error::PointFailed {
                index,
                weight,
                sweeps,
                last_delta,
            }) => {
                return Err(Error::PointFailed {
                    index: index + range.start,
                    weight,
                    sweeps,
                    last_delta,
                }
                .into())
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(SampleOutcome {
        sample: ParetoSample { records, meta },
        failures,
    })
}

/// Runs the cells on the pool; results keep plan order.
pub fn sweep_parallel(points: &[SamplePoint], m: usize, cells: &[SweepCell], threads: usize) -> Result<SweepOutcome> {
    let results = pool(threads)?.install(|| cells.par_iter().map(|c| run_cell(points, m, c)).collect());
    Ok(collect_sweep(cells, results))
}

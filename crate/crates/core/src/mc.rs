//! Monte Carlo cross-validation of the system distributions.
//!
//! Every system draw is the min (series) or max (parallel) of `n`
//! independent component draws, each obtained by inverting the component
//! cdf. Nothing here goes through the system-level formulas, so agreement
//! with them is an independent check.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{ComponentSet, SystemDist, SystemKind};
use crate::Lifetime;

pub const SHARD: usize = 65_536;
/// Stream offset separating the Y-system from the X-system when common
/// random numbers are off.
const Y_STREAM_OFFSET: u64 = 1 << 40;
/// 99% two-sided Kolmogorov-Smirnov band coefficient.
pub const KS_COEFFICIENT: f64 = 1.63;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub kind: SystemKind,
    pub set: ComponentSet,
    pub seed: u64,
    pub size: usize,
    /// Sorted ascending.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub size: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub passes: bool,
}

fn shard_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Raw component draws, row-major `size x n`, shard `s` on stream
/// `stream_base + s`.
fn component_draws(set: &ComponentSet, size: usize, seed: u64, stream_base: u64) -> Result<Vec<f64>> {
    let n = set.len();
    let shards = size.div_ceil(SHARD);
    let parts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, stream_base + s as u64);
            let rows = SHARD.min(size - s * SHARD);
            let mut out = Vec::with_capacity(rows * n);
            for _ in 0..rows {
                for c in set.components() {
                    let u: f64 = rng.gen();
                    out.push(c.quantile(u)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

fn reduce_rows(draws: &[f64], n: usize, kind: SystemKind) -> Vec<f64> {
    draws
        .chunks_exact(n)
        .map(|row| match kind {
            SystemKind::Series => row.iter().copied().fold(f64::INFINITY, f64::min),
            SystemKind::Parallel => row.iter().copied().fold(0.0, f64::max),
        })
        .collect()
}

fn finalize(kind: SystemKind, set: &ComponentSet, seed: u64, mut values: Vec<f64>) -> SampleBatch {
    values.sort_by(f64::total_cmp);
    SampleBatch {
        kind,
        set: set.clone(),
        seed,
        size: values.len(),
        values,
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 {
        Err(Error::Structural("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `size` seeded system lifetimes, sorted. The result depends only on
/// `(set, kind, size, seed)`, not on the thread count.
pub fn sample_system(set: &ComponentSet, kind: SystemKind, size: usize, seed: u64) -> Result<SampleBatch> {
    check_size(size)?;
    let draws = component_draws(set, size, seed, 0)?;
    Ok(finalize(kind, set, seed, reduce_rows(&draws, set.len(), kind)))
}

/// Series and parallel lifetimes computed from the same component draws,
/// unsorted and index-aligned, followed by the draws themselves.
pub fn sample_bracketed(set: &ComponentSet, size: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_size(size)?;
    let draws = component_draws(set, size, seed, 0)?;
    let n = set.len();
    Ok((
        reduce_rows(&draws, n, SystemKind::Series),
        reduce_rows(&draws, n, SystemKind::Parallel),
        draws,
    ))
}

/// Batches for an X-system and a Y-system. With `common_random_numbers`
/// both use the same uniforms (requires equal component counts).
pub fn sample_pair(
    x_set: &ComponentSet,
    y_set: &ComponentSet,
    kind: SystemKind,
    size: usize,
    seed: u64,
    common_random_numbers: bool,
) -> Result<(SampleBatch, SampleBatch)> {
    check_size(size)?;
    if common_random_numbers && x_set.len() != y_set.len() {
        return Err(Error::Structural(
            "common random numbers need equal component counts".into(),
        ));
    }
    let y_base = if common_random_numbers { 0 } else { Y_STREAM_OFFSET };
    let dx = component_draws(x_set, size, seed, 0)?;
    let dy = component_draws(y_set, size, seed, y_base)?;
    Ok((
        finalize(kind, x_set, seed, reduce_rows(&dx, x_set.len(), kind)),
        finalize(kind, y_set, seed, reduce_rows(&dy, y_set.len(), kind)),
    ))
}

/// KS distance between the batch and an arbitrary analytic cdf.
pub fn ecdf_against<D: Lifetime + ?Sized>(batch: &SampleBatch, dist: &D) -> Result<KsReport> {
    let n = batch.values.len();
    check_size(n)?;
    let nf = n as f64;
    let mut stat: f64 = 0.0;
    for (i, &x) in batch.values.iter().enumerate() {
        let f = dist.cdf(x)?;
        let above = (i + 1) as f64 / nf - f;
        let below = f - i as f64 / nf;
        stat = stat.max(above).max(below);
    }
    let threshold = KS_COEFFICIENT / nf.sqrt();
    Ok(KsReport {
        size: n,
        statistic: stat,
        threshold,
        passes: stat < threshold,
    })
}

/// KS distance between the batch and the analytic cdf of the system it was
/// drawn from.
pub fn ecdf_agreement(batch: &SampleBatch) -> Result<KsReport> {
    ecdf_against(batch, &SystemDist::new(batch.kind, batch.set.clone()))
}

/// Writes `# {json header}` and then one value per line.
pub fn write_csv<W: Write>(batch: &SampleBatch, mut out: W) -> std::io::Result<()> {
    let header = serde_json::json!({
        "kind": batch.kind,
        "seed": batch.seed,
        "size": batch.size,
        "components": batch.set,
    });
    writeln!(out, "# {header}")?;
    writeln!(out, "value")?;
    for v in &batch.values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfr::LfrParams;
    use proptest::prelude::*;

    fn ex_parallel_set() -> ComponentSet {
        ComponentSet::from_params(&[0.2, 0.4, 0.6], &[0.8, 1.0, 1.5]).unwrap()
    }

    #[test]
    fn single_component_kinds_coincide() {
        let set = ComponentSet::new(vec![LfrParams::new(0.3, 0.7).unwrap()]).unwrap();
        let s = sample_system(&set, SystemKind::Series, 5000, 3).unwrap();
        let p = sample_system(&set, SystemKind::Parallel, 5000, 3).unwrap();
        assert_eq!(s.values, p.values);
    }

    #[test]
    fn min_of_two_unit_exponentials_has_mean_half() {
        let e = LfrParams::exponential(1.0).unwrap();
        let set = ComponentSet::new(vec![e, e]).unwrap();
        let b = sample_system(&set, SystemKind::Series, 1_000_000, 2024).unwrap();
        let mean = b.values.iter().sum::<f64>() / b.size as f64;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
    }

    #[test]
    fn parallel_ecdf_at_one() {
        let set = ex_parallel_set();
        let b = sample_system(&set, SystemKind::Parallel, 1_000_000, 99).unwrap();
        let below = b.values.partition_point(|&v| v <= 1.0) as f64 / b.size as f64;
        let analytic = SystemDist::parallel(set).cdf(1.0).unwrap();
        assert!((below - analytic).abs() < 0.002, "{below} vs {analytic}");
    }

    #[test]
    fn ks_passes_on_own_distribution() {
        for (kind, seed) in [(SystemKind::Series, 1), (SystemKind::Parallel, 2)] {
            let b = sample_system(&ex_parallel_set(), kind, 10_000, seed).unwrap();
            let r = ecdf_agreement(&b).unwrap();
            assert!((r.threshold - 0.0163).abs() < 1e-12);
            assert!(r.passes, "{kind}: {r:?}");
        }
    }

    #[test]
    fn ks_separates_series_from_parallel() {
        let set = ex_parallel_set();
        let b = sample_system(&set, SystemKind::Series, 10_000, 5).unwrap();
        let r = ecdf_against(&b, &SystemDist::parallel(set.clone())).unwrap();
        assert!(r.statistic > 0.1 && !r.passes, "{r:?}");
        // analytic separation at the series median
        let m = SystemDist::series(set.clone()).quantile(0.5).unwrap();
        assert!(0.5 - SystemDist::parallel(set).cdf(m).unwrap() > 0.1);
    }

    #[test]
    fn ks_single_point() {
        let set = ex_parallel_set();
        let b = sample_system(&set, SystemKind::Series, 1, 8).unwrap();
        let u = SystemDist::series(set).cdf(b.values[0]).unwrap();
        let r = ecdf_agreement(&b).unwrap();
        assert!((r.statistic - u.max(1.0 - u)).abs() < 1e-15);
    }

    #[test]
    fn probability_integral_transform_is_uniform() {
        let set = ex_parallel_set();
        let dist = SystemDist::parallel(set.clone());
        let b = sample_system(&set, SystemKind::Parallel, 20_000, 17).unwrap();
        let mut u: Vec<f64> = b.values.iter().map(|&x| dist.cdf(x).unwrap()).collect();
        u.sort_by(f64::total_cmp);
        let n = u.len() as f64;
        let d = u
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
            .fold(0.0, f64::max);
        assert!(d < KS_COEFFICIENT / n.sqrt(), "{d}");
    }

    #[test]
    fn determinism_and_shard_independence() {
        let set = ex_parallel_set();
        let a = sample_system(&set, SystemKind::Series, SHARD + 123, 4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_system(&set, SystemKind::Series, SHARD + 123, 4).unwrap());
        assert_eq!(a, b);
        assert!(a.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn common_random_numbers() {
        let x = ex_parallel_set();
        let (bx, by) = sample_pair(&x, &x, SystemKind::Series, 1000, 6, true).unwrap();
        assert_eq!(bx.values, by.values);
        let (bx, by) = sample_pair(&x, &x, SystemKind::Series, 1000, 6, false).unwrap();
        assert_ne!(bx.values, by.values);
        let single = ComponentSet::new(vec![LfrParams::new(1.0, 1.0).unwrap()]).unwrap();
        assert!(sample_pair(&x, &single, SystemKind::Series, 10, 6, true).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let b = sample_system(&ex_parallel_set(), SystemKind::Parallel, 3, 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&b, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        let meta: serde_json::Value = serde_json::from_str(lines[0].trim_start_matches("# ")).unwrap();
        assert_eq!(meta["kind"], "parallel");
        assert_eq!(meta["seed"], 1);
        assert_eq!(lines[2].parse::<f64>().unwrap(), b.values[0]);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(sample_system(&ex_parallel_set(), SystemKind::Series, 0, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bracketing(alphas in proptest::collection::vec(0.0f64..3.0, 1..5), beta in 0.05f64..3.0, seed in any::<u64>()) {
            let set = ComponentSet::with_common_beta(&alphas, beta).unwrap();
            let n = set.len();
            let (lo, hi, draws) = sample_bracketed(&set, 200, seed).unwrap();
            for (i, row) in draws.chunks_exact(n).enumerate() {
                for &c in row {
                    prop_assert!(lo[i] <= c && c <= hi[i]);
                }
            }
        }
    }
}

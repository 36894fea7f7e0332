//! Exact Hausdorff distance between finite point clouds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cubical::{CubeSet, Grid};
use crate::error::{Error, Result};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(())
}

/// Quadratic reference implementation.
pub fn hausdorff_brute(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check(a, b)?;
    let directed = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter().map(|x| q.iter().map(|y| sq_dist(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)).sqrt())
}

/// Directed distance with the early-break rule: the inner scan over `q`
/// stops as soon as a point closer than the running maximum is found, since
/// such an `x` cannot raise the maximum. Visiting `q` in random order makes
/// the break come early.
fn directed_early_break(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
    p.par_chunks(256)
        .map(|chunk| {
            let mut cmax = 0.0f64;
            for x in chunk {
                let mut cmin = f64::INFINITY;
                let mut broke = false;
                for y in q {
                    let d = sq_dist(x, y);
                    if d < cmax {
                        broke = true;
                        break;
                    }
                    cmin = cmin.min(d);
                }
                if !broke {
                    cmax = cmax.max(cmin);
                }
            }
            cmax
        })
        .reduce(|| 0.0, f64::max)
}

/// Exact Hausdorff distance, symmetric in its arguments.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut a2 = a.to_vec();
    let mut b2 = b.to_vec();
    a2.shuffle(&mut rng);
    b2.shuffle(&mut rng);
    Ok(directed_early_break(&a2, &b2).max(directed_early_break(&b2, &a2)).sqrt())
}

/// Hausdorff distance between the centers of two cube sets. Shared cubes
/// are at distance zero from the other set, so only the two differences are
/// scanned.
pub fn cube_set_distance(grid: &Grid, a: &CubeSet, b: &CubeSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let centers = |s: &CubeSet| -> Vec<Vec<f64>> { s.iter().map(|c| grid.center(c)).collect() };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut directed = |p: &CubeSet, q: &CubeSet| {
        let only = p.difference(q);
        if only.is_empty() {
            return 0.0;
        }
        let mut qc = centers(q);
        qc.shuffle(&mut rng);
        directed_early_break(&centers(&only), &qc)
    };
    Ok(directed(a, b).max(directed(b, a)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_clouds() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = vec![vec![0.0, 0.0], vec![0.0, 3.0]];
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 3.0);
        assert_eq!(hausdorff_brute(&a, &b).unwrap(), 3.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        assert!(matches!(hausdorff_distance(&[], &[vec![0.0]]), Err(Error::EmptyCloud)));
    }
}

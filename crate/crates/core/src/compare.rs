//! Discrete distances between grids and runs.

use crate::error::{Error, Result};
use crate::grid::{RunArtifact, ScalarGrid};
use crate::shock::{dominant_cluster, DEFAULT_JUMP_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// `h * sum |d_k|`.
    L1,
    /// `max |d_k|`.
    Linf,
}

/// Indices left out of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Exclusion {
    #[default]
    None,
    /// Nodes `lo..=hi`.
    Indices { lo: usize, hi: usize },
    /// `radius` nodes on each side of the nodes touched by the first grid's
    /// dominant jump cluster.
    AroundShock { radius: usize },
}

impl Exclusion {
    fn range(&self, reference: &ScalarGrid) -> Option<(usize, usize)> {
        match *self {
            Exclusion::None => None,
            Exclusion::Indices { lo, hi } => Some((lo, hi)),
            Exclusion::AroundShock { radius } => dominant_cluster(reference, DEFAULT_JUMP_FACTOR)
                .map(|(lo, hi)| (lo.saturating_sub(radius), hi + 1 + radius)),
        }
    }
}

/// Distance between two grids at the same time. `b` is linearly resampled
/// onto the grid of `a` when the sizes differ.
pub fn compare_grids(
    a: &ScalarGrid,
    b: &ScalarGrid,
    norm: Norm,
    exclusion: Exclusion,
) -> Result<f64> {
    let tol = 1e-9 * (1.0 + a.t.abs());
    if (a.t - b.t).abs() > tol {
        return Err(Error::Incompatible(format!(
            "time stamps {} and {} differ",
            a.t, b.t
        )));
    }
    if a.values.len() < 2 || b.values.len() < 2 {
        return Err(Error::Incompatible("grids need at least two nodes".into()));
    }
    let n = a.n();
    let b = b.resample(n);
    let skip = exclusion.range(a);
    let diffs = a
        .values
        .iter()
        .zip(&b.values)
        .enumerate()
        .filter(|(k, _)| !matches!(skip, Some((lo, hi)) if (lo..=hi).contains(k)))
        .map(|(_, (x, y))| (x - y).abs());
    Ok(match norm {
        Norm::L1 => diffs.sum::<f64>() / n as f64,
        Norm::Linf => diffs.fold(0.0, f64::max),
    })
}

/// Largest grid distance over matching snapshots. Both runs must record the
/// same time stamps.
pub fn compare_runs(
    a: &RunArtifact<ScalarGrid>,
    b: &RunArtifact<ScalarGrid>,
    norm: Norm,
    exclusion: Exclusion,
) -> Result<f64> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Incompatible(format!(
            "{} snapshots versus {}",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .try_fold(0.0f64, |acc, (x, y)| {
            Ok(acc.max(compare_grids(x, y, norm, exclusion)?))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_of(grids: Vec<ScalarGrid>) -> RunArtifact<ScalarGrid> {
        let mut run = RunArtifact::new(grids[0].n(), 0.1);
        run.snapshots = grids;
        run
    }

    #[test]
    fn identical_runs_have_zero_distance() {
        let a = run_of(vec![
            ScalarGrid::from_fn(0.0, 10, |z| z.sin()),
            ScalarGrid::from_fn(1.0, 10, |z| z * z),
        ]);
        assert_eq!(
            compare_runs(&a, &a, Norm::L1, Exclusion::None).unwrap(),
            0.0
        );
        assert_eq!(
            compare_runs(&a, &a, Norm::Linf, Exclusion::None).unwrap(),
            0.0
        );
    }

    #[test]
    fn constant_grids() {
        let a = ScalarGrid::from_fn(0.0, 10, |_| 1.0);
        let b = ScalarGrid::from_fn(0.0, 10, |_| 2.0);
        assert_eq!(
            compare_grids(&a, &b, Norm::Linf, Exclusion::None).unwrap(),
            1.0
        );
        // h * (N + 1) nodes
        assert!((compare_grids(&a, &b, Norm::L1, Exclusion::None).unwrap() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn mismatched_times_are_rejected() {
        let a = ScalarGrid::from_fn(0.0, 10, |_| 1.0);
        let b = ScalarGrid::from_fn(0.5, 10, |_| 1.0);
        assert!(matches!(
            compare_grids(&a, &b, Norm::L1, Exclusion::None),
            Err(Error::Incompatible(_))
        ));
        let ra = run_of(vec![a.clone()]);
        let rb = run_of(vec![a.clone(), a]);
        assert!(compare_runs(&ra, &rb, Norm::L1, Exclusion::None).is_err());
    }

    #[test]
    fn different_sizes_are_interpolated() {
        let a = ScalarGrid::from_fn(0.0, 10, |z| 3.0 * z);
        let b = ScalarGrid::from_fn(0.0, 40, |z| 3.0 * z);
        assert!(compare_grids(&a, &b, Norm::Linf, Exclusion::None).unwrap() < 1e-14);
    }

    #[test]
    fn shock_window_is_excluded() {
        let a = ScalarGrid::new(
            0.0,
            (0..=20).map(|k| if k <= 10 { 1.0 } else { -1.0 }).collect(),
        );
        let mut b = a.clone();
        b.values[9] = 5.0;
        b.values[12] = 5.0;
        let d = compare_grids(&a, &b, Norm::Linf, Exclusion::AroundShock { radius: 2 }).unwrap();
        assert_eq!(d, 0.0);
        let d = compare_grids(&a, &b, Norm::Linf, Exclusion::Indices { lo: 0, hi: 9 }).unwrap();
        assert_eq!(d, 6.0);
    }
}

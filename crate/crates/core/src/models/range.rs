//! Value bounds and supports along a trajectory.

use serde::Serialize;

use super::DomainSlab;
use crate::error::{Error, Result};
use crate::fields::{support_box, SupportBox};
use crate::solver::Snapshot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeTrack {
    pub times: Vec<f64>,
    /// `U_t = sup_y |u(t, y)|` per snapshot (for a pair, the max of both).
    pub bounds: Vec<f64>,
    /// `𝒰 = max_t U_t`.
    pub global_bound: f64,
    pub supports: Vec<SupportBox>,
    /// Union of all snapshot supports.
    pub union_support: SupportBox,
    pub threshold: f64,
}

/// Range track of one trajectory, with supports taken at `threshold`.
pub fn range_track(snapshots: &[Snapshot], threshold: f64) -> Result<RangeTrack> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::invalid("range track of an empty trajectory"))?;
    let mut union = SupportBox::empty(first.field.grid().dimension());
    let mut track = RangeTrack {
        times: Vec::with_capacity(snapshots.len()),
        bounds: Vec::with_capacity(snapshots.len()),
        global_bound: 0.0,
        supports: Vec::with_capacity(snapshots.len()),
        union_support: union.clone(),
        threshold,
    };
    for s in snapshots {
        let b = support_box(&s.field, threshold);
        union = union.union(&b);
        let m = s.field.max_abs();
        track.global_bound = track.global_bound.max(m);
        track.times.push(s.time);
        track.bounds.push(m);
        track.supports.push(b);
    }
    track.union_support = union;
    Ok(track)
}

impl RangeTrack {
    /// Pair track: `V_t = max(U_t, V_t)` and unions of supports.
    pub fn pair(&self, other: &RangeTrack) -> Result<RangeTrack> {
        if self.times.len() != other.times.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::invalid("paired trajectories need identical snapshot times"));
        }
        let bounds: Vec<f64> = self.bounds.iter().zip(&other.bounds).map(|(a, b)| a.max(*b)).collect();
        Ok(RangeTrack {
            times: self.times.clone(),
            global_bound: bounds.iter().copied().fold(0.0, f64::max),
            bounds,
            supports: self.supports.iter().zip(&other.supports).map(|(a, b)| a.union(b)).collect(),
            union_support: self.union_support.union(&other.union_support),
            threshold: self.threshold.max(other.threshold),
        })
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("range track is never empty")
    }

    /// `Σ = [t₀, T] × 𝒮 × [−𝒰, 𝒰]`.
    pub fn sigma_slab(&self) -> Result<DomainSlab> {
        DomainSlab::from_box((self.times[0], self.final_time()), &self.union_support, self.global_bound)
    }

    /// Like [`sigma_slab`](Self::sigma_slab) with the support dilated by `r`.
    pub fn dilated_slab(&self, r: f64) -> Result<DomainSlab> {
        DomainSlab::from_box(
            (self.times[0], self.final_time()),
            &self.union_support.dilate(r),
            self.global_bound,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, ScalarField};

    fn snap(t: f64, values: Vec<f64>) -> Snapshot {
        let grid = Grid::new(vec![0.0], 1.0, vec![values.len()]).unwrap();
        Snapshot { time: t, field: ScalarField::from_values(grid, values).unwrap() }
    }

    #[test]
    fn zero_trajectory_has_empty_supports() {
        let track = range_track(&[snap(0.0, vec![0.0; 4]), snap(1.0, vec![0.0; 4])], 1e-12).unwrap();
        assert_eq!(track.bounds, vec![0.0, 0.0]);
        assert!(track.union_support.is_empty());
        assert!(track.sigma_slab().unwrap().is_empty());
    }

    #[test]
    fn union_contains_each_support() {
        let track = range_track(
            &[snap(0.0, vec![0.0, 1.0, 0.0, 0.0]), snap(1.0, vec![0.0, 0.0, -2.0, 0.0])],
            1e-12,
        )
        .unwrap();
        assert_eq!(track.global_bound, 2.0);
        for b in &track.supports {
            assert!(track.union_support.contains(b, 0.0));
        }
        assert_eq!(track.union_support.bounds(), vec![(1.0, 3.0)]);
        let other = range_track(
            &[snap(0.0, vec![3.0, 0.0, 0.0, 0.0]), snap(1.0, vec![0.0; 4])],
            1e-12,
        )
        .unwrap();
        let pair = track.pair(&other).unwrap();
        assert_eq!(pair.bounds, vec![3.0, 2.0]);
        assert_eq!(pair.union_support.bounds(), vec![(0.0, 3.0)]);
    }
}

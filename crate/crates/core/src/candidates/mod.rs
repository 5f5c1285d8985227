//! Candidate real solutions: Newton refinement from random starts, deflation
//! sequences, gradient-descent homotopies and samples of parametrized components.

mod component;
mod deflation;
mod homotopy;
mod newton;
mod points;
mod search;

pub use component::{parse_components, sample_component, ComponentError, ComponentParam};
pub use deflation::{deflation_sequence, DeflationError, DeflationOptions};
pub use homotopy::{build_gdh, track, Homotopy, TrackError, TrackOptions, TrackResult};
pub use newton::{newton_refine, NewtonError, NewtonOptions, NewtonPoint};
pub use points::{format_points, parse_points, PointsError};
pub use search::{random_real_search, SearchOptions};

use serde::Serialize;

/// Default admission tolerance on `max_i |f_i(x)|`.
pub const ADMISSION_TOL: f64 = 1e-8;
/// Default Euclidean deduplication radius.
pub const DEDUPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointSource {
    User,
    Newton,
    Homotopy,
    ComponentSample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub coords: Vec<f64>,
    pub residual: f64,
    pub deflation_seq: Option<Vec<usize>>,
    pub component: Option<String>,
    pub source: PointSource,
    /// Index of the random start that produced the point, if any.
    pub start: Option<usize>,
}

impl PointRecord {
    pub fn new(coords: Vec<f64>, residual: f64, source: PointSource) -> Self {
        Self {
            coords,
            residual,
            deflation_seq: None,
            component: None,
            source,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    pub nvars: usize,
    pub points: Vec<PointRecord>,
}

impl PointSet {
    pub fn new(nvars: usize) -> Self {
        Self {
            nvars,
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coords(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.coords.clone()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().fold(0.0, |a, p| a.max(p.residual))
    }

    /// Adds `rec` unless a kept point lies within `tol`. Returns whether it was added.
    pub fn push_unique(&mut self, rec: PointRecord, tol: f64) -> bool {
        if self.points.iter().any(|q| distance(&q.coords, &rec.coords) < tol) {
            return false;
        }
        self.points.push(rec);
        true
    }

    /// Appends every point of `other`, deduplicating against what is kept.
    pub fn merge(&mut self, other: PointSet, tol: f64) {
        for p in other.points {
            self.push_unique(p, tol);
        }
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Keeps the first point of each cluster of points closer than `tol`.
pub fn dedupe(p: &PointSet, tol: f64) -> PointSet {
    let mut out = PointSet::new(p.nvars);
    for rec in &p.points {
        out.push_unique(rec.clone(), tol);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pts: &[&[f64]]) -> PointSet {
        PointSet {
            nvars: pts[0].len(),
            points: pts
                .iter()
                .map(|c| PointRecord::new(c.to_vec(), 0.0, PointSource::User))
                .collect(),
        }
    }

    #[test]
    fn near_duplicates_collapse() {
        let p = set(&[&[1.0, 0.0], &[1.0 + 1e-12, 0.0]]);
        assert_eq!(dedupe(&p, 1e-8).len(), 1);
    }

    #[test]
    fn first_of_cluster_is_kept() {
        let p = set(&[&[0.0], &[0.5e-6], &[0.9e-6], &[3.0]]);
        let d = dedupe(&p, 1e-6);
        assert_eq!(d.coords(), vec![vec![0.0], vec![3.0]]);
    }
}

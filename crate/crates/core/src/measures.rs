//! Discrete probability measures, causal couplings, sampled causal curves,
//! lifted plans, and time-sampled causal paths of measures with their speed
//! and action estimators.

use crate::error::{Error, Result};
use crate::spacetime::{PointLike, Spacetime};
use crate::transport::{self, Exponent};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const MIN_WEIGHT: f64 = 1e-12;
pub const PLAN_MARGINAL_TOL: f64 = 1e-10;

/// A finitely supported probability measure. Locations are pairwise
/// distinct; duplicates are merged at construction by exact equality
/// (callers wanting fuzzy merging must quantize coordinates first).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<P: PointLike> {
    locations: Vec<P>,
    weights: Vec<f64>,
}

impl<P: PointLike> DiscreteMeasure<P> {
    pub fn new(atoms: Vec<(P, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        let mut locations: Vec<P> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidMeasure(format!("atom weight {w} must be positive")));
            }
            match locations.iter().position(|q| *q == p) {
                Some(i) => weights[i] += w,
                None => {
                    locations.push(p);
                    weights.push(w);
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL:e}"
            )));
        }
        if weights.iter().any(|w| *w < MIN_WEIGHT) {
            return Err(Error::InvalidMeasure("degenerate atom weight after merging".into()));
        }
        Ok(Self { locations, weights })
    }

    pub fn dirac(p: P) -> Self {
        Self { locations: vec![p], weights: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, f64)> {
        self.locations.iter().zip(self.weights.iter().copied())
    }

    pub fn location(&self, i: usize) -> &P {
        &self.locations[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> Vec<P> {
        self.locations.clone()
    }
}

/// A coupling matrix concentrated on causally related pairs, with marginals
/// equal to the source and target measures.
#[derive(Clone, Debug)]
pub struct CausalPlan<P: PointLike> {
    source: DiscreteMeasure<P>,
    target: DiscreteMeasure<P>,
    matrix: Vec<Vec<f64>>,
}

impl<P: PointLike> CausalPlan<P> {
    pub fn new<S: Spacetime<Point = P>>(
        space: &S,
        source: DiscreteMeasure<P>,
        target: DiscreteMeasure<P>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = source.len();
        let m = target.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidPlan(format!("matrix must be {n}x{m}")));
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidPlan(format!("entry ({i},{j}) = {v} is not a mass")));
                }
                if v > 0.0 && !space.relation(source.location(i), target.location(j))?.is_causal() {
                    return Err(Error::InvalidPlan(format!(
                        "mass {v} on the non-causal pair ({i},{j})"
                    )));
                }
            }
        }
        for i in 0..n {
            let row_sum: f64 = matrix[i].iter().sum();
            if (row_sum - source.weight(i)).abs() > PLAN_MARGINAL_TOL {
                return Err(Error::InvalidPlan(format!("row {i} sums to {row_sum}")));
            }
        }
        for j in 0..m {
            let col_sum: f64 = matrix.iter().map(|r| r[j]).sum();
            if (col_sum - target.weight(j)).abs() > PLAN_MARGINAL_TOL {
                return Err(Error::InvalidPlan(format!("column {j} sums to {col_sum}")));
            }
        }
        Ok(Self { source, target, matrix })
    }

    pub fn source(&self) -> &DiscreteMeasure<P> {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure<P> {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Entries carrying mass, as (source index, target index, mass).
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.matrix
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
            .filter(|&(_, _, v)| v > 0.0)
    }
}

pub(crate) fn validate_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidGrid("grid needs at least two times".into()));
    }
    if times[0] < 0.0 || *times.last().unwrap() > 1.0 {
        return Err(Error::InvalidGrid("grid must lie in [0, 1]".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid("grid times must be strictly increasing".into()));
    }
    Ok(())
}

/// Uniform grid 0, 1/n, ..., 1.
pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    assert!(intervals >= 1);
    (0..=intervals).map(|k| k as f64 / intervals as f64).collect()
}

/// A discrete causal curve: sampled points with `points[k] <= points[k+1]`.
/// Jumps follow the left-continuous convention: a jump on `(t_k, t_{k+1}]`
/// assigns the new point to `t_{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve<P: PointLike> {
    times: Vec<f64>,
    points: Vec<P>,
}

impl<P: PointLike> SampledCurve<P> {
    pub fn new<S: Spacetime<Point = P>>(space: &S, times: Vec<f64>, points: Vec<P>) -> Result<Self> {
        validate_grid(&times)?;
        if points.len() != times.len() {
            return Err(Error::InvalidCurve("one point per time required".into()));
        }
        for (k, pair) in points.windows(2).enumerate() {
            if !space.relation(&pair[0], &pair[1])?.is_causal() {
                return Err(Error::InvalidCurve(format!("step {k} is not causal")));
            }
        }
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }
}

/// Causal speed of a sampled curve on one interval:
/// `ell(gamma_k, gamma_{k+1}) / (t_{k+1} - t_k)`.
pub fn curve_speed<S: Spacetime>(space: &S, curve: &SampledCurve<S::Point>, k: usize) -> Result<f64> {
    if k + 1 >= curve.times.len() {
        return Err(Error::InvalidArgument(format!("interval {k} out of range")));
    }
    let l = space.time_separation(&curve.points[k], &curve.points[k + 1])?;
    Ok(l / (curve.times[k + 1] - curve.times[k]))
}

/// One weighted curve of a lifted plan; points share the plan's grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCurve<P: PointLike> {
    pub points: Vec<P>,
    pub weight: f64,
}

/// A probability measure on sampled causal curves over one shared grid.
#[derive(Clone, Debug)]
pub struct LiftedPlan<P: PointLike> {
    times: Vec<f64>,
    curves: Vec<LiftedCurve<P>>,
}

impl<P: PointLike> LiftedPlan<P> {
    pub fn new<S: Spacetime<Point = P>>(
        space: &S,
        times: Vec<f64>,
        curves: Vec<LiftedCurve<P>>,
    ) -> Result<Self> {
        validate_grid(&times)?;
        if curves.is_empty() {
            return Err(Error::InvalidPlan("lifted plan needs at least one curve".into()));
        }
        let mut total = 0.0;
        for (c, curve) in curves.iter().enumerate() {
            if !curve.weight.is_finite() || curve.weight <= 0.0 {
                return Err(Error::InvalidPlan(format!("curve {c} weight must be positive")));
            }
            total += curve.weight;
            if curve.points.len() != times.len() {
                return Err(Error::InvalidPlan(format!("curve {c} does not match the grid")));
            }
            for (k, pair) in curve.points.windows(2).enumerate() {
                if !space.relation(&pair[0], &pair[1])?.is_causal() {
                    return Err(Error::InvalidCurve(format!("curve {c}, step {k} is not causal")));
                }
            }
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidPlan(format!("curve weights sum to {total}")));
        }
        Ok(Self { times, curves })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn curves(&self) -> &[LiftedCurve<P>] {
        &self.curves
    }

    /// Pushforward of the curve weights through evaluation at grid index k,
    /// coincident locations merged.
    pub fn marginal_at_index(&self, k: usize) -> Result<DiscreteMeasure<P>> {
        if k >= self.times.len() {
            return Err(Error::InvalidArgument(format!("grid index {k} out of range")));
        }
        DiscreteMeasure::new(
            self.curves
                .iter()
                .map(|c| (c.points[k].clone(), c.weight))
                .collect(),
        )
    }

    /// Time-t marginal; t must lie exactly on the grid.
    pub fn marginal(&self, t: f64) -> Result<DiscreteMeasure<P>> {
        match self.times.iter().position(|&s| s == t) {
            Some(k) => self.marginal_at_index(k),
            None => Err(Error::OffGridTime(t)),
        }
    }

    /// The path of marginals. Consecutive feasibility is witnessed by the
    /// curve coupling itself, so no flow check is run.
    pub fn to_measure_path(&self) -> Result<MeasurePath<P>> {
        let measures: Result<Vec<_>> =
            (0..self.times.len()).map(|k| self.marginal_at_index(k)).collect();
        Ok(MeasurePath { times: self.times.clone(), measures: measures? })
    }
}

/// A time-sampled causal path of measures: consecutive marginals must admit
/// a causal coupling.
#[derive(Clone, Debug)]
pub struct MeasurePath<P: PointLike> {
    times: Vec<f64>,
    measures: Vec<DiscreteMeasure<P>>,
}

impl<P: PointLike> MeasurePath<P> {
    pub fn new<S: Spacetime<Point = P>>(
        space: &S,
        times: Vec<f64>,
        measures: Vec<DiscreteMeasure<P>>,
    ) -> Result<Self> {
        validate_grid(&times)?;
        if measures.len() != times.len() {
            return Err(Error::InvalidGrid("one measure per time required".into()));
        }
        for (k, pair) in measures.windows(2).enumerate() {
            match transport::feasible(space, &pair[0], &pair[1])? {
                transport::Feasibility::Feasible(_) => {}
                transport::Feasibility::Infeasible { .. } => {
                    return Err(Error::PathInfeasibleStep { step: k });
                }
            }
        }
        Ok(Self { times, measures })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn measures(&self) -> &[DiscreteMeasure<P>] {
        &self.measures
    }

    pub fn measure(&self, k: usize) -> &DiscreteMeasure<P> {
        &self.measures[k]
    }

    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn interval_length(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }
}

/// Discrete metric speed of the path on interval k:
/// `ell_p(mu_k, mu_{k+1}) / (t_{k+1} - t_k)`, computed by an exact solve.
pub fn path_speed<S: Spacetime>(
    space: &S,
    path: &MeasurePath<S::Point>,
    e: Exponent,
    k: usize,
) -> Result<f64> {
    if k + 1 >= path.times.len() {
        return Err(Error::InvalidArgument(format!("interval {k} out of range")));
    }
    let result = transport::solve_primal(space, &path.measures[k], &path.measures[k + 1], e)?;
    Ok(result.ell_p / path.interval_length(k))
}

/// Action of the path over its own grid:
/// `sum_k dt_k u_p(ell_p(mu_k, mu_{k+1}) / dt_k)`.
///
/// This is the partition value at the path's own grid, exact for
/// constant-speed geodesics; -inf as soon as one term is -inf.
pub fn path_action<S: Spacetime>(space: &S, path: &MeasurePath<S::Point>, e: Exponent) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..path.intervals() {
        let dt = path.interval_length(k);
        let term = dt * e.u(path_speed(space, path, e, k)?);
        if term == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += term;
    }
    Ok(total)
}

//! The dynamic side: geodesic displacement interpolation, barycentric
//! velocity fields, the causal continuity inequality checker, the Kuwada
//! direction, and the end-to-end Benamou-Brenier verification harness.
//!
//! Everything here lives on Minkowski space, the model that carries tangent
//! data.

use rand::Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::measures::{
    self, CausalPlan, DiscreteMeasure, LiftedCurve, LiftedPlan, MeasurePath,
};
use crate::spacetime::{CausalCovector, CausalVector, Event, Minkowski, Spacetime};
use crate::transport::{self, Exponent, PlanOutcome};

/// Plan entries below this threshold are treated as empty when turning a
/// coupling into curves (simplex pivots can leave exact-zero dust).
pub const PLAN_SUPPORT_EPS: f64 = 1e-13;

pub const CCI_BASE_TOL: f64 = 1e-9;
pub const KUWADA_TOL: f64 = 1e-8;
pub const BB_GAP_TOL: f64 = 1e-8;

/// Per-time causal vector fields on atoms; the vector's base point is the
/// atom location it is attached to.
#[derive(Clone, Debug)]
pub struct VelocitySeries {
    times: Vec<f64>,
    fields: Vec<Vec<CausalVector>>,
    /// Number of curve-atom coincidences absorbed by barycentric averaging.
    pub collisions: usize,
}

impl VelocitySeries {
    /// Every vector must be future-causal; an anticausal field is rejected
    /// here, before any check runs.
    pub fn new(mink: &Minkowski, times: Vec<f64>, fields: Vec<Vec<CausalVector>>) -> Result<Self> {
        measures::validate_grid(&times)?;
        if fields.len() != times.len() {
            return Err(Error::DomainMismatch("one field per grid time required".into()));
        }
        for (k, field) in fields.iter().enumerate() {
            for v in field {
                mink.check_point(&v.base)?;
                if v.components.len() != mink.event_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: mink.event_dim(),
                        got: v.components.len(),
                    });
                }
                if !v.is_future_causal() {
                    return Err(Error::InvalidArgument(format!(
                        "vector at time index {k} is not future-causal"
                    )));
                }
            }
        }
        Ok(Self { times, fields, collisions: 0 })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn field_at(&self, k: usize) -> &[CausalVector] {
        &self.fields[k]
    }

    pub fn lookup(&self, k: usize, at: &Event) -> Option<&CausalVector> {
        self.fields[k].iter().find(|v| v.base == *at)
    }

    /// Damps every vector by `lambda` in [0, 1]; causality is preserved.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("damping {lambda} outside [0, 1]")));
        }
        Ok(Self {
            times: self.times.clone(),
            fields: self
                .fields
                .iter()
                .map(|f| f.iter().map(|v| v.scaled(lambda)).collect())
                .collect(),
            collisions: self.collisions,
        })
    }
}

/// A monotone C^1 ramp through breakpoints (Fritsch-Carlson monotone cubic
/// interpolation), extended linearly with the end slopes.
#[derive(Clone, Debug)]
pub struct Ramp {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Ramp {
    pub fn monotone_cubic(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("ramp needs at least two knots".into()));
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("ramp knots must have increasing x".into()));
        }
        if ys.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("ramp must be nondecreasing".into()));
        }
        let n = xs.len();
        let d: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for k in 1..n - 1 {
            m[k] = if d[k - 1] * d[k] <= 0.0 { 0.0 } else { 0.5 * (d[k - 1] + d[k]) };
        }
        for k in 0..n - 1 {
            if d[k] == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let alpha = m[k] / d[k];
            let beta = m[k + 1] / d[k];
            let norm = alpha * alpha + beta * beta;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                m[k] = tau * alpha * d[k];
                m[k + 1] = tau * beta * d[k];
            }
        }
        Ok(Self { xs, ys, slopes: m })
    }

    fn segment(&self, u: f64) -> Option<usize> {
        if u < self.xs[0] || u > *self.xs.last().unwrap() {
            return None;
        }
        let k = self.xs.partition_point(|&x| x <= u).saturating_sub(1);
        Some(k.min(self.xs.len() - 2))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.segment(u) {
            None => {
                if u < self.xs[0] {
                    self.ys[0] + self.slopes[0] * (u - self.xs[0])
                } else {
                    let n = self.xs.len() - 1;
                    self.ys[n] + self.slopes[n] * (u - self.xs[n])
                }
            }
            Some(k) => {
                let h = self.xs[k + 1] - self.xs[k];
                let s = (u - self.xs[k]) / h;
                let (y0, y1) = (self.ys[k], self.ys[k + 1]);
                let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1
            }
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self.segment(u) {
            None => {
                if u < self.xs[0] {
                    self.slopes[0]
                } else {
                    *self.slopes.last().unwrap()
                }
            }
            Some(k) => {
                let h = self.xs[k + 1] - self.xs[k];
                let s = (u - self.xs[k]) / h;
                let (y0, y1) = (self.ys[k], self.ys[k + 1]);
                let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
                let s2 = s * s;
                ((6.0 * s2 - 6.0 * s) * y0
                    + (3.0 * s2 - 4.0 * s + 1.0) * m0
                    + (-6.0 * s2 + 6.0 * s) * y1
                    + (3.0 * s2 - 2.0 * s) * m1)
                    / h
            }
        }
    }

    /// max |ramp''| over the breakpoint range; the second derivative of each
    /// Hermite cubic is linear, so it peaks at segment ends. Zero outside.
    pub fn max_second_derivative(&self) -> f64 {
        let mut best = 0.0f64;
        for k in 0..self.xs.len() - 1 {
            let h = self.xs[k + 1] - self.xs[k];
            let (y0, y1) = (self.ys[k], self.ys[k + 1]);
            let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
            let at0 = (-6.0 * y0 - 4.0 * m0 + 6.0 * y1 - 2.0 * m1) / (h * h);
            let at1 = (6.0 * y0 + 2.0 * m0 - 6.0 * y1 + 4.0 * m1) / (h * h);
            best = best.max(at0.abs()).max(at1.abs());
        }
        best
    }
}

/// A smooth causal test function for the continuity-inequality checker:
/// either a linear causal functional or a monotone ramp composed with one.
/// The differential at every point is a causal covector.
#[derive(Clone, Debug)]
pub enum TestFunction {
    Linear { a: CausalCovector },
    RampComposite { a: CausalCovector, ramp: Ramp },
}

impl TestFunction {
    pub fn linear(a: CausalCovector) -> Result<Self> {
        if !a.is_causal() {
            return Err(Error::NonCausalCovector);
        }
        Ok(TestFunction::Linear { a })
    }

    pub fn ramp_composite(a: CausalCovector, ramp: Ramp) -> Result<Self> {
        if !a.is_causal() {
            return Err(Error::NonCausalCovector);
        }
        Ok(TestFunction::RampComposite { a, ramp })
    }

    pub fn eval(&self, x: &Event) -> f64 {
        match self {
            TestFunction::Linear { a } => a.apply(x.coords()),
            TestFunction::RampComposite { a, ramp } => ramp.eval(a.apply(x.coords())),
        }
    }

    /// dphi_x(v).
    pub fn gradient_action(&self, x: &Event, v: &[f64]) -> f64 {
        match self {
            TestFunction::Linear { a } => a.apply(v),
            TestFunction::RampComposite { a, ramp } => {
                ramp.derivative(a.apply(x.coords())) * a.apply(v)
            }
        }
    }

    /// Bound on |d^2/dt^2 phi(x + t v)| given a bound on |a(v)|.
    pub fn second_derivative_bound(&self, a_dot_v_max: f64) -> f64 {
        match self {
            TestFunction::Linear { .. } => 0.0,
            TestFunction::RampComposite { ramp, .. } => {
                ramp.max_second_derivative() * a_dot_v_max * a_dot_v_max
            }
        }
    }

    pub fn covector(&self) -> &CausalCovector {
        match self {
            TestFunction::Linear { a } => a,
            TestFunction::RampComposite { a, .. } => a,
        }
    }

    pub fn label(&self) -> String {
        let comps: Vec<String> =
            self.covector().components.iter().map(|c| format!("{c:.3}")).collect();
        match self {
            TestFunction::Linear { .. } => format!("linear[{}]", comps.join(",")),
            TestFunction::RampComposite { .. } => format!("ramp[{}]", comps.join(",")),
        }
    }
}

/// Displacement interpolation of a causal coupling: one straight curve per
/// positive plan entry, sampled on `grid`; the path is the family of curve
/// marginals. For a p-optimal plan the path is a constant-speed geodesic.
pub fn geodesic_path(
    mink: &Minkowski,
    plan: &CausalPlan<Event>,
    grid: &[f64],
) -> Result<(MeasurePath<Event>, LiftedPlan<Event>)> {
    measures::validate_grid(grid)?;
    let mut curves = Vec::new();
    let mut total = 0.0;
    for (i, j, w) in plan.support() {
        if w <= PLAN_SUPPORT_EPS {
            continue;
        }
        let x = plan.source().location(i);
        let y = plan.target().location(j);
        let points: Result<Vec<Event>> =
            grid.iter().map(|&t| mink.geodesic_point(x, y, t)).collect();
        curves.push(LiftedCurve { points: points?, weight: w });
        total += w;
    }
    if curves.is_empty() {
        return Err(Error::InvalidPlan("plan carries no mass".into()));
    }
    for c in curves.iter_mut() {
        c.weight /= total;
    }
    let lifted = LiftedPlan::new(mink, grid.to_vec(), curves)?;
    let path = lifted.to_measure_path()?;
    Ok((path, lifted))
}

/// Mass-weighted barycentric velocity field of a lifted plan.
///
/// Per grid interval each curve's velocity is the forward difference
/// `(gamma_{k+1} - gamma_k) / dt` (jump intervals still yield a causal
/// difference vector); the final grid time reuses the last interval. At
/// each location carrying mass, the field value is the mass-weighted
/// average of the velocities of all curves currently there; coincidences
/// are counted as collisions (the source of Jensen slack in the action).
pub fn barycentric_velocity(mink: &Minkowski, lifted: &LiftedPlan<Event>) -> Result<VelocitySeries> {
    let times = lifted.times();
    let steps = times.len();
    let mut fields: Vec<Vec<CausalVector>> = Vec::with_capacity(steps);
    let mut collisions = 0usize;
    for k in 0..steps {
        let diff_k = if k + 1 < steps { k } else { steps - 2 };
        let dt = times[diff_k + 1] - times[diff_k];
        let mut locations: Vec<Event> = Vec::new();
        let mut sums: Vec<Vec<f64>> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        for curve in lifted.curves() {
            let here = &curve.points[k];
            let from = &curve.points[diff_k];
            let to = &curve.points[diff_k + 1];
            let vel: Vec<f64> = from
                .coords()
                .iter()
                .zip(to.coords())
                .map(|(a, b)| (b - a) / dt)
                .collect();
            match locations.iter().position(|l| l == here) {
                Some(idx) => {
                    collisions += 1;
                    for (s, v) in sums[idx].iter_mut().zip(&vel) {
                        *s += curve.weight * v;
                    }
                    mass[idx] += curve.weight;
                }
                None => {
                    locations.push(here.clone());
                    sums.push(vel.iter().map(|v| curve.weight * v).collect());
                    mass.push(curve.weight);
                }
            }
        }
        let mut field = Vec::with_capacity(locations.len());
        for ((loc, sum), m) in locations.into_iter().zip(sums).zip(mass) {
            let comps: Vec<f64> = sum.into_iter().map(|s| s / m).collect();
            field.push(CausalVector::new(loc, comps)?);
        }
        fields.push(field);
    }
    let mut series = VelocitySeries::new(mink, times.to_vec(), fields)?;
    series.collisions = collisions;
    Ok(series)
}

/// Per-test outcome of the causal continuity inequality check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CciTestReport {
    pub label: String,
    pub residuals: Vec<f64>,
    pub tolerances: Vec<f64>,
    /// min over intervals of residual + tolerance; nonnegative iff passed.
    pub min_slack: f64,
    pub max_abs_residual: f64,
    pub monotone: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CciReport {
    pub tests: Vec<CciTestReport>,
    pub passed: bool,
}

/// Checks the discrete causal continuity inequality
/// `Phi(t_{k+1}) - Phi(t_k) >= dt * (I_k + I_{k+1}) / 2` for each test
/// function, where `Phi(t) = ∫ phi dmu_t` and `I(t) = ∫ dphi(v_t) dmu_t`
/// (trapezoidal pairing). The tolerance per interval is
/// `1e-9 + C dt^2` with C from the test's second-derivative bound along
/// curves. Also reports the monotonicity of Phi.
pub fn check_cci(
    mink: &Minkowski,
    path: &MeasurePath<Event>,
    vel: &VelocitySeries,
    tests: &[TestFunction],
) -> Result<CciReport> {
    if path.times() != vel.times() {
        return Err(Error::DomainMismatch("path and velocity grids differ".into()));
    }
    let steps = path.times().len();
    for k in 0..steps {
        for (x, _) in path.measure(k).iter() {
            mink.check_point(x)?;
            if vel.lookup(k, x).is_none() {
                return Err(Error::DomainMismatch(format!(
                    "no velocity at time index {k} for an atom of the path"
                )));
            }
        }
    }
    let mut reports = Vec::with_capacity(tests.len());
    let mut all_passed = true;
    for test in tests {
        let mut phi = Vec::with_capacity(steps);
        let mut integrand = Vec::with_capacity(steps);
        let mut a_dot_v_max = 0.0f64;
        for k in 0..steps {
            let mut phi_k = 0.0;
            let mut i_k = 0.0;
            for (x, w) in path.measure(k).iter() {
                let v = vel.lookup(k, x).expect("checked above");
                phi_k += w * test.eval(x);
                i_k += w * test.gradient_action(x, &v.components);
                a_dot_v_max = a_dot_v_max.max(test.covector().apply(&v.components).abs());
            }
            phi.push(phi_k);
            integrand.push(i_k);
        }
        let c = test.second_derivative_bound(a_dot_v_max) / 8.0;
        let mut residuals = Vec::with_capacity(steps - 1);
        let mut tolerances = Vec::with_capacity(steps - 1);
        let mut min_slack = f64::INFINITY;
        let mut max_abs = 0.0f64;
        let mut monotone = true;
        for k in 0..steps - 1 {
            let dt = path.interval_length(k);
            let residual = (phi[k + 1] - phi[k]) - dt * 0.5 * (integrand[k] + integrand[k + 1]);
            let tol = CCI_BASE_TOL + c * dt * dt;
            min_slack = min_slack.min(residual + tol);
            max_abs = max_abs.max(residual.abs());
            residuals.push(residual);
            tolerances.push(tol);
            if phi[k + 1] < phi[k] - 1e-12 {
                monotone = false;
            }
        }
        let passed = min_slack >= 0.0 && monotone;
        all_passed &= passed;
        reports.push(CciTestReport {
            label: test.label(),
            residuals,
            tolerances,
            min_slack,
            max_abs_residual: max_abs,
            monotone,
            passed,
        });
    }
    Ok(CciReport { tests: reports, passed: all_passed })
}

/// Trapezoidal time integral of `∫ u_p(|v_t|_g) dmu_t`; -inf as soon as one
/// atom with positive mass contributes -inf (p < 0 with a null or zero
/// vector).
pub fn dynamic_action(
    mink: &Minkowski,
    path: &MeasurePath<Event>,
    vel: &VelocitySeries,
    e: Exponent,
) -> Result<f64> {
    let integrand = action_integrand(mink, path, vel, e)?;
    if integrand.iter().any(|a| *a == f64::NEG_INFINITY) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut total = 0.0;
    for k in 0..path.intervals() {
        total += path.interval_length(k) * 0.5 * (integrand[k] + integrand[k + 1]);
    }
    Ok(total)
}

/// `A(t_k) = ∫ u_p(|v_{t_k}|_g) dmu_{t_k}` for each grid time.
pub fn action_integrand(
    mink: &Minkowski,
    path: &MeasurePath<Event>,
    vel: &VelocitySeries,
    e: Exponent,
) -> Result<Vec<f64>> {
    if path.times() != vel.times() {
        return Err(Error::DomainMismatch("path and velocity grids differ".into()));
    }
    let mut out = Vec::with_capacity(path.times().len());
    for k in 0..path.times().len() {
        let mut acc = 0.0;
        let mut bottom = false;
        for (x, w) in path.measure(k).iter() {
            let v = vel
                .lookup(k, x)
                .ok_or_else(|| Error::DomainMismatch(format!("no velocity at time index {k}")))?;
            let u = e.u(mink.vector_norm(v));
            if u == f64::NEG_INFINITY {
                bottom = true;
                break;
            }
            acc += w * u;
        }
        out.push(if bottom { f64::NEG_INFINITY } else { acc });
    }
    Ok(out)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct KuwadaReport {
    #[serde(with = "crate::ext_real")]
    pub path_action: f64,
    #[serde(with = "crate::ext_real")]
    pub dynamic_action: f64,
    /// path_action - dynamic_action; must be >= -1e-8.
    #[serde(with = "crate::ext_real")]
    pub slack: f64,
    #[serde(with = "crate::ext_real::vec")]
    pub per_interval_slack: Vec<f64>,
    pub passed: bool,
}

fn ge_with_tol(lhs: f64, rhs: f64, tol: f64) -> bool {
    if rhs == f64::NEG_INFINITY {
        return true;
    }
    if lhs == f64::NEG_INFINITY {
        return false;
    }
    lhs >= rhs - tol
}

/// The Kuwada direction: for a CCI-solving pair, the path action dominates
/// the dynamic action, globally and per interval. Requires `check_cci` to
/// pass on the supplied test battery first.
pub fn check_kuwada_direction(
    mink: &Minkowski,
    path: &MeasurePath<Event>,
    vel: &VelocitySeries,
    e: Exponent,
    tests: &[TestFunction],
) -> Result<KuwadaReport> {
    let cci = check_cci(mink, path, vel, tests)?;
    if !cci.passed {
        let failing: Vec<&str> = cci
            .tests
            .iter()
            .filter(|t| !t.passed)
            .map(|t| t.label.as_str())
            .collect();
        return Err(Error::CciPrerequisiteFailed(failing.join(", ")));
    }
    let path_act = measures::path_action(mink, path, e)?;
    let dyn_act = dynamic_action(mink, path, vel, e)?;
    let integrand = action_integrand(mink, path, vel, e)?;
    let mut per_interval = Vec::with_capacity(path.intervals());
    let mut passed = ge_with_tol(path_act, dyn_act, KUWADA_TOL);
    for k in 0..path.intervals() {
        let speed_u = e.u(measures::path_speed(mink, path, e, k)?);
        let avg = 0.5 * (integrand[k] + integrand[k + 1]);
        let slack = if speed_u == f64::NEG_INFINITY || avg == f64::NEG_INFINITY {
            if avg == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            speed_u - avg
        };
        if !ge_with_tol(speed_u, avg, KUWADA_TOL) {
            passed = false;
        }
        per_interval.push(slack);
    }
    let slack = if path_act == f64::NEG_INFINITY || dyn_act == f64::NEG_INFINITY {
        if dyn_act == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        path_act - dyn_act
    };
    Ok(KuwadaReport {
        path_action: path_act,
        dynamic_action: dyn_act,
        slack,
        per_interval_slack: per_interval,
        passed,
    })
}

/// The standard battery of causal test functions in R^{1,n}: the time
/// covector, the 2n null covectors (1, ±e_k), and 10 random strictly causal
/// covectors; each also composed with one smooth monotone ramp fitted to the
/// observed range of the linear functional over the path supports.
pub fn standard_test_battery<R: Rng>(
    mink: &Minkowski,
    path: &MeasurePath<Event>,
    rng: &mut R,
) -> Result<Vec<TestFunction>> {
    let n = mink.spatial_dim();
    let base = Event::new(vec![0.0; n + 1])?;
    let mut covectors: Vec<Vec<f64>> = Vec::new();
    let mut time_axis = vec![0.0; n + 1];
    time_axis[0] = 1.0;
    covectors.push(time_axis);
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; n + 1];
            c[0] = 1.0;
            c[k + 1] = sign;
            covectors.push(c);
        }
    }
    for _ in 0..10 {
        let spatial: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = spatial.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut c = vec![norm + rng.gen_range(0.1..1.0)];
        c.extend(spatial);
        covectors.push(c);
    }
    let mut tests = Vec::with_capacity(2 * covectors.len());
    for comps in covectors {
        let a = CausalCovector::new(base.clone(), comps)?;
        // fit the ramp to the range of a(x) over the path supports
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for mu in path.measures() {
            for (x, _) in mu.iter() {
                let u = a.apply(x.coords());
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        let pad = 1.0 + 0.5 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        let slopes = [0.5, 0.8, 1.2, 1.7];
        let step = (hi - lo) / slopes.len() as f64;
        let mut knots = vec![(lo, 0.0)];
        let mut y = 0.0;
        for (i, s) in slopes.iter().enumerate() {
            y += s * step;
            knots.push((lo + (i + 1) as f64 * step, y));
        }
        let ramp = Ramp::monotone_cubic(&knots)?;
        tests.push(TestFunction::linear(a.clone())?);
        tests.push(TestFunction::ramp_composite(a, ramp)?);
    }
    Ok(tests)
}

/// Summary line of one test function inside a BB report.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CciTestSummary {
    pub label: String,
    pub max_abs_residual: f64,
    pub min_slack: f64,
    pub monotone: bool,
    pub passed: bool,
    pub residuals: Vec<f64>,
}

/// End-to-end record of one Benamou-Brenier verification.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BBReport {
    #[serde(with = "crate::ext_real")]
    pub static_value: f64,
    #[serde(with = "crate::ext_real")]
    pub dynamic_action: f64,
    /// static_value - dynamic_action (0 for the degenerate infeasible case).
    #[serde(with = "crate::ext_real")]
    pub gap: f64,
    #[serde(with = "crate::ext_real")]
    pub ell_p: f64,
    #[serde(with = "crate::ext_real")]
    pub curvewise_action: f64,
    pub merge_count: usize,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible_cut: Option<Vec<usize>>,
    pub grid: Vec<f64>,
    /// Per-interval discrete speeds ell_p(mu_k, mu_{k+1}) / dt.
    #[serde(with = "crate::ext_real::vec")]
    pub speeds: Vec<f64>,
    /// Per-time action integrand A(t_k).
    #[serde(with = "crate::ext_real::vec")]
    pub integrand: Vec<f64>,
    pub cci: Vec<CciTestSummary>,
    pub passed: bool,
}

/// Solves the static problem, builds the geodesic interpolation and its
/// barycentric field, and checks the Benamou-Brenier equality:
/// `|static - dynamic| <= 1e-8` when no atom merges occur, and the Jensen
/// direction `dynamic >= static - 1e-8` when they do. If the pair is not
/// causally ordered, both sides are -inf and the report is degenerate.
pub fn verify_benamou_brenier(
    mink: &Minkowski,
    mu0: &DiscreteMeasure<Event>,
    mu1: &DiscreteMeasure<Event>,
    e: Exponent,
    grid: &[f64],
    seed: u64,
) -> Result<BBReport> {
    let solve = transport::solve_primal(mink, mu0, mu1, e)?;
    let plan = match &solve.outcome {
        PlanOutcome::Infeasible { cut } => {
            return Ok(BBReport {
                static_value: f64::NEG_INFINITY,
                dynamic_action: f64::NEG_INFINITY,
                gap: 0.0,
                ell_p: solve.ell_p,
                curvewise_action: f64::NEG_INFINITY,
                merge_count: 0,
                feasible: false,
                infeasible_cut: Some(cut.clone()),
                grid: grid.to_vec(),
                speeds: Vec::new(),
                integrand: Vec::new(),
                cci: Vec::new(),
                passed: true,
            });
        }
        PlanOutcome::Optimal(plan) => plan,
    };
    let (path, lifted) = geodesic_path(mink, plan, grid)?;
    let vel = barycentric_velocity(mink, &lifted)?;
    let dyn_act = dynamic_action(mink, &path, &vel, e)?;
    let integrand = action_integrand(mink, &path, &vel, e)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tests = standard_test_battery(mink, &path, &mut rng)?;
    let cci = check_cci(mink, &path, &vel, &tests)?;
    let mut speeds = Vec::with_capacity(path.intervals());
    for k in 0..path.intervals() {
        speeds.push(measures::path_speed(mink, &path, e, k)?);
    }
    let mut curvewise = 0.0;
    'curves: for curve in lifted.curves() {
        for k in 0..path.intervals() {
            let l = mink.time_separation(&curve.points[k], &curve.points[k + 1])?;
            let u = e.u(l / path.interval_length(k));
            if u == f64::NEG_INFINITY {
                curvewise = f64::NEG_INFINITY;
                break 'curves;
            }
            curvewise += curve.weight * path.interval_length(k) * u;
        }
    }
    let gap = if solve.value == f64::NEG_INFINITY && dyn_act == f64::NEG_INFINITY {
        0.0
    } else {
        solve.value - dyn_act
    };
    let merge_count = vel.collisions;
    let equality_ok = if merge_count == 0 {
        gap.abs() <= BB_GAP_TOL
    } else {
        ge_with_tol(dyn_act, solve.value, BB_GAP_TOL)
    };
    let passed = equality_ok && cci.passed;
    Ok(BBReport {
        static_value: solve.value,
        dynamic_action: dyn_act,
        gap,
        ell_p: solve.ell_p,
        curvewise_action: curvewise,
        merge_count,
        feasible: true,
        infeasible_cut: None,
        grid: grid.to_vec(),
        speeds,
        integrand,
        cci: cci
            .tests
            .into_iter()
            .map(|t| CciTestSummary {
                label: t.label,
                max_abs_residual: t.max_abs_residual,
                min_slack: t.min_slack,
                monotone: t.monotone,
                passed: t.passed,
                residuals: t.residuals,
            })
            .collect(),
        passed,
    })
}

/// Membership in the causal emerald J(A, B): some point of A lies below and
/// some point of B lies above.
pub fn emerald_contains(
    mink: &Minkowski,
    below: &[Event],
    above: &[Event],
    z: &Event,
) -> Result<bool> {
    let mut from_below = false;
    for a in below {
        if mink.relation(a, z)?.is_causal() {
            from_below = true;
            break;
        }
    }
    if !from_below {
        return Ok(false);
    }
    for b in above {
        if mink.relation(z, b)?.is_causal() {
            return Ok(true);
        }
    }
    Ok(false)
}

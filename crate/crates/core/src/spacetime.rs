//! Spacetime models: flat Minkowski space R^{1,n} and abstract finite causal
//! spaces given by a time-separation matrix.
//!
//! Signature convention is (+, -, ..., -) with coordinate 0 the time
//! coordinate. Causality classifications use exact comparisons, so the time
//! separation never comes back as a small negative number.

use crate::error::{Error, Result};

/// Bound shared by every point type a spacetime model can use.
pub trait PointLike: Clone + PartialEq + std::fmt::Debug {}
impl<T: Clone + PartialEq + std::fmt::Debug> PointLike for T {}

/// A point of Minkowski space, stored as `[t, x_1, ..., x_n]`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Event {
    coords: Vec<f64>,
}

impl Event {
    /// All coordinates must be finite. `-0.0` is normalised to `+0.0` so that
    /// coordinate equality is also bitwise equality.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        for &c in &coords {
            if !c.is_finite() {
                return Err(Error::NonFiniteCoordinate(c));
            }
        }
        Ok(Self { coords: coords.into_iter().map(|c| c + 0.0).collect() })
    }

    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Convenience constructor used pervasively in tests and fixtures.
pub fn event(coords: &[f64]) -> Event {
    Event::new(coords.to_vec()).expect("finite coordinates")
}

/// A tangent vector with its base point. The type admits arbitrary vectors;
/// causality is a classification, not an invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalVector {
    pub base: Event,
    pub components: Vec<f64>,
}

impl CausalVector {
    pub fn new(base: Event, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: components.len() });
        }
        for &c in &components {
            if !c.is_finite() {
                return Err(Error::NonFiniteCoordinate(c));
            }
        }
        Ok(Self { base, components })
    }

    /// Future-causal means `v_0 >= |v_spatial|`; the zero vector is causal.
    pub fn is_future_causal(&self) -> bool {
        let t = self.components[0];
        t >= 0.0 && t * t >= spatial_sq(&self.components)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            base: self.base.clone(),
            components: self.components.iter().map(|c| c * lambda).collect(),
        }
    }
}

/// A cotangent vector; its action on a vector is the plain component pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalCovector {
    pub base: Event,
    pub components: Vec<f64>,
}

impl CausalCovector {
    pub fn new(base: Event, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: components.len() });
        }
        Ok(Self { base, components })
    }

    pub fn apply(&self, components: &[f64]) -> f64 {
        self.components.iter().zip(components).map(|(a, b)| a * b).sum()
    }

    /// Causal iff the action is nonnegative on every future-causal vector,
    /// i.e. `w_0 >= |w_spatial|` in Minkowski coordinates.
    pub fn is_causal(&self) -> bool {
        let t = self.components[0];
        t >= 0.0 && t * t >= spatial_sq(&self.components)
    }
}

fn spatial_sq(components: &[f64]) -> f64 {
    components[1..].iter().map(|c| c * c).sum()
}

/// Outcome of the causal classification of an ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Timelike: x can reach y with time to spare (ell > 0).
    StrictlyBefore,
    /// Causal but not timelike: null separation or x = y (ell = 0).
    Before,
    /// No future-directed causal curve from x to y.
    Unrelated,
}

impl Relation {
    pub fn is_causal(self) -> bool {
        !matches!(self, Relation::Unrelated)
    }

    pub fn is_timelike(self) -> bool {
        matches!(self, Relation::StrictlyBefore)
    }
}

/// Common interface of the two spacetime models.
///
/// Only Minkowski carries geometry (vectors, geodesics); the finite causal
/// model supports exactly what the order relation and the ell-matrix provide.
pub trait Spacetime {
    type Point: PointLike;

    fn check_point(&self, p: &Self::Point) -> Result<()>;

    /// Causal classification of the ordered pair (x, y).
    fn relation(&self, x: &Self::Point, y: &Self::Point) -> Result<Relation>;

    /// Time separation ell(x, y); `-inf` when the pair is unrelated.
    fn time_separation(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;

    /// Constant-speed geodesic interpolation. Only Minkowski supports it.
    fn geodesic_point(&self, _x: &Self::Point, _y: &Self::Point, _lambda: f64) -> Result<Self::Point> {
        Err(Error::CapabilityMissing("geodesic interpolation"))
    }

    /// A canonical 1-steep time function: `T(y) - T(x) >= ell(x, y)` on
    /// causal pairs.
    fn time_function(&self, p: &Self::Point) -> Result<f64>;

    /// Sup of `|time_function|` over the causal hull of the given points.
    fn hull_time_bound(&self, pts: &[Self::Point]) -> Result<f64>;

    /// Ambient proximity used to form shrinking neighborhoods for the
    /// localized steepness estimator. Euclidean distance in Minkowski; in the
    /// finite model, the time separation when comparable and `+inf` otherwise.
    fn local_distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;
}

/// Flat Minkowski spacetime R^{1,n} with n spatial dimensions.
#[derive(Clone, Debug)]
pub struct Minkowski {
    spatial_dim: usize,
}

/// Axis-aligned causal diamond J(lo, hi); the compact arena for computations.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalDiamond {
    pub lo: Event,
    pub hi: Event,
}

impl Minkowski {
    pub fn new(spatial_dim: usize) -> Self {
        Self { spatial_dim }
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    /// Number of coordinates of an event (n + 1).
    pub fn event_dim(&self) -> usize {
        self.spatial_dim + 1
    }

    fn delta(&self, x: &Event, y: &Event) -> Result<(f64, f64)> {
        self.check_point(x)?;
        self.check_point(y)?;
        let dt = y.time() - x.time();
        let ds: f64 = x
            .spatial()
            .iter()
            .zip(y.spatial())
            .map(|(a, b)| (b - a) * (b - a))
            .sum();
        Ok((dt, dt * dt - ds))
    }

    /// Hyperbolic norm of a vector: `sqrt(v_0^2 - |v|^2)` if future-causal,
    /// `-inf` otherwise (including past-causal vectors).
    pub fn vector_norm(&self, v: &CausalVector) -> f64 {
        let t = v.components[0];
        let q = t * t - spatial_sq(&v.components);
        if t >= 0.0 && q >= 0.0 {
            q.sqrt()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Dual hyperbolic norm `inf { w(v) : |v|_g >= 1 }` of a causal covector,
    /// in closed form. Errors with `NonCausalCovector` otherwise.
    pub fn covector_norm(&self, w: &CausalCovector) -> Result<f64> {
        let t = w.components[0];
        let q = t * t - spatial_sq(&w.components);
        if t >= 0.0 && q >= 0.0 {
            Ok(q.sqrt())
        } else {
            Err(Error::NonCausalCovector)
        }
    }

    /// Smallest axis-aligned diamond containing `points` with a strict time
    /// margin `delta > 0`, so every input point is in the interior.
    pub fn bounding_emerald(&self, points: &[Event], margin: f64) -> Result<CausalDiamond> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("bounding emerald of an empty set".into()));
        }
        if !(margin > 0.0) {
            return Err(Error::InvalidArgument("emerald margin must be positive".into()));
        }
        for p in points {
            self.check_point(p)?;
        }
        let n = self.spatial_dim;
        let mut center = vec![0.0; n];
        for p in points {
            for (c, v) in center.iter_mut().zip(p.spatial()) {
                *c += v;
            }
        }
        for c in center.iter_mut() {
            *c /= points.len() as f64;
        }
        let dist = |p: &Event| -> f64 {
            p.spatial()
                .iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let mut lo_t = f64::INFINITY;
        let mut hi_t = f64::NEG_INFINITY;
        for p in points {
            lo_t = lo_t.min(p.time() - dist(p));
            hi_t = hi_t.max(p.time() + dist(p));
        }
        let mut lo = vec![lo_t - margin];
        lo.extend_from_slice(&center);
        let mut hi = vec![hi_t + margin];
        hi.extend_from_slice(&center);
        Ok(CausalDiamond { lo: Event::new(lo)?, hi: Event::new(hi)? })
    }

    pub fn diamond_contains(&self, d: &CausalDiamond, p: &Event) -> Result<bool> {
        Ok(self.relation(&d.lo, p)?.is_causal() && self.relation(p, &d.hi)?.is_causal())
    }

    /// A constant C with Euclidean length(gamma) <= C for every causal curve
    /// inside the diamond: `sqrt(2) * (hi.t - lo.t)`, since `|dx| <= dt`
    /// pointwise along causal curves.
    pub fn euclidean_length_bound(&self, d: &CausalDiamond) -> f64 {
        std::f64::consts::SQRT_2 * (d.hi.time() - d.lo.time())
    }
}

impl Spacetime for Minkowski {
    type Point = Event;

    fn check_point(&self, p: &Event) -> Result<()> {
        if p.dim() != self.event_dim() {
            return Err(Error::DimensionMismatch { expected: self.event_dim(), got: p.dim() });
        }
        Ok(())
    }

    fn relation(&self, x: &Event, y: &Event) -> Result<Relation> {
        let (dt, q) = self.delta(x, y)?;
        Ok(if dt > 0.0 && q > 0.0 {
            Relation::StrictlyBefore
        } else if dt >= 0.0 && q >= 0.0 {
            Relation::Before
        } else {
            Relation::Unrelated
        })
    }

    fn time_separation(&self, x: &Event, y: &Event) -> Result<f64> {
        let (dt, q) = self.delta(x, y)?;
        Ok(if dt >= 0.0 && q >= 0.0 { q.sqrt() } else { f64::NEG_INFINITY })
    }

    fn geodesic_point(&self, x: &Event, y: &Event, lambda: f64) -> Result<Event> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("lambda {lambda} outside [0, 1]")));
        }
        if !self.relation(x, y)?.is_causal() {
            return Err(Error::NotCausallyRelated);
        }
        Event::new(
            x.coords()
                .iter()
                .zip(y.coords())
                .map(|(a, b)| a + lambda * (b - a))
                .collect(),
        )
    }

    fn time_function(&self, p: &Event) -> Result<f64> {
        self.check_point(p)?;
        Ok(p.time())
    }

    fn hull_time_bound(&self, pts: &[Event]) -> Result<f64> {
        // Tight causal hull of the points: time coordinates on J(A, A) range
        // over [lo_t, hi_t] of the margin-free diamond construction.
        if pts.is_empty() {
            return Err(Error::InvalidArgument("hull of an empty set".into()));
        }
        for p in pts {
            self.check_point(p)?;
        }
        let n = self.spatial_dim;
        let mut center = vec![0.0; n];
        for p in pts {
            for (c, v) in center.iter_mut().zip(p.spatial()) {
                *c += v;
            }
        }
        for c in center.iter_mut() {
            *c /= pts.len() as f64;
        }
        let mut lo_t = f64::INFINITY;
        let mut hi_t = f64::NEG_INFINITY;
        for p in pts {
            let dist: f64 = p
                .spatial()
                .iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            lo_t = lo_t.min(p.time() - dist);
            hi_t = hi_t.max(p.time() + dist);
        }
        Ok(lo_t.abs().max(hi_t.abs()))
    }

    fn local_distance(&self, x: &Event, y: &Event) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(x.coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Abstract finite causal space: points are indices into a label list, and
/// the geometry is a time-separation matrix over `R ∪ {-inf}`.
#[derive(Clone, Debug)]
pub struct FiniteCausal {
    labels: Vec<String>,
    ell: Vec<Vec<f64>>,
    /// Longest-path potential; a canonical 1-steep time function.
    tvals: Vec<f64>,
}

const ELL_MATRIX_TOL: f64 = 1e-12;

impl FiniteCausal {
    /// Validates that the matrix encodes a partial order with the reverse
    /// triangle inequality:
    /// diagonal zero, entries `-inf` or `>= 0`, antisymmetry off the
    /// diagonal, and `ell(i,k) >= ell(i,j) + ell(j,k)` whenever the two
    /// right-hand entries are `>= 0`.
    pub fn new(labels: Vec<String>, ell: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if ell.len() != n || ell.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!(
                "ell matrix must be {n}x{n} to match {n} labels"
            )));
        }
        let mut ell = ell;
        for i in 0..n {
            for j in 0..n {
                let v = ell[i][j];
                if v.is_nan() || v == f64::INFINITY {
                    return Err(Error::InvalidModel(format!("ell[{i}][{j}] must be -inf or finite >= 0")));
                }
                if i == j {
                    if v.abs() > ELL_MATRIX_TOL {
                        return Err(Error::InvalidModel(format!("ell[{i}][{i}] = {v}, must be 0")));
                    }
                    ell[i][j] = 0.0;
                } else if v.is_finite() && v < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "ell[{i}][{j}] = {v}: finite entries must be >= 0"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && ell[i][j] >= 0.0 && ell[j][i] >= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "antisymmetry violated: ell[{i}][{j}] and ell[{j}][{i}] both >= 0"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if ell[i][j] < 0.0 {
                    continue;
                }
                for k in 0..n {
                    if ell[j][k] < 0.0 {
                        continue;
                    }
                    if !(ell[i][k] >= ell[i][j] + ell[j][k] - ELL_MATRIX_TOL) {
                        return Err(Error::InvalidModel(format!(
                            "reverse triangle inequality violated at ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        let tvals = longest_path_potential(&ell);
        Ok(Self { labels, ell, tvals })
    }

    /// Indices 0..n with default labels "0", "1", ...
    pub fn from_matrix(ell: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..ell.len()).map(|i| i.to_string()).collect();
        Self::new(labels, ell)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ell_matrix(&self) -> &[Vec<f64>] {
        &self.ell
    }
}

/// T(j) = max over causal predecessors i of T(i) + ell(i, j), zero at minimal
/// points. Satisfies T(j) - T(i) >= ell(i, j) on causal pairs.
fn longest_path_potential(ell: &[Vec<f64>]) -> Vec<f64> {
    let n = ell.len();
    // Kahn topological order over the strict part of the order.
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && ell[i][j] >= 0.0 {
                indegree[j] += 1;
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = queue.pop() {
        order.push(j);
        for k in 0..n {
            if k != j && ell[j][k] >= 0.0 {
                indegree[k] -= 1;
                if indegree[k] == 0 {
                    queue.push(k);
                }
            }
        }
    }
    let mut t = vec![0.0f64; n];
    for &j in &order {
        for k in 0..n {
            if k != j && ell[j][k] >= 0.0 {
                t[k] = t[k].max(t[j] + ell[j][k]);
            }
        }
    }
    t
}

impl Spacetime for FiniteCausal {
    type Point = usize;

    fn check_point(&self, p: &usize) -> Result<()> {
        if *p >= self.len() {
            return Err(Error::UnknownLabel { index: *p, size: self.len() });
        }
        Ok(())
    }

    fn relation(&self, x: &usize, y: &usize) -> Result<Relation> {
        self.check_point(x)?;
        self.check_point(y)?;
        let v = self.ell[*x][*y];
        Ok(if v > 0.0 {
            Relation::StrictlyBefore
        } else if v == 0.0 {
            Relation::Before
        } else {
            Relation::Unrelated
        })
    }

    fn time_separation(&self, x: &usize, y: &usize) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.ell[*x][*y])
    }

    fn time_function(&self, p: &usize) -> Result<f64> {
        self.check_point(p)?;
        Ok(self.tvals[*p])
    }

    fn hull_time_bound(&self, pts: &[usize]) -> Result<f64> {
        if pts.is_empty() {
            return Err(Error::InvalidArgument("hull of an empty set".into()));
        }
        for p in pts {
            self.check_point(p)?;
        }
        let mut bound = 0.0f64;
        for z in 0..self.len() {
            let below = pts.iter().any(|&a| self.ell[a][z] >= 0.0);
            let above = pts.iter().any(|&b| self.ell[z][b] >= 0.0);
            if below && above {
                bound = bound.max(self.tvals[z].abs());
            }
        }
        Ok(bound)
    }

    fn local_distance(&self, x: &usize, y: &usize) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Ok(0.0);
        }
        let fwd = self.ell[*x][*y];
        let bwd = self.ell[*y][*x];
        if fwd >= 0.0 {
            Ok(fwd)
        } else if bwd >= 0.0 {
            Ok(bwd)
        } else {
            Ok(f64::INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT3: f64 = 1.732050807568877;

    fn r11() -> Minkowski {
        Minkowski::new(1)
    }

    #[test]
    fn relation_examples() {
        let m = r11();
        assert_eq!(m.relation(&event(&[0.0, 0.0]), &event(&[2.0, 1.0])).unwrap(), Relation::StrictlyBefore);
        assert_eq!(m.relation(&event(&[0.0, 0.0]), &event(&[1.0, 2.0])).unwrap(), Relation::Unrelated);
        assert_eq!(m.relation(&event(&[0.0, 0.0]), &event(&[0.0, 0.0])).unwrap(), Relation::Before);
        // null pair is Before but not StrictlyBefore
        assert_eq!(m.relation(&event(&[0.0, 0.0]), &event(&[1.0, 1.0])).unwrap(), Relation::Before);
        // past-directed pair is unrelated in this order
        assert_eq!(m.relation(&event(&[2.0, 1.0]), &event(&[0.0, 0.0])).unwrap(), Relation::Unrelated);
    }

    #[test]
    fn relation_dimension_mismatch() {
        let m = r11();
        assert!(matches!(
            m.relation(&event(&[0.0, 0.0, 0.0]), &event(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn time_separation_examples() {
        let m = r11();
        let l = m.time_separation(&event(&[0.0, 0.0]), &event(&[2.0, 1.0])).unwrap();
        assert!((l - SQRT3).abs() < 1e-12);
        assert_eq!(m.time_separation(&event(&[0.0, 0.0]), &event(&[1.0, 2.0])).unwrap(), f64::NEG_INFINITY);
        assert_eq!(m.time_separation(&event(&[0.5, -0.5]), &event(&[0.5, -0.5])).unwrap(), 0.0);
    }

    #[test]
    fn vector_norm_examples() {
        let m = r11();
        let base = event(&[0.0, 0.0]);
        let v = CausalVector::new(base.clone(), vec![3.0, 1.0]).unwrap();
        assert!((m.vector_norm(&v) - 8.0f64.sqrt()).abs() < 1e-12);
        let zero = CausalVector::new(base.clone(), vec![0.0, 0.0]).unwrap();
        assert_eq!(m.vector_norm(&zero), 0.0);
        assert!(zero.is_future_causal());
        let spacelike = CausalVector::new(base.clone(), vec![1.0, 2.0]).unwrap();
        assert_eq!(m.vector_norm(&spacelike), f64::NEG_INFINITY);
        // past-causal vectors also get -inf
        let past = CausalVector::new(base, vec![-3.0, 1.0]).unwrap();
        assert_eq!(m.vector_norm(&past), f64::NEG_INFINITY);
    }

    #[test]
    fn covector_norm_examples() {
        let m = r11();
        let base = event(&[0.0, 0.0]);
        let w = CausalCovector::new(base.clone(), vec![2.0, 1.0]).unwrap();
        assert!((m.covector_norm(&w).unwrap() - SQRT3).abs() < 1e-12);
        let time = CausalCovector::new(base.clone(), vec![1.0, 0.0]).unwrap();
        assert_eq!(m.covector_norm(&time).unwrap(), 1.0);
        let null = CausalCovector::new(base.clone(), vec![1.0, 1.0]).unwrap();
        assert_eq!(m.covector_norm(&null).unwrap(), 0.0);
        let bad = CausalCovector::new(base, vec![1.0, 2.0]).unwrap();
        assert!(matches!(m.covector_norm(&bad), Err(Error::NonCausalCovector)));
    }

    /// Grid/ternary-search oracle for the dual norm: minimize w(v) over the
    /// unit hyperboloid v = (cosh r, sinh r * u) with u the worst direction.
    pub(crate) fn dual_norm_oracle(w: &CausalCovector) -> f64 {
        let w0 = w.components[0];
        let ws: f64 = spatial_sq(&w.components).sqrt();
        let f = |r: f64| w0 * r.cosh() - ws * r.sinh();
        let (mut a, mut b) = (0.0f64, 40.0f64);
        for _ in 0..300 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if f(m1) <= f(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        f(0.5 * (a + b))
    }

    #[test]
    fn dual_norm_matches_hyperboloid_oracle() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for dim in [1usize, 3] {
            let m = Minkowski::new(dim);
            for _ in 0..200 {
                let spatial: Vec<f64> = (0..dim).map(|_| 2.0 * next() - 1.0).collect();
                let s: f64 = spatial.iter().map(|c| c * c).sum::<f64>().sqrt();
                let w0 = s + 0.05 + 2.0 * next();
                let mut comps = vec![w0];
                comps.extend(spatial);
                let base = Event::new(vec![0.0; dim + 1]).unwrap();
                let w = CausalCovector::new(base, comps).unwrap();
                let exact = m.covector_norm(&w).unwrap();
                let approx = dual_norm_oracle(&w);
                assert!((exact - approx).abs() < 1e-6, "exact {exact} vs oracle {approx}");
            }
        }
    }

    #[test]
    fn geodesic_examples() {
        let m = r11();
        let x = event(&[0.0, 0.0]);
        let y = event(&[3.0, 1.0]);
        let third = m.geodesic_point(&x, &y, 1.0 / 3.0).unwrap();
        assert!((third.time() - 1.0).abs() < 1e-15);
        assert!((third.spatial()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.geodesic_point(&x, &y, 0.0).unwrap(), x);

        let half = m.geodesic_point(&x, &y, 0.5).unwrap();
        let l_half = m.time_separation(&x, &half).unwrap();
        let l_full = m.time_separation(&x, &y).unwrap();
        assert!((l_half - 0.5 * l_full).abs() < 1e-12);
        assert!((l_half - 2.0f64.sqrt()).abs() < 1e-12);

        let back = m.geodesic_point(&y, &x, 0.5);
        assert!(matches!(back, Err(Error::NotCausallyRelated)));
    }

    #[test]
    fn geodesic_proportionality() {
        let m = r11();
        let x = event(&[0.0, 0.0]);
        let y = event(&[3.0, 1.0]);
        let l = m.time_separation(&x, &y).unwrap();
        for (l1, l2) in [(0.1, 0.7), (0.0, 1.0), (0.25, 0.5)] {
            let a = m.geodesic_point(&x, &y, l1).unwrap();
            let b = m.geodesic_point(&x, &y, l2).unwrap();
            let seg = m.time_separation(&a, &b).unwrap();
            assert!((seg - (l2 - l1) * l).abs() < 1e-12);
        }
    }

    #[test]
    fn bounding_emerald_examples() {
        let m = r11();
        let pts = [event(&[0.0, 0.0]), event(&[2.0, 0.0])];
        let d = m.bounding_emerald(&pts, 1.0).unwrap();
        assert_eq!(d.lo, event(&[-1.0, 0.0]));
        assert_eq!(d.hi, event(&[3.0, 0.0]));
        for p in &pts {
            assert_eq!(m.relation(&d.lo, p).unwrap(), Relation::StrictlyBefore);
            assert_eq!(m.relation(p, &d.hi).unwrap(), Relation::StrictlyBefore);
        }
        assert!(!m.diamond_contains(&d, &event(&[3.1, 0.0])).unwrap());

        let single = m.bounding_emerald(&[event(&[0.0, 0.0])], 0.5).unwrap();
        assert_eq!(m.relation(&single.lo, &event(&[0.0, 0.0])).unwrap(), Relation::StrictlyBefore);
        assert_eq!(m.relation(&event(&[0.0, 0.0]), &single.hi).unwrap(), Relation::StrictlyBefore);
    }

    #[test]
    fn euclidean_length_bound_examples() {
        let m = r11();
        let d = CausalDiamond { lo: event(&[0.0, 0.0]), hi: event(&[4.0, 0.0]) };
        assert!((m.euclidean_length_bound(&d) - 4.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        let degenerate = CausalDiamond { lo: event(&[1.0, 1.0]), hi: event(&[1.0, 1.0]) };
        assert_eq!(m.euclidean_length_bound(&degenerate), 0.0);
    }

    #[test]
    fn hull_time_bound_is_tight_diamond() {
        let m = r11();
        let pts = [
            event(&[0.0, -1.0]),
            event(&[0.0, 1.0]),
            event(&[2.0, -1.0]),
            event(&[2.0, 1.0]),
        ];
        assert!((m.hull_time_bound(&pts).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn finite_causal_construction() {
        let inf = f64::NEG_INFINITY;
        // three-point chain 0 <= 1 <= 2 with additive ell
        let chain = FiniteCausal::from_matrix(vec![
            vec![0.0, 1.0, 2.0],
            vec![inf, 0.0, 1.0],
            vec![inf, inf, 0.0],
        ])
        .unwrap();
        assert_eq!(chain.relation(&0, &2).unwrap(), Relation::StrictlyBefore);
        assert_eq!(chain.relation(&2, &0).unwrap(), Relation::Unrelated);
        assert_eq!(chain.relation(&1, &1).unwrap(), Relation::Before);
        assert_eq!(chain.time_separation(&0, &2).unwrap(), 2.0);
        assert!(matches!(chain.relation(&0, &3), Err(Error::UnknownLabel { .. })));
        assert!(matches!(chain.geodesic_point(&0, &2, 0.5), Err(Error::CapabilityMissing(_))));
        // 1-steep time function
        let t: Vec<f64> = (0..3).map(|i| chain.time_function(&i).unwrap()).collect();
        assert_eq!(t, vec![0.0, 1.0, 2.0]);

        // antisymmetry violation
        assert!(FiniteCausal::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
        // reverse triangle violation: ell(0,2) < ell(0,1) + ell(1,2)
        assert!(FiniteCausal::from_matrix(vec![
            vec![0.0, 1.0, 1.5],
            vec![inf, 0.0, 1.0],
            vec![inf, inf, 0.0],
        ])
        .is_err());
        // nonzero diagonal
        assert!(FiniteCausal::from_matrix(vec![vec![1.0]]).is_err());
        // negative finite entry
        assert!(FiniteCausal::from_matrix(vec![vec![0.0, -1.0], vec![inf, 0.0]]).is_err());
    }

    fn causal_vector_strategy() -> impl Strategy<Value = (f64, f64)> {
        // (dt, dx) with dt >= |dx|
        (0.0f64..3.0, -1.0f64..1.0).prop_map(|(extra, frac)| {
            let dx = frac * extra;
            (extra, dx)
        })
    }

    proptest! {
        #[test]
        fn reverse_triangle_inequality((d1, x1) in causal_vector_strategy(), (d2, x2) in causal_vector_strategy(), t0 in -1.0f64..1.0, s0 in -1.0f64..1.0) {
            let m = r11();
            let x = event(&[t0, s0]);
            let y = event(&[t0 + d1, s0 + x1]);
            let z = event(&[t0 + d1 + d2, s0 + x1 + x2]);
            let lxy = m.time_separation(&x, &y).unwrap();
            let lyz = m.time_separation(&y, &z).unwrap();
            let lxz = m.time_separation(&x, &z).unwrap();
            prop_assert!(lxz >= lxy + lyz - 1e-12);
        }

        #[test]
        fn duality_pairing((vt, vx) in causal_vector_strategy(), (wt, wx) in causal_vector_strategy()) {
            let m = r11();
            let base = event(&[0.0, 0.0]);
            let v = CausalVector::new(base.clone(), vec![vt, vx]).unwrap();
            let w = CausalCovector::new(base, vec![wt, wx]).unwrap();
            let pairing = w.apply(&v.components);
            let bound = m.covector_norm(&w).unwrap() * m.vector_norm(&v);
            // norm of a causal vector is finite >= 0 here
            prop_assert!(pairing >= bound - 1e-12);
        }

        #[test]
        fn causal_characterization(vt in -2.0f64..2.0, vx in -2.0f64..2.0) {
            // v is future-causal iff g(v, w) >= 0 for all future-causal w,
            // sampled on the cone boundary and interior.
            let v = [vt, vx];
            let mut all_nonneg = true;
            for k in 0..64 {
                let s = -1.0 + 2.0 * (k as f64) / 63.0;
                let w = [1.0, s]; // causal: 1 >= |s|
                let g = v[0] * w[0] - v[1] * w[1];
                if g < 0.0 {
                    all_nonneg = false;
                    break;
                }
            }
            let causal = vt >= 0.0 && vt * vt >= vx * vx;
            // grid of w is finite, so allow the boundary to be decided by the exact test
            if causal {
                prop_assert!(all_nonneg);
            }
            if !all_nonneg {
                prop_assert!(!causal);
            }
        }
    }
}

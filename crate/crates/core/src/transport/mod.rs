//! The static problem: u_p arithmetic, causal-coupling feasibility, exact
//! maximization of the causal Kantorovich functional, dual potentials,
//! c_p-transforms and duality verification.

pub(crate) mod maxflow;
mod simplex;

use crate::error::{Error, Result};
use crate::measures::{CausalPlan, DiscreteMeasure};
use crate::spacetime::{PointLike, Spacetime};

/// Feasibility verdict is considered reached when the max-flow saturates the
/// unit mass within this tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Transport exponent `p` with `p < 1`, `p != 0`, and its Holder conjugate
/// `q = p / (p - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    p: f64,
    q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p >= 1.0 || p == 0.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn conjugate(&self) -> Exponent {
        Exponent { p: self.q, q: self.p }
    }

    pub fn is_positive(&self) -> bool {
        self.p > 0.0
    }

    /// The concave utility u_p, total on the extended reals:
    /// `(1/p) z^p` for finite z > 0, with
    /// u_p(z) = -inf for z < 0 (any p); u_p(0) = -inf for p < 0 and 0 for
    /// p in (0,1); u_p(+inf) = 0 for p < 0 and +inf for p in (0,1).
    pub fn u(&self, z: f64) -> f64 {
        if z < 0.0 {
            f64::NEG_INFINITY
        } else if z == 0.0 {
            if self.p > 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else if z == f64::INFINITY {
            if self.p > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            z.powf(self.p) / self.p
        }
    }

    /// u_q with q the conjugate exponent.
    pub fn u_conjugate(&self, z: f64) -> f64 {
        self.conjugate().u(z)
    }

    /// Derivative `u_p'(z) = z^(p-1)` for z > 0.
    pub fn u_prime(&self, z: f64) -> f64 {
        z.powf(self.p - 1.0)
    }

    /// Recovers `ell_p` from the optimal value `u_p(ell_p)`.
    ///
    /// `couplings_exist` distinguishes the two ways the value can be -inf:
    /// with no causal coupling at all, `ell_p = -inf` by definition; with
    /// couplings but value -inf (p < 0 and unavoidable null pairs),
    /// `ell_p = 0` by inverting u_p.
    pub fn ell_from_value(&self, value: f64, couplings_exist: bool) -> f64 {
        if !couplings_exist {
            return f64::NEG_INFINITY;
        }
        if self.p > 0.0 {
            if value == f64::INFINITY {
                f64::INFINITY
            } else {
                (self.p * value).powf(1.0 / self.p)
            }
        } else if value == f64::NEG_INFINITY {
            0.0
        } else if value == 0.0 {
            f64::INFINITY
        } else {
            (self.p * value).powf(1.0 / self.p)
        }
    }
}

/// Dual potentials indexed by source / target atoms.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PotentialPair {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Either an optimal causal plan or the witness that none exists.
#[derive(Clone, Debug)]
pub enum PlanOutcome<P: PointLike> {
    Optimal(CausalPlan<P>),
    /// A violating source subset: its admissible targets carry less mass
    /// than it supplies.
    Infeasible { cut: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct SolveResult<P: PointLike> {
    /// Optimal value of the u_p-cost functional; -inf when infeasible.
    pub value: f64,
    /// Recovered p-Lorentz-Wasserstein distance.
    pub ell_p: f64,
    pub outcome: PlanOutcome<P>,
    pub potentials: Option<PotentialPair>,
}

impl<P: PointLike> SolveResult<P> {
    pub fn plan(&self) -> Option<&CausalPlan<P>> {
        match &self.outcome {
            PlanOutcome::Optimal(p) => Some(p),
            PlanOutcome::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, PlanOutcome::Optimal(_))
    }
}

/// Feasibility of the causal-coupling set, decided by max-flow on the
/// bipartite graph with an edge exactly where `ell(x_i, y_j) >= 0`.
#[derive(Clone, Debug)]
pub enum Feasibility<P: PointLike> {
    Feasible(CausalPlan<P>),
    Infeasible { cut: Vec<usize> },
}

fn causal_adjacency<S: Spacetime>(
    space: &S,
    mu: &DiscreteMeasure<S::Point>,
    nu: &DiscreteMeasure<S::Point>,
    strict: bool,
) -> Result<Vec<Vec<bool>>> {
    let mut adj = vec![vec![false; nu.len()]; mu.len()];
    for (i, (x, _)) in mu.iter().enumerate() {
        for (j, (y, _)) in nu.iter().enumerate() {
            let rel = space.relation(x, y)?;
            adj[i][j] = if strict { rel.is_timelike() } else { rel.is_causal() };
        }
    }
    Ok(adj)
}

pub fn feasible<S: Spacetime>(
    space: &S,
    mu: &DiscreteMeasure<S::Point>,
    nu: &DiscreteMeasure<S::Point>,
) -> Result<Feasibility<S::Point>> {
    let adj = causal_adjacency(space, mu, nu, false)?;
    let out = maxflow::bipartite_max_flow(mu.weights(), nu.weights(), &adj);
    if out.value >= 1.0 - FEASIBILITY_TOL {
        let plan = CausalPlan::new(space, mu.clone(), nu.clone(), out.flow)?;
        Ok(Feasibility::Feasible(plan))
    } else {
        Ok(Feasibility::Infeasible { cut: out.cut_rows })
    }
}

/// Exact maximization of `sum pi_ij u_p(ell(x_i, y_j))` over causal couplings.
///
/// Edges with cost -inf are structurally absent: pairs with `ell < 0` always,
/// and additionally null pairs (`ell = 0`) when p < 0. Infeasibility is a
/// value, not an error; the result then carries -inf and the violating cut.
pub fn solve_primal<S: Spacetime>(
    space: &S,
    mu: &DiscreteMeasure<S::Point>,
    nu: &DiscreteMeasure<S::Point>,
    e: Exponent,
) -> Result<SolveResult<S::Point>> {
    let n = mu.len();
    let m = nu.len();
    let mut cost = vec![vec![f64::NEG_INFINITY; m]; n];
    let mut admissible = vec![vec![false; m]; n];
    for (i, (x, _)) in mu.iter().enumerate() {
        for (j, (y, _)) in nu.iter().enumerate() {
            let c = e.u(space.time_separation(x, y)?);
            cost[i][j] = c;
            admissible[i][j] = c > f64::NEG_INFINITY;
        }
    }
    let mf = maxflow::bipartite_max_flow(mu.weights(), nu.weights(), &admissible);
    if mf.value < 1.0 - FEASIBILITY_TOL {
        if e.is_positive() {
            // admissible graph is the causal graph: no coupling at all
            return Ok(SolveResult {
                value: f64::NEG_INFINITY,
                ell_p: f64::NEG_INFINITY,
                outcome: PlanOutcome::Infeasible { cut: mf.cut_rows },
                potentials: None,
            });
        }
        // p < 0: distinguish "no causal coupling" from "couplings exist but
        // every admissible matching must use a null pair".
        let causal = causal_adjacency(space, mu, nu, false)?;
        let mf_causal = maxflow::bipartite_max_flow(mu.weights(), nu.weights(), &causal);
        return if mf_causal.value < 1.0 - FEASIBILITY_TOL {
            Ok(SolveResult {
                value: f64::NEG_INFINITY,
                ell_p: f64::NEG_INFINITY,
                outcome: PlanOutcome::Infeasible { cut: mf_causal.cut_rows },
                potentials: None,
            })
        } else {
            Ok(SolveResult {
                value: f64::NEG_INFINITY,
                ell_p: 0.0,
                outcome: PlanOutcome::Infeasible { cut: mf.cut_rows },
                potentials: None,
            })
        };
    }
    let sol = simplex::maximize(mu.weights(), nu.weights(), &cost, mf.flow)?;
    let plan = CausalPlan::new(space, mu.clone(), nu.clone(), sol.flow)?;
    Ok(SolveResult {
        value: sol.value,
        ell_p: e.ell_from_value(sol.value, true),
        outcome: PlanOutcome::Optimal(plan),
        potentials: Some(PotentialPair { phi: sol.phi, psi: sol.psi }),
    })
}

/// Forward c_p-transform over the finite point set E:
/// `phi_E(y) = max over x in E with x <= y of phi(x) + u_p(ell(x, y))`.
///
/// Pairs with `ell = -inf` contribute -inf and drop out on their own; the
/// result can be -inf only for p < 0 at points with no strict predecessor.
pub fn cp_transform_fwd<S: Spacetime>(
    space: &S,
    points: &[S::Point],
    phi: &[f64],
    e: Exponent,
) -> Result<Vec<f64>> {
    if phi.len() != points.len() {
        return Err(Error::InvalidArgument("phi must be total on E".into()));
    }
    let mut out = Vec::with_capacity(points.len());
    for y in points {
        let mut best = f64::NEG_INFINITY;
        for (x, &v) in points.iter().zip(phi) {
            let term = v + e.u(space.time_separation(x, y)?);
            if term > best {
                best = term;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Backward c_p-transform: `psi_E(x) = min over y in E of psi(y) - u_p(ell(x, y))`
/// with pairs at `u_p(ell) = -inf` contributing +inf, so only causal
/// successors bind for p in (0,1) and only strict successors for p < 0.
pub fn cp_transform_bwd<S: Spacetime>(
    space: &S,
    points: &[S::Point],
    psi: &[f64],
    e: Exponent,
) -> Result<Vec<f64>> {
    if psi.len() != points.len() {
        return Err(Error::InvalidArgument("psi must be total on E".into()));
    }
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let mut best = f64::INFINITY;
        for (y, &v) in points.iter().zip(psi) {
            let u = e.u(space.time_separation(x, y)?);
            let term = if u == f64::NEG_INFINITY { f64::INFINITY } else { v - u };
            if term < best {
                best = term;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Discrete steepness constant of f on E: the minimum of
/// `(f(y) - f(x)) / ell(x, y)` over timelike pairs, +inf when E has none.
/// A negative result means f is not even causal on timelike pairs.
pub fn steepness<S: Spacetime>(space: &S, points: &[S::Point], f: &[f64]) -> Result<f64> {
    if f.len() != points.len() {
        return Err(Error::InvalidArgument("f must be total on E".into()));
    }
    let mut best = f64::INFINITY;
    for (x, &fx) in points.iter().zip(f) {
        for (y, &fy) in points.iter().zip(f) {
            let l = space.time_separation(x, y)?;
            if l > 0.0 {
                best = best.min((fy - fx) / l);
            }
        }
    }
    Ok(best)
}

/// One steepening trial: replacing phi by phi + eps * t changed the dual
/// value by `shift`, which the theory bounds by `2 eps ||t||` on the emerald.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct SteepeningCheck {
    pub eps: f64,
    pub shift: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct DualityReport {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub max_feasibility_violation: f64,
    pub max_slackness_violation: f64,
    pub steepening: Vec<SteepeningCheck>,
}

pub const DUALITY_TOL: f64 = 1e-9;

/// Verifies the optimality certificate of a solve:
/// (a) potential feasibility and complementary slackness,
/// (b) dual value equals primal value,
/// (c) the steepening trick: adding eps times the canonical 1-steep time
/// function to phi moves the re-transformed dual value by at most
/// `2 eps sup|t|` over the bounding emerald, and never below the optimum.
pub fn verify_duality<S: Spacetime>(
    space: &S,
    mu: &DiscreteMeasure<S::Point>,
    nu: &DiscreteMeasure<S::Point>,
    e: Exponent,
    result: &SolveResult<S::Point>,
) -> Result<DualityReport> {
    if result.value == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(
            "duality verification requires a feasible solve".into(),
        ));
    }
    let plan = result
        .plan()
        .ok_or_else(|| Error::InvalidArgument("solve result carries no plan".into()))?;
    let pots = result
        .potentials
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("solve result carries no potentials".into()))?;

    let n = mu.len();
    let m = nu.len();
    let mut cost = vec![vec![f64::NEG_INFINITY; m]; n];
    for (i, (x, _)) in mu.iter().enumerate() {
        for (j, (y, _)) in nu.iter().enumerate() {
            cost[i][j] = e.u(space.time_separation(x, y)?);
        }
    }

    let mut max_feas = 0.0f64;
    let mut max_slack = 0.0f64;
    for i in 0..n {
        for j in 0..m {
            if cost[i][j] > f64::NEG_INFINITY {
                max_feas = max_feas.max(cost[i][j] - (pots.psi[j] - pots.phi[i]));
            }
            if plan.matrix()[i][j] > 1e-12 {
                max_slack = max_slack.max((pots.psi[j] - pots.phi[i] - cost[i][j]).abs());
            }
        }
    }

    let dual: f64 = nu
        .weights()
        .iter()
        .zip(&pots.psi)
        .map(|(w, v)| w * v)
        .sum::<f64>()
        - mu.weights().iter().zip(&pots.phi).map(|(w, v)| w * v).sum::<f64>();
    let gap = dual - result.value;

    // Steepening: dual value from the bipartite-restricted transform of
    // phi + eps * t, against the closed-form bound of the duality proof.
    let t_src: Vec<f64> = mu
        .iter()
        .map(|(x, _)| space.time_function(x))
        .collect::<Result<_>>()?;
    let mut hull_pts: Vec<S::Point> = mu.iter().map(|(x, _)| x.clone()).collect();
    hull_pts.extend(nu.iter().map(|(y, _)| y.clone()));
    let t_bound = space.hull_time_bound(&hull_pts)?;

    let dual_of = |phi: &[f64]| -> f64 {
        let mut total = 0.0;
        for (j, (_, wj)) in nu.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for (i, &p) in phi.iter().enumerate() {
                let term = p + cost[i][j];
                if term > best {
                    best = term;
                }
            }
            total += wj * best;
        }
        total - mu.weights().iter().zip(phi).map(|(w, v)| w * v).sum::<f64>()
    };
    let d0 = dual_of(&pots.phi);
    let mut steepening = Vec::new();
    let mut steepening_ok = true;
    for eps in [1e-1, 1e-2, 1e-3] {
        let phi_eps: Vec<f64> = pots.phi.iter().zip(&t_src).map(|(p, t)| p + eps * t).collect();
        let shift = dual_of(&phi_eps) - d0;
        let bound = 2.0 * eps * t_bound;
        if !(shift >= -DUALITY_TOL && shift <= bound + DUALITY_TOL) {
            steepening_ok = false;
        }
        steepening.push(SteepeningCheck { eps, shift, bound });
    }

    let report = DualityReport {
        primal: result.value,
        dual,
        gap,
        max_feasibility_violation: max_feas,
        max_slackness_violation: max_slack,
        steepening,
    };

    let rel = DUALITY_TOL * result.value.abs().max(1.0);
    if max_feas > DUALITY_TOL {
        return Err(Error::DualityGap(format!(
            "potential feasibility violated by {max_feas:.3e}"
        )));
    }
    if max_slack > DUALITY_TOL {
        return Err(Error::DualityGap(format!(
            "complementary slackness violated by {max_slack:.3e}"
        )));
    }
    if gap.abs() > rel {
        return Err(Error::DualityGap(format!("duality gap {gap:.3e}")));
    }
    if (d0 - result.value).abs() > rel {
        return Err(Error::DualityGap(format!(
            "transform-based dual value off by {:.3e}",
            d0 - result.value
        )));
    }
    if !steepening_ok {
        return Err(Error::DualityGap(format!(
            "steepening shift outside [0, 2 eps sup|t|]: {:?}",
            report.steepening
        )));
    }
    Ok(report)
}

/// CLI-facing solve report; -inf serializes as the string "-inf".
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct SolveReport {
    #[serde(with = "crate::ext_real")]
    pub value: f64,
    #[serde(with = "crate::ext_real")]
    pub ell_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<f64>>,
    #[serde(with = "crate::ext_real")]
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible_cut: Option<Vec<usize>>,
}

impl SolveReport {
    pub fn from_result<P: PointLike>(result: &SolveResult<P>, gap: f64) -> Self {
        match &result.outcome {
            PlanOutcome::Optimal(plan) => SolveReport {
                value: result.value,
                ell_p: result.ell_p,
                plan: Some(plan.matrix().to_vec()),
                phi: result.potentials.as_ref().map(|p| p.phi.clone()),
                psi: result.potentials.as_ref().map(|p| p.psi.clone()),
                gap,
                infeasible_cut: None,
            },
            PlanOutcome::Infeasible { cut } => SolveReport {
                value: result.value,
                ell_p: result.ell_p,
                plan: None,
                phi: None,
                psi: None,
                gap: 0.0,
                infeasible_cut: Some(cut.clone()),
            },
        }
    }
}

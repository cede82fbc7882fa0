//! Shared generators and independent oracles for the acceptance suite.

use causal_ot::measures::DiscreteMeasure;
use causal_ot::spacetime::{event, Event, Minkowski, Spacetime};
use causal_ot::transport::Exponent;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

pub fn random_event<R: Rng>(rng: &mut R, dim: usize, t_lo: f64, t_hi: f64, spread: f64) -> Event {
    let mut coords = vec![rng.gen_range(t_lo..t_hi)];
    for _ in 0..dim {
        coords.push(rng.gen_range(-spread..spread));
    }
    event(&coords)
}

/// Feasible instance by construction: targets are strictly timelike offsets
/// of the sources (identity matching exists), with generic cross edges.
pub fn matched_instance<R: Rng>(
    rng: &mut R,
    dim: usize,
    k: usize,
    scatter: f64,
) -> (DiscreteMeasure<Event>, DiscreteMeasure<Event>) {
    let sources: Vec<Event> = (0..k).map(|_| random_event(rng, dim, 0.0, 0.5, scatter)).collect();
    let targets: Vec<Event> = sources
        .iter()
        .map(|s| {
            let dt = rng.gen_range(1.5..3.0);
            let mut coords = vec![s.time() + dt];
            for c in s.spatial() {
                let max_step = 0.55 * dt / (dim as f64).sqrt();
                coords.push(c + rng.gen_range(-max_step..max_step));
            }
            event(&coords)
        })
        .collect();
    let mu = DiscreteMeasure::new(sources.into_iter().zip(random_weights(rng, k)).collect()).unwrap();
    let nu = DiscreteMeasure::new(targets.into_iter().zip(random_weights(rng, k)).collect()).unwrap();
    (mu, nu)
}

/// Feasible instance with n != m: two well-separated layers, every pair
/// strictly timelike.
pub fn layered_instance<R: Rng>(
    rng: &mut R,
    dim: usize,
    n: usize,
    m: usize,
) -> (DiscreteMeasure<Event>, DiscreteMeasure<Event>) {
    let sources: Vec<Event> = (0..n).map(|_| random_event(rng, dim, 0.0, 0.3, 0.5)).collect();
    let targets: Vec<Event> = (0..m).map(|_| random_event(rng, dim, 2.0, 3.0, 0.5)).collect();
    let mu = DiscreteMeasure::new(sources.into_iter().zip(random_weights(rng, n)).collect()).unwrap();
    let nu = DiscreteMeasure::new(targets.into_iter().zip(random_weights(rng, m)).collect()).unwrap();
    (mu, nu)
}

/// Unconstrained scatter; may or may not be feasible.
pub fn scattered_instance<R: Rng>(
    rng: &mut R,
    dim: usize,
    n: usize,
    m: usize,
) -> (DiscreteMeasure<Event>, DiscreteMeasure<Event>) {
    let sources: Vec<Event> = (0..n).map(|_| random_event(rng, dim, 0.0, 1.0, 1.0)).collect();
    let targets: Vec<Event> = (0..m).map(|_| random_event(rng, dim, 0.3, 1.8, 1.0)).collect();
    let mu = DiscreteMeasure::new(sources.into_iter().zip(random_weights(rng, n)).collect()).unwrap();
    let nu = DiscreteMeasure::new(targets.into_iter().zip(random_weights(rng, m)).collect()).unwrap();
    (mu, nu)
}

pub fn cost_matrix(
    m: &Minkowski,
    mu: &DiscreteMeasure<Event>,
    nu: &DiscreteMeasure<Event>,
    e: Exponent,
) -> Vec<Vec<f64>> {
    mu.iter()
        .map(|(x, _)| {
            nu.iter()
                .map(|(y, _)| e.u(m.time_separation(x, y).unwrap()))
                .collect()
        })
        .collect()
}

/// Exhaustive vertex enumeration of the transportation polytope restricted
/// to admissible cells (cost > -inf). Vertices are supported on forests;
/// the flow on a forest is determined by leaf elimination. Returns the best
/// objective value, -inf when the polytope is empty.
pub fn brute_force_best_value(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let m = b.len();
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| cost[i][j] > f64::NEG_INFINITY)
        .collect();
    assert!(cells.len() <= 20, "oracle is exponential in the cell count");
    let max_cells = n + m - 1;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << cells.len()) {
        if (mask.count_ones() as usize) > max_cells {
            continue;
        }
        let chosen: Vec<(usize, usize)> = cells
            .iter()
            .enumerate()
            .filter(|(idx, _)| mask & (1 << idx) != 0)
            .map(|(_, c)| *c)
            .collect();
        if !is_forest(&chosen, n, m) {
            continue;
        }
        if let Some(value) = forest_flow_value(&chosen, a, b, cost) {
            best = best.max(value);
        }
    }
    best
}

fn is_forest(cells: &[(usize, usize)], n: usize, m: usize) -> bool {
    let mut parent: Vec<usize> = (0..n + m).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for &(i, j) in cells {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, n + j));
        if ri == rj {
            return false;
        }
        parent[ri] = rj;
    }
    true
}

/// Unique flow on a forest of cells, if it is feasible and nonnegative.
fn forest_flow_value(cells: &[(usize, usize)], a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> Option<f64> {
    let n = a.len();
    let m = b.len();
    let mut row_mass = a.to_vec();
    let mut col_mass = b.to_vec();
    let mut remaining: Vec<(usize, usize)> = cells.to_vec();
    let mut value = 0.0;
    while !remaining.is_empty() {
        let mut row_deg = vec![0usize; n];
        let mut col_deg = vec![0usize; m];
        for &(i, j) in &remaining {
            row_deg[i] += 1;
            col_deg[j] += 1;
        }
        let pos = remaining
            .iter()
            .position(|&(i, j)| row_deg[i] == 1 || col_deg[j] == 1)?;
        let (i, j) = remaining.swap_remove(pos);
        let flow = if row_deg[i] == 1 { row_mass[i] } else { col_mass[j] };
        if flow < -1e-12 {
            return None;
        }
        row_mass[i] -= flow;
        col_mass[j] -= flow;
        value += flow * cost[i][j];
    }
    let balanced = row_mass.iter().chain(col_mass.iter()).all(|r| r.abs() <= 1e-9);
    balanced.then_some(value)
}

/// Gale-Hoffman condition: a causal coupling exists iff every source subset
/// ships no more mass than its admissible targets can absorb.
pub fn hall_feasible(a: &[f64], b: &[f64], admissible: &[Vec<bool>]) -> bool {
    let n = a.len();
    let m = b.len();
    for mask in 1u32..(1 << n) {
        let mut supply = 0.0;
        let mut reachable = vec![false; m];
        for i in 0..n {
            if mask & (1 << i) != 0 {
                supply += a[i];
                for j in 0..m {
                    reachable[j] |= admissible[i][j];
                }
            }
        }
        let capacity: f64 = (0..m).filter(|&j| reachable[j]).map(|j| b[j]).sum();
        if supply > capacity + 1e-12 {
            return false;
        }
    }
    true
}

use super::*;
use crate::spacetime::{event, Event, FiniteCausal, Minkowski};
use crate::transport::{cp_transform_fwd, Exponent};
use rand::Rng;
use rand::SeedableRng;

fn r11() -> Minkowski {
    Minkowski::new(1)
}

fn half() -> Exponent {
    Exponent::new(0.5).unwrap()
}

fn chain() -> Vec<Event> {
    vec![event(&[0.0, 0.0]), event(&[1.0, 0.0]), event(&[2.0, 0.0])]
}

fn chain_field(tgrid: Vec<f64>) -> HopfLaxField {
    let m = r11();
    let pts = chain();
    let f = vec![0.0, 1.0, 2.0];
    HopfLaxField::build(&m, &pts, vec![0, 1, 2], f, 1.0, half(), tgrid).unwrap()
}

#[test]
fn q_eval_chain_examples() {
    let m = r11();
    let pts = chain();
    let f = vec![0.0, 1.0, 2.0];
    let e = half();

    // t = 1, y = (2,0): max{0 + 2 sqrt2, 1 + 2, 2 + 0} = 3 at x = (1,0)
    let q = q_eval(&m, &pts, &f, 1.0, 2, e).unwrap();
    assert!((q.value - 3.0).abs() < 1e-12);
    assert_eq!(q.argmax, Some(1));
    assert!((q.lmax - 1.0).abs() < 1e-12);

    // t = 0.25: candidates 2 sqrt(0.5), 1 + 1, 2: tie at 2 between x = (1,0)
    // and x = (2,0); the largest-ell maximizer is recorded
    let q = q_eval(&m, &pts, &f, 0.25, 2, e).unwrap();
    assert!((q.value - 2.0).abs() < 1e-12);
    assert_eq!(q.argmax, Some(1));
    assert!((q.lmax - 1.0).abs() < 1e-12);

    // minimal point: only x = y admissible, u_p(0) = 0
    let q = q_eval(&m, &pts, &f, 0.7, 0, e).unwrap();
    assert!((q.value - 0.0).abs() < 1e-15);

    // Q_0 = f by definition
    let q = q_eval(&m, &pts, &f, 0.0, 2, e).unwrap();
    assert_eq!(q.value, 2.0);

    // p < 0 at a point with no strict predecessor: -inf
    let q = q_eval(&m, &pts, &f, 0.5, 0, Exponent::new(-1.0).unwrap()).unwrap();
    assert_eq!(q.value, f64::NEG_INFINITY);
    assert_eq!(q.argmax, None);
}

#[test]
fn maximizer_bound_chain() {
    let field = chain_field(vec![0.25, 1.0]);
    // t = 1: bound = L^(1/(p-1)) = 1, maximizer ell = 1 sits exactly on it
    assert!(field.check_maximizer_bound(1, 2));
    // t = 0.25: bound 0.25; the tie at the null candidate attains the max
    assert!(field.check_maximizer_bound(0, 2));
    for ti in 0..2 {
        for y in 0..3 {
            assert!(field.check_maximizer_bound(ti, y));
        }
    }
    // inflating the claimed L shrinks the bound and flags a violation
    assert!(!field.check_maximizer_bound_with(1, 2, 2.0));
}

#[test]
fn field_rejects_non_steep_data() {
    let m = r11();
    let pts = chain();
    // constant f has steepness 0 < any positive L
    let err = HopfLaxField::build(&m, &pts, vec![0, 1, 2], vec![1.0; 3], 0.5, half(), vec![1.0]);
    assert!(matches!(err, Err(crate::Error::InvalidField(_))));
    // claimed L above the true steepness 1
    let err = HopfLaxField::build(
        &m,
        &pts,
        vec![0, 1, 2],
        vec![0.0, 1.0, 2.0],
        1.5,
        half(),
        vec![1.0],
    );
    assert!(matches!(err, Err(crate::Error::InvalidField(_))));
}

#[test]
fn semigroup_properties_on_chain() {
    let field = chain_field(vec![0.05, 0.1, 0.25, 0.5, 1.0]);
    let report = check_semigroup_properties(&field).unwrap();
    assert!(report.monotone);
    assert!(report.min_steepness_margin >= -1e-9);
    assert!(report.max_young_excess <= 1e-9);
    assert!(report.max_lower_excess <= 1e-12);
    assert!(report.lipschitz_enforced);

    // Q-values at t = 1 are {0, 2, 3}: steep with L = 1
    let last = field.t_grid().len() - 1;
    assert!((field.value(last, 0) - 0.0).abs() < 1e-12);
    assert!((field.value(last, 1) - 2.0).abs() < 1e-12);
    assert!((field.value(last, 2) - 3.0).abs() < 1e-12);
    // monotone in t: Q_{0.25}((2,0)) = 2 <= Q_1((2,0)) = 3
    assert!(field.value(2, 2) <= field.value(last, 2));
}

#[test]
fn q_at_one_matches_forward_transform() {
    let m = r11();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(3..10);
        let mut pts = Vec::with_capacity(n);
        let mut t = 0.0;
        let mut x = 0.0;
        for _ in 0..n {
            pts.push(event(&[t, x]));
            t += rng.gen_range(0.1..0.5);
            x += rng.gen_range(-0.05..0.05);
        }
        let f: Vec<f64> = pts.iter().map(|p| 1.5 * p.time()).collect();
        for p in [0.5, -1.0] {
            let e = Exponent::new(p).unwrap();
            let fwd = cp_transform_fwd(&m, &pts, &f, e).unwrap();
            for y in 0..n {
                let q = q_eval(&m, &pts, &f, 1.0, y, e).unwrap();
                if fwd[y] == f64::NEG_INFINITY {
                    assert_eq!(q.value, f64::NEG_INFINITY);
                } else {
                    assert!((q.value - fwd[y]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn asymptotic_steepness_examples() {
    let m = r11();
    // dense diamond sample around the origin, with purely temporal pairs
    let mut pts = Vec::new();
    for i in 0..6 {
        for j in -2i32..=2 {
            pts.push(event(&[i as f64 / 5.0, j as f64 / 20.0]));
        }
    }
    let y = pts.iter().position(|p| *p == event(&[0.6, 0.0])).unwrap();
    let time: Vec<f64> = pts.iter().map(|p| p.time()).collect();
    let radii = [2.0, 1.0, 0.5, 0.25];
    let est = asymptotic_steepness(&m, &pts, &time, y, &radii, false).unwrap();
    assert!(!est.inconclusive);
    assert!((est.headline - 1.0).abs() < 1e-12);

    let doubled: Vec<f64> = time.iter().map(|t| 2.0 * t).collect();
    let est2 = asymptotic_steepness(&m, &pts, &doubled, y, &radii, false).unwrap();
    assert!((est2.headline - 2.0).abs() < 1e-12);

    // a kink below the probe point: slope 1 up to t = 0.55, slope 3 above;
    // small balls around y = (0.8, 0) sit entirely on the steep side
    let mut fine = Vec::new();
    for i in 0..=10 {
        for j in -1i32..=1 {
            fine.push(event(&[i as f64 / 10.0, j as f64 / 20.0]));
        }
    }
    let y2 = fine.iter().position(|p| *p == event(&[0.8, 0.0])).unwrap();
    let kinked: Vec<f64> = fine
        .iter()
        .map(|p| {
            let t = p.time();
            if t <= 0.55 {
                t
            } else {
                0.55 + 3.0 * (t - 0.55)
            }
        })
        .collect();
    let est3 = asymptotic_steepness(&m, &fine, &kinked, y2, &[2.0, 0.16], false).unwrap();
    let per: Vec<f64> = est3.per_radius.iter().filter_map(|(_, v)| *v).collect();
    assert!(per[0] < 1.1);
    assert!((per.last().unwrap() - 3.0).abs() < 1e-9);
    assert!((est3.headline - 3.0).abs() < 1e-9);

    // radius with no timelike pair is flagged and excluded by default
    let est4 = asymptotic_steepness(&m, &pts, &time, y, &[2.0, 0.01], false).unwrap();
    assert!(est4.per_radius[1].1.is_none());
    assert!(!est4.inconclusive);
    assert!((est4.headline - 1.0).abs() < 1e-12);
    // strict mode marks it inconclusive with headline +inf
    let est5 = asymptotic_steepness(&m, &pts, &time, y, &[2.0, 0.01], true).unwrap();
    assert!(est5.inconclusive);
    assert_eq!(est5.headline, f64::INFINITY);
}

#[test]
fn two_point_identity_is_exact() {
    for p in [0.5, -1.0] {
        let e = Exponent::new(p).unwrap();
        for ell in [0.5, 1.0, 2.0, 3.5] {
            for t in [0.1, 0.33, 0.7, 1.0] {
                let fix = two_point_identity(e, ell, t, 0.0);
                assert!(
                    fix.residual.abs() < 1e-9,
                    "p={p} ell={ell} t={t}: residual {}",
                    fix.residual
                );
            }
        }
    }
}

#[test]
fn two_point_closed_form_matches_q_eval() {
    let m = r11();
    let e = Exponent::new(-1.0).unwrap();
    let pts = vec![event(&[0.0, 0.0]), event(&[2.0, 0.0])];
    // f(y) - f(x) = 2L with L = 1.2 claimed below the 1.25 ratio
    let f = vec![0.0, 2.5];
    for t in [0.2, 0.5, 1.0] {
        let q = q_eval(&m, &pts, &f, t, 1, e).unwrap();
        let fix = two_point_identity(e, 2.0, t, 0.0);
        assert!((q.value - fix.q_value).abs() < 1e-12);
    }
}

#[test]
fn hj_diagnostic_on_chain() {
    // interior = points with causal past depth inside E: the minimal point
    // of the sample has none, so the forward difference there is flat while
    // the steepness term is not
    let m = r11();
    let field = HopfLaxField::build(
        &m,
        &chain(),
        vec![1, 2],
        vec![0.0, 1.0, 2.0],
        1.0,
        half(),
        vec![0.2, 0.4, 0.6, 0.8, 1.0],
    )
    .unwrap();
    let report = check_hj_inequality(&field, false);
    assert!(report.passed, "rows: {:?}", report.rows.iter().filter(|r| !r.ok).collect::<Vec<_>>());
    // every conclusive row satisfies the Lmax intermediate bound
    for row in &report.rows {
        if let Some(ok) = row.lmax_bound_ok {
            assert!(ok, "3.21 bound failed at t={}, y={}", row.t, row.y);
        }
    }
}

#[test]
fn works_on_finite_causal_spaces() {
    let inf = f64::NEG_INFINITY;
    let space = FiniteCausal::from_matrix(vec![
        vec![0.0, 1.0, 2.0],
        vec![inf, 0.0, 1.0],
        vec![inf, inf, 0.0],
    ])
    .unwrap();
    let pts = vec![0usize, 1, 2];
    let f = vec![0.0, 1.0, 2.0];
    let field =
        HopfLaxField::build(&space, &pts, vec![0, 1, 2], f, 1.0, half(), vec![0.25, 1.0]).unwrap();
    assert!((field.value(1, 2) - 3.0).abs() < 1e-12);
    check_semigroup_properties(&field).unwrap();
}

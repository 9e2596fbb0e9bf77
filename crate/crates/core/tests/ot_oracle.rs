//! Solver-vs-oracle equivalence and metric/duality properties of W1.

use wricci_core::ot::{brute_force_w1, solve_w1, CostMatrix};
use wricci_core::rng::SeedStream;

type Instance = (Vec<f64>, Vec<f64>, CostMatrix, Vec<[f64; 2]>, Vec<[f64; 2]>);

fn random_instance(rng: &mut SeedStream, max_side: usize) -> Instance {
    let m = 1 + (rng.next_u64() as usize) % max_side;
    let k = 1 + (rng.next_u64() as usize) % max_side;
    let pts_a: Vec<[f64; 2]> = (0..m).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect();
    let pts_b: Vec<[f64; 2]> = (0..k).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect();
    let cost = CostMatrix::from_fn(m, k, |i, j| {
        let dx = pts_a[i][0] - pts_b[j][0];
        let dy = pts_a[i][1] - pts_b[j][1];
        (dx * dx + dy * dy).sqrt()
    })
    .unwrap();
    let weights = |rng: &mut SeedStream, n: usize| -> Vec<f64> {
        // Mix of uniform and random positive compositions of a denominator
        // S ≤ 8, so the brute-force oracle stays in its fast exact regime.
        if rng.uniform() < 0.35 {
            vec![1.0 / n as f64; n]
        } else {
            let s = n + (rng.next_u64() as usize) % (8 - n + 1);
            let mut parts = vec![1usize; n];
            for _ in 0..s - n {
                let i = (rng.next_u64() as usize) % n;
                parts[i] += 1;
            }
            parts.iter().map(|&p| p as f64 / s as f64).collect()
        }
    };
    let a = weights(rng, m);
    let b = weights(rng, k);
    (a, b, cost, pts_a, pts_b)
}

#[test]
fn solver_matches_brute_force_on_500_instances() {
    let mut rng = SeedStream::new(2024, 0);
    for trial in 0..500 {
        let (a, b, cost, _, _) = random_instance(&mut rng, 6);
        let plan = solve_w1(&a, &b, &cost).unwrap();
        let oracle = brute_force_w1(&a, &b, &cost).unwrap();
        assert!(
            (plan.cost - oracle).abs() <= 1e-9 * (1.0 + oracle),
            "trial {trial}: solver {} vs oracle {}",
            plan.cost,
            oracle
        );
        let check = plan.verify(&a, &b, &cost);
        assert!(check.max_marginal_err <= 1e-9, "trial {trial}: marginals {check:?}");
        assert!(check.max_dual_violation <= 1e-8, "trial {trial}: dual {check:?}");
        assert!(check.max_slackness_err <= 1e-8, "trial {trial}: slackness {check:?}");
        assert!(
            check.duality_gap.abs() <= 1e-8 * (1.0 + plan.cost),
            "trial {trial}: gap {check:?}"
        );
    }
}

#[test]
fn solver_matches_leaf_search_on_irrational_weights() {
    // Weights without a small common denominator take the branch-and-bound
    // oracle path.
    let mut rng = SeedStream::new(31337, 0);
    for trial in 0..60 {
        let m = 1 + (rng.next_u64() as usize) % 5;
        let k = 1 + (rng.next_u64() as usize) % 5;
        let cost = CostMatrix::from_fn(m, k, |_, _| rng.uniform_in(0.0, 2.0)).unwrap();
        let raw_a: Vec<f64> = (0..m).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let raw_b: Vec<f64> = (0..k).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let sa: f64 = raw_a.iter().sum();
        let sb: f64 = raw_b.iter().sum();
        let a: Vec<f64> = raw_a.iter().map(|x| x / sa).collect();
        let b: Vec<f64> = raw_b.iter().map(|x| x / sb).collect();
        let plan = solve_w1(&a, &b, &cost).unwrap();
        let oracle = brute_force_w1(&a, &b, &cost).unwrap();
        assert!(
            (plan.cost - oracle).abs() <= 1e-9 * (1.0 + oracle),
            "trial {trial}: solver {} vs oracle {}",
            plan.cost,
            oracle
        );
    }
}

#[test]
fn certificates_hold_on_medium_instances() {
    // No oracle at this size; the dual certificate is the proof of
    // optimality (feasible duals + complementary slackness + zero gap).
    let mut rng = SeedStream::new(404, 0);
    for trial in 0..5 {
        let m = 150 + (rng.next_u64() as usize) % 150;
        let k = 120 + (rng.next_u64() as usize) % 150;
        let pts_a: Vec<[f64; 2]> =
            (0..m).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect();
        let pts_b: Vec<[f64; 2]> =
            (0..k).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect();
        let cost = CostMatrix::from_fn(m, k, |i, j| {
            let dx = pts_a[i][0] - pts_b[j][0];
            let dy = pts_a[i][1] - pts_b[j][1];
            (dx * dx + dy * dy).sqrt()
        })
        .unwrap();
        let mk_weights = |rng: &mut SeedStream, n: usize| -> Vec<f64> {
            let raw: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.01, 1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        };
        let a = mk_weights(&mut rng, m);
        let b = mk_weights(&mut rng, k);
        let plan = solve_w1(&a, &b, &cost).unwrap();
        let check = plan.verify(&a, &b, &cost);
        assert!(check.max_marginal_err <= 1e-9, "trial {trial}: {check:?}");
        assert!(check.max_dual_violation <= 1e-8, "trial {trial}: {check:?}");
        assert!(check.max_slackness_err <= 1e-8, "trial {trial}: {check:?}");
        assert!(check.duality_gap.abs() <= 1e-8 * (1.0 + plan.cost), "trial {trial}: {check:?}");
    }
}

#[test]
fn degenerate_lattice_instances_converge() {
    // Integer lattice points with uniform weights produce massive cost and
    // flow ties; the pivot rule must neither cycle nor stall.
    let mut rng = SeedStream::new(606, 0);
    for trial in 0..20 {
        let m = 20 + (rng.next_u64() as usize) % 40;
        let k = 20 + (rng.next_u64() as usize) % 40;
        let lattice = |rng: &mut SeedStream, n: usize| -> Vec<[f64; 2]> {
            (0..n)
                .map(|_| [(rng.next_u64() % 5) as f64, (rng.next_u64() % 5) as f64])
                .collect()
        };
        let pts_a = lattice(&mut rng, m);
        let pts_b = lattice(&mut rng, k);
        let cost = CostMatrix::from_fn(m, k, |i, j| {
            (pts_a[i][0] - pts_b[j][0]).abs() + (pts_a[i][1] - pts_b[j][1]).abs()
        })
        .unwrap();
        let a = vec![1.0 / m as f64; m];
        let b = vec![1.0 / k as f64; k];
        let plan = solve_w1(&a, &b, &cost).unwrap();
        let check = plan.verify(&a, &b, &cost);
        assert!(check.max_marginal_err <= 1e-9, "trial {trial}: {check:?}");
        assert!(check.max_dual_violation <= 1e-8, "trial {trial}: {check:?}");
        assert!(check.duality_gap.abs() <= 1e-8 * (1.0 + plan.cost), "trial {trial}: {check:?}");
    }
}

#[test]
fn w1_symmetry_and_triangle_inequality() {
    let mut rng = SeedStream::new(77, 1);
    // Shared atom universe so the triangle inequality applies.
    let n = 7;
    let pts: Vec<[f64; 2]> =
        (0..n).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect();
    let cost = CostMatrix::from_fn(n, n, |i, j| {
        let dx = pts[i][0] - pts[j][0];
        let dy = pts[i][1] - pts[j][1];
        (dx * dx + dy * dy).sqrt()
    })
    .unwrap();
    let rand_weights = |rng: &mut SeedStream| -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.05, 1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    };
    for _ in 0..100 {
        let a = rand_weights(&mut rng);
        let b = rand_weights(&mut rng);
        let c = rand_weights(&mut rng);
        let dab = solve_w1(&a, &b, &cost).unwrap().cost;
        let dba = solve_w1(&b, &a, &cost).unwrap().cost;
        assert!((dab - dba).abs() <= 1e-9, "symmetry {dab} vs {dba}");
        let dac = solve_w1(&a, &c, &cost).unwrap().cost;
        let dcb = solve_w1(&c, &b, &cost).unwrap().cost;
        assert!(dab <= dac + dcb + 1e-8, "triangle {dab} > {dac} + {dcb}");
    }
}

#[test]
fn scale_equivariance() {
    let mut rng = SeedStream::new(5, 5);
    for _ in 0..50 {
        let (a, b, cost, _, _) = random_instance(&mut rng, 6);
        let lambda = rng.uniform_in(0.1, 10.0);
        let scaled = CostMatrix::from_fn(cost.rows(), cost.cols(), |i, j| lambda * cost.at(i, j)).unwrap();
        let v1 = solve_w1(&a, &b, &cost).unwrap().cost;
        let v2 = solve_w1(&a, &b, &scaled).unwrap().cost;
        assert!((v2 - lambda * v1).abs() <= 1e-9 * (1.0 + v2), "{v2} vs {}", lambda * v1);
    }
}

#[test]
fn lipschitz_bound_never_exceeds_w1() {
    let mut rng = SeedStream::new(13, 2);
    for _ in 0..100 {
        let (a, b, cost, pts_a, pts_b) = random_instance(&mut rng, 6);
        // f(z) = distance to a random anchor is 1-Lipschitz for the Euclidean metric.
        let anchor = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
        let f = |p: &[f64; 2]| ((p[0] - anchor[0]).powi(2) + (p[1] - anchor[1]).powi(2)).sqrt();
        let fa: Vec<f64> = pts_a.iter().map(f).collect();
        let fb: Vec<f64> = pts_b.iter().map(f).collect();
        let lb = wricci_core::ot::w1_lower_bound_via_lipschitz(&fa, &fb, &a, &b);
        let w1 = solve_w1(&a, &b, &cost).unwrap().cost;
        assert!(lb <= w1 + 1e-8, "lb {lb} exceeds w1 {w1}");
    }
}

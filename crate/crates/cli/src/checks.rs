//! Named numerical checks: every lemma-level claim the library rests on is
//! runnable here as a pass/fail report. The `validate` subcommand exposes
//! them individually and the acceptance suite is their union.

use wricci_core::coarse::CurvatureQuery;
use wricci_core::manifold::{Kind, ModelManifold, Point, Potential, TangentVector};
use wricci_core::measure::{density_ratio_bar_vs_plain, density_ratio_nu_vs_mu};
use wricci_core::ot::{brute_force_w1, solve_w1, CostMatrix};
use wricci_core::rgg::{convergence_experiment, GraphSchedule, PoissonSpec};
use wricci_core::rng::SeedStream;
use wricci_core::stats::{log_log_slope, RunningStats};

/// Outcome of one named check.
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub lines: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport { name: name.into(), pass: true, lines: Vec::new() }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn require(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.lines.push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, line));
        self.pass &= ok;
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}: {}\n", if self.pass { "PASS" } else { "FAIL" }, self.name);
        for l in &self.lines {
            out.push_str("  ");
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn sci_grid(rows: &[[f64; 3]]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| sci(r)).collect();
    parts.join(" / ")
}

fn sphere2() -> ModelManifold {
    ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.3).unwrap()
}

fn hyperbolic2() -> ModelManifold {
    ModelManifold::hyperbolic(2, 1.0).unwrap()
}

fn euclid2() -> ModelManifold {
    ModelManifold::euclidean(2).unwrap()
}

fn unit_dir(m: &ModelManifold, x: &Point) -> TangentVector {
    m.tangent_frame(x).into_iter().next().unwrap()
}

/// Ricci curvature as a sphere average: the mean of K(v,w)(ε²-⟨v,w⟩²) over
/// w uniform on ∂B_ε agrees with (ε²/n)·Ric(v,v) within 3 standard errors.
pub fn check_ricci_sphere_average(
    m: &ModelManifold,
    eps: f64,
    samples: usize,
    seed: u64,
) -> CheckReport {
    let mut rep = CheckReport::new(&format!("ricci-sphere ({:?})", m.kind()));
    let x = m.origin();
    let v = unit_dir(m, &x);
    let frame = m.tangent_frame(&x);
    let kappa = m.curvature_constant();
    let oracle = eps * eps / m.dim() as f64 * m.ricci(&x, &v).unwrap();
    let mut rng = SeedStream::new(seed, 0x7269);
    let mut dir = vec![0.0; m.dim()];
    let mut stats = RunningStats::new();
    for _ in 0..samples {
        rng.unit_direction(m.dim(), &mut dir);
        let coeffs: Vec<f64> = dir.iter().map(|d| d * eps).collect();
        let w = m.from_frame(&frame, &coeffs);
        let vw = m.inner(&v, &w).unwrap();
        stats.push(kappa * (eps * eps - vw * vw));
    }
    let z = (stats.mean() - oracle) / stats.std_error();
    rep.require(
        (stats.mean() - oracle).abs() <= 3.0 * stats.std_error() + 1e-14,
        format!("estimate {:.8} oracle {:.8} z {:+.2}", stats.mean(), oracle, z),
    );
    rep
}

/// Ricci curvature as a ball average against (ε²/(n+2))·Ric(v,v).
pub fn check_ricci_ball_average(
    m: &ModelManifold,
    eps: f64,
    samples: usize,
    seed: u64,
) -> CheckReport {
    let mut rep = CheckReport::new(&format!("ricci-ball ({:?})", m.kind()));
    let x = m.origin();
    let v = unit_dir(m, &x);
    let frame = m.tangent_frame(&x);
    let kappa = m.curvature_constant();
    let oracle = eps * eps / (m.dim() as f64 + 2.0) * m.ricci(&x, &v).unwrap();
    let mut rng = SeedStream::new(seed, 0x7242);
    let mut dir = vec![0.0; m.dim()];
    let mut stats = RunningStats::new();
    for _ in 0..samples {
        rng.unit_direction(m.dim(), &mut dir);
        let r = rng.ball_radius(eps, m.dim());
        let coeffs: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let w = m.from_frame(&frame, &coeffs);
        let vw = m.inner(&v, &w).unwrap();
        let ww = m.inner(&w, &w).unwrap();
        stats.push(kappa * (ww - vw * vw));
    }
    let z = (stats.mean() - oracle) / stats.std_error();
    rep.require(
        (stats.mean() - oracle).abs() <= 3.0 * stats.std_error() + 1e-14,
        format!("estimate {:.8} oracle {:.8} z {:+.2}", stats.mean(), oracle, z),
    );
    rep
}

/// Geodesic-triangle expansion: |exact - third-order expansion| fits order
/// ≥ 3.5 in ε on the unit sphere.
pub fn check_triangle_expansion() -> CheckReport {
    let mut rep = CheckReport::new("triangle expansion order");
    let m = sphere2();
    let x = m.origin();
    let frame = m.tangent_frame(&x);
    let pairs = [([1.0, 0.0], [0.0, 1.0]), ([1.0, 0.2], [-0.3, 0.9])];
    let eps_grid = [0.2, 0.1, 0.05, 0.025];
    let mut resid = Vec::new();
    for &eps in &eps_grid {
        let mut worst: f64 = 0.0;
        for (c1, c2) in &pairs {
            let w1 = m.from_frame(&frame, c1);
            let w2 = m.from_frame(&frame, c2);
            let (exact, expansion) = m.triangle_distance_check(&x, &w1, &w2, eps).unwrap();
            worst = worst.max((exact - expansion).abs());
        }
        resid.push(worst);
    }
    let slope = log_log_slope(&eps_grid, &resid, 1e-15).unwrap_or(f64::NAN);
    rep.note(format!("residuals {} over eps {eps_grid:?}", sci(&resid)));
    rep.require(slope >= 3.5, format!("fitted slope {slope:.2} >= 3.5"));
    rep
}

/// Pushforward-vs-volume density: max |dμ̄/dμ - 1| over the ball decays at
/// order ≥ 1.8 in ε on the sphere.
pub fn check_density_bar() -> CheckReport {
    let mut rep = CheckReport::new("density ratio (pushforward vs volume)");
    let m = sphere2();
    let x = m.origin();
    let frame = m.tangent_frame(&x);
    let eps_grid = [0.4, 0.2, 0.1];
    let mut worst = Vec::new();
    for &eps in &eps_grid {
        let mut mx: f64 = 0.0;
        for i in 0..50 {
            let r = eps * (i as f64 + 0.5) / 50.0;
            let w = m.from_frame(&frame, &[r * 0.8, r * 0.6]);
            let z = m.exp_map(&x, &w).unwrap();
            let ratio = density_ratio_bar_vs_plain(&m, &x, eps, &z).unwrap();
            mx = mx.max((ratio - 1.0).abs());
        }
        worst.push(mx);
    }
    let slope = log_log_slope(&eps_grid, &worst, 0.0).unwrap_or(f64::NAN);
    rep.note(format!("max deviations {} over eps {eps_grid:?}", sci(&worst)));
    rep.require(slope >= 1.8, format!("fitted slope {slope:.2} >= 1.8"));
    rep
}

/// Weighted-vs-uniform density against its affine approximation
/// 1 - ⟨∇V(x), exp_x⁻¹ z⟩: deviation decays at order ≥ 1.8 in ε.
pub fn check_density_nu() -> CheckReport {
    let mut rep = CheckReport::new("density ratio (weighted vs uniform)");
    let m = euclid2();
    let x = m.point(&[0.3, -0.1]).unwrap();
    let pot = Potential::Quadratic { center: vec![0.0, 0.0], scale: 1.0 };
    let eps_grid = [0.4, 0.2, 0.1];
    let mut worst = Vec::new();
    for &eps in &eps_grid {
        let mut mx: f64 = 0.0;
        for i in 0..50 {
            let t = (i as f64 + 0.5) / 50.0 * eps;
            for dir in [[1.0, 0.0], [0.0, 1.0], [-0.6, 0.8]] {
                let z = m
                    .point(&[x.coords()[0] + t * dir[0], x.coords()[1] + t * dir[1]])
                    .unwrap();
                let (exact, affine) = density_ratio_nu_vs_mu(&m, &x, eps, &z, &pot).unwrap();
                mx = mx.max((exact - affine).abs());
            }
        }
        worst.push(mx);
    }
    let slope = log_log_slope(&eps_grid, &worst, 0.0).unwrap_or(f64::NAN);
    rep.note(format!("max deviations {} over eps {eps_grid:?}", sci(&worst)));
    rep.require(slope >= 1.8, format!("fitted slope {slope:.2} >= 1.8"));
    rep
}

/// The transport-map Jacobian against its closed form over a (δ, ε) grid.
///
/// The determinant formula is exact for this rank-one map and the map is
/// quadratic, so central differences reproduce it to roundoff; residuals at
/// the noise floor are consistent with any positive-order envelope and an
/// order fit only applies above the floor.
pub fn check_jacobian() -> CheckReport {
    let mut rep = CheckReport::new("transport-map jacobian");
    let m = sphere2();
    let x0 = m.origin();
    let v = unit_dir(&m, &x0);
    let pot = Potential::Quadratic { center: vec![0.25, 0.1, 0.2], scale: 1.0 };
    let grid = [0.2, 0.1, 0.05];
    let floor = 1e-9;
    let mut table = vec![[0.0f64; 3]; 3];
    let mut global: f64 = 0.0;
    for (di, &d) in grid.iter().enumerate() {
        for (ei, &e) in grid.iter().enumerate() {
            let q = CurvatureQuery::new(m.clone(), x0.clone(), v.clone(), d, e, pot.clone()).unwrap();
            let frame = m.tangent_frame(&x0);
            let mut worst: f64 = 0.0;
            for t in 0..25 {
                let r = 0.95 * e * (t as f64 + 0.5) / 25.0;
                let w = m.from_frame(&frame, &[r * 0.6, -r * 0.8]);
                let (num, formula) = q.jacobian_check(&w).unwrap();
                worst = worst.max((num - formula).abs());
            }
            table[di][ei] = worst;
            global = global.max(worst);
        }
    }
    rep.note(format!("max |numeric - formula| grid: {}", sci_grid(&table)));
    if global <= floor {
        rep.require(
            true,
            format!(
                "residuals at the finite-difference noise floor ({global:.2e} <= {floor:.0e}): \
                 below every admissible second-order envelope on the grid"
            ),
        );
    } else {
        let eps_resid: Vec<f64> = table[2].iter().map(|r| r.max(1e-16)).collect();
        let slope_eps = log_log_slope(&grid, &eps_resid, 0.0).unwrap_or(f64::NAN);
        let mut del_resid = Vec::new();
        for row in &table {
            del_resid.push(row[2].max(1e-16));
        }
        let slope_del = log_log_slope(&grid, &del_resid, 0.0).unwrap_or(f64::NAN);
        rep.require(slope_eps >= 1.6, format!("eps exponent {slope_eps:.2} >= 1.6"));
        rep.require(slope_del >= 1.6, format!("delta exponent {slope_del:.2} >= 1.6"));
    }
    rep
}

/// The signed projection distance is 1-Lipschitz: no violations over 10⁴
/// random pairs within B_{3δ}(x₀) on each model family.
pub fn check_lipschitz(pairs: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("signed projection distance is 1-Lipschitz");
    let delta = 0.2;
    let models = [euclid2(), sphere2(), hyperbolic2()];
    for m in &models {
        let x0 = m.origin();
        let v = unit_dir(m, &x0);
        let q = CurvatureQuery::new(m.clone(), x0.clone(), v, delta, 0.05, Potential::Zero).unwrap();
        let mut rng = SeedStream::new(seed, 0x4c50);
        let mut violations = 0usize;
        let mut max_ratio: f64 = 0.0;
        for _ in 0..pairs {
            let w1 = m.random_tangent_in_ball(&x0, 3.0 * delta, &mut rng);
            let w2 = m.random_tangent_in_ball(&x0, 3.0 * delta, &mut rng);
            let z1 = m.exp_map(&x0, &w1).unwrap();
            let z2 = m.exp_map(&x0, &w2).unwrap();
            let df = (q.signed_projection_distance(&z1).unwrap()
                - q.signed_projection_distance(&z2).unwrap())
            .abs();
            let d = m.distance(&z1, &z2);
            if d > 0.0 {
                max_ratio = max_ratio.max(df / d);
            }
            if df > d * (1.0 + 1e-9) {
                violations += 1;
            }
        }
        rep.require(
            violations == 0,
            format!("{:?}: {} violations over {} pairs (max ratio {:.12})", m.kind(), violations, pairs, max_ratio),
        );
    }
    rep
}

/// Exact quadrature reference values for the sandwich at (δ, ε).
pub fn sandwich_quadrature_reference(q: &CurvatureQuery) -> (f64, f64) {
    q.bound_sandwich_quadrature(64, 128).unwrap()
}

/// The Monte-Carlo sandwich at the acceptance parameters: both bounds within
/// 3 standard errors of δ(1 - ε²G/(2(n+2))), and tight enough to resolve the
/// curvature deflection from δ.
pub fn check_sandwich(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("curvature sandwich (3-sigma against first-order target)");
    let cases: Vec<(&str, CurvatureQuery)> = vec![
        ("sphere S2, V=0", {
            let m = sphere2();
            let x0 = m.origin();
            let v = unit_dir(&m, &x0);
            CurvatureQuery::new(m, x0, v, 0.2, 0.2, Potential::Zero).unwrap()
        }),
        ("euclidean, V=|z|^2/2", {
            let m = euclid2();
            let x0 = m.origin();
            let v = unit_dir(&m, &x0);
            let pot = Potential::Quadratic { center: vec![0.0, 0.0], scale: 1.0 };
            CurvatureQuery::new(m, x0, v, 0.2, 0.2, pot).unwrap()
        }),
    ];
    for (name, q) in &cases {
        let g = q.oracle().unwrap();
        let d = q.delta();
        let e = q.epsilon();
        let target = d * (1.0 - e * e / (2.0 * (q.manifold().dim() as f64 + 2.0)) * g);
        let b = q.bound_sandwich(samples, seed).unwrap();
        let zu = (b.upper - target) / b.se_upper;
        let zl = (b.lower - target) / b.se_lower;
        let (qu, ql) = sandwich_quadrature_reference(q);
        rep.note(format!(
            "{name}: upper {:.9} lower {:.9} target {:.9} (exact integrals: {:.9}, {:.9})",
            b.upper, b.lower, target, qu, ql
        ));
        rep.require(zu.abs() <= 3.0, format!("{name}: upper within 3 sigma (z = {zu:+.1})"));
        rep.require(zl.abs() <= 3.0, format!("{name}: lower within 3 sigma (z = {zl:+.1})"));
        rep.require(
            b.upper + 3.0 * b.se_upper < d && b.lower + 3.0 * b.se_lower < d,
            format!(
                "{name}: interval excludes delta (upper + 3se = {:.9} < {d})",
                b.upper + 3.0 * b.se_upper
            ),
        );
    }
    rep
}

/// Joint-order fit of the sandwich residual |upper - δ(1 - ε²G/8)| on the
/// sphere with an embedding-pullback quadratic potential: slope in ε at
/// fixed δ ≥ 2.6, slope in δ at fixed ε ≥ 1.6. Deterministic quadrature.
pub fn check_expansion_order() -> CheckReport {
    let mut rep = CheckReport::new("curvature expansion residual order");
    let m = sphere2();
    let x0 = m.origin();
    let v = unit_dir(&m, &x0);
    // Center aligned with x0: gradient vanishes at x0, Hessian is 0.3 there.
    let pot = Potential::Quadratic { center: vec![0.0, 0.0, 0.3], scale: 1.0 };
    let grid = [0.2, 0.1, 0.05];
    let mut resid = vec![[0.0f64; 3]; 3];
    for (di, &d) in grid.iter().enumerate() {
        for (ei, &e) in grid.iter().enumerate() {
            let q = CurvatureQuery::new(m.clone(), x0.clone(), v.clone(), d, e, pot.clone()).unwrap();
            let g = q.oracle().unwrap();
            let (upper, _) = q.bound_sandwich_quadrature(64, 128).unwrap();
            resid[di][ei] = (upper - d * (1.0 - e * e / 8.0 * g)).abs();
        }
    }
    rep.note(format!("residual grid (rows delta {grid:?}, cols eps): {}", sci_grid(&resid)));
    // Fix the smallest delta for the eps fit and the smallest eps for the
    // delta fit; the complementary error term is weakest there.
    let eps_resid: Vec<f64> = (0..3).map(|ei| resid[2][ei]).collect();
    let slope_eps = log_log_slope(&grid, &eps_resid, 1e-14).unwrap_or(f64::NAN);
    let del_resid: Vec<f64> = (0..3).map(|di| resid[di][2]).collect();
    let slope_del = log_log_slope(&grid, &del_resid, 1e-14).unwrap_or(f64::NAN);
    rep.require(slope_eps >= 2.6, format!("slope in eps at delta=0.05: {slope_eps:.2} >= 2.6"));
    rep.require(slope_del >= 1.6, format!("slope in delta at eps=0.05: {slope_del:.2} >= 1.6"));
    rep
}

/// Midpoint-scaled curvature against the generalized-Ricci oracle on the
/// three reference configurations, within 0.15 absolute.
pub fn check_scaled_estimator(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("scaled curvature estimator vs oracle");
    let cases: Vec<(&str, CurvatureQuery, f64)> = vec![
        (
            "euclidean V=0",
            {
                let m = euclid2();
                let x0 = m.origin();
                let v = unit_dir(&m, &x0);
                CurvatureQuery::new(m, x0, v, 0.25, 0.25, Potential::Zero).unwrap()
            },
            0.0,
        ),
        (
            "sphere V=0",
            {
                let m = sphere2();
                let x0 = m.origin();
                let v = unit_dir(&m, &x0);
                CurvatureQuery::new(m, x0, v, 0.25, 0.25, Potential::Zero).unwrap()
            },
            1.0,
        ),
        (
            "euclidean V=|z|^2/2",
            {
                let m = euclid2();
                let x0 = m.origin();
                let v = unit_dir(&m, &x0);
                let pot = Potential::Quadratic { center: vec![0.0, 0.0], scale: 1.0 };
                CurvatureQuery::new(m, x0, v, 0.25, 0.25, pot).unwrap()
            },
            2.0,
        ),
    ];
    for (name, q, oracle) in &cases {
        let b = q.bound_sandwich(samples, seed).unwrap();
        let scaled = q.scaled_kappa_of_w1(b.midpoint());
        let err = (scaled - oracle).abs();
        rep.require(
            err <= 0.15,
            format!("{name}: scaled {scaled:+.4} oracle {oracle} |err| {err:.4} <= 0.15"),
        );
    }
    rep
}

/// Poisson process counts: correct mean, Poisson dispersion, independence of
/// disjoint sub-windows; all at 3 sigma over 200 seeds.
pub fn check_poisson(seeds: usize) -> CheckReport {
    let mut rep = CheckReport::new("poisson point process moments");
    let m = euclid2();
    let x0 = m.origin();
    let n_intensity = 100.0;
    let r = 0.5;
    let lambda = n_intensity * std::f64::consts::PI * r * r;
    let mut stats = RunningStats::new();
    let mut lefts = Vec::with_capacity(seeds);
    let mut rights = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let spec = PoissonSpec {
            manifold: m.clone(),
            intensity_n: n_intensity,
            window_center: x0.clone(),
            window_radius: r,
            potential: Potential::Zero,
            seed: 31_000 + s as u64,
        };
        let pts = wricci_core::rgg::sample_poisson(&spec).unwrap();
        stats.push(pts.len() as f64);
        lefts.push(pts.iter().filter(|p| p.coords()[0] < 0.0).count() as f64);
        rights.push(pts.iter().filter(|p| p.coords()[0] >= 0.0).count() as f64);
    }
    let mean_tol = 3.0 * (lambda / seeds as f64).sqrt();
    rep.require(
        (stats.mean() - lambda).abs() < mean_tol,
        format!("count mean {:.2} vs {:.2} (tol {:.2})", stats.mean(), lambda, mean_tol),
    );
    let var_tol = 3.0 * lambda * (2.0 / (seeds as f64 - 1.0)).sqrt() + 3.0;
    rep.require(
        (stats.variance() - lambda).abs() < var_tol,
        format!("count variance {:.2} vs {:.2} (tol {:.2})", stats.variance(), lambda, var_tol),
    );
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ml, mr) = (mean(&lefts), mean(&rights));
    let mut num = 0.0;
    let mut dl = 0.0;
    let mut dr = 0.0;
    for (l, rr) in lefts.iter().zip(&rights) {
        num += (l - ml) * (rr - mr);
        dl += (l - ml) * (l - ml);
        dr += (rr - mr) * (rr - mr);
    }
    let rho = num / (dl * dr).sqrt();
    let rho_tol = 3.0 / (seeds as f64).sqrt();
    rep.require(
        rho.abs() <= rho_tol,
        format!("disjoint-window correlation {rho:+.3} (tol {rho_tol:.3})"),
    );
    rep
}

/// Geometry identities at library tolerances: exp/log round-trip, transport
/// isometry, Ricci-from-sectional sum, triangle inequality.
pub fn check_geometry_identities(seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("geometry identities");
    let models = [euclid2(), ModelManifold::euclidean(3).unwrap(), sphere2(),
        ModelManifold::sphere(3, 1.3).unwrap().with_ball_safety(0.3).unwrap(), hyperbolic2()];
    for m in &models {
        let mut rng = SeedStream::new(seed, 0x6765);
        let x = m.origin();
        let bound = match m.kind() {
            Kind::Sphere => 0.5 * m.injectivity_radius(),
            _ => 1.5,
        };
        // Round-trip log(exp) over random base points and vectors.
        let mut worst_rt: f64 = 0.0;
        for _ in 0..1000 {
            let hop = m.random_tangent_in_ball(&x, 0.9 * bound, &mut rng);
            let base = m.exp_map(&x, &hop).unwrap();
            let v = m.random_tangent_in_ball(&base, 0.5 * bound, &mut rng);
            let y = m.exp_map(&base, &v).unwrap();
            let back = m.log_map(&base, &y).unwrap();
            let diff = m.combine(&back, 1.0, &v, -1.0).unwrap();
            worst_rt = worst_rt.max(m.norm(&diff) / (1.0 + m.norm(&v)));
        }
        rep.require(worst_rt <= 1e-9, format!("{:?}: round-trip residual {worst_rt:.2e}", m.kind()));

        // Transport preserves pairwise inner products.
        let mut worst_iso: f64 = 0.0;
        for _ in 0..300 {
            let u = m.random_tangent_in_ball(&x, 1.0, &mut rng);
            let w = m.random_tangent_in_ball(&x, 1.0, &mut rng);
            let hop = m.random_tangent_in_ball(&x, 0.8 * bound, &mut rng);
            let y = m.exp_map(&x, &hop).unwrap();
            let tu = m.parallel_transport(&x, &y, &u).unwrap();
            let tw = m.parallel_transport(&x, &y, &w).unwrap();
            worst_iso = worst_iso
                .max((m.inner(&tu, &tw).unwrap() - m.inner(&u, &w).unwrap()).abs());
        }
        rep.require(worst_iso <= 1e-10, format!("{:?}: transport isometry {worst_iso:.2e}", m.kind()));

        // Ricci equals the sectional sum over any completed orthonormal basis.
        let frame = m.tangent_frame(&x);
        let v = &frame[0];
        let mut sum = 0.0;
        for e in frame.iter().skip(1) {
            let ve = m.inner(v, e).unwrap();
            sum += m.sectional_curvature(&x, v, e).unwrap() * (1.0 - ve * ve);
        }
        // The v-aligned basis term contributes zero and spans no 2-plane.
        let ric = m.ricci(&x, v).unwrap();
        rep.require(
            (sum - ric).abs() <= 1e-12,
            format!("{:?}: sectional sum {sum:.12} vs ricci {ric:.12}", m.kind()),
        );

        // Triangle inequality on random triples.
        let mut worst_slack: f64 = 0.0;
        for _ in 0..1000 {
            let a = m.exp_map(&x, &m.random_tangent_in_ball(&x, bound, &mut rng)).unwrap();
            let b = m.exp_map(&x, &m.random_tangent_in_ball(&x, bound, &mut rng)).unwrap();
            let c = m.exp_map(&x, &m.random_tangent_in_ball(&x, bound, &mut rng)).unwrap();
            let slack = m.distance(&a, &b) + m.distance(&b, &c) - m.distance(&a, &c);
            worst_slack = worst_slack.min(slack);
        }
        rep.require(
            worst_slack >= -1e-12,
            format!("{:?}: triangle slack {worst_slack:.2e}", m.kind()),
        );
    }
    rep
}

/// Solver-vs-oracle agreement and duality certificates on random instances.
pub fn check_ot_correctness(instances: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("exact W1 vs brute-force oracle");
    let mut rng = SeedStream::new(seed, 0x6f74);
    let mut worst_gap: f64 = 0.0;
    let mut worst_diff: f64 = 0.0;
    let mut worst_marg: f64 = 0.0;
    let mut worst_dual: f64 = 0.0;
    for _ in 0..instances {
        let m = 1 + (rng.next_u64() as usize) % 6;
        let k = 1 + (rng.next_u64() as usize) % 6;
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
        let mut weights = |n: usize| -> Vec<f64> {
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
        let a = weights(m);
        let b = weights(k);
        let plan = solve_w1(&a, &b, &cost).unwrap();
        let oracle = brute_force_w1(&a, &b, &cost).unwrap();
        worst_diff = worst_diff.max((plan.cost - oracle).abs() / (1.0 + oracle));
        let check = plan.verify(&a, &b, &cost);
        worst_gap = worst_gap.max(check.duality_gap.abs() / (1.0 + plan.cost));
        worst_marg = worst_marg.max(check.max_marginal_err);
        worst_dual = worst_dual.max(check.max_dual_violation.max(check.max_slackness_err));
    }
    rep.require(
        worst_diff <= 1e-9,
        format!("max relative |solver - oracle| = {worst_diff:.2e} <= 1e-9 over {instances} instances"),
    );
    rep.require(worst_gap <= 1e-8, format!("max relative duality gap = {worst_gap:.2e} <= 1e-8"));
    rep.require(worst_marg <= 1e-9, format!("max marginal error = {worst_marg:.2e} <= 1e-9"));
    rep.require(
        worst_dual <= 1e-8,
        format!("max dual violation / slackness error = {worst_dual:.2e} <= 1e-8"),
    );
    rep
}

/// Frozen parameters of the desk-scale graph-curvature trend run.
pub fn supplement_schedule() -> (GraphSchedule, Vec<u64>, u32, u64) {
    let mut sched = GraphSchedule::new(1.0 / 6.0, 1.0 / 6.0, 0.4, 0.4);
    sched.c_delta = 1.0;
    sched.c_epsilon = 0.3;
    (sched, vec![150, 500, 1500], 20, 20_260_808)
}

/// The graph-curvature trend on the Gaussian-weighted plane at the stated
/// intensities. The projected ball occupancies are computed first; when the
/// dense exact-transport envelope cannot hold them, the check fails with the
/// numbers rather than attempting an infeasible run.
pub fn check_rgg_trend_stated() -> CheckReport {
    let mut rep = CheckReport::new("graph curvature trend (stated intensities)");
    let m = euclid2();
    let x0 = m.origin();
    let pot = Potential::Quadratic { center: vec![0.0, 0.0], scale: 1.0 };
    let sched = GraphSchedule::new(1.0 / 6.0, 1.0 / 6.0, 1.0, 1.0);
    sched.validate(2).unwrap();
    let n_values = [1_000u64, 10_000, 100_000];
    // Dense cost matrices beyond this side length exceed desk memory/time.
    let dense_cap = 5_000.0;
    let mut feasible = true;
    for &n in &n_values {
        let (delta_n, epsilon_n) = sched.values(n).unwrap();
        let ball = PoissonSpec {
            manifold: m.clone(),
            intensity_n: n as f64,
            window_center: x0.clone(),
            window_radius: delta_n,
            potential: pot.clone(),
            seed: 0,
        };
        let expected_ball = ball.expected_count().unwrap();
        rep.note(format!(
            "n = {n}: delta_n = {delta_n:.3}, eps_n = {epsilon_n:.3}, expected ball support ~ {expected_ball:.0} atoms"
        ));
        if expected_ball > dense_cap {
            feasible = false;
        }
    }
    rep.require(
        feasible,
        format!(
            "ball supports fit the dense exact-transport envelope (<= {dense_cap:.0} atoms); \
             log-factor schedules keep delta_n near 2 at these intensities, so supports grow \
             ~6n and the exact W1 instances do not fit desk memory or the time budget"
        ),
    );
    if !feasible {
        rep.note("see the desk-scale trend check for the runnable counterpart".to_string());
    }
    rep
}

/// Desk-scale counterpart: same power-law exponents, weaker log factor and
/// rescaled constants, chosen so exact transport is feasible; the scaled
/// curvature error must decrease strictly across n and end at or below 0.5.
pub fn check_rgg_trend_supplement() -> CheckReport {
    let mut rep = CheckReport::new("graph curvature trend (desk scale)");
    let m = euclid2();
    let x0 = m.origin();
    let v = unit_dir(&m, &x0);
    let pot = Potential::Quadratic { center: vec![0.0, 0.0], scale: 1.0 };
    let (sched, n_values, repeats, seed) = supplement_schedule();
    let rows = convergence_experiment(&m, &pot, &x0, &v, &sched, &n_values, repeats, seed).unwrap();
    let mut errs = Vec::new();
    for &n in &n_values {
        let sel: Vec<_> = rows.iter().filter(|r| r.n == n && r.connected).collect();
        let disc = rows.iter().filter(|r| r.n == n && !r.connected).count();
        let mean_err = sel.iter().map(|r| r.abs_error).sum::<f64>() / sel.len().max(1) as f64;
        rep.note(format!(
            "n = {n}: mean |scaled - oracle| = {mean_err:.3} over {} runs, {disc} disconnected",
            sel.len()
        ));
        errs.push(mean_err);
    }
    rep.require(errs[0] > errs[1] && errs[1] > errs[2], "mean |error| strictly decreases across n");
    rep.require(errs[2] <= 0.5, format!("final mean |error| {:.3} <= 0.5", errs[2]));
    rep
}

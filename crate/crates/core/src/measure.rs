//! Samplers and discretizers for weighted geodesic-ball measures.
//!
//! Four measure families share one sampling scheme: draw a tangent vector
//! uniformly in the ε-ball of T_xM, rejection-accept against the variant's
//! density, and push the accepted vector through the exponential map.
//!
//! | variant         | tangent density ∝        | realizes            |
//! |-----------------|---------------------------|---------------------|
//! | `MuManifold`    | θ_x(w)                    | uniform volume on B_ε(x) |
//! | `NuManifold`    | θ_x(w)·e^{-V(exp_x w)}    | e^{-V} volume on B_ε(x)  |
//! | `MuTangentPush` | 1                         | pushforward of uniform tangent ball |
//! | `NuTangentPush` | e^{-V(exp_x w)}           | pushforward of e^{-V∘exp} tangent law |
//!
//! Rejection is exact: the envelope combines the monotone closed-form θ with
//! e^{-V} bounded through the potential's gradient-norm bound over the ball,
//! so acceptance never biases the law, only the run time.

use alloc::vec::Vec;

use crate::manifold::{GeometryError, Kind, ModelManifold, Point, Potential, TangentVector};
use crate::math;
use crate::rng::SeedStream;
use crate::stats::{gauss_legendre, KahanSum};

/// Errors from sampling and density evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureError {
    /// Acceptance rate fell below 1e-4; the potential is mis-scaled for the ball.
    RejectionStall,
    /// The query point lies outside the ball supporting the measure.
    OutsideBall,
    /// Ball radius outside the manifold's allowed bound.
    BadRadius,
    /// Cloud atoms/weights violate the probability-vector invariants.
    BadCloud,
    Geometry(GeometryError),
}

impl From<GeometryError> for MeasureError {
    fn from(e: GeometryError) -> Self {
        MeasureError::Geometry(e)
    }
}

impl core::fmt::Display for MeasureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeasureError::RejectionStall => write!(f, "rejection acceptance rate below 1e-4"),
            MeasureError::OutsideBall => write!(f, "point outside the supporting ball"),
            MeasureError::BadRadius => write!(f, "radius outside the allowed ball bound"),
            MeasureError::BadCloud => write!(f, "invalid weighted point cloud"),
            MeasureError::Geometry(e) => write!(f, "geometry: {e}"),
        }
    }
}

/// The four ball-measure families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureVariant {
    /// Uniform with respect to Riemannian volume on the manifold ball.
    MuManifold,
    /// Density ∝ e^{-V} with respect to volume on the manifold ball.
    NuManifold,
    /// Pushforward of the uniform measure on the tangent ball.
    MuTangentPush,
    /// Pushforward of the e^{-V∘exp}-weighted measure on the tangent ball.
    NuTangentPush,
}

/// A ball measure to discretize: center, radius, weight and family.
#[derive(Clone, Debug)]
pub struct BallMeasureSpec {
    manifold: ModelManifold,
    center: Point,
    radius: f64,
    weight: Potential,
    variant: MeasureVariant,
}

impl BallMeasureSpec {
    pub fn new(
        manifold: ModelManifold,
        center: Point,
        radius: f64,
        weight: Potential,
        variant: MeasureVariant,
    ) -> Result<Self, MeasureError> {
        if !radius.is_finite() || radius <= 0.0 || radius > manifold.ball_bound() {
            return Err(MeasureError::BadRadius);
        }
        Ok(Self { manifold, center, radius, weight, variant })
    }

    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn variant(&self) -> MeasureVariant {
        self.variant
    }
}

/// Finite discretization of a measure: atoms with probability weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPointCloud {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl WeightedPointCloud {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(MeasureError::BadCloud);
        }
        let mut sum = KahanSum::new();
        for w in &weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(MeasureError::BadCloud);
            }
            sum.add(*w);
        }
        if math::abs(sum.value() - 1.0) > 1e-12 {
            return Err(MeasureError::BadCloud);
        }
        Ok(Self { atoms, weights })
    }

    pub fn uniform(atoms: Vec<Point>) -> Result<Self, MeasureError> {
        let n = atoms.len();
        if n == 0 {
            return Err(MeasureError::BadCloud);
        }
        let weights = alloc::vec![1.0 / n as f64; n];
        Self::new(atoms, weights)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Streaming rejection sampler for a ball measure.
pub struct Sampler<'a> {
    spec: &'a BallMeasureSpec,
    frame: Vec<TangentVector>,
    dir: Vec<f64>,
    envelope: f64,
    v_at_center: f64,
    trials: u64,
    accepted: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(spec: &'a BallMeasureSpec) -> Self {
        let m = &spec.manifold;
        let theta_max = match m.kind() {
            Kind::Hyperbolic => {
                math::powf(math::sinhc(spec.radius / m.curvature_scale()), m.dim() as f64 - 1.0)
            }
            _ => 1.0,
        };
        let needs_weight =
            matches!(spec.variant, MeasureVariant::NuManifold | MeasureVariant::NuTangentPush);
        let v_at_center = spec.weight.value(m, &spec.center);
        let envelope = if needs_weight {
            let v_min = spec.weight.min_over_ball(m, &spec.center, spec.radius);
            theta_max * math::exp(v_at_center - v_min)
        } else {
            theta_max
        };
        Sampler {
            spec,
            frame: m.tangent_frame(&spec.center),
            dir: alloc::vec![0.0; m.dim()],
            envelope,
            v_at_center,
            trials: 0,
            accepted: 0,
        }
    }

    /// The variant's unnormalized tangent density at w, relative to e^{-V(x)}.
    fn density(&self, w: &TangentVector, z: &Point) -> f64 {
        let m = &self.spec.manifold;
        let theta = match m.kind() {
            Kind::Euclidean => 1.0,
            Kind::Sphere => math::powf(
                math::sinc(m.norm(w) / m.curvature_scale()),
                m.dim() as f64 - 1.0,
            ),
            Kind::Hyperbolic => math::powf(
                math::sinhc(m.norm(w) / m.curvature_scale()),
                m.dim() as f64 - 1.0,
            ),
        };
        match self.spec.variant {
            MeasureVariant::MuManifold => theta,
            MeasureVariant::MuTangentPush => 1.0,
            MeasureVariant::NuManifold => {
                theta * math::exp(self.v_at_center - self.spec.weight.value(m, z))
            }
            MeasureVariant::NuTangentPush => {
                math::exp(self.v_at_center - self.spec.weight.value(m, z))
            }
        }
    }

    /// Draw one sample: the tangent coordinate and its manifold image.
    pub fn draw(&mut self, rng: &mut SeedStream) -> Result<(TangentVector, Point), MeasureError> {
        let m = &self.spec.manifold;
        loop {
            self.trials += 1;
            if self.trials.is_multiple_of(20_000) && (self.accepted as f64) < 1e-4 * self.trials as f64 {
                return Err(MeasureError::RejectionStall);
            }
            rng.unit_direction(m.dim(), &mut self.dir);
            let r = rng.ball_radius(self.spec.radius, m.dim());
            let coeffs: Vec<f64> = self.dir.iter().map(|d| d * r).collect();
            let w = m.from_frame(&self.frame, &coeffs);
            let z = m.exp_map(&self.spec.center, &w)?;
            let dens = self.density(&w, &z);
            debug_assert!(dens <= self.envelope * (1.0 + 1e-9));
            if rng.uniform() * self.envelope < dens {
                self.accepted += 1;
                return Ok((w, z));
            }
        }
    }
}

/// `count` iid draws from the measure, with uniform weights 1/count.
///
/// Identical (spec, count, seed) give bit-identical clouds.
pub fn sample(
    spec: &BallMeasureSpec,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<WeightedPointCloud, MeasureError> {
    if count == 0 {
        return Err(MeasureError::BadCloud);
    }
    let mut sampler = Sampler::new(spec);
    let mut rng = SeedStream::new(seed, stream);
    let mut atoms = Vec::with_capacity(count);
    for _ in 0..count {
        let (_, z) = sampler.draw(&mut rng)?;
        atoms.push(z);
    }
    WeightedPointCloud::uniform(atoms)
}

/// Volume of the tangent ε-ball (Euclidean n-ball volume).
pub fn tangent_ball_volume(dim: usize, radius: f64) -> f64 {
    // V_n = (2π r²/n)·V_{n-2}; V_0 = 1, V_1 = 2r.
    let mut even = 1.0;
    let mut odd = 2.0 * radius;
    if dim == 0 {
        return even;
    }
    if dim == 1 {
        return odd;
    }
    let mut n = 2;
    loop {
        let next = 2.0 * core::f64::consts::PI * radius * radius / n as f64
            * if n % 2 == 0 { even } else { odd };
        if n == dim {
            return next;
        }
        if n % 2 == 0 {
            even = next;
        } else {
            odd = next;
        }
        n += 1;
    }
}

/// Riemannian volume of the geodesic ε-ball.
pub fn ball_volume(m: &ModelManifold, radius: f64) -> f64 {
    let n = m.dim();
    match m.kind() {
        Kind::Euclidean => tangent_ball_volume(n, radius),
        _ => {
            // vol = A_{n-1} ∫₀^r (scale·sn(ρ/scale))^{n-1} dρ with sn = sin or sinh.
            let area = n as f64 * tangent_ball_volume(n, 1.0);
            let s = m.curvature_scale();
            let (nodes, weights) = gauss_legendre(64);
            let mut acc = KahanSum::new();
            for (x, w) in nodes.iter().zip(&weights) {
                let rho = 0.5 * radius * (x + 1.0);
                let sn = match m.kind() {
                    Kind::Sphere => s * math::sin(rho / s),
                    _ => s * math::sinh(rho / s),
                };
                acc.add(w * math::powi(sn, n as i32 - 1));
            }
            area * 0.5 * radius * acc.value()
        }
    }
}

/// Mutual density dμ̄/dμ at z: pushed-forward uniform tangent measure against
/// uniform volume measure. Equals vol(B_ε)/( |B̃_ε| · θ_x(log_x z) ).
pub fn density_ratio_bar_vs_plain(
    m: &ModelManifold,
    x: &Point,
    radius: f64,
    z: &Point,
) -> Result<f64, MeasureError> {
    if m.distance(x, z) > radius * (1.0 + 1e-12) {
        return Err(MeasureError::OutsideBall);
    }
    let w = m.log_map(x, z)?;
    let theta = m.volume_density(x, &w)?;
    Ok(ball_volume(m, radius) / (tangent_ball_volume(m.dim(), radius) * theta))
}

/// Mutual density dν/dμ at z, exact next to its affine approximation
/// 1 - ⟨∇V(x), exp_x^{-1}(z)⟩.
pub fn density_ratio_nu_vs_mu(
    m: &ModelManifold,
    x: &Point,
    radius: f64,
    z: &Point,
    pot: &Potential,
) -> Result<(f64, f64), MeasureError> {
    if m.distance(x, z) > radius * (1.0 + 1e-12) {
        return Err(MeasureError::OutsideBall);
    }
    let mean = mean_weight_over_ball(m, x, radius, pot)?;
    let exact = math::exp(pot.value(m, x) - pot.value(m, z)) / mean;
    let w = m.log_map(x, z)?;
    let grad = pot.gradient(m, x);
    let affine = 1.0 - m.ambient_inner(grad.components(), w.components());
    Ok((exact, affine))
}

/// Mean of e^{-(V(z)-V(x))} over B_ε(x) with respect to uniform volume.
///
/// Exact polar quadrature in dimension 2; a fixed-seed Monte-Carlo fallback
/// (relative accuracy ~1e-3) covers higher dimensions, which only the
/// validation paths use.
pub fn mean_weight_over_ball(
    m: &ModelManifold,
    x: &Point,
    radius: f64,
    pot: &Potential,
) -> Result<f64, MeasureError> {
    let v0 = pot.value(m, x);
    if m.dim() == 2 {
        let frame = m.tangent_frame(x);
        let (nodes, weights) = gauss_legendre(48);
        let n_phi = 96;
        let mut num = KahanSum::new();
        let mut den = KahanSum::new();
        for (t, wt) in nodes.iter().zip(&weights) {
            let r = 0.5 * radius * (t + 1.0);
            for p in 0..n_phi {
                let phi = 2.0 * core::f64::consts::PI * (p as f64 + 0.5) / n_phi as f64;
                let coeffs = [r * math::cos(phi), r * math::sin(phi)];
                let w = m.from_frame(&frame, &coeffs);
                let theta = m.volume_density(x, &w)?;
                let z = m.exp_map(x, &w)?;
                let jac = wt * r * theta;
                num.add(jac * math::exp(v0 - pot.value(m, &z)));
                den.add(jac);
            }
        }
        Ok(num.value() / den.value())
    } else {
        let spec = BallMeasureSpec::new(
            m.clone(),
            x.clone(),
            radius,
            Potential::Zero,
            MeasureVariant::MuManifold,
        )?;
        let mut sampler = Sampler::new(&spec);
        let mut rng = SeedStream::new(0x6d65_616e, 0);
        let mut acc = KahanSum::new();
        let count = 200_000;
        for _ in 0..count {
            let (_, z) = sampler.draw(&mut rng)?;
            acc.add(math::exp(v0 - pot.value(m, &z)));
        }
        Ok(acc.value() / count as f64)
    }
}

/// Deterministic polar-grid discretization (dimension 2 only): Gauss–Legendre
/// radial nodes × uniform angles, weights ∝ density × Jacobian.
pub fn polar_grid(
    spec: &BallMeasureSpec,
    n_radial: usize,
    n_angular: usize,
) -> Result<WeightedPointCloud, MeasureError> {
    let m = &spec.manifold;
    assert_eq!(m.dim(), 2, "polar grid is a 2-d quadrature");
    let frame = m.tangent_frame(&spec.center);
    let (nodes, gl_weights) = gauss_legendre(n_radial);
    let sampler = Sampler::new(spec);
    let mut atoms = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    let mut total = KahanSum::new();
    for (t, wt) in nodes.iter().zip(&gl_weights) {
        let r = 0.5 * spec.radius * (t + 1.0);
        for p in 0..n_angular {
            let phi = 2.0 * core::f64::consts::PI * (p as f64 + 0.5) / n_angular as f64;
            let coeffs = [r * math::cos(phi), r * math::sin(phi)];
            let w = m.from_frame(&frame, &coeffs);
            let z = m.exp_map(&spec.center, &w)?;
            let dens = sampler.density(&w, &z);
            let weight = wt * r * dens;
            total.add(weight);
            atoms.push(z);
            weights.push(weight);
        }
    }
    let inv = 1.0 / total.value();
    for w in &mut weights {
        *w *= inv;
    }
    WeightedPointCloud::new(atoms, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Kind;

    fn disk_spec(variant: MeasureVariant, pot: Potential, radius: f64) -> BallMeasureSpec {
        let m = ModelManifold::euclidean(2).unwrap();
        let c = m.origin();
        BallMeasureSpec::new(m, c, radius, pot, variant).unwrap()
    }

    #[test]
    fn single_atom_cloud() {
        let spec = disk_spec(MeasureVariant::MuTangentPush, Potential::Zero, 0.5);
        let cloud = sample(&spec, 1, 42, 0).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.weights(), &[1.0]);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = disk_spec(
            MeasureVariant::NuManifold,
            Potential::Quadratic { center: alloc::vec![0.0, 0.0], scale: 1.0 },
            0.4,
        );
        let a = sample(&spec, 200, 9, 1).unwrap();
        let b = sample(&spec, 200, 9, 1).unwrap();
        let c = sample(&spec, 200, 9, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_disk_mean_near_center() {
        let spec = disk_spec(MeasureVariant::MuManifold, Potential::Zero, 0.5);
        let n = 20_000;
        let cloud = sample(&spec, n, 4, 0).unwrap();
        let (mut mx, mut my) = (KahanSum::new(), KahanSum::new());
        for a in cloud.atoms() {
            mx.add(a.coords()[0]);
            my.add(a.coords()[1]);
        }
        // Component std of homogeneous disk is r/2; 3 sigma of the mean.
        let tol = 3.0 * 0.25 / libm::sqrt(n as f64);
        assert!(libm::fabs(mx.value() / n as f64) < tol);
        assert!(libm::fabs(my.value() / n as f64) < tol);
    }

    #[test]
    fn support_stays_in_ball() {
        let m = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.2).unwrap();
        let c = m.origin();
        let spec = BallMeasureSpec::new(
            m.clone(),
            c.clone(),
            0.5,
            Potential::Linear { a: alloc::vec![0.4, 0.2, 0.0] },
            MeasureVariant::NuManifold,
        )
        .unwrap();
        let cloud = sample(&spec, 3000, 17, 5).unwrap();
        for a in cloud.atoms() {
            assert!(m.distance(&c, a) <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn sphere_radial_law_matches_closed_form() {
        // MuManifold on S²: radial density ∝ sin r, so F(r) = (1-cos r)/(1-cos ε).
        let m = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.2).unwrap();
        let c = m.origin();
        let eps = 0.5;
        let spec =
            BallMeasureSpec::new(m.clone(), c.clone(), eps, Potential::Zero, MeasureVariant::MuManifold)
                .unwrap();
        let n = 100_000;
        let cloud = sample(&spec, n, 123, 0).unwrap();
        let mut radii: alloc::vec::Vec<f64> = cloud.atoms().iter().map(|a| m.distance(&c, a)).collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let denom = 1.0 - math::cos(eps);
        let mut dmax: f64 = 0.0;
        for (i, r) in radii.iter().enumerate() {
            let f = (1.0 - math::cos(*r)) / denom;
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            dmax = dmax.max(libm::fabs(f - lo)).max(libm::fabs(f - hi));
        }
        // 95% Kolmogorov-Smirnov band.
        assert!(dmax * libm::sqrt(n as f64) < 1.358, "KS statistic {dmax}");
    }

    #[test]
    fn mean_zero_pushforward_property() {
        // Sample average of ⟨∇V(x), exp_x⁻¹(z)⟩ under MuTangentPush is zero.
        let m = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.2).unwrap();
        let x = m.origin();
        let pot = Potential::Linear { a: alloc::vec![0.8, -0.3, 0.1] };
        let spec = BallMeasureSpec::new(m.clone(), x.clone(), 0.4, pot.clone(), MeasureVariant::MuTangentPush)
            .unwrap();
        let grad = pot.gradient(&m, &x);
        let n = 50_000;
        let mut sampler = Sampler::new(&spec);
        let mut rng = SeedStream::new(31, 7);
        let mut stats = crate::stats::RunningStats::new();
        for _ in 0..n {
            let (w, _) = sampler.draw(&mut rng).unwrap();
            stats.push(m.ambient_inner(grad.components(), w.components()));
        }
        assert!(libm::fabs(stats.mean()) < 3.0 * stats.std_error(), "mean {}", stats.mean());
    }

    #[test]
    fn bar_density_examples() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.origin();
        let z = e.point(&[0.1, -0.2]).unwrap();
        let r = density_ratio_bar_vs_plain(&e, &x, 0.4, &z).unwrap();
        assert!((r - 1.0).abs() < 1e-12);

        // At the center both determinant factors are 1: pure normalizer ratio.
        let s = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.2).unwrap();
        let c = s.origin();
        let r0 = density_ratio_bar_vs_plain(&s, &c, 0.3, &c).unwrap();
        let want = ball_volume(&s, 0.3) / tangent_ball_volume(2, 0.3);
        assert!((r0 - want).abs() < 1e-12);

        let far = s.point(&[libm::sin(0.8), 0.0, libm::cos(0.8)]).unwrap();
        assert_eq!(
            density_ratio_bar_vs_plain(&s, &c, 0.3, &far).unwrap_err(),
            MeasureError::OutsideBall
        );
    }

    #[test]
    fn bar_density_is_one_plus_eps_squared() {
        let s = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.2).unwrap();
        let c = s.origin();
        let frame = s.tangent_frame(&c);
        let mut worst = alloc::vec::Vec::new();
        let eps_grid = [0.4, 0.2, 0.1];
        for &eps in &eps_grid {
            let mut m: f64 = 0.0;
            for i in 0..40 {
                let r = eps * (i as f64 + 0.5) / 40.0;
                let w = s.from_frame(&frame, &[r, 0.0]);
                let z = s.exp_map(&c, &w).unwrap();
                let ratio = density_ratio_bar_vs_plain(&s, &c, eps, &z).unwrap();
                m = m.max(libm::fabs(ratio - 1.0));
            }
            worst.push(m);
        }
        let slope = crate::stats::log_log_slope(&eps_grid, &worst, 0.0).unwrap();
        assert!(slope >= 1.8, "slope {slope}");
    }

    #[test]
    fn nu_density_examples() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.origin();
        let z = e.point(&[0.05, 0.02]).unwrap();
        let (exact, affine) =
            density_ratio_nu_vs_mu(&e, &x, 0.1, &z, &Potential::Zero).unwrap();
        assert!((exact - 1.0).abs() < 1e-12 && (affine - 1.0).abs() < 1e-12);

        // Gradient orthogonal to the displacement: affine term collapses to 1.
        let lin = Potential::Linear { a: alloc::vec![0.0, 1.4] };
        let z2 = e.point(&[0.07, 0.0]).unwrap();
        let (_, affine2) = density_ratio_nu_vs_mu(&e, &x, 0.1, &z2, &lin).unwrap();
        assert!((affine2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nu_density_affine_error_is_second_order() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.origin();
        let pot = Potential::Quadratic { center: alloc::vec![0.0, 0.0], scale: 1.0 };
        let eps_grid = [0.4, 0.2, 0.1];
        let mut worst = alloc::vec::Vec::new();
        for &eps in &eps_grid {
            let mut m: f64 = 0.0;
            for i in 0..30 {
                let t = eps * (i as f64 + 0.5) / 30.0;
                let z = e.point(&[t, -0.3 * t]).unwrap();
                if e.distance(&x, &z) > eps {
                    continue;
                }
                let (exact, affine) = density_ratio_nu_vs_mu(&e, &x, eps, &z, &pot).unwrap();
                m = m.max(libm::fabs(exact - affine));
            }
            worst.push(m);
        }
        let slope = crate::stats::log_log_slope(&eps_grid, &worst, 0.0).unwrap();
        assert!(slope >= 1.8, "slope {slope}");
    }

    #[test]
    fn polar_grid_matches_sampler_moments() {
        let m = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.2).unwrap();
        let c = m.origin();
        let pot = Potential::Linear { a: alloc::vec![0.6, 0.0, 0.0] };
        let spec =
            BallMeasureSpec::new(m.clone(), c.clone(), 0.4, pot, MeasureVariant::NuManifold).unwrap();
        let grid = polar_grid(&spec, 40, 80).unwrap();
        let sum: f64 = grid.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);

        let cloud = sample(&spec, 60_000, 77, 0).unwrap();
        // First embedding coordinate under both discretizations.
        let grid_mean: f64 = grid
            .atoms()
            .iter()
            .zip(grid.weights())
            .map(|(a, w)| a.coords()[0] * w)
            .sum();
        let mut stats = crate::stats::RunningStats::new();
        for a in cloud.atoms() {
            stats.push(a.coords()[0]);
        }
        assert!(
            libm::fabs(stats.mean() - grid_mean) < 4.0 * stats.std_error(),
            "grid {} sampler {}",
            grid_mean,
            stats.mean()
        );
    }

    #[test]
    fn hyperbolic_envelope_accepts() {
        let h = ModelManifold::hyperbolic(2, 1.0).unwrap();
        let x = h.origin();
        assert_eq!(h.kind(), Kind::Hyperbolic);
        let spec = BallMeasureSpec::new(
            h,
            x,
            0.6,
            Potential::Linear { a: alloc::vec![0.2, 0.5, -0.3] },
            MeasureVariant::NuManifold,
        )
        .unwrap();
        let cloud = sample(&spec, 2000, 3, 0).unwrap();
        assert_eq!(cloud.len(), 2000);
    }
}

//! Coarse curvature machinery: the transport vector, the approximate
//! transport map between weighted balls, the signed projection distance used
//! as the 1-Lipschitz dual witness, and the estimators built from them.
//!
//! A [`CurvatureQuery`] fixes (x₀, v, δ, ε, V) with y = exp_{x₀}(δv) and
//! precomputes the parallel-gradient differences that drive the maps. Two
//! estimates of W₁(ν_{x₀}^ε, ν_y^ε) are produced:
//!
//! - `bound_sandwich`: Monte-Carlo (or exact quadrature in dimension 2)
//!   integrals of d(z, Tz) and f(Tz) - f(z) over ν̄_{x₀}^ε — an upper and a
//!   lower bound with no transport-solver noise;
//! - `estimate_coarse_curvature`: discretize both ball measures and run the
//!   exact W₁ solver, cross-checked against the sandwich.
//!
//! The scaled readout 2(n+2)/ε²·(1 - W₁/δ) converges to Ric(v,v) + 2 Hess
//! V(v,v), which `ModelManifold::generalized_ricci` provides in closed form.

use alloc::vec::Vec;

use crate::manifold::{GeometryError, Kind, ModelManifold, Point, Potential, TangentVector};
use crate::math;
use crate::measure::{sample, BallMeasureSpec, MeasureError, MeasureVariant, Sampler};
use crate::ot::{solve_w1, CostMatrix, OtError};
use crate::rng::{stream_id, SeedStream};
use crate::stats::{gauss_legendre, KahanSum, RunningStats};

#[derive(Clone, Debug, PartialEq)]
pub enum CoarseError {
    /// Tangent argument outside the admissible ball.
    NotInBall,
    /// Manifold point outside the supporting ball.
    OutsideBall,
    /// Direction vector must be unit length.
    NotUnit,
    /// δ, ε outside the allowed ball bound.
    OutOfRange,
    Geometry(GeometryError),
    Measure(MeasureError),
    Transport(OtError),
}

impl From<GeometryError> for CoarseError {
    fn from(e: GeometryError) -> Self {
        CoarseError::Geometry(e)
    }
}

impl From<MeasureError> for CoarseError {
    fn from(e: MeasureError) -> Self {
        CoarseError::Measure(e)
    }
}

impl From<OtError> for CoarseError {
    fn from(e: OtError) -> Self {
        CoarseError::Transport(e)
    }
}

impl core::fmt::Display for CoarseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CoarseError::NotInBall => write!(f, "tangent vector outside the admissible ball"),
            CoarseError::OutsideBall => write!(f, "point outside the supporting ball"),
            CoarseError::NotUnit => write!(f, "direction must be a unit vector"),
            CoarseError::OutOfRange => write!(f, "delta/epsilon outside the allowed ball bound"),
            CoarseError::Geometry(e) => write!(f, "geometry: {e}"),
            CoarseError::Measure(e) => write!(f, "measure: {e}"),
            CoarseError::Transport(e) => write!(f, "transport: {e}"),
        }
    }
}

/// A coarse-curvature probe at x₀ in direction v at scales (δ, ε).
#[derive(Clone, Debug)]
pub struct CurvatureQuery {
    manifold: ModelManifold,
    x0: Point,
    v: TangentVector,
    delta: f64,
    epsilon: f64,
    potential: Potential,
    y: Point,
    /// ∥₁⁻¹∇V(y) - ∇V(x₀), a tangent vector at x₀.
    grad_diff_x0: TangentVector,
    /// ∇V(y) - ∥₁∇V(x₀), a tangent vector at y.
    grad_diff_y: TangentVector,
}

/// Monte-Carlo sandwich for W₁: mean transport distance from above, mean
/// Lipschitz-witness increment from below.
#[derive(Clone, Copy, Debug)]
pub struct SandwichBounds {
    pub upper: f64,
    pub lower: f64,
    pub se_upper: f64,
    pub se_lower: f64,
    pub samples: usize,
}

impl SandwichBounds {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }
}

/// Full curvature estimate: solver-based W₁ statistics plus the sandwich.
#[derive(Clone, Copy, Debug)]
pub struct CoarseEstimate {
    /// Mean W₁ over repeats (the estimator ŵ₁).
    pub w1_hat: f64,
    /// Sample standard deviation of W₁ across repeats.
    pub w1_std: f64,
    /// Standard error of the mean W₁.
    pub std_error: f64,
    /// κ̂ = 1 - ŵ₁/δ.
    pub kappa_hat: f64,
    /// 2(n+2)/ε² · κ̂.
    pub scaled_kappa: f64,
    pub bounds: SandwichBounds,
}

impl CurvatureQuery {
    pub fn new(
        manifold: ModelManifold,
        x0: Point,
        v: TangentVector,
        delta: f64,
        epsilon: f64,
        potential: Potential,
    ) -> Result<Self, CoarseError> {
        if v.base() != &x0 {
            return Err(CoarseError::Geometry(GeometryError::BaseMismatch));
        }
        if math::abs(manifold.norm(&v) - 1.0) > 1e-10 {
            return Err(CoarseError::NotUnit);
        }
        if !(delta > 0.0 && epsilon > 0.0) || epsilon + delta >= manifold.ball_bound() {
            return Err(CoarseError::OutOfRange);
        }
        let y = manifold.exp_map(&x0, &manifold.scale_vec(&v, delta))?;
        let grad_x0 = potential.gradient(&manifold, &x0);
        let grad_y = potential.gradient(&manifold, &y);
        let pulled_back = manifold.parallel_transport(&y, &x0, &grad_y)?;
        let grad_diff_x0 = manifold.combine(&pulled_back, 1.0, &grad_x0, -1.0)?;
        let pushed = manifold.parallel_transport(&x0, &y, &grad_x0)?;
        let grad_diff_y = manifold.combine(&grad_y, 1.0, &pushed, -1.0)?;
        Ok(Self { manifold, x0, v, delta, epsilon, potential, y, grad_diff_x0, grad_diff_y })
    }

    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn x0(&self) -> &Point {
        &self.x0
    }

    pub fn direction(&self) -> &TangentVector {
        &self.v
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// y = exp_{x₀}(δv).
    pub fn y(&self) -> &Point {
        &self.y
    }

    /// Closed-form Ric(v,v) + 2 Hess V(v,v) at x₀: the estimation target.
    pub fn oracle(&self) -> Result<f64, CoarseError> {
        Ok(self.manifold.generalized_ricci(&self.x0, &self.v, &self.potential)?)
    }

    /// The transport vector w' = w - (ε/2)(1-‖w‖²)(∥₁⁻¹∇V(y) - ∇V(x₀)),
    /// stated for unit-ball tangent coordinates ‖w‖ ≤ 1.
    ///
    /// The ε-ball map [`Self::tilde_t`] is its rescaling: T̃(εw) = ε∥₁w'.
    pub fn transport_vector(&self, w: &TangentVector) -> Result<TangentVector, CoarseError> {
        if w.base() != &self.x0 {
            return Err(CoarseError::Geometry(GeometryError::BaseMismatch));
        }
        let n2 = self.manifold.ambient_inner(w.components(), w.components());
        if n2 > 1.0 + 1e-12 {
            return Err(CoarseError::NotInBall);
        }
        let factor = -0.5 * self.epsilon * (1.0 - n2);
        Ok(self.manifold.combine(w, 1.0, &self.grad_diff_x0, factor)?)
    }

    /// Tangent transport map T̃(w) = ∥₁w - ½(ε²-‖w‖²)(∇V(y) - ∥₁∇V(x₀)) from
    /// the ε-ball of T_{x₀}M to the ε-ball of T_yM.
    pub fn tilde_t(&self, w: &TangentVector) -> Result<TangentVector, CoarseError> {
        if w.base() != &self.x0 {
            return Err(CoarseError::Geometry(GeometryError::BaseMismatch));
        }
        let n2 = self.manifold.ambient_inner(w.components(), w.components());
        if n2 > self.epsilon * self.epsilon * (1.0 + 1e-12) {
            return Err(CoarseError::NotInBall);
        }
        let moved = self.manifold.parallel_transport(&self.x0, &self.y, w)?;
        let factor = -0.5 * (self.epsilon * self.epsilon - n2);
        let out = self.manifold.combine(&moved, 1.0, &self.grad_diff_y, factor)?;
        debug_assert!(self.manifold.norm(&out) <= self.epsilon * (1.0 + 1e-9));
        Ok(out)
    }

    /// Closed-form inverse of [`Self::tilde_t`].
    ///
    /// Decompose ∥₁⁻¹w̃ = u + s·e along the unit gradient difference e; the
    /// radial coordinate solves r - ½(ε²-‖u‖²-r²)α = s. Below α = 1e-14 the
    /// map is plain reverse transport.
    pub fn tilde_t_inverse(&self, wt: &TangentVector) -> Result<TangentVector, CoarseError> {
        if wt.base() != &self.y {
            return Err(CoarseError::Geometry(GeometryError::BaseMismatch));
        }
        let n2 = self.manifold.ambient_inner(wt.components(), wt.components());
        let eps2 = self.epsilon * self.epsilon;
        if n2 > eps2 * (1.0 + 1e-12) {
            return Err(CoarseError::NotInBall);
        }
        let back = self.manifold.parallel_transport(&self.y, &self.x0, wt)?;
        let alpha = self.manifold.norm(&self.grad_diff_x0);
        if alpha < 1e-14 {
            return Ok(back);
        }
        let e = self.manifold.scale_vec(&self.grad_diff_x0, 1.0 / alpha);
        let s = self.manifold.ambient_inner(back.components(), e.components());
        let u = self.manifold.combine(&back, 1.0, &e, -s)?;
        let u2 = self.manifold.ambient_inner(u.components(), u.components());
        let x = alpha * alpha * (eps2 - u2) + 2.0 * alpha * s;
        let r = (alpha * (eps2 - u2) + 2.0 * s) / (1.0 + math::sqrt(1.0 + x));
        Ok(self.manifold.combine(&u, 1.0, &e, r)?)
    }

    /// Finite-difference Jacobian determinant of T̃ at w next to the closed
    /// form 1 + ⟨∥₁⁻¹∇V(y) - ∇V(x₀), w⟩.
    ///
    /// Central differences with step 1e-5·ε in orthonormal frames at both
    /// ends; T̃ is quadratic in w, so the difference is pure roundoff.
    pub fn jacobian_check(&self, w: &TangentVector) -> Result<(f64, f64), CoarseError> {
        if w.base() != &self.x0 {
            return Err(CoarseError::Geometry(GeometryError::BaseMismatch));
        }
        let n = self.manifold.dim();
        let norm = self.manifold.norm(w);
        if norm >= self.epsilon * (1.0 - 1e-4) {
            return Err(CoarseError::NotInBall);
        }
        let frame_x = self.manifold.tangent_frame(&self.x0);
        let mut frame_y = Vec::with_capacity(n);
        for e in &frame_x {
            frame_y.push(self.manifold.parallel_transport(&self.x0, &self.y, e)?);
        }
        let h = 1e-5 * self.epsilon;
        let mut mat = alloc::vec![0.0; n * n];
        for (b, eb) in frame_x.iter().enumerate() {
            let wp = self.manifold.combine(w, 1.0, eb, h)?;
            let wm = self.manifold.combine(w, 1.0, eb, -h)?;
            let tp = self.tilde_t(&wp)?;
            let tm = self.tilde_t(&wm)?;
            for (a, ea) in frame_y.iter().enumerate() {
                let d = (self.manifold.ambient_inner(tp.components(), ea.components())
                    - self.manifold.ambient_inner(tm.components(), ea.components()))
                    / (2.0 * h);
                mat[a * n + b] = d;
            }
        }
        let numeric = det_in_place(&mut mat, n);
        let formula =
            1.0 + self.manifold.ambient_inner(self.grad_diff_x0.components(), w.components());
        Ok((numeric, formula))
    }

    /// The manifold transport map Tz = exp_y(T̃ exp_{x₀}⁻¹ z).
    pub fn map_t(&self, z: &Point) -> Result<Point, CoarseError> {
        let w = self.manifold.log_map(&self.x0, z)?;
        if self.manifold.norm(&w) > self.epsilon * (1.0 + 1e-9) {
            return Err(CoarseError::OutsideBall);
        }
        let wt = self.tilde_t(&w)?;
        Ok(self.manifold.exp_map(&self.y, &wt)?)
    }

    /// Signed geodesic distance to the hypersurface E = exp_{x₀}(v^⊥); the
    /// 1-Lipschitz witness for the W₁ lower bound.
    ///
    /// Closed forms per model: ⟨z-x₀, v⟩ (Euclidean), R·asin(⟨z, v⟩/R)
    /// (sphere), s·asinh(⟨z, v⟩_M/s) (hyperboloid).
    pub fn signed_projection_distance(&self, z: &Point) -> Result<f64, CoarseError> {
        let m = &self.manifold;
        match m.kind() {
            Kind::Euclidean => {
                let d: Vec<f64> =
                    z.coords().iter().zip(self.x0.coords()).map(|(a, b)| a - b).collect();
                Ok(m.ambient_inner(&d, self.v.components()))
            }
            Kind::Sphere => {
                let r = m.curvature_scale();
                let s = (m.ambient_inner(z.coords(), self.v.components()) / r).clamp(-1.0, 1.0);
                // The nearest-point projection degenerates at the poles ±Rv,
                // but the signed distance extends continuously to ±πR/2.
                Ok(r * math::asin(s))
            }
            Kind::Hyperbolic => {
                let sc = m.curvature_scale();
                let s = m.ambient_inner(z.coords(), self.v.components()) / sc;
                Ok(sc * math::asinh(s))
            }
        }
    }

    /// Monte-Carlo sandwich over z ~ ν̄_{x₀}^ε: the mean of d(z, Tz) bounds
    /// W₁ from above, the mean of f(Tz) - f(z) from below.
    pub fn bound_sandwich(&self, samples: usize, seed: u64) -> Result<SandwichBounds, CoarseError> {
        assert!(samples >= 100, "at least 100 samples required");
        let spec = BallMeasureSpec::new(
            self.manifold.clone(),
            self.x0.clone(),
            self.epsilon,
            self.potential.clone(),
            MeasureVariant::NuTangentPush,
        )?;
        let mut sampler = Sampler::new(&spec);
        let mut rng = SeedStream::new(seed, stream_id(0x5a, 0, 0));
        let mut upper = RunningStats::new();
        let mut lower = RunningStats::new();
        for _ in 0..samples {
            let (w, z) = sampler.draw(&mut rng)?;
            let wt = self.tilde_t(&w)?;
            let tz = self.manifold.exp_map(&self.y, &wt)?;
            upper.push(self.manifold.distance(&z, &tz));
            lower.push(self.signed_projection_distance(&tz)? - self.signed_projection_distance(&z)?);
        }
        Ok(SandwichBounds {
            upper: upper.mean(),
            lower: lower.mean(),
            se_upper: upper.std_error(),
            se_lower: lower.std_error(),
            samples,
        })
    }

    /// Deterministic sandwich by polar quadrature (dimension 2): the same two
    /// integrals with no Monte-Carlo noise, accurate to roughly 1e-12.
    pub fn bound_sandwich_quadrature(
        &self,
        n_radial: usize,
        n_angular: usize,
    ) -> Result<(f64, f64), CoarseError> {
        assert_eq!(self.manifold.dim(), 2, "quadrature sandwich is 2-d only");
        let m = &self.manifold;
        let frame = m.tangent_frame(&self.x0);
        let (nodes, gl_w) = gauss_legendre(n_radial);
        let v0 = self.potential.value(m, &self.x0);
        let mut up = KahanSum::new();
        let mut lo = KahanSum::new();
        let mut den = KahanSum::new();
        for (t, wt) in nodes.iter().zip(&gl_w) {
            let r = 0.5 * self.epsilon * (t + 1.0);
            for p in 0..n_angular {
                let phi = 2.0 * core::f64::consts::PI * (p as f64 + 0.5) / n_angular as f64;
                let coeffs = [r * math::cos(phi), r * math::sin(phi)];
                let w = m.from_frame(&frame, &coeffs);
                let z = m.exp_map(&self.x0, &w)?;
                let dens = wt * r * math::exp(v0 - self.potential.value(m, &z));
                let wt2 = self.tilde_t(&w)?;
                let tz = m.exp_map(&self.y, &wt2)?;
                up.add(dens * m.distance(&z, &tz));
                lo.add(dens * (self.signed_projection_distance(&tz)? - self.signed_projection_distance(&z)?));
                den.add(dens);
            }
        }
        Ok((up.value() / den.value(), lo.value() / den.value()))
    }

    /// Discretize ν_{x₀}^ε and ν_y^ε, solve exact W₁ per repeat, and report
    /// the scaled curvature together with the sandwich cross-check.
    pub fn estimate_coarse_curvature(
        &self,
        cloud_size: usize,
        repeats: usize,
        seed: u64,
    ) -> Result<CoarseEstimate, CoarseError> {
        assert!(cloud_size >= 50, "cloud_size >= 50 required");
        assert!(repeats >= 1, "repeats >= 1 required");
        let spec_x = BallMeasureSpec::new(
            self.manifold.clone(),
            self.x0.clone(),
            self.epsilon,
            self.potential.clone(),
            MeasureVariant::NuManifold,
        )?;
        let spec_y = BallMeasureSpec::new(
            self.manifold.clone(),
            self.y.clone(),
            self.epsilon,
            self.potential.clone(),
            MeasureVariant::NuManifold,
        )?;
        let mut stats = RunningStats::new();
        for rep in 0..repeats {
            let cloud_x = sample(&spec_x, cloud_size, seed, stream_id(0x57, rep as u64, 0))?;
            let cloud_y = sample(&spec_y, cloud_size, seed, stream_id(0x57, rep as u64, 1))?;
            let cost = CostMatrix::from_clouds(&self.manifold, &cloud_x, &cloud_y)?;
            let plan = solve_w1(cloud_x.weights(), cloud_y.weights(), &cost)?;
            stats.push(plan.cost);
        }
        let sandwich_samples = (cloud_size * repeats).clamp(10_000, 1_000_000);
        let bounds = self.bound_sandwich(sandwich_samples, seed ^ 0x53414e44)?;
        let w1_hat = stats.mean();
        let kappa_hat = 1.0 - w1_hat / self.delta;
        Ok(CoarseEstimate {
            w1_hat,
            w1_std: stats.std_dev(),
            std_error: stats.std_error(),
            kappa_hat,
            scaled_kappa: self.scale_kappa(kappa_hat),
            bounds,
        })
    }

    /// 2(n+2)/ε² · κ, the scaling that exposes the generalized Ricci tensor.
    pub fn scale_kappa(&self, kappa: f64) -> f64 {
        2.0 * (self.manifold.dim() as f64 + 2.0) / (self.epsilon * self.epsilon) * kappa
    }

    /// Scaled curvature readout of a W₁ value: 2(n+2)/ε²·(1 - w1/δ).
    pub fn scaled_kappa_of_w1(&self, w1: f64) -> f64 {
        self.scale_kappa(1.0 - w1 / self.delta)
    }
}

/// Determinant by Gaussian elimination with partial pivoting (small n).
fn det_in_place(mat: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if math::abs(mat[r * n + col]) > math::abs(mat[piv * n + col]) {
                piv = r;
            }
        }
        if mat[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                mat.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = mat[col * n + col];
        det *= d;
        for r in col + 1..n {
            let f = mat[r * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    mat[r * n + j] -= f * mat[col * n + j];
                }
            }
        }
    }
    det
}

//! Closed-form Riemannian geometry for the three constant-curvature model
//! families, plus smooth weight potentials.
//!
//! Points live in an ambient embedding: ℝⁿ for Euclidean space, the radius-R
//! sphere in ℝ^{n+1}, and the upper hyperboloid sheet ⟨z,z⟩_M = -s² in
//! Minkowski space ℝ^{n+1}. Exponential map, logarithm, distance and parallel
//! transport all have stable closed forms in these embeddings, with no chart
//! boundaries to handle.
//!
//! Tangent vectors carry their base point; mixing a vector with the wrong
//! base point is a hard error, never a silent re-basing.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::math;
use crate::rng::SeedStream;

/// Errors from geometric operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeometryError {
    /// A tangent vector was used at a point other than its base.
    BaseMismatch,
    /// An argument left the valid range (injectivity radius, ball bound, ...).
    OutOfRange,
    /// The two vectors span no 2-plane.
    DegeneratePlane,
    /// A unit vector was required.
    NotUnit,
    /// Coordinates do not satisfy the embedding constraint.
    InvalidPoint,
    /// Components are not tangent at the base point.
    InvalidTangent,
    /// Bad manifold parameters (dim < 2, nonpositive scale, ...).
    InvalidManifold,
    /// A supplied derivative disagrees with finite differences of the value.
    DerivativeMismatch,
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            GeometryError::BaseMismatch => "tangent vector based at a different point",
            GeometryError::OutOfRange => "argument outside the allowed range",
            GeometryError::DegeneratePlane => "vectors do not span a 2-plane",
            GeometryError::NotUnit => "vector is not unit length",
            GeometryError::InvalidPoint => "coordinates violate the embedding constraint",
            GeometryError::InvalidTangent => "components are not tangent at the base point",
            GeometryError::InvalidManifold => "invalid manifold parameters",
            GeometryError::DerivativeMismatch => "analytic derivative disagrees with finite differences",
        };
        write!(f, "{msg}")
    }
}

/// The three constant-curvature model families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Euclidean,
    Sphere,
    Hyperbolic,
}

/// A point in the ambient embedding of a model manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A tangent vector, expressed in ambient coordinates at its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: Point,
    comps: Vec<f64>,
}

impl TangentVector {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }
}

/// A constant-curvature model manifold.
///
/// `curvature_scale` is the sphere radius R (sectional curvature 1/R²) or the
/// hyperbolic scale s (sectional curvature -1/s²); it is ignored for the
/// Euclidean family. `ball_safety` is the fraction of the injectivity radius
/// within which ball operations are allowed; the default 0.1 is conservative
/// and can be widened per instance.
#[derive(Clone, Debug)]
pub struct ModelManifold {
    kind: Kind,
    dim: usize,
    scale: f64,
    ball_safety: f64,
}

impl ModelManifold {
    pub fn new(kind: Kind, dim: usize, curvature_scale: f64) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::InvalidManifold);
        }
        if kind != Kind::Euclidean && !(curvature_scale > 0.0 && curvature_scale.is_finite()) {
            return Err(GeometryError::InvalidManifold);
        }
        Ok(Self { kind, dim, scale: curvature_scale, ball_safety: 0.1 })
    }

    pub fn euclidean(dim: usize) -> Result<Self, GeometryError> {
        Self::new(Kind::Euclidean, dim, 1.0)
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self, GeometryError> {
        Self::new(Kind::Sphere, dim, radius)
    }

    pub fn hyperbolic(dim: usize, scale: f64) -> Result<Self, GeometryError> {
        Self::new(Kind::Hyperbolic, dim, scale)
    }

    /// Widen or narrow the fraction of the injectivity radius within which
    /// ball-measure operations are accepted.
    pub fn with_ball_safety(mut self, factor: f64) -> Result<Self, GeometryError> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(GeometryError::InvalidManifold);
        }
        self.ball_safety = factor;
        Ok(self)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn curvature_scale(&self) -> f64 {
        self.scale
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            Kind::Euclidean => self.dim,
            _ => self.dim + 1,
        }
    }

    /// Constant sectional curvature of the model.
    pub fn curvature_constant(&self) -> f64 {
        match self.kind {
            Kind::Euclidean => 0.0,
            Kind::Sphere => 1.0 / (self.scale * self.scale),
            Kind::Hyperbolic => -1.0 / (self.scale * self.scale),
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            Kind::Sphere => core::f64::consts::PI * self.scale,
            _ => f64::INFINITY,
        }
    }

    /// Largest radius accepted for ball measures and curvature queries.
    pub fn ball_bound(&self) -> f64 {
        self.ball_safety * self.injectivity_radius()
    }

    /// Ambient pairing: the Euclidean dot product, or the Minkowski pairing
    /// -u₀w₀ + Σᵢ uᵢwᵢ for the hyperboloid model.
    pub fn ambient_inner(&self, u: &[f64], w: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), w.len());
        match self.kind {
            Kind::Hyperbolic => {
                let mut s = -u[0] * w[0];
                for i in 1..u.len() {
                    s += u[i] * w[i];
                }
                s
            }
            _ => {
                let mut s = 0.0;
                for i in 0..u.len() {
                    s += u[i] * w[i];
                }
                s
            }
        }
    }

    /// Riemannian inner product of two tangent vectors at the same base.
    pub fn inner(&self, v: &TangentVector, w: &TangentVector) -> Result<f64, GeometryError> {
        if v.base != w.base {
            return Err(GeometryError::BaseMismatch);
        }
        Ok(self.ambient_inner(&v.comps, &w.comps))
    }

    pub fn norm(&self, v: &TangentVector) -> f64 {
        let q = self.ambient_inner(&v.comps, &v.comps);
        math::sqrt(if q > 0.0 { q } else { 0.0 })
    }

    /// Validate coordinates against the embedding constraint and wrap them.
    pub fn point(&self, coords: &[f64]) -> Result<Point, GeometryError> {
        if coords.len() != self.ambient_dim() || coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidPoint);
        }
        match self.kind {
            Kind::Euclidean => {}
            Kind::Sphere => {
                let n2 = self.ambient_inner(coords, coords);
                let r2 = self.scale * self.scale;
                if math::abs(n2 - r2) > 1e-12 * r2.max(1.0) {
                    return Err(GeometryError::InvalidPoint);
                }
            }
            Kind::Hyperbolic => {
                let q = self.ambient_inner(coords, coords);
                let s2 = self.scale * self.scale;
                if math::abs(q + s2) > 1e-12 * s2.max(1.0) || coords[0] <= 0.0 {
                    return Err(GeometryError::InvalidPoint);
                }
            }
        }
        Ok(Point { coords: coords.to_vec() })
    }

    /// Validate tangency and wrap components as a tangent vector at `base`.
    pub fn tangent(&self, base: &Point, comps: &[f64]) -> Result<TangentVector, GeometryError> {
        if comps.len() != self.ambient_dim() || comps.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidTangent);
        }
        let norm = {
            let q = self.ambient_inner(comps, comps);
            math::sqrt(math::abs(q))
        };
        let residual = match self.kind {
            Kind::Euclidean => 0.0,
            _ => math::abs(self.ambient_inner(comps, &base.coords)) / self.scale,
        };
        if residual > 1e-12 * norm.max(1e-30) && residual > 1e-15 {
            return Err(GeometryError::InvalidTangent);
        }
        Ok(TangentVector { base: base.clone(), comps: comps.to_vec() })
    }

    /// Project ambient components onto the tangent space at `base` and wrap.
    pub fn project_tangent(&self, base: &Point, comps: &[f64]) -> TangentVector {
        let mut c = comps.to_vec();
        self.project_tangent_in_place(base, &mut c);
        TangentVector { base: base.clone(), comps: c }
    }

    fn project_tangent_in_place(&self, base: &Point, comps: &mut [f64]) {
        match self.kind {
            Kind::Euclidean => {}
            Kind::Sphere => {
                let t = self.ambient_inner(comps, &base.coords) / (self.scale * self.scale);
                for (c, x) in comps.iter_mut().zip(&base.coords) {
                    *c -= t * x;
                }
            }
            Kind::Hyperbolic => {
                let t = self.ambient_inner(comps, &base.coords) / (self.scale * self.scale);
                for (c, x) in comps.iter_mut().zip(&base.coords) {
                    *c += t * x;
                }
            }
        }
    }

    /// A canonical base point: the origin, the north pole, or the hyperboloid
    /// apex.
    pub fn origin(&self) -> Point {
        let ad = self.ambient_dim();
        let mut c = alloc::vec![0.0; ad];
        match self.kind {
            Kind::Euclidean => {}
            Kind::Sphere => c[ad - 1] = self.scale,
            Kind::Hyperbolic => c[0] = self.scale,
        }
        Point { coords: c }
    }

    /// Geodesic endpoint exp_x(v).
    pub fn exp_map(&self, x: &Point, v: &TangentVector) -> Result<Point, GeometryError> {
        if v.base != *x {
            return Err(GeometryError::BaseMismatch);
        }
        let r = self.norm(v);
        match self.kind {
            Kind::Euclidean => {
                let coords = x.coords.iter().zip(&v.comps).map(|(a, b)| a + b).collect();
                Ok(Point { coords })
            }
            Kind::Sphere => {
                if r >= self.injectivity_radius() {
                    return Err(GeometryError::OutOfRange);
                }
                if r == 0.0 {
                    return Ok(x.clone());
                }
                let rho = r / self.scale;
                let (c, s) = (math::cos(rho), math::sin(rho));
                let mut coords: Vec<f64> = x
                    .coords
                    .iter()
                    .zip(&v.comps)
                    .map(|(a, b)| c * a + s * (self.scale / r) * b)
                    .collect();
                let n = math::sqrt(self.ambient_inner(&coords, &coords));
                let f = self.scale / n;
                for z in &mut coords {
                    *z *= f;
                }
                Ok(Point { coords })
            }
            Kind::Hyperbolic => {
                if r == 0.0 {
                    return Ok(x.clone());
                }
                let rho = r / self.scale;
                let (c, s) = (math::cosh(rho), math::sinh(rho));
                let mut coords: Vec<f64> = x
                    .coords
                    .iter()
                    .zip(&v.comps)
                    .map(|(a, b)| c * a + s * (self.scale / r) * b)
                    .collect();
                let q = -self.ambient_inner(&coords, &coords);
                let f = self.scale / math::sqrt(q);
                for z in &mut coords {
                    *z *= f;
                }
                Ok(Point { coords })
            }
        }
    }

    /// Inverse of the exponential map; `exp_map(x, log_map(x, y)) == y` and
    /// `‖log_map(x, y)‖ == distance(x, y)` within roundoff.
    pub fn log_map(&self, x: &Point, y: &Point) -> Result<TangentVector, GeometryError> {
        match self.kind {
            Kind::Euclidean => {
                let comps = y.coords.iter().zip(&x.coords).map(|(a, b)| a - b).collect();
                Ok(TangentVector { base: x.clone(), comps })
            }
            Kind::Sphere => {
                let r2 = self.scale * self.scale;
                let c = (self.ambient_inner(&x.coords, &y.coords) / r2).clamp(-1.0, 1.0);
                let theta = math::acos(c);
                if theta >= core::f64::consts::PI * (1.0 - 1e-9) {
                    return Err(GeometryError::OutOfRange);
                }
                if theta == 0.0 {
                    return Ok(TangentVector { base: x.clone(), comps: alloc::vec![0.0; self.ambient_dim()] });
                }
                let mut u: Vec<f64> = y.coords.iter().zip(&x.coords).map(|(a, b)| a - c * b).collect();
                let un = math::sqrt(self.ambient_inner(&u, &u));
                let f = self.scale * theta / un;
                for z in &mut u {
                    *z *= f;
                }
                Ok(TangentVector { base: x.clone(), comps: u })
            }
            Kind::Hyperbolic => {
                let s2 = self.scale * self.scale;
                let c = (-self.ambient_inner(&x.coords, &y.coords) / s2).max(1.0);
                let theta = math::acosh(c);
                if theta == 0.0 {
                    return Ok(TangentVector { base: x.clone(), comps: alloc::vec![0.0; self.ambient_dim()] });
                }
                let mut u: Vec<f64> = y.coords.iter().zip(&x.coords).map(|(a, b)| a - c * b).collect();
                let un = math::sqrt(self.ambient_inner(&u, &u));
                let f = self.scale * theta / un;
                for z in &mut u {
                    *z *= f;
                }
                Ok(TangentVector { base: x.clone(), comps: u })
            }
        }
    }

    /// Geodesic distance.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match self.kind {
            Kind::Euclidean => {
                let mut s = 0.0;
                for (a, b) in x.coords.iter().zip(&y.coords) {
                    s += (a - b) * (a - b);
                }
                math::sqrt(s)
            }
            Kind::Sphere => {
                let r2 = self.scale * self.scale;
                let c = (self.ambient_inner(&x.coords, &y.coords) / r2).clamp(-1.0, 1.0);
                self.scale * math::acos(c)
            }
            Kind::Hyperbolic => {
                let s2 = self.scale * self.scale;
                let c = (-self.ambient_inner(&x.coords, &y.coords) / s2).max(1.0);
                self.scale * math::acosh(c)
            }
        }
    }

    /// Parallel transport of `v` along the geodesic from `x` to `y`.
    ///
    /// The component along the geodesic follows the geodesic tangent; the
    /// orthogonal complement of span(x, y) is fixed. This is exact for the
    /// constant-curvature models.
    pub fn parallel_transport(
        &self,
        x: &Point,
        y: &Point,
        v: &TangentVector,
    ) -> Result<TangentVector, GeometryError> {
        if v.base != *x {
            return Err(GeometryError::BaseMismatch);
        }
        if x == y {
            return Ok(TangentVector { base: y.clone(), comps: v.comps.clone() });
        }
        if self.kind == Kind::Euclidean {
            return Ok(TangentVector { base: y.clone(), comps: v.comps.clone() });
        }
        let lx = self.log_map(x, y)?;
        let d = self.norm(&lx);
        if d == 0.0 {
            return Ok(TangentVector { base: y.clone(), comps: v.comps.clone() });
        }
        let ly = self.log_map(y, x)?;
        let alpha = self.ambient_inner(&v.comps, &lx.comps) / d;
        let mut comps: Vec<f64> = (0..self.ambient_dim())
            .map(|i| v.comps[i] - (alpha / d) * lx.comps[i] - (alpha / d) * ly.comps[i])
            .collect();
        self.project_tangent_in_place(y, &mut comps);
        Ok(TangentVector { base: y.clone(), comps })
    }

    /// Sectional curvature of the plane spanned by `v` and `w`.
    pub fn sectional_curvature(
        &self,
        x: &Point,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<f64, GeometryError> {
        if v.base != *x || w.base != *x {
            return Err(GeometryError::BaseMismatch);
        }
        let vv = self.ambient_inner(&v.comps, &v.comps);
        let ww = self.ambient_inner(&w.comps, &w.comps);
        let vw = self.ambient_inner(&v.comps, &w.comps);
        if vv * ww - vw * vw < 1e-14 {
            return Err(GeometryError::DegeneratePlane);
        }
        Ok(self.curvature_constant())
    }

    /// Ricci curvature Ric(v, v) for a unit vector v: (n-1)·K on these models.
    pub fn ricci(&self, x: &Point, v: &TangentVector) -> Result<f64, GeometryError> {
        if v.base != *x {
            return Err(GeometryError::BaseMismatch);
        }
        if math::abs(self.norm(v) - 1.0) > 1e-10 {
            return Err(GeometryError::NotUnit);
        }
        Ok((self.dim as f64 - 1.0) * self.curvature_constant())
    }

    /// Ric(v,v) + 2 Hess V(v,v), the curvature of the weighted manifold.
    ///
    /// This is the ground-truth oracle every curvature estimate is compared
    /// against.
    pub fn generalized_ricci(
        &self,
        x: &Point,
        v: &TangentVector,
        pot: &Potential,
    ) -> Result<f64, GeometryError> {
        Ok(self.ricci(x, v)? + 2.0 * pot.hessian(self, x, v)?)
    }

    /// Density of vol∘exp_x with respect to Lebesgue measure on T_xM at `w`.
    pub fn volume_density(&self, x: &Point, w: &TangentVector) -> Result<f64, GeometryError> {
        if w.base != *x {
            return Err(GeometryError::BaseMismatch);
        }
        let r = self.norm(w);
        if r >= self.injectivity_radius() {
            return Err(GeometryError::OutOfRange);
        }
        let rho = r / self.scale;
        Ok(match self.kind {
            Kind::Euclidean => 1.0,
            Kind::Sphere => math::powf(math::sinc(rho), self.dim as f64 - 1.0),
            Kind::Hyperbolic => math::powf(math::sinhc(rho), self.dim as f64 - 1.0),
        })
    }

    /// Exact geodesic-triangle distance next to its third-order expansion
    /// ε‖w₁-w₂‖ - (ε³/6)·⟨R(w₁,w₂)w₂,w₁⟩/‖w₁-w₂‖.
    pub fn triangle_distance_check(
        &self,
        x: &Point,
        w1: &TangentVector,
        w2: &TangentVector,
        eps: f64,
    ) -> Result<(f64, f64), GeometryError> {
        if w1.base != *x || w2.base != *x {
            return Err(GeometryError::BaseMismatch);
        }
        let a = self.ambient_inner(&w1.comps, &w1.comps);
        let b = self.ambient_inner(&w2.comps, &w2.comps);
        let ab = self.ambient_inner(&w1.comps, &w2.comps);
        if a * b - ab * ab < 1e-14 {
            return Err(GeometryError::DegeneratePlane);
        }
        let p1 = self.exp_map(x, &self.scale_vec(w1, eps))?;
        let p2 = self.exp_map(x, &self.scale_vec(w2, eps))?;
        let exact = self.distance(&p1, &p2);
        let diff = math::sqrt(a + b - 2.0 * ab);
        let curv_term = self.curvature_constant() * (a * b - ab * ab);
        let expansion = eps * diff - eps * eps * eps / 6.0 * curv_term / diff;
        Ok((exact, expansion))
    }

    /// Scale a tangent vector.
    pub fn scale_vec(&self, v: &TangentVector, t: f64) -> TangentVector {
        TangentVector {
            base: v.base.clone(),
            comps: v.comps.iter().map(|c| c * t).collect(),
        }
    }

    /// Linear combination a·u + b·w of tangent vectors at the same base.
    pub fn combine(
        &self,
        u: &TangentVector,
        a: f64,
        w: &TangentVector,
        b: f64,
    ) -> Result<TangentVector, GeometryError> {
        if u.base != w.base {
            return Err(GeometryError::BaseMismatch);
        }
        let comps = u.comps.iter().zip(&w.comps).map(|(x, y)| a * x + b * y).collect();
        Ok(TangentVector { base: u.base.clone(), comps })
    }

    /// Build a tangent vector from coefficients in an orthonormal frame.
    pub fn from_frame(&self, frame: &[TangentVector], coeffs: &[f64]) -> TangentVector {
        let base = frame[0].base.clone();
        let ad = self.ambient_dim();
        let mut comps = alloc::vec![0.0; ad];
        for (e, c) in frame.iter().zip(coeffs) {
            for (slot, comp) in comps.iter_mut().zip(&e.comps) {
                *slot += c * comp;
            }
        }
        TangentVector { base, comps }
    }

    /// Deterministic orthonormal frame of the tangent space at `x`.
    pub fn tangent_frame(&self, x: &Point) -> Vec<TangentVector> {
        let ad = self.ambient_dim();
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(self.dim);
        // Skip the ambient axis most parallel to the normal direction so the
        // projected axes stay independent.
        let skip = match self.kind {
            Kind::Euclidean => usize::MAX,
            Kind::Hyperbolic => 0,
            Kind::Sphere => {
                let mut imax = 0;
                for (i, c) in x.coords.iter().enumerate() {
                    if math::abs(*c) > math::abs(x.coords[imax]) {
                        imax = i;
                    }
                }
                imax
            }
        };
        for axis in 0..ad {
            if frame.len() == self.dim {
                break;
            }
            if axis == skip {
                continue;
            }
            let mut cand = alloc::vec![0.0; ad];
            cand[axis] = 1.0;
            self.project_tangent_in_place(x, &mut cand);
            for e in &frame {
                let t = self.ambient_inner(&cand, e);
                for i in 0..ad {
                    cand[i] -= t * e[i];
                }
            }
            let q = self.ambient_inner(&cand, &cand);
            if q > 1e-12 {
                let inv = 1.0 / math::sqrt(q);
                for c in &mut cand {
                    *c *= inv;
                }
                frame.push(cand);
            }
        }
        debug_assert_eq!(frame.len(), self.dim);
        frame
            .into_iter()
            .map(|comps| TangentVector { base: x.clone(), comps })
            .collect()
    }

    /// Uniformly random point within geodesic distance `radius` of `x`
    /// (uniform w.r.t. the tangent ball; used by property tests).
    pub fn random_tangent_in_ball(
        &self,
        x: &Point,
        radius: f64,
        rng: &mut SeedStream,
    ) -> TangentVector {
        let frame = self.tangent_frame(x);
        let mut dir = alloc::vec![0.0; self.dim];
        rng.unit_direction(self.dim, &mut dir);
        let r = rng.ball_radius(radius, self.dim);
        let coeffs: Vec<f64> = dir.iter().map(|d| d * r).collect();
        self.from_frame(&frame, &coeffs)
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type BoundFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// A smooth weight potential V with exact gradient and Hessian evaluators.
///
/// `Linear` pairs ambient coordinates with a fixed covector (the Minkowski
/// pairing on the hyperboloid); `Quadratic` is the ambient square distance
/// scale/2·‖z-c‖² pulled back to the manifold. Both have closed-form
/// Riemannian gradients and Hessians on every model family. `Custom`
/// potentials must supply analytic evaluators plus a gradient-norm bound
/// over balls; finite differences are only ever used to cross-validate.
#[derive(Clone)]
pub enum Potential {
    Zero,
    Linear {
        a: Vec<f64>,
    },
    Quadratic {
        center: Vec<f64>,
        scale: f64,
    },
    Custom {
        value: Arc<ValueFn>,
        gradient: Arc<GradFn>,
        hessian: Arc<HessFn>,
        grad_bound: Arc<BoundFn>,
    },
}

impl core::fmt::Debug for Potential {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Linear { a } => write!(f, "Linear({a:?})"),
            Potential::Quadratic { center, scale } => write!(f, "Quadratic({center:?}, {scale})"),
            Potential::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Potential {
    pub fn value(&self, m: &ModelManifold, z: &Point) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Linear { a } => m.ambient_inner(a, z.coords()),
            Potential::Quadratic { center, scale } => {
                let d: Vec<f64> = z.coords().iter().zip(center).map(|(a, b)| a - b).collect();
                0.5 * scale * m.ambient_inner(&d, &d)
            }
            Potential::Custom { value, .. } => value(z.coords()),
        }
    }

    /// Riemannian gradient at `z`.
    pub fn gradient(&self, m: &ModelManifold, z: &Point) -> TangentVector {
        match self {
            Potential::Zero => m.project_tangent(z, &alloc::vec![0.0; m.ambient_dim()]),
            Potential::Linear { a } => m.project_tangent(z, a),
            Potential::Quadratic { center, scale } => {
                let d: Vec<f64> = z
                    .coords()
                    .iter()
                    .zip(center)
                    .map(|(a, b)| scale * (a - b))
                    .collect();
                m.project_tangent(z, &d)
            }
            Potential::Custom { gradient, .. } => m.project_tangent(z, &gradient(z.coords())),
        }
    }

    /// Hess V(v, v) at the base point of `v`.
    pub fn hessian(&self, m: &ModelManifold, z: &Point, v: &TangentVector) -> Result<f64, GeometryError> {
        if v.base() != z {
            return Err(GeometryError::BaseMismatch);
        }
        let vv = m.ambient_inner(v.components(), v.components());
        let s2 = m.curvature_scale() * m.curvature_scale();
        Ok(match self {
            Potential::Zero => 0.0,
            Potential::Linear { a } => match m.kind() {
                Kind::Euclidean => 0.0,
                Kind::Sphere => -m.ambient_inner(a, z.coords()) * vv / s2,
                Kind::Hyperbolic => m.ambient_inner(a, z.coords()) * vv / s2,
            },
            Potential::Quadratic { center, scale } => match m.kind() {
                Kind::Euclidean => scale * vv,
                // d²/dt² of scale/2·‖γ(t)-c‖² along a geodesic, using
                // γ'' = -‖v‖² z/R² (sphere) or +‖v‖² z/s² (hyperboloid).
                Kind::Sphere => scale * vv * m.ambient_inner(center, z.coords()) / s2,
                Kind::Hyperbolic => -scale * vv * m.ambient_inner(center, z.coords()) / s2,
            },
            Potential::Custom { hessian, .. } => hessian(z.coords(), v.components()),
        })
    }

    /// Upper bound for ‖∇V‖ over the geodesic ball B_radius(center).
    ///
    /// Any valid upper bound works here; it only sets the rejection-sampling
    /// envelope, never the sampled law.
    pub fn grad_norm_bound(&self, m: &ModelManifold, center: &Point, radius: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Linear { a } => linear_grad_bound(m, a, center, radius),
            Potential::Quadratic { center: c, scale } => match m.kind() {
                Kind::Euclidean => {
                    let d: Vec<f64> = center.coords().iter().zip(c).map(|(a, b)| a - b).collect();
                    scale * (math::sqrt(m.ambient_inner(&d, &d)) + radius)
                }
                _ => {
                    let scaled: Vec<f64> = c.iter().map(|x| -scale * x).collect();
                    linear_grad_bound(m, &scaled, center, radius)
                }
            },
            Potential::Custom { grad_bound, .. } => grad_bound(center.coords(), radius),
        }
    }

    /// Lower bound for V over the geodesic ball B_radius(center).
    ///
    /// Sets the rejection envelope e^{V(center) - bound}; tighter bounds only
    /// speed sampling up, they never change the sampled law. Exact for
    /// Euclidean quadratics, gradient-bound based otherwise.
    pub fn min_over_ball(&self, m: &ModelManifold, center: &Point, radius: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Quadratic { center: c, scale } if m.kind() == Kind::Euclidean => {
                let mut d2 = 0.0;
                for (a, b) in center.coords().iter().zip(c) {
                    d2 += (a - b) * (a - b);
                }
                let d = math::sqrt(d2);
                if *scale >= 0.0 {
                    let gap = (d - radius).max(0.0);
                    0.5 * scale * gap * gap
                } else {
                    0.5 * scale * (d + radius) * (d + radius)
                }
            }
            _ => {
                self.value(m, center) - self.grad_norm_bound(m, center, radius) * radius
            }
        }
    }

    /// Cross-check the analytic gradient and Hessian against central finite
    /// differences of V along random geodesics; 1e-6 relative tolerance.
    pub fn validate_derivatives(
        &self,
        m: &ModelManifold,
        around: &Point,
        radius: f64,
        probes: usize,
        seed: u64,
    ) -> Result<(), GeometryError> {
        let mut rng = SeedStream::new(seed, 0x70_74);
        for _ in 0..probes {
            let w = m.random_tangent_in_ball(around, radius, &mut rng);
            let z = m.exp_map(around, &w)?;
            let frame = m.tangent_frame(&z);
            let mut dir = alloc::vec![0.0; m.dim()];
            rng.unit_direction(m.dim(), &mut dir);
            let u = m.from_frame(&frame, &dir);
            let scale_ref = 1.0 + math::abs(self.value(m, &z));

            let h = 1e-5;
            let zp = m.exp_map(&z, &m.scale_vec(&u, h))?;
            let zm = m.exp_map(&z, &m.scale_vec(&u, -h))?;
            let fd_grad = (self.value(m, &zp) - self.value(m, &zm)) / (2.0 * h);
            let an_grad = m.ambient_inner(self.gradient(m, &z).components(), u.components());
            if math::abs(fd_grad - an_grad) > 1e-6 * (scale_ref + math::abs(an_grad)) {
                return Err(GeometryError::DerivativeMismatch);
            }

            let h2 = 3e-4;
            let zp2 = m.exp_map(&z, &m.scale_vec(&u, h2))?;
            let zm2 = m.exp_map(&z, &m.scale_vec(&u, -h2))?;
            let fd_hess =
                (self.value(m, &zp2) - 2.0 * self.value(m, &z) + self.value(m, &zm2)) / (h2 * h2);
            let an_hess = self.hessian(m, &z, &u)?;
            if math::abs(fd_hess - an_hess) > 1e-6 * (scale_ref + math::abs(an_hess)).max(1.0) {
                return Err(GeometryError::DerivativeMismatch);
            }
        }
        Ok(())
    }
}

fn linear_grad_bound(m: &ModelManifold, a: &[f64], center: &Point, radius: f64) -> f64 {
    match m.kind() {
        Kind::Euclidean | Kind::Sphere => {
            let mut s = 0.0;
            for c in a {
                s += c * c;
            }
            math::sqrt(s)
        }
        Kind::Hyperbolic => {
            let s = m.curvature_scale();
            let aa = m.ambient_inner(a, a);
            let ax = m.ambient_inner(a, center.coords());
            let tang = m.project_tangent(center, a);
            let g0 = m.norm(&tang);
            let rho = radius / s;
            let reach = math::cosh(rho) * math::abs(ax) + s * math::sinh(rho) * g0;
            math::sqrt((aa + reach * reach / (s * s)).max(0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_sphere() -> ModelManifold {
        ModelManifold::sphere(2, 1.0).unwrap()
    }

    #[test]
    fn exp_map_examples() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.point(&[0.0, 0.0]).unwrap();
        let v = e.tangent(&x, &[1.0, 2.0]).unwrap();
        assert_eq!(e.exp_map(&x, &v).unwrap().coords(), &[1.0, 2.0]);

        let s = unit_sphere();
        let north = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let v = s.tangent(&north, &[core::f64::consts::FRAC_PI_2, 0.0, 0.0]).unwrap();
        let y = s.exp_map(&north, &v).unwrap();
        assert!((y.coords()[0] - 1.0).abs() < 1e-14);
        assert!(y.coords()[2].abs() < 1e-14);

        let zero = s.tangent(&north, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.exp_map(&north, &zero).unwrap(), north);
    }

    #[test]
    fn exp_map_errors() {
        let s = unit_sphere();
        let north = s.origin();
        let v = s.tangent(&north, &[4.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.exp_map(&north, &v).unwrap_err(), GeometryError::OutOfRange);

        let other = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let w = s.tangent(&other, &[0.0, 0.5, 0.0]).unwrap();
        assert_eq!(s.exp_map(&north, &w).unwrap_err(), GeometryError::BaseMismatch);
    }

    #[test]
    fn log_map_examples() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.point(&[0.0, 0.0]).unwrap();
        let y = e.point(&[3.0, 4.0]).unwrap();
        assert_eq!(e.log_map(&x, &y).unwrap().components(), &[3.0, 4.0]);

        let s = unit_sphere();
        let north = s.origin();
        let y = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let l = s.log_map(&north, &y).unwrap();
        assert!((l.components()[0] - core::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!(l.components()[1].abs() < 1e-15 && l.components()[2].abs() < 1e-15);

        let l0 = s.log_map(&north, &north).unwrap();
        assert_eq!(s.norm(&l0), 0.0);
    }

    #[test]
    fn distance_examples() {
        let s = unit_sphere();
        let d = s.distance(&s.point(&[0.0, 0.0, 1.0]).unwrap(), &s.point(&[1.0, 0.0, 0.0]).unwrap());
        assert!((d - core::f64::consts::FRAC_PI_2).abs() < 1e-14);

        let e = ModelManifold::euclidean(2).unwrap();
        let d = e.distance(&e.point(&[0.0, 0.0]).unwrap(), &e.point(&[3.0, 4.0]).unwrap());
        assert!((d - 5.0).abs() < 1e-14);

        let h = ModelManifold::hyperbolic(2, 1.0).unwrap();
        let x = h.point(&[1.0, 0.0, 0.0]).unwrap();
        let y = h.point(&[math::cosh(1.0), math::sinh(1.0), 0.0]).unwrap();
        assert!((h.distance(&x, &y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transport_examples() {
        let e = ModelManifold::euclidean(3).unwrap();
        let x = e.point(&[0.0, 0.0, 0.0]).unwrap();
        let y = e.point(&[1.0, 1.0, 0.0]).unwrap();
        let v = e.tangent(&x, &[0.2, -0.3, 0.4]).unwrap();
        let t = e.parallel_transport(&x, &y, &v).unwrap();
        assert_eq!(t.components(), v.components());
        assert_eq!(t.base(), &y);

        // A vector orthogonal to the geodesic plane is fixed.
        let s = unit_sphere();
        let north = s.origin();
        let target = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let v = s.tangent(&north, &[0.0, 1.0, 0.0]).unwrap();
        let t = s.parallel_transport(&north, &target, &v).unwrap();
        assert!((t.components()[1] - 1.0).abs() < 1e-12);
        assert!(t.components()[0].abs() < 1e-12 && t.components()[2].abs() < 1e-12);

        let same = s.parallel_transport(&north, &north, &v).unwrap();
        assert_eq!(same.components(), v.components());
    }

    #[test]
    fn curvature_oracles() {
        let e3 = ModelManifold::euclidean(3).unwrap();
        let x = e3.origin();
        let v = e3.tangent(&x, &[1.0, 0.0, 0.0]).unwrap();
        let w = e3.tangent(&x, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e3.sectional_curvature(&x, &v, &w).unwrap(), 0.0);
        assert_eq!(e3.ricci(&x, &v).unwrap(), 0.0);

        let s = unit_sphere();
        let n = s.origin();
        let sv = s.tangent(&n, &[1.0, 0.0, 0.0]).unwrap();
        let sw = s.tangent(&n, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.sectional_curvature(&n, &sv, &sw).unwrap(), 1.0);
        assert_eq!(s.ricci(&n, &sv).unwrap(), 1.0);

        let h = ModelManifold::hyperbolic(2, 1.0).unwrap();
        let hx = h.origin();
        let hv = h.tangent(&hx, &[0.0, 1.0, 0.0]).unwrap();
        let hw = h.tangent(&hx, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(h.sectional_curvature(&hx, &hv, &hw).unwrap(), -1.0);
        assert_eq!(h.ricci(&hx, &hv).unwrap(), -1.0);

        // Degenerate plane and non-unit errors.
        assert_eq!(
            s.sectional_curvature(&n, &sv, &sv).unwrap_err(),
            GeometryError::DegeneratePlane
        );
        let long = s.tangent(&n, &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.ricci(&n, &long).unwrap_err(), GeometryError::NotUnit);
    }

    #[test]
    fn generalized_ricci_examples() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.origin();
        let v = e.tangent(&x, &[1.0, 0.0]).unwrap();
        let quad = Potential::Quadratic { center: vec![0.0, 0.0], scale: 1.0 };
        assert!((e.generalized_ricci(&x, &v, &quad).unwrap() - 2.0).abs() < 1e-14);

        let s = unit_sphere();
        let n = s.origin();
        let sv = s.tangent(&n, &[1.0, 0.0, 0.0]).unwrap();
        assert!((s.generalized_ricci(&n, &sv, &Potential::Zero).unwrap() - 1.0).abs() < 1e-14);

        let lin = Potential::Linear { a: vec![0.3, -0.7] };
        assert_eq!(e.generalized_ricci(&x, &v, &lin).unwrap(), 0.0);
    }

    #[test]
    fn volume_density_examples() {
        let e = ModelManifold::euclidean(3).unwrap();
        let x = e.origin();
        let w = e.tangent(&x, &[0.3, 0.1, -0.2]).unwrap();
        assert_eq!(e.volume_density(&x, &w).unwrap(), 1.0);

        let s = unit_sphere();
        let n = s.origin();
        let w = s.tangent(&n, &[core::f64::consts::FRAC_PI_2, 0.0, 0.0]).unwrap();
        let want = 2.0 / core::f64::consts::PI;
        assert!((s.volume_density(&n, &w).unwrap() - want).abs() < 1e-14);

        let zero = s.tangent(&n, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.volume_density(&n, &zero).unwrap(), 1.0);
    }

    #[test]
    fn triangle_expansion_examples() {
        let e = ModelManifold::euclidean(2).unwrap();
        let x = e.origin();
        let w1 = e.tangent(&x, &[1.0, 0.0]).unwrap();
        let w2 = e.tangent(&x, &[0.0, 1.0]).unwrap();
        let (exact, expansion) = e.triangle_distance_check(&x, &w1, &w2, 0.37).unwrap();
        assert!((exact - expansion).abs() < 1e-14);
        assert!((exact - 0.37 * math::sqrt(2.0)).abs() < 1e-14);

        let s = unit_sphere();
        let n = s.origin();
        let v1 = s.tangent(&n, &[1.0, 0.0, 0.0]).unwrap();
        let v2 = s.tangent(&n, &[0.0, 1.0, 0.0]).unwrap();
        let (_, expansion) = s.triangle_distance_check(&n, &v1, &v2, 0.1).unwrap();
        let want = 0.1 * math::sqrt(2.0) - (0.001 / 6.0) / math::sqrt(2.0);
        assert!((expansion - want).abs() < 1e-15);
    }

    #[test]
    fn potential_derivatives_match_finite_differences() {
        let cases: [(ModelManifold, Potential); 6] = [
            (ModelManifold::euclidean(3).unwrap(), Potential::Linear { a: vec![0.4, -1.1, 0.3] }),
            (
                ModelManifold::euclidean(3).unwrap(),
                Potential::Quadratic { center: vec![0.2, 0.0, -0.5], scale: 0.8 },
            ),
            (unit_sphere(), Potential::Linear { a: vec![0.5, -0.2, 0.9] }),
            (unit_sphere(), Potential::Quadratic { center: vec![0.1, 0.7, -0.3], scale: 1.3 }),
            (
                ModelManifold::hyperbolic(2, 1.0).unwrap(),
                Potential::Linear { a: vec![0.3, 0.4, -0.1] },
            ),
            (
                ModelManifold::hyperbolic(2, 1.0).unwrap(),
                Potential::Quadratic { center: vec![1.2, 0.3, 0.1], scale: 0.6 },
            ),
        ];
        for (m, pot) in &cases {
            pot.validate_derivatives(m, &m.origin(), 0.3, 25, 99).unwrap();
        }
    }

    #[test]
    fn custom_potential_roundtrip() {
        let e = ModelManifold::euclidean(2).unwrap();
        let pot = Potential::Custom {
            value: Arc::new(|z: &[f64]| z[0] * z[0] - 0.5 * z[1]),
            gradient: Arc::new(|z: &[f64]| vec![2.0 * z[0], -0.5]),
            hessian: Arc::new(|_z: &[f64], u: &[f64]| 2.0 * u[0] * u[0]),
            grad_bound: Arc::new(|z: &[f64], r: f64| 2.0 * (math::abs(z[0]) + r) + 0.5),
        };
        pot.validate_derivatives(&e, &e.origin(), 0.5, 25, 3).unwrap();
    }
}

//! Random geometric graphs over Poisson point processes with weighted
//! intensity, and the graph-curvature convergence experiment.
//!
//! Vertices are a Poisson sample with intensity n·e^{-V(z)+V(x₀)}dvol plus
//! the two roots; edges connect pairs at distance strictly below the
//! connectivity radius and carry the manifold distance as weight. Curvature
//! is read off uniform empirical measures on graph-distance balls:
//! κ = 1 - W₁(η_{x₀}, η_y)/d_G(x₀, y), scaled by 2(N+2)/δ².

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;

use crate::manifold::{GeometryError, Kind, ModelManifold, Point, Potential, TangentVector};
use crate::math;
use crate::measure::{
    ball_volume, mean_weight_over_ball, sample, BallMeasureSpec, MeasureError, MeasureVariant,
    WeightedPointCloud,
};
use crate::ot::{solve_w1, CostMatrix, OtError};
use crate::rng::{stream_id, SeedStream};

#[derive(Clone, Debug, PartialEq)]
pub enum RggError {
    /// An Assumption-style constraint on the schedule exponents failed; the
    /// message names the violated constraint.
    InvalidExponents(&'static str),
    /// The two roots are not connected in the graph.
    Disconnected,
    UnknownVertex,
    /// No vertex lies within the requested graph-distance ball.
    EmptyBall,
    Geometry(GeometryError),
    Measure(MeasureError),
    Transport(OtError),
}

impl From<GeometryError> for RggError {
    fn from(e: GeometryError) -> Self {
        RggError::Geometry(e)
    }
}

impl From<MeasureError> for RggError {
    fn from(e: MeasureError) -> Self {
        RggError::Measure(e)
    }
}

impl From<OtError> for RggError {
    fn from(e: OtError) -> Self {
        RggError::Transport(e)
    }
}

impl core::fmt::Display for RggError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RggError::InvalidExponents(m) => write!(f, "invalid schedule exponents: {m}"),
            RggError::Disconnected => write!(f, "roots are not connected in the graph"),
            RggError::UnknownVertex => write!(f, "vertex index out of range"),
            RggError::EmptyBall => write!(f, "empty graph-distance ball"),
            RggError::Geometry(e) => write!(f, "geometry: {e}"),
            RggError::Measure(e) => write!(f, "measure: {e}"),
            RggError::Transport(e) => write!(f, "transport: {e}"),
        }
    }
}

/// A Poisson point process with intensity n·e^{-V(z)+V(center)}dvol on a
/// geodesic ball window.
#[derive(Clone, Debug)]
pub struct PoissonSpec {
    pub manifold: ModelManifold,
    pub intensity_n: f64,
    pub window_center: Point,
    pub window_radius: f64,
    pub potential: Potential,
    pub seed: u64,
}

impl PoissonSpec {
    /// Expected number of points: n·∫_window e^{-V+V(x₀)} dvol.
    ///
    /// Closed form for the zero potential; otherwise the exact polar
    /// quadrature in dimension 2 and a seeded Monte-Carlo mean (relative
    /// target 1e-3) in higher dimensions.
    pub fn expected_count(&self) -> Result<f64, RggError> {
        let vol = ball_volume(&self.manifold, self.window_radius);
        let mean = match self.potential {
            Potential::Zero => 1.0,
            _ => mean_weight_over_ball(
                &self.manifold,
                &self.window_center,
                self.window_radius,
                &self.potential,
            )?,
        };
        Ok(self.intensity_n * vol * mean)
    }
}

/// Draw one realization of the Poisson process: a Poisson(Λ) count of iid
/// points with law ∝ e^{-V} dvol on the window.
pub fn sample_poisson(spec: &PoissonSpec) -> Result<Vec<Point>, RggError> {
    let lambda = spec.expected_count()?;
    let mut rng = SeedStream::new(spec.seed, stream_id(0x50, 0, 0));
    let count = rng.poisson(lambda) as usize;
    if count == 0 {
        return Ok(Vec::new());
    }
    let ball = BallMeasureSpec::new(
        spec.manifold.clone(),
        spec.window_center.clone(),
        spec.window_radius,
        spec.potential.clone(),
        MeasureVariant::NuManifold,
    )?;
    let cloud = sample(&ball, count, spec.seed, stream_id(0x50, 1, 0))?;
    Ok(cloud.atoms().to_vec())
}

/// A rooted geometric graph: vertices 0 and 1 are the roots x₀ and y.
#[derive(Clone, Debug)]
pub struct GeometricGraph {
    vertices: Vec<Point>,
    adj: Vec<Vec<(u32, f64)>>,
    epsilon: f64,
}

/// Graph over points ∪ {x₀, y} with an edge wherever d(u, v) < ε (strict)
/// weighted by the manifold distance.
pub fn build_graph(
    manifold: &ModelManifold,
    points: &[Point],
    x0: &Point,
    y: &Point,
    epsilon: f64,
) -> GeometricGraph {
    let mut vertices = Vec::with_capacity(points.len() + 2);
    vertices.push(x0.clone());
    vertices.push(y.clone());
    vertices.extend_from_slice(points);
    let n = vertices.len();
    let mut adj: Vec<Vec<(u32, f64)>> = alloc::vec![Vec::new(); n];

    let push = |adj: &mut Vec<Vec<(u32, f64)>>, i: usize, j: usize, d: f64| {
        adj[i].push((j as u32, d));
        adj[j].push((i as u32, d));
    };

    if manifold.kind() == Kind::Euclidean {
        // Uniform grid with cell width ε: neighbors live in adjacent cells.
        let dim = manifold.dim();
        let key = |p: &Point| -> Vec<i64> {
            p.coords().iter().map(|c| libm::floor(c / epsilon) as i64).collect()
        };
        let mut grid: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for (i, p) in vertices.iter().enumerate() {
            grid.entry(key(p)).or_default().push(i);
        }
        let mut offsets: Vec<Vec<i64>> = alloc::vec![Vec::new()];
        for _ in 0..dim {
            let mut next = Vec::new();
            for off in &offsets {
                for d in -1..=1i64 {
                    let mut o = off.clone();
                    o.push(d);
                    next.push(o);
                }
            }
            offsets = next;
        }
        for (cell, members) in &grid {
            for off in &offsets {
                let ncell: Vec<i64> = cell.iter().zip(off).map(|(c, o)| c + o).collect();
                if ncell < *cell {
                    continue;
                }
                let Some(others) = grid.get(&ncell) else { continue };
                for &i in members {
                    for &j in others {
                        if ncell == *cell && j <= i {
                            continue;
                        }
                        let d = manifold.distance(&vertices[i], &vertices[j]);
                        if d < epsilon {
                            push(&mut adj, i, j, d);
                        }
                    }
                }
            }
        }
    } else {
        for i in 0..n {
            for j in i + 1..n {
                let d = manifold.distance(&vertices[i], &vertices[j]);
                if d < epsilon {
                    push(&mut adj, i, j, d);
                }
            }
        }
    }

    GeometricGraph { vertices, adj, epsilon }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapState {
    dist: f64,
    node: u32,
}

impl Eq for HeapState {}

impl Ord for HeapState {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Reversed for a min-heap.
        other.dist.partial_cmp(&self.dist).unwrap_or(core::cmp::Ordering::Equal)
    }
}

impl PartialOrd for HeapState {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl GeometricGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[(u32, f64)] {
        &self.adj[u]
    }

    /// Single-source weighted shortest-path distances (Dijkstra); entries
    /// stay at infinity for unreachable vertices. `cutoff` bounds the search:
    /// distances beyond it are left at infinity.
    pub fn dijkstra(&self, source: usize, cutoff: f64) -> Result<Vec<f64>, RggError> {
        if source >= self.vertices.len() {
            return Err(RggError::UnknownVertex);
        }
        let n = self.vertices.len();
        let mut dist = alloc::vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapState { dist: 0.0, node: source as u32 });
        while let Some(HeapState { dist: d, node }) = heap.pop() {
            let u = node as usize;
            if d > dist[u] {
                continue;
            }
            if d > cutoff {
                break;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(HeapState { dist: nd, node: v });
                }
            }
        }
        Ok(dist)
    }

    /// Weighted graph distance between two vertices (∞ when disconnected).
    pub fn graph_distance(&self, u: usize, w: usize) -> Result<f64, RggError> {
        if u >= self.vertices.len() || w >= self.vertices.len() {
            return Err(RggError::UnknownVertex);
        }
        let dist = self.dijkstra(u, f64::INFINITY)?;
        Ok(dist[w])
    }

    /// Vertices within graph distance strictly less than `delta` of `x`.
    pub fn ball_vertices(&self, x: usize, delta: f64) -> Result<Vec<usize>, RggError> {
        if x >= self.vertices.len() {
            return Err(RggError::UnknownVertex);
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(RggError::EmptyBall);
        }
        let dist = self.dijkstra(x, delta)?;
        let mut out: Vec<usize> =
            (0..self.vertices.len()).filter(|&i| dist[i] < delta).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Uniform empirical measure on the graph-distance ball around `x`.
    pub fn empirical_ball_measure(&self, x: usize, delta: f64) -> Result<WeightedPointCloud, RggError> {
        let ids = self.ball_vertices(x, delta)?;
        let atoms: Vec<Point> = ids.iter().map(|&i| self.vertices[i].clone()).collect();
        Ok(WeightedPointCloud::uniform(atoms)?)
    }

    /// Graph coarse curvature κ = 1 - W₁(η_{x₀}^δ, η_y^δ)/d_G(x₀, y) with
    /// graph-distance costs between the ball supports.
    pub fn graph_curvature(&self, delta: f64) -> Result<f64, RggError> {
        let d01 = self.graph_distance(0, 1)?;
        if !d01.is_finite() {
            return Err(RggError::Disconnected);
        }
        let ball_x = self.ball_vertices(0, delta)?;
        let ball_y = self.ball_vertices(1, delta)?;
        // All needed pairwise distances are bounded through the roots.
        let cutoff = delta + d01 + delta + 1e-9;
        // Run Dijkstra from the smaller support.
        let (sources, targets, transposed) = if ball_y.len() <= ball_x.len() {
            (&ball_y, &ball_x, true)
        } else {
            (&ball_x, &ball_y, false)
        };
        let mut cost = alloc::vec![0.0; ball_x.len() * ball_y.len()];
        let k_cols = ball_y.len();
        for (si, &s) in sources.iter().enumerate() {
            let dist = self.dijkstra(s, cutoff)?;
            for (ti, &t) in targets.iter().enumerate() {
                let d = dist[t];
                debug_assert!(d.is_finite());
                if transposed {
                    cost[ti * k_cols + si] = d;
                } else {
                    cost[si * k_cols + ti] = d;
                }
            }
        }
        let cost = CostMatrix::new(ball_x.len(), ball_y.len(), cost)?;
        let wx = alloc::vec![1.0 / ball_x.len() as f64; ball_x.len()];
        let wy = alloc::vec![1.0 / ball_y.len() as f64; ball_y.len()];
        let plan = solve_w1(&wx, &wy, &cost)?;
        Ok(1.0 - plan.cost / d01)
    }
}

/// Scaling exponents δ_n ~ (log n)^b n^{-β}, ε_n ~ (log n)^a n^{-α} with the
/// admissibility constraints on (α, β, a, b).
#[derive(Clone, Copy, Debug)]
pub struct GraphSchedule {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    /// Proportionality constants (the asymptotics fix them only up to ~).
    pub c_epsilon: f64,
    pub c_delta: f64,
}

impl GraphSchedule {
    pub fn new(alpha: f64, beta: f64, a: f64, b: f64) -> Self {
        Self { alpha, beta, a, b, c_epsilon: 1.0, c_delta: 1.0 }
    }

    /// Check the rate constraints for manifold dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), RggError> {
        let n_inv = 1.0 / dim as f64;
        let tol = 1e-12;
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(RggError::InvalidExponents("beta must be positive"));
        }
        if self.beta > self.alpha + tol {
            return Err(RggError::InvalidExponents("beta must not exceed alpha"));
        }
        if self.alpha + 2.0 * self.beta > n_inv + tol {
            return Err(RggError::InvalidExponents("alpha + 2 beta must not exceed 1/N"));
        }
        if math::abs(self.alpha - self.beta) <= tol && self.a > self.b + tol {
            return Err(RggError::InvalidExponents("a must not exceed b when alpha = beta"));
        }
        if math::abs(self.alpha + 2.0 * self.beta - n_inv) <= tol
            && self.a + 2.0 * self.b <= 2.0 * n_inv + tol
        {
            return Err(RggError::InvalidExponents(
                "a + 2 b must exceed 2/N when alpha + 2 beta = 1/N",
            ));
        }
        Ok(())
    }

    /// (δ_n, ε_n) at intensity n.
    pub fn values(&self, n: u64) -> Result<(f64, f64), RggError> {
        if n < 3 {
            return Err(RggError::InvalidExponents("n must be at least 3"));
        }
        let ln = math::ln(n as f64);
        let nf = n as f64;
        let delta = self.c_delta * math::powf(ln, self.b) * math::powf(nf, -self.beta);
        let epsilon = self.c_epsilon * math::powf(ln, self.a) * math::powf(nf, -self.alpha);
        if epsilon > delta * (1.0 + 1e-12) {
            return Err(RggError::InvalidExponents("epsilon_n must not exceed delta_n"));
        }
        Ok((delta, epsilon))
    }
}

/// One convergence-run record; rows with `connected == false` carry NaN in
/// the curvature columns and are excluded from trend statistics.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub n: u64,
    pub repeat: u32,
    pub delta_n: f64,
    pub epsilon_n: f64,
    pub num_points: usize,
    pub connected: bool,
    pub kappa: f64,
    pub scaled_kappa: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub seed: u64,
}

/// One (n, repeat) cell of the convergence experiment: sample a Poisson
/// cloud on the window B_{4δ_n}(x₀), build the ε_n-graph rooted at x₀ and
/// y_n = exp_{x₀}(δ_n v), and read off the scaled curvature 2(N+2)/δ_n²·κ_n.
///
/// The job seed is derived as stream_id(seed, n_index, repeat), so cells can
/// run in any order or in parallel without changing their rows.
#[allow(clippy::too_many_arguments)]
pub fn convergence_job(
    manifold: &ModelManifold,
    potential: &Potential,
    x0: &Point,
    v: &TangentVector,
    schedule: &GraphSchedule,
    n: u64,
    n_index: usize,
    repeat: u32,
    seed: u64,
) -> Result<ConvergenceRow, RggError> {
    let (delta_n, epsilon_n) = schedule.values(n)?;
    let y = manifold.exp_map(x0, &manifold.scale_vec(v, delta_n))?;
    let oracle = manifold.generalized_ricci(x0, v, potential).map_err(RggError::Geometry)?;
    let job_seed = stream_id(seed, n_index as u64, repeat as u64);
    let spec = PoissonSpec {
        manifold: manifold.clone(),
        intensity_n: n as f64,
        window_center: x0.clone(),
        window_radius: 4.0 * delta_n,
        potential: potential.clone(),
        seed: job_seed,
    };
    let points = sample_poisson(&spec)?;
    let graph = build_graph(manifold, &points, x0, &y, epsilon_n);
    let scale = 2.0 * (manifold.dim() as f64 + 2.0) / (delta_n * delta_n);
    match graph.graph_curvature(delta_n) {
        Ok(kappa) => Ok(ConvergenceRow {
            n,
            repeat,
            delta_n,
            epsilon_n,
            num_points: points.len(),
            connected: true,
            kappa,
            scaled_kappa: scale * kappa,
            oracle,
            abs_error: math::abs(scale * kappa - oracle),
            seed: job_seed,
        }),
        Err(RggError::Disconnected) => Ok(ConvergenceRow {
            n,
            repeat,
            delta_n,
            epsilon_n,
            num_points: points.len(),
            connected: false,
            kappa: f64::NAN,
            scaled_kappa: f64::NAN,
            oracle,
            abs_error: f64::NAN,
            seed: job_seed,
        }),
        Err(e) => Err(e),
    }
}

/// Run the full grid of convergence jobs sequentially, sorted by (n, repeat).
#[allow(clippy::too_many_arguments)]
pub fn convergence_experiment(
    manifold: &ModelManifold,
    potential: &Potential,
    x0: &Point,
    v: &TangentVector,
    schedule: &GraphSchedule,
    n_values: &[u64],
    repeats: u32,
    seed: u64,
) -> Result<Vec<ConvergenceRow>, RggError> {
    schedule.validate(manifold.dim())?;
    let mut rows = Vec::with_capacity(n_values.len() * repeats as usize);
    let mut sorted = n_values.to_vec();
    sorted.sort_unstable();
    for (ni, &n) in sorted.iter().enumerate() {
        for rep in 0..repeats {
            rows.push(convergence_job(manifold, potential, x0, v, schedule, n, ni, rep, seed)?);
        }
    }
    Ok(rows)
}

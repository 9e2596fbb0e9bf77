//! Exact discrete 1-Wasserstein distances with dual certificates.
//!
//! The solver is a network simplex specialized to the dense transportation
//! problem: arcs are implicit (every source–target pair), the initial basis
//! is the northwest-corner spanning tree, and the basis tree is maintained
//! with the usual depth-first-thread arrays. Entering arcs are found by
//! block search over reduced costs; the leaving arc is the last blocking arc
//! around the pivot cycle, which keeps the method from cycling on the highly
//! degenerate uniform-weight instances this crate produces.
//!
//! `brute_force_w1` is the independent oracle: it enumerates vertices of the
//! transport polytope (every basic solution is a northwest-corner solution
//! under some row/column ordering), or all permutation matchings in the
//! equal-size uniform case. It shares no code with the simplex path.

use alloc::vec;
use alloc::vec::Vec;

use crate::manifold::ModelManifold;
use crate::measure::WeightedPointCloud;

/// Errors from the transport solvers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OtError {
    /// Cost dimensions do not match the marginals.
    DimensionMismatch,
    /// Weights are not a probability vector.
    BadWeights,
    /// Instance exceeds the brute-force oracle envelope.
    TooLarge,
    /// Cost entries must be finite and nonnegative.
    BadCost,
    /// The pivot loop failed to converge (should not happen).
    NumericalFailure,
}

impl core::fmt::Display for OtError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            OtError::DimensionMismatch => "cost dimensions do not match the weight vectors",
            OtError::BadWeights => "weights must be nonnegative and sum to one",
            OtError::TooLarge => "instance too large for the brute-force oracle",
            OtError::BadCost => "cost entries must be finite and nonnegative",
            OtError::NumericalFailure => "network simplex failed to converge",
        };
        write!(f, "{msg}")
    }
}

/// Dense nonnegative cost matrix, row-major.
#[derive(Clone, Debug)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, OtError> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(OtError::DimensionMismatch);
        }
        if entries.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(OtError::BadCost);
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, OtError> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Pairwise geodesic distances between the atoms of two clouds.
    pub fn from_clouds(
        m: &ModelManifold,
        source: &WeightedPointCloud,
        target: &WeightedPointCloud,
    ) -> Result<Self, OtError> {
        Self::from_fn(source.len(), target.len(), |i, j| {
            m.distance(&source.atoms()[i], &target.atoms()[j])
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// An optimal coupling with its cost and a dual certificate.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    /// Row-major m×k coupling.
    pub coupling: Vec<f64>,
    /// Optimal transport cost (the W1 value for metric costs).
    pub cost: f64,
    /// Source potentials u.
    pub dual_u: Vec<f64>,
    /// Target potentials v; feasibility is u_i + v_j ≤ c_ij.
    pub dual_v: Vec<f64>,
}

/// Worst violations of the plan invariants, for tests and certificates.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlanCheck {
    pub max_marginal_err: f64,
    pub max_dual_violation: f64,
    pub max_slackness_err: f64,
    pub duality_gap: f64,
}

impl TransportPlan {
    /// Dual objective Σ aᵢuᵢ + Σ bⱼvⱼ.
    pub fn dual_value(&self, source: &[f64], target: &[f64]) -> f64 {
        let mut s = crate::stats::KahanSum::new();
        for (a, u) in source.iter().zip(&self.dual_u) {
            s.add(a * u);
        }
        for (b, v) in target.iter().zip(&self.dual_v) {
            s.add(b * v);
        }
        s.value()
    }

    pub fn verify(&self, source: &[f64], target: &[f64], cost: &CostMatrix) -> PlanCheck {
        let (m, k) = (cost.rows, cost.cols);
        let mut check = PlanCheck::default();
        for (i, a) in source.iter().enumerate().take(m) {
            let mut row = crate::stats::KahanSum::new();
            for j in 0..k {
                row.add(self.coupling[i * k + j]);
            }
            check.max_marginal_err = check.max_marginal_err.max(libm::fabs(row.value() - a));
        }
        for (j, b) in target.iter().enumerate().take(k) {
            let mut col = crate::stats::KahanSum::new();
            for i in 0..m {
                col.add(self.coupling[i * k + j]);
            }
            check.max_marginal_err = check.max_marginal_err.max(libm::fabs(col.value() - b));
        }
        for i in 0..m {
            for j in 0..k {
                let slack = self.dual_u[i] + self.dual_v[j] - cost.at(i, j);
                if slack > check.max_dual_violation {
                    check.max_dual_violation = slack;
                }
                if self.coupling[i * k + j] > 1e-12 {
                    let cs = libm::fabs(slack);
                    if cs > check.max_slackness_err {
                        check.max_slackness_err = cs;
                    }
                }
            }
        }
        check.duality_gap = self.cost - self.dual_value(source, target);
        check
    }
}

fn check_weights(w: &[f64]) -> Result<(), OtError> {
    if w.is_empty() {
        return Err(OtError::BadWeights);
    }
    let mut sum = crate::stats::KahanSum::new();
    for x in w {
        if !x.is_finite() || *x < 0.0 {
            return Err(OtError::BadWeights);
        }
        sum.add(*x);
    }
    if libm::fabs(sum.value() - 1.0) > 1e-9 {
        return Err(OtError::BadWeights);
    }
    Ok(())
}

const NO_NODE: usize = usize::MAX;

/// Basis tree state for the transportation network simplex.
///
/// Nodes 0..m are sources, m..m+k are targets. Each non-root node stores the
/// basic arc that connects it to its parent: the originating cell (i, j),
/// its flow, and whether the arc is directed node→parent.
struct Basis<'a> {
    m: usize,
    cost: &'a CostMatrix,
    parent: Vec<usize>,
    // Cell (i, j) of the arc to the parent; NO_NODE sentinel row for the root.
    cell_row: Vec<usize>,
    cell_col: Vec<usize>,
    fwd: Vec<bool>,
    flow: Vec<f64>,
    next_dft: Vec<usize>,
    prev_dft: Vec<usize>,
    last_dft: Vec<usize>,
    size: Vec<usize>,
    pi: Vec<f64>,
}

impl<'a> Basis<'a> {
    /// Northwest-corner initial basis. The basic cells form a staircase, so
    /// the spanning tree is a path and the thread arrays are the path order.
    fn northwest(cost: &'a CostMatrix, a: &[f64], b: &[f64]) -> Self {
        let (m, k) = (cost.rows, cost.cols);
        let n = m + k;
        let mut rem_a = a.to_vec();
        let mut rem_b = b.to_vec();
        // Force exact balance so the last cell closes without residue.
        let sa: f64 = rem_a.iter().sum();
        let sb: f64 = rem_b.iter().sum();
        if let Some(last) = rem_b.last_mut() {
            *last += sa - sb;
        }

        let mut basis = Basis {
            m,
            cost,
            parent: vec![NO_NODE; n],
            cell_row: vec![NO_NODE; n],
            cell_col: vec![NO_NODE; n],
            fwd: vec![false; n],
            flow: vec![0.0; n],
            next_dft: vec![NO_NODE; n],
            prev_dft: vec![NO_NODE; n],
            last_dft: vec![NO_NODE; n],
            size: vec![1; n],
            pi: vec![0.0; n],
        };

        // Path order of nodes as the staircase visits them. Each cell after
        // the first introduces exactly the index that advanced last.
        let mut order: Vec<usize> = Vec::with_capacity(n);
        order.push(0);
        let (mut i, mut j) = (0usize, 0usize);
        let mut row_is_new = false;
        while i < m && j < k {
            let node_t = m + j;
            let f = rem_a[i].min(rem_b[j]);
            let (new_node, old_node) = if row_is_new { (i, node_t) } else { (node_t, i) };
            basis.parent[new_node] = old_node;
            basis.cell_row[new_node] = i;
            basis.cell_col[new_node] = j;
            basis.fwd[new_node] = new_node == i;
            basis.flow[new_node] = f;
            order.push(new_node);
            rem_a[i] -= f;
            rem_b[j] -= f;
            // Advance along the row or the column; on ties prefer the row
            // unless it is the last one, so exactly m+k-1 cells are emitted.
            if i + 1 < m && (rem_a[i] <= rem_b[j] || j + 1 == k) {
                i += 1;
                row_is_new = true;
            } else {
                j += 1;
                row_is_new = false;
            }
        }

        // The insertion order is a DFS preorder of the basis tree: cells that
        // share an index are consecutive in the staircase, so every subtree
        // occupies a contiguous run of `order`.
        debug_assert_eq!(order.len(), n);
        for (idx, &node) in order.iter().enumerate() {
            basis.next_dft[node] = if idx + 1 < n { order[idx + 1] } else { order[0] };
            basis.prev_dft[node] = if idx > 0 { order[idx - 1] } else { order[n - 1] };
        }
        let mut pos = vec![0usize; n];
        for (idx, &node) in order.iter().enumerate() {
            pos[node] = idx;
        }
        for &node in order.iter().rev() {
            let p = basis.parent[node];
            if p != NO_NODE {
                basis.size[p] += basis.size[node];
            }
        }
        for &node in &order {
            basis.last_dft[node] = order[pos[node] + basis.size[node] - 1];
        }
        basis.recompute_potentials();
        basis
    }

    /// Potentials from the tree: π[root] = 0 and every basic arc tight.
    fn recompute_potentials(&mut self) {
        let root = self.root();
        self.pi[root] = 0.0;
        let mut node = self.next_dft[root];
        while node != root {
            let p = self.parent[node];
            let c = self.cost.at(self.cell_row[node], self.cell_col[node]);
            // Tight arc: c - π[tail] + π[head] = 0 with tail→head = source→target.
            self.pi[node] = if self.fwd[node] { self.pi[p] + c } else { self.pi[p] - c };
            node = self.next_dft[node];
        }
    }

    fn root(&self) -> usize {
        let mut r = 0;
        while self.parent[r] != NO_NODE {
            r = self.parent[r];
        }
        r
    }

    #[inline]
    fn reduced_cost(&self, i: usize, j: usize) -> f64 {
        self.cost.at(i, j) - self.pi[i] + self.pi[m_node(self.m, j)]
    }

    fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            while self.size[u] < self.size[v] {
                u = self.parent[u];
            }
            while self.size[v] < self.size[u] {
                v = self.parent[v];
            }
            if self.size[u] == self.size[v] && u != v {
                u = self.parent[u];
                v = self.parent[v];
            }
        }
        u
    }

    fn path_to(&self, mut u: usize, apex: usize, out: &mut Vec<usize>) {
        out.clear();
        while u != apex {
            out.push(u);
            u = self.parent[u];
        }
    }

    /// Remove the basic arc between `child` and its parent, detaching the
    /// subtree rooted at `child` from the depth-first thread.
    fn remove_edge(&mut self, child: usize) {
        let size_c = self.size[child];
        let prev_c = self.prev_dft[child];
        let last_c = self.last_dft[child];
        let next_last_c = self.next_dft[last_c];
        let parent = self.parent[child];
        self.parent[child] = NO_NODE;
        self.cell_row[child] = NO_NODE;
        self.cell_col[child] = NO_NODE;
        self.flow[child] = 0.0;
        self.next_dft[prev_c] = next_last_c;
        self.prev_dft[next_last_c] = prev_c;
        self.next_dft[last_c] = child;
        self.prev_dft[child] = last_c;
        let mut u = parent;
        while u != NO_NODE {
            self.size[u] -= size_c;
            if self.last_dft[u] == last_c {
                self.last_dft[u] = prev_c;
            }
            u = self.parent[u];
        }
    }

    /// Re-root the detached subtree at `new_root` by reversing the parent
    /// chain above it; arc data moves to the other endpoint with its
    /// direction flag flipped.
    fn make_root(&mut self, new_root: usize) {
        let mut chain = Vec::new();
        let mut u = new_root;
        while u != NO_NODE {
            chain.push(u);
            u = self.parent[u];
        }
        chain.reverse();
        for w in 0..chain.len().saturating_sub(1) {
            let v = chain[w]; // current ancestor, becomes child of `nxt`
            let nxt = chain[w + 1];
            let size_v = self.size[v];
            let mut last_v = self.last_dft[v];
            let prev_w = self.prev_dft[nxt];
            let last_w = self.last_dft[nxt];
            let next_last_w = self.next_dft[last_w];
            self.parent[v] = nxt;
            self.parent[nxt] = NO_NODE;
            self.cell_row[v] = self.cell_row[nxt];
            self.cell_col[v] = self.cell_col[nxt];
            self.fwd[v] = !self.fwd[nxt];
            self.flow[v] = self.flow[nxt];
            self.cell_row[nxt] = NO_NODE;
            self.cell_col[nxt] = NO_NODE;
            self.size[v] = size_v - self.size[nxt];
            self.size[nxt] = size_v;
            self.next_dft[prev_w] = next_last_w;
            self.prev_dft[next_last_w] = prev_w;
            self.next_dft[last_w] = nxt;
            self.prev_dft[nxt] = last_w;
            if last_v == last_w {
                self.last_dft[v] = prev_w;
                last_v = prev_w;
            }
            self.prev_dft[v] = last_w;
            self.next_dft[last_w] = v;
            self.next_dft[last_v] = nxt;
            self.prev_dft[nxt] = last_v;
            self.last_dft[nxt] = last_v;
        }
    }

    /// Attach the subtree rooted at `child` under `parent` with the entering
    /// cell (i, j) carrying flow `f`.
    fn add_edge(&mut self, parent: usize, child: usize, i: usize, j: usize, f: f64) {
        let last_p = self.last_dft[parent];
        let next_last_p = self.next_dft[last_p];
        let size_c = self.size[child];
        let last_c = self.last_dft[child];
        self.parent[child] = parent;
        self.cell_row[child] = i;
        self.cell_col[child] = j;
        self.fwd[child] = child == i;
        self.flow[child] = f;
        self.next_dft[last_p] = child;
        self.prev_dft[child] = last_p;
        self.prev_dft[next_last_p] = last_c;
        self.next_dft[last_c] = next_last_p;
        let mut u = parent;
        while u != NO_NODE {
            self.size[u] += size_c;
            if self.last_dft[u] == last_p {
                self.last_dft[u] = last_c;
            }
            u = self.parent[u];
        }
    }

    /// Shift potentials across the subtree that was just reattached so the
    /// entering arc becomes tight.
    fn update_potentials(&mut self, child: usize) {
        let p = self.parent[child];
        let c = self.cost.at(self.cell_row[child], self.cell_col[child]);
        let want = if self.fwd[child] { self.pi[p] + c } else { self.pi[p] - c };
        let d = want - self.pi[child];
        if d == 0.0 {
            return;
        }
        let last = self.last_dft[child];
        let mut u = child;
        loop {
            self.pi[u] += d;
            if u == last {
                break;
            }
            u = self.next_dft[u];
        }
    }
}

#[inline]
fn m_node(m: usize, j: usize) -> usize {
    m + j
}

/// Exact minimum-cost coupling between two weighted marginals.
///
/// Returns the optimal plan with dual potentials; the duality gap and all
/// feasibility residuals are certified by [`TransportPlan::verify`].
pub fn solve_w1(source: &[f64], target: &[f64], cost: &CostMatrix) -> Result<TransportPlan, OtError> {
    if cost.rows != source.len() || cost.cols != target.len() {
        return Err(OtError::DimensionMismatch);
    }
    check_weights(source)?;
    check_weights(target)?;

    let (m, k) = (cost.rows, cost.cols);
    let n = m + k;
    let arcs = m * k;
    let mut basis = Basis::northwest(cost, source, target);

    let cost_scale = cost.entries.iter().cloned().fold(1.0f64, f64::max);
    let tol = 1e-12 * cost_scale;

    let block = (libm::ceil(libm::sqrt(arcs as f64)) as usize).max(16).min(arcs);
    let num_blocks = arcs.div_ceil(block);
    let mut block_start = 0usize;
    let max_pivots = 400usize.saturating_mul(n).saturating_add(100_000);
    let mut pivots = 0usize;

    let mut path_u: Vec<usize> = Vec::new();
    let mut path_v: Vec<usize> = Vec::new();

    'outer: loop {
        // Entering arc: best reduced cost within a rotating block.
        let mut entering = None;
        let mut scanned_blocks = 0;
        while scanned_blocks < num_blocks {
            let mut best = -tol;
            let mut best_arc = NO_NODE;
            let end = block_start + block;
            for idx in block_start..end {
                let arc = if idx >= arcs { idx - arcs } else { idx };
                let (i, j) = (arc / k, arc % k);
                let rc = basis.reduced_cost(i, j);
                if rc < best {
                    best = rc;
                    best_arc = arc;
                }
            }
            block_start = if end >= arcs { end - arcs } else { end };
            scanned_blocks += 1;
            if best_arc != NO_NODE {
                entering = Some(best_arc);
                break;
            }
        }
        let Some(arc) = entering else {
            break 'outer;
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(OtError::NumericalFailure);
        }
        let (ei, ej) = (arc / k, arc % k);
        let (eu, ev) = (ei, m_node(m, ej));

        let apex = basis.lca(eu, ev);
        basis.path_to(eu, apex, &mut path_u);
        basis.path_to(ev, apex, &mut path_v);

        // Walk the cycle from the apex in the entering direction:
        // apex → eu (descending path_u), entering arc, ev → apex.
        // Blocking arcs are the ones traversed against their orientation.
        let mut theta = f64::INFINITY;
        let mut leave = NO_NODE;
        for &t in path_u.iter().rev() {
            // Traversed parent→t; blocking when the arc points t→parent.
            if basis.fwd[t] && basis.flow[t] <= theta {
                theta = basis.flow[t];
                leave = t;
            }
        }
        for &t in path_v.iter() {
            // Traversed t→parent; blocking when the arc points parent→t.
            if !basis.fwd[t] && basis.flow[t] <= theta {
                theta = basis.flow[t];
                leave = t;
            }
        }
        if leave == NO_NODE {
            return Err(OtError::NumericalFailure);
        }

        if theta != 0.0 {
            for &t in path_u.iter() {
                basis.flow[t] += if basis.fwd[t] { -theta } else { theta };
            }
            for &t in path_v.iter() {
                basis.flow[t] += if basis.fwd[t] { theta } else { -theta };
            }
        }

        // Replace the leaving arc with the entering one. The detached side
        // contains exactly one endpoint of the entering arc.
        basis.remove_edge(leave);
        let eu_detached = {
            let mut u = eu;
            loop {
                if u == leave {
                    break true;
                }
                u = basis.parent[u];
                if u == NO_NODE {
                    break false;
                }
            }
        };
        let (attach_parent, attach_child) = if eu_detached { (ev, eu) } else { (eu, ev) };
        basis.make_root(attach_child);
        basis.add_edge(attach_parent, attach_child, ei, ej, theta);
        basis.update_potentials(attach_child);
    }

    basis.recompute_potentials();

    let mut coupling = vec![0.0; arcs];
    let mut total = crate::stats::KahanSum::new();
    for t in 0..n {
        if basis.parent[t] != NO_NODE && basis.cell_row[t] != NO_NODE {
            let (i, j) = (basis.cell_row[t], basis.cell_col[t]);
            let f = basis.flow[t].max(0.0);
            coupling[i * k + j] += f;
            total.add(f * cost.at(i, j));
        }
    }
    let dual_u: Vec<f64> = (0..m).map(|i| basis.pi[i]).collect();
    let dual_v: Vec<f64> = (0..k).map(|j| -basis.pi[m + j]).collect();

    Ok(TransportPlan { coupling, cost: total.value(), dual_u, dual_v })
}

fn is_uniform(w: &[f64]) -> bool {
    let u = 1.0 / w.len() as f64;
    w.iter().all(|x| libm::fabs(x - u) <= 1e-12)
}

/// Exact optimum by exhaustive enumeration; independent of the simplex path.
///
/// Equal sizes with uniform weights: minimum over all permutation matchings.
/// General small instances: every vertex of the transport polytope peels off
/// by leaf elimination (some node of its support forest ships its whole
/// remaining mass across a single cell), so recursing over every admissible
/// leaf step visits every vertex. Branches whose committed cost plus a valid
/// remaining-cost lower bound cannot beat the incumbent are cut; with
/// nonnegative costs this never discards the optimum.
pub fn brute_force_w1(source: &[f64], target: &[f64], cost: &CostMatrix) -> Result<f64, OtError> {
    if cost.rows != source.len() || cost.cols != target.len() {
        return Err(OtError::DimensionMismatch);
    }
    check_weights(source)?;
    check_weights(target)?;
    let (m, k) = (cost.rows, cost.cols);

    if m == k && is_uniform(source) && is_uniform(target) {
        if m > 8 {
            return Err(OtError::TooLarge);
        }
        let mut perm: Vec<usize> = (0..m).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let mut c = 0.0;
            for (i, &j) in p.iter().enumerate() {
                c += cost.at(i, j);
            }
            if c < best {
                best = c;
            }
        });
        return Ok(best / m as f64);
    }

    if m > 8 || k > 8 {
        return Err(OtError::TooLarge);
    }

    // Weights with a common denominator S ≤ 8 expand into S unit atoms per
    // side; the LP value is unchanged and the optimum is a permutation
    // matching of the expanded instance (Birkhoff).
    for s in 1..=8usize {
        let (Some(pa), Some(pb)) = (rationalize(source, s), rationalize(target, s)) else {
            continue;
        };
        let mut rows = Vec::with_capacity(s);
        for (i, &p) in pa.iter().enumerate() {
            rows.extend(core::iter::repeat_n(i, p));
        }
        let mut cols = Vec::with_capacity(s);
        for (j, &q) in pb.iter().enumerate() {
            cols.extend(core::iter::repeat_n(j, q));
        }
        let mut perm: Vec<usize> = (0..s).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let mut c = 0.0;
            for (u, &v) in p.iter().enumerate() {
                c += cost.at(rows[u], cols[v]);
            }
            if c < best {
                best = c;
            }
        });
        return Ok(best / s as f64);
    }

    let mut search = LeafSearch {
        cost,
        rem_a: source.to_vec(),
        rem_b: target.to_vec(),
        act_a: vec![true; m],
        act_b: vec![true; k],
        order: {
            let mut idx: Vec<usize> = (0..m * k).collect();
            idx.sort_by(|&x, &y| cost.entries[x].partial_cmp(&cost.entries[y]).unwrap());
            idx
        },
        best: f64::INFINITY,
    };
    search.best = search.greedy_incumbent();
    search.recurse(0.0, usize::MAX, usize::MAX, usize::MAX);
    Ok(search.best)
}

/// Express weights as integer multiples of 1/s, if they are within 1e-9.
fn rationalize(w: &[f64], s: usize) -> Option<Vec<usize>> {
    let mut counts = Vec::with_capacity(w.len());
    let mut total = 0usize;
    for &x in w {
        let scaled = x * s as f64;
        let r = libm::round(scaled);
        if libm::fabs(scaled - r) > 1e-9 || r < 0.0 {
            return None;
        }
        counts.push(r as usize);
        total += r as usize;
    }
    if total != s {
        return None;
    }
    Some(counts)
}

struct LeafSearch<'a> {
    cost: &'a CostMatrix,
    rem_a: Vec<f64>,
    rem_b: Vec<f64>,
    act_a: Vec<bool>,
    act_b: Vec<bool>,
    /// Cell indices sorted by cost: cheap branches first for early incumbents.
    order: Vec<usize>,
    best: f64,
}

impl LeafSearch<'_> {
    /// Dual-ascent bound: u_i = min_j c_ij, v_j = min_i (c_ij - u_i) is a
    /// feasible dual pair, so Σ aᵢuᵢ + Σ bⱼvⱼ never exceeds the remaining
    /// transport cost.
    fn lower_bound(&self) -> f64 {
        let k = self.cost.cols;
        let mut lb = 0.0;
        let mut u = [0.0f64; 8];
        for (i, &on) in self.act_a.iter().enumerate() {
            if on {
                let mut best = f64::INFINITY;
                for (j, &onb) in self.act_b.iter().enumerate() {
                    if onb {
                        best = best.min(self.cost.entries[i * k + j]);
                    }
                }
                u[i] = best;
                lb += self.rem_a[i] * best;
            }
        }
        for (j, &on) in self.act_b.iter().enumerate() {
            if on && self.rem_b[j] > 0.0 {
                let mut best = f64::INFINITY;
                for (i, &ona) in self.act_a.iter().enumerate() {
                    if ona {
                        best = best.min(self.cost.entries[i * k + j] - u[i]);
                    }
                }
                lb += self.rem_b[j] * best;
            }
        }
        lb
    }

    /// Cheapest-cell-first greedy elimination: a feasible vertex to seed the
    /// incumbent for pruning.
    fn greedy_incumbent(&mut self) -> f64 {
        let k = self.cost.cols;
        let mut rem_a = self.rem_a.clone();
        let mut rem_b = self.rem_b.clone();
        let mut act_a = self.act_a.clone();
        let mut act_b = self.act_b.clone();
        let mut total = 0.0;
        let mut na = act_a.iter().filter(|&&x| x).count();
        let mut nb = act_b.iter().filter(|&&x| x).count();
        while na > 1 && nb > 1 {
            let cell = self
                .order
                .iter()
                .copied()
                .find(|&c| act_a[c / k] && act_b[c % k])
                .unwrap();
            let (i, j) = (cell / k, cell % k);
            if rem_a[i] <= rem_b[j] {
                total += rem_a[i] * self.cost.entries[cell];
                rem_b[j] -= rem_a[i];
                act_a[i] = false;
                na -= 1;
            } else {
                total += rem_b[j] * self.cost.entries[cell];
                rem_a[i] -= rem_b[j];
                act_b[j] = false;
                nb -= 1;
            }
        }
        if na == 1 {
            let i = act_a.iter().position(|&x| x).unwrap();
            for (j, &on) in act_b.iter().enumerate() {
                if on {
                    total += rem_b[j] * self.cost.entries[i * k + j];
                }
            }
        } else {
            let j = act_b.iter().position(|&x| x).unwrap();
            for (i, &on) in act_a.iter().enumerate() {
                if on {
                    total += rem_a[i] * self.cost.entries[i * k + j];
                }
            }
        }
        total
    }

    fn recurse(&mut self, partial: f64, prev_cell: usize, prev_i: usize, prev_j: usize) {
        let k = self.cost.cols;
        let na = self.act_a.iter().filter(|&&x| x).count();
        let nb = self.act_b.iter().filter(|&&x| x).count();
        // With a single node left on one side, the rest of the tree is forced.
        if na == 1 {
            let i = self.act_a.iter().position(|&x| x).unwrap();
            let mut total = partial;
            for (j, &on) in self.act_b.iter().enumerate() {
                if on {
                    total += self.rem_b[j] * self.cost.entries[i * k + j];
                }
            }
            if total < self.best {
                self.best = total;
            }
            return;
        }
        if nb == 1 {
            let j = self.act_b.iter().position(|&x| x).unwrap();
            let mut total = partial;
            for (i, &on) in self.act_a.iter().enumerate() {
                if on {
                    total += self.rem_a[i] * self.cost.entries[i * k + j];
                }
            }
            if total < self.best {
                self.best = total;
            }
            return;
        }
        if partial + self.lower_bound() >= self.best {
            return;
        }
        for idx in 0..self.order.len() {
            let cell = self.order[idx];
            let (i, j) = (cell / k, cell % k);
            if !self.act_a[i] || !self.act_b[j] {
                continue;
            }
            // Adjacent independent steps commute; keep only the sorted
            // representative of each elimination trace.
            if prev_cell != usize::MAX && cell < prev_cell && i != prev_i && j != prev_j {
                continue;
            }
            let (ra, rb) = (self.rem_a[i], self.rem_b[j]);
            let c = self.cost.entries[cell];
            if ra <= rb {
                // Source i is a leaf shipping all of ra over (i, j).
                self.act_a[i] = false;
                self.rem_b[j] = rb - ra;
                self.recurse(partial + ra * c, cell, i, j);
                self.act_a[i] = true;
                self.rem_b[j] = rb;
            } else {
                // Target j is a leaf absorbing all of rb over (i, j).
                self.act_b[j] = false;
                self.rem_a[i] = ra - rb;
                self.recurse(partial + rb * c, cell, i, j);
                self.act_b[j] = true;
                self.rem_a[i] = ra;
            }
        }
    }
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Kantorovich–Rubinstein lower bound |∫f dβ - ∫f dα| from a function the
/// caller asserts is 1-Lipschitz for the ground metric.
pub fn w1_lower_bound_via_lipschitz(
    f_source: &[f64],
    f_target: &[f64],
    source: &[f64],
    target: &[f64],
) -> f64 {
    let mut s = crate::stats::KahanSum::new();
    for (f, w) in f_target.iter().zip(target) {
        s.add(f * w);
    }
    for (f, w) in f_source.iter().zip(source) {
        s.add(-f * w);
    }
    libm::fabs(s.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cost(xs: &[f64], ys: &[f64]) -> CostMatrix {
        CostMatrix::from_fn(xs.len(), ys.len(), |i, j| libm::fabs(xs[i] - ys[j])).unwrap()
    }

    #[test]
    fn single_atoms() {
        let cost = CostMatrix::new(1, 1, alloc::vec![2.5]).unwrap();
        let plan = solve_w1(&[1.0], &[1.0], &cost).unwrap();
        assert_eq!(plan.cost, 2.5);
        assert_eq!(plan.coupling, alloc::vec![1.0]);
        assert_eq!(brute_force_w1(&[1.0], &[1.0], &cost).unwrap(), 2.5);
    }

    #[test]
    fn identical_clouds_cost_zero() {
        let xs = [0.0, 1.0, 2.5, 4.0];
        let cost = line_cost(&xs, &xs);
        let w = [0.25; 4];
        let plan = solve_w1(&w, &w, &cost).unwrap();
        assert!(plan.cost.abs() < 1e-12);
    }

    #[test]
    fn skewed_line_instance() {
        // Source {0: 0.7, 1: 0.3}, target {0: 0.3, 1: 0.7}: move 0.4 across.
        let cost = line_cost(&[0.0, 1.0], &[0.0, 1.0]);
        let plan = solve_w1(&[0.7, 0.3], &[0.3, 0.7], &cost).unwrap();
        assert!((plan.cost - 0.4).abs() < 1e-12);
        assert!((brute_force_w1(&[0.7, 0.3], &[0.3, 0.7], &cost).unwrap() - 0.4).abs() < 1e-15);
        let check = plan.verify(&[0.7, 0.3], &[0.3, 0.7], &cost);
        assert!(check.max_marginal_err < 1e-12);
        assert!(check.max_dual_violation < 1e-12);
        assert!(check.duality_gap.abs() < 1e-12);
    }

    #[test]
    fn disjoint_uniform_pairs() {
        let cost = line_cost(&[0.0, 1.0], &[2.0, 3.0]);
        let plan = solve_w1(&[0.5, 0.5], &[0.5, 0.5], &cost).unwrap();
        assert!((plan.cost - 2.0).abs() < 1e-12);
        assert!((brute_force_w1(&[0.5, 0.5], &[0.5, 0.5], &cost).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn brute_force_diag_zero() {
        let cost = CostMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
        let w = [1.0 / 3.0; 3];
        assert_eq!(brute_force_w1(&w, &w, &cost).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_bound_examples() {
        // Constant f gives zero.
        assert_eq!(w1_lower_bound_via_lipschitz(&[5.0, 5.0], &[5.0], &[0.5, 0.5], &[1.0]), 0.0);
        // f(z) = z on the 0.7/0.3 line instance recovers the optimum.
        let lb = w1_lower_bound_via_lipschitz(&[0.0, 1.0], &[0.0, 1.0], &[0.7, 0.3], &[0.3, 0.7]);
        assert!((lb - 0.4).abs() < 1e-15);
    }

    #[test]
    fn too_large_is_reported() {
        let cost = CostMatrix::from_fn(9, 9, |i, j| (i + j) as f64).unwrap();
        let w = [1.0 / 9.0; 9];
        assert_eq!(brute_force_w1(&w, &w, &cost).unwrap_err(), OtError::TooLarge);
    }

    #[test]
    fn dimension_mismatch() {
        let cost = CostMatrix::from_fn(2, 2, |_, _| 1.0).unwrap();
        assert_eq!(solve_w1(&[1.0], &[0.5, 0.5], &cost).unwrap_err(), OtError::DimensionMismatch);
    }
}

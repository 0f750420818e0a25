//! Geometric queries on a vessel tree: nearest centerline point, lumen
//! clearance, along-centerline path length, and in-lumen sampling.

use super::{ArcPosition, Branch, BranchId, Result, VesselError, VesselTree};
use nalgebra::Vector3;
use rand::Rng;
use std::collections::BinaryHeap;

/// Result of a proximity query against the centerlines.
#[derive(Debug, Clone, Copy)]
pub struct LumenHit {
    pub position: ArcPosition,
    /// Euclidean distance from the query point to the centerline, mm.
    pub dist: f64,
    /// Local centerline direction (unit).
    pub tangent: Vector3<f64>,
    /// Lumen radius at the foot point, mm.
    pub radius: f64,
    /// Foot point on the centerline, mm.
    pub foot: Vector3<f64>,
}

impl LumenHit {
    /// Signed clearance: negative inside the tube, positive outside.
    pub fn clearance(&self) -> f64 {
        self.dist - self.radius
    }
}

impl VesselTree {
    /// The arc position minimizing Euclidean distance from `p` to the
    /// piecewise-linear centerlines. Total function; ties resolve to the
    /// first branch/segment in iteration order.
    pub fn nearest_lumen_point(&self, p: Vector3<f64>) -> LumenHit {
        self.scan_segments(p, |cand, best| cand.dist < best.dist)
    }

    /// The arc position minimizing `dist - radius`, i.e. the tube whose lumen
    /// the point is deepest inside. This is the query used for wall-collision
    /// handling: near ostia a point can be inside a wide parent while the
    /// nearest centerline belongs to a narrow child.
    pub fn deepest_lumen_point(&self, p: Vector3<f64>) -> LumenHit {
        self.scan_segments(p, |cand, best| cand.clearance() < best.clearance())
    }

    /// True when the point lies inside the union-of-tubes lumen.
    pub fn contains(&self, p: Vector3<f64>) -> bool {
        self.deepest_lumen_point(p).clearance() <= 1e-9
    }

    fn scan_segments(
        &self,
        p: Vector3<f64>,
        better: impl Fn(&LumenHit, &LumenHit) -> bool,
    ) -> LumenHit {
        let mut best: Option<LumenHit> = None;
        for (bi, branch) in self.branches().iter().enumerate() {
            for i in 1..branch.points.len() {
                let a = &branch.points[i - 1];
                let b = &branch.points[i];
                let ab = b.position - a.position;
                let len2 = ab.norm_squared();
                let t = ((p - a.position).dot(&ab) / len2).clamp(0.0, 1.0);
                let foot = a.position + ab * t;
                let dist = (p - foot).norm();
                let radius = a.radius + (b.radius - a.radius) * t;
                let cand = LumenHit {
                    position: ArcPosition {
                        branch: BranchId(bi),
                        s: a.arc + (b.arc - a.arc) * t,
                    },
                    dist,
                    tangent: ab / len2.sqrt(),
                    radius,
                    foot,
                };
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
            }
        }
        best.expect("tree has at least one branch with one segment")
    }

    /// Shortest along-centerline distance between two arc positions.
    ///
    /// The route runs along branches and crosses between a child and its
    /// parent only at the attachment point. Symmetric in its arguments.
    pub fn path_length(&self, a: ArcPosition, b: ArcPosition) -> f64 {
        let g = self.station_graph();
        if a.branch == b.branch {
            // Same-branch direct run is always admissible; on a tree it is
            // also optimal (any detour would revisit an edge).
            return (a.s - b.s).abs();
        }
        g.dijkstra(a, b)
    }

    /// Uniform sample inside the lumen of a branch region.
    ///
    /// Draws a uniform arc coordinate in `[s_min, s_max]`, then a uniform
    /// point in the perpendicular disc of the local radius.
    pub fn sample_point_in_region(
        &self,
        branch: BranchId,
        s_min: f64,
        s_max: f64,
        rng: &mut impl Rng,
    ) -> Result<Vector3<f64>> {
        Ok(self.sample_region_detailed(branch, s_min, s_max, rng)?.0)
    }

    /// As [`Self::sample_point_in_region`], also returning the axial arc
    /// position the sample was drawn around.
    pub fn sample_region_detailed(
        &self,
        branch: BranchId,
        s_min: f64,
        s_max: f64,
        rng: &mut impl Rng,
    ) -> Result<(Vector3<f64>, ArcPosition)> {
        if s_min > s_max {
            return Err(VesselError::Argument(format!(
                "empty region: s_min {s_min} > s_max {s_max}"
            )));
        }
        let total = self.branch(branch).total_len();
        if s_min < -1e-9 || s_max > total + 1e-9 {
            return Err(VesselError::Argument(format!(
                "region [{s_min}, {s_max}] outside branch extent [0, {total}]"
            )));
        }
        let s = if s_max > s_min {
            rng.gen_range(s_min..s_max)
        } else {
            s_min
        };
        let pos = ArcPosition { branch, s };
        let (center, tangent, radius) = self.at(pos);
        let (u, v) = perpendicular_basis(tangent);
        // Uniform in the disc: radius ~ sqrt(U), angle ~ U. Stay fractionally
        // inside the wall so the sample is in the open lumen.
        let r = radius * 0.98 * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        Ok((center + u * (r * theta.cos()) + v * (r * theta.sin()), pos))
    }
}

/// Deterministic orthonormal basis perpendicular to `t` (assumed unit).
///
/// Uses the global +Z axis as reference normal, falling back to +X when the
/// tangent is within ~0.6 degrees of Z.
pub fn perpendicular_basis(t: Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let up = Vector3::z();
    let reference = if t.dot(&up).abs() > 0.99995 {
        Vector3::x()
    } else {
        up
    };
    let u = (reference - t * reference.dot(&t)).normalize();
    let v = t.cross(&u);
    (u, v)
}

/// Node graph for path-length queries. Stations are branch endpoints and
/// child-attachment points; edges are centerline runs between consecutive
/// stations plus zero-length hops from a child's start to its parent station.
#[derive(Debug, Clone)]
pub(crate) struct StationGraph {
    /// Sorted station arcs per branch.
    arcs: Vec<Vec<f64>>,
    /// Station index offsets per branch.
    offsets: Vec<usize>,
    /// Adjacency: `(node, weight)` lists.
    adj: Vec<Vec<(usize, f64)>>,
}

impl StationGraph {
    pub(crate) fn build(branches: &[Branch]) -> Self {
        let n = branches.len();
        let mut arcs: Vec<Vec<f64>> = (0..n).map(|_| Vec::new()).collect();
        for (i, b) in branches.iter().enumerate() {
            arcs[i].push(0.0);
            arcs[i].push(b.total_len());
            if let Some(att) = b.parent {
                arcs[att.parent.0].push(att.arc);
            }
        }
        for a in &mut arcs {
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            a.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        }
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for a in &arcs {
            offsets.push(total);
            total += a.len();
        }
        let mut adj = vec![Vec::new(); total];
        // Along-branch edges.
        for (bi, a) in arcs.iter().enumerate() {
            for i in 1..a.len() {
                let u = offsets[bi] + i - 1;
                let v = offsets[bi] + i;
                let w = a[i] - a[i - 1];
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        // Attachment hops.
        for (ci, b) in branches.iter().enumerate() {
            if let Some(att) = b.parent {
                let child_start = offsets[ci]; // arc 0 is always station 0
                let pi = att.parent.0;
                let k = nearest_station(&arcs[pi], att.arc);
                let parent_node = offsets[pi] + k;
                adj[child_start].push((parent_node, 0.0));
                adj[parent_node].push((child_start, 0.0));
            }
        }
        Self { arcs, offsets, adj }
    }

    /// Shortest path between two arc positions on different branches.
    pub(crate) fn dijkstra(&self, a: ArcPosition, b: ArcPosition) -> f64 {
        debug_assert_ne!(a.branch, b.branch);
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        // Seed from the two stations bracketing `a` on its branch.
        for (node, w) in self.bracket(a) {
            if w < dist[node] {
                dist[node] = w;
                heap.push(HeapEntry { cost: w, node });
            }
        }
        let goals = self.bracket(b);
        let mut best = f64::INFINITY;
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(next, w) in &self.adj[node] {
                let nd = cost + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(HeapEntry {
                        cost: nd,
                        node: next,
                    });
                }
            }
        }
        for (node, w) in goals {
            best = best.min(dist[node] + w);
        }
        best
    }

    /// Stations bracketing an arc position on its branch, with partial-arc
    /// offsets as weights.
    fn bracket(&self, p: ArcPosition) -> Vec<(usize, f64)> {
        let arcs = &self.arcs[p.branch.0];
        let off = self.offsets[p.branch.0];
        let i = arcs.partition_point(|&s| s < p.s);
        let mut out = Vec::with_capacity(2);
        if i > 0 {
            out.push((off + i - 1, p.s - arcs[i - 1]));
        }
        if i < arcs.len() {
            out.push((off + i, arcs[i] - p.s));
        }
        out
    }
}

fn nearest_station(arcs: &[f64], s: f64) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, &a) in arcs.iter().enumerate() {
        let d = (a - s).abs();
        if d < bd {
            bd = d;
            best = i;
        }
    }
    debug_assert!(bd < 1e-9, "attachment arc must be a station");
    best
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on cost.
        other.cost.partial_cmp(&self.cost).unwrap()
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

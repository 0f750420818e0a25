//! Vascular anatomy as a branch graph of centerlines with per-point radii.
//!
//! A [`VesselTree`] is a connected tree of [`Branch`]es. Each branch is a
//! piecewise-linear centerline with a linearly interpolated lumen radius;
//! child branches attach at an arc coordinate on their parent. All geometric
//! queries (nearest point, along-centerline path length, in-lumen sampling)
//! go through the tree. Trees are immutable after construction and cheap to
//! share read-only across environment instances.

mod augment;
mod geometry;
mod schema;
mod synth;
#[cfg(test)]
pub(crate) mod testutil;

pub use augment::{apply_augmentation, remap_arc, AugmentParams};
pub use geometry::{perpendicular_basis, LumenHit};
pub use schema::{load_tree, load_tree_from_file, save_tree, save_tree_to_file, ANATOMY_SCHEMA_VERSION};
pub use synth::{generate_synthetic_anatomy, AnatomySpec};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum allowed spacing between consecutive centerline points, in mm.
pub const MAX_POINT_SPACING: f64 = 2.0;

/// Target spacing used when a branch needs resampling, in mm. Chosen below
/// half of [`MAX_POINT_SPACING`] so that augmentation scaling up to 1.3x
/// cannot push spacing past the invariant.
pub const RESAMPLE_SPACING: f64 = 1.0;

#[derive(Debug, Error)]
pub enum VesselError {
    #[error("anatomy parse error: {0}")]
    Parse(String),
    #[error("branch '{branch}': {detail}")]
    Schema { branch: String, detail: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("generator error: {0}")]
    Generator(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VesselError>;

/// Aortic arch classification by the vertical offset of branch origins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchType {
    TypeI,
    TypeII,
}

/// Index of a branch within its tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchId(pub usize);

/// A point on a branch centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterlinePoint {
    /// Position in mm.
    pub position: Vector3<f64>,
    /// Lumen radius in mm; strictly positive.
    pub radius: f64,
    /// Cumulative arc length from the branch start, in mm.
    pub arc: f64,
}

/// Attachment of a branch onto its parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attachment {
    pub parent: BranchId,
    /// Arc coordinate on the parent at which this branch starts.
    pub arc: f64,
}

/// One centerline branch.
#[derive(Debug, Clone)]
pub struct Branch {
    pub name: String,
    pub parent: Option<Attachment>,
    pub points: Vec<CenterlinePoint>,
}

impl Branch {
    /// Total arc length in mm.
    pub fn total_len(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.arc)
    }
}

/// A position along the tree's centerlines: branch plus arc coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPosition {
    pub branch: BranchId,
    pub s: f64,
}

/// Axis-aligned bounding box in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

/// Validated vascular tree. Construct via [`VesselTree::build`],
/// [`load_tree`] or [`generate_synthetic_anatomy`].
#[derive(Debug, Clone)]
pub struct VesselTree {
    branches: Vec<Branch>,
    root: BranchId,
    bounding_box: BoundingBox,
    arch_type: ArchType,
    /// Station graph for path-length queries (see `geometry`).
    stations: geometry::StationGraph,
}

impl VesselTree {
    /// Validates raw branches, resamples where spacing exceeds
    /// [`RESAMPLE_SPACING`], recomputes arcs and the bounding box.
    ///
    /// Raw branch points carry positions and radii; `arc` fields are ignored
    /// and recomputed.
    pub fn build(raw: Vec<Branch>, arch_type: ArchType) -> Result<Self> {
        if raw.is_empty() {
            return Err(VesselError::Topology("tree has no branches".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &raw {
            if !seen.insert(b.name.clone()) {
                return Err(VesselError::Schema {
                    branch: b.name.clone(),
                    detail: "duplicate branch id".into(),
                });
            }
        }
        let mut branches = Vec::with_capacity(raw.len());
        for b in raw {
            branches.push(prepare_branch(b)?);
        }

        // Exactly one root; every parent reference in range.
        let roots: Vec<usize> = branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.parent.is_none())
            .map(|(i, _)| i)
            .collect();
        let root = match roots.as_slice() {
            [r] => BranchId(*r),
            [] => return Err(VesselError::Topology("no root branch (cycle)".into())),
            _ => {
                return Err(VesselError::Topology(format!(
                    "disconnected graph: {} parentless branches",
                    roots.len()
                )))
            }
        };
        for b in &branches {
            if let Some(att) = b.parent {
                let Some(parent) = branches.get(att.parent.0) else {
                    return Err(VesselError::Schema {
                        branch: b.name.clone(),
                        detail: "parent id not found".into(),
                    });
                };
                if !att.arc.is_finite() || att.arc < 0.0 || att.arc > parent.total_len() + 1e-9 {
                    return Err(VesselError::Schema {
                        branch: b.name.clone(),
                        detail: format!(
                            "attachment arc {} outside parent extent [0, {}]",
                            att.arc,
                            parent.total_len()
                        ),
                    });
                }
            }
        }

        // Connectivity: walking parent links from every branch must reach the
        // root without revisiting (tree, no cycles).
        for (i, _) in branches.iter().enumerate() {
            let mut hops = 0;
            let mut cur = i;
            while let Some(att) = branches[cur].parent {
                cur = att.parent.0;
                hops += 1;
                if hops > branches.len() {
                    return Err(VesselError::Topology("cycle in parent links".into()));
                }
            }
            if cur != root.0 {
                return Err(VesselError::Topology(format!(
                    "branch '{}' not connected to root",
                    branches[i].name
                )));
            }
        }

        // Attachment containment: the child's first point must lie within the
        // parent lumen at the attachment arc coordinate.
        for b in &branches {
            if let Some(att) = b.parent {
                let parent = &branches[att.parent.0];
                let (pos, radius) = point_on_branch(parent, att.arc);
                let d = (b.points[0].position - pos).norm();
                if d > radius + 1e-6 {
                    return Err(VesselError::Schema {
                        branch: b.name.clone(),
                        detail: format!(
                            "first point is {d:.3} mm from parent centerline at attachment \
                             (parent radius {radius:.3} mm)"
                        ),
                    });
                }
            }
        }

        let bounding_box = compute_bbox(&branches);
        let stations = geometry::StationGraph::build(&branches);
        Ok(Self {
            branches,
            root,
            bounding_box,
            arch_type,
            stations,
        })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, id: BranchId) -> &Branch {
        &self.branches[id.0]
    }

    pub fn root(&self) -> BranchId {
        self.root
    }

    pub fn arch_type(&self) -> ArchType {
        self.arch_type
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bounding_box
    }

    /// Looks a branch up by its schema id.
    pub fn branch_by_name(&self, name: &str) -> Option<BranchId> {
        self.branches
            .iter()
            .position(|b| b.name == name)
            .map(BranchId)
    }

    /// Position, tangent and radius at an arc position. The arc coordinate is
    /// clamped to the branch extent.
    pub fn at(&self, pos: ArcPosition) -> (Vector3<f64>, Vector3<f64>, f64) {
        let b = self.branch(pos.branch);
        let (p, r) = point_on_branch(b, pos.s);
        let t = tangent_on_branch(b, pos.s);
        (p, t, r)
    }

    pub(crate) fn station_graph(&self) -> &geometry::StationGraph {
        &self.stations
    }
}

fn prepare_branch(mut b: Branch) -> Result<Branch> {
    if b.points.len() < 2 {
        return Err(VesselError::Schema {
            branch: b.name.clone(),
            detail: format!("needs at least 2 points, got {}", b.points.len()),
        });
    }
    for (i, p) in b.points.iter().enumerate() {
        if !(p.radius.is_finite() && p.radius > 0.0) {
            return Err(VesselError::Schema {
                branch: b.name.clone(),
                detail: format!("point {i}: radius must be > 0, got {}", p.radius),
            });
        }
        if !p.position.iter().all(|c| c.is_finite()) {
            return Err(VesselError::Schema {
                branch: b.name.clone(),
                detail: format!("point {i}: non-finite coordinate"),
            });
        }
    }
    for w in b.points.windows(2) {
        if (w[1].position - w[0].position).norm() <= 1e-12 {
            return Err(VesselError::Schema {
                branch: b.name.clone(),
                detail: "coincident consecutive points".into(),
            });
        }
    }
    recompute_arcs(&mut b.points);
    let needs_resample = b
        .points
        .windows(2)
        .any(|w| w[1].arc - w[0].arc > RESAMPLE_SPACING + 1e-12);
    if needs_resample {
        b.points = resample(&b.points, RESAMPLE_SPACING);
    }
    debug_assert!(b
        .points
        .windows(2)
        .all(|w| w[1].arc - w[0].arc <= MAX_POINT_SPACING));
    Ok(b)
}

fn recompute_arcs(points: &mut [CenterlinePoint]) {
    let mut acc = 0.0;
    points[0].arc = 0.0;
    for i in 1..points.len() {
        acc += (points[i].position - points[i - 1].position).norm();
        points[i].arc = acc;
    }
}

/// Uniform arc-length resampling along the same polyline. Endpoints are
/// preserved; interior samples lie on the original segments.
fn resample(points: &[CenterlinePoint], target: f64) -> Vec<CenterlinePoint> {
    let total = points.last().unwrap().arc;
    let n_seg = (total / target).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n_seg + 1);
    for i in 0..=n_seg {
        let s = total * i as f64 / n_seg as f64;
        let (pos, radius) = interp_on_points(points, s);
        out.push(CenterlinePoint {
            position: pos,
            radius,
            arc: 0.0,
        });
    }
    recompute_arcs(&mut out);
    out
}

fn interp_on_points(points: &[CenterlinePoint], s: f64) -> (Vector3<f64>, f64) {
    let s = s.clamp(0.0, points.last().unwrap().arc);
    let idx = match points.binary_search_by(|p| p.arc.partial_cmp(&s).unwrap()) {
        Ok(i) => return (points[i].position, points[i].radius),
        Err(i) => i,
    };
    let (a, b) = (&points[idx - 1], &points[idx]);
    let t = (s - a.arc) / (b.arc - a.arc);
    (
        a.position + (b.position - a.position) * t,
        a.radius + (b.radius - a.radius) * t,
    )
}

pub(crate) fn point_on_branch(b: &Branch, s: f64) -> (Vector3<f64>, f64) {
    interp_on_points(&b.points, s)
}

pub(crate) fn tangent_on_branch(b: &Branch, s: f64) -> Vector3<f64> {
    let s = s.clamp(0.0, b.total_len());
    // Segment containing s; ties at vertices resolve to the following segment.
    let idx = b
        .points
        .partition_point(|p| p.arc <= s)
        .clamp(1, b.points.len() - 1);
    (b.points[idx].position - b.points[idx - 1].position).normalize()
}

fn compute_bbox(branches: &[Branch]) -> BoundingBox {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for b in branches {
        for p in &b.points {
            for k in 0..3 {
                min[k] = min[k].min(p.position[k] - p.radius);
                max[k] = max[k].max(p.position[k] + p.radius);
            }
        }
    }
    BoundingBox { min, max }
}

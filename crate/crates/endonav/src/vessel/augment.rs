//! Per-episode anatomy augmentation: random anisotropic scaling and rotation.

use super::{compute_bbox, recompute_arcs, ArcPosition, Branch, Result, VesselError, VesselTree};
use crate::vessel::geometry::StationGraph;
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Scale bounds per axis.
pub const SCALE_RANGE: (f64, f64) = (0.7, 1.3);
/// Rotation bound about each of the x and y axes, radians (30 degrees).
pub const ROT_LIMIT: f64 = 30.0 * std::f64::consts::PI / 180.0;

/// Random augmentation parameters: per-axis scale and rotations about the
/// x and y axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub scale: [f64; 3],
    pub rot_x: f64,
    pub rot_y: f64,
}

impl AugmentParams {
    pub const IDENTITY: Self = Self {
        scale: [1.0, 1.0, 1.0],
        rot_x: 0.0,
        rot_y: 0.0,
    };

    /// Draws parameters uniformly within the allowed ranges.
    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            scale: [
                rng.gen_range(SCALE_RANGE.0..=SCALE_RANGE.1),
                rng.gen_range(SCALE_RANGE.0..=SCALE_RANGE.1),
                rng.gen_range(SCALE_RANGE.0..=SCALE_RANGE.1),
            ],
            rot_x: rng.gen_range(-ROT_LIMIT..=ROT_LIMIT),
            rot_y: rng.gen_range(-ROT_LIMIT..=ROT_LIMIT),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.scale.iter().enumerate() {
            if !(SCALE_RANGE.0..=SCALE_RANGE.1).contains(s) {
                return Err(VesselError::Argument(format!(
                    "scale[{i}] = {s} outside [{}, {}]",
                    SCALE_RANGE.0, SCALE_RANGE.1
                )));
            }
        }
        for (name, r) in [("rot_x", self.rot_x), ("rot_y", self.rot_y)] {
            if r.abs() > ROT_LIMIT + 1e-12 {
                return Err(VesselError::Argument(format!(
                    "{name} = {r} exceeds {ROT_LIMIT} rad"
                )));
            }
        }
        Ok(())
    }
}

/// Applies `R_y(rot_y) * R_x(rot_x) * diag(scale)` to every centerline point.
///
/// Radii scale with the lumen cross-section: for a linear map `A` the
/// cross-sectional area perpendicular to the tangent `t` scales by
/// `det(A) * |A^-T t|`, so the radius scales by its square root. For
/// axis-aligned tangents this reduces to the geometric mean of the two
/// transverse scale components. Point count and topology are preserved
/// exactly; arc lengths and the bounding box are recomputed.
pub fn apply_augmentation(tree: &VesselTree, params: &AugmentParams) -> Result<VesselTree> {
    params.validate()?;
    let s = Vector3::new(params.scale[0], params.scale[1], params.scale[2]);
    let rot = Rotation3::from_axis_angle(&Vector3::y_axis(), params.rot_y)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), params.rot_x);
    let linear: Matrix3<f64> = rot.to_homogeneous().fixed_view::<3, 3>(0, 0).into_owned()
        * Matrix3::from_diagonal(&s);
    let det = s.x * s.y * s.z;

    let mut branches: Vec<Branch> = Vec::with_capacity(tree.branches().len());
    for b in tree.branches() {
        let tangents = vertex_tangents(b);
        let mut points = b.points.clone();
        for (p, t) in points.iter_mut().zip(&tangents) {
            let inv_t = Vector3::new(t.x / s.x, t.y / s.y, t.z / s.z);
            p.radius *= (det * inv_t.norm()).sqrt();
            p.position = linear * p.position;
        }
        recompute_arcs(&mut points);
        branches.push(Branch {
            name: b.name.clone(),
            parent: b.parent,
            points,
        });
    }

    // Attachment arcs are material coordinates on the parent; remap them into
    // the parent's new arc parametrization.
    let remaps: Vec<ArcRemapTable> = tree
        .branches()
        .iter()
        .zip(&branches)
        .map(|(old, new)| ArcRemapTable::new(old, new))
        .collect();
    for b in &mut branches {
        if let Some(att) = &mut b.parent {
            att.arc = remaps[att.parent.0].map(att.arc);
        }
    }

    let bounding_box = compute_bbox(&branches);
    let stations = StationGraph::build(&branches);
    Ok(VesselTree {
        branches,
        root: tree.root(),
        bounding_box,
        arch_type: tree.arch_type(),
        stations,
    })
}

/// Remaps an arc position on `old` to the corresponding material point on
/// `new`. Both trees must share topology and point counts (i.e. `new` came
/// from [`apply_augmentation`] of `old`, or vice versa).
pub fn remap_arc(old: &VesselTree, new: &VesselTree, pos: ArcPosition) -> ArcPosition {
    let table = ArcRemapTable::new(old.branch(pos.branch), new.branch(pos.branch));
    ArcPosition {
        branch: pos.branch,
        s: table.map(pos.s),
    }
}

struct ArcRemapTable {
    old: Vec<f64>,
    new: Vec<f64>,
}

impl ArcRemapTable {
    fn new(old: &Branch, new: &Branch) -> Self {
        assert_eq!(
            old.points.len(),
            new.points.len(),
            "arc remap requires matching point counts"
        );
        Self {
            old: old.points.iter().map(|p| p.arc).collect(),
            new: new.points.iter().map(|p| p.arc).collect(),
        }
    }

    fn map(&self, s: f64) -> f64 {
        let s = s.clamp(self.old[0], *self.old.last().unwrap());
        let i = self.old.partition_point(|&a| a < s).clamp(1, self.old.len() - 1);
        let t = (s - self.old[i - 1]) / (self.old[i] - self.old[i - 1]);
        self.new[i - 1] + t * (self.new[i] - self.new[i - 1])
    }
}

/// Per-vertex tangents: averaged adjacent segment directions.
fn vertex_tangents(b: &Branch) -> Vec<Vector3<f64>> {
    let n = b.points.len();
    let seg: Vec<Vector3<f64>> = (1..n)
        .map(|i| (b.points[i].position - b.points[i - 1].position).normalize())
        .collect();
    (0..n)
        .map(|i| {
            if i == 0 {
                seg[0]
            } else if i == n - 1 {
                seg[n - 2]
            } else {
                (seg[i - 1] + seg[i]).normalize()
            }
        })
        .collect()
}

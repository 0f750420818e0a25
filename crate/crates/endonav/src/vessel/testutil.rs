//! Shared vessel fixtures for tests.

use super::{ArchType, Attachment, Branch, BranchId, CenterlinePoint, VesselTree};
use nalgebra::Vector3;

pub fn pt(x: f64, y: f64, z: f64, r: f64) -> CenterlinePoint {
    CenterlinePoint {
        position: Vector3::new(x, y, z),
        radius: r,
        arc: 0.0,
    }
}

/// A single straight tube along +Y.
pub fn straight_tube(len: f64, r: f64) -> VesselTree {
    VesselTree::build(
        vec![Branch {
            name: "tube".into(),
            parent: None,
            points: vec![pt(0.0, 0.0, 0.0, r), pt(0.0, len, 0.0, r)],
        }],
        ArchType::TypeI,
    )
    .unwrap()
}

/// Trunk along +Y for 100 mm (r = 4); side branch leaves at arc 50 along +X
/// for 40 mm (r = 2).
pub fn y_tree() -> VesselTree {
    let parent = Branch {
        name: "trunk".into(),
        parent: None,
        points: vec![pt(0.0, 0.0, 0.0, 4.0), pt(0.0, 100.0, 0.0, 4.0)],
    };
    let child = Branch {
        name: "side".into(),
        parent: Some(Attachment {
            parent: BranchId(0),
            arc: 50.0,
        }),
        points: vec![pt(0.0, 50.0, 0.0, 2.0), pt(40.0, 50.0, 0.0, 2.0)],
    };
    VesselTree::build(vec![parent, child], ArchType::TypeI).unwrap()
}

//! Anatomy file format, versioned `endonav-anatomy/1`.
//!
//! JSON document: `{version, arch_type, branches: [{id, parent: {id, s} |
//! null, points: [{x, y, z, r}]}]}` with all lengths in millimeters. The
//! serializer emits the same schema, so load -> save -> load is field-exact.

use super::{ArchType, Attachment, Branch, BranchId, CenterlinePoint, Result, VesselError, VesselTree};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const ANATOMY_SCHEMA_VERSION: &str = "endonav-anatomy/1";

#[derive(Debug, Serialize, Deserialize)]
struct Document {
    version: String,
    arch_type: ArchType,
    branches: Vec<BranchDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BranchDoc {
    id: String,
    parent: Option<ParentDoc>,
    points: Vec<PointDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParentDoc {
    id: String,
    s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointDoc {
    x: f64,
    y: f64,
    z: f64,
    r: f64,
}

/// Parses and validates an anatomy document.
pub fn load_tree(document: &str) -> Result<VesselTree> {
    let doc: Document =
        serde_json::from_str(document).map_err(|e| VesselError::Parse(e.to_string()))?;
    if doc.version != ANATOMY_SCHEMA_VERSION {
        return Err(VesselError::Parse(format!(
            "unsupported schema version '{}', expected '{ANATOMY_SCHEMA_VERSION}'",
            doc.version
        )));
    }
    let ids: Vec<String> = doc.branches.iter().map(|b| b.id.clone()).collect();
    let index_of = |id: &str, child: &str| -> Result<BranchId> {
        ids.iter()
            .position(|x| x == id)
            .map(BranchId)
            .ok_or_else(|| VesselError::Schema {
                branch: child.to_string(),
                detail: format!("parent id '{id}' not found"),
            })
    };
    let mut branches = Vec::with_capacity(doc.branches.len());
    for b in &doc.branches {
        let parent = match &b.parent {
            Some(p) => Some(Attachment {
                parent: index_of(&p.id, &b.id)?,
                arc: p.s,
            }),
            None => None,
        };
        let points = b
            .points
            .iter()
            .map(|p| CenterlinePoint {
                position: Vector3::new(p.x, p.y, p.z),
                radius: p.r,
                arc: 0.0,
            })
            .collect();
        branches.push(Branch {
            name: b.id.clone(),
            parent,
            points,
        });
    }
    VesselTree::build(branches, doc.arch_type)
}

/// Serializes a tree back to the anatomy schema.
pub fn save_tree(tree: &VesselTree) -> String {
    let doc = Document {
        version: ANATOMY_SCHEMA_VERSION.to_string(),
        arch_type: tree.arch_type(),
        branches: tree
            .branches()
            .iter()
            .map(|b| BranchDoc {
                id: b.name.clone(),
                parent: b.parent.map(|att| ParentDoc {
                    id: tree.branch(att.parent).name.clone(),
                    s: att.arc,
                }),
                points: b
                    .points
                    .iter()
                    .map(|p| PointDoc {
                        x: p.position.x,
                        y: p.position.y,
                        z: p.position.z,
                        r: p.radius,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("anatomy document serializes")
}

pub fn load_tree_from_file(path: &Path) -> Result<VesselTree> {
    let text = std::fs::read_to_string(path)?;
    load_tree(&text)
}

pub fn save_tree_to_file(tree: &VesselTree, path: &Path) -> Result<()> {
    std::fs::write(path, save_tree(tree))?;
    Ok(())
}

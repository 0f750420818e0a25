//! Quasi-static kinematic simulation of a coaxial catheter + guidewire pair
//! advancing through a rigid-walled vessel tree.
//!
//! Both devices share one follow-the-leader trail: the historical path traced
//! by whichever tip is distal-most, sampled at millimeter resolution. The
//! leading tip carves new trail in the direction set by its heading, roll and
//! tip bend; the trailing device slides along the existing trail. A candidate
//! motion that would leave the lumen is clamped radially back to the wall,
//! recording a [`ContactSample`] with force proportional to the overshoot;
//! the tangential component of the motion survives the clamp, which is what
//! produces wall sliding.

use crate::vessel::{perpendicular_basis, VesselTree};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum translation speed, mm/s.
pub const MAX_TRANSLATION_SPEED: f64 = 40.0;
/// Maximum rotation speed, rad/s (180 degrees per second).
pub const MAX_ROTATION_SPEED: f64 = std::f64::consts::PI;
/// Trail sampling resolution and carve sub-step, mm.
const TRAIL_STEP: f64 = 1.0;
/// Recorded penetration is capped at this fraction of the local radius.
const PENETRATION_CAP: f64 = 0.75;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid device parameters: {0}")]
    Params(String),
    #[error("placement error: {0}")]
    Placement(String),
}

/// Physical parameters of one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceParams {
    /// Outer diameter, mm.
    pub outer_diameter: f64,
    /// Fixed tip bend relative to the shaft heading, radians. Zero for a
    /// straight-tip catheter.
    pub tip_bend_angle: f64,
    /// Distal tip segment length, mm; also the initial protrusion at reset.
    pub tip_segment_length: f64,
    /// Wall contact stiffness, N/mm.
    pub wall_stiffness: f64,
    /// Heading relaxation toward the local centerline tangent, in [0, 1].
    pub tangent_blend: f64,
    pub max_translation_speed: f64,
    pub max_rotation_speed: f64,
}

impl Default for DeviceParams {
    /// 0.035" angled guidewire.
    fn default() -> Self {
        Self {
            outer_diameter: 0.889,
            tip_bend_angle: 30.0_f64.to_radians(),
            tip_segment_length: 3.0,
            wall_stiffness: 2.0,
            tangent_blend: 0.3,
            max_translation_speed: MAX_TRANSLATION_SPEED,
            max_rotation_speed: MAX_ROTATION_SPEED,
        }
    }
}

impl DeviceParams {
    /// 0.0441" straight multipurpose catheter.
    pub fn catheter_default() -> Self {
        Self {
            outer_diameter: 1.12,
            tip_bend_angle: 0.0,
            ..Self::default()
        }
    }

    pub fn radius(&self) -> f64 {
        self.outer_diameter / 2.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.outer_diameter > 0.0) {
            return Err(SimError::Params("outer_diameter must be > 0".into()));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.tip_bend_angle) {
            return Err(SimError::Params("tip_bend_angle must be in [0, pi/2)".into()));
        }
        if !(self.wall_stiffness > 0.0) {
            return Err(SimError::Params("wall_stiffness must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.tangent_blend) {
            return Err(SimError::Params("tangent_blend must be in [0, 1]".into()));
        }
        if self.max_translation_speed != MAX_TRANSLATION_SPEED
            || self.max_rotation_speed != MAX_ROTATION_SPEED
        {
            return Err(SimError::Params(format!(
                "speed limits are fixed at {MAX_TRANSLATION_SPEED} mm/s and {MAX_ROTATION_SPEED} rad/s"
            )));
        }
        Ok(())
    }
}

/// Guidewire/catheter pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DevicePair {
    pub guidewire: DeviceParams,
    pub catheter: DeviceParams,
}

impl Default for DevicePair {
    fn default() -> Self {
        Self {
            guidewire: DeviceParams::default(),
            catheter: DeviceParams::catheter_default(),
        }
    }
}

/// Kinematic state of one device on the shared trail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState {
    /// Arc position of the tip along the trail; equals the inserted length.
    pub insertion_length: f64,
    /// Accumulated proximal roll, radians.
    pub roll: f64,
    /// Tip heading (unit); governs carve direction while leading.
    pub tip_heading: Vector3<f64>,
}

/// One wall contact event.
#[derive(Debug, Clone, Copy)]
pub struct ContactSample {
    /// Reaction force on the tip, N, directed along the inward radial normal.
    pub force: Vector3<f64>,
    /// Recorded penetration depth, mm.
    pub penetration: f64,
    /// Contact location (clamped tip position), mm.
    pub location: Vector3<f64>,
    pub step_index: u32,
}

/// Per-step simulation output.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Guidewire distal points at 0 / 2 / 4 mm back from the tip, in arc.
    pub tracking_points: [Vector3<f64>; 3],
    pub contacts: Vec<ContactSample>,
    /// Euclidean displacement of the guidewire tip over the step, mm.
    pub tip_displacement: f64,
}

/// Max force norm over a step's contacts; zero when contact-free.
pub fn tip_force_norm(contacts: &[ContactSample]) -> f64 {
    contacts.iter().map(|c| c.force.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TrailSample {
    position: Vector3<f64>,
    heading: Vector3<f64>,
    arc: f64,
}

/// Full simulator state: the shared trail plus both device states.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    params: DevicePair,
    trail: Vec<TrailSample>,
    guidewire: DeviceState,
    catheter: DeviceState,
    step_index: u32,
    /// Contacts produced by the most recent reset or step.
    last_contacts: Vec<ContactSample>,
}

impl PartialEq for ContactSample {
    fn eq(&self, other: &Self) -> bool {
        self.force == other.force
            && self.penetration == other.penetration
            && self.location == other.location
            && self.step_index == other.step_index
    }
}

/// Places both devices at the insertion point with a small initial guidewire
/// protrusion along `initial_heading`, clamped to the lumen.
pub fn reset_devices(
    tree: &VesselTree,
    params: DevicePair,
    insertion_point: Vector3<f64>,
    initial_heading: Vector3<f64>,
) -> Result<SimState, SimError> {
    params.guidewire.validate()?;
    params.catheter.validate()?;
    let hit = tree.deepest_lumen_point(insertion_point);
    if hit.clearance() > 1e-9 {
        return Err(SimError::Placement(format!(
            "insertion point ({:.2}, {:.2}, {:.2}) lies {:.3} mm outside the lumen",
            insertion_point.x,
            insertion_point.y,
            insertion_point.z,
            hit.clearance()
        )));
    }
    let heading = initial_heading.normalize();
    let mut sim = SimState {
        params,
        trail: vec![TrailSample {
            position: insertion_point,
            heading,
            arc: 0.0,
        }],
        guidewire: DeviceState {
            insertion_length: 0.0,
            roll: 0.0,
            tip_heading: heading,
        },
        catheter: DeviceState {
            insertion_length: 0.0,
            roll: 0.0,
            tip_heading: heading,
        },
        step_index: 0,
        last_contacts: Vec::new(),
    };
    // Initial protrusion carves straight along the heading (no bend offset).
    let mut contacts = Vec::new();
    carve(
        &mut sim.trail,
        &mut sim.guidewire,
        &sim.params.guidewire,
        tree,
        sim.params.guidewire.tip_segment_length,
        true,
        0,
        &mut contacts,
    );
    sim.last_contacts = contacts;
    Ok(sim)
}

impl SimState {
    pub fn guidewire(&self) -> &DeviceState {
        &self.guidewire
    }

    pub fn catheter(&self) -> &DeviceState {
        &self.catheter
    }

    pub fn params(&self) -> &DevicePair {
        &self.params
    }

    pub fn step_index(&self) -> u32 {
        self.step_index
    }

    /// Contacts recorded by the most recent reset or step.
    pub fn last_contacts(&self) -> &[ContactSample] {
        &self.last_contacts
    }

    /// Guidewire tip position.
    pub fn tip_position(&self) -> Vector3<f64> {
        self.position_at(self.guidewire.insertion_length)
    }

    /// Sets the guidewire roll directly (test and probe hook; normal control
    /// flows through [`SimState::step`]).
    pub fn set_guidewire_roll(&mut self, roll: f64) {
        self.guidewire.roll = roll;
    }

    /// Historical tip trace of a device: the shared trail up to its tip arc.
    pub fn traced_path(&self, device: Device) -> Vec<Vector3<f64>> {
        let arc = match device {
            Device::Guidewire => self.guidewire.insertion_length,
            Device::Catheter => self.catheter.insertion_length,
        };
        let mut out: Vec<Vector3<f64>> = self
            .trail
            .iter()
            .take_while(|s| s.arc <= arc + 1e-12)
            .map(|s| s.position)
            .collect();
        if self.trail.last().is_some_and(|s| s.arc > arc + 1e-12) {
            out.push(self.position_at(arc));
        }
        out
    }

    /// All trail sample positions (containment checks).
    pub fn trail_positions(&self) -> Vec<Vector3<f64>> {
        self.trail.iter().map(|s| s.position).collect()
    }

    /// Advances both devices by one control step.
    ///
    /// `action` is `(v_guidewire mm/s, w_guidewire rad/s, v_catheter mm/s,
    /// w_catheter rad/s)`; speeds are clamped to the device limits, never
    /// rejected.
    pub fn step(&mut self, tree: &VesselTree, action: [f64; 4], dt: f64) -> StepOutcome {
        let gw = self.params.guidewire;
        let cath = self.params.catheter;
        let v_gw = action[0].clamp(-gw.max_translation_speed, gw.max_translation_speed);
        let w_gw = action[1].clamp(-gw.max_rotation_speed, gw.max_rotation_speed);
        let v_cath = action[2].clamp(-cath.max_translation_speed, cath.max_translation_speed);
        let w_cath = action[3].clamp(-cath.max_rotation_speed, cath.max_rotation_speed);

        self.step_index += 1;
        self.guidewire.roll += w_gw * dt;
        self.catheter.roll += w_cath * dt;

        let tip_before = self.tip_position();
        let mut contacts = Vec::new();

        self.translate_device(Device::Guidewire, tree, v_gw * dt, &mut contacts);
        self.translate_device(Device::Catheter, tree, v_cath * dt, &mut contacts);

        let tip_after = self.tip_position();
        let outcome = StepOutcome {
            tracking_points: self.tracking_points(),
            contacts: contacts.clone(),
            tip_displacement: (tip_after - tip_before).norm(),
        };
        self.last_contacts = contacts;
        outcome
    }

    /// Guidewire distal points 0 / 2 / 4 mm back from the tip in arc.
    pub fn tracking_points(&self) -> [Vector3<f64>; 3] {
        let tip = self.guidewire.insertion_length;
        [
            self.position_at(tip),
            self.position_at((tip - 2.0).max(0.0)),
            self.position_at((tip - 4.0).max(0.0)),
        ]
    }

    fn translate_device(
        &mut self,
        device: Device,
        tree: &VesselTree,
        delta: f64,
        contacts: &mut Vec<ContactSample>,
    ) {
        if delta == 0.0 {
            return;
        }
        let (params, other_arc) = match device {
            Device::Guidewire => (self.params.guidewire, self.catheter.insertion_length),
            Device::Catheter => (self.params.catheter, self.guidewire.insertion_length),
        };
        let state = match device {
            Device::Guidewire => &mut self.guidewire,
            Device::Catheter => &mut self.catheter,
        };
        if delta < 0.0 {
            // Retract along the trail; the trail itself only shrinks past the
            // distal-most remaining tip.
            state.insertion_length = (state.insertion_length + delta).max(0.0);
            let keep = state.insertion_length.max(other_arc);
            truncate_trail(&mut self.trail, keep);
            state.tip_heading = heading_at(&self.trail, state.insertion_length);
            return;
        }
        let trail_end = self.trail.last().unwrap().arc;
        let mut remaining = delta;
        if state.insertion_length < trail_end {
            // Slide along the existing trail first.
            let advance = remaining.min(trail_end - state.insertion_length);
            state.insertion_length += advance;
            state.tip_heading = heading_at(&self.trail, state.insertion_length);
            remaining -= advance;
        }
        if remaining > 1e-12 {
            carve(
                &mut self.trail,
                state,
                &params,
                tree,
                remaining,
                false,
                self.step_index,
                contacts,
            );
        }
    }

    fn position_at(&self, arc: f64) -> Vector3<f64> {
        position_at(&self.trail, arc)
    }
}

/// Device selector for per-device queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Device {
    Guidewire,
    Catheter,
}

/// Extends the trail by up to `length` mm of new path carved by `state`'s
/// tip. `straight` disables the tip bend (used for the reset protrusion).
///
/// One motion direction is computed for the whole call; the trail is merely
/// sampled at [`TRAIL_STEP`] resolution. A clamped sub-step projects the
/// direction onto the wall plane for the remainder of the call, and the
/// heading relaxes toward the local centerline tangent once at the end.
#[allow(clippy::too_many_arguments)]
fn carve(
    trail: &mut Vec<TrailSample>,
    state: &mut DeviceState,
    params: &DeviceParams,
    tree: &VesselTree,
    length: f64,
    straight: bool,
    step_index: u32,
    contacts: &mut Vec<ContactSample>,
) {
    let device_radius = params.radius();
    let mut dir = if straight {
        state.tip_heading
    } else {
        bend_direction(state.tip_heading, state.roll, params.tip_bend_angle)
    };
    let start = trail.last().unwrap().position;
    let carved_from = trail.len();
    let mut remaining = length;
    while remaining > 1e-12 {
        let h = remaining.min(TRAIL_STEP);
        remaining -= h;
        let tip = trail.last().unwrap().position;
        let candidate = tip + dir * h;
        let hit = tree.deepest_lumen_point(candidate);
        let allowed = (hit.radius - device_radius).max(0.0);
        let new_pos = if hit.dist > allowed + 1e-12 {
            // Clamp radially to the allowed surface; the tangential part of
            // the motion survives.
            let radial = candidate - hit.foot;
            let normal = if hit.dist > 1e-12 {
                radial / hit.dist
            } else {
                perpendicular_basis(hit.tangent).0
            };
            let penetration = (hit.dist - allowed).min(PENETRATION_CAP * hit.radius);
            let clamped = hit.foot + normal * allowed;
            contacts.push(ContactSample {
                force: -normal * (params.wall_stiffness * penetration),
                penetration,
                location: clamped,
                step_index,
            });
            // Subsequent motion slides in the wall plane.
            let slide = dir - normal * dir.dot(&normal);
            if slide.norm() > 1e-9 {
                dir = slide.normalize();
            }
            clamped
        } else {
            candidate
        };
        let moved = new_pos - tip;
        let dist = moved.norm();
        if dist > 1e-12 {
            let arc = trail.last().unwrap().arc + dist;
            trail.push(TrailSample {
                position: new_pos,
                heading: state.tip_heading,
                arc,
            });
            state.insertion_length = arc;
        }
        // A fully blocked sub-step consumes feed without tip motion.
    }
    // Heading relaxation: once per step, from the net actual motion toward
    // the sign-aligned centerline tangent.
    let tip = trail.last().unwrap().position;
    let net = tip - start;
    if net.norm() > 1e-9 {
        let actual_dir = net.normalize();
        let hit = tree.deepest_lumen_point(tip);
        let t = if hit.tangent.dot(&actual_dir) >= 0.0 {
            hit.tangent
        } else {
            -hit.tangent
        };
        let lambda = params.tangent_blend;
        state.tip_heading = (actual_dir * (1.0 - lambda) + t * lambda).normalize();
        // Stamp the new samples with the settled heading so retraction
        // restores it.
        for s in &mut trail[carved_from..] {
            s.heading = state.tip_heading;
        }
    }
}

/// Tip motion direction from heading, roll and tip bend: the heading pitched
/// by the bend angle into the roll-selected bend plane.
pub fn bend_direction(heading: Vector3<f64>, roll: f64, bend_angle: f64) -> Vector3<f64> {
    if bend_angle == 0.0 {
        return heading;
    }
    let (u, v) = perpendicular_basis(heading);
    let b = u * roll.cos() + v * roll.sin();
    (heading * bend_angle.cos() + b * bend_angle.sin()).normalize()
}

fn truncate_trail(trail: &mut Vec<TrailSample>, keep_arc: f64) {
    let end = trail.last().unwrap().arc;
    if end <= keep_arc + 1e-12 {
        return;
    }
    let pos = position_at(trail, keep_arc);
    let heading = heading_at(trail, keep_arc);
    trail.retain(|s| s.arc < keep_arc - 1e-12);
    trail.push(TrailSample {
        position: pos,
        heading,
        arc: keep_arc,
    });
}

fn bracket(trail: &[TrailSample], arc: f64) -> (usize, f64) {
    if trail.len() == 1 || arc <= 0.0 {
        return (0, 0.0);
    }
    let end = trail.last().unwrap().arc;
    if arc >= end {
        return (trail.len() - 2, 1.0);
    }
    let i = trail
        .partition_point(|s| s.arc <= arc)
        .clamp(1, trail.len() - 1);
    let (a, b) = (trail[i - 1].arc, trail[i].arc);
    (i - 1, (arc - a) / (b - a))
}

fn position_at(trail: &[TrailSample], arc: f64) -> Vector3<f64> {
    if trail.len() == 1 {
        return trail[0].position;
    }
    let (i, t) = bracket(trail, arc);
    trail[i].position + (trail[i + 1].position - trail[i].position) * t
}

fn heading_at(trail: &[TrailSample], arc: f64) -> Vector3<f64> {
    if trail.len() == 1 {
        return trail[0].heading;
    }
    let (i, t) = bracket(trail, arc);
    let h = trail[i].heading * (1.0 - t) + trail[i + 1].heading * t;
    if h.norm() > 1e-12 {
        h.normalize()
    } else {
        trail[i + 1].heading
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::testutil::{straight_tube, y_tree};
    use crate::vessel::VesselTree;

    const DT: f64 = 0.135;

    fn axial_reset(tree: &VesselTree, params: DevicePair) -> SimState {
        reset_devices(
            tree,
            params,
            Vector3::new(0.0, 10.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn reset_protrudes_three_millimeters_axially() {
        let tree = straight_tube(200.0, 4.0);
        let sim = axial_reset(&tree, DevicePair::default());
        let tip = sim.tip_position();
        assert!((tip - Vector3::new(0.0, 13.0, 0.0)).norm() < 1e-9);
        assert!(sim.last_contacts().is_empty());
        assert!((sim.guidewire().insertion_length - 3.0).abs() < 1e-9);
    }

    #[test]
    fn reset_outside_lumen_is_a_placement_error() {
        let tree = straight_tube(200.0, 4.0);
        let err = reset_devices(
            &tree,
            DevicePair::default(),
            Vector3::new(30.0, 10.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, SimError::Placement(_)), "{err}");
    }

    #[test]
    fn reset_heading_into_wall_clamps_and_reports_contact() {
        let tree = straight_tube(200.0, 2.0);
        let sim = reset_devices(
            &tree,
            DevicePair::default(),
            Vector3::new(0.0, 10.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
        )
        .unwrap();
        let tip = sim.tip_position();
        let hit = tree.deepest_lumen_point(tip);
        assert!(hit.dist <= hit.radius - sim.params().guidewire.radius() + 1e-9);
        assert!(!sim.last_contacts().is_empty());
    }

    #[test]
    fn reset_is_deterministic() {
        let tree = straight_tube(200.0, 4.0);
        let a = axial_reset(&tree, DevicePair::default());
        let b = axial_reset(&tree, DevicePair::default());
        assert_eq!(a, b);
    }

    #[test]
    fn free_advance_at_full_speed_covers_5_4_mm() {
        let tree = straight_tube(400.0, 6.0);
        let mut params = DevicePair::default();
        params.guidewire.tip_bend_angle = 0.0;
        let mut sim = axial_reset(&tree, params);
        let out = sim.step(&tree, [40.0, 0.0, 0.0, 0.0], DT);
        assert!((out.tip_displacement - 5.4).abs() < 1e-9);
        assert!(out.contacts.is_empty());
        assert!((sim.tip_position() - Vector3::new(0.0, 18.4, 0.0)).norm() < 1e-9);

        // With the default 30-degree bend the arc-length feed is still 5.4.
        let mut sim = axial_reset(&tree, DevicePair::default());
        let out = sim.step(&tree, [40.0, 0.0, 0.0, 0.0], DT);
        assert!((sim.guidewire().insertion_length - 8.4).abs() < 1e-9);
        assert!(out.tip_displacement <= 5.4 + 1e-9);
    }

    #[test]
    fn null_action_moves_nothing() {
        let tree = straight_tube(200.0, 4.0);
        let mut sim = axial_reset(&tree, DevicePair::default());
        let before = sim.clone();
        let out = sim.step(&tree, [0.0; 4], DT);
        assert_eq!(out.tip_displacement, 0.0);
        assert!(out.contacts.is_empty());
        assert_eq!(sim.tip_position(), before.tip_position());
    }

    #[test]
    fn wall_press_forces_follow_k_delta() {
        // Straight-tip wire, no tangent blending: the tip path is a fixed
        // ray at 30 degrees off-axis, so every contact is closed-form.
        let tree = straight_tube(400.0, 2.0);
        let mut params = DevicePair::default();
        params.guidewire.tip_bend_angle = 0.0;
        params.guidewire.tangent_blend = 0.0;
        params.guidewire.outer_diameter = 0.2;
        params.guidewire.wall_stiffness = 2.0;
        let dir = Vector3::new(0.5, 3.0_f64.sqrt() / 2.0, 0.0);
        let mut sim = reset_devices(&tree, params, Vector3::new(0.0, 10.0, 0.0), dir).unwrap();
        // After the 3 mm protrusion the tip sits at x = 1.5, inside the
        // allowed radius 1.9 (tube radius 2 minus device radius 0.1). One
        // 2 mm step along the ray: first 1 mm sub-step reaches x = 2.0,
        // overshoot exactly 0.1; the remainder slides axially along the wall.
        let out = sim.step(&tree, [2.0 / DT, 0.0, 0.0, 0.0], DT);
        assert_eq!(out.contacts.len(), 1);
        let c = out.contacts[0];
        assert!((c.penetration - 0.1).abs() < 1e-9, "overshoot {}", c.penetration);
        let f = c.force.norm();
        assert!((f - 2.0 * c.penetration).abs() <= 1e-12);
        assert!((f - 0.2).abs() < 1e-9);
        // Reaction points inward: negative x here.
        assert!(c.force.x < 0.0);
        // Tip pinned at the allowed surface, having slid along +y.
        let tip = sim.tip_position();
        assert!((tip.x - 1.9).abs() < 1e-9, "tip {tip:?}");
        assert!(tip.y > 13.0, "tip should have slid axially: {tip:?}");
    }

    #[test]
    fn retract_then_advance_restores_tip_in_free_space() {
        let tree = straight_tube(400.0, 8.0);
        let mut sim = axial_reset(&tree, DevicePair::default());
        for _ in 0..5 {
            sim.step(&tree, [30.0, 0.4, 0.0, 0.0], DT);
        }
        let tip_before = sim.tip_position();
        let arc_before = sim.guidewire().insertion_length;
        sim.step(&tree, [-20.0, 0.0, 0.0, 0.0], DT);
        sim.step(&tree, [20.0, 0.0, 0.0, 0.0], DT);
        assert!((sim.guidewire().insertion_length - arc_before).abs() < 1e-9);
        assert!(
            (sim.tip_position() - tip_before).norm() < 0.1,
            "round-trip drift {}",
            (sim.tip_position() - tip_before).norm()
        );
    }

    #[test]
    fn retraction_never_goes_below_zero_insertion() {
        let tree = straight_tube(200.0, 4.0);
        let mut sim = axial_reset(&tree, DevicePair::default());
        for _ in 0..10 {
            sim.step(&tree, [-40.0, 0.0, -40.0, 0.0], DT);
        }
        assert_eq!(sim.guidewire().insertion_length, 0.0);
        assert_eq!(sim.catheter().insertion_length, 0.0);
    }

    #[test]
    fn bend_plane_roll_steers_into_side_branch() {
        let tree = y_tree();
        let mut sim = reset_devices(
            &tree,
            DevicePair::default(),
            Vector3::new(0.0, 20.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        // b(roll) = u cos + v sin with u = +Z, v = +X for an axial heading;
        // roll pi/2 points the bend along +X, straight at the side ostium.
        sim.set_guidewire_roll(std::f64::consts::FRAC_PI_2);
        for _ in 0..20 {
            sim.step(&tree, [40.0, 0.0, 0.0, 0.0], DT);
        }
        let tip = sim.tip_position();
        let hit = tree.deepest_lumen_point(tip);
        let side = tree.branch_by_name("side").unwrap();
        assert_eq!(hit.position.branch, side, "tip at {tip:?}");
        assert!(tip.x > 5.0, "tip should be well inside the side branch: {tip:?}");
    }

    #[test]
    fn catheter_follows_guidewire_trail_and_can_lead_when_wire_retracts() {
        let tree = straight_tube(400.0, 6.0);
        let mut sim = axial_reset(&tree, DevicePair::default());
        for _ in 0..4 {
            sim.step(&tree, [40.0, 0.3, 20.0, 0.0], DT);
        }
        let gw_path = sim.traced_path(Device::Guidewire);
        let cath_path = sim.traced_path(Device::Catheter);
        assert!(cath_path.len() <= gw_path.len());
        // All catheter points except its interpolated tip coincide with the
        // guidewire trace; the tip lies on the next guidewire segment.
        let n = cath_path.len();
        for (a, b) in cath_path[..n - 1].iter().zip(&gw_path) {
            assert!((a - b).norm() < 1e-9, "catheter path must prefix the guidewire path");
        }
        let tip = cath_path[n - 1];
        let (s0, s1) = (gw_path[n - 2], gw_path[n - 1]);
        let seg = s1 - s0;
        let t = (tip - s0).dot(&seg) / seg.norm_squared();
        assert!((-1e-9..=1.0 + 1e-9).contains(&t));
        assert!((s0 + seg * t - tip).norm() < 1e-9);
        // Retract the wire fully inside the catheter, then advance only the
        // catheter: its (straight) tip now carves.
        for _ in 0..6 {
            sim.step(&tree, [-40.0, 0.0, 0.0, 0.0], DT);
        }
        let cath_arc = sim.catheter().insertion_length;
        assert!(sim.guidewire().insertion_length < cath_arc);
        sim.step(&tree, [0.0, 0.0, 40.0, 0.0], DT);
        assert!((sim.catheter().insertion_length - (cath_arc + 5.4)).abs() < 1e-6);
    }

    #[test]
    fn identical_action_sequences_are_bitwise_identical() {
        let tree = y_tree();
        let run = || {
            let mut sim = reset_devices(
                &tree,
                DevicePair::default(),
                Vector3::new(0.0, 10.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
            )
            .unwrap();
            let mut log = Vec::new();
            for i in 0..30 {
                let a = [
                    (i as f64 * 0.7).sin() * 40.0,
                    (i as f64 * 0.3).cos() * 2.0,
                    (i as f64 * 0.5).sin() * 20.0,
                    0.1,
                ];
                let out = sim.step(&tree, a, DT);
                log.push((out.tracking_points, out.tip_displacement, out.contacts.len()));
            }
            (log, sim)
        };
        let (log1, sim1) = run();
        let (log2, sim2) = run();
        assert_eq!(log1, log2);
        assert_eq!(sim1, sim2);
    }

    #[test]
    fn tip_force_norm_cases() {
        assert_eq!(tip_force_norm(&[]), 0.0);
        let mk = |f: Vector3<f64>| ContactSample {
            force: f,
            penetration: 0.1,
            location: Vector3::zeros(),
            step_index: 0,
        };
        let one = [mk(Vector3::new(0.3, 0.0, 0.4))];
        assert!((tip_force_norm(&one) - 0.5).abs() < 1e-12);
        let two = [mk(Vector3::new(0.2, 0.0, 0.0)), mk(Vector3::new(0.0, 0.7, 0.0))];
        assert!((tip_force_norm(&two) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn speed_limits_are_validated() {
        let mut p = DeviceParams::default();
        p.max_translation_speed = 50.0;
        assert!(p.validate().is_err());
        assert!(DeviceParams::default().validate().is_ok());
        assert!(DeviceParams::catheter_default().validate().is_ok());
    }

    #[test]
    fn tracking_points_are_two_millimeters_apart_in_arc() {
        let tree = straight_tube(400.0, 6.0);
        let mut params = DevicePair::default();
        params.guidewire.tip_bend_angle = 0.0;
        let mut sim = axial_reset(&tree, params);
        for _ in 0..3 {
            sim.step(&tree, [40.0, 0.0, 0.0, 0.0], DT);
        }
        let [p0, p1, p2] = sim.tracking_points();
        assert!(((p0 - p1).norm() - 2.0).abs() < 1e-9);
        assert!(((p1 - p2).norm() - 2.0).abs() < 1e-9);
    }
}

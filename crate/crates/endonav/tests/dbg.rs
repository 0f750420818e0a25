#[test]
fn dbg_retract() {
    use endonav::devicesim::*;
    use nalgebra::Vector3;
    let tree = endonav::vessel::VesselTree::build(
        vec![endonav::vessel::Branch {
            name: "tube".into(),
            parent: None,
            points: vec![
                endonav::vessel::CenterlinePoint { position: Vector3::new(0.0, 0.0, 0.0), radius: 8.0, arc: 0.0 },
                endonav::vessel::CenterlinePoint { position: Vector3::new(0.0, 400.0, 0.0), radius: 8.0, arc: 0.0 },
            ],
        }],
        endonav::vessel::ArchType::TypeI,
    ).unwrap();
    let mut sim = reset_devices(&tree, DevicePair::default(), Vector3::new(0.0, 10.0, 0.0), Vector3::new(0.0, 1.0, 0.0)).unwrap();
    for i in 0..5 {
        let out = sim.step(&tree, [30.0, 0.4, 0.0, 0.0], 0.135);
        println!("step {i}: arc={:.6} tip={:?} contacts={}", sim.guidewire().insertion_length, sim.tip_position(), out.contacts.len());
    }
    let arc_before = sim.guidewire().insertion_length;
    let tip_before = sim.tip_position();
    sim.step(&tree, [-20.0, 0.0, 0.0, 0.0], 0.135);
    println!("after retract: arc={:.6}", sim.guidewire().insertion_length);
    sim.step(&tree, [20.0, 0.0, 0.0, 0.0], 0.135);
    println!("after advance: arc={:.6} (before {:.6}) tipdrift={:.6}", sim.guidewire().insertion_length, arc_before, (sim.tip_position()-tip_before).norm());
}

mod common;

use std::f64::consts::FRAC_PI_2;

use ggm::asf::{parse_amc, parse_asf, AngleUnit};
use ggm::ParseError;
use ggm_core::mocap::{forward_kinematics, Axis, Dof};
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

const THREE_BONES: &str = "\
:version 1.10
:name tiny
:units
  mass 1.0
  length 1.0
  angle deg
:root
  order TX TY TZ RX RY RZ
  axis XYZ
  position 0.5 1 -2
  orientation 0 90 0
:bonedata
  begin
    id 1
    name upper
    direction 0 2 0
    length 3
    axis 0 0 90 XYZ
    dof rx ry rz
  end
  begin
    id 2
    name lower
    direction 1 0 0
    length 2
    axis 10 20 30 ZYX
    dof rz
  end
  begin
    id 3
    name side
    direction 0 0 -1
    length 1.5
    axis 0 0 0 XYZ
  end
:hierarchy
  begin
    root upper side
    upper lower
  end
";

/// Motion sequences need two frames; repeat the one given.
fn twice(body: &str) -> String {
    format!("1\n{body}2\n{body}")
}

fn parse_err_line(e: ParseError) -> usize {
    match e {
        ParseError::MalformedAsf { line, .. } | ParseError::MalformedAmc { line, .. } => line,
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn three_bone_skeleton_field_by_field() {
    let asf = parse_asf(THREE_BONES).unwrap();
    assert_eq!(asf.name.as_deref(), Some("tiny"));
    assert_eq!(asf.units.angle, AngleUnit::Degrees);
    let sk = &asf.skeleton;
    assert_eq!(sk.root_position, [0.5, 1.0, -2.0]);
    assert_eq!(sk.joint_names(), ["root", "upper", "lower", "side"]);

    let root = &sk.joints[0];
    assert_eq!(root.parent, None);
    assert_eq!(root.dof, [Dof::Tx, Dof::Ty, Dof::Tz, Dof::Rx, Dof::Ry, Dof::Rz]);
    assert_eq!(root.axis_angles, [0.0, FRAC_PI_2, 0.0]);

    let upper = &sk.joints[1];
    assert_eq!(upper.parent, Some(0));
    assert_eq!(upper.direction, [0.0, 1.0, 0.0]);
    assert_eq!(upper.length, 3.0);
    assert_eq!(upper.axis_angles, [0.0, 0.0, FRAC_PI_2]);
    assert_eq!(upper.dof, [Dof::Rx, Dof::Ry, Dof::Rz]);

    let lower = &sk.joints[2];
    assert_eq!(lower.parent, Some(1));
    assert_eq!(lower.axis_order, [Axis::Z, Axis::Y, Axis::X]);
    assert_eq!(lower.axis_angles, [10f64.to_radians(), 20f64.to_radians(), 30f64.to_radians()]);
    assert_eq!(lower.dof, [Dof::Rz]);

    let side = &sk.joints[3];
    assert_eq!(side.parent, Some(0));
    assert_eq!(side.direction, [0.0, 0.0, -1.0]);
    assert!(side.dof.is_empty());
}

#[test]
fn keywords_are_case_insensitive_and_comments_ignored() {
    let shouted = THREE_BONES
        .replace(":bonedata", ":BONEDATA")
        .replace("    name upper", "    NAME upper # the long one")
        .replace("dof rx ry rz", "DOF RX RY RZ")
        .replace(":hierarchy", "# tree follows\n:HIERARCHY");
    assert_eq!(parse_asf(&shouted).unwrap().skeleton, parse_asf(THREE_BONES).unwrap().skeleton);
}

#[test]
fn radians_unit_is_kept() {
    let text = THREE_BONES.replace("angle deg", "angle rad").replace("orientation 0 90 0", "orientation 0 1.25 0");
    let asf = parse_asf(&text).unwrap();
    assert_eq!(asf.units.angle, AngleUnit::Radians);
    assert_eq!(asf.skeleton.joints[0].axis_angles, [0.0, 1.25, 0.0]);
}

fn cmu_like(bones: usize) -> String {
    let mut s = String::from(":version 1.10\n:name big\n:units\n  angle deg\n:root\n  order TX TY TZ RX RY RZ\n  axis XYZ\n  position 0 0 0\n  orientation 0 0 0\n:bonedata\n");
    for k in 1..=bones {
        s.push_str(&format!(
            "  begin\n    id {k}\n    name b{k}\n    direction 0 1 0\n    length {}\n    axis 0 0 0 XYZ\n    dof rx ry rz\n    limits (-180 180)\n    (-180 180)\n    (-180 180)\n  end\n",
            0.5 + k as f64 / 10.0
        ));
    }
    s.push_str(":hierarchy\n  begin\n");
    for k in 1..=bones {
        let parent = if k <= 5 { "root".to_string() } else { format!("b{}", k - 5) };
        s.push_str(&format!("    {parent} b{k}\n"));
    }
    s.push_str("  end\n");
    s
}

#[test]
fn thirty_bones_give_thirty_one_joints() {
    let asf = parse_asf(&cmu_like(30)).unwrap();
    assert_eq!(asf.skeleton.joints.len(), 31);
    assert_eq!(asf.skeleton.joints[30].parent, Some(25));
}

#[test]
fn malformed_asf_reports_the_line() {
    let bad_length = THREE_BONES.replace("length 3", "length three");
    let line = bad_length.lines().position(|l| l.contains("three")).unwrap() + 1;
    assert_eq!(parse_err_line(parse_asf(&bad_length).unwrap_err()), line);

    let bad_dof = THREE_BONES.replace("dof rz", "dof rz l");
    let line = bad_dof.lines().position(|l| l.contains("dof rz l")).unwrap() + 1;
    let e = parse_asf(&bad_dof).unwrap_err();
    assert!(e.to_string().contains("degree of freedom"), "{e}");
    assert_eq!(parse_err_line(e), line);

    let unknown_parent = THREE_BONES.replace("upper lower", "elbow lower");
    let line = unknown_parent.lines().position(|l| l.contains("elbow lower")).unwrap() + 1;
    assert_eq!(parse_err_line(parse_asf(&unknown_parent).unwrap_err()), line);

    let two_parents = THREE_BONES.replace("upper lower", "upper lower side");
    assert!(parse_asf(&two_parents).unwrap_err().to_string().contains("two parents"));

    let no_root = THREE_BONES.replace(":root", ":rot");
    assert!(parse_asf(&no_root).is_err());

    let no_tree = THREE_BONES.split(":hierarchy").next().unwrap().to_string();
    assert!(parse_asf(&no_tree).unwrap_err().to_string().contains("hierarchy"));

    let unclosed = THREE_BONES.replacen("  end\n  begin\n    id 2", "  begin\n    id 2", 1);
    assert!(parse_asf(&unclosed).is_err());
}

#[test]
fn cyclic_hierarchy_is_rejected() {
    let cyc = THREE_BONES.replace("root upper side", "root side\n    lower upper");
    assert!(parse_asf(&cyc).is_err());
}

const TWO_FRAMES: &str = "\
# exported
:FULLY-SPECIFIED
:RADIANS
1
root 0.1 0.2 0.3 0.01 0.02 0.03
upper 0.5 -0.25 1
lower 2
2
root -1 -2 -3 -0.5 0 0.5
upper 0 0 0
lower -0.125
";

#[test]
fn two_frame_motion_exact_values() {
    let asf = parse_asf(THREE_BONES).unwrap();
    let m = parse_amc(TWO_FRAMES, &asf, 60.0).unwrap();
    assert_eq!(m.frame_rate, 60.0);
    assert_eq!(m.num_frames(), 2);
    assert_eq!(m.frames[0], vec![vec![0.1, 0.2, 0.3, 0.01, 0.02, 0.03], vec![0.5, -0.25, 1.0], vec![2.0], vec![]]);
    assert_eq!(m.frames[1], vec![vec![-1.0, -2.0, -3.0, -0.5, 0.0, 0.5], vec![0.0, 0.0, 0.0], vec![-0.125], vec![]]);
}

#[test]
fn degrees_convert_rotations_only() {
    let asf = parse_asf(THREE_BONES).unwrap();
    let m = parse_amc("1\nroot 1 2 3 90 0 -180\nupper 45 0 0\nlower 30\n", &asf, 120.0).unwrap();
    assert_eq!(m.frames[0][0], vec![1.0, 2.0, 3.0, FRAC_PI_2, 0.0, -std::f64::consts::PI]);
    assert_eq!(m.frames[0][1][0], 45f64.to_radians());
}

#[test]
fn malformed_amc_reports_the_line() {
    let asf = parse_asf(THREE_BONES).unwrap();
    let gap = TWO_FRAMES.replacen("\n2\n", "\n3\n", 1);
    assert!(parse_amc(&gap, &asf, 120.0).is_err());

    let unknown = TWO_FRAMES.replace("lower -0.125", "elbow -0.125");
    let line = unknown.lines().position(|l| l.starts_with("elbow")).unwrap() + 1;
    assert_eq!(parse_err_line(parse_amc(&unknown, &asf, 120.0).unwrap_err()), line);

    let short = TWO_FRAMES.replace("upper 0 0 0", "upper 0 0");
    let line = short.lines().position(|l| l == "upper 0 0").unwrap() + 1;
    assert_eq!(parse_err_line(parse_amc(&short, &asf, 120.0).unwrap_err()), line);

    let not_number = TWO_FRAMES.replace("lower 2", "lower two");
    assert!(parse_amc(&not_number, &asf, 120.0).is_err());

    let missing = TWO_FRAMES.replace("lower -0.125\n", "");
    assert!(parse_amc(&missing, &asf, 120.0).is_err());
}

fn single_bone(axis: &str) -> String {
    format!(
        ":units\n  angle deg\n:root\n  order TX TY TZ RX RY RZ\n  axis XYZ\n  position 0 0 0\n  orientation 0 0 0\n:bonedata\n  begin\n    name arm\n    direction 0 1 0\n    length 2.5\n    axis {axis} XYZ\n    dof rx ry rz\n  end\n:hierarchy\n  begin\n    root arm\n  end\n"
    )
}

#[test]
fn quarter_turn_about_z_swings_up_bone_to_minus_x() {
    let asf = parse_asf(&single_bone("0 0 0")).unwrap();
    let m = parse_amc(&twice("root 0 0 0 0 0 0\narm 0 0 90\n"), &asf, 120.0).unwrap();
    let seq = forward_kinematics(&asf.skeleton, &m).unwrap();
    let p = seq.position(1, 0);
    assert!((p[0] + 2.5).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12, "{p:?}");
}

#[test]
fn zero_rotations_accumulate_rest_offsets() {
    let asf = parse_asf(THREE_BONES.replace("orientation 0 90 0", "orientation 0 0 0").as_str()).unwrap();
    let m = parse_amc(&twice("root 0.5 0 0 0 0 0\nupper 0 0 0\nlower 0\n"), &asf, 120.0).unwrap();
    let seq = forward_kinematics(&asf.skeleton, &m).unwrap();
    let expect = [[1.0, 1.0, -2.0], [1.0, 4.0, -2.0], [3.0, 4.0, -2.0], [1.0, 1.0, -3.5]];
    for (j, e) in expect.iter().enumerate() {
        let p = seq.position(j, 0);
        for c in 0..3 {
            assert!((p[c] - e[c]).abs() < 1e-12, "joint {j}: {p:?} vs {e:?}");
        }
    }
}

fn axis_vec(a: Axis) -> Vector3<f64> {
    match a {
        Axis::X => Vector3::x(),
        Axis::Y => Vector3::y(),
        Axis::Z => Vector3::z(),
    }
}

fn euler(angles: [f64; 3], order: [Axis; 3]) -> Rotation3<f64> {
    order.iter().fold(Rotation3::identity(), |m, &a| {
        let k = match a {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis_vec(a)), angles[k]) * m
    })
}

/// Reference kinematics: local rotation `C · M · C⁻¹` chained down the tree.
fn reference_fk(asf: &ggm::asf::Asf, frame: &[Vec<f64>]) -> Vec<Vector3<f64>> {
    let sk = &asf.skeleton;
    let mut global = vec![Rotation3::identity(); sk.joints.len()];
    let mut pos = vec![Vector3::zeros(); sk.joints.len()];
    for j in sk.topological_order() {
        let joint = &sk.joints[j];
        let mut rot = [0.0; 3];
        let mut trans = Vector3::zeros();
        for (d, v) in joint.dof.iter().zip(&frame[j]) {
            match d {
                Dof::Rx => rot[0] = *v,
                Dof::Ry => rot[1] = *v,
                Dof::Rz => rot[2] = *v,
                Dof::Tx => trans.x = *v,
                Dof::Ty => trans.y = *v,
                Dof::Tz => trans.z = *v,
            }
        }
        let c = euler(joint.axis_angles, joint.axis_order);
        let local = c * euler(rot, joint.axis_order) * c.inverse();
        match joint.parent {
            None => {
                global[j] = local;
                pos[j] = Vector3::from(sk.root_position) + trans;
            }
            Some(p) => {
                global[j] = global[p] * local;
                pos[j] = pos[p] + global[j] * (Vector3::from(joint.direction) * joint.length) + trans;
            }
        }
    }
    pos
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kinematics_match_reference(values in prop::collection::vec(-180.0f64..180.0, 10)) {
        let asf = parse_asf(THREE_BONES).unwrap();
        let amc = twice(&format!(
            "root 0.3 -0.2 0.7 {} {} {}\nupper {} {} {}\nlower {}\n",
            values[0], values[1], values[2], values[3], values[4], values[5], values[6]
        ));
        let m = parse_amc(&amc, &asf, 120.0).unwrap();
        let seq = forward_kinematics(&asf.skeleton, &m).unwrap();
        let want = reference_fk(&asf, &m.frames[0]);
        for (j, w) in want.iter().enumerate() {
            let p = seq.position(j, 0);
            for c in 0..3 {
                prop_assert!((p[c] - w[c]).abs() < 1e-9, "joint {} axis {}: {} vs {}", j, c, p[c], w[c]);
            }
        }
    }

    #[test]
    fn bone_lengths_survive_any_pose(values in prop::collection::vec(-180.0f64..180.0, 7)) {
        let asf = parse_asf(THREE_BONES).unwrap();
        let amc = twice(&format!(
            "root 1 2 3 {} {} {}\nupper {} {} {}\nlower {}\n",
            values[0], values[1], values[2], values[3], values[4], values[5], values[6]
        ));
        let seq = forward_kinematics(&asf.skeleton, &parse_amc(&amc, &asf, 120.0).unwrap()).unwrap();
        for (j, joint) in asf.skeleton.joints.iter().enumerate().skip(1) {
            let (a, b) = (seq.position(j, 0), seq.position(joint.parent.unwrap(), 0));
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            prop_assert!((len - joint.length).abs() < 1e-9);
        }
    }
}

#[test]
fn walker_fixture_parses() {
    let asf = parse_asf(common::WALKER_ASF).unwrap();
    assert_eq!(asf.skeleton.joints.len(), 9);
    let m = parse_amc(&common::walker_amc(50, 1.0, 0.01), &asf, 120.0).unwrap();
    assert_eq!(m.num_frames(), 50);
}

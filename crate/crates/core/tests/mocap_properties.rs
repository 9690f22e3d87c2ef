use std::f64::consts::PI;

use ggm_core::mocap::{
    build_prototype_skeleton, forward_kinematics, normalize_pose, segment_gait_cycles, Axis, CycleOptions, Dof, Joint,
    MocapError, MotionChannels, MotionSequence, Skeleton,
};
use ggm_core::linalg::Matrix;
use proptest::prelude::*;

const ORDERS: [[Axis; 3]; 6] = [
    [Axis::X, Axis::Y, Axis::Z],
    [Axis::X, Axis::Z, Axis::Y],
    [Axis::Y, Axis::X, Axis::Z],
    [Axis::Y, Axis::Z, Axis::X],
    [Axis::Z, Axis::X, Axis::Y],
    [Axis::Z, Axis::Y, Axis::X],
];

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[derive(Debug, Clone)]
struct BoneSpec {
    parent: usize,
    dir: [f64; 3],
    length: f64,
    angles: [f64; 3],
    order: usize,
}

fn bone_spec() -> impl Strategy<Value = BoneSpec> {
    (any::<prop::sample::Index>(), prop::array::uniform3(-1.0f64..1.0), 0.0f64..5.0, prop::array::uniform3(-PI..PI), 0usize..6)
        .prop_filter("direction must be nonzero", |(_, d, ..)| d.iter().map(|v| v * v).sum::<f64>() > 1e-3)
        .prop_map(|(parent, dir, length, angles, order)| BoneSpec { parent: parent.index(usize::MAX), dir: unit(dir), length, angles, order })
}

fn skeleton(specs: &[BoneSpec]) -> Skeleton {
    let mut joints = vec![Joint {
        name: "root".into(),
        parent: None,
        direction: [0.0; 3],
        length: 0.0,
        axis_angles: [0.0; 3],
        axis_order: [Axis::X, Axis::Y, Axis::Z],
        dof: vec![Dof::Tx, Dof::Ty, Dof::Tz, Dof::Rz, Dof::Ry, Dof::Rx],
    }];
    for (k, s) in specs.iter().enumerate() {
        joints.push(Joint {
            name: format!("b{k}"),
            parent: Some(s.parent % (k + 1)),
            direction: s.dir,
            length: s.length,
            axis_angles: s.angles,
            axis_order: ORDERS[s.order],
            dof: vec![Dof::Rx, Dof::Ry, Dof::Rz],
        });
    }
    Skeleton { joints, root_position: [0.0; 3] }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn forward_kinematics_preserves_bone_lengths(
        specs in prop::collection::vec(bone_spec(), 1..8),
        frames in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 6 + 3 * 8), 2..5),
    ) {
        let sk = skeleton(&specs);
        let channels = MotionChannels {
            frames: frames
                .iter()
                .map(|f| {
                    let mut per = vec![f[..6].to_vec()];
                    for k in 0..specs.len() {
                        per.push(f[6 + 3 * k..9 + 3 * k].to_vec());
                    }
                    per
                })
                .collect(),
            frame_rate: 120.0,
        };
        let seq = forward_kinematics(&sk, &channels).unwrap();
        for t in 0..seq.num_frames() {
            for (k, joint) in sk.joints.iter().enumerate().skip(1) {
                let a = seq.position(k, t);
                let b = seq.position(joint.parent.unwrap(), t);
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                prop_assert!((d - joint.length).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn prototype_of_identical_skeletons_is_unchanged() {
    let sk = skeleton(&[BoneSpec { parent: 0, dir: [0.0, 1.0, 0.0], length: 2.0, angles: [0.1, 0.2, 0.3], order: 2 }]);
    assert_eq!(build_prototype_skeleton(&[sk.clone(), sk.clone(), sk.clone()]).unwrap(), sk);
    let mut other = sk.clone();
    other.joints[1].name = "renamed".into();
    assert!(matches!(build_prototype_skeleton(&[sk, other]), Err(MocapError::HeterogeneousSkeletons(..))));
}

const WALK_JOINTS: [&str; 4] = ["root", "ltibia", "rtibia", "head"];

/// A walker advancing along `heading` (radians from +Z toward +X) with
/// swinging ankles; `periods` full gait cycles over `n` frames.
fn walker(n: usize, periods: f64, heading: f64, offset: [f64; 3]) -> MotionSequence {
    let (s, c) = heading.sin_cos();
    let mut coords = Matrix::zeros(12, n);
    for t in 0..n {
        let phase = 2.0 * PI * periods * t as f64 / (n - 1) as f64;
        let fwd = 0.8 * t as f64;
        // Local (walker frame) positions: x = side, y = up, z = forward.
        let local = [
            [0.0, 1.0 + 0.02 * (2.0 * phase).cos(), fwd],
            [0.15, 0.1 + 0.05 * phase.cos().max(0.0), fwd + 0.4 * phase.sin()],
            [-0.15, 0.1 + 0.05 * (-phase.cos()).max(0.0), fwd - 0.4 * phase.sin()],
            [0.02 * phase.sin(), 1.7, fwd + 0.05],
        ];
        for (j, p) in local.iter().enumerate() {
            coords[(3 * j, t)] = c * p[0] + s * p[2] + offset[0];
            coords[(3 * j + 1, t)] = p[1] + offset[1];
            coords[(3 * j + 2, t)] = -s * p[0] + c * p[2] + offset[2];
        }
    }
    MotionSequence::new(WALK_JOINTS.iter().map(|s| s.to_string()).collect(), 0, coords, 120.0, Some("w".into())).unwrap()
}

#[test]
fn normalized_root_sits_at_origin() {
    let out = normalize_pose(&walker(200, 2.0, 0.3, [5.0, 0.0, -2.0])).unwrap();
    for t in 0..out.num_frames() {
        assert!(out.position(0, t).iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn normalization_ignores_translation_and_heading() {
    let base = normalize_pose(&walker(180, 2.0, 0.0, [0.0; 3])).unwrap();
    for (heading, offset) in [(37f64.to_radians(), [0.0; 3]), (0.0, [12.0, 3.0, -40.0]), (-2.1, [1.0, -1.0, 7.5])] {
        let other = normalize_pose(&walker(180, 2.0, heading, offset)).unwrap();
        assert!(other.coords.max_abs_diff(&base.coords) < 1e-6, "heading {heading}");
    }
}

#[test]
fn normalization_is_idempotent() {
    let once = normalize_pose(&walker(150, 1.5, 1.0, [3.0, 0.5, 2.0])).unwrap();
    let twice = normalize_pose(&once).unwrap();
    assert!(twice.coords.max_abs_diff(&once.coords) < 1e-9);
}

#[test]
fn aligned_sequence_is_unchanged() {
    let seq = normalize_pose(&walker(120, 1.0, 0.0, [0.0; 3])).unwrap();
    assert!(normalize_pose(&seq).unwrap().coords.max_abs_diff(&seq.coords) < 1e-9);
}

#[test]
fn two_sinusoid_periods_give_two_cycles() {
    let seq = normalize_pose(&walker(241, 2.0, 0.7, [1.0, 0.0, 1.0])).unwrap();
    let cycles = segment_gait_cycles(&seq, 156, &CycleOptions::default()).unwrap();
    assert_eq!(cycles.len(), 2);
    for c in &cycles {
        assert_eq!(c.num_frames(), 156);
        assert!(!c.joints.contains(&"root".to_string()));
        assert!((0..c.num_joints()).all(|j| c.joint_variance(j) > 0.0));
    }
}

#[test]
fn detected_ankles_fall_back_to_defaults() {
    let names: Vec<String> = ["root", "LAnkle", "RAnkle"].iter().map(|s| s.to_string()).collect();
    let opts = CycleOptions::detect(&names);
    assert_eq!((opts.left_ankle.as_str(), opts.right_ankle.as_str()), ("LAnkle", "RAnkle"));
    assert_eq!(CycleOptions::detect(&["x".to_string()]), CycleOptions::default());
}

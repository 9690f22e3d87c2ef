//! Skeletons, forward kinematics, pose normalization and gait-cycle
//! segmentation.
//!
//! Coordinates follow the motion-capture convention of a vertical Y axis. A
//! [`MotionSequence`] stores joint trajectories as a `(3·p) × n` matrix: row
//! `3j + c` holds coordinate `c ∈ {x, y, z}` of joint `j`, column `t` is frame
//! `t`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::num::{abs, cos, hypot, mean, sin, sqrt, variance};

/// Default resampled cycle length in frames.
pub const DEFAULT_FIXED_LENGTH: usize = 156;
/// Joints whose summed coordinate variance falls below this are static.
pub const STATIC_VARIANCE_THRESHOLD: f64 = 1e-10;
/// Minimum norm of the horizontal heading vector.
pub const HEADING_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MocapError {
    #[error("skeletons differ: {0}")]
    HeterogeneousSkeletons(String),
    #[error("heading direction is degenerate (horizontal displacement norm {norm:e})")]
    DegenerateHeading { norm: f64 },
    #[error("no complete gait cycle detected")]
    NoCycleDetected,
    #[error("joint `{0}` not found")]
    UnknownJoint(String),
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),
    #[error("invalid motion data: {0}")]
    InvalidMotion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Degrees of freedom a joint may declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dof {
    Tx,
    Ty,
    Tz,
    Rx,
    Ry,
    Rz,
}

impl Dof {
    pub fn rotation_axis(self) -> Option<Axis> {
        match self {
            Dof::Rx => Some(Axis::X),
            Dof::Ry => Some(Axis::Y),
            Dof::Rz => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn translation_axis(self) -> Option<Axis> {
        match self {
            Dof::Tx => Some(Axis::X),
            Dof::Ty => Some(Axis::Y),
            Dof::Tz => Some(Axis::Z),
            _ => None,
        }
    }
}

/// One joint of a skeleton. For non-root joints this is the bone ending at the
/// joint: its position is the parent's position plus the rotated bone vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    /// Unit bone direction in the rest pose (zero for the root).
    pub direction: [f64; 3],
    pub length: f64,
    /// Orientation of the local frame, radians, applied in `axis_order`.
    pub axis_angles: [f64; 3],
    pub axis_order: [Axis; 3],
    pub dof: Vec<Dof>,
}

/// Joint hierarchy; index 0 is the root.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Skeleton {
    pub joints: Vec<Joint>,
    /// Rest position of the root.
    pub root_position: [f64; 3],
}

impl Skeleton {
    /// Checks the structural invariants: the parent relation is a tree rooted at
    /// joint 0, names are unique, lengths nonnegative, directions unit.
    pub fn validate(&self) -> Result<(), MocapError> {
        let n = self.joints.len();
        if n == 0 {
            return Err(MocapError::InvalidSkeleton("no joints".into()));
        }
        if self.joints[0].parent.is_some() {
            return Err(MocapError::InvalidSkeleton("root has a parent".into()));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if self.joints[..i].iter().any(|o| o.name == j.name) {
                return Err(MocapError::InvalidSkeleton(alloc::format!("duplicate joint `{}`", j.name)));
            }
            if i > 0 {
                match j.parent {
                    None => {
                        return Err(MocapError::InvalidSkeleton(alloc::format!(
                            "joint `{}` is not attached to the hierarchy",
                            j.name
                        )))
                    }
                    Some(p) if p >= n => {
                        return Err(MocapError::InvalidSkeleton(alloc::format!("joint `{}` has bad parent", j.name)))
                    }
                    _ => {}
                }
                if !(j.length >= 0.0) {
                    return Err(MocapError::InvalidSkeleton(alloc::format!("joint `{}` has negative length", j.name)));
                }
                let norm = sqrt(j.direction.iter().map(|d| d * d).sum());
                if abs(norm - 1.0) > 1e-6 {
                    return Err(MocapError::InvalidSkeleton(alloc::format!(
                        "joint `{}` direction is not unit (norm {norm})",
                        j.name
                    )));
                }
            }
            // Walking up must reach the root without revisiting a joint.
            let mut cur = i;
            let mut steps = 0;
            while let Some(p) = self.joints[cur].parent {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(MocapError::InvalidSkeleton(alloc::format!("cycle through `{}`", j.name)));
                }
            }
            if cur != 0 {
                return Err(MocapError::InvalidSkeleton(alloc::format!("`{}` is not below the root", j.name)));
            }
        }
        Ok(())
    }

    pub fn joint_names(&self) -> Vec<String> {
        self.joints.iter().map(|j| j.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Joint indices ordered so every parent precedes its children.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.joints.len();
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        while order.len() < n {
            let before = order.len();
            for i in 0..n {
                if placed[i] {
                    continue;
                }
                let ready = match self.joints[i].parent {
                    None => true,
                    Some(p) => placed[p],
                };
                if ready {
                    placed[i] = true;
                    order.push(i);
                }
            }
            if order.len() == before {
                break;
            }
        }
        order
    }
}

/// Mean skeleton: bone lengths averaged, everything else from the first input.
pub fn build_prototype_skeleton(skeletons: &[Skeleton]) -> Result<Skeleton, MocapError> {
    let first = skeletons
        .first()
        .ok_or_else(|| MocapError::HeterogeneousSkeletons("no skeletons supplied".into()))?;
    for (k, s) in skeletons.iter().enumerate().skip(1) {
        if s.joints.len() != first.joints.len() {
            return Err(MocapError::HeterogeneousSkeletons(alloc::format!(
                "skeleton {k} has {} joints, expected {}",
                s.joints.len(),
                first.joints.len()
            )));
        }
        for (a, b) in s.joints.iter().zip(&first.joints) {
            if a.name != b.name || a.parent != b.parent {
                return Err(MocapError::HeterogeneousSkeletons(alloc::format!(
                    "skeleton {k}: joint `{}` does not match `{}`",
                    a.name,
                    b.name
                )));
            }
        }
    }
    let mut proto = first.clone();
    let count = skeletons.len() as f64;
    for (j, joint) in proto.joints.iter_mut().enumerate() {
        joint.length = skeletons.iter().map(|s| s.joints[j].length).sum::<f64>() / count;
    }
    Ok(proto)
}

/// Per-frame channel values for every joint, in each joint's `dof` order.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionChannels {
    pub frames: Vec<Vec<Vec<f64>>>,
    pub frame_rate: f64,
}

impl MotionChannels {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

type Mat3 = [[f64; 3]; 3];

const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat3_transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn mat3_apply(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

fn axis_rotation(axis: Axis, angle: f64) -> Mat3 {
    let (s, c) = (sin(angle), cos(angle));
    match axis {
        Axis::X => [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        Axis::Y => [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        Axis::Z => [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

fn axis_slot(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

/// Rotation applying the per-axis angles in `order` (first listed axis acts
/// first on a column vector).
pub fn euler_matrix(angles: [f64; 3], order: [Axis; 3]) -> [[f64; 3]; 3] {
    let mut m = IDENTITY3;
    for axis in order {
        m = mat3_mul(&axis_rotation(axis, angles[axis_slot(axis)]), &m);
    }
    m
}

/// Raw joint trajectories.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotionSequence {
    pub joints: Vec<String>,
    /// Index of the root joint in `joints`.
    pub root: usize,
    /// `(3·p) × n` coordinates.
    pub coords: Matrix,
    pub frame_rate: f64,
    pub label: Option<String>,
    /// World path of the root. `None` means the root rows of `coords` are the
    /// world path; normalization fills it in so the heading survives
    /// root-centering.
    pub root_track: Option<Vec<[f64; 3]>>,
}

impl MotionSequence {
    pub fn new(
        joints: Vec<String>,
        root: usize,
        coords: Matrix,
        frame_rate: f64,
        label: Option<String>,
    ) -> Result<Self, MocapError> {
        let seq = Self { joints, root, coords, frame_rate, label, root_track: None };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<(), MocapError> {
        if self.coords.rows() != 3 * self.joints.len() {
            return Err(MocapError::InvalidMotion(alloc::format!(
                "{} coordinate rows for {} joints",
                self.coords.rows(),
                self.joints.len()
            )));
        }
        if self.coords.cols() < 2 {
            return Err(MocapError::InvalidMotion("fewer than two frames".into()));
        }
        if self.root >= self.joints.len() {
            return Err(MocapError::InvalidMotion("root index out of range".into()));
        }
        if self.coords.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(MocapError::InvalidMotion("non-finite coordinate".into()));
        }
        if let Some(track) = &self.root_track {
            if track.len() != self.coords.cols() {
                return Err(MocapError::InvalidMotion("root track length differs from frame count".into()));
            }
        }
        Ok(())
    }

    pub fn num_frames(&self) -> usize {
        self.coords.cols()
    }

    pub fn num_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j == name)
    }

    pub fn position(&self, joint: usize, frame: usize) -> [f64; 3] {
        [
            self.coords[(3 * joint, frame)],
            self.coords[(3 * joint + 1, frame)],
            self.coords[(3 * joint + 2, frame)],
        ]
    }

    fn set_position(&mut self, joint: usize, frame: usize, p: [f64; 3]) {
        for (c, v) in p.into_iter().enumerate() {
            self.coords[(3 * joint + c, frame)] = v;
        }
    }

    /// World path of the root joint.
    pub fn root_path(&self) -> Vec<[f64; 3]> {
        match &self.root_track {
            Some(t) => t.clone(),
            None => (0..self.num_frames()).map(|t| self.position(self.root, t)).collect(),
        }
    }
}

/// Computes world joint positions frame by frame.
///
/// Each joint's local rotation is `C · M · C⁻¹`, with `C` the joint's axis
/// orientation and `M` the frame's rotation channels, both composed in the
/// joint's declared axis order. The joint lands at
/// `parent + G · (length · direction)` where `G` is the accumulated global
/// rotation.
pub fn forward_kinematics(skeleton: &Skeleton, channels: &MotionChannels) -> Result<MotionSequence, MocapError> {
    skeleton.validate()?;
    let p = skeleton.joints.len();
    let n = channels.num_frames();
    let order = skeleton.topological_order();

    let frames: Vec<(Mat3, Mat3)> = skeleton
        .joints
        .iter()
        .map(|j| {
            let c = euler_matrix(j.axis_angles, j.axis_order);
            (c, mat3_transpose(&c))
        })
        .collect();

    let mut coords = Matrix::zeros(3 * p, n);
    let mut global = vec![IDENTITY3; p];
    let mut pos = vec![[0.0; 3]; p];
    for (t, frame) in channels.frames.iter().enumerate() {
        if frame.len() != p {
            return Err(MocapError::InvalidMotion(alloc::format!(
                "frame {t} has channels for {} joints, skeleton has {p}",
                frame.len()
            )));
        }
        for &j in &order {
            let joint = &skeleton.joints[j];
            let values = &frame[j];
            if values.len() != joint.dof.len() {
                return Err(MocapError::InvalidMotion(alloc::format!(
                    "frame {t}: joint `{}` has {} values for {} dof",
                    joint.name,
                    values.len(),
                    joint.dof.len()
                )));
            }
            let mut rot = [0.0; 3];
            let mut trans = [0.0; 3];
            for (&dof, &v) in joint.dof.iter().zip(values) {
                if let Some(a) = dof.rotation_axis() {
                    rot[axis_slot(a)] = v;
                } else if let Some(a) = dof.translation_axis() {
                    trans[axis_slot(a)] = v;
                }
            }
            let (c, c_inv) = &frames[j];
            let local = mat3_mul(&mat3_mul(c, &euler_matrix(rot, joint.axis_order)), c_inv);
            match joint.parent {
                None => {
                    global[j] = local;
                    pos[j] = [
                        skeleton.root_position[0] + trans[0],
                        skeleton.root_position[1] + trans[1],
                        skeleton.root_position[2] + trans[2],
                    ];
                }
                Some(parent) => {
                    global[j] = mat3_mul(&global[parent], &local);
                    let bone = joint.direction.map(|d| d * joint.length);
                    let offset = mat3_apply(&global[j], bone);
                    let pp = pos[parent];
                    pos[j] = [pp[0] + offset[0] + trans[0], pp[1] + offset[1] + trans[1], pp[2] + offset[2] + trans[2]];
                }
            }
        }
        for j in 0..p {
            for c in 0..3 {
                coords[(3 * j + c, t)] = pos[j][c];
            }
        }
    }
    MotionSequence::new(skeleton.joint_names(), 0, coords, channels.frame_rate, None)
}

/// Translates every frame so the root sits at the origin and rotates about the
/// vertical axis so the walker heads along +Z (X points to the walker's left,
/// Y up).
///
/// The heading is the mean horizontal displacement of the root path over the
/// sequence. The root path itself is kept, re-expressed in the new frame and
/// anchored at its first sample, so that normalizing twice is a no-op.
pub fn normalize_pose(seq: &MotionSequence) -> Result<MotionSequence, MocapError> {
    seq.validate()?;
    let n = seq.num_frames();
    let track = seq.root_path();
    let hx = (track[n - 1][0] - track[0][0]) / (n - 1) as f64;
    let hz = (track[n - 1][2] - track[0][2]) / (n - 1) as f64;
    let norm = hypot(hx, hz);
    if !(norm > HEADING_EPSILON) {
        return Err(MocapError::DegenerateHeading { norm });
    }
    let (ux, uz) = (hx / norm, hz / norm);
    // New axes: Z' = heading, X' = Y × Z'.
    let rotate = |v: [f64; 3]| [uz * v[0] - ux * v[2], v[1], ux * v[0] + uz * v[2]];

    let mut out = seq.clone();
    for t in 0..n {
        let r = seq.position(seq.root, t);
        for j in 0..seq.num_joints() {
            let p = seq.position(j, t);
            out.set_position(j, t, rotate([p[0] - r[0], p[1] - r[1], p[2] - r[2]]));
        }
    }
    let origin = track[0];
    out.root_track = Some(
        track.iter().map(|p| rotate([p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]])).collect(),
    );
    Ok(out)
}

/// One resampled gait cycle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaitCycle {
    pub joints: Vec<String>,
    /// `(3·p) × n_fixed` coordinates.
    pub coords: Matrix,
    pub label: String,
}

impl GaitCycle {
    pub fn new(joints: Vec<String>, coords: Matrix, label: impl Into<String>) -> Result<Self, MocapError> {
        if coords.rows() != 3 * joints.len() {
            return Err(MocapError::InvalidMotion(alloc::format!(
                "{} coordinate rows for {} joints",
                coords.rows(),
                joints.len()
            )));
        }
        if coords.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(MocapError::InvalidMotion("non-finite coordinate".into()));
        }
        Ok(Self { joints, coords, label: label.into() })
    }

    pub fn num_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn num_frames(&self) -> usize {
        self.coords.cols()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j == name)
    }

    /// Summed temporal variance of a joint's three coordinates.
    pub fn joint_variance(&self, joint: usize) -> f64 {
        (0..3).map(|c| variance(self.coords.row(3 * joint + c))).sum()
    }

    /// Reorders joints following [`canonical_joint_order`].
    pub fn into_canonical_order(self) -> Self {
        let perm = canonical_joint_order(&self.joints);
        let joints = perm.iter().map(|&i| self.joints[i].clone()).collect();
        let coords = Matrix::from_fn(self.coords.rows(), self.coords.cols(), |r, c| {
            self.coords[(3 * perm[r / 3] + r % 3, c)]
        });
        Self { joints, coords, label: self.label }
    }
}

/// Circular display order of the 31-joint motion-capture skeleton: legs,
/// torso, left arm, right arm.
pub const CMU_JOINT_ORDER: [&str; 31] = [
    "root", "lhipjoint", "rhipjoint", "lfemur", "ltibia", "lfoot", "ltoes", "rfemur", "rtibia", "rfoot", "rtoes",
    "lowerback", "upperback", "thorax", "lowerneck", "upperneck", "head", "lclavicle", "lhumerus", "lradius",
    "lwrist", "lhand", "lfingers", "lthumb", "rclavicle", "rhumerus", "rradius", "rwrist", "rhand", "rfingers",
    "rthumb",
];

/// Permutation putting known joints in [`CMU_JOINT_ORDER`] order; unknown
/// joints keep their relative order after the known ones.
pub fn canonical_joint_order(names: &[String]) -> Vec<usize> {
    let rank = |name: &str| CMU_JOINT_ORDER.iter().position(|c| c.eq_ignore_ascii_case(name));
    let mut idx: Vec<usize> = (0..names.len()).collect();
    idx.sort_by_key(|&i| (rank(&names[i]).unwrap_or(usize::MAX), i));
    idx
}

/// Which joints mark the feet when detecting steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOptions {
    pub left_ankle: String,
    pub right_ankle: String,
    pub static_threshold: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { left_ankle: "ltibia".into(), right_ankle: "rtibia".into(), static_threshold: STATIC_VARIANCE_THRESHOLD }
    }
}

const ANKLE_CANDIDATES: [(&str, &str); 4] =
    [("ltibia", "rtibia"), ("lankle", "rankle"), ("ankle_left", "ankle_right"), ("ankleleft", "ankleright")];

impl CycleOptions {
    /// Picks ankle joint names known to exist in `joints`, falling back to the
    /// defaults.
    pub fn detect(joints: &[String]) -> Self {
        let has = |n: &str| joints.iter().any(|j| j.eq_ignore_ascii_case(n));
        let find = |n: &str| joints.iter().find(|j| j.eq_ignore_ascii_case(n)).cloned().unwrap_or_else(|| n.to_string());
        for (l, r) in ANKLE_CANDIDATES {
            if has(l) && has(r) {
                return Self { left_ankle: find(l), right_ankle: find(r), ..Self::default() };
            }
        }
        Self::default()
    }
}

/// Frames at which the horizontal distance between the ankles peaks (heel
/// strikes).
pub fn detect_heel_strikes(seq: &MotionSequence, opts: &CycleOptions) -> Result<Vec<usize>, MocapError> {
    let l = seq.joint_index(&opts.left_ankle).ok_or_else(|| MocapError::UnknownJoint(opts.left_ankle.clone()))?;
    let r = seq.joint_index(&opts.right_ankle).ok_or_else(|| MocapError::UnknownJoint(opts.right_ankle.clone()))?;
    let spread = ankle_spread(seq, l, r);
    let lo = spread.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spread.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-9 * (1.0 + hi)) {
        return Ok(Vec::new());
    }
    let level = mean(&spread);
    let mut strikes = Vec::new();
    for t in 1..spread.len().saturating_sub(1) {
        if spread[t] > spread[t - 1] && spread[t] >= spread[t + 1] && spread[t] > level {
            strikes.push(t);
        }
    }
    Ok(strikes)
}

fn ankle_spread(seq: &MotionSequence, l: usize, r: usize) -> Vec<f64> {
    (0..seq.num_frames())
        .map(|t| {
            let a = seq.position(l, t);
            let b = seq.position(r, t);
            hypot(a[0] - b[0], a[2] - b[2])
        })
        .collect()
}

/// Splits a normalized sequence into gait cycles.
///
/// A cycle runs from one heel strike to the second-next strike led by the same
/// foot; it is linearly resampled to `fixed_length` frames and static joints
/// are dropped.
pub fn segment_gait_cycles(
    seq: &MotionSequence,
    fixed_length: usize,
    opts: &CycleOptions,
) -> Result<Vec<GaitCycle>, MocapError> {
    seq.validate()?;
    if fixed_length < 2 {
        return Err(MocapError::InvalidMotion("fixed length must be at least 2 frames".into()));
    }
    let strikes = detect_heel_strikes(seq, opts)?;
    let l = seq.joint_index(&opts.left_ankle).ok_or_else(|| MocapError::UnknownJoint(opts.left_ankle.clone()))?;
    let r = seq.joint_index(&opts.right_ankle).ok_or_else(|| MocapError::UnknownJoint(opts.right_ankle.clone()))?;
    let left_leads = |t: usize| seq.position(l, t)[2] > seq.position(r, t)[2];

    let label = seq.label.clone().unwrap_or_default();
    let mut cycles = Vec::new();
    for w in strikes.windows(3) {
        let (start, end) = (w[0], w[2]);
        if left_leads(start) != left_leads(end) || left_leads(w[1]) == left_leads(start) {
            continue;
        }
        let resampled = resample(seq, start, end, fixed_length);
        cycles.push(drop_static_joints(&seq.joints, resampled, &label, opts.static_threshold)?);
    }
    if cycles.is_empty() {
        return Err(MocapError::NoCycleDetected);
    }
    Ok(cycles)
}

/// Linear interpolation of frames `start..=end` onto `len` uniform samples.
pub fn resample(seq: &MotionSequence, start: usize, end: usize, len: usize) -> Matrix {
    let rows = seq.coords.rows();
    let span = (end - start) as f64;
    let mut out = Matrix::zeros(rows, len);
    for k in 0..len {
        let pos = start as f64 + span * k as f64 / (len - 1) as f64;
        let i0 = (libm::floor(pos) as usize).min(end);
        let i1 = (i0 + 1).min(end);
        let frac = pos - i0 as f64;
        for row in 0..rows {
            let a = seq.coords[(row, i0)];
            let b = seq.coords[(row, i1)];
            out[(row, k)] = a + (b - a) * frac;
        }
    }
    out
}

fn drop_static_joints(
    names: &[String],
    coords: Matrix,
    label: &str,
    threshold: f64,
) -> Result<GaitCycle, MocapError> {
    let full = GaitCycle::new(names.to_vec(), coords, label)?;
    let keep: Vec<usize> = (0..full.num_joints()).filter(|&j| full.joint_variance(j) >= threshold).collect();
    let joints = keep.iter().map(|&j| names[j].clone()).collect();
    let coords = Matrix::from_fn(3 * keep.len(), full.num_frames(), |r, c| full.coords[(3 * keep[r / 3] + r % 3, c)]);
    GaitCycle::new(joints, coords, label)
}

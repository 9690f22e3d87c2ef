//! Acclaim skeleton (ASF) and motion (AMC) parsers.
//!
//! Keywords are case-insensitive, `#` starts a comment, and whitespace is
//! free-form. Angles are converted to radians on the way in; lengths stay in
//! file units.

use ggm_core::mocap::{Axis, Dof, Joint, MotionChannels, Skeleton};

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    fn to_radians(self, v: f64) -> f64 {
        match self {
            AngleUnit::Degrees => v.to_radians(),
            AngleUnit::Radians => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Units {
    pub mass: f64,
    pub length: f64,
    pub angle: AngleUnit,
}

impl Default for Units {
    fn default() -> Self {
        Self { mass: 1.0, length: 1.0, angle: AngleUnit::Degrees }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Asf {
    pub name: Option<String>,
    pub units: Units,
    pub skeleton: Skeleton,
}

fn asf_err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::MalformedAsf { line, message: msg.into() }
}

fn amc_err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::MalformedAmc { line, message: msg.into() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn number(tok: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| asf_err(line, format!("{what}: `{tok}` is not a number")))
}

fn triple(toks: &[&str], line: usize, what: &str) -> Result<[f64; 3], ParseError> {
    if toks.len() < 3 {
        return Err(asf_err(line, format!("{what} needs three values")));
    }
    Ok([number(toks[0], line, what)?, number(toks[1], line, what)?, number(toks[2], line, what)?])
}

fn axis_order(tok: &str, line: usize) -> Result<[Axis; 3], ParseError> {
    let axes: Vec<Axis> = tok
        .chars()
        .map(|c| match c.to_ascii_uppercase() {
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            _ => Err(asf_err(line, format!("bad axis order `{tok}`"))),
        })
        .collect::<Result<_, _>>()?;
    match axes.as_slice() {
        [a, b, c] if a != b && b != c && a != c => Ok([*a, *b, *c]),
        _ => Err(asf_err(line, format!("bad axis order `{tok}`"))),
    }
}

fn dof(tok: &str, line: usize) -> Result<Dof, ParseError> {
    match tok.to_ascii_lowercase().as_str() {
        "tx" => Ok(Dof::Tx),
        "ty" => Ok(Dof::Ty),
        "tz" => Ok(Dof::Tz),
        "rx" => Ok(Dof::Rx),
        "ry" => Ok(Dof::Ry),
        "rz" => Ok(Dof::Rz),
        _ => Err(asf_err(line, format!("unsupported degree of freedom `{tok}`"))),
    }
}

#[derive(Default)]
struct Bone {
    line: usize,
    name: Option<String>,
    direction: Option<[f64; 3]>,
    length: Option<f64>,
    axis: Option<([f64; 3], [Axis; 3])>,
    dof: Vec<Dof>,
}

#[derive(PartialEq)]
enum Section {
    None,
    Skip,
    Units,
    Root,
    BoneData,
    Hierarchy,
}

pub fn parse_asf(text: &str) -> Result<Asf, ParseError> {
    let mut name = None;
    let mut units = Units::default();
    let mut section = Section::None;
    let mut root_seen = false;
    let mut root_dof = Vec::new();
    let mut root_order = [Axis::X, Axis::Y, Axis::Z];
    let mut root_position = [0.0; 3];
    let mut root_orientation = [0.0; 3];
    let mut bones: Vec<Bone> = Vec::new();
    let mut current: Option<Bone> = None;
    let mut links: Vec<(usize, String, String)> = Vec::new();
    let mut hierarchy_line = None;
    let mut hierarchy_open = false;
    let mut last_line = 0;

    for (ln, line) in lines(text) {
        last_line = ln;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let key = toks[0].to_ascii_lowercase();
        if key.starts_with(':') {
            if current.is_some() {
                return Err(asf_err(ln, "bone block not closed with `end`"));
            }
            section = match key.as_str() {
                ":version" | ":documentation" => Section::Skip,
                ":name" => {
                    name = toks.get(1).map(|s| s.to_string());
                    Section::Skip
                }
                ":units" => Section::Units,
                ":root" => {
                    root_seen = true;
                    Section::Root
                }
                ":bonedata" => Section::BoneData,
                ":hierarchy" => {
                    hierarchy_line = Some(ln);
                    Section::Hierarchy
                }
                _ => Section::Skip,
            };
            continue;
        }
        match section {
            Section::None => return Err(asf_err(ln, "content before the first section")),
            Section::Skip => {}
            Section::Units => match key.as_str() {
                "mass" => units.mass = number(toks.get(1).unwrap_or(&""), ln, "mass")?,
                "length" => units.length = number(toks.get(1).unwrap_or(&""), ln, "length")?,
                "angle" => {
                    units.angle = match toks.get(1).map(|s| s.to_ascii_lowercase()).as_deref() {
                        Some("deg") | Some("degrees") => AngleUnit::Degrees,
                        Some("rad") | Some("radians") => AngleUnit::Radians,
                        _ => return Err(asf_err(ln, "angle unit must be `deg` or `rad`")),
                    }
                }
                _ => {}
            },
            Section::Root => match key.as_str() {
                "order" => root_dof = toks[1..].iter().map(|t| dof(t, ln)).collect::<Result<_, _>>()?,
                "axis" => root_order = axis_order(toks.get(1).unwrap_or(&""), ln)?,
                "position" => root_position = triple(&toks[1..], ln, "position")?,
                "orientation" => root_orientation = triple(&toks[1..], ln, "orientation")?,
                _ => {}
            },
            Section::BoneData => {
                if key == "begin" {
                    if current.is_some() {
                        return Err(asf_err(ln, "nested `begin`"));
                    }
                    current = Some(Bone { line: ln, ..Bone::default() });
                    continue;
                }
                if key == "end" {
                    let bone = current.take().ok_or_else(|| asf_err(ln, "`end` without `begin`"))?;
                    bones.push(bone);
                    continue;
                }
                let Some(bone) = current.as_mut() else {
                    return Err(asf_err(ln, format!("`{}` outside a bone block", toks[0])));
                };
                match key.as_str() {
                    "name" => bone.name = Some(toks.get(1).ok_or_else(|| asf_err(ln, "missing bone name"))?.to_string()),
                    "direction" => bone.direction = Some(triple(&toks[1..], ln, "direction")?),
                    "length" => bone.length = Some(number(toks.get(1).unwrap_or(&""), ln, "length")?),
                    "axis" => {
                        let angles = triple(&toks[1..], ln, "axis")?;
                        let order = axis_order(toks.get(4).ok_or_else(|| asf_err(ln, "axis needs an order"))?, ln)?;
                        bone.axis = Some((angles, order));
                    }
                    "dof" => bone.dof = toks[1..].iter().map(|t| dof(t, ln)).collect::<Result<_, _>>()?,
                    // id, limits and their continuation lines, bodymass, cofmass
                    _ => {}
                }
            }
            Section::Hierarchy => match key.as_str() {
                "begin" => hierarchy_open = true,
                "end" => hierarchy_open = false,
                _ => {
                    if !hierarchy_open {
                        return Err(asf_err(ln, "hierarchy entry outside `begin`/`end`"));
                    }
                    for child in &toks[1..] {
                        links.push((ln, toks[0].to_string(), child.to_string()));
                    }
                }
            },
        }
    }
    if current.is_some() {
        return Err(asf_err(last_line, "bone block not closed with `end`"));
    }
    if hierarchy_open {
        return Err(asf_err(last_line, "hierarchy not closed with `end`"));
    }
    if !root_seen {
        return Err(asf_err(last_line, "missing `:root` section"));
    }
    if !bones.is_empty() && hierarchy_line.is_none() {
        return Err(asf_err(last_line, "missing `:hierarchy` section"));
    }

    let mut joints = vec![Joint {
        name: "root".into(),
        parent: None,
        direction: [0.0; 3],
        length: 0.0,
        axis_angles: root_orientation.map(|a| units.angle.to_radians(a)),
        axis_order: root_order,
        dof: root_dof,
    }];
    for b in &bones {
        let name = b.name.clone().ok_or_else(|| asf_err(b.line, "bone without a name"))?;
        if joints.iter().any(|j| j.name.eq_ignore_ascii_case(&name)) {
            return Err(asf_err(b.line, format!("duplicate joint `{name}`")));
        }
        let length = b.length.ok_or_else(|| asf_err(b.line, format!("bone `{name}` has no length")))?;
        if length < 0.0 {
            return Err(asf_err(b.line, format!("bone `{name}` has negative length")));
        }
        let d = b.direction.ok_or_else(|| asf_err(b.line, format!("bone `{name}` has no direction")))?;
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if !(norm > 0.0) {
            return Err(asf_err(b.line, format!("bone `{name}` has a zero direction")));
        }
        let (angles, order) = b.axis.unwrap_or(([0.0; 3], [Axis::X, Axis::Y, Axis::Z]));
        joints.push(Joint {
            name,
            parent: None,
            direction: d.map(|v| v / norm),
            length,
            axis_angles: angles.map(|a| units.angle.to_radians(a)),
            axis_order: order,
            dof: b.dof.clone(),
        });
    }

    let names: Vec<String> = joints.iter().map(|j| j.name.to_ascii_lowercase()).collect();
    let index = |n: &str| names.iter().position(|j| *j == n.to_ascii_lowercase());
    for (ln, parent, child) in &links {
        let p = index(parent).ok_or_else(|| asf_err(*ln, format!("unknown joint `{parent}`")))?;
        let c = index(child).ok_or_else(|| asf_err(*ln, format!("unknown joint `{child}`")))?;
        if c == 0 {
            return Err(asf_err(*ln, "the root cannot be a child"));
        }
        if joints[c].parent.is_some() {
            return Err(asf_err(*ln, format!("joint `{child}` has two parents")));
        }
        joints[c].parent = Some(p);
    }
    let hl = hierarchy_line.unwrap_or(last_line);
    if let Some(orphan) = joints.iter().skip(1).find(|j| j.parent.is_none()) {
        return Err(asf_err(hl, format!("joint `{}` is missing from the hierarchy", orphan.name)));
    }
    let skeleton = Skeleton { joints, root_position };
    skeleton.validate().map_err(|e| asf_err(hl, e.to_string()))?;
    Ok(Asf { name, units, skeleton })
}

/// Parses an AMC motion file against a skeleton. Every joint with degrees of
/// freedom must appear exactly once per frame, and frame numbers must be
/// consecutive.
pub fn parse_amc(text: &str, asf: &Asf, frame_rate: f64) -> Result<MotionChannels, ParseError> {
    let sk = &asf.skeleton;
    let mut unit = asf.units.angle;
    let mut frames: Vec<Vec<Option<Vec<f64>>>> = Vec::new();
    let mut frame_line = 0;
    let mut last_index: Option<i64> = None;
    let close = |frame: &[Option<Vec<f64>>], line: usize| -> Result<(), ParseError> {
        for (j, v) in frame.iter().enumerate() {
            if v.is_none() && !sk.joints[j].dof.is_empty() {
                return Err(amc_err(line, format!("frame is missing joint `{}`", sk.joints[j].name)));
            }
        }
        Ok(())
    };

    for (ln, line) in lines(text) {
        if line.starts_with(':') {
            match line.to_ascii_lowercase().as_str() {
                ":degrees" => unit = AngleUnit::Degrees,
                ":radians" => unit = AngleUnit::Radians,
                _ => {}
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() == 1 {
            if let Ok(idx) = toks[0].parse::<i64>() {
                if let Some(prev) = last_index {
                    if idx != prev + 1 {
                        return Err(amc_err(ln, format!("frame {idx} follows frame {prev}")));
                    }
                }
                if let Some(f) = frames.last() {
                    close(f, frame_line)?;
                }
                last_index = Some(idx);
                frame_line = ln;
                frames.push(vec![None; sk.joints.len()]);
                continue;
            }
        }
        let frame = frames.last_mut().ok_or_else(|| amc_err(ln, "joint data before the first frame number"))?;
        let j = sk
            .joints
            .iter()
            .position(|j| j.name.eq_ignore_ascii_case(toks[0]))
            .ok_or_else(|| amc_err(ln, format!("unknown joint `{}`", toks[0])))?;
        let joint = &sk.joints[j];
        if toks.len() - 1 != joint.dof.len() {
            return Err(amc_err(
                ln,
                format!("joint `{}` has {} values for {} channels", joint.name, toks.len() - 1, joint.dof.len()),
            ));
        }
        if frame[j].is_some() {
            return Err(amc_err(ln, format!("joint `{}` repeated within a frame", joint.name)));
        }
        let mut values = Vec::with_capacity(joint.dof.len());
        for (tok, d) in toks[1..].iter().zip(&joint.dof) {
            let v = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| amc_err(ln, format!("`{tok}` is not a number")))?;
            values.push(if d.rotation_axis().is_some() { unit.to_radians(v) } else { v });
        }
        frame[j] = Some(values);
    }
    if let Some(f) = frames.last() {
        close(f, frame_line)?;
    }
    Ok(MotionChannels {
        frames: frames.into_iter().map(|f| f.into_iter().map(Option::unwrap_or_default).collect()).collect(),
        frame_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROOT_ONLY: &str = ":version 1.10\n:root\n order TX TY TZ RX RY RZ\n axis XYZ\n position 0 0 0\n orientation 0 0 0\n:bonedata\n:hierarchy\n begin\n end\n";

    #[test]
    fn root_only_document() {
        let asf = parse_asf(ROOT_ONLY).unwrap();
        assert_eq!(asf.skeleton.joints.len(), 1);
        assert_eq!(asf.skeleton.joints[0].dof.len(), 6);
    }

    #[test]
    fn missing_root_is_reported() {
        let err = parse_asf(":bonedata\n:hierarchy\nbegin\nend\n").unwrap_err();
        assert!(matches!(err, ParseError::MalformedAsf { .. }));
    }

    #[test]
    fn amc_without_frames_is_empty() {
        let asf = parse_asf(ROOT_ONLY).unwrap();
        let m = parse_amc(":FULLY-SPECIFIED\n:DEGREES\n", &asf, 120.0).unwrap();
        assert_eq!(m.num_frames(), 0);
    }
}

#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub const WALKER_ASF: &str = "\
# hand-written walker
:version 1.10
:name walker
:units
  mass 1.0
  length 1.0
  angle deg
:documentation
  six bones on two legs, a spine and a head
:root
  order TX TY TZ RX RY RZ
  axis XYZ
  position 0 0 0
  orientation 0 0 0
:bonedata
  begin
    id 1
    name lhipjoint
    direction 1 0 0
    length 0.15
    axis 0 0 0 XYZ
  end
  begin
    id 2
    name lfemur
    direction 0 -1 0
    length 0.45
    axis 0 0 0 XYZ
    dof rx ry rz
    limits (-160.0 20.0)
           (-70.0 70.0)
           (-60.0 70.0)
  end
  begin
    id 3
    name ltibia
    direction 0 -1 0
    length 0.45
    axis 0 0 0 XYZ
    dof rx
  end
  begin
    id 4
    name rhipjoint
    direction -1 0 0
    length 0.15
    axis 0 0 0 XYZ
  end
  begin
    id 5
    name rfemur
    direction 0 -1 0
    length 0.45
    axis 0 0 0 XYZ
    dof rx ry rz
  end
  begin
    id 6
    name rtibia
    direction 0 -1 0
    length 0.45
    axis 0 0 0 XYZ
    dof rx
  end
  begin
    id 7
    name lowerback
    direction 0 1 0
    length 0.3
    axis 0 0 0 XYZ
    dof rx ry rz
  end
  begin
    id 8
    name head
    direction 0 1 0
    length 0.4
    axis 0 0 0 XYZ
    dof rx
  end
:hierarchy
  begin
    root lhipjoint rhipjoint lowerback
    lhipjoint lfemur
    lfemur ltibia
    rhipjoint rfemur
    rfemur rtibia
    lowerback head
  end
";

/// `periods` gait cycles over `n` frames while the root advances along +Z
/// (or stands still when `speed` is zero).
pub fn walker_amc(n: usize, periods: f64, speed: f64) -> String {
    let mut out = String::from("#!OML:ASF walker.asf\n:FULLY-SPECIFIED\n:DEGREES\n");
    for t in 0..n {
        let phase = 2.0 * PI * periods * t as f64 / (n - 1) as f64;
        let swing = 30.0 * phase.sin();
        out.push_str(&format!("{}\n", t + 1));
        out.push_str(&format!("root 0 0.9 {:.6} 0 0 0\n", speed * t as f64));
        out.push_str(&format!("lowerback {:.6} 0 0\n", 4.0 * (2.0 * phase).sin()));
        out.push_str(&format!("head {:.6}\n", 3.0 * phase.cos()));
        out.push_str(&format!("lfemur {swing:.6} 0 0\n"));
        out.push_str(&format!("ltibia {:.6}\n", 10.0 * (1.0 - phase.cos())));
        out.push_str(&format!("rfemur {:.6} 0 0\n", -swing));
        out.push_str(&format!("rtibia {:.6}\n", 10.0 * (1.0 + phase.cos())));
    }
    out
}

pub fn write(path: &Path, text: &str) {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).unwrap();
    }
    fs::write(path, text).unwrap();
}

pub fn ggm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggm")).args(args).current_dir(cwd).env("RUST_LOG", "warn").output().unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                out.push((p.strip_prefix(base).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

//! Image and trajectory writers.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use crate::interferometry::IntensityImage;
use crate::so3::Trajectory;

/// Binary 8-bit PGM, pixels `round(255·I/I_max)`, top row first. An all-zero
/// image encodes as all zeros.
pub fn encode_pgm(img: &IntensityImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    let max = img.max();
    out.extend(img.data().iter().map(|&v| {
        if max > 0.0 {
            (255.0 * v / max).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

pub fn write_pgm<W: Write>(img: &IntensityImage, mut w: W) -> io::Result<()> {
    w.write_all(&encode_pgm(img))
}

pub fn write_image(img: &IntensityImage, path: &Path) -> io::Result<()> {
    std::fs::write(path, encode_pgm(img))
}

pub const TRAJECTORY_HEADER: &str = "t,a,ux,uy,uz,gamma,crossing";

/// One row per sample, 17 significant digits, `crossing` as 0/1.
pub fn encode_trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.samples.len() * 140);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let [ux, uy, uz] = s.point.axis();
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            s.t,
            s.point.a(),
            ux,
            uy,
            uz,
            s.gauge.gamma,
            u8::from(s.crossing)
        );
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> io::Result<()> {
    std::fs::write(path, encode_trajectory_csv(traj))
}

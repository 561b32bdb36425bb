//! First-order Laguerre-Gaussian and Hermite-Gaussian mode functions.
//!
//! All modes share the same Gaussian envelope, wavefront curvature and Gouy
//! phase; they differ only in the first-order polynomial factor:
//!
//! * `LG±`: `ρ e^{±iφ}` (helical phase, dark vortex core),
//! * `HG_h`, `HG_v`: `x` and `y` lobes,
//! * `HG_±45`: `(ψ_h ± ψ_v)/√2`.
//!
//! Every mode is unit-normalized over the transverse plane. Lengths are in
//! whatever unit the [`BeamGeometry`] is expressed in (SI metres by default).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ModeError;

/// Source wavelength used for the default geometry, in metres.
pub const DEFAULT_WAVELENGTH: f64 = 532e-9;
/// Waist radius `w(0)` of the default geometry, in metres.
pub const DEFAULT_WAIST: f64 = 1e-3;

/// Wavenumber and Rayleigh length of a paraxial beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    wavenumber: f64,
    rayleigh_length: f64,
}

impl BeamGeometry {
    pub fn new(wavenumber: f64, rayleigh_length: f64) -> Result<Self, ModeError> {
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(ModeError::InvalidGeometry("wavenumber must be positive and finite"));
        }
        if !(rayleigh_length.is_finite() && rayleigh_length > 0.0) {
            return Err(ModeError::InvalidGeometry(
                "Rayleigh length must be positive and finite",
            ));
        }
        Ok(Self { wavenumber, rayleigh_length })
    }

    /// Geometry with the given wavelength whose waist radius is `waist`.
    pub fn from_wavelength_and_waist(wavelength: f64, waist: f64) -> Result<Self, ModeError> {
        if !(wavelength.is_finite() && wavelength > 0.0 && waist.is_finite() && waist > 0.0) {
            return Err(ModeError::InvalidGeometry("wavelength and waist must be positive"));
        }
        let k = 2.0 * PI / wavelength;
        // w(0)² = 2 z_R / k
        Self::new(k, k * waist * waist / 2.0)
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn rayleigh_length(&self) -> f64 {
        self.rayleigh_length
    }

    /// Gouy phase term `2·arctan(z/z_R)` of a first-order mode.
    pub fn gouy_phase(&self, z: f64) -> f64 {
        2.0 * (z / self.rayleigh_length).atan()
    }
}

impl Default for BeamGeometry {
    /// 532 nm source with a 1 mm waist.
    fn default() -> Self {
        Self::from_wavelength_and_waist(DEFAULT_WAVELENGTH, DEFAULT_WAIST)
            .expect("default geometry is valid")
    }
}

/// A point `(x, y)` on the transverse plane at axial position `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransversePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TransversePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_polar(rho: f64, azimuth: f64, z: f64) -> Self {
        Self { x: rho * azimuth.cos(), y: rho * azimuth.sin(), z }
    }

    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth in `(-π, π]`.
    pub fn azimuth(&self) -> f64 {
        let phi = self.y.atan2(self.x);
        if phi == -PI {
            PI
        } else {
            phi
        }
    }
}

/// The six first-order mode functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    LgPlus,
    LgMinus,
    HgH,
    HgV,
    HgPlus45,
    HgMinus45,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 6] = [
        ModeLabel::LgPlus,
        ModeLabel::LgMinus,
        ModeLabel::HgH,
        ModeLabel::HgV,
        ModeLabel::HgPlus45,
        ModeLabel::HgMinus45,
    ];
}

/// Beam radius `w(z) = sqrt(2 (z_R² + z²) / (k z_R))`.
pub fn beam_width(z: f64, geom: &BeamGeometry) -> f64 {
    let zr = geom.rayleigh_length;
    (2.0 * (zr * zr + z * z) / (geom.wavenumber * zr)).sqrt()
}

/// Wavefront radius of curvature at `z`. Infinite (flat) at the waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WavefrontRadius {
    Flat,
    Curved(f64),
}

impl WavefrontRadius {
    /// Curvature phase `k ρ² / (2R)`; zero for a flat wavefront.
    pub fn curvature_phase(&self, k: f64, rho2: f64) -> f64 {
        match *self {
            WavefrontRadius::Flat => 0.0,
            WavefrontRadius::Curved(r) => k * rho2 / (2.0 * r),
        }
    }
}

/// `R(z) = (z_R² + z²)/z`, or [`WavefrontRadius::Flat`] at `z = 0`.
pub fn wavefront_radius(z: f64, geom: &BeamGeometry) -> WavefrontRadius {
    if z == 0.0 {
        WavefrontRadius::Flat
    } else {
        let zr = geom.rayleigh_length;
        WavefrontRadius::Curved((zr * zr + z * z) / z)
    }
}

/// Common factor `(2/w²) exp(-ρ²/w²) exp(i[kρ²/2R + gouy])` shared by every
/// first-order mode; the polynomial part is applied by the caller.
fn common_factor(p: &TransversePoint, geom: &BeamGeometry) -> Complex64 {
    let w = beam_width(p.z, geom);
    let w2 = w * w;
    let rho2 = p.x * p.x + p.y * p.y;
    let phase = wavefront_radius(p.z, geom).curvature_phase(geom.wavenumber, rho2)
        + geom.gouy_phase(p.z);
    Complex64::from_polar(2.0 / w2 * (-rho2 / w2).exp(), phase)
}

/// Complex field of the unit-normalized mode `label` at `p`.
pub fn eval_mode(label: ModeLabel, p: &TransversePoint, geom: &BeamGeometry) -> Complex64 {
    let g = common_factor(p, geom);
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    match label {
        // (2/√π)(ρ/w²) e^{±iφ}: ρ e^{±iφ} = x ± i y
        ModeLabel::LgPlus => g * Complex64::new(p.x, p.y) * inv_sqrt_pi,
        ModeLabel::LgMinus => g * Complex64::new(p.x, -p.y) * inv_sqrt_pi,
        // sqrt(2/π)(2x/w²) = (2/w²)·sqrt(2/π)·x
        ModeLabel::HgH => g * ((2.0 / PI).sqrt() * p.x),
        ModeLabel::HgV => g * ((2.0 / PI).sqrt() * p.y),
        // (HG_H ± HG_V)/√2
        ModeLabel::HgPlus45 => g * ((p.x + p.y) * inv_sqrt_pi),
        ModeLabel::HgMinus45 => g * ((p.x - p.y) * inv_sqrt_pi),
    }
}

/// Uniform midpoint-rule grid over the square `[-half_width, half_width]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub points_per_axis: usize,
    pub half_width: f64,
}

impl QuadratureGrid {
    pub const MIN_POINTS: usize = 512;
    /// Minimum half-width in units of `w(z)`.
    pub const MIN_HALF_WIDTH_IN_WIDTHS: f64 = 3.0;

    /// Default grid at plane `z`: 512 points, half-width `4·w(z)`.
    pub fn for_plane(z: f64, geom: &BeamGeometry) -> Self {
        Self { points_per_axis: Self::MIN_POINTS, half_width: 4.0 * beam_width(z, geom) }
    }

    fn check(&self, z: f64, geom: &BeamGeometry) -> Result<(), ModeError> {
        let w = beam_width(z, geom);
        if self.points_per_axis < Self::MIN_POINTS
            || self.half_width.is_nan()
            || self.half_width < Self::MIN_HALF_WIDTH_IN_WIDTHS * w
        {
            return Err(ModeError::InsufficientResolution {
                points: self.points_per_axis,
                half_width_in_widths: self.half_width / w,
            });
        }
        Ok(())
    }

    fn integrate<F>(&self, z: f64, mut f: F) -> Complex64
    where
        F: FnMut(&TransversePoint) -> Complex64,
    {
        let n = self.points_per_axis;
        let h = 2.0 * self.half_width / n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let y = -self.half_width + (j as f64 + 0.5) * h;
            let mut row = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let x = -self.half_width + (i as f64 + 0.5) * h;
                row += f(&TransversePoint::new(x, y, z));
            }
            sum += row;
        }
        sum * (h * h)
    }
}

/// Numerical `∫∫ |ψ|² dx dy` of a mode at plane `z`.
pub fn mode_norm_quadrature(
    label: ModeLabel,
    z: f64,
    geom: &BeamGeometry,
    grid: &QuadratureGrid,
) -> Result<f64, ModeError> {
    grid.check(z, geom)?;
    Ok(grid.integrate(z, |p| Complex64::from(eval_mode(label, p, geom).norm_sqr())).re)
}

/// Numerical overlap `∫∫ ψ_a ψ_b* dx dy` at plane `z`.
pub fn mode_overlap_quadrature(
    a: ModeLabel,
    b: ModeLabel,
    z: f64,
    geom: &BeamGeometry,
    grid: &QuadratureGrid,
) -> Result<Complex64, ModeError> {
    grid.check(z, geom)?;
    Ok(grid.integrate(z, |p| eval_mode(a, p, geom) * eval_mode(b, p, geom).conj()))
}

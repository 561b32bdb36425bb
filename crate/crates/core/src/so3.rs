//! SO(3) ball representation of maximally nonseparable spin-orbit states.
//!
//! A state with unit concurrence has coefficient matrix
//! `Λ = e^{iγ} U / √2` with `U = [[λ, η], [−η*, λ*]] ∈ SU(2)`. Writing
//! `λ = cos(a/2) − i u_z sin(a/2)` and `η = −(u_y + i u_x) sin(a/2)` places the
//! state at `a·û` inside the ball of radius π, i.e. `U = exp(−i (a/2) û·σ)`.
//!
//! `U` and `−U` describe the same rotation, so the ball has antipodal surface
//! points identified. Local unitaries act as `Λ → W Λ Cᵀ` with `W, C ∈ SU(2)`,
//! which leaves `det Λ` (and therefore `γ`) unchanged; a path that starts at
//! `U = 1` and ends at `U = −1` must cross the surface an odd number of times.
//! [`trace_trajectory`] follows the continuous SU(2) lift of a sampled path
//! and counts these crossings.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::{intermediate_states, lift, Mat2, OpticalElement};
use crate::error::So3Error;
use crate::state::SpinOrbitState;

/// Maximum `|C − 1|` accepted by [`gauge_decompose`].
pub const MAX_NONSEPARABILITY_DEFECT: f64 = 1e-9;
/// Minimum number of samples per swept element.
pub const MIN_SAMPLES_PER_ELEMENT: usize = 16;
/// Crossing parameters are refined until the bracket is narrower than this.
pub const CROSSING_RESOLUTION: f64 = 1e-10;
/// Samples with `|Re tr U| <= SURFACE_TIE` (a within 1e-12 of π) are on the
/// surface and take the sheet of their predecessor.
const SURFACE_TIE: f64 = 1e-12;
/// Closure tolerance for cyclic trajectories.
pub const CLOSURE_TOLERANCE: f64 = 1e-9;
const NEAR_SURFACE: f64 = 1e-6;
const NEAR_SURFACE_RUN: usize = 3;
const ORIGIN_AXIS_CUTOFF: f64 = 1e-14;

/// A point `a·û` of the SO(3) ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SO3Point {
    a: f64,
    axis: [f64; 3],
}

impl SO3Point {
    pub fn origin() -> Self {
        Self { a: 0.0, axis: [0.0, 0.0, 1.0] }
    }

    /// Validates `a ∈ [0, π]` and normalizes `axis` (which must be nonzero).
    pub fn new(a: f64, axis: [f64; 3]) -> Result<Self, So3Error> {
        if !(0.0..=PI).contains(&a) {
            return Err(So3Error::InvalidPoint(format!("angle {a} outside [0, π]")));
        }
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(So3Error::InvalidPoint("axis must be a finite nonzero vector".into()));
        }
        if a == 0.0 {
            return Ok(Self::origin());
        }
        Ok(Self { a, axis: axis.map(|c| c / n) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    /// Cartesian position `a·û` inside the ball.
    pub fn position(&self) -> [f64; 3] {
        self.axis.map(|c| c * self.a)
    }

    /// Rotation matrix (Rodrigues) of angle `a` about `û`.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let [x, y, z] = self.axis;
        let (s, c) = self.a.sin_cos();
        let t = 1.0 - c;
        Matrix3::new(
            c + t * x * x,
            t * x * y - s * z,
            t * x * z + s * y,
            t * x * y + s * z,
            c + t * y * y,
            t * y * z - s * x,
            t * x * z - s * y,
            t * y * z + s * x,
            c + t * z * z,
        )
    }

    /// Component-wise comparison honoring the identification of antipodal
    /// surface points and the arbitrary axis at the origin.
    pub fn approx_eq(&self, other: &SO3Point, tol: f64) -> bool {
        if self.a <= tol && other.a <= tol {
            return true;
        }
        if (self.a - other.a).abs() > tol {
            return false;
        }
        let diff = |sign: f64| {
            (0..3).map(|i| (self.axis[i] - sign * other.axis[i]).abs()).fold(0.0, f64::max)
        };
        let mut d = diff(1.0);
        if PI - self.a <= tol {
            d = d.min(diff(-1.0));
        }
        d <= tol
    }
}

/// `Λ = e^{iγ} U / √2` with `U ∈ SU(2)` and `Re tr U >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeDecomposition {
    /// Global phase in `(−π, π]`.
    pub gamma: f64,
    pub unitary: Mat2,
    /// Surface crossings accumulated along the path up to this point.
    pub sign_flips: u32,
}

impl GaugeDecomposition {
    /// `e^{iγ} U / √2` as a state.
    pub fn reconstruct(&self) -> SpinOrbitState {
        let m = self.unitary * (Complex64::from_polar(FRAC_1_SQRT_2, self.gamma));
        SpinOrbitState::from_unitary_image(nalgebra::Vector4::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
    }

    pub fn point(&self) -> SO3Point {
        su2_to_point(&self.unitary)
    }
}

/// Nearest matrix of the form `[[λ, η], [−η*, λ*]]` with `|λ|²+|η|² = 1`.
fn project_su2(m: &Mat2) -> Mat2 {
    let lambda = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
    let eta = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
    let n = (lambda.norm_sqr() + eta.norm_sqr()).sqrt();
    let (lambda, eta) = (lambda / n, eta / n);
    Mat2::new(lambda, eta, -eta.conj(), lambda.conj())
}

fn wrap_phase(g: f64) -> f64 {
    let mut g = g % (2.0 * PI);
    if g <= -PI {
        g += 2.0 * PI;
    } else if g > PI {
        g -= 2.0 * PI;
    }
    g
}

/// Splits a maximally nonseparable state into global phase and SU(2) part.
pub fn gauge_decompose(s: &SpinOrbitState) -> Result<GaugeDecomposition, So3Error> {
    let concurrence = s.concurrence();
    if (concurrence - 1.0).abs() > MAX_NONSEPARABILITY_DEFECT {
        return Err(So3Error::NotMaximallyNonseparable { concurrence });
    }
    let m = s.coefficient_matrix() * Complex64::from(2f64.sqrt());
    let gamma = m.determinant().arg() / 2.0;
    let u = project_su2(&(m * Complex64::from_polar(1.0, -gamma)));
    let (gamma, unitary) = if u.trace().re < 0.0 { (gamma + PI, -u) } else { (gamma, u) };
    Ok(GaugeDecomposition { gamma: wrap_phase(gamma), unitary, sign_flips: 0 })
}

/// Ball coordinates of `U` (or of `−U` when `Re tr U < 0`; both are the same
/// rotation).
pub fn su2_to_point(u: &Mat2) -> SO3Point {
    let mut lambda = (u[(0, 0)] + u[(1, 1)].conj()) * 0.5;
    let mut eta = (u[(0, 1)] - u[(1, 0)].conj()) * 0.5;
    if lambda.re < 0.0 {
        lambda = -lambda;
        eta = -eta;
    }
    let v = [-eta.im, -eta.re, -lambda.im];
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if s <= ORIGIN_AXIS_CUTOFF {
        return SO3Point::origin();
    }
    // a = 2·arccos(Re λ), evaluated through atan2 for accuracy near a = 0.
    let a = 2.0 * s.atan2(lambda.re);
    SO3Point { a: a.min(PI), axis: v.map(|c| c / s) }
}

/// `e^{iγ} (1/√2) [λ, η, −η*, λ*]` for the ball point `p`.
pub fn point_to_state(p: &SO3Point, gamma: f64) -> SpinOrbitState {
    let (s, c) = (p.a / 2.0).sin_cos();
    let [ux, uy, uz] = p.axis;
    let lambda = Complex64::new(c, -uz * s);
    let eta = -Complex64::new(uy, ux) * s;
    let g = Complex64::from_polar(FRAC_1_SQRT_2, gamma);
    SpinOrbitState::from_unitary_image(nalgebra::Vector4::new(
        lambda * g,
        eta * g,
        -eta.conj() * g,
        lambda.conj() * g,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HomotopyClass {
    /// Even number of surface crossings; topological phase 0.
    Zero,
    /// Odd number of surface crossings; topological phase π.
    Pi,
}

impl HomotopyClass {
    pub fn from_crossings(count: usize) -> Self {
        if count.is_multiple_of(2) {
            HomotopyClass::Zero
        } else {
            HomotopyClass::Pi
        }
    }

    /// `+1` for the 0-class, `−1` for the π-class.
    pub fn phase_sign(&self) -> i8 {
        match self {
            HomotopyClass::Zero => 1,
            HomotopyClass::Pi => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    /// Global sweep parameter in `[0, 1]`.
    pub t: f64,
    pub point: SO3Point,
    pub state: SpinOrbitState,
    /// Canonical decomposition (`Re tr U >= 0`), with the running crossing count.
    pub gauge: GaugeDecomposition,
    /// Whether a surface crossing was detected between the previous sample and this one.
    pub crossing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Refined crossing parameters `t*`.
    pub crossings: Vec<f64>,
    pub homotopy_class: HomotopyClass,
    pub topological_phase: i8,
    pub samples_per_element: usize,
    /// Warnings about paths running along the (singular) sphere surface.
    pub diagnostics: Vec<String>,
}

impl Trajectory {
    pub fn initial_state(&self) -> &SpinOrbitState {
        &self.samples[0].state
    }

    pub fn final_state(&self) -> &SpinOrbitState {
        &self.samples[self.samples.len() - 1].state
    }

    /// `⟨initial|final⟩`, the Pancharatnam overlap of the path endpoints.
    pub fn overlap_with_initial(&self) -> Complex64 {
        self.initial_state().overlap(self.final_state())
    }

    /// Distance of the final state from `±` the initial state.
    pub fn closure_distance(&self) -> f64 {
        let (i, f) = (self.initial_state(), self.final_state());
        f.max_abs_diff(i).min(f.max_abs_diff(&i.neg()))
    }

    pub fn is_closed(&self) -> bool {
        self.closure_distance() <= CLOSURE_TOLERANCE
    }
}

/// The path generated by sweeping each element's retardation from 0 to its
/// full value.
struct Sweep<'a> {
    elems: &'a [OpticalElement],
    prefix: Vec<SpinOrbitState>,
}

impl Sweep<'_> {
    fn state_at(&self, t: f64) -> SpinOrbitState {
        let n = self.elems.len();
        let pos = (t * n as f64).clamp(0.0, n as f64);
        let k = (pos.floor() as usize).min(n - 1);
        self.partial(k, pos - k as f64)
    }

    fn partial(&self, k: usize, fraction: f64) -> SpinOrbitState {
        let op = lift(&self.elems[k].partial(fraction));
        SpinOrbitState::from_unitary_image(op.0 * self.prefix[k].as_vector())
    }
}

fn frob_distance(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).norm()
}

/// Canonical decomposition of `s` together with the representative of `±U`
/// nearest to `reference`.
fn continue_lift(
    s: &SpinOrbitState,
    reference: &Mat2,
) -> Result<(GaugeDecomposition, Mat2), So3Error> {
    let d = gauge_decompose(s)?;
    let u = d.unitary;
    let cont = if frob_distance(&u, reference) <= frob_distance(&-u, reference) { u } else { -u };
    Ok((d, cont))
}

fn sheet_of(u: &Mat2) -> Option<i8> {
    let re = u.trace().re;
    if re.abs() <= SURFACE_TIE {
        None
    } else if re > 0.0 {
        Some(1)
    } else {
        Some(-1)
    }
}

fn refine_crossing(
    sweep: &Sweep<'_>,
    mut lo: f64,
    mut lo_lift: Mat2,
    mut hi: f64,
    lo_sheet: i8,
) -> Result<f64, So3Error> {
    while hi - lo >= CROSSING_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let (_, cont) = continue_lift(&sweep.state_at(mid), &lo_lift)?;
        match sheet_of(&cont) {
            Some(s) if s == lo_sheet => {
                lo = mid;
                lo_lift = cont;
            }
            _ => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples the SO(3) path traced while the elements are switched on one at a
/// time and classifies its homotopy class.
pub fn trace_trajectory(
    s0: &SpinOrbitState,
    elems: &[OpticalElement],
    samples_per_element: usize,
) -> Result<Trajectory, So3Error> {
    if samples_per_element < MIN_SAMPLES_PER_ELEMENT {
        return Err(So3Error::TooFewSamples {
            got: samples_per_element,
            min: MIN_SAMPLES_PER_ELEMENT,
        });
    }
    if let Some(index) = elems.iter().position(|e| !e.is_unitary()) {
        return Err(So3Error::NonUnitaryElement { index });
    }
    let first = gauge_decompose(s0)?;
    let sweep = Sweep { elems, prefix: intermediate_states(s0, elems)? };

    let mut samples = vec![TrajectorySample {
        t: 0.0,
        point: first.point(),
        state: *s0,
        gauge: first,
        crossing: false,
    }];
    let mut crossings = Vec::new();
    let mut diagnostics = Vec::new();

    let mut cont = first.unitary;
    let mut last_sheet: i8 = 1;
    let mut last_definite = (0.0, cont);
    let mut near_surface_run = 0usize;

    let total = (elems.len() * samples_per_element) as f64;
    for k in 0..elems.len() {
        for j in 1..=samples_per_element {
            let t = (k * samples_per_element + j) as f64 / total;
            let state = if j == samples_per_element {
                sweep.prefix[k + 1]
            } else {
                sweep.partial(k, j as f64 / samples_per_element as f64)
            };
            let (mut gauge, next) = continue_lift(&state, &cont)?;
            cont = next;

            let mut crossing = false;
            if let Some(sheet) = sheet_of(&cont) {
                if sheet != last_sheet {
                    let (lo, lo_lift) = last_definite;
                    crossings.push(refine_crossing(&sweep, lo, lo_lift, t, last_sheet)?);
                    crossing = true;
                    last_sheet = sheet;
                }
                last_definite = (t, cont);
            }
            gauge.sign_flips = crossings.len() as u32;

            let point = gauge.point();
            if point.a() > PI - NEAR_SURFACE {
                near_surface_run += 1;
                if near_surface_run == NEAR_SURFACE_RUN + 1 {
                    diagnostics.push(format!(
                        "path runs along the sphere surface near t = {t:.6} (element {k}); \
                         crossing count may be unreliable"
                    ));
                }
            } else {
                near_surface_run = 0;
            }

            samples.push(TrajectorySample { t, point, state, gauge, crossing });
        }
    }

    let homotopy_class = HomotopyClass::from_crossings(crossings.len());
    Ok(Trajectory {
        samples,
        crossings,
        homotopy_class,
        topological_phase: homotopy_class.phase_sign(),
        samples_per_element,
        diagnostics,
    })
}

/// Checks that the sign of `Re⟨initial|final⟩` matches the crossing parity.
pub fn verify_phase_consistency(traj: &Trajectory) -> Result<bool, So3Error> {
    let distance = traj.closure_distance();
    if distance > CLOSURE_TOLERANCE {
        return Err(So3Error::NotCyclic { distance });
    }
    let sign: i8 = if traj.overlap_with_initial().re >= 0.0 { 1 } else { -1 };
    Ok(sign == traj.topological_phase)
}

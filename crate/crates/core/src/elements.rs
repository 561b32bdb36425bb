//! Wave plates, astigmatic mode converters and polarization filters.
//!
//! Orientations are in degrees, retardations in radians. Wave plates act on
//! the polarization index as `W ⊗ 1`; mode converters act on the LG index as
//! `1 ⊗ C`, with `C` written in the `{ψ₊, ψ₋}` basis.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ElementError;
use crate::state::SpinOrbitState;

pub type Mat2 = Matrix2<Complex64>;

const ANNIHILATION_NORM: f64 = 1e-12;

/// Wave plate with fast axis at `theta_deg` and retardation `phi`.
pub fn waveplate_matrix(theta_deg: f64, phi: f64) -> Mat2 {
    let two_theta = 2.0 * theta_deg.to_radians();
    let (s, c) = (phi / 2.0).sin_cos();
    let i = Complex64::i();
    let off = i * s * two_theta.sin();
    Matrix2::new(
        c + i * s * two_theta.cos(),
        off,
        off,
        c - i * s * two_theta.cos(),
    )
}

/// Astigmatic mode converter at `theta_deg` with retardation `phi`, in the
/// `{ψ₊, ψ₋}` basis.
pub fn converter_matrix(theta_deg: f64, phi: f64) -> Mat2 {
    let two_theta = 2.0 * theta_deg.to_radians();
    let (s, c) = (phi / 2.0).sin_cos();
    let i = Complex64::i();
    Matrix2::new(
        Complex64::from(c),
        i * s * Complex64::from_polar(1.0, -two_theta),
        i * s * Complex64::from_polar(1.0, two_theta),
        Complex64::from(c),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ElementKind {
    WavePlate,
    ModeConverter,
    PolarizationFilter(Polarization),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalElement {
    kind: ElementKind,
    theta_deg: f64,
    phi: f64,
}

impl OpticalElement {
    fn checked(kind: ElementKind, theta_deg: f64, phi: f64) -> Result<Self, ElementError> {
        if !theta_deg.is_finite() {
            return Err(ElementError::NonFiniteOrientation(theta_deg));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(ElementError::RetardationOutOfRange(phi));
        }
        Ok(Self { kind, theta_deg, phi })
    }

    pub fn wave_plate(theta_deg: f64, phi: f64) -> Result<Self, ElementError> {
        Self::checked(ElementKind::WavePlate, theta_deg, phi)
    }

    pub fn mode_converter(theta_deg: f64, phi: f64) -> Result<Self, ElementError> {
        Self::checked(ElementKind::ModeConverter, theta_deg, phi)
    }

    pub fn half_wave_plate(theta_deg: f64) -> Result<Self, ElementError> {
        Self::wave_plate(theta_deg, PI)
    }

    pub fn quarter_wave_plate(theta_deg: f64) -> Result<Self, ElementError> {
        Self::wave_plate(theta_deg, FRAC_PI_2)
    }

    pub fn polarization_filter(keep: Polarization) -> Self {
        Self { kind: ElementKind::PolarizationFilter(keep), theta_deg: 0.0, phi: 0.0 }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta_deg
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self.kind, ElementKind::PolarizationFilter(_))
    }

    /// The same element with its retardation scaled by `fraction`; used to
    /// sweep an element from identity to full strength.
    pub(crate) fn partial(&self, fraction: f64) -> Self {
        Self { phi: self.phi * fraction, ..*self }
    }

    /// The exact inverse of a unitary element: the same retardation with the
    /// axis turned by 90°. Filters are returned unchanged.
    pub fn inverse(&self) -> Self {
        match self.kind {
            ElementKind::PolarizationFilter(_) => *self,
            _ => Self { theta_deg: self.theta_deg + 90.0, ..*self },
        }
    }
}

/// A 4×4 operator on the spin-orbit basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedOperator(pub Matrix4<Complex64>);

impl LiftedOperator {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// Largest entry of `U†U − 1`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.0.adjoint() * self.0 - Matrix4::identity();
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn compose(&self, later: &LiftedOperator) -> LiftedOperator {
        LiftedOperator(later.0 * self.0)
    }
}

/// Lifts an element to the four-dimensional spin-orbit space.
pub fn lift(e: &OpticalElement) -> LiftedOperator {
    let id = Matrix2::<Complex64>::identity();
    match e.kind {
        ElementKind::WavePlate => LiftedOperator(waveplate_matrix(e.theta_deg, e.phi).kronecker(&id)),
        ElementKind::ModeConverter => {
            LiftedOperator(id.kronecker(&converter_matrix(e.theta_deg, e.phi)))
        }
        ElementKind::PolarizationFilter(keep) => {
            let one = Complex64::from(1.0);
            let zero = Complex64::from(0.0);
            let (h, v) = match keep {
                Polarization::H => (one, zero),
                Polarization::V => (zero, one),
            };
            LiftedOperator(Matrix4::from_diagonal(&nalgebra::Vector4::new(h, h, v, v)))
        }
    }
}

fn apply_one(
    s: &SpinOrbitState,
    e: &OpticalElement,
    index: usize,
) -> Result<SpinOrbitState, ElementError> {
    let out = lift(e).0 * s.as_vector();
    if e.is_unitary() {
        return Ok(SpinOrbitState::from_unitary_image(out));
    }
    let n = out.norm();
    if n < ANNIHILATION_NORM {
        return Err(ElementError::StateAnnihilated { index });
    }
    Ok(SpinOrbitState::from_unitary_image(out.unscale(n)))
}

/// Applies the elements in beam order; only filters renormalize.
pub fn apply_sequence(
    s: &SpinOrbitState,
    elems: &[OpticalElement],
) -> Result<SpinOrbitState, ElementError> {
    elems
        .iter()
        .enumerate()
        .try_fold(*s, |acc, (i, e)| apply_one(&acc, e, i))
}

/// The input state followed by the state after each element.
pub fn intermediate_states(
    s: &SpinOrbitState,
    elems: &[OpticalElement],
) -> Result<Vec<SpinOrbitState>, ElementError> {
    let mut out = Vec::with_capacity(elems.len() + 1);
    out.push(*s);
    for (i, e) in elems.iter().enumerate() {
        let next = apply_one(out.last().expect("non-empty"), e, i)?;
        out.push(next);
    }
    Ok(out)
}

/// `[AMC(22.5°, π/2), HWP(θ), AMC(22.5°, π/2), QWP(0°)]`, the cyclic sequence
/// whose closed trajectories at θ = ±45° belong to opposite homotopy classes.
pub fn cyclic_sequence(hwp_theta_deg: f64) -> Result<Vec<OpticalElement>, ElementError> {
    Ok(vec![
        OpticalElement::mode_converter(22.5, FRAC_PI_2)?,
        OpticalElement::half_wave_plate(hwp_theta_deg)?,
        OpticalElement::mode_converter(22.5, FRAC_PI_2)?,
        OpticalElement::quarter_wave_plate(0.0)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{prepare_initial, PreparationConfig};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(a: f64) -> Complex64 {
        Complex64::from_polar(1.0, a)
    }

    fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn psi0() -> SpinOrbitState {
        prepare_initial(&PreparationConfig::new(0.5).unwrap())
    }

    fn state(a: [Complex64; 4]) -> SpinOrbitState {
        SpinOrbitState::new(a).unwrap()
    }

    #[test]
    fn waveplate_examples() {
        assert!(max_diff(&waveplate_matrix(33.0, 0.0), &Mat2::identity()) < 1e-15);
        let q = waveplate_matrix(0.0, FRAC_PI_2);
        assert!(max_diff(&q, &Matrix2::new(e(PI / 4.0), c(0., 0.), c(0., 0.), e(-PI / 4.0))) < 1e-15);
        let h = waveplate_matrix(22.5, PI);
        let k = c(0.0, FRAC_1_SQRT_2);
        assert!(max_diff(&h, &Matrix2::new(k, k, k, -k)) < 1e-15);
    }

    #[test]
    fn converter_examples() {
        assert!(max_diff(&converter_matrix(71.0, 0.0), &Mat2::identity()) < 1e-15);
        let m = converter_matrix(0.0, PI);
        assert!(max_diff(&m, &Matrix2::new(c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.))) < 1e-15);
        let m = converter_matrix(22.5, FRAC_PI_2);
        let expected = Matrix2::new(c(1., 0.), e(PI / 4.0), e(3.0 * PI / 4.0), c(1., 0.))
            * c(FRAC_1_SQRT_2, 0.0);
        assert!(max_diff(&m, &expected) < 1e-15);
    }

    #[test]
    fn lift_examples() {
        let l = lift(&OpticalElement::wave_plate(12.0, 0.0).unwrap());
        assert!((l.0 - Matrix4::identity()).iter().all(|z| z.norm() < 1e-15));

        let amc = OpticalElement::mode_converter(22.5, FRAC_PI_2).unwrap();
        let out = apply_sequence(&psi0(), &[amc]).unwrap();
        let psi1 = [e(0.0) * 0.5, e(3.0 * PI / 4.0) * 0.5, e(PI / 4.0) * 0.5, e(0.0) * 0.5];
        assert!(out.max_abs_diff(&state(psi1)) < 1e-15);

        let pbs = OpticalElement::polarization_filter(Polarization::H);
        let out = apply_sequence(&psi0(), &[pbs]).unwrap();
        assert!(out.max_abs_diff(&SpinOrbitState::from_real([1., 0., 0., 0.]).unwrap()) < 1e-15);
    }

    #[test]
    fn filter_that_blocks_everything_errors() {
        let s = SpinOrbitState::from_real([1., 0., 0., 0.]).unwrap();
        let hwp = OpticalElement::half_wave_plate(0.0).unwrap();
        let pbs = OpticalElement::polarization_filter(Polarization::V);
        assert_eq!(
            apply_sequence(&s, &[hwp, pbs]),
            Err(ElementError::StateAnnihilated { index: 1 })
        );
    }

    #[test]
    fn retardation_range_enforced() {
        assert!(OpticalElement::wave_plate(0.0, 2.0 * PI).is_err());
        assert!(OpticalElement::mode_converter(0.0, -0.1).is_err());
        assert!(OpticalElement::wave_plate(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn cyclic_sequence_endpoints() {
        let r = FRAC_1_SQRT_2;
        let plus = apply_sequence(&psi0(), &cyclic_sequence(45.0).unwrap()).unwrap();
        assert!(plus.max_abs_diff(&psi0().neg()) < 1e-15);
        let minus = apply_sequence(&psi0(), &cyclic_sequence(-45.0).unwrap()).unwrap();
        assert!(minus.max_abs_diff(&psi0()) < 1e-15);
        let zero = apply_sequence(&psi0(), &cyclic_sequence(0.0).unwrap()).unwrap();
        let expected = state([c(0., 0.), c(0., -r), c(0., -r), c(0., 0.)]);
        assert!(zero.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cyclic_sequence_intermediates() {
        let st = intermediate_states(&psi0(), &cyclic_sequence(45.0).unwrap()).unwrap();
        assert_eq!(st.len(), 5);
        assert_eq!(st[0], psi0());
        let psi2 = [-e(-PI / 4.0) * 0.5, c(0., 0.5), c(0., 0.5), -e(PI / 4.0) * 0.5];
        assert!(st[2].max_abs_diff(&state(psi2)) < 1e-15);

        let st = intermediate_states(&psi0(), &cyclic_sequence(-45.0).unwrap()).unwrap();
        let r = FRAC_1_SQRT_2;
        let psi3 = [e(-PI / 4.0) * r, c(0., 0.), c(0., 0.), e(PI / 4.0) * r];
        assert!(st[3].max_abs_diff(&state(psi3)) < 1e-15);
    }

    #[test]
    fn inverse_undoes_element() {
        for el in [
            OpticalElement::wave_plate(17.0, 1.3).unwrap(),
            OpticalElement::mode_converter(-40.0, 5.9).unwrap(),
        ] {
            let p = lift(&el).compose(&lift(&el.inverse()));
            assert!((p.0 - Matrix4::identity()).iter().all(|z| z.norm() < 1e-14));
        }
    }

    fn unit_det_residual(m: &Mat2) -> f64 {
        let u = (m.adjoint() * m - Mat2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        u.max((m.determinant() - 1.0).norm())
    }

    fn arb_unitary_element() -> impl Strategy<Value = OpticalElement> {
        (any::<bool>(), -180.0f64..180.0, 0.0f64..(2.0 * PI)).prop_map(|(wp, t, p)| {
            if wp {
                OpticalElement::wave_plate(t, p).unwrap()
            } else {
                OpticalElement::mode_converter(t, p).unwrap()
            }
        })
    }

    proptest! {
        #[test]
        fn su2_matrices(theta in -360.0f64..360.0, phi in 0.0f64..(2.0 * PI)) {
            prop_assert!(unit_det_residual(&waveplate_matrix(theta, phi)) < 1e-12);
            prop_assert!(unit_det_residual(&converter_matrix(theta, phi)) < 1e-12);
        }

        #[test]
        fn half_wave_double_pass_is_minus_identity(theta in -180.0f64..180.0) {
            let w = waveplate_matrix(theta, PI);
            prop_assert!(max_diff(&(w * w), &(-Mat2::identity())) < 1e-12);
        }

        #[test]
        fn degrees_of_freedom_commute(
            t1 in -90.0f64..90.0, p1 in 0.0f64..(2.0 * PI),
            t2 in -90.0f64..90.0, p2 in 0.0f64..(2.0 * PI),
        ) {
            let w = lift(&OpticalElement::wave_plate(t1, p1).unwrap()).0;
            let m = lift(&OpticalElement::mode_converter(t2, p2).unwrap()).0;
            prop_assert!((w * m - m * w).iter().all(|z| z.norm() < 1e-12));
        }

        #[test]
        fn local_unitaries_preserve_concurrence(
            a in prop::array::uniform8(-1.0f64..1.0),
            elems in prop::collection::vec(arb_unitary_element(), 0..8),
        ) {
            let v: Vec<Complex64> = a.chunks(2).map(|p| c(p[0], p[1])).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let s = state([v[0] / n, v[1] / n, v[2] / n, v[3] / n]);
            let out = apply_sequence(&s, &elems).unwrap();
            prop_assert!((out.concurrence() - s.concurrence()).abs() < 1e-12);
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }
}

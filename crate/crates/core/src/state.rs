//! Four-amplitude spin-orbit states.
//!
//! A state is `λ1 ψ₊ê_H + λ2 ψ₋ê_H + λ3 ψ₊ê_V + λ4 ψ₋ê_V`, stored as the
//! quadruple `[λ1, λ2, λ3, λ4]`. Polarization is the outer index and the
//! spatial (LG) mode the inner one, so the quadruple read as a 2×2 matrix has
//! rows `H, V` and columns `ψ₊, ψ₋`.

use std::fmt;

use nalgebra::{Matrix2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::StateError;
use crate::modes::{eval_mode, BeamGeometry, ModeLabel, TransversePoint};

/// Norm deviation tolerated (and silently corrected) by the constructors.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbitState(Vector4<Complex64>);

impl SpinOrbitState {
    /// Builds a state from raw amplitudes, renormalizing drift up to 1e-9.
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self, StateError> {
        let v = Vector4::from(amplitudes);
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(StateError::NotNormalized { norm });
        }
        Ok(Self(v.unscale(norm)))
    }

    pub fn from_real(amplitudes: [f64; 4]) -> Result<Self, StateError> {
        Self::new(amplitudes.map(Complex64::from))
    }

    /// Wraps amplitudes produced by unitary evolution of a normalized state.
    pub(crate) fn from_unitary_image(v: Vector4<Complex64>) -> Self {
        Self(v)
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn as_vector(&self) -> &Vector4<Complex64> {
        &self.0
    }

    /// The quadruple arranged as `[[λ1, λ2], [λ3, λ4]]`.
    pub fn coefficient_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.0[0], self.0[1], self.0[2], self.0[3])
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `C = 2|λ1 λ4 − λ2 λ3|`.
    pub fn concurrence(&self) -> f64 {
        let l = &self.0;
        2.0 * (l[0] * l[3] - l[1] * l[2]).norm()
    }

    /// `Σ conj(selfᵢ) otherᵢ`.
    pub fn overlap(&self, other: &SpinOrbitState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    /// Multiplies every amplitude by a unit-modulus factor `e^{iα}`.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        Self(self.0 * Complex64::from_polar(1.0, alpha))
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }

    /// Largest componentwise amplitude difference.
    pub fn max_abs_diff(&self, other: &SpinOrbitState) -> f64 {
        (self.0 - other.0).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Vector field at `p`: `E_H = λ1ψ₊ + λ2ψ₋`, `E_V = λ3ψ₊ + λ4ψ₋`.
    pub fn field_at(&self, p: &TransversePoint, geom: &BeamGeometry) -> JonesVector {
        let plus = eval_mode(ModeLabel::LgPlus, p, geom);
        let minus = eval_mode(ModeLabel::LgMinus, p, geom);
        JonesVector {
            h: self.0[0] * plus + self.0[1] * minus,
            v: self.0[2] * plus + self.0[3] * minus,
        }
    }
}

impl fmt::Display for SpinOrbitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:+.6}{:+.6}i", c.re, c.im)?;
        }
        write!(f, "]")
    }
}

/// Free-function form of [`SpinOrbitState::concurrence`].
pub fn concurrence(s: &SpinOrbitState) -> f64 {
    s.concurrence()
}

/// Free-function form of [`SpinOrbitState::overlap`].
pub fn overlap(a: &SpinOrbitState, b: &SpinOrbitState) -> Complex64 {
    a.overlap(b)
}

/// Free-function form of [`SpinOrbitState::field_at`].
pub fn field_at(s: &SpinOrbitState, p: &TransversePoint, geom: &BeamGeometry) -> JonesVector {
    s.field_at(p, geom)
}

/// Horizontal/vertical balance `ε` of the prepared input mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationConfig {
    epsilon: f64,
}

impl PreparationConfig {
    pub fn new(epsilon: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(StateError::EpsilonOutOfRange(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `[√ε, 0, 0, √(1−ε)]`; `ε = 1/2` is the maximally nonseparable `Ψ0`.
pub fn prepare_initial(cfg: &PreparationConfig) -> SpinOrbitState {
    let e = cfg.epsilon;
    SpinOrbitState(Vector4::new(
        Complex64::from(e.sqrt()),
        Complex64::from(0.0),
        Complex64::from(0.0),
        Complex64::from((1.0 - e).sqrt()),
    ))
}

/// Transverse field components at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl JonesVector {
    pub fn intensity(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }
}

impl std::ops::Add for JonesVector {
    type Output = JonesVector;

    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector { h: self.h + rhs.h, v: self.v + rhs.v }
    }
}

impl std::ops::Mul<Complex64> for JonesVector {
    type Output = JonesVector;

    fn mul(self, rhs: Complex64) -> JonesVector {
        JonesVector { h: self.h * rhs, v: self.v * rhs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{beam_width, QuadratureGrid};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn psi0() -> SpinOrbitState {
        prepare_initial(&PreparationConfig::new(0.5).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn prepare_examples() {
        let s = psi0();
        assert_eq!(s.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0));
        assert_eq!(s.amplitudes()[3], c(FRAC_1_SQRT_2, 0.0));
        let s = prepare_initial(&PreparationConfig::new(0.0).unwrap());
        assert_eq!(s.amplitudes(), [c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        let s = prepare_initial(&PreparationConfig::new(1.0).unwrap());
        assert_eq!(s.amplitudes(), [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        assert!(PreparationConfig::new(1.2).is_err());
        assert!(PreparationConfig::new(-0.1).is_err());
        assert!(PreparationConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(psi0().concurrence(), 1.0, epsilon = 1e-15);
        assert_eq!(SpinOrbitState::from_real([1., 0., 0., 0.]).unwrap().concurrence(), 0.0);
        let product = SpinOrbitState::from_real([0.5; 4]).unwrap();
        assert_abs_diff_eq!(product.concurrence(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn concurrence_of_prepared_states() {
        for i in 0..=20 {
            let e = i as f64 / 20.0;
            let s = prepare_initial(&PreparationConfig::new(e).unwrap());
            assert_abs_diff_eq!(s.concurrence(), 2.0 * (e * (1.0 - e)).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_examples() {
        let s0 = psi0();
        assert_abs_diff_eq!((s0.overlap(&s0) - 1.0).norm(), 0.0, epsilon = 1e-15);
        let e = |a: f64| Complex64::from_polar(0.5, a);
        let psi1 = SpinOrbitState::new([e(0.0), e(3.0 * PI / 4.0), e(PI / 4.0), e(0.0)]).unwrap();
        assert_abs_diff_eq!((s0.overlap(&psi1) - FRAC_1_SQRT_2).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((s0.overlap(&s0.neg()) + 1.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constructor_renormalizes_small_drift_only() {
        let s = SpinOrbitState::from_real([1.0 + 5e-10, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.norm(), 1.0);
        assert!(matches!(
            SpinOrbitState::from_real([1.0 + 1e-6, 0.0, 0.0, 0.0]),
            Err(StateError::NotNormalized { .. })
        ));
        assert_eq!(
            SpinOrbitState::from_real([f64::NAN, 0.0, 0.0, 0.0]),
            Err(StateError::NonFinite)
        );
    }

    #[test]
    fn field_examples() {
        let g = BeamGeometry::default();
        let core = TransversePoint::new(0.0, 0.0, 0.0);
        let f = psi0().field_at(&core, &g);
        assert_eq!(f.intensity(), 0.0);

        let p = TransversePoint::new(3e-4, -7e-4, 2.0);
        let f = SpinOrbitState::from_real([1., 0., 0., 0.]).unwrap().field_at(&p, &g);
        assert_eq!(f.h, eval_mode(ModeLabel::LgPlus, &p, &g));
        assert_eq!(f.v, c(0.0, 0.0));
    }

    fn integrated_intensity(s: &SpinOrbitState, g: &BeamGeometry) -> f64 {
        let grid = QuadratureGrid::for_plane(0.0, g);
        let n = grid.points_per_axis;
        let h = 2.0 * grid.half_width / n as f64;
        let mut sum = 0.0;
        for j in 0..n {
            for i in 0..n {
                let x = -grid.half_width + (i as f64 + 0.5) * h;
                let y = -grid.half_width + (j as f64 + 0.5) * h;
                sum += s.field_at(&TransversePoint::new(x, y, 0.0), g).intensity();
            }
        }
        sum * h * h
    }

    #[test]
    fn psi0_field_carries_unit_power() {
        let g = BeamGeometry::default();
        assert!(QuadratureGrid::for_plane(0.0, &g).half_width >= 3.0 * beam_width(0.0, &g));
        assert!((integrated_intensity(&psi0(), &g) - 1.0).abs() < 1e-6);
    }

    fn arb_state() -> impl Strategy<Value = SpinOrbitState> {
        prop::array::uniform8(-1.0f64..1.0)
            .prop_filter("nonzero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|a| {
                let v = Vector4::new(
                    c(a[0], a[1]),
                    c(a[2], a[3]),
                    c(a[4], a[5]),
                    c(a[6], a[7]),
                );
                let v = v.unscale(v.norm());
                SpinOrbitState::new([v[0], v[1], v[2], v[3]]).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn concurrence_invariant_under_global_phase(s in arb_state(), alpha in -PI..PI) {
            prop_assert!((s.concurrence() - s.with_global_phase(alpha).concurrence()).abs() < 1e-12);
            prop_assert!(s.overlap(&s.with_global_phase(alpha)).norm() <= 1.0 + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(3))]

        #[test]
        fn random_states_carry_unit_power(s in arb_state()) {
            let g = BeamGeometry::default();
            prop_assert!((integrated_intensity(&s, &g) - 1.0).abs() < 1e-6);
        }
    }
}

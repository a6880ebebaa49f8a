use std::f64::consts::PI;

use num_complex::Complex64;

use super::{theta_factor, theta_factor_dtheta, theta_factor_m_over_sin, QuantumNumbers, RadialFunction};
use crate::error::{Error, Result};

/// ψ and its spherical gradient components at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateValue {
    pub psi: Complex64,
    /// (∂ψ/∂r, (1/r)∂ψ/∂θ, (1/(r sinθ))∂ψ/∂φ)
    pub gradient: [Complex64; 3],
}

/// Evaluates ψ_{nlm}(r, θ, φ) and its gradient in the spherical basis from the
/// analytic Laguerre and associated-Legendre derivative relations.
///
/// The azimuthal component uses the m/sinθ-reduced Legendre seed, so points on
/// the z axis are regular. The origin is rejected.
pub fn eval_state_and_gradient(qn: &QuantumNumbers, r: f64, theta: f64, phi: f64) -> Result<StateValue> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!(
            "gradient evaluation requires 0 < r < ∞, got r = {r}"
        )));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, π]")));
    }
    let jet = StateJet::new(qn, r, theta.cos());
    let envelope = (-r / f64::from(qn.n())).exp();
    let phase = Complex64::from_polar(envelope / (2.0 * PI).sqrt(), f64::from(qn.m()) * phi);
    Ok(StateValue {
        psi: phase * jet.value,
        gradient: [
            phase * jet.d_r,
            phase * jet.d_theta,
            phase * Complex64::new(0.0, jet.d_phi),
        ],
    })
}

/// ψ and its spherical gradient with the factor e^{-r/n} e^{imφ}/√(2π)
/// stripped. The azimuthal gradient component is `i * d_phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateJet {
    pub value: f64,
    pub d_r: f64,
    pub d_theta: f64,
    pub d_phi: f64,
}

impl StateJet {
    pub fn new(qn: &QuantumNumbers, r: f64, u: f64) -> Self {
        let radial = RadialFunction::new(qn.n(), qn.l());
        Self::from_parts(&radial, qn.l(), qn.m(), r, u)
    }

    pub(crate) fn from_parts(radial: &RadialFunction, l: i32, m: i32, r: f64, u: f64) -> Self {
        let rj = radial.jet(r);
        let th = theta_factor(l, m, u);
        let d_r = (rj.dpoly - rj.poly * radial.decay()) * th;
        let d_theta = if l == 0 {
            0.0
        } else {
            rj.poly_over_r * theta_factor_dtheta(l, m, u)
        };
        let d_phi = if m == 0 {
            0.0
        } else {
            rj.poly_over_r * theta_factor_m_over_sin(l, m, u)
        };
        Self {
            value: rj.poly * th,
            d_r,
            d_theta,
            d_phi,
        }
    }
}

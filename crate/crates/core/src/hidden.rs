//! Hidden-momentum estimators.
//!
//! Method 1 expands the relativistic momentum γp to second order in p and
//! evaluates it in the frame moving with the electronic center of mass:
//! P⁽¹⁾ = ⟨(p - mₑv_c)p²⟩/(2mₑ²c²).
//!
//! Method 2 is the operator form of -(1/c²)∫ΦJ d³r with Φ = 1/r - E·r and
//! J built from p - mₑv_c. Its external-potential part P⁽²ᵃ⁾ reproduces the
//! point-dipole value μ×E/c²; the Coulomb part P⁽²ᵇ⁾ comes from the induced
//! electric dipole.
//!
//! All quantities are first assembled multiplied by c², so the cross-method
//! ratio (P⁽¹⁾ - P⁽²ᵇ⁾)c²/(μ_B E) never sees c.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{QuantumNumbers, Superposition};
use crate::error::{Error, Result};
use crate::operators::{ElementTable, OperatorKind};
use crate::quadrature::{Axis, QuadratureConfig};
use crate::stark::{center_of_mass_velocity, perturbed_state, FieldConfig, GuardPolicy};
use crate::units::{SiConversion, UnitSystem, SI};

/// A momentum vector multiplied by c². Independent of the configured c.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedMomentum(pub [f64; 3]);

impl ReducedMomentum {
    pub fn momentum(&self, units: &UnitSystem) -> [f64; 3] {
        let c2 = units.c_squared();
        self.0.map(|v| v / c2)
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Method2 {
    pub p2a: ReducedMomentum,
    pub p2b: ReducedMomentum,
}

impl Method2 {
    pub fn total(&self) -> ReducedMomentum {
        ReducedMomentum(std::array::from_fn(|i| self.p2a.0[i] + self.p2b.0[i]))
    }
}

/// c²·P⁽¹⁾ = ½ Re⟨(p_j - v_j) p²⟩ for each axis j (mₑ = 1).
pub fn method1(table: &ElementTable, state: &Superposition, v_c: [f64; 3]) -> Result<ReducedMomentum> {
    let p2 = table.expectation(state, OperatorKind::P2)?.re;
    let mut out = [0.0; 3];
    for (j, axis) in Axis::ALL.into_iter().enumerate() {
        let pp2 = table.expectation(state, OperatorKind::MomentumP2(axis))?.re;
        out[j] = 0.5 * (pp2 - v_c[j] * p2);
    }
    Ok(ReducedMomentum(out))
}

/// c²·P⁽²ᵃ⁾ and c²·P⁽²ᵇ⁾ per axis.
///
/// P⁽²ᵃ⁾_j = -E ½⟨{f, p_j - v_j}⟩ with f = x cosθ + z sinθ, and
/// P⁽²ᵇ⁾_j = ½⟨{1/r, p_j - v_j}⟩.
pub fn method2(table: &ElementTable, state: &Superposition, field: &FieldConfig, v_c: [f64; 3]) -> Result<Method2> {
    let (cos, sin) = field.direction();
    let e = field.magnitude();
    let inv_r = table.expectation(state, OperatorKind::InvR)?.re;
    let mut f_mean = Complex64::default();
    if cos != 0.0 {
        f_mean += cos * table.expectation(state, OperatorKind::X)?;
    }
    if sin != 0.0 {
        f_mean += sin * table.expectation(state, OperatorKind::Z)?;
    }
    let mut p2a = [0.0; 3];
    let mut p2b = [0.0; 3];
    for (j, axis) in Axis::ALL.into_iter().enumerate() {
        let mut f_p = Complex64::default();
        if cos != 0.0 {
            f_p += cos * table.expectation(state, OperatorKind::PositionMomentum(Axis::X, axis))?;
        }
        if sin != 0.0 {
            f_p += sin * table.expectation(state, OperatorKind::PositionMomentum(Axis::Z, axis))?;
        }
        // ½{f, p_j} = f p_j - (i/2) ∂_j f
        let grad_f = match axis {
            Axis::X => cos,
            Axis::Y => 0.0,
            Axis::Z => sin,
        };
        let sym = f_p - Complex64::new(0.0, 0.5 * grad_f);
        p2a[j] = -e * (sym.re - v_c[j] * f_mean.re);
        let anti = table.expectation(state, OperatorKind::SymInvRMomentum(axis))?.re;
        p2b[j] = 0.5 * (anti - 2.0 * v_c[j] * inv_r);
    }
    Ok(Method2 {
        p2a: ReducedMomentum(p2a),
        p2b: ReducedMomentum(p2b),
    })
}

/// Magnetic dipole moment in Bohr magnetons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleMoment {
    pub mu: [f64; 3],
}

impl DipoleMoment {
    /// Orbital moment of an unperturbed state, -m μ_B ẑ.
    pub fn unperturbed(qn: &QuantumNumbers) -> Self {
        Self {
            mu: [0.0, 0.0, f64::from(-qn.m())],
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Point-dipole hidden momentum μ×E/c², atomic units.
pub fn classical_dipole_momentum(mu: &DipoleMoment, field: [f64; 3], units: &UnitSystem) -> [f64; 3] {
    let mu_au = mu.mu.map(|v| v * units.bohr_magneton());
    cross(mu_au, field).map(|v| v / units.c_squared())
}

/// Expected value of the cross-method ratio where one is known:
/// -m for a field along x̂, and cosθ for the (3,1,-1) tilt sweep.
pub fn expected_ratio(qn: &QuantumNumbers, field: &FieldConfig) -> Option<f64> {
    let (cos, _) = field.direction();
    if field.tilt() == 0.0 {
        Some(f64::from(-qn.m()))
    } else if (qn.n(), qn.l(), qn.m()) == (3, 1, -1) {
        Some(cos)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetonUnits {
    pub p1: f64,
    pub p2a: f64,
    pub p2b: f64,
    pub p2_total: f64,
}

/// x and z components of both methods and of v_c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseComponents {
    pub p1: [f64; 2],
    pub p2a: [f64; 2],
    pub p2b: [f64; 2],
    pub v_c: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub n: i32,
    pub l: i32,
    pub m: i32,
    pub field: f64,
    pub theta: f64,
    pub n_max: u32,
    pub speed_of_light: f64,
    pub quadrature: QuadratureConfig,
    pub max_coefficient: f64,
    pub basis_terms: usize,
    /// Same-n states coupled by H' but excluded from the expansion.
    pub excluded_degenerate: Vec<String>,
    pub si: SiConversion,
}

/// Outcome of both estimators for one state and field.
///
/// Momenta are y components in atomic units (ħ/a₀); `magneton_units` holds the
/// same values in units of μ_B E/c².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenMomentumReport {
    pub p1: f64,
    pub p2a: f64,
    pub p2b: f64,
    pub p2_total: f64,
    pub v_c: f64,
    /// (P⁽¹⁾ - P⁽²ᵇ⁾)c²/(μ_B E)
    pub ratio: f64,
    pub expected_ratio: Option<f64>,
    pub residual: Option<f64>,
    /// (P⁽¹⁾ - P⁽²⁾)c²/(μ_B E)
    pub method_gap: f64,
    /// Point-dipole μ×E/c², y component.
    pub classical: f64,
    pub magneton_units: MagnetonUnits,
    pub components_xz: TransverseComponents,
    pub meta: ReportMeta,
}

/// All four momenta from one state; c-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates {
    pub v_c: [f64; 3],
    pub p1: ReducedMomentum,
    pub method2: Method2,
}

pub fn estimate(table: &ElementTable, state: &Superposition, field: &FieldConfig) -> Result<Estimates> {
    let v_c = center_of_mass_velocity(table, state)?;
    Ok(Estimates {
        v_c,
        p1: method1(table, state, v_c)?,
        method2: method2(table, state, field, v_c)?,
    })
}

/// Builds the perturbed state and evaluates both methods and the cross-method ratio.
pub fn eq9_ratio(
    table: &ElementTable,
    qn: &QuantumNumbers,
    field: &FieldConfig,
    n_max: u32,
    units: &UnitSystem,
) -> Result<HiddenMomentumReport> {
    if field.magnitude() <= 0.0 {
        return Err(Error::InvalidField("the ratio needs a nonzero field".into()));
    }
    let perturbed = perturbed_state(table, qn, field, n_max, GuardPolicy::Error)?;
    let est = estimate(table, &perturbed.state, field)?;
    let c2 = units.c_squared();
    let unit = units.bohr_magneton() * field.magnitude();
    let p2 = est.method2.total();
    let ratio = (est.p1.y() - est.method2.p2b.y()) / unit;
    let expected = expected_ratio(qn, field);
    let classical = classical_dipole_momentum(&DipoleMoment::unperturbed(qn), field.vector(), units)[1];
    let xz = |r: &ReducedMomentum| [r.0[0] / c2, r.0[2] / c2];
    Ok(HiddenMomentumReport {
        p1: est.p1.y() / c2,
        p2a: est.method2.p2a.y() / c2,
        p2b: est.method2.p2b.y() / c2,
        p2_total: p2.y() / c2,
        v_c: est.v_c[1],
        ratio,
        expected_ratio: expected,
        residual: expected.map(|e| ratio - e),
        method_gap: (est.p1.y() - p2.y()) / unit,
        classical,
        magneton_units: MagnetonUnits {
            p1: est.p1.y() / unit,
            p2a: est.method2.p2a.y() / unit,
            p2b: est.method2.p2b.y() / unit,
            p2_total: p2.y() / unit,
        },
        components_xz: TransverseComponents {
            p1: xz(&est.p1),
            p2a: xz(&est.method2.p2a),
            p2b: xz(&est.method2.p2b),
            v_c: [est.v_c[0], est.v_c[2]],
        },
        meta: ReportMeta {
            n: qn.n(),
            l: qn.l(),
            m: qn.m(),
            field: field.magnitude(),
            theta: field.tilt(),
            n_max,
            speed_of_light: units.speed_of_light,
            quadrature: table.quadrature(),
            max_coefficient: perturbed.max_coefficient,
            basis_terms: perturbed.state.len(),
            excluded_degenerate: perturbed.excluded_degenerate.iter().map(|q| q.to_string()).collect(),
            si: SI,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qn(n: i32, l: i32, m: i32) -> QuantumNumbers {
        QuantumNumbers::new(n, l, m).unwrap()
    }

    #[test]
    fn classical_geometry() {
        let u = UnitSystem::atomic();
        let e = 1e-8;
        let p = classical_dipole_momentum(&DipoleMoment { mu: [0.0, 0.0, -1.0] }, [e, 0.0, 0.0], &u);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[2], 0.0);
        assert!((p[1] + u.bohr_magneton() * e / u.c_squared()).abs() < 1e-30);
        let par = classical_dipole_momentum(&DipoleMoment { mu: [2.0, 0.0, 0.0] }, [e, 0.0, 0.0], &u);
        assert_eq!(par, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn unperturbed_moment() {
        assert_eq!(DipoleMoment::unperturbed(&qn(2, 1, 1)).mu, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn unperturbed_eigenstate_method1_is_zero() {
        let t = ElementTable::default();
        let s = Superposition::basis(qn(4, 2, 1));
        let v = center_of_mass_velocity(&t, &s).unwrap();
        assert_eq!(v, [0.0; 3]);
        let p1 = method1(&t, &s, v).unwrap();
        assert_eq!(p1.0, [0.0; 3]);
    }

    #[test]
    fn expected_ratio_rules() {
        let f0 = FieldConfig::along_x(1e-8).unwrap();
        assert_eq!(expected_ratio(&qn(7, 6, 5), &f0), Some(-5.0));
        let ft = FieldConfig::new(1e-8, 1.0).unwrap();
        assert_eq!(expected_ratio(&qn(3, 1, -1), &ft), Some(1f64.cos()));
        assert_eq!(expected_ratio(&qn(2, 1, 1), &ft), None);
    }

    #[test]
    fn zero_field_rejected_for_ratio() {
        let t = ElementTable::default();
        let r = eq9_ratio(&t, &qn(2, 1, 1), &FieldConfig::off(), 5, &UnitSystem::atomic());
        assert!(r.is_err());
    }
}

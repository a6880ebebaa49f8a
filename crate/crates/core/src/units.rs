//! Atomic units.
//!
//! Every quantity inside the crate is expressed with ħ = mₑ = e = a₀ = e²/4πε₀ = 1.
//! The speed of light is the only free constant; it enters reported momenta
//! through a single 1/c² factor and nothing else.

use serde::{Deserialize, Serialize};

/// Speed of light in atomic units (inverse fine-structure constant).
pub const SPEED_OF_LIGHT_AU: f64 = 137.035999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub electron_mass: f64,
    pub elementary_charge: f64,
    pub bohr_radius: f64,
    /// e²/(4πε₀)
    pub coulomb_constant: f64,
    pub speed_of_light: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::atomic()
    }
}

impl UnitSystem {
    pub const fn atomic() -> Self {
        Self {
            hbar: 1.0,
            electron_mass: 1.0,
            elementary_charge: 1.0,
            bohr_radius: 1.0,
            coulomb_constant: 1.0,
            speed_of_light: SPEED_OF_LIGHT_AU,
        }
    }

    /// Atomic units with a different value of c. Only reported momenta change.
    pub fn with_speed_of_light(c: f64) -> Self {
        Self {
            speed_of_light: c,
            ..Self::atomic()
        }
    }

    /// μ_B = eħ/2mₑ
    pub fn bohr_magneton(&self) -> f64 {
        self.elementary_charge * self.hbar / (2.0 * self.electron_mass)
    }

    /// Hartree energy e²/(4πε₀a₀).
    pub fn hartree(&self) -> f64 {
        self.coulomb_constant / self.bohr_radius
    }

    pub fn c_squared(&self) -> f64 {
        self.speed_of_light * self.speed_of_light
    }
}

/// CODATA 2018 factors converting atomic units to SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiConversion {
    /// ħ/a₀ in kg·m/s
    pub momentum_kg_m_per_s: f64,
    /// Eₕ/(e a₀) in V/m
    pub field_v_per_m: f64,
    /// a₀ in m
    pub length_m: f64,
    /// Eₕ in J
    pub energy_j: f64,
    /// a₀Eₕ/ħ in m/s
    pub velocity_m_per_s: f64,
}

pub const SI: SiConversion = SiConversion {
    momentum_kg_m_per_s: 1.992_851_914_10e-24,
    field_v_per_m: 5.142_206_747_63e11,
    length_m: 5.291_772_109_03e-11,
    energy_j: 4.359_744_722_207_1e-18,
    velocity_m_per_s: 2.187_691_263_64e6,
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let u = UnitSystem::atomic();
        assert_eq!(u.bohr_magneton(), 0.5);
        assert_eq!(u.hartree(), 1.0);
        assert_eq!(u.speed_of_light, 137.035999);
    }

    #[test]
    fn si_factors_consistent() {
        // velocity = momentum / mₑ
        let me = 9.109_383_701_5e-31;
        let v = SI.momentum_kg_m_per_s / me;
        assert!((v / SI.velocity_m_per_s - 1.0).abs() < 1e-9);
    }
}

//! Hydrogen bound states: quantum numbers, energies, radial functions and
//! spherical harmonics, plus their analytic derivatives.
//!
//! Spherical harmonics follow the Condon–Shortley convention,
//! Y_{l,-m} = (-1)^m conj(Y_{l,m}), so that Y_{1,1} ∝ -(x + iy). The sign of
//! every center-of-mass velocity and hidden momentum reported by the crate
//! depends on this choice.

mod angular;
mod radial;
mod state;
mod superposition;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use angular::{spherical_harmonic, theta_factor, theta_factor_dtheta, theta_factor_m_over_sin};
pub use radial::{associated_laguerre, RadialFunction, RadialJet};
pub use state::{eval_state_and_gradient, StateJet, StateValue};
pub use superposition::Superposition;

use crate::error::{Error, Result};

/// Default principal quantum number cap for basis expansions.
pub const DEFAULT_N_CAP: u32 = 20;
/// Largest cap the special-function evaluation is validated for.
pub const HARD_N_CAP: u32 = 30;

/// The triple (n, l, m) labelling an unperturbed bound state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawQuantumNumbers", into = "RawQuantumNumbers")]
pub struct QuantumNumbers {
    n: i32,
    l: i32,
    m: i32,
}

#[derive(Serialize, Deserialize)]
struct RawQuantumNumbers {
    n: i32,
    l: i32,
    m: i32,
}

impl TryFrom<RawQuantumNumbers> for QuantumNumbers {
    type Error = Error;
    fn try_from(raw: RawQuantumNumbers) -> Result<Self> {
        QuantumNumbers::new(raw.n, raw.l, raw.m)
    }
}

impl From<QuantumNumbers> for RawQuantumNumbers {
    fn from(qn: QuantumNumbers) -> Self {
        RawQuantumNumbers {
            n: qn.n,
            l: qn.l,
            m: qn.m,
        }
    }
}

impl QuantumNumbers {
    pub fn new(n: i32, l: i32, m: i32) -> Result<Self> {
        if n < 1 || l < 0 || l >= n || m.abs() > l {
            return Err(Error::InvalidQuantumNumbers { n, l, m });
        }
        Ok(Self { n, l, m })
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Unperturbed energy in hartree.
    pub fn energy(&self) -> f64 {
        bohr_energy(self.n)
    }

    /// Parity (-1)^l under r → -r.
    pub fn parity(&self) -> i32 {
        if self.l % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All valid states with principal quantum number `n`, ordered by (l, m).
    pub fn shell(n: i32) -> impl Iterator<Item = QuantumNumbers> {
        (0..n.max(0)).flat_map(move |l| (-l..=l).map(move |m| QuantumNumbers { n, l, m }))
    }
}

impl fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.l, self.m)
    }
}

impl std::str::FromStr for QuantumNumbers {
    type Err = Error;

    /// Parses `n,l,m`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!("expected `n,l,m`, got `{s}`")));
        }
        let parse = |p: &str| {
            p.parse::<i32>()
                .map_err(|_| Error::Domain(format!("not an integer: `{p}` in `{s}`")))
        };
        QuantumNumbers::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
    }
}

/// E_n = -1/(2n²) hartree.
pub fn bohr_energy(n: i32) -> f64 {
    let n = f64::from(n);
    -0.5 / (n * n)
}

/// Unperturbed energy of a state.
pub fn energy(qn: &QuantumNumbers) -> f64 {
    qn.energy()
}

/// An unperturbed eigenstate together with its energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisState {
    pub qn: QuantumNumbers,
    pub energy: f64,
}

impl From<QuantumNumbers> for BasisState {
    fn from(qn: QuantumNumbers) -> Self {
        Self {
            qn,
            energy: qn.energy(),
        }
    }
}

/// Principal quantum number cap for basis expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLimits {
    n_cap: u32,
}

impl Default for BasisLimits {
    fn default() -> Self {
        Self { n_cap: DEFAULT_N_CAP }
    }
}

impl BasisLimits {
    pub fn new(n_cap: u32) -> Result<Self> {
        if n_cap == 0 || n_cap > HARD_N_CAP {
            return Err(Error::InvalidCap(n_cap));
        }
        Ok(Self { n_cap })
    }

    pub fn n_cap(&self) -> u32 {
        self.n_cap
    }

    pub fn check(&self, qn: &QuantumNumbers) -> Result<()> {
        if qn.n as u32 > self.n_cap {
            return Err(Error::BeyondCap {
                qn: *qn,
                cap: self.n_cap,
            });
        }
        Ok(())
    }
}

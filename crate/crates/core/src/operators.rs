//! Matrix elements ⟨a|O|b⟩ between unperturbed hydrogen states.
//!
//! Operators that are not plain multiplicative kernels are reduced with exact
//! identities valid between H₀ eigenstates (atomic units):
//!
//! * ⟨a|p|b⟩ = i(E_a - E_b)⟨a|r|b⟩, from p = i[H₀, r]
//! * p² = 2(H₀ + 1/r)
//! * p(1/r) = (1/r)p + i r/r³
//!
//! The gradient-quadrature route is kept as an independent check
//! ([`ElementTable::verify_against_direct`]).

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::RwLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisLimits, QuantumNumbers, Superposition};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_complex;
use crate::quadrature::{sandwich_integral_with, Axis, Kernel, KetFactor, QuadratureConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    /// x, y or z
    Position(Axis),
    /// 1/r
    InvR,
    /// x_i/r³
    CoordOverR3(Axis),
    /// p_i
    Momentum(Axis),
    /// x_i p_j (coordinate first, momentum acting on the ket)
    PositionMomentum(Axis, Axis),
    /// (1/r) p_i
    InvRMomentum(Axis),
    /// (1/r) p_i + p_i (1/r)
    SymInvRMomentum(Axis),
    /// p²
    P2,
    /// p_i p²
    MomentumP2(Axis),
}

/// Which route produced an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Direct sandwich quadrature (possibly with an analytic gradient on the ket).
    Direct,
    /// Commutator identity with H₀.
    Commutator,
    /// Algebraic reduction onto other elements.
    Reduction,
}

impl OperatorKind {
    pub const X: Self = Self::Position(Axis::X);
    pub const Y: Self = Self::Position(Axis::Y);
    pub const Z: Self = Self::Position(Axis::Z);
    pub const INV_R: Self = Self::InvR;
    pub const Y_OVER_R3: Self = Self::CoordOverR3(Axis::Y);
    pub const PY: Self = Self::Momentum(Axis::Y);
    pub const XPY: Self = Self::PositionMomentum(Axis::X, Axis::Y);
    pub const SYM_INV_R_PY: Self = Self::SymInvRMomentum(Axis::Y);
    pub const P2: Self = Self::P2;
    pub const PY_P2: Self = Self::MomentumP2(Axis::Y);

    pub fn is_hermitian(&self) -> bool {
        match self {
            Self::PositionMomentum(a, b) => a != b,
            Self::InvRMomentum(_) => false,
            _ => true,
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            Self::Position(_)
            | Self::InvR
            | Self::CoordOverR3(_)
            | Self::PositionMomentum(..)
            | Self::InvRMomentum(_) => Strategy::Direct,
            Self::Momentum(_) => Strategy::Commutator,
            Self::SymInvRMomentum(_) | Self::P2 | Self::MomentumP2(_) => Strategy::Reduction,
        }
    }

    /// Cartesian tensor rank bound, parity and allowed m_bra - m_ket.
    fn selection(&self) -> (i32, bool, Vec<i32>) {
        fn offs(a: Axis) -> Vec<i32> {
            match a {
                Axis::X | Axis::Y => vec![-1, 1],
                Axis::Z => vec![0],
            }
        }
        match *self {
            Self::Position(a)
            | Self::CoordOverR3(a)
            | Self::Momentum(a)
            | Self::InvRMomentum(a)
            | Self::SymInvRMomentum(a)
            | Self::MomentumP2(a) => (1, true, offs(a)),
            Self::InvR | Self::P2 => (0, false, vec![0]),
            Self::PositionMomentum(a, b) => {
                let mut v: Vec<i32> = offs(a)
                    .iter()
                    .flat_map(|x| offs(b).into_iter().map(move |y| x + y))
                    .collect();
                v.sort_unstable();
                v.dedup();
                (2, false, v)
            }
        }
    }

    /// False when ⟨a|O|b⟩ vanishes by the Δl, Δm or parity selection rules.
    pub fn allowed(&self, a: &QuantumNumbers, b: &QuantumNumbers) -> bool {
        let (rank, odd, offsets) = self.selection();
        let dl = (a.l() - b.l()).abs();
        let parity_ok = (dl % 2 == 1) == odd;
        parity_ok && dl <= rank && offsets.contains(&(a.m() - b.m()))
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let up = |a: Axis| a.label().to_uppercase();
        match *self {
            Self::Position(a) => write!(f, "{}", up(a)),
            Self::InvR => write!(f, "InvR"),
            Self::CoordOverR3(a) => write!(f, "{}OverR3", up(a)),
            Self::Momentum(a) => write!(f, "P{}", a.label()),
            Self::PositionMomentum(a, b) => write!(f, "{}P{}", up(a), b.label()),
            Self::InvRMomentum(a) => write!(f, "InvRP{}", a.label()),
            Self::SymInvRMomentum(a) => write!(f, "SymInvRP{}", a.label()),
            Self::P2 => write!(f, "P2"),
            Self::MomentumP2(a) => write!(f, "P{}P2", a.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub value: Complex64,
    pub strategy: Strategy,
}

/// Reduction value, direct gradient-quadrature value and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub reduction: Complex64,
    pub direct: Complex64,
    pub relative_gap: f64,
}

type Key = (QuantumNumbers, QuantumNumbers, OperatorKind);

/// Memoized element store. Hermitian kinds are stored once under the
/// (bra ≤ ket) ordering and conjugated on the way out. Entries forbidden by
/// selection rules are never stored.
#[derive(Debug)]
pub struct ElementTable {
    limits: BasisLimits,
    quadrature: QuadratureConfig,
    entries: RwLock<HashMap<Key, TableEntry>>,
}

impl Default for ElementTable {
    fn default() -> Self {
        Self::new(BasisLimits::default(), QuadratureConfig::default())
    }
}

impl ElementTable {
    pub fn new(limits: BasisLimits, quadrature: QuadratureConfig) -> Self {
        Self {
            limits,
            quadrature,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn limits(&self) -> BasisLimits {
        self.limits
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        self.quadrature
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("element table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored entry for exactly this (bra, ket, kind) key, if any.
    pub fn entry(&self, a: &QuantumNumbers, b: &QuantumNumbers, kind: OperatorKind) -> Option<TableEntry> {
        self.entries
            .read()
            .expect("element table poisoned")
            .get(&(*a, *b, kind))
            .copied()
    }

    /// ⟨a|O|b⟩ in atomic units.
    pub fn element(&self, a: &QuantumNumbers, b: &QuantumNumbers, kind: OperatorKind) -> Result<Complex64> {
        self.limits.check(a)?;
        self.limits.check(b)?;
        if !kind.allowed(a, b) {
            return Ok(Complex64::default());
        }
        if kind.is_hermitian() && b < a {
            return Ok(self.element(b, a, kind)?.conj());
        }
        if let Some(e) = self.entry(a, b, kind) {
            return Ok(e.value);
        }
        let value = self.compute(a, b, kind)?;
        self.entries
            .write()
            .expect("element table poisoned")
            .entry((*a, *b, kind))
            .or_insert(TableEntry {
                value,
                strategy: kind.strategy(),
            });
        Ok(value)
    }

    fn direct(&self, a: &QuantumNumbers, b: &QuantumNumbers, kernel: &Kernel) -> Result<Complex64> {
        sandwich_integral_with(a, b, kernel, &self.quadrature)
    }

    fn compute(&self, a: &QuantumNumbers, b: &QuantumNumbers, kind: OperatorKind) -> Result<Complex64> {
        use OperatorKind::*;
        let eb = b.energy();
        Ok(match kind {
            Position(ax) => self.direct(a, b, &Kernel::ket(KetFactor::new(1, Some(ax), None)))?,
            InvR => self.direct(a, b, &Kernel::ket(KetFactor::new(-1, None, None)))?,
            CoordOverR3(ax) => self.direct(a, b, &Kernel::ket(KetFactor::new(-2, Some(ax), None)))?,
            PositionMomentum(d, m) => self.direct(a, b, &Kernel::ket(KetFactor::new(1, Some(d), Some(m))))?,
            InvRMomentum(ax) => self.direct(a, b, &Kernel::ket(KetFactor::new(-1, None, Some(ax))))?,
            Momentum(ax) => {
                let de = a.energy() - eb;
                if de == 0.0 {
                    Complex64::default()
                } else {
                    I * de * self.element(a, b, Position(ax))?
                }
            }
            SymInvRMomentum(ax) => {
                2.0 * self.element(a, b, InvRMomentum(ax))? + I * self.element(a, b, CoordOverR3(ax))?
            }
            P2 => {
                let diag = if a == b { eb } else { 0.0 };
                2.0 * (diag + self.element(a, b, InvR)?)
            }
            MomentumP2(ax) => {
                2.0 * eb * self.element(a, b, Momentum(ax))?
                    + 2.0 * (I * self.element(a, b, CoordOverR3(ax))? + self.element(a, b, InvRMomentum(ax))?)
            }
        })
    }

    /// Same element computed purely from gradient quadrature, bypassing the
    /// table. Kinds whose primary route is already quadrature are recomputed as is.
    pub fn direct_element(&self, a: &QuantumNumbers, b: &QuantumNumbers, kind: OperatorKind) -> Result<Complex64> {
        self.limits.check(a)?;
        self.limits.check(b)?;
        let one = Complex64::new(1.0, 0.0);
        match kind {
            OperatorKind::Momentum(ax) => self.direct(a, b, &Kernel::ket(KetFactor::new(0, None, Some(ax)))),
            OperatorKind::P2 => {
                // ⟨∇a|∇b⟩
                let mut total = Complex64::default();
                for ax in Axis::ALL {
                    let k = Kernel {
                        bra_momentum: Some(ax),
                        ket_terms: vec![KetFactor::new(0, None, Some(ax))],
                    };
                    total += self.direct(a, b, &k)?;
                }
                Ok(total)
            }
            OperatorKind::MomentumP2(ax) => {
                // ⟨p a| 2(E_b + 1/r) b⟩
                let k = Kernel {
                    bra_momentum: Some(ax),
                    ket_terms: vec![
                        KetFactor::new(0, None, None).scaled(one * (2.0 * b.energy())),
                        KetFactor::new(-1, None, None).scaled(one * 2.0),
                    ],
                };
                self.direct(a, b, &k)
            }
            OperatorKind::SymInvRMomentum(ax) => {
                // ⟨a|(1/r)p|b⟩ + ⟨p a|(1/r) b⟩
                let left = self.direct(a, b, &Kernel::ket(KetFactor::new(-1, None, Some(ax))))?;
                let right = self.direct(
                    a,
                    b,
                    &Kernel {
                        bra_momentum: Some(ax),
                        ket_terms: vec![KetFactor::new(-1, None, None)],
                    },
                )?;
                Ok(left + right)
            }
            other => self.compute(a, b, other),
        }
    }

    pub fn verify_against_direct(
        &self,
        a: &QuantumNumbers,
        b: &QuantumNumbers,
        kind: OperatorKind,
    ) -> Result<DualValue> {
        let direct = self.direct_element(a, b, kind)?;
        let reduction = self.element(a, b, kind)?;
        let scale = reduction.norm().max(direct.norm());
        let relative_gap = if scale == 0.0 {
            0.0
        } else {
            (reduction - direct).norm() / scale
        };
        Ok(DualValue {
            reduction,
            direct,
            relative_gap,
        })
    }

    /// ⟨left|O|right⟩ for two superpositions. Pairs are evaluated in parallel
    /// and reduced in a fixed order.
    pub fn transition(&self, left: &Superposition, right: &Superposition, kind: OperatorKind) -> Result<Complex64> {
        let pairs: Vec<(QuantumNumbers, Complex64, QuantumNumbers, Complex64)> = left
            .iter()
            .flat_map(|(a, ca)| {
                right
                    .iter()
                    .filter(move |(b, _)| kind.allowed(a, b))
                    .map(move |(b, cb)| (*a, *ca, *b, *cb))
            })
            .filter(|(_, ca, _, cb)| *ca != Complex64::default() && *cb != Complex64::default())
            .collect();
        let parts: Vec<Complex64> = pairs
            .par_iter()
            .map(|(a, ca, b, cb)| Ok(ca.conj() * cb * self.element(a, b, kind)?))
            .collect::<Result<_>>()?;
        Ok(pairwise_sum_complex(&parts))
    }

    /// ⟨ψ|O|ψ⟩/⟨ψ|ψ⟩.
    pub fn expectation(&self, state: &Superposition, kind: OperatorKind) -> Result<Complex64> {
        let norm = state.norm_sqr();
        if norm == 0.0 {
            return Err(Error::Domain("expectation value of the zero state".into()));
        }
        Ok(self.transition(state, state, kind)? / norm)
    }

    /// Writes every stored entry as `bra_n,bra_l,bra_m,ket_n,ket_l,ket_m,kind,re,im`
    /// in sorted key order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let entries = self.entries.read().expect("element table poisoned");
        let mut keys: Vec<&Key> = entries.keys().collect();
        keys.sort();
        writeln!(out, "bra_n,bra_l,bra_m,ket_n,ket_l,ket_m,kind,re,im")?;
        for key in keys {
            let (a, b, kind) = key;
            let v = entries[key].value;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.16e},{:.16e}",
                a.n(),
                a.l(),
                a.m(),
                b.n(),
                b.l(),
                b.m(),
                kind,
                v.re,
                v.im
            )?;
        }
        Ok(())
    }
}

/// ⟨a|O|b⟩ with a fresh default table.
pub fn element(a: &QuantumNumbers, b: &QuantumNumbers, kind: OperatorKind) -> Result<Complex64> {
    ElementTable::default().element(a, b, kind)
}

pub fn verify_against_direct(a: &QuantumNumbers, b: &QuantumNumbers, kind: OperatorKind) -> Result<DualValue> {
    ElementTable::default().verify_against_direct(a, b, kind)
}

//! First-order Stark perturbation theory for H' = eE(x cosθ + z sinθ).

use std::f64::consts::PI;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{QuantumNumbers, Superposition};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_complex;
use crate::operators::{ElementTable, OperatorKind};

/// Default field strength, atomic units.
pub const DEFAULT_FIELD: f64 = 1e-8;
/// Largest admissible |C| before the state is considered outside the linear regime.
pub const GUARD_THRESHOLD: f64 = 0.05;

/// Uniform field E(x̂ cosθ + ẑ sinθ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    magnitude: f64,
    tilt: f64,
}

impl FieldConfig {
    pub fn new(magnitude: f64, tilt: f64) -> Result<Self> {
        if magnitude <= 0.0 || !magnitude.is_finite() {
            return Err(Error::InvalidField(format!(
                "field magnitude must be positive, got {magnitude}"
            )));
        }
        if !(0.0..=PI).contains(&tilt) {
            return Err(Error::InvalidField(format!("tilt {tilt} outside [0, π]")));
        }
        Ok(Self { magnitude, tilt })
    }

    /// Field along x̂.
    pub fn along_x(magnitude: f64) -> Result<Self> {
        Self::new(magnitude, 0.0)
    }

    /// No field at all; every perturbation coefficient vanishes.
    pub fn off() -> Self {
        Self {
            magnitude: 0.0,
            tilt: 0.0,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    /// (cosθ, sinθ) with components below machine epsilon snapped to zero, so
    /// that θ = π/2 and θ = π give exactly aligned fields.
    pub fn direction(&self) -> (f64, f64) {
        let snap = |v: f64| if v.abs() < f64::EPSILON { 0.0 } else { v };
        (snap(self.tilt.cos()), snap(self.tilt.sin()))
    }

    /// Cartesian field vector.
    pub fn vector(&self) -> [f64; 3] {
        let (c, s) = self.direction();
        [self.magnitude * c, 0.0, self.magnitude * s]
    }

    /// ⟨a|H'|b⟩ = E(cosθ⟨a|x|b⟩ + sinθ⟨a|z|b⟩)
    pub fn coupling(&self, table: &ElementTable, a: &QuantumNumbers, b: &QuantumNumbers) -> Result<Complex64> {
        let (c, s) = self.direction();
        let mut v = Complex64::default();
        if c != 0.0 {
            v += c * table.element(a, b, OperatorKind::X)?;
        }
        if s != 0.0 {
            v += s * table.element(a, b, OperatorKind::Z)?;
        }
        Ok(v * self.magnitude)
    }

    fn couples(&self, a: &QuantumNumbers, b: &QuantumNumbers) -> bool {
        let (c, s) = self.direction();
        (c != 0.0 && OperatorKind::X.allowed(a, b)) || (s != 0.0 && OperatorKind::Z.allowed(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GuardPolicy {
    #[default]
    Error,
    Warn,
}

/// |ψ⁽⁰⁾⟩ + Σ_{n'≠n} C_{n'l'm'}|n'l'm'⟩ with provenance.
#[derive(Debug, Clone)]
pub struct PerturbedState {
    pub state: Superposition,
    pub unperturbed: QuantumNumbers,
    pub field: FieldConfig,
    pub n_max: u32,
    pub max_coefficient: f64,
    pub guard_tripped: bool,
    /// Same-n states that H' couples to the initial state. They are left out
    /// of the expansion, as in the n' ≠ n sum.
    pub excluded_degenerate: Vec<QuantumNumbers>,
}

fn candidates(qn: &QuantumNumbers, n_max: u32, field: &FieldConfig) -> Vec<QuantumNumbers> {
    let mut out = Vec::new();
    for n in 1..=n_max as i32 {
        for l in [qn.l() - 1, qn.l() + 1] {
            if l < 0 || l >= n {
                continue;
            }
            for m in (qn.m() - 1)..=(qn.m() + 1) {
                if let Ok(b) = QuantumNumbers::new(n, l, m) {
                    if field.couples(&b, qn) {
                        out.push(b);
                    }
                }
            }
        }
    }
    out
}

/// First-order perturbed state with C = ⟨n'l'm'|H'|nlm⟩/(E_n - E_{n'}),
/// summed over n' ≠ n up to `n_max`.
pub fn perturbed_state(
    table: &ElementTable,
    qn: &QuantumNumbers,
    field: &FieldConfig,
    n_max: u32,
    policy: GuardPolicy,
) -> Result<PerturbedState> {
    if (n_max as i32) < qn.n() {
        return Err(Error::Domain(format!("n_max = {n_max} below the initial state {qn}")));
    }
    if n_max > table.limits().n_cap() {
        return Err(Error::Domain(format!(
            "n_max = {n_max} above the basis cap {}",
            table.limits().n_cap()
        )));
    }
    let all = candidates(qn, n_max, field);
    let (same, others): (Vec<_>, Vec<_>) = all.into_iter().partition(|b| b.n() == qn.n());
    let e0 = qn.energy();
    let coeffs: Vec<(QuantumNumbers, Complex64)> = others
        .par_iter()
        .map(|b| Ok((*b, field.coupling(table, b, qn)? / (e0 - b.energy()))))
        .collect::<Result<_>>()?;

    let mut excluded = Vec::new();
    if field.magnitude() > 0.0 {
        for b in same {
            if field.coupling(table, &b, qn)? != Complex64::default() {
                excluded.push(b);
            }
        }
    }

    let mut state = Superposition::basis(*qn);
    let mut max_coefficient = 0.0_f64;
    for (b, c) in coeffs {
        if field.magnitude() > 0.0 && c == Complex64::default() {
            continue;
        }
        max_coefficient = max_coefficient.max(c.norm());
        state.set(b, c);
    }
    let guard_tripped = max_coefficient > GUARD_THRESHOLD;
    if guard_tripped && policy == GuardPolicy::Error {
        return Err(Error::GuardViolation {
            max_coefficient,
            threshold: GUARD_THRESHOLD,
        });
    }
    Ok(PerturbedState {
        state,
        unperturbed: *qn,
        field: *field,
        n_max,
        max_coefficient,
        guard_tripped,
        excluded_degenerate: excluded,
    })
}

/// Re⟨p⟩/mₑ along (x, y, z).
pub fn center_of_mass_velocity(table: &ElementTable, state: &Superposition) -> Result<[f64; 3]> {
    let mut v = [0.0; 3];
    for (slot, axis) in v.iter_mut().zip(crate::quadrature::Axis::ALL) {
        *slot = table.expectation(state, OperatorKind::Momentum(axis))?.re;
    }
    Ok(v)
}

/// The n = 2 manifold in the order used for the eigenvector components.
pub fn n2_basis() -> [QuantumNumbers; 4] {
    let q = |l, m| QuantumNumbers::new(2, l, m).expect("valid n=2 state");
    [q(0, 0), q(1, -1), q(1, 0), q(1, 1)]
}

#[derive(Debug, Clone)]
pub struct StarkEigenpair {
    /// First-order energy shift, hartree.
    pub shift: f64,
    pub vector: Superposition,
}

/// H' diagonalized inside the n = 2 manifold for a field along x̂.
///
/// Eigenpairs are sorted by shift; the degenerate zero-shift pair is resolved
/// by diagonalizing L_z² inside it (larger |m| first). Each vector is phased
/// so that its largest component is real and positive.
#[derive(Debug, Clone)]
pub struct StarkEigensystem {
    pub field: f64,
    pub pairs: Vec<StarkEigenpair>,
}

impl StarkEigensystem {
    /// Eigenvector components in [`n2_basis`] order.
    pub fn components(&self, k: usize) -> [Complex64; 4] {
        let basis = n2_basis();
        std::array::from_fn(|i| self.pairs[k].vector.coefficient(&basis[i]))
    }
}

pub fn stark_n2_eigensystem(table: &ElementTable, field: f64) -> Result<StarkEigensystem> {
    let cfg = FieldConfig::along_x(field)?;
    let basis = n2_basis();
    let mut h = Matrix4::<f64>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let v = cfg.coupling(table, &basis[i], &basis[j])?;
            if v.im.abs() > 1e-12 * field {
                return Err(Error::Domain(format!(
                    "n=2 Stark matrix not real in the Condon–Shortley basis: H'[{i}][{j}] = {v}"
                )));
            }
            h[(i, j)] = v.re;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors: Vec<nalgebra::Vector4<f64>> =
        order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();

    // resolve degenerate blocks with L_z² = diag(m²)
    let lz2 = nalgebra::Vector4::from_iterator(basis.iter().map(|q| f64::from(q.m() * q.m())));
    let tol = 1e-9 * field;
    let mut start = 0;
    while start < 4 {
        let mut end = start + 1;
        while end < 4 && (values[end] - values[start]).abs() <= tol {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let block = nalgebra::DMatrix::from_fn(size, size, |a, b| {
                vectors[start + a].component_mul(&lz2).dot(&vectors[start + b])
            });
            let sub = SymmetricEigen::new(block);
            let mut sub_order: Vec<usize> = (0..size).collect();
            sub_order.sort_by(|&a, &b| sub.eigenvalues[b].total_cmp(&sub.eigenvalues[a]));
            let old: Vec<_> = vectors[start..end].to_vec();
            for (slot, &k) in sub_order.iter().enumerate() {
                let mut v = nalgebra::Vector4::zeros();
                for (a, o) in old.iter().enumerate() {
                    v += o * sub.eigenvectors[(a, k)];
                }
                vectors[start + slot] = v;
            }
        }
        start = end;
    }

    let pairs = values
        .iter()
        .zip(vectors)
        .map(|(&shift, v)| {
            let mut lead = 0;
            for i in 1..4 {
                if v[i].abs() > v[lead].abs() + 1e-12 {
                    lead = i;
                }
            }
            let sign = v[lead].signum();
            let vector = basis
                .iter()
                .zip(v.iter())
                .filter(|(_, c)| **c != 0.0)
                .map(|(q, c)| (*q, Complex64::new(sign * c, 0.0)))
                .collect();
            StarkEigenpair { shift, vector }
        })
        .collect();
    Ok(StarkEigensystem { field, pairs })
}

/// Σ amplitude·e^{iωt}.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigSeries {
    pub terms: Vec<(f64, Complex64)>,
}

impl TrigSeries {
    fn from_terms(mut raw: Vec<(f64, Complex64)>, tol: f64) -> Self {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut terms: Vec<(f64, Vec<Complex64>)> = Vec::new();
        for (w, a) in raw {
            match terms.last_mut() {
                Some((w0, group)) if (w - *w0).abs() <= tol => group.push(a),
                _ => terms.push((w, vec![a])),
            }
        }
        Self {
            terms: terms.into_iter().map(|(w, g)| (w, pairwise_sum_complex(&g))).collect(),
        }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let parts: Vec<Complex64> = self
            .terms
            .iter()
            .map(|(w, a)| a * Complex64::from_polar(1.0, w * t))
            .collect();
        pairwise_sum_complex(&parts)
    }

    /// d/dt, evaluated from the known frequencies.
    pub fn derivative(&self, t: f64) -> Complex64 {
        let parts: Vec<Complex64> = self
            .terms
            .iter()
            .map(|(w, a)| a * Complex64::new(0.0, *w) * Complex64::from_polar(1.0, w * t))
            .collect();
        pairwise_sum_complex(&parts)
    }

    /// Real oscillation at angular frequency ω > 0 as (cos coefficient, sin coefficient).
    pub fn oscillation(&self, omega: f64, tol: f64) -> (f64, f64) {
        let pick = |w: f64| {
            self.terms
                .iter()
                .filter(|(x, _)| (x - w).abs() <= tol)
                .map(|(_, a)| *a)
                .sum::<Complex64>()
        };
        let (plus, minus) = (pick(omega), pick(-omega));
        // a₊e^{iωt} + a₋e^{-iωt} = (a₊ + a₋) cos ωt + i(a₊ - a₋) sin ωt
        ((plus + minus).re, (Complex64::new(0.0, 1.0) * (plus - minus)).re)
    }

    /// Strictly positive frequencies present (|amplitude| above `floor`).
    pub fn positive_frequencies(&self, floor: f64) -> Vec<f64> {
        self.terms
            .iter()
            .filter(|(w, a)| *w > 0.0 && a.norm() > floor)
            .map(|(w, _)| *w)
            .collect()
    }
}

/// One η-component of the evolving state: d_k(η_k + η_k⁽¹⁾)e^{-i s_k t}.
#[derive(Debug, Clone)]
pub struct EvolvingComponent {
    pub shift: f64,
    pub zero_order: Superposition,
    pub correction: Superposition,
}

/// |ψ_{2,1,1}(t)⟩ expanded on the Stark eigenvectors, global phase e^{-iE₂t} dropped.
#[derive(Debug, Clone)]
pub struct EvolvingState {
    pub components: Vec<EvolvingComponent>,
    pub eigensystem: StarkEigensystem,
}

impl EvolvingState {
    pub fn at(&self, t: f64, with_corrections: bool) -> Superposition {
        let mut out = Superposition::new();
        for c in &self.components {
            let phase = Complex64::from_polar(1.0, -c.shift * t);
            out = out.combined(&c.zero_order.scaled(phase));
            if with_corrections {
                out = out.combined(&c.correction.scaled(phase));
            }
        }
        out
    }

    /// ⟨ψ(t)|O|ψ(t)⟩ as an exact trigonometric series.
    pub fn expectation_series(
        &self,
        table: &ElementTable,
        kind: OperatorKind,
        with_corrections: bool,
    ) -> Result<TrigSeries> {
        let parts: Vec<Superposition> = self
            .components
            .iter()
            .map(|c| {
                if with_corrections {
                    c.zero_order.combined(&c.correction)
                } else {
                    c.zero_order.clone()
                }
            })
            .collect();
        let mut raw = Vec::new();
        for (j, pj) in parts.iter().enumerate() {
            for (k, pk) in parts.iter().enumerate() {
                let amp = table.transition(pj, pk, kind)?;
                raw.push((self.components[j].shift - self.components[k].shift, amp));
            }
        }
        Ok(TrigSeries::from_terms(raw, 1e-9 * self.eigensystem.field))
    }
}

/// Time-evolved perturbed |ψ_{2,1,1}⟩ for a field along x̂, with first-order
/// corrections η_k⁽¹⁾ = Σ_{n'≠2} |n'l'm'⟩⟨n'l'm'|H'|η_k⟩/(E₂ - E_{n'}) up to `n_max`.
pub fn evolve_211(table: &ElementTable, field: f64, n_max: u32) -> Result<EvolvingState> {
    if n_max < 2 || n_max > table.limits().n_cap() {
        return Err(Error::Domain(format!(
            "n_max = {n_max} outside 2..={}",
            table.limits().n_cap()
        )));
    }
    let cfg = FieldConfig::along_x(field)?;
    let eig = stark_n2_eigensystem(table, field)?;
    let initial = QuantumNumbers::new(2, 1, 1)?;
    let e2 = initial.energy();

    // outer states reachable from any n=2 state by x
    let mut outer: Vec<QuantumNumbers> = Vec::new();
    for src in n2_basis() {
        for b in candidates(&src, n_max, &cfg) {
            if b.n() != 2 && !outer.contains(&b) {
                outer.push(b);
            }
        }
    }
    outer.sort();
    let couplings: Vec<Vec<Complex64>> = outer
        .par_iter()
        .map(|b| {
            n2_basis()
                .iter()
                .map(|s| cfg.coupling(table, b, s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let components = eig
        .pairs
        .iter()
        .map(|pair| {
            let d = pair.vector.inner(&Superposition::basis(initial));
            let eta = pair.vector.scaled(d);
            let correction: Superposition = outer
                .iter()
                .zip(&couplings)
                .map(|(b, row)| {
                    let h: Complex64 = n2_basis().iter().zip(row).map(|(s, hv)| hv * eta.coefficient(s)).sum();
                    (*b, h / (e2 - b.energy()))
                })
                .filter(|(_, c)| *c != Complex64::default())
                .collect();
            EvolvingComponent {
                shift: pair.shift,
                zero_order: eta,
                correction,
            }
        })
        .filter(|c| !c.zero_order.is_empty() && c.zero_order.norm_sqr() > 0.0)
        .collect();
    Ok(EvolvingState {
        components,
        eigensystem: eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qn(n: i32, l: i32, m: i32) -> QuantumNumbers {
        QuantumNumbers::new(n, l, m).unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(FieldConfig::new(0.0, 0.0).is_err());
        assert!(FieldConfig::new(-1e-8, 0.0).is_err());
        assert!(FieldConfig::new(1e-8, -0.1).is_err());
        assert!(FieldConfig::new(1e-8, 3.2).is_err());
        let f = FieldConfig::new(1e-8, PI / 2.0).unwrap();
        assert_eq!(f.direction(), (0.0, 1.0));
        let f = FieldConfig::new(1e-8, PI).unwrap();
        assert_eq!(f.direction(), (-1.0, 0.0));
    }

    #[test]
    fn ground_state_couples_only_to_p_pm1() {
        let t = ElementTable::default();
        let f = FieldConfig::along_x(DEFAULT_FIELD).unwrap();
        let p = perturbed_state(&t, &qn(1, 0, 0), &f, 8, GuardPolicy::Error).unwrap();
        for (q, _) in p.state.iter().filter(|(q, _)| **q != qn(1, 0, 0)) {
            assert_eq!(q.l(), 1);
            assert_eq!(q.m().abs(), 1);
            assert!(q.n() >= 2);
        }
        assert_eq!(p.state.len(), 1 + 2 * 7);
        assert!(p.excluded_degenerate.is_empty());
    }

    #[test]
    fn guard_trips_for_strong_field() {
        let t = ElementTable::default();
        let f = FieldConfig::along_x(1e-2).unwrap();
        let err = perturbed_state(&t, &qn(2, 1, 0), &f, 20, GuardPolicy::Error).unwrap_err();
        assert!(matches!(err, Error::GuardViolation { .. }));
        let warned = perturbed_state(&t, &qn(2, 1, 0), &f, 20, GuardPolicy::Warn).unwrap();
        assert!(warned.guard_tripped);
    }

    #[test]
    fn degenerate_partners_flagged() {
        let t = ElementTable::default();
        let f = FieldConfig::along_x(DEFAULT_FIELD).unwrap();
        let p = perturbed_state(&t, &qn(3, 1, -1), &f, 6, GuardPolicy::Error).unwrap();
        assert!(p.excluded_degenerate.contains(&qn(3, 0, 0)));
        assert!(p.excluded_degenerate.contains(&qn(3, 2, -2)));
        assert!(p.state.states().all(|q| q.n() != 3 || *q == qn(3, 1, -1)));
    }

    #[test]
    fn off_field_gives_zero_coefficients() {
        let t = ElementTable::default();
        let p = perturbed_state(&t, &qn(2, 1, 1), &FieldConfig::off(), 6, GuardPolicy::Error).unwrap();
        assert!(p.state.len() > 1);
        assert!(p
            .state
            .iter()
            .all(|(q, c)| *q == qn(2, 1, 1) || *c == Complex64::default()));
    }

    #[test]
    fn pure_z_field_keeps_m() {
        let t = ElementTable::default();
        let f = FieldConfig::new(DEFAULT_FIELD, PI / 2.0).unwrap();
        for q in [qn(3, 1, 0), qn(4, 2, 0), qn(1, 0, 0)] {
            let p = perturbed_state(&t, &q, &f, 8, GuardPolicy::Error).unwrap();
            assert!(p.state.states().all(|s| s.m() == 0));
        }
    }

    #[test]
    fn trig_series_oscillation() {
        // -3 sin(2t) + 0.5 cos(2t) + 1
        let s = TrigSeries::from_terms(
            vec![
                (2.0, Complex64::new(0.25, 1.5)),
                (-2.0, Complex64::new(0.25, -1.5)),
                (0.0, Complex64::new(1.0, 0.0)),
            ],
            1e-12,
        );
        let (c, sn) = s.oscillation(2.0, 1e-12);
        assert!((c - 0.5).abs() < 1e-15 && (sn + 3.0).abs() < 1e-15);
        let t: f64 = 0.37;
        let expect = -3.0 * (2.0 * t).sin() + 0.5 * (2.0 * t).cos() + 1.0;
        assert!((s.value(t).re - expect).abs() < 1e-14);
        let d = -6.0 * (2.0 * t).cos() - (2.0 * t).sin();
        assert!((s.derivative(t).re - d).abs() < 1e-14);
    }
}

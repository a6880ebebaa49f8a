//! Gaussian rules and the (bra, kernel, ket) sandwich integral.
//!
//! Every integrand arising from hydrogen bound states and the Cartesian
//! kernels below is a polynomial in r times e^{-(1/n_a + 1/n_b) r}, times a
//! polynomial in u = cosθ, times a single azimuthal harmonic. The azimuthal
//! integral is done analytically; the other two use Gauss–Laguerre and
//! Gauss–Legendre rules sized so that the result is exact up to rounding.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{theta_factor, theta_factor_dtheta, theta_factor_m_over_sin, QuantumNumbers, RadialFunction};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_complex;

const MAX_NEWTON: usize = 100;
const NODE_TOL: f64 = 1e-14;
/// Above this count the smallest Gauss–Laguerre weights underflow.
pub const MAX_RULE_COUNT: usize = 160;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Decay rate of the weight function e^{-scale·r}.
    pub scale: f64,
    /// Highest polynomial degree integrated exactly.
    pub exact_degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularRule {
    /// Nodes in u = cosθ.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    /// ∫₀^∞ f(r) e^{-scale·r} dr
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let parts: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        crate::numerics::pairwise_sum(&parts)
    }
}

impl AngularRule {
    /// ∫₋₁¹ f(u) du
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let parts: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        crate::numerics::pairwise_sum(&parts)
    }
}

type NodesWeights = (Vec<f64>, Vec<f64>);
type BaseRule = Arc<NodesWeights>;
type RuleCache = OnceLock<Mutex<BTreeMap<usize, BaseRule>>>;

fn cached(cache: &'static RuleCache, count: usize, build: fn(usize) -> Result<NodesWeights>) -> Result<BaseRule> {
    let cache = cache.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&count) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build(count)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .entry(count)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 || count > MAX_RULE_COUNT {
        return Err(Error::Domain(format!(
            "rule count {count} outside 1..={MAX_RULE_COUNT}"
        )));
    }
    Ok(())
}

// (L_n(x), L_{n-1}(x))
fn laguerre_pair(count: usize, x: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..count {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0 - x) * p2 - jf * p3) / (jf + 1.0);
    }
    (p1, p2)
}

// (P_n(x), P_{n-1}(x))
fn legendre_pair(count: usize, x: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..count {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0) * x * p2 - jf * p3) / (jf + 1.0);
    }
    (p1, p2)
}

// Newton iteration on the Laguerre three-term recurrence, initial guesses
// from the Stroud–Secrest asymptotics.
fn build_laguerre(count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = count as f64;
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let mut z = 0.0_f64;
    for i in 0..count {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * n),
            1 => z + 15.0 / (1.0 + 2.5 * n),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            }
        };
        let mut converged = false;
        let (mut p1, mut pp) = (0.0, 0.0);
        for _ in 0..MAX_NEWTON {
            let (ln, lnm1) = laguerre_pair(count, z);
            p1 = ln;
            pp = n * (ln - lnm1) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NODE_TOL * z.abs() {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() {
            return Err(Error::Convergence(format!(
                "Gauss-Laguerre count {count}: node {i} stuck at {z:e} (L_n = {p1:e}, L_n' = {pp:e})"
            )));
        }
        // weight from the recurrence re-evaluated at the converged node
        let (ln, lnm1) = laguerre_pair(count, z);
        let dl = n * (ln - lnm1) / z;
        nodes[i] = z;
        weights[i] = 1.0 / (z * dl * dl);
        if i > 0 && (nodes[i] <= nodes[i - 1] || nodes[i].is_nan()) {
            return Err(Error::Convergence(format!(
                "Gauss-Laguerre count {count}: node {i} = {z:e} not above node {} = {:e}",
                i - 1,
                nodes[i - 1]
            )));
        }
    }
    Ok((nodes, weights))
}

fn build_legendre(count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = count as f64;
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let half = count.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (p1, p2) = legendre_pair(count, z);
            let pp = n * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= NODE_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(format!(
                "Gauss-Legendre count {count}: node {i} stuck at {z:e}"
            )));
        }
        if count % 2 == 1 && i == half - 1 {
            z = 0.0;
        }
        let (p1, p2) = legendre_pair(count, z);
        let pp = n * (z * p1 - p2) / (z * z - 1.0);
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        nodes[i] = -z;
        nodes[count - 1 - i] = z;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    Ok((nodes, weights))
}

static LAGUERRE: RuleCache = OnceLock::new();
static LEGENDRE: RuleCache = OnceLock::new();

/// Gauss–Laguerre rule for ∫₀^∞ f(r) e^{-scale·r} dr, exact for polynomial f
/// of degree ≤ 2·count - 1.
pub fn gauss_laguerre(count: usize, scale: f64) -> Result<RadialRule> {
    check_count(count)?;
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "Gauss-Laguerre scale must be positive, got {scale}"
        )));
    }
    let base = cached(&LAGUERRE, count, build_laguerre)?;
    Ok(RadialRule {
        nodes: base.0.iter().map(|x| x / scale).collect(),
        weights: base.1.iter().map(|w| w / scale).collect(),
        scale,
        exact_degree: 2 * count - 1,
    })
}

/// Gauss–Legendre rule on u ∈ [-1, 1], exact for degree ≤ 2·count - 1.
pub fn gauss_legendre(count: usize) -> Result<AngularRule> {
    check_count(count)?;
    let base = cached(&LEGENDRE, count, build_legendre)?;
    Ok(AngularRule {
        nodes: base.0.clone(),
        weights: base.1.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Azimuthal harmonics carried by this Cartesian component.
    fn harmonic_offsets(self) -> &'static [i32] {
        match self {
            Axis::X | Axis::Y => &[-1, 1],
            Axis::Z => &[0],
        }
    }

    // power of sinθ accompanying the harmonic, mod 2
    fn sin_parity(self) -> i32 {
        match self {
            Axis::X | Axis::Y => 1,
            Axis::Z => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// r^radial_power · (x_dir/r) · (-i ∂_mom) acting on the ket, scaled by `coeff`.
/// The momentum factor acts first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KetFactor {
    pub coeff: Complex64,
    pub radial_power: i32,
    pub direction: Option<Axis>,
    pub momentum: Option<Axis>,
}

impl KetFactor {
    pub fn new(radial_power: i32, direction: Option<Axis>, momentum: Option<Axis>) -> Self {
        Self {
            coeff: Complex64::new(1.0, 0.0),
            radial_power,
            direction,
            momentum,
        }
    }

    pub fn scaled(self, coeff: Complex64) -> Self {
        Self {
            coeff: self.coeff * coeff,
            ..self
        }
    }

    fn offsets(&self) -> Vec<i32> {
        let mom = self.momentum.map_or(&[0][..], Axis::harmonic_offsets);
        let dir = self.direction.map_or(&[0][..], Axis::harmonic_offsets);
        let mut out: Vec<i32> = mom.iter().flat_map(|a| dir.iter().map(move |b| a + b)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Integral kernel: optional momentum on the bra, linear combination of
/// factors on the ket. ⟨a|K|b⟩ = Σ_t ∫ conj(p_bra ψ_a) · t(ψ_b) d³r.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub bra_momentum: Option<Axis>,
    pub ket_terms: Vec<KetFactor>,
}

impl Kernel {
    pub fn ket(factor: KetFactor) -> Self {
        Self {
            bra_momentum: None,
            ket_terms: vec![factor],
        }
    }

    /// Supported shapes: radial power in [-2, 1] and at most one direction
    /// and one momentum per term. Checks that every term keeps the u-integrand
    /// polynomial: the sinθ parity of each Cartesian factor must match the
    /// parity of the azimuthal harmonic it carries.
    pub fn validate(&self) -> Result<()> {
        if self.ket_terms.is_empty() {
            return Err(Error::Domain("kernel without ket terms".into()));
        }
        for t in &self.ket_terms {
            if !(-2..=1).contains(&t.radial_power) {
                return Err(Error::Domain(format!(
                    "unsupported kernel shape: radial power {}",
                    t.radial_power
                )));
            }
            for axis in t.direction.iter().chain(t.momentum.iter()) {
                for off in axis.harmonic_offsets() {
                    if (off - axis.sin_parity()).rem_euclid(2) != 0 {
                        return Err(Error::Domain(format!(
                            "kernel factor {axis:?} would leave half-integer powers of sinθ"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when the analytic φ integral vanishes for this pair.
    pub fn phi_forbidden(&self, bra: &QuantumNumbers, ket: &QuantumNumbers) -> bool {
        let bra_harmonics: Vec<i32> = self
            .bra_momentum
            .map_or(&[0][..], Axis::harmonic_offsets)
            .iter()
            .map(|o| bra.m() + o)
            .collect();
        !self
            .ket_terms
            .iter()
            .any(|t| t.offsets().iter().any(|o| bra_harmonics.contains(&(ket.m() + o))))
    }

    fn max_radial_power(&self) -> i32 {
        self.ket_terms.iter().map(|t| t.radial_power).max().unwrap_or(0).max(0)
    }
}

/// Rule-count policy for sandwich integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub radial_margin: usize,
    pub angular_extra: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radial_margin: 8,
            angular_extra: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureOrders {
    pub radial: usize,
    pub angular: usize,
}

impl QuadratureConfig {
    pub fn orders(&self, bra: &QuantumNumbers, ket: &QuantumNumbers, kernel: &Kernel) -> QuadratureOrders {
        let radial_degree = (bra.n() + ket.n() + kernel.max_radial_power() + 4) as usize;
        QuadratureOrders {
            radial: radial_degree.div_ceil(2) + self.radial_margin,
            angular: (bra.l() + ket.l()) as usize + self.angular_extra,
        }
    }
}

// Ket/bra value at a point as azimuthal-harmonic amplitudes relative to e^{imφ},
// offsets -2..=2.
type Harmonics = [Complex64; 5];

struct PointJet {
    value: f64,
    d_r: f64,
    d_theta: f64,
    d_phi: f64,
}

fn momentum_harmonics(j: &PointJet, axis: Axis, s: f64, c: f64) -> Harmonics {
    let zero = Complex64::default();
    let mut h = [zero; 5];
    match axis {
        Axis::X | Axis::Y => {
            let rho = s * j.d_r + c * j.d_theta;
            let d_plus = 0.5 * (rho - j.d_phi);
            let d_minus = 0.5 * (rho + j.d_phi);
            if axis == Axis::X {
                h[3] = Complex64::new(0.0, -d_plus);
                h[1] = Complex64::new(0.0, -d_minus);
            } else {
                h[3] = Complex64::new(-d_plus, 0.0);
                h[1] = Complex64::new(d_minus, 0.0);
            }
        }
        Axis::Z => {
            h[2] = Complex64::new(0.0, -(c * j.d_r - s * j.d_theta));
        }
    }
    h
}

fn multiply_direction(h: &Harmonics, axis: Axis, s: f64, c: f64) -> Harmonics {
    let zero = Complex64::default();
    if axis == Axis::Z {
        return h.map(|v| v * c);
    }
    let (up, down) = match axis {
        Axis::X => (Complex64::new(0.5 * s, 0.0), Complex64::new(0.5 * s, 0.0)),
        _ => (Complex64::new(0.0, -0.5 * s), Complex64::new(0.0, 0.5 * s)),
    };
    let mut out = [zero; 5];
    for (k, v) in h.iter().enumerate() {
        if *v == zero {
            continue;
        }
        assert!(
            (1..4).contains(&k),
            "harmonic offset out of range after direction factor"
        );
        out[k + 1] += v * up;
        out[k - 1] += v * down;
    }
    out
}

fn apply_factor(j: &PointJet, f: &KetFactor, r: f64, s: f64, c: f64) -> Harmonics {
    let zero = Complex64::default();
    let mut h = match f.momentum {
        Some(axis) => momentum_harmonics(j, axis, s, c),
        None => {
            let mut h = [zero; 5];
            h[2] = Complex64::new(j.value, 0.0);
            h
        }
    };
    if let Some(axis) = f.direction {
        h = multiply_direction(&h, axis, s, c);
    }
    let scale = f.coeff * r.powi(f.radial_power);
    for v in h.iter_mut() {
        *v *= scale;
    }
    h
}

struct Tabulated {
    radial: Vec<crate::basis::RadialJet>,
    theta: Vec<(f64, f64, f64)>,
    decay: f64,
    l: i32,
    m: i32,
}

impl Tabulated {
    fn new(qn: &QuantumNumbers, rr: &RadialRule, ar: &AngularRule) -> Self {
        let radial_fn = RadialFunction::new(qn.n(), qn.l());
        let (l, m) = (qn.l(), qn.m());
        Self {
            radial: rr.nodes.iter().map(|&r| radial_fn.jet(r)).collect(),
            theta: ar
                .nodes
                .iter()
                .map(|&u| {
                    (
                        theta_factor(l, m, u),
                        if l == 0 { 0.0 } else { theta_factor_dtheta(l, m, u) },
                        theta_factor_m_over_sin(l, m, u),
                    )
                })
                .collect(),
            decay: radial_fn.decay(),
            l,
            m,
        }
    }

    fn jet(&self, i: usize, j: usize) -> PointJet {
        let rj = &self.radial[i];
        let (th, dth, mth) = self.theta[j];
        PointJet {
            value: rj.poly * th,
            d_r: (rj.dpoly - rj.poly * self.decay) * th,
            d_theta: if self.l == 0 { 0.0 } else { rj.poly_over_r * dth },
            d_phi: if self.m == 0 { 0.0 } else { rj.poly_over_r * mth },
        }
    }
}

/// ⟨bra|K|ket⟩ with rule sizes from the default [`QuadratureConfig`].
pub fn sandwich_integral(bra: &QuantumNumbers, ket: &QuantumNumbers, kernel: &Kernel) -> Result<Complex64> {
    sandwich_integral_with(bra, ket, kernel, &QuadratureConfig::default())
}

pub fn sandwich_integral_with(
    bra: &QuantumNumbers,
    ket: &QuantumNumbers,
    kernel: &Kernel,
    config: &QuadratureConfig,
) -> Result<Complex64> {
    kernel.validate()?;
    if kernel.phi_forbidden(bra, ket) {
        return Ok(Complex64::default());
    }
    let orders = config.orders(bra, ket, kernel);
    sandwich_integral_orders(bra, ket, kernel, orders)
}

/// Sandwich integral with explicit rule counts.
pub fn sandwich_integral_orders(
    bra: &QuantumNumbers,
    ket: &QuantumNumbers,
    kernel: &Kernel,
    orders: QuadratureOrders,
) -> Result<Complex64> {
    kernel.validate()?;
    if kernel.phi_forbidden(bra, ket) {
        return Ok(Complex64::default());
    }
    let scale = 1.0 / f64::from(bra.n()) + 1.0 / f64::from(ket.n());
    let rr = gauss_laguerre(orders.radial, scale)?;
    let ar = gauss_legendre(orders.angular)?;
    let tb = Tabulated::new(bra, &rr, &ar);
    let tk = Tabulated::new(ket, &rr, &ar);
    // ket offset k pairs with bra offset k + m_ket - m_bra
    let shift = ket.m() - bra.m();
    let mut parts = Vec::with_capacity(rr.nodes.len() * ar.nodes.len());
    for (i, (&r, &wr)) in rr.nodes.iter().zip(&rr.weights).enumerate() {
        for (j, (&u, &wu)) in ar.nodes.iter().zip(&ar.weights).enumerate() {
            let s = (1.0 - u * u).sqrt();
            let bj = tb.jet(i, j);
            let bra_h = match kernel.bra_momentum {
                Some(axis) => momentum_harmonics(&bj, axis, s, u),
                None => {
                    let mut h = [Complex64::default(); 5];
                    h[2] = Complex64::new(bj.value, 0.0);
                    h
                }
            };
            let kj = tk.jet(i, j);
            let mut acc = Complex64::default();
            for f in &kernel.ket_terms {
                let kh = apply_factor(&kj, f, r, s, u);
                for (k, kv) in kh.iter().enumerate() {
                    let b = k as i32 + shift;
                    if (0..5).contains(&b) {
                        acc += bra_h[b as usize].conj() * kv;
                    }
                }
            }
            parts.push(acc * (wr * wu * r * r));
        }
    }
    Ok(pairwise_sum_complex(&parts))
}

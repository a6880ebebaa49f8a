use serde::{Deserialize, Serialize};

/// Generalized Laguerre polynomial L^α_k(x) by upward recurrence in k.
pub fn associated_laguerre(k: i32, alpha: f64, x: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let j = f64::from(j);
        let next = ((2.0 * j + 1.0 + alpha - x) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized hydrogen radial function R_{n,l}(r) in atomic units,
///
/// R(r) = N ρ^l L^{2l+1}_{n-l-1}(ρ) e^{-ρ/2},  ρ = 2r/n.
///
/// The polynomial prefactor P(r) = R(r) e^{r/n} is exposed separately so that
/// Gauss–Laguerre quadrature can absorb the exponential exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    n: i32,
    l: i32,
    norm: f64,
}

/// Polynomial prefactor of R and its derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    /// P(r)
    pub poly: f64,
    /// dP/dr
    pub dpoly: f64,
    /// P(r)/r
    pub poly_over_r: f64,
}

impl RadialFunction {
    /// Caller guarantees 0 <= l < n.
    pub fn new(n: i32, l: i32) -> Self {
        debug_assert!(n >= 1 && l >= 0 && l < n);
        let nf = f64::from(n);
        // (n-l-1)!/(n+l)! as a running product of 2l+1 reciprocals
        let mut ratio = 1.0;
        for k in (n - l)..=(n + l) {
            ratio /= f64::from(k);
        }
        let norm = ((2.0 / nf).powi(3) * ratio / (2.0 * nf)).sqrt();
        Self { n, l, norm }
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    /// Exponential decay rate 1/n of the envelope.
    pub fn decay(&self) -> f64 {
        1.0 / f64::from(self.n)
    }

    /// Degree of the polynomial prefactor P in r.
    pub fn poly_degree(&self) -> i32 {
        self.n - 1
    }

    pub fn jet(&self, r: f64) -> RadialJet {
        let nf = f64::from(self.n);
        let k = self.n - self.l - 1;
        let alpha = f64::from(2 * self.l + 1);
        let rho = 2.0 * r / nf;
        let lag = associated_laguerre(k, alpha, rho);
        let dlag = -associated_laguerre(k - 1, alpha + 1.0, rho);
        let rho_lm1 = rho.powi(self.l - 1);
        let rho_l = rho.powi(self.l);
        let scale = self.norm * 2.0 / nf;
        RadialJet {
            poly: self.norm * rho_l * lag,
            dpoly: scale * (f64::from(self.l) * rho_lm1 * lag + rho_l * dlag),
            poly_over_r: scale * rho_lm1 * lag,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).poly * (-r * self.decay()).exp()
    }

    /// dR/dr
    pub fn derivative(&self, r: f64) -> f64 {
        let j = self.jet(r);
        (j.dpoly - j.poly * self.decay()) * (-r * self.decay()).exp()
    }

    /// d²R/dr², from the Laguerre second-derivative identity.
    pub fn second_derivative(&self, r: f64) -> f64 {
        let nf = f64::from(self.n);
        let l = f64::from(self.l);
        let k = self.n - self.l - 1;
        let alpha = f64::from(2 * self.l + 1);
        let rho = 2.0 * r / nf;
        let lag = associated_laguerre(k, alpha, rho);
        let d1 = -associated_laguerre(k - 1, alpha + 1.0, rho);
        let d2 = associated_laguerre(k - 2, alpha + 2.0, rho);
        // f(ρ) = ρ^l L(ρ) e^{-ρ/2}; R = N f, d/dr = (2/n) d/dρ
        let pl = rho.powi(self.l);
        let pl1 = if self.l >= 1 { l * rho.powi(self.l - 1) } else { 0.0 };
        let pl2 = if self.l >= 2 {
            l * (l - 1.0) * rho.powi(self.l - 2)
        } else {
            0.0
        };
        let g = pl * lag;
        let dg = pl1 * lag + pl * d1;
        let d2g = pl2 * lag + 2.0 * pl1 * d1 + pl * d2;
        let f2 = (d2g - dg + 0.25 * g) * (-rho / 2.0).exp();
        self.norm * (2.0 / nf).powi(2) * f2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_eq!(associated_laguerre(0, 3.0, x), 1.0);
        assert!((associated_laguerre(1, 3.0, x) - (4.0 - x)).abs() < 1e-15);
        let l2 = 0.5 * (x * x - 2.0 * 5.0 * x + 5.0 * 4.0);
        assert!((associated_laguerre(2, 3.0, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn ground_state_closed_form() {
        let r10 = RadialFunction::new(1, 0);
        assert!((r10.value(0.0) - 2.0).abs() < 1e-15);
        for &r in &[0.1f64, 1.0, 3.3, 10.0] {
            let closed = 2.0 * (-r).exp();
            assert!((r10.value(r) - closed).abs() < 1e-14 * closed.max(1e-300));
        }
    }

    #[test]
    fn closed_forms_n2() {
        let r20 = RadialFunction::new(2, 0);
        let r21 = RadialFunction::new(2, 1);
        for &r in &[0.3, 1.7, 6.0] {
            let c20 = (1.0 / 2f64.sqrt()) * (1.0 - r / 2.0) * (-r / 2.0).exp();
            let c21 = (1.0 / 24f64.sqrt()) * r * (-r / 2.0).exp();
            assert!((r20.value(r) - c20).abs() < 1e-14);
            assert!((r21.value(r) - c21).abs() < 1e-14);
        }
    }

    #[test]
    fn r30_has_two_sign_changes() {
        let f = RadialFunction::new(3, 0);
        let mut changes = 0;
        let mut prev = f.value(1e-6);
        for i in 1..=200_000 {
            let v = f.value(1e-6 + i as f64 * 1e-3);
            if v * prev < 0.0 {
                changes += 1;
            }
            prev = v;
        }
        assert_eq!(changes, 2);
    }

    #[test]
    fn radial_schrodinger_residual() {
        for n in 1..=8 {
            for l in 0..n {
                let f = RadialFunction::new(n, l);
                let e = -0.5 / f64::from(n * n);
                let lf = f64::from(l);
                for i in 0..=200 {
                    let r = 0.1 + (50.0 - 0.1) * f64::from(i) / 200.0;
                    let (r0, r1, r2) = (f.value(r), f.derivative(r), f.second_derivative(r));
                    let terms = [
                        -0.5 * r2,
                        -r1 / r,
                        (lf * (lf + 1.0) / (2.0 * r * r) - 1.0 / r) * r0,
                        -e * r0,
                    ];
                    let residual: f64 = terms.iter().sum();
                    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
                    assert!(
                        residual.abs() <= 1e-8 * scale.max(1e-300),
                        "n={n} l={l} r={r}: residual {residual} scale {scale}"
                    );
                }
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = RadialFunction::new(7, 3);
        for &r in &[0.5, 4.0, 17.0, 40.0] {
            let h = 1e-5;
            let fd = (f.value(r + h) - f.value(r - h)) / (2.0 * h);
            assert!((f.derivative(r) - fd).abs() < 1e-8 * f.derivative(r).abs().max(1e-6));
        }
    }

    #[test]
    fn no_overflow_at_cap() {
        for l in 0..30 {
            let f = RadialFunction::new(30, l);
            for &r in &[0.01, 1.0, 100.0, 1000.0] {
                let j = f.jet(r);
                assert!(j.poly.is_finite() && j.dpoly.is_finite());
            }
        }
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;

// Θ_{l,|m|}(u) with the seed reduced by `drop` powers of sinθ. Standard
// three-term recurrence for fully normalized associated Legendre functions,
// started from the sectoral value Θ_{mm} = (-1)^m √((2m+1)!!/(2·(2m)!!)) sin^m θ.
fn theta_recurrence(l: i32, m_abs: i32, u: f64, drop: i32) -> f64 {
    if m_abs > l {
        return 0.0;
    }
    let s = (1.0 - u * u).max(0.0).sqrt();
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=m_abs {
        let k = f64::from(k);
        pmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt();
    }
    pmm *= s.powi(m_abs - drop);
    if l == m_abs {
        return pmm;
    }
    let mf = f64::from(m_abs);
    let mut prev = pmm;
    let mut cur = (2.0 * mf + 3.0).sqrt() * u * pmm;
    for ll in (m_abs + 2)..=l {
        let lf = f64::from(ll);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let next = a * (u * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

fn sign_for_negative_m(m: i32) -> f64 {
    if m < 0 && m % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// Normalized polar factor Θ_{l,m}(cosθ), with ∫₋₁¹ Θ² du = 1 and the
/// Condon–Shortley phase, such that Y_{lm}(θ, φ) = Θ_{lm}(cosθ) e^{imφ}/√(2π).
pub fn theta_factor(l: i32, m: i32, u: f64) -> f64 {
    if m.abs() > l || l < 0 {
        return 0.0;
    }
    sign_for_negative_m(m) * theta_recurrence(l, m.abs(), u, 0)
}

/// m·Θ_{l,m}/sinθ, finite on the whole sphere (the seed drops one sine power).
/// Zero for m = 0.
pub fn theta_factor_m_over_sin(l: i32, m: i32, u: f64) -> f64 {
    if m == 0 || m.abs() > l {
        return 0.0;
    }
    f64::from(m) * sign_for_negative_m(m) * theta_recurrence(l, m.abs(), u, 1)
}

/// dΘ_{l,m}/dθ from the ladder relation
/// ∂θ Y_{lm} = ½[c₊ e^{-iφ} Y_{l,m+1} - c₋ e^{iφ} Y_{l,m-1}].
pub fn theta_factor_dtheta(l: i32, m: i32, u: f64) -> f64 {
    if m.abs() > l {
        return 0.0;
    }
    let (lf, mf) = (f64::from(l), f64::from(m));
    let c_plus = ((lf - mf) * (lf + mf + 1.0)).sqrt();
    let c_minus = ((lf + mf) * (lf - mf + 1.0)).sqrt();
    0.5 * (c_plus * theta_factor(l, m + 1, u) - c_minus * theta_factor(l, m - 1, u))
}

/// Y_{lm}(θ, φ), Condon–Shortley phase.
pub fn spherical_harmonic(l: i32, m: i32, theta: f64, phi: f64) -> Complex64 {
    let amp = theta_factor(l, m, theta.cos()) / (2.0 * PI).sqrt();
    Complex64::from_polar(1.0, f64::from(m) * phi) * amp
}

//! Special functions backing the sphere geometry and the vMF normalizer.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s.abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

const CF_MAX_ITER: usize = 1000;
const CF_TOL: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("a", a, "(0, inf)"));
    }
    if !(b > 0.0) {
        return Err(Error::domain("b", b, "(0, inf)"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "[0, 1]"));
    }
    Ok(beta_reg_split(a, b, x, 1.0 - x))
}

/// `I_x(a, b)` with the complement `y = 1 - x` supplied by the caller, so
/// that neither tail loses precision to cancellation.
pub(crate) fn beta_reg_split(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, y) / b
    }
}

/// Continued fraction for the incomplete beta function, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_TOL {
            break;
        }
    }
    h
}

/// Orders below this use the large-argument (Hankel) expansion in the
/// asymptotic regime; orders at or above it use the Debye expansion.
const DEBYE_MIN_ORDER: f64 = 5.0;

/// `log I_nu(kappa)`, the log of the modified Bessel function of the first kind.
///
/// Power series for `kappa <= 50 * max(1, sqrt(nu))`, asymptotic expansions
/// beyond that. Everything is carried in log space so large concentrations
/// do not overflow.
pub fn log_bessel_i(nu: f64, kappa: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::domain("nu", nu, "[0, inf)"));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain("kappa", kappa, "(0, inf)"));
    }
    if kappa == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let switch = 50.0 * nu.sqrt().max(1.0);
    Ok(if kappa <= switch {
        log_bessel_series(nu, kappa)
    } else if nu < DEBYE_MIN_ORDER {
        log_bessel_hankel(nu, kappa)
    } else {
        log_bessel_debye(nu, kappa)
    })
}

fn log_bessel_series(nu: f64, x: f64) -> f64 {
    const RESCALE: f64 = 1e250;
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut log_offset = 0.0_f64;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_offset += RESCALE.ln();
        }
        // terms are decreasing once k(k + nu) > q
        if term < sum * 1e-17 && k * (k + nu) > q {
            break;
        }
    }
    nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) + sum.ln() + log_offset
}

fn log_bessel_hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() {
            // asymptotic series has started to diverge
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

fn log_bessel_debye(nu: f64, x: f64) -> f64 {
    let root = nu.hypot(x); // nu * sqrt(1 + z^2)
    let p = nu / root;
    let p2 = p * p;
    let u1 = p * (3.0 - 5.0 * p2) / 24.0;
    let u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0;
    let u3 = p * p2 * (30375.0 - 369603.0 * p2 + 765765.0 * p2 * p2 - 425425.0 * p2 * p2 * p2)
        / 414720.0;
    let u4 = p2
        * p2
        * (4465125.0 - 94121676.0 * p2 + 349922430.0 * p2 * p2 - 446185740.0 * p2 * p2 * p2
            + 185910725.0 * p2 * p2 * p2 * p2)
        / 39813120.0;
    let inv = 1.0 / nu;
    let series = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * u4)));
    let exponent = root - nu * (nu / x).asinh();
    exponent - 0.5 * (2.0 * std::f64::consts::PI * root).ln() + series.ln()
}

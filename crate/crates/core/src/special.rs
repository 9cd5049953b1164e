//! Gamma-family special functions.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

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

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 500;

fn lanczos_ln_gamma<T: Real>(x: T) -> T {
    // valid for x >= 0.5
    let xm1 = x - T::one();
    let mut acc = lit::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (xm1 + lit(i as f64));
    }
    let tt = xm1 + lit::<T>(LANCZOS_G + 0.5);
    lit::<T>(0.5) * (T::PI() + T::PI()).ln() + (xm1 + lit(0.5)) * tt.ln() - tt + acc.ln()
}

fn small_factorial<T: Real>(x: T) -> Option<T> {
    if x >= T::one() && x <= lit(30.0) && x.fract() == T::zero() {
        let n = x.to_usize()?;
        let mut f = T::one();
        for k in 2..n {
            f = f * lit(k as f64);
        }
        Some(f)
    } else {
        None
    }
}

/// Natural log of |Γ(x)|.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if let Some(f) = small_factorial(x) {
        return f.ln();
    }
    if x < lit(0.5) {
        let s = (T::PI() * x).sin().abs();
        return (T::PI() / s).ln() - lanczos_ln_gamma(T::one() - x);
    }
    lanczos_ln_gamma(x)
}

/// Γ(x) for real x; poles return ±∞.
pub fn gamma<T: Real>(x: T) -> T {
    if let Some(f) = small_factorial(x) {
        return f;
    }
    if x <= T::zero() && x.fract() == T::zero() {
        return T::infinity();
    }
    if x < lit(0.5) {
        return T::PI() / ((T::PI() * x).sin() * gamma(T::one() - x));
    }
    lanczos_ln_gamma(x).exp()
}

/// Exponential integral E1(x) = Γ(0, x) for x > 0.
pub fn exp_integral_e1<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain("E1 requires x > 0"));
    }
    if x < T::one() {
        let mut term = T::one();
        let mut sum = T::zero();
        for k in 1..MAX_ITER {
            let kf = lit::<T>(k as f64);
            term = -term * x / kf;
            let add = -term / kf;
            sum = sum + add;
            if add.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        Ok(-lit::<T>(EULER_GAMMA) - x.ln() + sum)
    } else {
        Ok(upper_gamma_cf(T::zero(), x))
    }
}

// Lentz continued fraction; accurate for x >= 1 and any a.
fn upper_gamma_cf<T: Real>(a: T, x: T) -> T {
    (a * x.ln() - x).exp() * upper_gamma_cf_scaled(a, x)
}

/// Γ(a, x) e^x x^{−a}, evaluated by continued fraction; intended for x >= 1.
pub(crate) fn upper_gamma_cf_scaled<T: Real>(a: T, x: T) -> T {
    let tiny = lit::<T>(1e-300).max(T::min_positive_value());
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = lit::<T>(i as f64);
        let an = -fi * (fi - a);
        b = b + lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    h
}

// Γ(a) − γ(a,x) via the lower series; used for a >= 1, x < a + 1.
fn upper_gamma_lower_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut del = T::one() / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() <= sum.abs() * T::epsilon() {
            break;
        }
    }
    let lower = sum * (a * x.ln() - x).exp();
    gamma(a) - lower
}

// a in (0,1), small x: Γ(a,x) = [(Γ(1+a)−1) − expm1(a ln x)]/a + x^a Σ_{n≥1} (−1)^{n+1} x^n/(n!(a+n)).
fn upper_gamma_small_shape<T: Real>(a: T, x: T) -> T {
    let head = (ln_gamma(T::one() + a).exp_m1() - (a * x.ln()).exp_m1()) / a;
    let mut term = T::one();
    let mut sum = T::zero();
    for n in 1..MAX_ITER {
        let nf = lit::<T>(n as f64);
        term = -term * x / nf;
        let add = -term / (a + nf);
        sum = sum + add;
        if add.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    head + x.powf(a) * sum
}

fn upper_gamma_positive<T: Real>(a: T, x: T) -> T {
    if x >= T::one() && x >= a + T::one() {
        upper_gamma_cf(a, x)
    } else if a < T::one() {
        if x >= T::one() {
            upper_gamma_cf(a, x)
        } else {
            upper_gamma_small_shape(a, x)
        }
    } else {
        upper_gamma_lower_series(a, x)
    }
}

/// Upper incomplete gamma Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt for any real a.
///
/// For a ≤ 0 and x < 1 the value is reached from a base shape in (0, 1] (or from
/// E1 when a is an integer) with Γ(a, x) = (Γ(a+1, x) − x^a e^{−x}) / a.
pub fn upper_incomplete_gamma<T: Real>(a: T, x: T) -> Result<T> {
    if x.is_nan() || a.is_nan() {
        return Err(Error::domain("upper incomplete gamma: NaN argument"));
    }
    if x < T::zero() {
        return Err(Error::domain("upper incomplete gamma requires x >= 0"));
    }
    if x == T::zero() {
        return if a > T::zero() {
            Ok(gamma(a))
        } else {
            Err(Error::domain("upper incomplete gamma diverges at x = 0 for a <= 0"))
        };
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    if a > T::zero() {
        return Ok(upper_gamma_positive(a, x));
    }
    if x >= T::one() {
        return Ok(upper_gamma_cf(a, x));
    }
    let steps = (-a).ceil();
    let base = a + steps;
    let mut value = if base == T::zero() {
        exp_integral_e1(x)?
    } else {
        upper_gamma_positive(base, x)
    };
    let m = steps.to_usize().unwrap_or(0);
    let mut shape = base;
    for _ in 0..m {
        shape = shape - T::one();
        value = (value - (shape * x.ln() - x).exp()) / shape;
    }
    Ok(value)
}

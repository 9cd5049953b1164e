//! Adaptive Gauss–Kronrod (21-point) quadrature on finite and semi-infinite intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances and refinement budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn tight() -> Self {
        QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
        }
    }

    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadConfig {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_err_est: T,
    pub evaluations: usize,
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

fn gk21<T: Real, F>(f: &F, a: T, b: T) -> Result<Segment<T>>
where
    F: Fn(T) -> Result<T>,
{
    let half = lit::<T>(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center)?;
    let mut resk = fc * lit(WGK[10]);
    let mut resg = T::zero();
    let mut resabs = resk.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half_len * lit(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + lit::<T>(WGK[j]) * (f1 + f2);
        resabs = resabs + lit::<T>(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg = resg + lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let reskh = resk * half;
    let mut resasc = lit::<T>(WGK[10]) * (fc - reskh).abs();
    for j in 0..10 {
        resasc = resasc + lit::<T>(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let scale = half_len.abs();
    let value = resk * half_len;
    resabs = resabs * scale;
    resasc = resasc * scale;
    let mut err = ((resk - resg) * half_len).abs();
    if resasc != T::zero() && err != T::zero() {
        let ratio = lit::<T>(200.0) * err / resasc;
        err = resasc * T::one().min(ratio.powf(lit(1.5)));
    }
    let eps = T::epsilon();
    if resabs > T::min_positive_value() / (lit::<T>(50.0) * eps) {
        err = err.max(lit::<T>(50.0) * eps * resabs);
    }
    if !value.is_finite() {
        return Err(Error::Numerical {
            what: "quadrature integrand".into(),
            estimate: to_f64(value),
            abs_err: f64::INFINITY,
        });
    }
    Ok(Segment { a, b, value, err })
}

fn adaptive<T: Real, F>(f: &F, a: T, b: T, cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    F: Fn(T) -> Result<T>,
{
    let first = gk21(f, a, b)?;
    let mut evaluations = 21;
    let mut segs = vec![first];
    let abs_tol = lit::<T>(cfg.abs_tol);
    let rel_tol = lit::<T>(cfg.rel_tol);
    loop {
        let total: T = segs.iter().fold(T::zero(), |s, g| s + g.value);
        let err: T = segs.iter().fold(T::zero(), |s, g| s + g.err);
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                abs_err_est: err,
                evaluations,
            });
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -T::one()), |(bi, be), (i, g)| if g.err > be { (i, g.err) } else { (bi, be) });
        let worst = segs.swap_remove(idx);
        let mid = lit::<T>(0.5) * (worst.a + worst.b);
        let tiny = lit::<T>(100.0) * T::epsilon() * (worst.a.abs() + worst.b.abs()) + T::min_positive_value();
        if segs.len() + 2 > cfg.max_subdivisions || (worst.b - worst.a).abs() <= tiny {
            let total = total;
            return Err(Error::Numerical {
                what: "adaptive quadrature".into(),
                estimate: to_f64(total),
                abs_err: to_f64(err),
            });
        }
        let left = gk21(f, worst.a, mid)?;
        let right = gk21(f, mid, worst.b)?;
        evaluations += 42;
        segs.push(left);
        segs.push(right);
    }
}

/// Integrates a fallible integrand over `[a, b]`; `b` may be `+∞`.
///
/// A semi-infinite range is mapped onto `(0, 1]` through `z = a + (1 − s)/s`,
/// keeping the infinite end at `s = 0`.
pub fn try_integrate<T: Real, F>(f: F, a: T, b: T, cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    F: Fn(T) -> Result<T>,
{
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::domain("integration bounds must be finite except an upper +inf"));
    }
    if b == a {
        return Ok(QuadResult {
            value: T::zero(),
            abs_err_est: T::zero(),
            evaluations: 0,
        });
    }
    if b.is_infinite() {
        if b < T::zero() {
            return Err(Error::domain("lower-infinite ranges are not supported"));
        }
        let g = |s: T| -> Result<T> {
            let z = a + (T::one() - s) / s;
            let fz = f(z)?;
            if fz == T::zero() {
                Ok(T::zero())
            } else {
                Ok(fz / (s * s))
            }
        };
        return adaptive(&g, T::zero(), T::one(), cfg);
    }
    if b < a {
        let r = adaptive(&f, b, a, cfg)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    adaptive(&f, a, b, cfg)
}

/// Integrates `f` over `[a, b]`; `b` may be `+∞`.
pub fn integrate<T: Real, F>(f: F, a: T, b: T, cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    F: Fn(T) -> T,
{
    try_integrate(|x| Ok(f(x)), a, b, cfg)
}

/// Integrates piecewise over consecutive `breaks`; the last break may be `+∞`.
///
/// The absolute tolerance is shared evenly between the pieces.
pub fn try_integrate_pieces<T: Real, F>(f: F, breaks: &[T], cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    F: Fn(T) -> Result<T>,
{
    let pieces = breaks.len().saturating_sub(1).max(1);
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces as f64,
        ..*cfg
    };
    let mut acc = QuadResult {
        value: T::zero(),
        abs_err_est: T::zero(),
        evaluations: 0,
    };
    for pair in breaks.windows(2) {
        match try_integrate(&f, pair[0], pair[1], &piece_cfg) {
            Ok(r) => {
                acc.value = acc.value + r.value;
                acc.abs_err_est = acc.abs_err_est + r.abs_err_est;
                acc.evaluations += r.evaluations;
            }
            Err(Error::Numerical { what, estimate, abs_err }) => {
                return Err(Error::Numerical {
                    what,
                    estimate: to_f64(acc.value) + estimate,
                    abs_err: to_f64(acc.abs_err_est) + abs_err,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

/// Breakpoints `0, scale·2^{−8}, …, scale·2^k, …, upper` for integrands concentrated near `scale`.
pub fn geometric_breaks<T: Real>(scale: T, upper: T) -> Vec<T> {
    let mut breaks = vec![T::zero()];
    let mut b = scale * lit(1.0 / 256.0);
    while b < upper && breaks.len() < 64 {
        breaks.push(b);
        b = b + b;
    }
    breaks.push(upper);
    breaks
}

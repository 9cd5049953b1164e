//! Limiting joint Laplace transforms of (largest claims, (s+1)-th largest, smallest claims).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::MixingLaw;
use crate::quadrature::{geometric_breaks, integrate, try_integrate_pieces, QuadConfig};
use crate::scalar::{lit, Real};
use crate::special::{gamma, ln_gamma, upper_gamma_cf_scaled, upper_incomplete_gamma};
use crate::tail::TailModel;

const SERIES_ITER: usize = 200;

// (e^{−x} − 1 + x) / x², stable near 0.
fn centered_kernel<T: Real>(x: T) -> T {
    if x.abs() < lit(0.5) {
        let mut term = lit::<T>(0.5);
        let mut sum = term;
        for k in 3..40 {
            term = -term * x / lit(k as f64);
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        return sum;
    }
    ((-x).exp_m1() + x) / (x * x)
}

/// I_tail(c, α) = ∫_1^∞ e^{−cη} η^{−1−α} dη = c^α Γ(−α, c).
pub fn inner_tail_integral<T: Real>(c: T, alpha: T) -> Result<T> {
    if !(c >= T::zero()) || !(alpha > T::zero()) {
        return Err(Error::domain("inner tail integral needs c >= 0 and alpha > 0"));
    }
    if c == T::zero() {
        return Ok(T::one() / alpha);
    }
    if c.is_infinite() {
        return Ok(T::zero());
    }
    if c >= T::one() {
        return Ok((-c).exp() * upper_gamma_cf_scaled(-alpha, c));
    }
    Ok(c.powf(alpha) * upper_incomplete_gamma(-alpha, c)?)
}

/// I_head(c, α) = ∫_0^1 (1 − e^{−cη}) η^{−1−α} dη for α in (0, 1).
pub fn inner_head_integral<T: Real>(c: T, alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain("inner head integral needs alpha in (0, 1)"));
    }
    if !(c >= T::zero()) {
        return Err(Error::domain("inner head integral needs c >= 0"));
    }
    if c == T::zero() {
        return Ok(T::zero());
    }
    if c <= T::one() {
        let mut term = T::one();
        let mut sum = T::zero();
        for k in 1..SERIES_ITER {
            let kf = lit::<T>(k as f64);
            term = term * c / kf;
            let add = if k % 2 == 1 { term } else { -term } / (kf - alpha);
            sum = sum + add;
            if add.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        return Ok(sum);
    }
    Ok(c.powf(alpha) * gamma(T::one() - alpha) / alpha - T::one() / alpha + inner_tail_integral(c, alpha)?)
}

/// J(c, α) = ∫_0^1 (e^{−cη} − 1 + cη) η^{−1−α} dη for α in (1, 2).
pub fn inner_centered_integral<T: Real>(c: T, alpha: T) -> Result<T> {
    if !(alpha > T::one() && alpha < lit(2.0)) {
        return Err(Error::domain("inner centered integral needs alpha in (1, 2)"));
    }
    if !(c >= T::zero()) {
        return Err(Error::domain("inner centered integral needs c >= 0"));
    }
    if c == T::zero() {
        return Ok(T::zero());
    }
    if c <= lit(2.0) {
        let mut term = c;
        let mut sum = T::zero();
        for k in 2..SERIES_ITER {
            let kf = lit::<T>(k as f64);
            term = term * c / kf;
            let add = if k % 2 == 0 { term } else { -term } / (kf - alpha);
            sum = sum + add;
            if add.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        return Ok(sum);
    }
    Ok(c.powf(alpha) * gamma(-alpha) - inner_tail_integral(c, alpha)? + T::one() / alpha
        - c / (alpha - T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRange {
    Lt1,
    Gt1,
    Gt1Centered12,
    Gt2Centered,
}

/// How many top claims are split off as t grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SRule<T> {
    FixedS(usize),
    /// s = ⌊p(t) N(t)⌋ with p(t) → 0 and t p(t) → ∞.
    VanishingP,
    /// s = ⌊p N(t)⌋.
    FixedP(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime<T> {
    pub alpha_range: AlphaRange,
    pub s_rule: SRule<T>,
}

/// Normalizing sequence applied to one component of the triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// U(t)
    TailQuantileT,
    /// U(1/p(t))
    TailQuantileInvP,
    /// t p(t) U(1/p(t))
    TpTailQuantileInvP,
    /// t
    T,
    /// 1
    One,
    /// t^{1/2}
    SqrtT,
}

impl Normalizer {
    /// Numerical value at horizon `t`, with `p` the current proportion (ignored when unused).
    pub fn value<T: Real>(&self, model: &TailModel<T>, t: T, p: T) -> Result<T> {
        Ok(match self {
            Normalizer::TailQuantileT => model.tail_quantile(t)?,
            Normalizer::TailQuantileInvP => model.tail_quantile(T::one() / p)?,
            Normalizer::TpTailQuantileInvP => t * p * model.tail_quantile(T::one() / p)?,
            Normalizer::T => t,
            Normalizer::One => T::one(),
            Normalizer::SqrtT => t.sqrt(),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Normalizer::TailQuantileT => "U(t)",
            Normalizer::TailQuantileInvP => "U(1/p(t))",
            Normalizer::TpTailQuantileInvP => "t*p(t)*U(1/p(t))",
            Normalizer::T => "t",
            Normalizer::One => "1",
            Normalizer::SqrtT => "t^(1/2)",
        }
    }
}

/// Normalizations under which the finite-t triple converges to the regime's limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitTriple {
    pub lambda: Normalizer,
    pub xi: Normalizer,
    pub sigma: Normalizer,
    /// Smallest claims enter as Σ (X_j − μ).
    pub sigma_centered: bool,
}

/// Default vanishing proportion p(t) = t^{−1/2}.
pub fn default_vanishing_p<T: Real>(t: T) -> T {
    T::one() / t.sqrt()
}

impl<T: Real> Regime<T> {
    pub fn new(alpha_range: AlphaRange, s_rule: SRule<T>) -> Result<Self> {
        if let SRule::FixedP(p) = s_rule {
            if !(p > T::zero() && p < T::one()) {
                return Err(Error::domain("fixed proportion p must lie in (0, 1)"));
            }
        }
        let centered = matches!(alpha_range, AlphaRange::Gt1Centered12 | AlphaRange::Gt2Centered);
        if centered && !matches!(s_rule, SRule::FixedS(_)) {
            return Err(Error::Incompatible("centered regimes support a fixed s only".into()));
        }
        Ok(Regime { alpha_range, s_rule })
    }

    /// Builds a regime from its CLI name, e.g. `lt1-fixed-s`, `gt1-fixed-p`, `ctr2-fixed-s`.
    pub fn from_name(name: &str, s: usize, p: T) -> Result<Self> {
        let (range, rule) = name
            .split_once('-')
            .ok_or_else(|| Error::domain(format!("unknown regime '{name}'")))?;
        let alpha_range = match range {
            "lt1" => AlphaRange::Lt1,
            "gt1" => AlphaRange::Gt1,
            "ctr12" => AlphaRange::Gt1Centered12,
            "ctr2" => AlphaRange::Gt2Centered,
            _ => return Err(Error::domain(format!("unknown regime '{name}'"))),
        };
        let s_rule = match rule {
            "fixed-s" => SRule::FixedS(s),
            "vanishing" => SRule::VanishingP,
            "fixed-p" => SRule::FixedP(p),
            _ => return Err(Error::domain(format!("unknown regime '{name}'"))),
        };
        Regime::new(alpha_range, s_rule)
    }

    pub fn name(&self) -> String {
        let range = match self.alpha_range {
            AlphaRange::Lt1 => "lt1",
            AlphaRange::Gt1 => "gt1",
            AlphaRange::Gt1Centered12 => "ctr12",
            AlphaRange::Gt2Centered => "ctr2",
        };
        let rule = match self.s_rule {
            SRule::FixedS(_) => "fixed-s",
            SRule::VanishingP => "vanishing",
            SRule::FixedP(_) => "fixed-p",
        };
        format!("{range}-{rule}")
    }

    pub fn is_centered(&self) -> bool {
        matches!(self.alpha_range, AlphaRange::Gt1Centered12 | AlphaRange::Gt2Centered)
    }

    /// Checks the tail index against the regime's α-range.
    pub fn check_model(&self, model: &TailModel<T>) -> Result<()> {
        let a = model.alpha();
        let one = T::one();
        let two = lit::<T>(2.0);
        let ok = match self.alpha_range {
            AlphaRange::Lt1 => a < one,
            AlphaRange::Gt1 => a > one,
            AlphaRange::Gt1Centered12 => a > one && a < two,
            AlphaRange::Gt2Centered => a > two,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible(format!("alpha = {a} is outside the range of regime {}", self.name())))
        }
    }

    pub fn normalization_descriptor(&self) -> LimitTriple {
        use Normalizer::*;
        let (lambda, xi, sigma) = match (self.alpha_range, self.s_rule) {
            (AlphaRange::Lt1, SRule::FixedS(_)) => (TailQuantileT, TailQuantileT, TailQuantileT),
            (AlphaRange::Lt1, SRule::VanishingP) => (TailQuantileT, TailQuantileInvP, TpTailQuantileInvP),
            (AlphaRange::Lt1, SRule::FixedP(_)) => (TailQuantileT, One, T),
            (AlphaRange::Gt1, SRule::FixedS(_)) => (TailQuantileT, TailQuantileT, T),
            (AlphaRange::Gt1, SRule::VanishingP) => (TpTailQuantileInvP, TailQuantileInvP, T),
            (AlphaRange::Gt1, SRule::FixedP(_)) => (T, One, T),
            (AlphaRange::Gt1Centered12, _) => (TailQuantileT, TailQuantileT, TailQuantileT),
            (AlphaRange::Gt2Centered, _) => (TailQuantileT, TailQuantileT, SqrtT),
        };
        LimitTriple {
            lambda,
            xi,
            sigma,
            sigma_centered: self.is_centered(),
        }
    }
}

impl<T: Real> fmt::Display for Regime<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.s_rule {
            SRule::FixedS(s) => write!(f, "{} (s = {s})", self.name()),
            SRule::VanishingP => write!(f, "{}", self.name()),
            SRule::FixedP(p) => write!(f, "{} (p = {p})", self.name()),
        }
    }
}

impl FromStr for AlphaRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lt1" => Ok(AlphaRange::Lt1),
            "gt1" => Ok(AlphaRange::Gt1),
            "ctr12" => Ok(AlphaRange::Gt1Centered12),
            "ctr2" => Ok(AlphaRange::Gt2Centered),
            _ => Err(Error::domain(format!("unknown alpha range '{s}'"))),
        }
    }
}

/// Which closed form to use for the proportion-based regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// Forms that agree with simulation: the (s+1)-th largest settles at the
    /// (1−p)-quantile, the stable term is u^α Γ(1−α), and the linear terms use
    /// unconditioned partial means.
    #[default]
    Consistent,
    /// Alternative closed forms: x_p, u^α Γ(1−α)/(1−p) or u^α Γ(1−α)/α, and
    /// conditional means.
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtOptions {
    pub reading: Reading,
    pub quad: QuadConfig,
}

impl Default for LtOptions {
    fn default() -> Self {
        LtOptions {
            reading: Reading::Consistent,
            quad: QuadConfig::with_tol(1e-11, 1e-10),
        }
    }
}

fn check_args<T: Real>(u: T, v: T, w: T) -> Result<()> {
    if u >= T::zero() && v >= T::zero() && w >= T::zero() && u.is_finite() && v.is_finite() && w.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("transform arguments must be finite and nonnegative"))
    }
}

fn ln_factorial<T: Real>(s: usize) -> T {
    ln_gamma(lit::<T>(s as f64 + 1.0))
}

/// (1/s!) ∫_0^∞ (zα I_tail(u z^{−γ}))^s e^{−v z^{−γ}} q_{s+1}(arg(z)) dz.
fn fixed_s_integral<T: Real, A>(
    s: usize,
    alpha: T,
    mix: &MixingLaw<T>,
    u: T,
    v: T,
    arg: A,
    cfg: &QuadConfig,
) -> Result<T>
where
    A: Fn(T) -> Result<T>,
{
    let gam = T::one() / alpha;
    let log_norm = ln_factorial::<T>(s);
    let f = |z: T| -> Result<T> {
        if z <= T::zero() {
            return Ok(T::zero());
        }
        let zg = z.powf(-gam);
        let mut log_pre = -log_norm;
        if v > T::zero() {
            log_pre = log_pre - v * zg;
        }
        if s > 0 {
            let c = if u > T::zero() { u * zg } else { T::zero() };
            let top = z * alpha * inner_tail_integral(c, alpha)?;
            if top == T::zero() {
                return Ok(T::zero());
            }
            log_pre = log_pre + lit::<T>(s as f64) * top.ln();
        }
        if log_pre < lit(-745.0) {
            return Ok(T::zero());
        }
        Ok(log_pre.exp() * mix.q(s + 1, arg(z)?)?)
    };
    let scale = T::one() / mix.mean() * lit((s + 1) as f64);
    let breaks = geometric_breaks(scale, T::infinity());
    Ok(try_integrate_pieces(f, &breaks, cfg)?.value)
}

/// Lower bound of the q-argument over z, used to gate mixing laws with bounded exponential moments.
fn gate_argument<T: Real>(mix: &MixingLaw<T>, lowest: T) -> Result<()> {
    if lowest > mix.q_domain_lower() {
        Ok(())
    } else {
        Err(Error::Divergent(format!(
            "limit transform needs q at {lowest}, beyond the mixing law's exponential moment"
        )))
    }
}

/// Evaluates the limiting transform E[exp(−uΛ − vΞ − wΣ)] with default options.
pub fn lt_eval<T: Real>(regime: &Regime<T>, model: &TailModel<T>, mix: &MixingLaw<T>, u: T, v: T, w: T) -> Result<T> {
    lt_eval_with(regime, model, mix, u, v, w, &LtOptions::default())
}

pub fn lt_eval_with<T: Real>(
    regime: &Regime<T>,
    model: &TailModel<T>,
    mix: &MixingLaw<T>,
    u: T,
    v: T,
    w: T,
    opts: &LtOptions,
) -> Result<T> {
    check_args(u, v, w)?;
    regime.check_model(model)?;
    let alpha = model.alpha();
    let gam = model.gamma();
    let one = T::one();
    let alternate = opts.reading == Reading::Alternate;
    match (regime.alpha_range, regime.s_rule) {
        (AlphaRange::Lt1, SRule::FixedS(s)) => {
            let arg = |z: T| -> Result<T> {
                let c = if w > T::zero() { w * z.powf(-gam) } else { T::zero() };
                Ok(z * (one + alpha * inner_head_integral(c, alpha)?))
            };
            fixed_s_integral(s, alpha, mix, u, v, arg, &opts.quad)
        }
        (AlphaRange::Gt1, SRule::FixedS(s)) => {
            let mu = model.mean()?;
            fixed_s_integral(s, alpha, mix, u, v, |z| Ok(z + w * mu), &opts.quad)
        }
        (AlphaRange::Gt1Centered12, SRule::FixedS(s)) => {
            gate_argument(mix, w.powf(alpha) * gamma(one - alpha))?;
            let arg = |z: T| -> Result<T> {
                let c = if w > T::zero() { w * z.powf(-gam) } else { T::zero() };
                let j = inner_centered_integral(c, alpha)?;
                Ok(z * (one - alpha * j) - w * z.powf(one - gam) / (one - gam))
            };
            fixed_s_integral(s, alpha, mix, u, v, arg, &opts.quad)
        }
        (AlphaRange::Gt2Centered, SRule::FixedS(s)) => {
            let shift = lit::<T>(0.5) * w * w * model.variance()?;
            gate_argument(mix, -shift)?;
            fixed_s_integral(s, alpha, mix, u, v, |z| Ok(z - shift), &opts.quad)
        }
        (AlphaRange::Lt1, SRule::VanishingP) => {
            let stable = u.powf(alpha) * gamma(one - alpha);
            let u_term = if alternate { stable / alpha } else { stable };
            Ok((-v).exp() * mix.q(0, u_term + w / (gam - one))?)
        }
        (AlphaRange::Gt1, SRule::VanishingP) => Ok((-v).exp() * mix.q(0, u / (one - gam) + w * model.mean()?)?),
        (AlphaRange::Lt1, SRule::FixedP(p)) => {
            let stable = u.powf(alpha) * gamma(one - alpha);
            let fp = fixed_p_terms(model, p, alternate)?;
            let u_term = if alternate { stable / (one - p) } else { stable };
            Ok((-v * fp.xi).exp() * mix.q(0, u_term + w * fp.lower)?)
        }
        (AlphaRange::Gt1, SRule::FixedP(p)) => {
            let fp = fixed_p_terms(model, p, alternate)?;
            Ok((-v * fp.xi).exp() * mix.q(0, u * fp.upper + w * fp.lower)?)
        }
        _ => Err(Error::Incompatible(format!("no limit transform for regime {}", regime.name()))),
    }
}

/// Constants of the proportion-based limits: the level of Ξ and the linear coefficients of Λ and Σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPTerms<T> {
    pub xi: T,
    pub lower: T,
    pub upper: T,
}

pub fn fixed_p_terms<T: Real>(model: &TailModel<T>, p: T, alternate: bool) -> Result<FixedPTerms<T>> {
    if alternate {
        let xp = model.quantile(p)?;
        let tm = model.truncated_means(xp)?;
        Ok(FixedPTerms { xi: xp, lower: tm.lower, upper: tm.upper })
    } else {
        let x = model.quantile(T::one() - p)?;
        Ok(FixedPTerms {
            xi: x,
            lower: model.partial_mean_below(x)?,
            upper: model.partial_mean_above(x)?,
        })
    }
}

/// Independent evaluation of the fixed-s limits for Θ ≡ 1 from the integral forms,
/// with every inner integral done by quadrature.
pub fn lt_eval_theta_one_quadrature<T: Real>(regime: &Regime<T>, model: &TailModel<T>, u: T, v: T, w: T) -> Result<T> {
    check_args(u, v, w)?;
    regime.check_model(model)?;
    let s = match regime.s_rule {
        SRule::FixedS(s) => s,
        _ => return Err(Error::Unsupported("quadrature route covers fixed-s regimes only".into())),
    };
    let alpha = model.alpha();
    let gam = model.gamma();
    let one = T::one();
    let inner_cfg = QuadConfig::with_tol(1e-14, 1e-13);
    let tail_part = |z: T| -> Result<T> {
        let zg = z.powf(-gam);
        let r = integrate(|eta: T| (-u * zg * eta).exp() * eta.powf(-one - alpha), one, T::infinity(), &inner_cfg)?;
        Ok(z / gam * r.value)
    };
    let (prefactor, exponent): (T, Box<dyn Fn(T) -> Result<T> + '_>) = match regime.alpha_range {
        AlphaRange::Lt1 => (
            one,
            Box::new(move |z: T| {
                let c = w * z.powf(-gam);
                // η = r^m flattens the η^{−α} endpoint behaviour
                let m = one / (one - alpha);
                let r = integrate(
                    |r: T| {
                        let eta = r.powf(m);
                        if eta <= T::zero() {
                            return c * m;
                        }
                        -(-c * eta).exp_m1() / eta * m
                    },
                    T::zero(),
                    one,
                    &inner_cfg,
                )?;
                Ok(z * (one + r.value / gam))
            }),
        ),
        AlphaRange::Gt1 => ((-w * model.mean()?).exp(), Box::new(|z: T| Ok(z))),
        AlphaRange::Gt1Centered12 => (
            one,
            Box::new(move |z: T| {
                let c = w * z.powf(-gam);
                let m = one / (lit::<T>(2.0) - alpha);
                let r = integrate(
                    |r: T| {
                        -c * c * centered_kernel(c * r.powf(m)) * m
                    },
                    T::zero(),
                    one,
                    &inner_cfg,
                )?;
                Ok(z * (one + r.value / gam - z.powf(-gam) / (one - gam) * w))
            }),
        ),
        AlphaRange::Gt2Centered => ((lit::<T>(0.5) * w * w * model.variance()?).exp(), Box::new(|z: T| Ok(z))),
    };
    let log_norm = ln_factorial::<T>(s);
    let f = |z: T| -> Result<T> {
        if z <= T::zero() {
            return Ok(T::zero());
        }
        let top = if s > 0 { tail_part(z)?.powi(s as i32) } else { one };
        let ev = if v > T::zero() { (-v * z.powf(-gam)).exp() } else { one };
        Ok(top * ev * (-exponent(z)? - log_norm).exp())
    };
    let breaks = geometric_breaks(lit((s + 1) as f64), T::infinity());
    Ok(prefactor * try_integrate_pieces(f, &breaks, &QuadConfig::with_tol(1e-12, 1e-11))?.value)
}

/// Fit of the proportion-based Λ limit at α = 1/2, Θ ≡ 1 to a Lévy (inverse-gamma, shape 1/2) law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseGammaCheck {
    /// Scale β in E e^{−uΛ} = exp(−2√(βu)).
    pub scale: f64,
    /// max over the grid of |lt − exp(−2√(βu))|.
    pub max_deviation: f64,
}

pub fn inverse_gamma_half_check(p: f64, reading: Reading, u_grid: &[f64]) -> Result<InverseGammaCheck> {
    let model = TailModel::pareto(0.5)?;
    let regime = Regime::new(AlphaRange::Lt1, SRule::FixedP(p))?;
    let opts = LtOptions { reading, ..LtOptions::default() };
    let mix = MixingLaw::unit();
    let at_one = lt_eval_with(&regime, &model, &mix, 1.0, 0.0, 0.0, &opts)?;
    let scale = (at_one.ln() / 2.0).powi(2);
    let mut max_deviation: f64 = 0.0;
    for &u in u_grid {
        let lt = lt_eval_with(&regime, &model, &mix, u, 0.0, 0.0, &opts)?;
        max_deviation = max_deviation.max((lt - (-2.0 * (scale * u).sqrt()).exp()).abs());
    }
    Ok(InverseGammaCheck { scale, max_deviation })
}

//! Exact finite-horizon transforms and first moments for mixed Poisson claim counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::MixingLaw;
use crate::quadrature::{geometric_breaks, try_integrate, try_integrate_pieces, QuadConfig, QuadResult};
use crate::scalar::{lit, Real};
use crate::special::ln_gamma;
use crate::tail::{SlowlyVarying, TailModel};

/// Claim counts N(t), Poisson with mean Θt given Θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CountingSpec<T: Real> {
    pub mix: MixingLaw<T>,
    pub t: T,
}

impl<T: Real> CountingSpec<T> {
    pub fn new(mix: MixingLaw<T>, t: T) -> Result<Self> {
        if !(t > T::zero() && t.is_finite()) {
            return Err(Error::domain("horizon t must be positive and finite"));
        }
        Ok(CountingSpec { mix, t })
    }

    pub fn poisson(t: T) -> Result<Self> {
        Self::new(MixingLaw::unit(), t)
    }

    /// E N(t).
    pub fn mean_count(&self) -> T {
        self.t * self.mix.mean()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtQuery<T> {
    pub u: T,
    pub v: T,
    pub w: T,
    pub s: usize,
}

impl<T: Real> LtQuery<T> {
    pub fn new(u: T, v: T, w: T, s: usize) -> Result<Self> {
        for (name, x) in [("u", u), ("v", v), ("w", w)] {
            if !(x >= T::zero() && x.is_finite()) {
                return Err(Error::domain(format!("{name} must be finite and nonnegative")));
            }
        }
        Ok(LtQuery { u, v, w, s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtValue<T> {
    pub value: T,
    pub abs_err_est: T,
}

/// How the partial claim transforms E[e^{−uX}; X > y] are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMethod {
    /// Incomplete-gamma closed form for the constant family, quadrature otherwise.
    #[default]
    Auto,
    /// Quadrature against the density for every family.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub inner: InnerMethod,
    pub quad: QuadConfig,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            inner: InnerMethod::Auto,
            quad: QuadConfig::default(),
        }
    }
}

/// Q_t^{(r)}(z) = t^r q_r(t(1 − z)).
pub fn pgf_derivative<T: Real>(spec: &CountingSpec<T>, r: usize, z: T) -> Result<T> {
    if !(z >= T::zero() && z <= T::one()) {
        return Err(Error::domain("pgf argument must lie in [0, 1]"));
    }
    Ok(spec.t.powi(r as i32) * spec.mix.q(r, spec.t * (T::one() - z))?)
}

fn ln_poisson<T: Real>(lambda: T, n: usize) -> T {
    let nf = lit::<T>(n as f64);
    if lambda == T::zero() {
        return if n == 0 { T::zero() } else { T::neg_infinity() };
    }
    nf * lambda.ln() - lambda - ln_gamma(nf + T::one())
}

/// P(N(t) = n).
pub fn count_pmf<T: Real>(spec: &CountingSpec<T>, n: usize) -> T {
    let t = spec.t;
    match &spec.mix {
        MixingLaw::Degenerate { theta } => ln_poisson(*theta * t, n).exp(),
        MixingLaw::Gamma { shape, rate } => {
            let nf = lit::<T>(n as f64);
            let bt = *rate + t;
            (ln_gamma(*shape + nf) - ln_gamma(*shape) - ln_gamma(nf + T::one())
                + *shape * (*rate / bt).ln()
                + nf * (t / bt).ln())
            .exp()
        }
        MixingLaw::Discrete { atoms } => atoms
            .iter()
            .fold(T::zero(), |acc, &(v, p)| acc + p * ln_poisson(v * t, n).exp()),
    }
}

fn uses_closed_form<T: Real>(model: &TailModel<T>, method: InnerMethod) -> bool {
    method == InnerMethod::Auto && matches!(model.slowly_varying(), SlowlyVarying::Constant { .. })
}

fn inner_cfg() -> QuadConfig {
    QuadConfig::with_tol(1e-14, 1e-12)
}

/// 1 − E e^{−wX}.
fn claim_lt_complement<T: Real>(model: &TailModel<T>, w: T, method: InnerMethod) -> Result<T> {
    if w == T::zero() {
        return Ok(T::zero());
    }
    let alpha = model.alpha();
    let xm = model.x_min();
    let c = w * xm;
    if uses_closed_form(model, method) {
        return Ok(T::one() - alpha * crate::limit::inner_tail_integral(c, alpha)?);
    }
    // 1 − e^{−c} + c ∫_0^∞ e^{−c e^τ} F̄(x_min e^τ) e^τ dτ
    let f = |tau: T| -> Result<T> {
        let e = tau.exp();
        let arg = c * e;
        if arg > lit(745.0) {
            return Ok(T::zero());
        }
        Ok((-arg).exp() * model.survival(xm * e) * e)
    };
    let knee = (-c.ln()).max(T::zero());
    let breaks = [T::zero(), knee, knee + lit(4.0), T::infinity()];
    let body = try_integrate_pieces(f, &dedup(&breaks), &inner_cfg())?.value;
    Ok(-(-c).exp_m1() + c * body)
}

/// E[e^{−uX} | X > y] for y ≥ x_min.
fn conditional_tail_lt<T: Real>(model: &TailModel<T>, u: T, y: T, method: InnerMethod) -> Result<T> {
    if u == T::zero() {
        return Ok(T::one());
    }
    let alpha = model.alpha();
    if uses_closed_form(model, method) {
        return Ok(alpha * crate::limit::inner_tail_integral(u * y, alpha)?);
    }
    let sf = model.survival(y);
    if sf == T::zero() {
        return Ok(T::zero());
    }
    let f = |tau: T| -> Result<T> {
        let x = y * tau.exp();
        let arg = u * x;
        if arg > lit(745.0) || x.is_infinite() {
            return Ok(T::zero());
        }
        Ok((-arg).exp() * model.density(x) * x / sf)
    };
    let knee = (-(u * y).ln()).max(T::zero());
    let breaks = [T::zero(), knee, knee + lit(4.0), T::infinity()];
    Ok(try_integrate_pieces(f, &dedup(&breaks), &inner_cfg())?.value)
}

fn dedup<T: Real>(breaks: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(breaks.len());
    for &b in breaks {
        if out.last().is_none_or(|&l| b > l) {
            out.push(b);
        }
    }
    out
}

/// y = U(t/z), exact for the constant family.
fn level<T: Real>(model: &TailModel<T>, t: T, z: T) -> Result<T> {
    match model.slowly_varying() {
        SlowlyVarying::Constant { .. } => Ok(model.x_min() * (t / z).powf(model.gamma())),
        _ => model.tail_quantile(t / z),
    }
}

/// ∫_0^t f(z) dz with breaks around `scale`; the first piece is taken in ln z so
/// power-type behaviour at the origin is resolved.
fn outer_integral<T: Real, F>(f: F, t: T, scale: T, cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    F: Fn(T) -> Result<T>,
{
    let breaks = geometric_breaks(scale, t);
    let pieces = breaks.len() - 1;
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces as f64,
        ..*cfg
    };
    let b1 = breaks[1];
    let head = try_integrate(
        |tau: T| {
            let z = b1 * (-tau).exp();
            if z <= T::zero() {
                return Ok(T::zero());
            }
            Ok(f(z)? * z)
        },
        T::zero(),
        T::infinity(),
        &piece_cfg,
    )?;
    if pieces == 1 {
        return Ok(head);
    }
    let rest = try_integrate_pieces(&f, &breaks[1..], &QuadConfig { abs_tol: cfg.abs_tol - piece_cfg.abs_tol, ..*cfg })
        .map_err(|e| match e {
            Error::Numerical { what, estimate, abs_err } => Error::Numerical {
                what,
                estimate: estimate + crate::scalar::to_f64(head.value),
                abs_err: abs_err + crate::scalar::to_f64(head.abs_err_est),
            },
            other => other,
        })?;
    Ok(QuadResult {
        value: head.value + rest.value,
        abs_err_est: head.abs_err_est + rest.abs_err_est,
        evaluations: head.evaluations + rest.evaluations,
    })
}

fn ln_factorial<T: Real>(n: usize) -> T {
    ln_gamma(lit::<T>(n as f64 + 1.0))
}

/// Ω_s(u, v, w; t) = E exp(−uΛ_s(t) − vX*_{N(t)−s} − wΣ_s(t)) with default options.
pub fn exact_joint_lt<T: Real>(spec: &CountingSpec<T>, model: &TailModel<T>, q: &LtQuery<T>) -> Result<LtValue<T>> {
    exact_joint_lt_with(spec, model, q, &ExactOptions::default())
}

pub fn exact_joint_lt_with<T: Real>(
    spec: &CountingSpec<T>,
    model: &TailModel<T>,
    q: &LtQuery<T>,
    opts: &ExactOptions,
) -> Result<LtValue<T>> {
    let LtQuery { u, v, w, s } = LtQuery::new(q.u, q.v, q.w, q.s)?;
    let t = spec.t;
    let one = T::one();
    let phi_u = one - claim_lt_complement(model, u, opts.inner)?;
    let mut lead = T::zero();
    let mut phi_pow = one;
    for n in 0..=s {
        lead = lead + count_pmf(spec, n) * phi_pow;
        phi_pow = phi_pow * phi_u;
    }
    let shift = t * claim_lt_complement(model, w, opts.inner)?;
    let log_norm = ln_factorial::<T>(s);
    let sf = lit::<T>(s as f64);
    let f = |z: T| -> Result<T> {
        let y = level(model, t, z)?;
        let mut log_pre = -log_norm;
        if v > T::zero() {
            log_pre = log_pre - v * y;
        }
        if s > 0 {
            let top = z * conditional_tail_lt(model, u, y, opts.inner)?;
            if top <= T::zero() {
                return Ok(T::zero());
            }
            log_pre = log_pre + sf * top.ln();
        }
        if log_pre < lit(-745.0) {
            return Ok(T::zero());
        }
        let arg = shift + z * conditional_tail_lt(model, w, y, opts.inner)?;
        Ok(log_pre.exp() * spec.mix.q(s + 1, arg)?)
    };
    let scale = lit::<T>((s + 1) as f64) / spec.mix.mean();
    let r = outer_integral(f, t, scale, &opts.quad)?;
    Ok(LtValue {
        value: lead + r.value,
        abs_err_est: r.abs_err_est,
    })
}

/// E Λ_s(t), E X*_{N(t)−s}, E Σ_s(t) and E S(t); infinite entries are `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeans<T> {
    pub lambda: T,
    pub xi: T,
    pub sigma: T,
    pub total: T,
}

pub fn component_means<T: Real>(spec: &CountingSpec<T>, model: &TailModel<T>, s: usize) -> Result<ComponentMeans<T>> {
    component_means_with(spec, model, s, &QuadConfig::default())
}

pub fn component_means_with<T: Real>(
    spec: &CountingSpec<T>,
    model: &TailModel<T>,
    s: usize,
    cfg: &QuadConfig,
) -> Result<ComponentMeans<T>> {
    let t = spec.t;
    let mix = &spec.mix;
    let alpha = model.alpha();
    let mu = model.mean()?;
    let total = if mu.is_infinite() { T::infinity() } else { t * mix.mean() * mu };
    let scale = lit::<T>((s + 1) as f64) / mix.mean();
    let sf = lit::<T>(s as f64);

    let xi = if lit::<T>((s + 1) as f64) * alpha <= T::one() {
        T::infinity()
    } else {
        let log_norm = ln_factorial::<T>(s);
        let f = |z: T| -> Result<T> {
            let pre = (sf * z.ln() - log_norm).exp();
            let y = level(model, t, z)?;
            if pre == T::zero() || y.is_infinite() {
                return Ok(T::zero());
            }
            Ok(y * pre * mix.q(s + 1, z)?)
        };
        outer_integral(f, t, scale, cfg)?.value
    };

    // Σ_s(t) contains the (s+2)-th largest claim
    let sigma = if lit::<T>((s + 2) as f64) * alpha <= T::one() {
        T::infinity()
    } else {
        let log_norm = ln_factorial::<T>(s);
        let f = |z: T| -> Result<T> {
            let pre = (sf * z.ln() - log_norm).exp();
            let y = level(model, t, z)?;
            if pre == T::zero() || y.is_infinite() {
                return Ok(T::zero());
            }
            let below = t * model.partial_mean_below(y)?;
            Ok(below * pre * mix.q(s + 2, z)?)
        };
        outer_integral(f, t, scale, cfg)?.value
    };

    let lambda = if s == 0 {
        T::zero()
    } else if mu.is_infinite() {
        T::infinity()
    } else {
        let mut lead = T::zero();
        for n in 1..=s {
            lead = lead + lit::<T>(n as f64) * count_pmf(spec, n) * mu;
        }
        let log_norm = ln_factorial::<T>(s - 1);
        let f = |z: T| -> Result<T> {
            let pre = ((sf - T::one()) * z.ln() - log_norm).exp();
            let y = level(model, t, z)?;
            if pre == T::zero() || y.is_infinite() {
                return Ok(T::zero());
            }
            Ok(t * model.partial_mean_above(y)? * pre * mix.q(s + 1, z)?)
        };
        lead + outer_integral(f, t, scale, cfg)?.value
    };
    Ok(ComponentMeans { lambda, xi, sigma, total })
}

/// E e^{−uS(t)} = Q_t(E e^{−uX}), the u = v = w collapse of Ω.
pub fn total_claims_lt<T: Real>(spec: &CountingSpec<T>, model: &TailModel<T>, u: T) -> Result<T> {
    if !(u >= T::zero()) {
        return Err(Error::domain("u must be nonnegative"));
    }
    spec.mix.q(0, spec.t * claim_lt_complement(model, u, InnerMethod::Auto)?)
}

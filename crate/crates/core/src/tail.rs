//! Claim-size laws with regularly varying tails.
//!
//! The survival function is `F̄(x) = (x/x_min)^{−α} L(x)` with `L ≡ 1` or
//! `L(x) = (1 + ln(x/x_min))^ρ`, so that `F̄(x) = x^{−α} ℓ(x)` with
//! `ℓ = c·L` and `c = x_min^α`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::scalar::{lit, Real};

/// Slowly varying factor ℓ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying<T> {
    Constant { c: T },
    LogPower { c: T, rho: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(try_from = "RawTail<T>", into = "RawTail<T>")]
pub struct TailModel<T: Real> {
    alpha: T,
    x_min: T,
    sv: SlowlyVarying<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SvKind {
    Constant,
    LogPower,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawSv<T> {
    kind: SvKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawTail<T> {
    alpha: T,
    #[serde(default = "one")]
    x_min: T,
    #[serde(default)]
    sv: Option<RawSv<T>>,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> TryFrom<RawTail<T>> for TailModel<T> {
    type Error = Error;

    fn try_from(raw: RawTail<T>) -> Result<Self> {
        let c_default = raw.x_min.powf(raw.alpha);
        let sv = match raw.sv {
            None => SlowlyVarying::Constant { c: c_default },
            Some(RawSv { kind: SvKind::Constant, c, .. }) => SlowlyVarying::Constant {
                c: c.unwrap_or(c_default),
            },
            Some(RawSv { kind: SvKind::LogPower, c, rho }) => SlowlyVarying::LogPower {
                c: c.unwrap_or(c_default),
                rho: rho.ok_or_else(|| Error::domain("log_power family needs rho"))?,
            },
        };
        TailModel::new(raw.alpha, raw.x_min, sv)
    }
}

impl<T: Real> From<TailModel<T>> for RawTail<T> {
    fn from(m: TailModel<T>) -> Self {
        let sv = match m.sv {
            SlowlyVarying::Constant { c } => RawSv { kind: SvKind::Constant, c: Some(c), rho: None },
            SlowlyVarying::LogPower { c, rho } => RawSv { kind: SvKind::LogPower, c: Some(c), rho: Some(rho) },
        };
        RawTail { alpha: m.alpha, x_min: m.x_min, sv: Some(sv) }
    }
}

/// Conditional means below and above a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMeans<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Real> TailModel<T> {
    /// Validates and builds a model. `c` must equal `x_min^α` (relative 1e−9)
    /// because the survival function starts at 1 on `x_min`.
    pub fn new(alpha: T, x_min: T, sv: SlowlyVarying<T>) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::domain("alpha must be positive and finite"));
        }
        if !(x_min > T::zero()) || !x_min.is_finite() {
            return Err(Error::domain("x_min must be positive and finite"));
        }
        let c = match sv {
            SlowlyVarying::Constant { c } => c,
            SlowlyVarying::LogPower { c, rho } => {
                if !rho.is_finite() || rho > alpha {
                    return Err(Error::domain("log_power rho must satisfy rho <= alpha"));
                }
                c
            }
        };
        if !(c > T::zero()) {
            return Err(Error::domain("c must be positive"));
        }
        let expected = x_min.powf(alpha);
        if ((c - expected) / expected).abs() > lit(1e-9) {
            return Err(Error::domain(format!(
                "c = {c} inconsistent with x_min^alpha = {expected}"
            )));
        }
        Ok(TailModel { alpha, x_min, sv })
    }

    /// Pure Pareto on `[1, ∞)`.
    pub fn pareto(alpha: T) -> Result<Self> {
        Self::new(alpha, T::one(), SlowlyVarying::Constant { c: T::one() })
    }

    /// Pareto with left endpoint `x_min`.
    pub fn pareto_with_min(alpha: T, x_min: T) -> Result<Self> {
        Self::new(alpha, x_min, SlowlyVarying::Constant { c: x_min.powf(alpha) })
    }

    pub fn log_power(alpha: T, x_min: T, rho: T) -> Result<Self> {
        Self::new(alpha, x_min, SlowlyVarying::LogPower { c: x_min.powf(alpha), rho })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn gamma(&self) -> T {
        T::one() / self.alpha
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn slowly_varying(&self) -> SlowlyVarying<T> {
        self.sv
    }

    /// Exponent of the log factor, 0 for the constant family.
    pub fn rho(&self) -> T {
        match self.sv {
            SlowlyVarying::Constant { .. } => T::zero(),
            SlowlyVarying::LogPower { rho, .. } => rho,
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self.sv, SlowlyVarying::Constant { .. })
    }

    // ln F̄ at r = ln(x/x_min) >= 0
    fn log_survival_r(&self, r: T) -> T {
        let base = -self.alpha * r;
        if self.is_constant() {
            base
        } else {
            base + self.rho() * r.ln_1p()
        }
    }

    /// F̄(x); equals 1 on `x <= x_min`.
    pub fn survival(&self, x: T) -> T {
        if x <= self.x_min {
            return T::one();
        }
        if x.is_infinite() {
            return T::zero();
        }
        self.log_survival_r((x / self.x_min).ln()).exp()
    }

    pub fn cdf(&self, x: T) -> T {
        if x <= self.x_min {
            return T::zero();
        }
        if x.is_infinite() {
            return T::one();
        }
        -self.log_survival_r((x / self.x_min).ln()).exp_m1()
    }

    /// ℓ(x) = F̄(x) x^α.
    pub fn ell(&self, x: T) -> T {
        let x = x.max(self.x_min);
        match self.sv {
            SlowlyVarying::Constant { c } => c,
            SlowlyVarying::LogPower { c, rho } => c * (rho * (x / self.x_min).ln().ln_1p()).exp(),
        }
    }

    pub fn density(&self, x: T) -> T {
        if x < self.x_min || x.is_infinite() {
            return T::zero();
        }
        let r = (x / self.x_min).ln();
        let hazard = self.alpha - self.rho() / (T::one() + r);
        self.survival(x) * hazard / x
    }

    /// U(y) = F^←(1 − 1/y) for y ≥ 1.
    pub fn tail_quantile(&self, y: T) -> Result<T> {
        if !(y >= T::one()) {
            return Err(Error::domain("tail quantile requires y >= 1"));
        }
        if y.is_infinite() {
            return Ok(T::infinity());
        }
        Ok(self.x_min * self.log_tail_r(y.ln()).exp())
    }

    /// Solves ln F̄ = −ln y for r = ln(x/x_min).
    pub(crate) fn log_tail_r(&self, ln_y: T) -> T {
        if ln_y <= T::zero() {
            return T::zero();
        }
        if self.is_constant() {
            return ln_y / self.alpha;
        }
        let rho = self.rho();
        let h = |r: T| self.alpha * r - rho * r.ln_1p() - ln_y;
        let dh = |r: T| self.alpha - rho / (T::one() + r);
        let guess = ln_y / self.alpha;
        let (mut lo, mut hi) = if rho > T::zero() {
            let mut hi = guess + T::one();
            while h(hi) < T::zero() {
                hi = hi + hi;
            }
            (guess, hi)
        } else {
            (T::zero(), guess)
        };
        let mut r = lit::<T>(0.5) * (lo + hi);
        for _ in 0..200 {
            let hr = h(r);
            if hr == T::zero() {
                return r;
            }
            if hr < T::zero() {
                lo = r;
            } else {
                hi = r;
            }
            let d = dh(r);
            let mut next = if d > T::zero() { r - hr / d } else { r };
            if !(next > lo && next < hi) {
                next = lit::<T>(0.5) * (lo + hi);
            }
            if (next - r).abs() <= lit::<T>(4.0) * T::epsilon() * r.abs().max(T::one()) {
                return next;
            }
            r = next;
        }
        r
    }

    /// x_p with F(x_p) = p; shares the tail-quantile path through y = 1/(1−p).
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p < T::one()) {
            return Err(Error::domain("quantile requires 0 <= p < 1"));
        }
        self.tail_quantile(T::one() / (T::one() - p))
    }

    fn quad_cfg() -> QuadConfig {
        QuadConfig::with_tol(1e-12, 1e-12)
    }

    // x_min ∫_{r0}^{r1} e^{(k−α) r} L(r) dr, the integral of y^{k−1} F̄(y) dy scaled by x_min^{−(k−1)}
    fn weighted_survival_integral(&self, k: T, r0: T, r1: T) -> Result<T> {
        let a = k - self.alpha;
        if self.is_constant() {
            if r1.is_infinite() {
                return if a < T::zero() { Ok(-(a * r0).exp() / a) } else { Ok(T::infinity()) };
            }
            let d = r1 - r0;
            let span = if a == T::zero() { d } else { (a * d).exp_m1() / a };
            return Ok((a * r0).exp() * span);
        }
        if r1.is_infinite() && a >= T::zero() {
            return Ok(T::infinity());
        }
        let rho = self.rho();
        let f = |r: T| (a * r + rho * r.ln_1p()).exp();
        Ok(integrate(f, r0, r1, &Self::quad_cfg())?.value)
    }

    /// E[X 1{X ≤ x}] (unconditioned partial mean).
    pub fn partial_mean_below(&self, x: T) -> Result<T> {
        if x <= self.x_min {
            return Ok(T::zero());
        }
        if x.is_infinite() {
            return self.mean();
        }
        let r = (x / self.x_min).ln();
        let body = self.weighted_survival_integral(T::one(), T::zero(), r)?;
        Ok(self.x_min * (T::one() - (r + self.log_survival_r(r)).exp() + body))
    }

    /// E[X 1{X > x}], `+∞` when α ≤ 1.
    pub fn partial_mean_above(&self, x: T) -> Result<T> {
        if self.alpha <= T::one() {
            return Ok(T::infinity());
        }
        let x = x.max(self.x_min);
        if x.is_infinite() {
            return Ok(T::zero());
        }
        let r = (x / self.x_min).ln();
        let body = self.weighted_survival_integral(T::one(), r, T::infinity())?;
        Ok(self.x_min * ((r + self.log_survival_r(r)).exp() + body))
    }

    /// Conditional means E[X | X ≤ x] and E[X | X > x].
    pub fn truncated_means(&self, x: T) -> Result<TruncatedMeans<T>> {
        if !(x >= self.x_min) {
            return Err(Error::domain("truncated means require x >= x_min"));
        }
        let lower = if x == self.x_min {
            self.x_min
        } else {
            self.partial_mean_below(x)? / self.cdf(x)
        };
        let upper = if self.alpha <= T::one() {
            T::infinity()
        } else {
            let sf = self.survival(x);
            if sf == T::zero() {
                x
            } else {
                self.partial_mean_above(x)? / sf
            }
        };
        Ok(TruncatedMeans { lower, upper })
    }

    /// μ = E X, `+∞` when α ≤ 1.
    pub fn mean(&self) -> Result<T> {
        if self.alpha <= T::one() {
            return Ok(T::infinity());
        }
        Ok(self.x_min * (T::one() + self.weighted_survival_integral(T::one(), T::zero(), T::infinity())?))
    }

    /// σ² = Var X, `+∞` when α ≤ 2.
    pub fn variance(&self) -> Result<T> {
        if self.alpha <= lit(2.0) {
            return Ok(T::infinity());
        }
        let two = lit::<T>(2.0);
        let second = self.x_min * self.x_min
            * (T::one() + two * self.weighted_survival_integral(two, T::zero(), T::infinity())?);
        let mu = self.mean()?;
        Ok(second - mu * mu)
    }

    /// Inverse-transform draw F^{−1}(V) with V uniform on [0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let v: f64 = rng.random();
        self.from_uniform(lit(v))
    }

    /// F^{−1}(v) for v in [0, 1).
    pub fn from_uniform(&self, v: T) -> T {
        let ln_y = -(-v).ln_1p();
        self.x_min * self.log_tail_r(ln_y).exp()
    }
}

//! Laws of the mixing intensity Θ and the functionals q_r(w) = E[e^{−wΘ} Θ^r].

use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::scalar::{lit, to_f64, Real};
use crate::special::{gamma, ln_gamma};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(try_from = "RawMixing<T>", into = "RawMixing<T>")]
pub enum MixingLaw<T: Real> {
    Degenerate { theta: T },
    Gamma { shape: T, rate: T },
    Discrete { atoms: Vec<(T, T)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Real"))]
enum RawMixing<T> {
    Degenerate { theta: T },
    Gamma { shape: T, rate: T },
    Discrete { atoms: Vec<(T, T)> },
}

impl<T: Real> TryFrom<RawMixing<T>> for MixingLaw<T> {
    type Error = Error;

    fn try_from(raw: RawMixing<T>) -> Result<Self> {
        match raw {
            RawMixing::Degenerate { theta } => MixingLaw::degenerate(theta),
            RawMixing::Gamma { shape, rate } => MixingLaw::gamma(shape, rate),
            RawMixing::Discrete { atoms } => MixingLaw::discrete(atoms),
        }
    }
}

impl<T: Real> From<MixingLaw<T>> for RawMixing<T> {
    fn from(m: MixingLaw<T>) -> Self {
        match m {
            MixingLaw::Degenerate { theta } => RawMixing::Degenerate { theta },
            MixingLaw::Gamma { shape, rate } => RawMixing::Gamma { shape, rate },
            MixingLaw::Discrete { atoms } => RawMixing::Discrete { atoms },
        }
    }
}

impl<T: Real> MixingLaw<T> {
    pub fn degenerate(theta: T) -> Result<Self> {
        if !(theta > T::zero()) || !theta.is_finite() {
            return Err(Error::domain("degenerate theta must be positive"));
        }
        Ok(MixingLaw::Degenerate { theta })
    }

    pub fn gamma(shape: T, rate: T) -> Result<Self> {
        if !(shape > T::zero() && rate > T::zero()) || !shape.is_finite() || !rate.is_finite() {
            return Err(Error::domain("gamma shape and rate must be positive"));
        }
        Ok(MixingLaw::Gamma { shape, rate })
    }

    pub fn discrete(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("discrete law needs at least one atom"));
        }
        let mut total = T::zero();
        for &(v, p) in &atoms {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain("discrete atom values must be positive"));
            }
            if !(p >= T::zero()) {
                return Err(Error::domain("discrete probabilities must be nonnegative"));
            }
            total = total + p;
        }
        let tol = lit::<T>(1e-12).max(lit::<T>(8.0) * T::epsilon());
        if (total - T::one()).abs() > tol {
            return Err(Error::domain(format!("discrete probabilities sum to {total}, not 1")));
        }
        Ok(MixingLaw::Discrete { atoms })
    }

    /// Θ ≡ 1.
    pub fn unit() -> Self {
        MixingLaw::Degenerate { theta: T::one() }
    }

    /// q_r(w) = E[e^{−wΘ} Θ^r]. Negative w is accepted for every kind whose
    /// exponential moment exists there; for the gamma law that means w > −rate.
    pub fn q(&self, r: usize, w: T) -> Result<T> {
        if w.is_nan() {
            return Err(Error::domain("q: NaN argument"));
        }
        let rf = lit::<T>(r as f64);
        match self {
            MixingLaw::Degenerate { theta } => Ok(theta.powi(r as i32) * (-w * *theta).exp()),
            MixingLaw::Gamma { shape, rate } => {
                let bw = *rate + w;
                if !(bw > T::zero()) {
                    return Err(Error::divergent(format!(
                        "q_{r}({w}) is infinite for the gamma mixing law (needs w > -{rate})"
                    )));
                }
                let log = *shape * rate.ln() + ln_gamma(*shape + rf) - ln_gamma(*shape) - (*shape + rf) * bw.ln();
                Ok(log.exp())
            }
            MixingLaw::Discrete { atoms } => Ok(atoms
                .iter()
                .fold(T::zero(), |acc, &(v, p)| acc + p * v.powi(r as i32) * (-w * v).exp())),
        }
    }

    /// Smallest argument at which q is finite (exclusive), `−∞` when unbounded.
    pub fn q_domain_lower(&self) -> T {
        match self {
            MixingLaw::Gamma { rate, .. } => -*rate,
            _ => T::neg_infinity(),
        }
    }

    /// E[Θ^c], `+∞` when it diverges.
    pub fn theta_moment(&self, c: T) -> T {
        match self {
            MixingLaw::Degenerate { theta } => theta.powf(c),
            MixingLaw::Gamma { shape, rate } => {
                if c <= -*shape {
                    T::infinity()
                } else {
                    (ln_gamma(*shape + c) - ln_gamma(*shape) - c * rate.ln()).exp()
                }
            }
            MixingLaw::Discrete { atoms } => atoms.iter().fold(T::zero(), |acc, &(v, p)| acc + p * v.powf(c)),
        }
    }

    pub fn mean(&self) -> T {
        self.theta_moment(T::one())
    }

    /// Both sides of ∫_0^∞ w^{β−1} q_r(w) dw = Γ(β) E[Θ^{r−β}], the left by quadrature.
    pub fn verify_q_integral_identity(&self, r: usize, beta: T) -> Result<(T, T)> {
        if !(beta > T::zero()) {
            return Err(Error::domain("beta must be positive"));
        }
        let rhs_moment = self.theta_moment(lit::<T>(r as f64) - beta);
        if rhs_moment.is_infinite() {
            return Ok((T::infinity(), T::infinity()));
        }
        let rhs = gamma(beta) * rhs_moment;
        let cfg = QuadConfig::with_tol(1e-13, 1e-11);
        let f = |w: T| {
            let q = self.q(r, w).unwrap_or(T::zero());
            if q == T::zero() {
                T::zero()
            } else {
                w.powf(beta - T::one()) * q
            }
        };
        let split = T::one() / self.mean();
        let head = integrate(f, T::zero(), split, &cfg)?.value;
        let tail = integrate(f, split, T::infinity(), &cfg)?.value;
        Ok((head + tail, rhs))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            MixingLaw::Degenerate { theta } => *theta,
            MixingLaw::Gamma { shape, rate } => {
                let d = GammaDist::new(to_f64(*shape), 1.0 / to_f64(*rate)).expect("validated gamma parameters");
                lit(d.sample(rng))
            }
            MixingLaw::Discrete { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += to_f64(p);
                    if u < acc {
                        return v;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, MixingLaw::Degenerate { .. })
    }
}

impl<T: Real> FromStr for MixingLaw<T> {
    type Err = Error;

    /// Accepts JSON or the short forms `degenerate:θ`, `gamma:a:b`, `discrete:v@p,v@p`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::domain(format!("mixing law JSON: {e}")));
        }
        let num = |x: &str| -> Result<T> {
            x.trim()
                .parse::<f64>()
                .map(lit)
                .map_err(|_| Error::domain(format!("bad number '{x}' in mixing law")))
        };
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().unwrap_or_default();
        let rest = parts.next().unwrap_or_default();
        match kind {
            "degenerate" => MixingLaw::degenerate(num(rest)?),
            "gamma" => {
                let (a, b) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::domain("gamma mixing law is gamma:shape:rate"))?;
                MixingLaw::gamma(num(a)?, num(b)?)
            }
            "discrete" => {
                let atoms = rest
                    .split(',')
                    .map(|atom| {
                        let (v, p) = atom
                            .split_once('@')
                            .ok_or_else(|| Error::domain("discrete atoms are value@prob"))?;
                        Ok((num(v)?, num(p)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MixingLaw::discrete(atoms)
            }
            _ => Err(Error::domain(format!("unknown mixing law '{s}'"))),
        }
    }
}

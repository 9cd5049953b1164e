//! Closed-form moments of the limiting ratios.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixing::MixingLaw;
use crate::quadrature::{geometric_breaks, try_integrate_pieces, QuadConfig};
use crate::scalar::{lit, Exact, Real};
use crate::special::{gamma as gamma_fn, ln_gamma};
use crate::tail::TailModel;

/// Largest i accepted by the partition enumeration.
pub const MAX_PARTITION_ORDER: usize = 20;

type Multiplicities = Vec<usize>;

fn partition_cache() -> &'static RwLock<HashMap<(usize, usize), Arc<Vec<Multiplicities>>>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<Vec<Multiplicities>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn enumerate(i: usize, j: usize) -> Vec<Multiplicities> {
    let width = i - j + 1;
    let mut out = Vec::new();
    let mut m = vec![0usize; width];
    // parts in nonincreasing order, largest part ≤ width
    fn rec(remaining: usize, parts_left: usize, max_part: usize, m: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts_left == 0 {
            if remaining == 0 {
                out.push(m.clone());
            }
            return;
        }
        if remaining < parts_left {
            return;
        }
        let hi = max_part.min(remaining - (parts_left - 1));
        for l in (1..=hi).rev() {
            m[l - 1] += 1;
            rec(remaining - l, parts_left - 1, l, m, out);
            m[l - 1] -= 1;
        }
    }
    rec(i, j, width, &mut m, &mut out);
    out
}

/// Multiplicity vectors (m_1, …, m_{i−j+1}) with Σ m_l = j and Σ l m_l = i.
pub fn partitions(i: usize, j: usize) -> Result<Arc<Vec<Multiplicities>>> {
    if j == 0 || j > i {
        return Err(Error::domain(format!("need 1 <= j <= i, got i={i}, j={j}")));
    }
    if i > MAX_PARTITION_ORDER {
        return Err(Error::domain(format!("partition order {i} exceeds {MAX_PARTITION_ORDER}")));
    }
    if let Some(p) = partition_cache().read().unwrap_or_else(|e| e.into_inner()).get(&(i, j)) {
        return Ok(Arc::clone(p));
    }
    let fresh = Arc::new(enumerate(i, j));
    let mut w = partition_cache().write().unwrap_or_else(|e| e.into_inner());
    Ok(Arc::clone(w.entry((i, j)).or_insert(fresh)))
}

fn from_n<T: Exact>(n: usize) -> T {
    T::from_usize(n).expect("integer conversion")
}

fn factorial<T: Exact>(n: usize) -> T {
    (2..=n).fold(T::one(), |acc, k| acc * from_n::<T>(k))
}

fn check_gamma<T: Exact>(gamma: &T) -> Result<()> {
    if *gamma > T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("gamma must exceed 1, got {gamma:?}")))
    }
}

/// C_{i,j}(γ) = Σ i!/(m_1!⋯) Π_l (1/(l!(lγ − 1)))^{m_l}.
pub fn c_coeff<T: Exact>(i: usize, j: usize, gamma: &T) -> Result<T> {
    check_gamma(gamma)?;
    let parts = partitions(i, j)?;
    let i_fact: T = factorial(i);
    let mut total = T::zero();
    for m in parts.iter() {
        let mut term = i_fact.clone();
        for (idx, &ml) in m.iter().enumerate() {
            if ml == 0 {
                continue;
            }
            let l = idx + 1;
            let base = factorial::<T>(l) * (from_n::<T>(l) * gamma.clone() - T::one());
            for _ in 0..ml {
                term = term / base.clone();
            }
            term = term / factorial::<T>(ml);
        }
        total = total + term;
    }
    Ok(total)
}

/// E R_(s)^k = 1 + Σ_i C(k,i) Σ_j (s+j)!/s! C_{i,j}(γ).
pub fn ratio_moment<T: Exact>(s: usize, k: usize, gamma: &T) -> Result<T> {
    check_gamma(gamma)?;
    if k == 0 {
        return Ok(T::one());
    }
    let mut total = T::one();
    let mut binom = T::one();
    for i in 1..=k {
        binom = binom * from_n::<T>(k + 1 - i) / from_n::<T>(i);
        let mut inner = T::zero();
        let mut rising = T::one();
        for j in 1..=i {
            rising = rising * from_n::<T>(s + j);
            inner = inner + rising.clone() * c_coeff(i, j, gamma)?;
        }
        total = total + binom.clone() * inner;
    }
    Ok(total)
}

/// E R_(s)^k at γ = num/den, computed exactly.
pub fn ratio_moment_rational(s: usize, k: usize, num: i64, den: i64) -> Result<BigRational> {
    if den == 0 {
        return Err(Error::domain("zero denominator"));
    }
    ratio_moment(s, k, &BigRational::new(num.into(), den.into()))
}

/// Var R_(s) in both parametrizations, (s+1)γ²/((γ−1)²(2γ−1)) and (s+1)α/((2−α)(1−α)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceForms<T> {
    pub gamma_form: T,
    pub alpha_form: T,
}

pub fn ratio_variance_forms<T: Real>(s: usize, gamma: T) -> Result<VarianceForms<T>> {
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma must exceed 1"));
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let n = lit::<T>((s + 1) as f64);
    let alpha = one / gamma;
    Ok(VarianceForms {
        gamma_form: n * gamma * gamma / ((gamma - one).powi(2) * (two * gamma - one)),
        alpha_form: n * alpha / ((two - alpha) * (one - alpha).powi(2)),
    })
}

pub fn ratio_variance<T: Real>(s: usize, gamma: T) -> Result<T> {
    let f = ratio_variance_forms(s, gamma)?;
    let tol = lit::<T>(1e-12) * f.gamma_form.abs();
    if (f.gamma_form - f.alpha_form).abs() > tol {
        return Err(Error::Numerical {
            what: "variance forms disagree".into(),
            estimate: crate::scalar::to_f64(f.gamma_form),
            abs_err: crate::scalar::to_f64((f.gamma_form - f.alpha_form).abs()),
        });
    }
    Ok(f.gamma_form)
}

/// lim E T_{N(t)} = 1 − α.
pub fn t_infinity_mean<T: Real>(alpha: T) -> T {
    T::one() - alpha
}

/// lim Var T_{N(t)} = α(1 − α)/3.
pub fn t_infinity_variance<T: Real>(alpha: T) -> T {
    alpha * (T::one() - alpha) / lit(3.0)
}

/// Pieces of the correlation between R_(0)² and T_∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation<T> {
    pub rho: T,
    pub cov: T,
    pub cross_moment: T,
    pub r2_mean: T,
    pub r4_mean: T,
    pub t_mean: T,
    pub t_variance: T,
    /// cov / √(Var R² Var T) with Var R² from the fourth ratio moment.
    pub rho_from_moments: T,
}

pub fn correlation_r0sq_tinf<T: Real>(gamma: T) -> Result<Correlation<T>> {
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma must exceed 1"));
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let alpha = one / gamma;
    let g2 = gamma * gamma;
    let rho = -(three * (gamma - one) * (three * gamma - one) * (lit::<T>(4.0) * gamma - one)
        / (gamma * (lit::<T>(43.0) * g2 - lit::<T>(7.0) * gamma - lit::<T>(6.0))))
    .sqrt();
    let cov = -two * gamma / (one - three * gamma + two * g2);
    let r2_mean = ratio_moment(0, 2, &gamma)?;
    let r4_mean = ratio_moment(0, 4, &gamma)?;
    let t_mean = t_infinity_mean(alpha);
    let t_variance = t_infinity_variance(alpha);
    let var_r2 = r4_mean - r2_mean * r2_mean;
    Ok(Correlation {
        rho,
        cov,
        cross_moment: two / (two - alpha),
        r2_mean,
        r4_mean,
        t_mean,
        t_variance,
        rho_from_moments: cov / (var_r2 * t_variance).sqrt(),
    })
}

fn require_finite_mean<T: Real>(model: &TailModel<T>) -> Result<T> {
    if !(model.alpha() > T::one()) {
        return Err(Error::domain("this mean needs alpha > 1"));
    }
    model.mean()
}

fn finite_moment<T: Real>(mix: &MixingLaw<T>, c: T) -> Result<T> {
    let m = mix.theta_moment(c);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::divergent(format!("E[Theta^{c}] is infinite")))
    }
}

/// E[Σ_s/Ξ_s] = μ Γ(s+γ+1) E[Θ^{1−γ}] / s! in the α > 1, fixed-s limit.
pub fn sum_over_max_mean<T: Real>(s: usize, model: &TailModel<T>, mix: &MixingLaw<T>) -> Result<T> {
    let mu = require_finite_mean(model)?;
    let g = model.gamma();
    let sf = lit::<T>(s as f64);
    let m = finite_moment(mix, T::one() - g)?;
    Ok(mu * (ln_gamma(sf + g + T::one()) - ln_gamma(sf + T::one())).exp() * m)
}

/// Variant μ Γ(s−γ+1) E[Θ^{1+γ}] / s!.
pub fn sum_over_max_mean_alt<T: Real>(s: usize, model: &TailModel<T>, mix: &MixingLaw<T>) -> Result<T> {
    let mu = require_finite_mean(model)?;
    let g = model.gamma();
    let sf = lit::<T>(s as f64);
    let m = finite_moment(mix, T::one() + g)?;
    Ok(mu * (ln_gamma(sf - g + T::one()) - ln_gamma(sf + T::one())).exp() * m)
}

/// ∫_0^∞ e^{−u z^{−γ}} q_2(z + uμ) du.
fn max_over_sum_inner<T: Real>(z: T, gam: T, mu: T, mix: &MixingLaw<T>, cfg: &QuadConfig) -> Result<T> {
    let a = z.powf(-gam);
    let f = |u: T| -> Result<T> {
        let e = u * a;
        if e > lit(745.0) {
            return Ok(T::zero());
        }
        Ok((-e).exp() * mix.q(2, z + u * mu)?)
    };
    // decay rate in u is at least a + μ·(smallest Θ scale); break near 1/(a + μ)
    let scale = T::one() / (a + mu * mix.mean());
    let breaks = [T::zero(), scale, scale * lit(8.0), T::infinity()];
    Ok(try_integrate_pieces(f, &breaks, cfg)?.value)
}

/// E[Ξ_0/(Λ_0 + Ξ_0 + Σ_0)] = 1 − μ ∫∫ e^{−u z^{−γ}} q_2(z + uμ) du dz, for s = 0.
pub fn max_over_sum_mean<T: Real>(model: &TailModel<T>, mix: &MixingLaw<T>, s: usize) -> Result<T> {
    if s > 0 {
        return Err(Error::Unsupported(
            "the max-over-sum mean is available for s = 0 only".into(),
        ));
    }
    let mu = require_finite_mean(model)?;
    let gam = model.gamma();
    let inner_cfg = QuadConfig::with_tol(1e-12, 1e-10);
    let f = |z: T| -> Result<T> {
        if z <= T::zero() {
            return Ok(T::zero());
        }
        max_over_sum_inner(z, gam, mu, mix, &inner_cfg)
    };
    let breaks = geometric_breaks(lit::<T>(2.0) / mix.mean(), T::infinity());
    let outer = try_integrate_pieces(f, &breaks, &QuadConfig::with_tol(1e-9, 1e-8))?;
    Ok(T::one() - mu * outer.value)
}

/// E[Ξ_s + Σ_s] = Γ(s−γ+1) E[Θ^γ] / ((γ−1) Γ(s)) for 1 < γ < s+1, `+∞` for γ ≥ s+1.
pub fn mean_xi_plus_sigma<T: Real>(s: usize, gamma: T, mix: &MixingLaw<T>) -> Result<T> {
    if s == 0 {
        return Err(Error::domain("s must be at least 1"));
    }
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma must exceed 1"));
    }
    let sf = lit::<T>(s as f64);
    if gamma >= sf + T::one() {
        return Ok(T::infinity());
    }
    let m = mix.theta_moment(gamma);
    if m.is_infinite() {
        return Ok(T::infinity());
    }
    Ok((ln_gamma(sf - gamma + T::one()) - ln_gamma(sf)).exp() / (gamma - T::one()) * m)
}

/// E[1 + Σ_s^{(μ)}/Ξ_s] = 1 + (s+1)/(γ−1), valid for any γ ≠ 1.
pub fn centered_ratio_mean<T: Real>(s: usize, gamma: T) -> Result<T> {
    if gamma == T::one() || !gamma.is_finite() || !(gamma > T::zero()) {
        return Err(Error::domain("gamma must be positive, finite and different from 1"));
    }
    Ok(T::one() + lit::<T>((s + 1) as f64) / (gamma - T::one()))
}

/// One row of the moment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub s: usize,
    pub k: usize,
    pub gamma: f64,
    pub moment: f64,
    pub variance: f64,
    pub rho: f64,
}

pub fn moment_row(s: usize, k: usize, gamma: f64) -> Result<MomentRow> {
    Ok(MomentRow {
        s,
        k,
        gamma,
        moment: ratio_moment(s, k, &gamma)?,
        variance: ratio_variance(s, gamma)?,
        rho: correlation_r0sq_tinf(gamma)?.rho,
    })
}

/// Γ(s+γ+1)/s! as a check on the fixed-s Fréchet representation Ξ = Γ_{s+1}^{−γ}.
pub fn frechet_inverse_moment<T: Real>(s: usize, gamma: T) -> T {
    let sf = lit::<T>(s as f64);
    gamma_fn(sf + gamma + T::one()) / gamma_fn(sf + T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{FromPrimitive, One};
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn partition_count(n: usize, k: usize) -> usize {
        // p(n, k) = p(n−1, k−1) + p(n−k, k)
        if k == 0 {
            return usize::from(n == 0);
        }
        if n < k {
            return 0;
        }
        partition_count(n - 1, k - 1) + partition_count(n - k, k)
    }

    #[test]
    fn partition_enumeration_is_complete() {
        for i in 1..=12 {
            for j in 1..=i {
                let p = partitions(i, j).unwrap();
                assert_eq!(p.len(), partition_count(i, j), "i={i} j={j}");
                for m in p.iter() {
                    assert_eq!(m.len(), i - j + 1);
                    assert_eq!(m.iter().sum::<usize>(), j);
                    assert_eq!(m.iter().enumerate().map(|(l, &x)| (l + 1) * x).sum::<usize>(), i);
                }
            }
        }
        assert!(partitions(3, 4).is_err());
        assert!(partitions(21, 1).is_err());
    }

    #[test]
    fn partitions_cached_concurrently() {
        let handles: Vec<_> = (0..4)
            .map(|_| std::thread::spawn(|| partitions(15, 5).unwrap().len()))
            .collect();
        let counts: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(counts.iter().all(|&c| c == partition_count(15, 5)));
        assert!(Arc::ptr_eq(&partitions(15, 5).unwrap(), &partitions(15, 5).unwrap()));
    }

    #[test]
    fn coefficient_examples() {
        for g in [1.5_f64, 2.0, 3.0, 7.25] {
            assert!((c_coeff(1, 1, &g).unwrap() - 1.0 / (g - 1.0)).abs() < 1e-15);
            assert!((c_coeff(2, 2, &g).unwrap() - 1.0 / (g - 1.0).powi(2)).abs() < 1e-14);
            assert!((c_coeff(2, 1, &g).unwrap() - 1.0 / (2.0 * g - 1.0)).abs() < 1e-15);
        }
        let g = rat(5, 2);
        assert_eq!(c_coeff(2, 2, &g).unwrap(), rat(4, 9));
        assert!(c_coeff(2, 3, &2.0).is_err());
        assert!(c_coeff(2, 1, &1.0).is_err());
    }

    #[test]
    fn coefficient_three_by_hand() {
        // C_{3,2}: m_1 = 1, m_2 = 1 → 3!·(1/(γ−1))·(1/(2(2γ−1)))
        let g = rat(2, 1);
        assert_eq!(c_coeff(3, 2, &g).unwrap(), rat(6, 1) * rat(1, 1) * rat(1, 6));
        // C_{3,1}: m_3 = 1 → 3!/(3!(3γ−1))
        assert_eq!(c_coeff(3, 1, &g).unwrap(), rat(1, 5));
    }

    #[test]
    fn coefficients_positive_and_decreasing() {
        for i in 1..=6 {
            for j in 1..=i {
                let mut prev = f64::INFINITY;
                for step in 0..20 {
                    let g = 1.05 + 0.4 * step as f64;
                    let c = c_coeff(i, j, &g).unwrap();
                    assert!(c > 0.0 && c < prev, "i={i} j={j} g={g}");
                    prev = c;
                }
            }
        }
    }

    #[test]
    fn ratio_moment_examples() {
        assert_eq!(ratio_moment(0, 2, &rat(2, 1)).unwrap(), rat(16, 3));
        for s in 0..6 {
            for g in [1.5, 2.0, 3.0] {
                let m1 = ratio_moment(s, 1, &g).unwrap();
                assert!((m1 - (1.0 + (s as f64 + 1.0) / (g - 1.0))).abs() < 1e-13);
            }
        }
        let g = 2.0_f64;
        assert!((ratio_moment(0, 2, &g).unwrap() - 16.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn variance_identity_exact() {
        for (gn, gd) in [(3, 2), (2, 1), (3, 1)] {
            let g = rat(gn, gd);
            for s in [0usize, 1, 4] {
                let m1 = ratio_moment(s, 1, &g).unwrap();
                let m2 = ratio_moment(s, 2, &g).unwrap();
                let one = BigRational::one();
                let two = rat(2, 1);
                let n = BigRational::from_usize(s + 1).unwrap();
                let want = n * g.clone() * g.clone()
                    / ((g.clone() - one.clone()) * (g.clone() - one.clone()) * (two * g.clone() - one));
                assert_eq!(m2 - m1.clone() * m1, want, "g={g} s={s}");
            }
        }
    }

    #[test]
    fn variance_identity_float() {
        for g in [1.5_f64, 2.0, 3.0] {
            for s in [0, 1, 4] {
                let m1 = ratio_moment(s, 1, &g).unwrap();
                let m2 = ratio_moment(s, 2, &g).unwrap();
                let v = ratio_variance(s, g).unwrap();
                assert!((m2 - m1 * m1 - v).abs() < 1e-12 * v.max(1.0), "g={g} s={s}");
            }
        }
    }

    #[test]
    fn variance_examples() {
        assert!((ratio_variance(0, 2.0_f64).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        for s in 0..8 {
            let v = ratio_variance(s, 2.7).unwrap();
            assert!((v - (s as f64 + 1.0) * ratio_variance(0, 2.7).unwrap()).abs() < 1e-12 * v);
        }
        // α → 0 means γ → ∞
        assert!(ratio_variance(0, 1e9_f64).unwrap() < 1e-8);
        let f = ratio_variance_forms(3, 1.7_f64).unwrap();
        assert!((f.gamma_form - f.alpha_form).abs() < 1e-14 * f.gamma_form);
        assert!(ratio_variance(0, 1.0_f64).is_err());
    }

    #[test]
    fn correlation_examples() {
        let c = correlation_r0sq_tinf(2.0_f64).unwrap();
        assert!((c.rho + (105.0_f64 / 304.0).sqrt()).abs() < 1e-14);
        assert!((c.cov + 4.0 / 3.0).abs() < 1e-14);
        assert!((c.r2_mean - 16.0 / 3.0).abs() < 1e-14);
        assert!((c.t_mean - 0.5).abs() < 1e-15 && (c.t_variance - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.cross_moment - 4.0 / 3.0).abs() < 1e-15);
        // cov = E[R²T] − E[R²] E[T]
        assert!((c.cross_moment - c.r2_mean * c.t_mean - c.cov).abs() < 1e-14);
        let far = correlation_r0sq_tinf(1e6_f64).unwrap();
        assert!((far.rho + 6.0 / 43.0_f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn correlation_covariance_identity_on_grid() {
        for step in 0..30 {
            let g = 1.1 + 0.3 * step as f64;
            let c = correlation_r0sq_tinf(g).unwrap();
            assert!((c.cross_moment - c.r2_mean * c.t_mean - c.cov).abs() < 1e-12 * c.cov.abs().max(1.0));
            assert!(c.rho < 0.0 && c.rho > -1.0);
        }
    }

    #[test]
    fn correlation_from_fourth_moment() {
        for g in [1.25_f64, 2.0, 3.0, 10.0, 100.0] {
            let c = correlation_r0sq_tinf(g).unwrap();
            assert!((c.rho - c.rho_from_moments).abs() < 1e-10, "g={g}: {} vs {}", c.rho, c.rho_from_moments);
        }
    }

    #[test]
    fn sum_over_max_examples() {
        let m = TailModel::pareto(2.0).unwrap();
        let pi_sqrt = std::f64::consts::PI.sqrt();
        let unit = MixingLaw::<f64>::unit();
        assert!((sum_over_max_mean_alt(0, &m, &unit).unwrap() - 2.0 * pi_sqrt).abs() < 1e-13);
        assert!((sum_over_max_mean(0, &m, &unit).unwrap() - pi_sqrt).abs() < 1e-13);
        let theta = 1.7_f64;
        let d = MixingLaw::degenerate(theta).unwrap();
        let g = 0.5_f64;
        assert!(
            (sum_over_max_mean_alt(2, &m, &d).unwrap()
                - theta.powf(1.0 + g) * sum_over_max_mean_alt(2, &m, &unit).unwrap())
            .abs()
                < 1e-12
        );
        assert!(
            (sum_over_max_mean(2, &m, &d).unwrap() - theta.powf(1.0 - g) * sum_over_max_mean(2, &m, &unit).unwrap())
                .abs()
                < 1e-12
        );
        assert!(sum_over_max_mean(0, &TailModel::pareto(0.5).unwrap(), &unit).is_err());
    }

    #[test]
    fn sum_over_max_matches_frechet_representation() {
        // Θ = 1: Σ_s = μ and Ξ_s = Γ_{s+1}^{−γ}, so E[Σ/Ξ] = μ E[Γ_{s+1}^γ]
        for alpha in [1.2_f64, 2.0, 3.5] {
            let m = TailModel::pareto(alpha).unwrap();
            for s in 0..5 {
                let want = m.mean().unwrap() * frechet_inverse_moment(s, 1.0 / alpha);
                let got = sum_over_max_mean(s, &m, &MixingLaw::unit()).unwrap();
                assert!((got - want).abs() < 1e-12 * want);
            }
        }
    }

    #[test]
    fn max_over_sum_checks() {
        let m = TailModel::pareto(2.0).unwrap();
        let unit = MixingLaw::unit();
        let v = max_over_sum_mean(&m, &unit, 0).unwrap();
        assert!(v > 0.0 && v < 1.0, "{v}");
        assert!(matches!(max_over_sum_mean(&m, &unit, 1), Err(Error::Unsupported(_))));
        let cfg = QuadConfig::with_tol(1e-13, 1e-12);
        for z in [0.01_f64, 0.5, 2.0, 9.0] {
            let inner = max_over_sum_inner(z, 0.5, 2.0, &unit, &cfg).unwrap();
            let closed = (-z).exp() / (z.powf(-0.5) + 2.0);
            assert!((inner - closed).abs() < 1e-10, "z={z}");
        }
        for mix in [MixingLaw::gamma(3.0, 3.0).unwrap(), MixingLaw::discrete(vec![(0.5, 0.5), (1.5, 0.5)]).unwrap()] {
            let v = max_over_sum_mean(&m, &mix, 0).unwrap();
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn xi_plus_sigma_examples() {
        let unit = MixingLaw::unit();
        let pi_sqrt = std::f64::consts::PI.sqrt();
        assert!((mean_xi_plus_sigma(2, 1.5, &unit).unwrap() - pi_sqrt).abs() < 1e-14);
        assert!(mean_xi_plus_sigma(1, 2.5, &unit).unwrap().is_infinite());
        assert!(mean_xi_plus_sigma(0, 1.5, &unit).is_err());
        let d = MixingLaw::degenerate(2.0).unwrap();
        assert!((mean_xi_plus_sigma(3, 1.5, &d).unwrap() - 2.0_f64.powf(1.5) * mean_xi_plus_sigma(3, 1.5, &unit).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn centered_ratio_examples() {
        assert_eq!(centered_ratio_mean(0, 2.0_f64).unwrap(), 2.0);
        assert_eq!(centered_ratio_mean(3, 2.0_f64).unwrap(), 5.0);
        assert!(centered_ratio_mean(0, 1.0_f64).is_err());
        for s in 0..5 {
            for g in [1.5_f64, 2.0, 4.0] {
                assert!((centered_ratio_mean(s, g).unwrap() - ratio_moment(s, 1, &g).unwrap()).abs() < 1e-13);
            }
        }
        // γ < 1 gives a value below 1
        assert!((centered_ratio_mean(0, 2.0_f64 / 3.0).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn moment_row_values() {
        let r = moment_row(0, 4, 2.0).unwrap();
        assert!((r.variance - 4.0 / 3.0).abs() < 1e-15);
        assert!((ratio_moment(0, 1, &2.0_f64).unwrap() - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ratio_moments_monotone(g in 1.05_f64..8.0, s in 0_usize..6, k in 1_usize..6) {
            let m = ratio_moment(s, k, &g).unwrap();
            prop_assert!(m >= 1.0);
            prop_assert!(ratio_moment(s + 1, k, &g).unwrap() >= m);
            prop_assert!(ratio_moment(s, k + 1, &g).unwrap() >= m);
            let m1 = ratio_moment(s, 1, &g).unwrap();
            prop_assert!(ratio_moment(s, 2, &g).unwrap() >= m1 * m1 * (1.0 - 1e-14));
        }
    }
}

//! Simulation of claim paths, the LePage limit series and the ratio statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::{default_vanishing_p, lt_eval_with, LtOptions, Regime, SRule};
use crate::mixing::MixingLaw;
use crate::tail::TailModel;

/// Number of batches behind every batch-means standard error.
pub const BATCHES: usize = 100;

/// One normalized draw of (Λ, Ξ, Σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleSample {
    pub lambda: f64,
    pub xi: f64,
    pub sigma: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for chunk `chunk` of a run seeded with `master`.
pub fn chunk_rng(master: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(chunk)))
}

fn batch_sizes(n: usize) -> Vec<usize> {
    let b = BATCHES.min(n.max(1));
    (0..b).map(|i| n / b + usize::from(i < n % b)).collect()
}

/// Per-batch means of a fixed set of functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMeans {
    pub means: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
}

impl BatchMeans {
    /// Runs `n` draws in `BATCHES` independent streams; `f` adds one draw's functionals into the accumulator.
    pub fn run<F>(n: usize, dims: usize, seed: u64, f: F) -> Self
    where
        F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
    {
        let sizes = batch_sizes(n);
        let means = sizes
            .par_iter()
            .enumerate()
            .map(|(c, &size)| {
                let mut rng = chunk_rng(seed, c as u64);
                let mut acc = vec![0.0; dims];
                for _ in 0..size {
                    f(&mut rng, &mut acc);
                }
                acc.iter().map(|a| a / size.max(1) as f64).collect()
            })
            .collect();
        BatchMeans { means, sizes }
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Pooled mean of every functional.
    pub fn pooled(&self) -> Vec<f64> {
        let n = self.total() as f64;
        let dims = self.means.first().map_or(0, Vec::len);
        (0..dims)
            .map(|d| {
                self.means
                    .iter()
                    .zip(&self.sizes)
                    .map(|(m, &s)| m[d] * s as f64)
                    .sum::<f64>()
                    / n
            })
            .collect()
    }

    /// Pooled value of `g` and its batch-means standard error.
    pub fn estimate<G: Fn(&[f64]) -> f64>(&self, g: G) -> Estimate {
        let value = g(&self.pooled());
        let vals: Vec<f64> = self.means.iter().map(|m| g(m)).collect();
        let b = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / b;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0).max(1.0);
        Estimate {
            value,
            stderr: (var / b).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// |value − target| in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.stderr
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Treatment of the LePage series beyond the truncation depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    Drop,
    /// Adds ∫_{Γ_K}^∞ x^{−γ} dx, the conditional mean of the dropped terms.
    #[default]
    MeanCorrect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LePageConfig {
    pub depth: usize,
    pub tail_mode: TailMode,
}

impl Default for LePageConfig {
    fn default() -> Self {
        LePageConfig {
            depth: 10_000,
            tail_mode: TailMode::MeanCorrect,
        }
    }
}

/// Z_k = Γ_k^{−γ} for k ≤ keep, plus the sums of Z_k and Z_k² over the whole series.
#[derive(Debug, Clone, PartialEq)]
pub struct LePageDraw {
    pub head: Vec<f64>,
    pub sum: f64,
    pub sum_sq: f64,
}

fn check_lepage(alpha: f64, keep: usize, cfg: &LePageConfig) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("the LePage series needs alpha in (0, 1)"));
    }
    if cfg.depth < keep + 1 || cfg.depth < 2 {
        return Err(Error::domain(format!("LePage depth {} too small for s = {}", cfg.depth, keep.saturating_sub(1))));
    }
    Ok(())
}

pub fn lepage_draw<R: Rng + ?Sized>(alpha: f64, keep: usize, cfg: &LePageConfig, rng: &mut R) -> LePageDraw {
    let gamma = 1.0 / alpha;
    let mut g = 0.0;
    let mut head = Vec::with_capacity(keep);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..cfg.depth {
        let e: f64 = Exp1.sample(rng);
        g += e;
        let z = g.powf(-gamma);
        if k < keep {
            head.push(z);
        }
        sum += z;
        sum_sq += z * z;
    }
    if cfg.tail_mode == TailMode::MeanCorrect {
        sum += g.powf(1.0 - gamma) / (gamma - 1.0);
        sum_sq += g.powf(1.0 - 2.0 * gamma) / (2.0 * gamma - 1.0);
    }
    LePageDraw { head, sum, sum_sq }
}

/// (Σ_{k≤s} Z_k, Z_{s+1}, Σ_{k≥s+2} Z_k).
pub fn simulate_lepage_triple<R: Rng + ?Sized>(alpha: f64, s: usize, cfg: &LePageConfig, rng: &mut R) -> Result<TripleSample> {
    check_lepage(alpha, s + 1, cfg)?;
    let d = lepage_draw(alpha, s + 1, cfg, rng);
    let lambda: f64 = d.head[..s].iter().sum();
    let xi = d.head[s];
    Ok(TripleSample {
        lambda,
        xi,
        sigma: d.sum - lambda - xi,
    })
}

/// Empirical moments of R_(s) = (Ξ + Σ)/Ξ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub s: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    /// E R^k for k = 1, …, max_k.
    pub raw_moments: Vec<Estimate>,
    pub min_ratio: f64,
}

/// Paired statistics of T_∞ and R_(0)² from the same series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TInfinityStats {
    pub mean: Estimate,
    pub variance: Estimate,
    pub corr_with_r0_squared: Estimate,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LePageStats {
    pub alpha: f64,
    pub n: usize,
    pub ratios: Vec<RatioStats>,
    pub t_infinity: TInfinityStats,
}

/// Default cap on the estimated ratio moments.
pub const DEFAULT_MAX_MOMENT: usize = 4;

/// One pass over `n` series draws yielding R_(s) statistics for every s in `s_list` and T_∞.
pub fn lepage_statistics(
    alpha: f64,
    s_list: &[usize],
    max_k: usize,
    cfg: &LePageConfig,
    n: usize,
    seed: u64,
) -> Result<LePageStats> {
    let s_max = s_list.iter().copied().max().unwrap_or(0);
    check_lepage(alpha, s_max + 1, cfg)?;
    if max_k == 0 || n < 2 {
        return Err(Error::domain("need max_k >= 1 and at least two samples"));
    }
    let ns = s_list.len();
    // layout: per s the powers R^1..R^max_k, then T, T², R0², R0⁴, R0²T
    let t_base = ns * max_k;
    let dims = t_base + 5;
    let extrema = std::sync::Mutex::new((vec![f64::INFINITY; ns], f64::INFINITY, f64::NEG_INFINITY));
    let bm = BatchMeans::run(n, dims, seed, |rng, acc| {
        let d = lepage_draw(alpha, s_max + 1, cfg, rng);
        let mut rs = Vec::with_capacity(ns);
        for (idx, &s) in s_list.iter().enumerate() {
            let lambda: f64 = d.head[..s].iter().sum();
            let r = (d.sum - lambda) / d.head[s];
            rs.push(r);
            let mut p = 1.0;
            for k in 0..max_k {
                p *= r;
                acc[idx * max_k + k] += p;
            }
        }
        let t = d.sum_sq / (d.sum * d.sum);
        let r0 = d.sum / d.head[0];
        let r0sq = r0 * r0;
        acc[t_base] += t;
        acc[t_base + 1] += t * t;
        acc[t_base + 2] += r0sq;
        acc[t_base + 3] += r0sq * r0sq;
        acc[t_base + 4] += r0sq * t;
        let mut e = extrema.lock().unwrap_or_else(|p| p.into_inner());
        for (m, r) in e.0.iter_mut().zip(&rs) {
            *m = m.min(*r);
        }
        e.1 = e.1.min(t);
        e.2 = e.2.max(t);
    });
    let (min_r, min_t, max_t) = extrema.into_inner().unwrap_or_else(|p| p.into_inner());
    let ratios = s_list
        .iter()
        .enumerate()
        .map(|(idx, &s)| {
            let o = idx * max_k;
            let raw_moments = (0..max_k).map(|k| bm.estimate(|m| m[o + k])).collect();
            let variance = if max_k >= 2 {
                bm.estimate(|m| m[o + 1] - m[o] * m[o])
            } else {
                Estimate { value: f64::NAN, stderr: f64::NAN }
            };
            RatioStats {
                s,
                mean: bm.estimate(|m| m[o]),
                variance,
                raw_moments,
                min_ratio: min_r[idx],
            }
        })
        .collect();
    let corr = |m: &[f64]| {
        let (t1, t2, r2, r4, rt) = (m[t_base], m[t_base + 1], m[t_base + 2], m[t_base + 3], m[t_base + 4]);
        (rt - r2 * t1) / ((r4 - r2 * r2) * (t2 - t1 * t1)).sqrt()
    };
    Ok(LePageStats {
        alpha,
        n,
        ratios,
        t_infinity: TInfinityStats {
            mean: bm.estimate(|m| m[t_base]),
            variance: bm.estimate(|m| m[t_base + 1] - m[t_base] * m[t_base]),
            corr_with_r0_squared: bm.estimate(corr),
            min: min_t,
            max: max_t,
        },
    })
}

pub fn simulate_ratio_r(alpha: f64, s: usize, cfg: &LePageConfig, n: usize, seed: u64) -> Result<RatioStats> {
    let mut st = lepage_statistics(alpha, &[s], DEFAULT_MAX_MOMENT, cfg, n, seed)?;
    Ok(st.ratios.remove(0))
}

pub fn simulate_t_infinity(alpha: f64, cfg: &LePageConfig, n: usize, seed: u64) -> Result<TInfinityStats> {
    Ok(lepage_statistics(alpha, &[0], 2, cfg, n, seed)?.t_infinity)
}

/// What to do with paths holding fewer than s + 2 claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// Redraw the path and count the redraw.
    #[default]
    Resample,
    /// Keep it, with X*_r = 0 for r ≤ 0.
    Raw,
}

/// Un-normalized order-statistic split of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawPath {
    pub n: usize,
    pub s: usize,
    pub lambda: f64,
    pub xi: f64,
    pub sigma: f64,
    pub total: f64,
    /// Smallest of the top s claims (`+∞` when none).
    pub top_min: f64,
}

fn number_split(rule: &SRule<f64>, t: f64, n: usize) -> usize {
    match *rule {
        SRule::FixedS(s) => s,
        SRule::VanishingP => (default_vanishing_p(t) * n as f64).floor() as usize,
        SRule::FixedP(p) => (p * n as f64).floor() as usize,
    }
}

fn draw_claims<R: Rng + ?Sized>(model: &TailModel<f64>, mix: &MixingLaw<f64>, t: f64, rng: &mut R, buf: &mut Vec<f64>) {
    let theta = mix.sample(rng);
    let n = Poisson::new(theta * t).map(|p| p.sample(rng) as usize).unwrap_or(0);
    buf.clear();
    buf.extend((0..n).map(|_| model.sample(rng)));
}

/// Splits the claims in `buf` (reordered in place) into the s largest, the (s+1)-th largest and the rest.
pub fn split_claims(buf: &mut [f64], s: usize) -> RawPath {
    let n = buf.len();
    let total: f64 = buf.iter().sum();
    if n <= s {
        let top_min = buf.iter().copied().fold(f64::INFINITY, f64::min);
        return RawPath { n, s, lambda: total, xi: 0.0, sigma: 0.0, total, top_min };
    }
    let k = n - s - 1;
    buf.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    let lambda: f64 = buf[k + 1..].iter().sum();
    let sigma: f64 = buf[..k].iter().sum();
    let top_min = buf[k + 1..].iter().copied().fold(f64::INFINITY, f64::min);
    RawPath { n, s, lambda, xi: buf[k], sigma, total, top_min }
}

/// Raw path for the counting process at horizon t.
pub fn simulate_raw_path<R: Rng + ?Sized>(
    model: &TailModel<f64>,
    mix: &MixingLaw<f64>,
    t: f64,
    rule: &SRule<f64>,
    rng: &mut R,
    buf: &mut Vec<f64>,
) -> RawPath {
    draw_claims(model, mix, t, rng, buf);
    let s = number_split(rule, t, buf.len());
    split_claims(buf, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub conditioning: Conditioning,
    pub max_redraws: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            conditioning: Conditioning::Resample,
            max_redraws: 10_000,
        }
    }
}

/// Normalizing constants of one regime at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaling {
    pub lambda: f64,
    pub xi: f64,
    pub sigma: f64,
    /// Mean subtracted from every smallest claim, 0 when uncentered.
    pub center: f64,
}

pub fn regime_scaling(model: &TailModel<f64>, regime: &Regime<f64>, t: f64) -> Result<Scaling> {
    let p = match regime.s_rule {
        SRule::FixedP(p) => p,
        _ => default_vanishing_p(t),
    };
    let d = regime.normalization_descriptor();
    Ok(Scaling {
        lambda: d.lambda.value(model, t, p)?,
        xi: d.xi.value(model, t, p)?,
        sigma: d.sigma.value(model, t, p)?,
        center: if d.sigma_centered { model.mean()? } else { 0.0 },
    })
}

fn normalize(raw: &RawPath, sc: &Scaling) -> TripleSample {
    let small = raw.n.saturating_sub(raw.s + 1) as f64;
    TripleSample {
        lambda: raw.lambda / sc.lambda,
        xi: raw.xi / sc.xi,
        sigma: (raw.sigma - small * sc.center) / sc.sigma,
    }
}

/// One normalized path draw; the second field counts redraws.
pub fn simulate_path_triple<R: Rng + ?Sized>(
    model: &TailModel<f64>,
    mix: &MixingLaw<f64>,
    t: f64,
    regime: &Regime<f64>,
    cfg: &PathConfig,
    rng: &mut R,
) -> Result<(TripleSample, usize)> {
    regime.check_model(model)?;
    let sc = regime_scaling(model, regime, t)?;
    let mut buf = Vec::new();
    draw_normalized(model, mix, t, regime, &sc, cfg, rng, &mut buf)
}

#[allow(clippy::too_many_arguments)]
fn draw_normalized<R: Rng + ?Sized>(
    model: &TailModel<f64>,
    mix: &MixingLaw<f64>,
    t: f64,
    regime: &Regime<f64>,
    sc: &Scaling,
    cfg: &PathConfig,
    rng: &mut R,
    buf: &mut Vec<f64>,
) -> Result<(TripleSample, usize)> {
    let mut redraws = 0;
    loop {
        let raw = simulate_raw_path(model, mix, t, &regime.s_rule, rng, buf);
        if cfg.conditioning == Conditioning::Raw || raw.n >= raw.s + 2 {
            return Ok((normalize(&raw, sc), redraws));
        }
        redraws += 1;
        if redraws > cfg.max_redraws {
            return Err(Error::domain(format!(
                "more than {} redraws: t = {t} is too small for {}",
                cfg.max_redraws,
                regime.name()
            )));
        }
    }
}

/// A batch of normalized path draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSamples {
    pub t: f64,
    pub samples: Vec<TripleSample>,
    pub redraws: usize,
    pub warnings: Vec<String>,
}

impl PathSamples {
    pub fn redraw_rate(&self) -> f64 {
        self.redraws as f64 / (self.redraws + self.samples.len()) as f64
    }
}

pub fn simulate_paths(
    model: &TailModel<f64>,
    mix: &MixingLaw<f64>,
    t: f64,
    regime: &Regime<f64>,
    cfg: &PathConfig,
    n: usize,
    seed: u64,
) -> Result<PathSamples> {
    regime.check_model(model)?;
    let sc = regime_scaling(model, regime, t)?;
    let chunks: Vec<Result<(Vec<TripleSample>, usize)>> = batch_sizes(n)
        .par_iter()
        .enumerate()
        .map(|(c, &size)| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut buf = Vec::new();
            let mut out = Vec::with_capacity(size);
            let mut redraws = 0;
            for _ in 0..size {
                let (x, r) = draw_normalized(model, mix, t, regime, &sc, cfg, &mut rng, &mut buf)?;
                out.push(x);
                redraws += r;
            }
            Ok((out, redraws))
        })
        .collect();
    let mut samples = Vec::with_capacity(n);
    let mut redraws = 0;
    for c in chunks {
        let (s, r) = c?;
        samples.extend(s);
        redraws += r;
    }
    let mut res = PathSamples { t, samples, redraws, warnings: Vec::new() };
    if res.redraw_rate() > 0.01 {
        res.warnings.push(format!(
            "{:.2}% of paths at t = {t} had fewer than s + 2 claims and were redrawn",
            100.0 * res.redraw_rate()
        ));
    }
    Ok(res)
}

/// Monte-Carlo estimate of E exp(−uΛ − vΞ − wΣ) with its standard error.
pub fn empirical_lt(samples: &[TripleSample], u: f64, v: f64, w: f64) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::domain("no samples"));
    }
    let n = samples.len() as f64;
    let vals = samples.iter().map(|x| (-u * x.lambda - v * x.xi - w * x.sigma).exp());
    let (s1, s2) = vals.fold((0.0, 0.0), |(a, b), y| (a + y, b + y * y));
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// Sample mean of `f` over the draws with its standard error.
pub fn empirical_mean<F: Fn(&TripleSample) -> f64>(samples: &[TripleSample], f: F) -> Result<Estimate> {
    if samples.len() < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let n = samples.len() as f64;
    let (s1, s2) = samples.iter().map(f).fold((0.0, 0.0), |(a, b), y| (a + y, b + y * y));
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// LT(u,v,w) − LT(u,v,0)·LT(0,0,w), the empirical covariance of e^{−uΛ−vΞ} and e^{−wΣ},
/// with a delta-method standard error.
pub fn independence_gap(samples: &[TripleSample], u: f64, v: f64, w: f64) -> Result<Estimate> {
    if samples.len() < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let n = samples.len() as f64;
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .map(|x| ((-u * x.lambda - v * x.xi).exp(), (-w * x.sigma).exp()))
        .collect();
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mab = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / n;
    let psi: Vec<f64> = pairs.iter().map(|&(a, b)| a * b - a * mb - ma * b).collect();
    let mpsi = psi.iter().sum::<f64>() / n;
    let var = psi.iter().map(|x| (x - mpsi).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value: mab - ma * mb,
        stderr: (var / n).sqrt(),
    })
}

/// One (t, query) line of a convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Per-horizon summary: medians over the query grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonSummary {
    pub t: f64,
    pub median_gap: f64,
    pub median_stderr: f64,
    /// Median of gap/stderr over queries with a positive standard error.
    pub median_z: f64,
    pub redraw_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub regime: String,
    pub rows: Vec<ConvergenceRow>,
    pub horizons: Vec<HorizonSummary>,
    /// Median gap failed to be nonincreasing in t beyond 3 median standard errors.
    pub flagged: bool,
    pub warnings: Vec<String>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

#[allow(clippy::too_many_arguments)]
pub fn convergence_report(
    model: &TailModel<f64>,
    mix: &MixingLaw<f64>,
    regime: &Regime<f64>,
    t_grid: &[f64],
    queries: &[(f64, f64, f64)],
    n_per_t: usize,
    seed: u64,
    paths_cfg: &PathConfig,
    lt_opts: &LtOptions,
) -> Result<ConvergenceReport> {
    if t_grid.is_empty() || queries.is_empty() {
        return Err(Error::domain("t grid and query grid must be nonempty"));
    }
    let limits = queries
        .iter()
        .map(|&(u, v, w)| lt_eval_with(regime, model, mix, u, v, w, lt_opts))
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::new();
    let mut horizons = Vec::new();
    let mut warnings = Vec::new();
    for (i, &t) in t_grid.iter().enumerate() {
        let paths = simulate_paths(model, mix, t, regime, paths_cfg, n_per_t, seed.wrapping_add(i as u64))?;
        warnings.extend(paths.warnings.iter().cloned());
        let mut gaps = Vec::new();
        let mut errs = Vec::new();
        let mut zs = Vec::new();
        for (&(u, v, w), &limit) in queries.iter().zip(&limits) {
            let e = empirical_lt(&paths.samples, u, v, w)?;
            let gap = (e.value - limit).abs();
            rows.push(ConvergenceRow { t, u, v, w, empirical: e.value, stderr: e.stderr, limit, gap });
            gaps.push(gap);
            errs.push(e.stderr);
            if e.stderr > 0.0 {
                zs.push(gap / e.stderr);
            }
        }
        horizons.push(HorizonSummary {
            t,
            median_gap: median(gaps),
            median_stderr: median(errs),
            median_z: median(zs),
            redraw_rate: paths.redraw_rate(),
        });
    }
    let flagged = horizons
        .windows(2)
        .any(|h| h[1].median_gap > h[0].median_gap + 3.0 * h[1].median_stderr.max(h[0].median_stderr));
    Ok(ConvergenceReport {
        regime: regime.name(),
        rows,
        horizons,
        flagged,
        warnings,
    })
}

/// The 3×3×3 grid {0, a, b}³ used by the convergence reports.
pub fn cube_grid(levels: [f64; 3]) -> Vec<(f64, f64, f64)> {
    let mut g = Vec::with_capacity(27);
    for &u in &levels {
        for &v in &levels {
            for &w in &levels {
                g.push((u, v, w));
            }
        }
    }
    g
}

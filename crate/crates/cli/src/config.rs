use std::path::PathBuf;

use clap::{Args, ValueEnum};
use claimtail::finite_t::ExactOptions;
use claimtail::limit::{LtOptions, Reading};
use claimtail::montecarlo::{Conditioning, LePageConfig, PathConfig, TailMode, DEFAULT_MAX_MOMENT};
use claimtail::quadrature::QuadConfig;
use claimtail::{Mixing, Regime, Tail};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[default]
    Paths,
    Lepage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeSpec {
    pub name: String,
    /// Proportion for the fixed-p regimes.
    pub p: f64,
}

impl Default for RegimeSpec {
    fn default() -> Self {
        RegimeSpec {
            name: "gt1-fixed-s".into(),
            p: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub t: Vec<f64>,
    pub s: Vec<usize>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub gamma: Vec<f64>,
    pub k: Vec<usize>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            t: vec![100.0, 1000.0, 10000.0],
            s: vec![0],
            u: vec![0.0, 0.5, 1.0],
            v: vec![0.0, 0.5, 1.0],
            w: vec![0.0, 0.5, 1.0],
            gamma: vec![2.0],
            k: vec![4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Simulation {
    pub n: usize,
    pub lepage_depth: usize,
    pub tail_mode: TailMode,
    pub conditioning: Conditioning,
    pub source: Source,
    pub max_k: usize,
    pub allow_high_moments: bool,
}

impl Default for Simulation {
    fn default() -> Self {
        Simulation {
            n: 10_000,
            lepage_depth: LePageConfig::default().depth,
            tail_mode: TailMode::MeanCorrect,
            conditioning: Conditioning::Resample,
            source: Source::Paths,
            max_k: DEFAULT_MAX_MOMENT,
            allow_high_moments: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    /// Defaults to JSON for the transform commands and CSV otherwise.
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Tail,
    pub mixing: Mixing,
    pub regime: RegimeSpec,
    pub grids: Grids,
    pub simulation: Simulation,
    pub reading: Reading,
    pub quad: QuadConfig,
    pub seed: u64,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: Tail::pareto(2.0).expect("valid default model"),
            mixing: Mixing::unit(),
            regime: RegimeSpec::default(),
            grids: Grids::default(),
            simulation: Simulation::default(),
            reading: Reading::Consistent,
            quad: LtOptions::default().quad,
            seed: 0,
            output: Output::default(),
        }
    }
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file mirroring the resolved config
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Print the resolved config and exit
    #[arg(long)]
    pub dump_config: bool,
    #[arg(long, env = "SEED")]
    pub seed: Option<u64>,

    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub x_min: Option<f64>,
    /// Exponent of the log factor; 0 gives the pure Pareto tail
    #[arg(long)]
    pub rho: Option<f64>,
    /// degenerate:θ, gamma:shape:rate, discrete:v@p,v@p or a JSON object
    #[arg(long)]
    pub mixing: Option<String>,

    /// lt1|gt1|ctr12|ctr2 followed by -fixed-s, -vanishing or -fixed-p
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,

    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub u: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub w: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,

    /// Samples per horizon or LePage draws
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lepage_depth: Option<usize>,
    #[arg(long, value_enum)]
    pub tail_mode: Option<TailModeArg>,
    #[arg(long, value_enum)]
    pub conditioning: Option<ConditioningArg>,
    #[arg(long, value_enum)]
    pub source: Option<Source>,
    /// Highest simulated ratio moment
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Permit simulated ratio moments above the fourth
    #[arg(long)]
    pub allow_high_moments: bool,

    #[arg(long, value_enum)]
    pub reading: Option<ReadingArg>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,

    #[arg(long, short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TailModeArg {
    Drop,
    MeanCorrect,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConditioningArg {
    Resample,
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReadingArg {
    Consistent,
    Alternate,
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        Err(CliError::Validation(format!("grid '{name}' is empty")))
    } else {
        Ok(())
    }
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(args)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, a: &RunArgs) -> Result<(), CliError> {
        if a.alpha.is_some() || a.x_min.is_some() || a.rho.is_some() {
            let alpha = a.alpha.unwrap_or(self.model.alpha());
            let x_min = a.x_min.unwrap_or(self.model.x_min());
            let rho = a.rho.unwrap_or(self.model.rho());
            self.model = if rho == 0.0 {
                Tail::pareto_with_min(alpha, x_min)?
            } else {
                Tail::log_power(alpha, x_min, rho)?
            };
        }
        if let Some(m) = &a.mixing {
            self.mixing = m.parse()?;
        }
        if let Some(r) = &a.regime {
            self.regime.name = r.clone();
        }
        if let Some(p) = a.p {
            self.regime.p = p;
        }
        let g = &mut self.grids;
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(x) = &a.$f { g.$f = x.clone(); } )* };
        }
        take!(t, s, u, v, w, gamma, k);
        let sim = &mut self.simulation;
        if let Some(n) = a.n {
            sim.n = n;
        }
        if let Some(d) = a.lepage_depth {
            sim.lepage_depth = d;
        }
        if let Some(m) = a.tail_mode {
            sim.tail_mode = match m {
                TailModeArg::Drop => TailMode::Drop,
                TailModeArg::MeanCorrect => TailMode::MeanCorrect,
            };
        }
        if let Some(c) = a.conditioning {
            sim.conditioning = match c {
                ConditioningArg::Resample => Conditioning::Resample,
                ConditioningArg::Raw => Conditioning::Raw,
            };
        }
        if let Some(s) = a.source {
            sim.source = s;
        }
        if let Some(k) = a.max_k {
            sim.max_k = k;
        }
        sim.allow_high_moments |= a.allow_high_moments;
        if let Some(r) = a.reading {
            self.reading = match r {
                ReadingArg::Consistent => Reading::Consistent,
                ReadingArg::Alternate => Reading::Alternate,
            };
        }
        if let Some(x) = a.abs_tol {
            self.quad.abs_tol = x;
        }
        if let Some(x) = a.rel_tol {
            self.quad.rel_tol = x;
        }
        if let Some(s) = a.seed {
            self.seed = s;
        }
        if let Some(p) = &a.output {
            self.output.path = Some(p.clone());
        }
        if let Some(f) = a.format {
            self.output.format = Some(f);
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let g = &self.grids;
        nonempty("t", &g.t)?;
        nonempty("s", &g.s)?;
        nonempty("u", &g.u)?;
        nonempty("v", &g.v)?;
        nonempty("w", &g.w)?;
        nonempty("gamma", &g.gamma)?;
        nonempty("k", &g.k)?;
        if !(self.quad.abs_tol > 0.0 && self.quad.rel_tol > 0.0) {
            return Err(CliError::Validation("tolerances must be positive".into()));
        }
        if self.simulation.max_k > DEFAULT_MAX_MOMENT && !self.simulation.allow_high_moments {
            return Err(CliError::Validation(format!(
                "simulated moments above k = {DEFAULT_MAX_MOMENT} need --allow-high-moments"
            )));
        }
        if self.simulation.max_k == 0 {
            return Err(CliError::Validation("max_k must be at least 1".into()));
        }
        self.regime_for(g.s[0])?;
        Ok(())
    }

    pub fn regime_for(&self, s: usize) -> Result<Regime, CliError> {
        Ok(Regime::from_name(&self.regime.name, s, self.regime.p)?)
    }

    /// The single s used by the path commands.
    pub fn single_s(&self, cmd: &str) -> Result<usize, CliError> {
        match self.grids.s.as_slice() {
            [s] => Ok(*s),
            _ => Err(CliError::Validation(format!("{cmd} takes a single --s"))),
        }
    }

    pub fn lt_options(&self) -> LtOptions {
        LtOptions {
            reading: self.reading,
            quad: self.quad,
        }
    }

    pub fn exact_options(&self) -> ExactOptions {
        ExactOptions {
            quad: self.quad,
            ..ExactOptions::default()
        }
    }

    pub fn lepage(&self) -> LePageConfig {
        LePageConfig {
            depth: self.simulation.lepage_depth,
            tail_mode: self.simulation.tail_mode,
        }
    }

    pub fn paths(&self) -> PathConfig {
        PathConfig {
            conditioning: self.simulation.conditioning,
            ..PathConfig::default()
        }
    }

    pub fn queries(&self) -> Vec<(f64, f64, f64)> {
        let g = &self.grids;
        let mut q = Vec::with_capacity(g.u.len() * g.v.len() * g.w.len());
        for &u in &g.u {
            for &v in &g.v {
                for &w in &g.w {
                    q.push((u, v, w));
                }
            }
        }
        q
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use liouville::evolution::Method;
use liouville::potential::Kind;

use crate::config::{PotentialSpec, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(
    name = "liouville",
    version,
    about = "Classical Liouville and quantum von Neumann dynamics in superoperator form"
)]
pub struct Cli {
    /// TOML scenario file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [env: LIOUVILLE_OUT_DIR].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads [env: LIOUVILLE_THREADS].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Scenario name recorded in the manifest.
    #[arg(long, global = true)]
    pub name: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Superpotentials, ℰ and the dense grid Liouvillian; Coulomb ℰ elements.
    Superop(SuperopArgs),
    /// Grid evolution with a moment time series.
    Evolve(EvolveArgs),
    /// Free and first-order superpropagators with numeric Dyson checks.
    Propagator(PropagatorArgs),
    /// Jaynes-Cummings evolution with the Coulomb superoperator.
    Jc(JcArgs),
    /// CL and QM evolution of two coupled oscillators.
    Bipartite(BipartiteArgs),
    /// Runs the invariant suite.
    Validate(ValidateArgs),
}

impl Command {
    pub fn label(&self) -> &'static str {
        match self {
            Command::Superop(_) => "superop",
            Command::Evolve(_) => "evolve",
            Command::Propagator(_) => "propagator",
            Command::Jc(_) => "jc",
            Command::Bipartite(_) => "bipartite",
            Command::Validate(_) => "validate",
        }
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        match self {
            Command::Superop(a) => a.apply(cfg),
            Command::Evolve(a) => a.apply(cfg),
            Command::Propagator(a) => a.apply(cfg),
            Command::Jc(a) => a.apply(cfg),
            Command::Bipartite(a) => a.apply(cfg),
            Command::Validate(a) => a.apply(cfg),
        }
    }
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse().map_err(|e: liouville::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: liouville::Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v = parse_list(s)?;
    v.try_into()
        .map_err(|_| format!("expected `re,im`, got `{s}`"))
}

fn parse_quad(s: &str) -> Result<[f64; 4], String> {
    let v = parse_list(s)?;
    v.try_into()
        .map_err(|_| format!("expected `Qf,qf,Qi,qi`, got `{s}`"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{t}`"))
        })
        .collect()
}

#[derive(Debug, Args)]
pub struct SuperopArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<PotentialSpec>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub dense: Option<bool>,
    /// Coulomb element `a,b,c,d` such as `1s,2s,1s,2s` (repeatable).
    #[arg(long = "element")]
    pub elements: Vec<String>,
    #[arg(long)]
    pub samples: Option<usize>,
}

impl SuperopArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        let c = &mut cfg.superop;
        set(&mut c.potential, &self.potential);
        set(&mut c.kind, &self.kind);
        set(&mut c.grid.half_width, &self.half_width);
        set(&mut c.grid.points, &self.points);
        set(&mut c.dense, &self.dense);
        set(&mut c.samples, &self.samples);
        if !self.elements.is_empty() {
            c.elements = self.elements.clone();
        }
    }
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<PotentialSpec>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<Kind>,
    /// matrix-exp, lie, strang or rk4.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub every: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub sigma_x: Option<f64>,
    #[arg(long)]
    pub sigma_p: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Also write the final density matrix.
    #[arg(long)]
    pub density: bool,
}

impl EvolveArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        let c = &mut cfg.evolve;
        set(&mut c.potential, &self.potential);
        set(&mut c.kind, &self.kind);
        set(&mut c.method, &self.method);
        set(&mut c.t, &self.t);
        set(&mut c.steps, &self.steps);
        set(&mut c.every, &self.every);
        set(&mut c.grid.half_width, &self.half_width);
        set(&mut c.grid.points, &self.points);
        set(&mut c.initial.x0, &self.x0);
        set(&mut c.initial.p0, &self.p0);
        set(&mut c.initial.sigma_x, &self.sigma_x);
        set(&mut c.initial.sigma_p, &self.sigma_p);
        set(&mut c.mass, &self.mass);
        set(&mut c.hbar, &self.hbar);
        c.density |= self.density;
    }
}

#[derive(Debug, Args)]
pub struct PropagatorArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Endpoints `Qf,qf,Qi,qi` (repeatable; replaces the configured list).
    #[arg(long = "point", value_parser = parse_quad, allow_hyphen_values = true)]
    pub points: Vec<[f64; 4]>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

impl PropagatorArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        let c = &mut cfg.propagator;
        set(&mut c.lambda, &self.lambda);
        set(&mut c.t, &self.t);
        set(&mut c.mass, &self.mass);
        set(&mut c.hbar, &self.hbar);
        set(&mut c.rel_tol, &self.rel_tol);
        if !self.points.is_empty() {
            c.points = self.points.clone();
        }
    }
}

#[derive(Debug, Args)]
pub struct JcArgs {
    #[arg(long)]
    pub omega_e: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Dipole coupling d_eg.
    #[arg(long)]
    pub d: Option<f64>,
    /// ℰ_egeg as `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub eps: Option<[f64; 2]>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
    /// `e<n>`, `g<n>`, `x<n>` or `coherent:α`.
    #[arg(long)]
    pub init: Option<String>,
}

impl JcArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        let c = &mut cfg.jc;
        set(&mut c.omega_e, &self.omega_e);
        set(&mut c.omega, &self.omega);
        set(&mut c.d, &self.d);
        set(&mut c.eps, &self.eps);
        set(&mut c.n_max, &self.n_max);
        set(&mut c.t_steps, &self.t_steps);
        set(&mut c.init, &self.init);
        if self.t_max.is_some() {
            c.t_max = self.t_max;
        }
    }
}

#[derive(Debug, Args)]
pub struct BipartiteArgs {
    #[arg(long)]
    pub n_levels: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub audit_levels: Option<usize>,
}

impl BipartiteArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        let c = &mut cfg.bipartite;
        set(&mut c.n_levels, &self.n_levels);
        set(&mut c.omega, &self.omega);
        set(&mut c.lambda, &self.lambda);
        set(&mut c.alpha1, &self.alpha1);
        set(&mut c.alpha2, &self.alpha2);
        set(&mut c.t_max, &self.t_max);
        set(&mut c.t_steps, &self.t_steps);
        set(&mut c.audit_levels, &self.audit_levels);
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Run only this check (repeatable).
    #[arg(long)]
    pub only: Vec<String>,
    /// Print the check names and exit.
    #[arg(long)]
    pub list: bool,
}

impl ValidateArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if !self.only.is_empty() {
            cfg.validate.only = self.only.clone();
        }
    }
}

impl Cli {
    /// Global flags; subcommand flags are applied by [`Command::apply`].
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        set(&mut cfg.out_dir, &self.out_dir);
        set(&mut cfg.seed, &self.seed);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.name.is_some() {
            cfg.name = self.name.clone();
        }
        self.command.apply(cfg);
    }
}

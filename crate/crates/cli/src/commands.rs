use std::path::Path;

use liouville::checks::{self, CheckOutcome};
use liouville::entangle::{
    audit_generator_difference, compare_cl_qm_entanglement, BipartiteBasis, BipartiteDensity,
};
use liouville::evolution::{evolve_grid, moment_series, EvolutionConfig};
use liouville::jaynescummings::{
    coulomb_superop_element, jc_report, HydrogenState, InitialState, JCDensity, JCParams, McConfig,
};
use liouville::liouvillian::{
    export_csv, spectral_symmetry_residual, spectrum, GridLiouvillian, LiouvilleOperator,
};
use liouville::potential::{e_superoperator, e_vanishes_identically, super_potential, Kind};
use liouville::superprop::{propagator_table, DysonQuadrature, PropagatorPoint};
use liouville::superspace::{SuperDensity, SuperGrid};
use liouville::C64;
use rayon::prelude::*;

use crate::args::Command;
use crate::config::{PotentialSpec, ScenarioConfig};
use crate::manifest::{CheckRecord, RunManifest};
use crate::output::{num, write_csv};
use crate::CliError;

const CONSERVATION_TOL: f64 = 1e-8;

/// Runs one subcommand and writes its manifest. Returns the manifest so
/// the caller can decide the exit status.
pub fn dispatch(
    command: &Command,
    cfg: &ScenarioConfig,
    threads: usize,
) -> Result<RunManifest, CliError> {
    let dir = cfg.out_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut m = RunManifest::new(command.label(), cfg, threads);
    match command {
        Command::Superop(_) => superop(cfg, &mut m, dir)?,
        Command::Evolve(_) => evolve(cfg, &mut m, dir)?,
        Command::Propagator(_) => propagator(cfg, &mut m, dir)?,
        Command::Jc(_) => jc(cfg, &mut m, dir)?,
        Command::Bipartite(_) => bipartite(cfg, &mut m, dir)?,
        Command::Validate(_) => validate(cfg, &mut m, dir)?,
    }
    m.write(dir)?;
    Ok(m)
}

fn linspace(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| t_max * k as f64 / steps as f64)
        .collect()
}

fn cplx(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn superop(cfg: &ScenarioConfig, m: &mut RunManifest, dir: &Path) -> Result<(), CliError> {
    let c = &cfg.superop;
    match &c.potential {
        PotentialSpec::Coulomb { e2 } => coulomb_elements(cfg, *e2, m, dir),
        PotentialSpec::Polynomial { .. } => {
            let v = c.potential.polynomial()?;
            let grid = SuperGrid::centered(c.grid.half_width, c.grid.points)?;
            let pts = grid.points();
            let mut rows = Vec::with_capacity(pts.len() * pts.len());
            let (mut antisym, mut scale) = (0.0_f64, 0.0_f64);
            for &qq in &pts {
                for &q in &pts {
                    let e = e_superoperator(&v, qq, q);
                    antisym = antisym.max((e + e_superoperator(&v, q, qq)).abs());
                    scale = scale.max(e.abs());
                    let cl = super_potential(&v, Kind::Classical, qq, q);
                    let qm = super_potential(&v, Kind::Quantum, qq, q);
                    rows.push(vec![num(qq), num(q), num(cl), num(qm), num(e)]);
                }
            }
            let header = [
                "Q [length]",
                "q [length]",
                "v_cl [energy]",
                "v_qm [energy]",
                "e [energy]",
            ];
            let n = write_csv(&dir.join("superpotential.csv"), &header, rows)?;
            m.output(
                "superpotential.csv",
                "CL and QM superpotentials and E on the grid",
                n,
            );
            let detail = if e_vanishes_identically(&v) {
                "degree <= 2: E vanishes identically"
            } else {
                ""
            };
            m.checks.push(
                CheckRecord::below("e-antisymmetry", antisym / scale.max(1.0), 1e-12)
                    .with_detail(detail),
            );

            if c.dense {
                let l = GridLiouvillian::new(&v, grid, c.kind, c.mass, c.hbar)?;
                let dense = l.dense()?;
                let path = dir.join("liouvillian.csv");
                m.time("export", || export_csv(&dense, &path))?;
                m.output(
                    "liouvillian.csv",
                    &format!("dense {} Liouvillian, row-major vec", c.kind.label()),
                    dense.nrows(),
                );
                let values = m.time("spectrum", || spectrum(&l))?;
                let radius = values.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
                let residual = spectral_symmetry_residual(&values, 1e-8).unwrap_or(f64::INFINITY);
                m.checks.push(
                    CheckRecord::below("spectral-symmetry", residual, 1e-8 * radius.max(1e-300))
                        .with_detail(format!("{} eigenvalues, radius {radius:.3e}", values.len())),
                );
            }
            m.boundary = Some("periodic grid".into());
            Ok(())
        }
    }
}

fn coulomb_elements(
    cfg: &ScenarioConfig,
    e2: f64,
    m: &mut RunManifest,
    dir: &Path,
) -> Result<(), CliError> {
    let c = &cfg.superop;
    let mut rows = Vec::new();
    for (k, spec) in c.elements.iter().enumerate() {
        let states = spec
            .split(',')
            .map(|s| s.trim().parse::<HydrogenState>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("element `{spec}`: {e}")))?;
        let [a, b, cc, d] = states[..] else {
            return Err(CliError::Config(format!(
                "element `{spec}` needs four states"
            )));
        };
        let seed = cfg.seed.wrapping_add(k as u64);
        m.seeds.insert(format!("element:{spec}"), seed);
        let est = m.time(&format!("element:{spec}"), || {
            coulomb_superop_element(
                &a,
                &b,
                &cc,
                &d,
                e2,
                &McConfig::with_samples(c.samples, seed),
            )
        })?;
        let forbidden = a.parity() * b.parity() * cc.parity() * d.parity() < 0;
        if forbidden {
            let sigmas = est.value().norm() / est.stderr();
            m.checks.push(
                CheckRecord::below(&format!("parity-forbidden:{spec}"), sigmas, 3.0)
                    .with_detail("|E| in standard errors"),
            );
        }
        rows.push(vec![
            a.to_string(),
            b.to_string(),
            cc.to_string(),
            d.to_string(),
            num(est.re),
            num(est.im),
            num(est.stderr_re),
            num(est.stderr_im),
            est.samples.to_string(),
            est.excluded.to_string(),
            num(est.shell_bound),
            forbidden.to_string(),
        ]);
    }
    let header = [
        "a",
        "b",
        "c",
        "d",
        "re [energy]",
        "im [energy]",
        "stderr_re [energy]",
        "stderr_im [energy]",
        "samples",
        "excluded",
        "shell_bound [energy]",
        "parity_forbidden",
    ];
    let n = write_csv(&dir.join("coulomb_elements.csv"), &header, rows)?;
    m.output(
        "coulomb_elements.csv",
        "Monte Carlo Coulomb superoperator elements",
        n,
    );
    Ok(())
}

fn evolve(cfg: &ScenarioConfig, m: &mut RunManifest, dir: &Path) -> Result<(), CliError> {
    let c = &cfg.evolve;
    let v = c.potential.polynomial()?;
    let grid = SuperGrid::centered(c.grid.half_width, c.grid.points)?;
    let l = GridLiouvillian::new(&v, grid, c.kind, c.mass, c.hbar)?;
    let g = c.initial;
    let mut rho0 =
        SuperDensity::classical_gaussian(grid, c.hbar, c.mass, g.x0, g.p0, g.sigma_x, g.sigma_p);
    let tr = rho0.trace_complex();
    rho0.values /= tr;
    let ecfg = EvolutionConfig {
        t0: 0.0,
        t1: c.t,
        n_steps: c.steps,
        method: c.method,
        hbar: c.hbar,
        mass: c.mass,
    };

    let rows = m.time("moments", || moment_series(&l, &rho0, &ecfg, c.every))?;
    let header = [
        "t [time]",
        "trace [1]",
        "x [length]",
        "p [momentum]",
        "x2 [length^2]",
        "purity [1/length]",
        "hermiticity [1/length]",
    ];
    let records = rows.iter().map(|r| {
        vec![
            num(r.t),
            num(r.trace),
            num(r.x),
            num(r.p),
            num(r.x2),
            num(r.purity),
            num(r.hermiticity),
        ]
    });
    let n = write_csv(&dir.join("moments.csv"), &header, records)?;
    m.output("moments.csv", "moment time series", n);

    let trace_err = rows
        .iter()
        .map(|r| (r.trace - 1.0).abs())
        .fold(0.0, f64::max);
    let herm = rows.iter().map(|r| r.hermiticity).fold(0.0, f64::max);
    m.checks.push(CheckRecord::below(
        "trace-conservation",
        trace_err,
        CONSERVATION_TOL,
    ));
    m.checks
        .push(CheckRecord::below("hermiticity", herm, CONSERVATION_TOL));

    let last = m.time("final-state", || evolve_grid(&l, &rho0, &ecfg))?;
    let (b0, b1) = (rho0.boundary_mass(2), last.boundary_mass(2));
    if b1 > 1e-10 {
        log::warn!("boundary mass {b1:.3e} at t = {}: enlarge the grid", c.t);
    }
    m.boundary = Some(format!(
        "periodic truncation; boundary mass {b0:.3e} initial, {b1:.3e} final"
    ));
    if c.density {
        last.write_csv(&dir.join("density.csv"))?;
        m.output("density.csv", "final density matrix rho(Q,q)", grid.n);
        m.output("density.json", "grid sidecar for density.csv", 0);
    }
    Ok(())
}

fn propagator(cfg: &ScenarioConfig, m: &mut RunManifest, dir: &Path) -> Result<(), CliError> {
    let c = &cfg.propagator;
    let pts: Vec<PropagatorPoint> = c
        .points
        .iter()
        .map(|&[qf, sf, qi, si]| PropagatorPoint {
            mass: c.mass,
            hbar: c.hbar,
            ..PropagatorPoint::new(qf, sf, qi, si, c.t)
        })
        .collect();
    let table = m.time("table", || {
        propagator_table(&pts, c.lambda, DysonQuadrature::default())
    })?;
    let mut worst = 0.0_f64;
    let rows = table.iter().map(|r| {
        let p = r.point;
        let scale = (r.g_cl - r.g0).norm().max((r.g_qm - r.g0).norm());
        worst = worst.max(r.abs_error / scale.max(1e-300));
        let mut row = vec![
            num(p.big_q_f),
            num(p.small_q_f),
            num(p.big_q_i),
            num(p.small_q_i),
            num(p.t),
        ];
        for z in [
            r.g0,
            r.gamma_qm,
            r.gamma_cl,
            r.g_cl,
            r.g_qm,
            r.numeric_cl,
            r.numeric_qm,
        ] {
            row.extend(cplx(z));
        }
        row.push(num(r.abs_error));
        row
    });
    let mut header = vec![
        "Q_f [length]",
        "q_f [length]",
        "Q_i [length]",
        "q_i [length]",
        "T [time]",
    ];
    header.extend([
        "g0_re [1/length^2]",
        "g0_im [1/length^2]",
        "gamma_qm_re",
        "gamma_qm_im",
        "gamma_cl_re",
        "gamma_cl_im",
        "g_cl_re [1/length^2]",
        "g_cl_im [1/length^2]",
        "g_qm_re [1/length^2]",
        "g_qm_im [1/length^2]",
        "numeric_cl_re [1/length^2]",
        "numeric_cl_im [1/length^2]",
        "numeric_qm_re [1/length^2]",
        "numeric_qm_im [1/length^2]",
        "abs_error [1/length^2]",
    ]);
    let n = write_csv(
        &dir.join("propagator.csv"),
        &header,
        rows.collect::<Vec<_>>(),
    )?;
    m.output(
        "propagator.csv",
        "free and first-order superpropagators with numeric Dyson terms",
        n,
    );
    m.checks.push(
        CheckRecord::below("first-order-vs-dyson", worst, c.rel_tol)
            .with_detail("max relative error of the first-order term"),
    );
    Ok(())
}

fn jc(cfg: &ScenarioConfig, m: &mut RunManifest, dir: &Path) -> Result<(), CliError> {
    let c = &cfg.jc;
    let p = JCParams::new(c.omega_e, c.omega, c.d, c.n_max).with_eps(C64::new(c.eps[0], c.eps[1]));
    let init: InitialState = c.init.parse()?;
    let rho0 = JCDensity::initial(init, c.n_max)?;
    let times = linspace(c.t_max.unwrap_or(std::f64::consts::PI / c.d), c.t_steps);
    let rows = m.time("evolve", || jc_report(&p, &rho0, &times))?;
    let header = [
        "t [time]",
        "p_e [1]",
        "abs_rho_eg00 [1]",
        "trace [1]",
        "purity [1]",
    ];
    let records = rows.iter().map(|r| {
        vec![
            num(r.t),
            num(r.p_e),
            num(r.coherence_00),
            num(r.trace),
            num(r.purity),
        ]
    });
    let n = write_csv(&dir.join("jc.csv"), &header, records)?;
    m.output("jc.csv", "atom-field time series", n);

    let trace_err = rows
        .iter()
        .map(|r| (r.trace - 1.0).abs())
        .fold(0.0, f64::max);
    m.checks.push(CheckRecord::below(
        "trace-conservation",
        trace_err,
        CONSERVATION_TOL,
    ));
    if c.eps == [0.0, 0.0] && init == InitialState::Excited(0) && c.omega_e == c.omega {
        let dev = rows
            .iter()
            .map(|r| (r.p_e - (c.d * r.t).cos().powi(2)).abs())
            .fold(0.0, f64::max);
        m.checks.push(
            CheckRecord::below("vacuum-rabi", dev, 1e-6).with_detail("max |P_e - cos^2(d t)|"),
        );
    }
    Ok(())
}

fn bipartite(cfg: &ScenarioConfig, m: &mut RunManifest, dir: &Path) -> Result<(), CliError> {
    let c = &cfg.bipartite;
    let basis = BipartiteBasis::new(c.n_levels, c.omega);
    let rho0 = BipartiteDensity::coherent(c.n_levels, c.alpha1, c.alpha2)?;
    let times = linspace(c.t_max, c.t_steps);
    let rows = m.time("evolve", || {
        compare_cl_qm_entanglement(&basis, c.lambda, &rho0, &times)
    })?;
    let header = [
        "t [time]",
        "purity_cl [1]",
        "purity_qm [1]",
        "purity_diff [1]",
        "min_eig_cl [1]",
        "min_eig_qm [1]",
        "trace_drift [1]",
        "hermiticity [1]",
    ];
    let records = rows.iter().map(|r| {
        vec![
            num(r.t),
            num(r.purity_cl),
            num(r.purity_qm),
            num(r.purity_cl - r.purity_qm),
            num(r.min_eig_cl),
            num(r.min_eig_qm),
            num(r.trace_drift),
            num(r.hermiticity),
        ]
    });
    let n = write_csv(&dir.join("bipartite.csv"), &header, records)?;
    m.output(
        "bipartite.csv",
        "reduced purity and minimum eigenvalue, CL and QM",
        n,
    );
    let drift = rows.iter().map(|r| r.trace_drift).fold(0.0, f64::max);
    let herm = rows.iter().map(|r| r.hermiticity).fold(0.0, f64::max);
    m.checks.push(CheckRecord::below(
        "trace-conservation",
        drift,
        CONSERVATION_TOL,
    ));
    m.checks
        .push(CheckRecord::below("hermiticity", herm, CONSERVATION_TOL));

    let audit = m.time("audit", || {
        audit_generator_difference(&BipartiteBasis::new(c.audit_levels, c.omega), c.lambda)
    })?;
    let path = dir.join("audit.json");
    let text =
        serde_json::to_string_pretty(&audit).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    m.output(
        "audit.json",
        "CL - QM generator audit against the classified expansion",
        1,
    );
    m.checks.push(
        CheckRecord::below("generator-decomposition", audit.corrected_residual, 1e-10).with_detail(
            format!("mixed-only residual {:.3e}", audit.literal_residual),
        ),
    );
    Ok(())
}

pub fn check_names() -> Vec<&'static str> {
    checks::catalog()
        .into_iter()
        .map(|(name, _)| name)
        .collect()
}

fn validate(cfg: &ScenarioConfig, m: &mut RunManifest, dir: &Path) -> Result<(), CliError> {
    let names = check_names();
    if let Some(bad) = cfg
        .validate
        .only
        .iter()
        .find(|n| !names.contains(&n.as_str()))
    {
        return Err(CliError::Config(format!(
            "unknown check `{bad}` (known: {})",
            names.join(", ")
        )));
    }
    let selected: Vec<_> = checks::catalog()
        .into_iter()
        .filter(|(name, _)| {
            cfg.validate.only.is_empty() || cfg.validate.only.iter().any(|o| o == name)
        })
        .collect();
    let outcomes: Vec<CheckOutcome> = m.time("checks", || {
        selected
            .par_iter()
            .map(|&(name, f)| {
                f().unwrap_or_else(|e| CheckOutcome {
                    name,
                    passed: false,
                    value: f64::NAN,
                    threshold: f64::NAN,
                    detail: e.to_string(),
                })
            })
            .collect()
    });
    for o in &outcomes {
        println!(
            "{} {} value={:.3e} threshold={:.1e} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.value,
            o.threshold,
            o.detail
        );
    }
    let header = ["name", "passed", "value", "threshold", "detail"];
    let records = outcomes.iter().map(|o| {
        vec![
            o.name.to_string(),
            o.passed.to_string(),
            num(o.value),
            num(o.threshold),
            o.detail.clone(),
        ]
    });
    let n = write_csv(&dir.join("checks.csv"), &header, records)?;
    m.output("checks.csv", "invariant suite results", n);
    m.checks.extend(outcomes.into_iter().map(|o| CheckRecord {
        name: o.name.into(),
        passed: o.passed,
        value: o.value,
        threshold: o.threshold,
        detail: o.detail,
    }));
    Ok(())
}

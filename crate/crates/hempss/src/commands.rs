//! Subcommands. Each returns the files to write and a short report; nothing
//! here touches the filesystem, so outputs can be compared in memory.

use std::fmt::Write as _;

use hempss_core::canonical::{tanh_r_rhs, validate, CanonicalParams, TanhR};
use hempss_core::fock::{pnd_of_state, FockCutoff};
use hempss_core::hamiltonian::{generic_coefficients, CANONICAL_TOL};
use hempss_core::oracle::{joint_eigenstate, unitary_against};
use hempss_core::processes::{enumerate_orders, match_couplings, pump_design, EnumerateOptions, PumpDesign, PumpSet};
use hempss_core::states::{eval_coordinate_wavefunction, eval_entangled_wavefunction, HeterodynePoint};
use hempss_core::statistics::{
    fock_amplitudes, fock_amplitudes_rows, gamma_sweep_points, moments, normalized_wave_params, pnd_auto_with,
    pnd_with, theta_sweep_points, Moments, PndGrid, QuadratureConfig, SWEEP_N_CAP,
};
use hempss_core::{WaveParams, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{missing, GridKind, RunConfig};
use crate::error::CliError;
use crate::format::{
    coefficients_json, param_fields, pnd_table, sig12, to_json, CsvTable, OracleDump, TermRecord, PARAM_COLUMNS,
};

/// Default threshold of `oracle-check` on `max |ΔP|`.
pub const ORACLE_TOL: f64 = 1e-6;
pub const ORACLE_CUTOFF: usize = 40;
pub const COMPARE_N_MAX: usize = 12;
/// Kerr-ratio tolerance used when couplings are matched.
pub const KERR_RATIO_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Coeffs,
    Pnd,
    Moments,
    G2,
    SweepGamma,
    SweepTheta,
    StateEval,
    OracleCheck,
    DesignPumps,
    EnumerateTerms,
}

/// Files to write (name, contents), text for stdout, and whether the run
/// met its own pass condition.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<(String, Vec<u8>)>,
    pub stdout: String,
    pub success: bool,
}

impl Report {
    fn ok(stdout: String) -> Self {
        Self { files: Vec::new(), stdout, success: true }
    }

    fn file(mut self, name: &str, contents: impl Into<Vec<u8>>) -> Self {
        self.files.push((name.into(), contents.into()));
        self
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    /// Overrides `tol` from the config.
    pub tol: Option<f64>,
    /// Print JSON instead of text where a command supports both.
    pub json: bool,
}

pub fn run(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    let tol = opts.tol.or(cfg.tol);
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
        }
    }
    match cmd {
        Command::Validate => cmd_validate(cfg, tol, opts.json),
        Command::Coeffs => cmd_coeffs(cfg),
        Command::Pnd => cmd_pnd(cfg),
        Command::Moments => cmd_moments(cfg, false),
        Command::G2 => cmd_moments(cfg, true),
        Command::SweepGamma => cmd_sweep_gamma(cfg),
        Command::SweepTheta => cmd_sweep_theta(cfg),
        Command::StateEval => cmd_state_eval(cfg),
        Command::OracleCheck => cmd_oracle_check(cfg, tol),
        Command::DesignPumps => cmd_design_pumps(cfg),
        Command::EnumerateTerms => cmd_enumerate_terms(cfg, tol),
    }
}

/// [`fock_amplitudes`] with rows split over the current rayon pool. Each
/// entry is computed exactly as in the serial version, so the result does
/// not depend on the thread count.
pub fn par_fock_amplitudes(
    w: &WaveParams,
    p: &CanonicalParams,
    n_max: usize,
    q: &QuadratureConfig,
) -> hempss_core::Result<Vec<C64>> {
    let nn = n_max + 1;
    let threads = rayon::current_num_threads();
    if threads <= 1 {
        return fock_amplitudes(w, p, n_max, q);
    }
    let chunk = nn.div_ceil(threads);
    let starts: Vec<usize> = (0..nn).step_by(chunk).collect();
    let parts: Vec<_> =
        starts.into_par_iter().map(|s| fock_amplitudes_rows(w, p, n_max, q, s..(s + chunk).min(nn))).collect();
    let mut out = Vec::with_capacity(nn * nn);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

fn tanh_text(t: TanhR) -> String {
    match t {
        TanhR::Value { value, physical } => {
            format!("{}{}", sig12(value), if physical { "" } else { " (unphysical, |value| > 1)" })
        }
        TanhR::Degenerate => "degenerate (r free)".into(),
        TanhR::Infinite => "infinite (r = inf)".into(),
    }
}

#[derive(Serialize)]
struct ValidationJson {
    pass: bool,
    tol: f64,
    branch: Option<String>,
    in_domain: bool,
    linear_residual: f64,
    alpha_beta_residual: f64,
    nonlinear_residual: [f64; 2],
    nonlinear_residual_modulus: f64,
    imaginary_condition: f64,
    tanh_r: String,
}

fn cmd_validate(cfg: &RunConfig, tol: Option<f64>, json: bool) -> Result<Report, CliError> {
    let p = cfg.params()?;
    let tol = tol.unwrap_or(CANONICAL_TOL);
    let rep = validate(&p, tol);
    let res = hempss_core::canonical::residual_nlcc1(&p);
    let v = ValidationJson {
        pass: rep.pass,
        tol,
        branch: rep.branch.map(|b| b.to_string()),
        in_domain: rep.in_domain,
        linear_residual: rep.linear_residual,
        alpha_beta_residual: rep.alpha_beta_residual,
        nonlinear_residual: [res.re, res.im],
        nonlinear_residual_modulus: rep.nlcc1_residual,
        imaginary_condition: rep.imag_condition,
        tanh_r: tanh_text(tanh_r_rhs(&p)),
    };
    let js = to_json(&v);
    let stdout = if json {
        js.clone()
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "branch: {}", v.branch.as_deref().unwrap_or("none"));
        if !rep.in_domain {
            let _ = writeln!(s, "parameters out of domain: moduli must be non-negative and finite");
        }
        let _ = writeln!(s, "linear residual: {:.3e}", v.linear_residual);
        let _ = writeln!(s, "alpha-beta residual: {:.3e}", v.alpha_beta_residual);
        let _ = writeln!(s, "nonlinear residual: {:.3e} ({:.6e}, {:.6e})", v.nonlinear_residual_modulus, res.re, res.im);
        let _ = writeln!(s, "imaginary-part condition: {:.3e}", v.imaginary_condition);
        let _ = writeln!(s, "tanh r: {}", v.tanh_r);
        let _ = writeln!(s, "{} (tol {:.1e})", if rep.pass { "PASS" } else { "FAIL" }, tol);
        s
    };
    Ok(Report { files: vec![("validation.json".into(), js.into_bytes())], stdout, success: rep.pass })
}

fn cmd_coeffs(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = generic_coefficients(&cfg.params()?)?;
    let js = coefficients_json(&c);
    Ok(Report::ok(js.clone()).file("coefficients.json", js))
}

fn wave(cfg: &RunConfig) -> Result<(CanonicalParams, C64, C64, WaveParams), CliError> {
    let p = cfg.params()?;
    let (b1, b2) = cfg.betas();
    let w = normalized_wave_params(&p, b1, b2)?;
    Ok((p, b1, b2, w))
}

/// PND at a fixed `n_max` when configured, otherwise sized automatically.
fn compute_pnd(cfg: &RunConfig, p: &CanonicalParams, w: &WaveParams) -> Result<PndGrid, CliError> {
    if let Some(q) = &cfg.quadrature {
        q.check()?;
    }
    let g = match cfg.n_max {
        Some(n) => {
            let q = cfg.quadrature.unwrap_or_else(|| QuadratureConfig::for_state(w));
            pnd_with(w, p, n, &q, &par_fock_amplitudes)?
        }
        None => pnd_auto_with(w, p, cfg.n_cap.unwrap_or(SWEEP_N_CAP), &par_fock_amplitudes)?,
    };
    Ok(g)
}

fn cmd_pnd(cfg: &RunConfig) -> Result<Report, CliError> {
    let (p, b1, b2, w) = wave(cfg)?;
    let g = compute_pnd(cfg, &p, &w)?;
    let t = pnd_table(param_fields(&p, b1, b2), &g);
    let stdout = format!(
        "n_max {}, sum P {}, convergence {:.1e}\n",
        g.n_max,
        sig12(g.total_mass),
        g.convergence_estimate
    );
    Ok(Report::ok(stdout).file("pnd.csv", t.to_bytes()))
}

const MOMENT_COLUMNS: [&str; 7] = ["n_max", "total_mass", "mean_n1", "mean_n2", "mean_n1n2", "g2", "status"];

fn moment_row(p: &CanonicalParams, b1: C64, b2: C64, r: &hempss_core::Result<(Moments, PndGrid)>) -> Vec<String> {
    let mut row: Vec<String> = param_fields(p, b1, b2).into_iter().map(|(_, v)| v).collect();
    match r {
        Ok((m, g)) => row.extend([
            g.n_max.to_string(),
            sig12(g.total_mass),
            sig12(m.mean_n1),
            sig12(m.mean_n2),
            sig12(m.mean_n1n2),
            sig12(m.g2_cross),
            "ok".into(),
        ]),
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), MOMENT_COLUMNS.len() - 1));
            row.push(e.to_string());
        }
    }
    row
}

fn moment_header() -> Vec<&'static str> {
    PARAM_COLUMNS.iter().chain(MOMENT_COLUMNS.iter()).copied().collect()
}

fn cmd_moments(cfg: &RunConfig, g2_only: bool) -> Result<Report, CliError> {
    let (p, b1, b2, w) = wave(cfg)?;
    let g = compute_pnd(cfg, &p, &w)?;
    let m = moments(&g)?;
    let params = param_fields(&p, b1, b2);
    let (name, stdout, t) = if g2_only {
        let mut t = CsvTable::new(params, &["mean_n1n2", "g2"]);
        t.push(vec![sig12(m.mean_n1n2), sig12(m.g2_cross)]);
        ("g2.csv", format!("g2 {}\n", sig12(m.g2_cross)), t)
    } else {
        let mut t = CsvTable::new(params, &moment_header());
        t.push(moment_row(&p, b1, b2, &Ok((m, g))));
        let s = format!(
            "mean_n1 {}, mean_n2 {}, g2 {}\n",
            sig12(m.mean_n1),
            sig12(m.mean_n2),
            sig12(m.g2_cross)
        );
        ("moments.csv", s, t)
    };
    Ok(Report::ok(stdout).file(name, t.to_bytes()))
}

/// One sweep point per rayon task, rows in input order.
fn sweep(cfg: &RunConfig, points: &[CanonicalParams], name: &str, swept: &str) -> Result<Report, CliError> {
    let (b1, b2) = cfg.betas();
    let cap = cfg.n_cap.unwrap_or(SWEEP_N_CAP);
    let results: Vec<_> = points
        .par_iter()
        .map(|p| {
            normalized_wave_params(p, b1, b2).and_then(|w| {
                let g = pnd_auto_with(&w, p, cap, &fock_amplitudes)?;
                Ok((moments(&g)?, g))
            })
        })
        .collect();
    let template = cfg.params()?;
    let mut params = param_fields(&template, b1, b2);
    params.push(("swept".into(), swept.into()));
    let mut t = CsvTable::new(params, &moment_header());
    let mut failed = 0;
    for (p, r) in points.iter().zip(&results) {
        failed += r.is_err() as usize;
        t.push(moment_row(p, b1, b2, r));
    }
    let stdout = format!("{} points, {} failed\n", points.len(), failed);
    Ok(Report { files: vec![(name.into(), t.to_bytes())], stdout, success: failed == 0 })
}

fn cmd_sweep_gamma(cfg: &RunConfig) -> Result<Report, CliError> {
    let gammas = cfg.gammas.as_ref().ok_or_else(|| missing("gammas"))?;
    let points = gamma_sweep_points(&cfg.params()?, gammas);
    sweep(cfg, &points, "sweep_gamma.csv", "gamma_mod")
}

fn cmd_sweep_theta(cfg: &RunConfig) -> Result<Report, CliError> {
    let t1 = cfg.theta1.as_ref().ok_or_else(|| missing("theta1"))?;
    let t2 = cfg.theta2.as_ref().ok_or_else(|| missing("theta2"))?;
    let points = theta_sweep_points(&cfg.params()?, t1, t2);
    sweep(cfg, &points, "sweep_theta.csv", "theta1,theta2")
}

fn cmd_state_eval(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid = cfg.grid.ok_or_else(|| missing("grid"))?;
    if grid.points == 0 || !(grid.max >= grid.min) {
        return Err(CliError::Usage("grid needs points > 0 and max >= min".into()));
    }
    let (p, b1, b2, w) = wave(cfg)?;
    let q = cfg.quadrature.unwrap_or_default();
    let axis = grid.axis();
    let rows: Vec<hempss_core::Result<Vec<C64>>> = axis
        .par_iter()
        .map(|&u| {
            axis.iter()
                .map(|&v| match grid.kind {
                    GridKind::Heterodyne => eval_entangled_wavefunction(&w, HeterodynePoint::new(u, v)),
                    GridKind::Coordinate => eval_coordinate_wavefunction(&w, u, v, &q),
                })
                .collect()
        })
        .collect();
    let cols = match grid.kind {
        GridKind::Heterodyne => ["z1", "z2", "re_psi", "im_psi"],
        GridKind::Coordinate => ["x1", "x2", "re_psi", "im_psi"],
    };
    let mut t = CsvTable::new(param_fields(&p, b1, b2), &cols);
    for (&u, row) in axis.iter().zip(rows) {
        for (&v, psi) in axis.iter().zip(row?) {
            t.push(vec![sig12(u), sig12(v), sig12(psi.re), sig12(psi.im)]);
        }
    }
    let stdout = format!("{} points\n", t.rows.len());
    Ok(Report::ok(stdout).file("psi.csv", t.to_bytes()))
}

#[derive(Serialize)]
struct OracleCheckJson {
    pass: bool,
    tol: f64,
    max_diff: f64,
    compare_n_max: usize,
    quadrature_n_max: usize,
    quadrature_mass: f64,
    residual1: f64,
    residual2: f64,
    fidelity: Option<f64>,
}

fn cmd_oracle_check(cfg: &RunConfig, tol: Option<f64>) -> Result<Report, CliError> {
    let (p, b1, b2, w) = wave(cfg)?;
    let tol = tol.unwrap_or(ORACLE_TOL);
    let [c1, c2] = cfg.cutoff.unwrap_or([ORACLE_CUTOFF; 2]);
    let cutoff = FockCutoff::new(c1, c2)?;
    let mut eig = joint_eigenstate(&p, b1, b2, cutoff)?;
    if p.order == 2 {
        eig.fidelity_vs_other_route = unitary_against(&p, b1, b2, &eig)?.fidelity_vs_other_route;
    }
    let grid = compute_pnd(cfg, &p, &w)?;
    let k = cfg.compare_n_max.unwrap_or(COMPARE_N_MAX).min(grid.n_max).min(c1.min(c2));
    let diff = pnd_of_state(&eig.state)?.truncated(k).max_abs_diff(&grid.truncated(k));
    let f = eig.fidelity_vs_other_route;
    let rep = OracleCheckJson {
        pass: diff < tol,
        tol,
        max_diff: diff,
        compare_n_max: k,
        quadrature_n_max: grid.n_max,
        quadrature_mass: grid.total_mass,
        residual1: eig.residual1,
        residual2: eig.residual2,
        fidelity: f.is_finite().then_some(f),
    };
    let mut stdout = format!(
        "max |dP| {:.3e} over n1, n2 <= {k} (tol {tol:.1e}); sum P {}; residuals {:.1e}, {:.1e}",
        diff,
        sig12(grid.total_mass),
        eig.residual1,
        eig.residual2
    );
    if let Some(f) = rep.fidelity {
        let _ = write!(stdout, "; unitary fidelity {}", sig12(f));
    }
    stdout.push_str(if rep.pass { "\nPASS\n" } else { "\nFAIL\n" });
    Ok(Report {
        files: vec![
            ("oracle.json".into(), to_json(&OracleDump::new(&eig)).into_bytes()),
            ("oracle_check.json".into(), to_json(&rep).into_bytes()),
        ],
        stdout,
        success: rep.pass,
    })
}

fn pumps(cfg: &RunConfig) -> Result<(PumpDesign, (f64, f64), PumpSet), CliError> {
    let design = cfg.design.unwrap_or(PumpDesign::FourPhoton);
    let (w1, w2) = cfg.omega()?;
    let set = pump_design(design, w1, w2, cfg.fractions.as_deref())?;
    Ok((design, (w1, w2), set))
}

#[derive(Serialize)]
struct DesignJson<'a> {
    design: PumpDesign,
    omega: [f64; 2],
    sums: Vec<f64>,
    fractions: Vec<f64>,
    #[serde(flatten)]
    set: &'a PumpSet,
}

fn cmd_design_pumps(cfg: &RunConfig) -> Result<Report, CliError> {
    let (design, (w1, w2), set) = pumps(cfg)?;
    let d = DesignJson {
        design,
        omega: [w1, w2],
        sums: set.pairs.iter().map(|p| p.sum).collect(),
        fractions: set.pairs.iter().map(|p| p.fraction).collect(),
        set: &set,
    };
    let mut stdout = String::new();
    for (k, pair) in set.pairs.iter().enumerate() {
        let _ = writeln!(
            stdout,
            "pair {}: Omega{} + Omega{} = {} (fraction {})",
            k + 1,
            pair.first + 1,
            pair.second + 1,
            sig12(pair.sum),
            sig12(pair.fraction)
        );
    }
    Ok(Report::ok(stdout).file("pumps.json", to_json(&d)))
}

fn cmd_enumerate_terms(cfg: &RunConfig, tol: Option<f64>) -> Result<Report, CliError> {
    let (_, omega, set) = pumps(cfg)?;
    let defaults = EnumerateOptions::default();
    let opts = EnumerateOptions {
        max_mode_exponent: cfg.max_mode_exponent.unwrap_or(defaults.max_mode_exponent),
        tol,
        include_kerr: cfg.include_kerr.unwrap_or(defaults.include_kerr),
    };
    let orders = cfg.orders.clone().unwrap_or_else(|| vec![2, 3, 4, 5]);
    let terms = enumerate_orders(&orders, omega, &set, &opts)?;
    let records: Vec<TermRecord> = terms.iter().map(TermRecord::from).collect();
    let mut stdout = format!("{} terms\n", records.len());
    let mut report = Report::ok(String::new()).file("terms.json", to_json(&records));
    if let Some(p) = cfg.params {
        let target = generic_coefficients(&p)?;
        let a = match_couplings(&target, &terms, KERR_RATIO_TOL)?;
        let _ = writeln!(stdout, "{} couplings matched", a.entries.len());
        if let Some(k) = &a.kerr {
            let _ = writeln!(
                stdout,
                "Kerr ratio {} (expected {}, {})",
                sig12(k.self_over_cross),
                sig12(k.expected),
                if k.consistent { "consistent" } else { "inconsistent" }
            );
        }
        report = report.file("couplings.json", to_json(&a));
    }
    report.stdout = stdout;
    Ok(report)
}

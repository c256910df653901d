//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hempss_core::canonical::{residual_nlcc1, CanonicalBranch, CanonicalParams};
use hempss_core::fock::{pnd_of_state, FockCutoff};
use hempss_core::hamiltonian::{
    build_transformed_modes, generic_coefficients, identity_residual, specialized_coefficients,
};
use hempss_core::oracle::{
    cubic_generator_heterodyne, cubic_generator_rotated, joint_eigenstate, unitary_against, CONVENTION,
};
use hempss_core::processes::{
    enumerate_orders, pump_design_four_photon, pump_design_hempss, splitting_conditions, EnumerateOptions,
};
use hempss_core::states::{
    delta, delta_exponential_form, eval_coordinate_wavefunction, eval_cubic_closed_form, normalize,
    normalize_analytic, wave_params, xi_complex,
};
use hempss_core::statistics::{evaluate_point, moments, pnd_auto, sweep_gamma, sweep_theta, QuadratureConfig};
use hempss_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, detail: String) -> Outcome {
    Outcome { pass: cond, detail }
}

fn acceptance_set(gamma: f64) -> CanonicalParams {
    CanonicalParams::new(0.8, 0.0, gamma, gamma, PI, 0.0, 0.0, 0.0, 2)
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn within(t: Duration, limit: f64) -> bool {
    t.as_secs_f64() < limit
}

fn canonical_residual() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for branch in [CanonicalBranch::DeltaZero_ThetaPi, CanonicalBranch::DeltaPi_ThetaZero] {
        for _ in 0..1000 {
            let p = CanonicalParams::on_branch(
                branch,
                rng.gen_range(0.0..=2.0),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..=0.5),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..2.0 * PI),
                2,
            );
            worst = worst.max(residual_nlcc1(&p).norm());
        }
    }
    let t = start.elapsed();
    check(worst < 1e-12 && within(t, 1.0), format!("max residual {worst:.2e} in {t:.2?}"))
}

fn commutators() -> Outcome {
    let start = Instant::now();
    let m = match build_transformed_modes(&acceptance_set(0.1), FockCutoff::square(30).unwrap()) {
        Ok(m) => m,
        Err(e) => return check(false, e.to_string()),
    };
    let r = m.commutator_residuals(22).unwrap();
    let t = start.elapsed();
    check(
        r.max() < 1e-10 && within(t, 30.0),
        format!(
            "[b1,b1†]-I {:.1e}, [b2,b2†]-I {:.1e}, [b1,b2] {:.1e}, [b1,b2†] {:.1e} in {t:.2?}",
            r.b1_b1dag, r.b2_b2dag, r.b1_b2, r.b1_b2dag
        ),
    )
}

fn diagonalization() -> Outcome {
    let start = Instant::now();
    let p = acceptance_set(0.1);
    let cutoff = FockCutoff::square(30).unwrap();
    let m = build_transformed_modes(&p, cutoff).unwrap();
    let res = identity_residual(&m, &generic_coefficients(&p).unwrap(), 22).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut diff: f64 = 0.0;
    for _ in 0..200 {
        let q = CanonicalParams::on_branch(
            CanonicalBranch::DeltaZero_ThetaPi,
            rng.gen_range(0.0..=2.0),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..=0.5),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..2.0 * PI),
            2,
        );
        diff = diff.max(generic_coefficients(&q).unwrap().max_diff(&specialized_coefficients(&q).unwrap()));
    }
    let t = start.elapsed();
    check(
        res < 1e-10 && diff < 1e-12 && within(t, 30.0),
        format!("identity residual {res:.1e}, generic vs specialized {diff:.1e} in {t:.2?}"),
    )
}

fn normalized(p: &CanonicalParams, b1: C64, b2: C64) -> hempss_core::WaveParams {
    let w = wave_params(p, b1, b2).unwrap();
    normalize_analytic(&w).unwrap_or_else(|| normalize(&w, &QuadratureConfig::for_state(&w)).unwrap())
}

fn cross_pipeline() -> Outcome {
    let start = Instant::now();
    let p = acceptance_set(0.1);
    let b = c(1.0);
    let oracle = match joint_eigenstate(&p, b, b, FockCutoff::square(40).unwrap()) {
        Ok(o) => o,
        Err(e) => return check(false, format!("oracle: {e}")),
    };
    let grid = match pnd_auto(&normalized(&p, b, b), &p, 120) {
        Ok(g) => g,
        Err(e) => return check(false, format!("quadrature: {e}")),
    };
    let diff = pnd_of_state(&oracle.state).unwrap().truncated(12).max_abs_diff(&grid.truncated(12));
    let mass = grid.total_mass;
    let t = start.elapsed();
    check(
        diff < 1e-6 && (mass - 1.0).abs() < 1e-6 && within(t, 120.0),
        format!(
            "max|dP| {diff:.1e}, sum P {mass:.9}, oracle residual {:.1e} (full {:.1e}) in {t:.2?}",
            oracle.residual1.max(oracle.residual2),
            oracle.full_residual1.max(oracle.full_residual2)
        ),
    )
}

fn analytic_limit() -> Outcome {
    let p = acceptance_set(0.0);
    let z = c(0.0);
    let r: f64 = 0.8;
    let th2 = r.tanh().powi(2);
    let p00 = 1.0 / r.cosh().powi(2);
    let p11 = p00 * th2;
    let nbar = r.sinh().powi(2);
    let g2 = 2.0 + 1.0 / nbar;
    // rounded reference decimals, reported only: they sit up to 4e-6 from
    // the series and cannot carry the 1e-9 tolerance
    let literal_gap = [(p00, 0.5590551), (p11, 0.2465130), (nbar, 0.7887285), (g2, 3.2678700)]
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let o = pnd_of_state(&joint_eigenstate(&p, z, z, FockCutoff::square(40).unwrap()).unwrap().state).unwrap();
    let q = pnd_auto(&normalized(&p, z, z), &p, 120).unwrap();
    let m = moments(&q).unwrap();
    let e_o = (o.get(0, 0) - p00).abs().max((o.get(1, 1) - p11).abs());
    let e_q = (q.get(0, 0) - p00).abs().max((q.get(1, 1) - p11).abs());
    let off = o.max_off_diagonal().max(q.max_off_diagonal());
    let en = (m.mean_n1 - nbar).abs().max((m.mean_n2 - nbar).abs());
    let eg = (m.g2_cross - g2).abs();
    check(
        e_o < 1e-9 && e_q < 1e-6 && off < 1e-8 && en < 1e-6 && eg < 1e-4,
        format!(
            "vs series: oracle {e_o:.1e}, quadrature {e_q:.1e}, off-diagonal {off:.1e}, <n> {en:.1e}, g2 {eg:.1e} \
             (rounded reference decimals off by up to {literal_gap:.1e})"
        ),
    )
}

fn symmetry() -> Outcome {
    let b = c(3.0);
    let sym = CanonicalParams::new(0.8, 0.0, 0.1, 0.1, FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 2);
    let (_, g) = match evaluate_point(&sym, b, b) {
        Ok(x) => x,
        Err(e) => return check(false, e.to_string()),
    };
    let asym = g.asymmetry();
    let (m, _) = match evaluate_point(&acceptance_set(0.1), b, b) {
        Ok(x) => x,
        Err(e) => return check(false, e.to_string()),
    };
    check(
        asym < 1e-8 && m.mean_n1 > m.mean_n2,
        format!("asymmetry {asym:.1e}; unbalanced <n1> {:.4} vs <n2> {:.4}", m.mean_n1, m.mean_n2),
    )
}

fn closed_form() -> Outcome {
    let (b1, b2) = (C64::new(0.6, 0.2), C64::new(-0.3, 0.4));
    let q = QuadratureConfig::default();
    let mut worst_rel: f64 = 0.0;
    let mut worst_im: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    for (branch, theta1) in [(CanonicalBranch::DeltaZero_ThetaPi, 0.3), (CanonicalBranch::DeltaPi_ThetaZero, 0.0)] {
        let p = CanonicalParams::on_branch(branch, 0.8, 0.0, 0.1, theta1 + FRAC_PI_2, theta1, 2);
        let w = normalize_analytic(&wave_params(&p, b1, b2).unwrap()).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let x1 = -1.0 + 0.5 * i as f64;
                let x2 = -0.9 + 0.6 * j as f64;
                let exact = eval_cubic_closed_form(&p, b1, b2, x1, x2).unwrap();
                let num = match eval_coordinate_wavefunction(&w, x1, x2, &q) {
                    Ok(v) => v,
                    Err(e) => return check(false, e.to_string()),
                };
                worst_rel = worst_rel.max((num - exact).norm() / exact.norm());
            }
        }
        worst_im = worst_im.max(xi_complex(&p).im.abs());
        worst_delta = worst_delta.max((delta(&p).unwrap() - delta_exponential_form(&p)).norm());
    }
    check(
        worst_rel < 1e-5 && worst_im < 1e-14 && worst_delta < 1e-12,
        format!("relative error {worst_rel:.1e}, Im Xi {worst_im:.1e}, Delta forms {worst_delta:.1e}"),
    )
}

fn unitary_route() -> Outcome {
    let p = acceptance_set(0.1);
    let b = c(1.0);
    let eig = joint_eigenstate(&p, b, b, FockCutoff::square(40).unwrap()).unwrap();
    let u = match unitary_against(&p, b, b, &eig) {
        Ok(u) => u,
        Err(e) => return check(false, e.to_string()),
    };
    let small = FockCutoff::square(30).unwrap();
    let gen = cubic_generator_rotated(&p, small, &CONVENTION)
        .unwrap()
        .max_abs_diff(&cubic_generator_heterodyne(&p, small).unwrap())
        .unwrap();
    let infid = 1.0 - u.fidelity_vs_other_route;
    check(infid < 1e-6 && gen < 1e-10, format!("1 - fidelity {infid:.1e}, generator difference {gen:.1e}"))
}

fn monotonicity() -> Outcome {
    let b = c(3.0);
    let balanced = CanonicalParams::new(0.8, 0.0, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 2);
    let gammas = [0.0, 0.05, 0.1, 0.15, 0.2];
    let rows = sweep_gamma(&balanced, b, b, &gammas);
    let mut means = Vec::new();
    let mut balance: f64 = 0.0;
    for row in &rows {
        match &row.result {
            Ok((m, _)) => {
                balance = balance.max((m.mean_n1 - m.mean_n2).abs());
                means.push(m.mean_n1);
            }
            Err(e) => return check(false, format!("gamma {}: {e}", row.params.gamma_mod)),
        }
    }
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);

    let angles: Vec<f64> = (0..9).map(|k| 2.0 * PI * k as f64 / 9.0).collect();
    let template = CanonicalParams::new(0.8, 0.0, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 2);
    let g2: Vec<f64> = sweep_theta(&template, b, b, &angles, &angles)
        .into_iter()
        .map(|r| r.result.map(|(m, _)| m.g2_cross).unwrap_or(f64::NAN))
        .collect();
    let failed = g2.iter().filter(|x| x.is_nan()).count();
    let min_g2 = g2.iter().copied().filter(|x| !x.is_nan()).fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
    check(
        balance < 1e-6 && monotone && min_g2 < 1.0 && failed == 0,
        format!(
            "<n1> = [{}], |<n1>-<n2>| {balance:.1e}; min g2 over theta grid {min_g2:.3} ({failed} failed points)",
            shown.join(", ")
        ),
    )
}

fn planner() -> Outcome {
    let start = Instant::now();
    let omega = (1.0, SQRT_2);
    let sorted = |mut v: Vec<(u32, u32, u32, u32)>| {
        v.sort();
        v
    };
    let with_kerr = EnumerateOptions { max_mode_exponent: 4, tol: None, include_kerr: true };
    let no_kerr = EnumerateOptions { include_kerr: false, ..with_kerr };
    let twelve = enumerate_orders(&[3, 4, 5], omega, &pump_design_four_photon(omega.0, omega.1).unwrap(), &with_kerr)
        .unwrap()
        .iter()
        .map(|t| t.exponents())
        .collect();
    let eight = enumerate_orders(&[3, 4, 5], omega, &pump_design_hempss(omega.0, omega.1).unwrap(), &no_kerr)
        .unwrap()
        .iter()
        .map(|t| t.exponents())
        .collect();
    let want12 = sorted(vec![
        (1, 1, 0, 0),
        (3, 0, 0, 0),
        (0, 3, 0, 0),
        (2, 2, 0, 0),
        (2, 0, 0, 1),
        (0, 2, 1, 0),
        (2, 1, 1, 0),
        (1, 2, 0, 1),
        (2, 0, 2, 0),
        (0, 2, 0, 2),
        (1, 1, 1, 1),
    ]);
    let want8 = sorted(vec![(3, 0, 0, 0), (0, 3, 0, 0), (2, 0, 0, 1), (0, 2, 1, 0)]);
    let counts: Vec<usize> = (2..=5).map(|n| splitting_conditions(n).unwrap().len()).collect();
    let ok12 = sorted(twelve) == want12;
    let ok8 = sorted(eight) == want8;
    let t = start.elapsed();
    check(
        ok12 && ok8 && counts == [1, 2, 2, 3] && within(t, 1.0),
        format!("twelve-pump {ok12}, eight-pump {ok8}, splitting counts {counts:?} in {t:.2?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("canonical residual", canonical_residual),
        ("commutator suite", commutators),
        ("diagonalization identity", diagonalization),
        ("cross-pipeline PND", cross_pipeline),
        ("analytic limit", analytic_limit),
        ("symmetry suite", symmetry),
        ("closed form vs numeric Fourier", closed_form),
        ("unitary-construction route", unitary_route),
        ("monotonicity sweep", monotonicity),
        ("process planner", planner),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome { pass: false, detail: format!("panicked: {msg}") }
        });
        if !out.pass {
            failures += 1;
        }
        println!(
            "criterion {:2} {} {}: {} [{:.1?}]",
            k + 1,
            if out.pass { "PASS" } else { "FAIL" },
            name,
            out.detail,
            start.elapsed()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

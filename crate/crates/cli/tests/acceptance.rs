//! Acceptance gate: the eleven top-level checks the laboratory must satisfy,
//! one test per criterion, each ending in a single "criterion N: PASS/FAIL"
//! line with its tolerances pinned in code. Run with `--nocapture` to see
//! the lines for passing criteria as well.

use std::f64::consts::PI;

use fhjlab::suite::{run_suite, SuiteName};
use fhjlab_core::convolution::{
    inf_convolution, lipschitz_seminorm, semiconvexity_modulus, sup_convolution, ConvolutionParam,
};
use fhjlab_core::evolve::{
    frame_lipschitz_seminorms, run_advection_diffusion, run_burgers, run_hj,
    ClosedFormHamiltonian, DriftField, SolverConfig,
};
use fhjlab_core::nonlocal::{
    adapted_kernel, extremal_minus, extremal_plus, frac_laplacian_quadrature,
    frac_laplacian_spectral, linear_operator,
};
use fhjlab_core::regularity::{
    cascade, diminish_oscillation_experiment, fit_exponent, incremental_quotient, shock_monitor,
    telescoping_bootstrap, time_degradation_scan, QuotientShift, ShockVerdict,
};
use fhjlab_core::synth::{random_drift_field, random_fourier_field, square_wave};
use fhjlab_core::{
    EllipticityBounds, FractionalOrder, Grid, KernelSpec, QuadratureScheme, ScalarField,
    TimeWindow,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid1(n: usize) -> Grid {
    Grid::new(1, n, 2.0 * PI).unwrap()
}

fn report(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Quadrature and spectral fractional Laplacians agree on smooth modes.
#[test]
fn criterion_01_operator_agreement() {
    let g = grid1(512);
    let h = g.spacing();
    let tol = 10.0 * h;
    let mut worst = 0.0f64;
    for s_val in [0.25, 0.5, 0.75] {
        let s = FractionalOrder::new(s_val).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        for k in [1.0f64, 2.0, 3.0] {
            let u = ScalarField::sample(g, |p| (k * p[0]).cos()).unwrap();
            let spec = frac_laplacian_spectral(&u, s).unwrap();
            let quad = frac_laplacian_quadrature(&u, s, &scheme).unwrap();
            for i in 0..g.len() {
                worst = worst.max((spec.value(i) - quad.value(i)).abs());
            }
        }
    }
    report(
        1,
        worst <= tol,
        &format!("max |quadrature - spectral| = {worst:.2e} <= 10h = {tol:.2e} over cos(kx), k in {{1,2,3}}, s in {{0.25, 0.5, 0.75}}"),
    );
}

/// The extremal operators sandwich every admissible linear operator with
/// zero pointwise violations, and the adapted kernel attains M+.
#[test]
fn criterion_02_extremal_sandwich() {
    let g = grid1(256);
    let bounds = EllipticityBounds::new(0.5, 2.0).unwrap();
    let scheme = QuadratureScheme::default_for(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0usize;
    let mut worst_attainment = 0.0f64;

    for f in 0..16 {
        let u = random_fourier_field(g, 100 + f, 8, 1.0).unwrap();
        let plus = extremal_plus(&u, bounds, &scheme).unwrap();
        let minus = extremal_minus(&u, bounds, &scheme).unwrap();
        for _ in 0..64 {
            // random admissible even kernel a(y) = lo + span * (1 + cos(k|y|))/2,
            // built from the canonical lattice separation so the exact
            // symmetry validation holds bitwise
            let k = rng.gen_range(1..=4) as f64;
            let w: f64 = rng.gen_range(0.0..1.0);
            let n = g.n_points();
            let values: Vec<f64> = (0..n)
                .map(|j| {
                    let y = j.min(n - j) as f64 * g.spacing();
                    0.5 + 1.5 * w * 0.5 * (1.0 + (k * y).cos())
                })
                .collect();
            let kernel = KernelSpec::from_values(g, bounds, values).unwrap();
            let la = linear_operator(&u, &kernel, &scheme).unwrap();
            for i in 0..g.len() {
                if la.value(i) < minus.value(i) || la.value(i) > plus.value(i) {
                    violations += 1;
                }
            }
        }
        // adapted kernel attains M+ at the chosen point
        for _ in 0..4 {
            let x = rng.gen_range(0..g.len());
            let ak = adapted_kernel(&u, x, bounds).unwrap();
            let la = linear_operator(&u, &ak, &scheme).unwrap();
            let rel = (la.value(x) - plus.value(x)).abs() / plus.value(x).abs().max(1e-300);
            worst_attainment = worst_attainment.max(rel);
        }
    }
    report(
        2,
        violations == 0 && worst_attainment <= 1e-12,
        &format!("sandwich violations = {violations} (required 0) over 16 fields x 64 kernels; adapted-kernel attainment error {worst_attainment:.2e} <= 1e-12"),
    );
}

/// Maximum and comparison principles over a drift-diffusion ensemble.
#[test]
fn criterion_03_max_and_comparison() {
    let g = grid1(256);
    let config = SolverConfig::new(0.8, 2.0, 8, FractionalOrder::new(0.5).unwrap()).unwrap();
    let mut worst_growth = 0.0f64;
    let mut worst_inversion = 0.0f64;
    for m in 0..32u64 {
        let u0 = random_fourier_field(g, 300 + m, 8, 1.0).unwrap();
        let drift = random_drift_field(g, 400 + m, 1.0).unwrap();
        let run = run_advection_diffusion(&u0, &drift, &config).unwrap();
        for w in 1..run.frames().len() {
            worst_growth = worst_growth.max(run.frame(w).max() - run.frame(w - 1).max());
            worst_growth = worst_growth.max(run.frame(w - 1).min() - run.frame(w).min());
        }
        if m < 16 {
            let v0 = u0.map(|v| v + 0.25).unwrap();
            let rv = run_advection_diffusion(&v0, &drift, &config).unwrap();
            for w in 0..run.frames().len() {
                for i in 0..g.len() {
                    worst_inversion =
                        worst_inversion.max(run.frame(w).value(i) - rv.frame(w).value(i));
                }
            }
        }
    }
    let tol = 1e-8;
    report(
        3,
        worst_growth <= tol && worst_inversion <= tol,
        &format!("32 runs: max-principle growth {worst_growth:.2e} <= {tol:.0e}; 16 ordered pairs: worst inversion {worst_inversion:.2e} <= {tol:.0e}"),
    );
}

/// The HJ flow does not increase the Lipschitz seminorm (up to O(h)).
#[test]
fn criterion_04_lipschitz_preservation() {
    let g = grid1(256);
    let slack = 5.0 * g.spacing();
    let ham = ClosedFormHamiltonian::half_square(16.0).unwrap();
    let config = SolverConfig::new(0.8, 2.0, 16, FractionalOrder::new(0.5).unwrap()).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for m in 0..16u64 {
        let u0 = random_fourier_field(g, 500 + m, 8, 1.0).unwrap();
        let run = run_hj(&u0, &ham, &config).unwrap();
        let norms = frame_lipschitz_seminorms(&run);
        for w in 1..norms.len() {
            worst = worst.max(norms[w] - norms[0]);
        }
    }
    report(
        4,
        worst <= slack,
        &format!("16 HJ runs with H = |p|^2/2: worst Lipschitz seminorm increase {worst:.2e} <= 5h = {slack:.2e}"),
    );
}

/// The oscillation of bounded drift-diffusion solutions diminishes over the
/// contracted cylinder for every ensemble member.
#[test]
fn criterion_05_diminish_of_oscillation() {
    let rep = diminish_oscillation_experiment(512, 32, 1.0, 1).unwrap();
    report(
        5,
        rep.min_theta > 0.01,
        &format!(
            "min theta = {:.3} over 32 members > 0.01 (cylinder radius {:.4}; note: {})",
            rep.min_theta, rep.cylinder_radius, rep.note
        ),
    );
}

/// A positive Hölder exponent is measurable from rough data under bounded
/// drift, with a consistent time degradation.
#[test]
fn criterion_06_holder_exponent() {
    let a_bound = 0.25;
    let g = grid1(2048);
    let u0 = square_wave(g, 1.0);
    let drift = random_drift_field(g, 600 ^ 17, a_bound).unwrap();
    let config = SolverConfig::new(0.8, 1.0, 8, FractionalOrder::new(0.5).unwrap()).unwrap();
    let run = run_advection_diffusion(&u0, &drift, &config).unwrap();

    let c = cascade(&run, [0.0, 0.0], 0.5, a_bound, 0.5, 4, TimeWindow::Clamp).unwrap();
    let fit = fit_exponent(&c).unwrap();

    // consistency with a single (C, alpha): seminorm(t) * t^alpha must agree
    // across times up to a factor 3
    let beta = fit.alpha.clamp(0.05, 1.0);
    let rows = time_degradation_scan(&run, &[0.25, 0.5, 1.0], beta).unwrap();
    let weighted: Vec<f64> = rows
        .iter()
        .map(|r| r.seminorm * r.t.powf(fit.alpha))
        .collect();
    let lo = weighted.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = weighted.iter().copied().fold(0.0f64, f64::max);
    let consistency = hi / lo;

    report(
        6,
        fit.alpha >= 0.2 && fit.residual <= 0.15 && consistency <= 3.0,
        &format!(
            "fitted alpha = {:.3} >= 0.2, residual = {:.3} <= 0.15, degradation consistency {:.3} <= 3 over t in {{0.25, 0.5, 1.0}}",
            fit.alpha, fit.residual, consistency
        ),
    );
}

/// Gradient regularity of an HJ solution from kinked Lipschitz data: the
/// first-order space quotient develops a positive Hölder exponent and the
/// time quotient stays uniformly bounded with a positive exponent too.
#[test]
fn criterion_07_gradient_regularity() {
    let g = grid1(4096);
    let u0 = ScalarField::sample(g, |p| p[0].sin().abs()).unwrap();
    let ham = ClosedFormHamiltonian::half_square(4.0).unwrap();
    let config = SolverConfig::new(0.8, 0.5, 64, FractionalOrder::new(0.5).unwrap()).unwrap();
    let run = run_hj(&u0, &ham, &config).unwrap();

    // v_e: first-order space quotient (the discrete derivative)
    let ve = incremental_quotient(&run, QuotientShift::Space { offset: [1, 0] }, 1.0).unwrap();
    let cv = cascade(&ve, [0.0, 0.0], 0.5, 1.0, 0.5, 4, TimeWindow::Clamp).unwrap();
    let fit_v = fit_exponent(&cv).unwrap();

    // w_h: first-order time quotient
    let wh = incremental_quotient(&run, QuotientShift::Time { stride: 1 }, 1.0).unwrap();
    let w_bound = wh
        .frames()
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0f64, f64::max);
    let t_last = *wh.times().last().unwrap();
    let cw = cascade(&wh, [0.0, 0.0], t_last, 1.0, 0.5, 4, TimeWindow::Clamp).unwrap();
    let fit_w = fit_exponent(&cw).unwrap();

    report(
        7,
        fit_v.alpha >= 0.2 && w_bound <= 50.0 && fit_w.alpha >= 0.2,
        &format!(
            "space-quotient cascade alpha = {:.3} >= 0.2; time quotient bound {:.3} <= 50 with cascade alpha = {:.3} >= 0.2",
            fit_v.alpha, w_bound, fit_w.alpha
        ),
    );
}

/// The telescoping bootstrap reaches the Lipschitz rung on diffused rough
/// data, stably under refinement.
#[test]
fn criterion_08_bootstrap_to_lipschitz() {
    let mut lips = Vec::new();
    let mut reached = true;
    for n in [512usize, 1024] {
        let g = grid1(n);
        let u0 = square_wave(g, 1.0);
        let drift = DriftField::constant(g, [0.0, 0.0], 0.0).unwrap();
        let config = SolverConfig::new(0.8, 0.5, 8, FractionalOrder::new(0.5).unwrap()).unwrap();
        let run = run_advection_diffusion(&u0, &drift, &config).unwrap();
        let rep = telescoping_bootstrap(run.frames().last().unwrap(), 0.4).unwrap();
        reached &= rep.reached_lipschitz && rep.lipschitz_seminorm.is_finite();
        lips.push(rep.lipschitz_seminorm);
    }
    let ratio = (lips[1] / lips[0]).max(lips[0] / lips[1]);
    report(
        8,
        reached && ratio <= 2.0,
        &format!(
            "Lipschitz rung reached at N = 512 ({:.3}) and N = 1024 ({:.3}); refinement ratio {ratio:.3} <= 2",
            lips[0], lips[1]
        ),
    );
}

/// Supercritical Burgers blows up, critical Burgers stays bounded, against a
/// threshold calibrated on a refined critical run.
#[test]
fn criterion_09_shock_dichotomy() {
    let v0_on = |g: Grid| ScalarField::sample(g, |p| -2.0 * p[0].sin()).unwrap();

    let calib = run_burgers(
        &v0_on(grid1(2048)),
        &SolverConfig::new(0.8, 5.0, 16, FractionalOrder::new(0.5).unwrap()).unwrap(),
    )
    .unwrap();
    let gmax_cal = shock_monitor(&calib, 1e9)
        .unwrap()
        .grad_max
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    let threshold = 3.0 * gmax_cal;

    let g = grid1(1024);
    let sup = shock_monitor(
        &run_burgers(
            &v0_on(g),
            &SolverConfig::new(0.8, 5.0, 16, FractionalOrder::new(0.25).unwrap()).unwrap(),
        )
        .unwrap(),
        threshold,
    )
    .unwrap();
    let crit = shock_monitor(
        &run_burgers(
            &v0_on(g),
            &SolverConfig::new(0.8, 5.0, 16, FractionalOrder::new(0.5).unwrap()).unwrap(),
        )
        .unwrap(),
        threshold,
    )
    .unwrap();

    report(
        9,
        sup.verdict == ShockVerdict::Blowup && crit.verdict == ShockVerdict::Bounded,
        &format!(
            "threshold {threshold:.2} (3x calibrated peak {gmax_cal:.2}): s = 0.25 verdict {:?} (expected Blowup), s = 0.5 verdict {:?} (expected Bounded)",
            sup.verdict, crit.verdict
        ),
    );
}

/// Envelope regularization identities and bounds on a random ensemble.
#[test]
fn criterion_10_envelope_properties() {
    let g = grid1(256);
    let h = g.spacing();
    let param = ConvolutionParam::new(0.1).unwrap();
    let eps = param.epsilon();
    let mut ok = true;
    let mut worst_order = f64::NEG_INFINITY;
    let mut worst_dual = 0.0f64;
    let mut worst_sc = 0.0f64;
    let mut worst_lip = 0.0f64;
    let mut alt_bound_held = true;
    for m in 0..16u64 {
        let u = random_fourier_field(g, 900 + m, 8, 1.0).unwrap();
        let sup = sup_convolution(&u, param);
        let inf = inf_convolution(&u, param);
        let neg = u.map(|v| -v).unwrap();
        let sup_neg = sup_convolution(&neg, param);
        for i in 0..g.len() {
            worst_order = worst_order
                .max(u.value(i) - sup.value(i))
                .max(inf.value(i) - u.value(i));
            worst_dual = worst_dual.max((inf.value(i) + sup_neg.value(i)).abs());
        }
        let sc = semiconvexity_modulus(&sup);
        let sc_bound = 2.0 / eps + 10.0 * h;
        worst_sc = worst_sc.max(sc - sc_bound);
        let lip = lipschitz_seminorm(&sup);
        let lip_bound = 2.0 * (u.max_abs() / eps).sqrt() + 10.0 * h;
        worst_lip = worst_lip.max(lip - lip_bound);
        // informational: the cruder (1/eps) ||u||^(1/2) bound
        alt_bound_held &= lip <= u.max_abs().sqrt() / eps + 10.0 * h;
        ok &= worst_order <= 0.0 && worst_dual == 0.0 && sc <= sc_bound && lip <= lip_bound;
    }
    report(
        10,
        ok,
        &format!(
            "16 fields: ordering slack {worst_order:.2e} <= 0, duality defect {worst_dual:.1e} = 0, semiconvexity excess {worst_sc:.2e} <= 0, Lipschitz excess {worst_lip:.2e} <= 0; informational (1/eps)||u||^(1/2) bound held: {alt_bound_held}"
        ),
    );
}

/// A suite rerun with the same seed reproduces every artifact byte for byte.
#[test]
fn criterion_11_determinism() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let o1 = run_suite(SuiteName::DiminishOsc, 42, d1.path()).unwrap();
    let o2 = run_suite(SuiteName::DiminishOsc, 42, d2.path()).unwrap();
    let mut identical = o1.passed == o2.passed && o1.lines == o2.lines;
    let mut names = Vec::new();
    for entry in std::fs::read_dir(d1.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let b1 = std::fs::read(d1.path().join(&name)).unwrap();
        let b2 = std::fs::read(d2.path().join(&name)).unwrap();
        identical &= b1 == b2;
        names.push(name.to_string_lossy().into_owned());
    }
    names.sort();
    report(
        11,
        identical && !names.is_empty(),
        &format!("rerun of the diminish-osc suite with seed 42 reproduced {names:?} byte for byte"),
    );
}

//! End-to-end acceptance checks. Each test prints a single PASS/FAIL line
//! (visible with --nocapture) and asserts the stated quantitative gate.

use coulomb_lab::dynamics::{self, ParticleState, Regime, Stepper};
use coulomb_lab::flow::{self, Flow};
use coulomb_lab::green::{singular_part, GreenKernel};
use coulomb_lab::modulated;
use coulomb_lab::reference;
use coulomb_lab::sampling::{self, Density};
use coulomb_lab::sweep::{self, SweepConfig, SweepRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::Instant;

fn report(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn kernel_matches_independent_oracle() {
    let start = Instant::now();
    let mut worst_oracle = 0.0f64;
    let mut worst_zero_mean = 0.0f64;
    for d in [2usize, 3] {
        let kernel = GreenKernel::new(d).unwrap();
        let r = reference::kernel_check(&kernel, 1000, 1);
        worst_oracle = worst_oracle.max(r.oracle_max_error);
        worst_zero_mean = worst_zero_mean.max(r.zero_mean_residual.abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "kernel vs spectral oracle",
        worst_oracle <= 1e-8 && worst_zero_mean <= 1e-7 && elapsed < 60.0,
        &format!(
            "max |g - oracle| {worst_oracle:.2e} (gate 1e-8), max zero-mean residual \
             {worst_zero_mean:.2e} (gate 1e-7), {elapsed:.1}s (gate 60s)"
        ),
    );
}

#[test]
fn near_field_remainder_is_smooth() {
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        let kernel = GreenKernel::new(d).unwrap();
        let h_at = |x: &[f64]| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            kernel.eval_g(x).unwrap() - singular_part(d, r)
        };
        let base: Vec<[f64; 3]> = vec![[0.08, 0.05, 0.0], [0.15, -0.1, 0.04], [0.02, 0.12, -0.06]];
        for b in base {
            for c in 0..d {
                let mut fd = [0.0f64; 2];
                for (si, s) in [1e-2, 1e-3].iter().enumerate() {
                    let mut xp = b;
                    let mut xm = b;
                    xp[c] += s;
                    xm[c] -= s;
                    fd[si] = (h_at(&xp[..d]) - h_at(&xm[..d])) / (2.0 * s);
                }
                worst = worst.max((fd[0] - fd[1]).abs() / fd[1].abs().max(0.05));
            }
        }
    }
    report(
        "near-field remainder smoothness",
        worst < 0.05,
        &format!("finite differences at scales 1e-2 and 1e-3 deviate by {worst:.2e} (gate 0.05)"),
    );
}

#[test]
fn reference_flows_are_exact_steady_solutions() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for name in [
        "taylor_green(1.0)",
        "beltrami_abc(1.0, 1.0, 1.0)",
        "perturbed_uniform_vorticity(0.5)",
    ] {
        let r = flow::flow_check(&Flow::parse(name).unwrap(), 64);
        worst = worst
            .max(r.steady_residual_max)
            .max(r.divergence_max)
            .max(r.pressure_poisson_residual_max);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "reference flow exactness",
        worst <= 1e-10,
        &format!("worst residual over 3 families on 64^d grids: {worst:.2e} (gate 1e-10), {elapsed:.1}s"),
    );
}

// Cold start from a smoothly displaced lattice: well-separated particles with
// genuine interactions, so the measured drift is pure time-discretization
// error rather than close-encounter noise.
fn displaced_lattice(m: usize, amp: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(m * m * 2);
    for i in 0..m {
        for j in 0..m {
            let x = (i as f64 + 0.5) / m as f64 - 0.5;
            let y = (j as f64 + 0.5) / m as f64 - 0.5;
            p.push(x + amp * (2.0 * std::f64::consts::PI * y).sin());
            p.push(y + amp * (2.0 * std::f64::consts::PI * x).sin());
        }
    }
    p
}

fn energy_drift(n: usize, eps: f64, dt: f64, t_end: f64) -> f64 {
    let kernel = GreenKernel::new(2).unwrap();
    let m = (n as f64).sqrt().round() as usize;
    assert_eq!(m * m, n);
    let positions = displaced_lattice(m, 0.05);
    let velocities = vec![0.0; positions.len()];
    let mut state =
        ParticleState::new(2, positions, velocities, Regime::Quasineutral { eps }).unwrap();
    let mut e0 = None;
    let mut drift = 0.0f64;
    dynamics::integrate(&mut state, &kernel, dt, t_end, 10, |s| {
        let e = dynamics::energy_diagnostics(s, &kernel)?.total;
        let e0 = *e0.get_or_insert(e);
        drift = drift.max(((e - e0) / e0).abs());
        Ok(())
    })
    .unwrap();
    drift
}

#[test]
fn verlet_conserves_energy_at_second_order() {
    let start = Instant::now();
    let eps = 0.5;
    let dt = eps / 100.0;
    let coarse = energy_drift(256, eps, dt, 1.0);
    let fine = energy_drift(256, eps, dt / 2.0, 1.0);
    let ratio = coarse / fine;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "velocity Verlet energy conservation",
        coarse <= 1e-6 && (3.5..=4.5).contains(&ratio) && elapsed < 120.0,
        &format!(
            "relative drift {coarse:.2e} (gate 1e-6), dt-halving ratio {ratio:.2} \
             (gate 3.5..4.5), {elapsed:.1}s (gate 120s)"
        ),
    );
}

#[test]
fn single_particle_gyration_is_exact() {
    let eps = 0.1;
    let kernel = GreenKernel::new(2).unwrap();
    let speed = 0.2;
    let mut state = ParticleState::new(
        2,
        vec![0.0, 0.0],
        vec![0.0, speed],
        Regime::Gyrokinetic { eps },
    )
    .unwrap();
    let period = 2.0 * std::f64::consts::PI * eps * eps;
    let dt = period / 64.0;
    let radius = eps * speed;
    let (cx, cy) = (-eps * speed, 0.0);
    let mut stepper = Stepper::new();
    let mut radius_err = 0.0f64;
    for _ in 0..64 {
        stepper.step(&mut state, &kernel, dt).unwrap();
        let r = ((state.positions[0] - cx).powi(2) + (state.positions[1] - cy).powi(2)).sqrt();
        radius_err = radius_err.max((r - radius).abs() / radius);
    }
    // phase error after one nominal period, as a relative period error
    let angle = (state.positions[1] - cy).atan2(state.positions[0] - cx);
    let period_err = (angle - 0.0f64.atan2(radius)).abs() / (2.0 * std::f64::consts::PI);

    let speed0 = speed;
    let mut long = ParticleState::new(
        2,
        vec![0.1, 0.3],
        vec![0.05, speed],
        Regime::Gyrokinetic { eps },
    )
    .unwrap();
    for _ in 0..10_000 {
        stepper.step(&mut long, &kernel, dt).unwrap();
    }
    let s = (long.velocities[0].powi(2) + long.velocities[1].powi(2)).sqrt();
    let speed_err = (s - (0.05f64.powi(2) + speed0.powi(2)).sqrt()).abs() / speed0;
    report(
        "single-particle gyration",
        radius_err <= 1e-6 && period_err <= 1e-6 && speed_err <= 1e-12,
        &format!(
            "gyroradius rel err {radius_err:.2e}, period rel err {period_err:.2e} \
             (gates 1e-6), |v| rel err over 1e4 steps {speed_err:.2e} (gate 1e-12)"
        ),
    );
}

#[test]
fn modulated_energy_matches_double_integral() {
    let start = Instant::now();
    let kernel = GreenKernel::new(2).unwrap();
    let mut worst = 0.0f64;
    for (regime, flow, seed0) in [
        (
            Regime::Quasineutral { eps: 0.5 },
            Flow::TaylorGreen2d { amplitude: 1.0 },
            3u64,
        ),
        (
            Regime::Gyrokinetic { eps: 0.5 },
            Flow::PerturbedUniformVorticity2d { a: 0.5 },
            6,
        ),
    ] {
        for (k, n) in [4usize, 8, 16].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed0 + k as u64);
            let positions: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let velocities: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let state = ParticleState::new(2, positions, velocities, regime).unwrap();
            let expanded = modulated::modulated_energy(&state, &kernel, &flow).unwrap().h2;
            let oracle = modulated::h2_double_integral_oracle(&state, &flow).unwrap();
            worst = worst.max((expanded - oracle).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "modulated energy vs double integral",
        worst <= 1e-6 && elapsed < 300.0,
        &format!(
            "max |expanded - brute force| over N in {{4,8,16}}, both regimes: \
             {worst:.2e} (gate 1e-6), {elapsed:.1}s (gate 300s)"
        ),
    );
}

fn scaled_sweep_config(regime: &str, flow: &str, t_end: f64, density: Density) -> SweepConfig {
    toml::from_str(&format!(
        r#"
regime = "{regime}"
dimension = 2
flow = "{flow}"
n_list = [128, 512, 2048]
t_end = {t_end}
observation_interval = {}
seeds = [1, 2, 3, 4]
output = "unused"

[epsilon_rule]
c = 1.0
gamma = {}

[sampling]
density = "{}"
velocity_perturbation = 0.0
seed = 2024
placement = "iid"
"#,
        t_end / 5.0,
        1.0 / 12.0,
        match density {
            Density::Uniform => "uniform",
            Density::Vorticity => "vorticity",
        }
    ))
    .unwrap()
}

fn taylor_green_sweep() -> &'static (Vec<SweepRecord>, f64) {
    static RECORDS: OnceLock<(Vec<SweepRecord>, f64)> = OnceLock::new();
    RECORDS.get_or_init(|| {
        let config = scaled_sweep_config("quasineutral", "taylor_green(1.0)", 0.5, Density::Uniform);
        let start = Instant::now();
        let records = sweep::run_sweep(&config, 1).unwrap();
        (records, start.elapsed().as_secs_f64())
    })
}

fn decreasing(per_n: &[(usize, f64)]) -> bool {
    per_n.windows(2).all(|w| w[1].1 < w[0].1)
}

#[test]
fn quasineutral_modulated_energy_decays_with_n() {
    let (records, elapsed) = taylor_green_sweep();
    // cells past the energy gate are excluded by fit_rate; the fit errors
    // out if any N loses all its seeds
    let fit = sweep::fit_rate(records, |r| r.total).unwrap();
    report(
        "quasineutral convergence trend",
        decreasing(&fit.per_n) && fit.slope <= -0.05 && *elapsed < 1800.0,
        &format!(
            "seed-averaged sup_t H per N: {:?}, slope {:.3} (gates: strictly \
             decreasing, <= -0.05), {elapsed:.0}s (gate 1800s)",
            fit.per_n, fit.slope
        ),
    );
}

#[test]
fn gyrokinetic_modulated_energy_decays_with_n() {
    let config = scaled_sweep_config(
        "gyrokinetic",
        "perturbed_uniform_vorticity(0.5)",
        0.25,
        Density::Vorticity,
    );
    let start = Instant::now();
    let records = sweep::run_sweep(&config, 1).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let fit = sweep::fit_rate(&records, |r| r.total).unwrap();
    report(
        "gyrokinetic convergence trend",
        decreasing(&fit.per_n) && fit.slope < 0.0 && elapsed < 2700.0,
        &format!(
            "seed-averaged sup_t H per N: {:?}, slope {:.3} (gates: strictly \
             decreasing, negative slope), {elapsed:.0}s (gate 2700s)",
            fit.per_n, fit.slope
        ),
    );
}

#[test]
fn initial_pair_energy_rate_3d() {
    let start = Instant::now();
    let r = sampling::estimate_initial_h2_scaling(3, &[64, 128, 256, 512, 1024], 64, 9).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "3d initialization scaling",
        r.slope <= -0.10 && elapsed < 1200.0,
        &format!(
            "fitted exponent {:.3} +/- {:.3} over N in 64..1024, 64 trials \
             (gate <= -0.10), {elapsed:.0}s (gate 1200s)",
            r.slope, r.slope_stderr
        ),
    );
}

#[test]
fn growth_envelope_transfers_across_n() {
    let (records, _) = taylor_green_sweep();
    let calib: Vec<SweepRecord> = records.iter().filter(|r| r.n == 128).cloned().collect();
    let check: Vec<SweepRecord> = records.iter().filter(|r| r.n == 512).cloned().collect();
    // the fitted growth rate varies mildly with N (larger systems see
    // slightly faster modulated-energy growth on this family), so the
    // calibration includes a fixed 25% headroom on the constants
    let env = sweep::calibrate_envelope(&calib, 1.25).unwrap();
    let checks = sweep::gronwall_envelope_check(&check, env);
    let violations: usize = checks.iter().map(|c| c.violations).sum();
    let worst = checks.iter().map(|c| c.worst_ratio).fold(0.0f64, f64::max);
    report(
        "growth envelope transfer",
        !checks.is_empty() && violations == 0,
        &format!(
            "envelope (C = {:.3}, B = {:.2e}) fitted at N = 128 checked on N = 512: \
             {violations} violations across {} cells, worst bound ratio {worst:.3}",
            env.c,
            env.b,
            checks.len()
        ),
    );
}

#[test]
fn sweep_records_are_bit_identical_across_runs() {
    let config: SweepConfig = toml::from_str(
        r#"
regime = "gyrokinetic"
dimension = 2
flow = "perturbed_uniform_vorticity(0.5)"
n_list = [16, 32]
t_end = 0.05
observation_interval = 0.025
seeds = [5, 6]
output = "unused"

[epsilon_rule]
c = 0.8
gamma = 0.05

[sampling]
density = "vorticity"
velocity_perturbation = 0.1
seed = 13
placement = "stratified"
"#,
    )
    .unwrap();
    let serialize = |records: &[SweepRecord]| {
        let mut buf = Vec::new();
        sweep::write_jsonl(records, &mut buf).unwrap();
        buf
    };
    let a = serialize(&sweep::run_sweep(&config, 1).unwrap());
    let b = serialize(&sweep::run_sweep(&config, 4).unwrap());
    report(
        "sweep determinism",
        !a.is_empty() && a == b,
        &format!(
            "two runs (1 and 4 workers) produced {} identical JSONL bytes",
            a.len()
        ),
    );
}

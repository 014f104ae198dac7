//! Initial-data generation: positions from a chosen density, velocities
//! locked to (or perturbed around) the reference flow, and the Monte-Carlo
//! study of how the initial Coulomb modulation statistic decays with N.
//!
//! Randomness is keyed per (seed, particle index) through a counter-based
//! stream, so sampling is reproducible independent of evaluation order.

use crate::dynamics::{ParticleState, Regime};
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::green::GreenKernel;
use crate::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Uniform,
    Vorticity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Iid,
    Lattice,
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct SamplingConfig {
    pub density: Density,
    /// 0 => velocities exactly u(x_i); eta > 0 => uniform perturbation with
    /// |v_i - u(x_i)| <= eta.
    pub velocity_perturbation: f64,
    pub seed: u64,
    pub placement: Placement,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            density: Density::Uniform,
            velocity_perturbation: 0.0,
            seed: 0,
            placement: Placement::Iid,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for one particle of one trial.
pub fn particle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index.wrapping_add(1))))
}

pub fn sample_initial(
    config: &SamplingConfig,
    flow: &Flow,
    n: usize,
    eps: f64,
    regime: Regime,
) -> Result<ParticleState> {
    let d = flow.dimension();
    if config.velocity_perturbation < 0.0 {
        return Err(Error::Config("velocity perturbation must be >= 0".into()));
    }
    if config.density == Density::Vorticity {
        if d != 2 {
            return Err(Error::Config("vorticity density requires a 2D flow".into()));
        }
        if config.placement != Placement::Iid {
            return Err(Error::Config(
                "vorticity density supports only i.i.d. placement".into(),
            ));
        }
        // envelope for rejection sampling; also catches negative densities
        match flow {
            Flow::PerturbedUniformVorticity2d { a } if a.abs() > 1.0 => {
                return Err(Error::Config(format!(
                    "vorticity 1 + {a} cos cos takes negative values"
                )));
            }
            Flow::TaylorGreen2d { .. } => {
                return Err(Error::Config(
                    "taylor_green vorticity is signed; not a sampling density".into(),
                ));
            }
            _ => {}
        }
    }
    let mut positions = vec![0.0f64; n * d];
    match config.placement {
        Placement::Iid => {
            for i in 0..n {
                let mut rng = particle_rng(config.seed, i as u64);
                loop {
                    let mut x = [0.0f64; 3];
                    for c in x.iter_mut().take(d) {
                        *c = rng.gen_range(-0.5..0.5);
                    }
                    let accept = match config.density {
                        Density::Uniform => true,
                        Density::Vorticity => {
                            let om = flow.eval_vorticity_stream(&x[..d])?.0;
                            // sup omega = 2 bounds every admissible family
                            rng.gen_range(0.0..2.0) <= om
                        }
                    };
                    if accept {
                        positions[i * d..(i + 1) * d].copy_from_slice(&x[..d]);
                        break;
                    }
                }
            }
        }
        Placement::Lattice | Placement::Stratified => {
            if config.density == Density::Vorticity {
                return Err(Error::Config(
                    "vorticity density supports only i.i.d. placement".into(),
                ));
            }
            let m = (n as f64).powf(1.0 / d as f64).ceil() as usize;
            let h = 1.0 / m as f64;
            let mut idx = [0usize; 3];
            for i in 0..n {
                let mut rem = i;
                for c in (0..d).rev() {
                    idx[c] = rem % m;
                    rem /= m;
                }
                let mut rng = particle_rng(config.seed, i as u64);
                for c in 0..d {
                    let jitter = match config.placement {
                        Placement::Lattice => 0.5,
                        _ => rng.gen_range(0.0..1.0),
                    };
                    positions[i * d + c] = -0.5 + (idx[c] as f64 + jitter) * h;
                }
            }
        }
    }
    let vscale = if regime.is_gyrokinetic() { eps } else { 1.0 };
    let eta = config.velocity_perturbation;
    let mut velocities = vec![0.0f64; n * d];
    for i in 0..n {
        let mut u = [0.0f64; 3];
        flow.eval_u(&positions[i * d..(i + 1) * d], &mut u[..d]);
        if eta > 0.0 {
            // uniform in the eta-ball, via rejection from the cube
            let mut rng = particle_rng(config.seed ^ VELOCITY_STREAM_SALT, i as u64);
            loop {
                let mut delta = [0.0f64; 3];
                let mut r2 = 0.0;
                for c in delta.iter_mut().take(d) {
                    *c = rng.gen_range(-eta..eta);
                    r2 += *c * *c;
                }
                if r2 <= eta * eta {
                    for c in 0..d {
                        u[c] += delta[c];
                    }
                    break;
                }
            }
        }
        for c in 0..d {
            velocities[i * d + c] = vscale * u[c];
        }
    }
    ParticleState::new(d, positions, velocities, regime)
}

/// Decorrelates the velocity-perturbation stream from the position stream.
const VELOCITY_STREAM_SALT: u64 = 0x7665_6c6f_6369_7479;

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub trials: usize,
    pub mean_stat: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub dimension: usize,
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub slope_stderr: f64,
}

/// Per-trial statistic |(1/N^2) sum_{i != j} g(x_i - x_j)| for uniformly
/// sampled points. Its exact expectation before taking the absolute value is
/// -g_at_coincidence-free -G/N; the absolute mean decays like a power of N.
pub fn initial_h2_statistic(kernel: &GreenKernel, positions: &[f64]) -> Result<f64> {
    let d = kernel.dimension();
    let n = (positions.len() / d) as f64;
    Ok((kernel.pairwise_potential_sum(positions)? / (n * n)).abs())
}

/// Monte-Carlo estimate of the decay exponent of the mean statistic.
pub fn estimate_initial_h2_scaling(
    d: usize,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ScalingReport> {
    let mut distinct = n_list.to_vec();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitUnderdetermined(distinct.len()));
    }
    let kernel = GreenKernel::new(d)?;
    let flow_dummy = match d {
        2 => Flow::TaylorGreen2d { amplitude: 0.0 },
        _ => Flow::BeltramiAbc3d { a: 0.0, b: 0.0, c: 0.0 },
    };
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut vals = Vec::with_capacity(trials);
        for t in 0..trials {
            let config = SamplingConfig {
                density: Density::Uniform,
                velocity_perturbation: 0.0,
                seed: splitmix64(seed ^ ((n as u64) << 24) ^ t as u64),
                placement: Placement::Iid,
            };
            let state = sample_initial(
                &config,
                &flow_dummy,
                n,
                1.0,
                Regime::Quasineutral { eps: 1.0 },
            )?;
            vals.push(initial_h2_statistic(&kernel, &state.positions)?);
        }
        let (mean, stderr) = stats::mean_and_stderr(&vals);
        points.push(ScalingPoint {
            n,
            trials,
            mean_stat: mean,
            stderr,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_stat).collect();
    let (slope, slope_stderr) = stats::loglog_slope(&xs, &ys)?;
    Ok(ScalingReport {
        dimension: d,
        points,
        slope,
        slope_stderr,
    })
}

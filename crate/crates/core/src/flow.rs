//! Exact steady solutions of incompressible Euler on the unit torus with
//! closed-form velocity, Jacobian, zero-mean pressure, interaction density
//! U = sum_ij d_i u_j d_j u_i (= -Lap p), and, in 2D, vorticity and stream
//! function. Wavenumber convention 2 pi throughout.

use crate::error::{Error, Result};
use crate::torus;
use serde::Serialize;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    /// psi = (A/2pi) sin(2pi x) sin(2pi y), u = perp-grad psi.
    TaylorGreen2d { amplitude: f64 },
    /// u = (A sin kz + C cos ky, B sin kx + A cos kz, C sin ky + B cos kx).
    BeltramiAbc3d { a: f64, b: f64, c: f64 },
    /// omega = 1 + a cos(2pi x) cos(2pi y), unit mass; psi = -g * omega.
    PerturbedUniformVorticity2d { a: f64 },
}

impl Flow {
    /// Parse "name" or "name(p1,p2,...)" as used by config files and the CLI.
    pub fn parse(s: &str) -> Result<Flow> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => {
                let inner = &s[i + 1..s.len() - 1];
                let vals: std::result::Result<Vec<f64>, _> = inner
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect();
                (
                    &s[..i],
                    vals.map_err(|e| Error::Config(format!("bad flow parameter in '{s}': {e}")))?,
                )
            }
            None => (s, Vec::new()),
            _ => return Err(Error::Config(format!("malformed flow name '{s}'"))),
        };
        match (name, args.as_slice()) {
            ("taylor_green" | "taylor_green_2d", []) => {
                Ok(Flow::TaylorGreen2d { amplitude: 1.0 })
            }
            ("taylor_green" | "taylor_green_2d", [a]) => Ok(Flow::TaylorGreen2d { amplitude: *a }),
            ("beltrami_abc" | "beltrami_abc_3d", []) => {
                Ok(Flow::BeltramiAbc3d { a: 1.0, b: 1.0, c: 1.0 })
            }
            ("beltrami_abc" | "beltrami_abc_3d", [a, b, c]) => {
                Ok(Flow::BeltramiAbc3d { a: *a, b: *b, c: *c })
            }
            ("perturbed_uniform_vorticity" | "perturbed_uniform_vorticity_2d", []) => {
                Ok(Flow::PerturbedUniformVorticity2d { a: 0.5 })
            }
            ("perturbed_uniform_vorticity" | "perturbed_uniform_vorticity_2d", [a]) => {
                Ok(Flow::PerturbedUniformVorticity2d { a: *a })
            }
            _ => Err(Error::Config(format!("unknown flow '{s}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Flow::TaylorGreen2d { amplitude } => format!("taylor_green({amplitude})"),
            Flow::BeltramiAbc3d { a, b, c } => format!("beltrami_abc({a},{b},{c})"),
            Flow::PerturbedUniformVorticity2d { a } => {
                format!("perturbed_uniform_vorticity({a})")
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Flow::BeltramiAbc3d { .. } => 3,
            _ => 2,
        }
    }

    pub fn eval_u(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Flow::TaylorGreen2d { amplitude: am } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                out[0] = -am * sx * cy;
                out[1] = am * cx * sy;
            }
            Flow::BeltramiAbc3d { a, b, c } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let (sz, cz) = (TWO_PI * x[2]).sin_cos();
                out[0] = a * sz + c * cy;
                out[1] = b * sx + a * cz;
                out[2] = c * sy + b * cx;
            }
            Flow::PerturbedUniformVorticity2d { a } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let w = a / (4.0 * PI);
                out[0] = -w * cx * sy;
                out[1] = w * sx * cy;
            }
        }
    }

    /// Jacobian (grad u)_{ij} = d u_i / d x_j, row-major d x d.
    pub fn eval_grad_u(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Flow::TaylorGreen2d { amplitude: am } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let w = TWO_PI * am;
                out[0] = -w * cx * cy;
                out[1] = w * sx * sy;
                out[2] = -w * sx * sy;
                out[3] = w * cx * cy;
            }
            Flow::BeltramiAbc3d { a, b, c } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let (sz, cz) = (TWO_PI * x[2]).sin_cos();
                out.fill(0.0);
                out[1] = -TWO_PI * c * sy;
                out[2] = TWO_PI * a * cz;
                out[3] = TWO_PI * b * cx;
                out[5] = -TWO_PI * a * sz;
                out[6] = -TWO_PI * b * sx;
                out[7] = TWO_PI * c * cy;
            }
            Flow::PerturbedUniformVorticity2d { a } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let w = 0.5 * a;
                out[0] = w * sx * sy;
                out[1] = -w * cx * cy;
                out[2] = w * cx * cy;
                out[3] = -w * sx * sy;
            }
        }
    }

    /// Zero-mean pressure solving -Lap p = U.
    pub fn eval_pressure(&self, x: &[f64]) -> f64 {
        match *self {
            Flow::TaylorGreen2d { amplitude: am } => {
                0.25 * am * am * ((2.0 * TWO_PI * x[0]).cos() + (2.0 * TWO_PI * x[1]).cos())
            }
            Flow::BeltramiAbc3d { a, b, c } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let (sz, cz) = (TWO_PI * x[2]).sin_cos();
                -(a * c * sz * cy + a * b * sx * cz + b * c * sy * cx)
            }
            Flow::PerturbedUniformVorticity2d { a } => {
                let mut u = [0.0; 2];
                self.eval_u(x, &mut u);
                let psi = self.eval_vorticity_stream(x).unwrap().1;
                -0.5 * (u[0] * u[0] + u[1] * u[1]) - 4.0 * PI * PI * psi * psi
                    + a * a / (32.0 * PI * PI)
            }
        }
    }

    /// U(x) = sum_ij d_i u_j d_j u_i, in closed form per family.
    pub fn eval_interaction(&self, x: &[f64]) -> f64 {
        match *self {
            Flow::TaylorGreen2d { amplitude: am } => {
                4.0 * PI * PI
                    * am
                    * am
                    * ((2.0 * TWO_PI * x[0]).cos() + (2.0 * TWO_PI * x[1]).cos())
            }
            Flow::BeltramiAbc3d { a, b, c } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                let (sz, cz) = (TWO_PI * x[2]).sin_cos();
                -8.0 * PI * PI * (a * c * sz * cy + a * b * sx * cz + b * c * sy * cx)
            }
            Flow::PerturbedUniformVorticity2d { a } => {
                let (sx, cx) = (TWO_PI * x[0]).sin_cos();
                let (sy, cy) = (TWO_PI * x[1]).sin_cos();
                0.5 * a * a * (sx * sx * sy * sy - cx * cx * cy * cy)
            }
        }
    }

    /// (omega, psi) for 2D families; the stream function satisfies
    /// Lap psi = omega - integral(omega).
    pub fn eval_vorticity_stream(&self, x: &[f64]) -> Result<(f64, f64)> {
        match *self {
            Flow::TaylorGreen2d { amplitude: am } => {
                let s = (TWO_PI * x[0]).sin() * (TWO_PI * x[1]).sin();
                Ok((-2.0 * TWO_PI * am * s, am / TWO_PI * s))
            }
            Flow::PerturbedUniformVorticity2d { a } => {
                let c = (TWO_PI * x[0]).cos() * (TWO_PI * x[1]).cos();
                Ok((1.0 + a * c, -a / (8.0 * PI * PI) * c))
            }
            Flow::BeltramiAbc3d { .. } => Err(Error::DimensionMismatch { expected: 2, got: 3 }),
        }
    }

    /// integral of p * U over the torus (exact: integrand is a trig
    /// polynomial of low degree, midpoint quadrature at n = 64 is exact).
    pub fn integral_p_interaction(&self) -> f64 {
        torus::quadrature(self.dimension(), 64, |x| {
            self.eval_pressure(x) * self.eval_interaction(x)
        })
    }

    /// integral of p * omega (2D families).
    pub fn integral_p_vorticity(&self) -> Result<f64> {
        if self.dimension() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: 3 });
        }
        Ok(torus::quadrature(2, 64, |x| {
            self.eval_pressure(x) * self.eval_vorticity_stream(x).unwrap().0
        }))
    }

    /// integral of (g * omega) omega = integral of (-psi) omega (2D).
    pub fn integral_homega_vorticity(&self) -> Result<f64> {
        if self.dimension() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: 3 });
        }
        Ok(torus::quadrature(2, 64, |x| {
            let (om, psi) = self.eval_vorticity_stream(x).unwrap();
            -psi * om
        }))
    }
}

/// -Lap of grid samples via the exact trigonometric interpolant (separable
/// naive DFT; n is small). samples are row-major on the midpoint grid.
pub fn spectral_neg_laplacian(samples: &[f64], d: usize, n: usize) -> Vec<f64> {
    let mut re: Vec<f64> = samples.to_vec();
    let mut im = vec![0.0f64; samples.len()];
    // forward DFT along each axis, multiply by 4 pi^2 |k|^2, inverse DFT
    for axis in 0..d {
        dft_axis(&mut re, &mut im, d, n, axis, false);
    }
    let nf = n as f64;
    for (flat, (r, i)) in re.iter_mut().zip(im.iter_mut()).enumerate() {
        let mut rem = flat;
        let mut k2 = 0.0;
        for _ in 0..d {
            let idx = rem % n;
            rem /= n;
            let k = if idx <= n / 2 { idx as f64 } else { idx as f64 - nf };
            k2 += k * k;
        }
        let w = 4.0 * PI * PI * k2;
        *r *= w;
        *i *= w;
    }
    for axis in 0..d {
        dft_axis(&mut re, &mut im, d, n, axis, true);
    }
    let scale = 1.0 / (n as f64).powi(d as i32);
    re.iter().map(|r| r * scale).collect()
}

fn dft_axis(re: &mut [f64], im: &mut [f64], d: usize, n: usize, axis: usize, inverse: bool) {
    // stride pattern: flat index = sum_c idx[c] * n^{d-1-c}
    let stride = n.pow((d - 1 - axis) as u32);
    let outer = re.len() / (n * stride);
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut tr = vec![0.0f64; n];
    let mut ti = vec![0.0f64; n];
    let mut twc = vec![0.0f64; n];
    let mut tws = vec![0.0f64; n];
    for (j, (c, s)) in twc.iter_mut().zip(tws.iter_mut()).enumerate() {
        let (s_, c_) = (sign * TWO_PI * j as f64 / n as f64).sin_cos();
        *c = c_;
        *s = s_;
    }
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * n * stride + inner;
            for (k, (r, i)) in tr.iter_mut().zip(ti.iter_mut()).enumerate() {
                let mut ar = 0.0;
                let mut ai = 0.0;
                for j in 0..n {
                    let idx = base + j * stride;
                    let t = (k * j) % n;
                    ar += re[idx] * twc[t] - im[idx] * tws[t];
                    ai += re[idx] * tws[t] + im[idx] * twc[t];
                }
                *r = ar;
                *i = ai;
            }
            for k in 0..n {
                re[base + k * stride] = tr[k];
                im[base + k * stride] = ti[k];
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FlowCheckReport {
    pub flow: String,
    pub dimension: usize,
    pub grid: usize,
    pub steady_residual_max: f64,
    pub divergence_max: f64,
    pub pressure_poisson_residual_max: f64,
    pub pressure_mean: f64,
    pub velocity_mean_max: f64,
    pub pass: bool,
}

/// Residual diagnostics behind `flow-check`: steady Euler residual
/// u.grad u + grad p, divergence of u (= trace of the Jacobian), and the
/// spectral residual of -Lap p = U, all on an n^d midpoint grid.
pub fn flow_check(flow: &Flow, n: usize) -> FlowCheckReport {
    let d = flow.dimension();
    let mut steady_max = 0.0f64;
    let mut div_max = 0.0f64;
    let mut p_sum = 0.0f64;
    let mut u_sum = vec![0.0f64; d];
    let total = n.pow(d as u32);
    let mut p_samples = vec![0.0f64; total];
    let mut i_samples = vec![0.0f64; total];
    let h = 1.0 / n as f64;
    let mut idx = [0usize; 3];
    for flat in 0..total {
        let mut rem = flat;
        for c in (0..d).rev() {
            idx[c] = rem % n;
            rem /= n;
        }
        let mut x = [0.0f64; 3];
        for c in 0..d {
            x[c] = -0.5 + (idx[c] as f64 + 0.5) * h;
        }
        let x = &x[..d];
        let mut u = [0.0f64; 3];
        let mut gu = [0.0f64; 9];
        flow.eval_u(x, &mut u[..d]);
        flow.eval_grad_u(x, &mut gu[..d * d]);
        let p = flow.eval_pressure(x);
        p_samples[flat] = p;
        i_samples[flat] = flow.eval_interaction(x);
        p_sum += p;
        let mut gp = [0.0f64; 3];
        eval_grad_pressure(flow, x, &mut gp[..d]);
        for i in 0..d {
            let mut conv = gp[i];
            for j in 0..d {
                conv += u[j] * gu[i * d + j];
            }
            steady_max = steady_max.max(conv.abs());
        }
        let mut tr = 0.0;
        for i in 0..d {
            tr += gu[i * d + i];
            u_sum[i] += u[i];
        }
        div_max = div_max.max(tr.abs());
    }
    let neg_lap = spectral_neg_laplacian(&p_samples, d, n);
    let mut poisson_max = 0.0f64;
    for (a, b) in neg_lap.iter().zip(i_samples.iter()) {
        poisson_max = poisson_max.max((a - b).abs());
    }
    let tf = total as f64;
    let velocity_mean_max = u_sum.iter().map(|s| (s / tf).abs()).fold(0.0, f64::max);
    let pressure_mean = p_sum / tf;
    let pass = div_max < 1e-10
        && poisson_max < 1e-10
        && pressure_mean.abs() < 1e-12
        && velocity_mean_max < 1e-12
        && steady_max < 1e-10;
    FlowCheckReport {
        flow: flow.name(),
        dimension: d,
        grid: n,
        steady_residual_max: steady_max,
        divergence_max: div_max,
        pressure_poisson_residual_max: poisson_max,
        pressure_mean,
        velocity_mean_max,
        pass,
    }
}

/// Analytic gradient of the pressure, used by the exact steady-residual test.
pub fn eval_grad_pressure(flow: &Flow, x: &[f64], out: &mut [f64]) {
    match *flow {
        Flow::TaylorGreen2d { amplitude: am } => {
            out[0] = -PI * am * am * (2.0 * TWO_PI * x[0]).sin();
            out[1] = -PI * am * am * (2.0 * TWO_PI * x[1]).sin();
        }
        Flow::BeltramiAbc3d { a, b, c } => {
            let (sx, cx) = (TWO_PI * x[0]).sin_cos();
            let (sy, cy) = (TWO_PI * x[1]).sin_cos();
            let (sz, cz) = (TWO_PI * x[2]).sin_cos();
            out[0] = -TWO_PI * (a * b * cx * cz - b * c * sy * sx);
            out[1] = -TWO_PI * (-a * c * sz * sy + b * c * cy * cx);
            out[2] = -TWO_PI * (a * c * cz * cy - a * b * sx * sz);
        }
        Flow::PerturbedUniformVorticity2d { .. } => {
            // p is a polynomial in u and psi; differentiate through the parts
            let mut u = [0.0; 2];
            let mut gu = [0.0; 4];
            flow.eval_u(x, &mut u);
            flow.eval_grad_u(x, &mut gu);
            let (_, psi) = flow.eval_vorticity_stream(x).unwrap();
            // grad psi = (u_2, -u_1) since u = perp-grad psi
            let gpsi = [u[1], -u[0]];
            for i in 0..2 {
                let mut du2 = 0.0;
                for j in 0..2 {
                    du2 += u[j] * gu[j * 2 + i];
                }
                out[i] = -du2 - 8.0 * PI * PI * psi * gpsi[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn families() -> Vec<Flow> {
        vec![
            Flow::TaylorGreen2d { amplitude: 1.0 },
            Flow::TaylorGreen2d { amplitude: 0.7 },
            Flow::BeltramiAbc3d { a: 1.0, b: 1.0, c: 1.0 },
            Flow::BeltramiAbc3d { a: 0.8, b: -0.5, c: 1.2 },
            Flow::PerturbedUniformVorticity2d { a: 0.5 },
            Flow::PerturbedUniformVorticity2d { a: 0.9 },
        ]
    }

    #[test]
    fn known_point_values() {
        let tg = Flow::TaylorGreen2d { amplitude: 1.0 };
        let mut u = [0.0; 2];
        tg.eval_u(&[0.0, 0.0], &mut u);
        assert_eq!(u, [0.0, 0.0]);
        let mut gu = [0.0; 4];
        tg.eval_grad_u(&[0.25, 0.25], &mut gu);
        let w = TWO_PI;
        for (got, want) in gu.iter().zip([0.0, w, -w, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(tg.eval_pressure(&[0.125, 0.125]).abs() < 1e-15);
        assert!((tg.eval_vorticity_stream(&[0.0, 0.0]).unwrap().0).abs() < 1e-15);

        let ab = Flow::BeltramiAbc3d { a: 1.0, b: 1.0, c: 1.0 };
        let mut u3 = [0.0; 3];
        ab.eval_u(&[0.0, 0.0, 0.0], &mut u3);
        assert_eq!(u3, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn steady_euler_residual_is_roundoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for flow in families() {
            let d = flow.dimension();
            for _ in 0..200 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let mut u = [0.0; 3];
                let mut gu = [0.0; 9];
                let mut gp = [0.0; 3];
                flow.eval_u(&x, &mut u[..d]);
                flow.eval_grad_u(&x, &mut gu[..d * d]);
                eval_grad_pressure(&flow, &x, &mut gp[..d]);
                for i in 0..d {
                    let mut r = gp[i];
                    for j in 0..d {
                        r += u[j] * gu[i * d + j];
                    }
                    assert!(r.abs() < 1e-12, "{}: residual {r} comp {i}", flow.name());
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for flow in families() {
            let d = flow.dimension();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let mut gu = vec![0.0; d * d];
                flow.eval_grad_u(&x, &mut gu);
                let h = 1e-6;
                for j in 0..d {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let mut up = vec![0.0; d];
                    let mut um = vec![0.0; d];
                    flow.eval_u(&xp, &mut up);
                    flow.eval_u(&xm, &mut um);
                    for i in 0..d {
                        let fd = (up[i] - um[i]) / (2.0 * h);
                        assert!((fd - gu[i * d + j]).abs() < 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn interaction_equals_jacobian_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for flow in families() {
            let d = flow.dimension();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let mut gu = vec![0.0; d * d];
                flow.eval_grad_u(&x, &mut gu);
                let mut contract = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        contract += gu[i * d + j] * gu[j * d + i];
                    }
                }
                let direct = flow.eval_interaction(&x);
                assert!((contract - direct).abs() < 1e-11, "{}", flow.name());
            }
        }
    }

    #[test]
    fn stream_function_conventions() {
        // u = perp-grad psi = (-d_y psi, d_x psi); Lap psi = omega - mass
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for flow in [
            Flow::TaylorGreen2d { amplitude: 0.6 },
            Flow::PerturbedUniformVorticity2d { a: 0.5 },
        ] {
            for _ in 0..50 {
                let x = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
                let h = 1e-5;
                let psi_at = |p: &[f64]| flow.eval_vorticity_stream(p).unwrap().1;
                let dpsi_dx = (psi_at(&[x[0] + h, x[1]]) - psi_at(&[x[0] - h, x[1]])) / (2.0 * h);
                let dpsi_dy = (psi_at(&[x[0], x[1] + h]) - psi_at(&[x[0], x[1] - h])) / (2.0 * h);
                let mut u = [0.0; 2];
                flow.eval_u(&x, &mut u);
                assert!((u[0] + dpsi_dy).abs() < 1e-8);
                assert!((u[1] - dpsi_dx).abs() < 1e-8);
            }
        }
        // vorticity mass: 1 for the perturbed-uniform family, 0 for TG
        let puv = Flow::PerturbedUniformVorticity2d { a: 0.5 };
        let mass = torus::quadrature(2, 64, |x| puv.eval_vorticity_stream(x).unwrap().0);
        assert!((mass - 1.0).abs() < 1e-13);
        let tg = Flow::TaylorGreen2d { amplitude: 1.0 };
        let mass0 = torus::quadrature(2, 64, |x| tg.eval_vorticity_stream(x).unwrap().0);
        assert!(mass0.abs() < 1e-13);
    }

    #[test]
    fn vorticity_is_transported_trivially() {
        // for the perturbed-uniform family, u.grad omega = 0 pointwise
        let flow = Flow::PerturbedUniformVorticity2d { a: 0.7 };
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let x = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let h = 1e-5;
            let om = |p: &[f64]| flow.eval_vorticity_stream(p).unwrap().0;
            let dx = (om(&[x[0] + h, x[1]]) - om(&[x[0] - h, x[1]])) / (2.0 * h);
            let dy = (om(&[x[0], x[1] + h]) - om(&[x[0], x[1] - h])) / (2.0 * h);
            let mut u = [0.0; 2];
            flow.eval_u(&x, &mut u);
            assert!((u[0] * dx + u[1] * dy).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_integrals() {
        let tg = Flow::TaylorGreen2d { amplitude: 1.3 };
        let want = PI * PI * 1.3f64.powi(4);
        assert!((tg.integral_p_interaction() - want).abs() < 1e-11);

        let ab = Flow::BeltramiAbc3d { a: 0.8, b: -0.5, c: 1.2 };
        let (a2, b2, c2) = (0.64, 0.25, 1.44);
        let want = 2.0 * PI * PI * (a2 * b2 + a2 * c2 + b2 * c2);
        assert!((ab.integral_p_interaction() - want).abs() < 1e-10);

        let a = 0.5f64;
        let puv = Flow::PerturbedUniformVorticity2d { a };
        assert!((puv.integral_p_interaction() - a.powi(4) / (256.0 * PI * PI)).abs() < 1e-14);
        assert!((puv.integral_homega_vorticity().unwrap() - a * a / (32.0 * PI * PI)).abs()
            < 1e-14);
        assert!(puv.integral_p_vorticity().unwrap().abs() < 1e-15);
    }

    #[test]
    fn pressure_poisson_spectral_residual() {
        for flow in families() {
            let d = flow.dimension();
            let n: usize = if d == 2 { 64 } else { 32 };
            let total = n.pow(d as u32);
            let mut p = vec![0.0; total];
            let mut q = vec![0.0; total];
            let h = 1.0 / n as f64;
            let mut idx = [0usize; 3];
            for flat in 0..total {
                let mut rem = flat;
                for c in (0..d).rev() {
                    idx[c] = rem % n;
                    rem /= n;
                }
                let mut x = [0.0; 3];
                for c in 0..d {
                    x[c] = -0.5 + (idx[c] as f64 + 0.5) * h;
                }
                p[flat] = flow.eval_pressure(&x[..d]);
                q[flat] = flow.eval_interaction(&x[..d]);
            }
            let lap = spectral_neg_laplacian(&p, d, n);
            let mut max = 0.0f64;
            for (a, b) in lap.iter().zip(q.iter()) {
                max = max.max((a - b).abs());
            }
            assert!(max < 1e-9, "{}: poisson residual {max}", flow.name());
        }
    }

    #[test]
    fn parse_roundtrip() {
        assert_eq!(
            Flow::parse("taylor_green(2.0)").unwrap(),
            Flow::TaylorGreen2d { amplitude: 2.0 }
        );
        assert_eq!(
            Flow::parse("beltrami_abc(1, 2, 3)").unwrap(),
            Flow::BeltramiAbc3d { a: 1.0, b: 2.0, c: 3.0 }
        );
        assert_eq!(
            Flow::parse("perturbed_uniform_vorticity").unwrap(),
            Flow::PerturbedUniformVorticity2d { a: 0.5 }
        );
        assert!(Flow::parse("rankine_vortex").is_err());
        assert!(Flow::parse("taylor_green(x)").is_err());
    }
}

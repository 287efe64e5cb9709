//! Synthetic circle-valued signals and images.
//!
//! All randomness comes from [`GaussianStream`]: a ChaCha8 generator seeded
//! with `ChaCha8Rng::seed_from_u64(seed)`, turned into uniforms in `(0, 1)`
//! as `((u64 >> 11) + 0.5) * 2^-53` and into standard normals by the
//! Box-Muller transform `sqrt(-2 ln u1) * (cos, sin)(2 pi u2)`, cosine branch
//! first. Outputs are pure functions of the spec and its seed.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circle::CircleSignal;
use crate::error::{Error, Result};

/// Deterministic standard normal samples.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec1D {
    pub n: usize,
    pub seed: u64,
    /// Standard deviation of the random-walk increments of the true angle.
    pub increment_std: f64,
    pub noise_std: f64,
    pub initial_angle: f64,
}

impl Default for SyntheticSpec1D {
    fn default() -> Self {
        SyntheticSpec1D {
            n: 1000,
            seed: 0,
            increment_std: 0.1,
            noise_std: 50f64.sqrt() / 10.0,
            initial_angle: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec2D {
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    /// Side of the square grid of random control phases.
    pub control: usize,
    /// Standard deviation of the control phases.
    pub control_std: f64,
    pub noise_std: f64,
}

impl Default for SyntheticSpec2D {
    fn default() -> Self {
        SyntheticSpec2D {
            height: 97,
            width: 97,
            seed: 0,
            control: 4,
            control_std: 2.0,
            noise_std: 0.5,
        }
    }
}

fn check_std(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite and nonnegative, got {v}"
        )))
    }
}

/// Random-walk ground truth and its noisy observation. Increments are drawn
/// first, then the per-sample noise.
pub fn gen_1d(spec: &SyntheticSpec1D) -> Result<(CircleSignal, CircleSignal)> {
    if spec.n < 2 {
        return Err(Error::InvalidSize(format!(
            "signal length must be >= 2, got {}",
            spec.n
        )));
    }
    check_std("increment_std", spec.increment_std)?;
    check_std("noise_std", spec.noise_std)?;
    let mut gauss = GaussianStream::new(spec.seed);
    let mut truth = Vec::with_capacity(spec.n);
    truth.push(spec.initial_angle);
    for k in 1..spec.n {
        truth.push(truth[k - 1] + spec.increment_std * gauss.next_normal());
    }
    let noisy: Vec<f64> = truth
        .iter()
        .map(|&w| w + spec.noise_std * gauss.next_normal())
        .collect();
    Ok((
        CircleSignal::from_angles(&truth),
        CircleSignal::from_angles(&noisy),
    ))
}

/// Catmull-Rom weights for the four samples around fractional offset `t`.
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t + 2.0 * t2 - t3),
        0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
        0.5 * (t + 4.0 * t2 - 3.0 * t3),
        0.5 * (-t2 + t3),
    ]
}

/// Position of output sample `i` on the control grid plus its stencil
/// (indices clamped to the grid).
fn stencil(i: usize, len: usize, control: usize) -> ([usize; 4], [f64; 4]) {
    let u = if len > 1 {
        i as f64 * (control - 1) as f64 / (len - 1) as f64
    } else {
        0.0
    };
    let base = (u.floor() as usize).min(control - 2);
    let t = u - base as f64;
    let clamp = |k: isize| k.clamp(0, control as isize - 1) as usize;
    let b = base as isize;
    (
        [clamp(b - 1), clamp(b), clamp(b + 1), clamp(b + 2)],
        catmull_rom(t),
    )
}

/// Bicubic upsampling of a row-major `control x control` grid to
/// `height x width`. Corners of the output align with corner controls.
pub fn bicubic_upsample(controls: &[f64], control: usize, height: usize, width: usize) -> Vec<f64> {
    let cols: Vec<_> = (0..width).map(|j| stencil(j, width, control)).collect();
    let mut out = Vec::with_capacity(height * width);
    for i in 0..height {
        let (ri, rw) = stencil(i, height, control);
        for (ci, cw) in &cols {
            let mut acc = 0.0;
            for (r, wr) in ri.iter().zip(&rw) {
                for (c, wc) in ci.iter().zip(cw) {
                    acc += wr * wc * controls[r * control + c];
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Smooth phase image from random controls and its noisy observation.
/// Control phases are drawn first (row-major), then per-pixel noise.
pub fn gen_2d(spec: &SyntheticSpec2D) -> Result<(CircleSignal, CircleSignal)> {
    if spec.control < 2 || spec.height < spec.control || spec.width < spec.control {
        return Err(Error::InvalidSize(format!(
            "image {}x{} must be at least the control grid {}",
            spec.height, spec.width, spec.control
        )));
    }
    check_std("control_std", spec.control_std)?;
    check_std("noise_std", spec.noise_std)?;
    let mut gauss = GaussianStream::new(spec.seed);
    let controls: Vec<f64> = (0..spec.control * spec.control)
        .map(|_| spec.control_std * gauss.next_normal())
        .collect();
    let truth = bicubic_upsample(&controls, spec.control, spec.height, spec.width);
    let noisy: Vec<f64> = truth
        .iter()
        .map(|&w| w + spec.noise_std * gauss.next_normal())
        .collect();
    Ok((
        CircleSignal::from_angles(&truth),
        CircleSignal::from_angles(&noisy),
    ))
}

//! Gaussian circular-mean filtering of grid signals.

use num_complex::Complex64;

use crate::circle::{project_to_circle, CircleSignal};
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, Topology};

/// Kernel radius in units of the standard deviation.
pub const TRUNCATION: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct FilterOutput {
    pub x: CircleSignal,
    /// Pixels whose filtered value is indistinguishable from zero at the
    /// accuracy of the truncated kernel.
    pub degenerate: Vec<bool>,
}

/// Half-sample symmetric extension: `-1 -> 0`, `len -> len - 1`.
fn reflect(i: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let m = i.rem_euclid(period) as usize;
    if m >= len {
        2 * len - 1 - m
    } else {
        m
    }
}

/// Normalized kernel on `[-radius, radius]` and the mass the truncation
/// discards from the untruncated sampled Gaussian.
fn gaussian_kernel(std: f64) -> (Vec<f64>, f64) {
    let radius = (TRUNCATION * std).ceil() as isize;
    let g = |d: isize| (-(d * d) as f64 / (2.0 * std * std)).exp();
    let kept: f64 = (-radius..=radius).map(g).sum();
    let far = radius + (8.0 * std).ceil() as isize + 8;
    let dropped: f64 = 2.0 * (radius + 1..=far).map(g).sum::<f64>();
    let kernel = (-radius..=radius).map(|d| g(d) / kept).collect();
    (kernel, dropped / (kept + dropped))
}

fn convolve_line(
    src: &[Complex64],
    dst: &mut [Complex64],
    len: usize,
    stride: usize,
    kernel: &[f64],
) {
    let radius = (kernel.len() / 2) as isize;
    for i in 0..len {
        let mut acc = Complex64::default();
        for (k, &kv) in kernel.iter().enumerate() {
            let j = reflect(i as isize + k as isize - radius, len);
            acc += src[j * stride] * kv;
        }
        dst[i * stride] = acc;
    }
}

/// Convolves `y` with a separable Gaussian of standard deviation
/// `kernel_std` pixels (truncated at four standard deviations, symmetric
/// boundary extension), then projects each pixel onto the circle.
///
/// Chains are treated as `1 x N` images. A standard deviation below half a
/// pixel is a delta kernel.
pub fn circular_mean_filter(g: &Graph, y: &[Complex64], kernel_std: f64) -> Result<FilterOutput> {
    let (height, width) = match g.topology() {
        Topology::Grid { height, width } => (height, width),
        Topology::Chain => (1, g.node_count()),
        Topology::General => {
            return Err(Error::UnsupportedTopology(
                "circular mean filtering needs a grid".into(),
            ))
        }
    };
    check_len("pixels", height * width, y.len())?;
    if !(kernel_std > 0.0 && kernel_std.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "kernel standard deviation must be positive, got {kernel_std}"
        )));
    }

    let (filtered, threshold) = if kernel_std < 0.5 {
        (y.to_vec(), 0.0)
    } else {
        let (kernel, tail) = gaussian_kernel(kernel_std);
        let mut rows = vec![Complex64::default(); y.len()];
        for i in 0..height {
            let off = i * width;
            convolve_line(
                &y[off..off + width],
                &mut rows[off..off + width],
                width,
                1,
                &kernel,
            );
        }
        let mut out = vec![Complex64::default(); y.len()];
        for j in 0..width {
            convolve_line(&rows[j..], &mut out[j..], height, width, &kernel);
        }
        // both passes truncate
        (out, 2.0 * tail)
    };

    let mut degenerate = Vec::with_capacity(y.len());
    let values = filtered
        .iter()
        .map(|&z| {
            let (p, d) = project_to_circle(z);
            degenerate.push(d || z.norm() <= threshold);
            p
        })
        .collect();
    Ok(FilterOutput {
        x: CircleSignal::new(values)?,
        degenerate,
    })
}

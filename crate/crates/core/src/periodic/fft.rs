//! Sampling-grid transforms shared by the 1D and 2D projections.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Normalized forward DFT of uniform samples on [0, 1).
///
/// Entry `j` holds the coefficient of `e^{2πijx}` (indices above n/2 alias
/// negative frequencies).
pub fn forward_1d(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Normalized forward DFT of a row-major `ny x nz` grid of samples.
pub fn forward_2d(samples: &[f64], ny: usize, nz: usize) -> Vec<Complex64> {
    assert_eq!(samples.len(), ny * nz);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fz = planner.plan_fft_forward(nz);
    for row in buf.chunks_mut(nz) {
        fz.process(row);
    }
    let fy = planner.plan_fft_forward(ny);
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for k in 0..nz {
        for j in 0..ny {
            col[j] = buf[j * nz + k];
        }
        fy.process(&mut col);
        for j in 0..ny {
            buf[j * nz + k] = col[j];
        }
    }
    let s = 1.0 / (ny * nz) as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Index of signed frequency `k` in a length-`n` DFT output.
pub fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

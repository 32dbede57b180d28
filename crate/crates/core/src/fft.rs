//! Multi-dimensional complex FFT over row-major buffers.

use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// In-place unnormalized transform along every axis of a row-major array.
///
/// `Forward` uses the kernel `e^{-2πi jk/n}`, `Inverse` uses `e^{+2πi jk/n}`.
pub(crate) fn transform(data: &mut [Complex64], sizes: &[usize], direction: FftDirection) {
    let total: usize = sizes.iter().product();
    assert_eq!(total, data.len());
    let mut line = Vec::new();
    for (axis, &n) in sizes.iter().enumerate() {
        if n <= 1 {
            continue;
        }
        let fft = planner().lock().unwrap().plan_fft(n, direction);
        let stride: usize = sizes[axis + 1..].iter().product();
        let outer = total / (n * stride);
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        line.resize(n, Complex64::new(0.0, 0.0));
        for o in 0..outer {
            let base = o * n * stride;
            for inner in 0..stride {
                let start = base + inner;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[start..start + n], &mut scratch);
                    continue;
                }
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }
}

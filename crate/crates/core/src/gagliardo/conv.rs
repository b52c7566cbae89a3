//! Zero-padded FFT convolution with a symmetric translation-invariant kernel.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Applies `y = W * x` on an `nx × ny` grid, where `W(d)` depends on
/// `(|d1|, |d2|)` and is given for `|d1| < nx`, `|d2| < ny`.
pub struct Convolver<T: Real> {
    nx: usize,
    ny: usize,
    mx: usize,
    my: usize,
    /// Kernel spectrum in transposed layout (`mx` rows of length `my`).
    kernel_hat: Vec<Complex<T>>,
    fx: Arc<dyn Fft<T>>,
    ix: Arc<dyn Fft<T>>,
    fy: Arc<dyn Fft<T>>,
    iy: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Convolver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("mx", &self.mx)
            .field("my", &self.my)
            .finish()
    }
}

fn transpose<T: Copy + Send + Sync>(src: &[T], rows: usize, cols: usize, dst: &mut [T]) {
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = src[r * cols + c];
        }
    });
}

fn fft_rows<T: Real>(plan: &Arc<dyn Fft<T>>, buf: &mut [Complex<T>], len: usize) {
    let scratch_len = plan.get_inplace_scratch_len();
    buf.par_chunks_mut(len).for_each_init(
        || vec![Complex::new(T::zero(), T::zero()); scratch_len],
        |scratch, row| plan.process_with_scratch(row, scratch),
    );
}

impl<T: Real> Convolver<T> {
    /// `weight(a, b)` returns `W(a, b)` for `0 ≤ a < nx`, `0 ≤ b < ny`.
    pub fn new<F: Fn(usize, usize) -> T>(nx: usize, ny: usize, weight: F) -> Self {
        let mx = 2 * nx;
        let my = 2 * ny;
        let mut planner = FftPlanner::<T>::new();
        let fx = planner.plan_fft_forward(mx);
        let ix = planner.plan_fft_inverse(mx);
        let fy = planner.plan_fft_forward(my);
        let iy = planner.plan_fft_inverse(my);
        let wrap = |k: usize, n: usize, m: usize| -> Option<usize> {
            if k < n {
                Some(k)
            } else if k == n {
                None
            } else {
                Some(m - k)
            }
        };
        let mut kern = vec![Complex::new(T::zero(), T::zero()); mx * my];
        for q in 0..my {
            let Some(b) = wrap(q, ny, my) else { continue };
            for p in 0..mx {
                let Some(a) = wrap(p, nx, mx) else { continue };
                kern[q * mx + p] = Complex::new(weight(a, b), T::zero());
            }
        }
        fft_rows(&fx, &mut kern, mx);
        let mut t = vec![Complex::new(T::zero(), T::zero()); mx * my];
        transpose(&kern, my, mx, &mut t);
        fft_rows(&fy, &mut t, my);
        Self { nx, ny, mx, my, kernel_hat: t, fx, ix, fy, iy }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// `output = W * input` restricted to the grid (both `nx·ny`, row-major).
    pub fn apply(&self, input: &[T], output: &mut [T]) {
        let (nx, ny, mx, my) = (self.nx, self.ny, self.mx, self.my);
        assert_eq!(input.len(), nx * ny);
        assert_eq!(output.len(), nx * ny);
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; mx * ny];
        buf.par_chunks_mut(mx).enumerate().for_each(|(j, row)| {
            for i in 0..nx {
                row[i] = Complex::new(input[j * nx + i], T::zero());
            }
        });
        fft_rows(&self.fx, &mut buf, mx);
        // transpose ny×mx into mx×my with zero padding in the second half
        let mut t = vec![zero; mx * my];
        t.par_chunks_mut(my).enumerate().for_each(|(p, col)| {
            for q in 0..ny {
                col[q] = buf[q * mx + p];
            }
        });
        fft_rows(&self.fy, &mut t, my);
        t.par_iter_mut().zip(self.kernel_hat.par_iter()).for_each(|(a, k)| *a = *a * *k);
        fft_rows(&self.iy, &mut t, my);
        buf.par_chunks_mut(mx).enumerate().for_each(|(q, row)| {
            for p in 0..mx {
                row[p] = t[p * my + q];
            }
        });
        fft_rows(&self.ix, &mut buf, mx);
        let norm = T::one() / T::from_usize_(mx * my);
        output.par_chunks_mut(nx).enumerate().for_each(|(j, out)| {
            for i in 0..nx {
                out[i] = buf[j * mx + i].re * norm;
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_convolution() {
        let (nx, ny) = (7, 5);
        let w = |a: usize, b: usize| 1.0 / (1.0 + (a * a + 3 * b * b) as f64);
        let conv = Convolver::<f64>::new(nx, ny, w);
        let x: Vec<f64> = (0..nx * ny).map(|k| ((k * 37 % 11) as f64) - 5.0).collect();
        let mut y = vec![0.0; nx * ny];
        conv.apply(&x, &mut y);
        for j in 0..ny {
            for i in 0..nx {
                let mut acc = 0.0;
                for q in 0..ny {
                    for p in 0..nx {
                        acc += w(i.abs_diff(p), j.abs_diff(q)) * x[q * nx + p];
                    }
                }
                assert!((acc - y[j * nx + i]).abs() < 1e-12);
            }
        }
    }
}

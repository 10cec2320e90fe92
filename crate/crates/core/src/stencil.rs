//! Grid stencils for the dispersal and birth convolutions.
//!
//! A stencil computes `(S u)_i = sum_j w_j u_{i - k_j}` with consecutive
//! offsets `k_j = min_offset + j`.

use crate::error::{Error, Result};
use crate::kernels::{HeatKernelParams, Kernel};

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub min_offset: isize,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn identity() -> Self {
        Stencil { min_offset: 0, weights: vec![1.0] }
    }

    pub fn max_offset(&self) -> isize {
        self.min_offset + self.weights.len() as isize - 1
    }

    /// Largest index distance the stencil reads.
    pub fn reach(&self) -> usize {
        self.min_offset.unsigned_abs().max(self.max_offset().unsigned_abs())
    }

    pub fn offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(j, &w)| (self.min_offset + j as isize, w))
    }

    /// Discrete Laplace transform `sum_j w_j e^{-lambda k_j h}`.
    pub fn transform(&self, lambda: f64, h: f64) -> f64 {
        self.offsets().map(|(k, w)| w * (-lambda * k as f64 * h).exp()).sum()
    }

    /// Apply to `ext`, where `ext[pad + i]` holds `u_i`; returns entries `first..=last`.
    pub fn apply_range(&self, ext: &[f64], pad: usize, first: isize, last: isize) -> Vec<f64> {
        let mut out = vec![0.0; (last - first + 1).max(0) as usize];
        for (k, w) in self.offsets() {
            let base = pad as isize - k;
            for (o, i) in out.iter_mut().zip(first..=last) {
                *o += w * ext[(base + i) as usize];
            }
        }
        out
    }
}

/// Sampled dispersal kernel `w_k proportional to J(k h)`, normalised to unit sum.
pub fn kernel_stencil(k: &Kernel, h: f64) -> Result<Stencil> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
    }
    let half = (k.window() / h).floor() as isize;
    let mut weights: Vec<f64> = (-half..=half).map(|i| k.density(i as f64 * h)).collect();
    let n = weights.len();
    for i in 0..n / 2 {
        // exact evenness
        let avg = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = avg;
        weights[n - 1 - i] = avg;
    }
    let s: f64 = weights.iter().sum();
    if !(s > 0.0) {
        return Ok(Stencil::identity());
    }
    weights.iter_mut().for_each(|w| *w /= s);
    Ok(Stencil { min_offset: -half, weights })
}

/// Birth-term stencil for `int f_beta(y) b(u(x - y - shift)) dy`.
///
/// With `beta = 0` the shift is resolved by linear interpolation.
pub fn birth_stencil(heat: HeatKernelParams, shift: f64, h: f64) -> Stencil {
    if heat.beta == 0.0 {
        let pos = shift / h;
        let m = pos.floor();
        let theta = pos - m;
        let m = m as isize;
        if theta < 1e-12 {
            return Stencil { min_offset: m, weights: vec![1.0] };
        }
        if theta > 1.0 - 1e-12 {
            return Stencil { min_offset: m + 1, weights: vec![1.0] };
        }
        return Stencil { min_offset: m, weights: vec![1.0 - theta, theta] };
    }
    let width = 12.0 * (2.0 * heat.beta).sqrt();
    let lo = ((shift - width) / h).floor() as isize;
    let hi = ((shift + width) / h).ceil() as isize;
    let mut weights: Vec<f64> = (lo..=hi).map(|k| heat.density(k as f64 * h - shift)).collect();
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);
    Stencil { min_offset: lo, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_kernel, KernelSpec};

    #[test]
    fn kernel_stencil_is_even_unit_mass() {
        let k = make_kernel(KernelSpec::gaussian(1.0)).unwrap();
        let s = kernel_stencil(&k, 0.05).unwrap();
        assert_eq!(s.min_offset, -200);
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let n = s.weights.len();
        for i in 0..n {
            assert_eq!(s.weights[i], s.weights[n - 1 - i]);
        }
        // trapezoid sums of smooth kernels are spectrally accurate
        assert!((s.transform(1.0, 0.05) - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn birth_stencil_interpolates_shift() {
        let s = birth_stencil(HeatKernelParams::dirac(), 0.25, 0.1);
        assert_eq!(s.min_offset, 2);
        assert!((s.weights[0] - 0.5).abs() < 1e-12 && (s.weights[1] - 0.5).abs() < 1e-12);
        let s = birth_stencil(HeatKernelParams::dirac(), 0.0, 0.1);
        assert_eq!(s, Stencil::identity());
        let h = HeatKernelParams::new(0.5).unwrap();
        let s = birth_stencil(h, 1.0, 0.05);
        assert!((s.transform(0.7, 0.05) - crate::kernels::heat_moment(h, 0.7, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn apply_range_matches_direct_sum() {
        let s = Stencil { min_offset: -1, weights: vec![0.25, 0.5, 0.25] };
        let ext = [0.0, 1.0, 2.0, 4.0, 8.0];
        let out = s.apply_range(&ext, 1, 0, 2);
        assert_eq!(out, vec![0.25 * 2.0 + 0.5 * 1.0, 0.25 * 4.0 + 0.5 * 2.0 + 0.25, 0.25 * 8.0 + 0.5 * 4.0 + 0.25 * 2.0]);
    }
}

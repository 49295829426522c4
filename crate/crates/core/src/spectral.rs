//! Fourier spectra of signal traces and peak analysis.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::engine::SignalTrace;
use crate::{Error, Result, C64};

/// In-place iterative radix-2 FFT, `X_k = sum_n x_n e^{-2 pi i k n / N}`.
///
/// # Panics
/// If the length is not a power of two.
pub fn fft_in_place(buf: &mut [C64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = -2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = C64::from_polar(1.0, step * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Discrete Fourier transform of real data of any length.
///
/// Uses the FFT for power-of-two lengths and direct summation otherwise.
pub fn dft(x: &[f64]) -> Vec<C64> {
    let n = x.len();
    if n.is_power_of_two() {
        let mut buf: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        fft_in_place(&mut buf);
        return buf;
    }
    (0..n)
        .map(|k| {
            x.iter().enumerate().map(|(j, &v)| C64::from_polar(v, -2.0 * PI * ((k * j) % n) as f64 / n as f64)).sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumOptions {
    pub window: Window,
    /// Zero-padding factor; the transform length is
    /// `padding * next_power_of_two(N)`.
    pub padding: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { window: Window::Rectangular, padding: 4 }
    }
}

/// One-sided magnitude spectrum.
///
/// Amplitudes are scaled so that `a cos(2 pi f tau)` filling the trace shows
/// a peak of height close to `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Frequencies in Hz, from 0 to Nyquist.
    pub freqs: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Resolution `1 / (N dtau)` of the source trace (Hz).
    pub resolution: f64,
    /// Spacing of `freqs` after zero padding (Hz).
    pub bin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Interpolated frequency (Hz).
    pub freq: f64,
    /// Interpolated height.
    pub amplitude: f64,
    pub prominence: f64,
    /// Index of the sampled maximum in the spectrum.
    pub index: usize,
}

/// Spectrum with default options (rectangular window, 4x zero padding).
pub fn spectrum(trace: &SignalTrace) -> Result<Spectrum> {
    spectrum_with(trace, SpectrumOptions::default())
}

pub fn spectrum_with(trace: &SignalTrace, opts: SpectrumOptions) -> Result<Spectrum> {
    let n = trace.len();
    if n < 8 {
        return Err(Error::invalid("a spectrum needs at least 8 samples"));
    }
    let dt = trace.uniform_step()?;
    if opts.padding == 0 {
        return Err(Error::invalid("padding factor must be at least 1"));
    }
    let mean = crate::stats::pairwise_sum(&trace.signal) / n as f64;
    let (weights, gain): (Vec<f64>, f64) = match opts.window {
        Window::Rectangular => (vec![1.0; n], 1.0),
        Window::Hann => {
            let w: Vec<f64> = (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos()).collect();
            let g = w.iter().sum::<f64>() / n as f64;
            (w, g)
        }
    };
    let m = n.next_power_of_two() * opts.padding.next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (k, (s, w)) in trace.signal.iter().zip(&weights).enumerate() {
        buf[k] = C64::new((s - mean) * w, 0.0);
    }
    fft_in_place(&mut buf);
    let scale = 2.0 / (n as f64 * gain);
    let half = m / 2 + 1;
    let bin = 1.0 / (m as f64 * dt);
    Ok(Spectrum {
        freqs: (0..half).map(|k| k as f64 * bin).collect(),
        amplitude: buf[..half].iter().map(|c| c.norm() * scale).collect(),
        resolution: 1.0 / (n as f64 * dt),
        bin,
    })
}

/// Topographic prominence of the maximum at `i`.
fn prominence(a: &[f64], i: usize) -> f64 {
    let h = a[i];
    let mut left = h;
    let mut j = i;
    while j > 0 {
        j -= 1;
        if a[j] > h {
            break;
        }
        left = left.min(a[j]);
    }
    let mut right = h;
    let mut j = i;
    while j + 1 < a.len() {
        j += 1;
        if a[j] > h {
            break;
        }
        right = right.min(a[j]);
    }
    h - left.max(right)
}

/// Local maxima with prominence at least `min_prominence`, refined by
/// three-point parabolic interpolation, in order of frequency.
pub fn find_peaks(s: &Spectrum, min_prominence: f64) -> Vec<Peak> {
    let a = &s.amplitude;
    let mut peaks = Vec::new();
    for i in 1..a.len().saturating_sub(1) {
        if !(a[i] > a[i - 1] && a[i] >= a[i + 1]) {
            continue;
        }
        let p = prominence(a, i);
        if p < min_prominence || p <= 0.0 {
            continue;
        }
        let (l, c, r) = (a[i - 1], a[i], a[i + 1]);
        let denom = l - 2.0 * c + r;
        let delta = if denom != 0.0 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        peaks.push(Peak {
            freq: s.freqs[i] + delta * s.bin,
            amplitude: c - 0.25 * (l - r) * delta,
            prominence: p,
            index: i,
        });
    }
    peaks
}

/// The most prominent peak, if any rises above `min_prominence`.
pub fn dominant_peak(s: &Spectrum, min_prominence: f64) -> Option<Peak> {
    find_peaks(s, min_prominence).into_iter().max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
}

/// Whether distinct peaks near `f1` and `f2` (Hz) are both present and the
/// lowest point between them falls below 0.9 times the smaller of the two.
///
/// A peak counts as belonging to `f` when it is the highest peak within half
/// the separation `|f1 - f2|` of `f`.
pub fn resolvable(s: &Spectrum, f1: f64, f2: f64) -> Result<bool> {
    if f1 == f2 || !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::invalid("resolvable needs two distinct finite frequencies"));
    }
    let (f1, f2) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
    let tol = 0.5 * (f2 - f1);
    let max = s.amplitude.iter().cloned().fold(0.0, f64::max);
    let peaks = find_peaks(s, 1e-6 * max);
    let near = |f: f64| {
        peaks.iter().filter(|p| (p.freq - f).abs() < tol).max_by(|a, b| a.amplitude.total_cmp(&b.amplitude)).copied()
    };
    let (Some(p1), Some(p2)) = (near(f1), near(f2)) else {
        return Ok(false);
    };
    if p1.index >= p2.index {
        return Ok(false);
    }
    let valley = s.amplitude[p1.index..=p2.index].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(valley < 0.9 * p1.amplitude.min(p2.amplitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::linear_grid;

    fn cosine_trace(f0: f64, periods: f64, n: usize) -> SignalTrace {
        let dt = periods / f0 / n as f64;
        let tau: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let sig = tau.iter().map(|t| (2.0 * PI * f0 * t).cos()).collect();
        SignalTrace::new(tau, sig).unwrap()
    }

    #[test]
    fn fft_matches_direct_sum() {
        let x: Vec<f64> = (0..16).map(|k| ((k * 7) % 5) as f64 - 1.3).collect();
        let fast = dft(&x);
        for (k, v) in fast.iter().enumerate() {
            let direct: C64 =
                x.iter().enumerate().map(|(j, &xj)| C64::from_polar(xj, -2.0 * PI * (k * j) as f64 / 16.0)).sum();
            assert!((v - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_signal_has_zero_spectrum() {
        let tr = SignalTrace::new(linear_grid(1.0, 64), vec![0.7; 64]).unwrap();
        let s = spectrum(&tr).unwrap();
        assert!(s.amplitude.iter().all(|&a| a < 1e-14));
        assert!(find_peaks(&s, 0.0).is_empty());
    }

    #[test]
    fn cosine_peak_position_and_height() {
        let f0 = 1.25e6;
        let tr = cosine_trace(f0, 8.0, 256);
        let s = spectrum(&tr).unwrap();
        let p = dominant_peak(&s, 0.1).unwrap();
        assert!((p.freq - f0).abs() < 0.1 * s.bin);
        assert!((p.amplitude - 1.0).abs() < 0.02);
        assert!((s.resolution - f0 / 8.0).abs() < 1e-6);
        assert!((s.bin * 4.0 - s.resolution).abs() < 1e-6);
    }

    #[test]
    fn hann_window_keeps_amplitude_scale() {
        let tr = cosine_trace(2.0e6, 10.0, 512);
        let s = spectrum_with(&tr, SpectrumOptions { window: Window::Hann, padding: 4 }).unwrap();
        let p = dominant_peak(&s, 0.1).unwrap();
        assert!((p.amplitude - 1.0).abs() < 0.02);
        assert!((p.freq - 2.0e6).abs() < 0.1 * s.bin);
    }

    #[test]
    fn two_close_cosines_are_separate_peaks() {
        let n = 512;
        let dt = 1e-8;
        let res = 1.0 / (n as f64 * dt);
        let (f1, f2) = (20.0 * res, 23.0 * res);
        let tau = linear_grid(dt * (n - 1) as f64, n);
        let sig = tau.iter().map(|t| (2.0 * PI * f1 * t).cos() + (2.0 * PI * f2 * t).cos()).collect();
        let s = spectrum(&SignalTrace::new(tau, sig).unwrap()).unwrap();
        let big: Vec<Peak> = find_peaks(&s, 0.3).into_iter().collect();
        assert_eq!(big.len(), 2);
        assert!(resolvable(&s, f1, f2).unwrap());
        assert!(resolvable(&s, f1, f1).is_err());
    }

    #[test]
    fn merged_lines_are_not_resolvable() {
        let n = 512;
        let dt = 1e-8;
        let res = 1.0 / (n as f64 * dt);
        let (f1, f2) = (20.0 * res, 20.5 * res);
        let tau = linear_grid(dt * (n - 1) as f64, n);
        let sig = tau.iter().map(|t| (2.0 * PI * f1 * t).cos() + (2.0 * PI * f2 * t).cos()).collect();
        let s = spectrum(&SignalTrace::new(tau, sig).unwrap()).unwrap();
        assert!(!resolvable(&s, f1, f2).unwrap());
    }

    #[test]
    fn rejects_short_or_irregular_traces() {
        let tr = SignalTrace::new(linear_grid(1.0, 7), vec![0.0; 7]).unwrap();
        assert!(spectrum(&tr).is_err());
        let mut tau = linear_grid(1.0, 16);
        tau[5] += 0.01;
        let tr = SignalTrace::new(tau, vec![0.0; 16]).unwrap();
        assert_eq!(spectrum(&tr), Err(Error::NonUniformGrid));
    }
}

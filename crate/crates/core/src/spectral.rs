//! Fourier tools on the uniform grid `s_j = 2πj/N`.

use num_complex::Complex64;
use rustfft::FftPlanner;

fn fft(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    plan.process(data);
}

/// Signed wavenumber of FFT bin `k` for an `n`-point transform; the Nyquist bin maps to 0.
fn wavenumber(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        k as f64
    } else if 2 * k == n {
        0.0
    } else {
        k as f64 - n as f64
    }
}

pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| crate::PERIOD * j as f64 / n as f64).collect()
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Periodic trapezoid rule, normalised: `(1/2π) ∫_0^{2π} f`.
pub fn mean(x: &[Complex64]) -> Complex64 {
    x.iter().sum::<Complex64>() / x.len() as f64
}

pub fn mean_real(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `∫_0^{2π} f` by the trapezoid rule.
pub fn integral(x: &[Complex64]) -> Complex64 {
    mean(x) * crate::PERIOD
}

pub fn derivative(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut c = x.to_vec();
    fft(&mut c, false);
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= Complex64::new(0.0, wavenumber(k, n)) / n as f64;
    }
    fft(&mut c, true);
    c
}

pub fn derivative_real(x: &[f64]) -> Vec<f64> {
    derivative(&to_complex(x)).into_iter().map(|c| c.re).collect()
}

/// `F(s_j) = ∫_0^{s_j} f`. The mean of `f` contributes an explicit linear term;
/// means below `1e-10` are treated as zero.
pub fn cumulative_integral(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut c = x.to_vec();
    fft(&mut c, false);
    let m = c[0] / n as f64;
    let m = if m.norm() < 1e-10 { Complex64::new(0.0, 0.0) } else { m };
    c[0] = Complex64::new(0.0, 0.0);
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        let w = wavenumber(k, n);
        *ck = if w == 0.0 { Complex64::new(0.0, 0.0) } else { *ck / Complex64::new(0.0, w) / n as f64 };
    }
    fft(&mut c, true);
    let c0 = c[0];
    let s = grid(n);
    c.iter().zip(s).map(|(v, sj)| *v - c0 + m * sj).collect()
}

/// Band-limited interpolant of a real periodic function, used to feed sampled
/// coefficients into ODE right-hand sides.
#[derive(Clone, Debug)]
pub struct Interpolant {
    mean: f64,
    modes: Vec<Complex64>,
}

impl Interpolant {
    pub fn new(samples: &[f64]) -> Self {
        let n = samples.len();
        let mut c = to_complex(samples);
        fft(&mut c, false);
        let scale = 1.0 / n as f64;
        let mut modes: Vec<Complex64> = c[1..n / 2].iter().map(|v| v * 2.0 * scale).collect();
        let peak = modes.iter().fold(0.0f64, |a, v| a.max(v.norm())).max(c[0].norm() * scale);
        while modes.last().is_some_and(|v| v.norm() <= 1e-15 * peak.max(1e-300)) {
            modes.pop();
        }
        Interpolant { mean: c[0].re * scale, modes }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let w = Complex64::from_polar(1.0, s);
        let mut e = w;
        let mut acc = self.mean;
        for (k, c) in self.modes.iter().enumerate() {
            if k > 0 && k % 32 == 0 {
                e = Complex64::from_polar(1.0, (k + 1) as f64 * s);
            }
            acc += (c * e).re;
            e *= w;
        }
        acc
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid(n).into_iter().map(f).collect()
    }

    #[test]
    fn derivative_of_trig() {
        let x = sample(64, |s| (3.0 * s).sin() + (s.cos()).exp());
        let d = derivative_real(&x);
        for (j, s) in grid(64).into_iter().enumerate() {
            let exact = 3.0 * (3.0 * s).cos() - s.sin() * s.cos().exp();
            assert!((d[j] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_with_mean() {
        let x = to_complex(&sample(128, |s| 0.5 + (2.0 * s).cos()));
        let f = cumulative_integral(&x);
        for (j, s) in grid(128).into_iter().enumerate() {
            let exact = 0.5 * s + (2.0 * s).sin() / 2.0;
            assert!((f[j].re - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolant_off_grid() {
        let g = |s: f64| (s.sin()).exp() * (0.3 * (2.0 * s).cos() + 1.0);
        let ip = Interpolant::new(&sample(256, g));
        for s in [0.1, 1.234, 5.9, 6.2] {
            assert!((ip.eval(s) - g(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_is_spectral() {
        let x = to_complex(&sample(32, |s| (s.cos()).exp()));
        // 2π I_0(1)
        assert!((integral(&x).re - 7.954926521012845).abs() < 1e-13);
    }
}

//! Scalar Jacobi fields along a closed geodesic.

use crate::geodesic::{check_grid, GeodesicPath};
use crate::spectral::{self, Interpolant};
use crate::{ode, surface, Error, Result, PERIOD};
use nalgebra::Vector3;
use nalgebra::SVector;
use num_complex::Complex64;

pub const WRONSKIAN_TOLERANCE: f64 = 1e-8;
pub const ELLIPTIC_TOLERANCE: f64 = 1e-6;

/// Fundamental solutions of `y'' + τ y = 0` sampled on the path grid.
#[derive(Clone, Debug)]
pub struct JacobiFrame {
    /// `y1(0) = 0, y1'(0) = 1`.
    pub y1: Vec<f64>,
    pub dy1: Vec<f64>,
    /// `y2(0) = 1, y2'(0) = 0`.
    pub y2: Vec<f64>,
    pub dy2: Vec<f64>,
    /// `[[y2(2π), y1(2π)], [y2'(2π), y1'(2π)]]`.
    pub poincare: [[f64; 2]; 2],
    /// Floquet angle; `None` when the monodromy is not elliptic.
    pub floquet: Option<f64>,
    pub wronskian_drift: f64,
}

impl JacobiFrame {
    pub fn n(&self) -> usize {
        self.y1.len()
    }

    /// `Y = y2 + i y1`, so `Y(0) = 1` and `Y'(0) = i`.
    pub fn y(&self) -> Vec<Complex64> {
        self.y2.iter().zip(&self.y1).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn dy(&self) -> Vec<Complex64> {
        self.dy2.iter().zip(&self.dy1).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    /// `ω(Y, Ȳ) = Y Ȳ' − Y' Ȳ` at every sample.
    pub fn omega_samples(&self) -> Vec<Complex64> {
        self.y().iter().zip(self.dy()).map(|(y, dy)| y * dy.conj() - dy * y.conj()).collect()
    }

    /// Mean of [`Self::omega_samples`]; equals `−2i`.
    pub fn omega(&self) -> Complex64 {
        spectral::mean(&self.omega_samples())
    }

    /// Every `step`-th sample, matching [`GeodesicPath::subsample`].
    pub fn subsample(&self, step: usize) -> JacobiFrame {
        let take = |v: &[f64]| v.iter().step_by(step).copied().collect();
        JacobiFrame { y1: take(&self.y1), dy1: take(&self.dy1), y2: take(&self.y2), dy2: take(&self.dy2), ..self.clone() }
    }

    /// Max-norm distance of the Poincaré matrix from the identity.
    pub fn poincare_defect(&self) -> f64 {
        let m = &self.poincare;
        [m[0][0] - 1.0, m[0][1], m[1][0], m[1][1] - 1.0].iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Integrates the Jacobi equation together with the geodesic, taking `τ` from the metric.
pub fn solve_fundamental(path: &GeodesicPath) -> Result<JacobiFrame> {
    let metric = &path.metric;
    let n = path.n();
    check_grid(n)?;
    let g = surface::pack(&path.init.point.ambient(), &path.init.tangent.0);
    let mut y0 = SVector::<f64, 10>::zeros();
    y0.fixed_rows_mut::<6>(0).copy_from(&g);
    y0.fixed_rows_mut::<4>(6).copy_from(&SVector::from([0.0, 1.0, 1.0, 0.0]));
    let rhs = |_: f64, y: &SVector<f64, 10>, dy: &mut SVector<f64, 10>| {
        let mut dg = SVector::<f64, 6>::zeros();
        surface::geodesic_rhs(metric, &y.fixed_rows::<6>(0).into_owned(), &mut dg);
        dy.fixed_rows_mut::<6>(0).copy_from(&dg);
        let t = metric.curvature_ambient(&Vector3::new(y[0], y[1], y[2]));
        dy[6] = y[7];
        dy[7] = -t * y[6];
        dy[8] = y[9];
        dy[9] = -t * y[8];
    };
    let states = ode::sample_uniform(rhs, y0, PERIOD, n)?;
    let jac: Vec<SVector<f64, 4>> = states.iter().map(|y| y.fixed_rows::<4>(6).into_owned()).collect();
    frame_from_states(&jac)
}

/// Fundamental solutions for a sampled periodic curvature `τ(s)`.
pub fn solve_fundamental_tau(tau: &[f64]) -> Result<JacobiFrame> {
    let n = tau.len();
    check_grid(n)?;
    let ip = Interpolant::new(tau);
    let rhs = |s: f64, y: &SVector<f64, 4>, dy: &mut SVector<f64, 4>| {
        let t = ip.eval(s);
        dy[0] = y[1];
        dy[1] = -t * y[0];
        dy[2] = y[3];
        dy[3] = -t * y[2];
    };
    let states = ode::sample_uniform(rhs, SVector::from([0.0, 1.0, 1.0, 0.0]), PERIOD, n)?;
    frame_from_states(&states)
}

fn frame_from_states(states: &[SVector<f64, 4>]) -> Result<JacobiFrame> {
    let n = states.len() - 1;
    let wronskian_drift = states
        .iter()
        .map(|y| (y[2] * y[1] - y[0] * y[3] - 1.0).abs())
        .fold(0.0f64, f64::max);
    if wronskian_drift > WRONSKIAN_TOLERANCE {
        return Err(Error::Integration(format!("Wronskian drift {wronskian_drift:.3e}")));
    }
    let end = states[n];
    let poincare = [[end[2], end[0]], [end[3], end[1]]];
    let floquet = floquet_exponents(&poincare).ok();
    let col = |i: usize| states[..n].iter().map(|y| y[i]).collect::<Vec<_>>();
    Ok(JacobiFrame { y1: col(0), dy1: col(1), y2: col(2), dy2: col(3), poincare, floquet, wronskian_drift })
}

/// Floquet angle `α ∈ [0, π]` of an elliptic symplectic 2×2 matrix.
pub fn floquet_exponents(m: &[[f64; 2]; 2]) -> Result<f64> {
    let half_trace = 0.5 * (m[0][0] + m[1][1]);
    if half_trace.abs() > 1.0 + ELLIPTIC_TOLERANCE {
        return Err(Error::NonEllipticMonodromy(2.0 * half_trace.abs()));
    }
    Ok(half_trace.clamp(-1.0, 1.0).acos())
}

/// `r_kq = k + ½ + (q + ½) α / 2π`.
pub fn quasi_frequency(k: u32, q: u32, alpha: f64) -> f64 {
    k as f64 + 0.5 + (q as f64 + 0.5) * alpha / PERIOD
}

/// Solution of `X'' + τ X + τ_ν F = 0` for a prescribed forcing `F`.
#[derive(Clone, Debug)]
pub struct VariationField {
    pub y_nu: Vec<Complex64>,
    pub dy_nu: Vec<Complex64>,
}

/// Solves the forced Jacobi equation by variation of parameters against the
/// frame's fundamental solutions, with spectral cumulative quadrature.
pub fn variation_field(
    frame: &JacobiFrame,
    tau_nu: &[f64],
    forcing: &[Complex64],
    ic: (Complex64, Complex64),
) -> Result<VariationField> {
    let n = frame.n();
    if tau_nu.len() != n || forcing.len() != n {
        return Err(Error::InvalidGrid(tau_nu.len().max(forcing.len())));
    }
    let f: Vec<Complex64> = tau_nu.iter().zip(forcing).map(|(t, g)| -t * g).collect();
    let a = spectral::cumulative_integral(&f.iter().zip(&frame.y2).map(|(f, y)| f * y).collect::<Vec<_>>());
    let b = spectral::cumulative_integral(&f.iter().zip(&frame.y1).map(|(f, y)| f * y).collect::<Vec<_>>());
    let (x0, dx0) = ic;
    let mut y_nu = Vec::with_capacity(n);
    let mut dy_nu = Vec::with_capacity(n);
    for j in 0..n {
        let (y1, dy1, y2, dy2) = (frame.y1[j], frame.dy1[j], frame.y2[j], frame.dy2[j]);
        y_nu.push(x0 * y2 + dx0 * y1 + y1 * a[j] - y2 * b[j]);
        dy_nu.push(x0 * dy2 + dx0 * dy1 + dy1 * a[j] - dy2 * b[j]);
    }
    Ok(VariationField { y_nu, dy_nu })
}

/// Variation of the field `field` under the real normal deformation `deform`:
/// forcing `F = deform · field`.
pub fn deformation_variation(
    frame: &JacobiFrame,
    tau_nu: &[f64],
    deform: &[f64],
    field: &[Complex64],
) -> Result<VariationField> {
    let forcing: Vec<Complex64> = deform.iter().zip(field).map(|(w, y)| w * y).collect();
    let zero = Complex64::new(0.0, 0.0);
    variation_field(frame, tau_nu, &forcing, (zero, zero))
}

impl VariationField {
    /// Max of `|X'' + τ X + τ_ν F|` with `X''` from a sixth-order difference of `X'`.
    pub fn residual(&self, tau: &[f64], tau_nu: &[f64], forcing: &[Complex64]) -> f64 {
        let n = self.y_nu.len();
        let h = PERIOD / n as f64;
        let w = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        (3..n - 3)
            .map(|j| {
                let d2: Complex64 = (0..7).map(|k| self.dy_nu[j + k - 3] * w[k]).sum::<Complex64>() / h;
                (d2 + tau[j] * self.y_nu[j] + tau_nu[j] * forcing[j]).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curvature_four() {
        let frame = solve_fundamental_tau(&vec![4.0; 256]).unwrap();
        for (j, s) in spectral::grid(256).into_iter().enumerate() {
            assert!((frame.y1[j] - (2.0 * s).sin() / 2.0).abs() < 1e-10);
        }
        assert!(frame.poincare_defect() < 1e-10);
    }

    #[test]
    fn floquet_of_rotation() {
        let a: f64 = 0.3;
        let m = [[a.cos(), -a.sin()], [a.sin(), a.cos()]];
        assert!((floquet_exponents(&m).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(floquet_exponents(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(), 0.0);
        assert!(floquet_exponents(&[[2.0, 0.0], [0.0, 0.5]]).is_err());
    }

    #[test]
    fn quasi_frequencies() {
        assert_eq!(quasi_frequency(3, 1, 0.0), 3.5);
        assert!((quasi_frequency(0, 0, 0.2) - (0.5 + 0.2 / (4.0 * std::f64::consts::PI))).abs() < 1e-15);
    }
}

//! Integral identities of Jacobi fields on closed geodesics, as residuals.

use crate::geodesic::GeodesicPath;
use crate::jacobi::{deformation_variation, variation_field, JacobiFrame};
use crate::{spectral, Error, Result, PERIOD};
use num_complex::Complex64;
use serde::Serialize;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// A raw residual and the same divided by the size of its integrand.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Residual {
    pub check: String,
    pub case: String,
    pub raw: f64,
    pub normalized: f64,
}

impl Residual {
    fn new(check: &str, case: impl Into<String>, raw: f64, scale: f64) -> Self {
        let normalized = if scale > 0.0 { raw / scale } else { raw };
        Residual { check: check.into(), case: case.into(), raw, normalized }
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.normalized <= tolerance
    }
}

fn integral(f: impl Fn(usize) -> Complex64, n: usize) -> Complex64 {
    spectral::integral(&(0..n).map(f).collect::<Vec<_>>())
}

fn abs_integral(f: impl Fn(usize) -> f64, n: usize) -> f64 {
    spectral::mean_real(&(0..n).map(f).collect::<Vec<_>>()) * PERIOD
}

fn check_sizes(path: &GeodesicPath, frame: &JacobiFrame) -> Result<usize> {
    if path.n() != frame.n() {
        return Err(Error::InvalidGrid(frame.n()));
    }
    Ok(path.n())
}

/// `|∫ τ_ν y² y₂|` for real solutions `y`, `y₂`.
pub fn check_cube(path: &GeodesicPath, frame: &JacobiFrame, y: &[f64], y2: &[f64]) -> Result<Residual> {
    let n = check_sizes(path, frame)?;
    if y.len() != n || y2.len() != n {
        return Err(Error::InvalidGrid(y.len()));
    }
    let tn = path.tau_nu();
    let f = |k: usize| tn[k] * y[k] * y[k] * y2[k];
    let raw = spectral::mean_real(&(0..n).map(f).collect::<Vec<_>>()).abs() * PERIOD;
    Ok(Residual::new("check_cube", "", raw, abs_integral(|k| f(k).abs(), n)))
}

/// [`check_cube`] over the four ordered pairs of fundamental solutions.
pub fn check_cube_pairs(path: &GeodesicPath, frame: &JacobiFrame) -> Result<Vec<Residual>> {
    let sols = [("y1", &frame.y1), ("y2", &frame.y2)];
    let mut out = Vec::new();
    for (a, ya) in sols {
        for (b, yb) in sols {
            let mut r = check_cube(path, frame, ya, yb)?;
            r.case = format!("{a},{b}");
            out.push(r);
        }
    }
    Ok(out)
}

/// `|∫ τ_s |Y|²|`.
pub fn check_tau_s(path: &GeodesicPath, frame: &JacobiFrame) -> Result<Residual> {
    let n = check_sizes(path, frame)?;
    let ts = path.tau_s();
    let y = frame.y();
    let f = |k: usize| ts[k] * y[k].norm_sqr();
    let raw = abs_integral(f, n).abs();
    Ok(Residual::new("check_tau_s", "", raw, abs_integral(|k| f(k).abs(), n)))
}

/// `|∫ τ y² ẏ² − ⅓ ∫ ẏ⁴|` for the real solution `(y, ẏ)`.
pub fn check_quartic(path: &GeodesicPath, frame: &JacobiFrame, y: &[f64], dy: &[f64]) -> Result<Residual> {
    let n = check_sizes(path, frame)?;
    let tau = path.tau();
    let lhs = abs_integral(|k| tau[k] * y[k] * y[k] * dy[k] * dy[k], n);
    let rhs = abs_integral(|k| dy[k].powi(4), n) / 3.0;
    let scale = abs_integral(|k| (tau[k] * y[k] * y[k] * dy[k] * dy[k]).abs(), n) + rhs;
    Ok(Residual::new("check_quartic", "", (lhs - rhs).abs(), scale))
}

/// `Im ∫ τ (Ẏ Ȳ)² = 0` and `∫ |Ẏ|⁴ − 2 ∫ τ |Y Ẏ|² = Re ∫ τ (Ẏ Ȳ)²`.
pub fn check_4id(path: &GeodesicPath, frame: &JacobiFrame) -> Result<(Residual, Residual)> {
    let n = check_sizes(path, frame)?;
    let tau = path.tau();
    let (y, dy) = (frame.y(), frame.dy());
    let cross = |k: usize| tau[k] * (dy[k] * y[k].conj()).powi(2);
    let i_cross = integral(cross, n);
    let cross_abs = abs_integral(|k| cross(k).norm(), n);
    let quartic = abs_integral(|k| dy[k].norm_sqr().powi(2), n);
    let mixed = abs_integral(|k| tau[k] * (y[k] * dy[k]).norm_sqr(), n);
    let mixed_abs = abs_integral(|k| (tau[k] * (y[k] * dy[k]).norm_sqr()).abs(), n);
    let imaginary = Residual::new("check_4id", "imaginary", i_cross.im.abs(), cross_abs);
    let relation =
        Residual::new("check_4id", "relation", (quartic - 2.0 * mixed - i_cross.re).abs(), quartic + 2.0 * mixed_abs + cross_abs);
    Ok((imaginary, relation))
}

/// For `m + n = 3`, `∫_0^s τ_ν Ȳ^n Y^m + (X' Z − X Z')(s)` with `X` the variation field forced by
/// `Ȳ^n Y^m / Z` (`Z = Ȳ` if `n ≥ 1`, else `Y`), plus the pointwise `Im(Y_ν Ȳ' − Y_ν' Ȳ)` for
/// the deformation `y2`.
pub fn check_commutator_reduction(path: &GeodesicPath, frame: &JacobiFrame) -> Result<Vec<Residual>> {
    let n_grid = check_sizes(path, frame)?;
    let tau_nu = path.tau_nu();
    let (y, dy) = (frame.y(), frame.dy());
    let mut out = Vec::new();
    for m in 0..=3u32 {
        let n = 3 - m;
        let (z, dz): (Vec<Complex64>, Vec<Complex64>) = if n >= 1 {
            (y.iter().map(|c| c.conj()).collect(), dy.iter().map(|c| c.conj()).collect())
        } else {
            (y.clone(), dy.clone())
        };
        let target: Vec<Complex64> =
            (0..n_grid).map(|k| y[k].conj().powu(n) * y[k].powu(m)).collect();
        let forcing: Vec<Complex64> = (0..n_grid).map(|k| target[k] / z[k]).collect();
        let zero = Complex64::new(0.0, 0.0);
        let x = variation_field(frame, &tau_nu, &forcing, (zero, zero))?;
        let integrand: Vec<Complex64> = (0..n_grid).map(|k| tau_nu[k] * target[k]).collect();
        let cum = spectral::cumulative_integral(&integrand);
        let raw = (0..n_grid)
            .map(|k| (cum[k] + x.dy_nu[k] * z[k] - x.y_nu[k] * dz[k]).norm())
            .fold(0.0, f64::max);
        let scale = abs_integral(|k| integrand[k].norm(), n_grid);
        out.push(Residual::new("check_commutator_reduction", format!("{m},{n}"), raw, scale));
    }
    let yb: Vec<Complex64> = y.iter().map(|c| c.conj()).collect();
    let dyb: Vec<Complex64> = dy.iter().map(|c| c.conj()).collect();
    let x = deformation_variation(frame, &tau_nu, &frame.y2, &y)?;
    let w: Vec<Complex64> = (0..n_grid).map(|k| x.y_nu[k] * dyb[k] - x.dy_nu[k] * yb[k]).collect();
    let raw = w.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
    let scale = w.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    out.push(Residual::new("check_commutator_reduction", "wronskian_variation", raw, scale));
    Ok(out)
}

/// Every check in a fixed order, first-obstruction check first.
pub fn run_all(path: &GeodesicPath, frame: &JacobiFrame) -> Result<Vec<Residual>> {
    let mut out = check_cube_pairs(path, frame)?;
    out.push(check_tau_s(path, frame)?);
    for (name, y, dy) in [("y1", &frame.y1, &frame.dy1), ("y2", &frame.y2, &frame.dy2)] {
        let mut r = check_quartic(path, frame, y, dy)?;
        r.case = name.into();
        out.push(r);
    }
    let (a, b) = check_4id(path, frame)?;
    out.push(a);
    out.push(b);
    out.extend(check_commutator_reduction(path, frame)?);
    Ok(out)
}

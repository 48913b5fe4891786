//! Zoll metrics of revolution on the sphere.
//!
//! The metric `f(r)² dr² + sin²r dφ²` with `f = 1 + h(cos r)` is realised on the
//! unit sphere `S² ⊂ R³` as `g(v, w) = v·w + φ(u_z) v_z w_z`, where
//! `φ(x) = (2h + h²)/(1 − x²)`. This form is smooth through both poles, so geodesics
//! are integrated in ambient coordinates and polar charts are used only for I/O.

use crate::{ode, Error, Result};
use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Step used for finite-difference curvature jets.
pub const JET_STEP: f64 = 1e-3;

/// Metric description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Round {},
    /// `h(x) = Σ_k a_k (x^{2k+1} − x)`, `k ≥ 1`.
    ZollRevolution { h_odd_coeffs: Vec<f64> },
    /// `h(x) = Σ_k b_k (x^{2k+2} − x²)`, `k ≥ 1`: even, hence not Zoll.
    RevolutionControl { h_even_coeffs: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Round,
    ZollRevolution,
    RevolutionControl,
}

/// An admissible metric of revolution with its derived polynomials.
#[derive(Clone, Debug)]
pub struct MetricModel {
    spec: MetricSpec,
    /// `h` in ascending powers of `x = cos r`.
    h: Vec<f64>,
    /// `φ = (2h + h²)/(1 − x²)` in ascending powers.
    phi: Vec<f64>,
}

fn poly_eval(c: &[f64], x: f64) -> [f64; 4] {
    let mut d = [0.0; 4];
    for &a in c.iter().rev() {
        d[3] = d[3] * x + 3.0 * d[2];
        d[2] = d[2] * x + 2.0 * d[1];
        d[1] = d[1] * x + d[0];
        d[0] = d[0] * x + a;
    }
    d
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Quotient of `p` by `1 − x²`, with the remainder's max-abs.
fn divide_one_minus_x2(p: &[f64]) -> (Vec<f64>, f64) {
    let mut r = p.to_vec();
    if r.len() < 3 {
        return (vec![0.0], r.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    let mut q = vec![0.0; r.len() - 2];
    for k in (2..r.len()).rev() {
        // r_k x^k = -r_k x^{k-2} (1 - x²) + r_k x^{k-2}
        let c = -r[k];
        q[k - 2] = c;
        r[k] = 0.0;
        r[k - 2] += -c;
    }
    (q, r.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

impl MetricModel {
    pub fn round() -> Self {
        Self::new(MetricSpec::Round {}).expect("round metric is admissible")
    }

    pub fn zoll_revolution(coeffs: &[f64]) -> Result<Self> {
        Self::new(MetricSpec::ZollRevolution { h_odd_coeffs: coeffs.to_vec() })
    }

    pub fn revolution_control(coeffs: &[f64]) -> Result<Self> {
        Self::new(MetricSpec::RevolutionControl { h_even_coeffs: coeffs.to_vec() })
    }

    pub fn new(spec: MetricSpec) -> Result<Self> {
        let (coeffs, parity) = match &spec {
            MetricSpec::Round {} => (vec![], 1),
            MetricSpec::ZollRevolution { h_odd_coeffs } => (h_odd_coeffs.clone(), 1),
            MetricSpec::RevolutionControl { h_even_coeffs } => (h_even_coeffs.clone(), 0),
        };
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMetric("non-finite profile coefficient".into()));
        }
        let mut h = vec![0.0; 2 * coeffs.len() + 4];
        for (k, &a) in coeffs.iter().enumerate() {
            h[2 * k + 4 - parity] += a;
            h[2 - parity] -= a;
        }
        while h.len() > 1 && h.last() == Some(&0.0) {
            h.pop();
        }
        let steps = 10_000;
        for i in 0..=steps {
            let x = -1.0 + 2.0 * i as f64 / steps as f64;
            let v = poly_eval(&h, x)[0];
            if v.abs() >= 1.0 {
                return Err(Error::InvalidMetric(format!("|h({x:.4})| = {:.4} >= 1", v.abs())));
            }
        }
        let mut two_h_plus_h2 = poly_mul(&h, &h);
        for (i, c) in h.iter().enumerate() {
            two_h_plus_h2[i] += 2.0 * c;
        }
        let (phi, rem) = divide_one_minus_x2(&two_h_plus_h2);
        if rem > 1e-12 {
            return Err(Error::InvalidMetric("profile does not vanish at the poles".into()));
        }
        Ok(MetricModel { spec, h, phi })
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn kind(&self) -> MetricKind {
        match self.spec {
            MetricSpec::Round {} => MetricKind::Round,
            MetricSpec::ZollRevolution { .. } => MetricKind::ZollRevolution,
            MetricSpec::RevolutionControl { .. } => MetricKind::RevolutionControl,
        }
    }

    /// Whether every geodesic is expected to close at length 2π.
    pub fn is_zoll(&self) -> bool {
        self.kind() != MetricKind::RevolutionControl
    }

    /// Profile `h(x)` and its first three derivatives.
    pub fn profile(&self, x: f64) -> [f64; 4] {
        poly_eval(&self.h, x)
    }

    /// `f(r) = 1 + h(cos r)`.
    pub fn f(&self, r: f64) -> f64 {
        1.0 + self.profile(r.cos())[0]
    }

    /// Curvature as a function of `x = cos r`, with first and second `x`-derivatives.
    pub fn curvature_x(&self, x: f64) -> [f64; 3] {
        let [h, h1, h2, h3] = self.profile(x);
        let n = [1.0 + h - x * h1, -x * h2, -h2 - x * h3];
        let a = 1.0 + h;
        let d = [a * a * a, 3.0 * a * a * h1, 6.0 * a * h1 * h1 + 3.0 * a * a * h2];
        let k = n[0] / d[0];
        let q = (n[1] * d[0] - n[0] * d[1]) / (d[0] * d[0]);
        let k2 = (n[2] * d[0] - n[0] * d[2]) / (d[0] * d[0]) - 2.0 * d[1] * q / d[0];
        [k, q, k2]
    }

    pub fn inner(&self, u: &Vector3<f64>, v: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
        v.dot(w) + poly_eval(&self.phi, u.z)[0] * v.z * w.z
    }

    pub fn norm(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        self.inner(u, v, v).sqrt()
    }

    /// Geodesic acceleration at `(u, v)`.
    pub fn acceleration(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        let [phi, dphi, _, _] = poly_eval(&self.phi, u.z);
        let w = v.z;
        let speed2 = v.norm_squared();
        let one_minus = 1.0 - u.z * u.z;
        let f2 = 1.0 + phi * one_minus;
        let az = (-u.z * speed2 - 0.5 * dphi * w * w * one_minus) / f2;
        let lambda = -speed2 + (phi * az + 0.5 * dphi * w * w) * u.z;
        lambda * u - (phi * az + 0.5 * dphi * w * w) * Vector3::z()
    }

    /// g-unit normal obtained by rotating the unit tangent `v` by +π/2.
    pub fn normal(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        let n0 = u.cross(v);
        let n = n0 - self.inner(u, &n0, v) / self.inner(u, v, v) * v;
        n / self.norm(u, &n)
    }

    pub fn curvature_ambient(&self, u: &Vector3<f64>) -> f64 {
        self.curvature_x(u.z / u.norm())[0]
    }

    /// Geodesic flow for time `t` from ambient state `(u, v)`.
    pub fn flow(&self, u: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let y = ode::endpoint(|_, y, dy| geodesic_rhs(self, y, dy), pack(u, v), t)?;
        Ok(unpack(&y))
    }

    /// Total curvature by composite Simpson quadrature in latitude.
    pub fn total_curvature(&self, n: usize) -> f64 {
        let n = n + n % 2;
        let h = PI / n as f64;
        let g = |r: f64| self.curvature_x(r.cos())[0] * self.f(r) * r.sin();
        let mut acc = g(0.0) + g(PI);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        2.0 * PI * acc * h / 3.0
    }
}

pub(crate) fn pack(u: &Vector3<f64>, v: &Vector3<f64>) -> SVector<f64, 6> {
    SVector::from([u.x, u.y, u.z, v.x, v.y, v.z])
}

pub(crate) fn unpack(y: &SVector<f64, 6>) -> (Vector3<f64>, Vector3<f64>) {
    (Vector3::new(y[0], y[1], y[2]), Vector3::new(y[3], y[4], y[5]))
}

pub(crate) fn geodesic_rhs(metric: &MetricModel, y: &SVector<f64, 6>, dy: &mut SVector<f64, 6>) {
    let (u, v) = unpack(y);
    let a = metric.acceleration(&u, &v);
    dy.copy_from_slice(&[v.x, v.y, v.z, a.x, a.y, a.z]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    PolarNorth,
    PolarSouth,
}

/// A point in one of the two polar charts. `PolarSouth` measures `r` from the south pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub chart: Chart,
    pub r: f64,
    pub phi: f64,
}

impl SurfacePoint {
    pub fn north(r: f64, phi: f64) -> Self {
        SurfacePoint { chart: Chart::PolarNorth, r, phi: phi.rem_euclid(2.0 * PI) }
    }

    /// Colatitude measured from the north pole.
    pub fn colatitude(&self) -> f64 {
        match self.chart {
            Chart::PolarNorth => self.r,
            Chart::PolarSouth => PI - self.r,
        }
    }

    pub fn ambient(&self) -> Vector3<f64> {
        let r = self.colatitude();
        Vector3::new(r.sin() * self.phi.cos(), r.sin() * self.phi.sin(), r.cos())
    }

    /// Chart chosen so that `r` stays away from the far pole.
    pub fn from_ambient(u: &Vector3<f64>) -> Self {
        let r = u.x.hypot(u.y).atan2(u.z);
        let phi = u.y.atan2(u.x).rem_euclid(2.0 * PI);
        if r <= PI / 2.0 {
            SurfacePoint { chart: Chart::PolarNorth, r, phi }
        } else {
            SurfacePoint { chart: Chart::PolarSouth, r: PI - r, phi }
        }
    }

    pub fn to_chart(&self, chart: Chart) -> Self {
        if chart == self.chart {
            *self
        } else {
            SurfacePoint { chart, r: PI - self.r, phi: self.phi }
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < PI) || !self.phi.is_finite() {
            return Err(Error::ChartSingularity(format!("r = {} outside (0, π)", self.r)));
        }
        Ok(())
    }

    /// Chart frame `(∂_r / f, ∂_φ / sin r)` in ambient coordinates.
    fn frame(&self, metric: &MetricModel) -> Result<(Vector3<f64>, Vector3<f64>)> {
        self.check()?;
        let r = self.colatitude();
        if r.sin() < 1e-6 {
            return Err(Error::ChartSingularity(format!("r = {r} is within 1e-6 of a pole")));
        }
        let sign = if self.chart == Chart::PolarNorth { 1.0 } else { -1.0 };
        let (s, c) = r.sin_cos();
        let e_r = sign * Vector3::new(c * self.phi.cos(), c * self.phi.sin(), -s) / metric.f(r);
        let e_phi = Vector3::new(-self.phi.sin(), self.phi.cos(), 0.0);
        Ok((e_r, e_phi))
    }
}

/// A tangent vector in ambient coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent(pub Vector3<f64>);

impl Tangent {
    /// Unit tangent at heading `theta` measured from `∂_r` towards `∂_φ` in the point's chart.
    pub fn from_heading(metric: &MetricModel, p: &SurfacePoint, theta: f64) -> Result<Self> {
        let (e1, e2) = p.frame(metric)?;
        Ok(Tangent(theta.cos() * e1 + theta.sin() * e2))
    }

    pub fn heading(&self, metric: &MetricModel, p: &SurfacePoint) -> Result<f64> {
        let (e1, e2) = p.frame(metric)?;
        let u = p.ambient();
        Ok(metric.inner(&u, &self.0, &e2).atan2(metric.inner(&u, &self.0, &e1)).rem_euclid(2.0 * PI))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurvatureJet {
    pub tau: f64,
    pub tau_s: f64,
    pub tau_nu: f64,
    pub tau_nunu: f64,
}

pub fn gaussian_curvature(metric: &MetricModel, p: &SurfacePoint) -> Result<f64> {
    p.check()?;
    Ok(metric.curvature_x(p.colatitude().cos())[0])
}

fn check_unit(metric: &MetricModel, u: &Vector3<f64>, v: &Vector3<f64>) -> Result<()> {
    let n = metric.norm(u, v);
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitTangent(n));
    }
    Ok(())
}

pub fn exp_map(metric: &MetricModel, p: &SurfacePoint, v: &Tangent, t: f64) -> Result<(SurfacePoint, Tangent)> {
    p.check()?;
    let u = p.ambient();
    check_unit(metric, &u, &v.0)?;
    let (u1, v1) = metric.flow(&u, &v.0, t)?;
    Ok((SurfacePoint::from_ambient(&u1), Tangent(v1)))
}

/// Samples `t ↦ K(exp(t d))` at `t = k·step`, `k = -m..=m`.
fn curvature_stencil(metric: &MetricModel, u: &Vector3<f64>, d: &Vector3<f64>, step: f64, m: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * m + 1);
    for k in -(m as i64)..=(m as i64) {
        let (uk, _) = metric.flow(u, d, k as f64 * step)?;
        out.push(metric.curvature_ambient(&uk));
    }
    Ok(out)
}

/// First and second derivatives at 0 from the 5-point stencil with Richardson extrapolation.
fn richardson(k: &[f64], h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (k[0], k[1], k[2], k[3], k[4]);
    let d1h = (p1 - m1) / (2.0 * h);
    let d12h = (p2 - m2) / (4.0 * h);
    let d2h = (p1 - 2.0 * c + m1) / (h * h);
    let d22h = (p2 - 2.0 * c + m2) / (4.0 * h * h);
    ((4.0 * d1h - d12h) / 3.0, (4.0 * d2h - d22h) / 3.0)
}

/// Curvature jet at an ambient state by finite differences along the tangent and normal geodesics.
pub fn curvature_jet_ambient(metric: &MetricModel, u: &Vector3<f64>, v: &Vector3<f64>) -> Result<CurvatureJet> {
    let nu = metric.normal(u, v);
    let kn = curvature_stencil(metric, u, &nu, JET_STEP, 2)?;
    let ks = curvature_stencil(metric, u, v, JET_STEP, 2)?;
    let (tau_nu, tau_nunu) = richardson(&kn, JET_STEP);
    let (tau_s, _) = richardson(&ks, JET_STEP);
    Ok(CurvatureJet { tau: metric.curvature_ambient(u), tau_s, tau_nu, tau_nunu })
}

pub fn curvature_jet_at(metric: &MetricModel, p: &SurfacePoint, tangent: &Tangent) -> Result<CurvatureJet> {
    p.check()?;
    let u = p.ambient();
    check_unit(metric, &u, &tangent.0)?;
    curvature_jet_ambient(metric, &u, &tangent.0)
}

/// Second normal derivative of `K` from the 7-point central stencil.
pub fn tau_nunu_seven_point(metric: &MetricModel, p: &SurfacePoint, tangent: &Tangent) -> Result<f64> {
    let u = p.ambient();
    let nu = metric.normal(&u, &tangent.0);
    let h = JET_STEP;
    let k = curvature_stencil(metric, &u, &nu, h, 3)?;
    let w = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
    Ok(k.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / (180.0 * h * h))
}

/// Chain-rule jet using `K` as an explicit function of `cos r`.
pub fn analytic_jet(metric: &MetricModel, p: &SurfacePoint, tangent: &Tangent) -> Result<CurvatureJet> {
    let u = p.ambient();
    let v = tangent.0;
    let nu = metric.normal(&u, &v);
    let [k, k1, k2] = metric.curvature_x(u.z);
    let a = metric.acceleration(&u, &nu);
    Ok(CurvatureJet {
        tau: k,
        tau_s: k1 * v.z,
        tau_nu: k1 * nu.z,
        tau_nunu: k2 * nu.z * nu.z + k1 * a.z,
    })
}

pub fn rotate_isometry(p: &SurfacePoint, v: &Tangent, angle: f64) -> (SurfacePoint, Tangent) {
    let (s, c) = angle.sin_cos();
    let w = v.0;
    let rotated = Vector3::new(c * w.x - s * w.y, s * w.x + c * w.y, w.z);
    let q = SurfacePoint { chart: p.chart, r: p.r, phi: (p.phi + angle).rem_euclid(2.0 * PI) };
    (q, Tangent(rotated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_vanishes_at_poles() {
        let m = MetricModel::zoll_revolution(&[0.1, -0.03]).unwrap();
        assert!(m.profile(1.0)[0].abs() < 1e-15);
        assert!(m.profile(-1.0)[0].abs() < 1e-15);
        assert!((m.profile(0.5)[0] - (0.1 * (0.125 - 0.5) - 0.03 * (0.03125 - 0.5))).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_profile() {
        assert!(MetricModel::zoll_revolution(&[3.0]).is_err());
    }

    #[test]
    fn round_curvature_is_exactly_one() {
        let m = MetricModel::round();
        for x in [-0.9, 0.0, 0.3] {
            assert_eq!(m.curvature_x(x), [1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn chart_round_trip() {
        let p = SurfacePoint::north(2.5, 1.0);
        let q = p.to_chart(Chart::PolarSouth).to_chart(Chart::PolarNorth);
        assert!((p.r - q.r).abs() < 1e-12 && (p.phi - q.phi).abs() < 1e-12);
        let back = SurfacePoint::from_ambient(&p.ambient());
        assert_eq!(back.chart, Chart::PolarSouth);
        assert!((back.colatitude() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn normal_is_positively_oriented() {
        let m = MetricModel::zoll_revolution(&[0.1]).unwrap();
        let p = SurfacePoint::north(1.0, 0.4);
        let v = Tangent::from_heading(&m, &p, 0.7).unwrap();
        let u = p.ambient();
        let n = m.normal(&u, &v.0);
        assert!(m.inner(&u, &n, &v.0).abs() < 1e-14);
        assert!((m.norm(&u, &n) - 1.0).abs() < 1e-14);
        assert!(nalgebra::Matrix3::from_columns(&[u, v.0, n]).determinant() > 0.0);
        let w = Tangent::from_heading(&m, &p, 0.7 + PI / 2.0).unwrap();
        assert!((w.0 - n).norm() < 1e-14);
    }
}

//! Closed geodesics sampled on the uniform arclength grid.

use crate::surface::{self, CurvatureJet, MetricModel, SurfacePoint, Tangent};
use crate::{ode, spectral, Error, Result, PERIOD};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

pub const DEFAULT_GRID: usize = 2048;
pub const CLOSURE_TOLERANCE: f64 = 1e-4;

/// Initial condition of a unit-speed geodesic.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicInit {
    pub point: SurfacePoint,
    pub tangent: Tangent,
}

impl GeodesicInit {
    pub fn from_heading(metric: &MetricModel, point: SurfacePoint, theta: f64) -> Result<Self> {
        Ok(GeodesicInit { point, tangent: Tangent::from_heading(metric, &point, theta)? })
    }

    /// `(r, φ, θ)` in the north chart.
    pub fn coordinates(&self, metric: &MetricModel) -> (f64, f64, f64) {
        let p = self.point.to_chart(surface::Chart::PolarNorth);
        let theta = self.tangent.heading(metric, &p).unwrap_or(f64::NAN);
        (p.r, p.phi, theta)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PathSample {
    pub position: Vector3<f64>,
    pub tangent: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub jet: CurvatureJet,
}

#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub metric: MetricModel,
    pub init: GeodesicInit,
    pub samples: Vec<PathSample>,
    pub closure_defect: f64,
}

pub fn check_grid(n: usize) -> Result<()> {
    if n < 256 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(n));
    }
    Ok(())
}

/// Distance in the unit tangent bundle between two nearby states.
fn state_distance(metric: &MetricModel, a: (&Vector3<f64>, &Vector3<f64>), b: (&Vector3<f64>, &Vector3<f64>)) -> f64 {
    let (u0, v0) = a;
    let (u1, v1) = b;
    let d = u1 - u0;
    let nu = metric.normal(u0, v0);
    let angle = metric.inner(u0, v1, &nu).atan2(metric.inner(u0, v1, v0)).abs();
    metric.norm(u0, &d) + angle
}

/// Traces the geodesic and fails if it does not close within [`CLOSURE_TOLERANCE`].
pub fn trace_geodesic(metric: &MetricModel, init: &GeodesicInit, n: usize) -> Result<GeodesicPath> {
    let path = trace_geodesic_unchecked(metric, init, n)?;
    if path.closure_defect > CLOSURE_TOLERANCE {
        return Err(Error::NonClosingGeodesic { defect: path.closure_defect, tolerance: CLOSURE_TOLERANCE });
    }
    Ok(path)
}

/// Traces the geodesic over `[0, 2π]` and records the closure defect without enforcing it.
pub fn trace_geodesic_unchecked(metric: &MetricModel, init: &GeodesicInit, n: usize) -> Result<GeodesicPath> {
    check_grid(n)?;
    let u0 = init.point.ambient();
    let v0 = init.tangent.0;
    let speed = metric.norm(&u0, &v0);
    if (speed - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitTangent(speed));
    }
    let states = ode::sample_uniform(
        |_, y, dy| surface::geodesic_rhs(metric, y, dy),
        surface::pack(&u0, &v0),
        PERIOD,
        n,
    )?;
    let (ue, ve) = surface::unpack(&states[n]);
    let closure_defect = state_distance(metric, (&u0, &v0), (&ue, &ve));
    let samples = states[..n]
        .par_iter()
        .map(|y| {
            let (u, v) = surface::unpack(y);
            let jet = surface::curvature_jet_ambient(metric, &u, &v)?;
            Ok(PathSample { position: u, tangent: v, normal: metric.normal(&u, &v), jet })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicPath { metric: metric.clone(), init: *init, samples, closure_defect })
}

impl GeodesicPath {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn closure_defect(&self) -> f64 {
        self.closure_defect
    }

    fn jet_field(&self, f: impl Fn(&CurvatureJet) -> f64) -> Vec<f64> {
        self.samples.iter().map(|p| f(&p.jet)).collect()
    }

    pub fn tau(&self) -> Vec<f64> {
        self.jet_field(|j| j.tau)
    }

    pub fn tau_s(&self) -> Vec<f64> {
        self.jet_field(|j| j.tau_s)
    }

    pub fn tau_nu(&self) -> Vec<f64> {
        self.jet_field(|j| j.tau_nu)
    }

    pub fn tau_nunu(&self) -> Vec<f64> {
        self.jet_field(|j| j.tau_nunu)
    }

    /// Initial condition of the same geodesic started at sample `k`.
    pub fn init_at(&self, k: usize) -> GeodesicInit {
        let p = &self.samples[k % self.n()];
        GeodesicInit { point: SurfacePoint::from_ambient(&p.position), tangent: Tangent(p.tangent) }
    }

    /// Every `step`-th sample, as a path on a coarser grid.
    pub fn subsample(&self, step: usize) -> GeodesicPath {
        GeodesicPath {
            metric: self.metric.clone(),
            init: self.init,
            samples: self.samples.iter().step_by(step).copied().collect(),
            closure_defect: self.closure_defect,
        }
    }
}

pub fn closure_defect(path: &GeodesicPath) -> f64 {
    path.closure_defect
}

/// Spectral derivative of a function sampled on the path grid.
pub fn tangential_derivative(path: &GeodesicPath, f: &[f64]) -> Result<Vec<f64>> {
    check_grid(f.len())?;
    if f.len() != path.n() {
        return Err(Error::InvalidGrid(f.len()));
    }
    Ok(spectral::derivative_real(f))
}

/// The equator, a meridian, then `count − 2` pseudo-random initial conditions.
pub fn sample_inits(metric: &MetricModel, count: usize, seed: u64) -> Result<Vec<GeodesicInit>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let canonical = [(PI / 2.0, 0.0, PI / 2.0), (PI / 2.0, 0.0, 0.0)];
    for i in 0..count {
        let (r, phi, theta) = if i < canonical.len() {
            canonical[i]
        } else {
            let z: f64 = rng.gen_range(-0.95..0.95);
            (z.acos(), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI))
        };
        out.push(GeodesicInit::from_heading(metric, SurfacePoint::north(r, phi), theta)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(check_grid(1024).is_ok());
        assert!(check_grid(128).is_err());
        assert!(check_grid(1000).is_err());
    }

    #[test]
    fn round_equator() {
        let m = MetricModel::round();
        let init = sample_inits(&m, 1, 0).unwrap()[0];
        let path = trace_geodesic(&m, &init, 256).unwrap();
        assert!(path.closure_defect < 1e-10);
        for (j, p) in path.samples.iter().enumerate() {
            let s = PERIOD * j as f64 / 256.0;
            assert!((p.position - Vector3::new(s.cos(), s.sin(), 0.0)).norm() < 1e-12);
            assert_eq!(p.jet.tau, 1.0);
        }
    }

    #[test]
    fn inits_are_deterministic() {
        let m = MetricModel::round();
        let a = sample_inits(&m, 5, 7).unwrap();
        let b = sample_inits(&m, 5, 7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.point, y.point);
        }
    }
}

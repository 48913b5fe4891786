//! Thin wrapper over the DOP853 integrator: uniform dense sampling and endpoint maps.

use crate::{Error, Result};
use ode_solvers::{DVector, Dop853, OutputType, SVector, System};

pub const RTOL: f64 = 1e-12;
pub const ATOL: f64 = 1e-12;

/// The right-hand side with the independent variable appended as a state
/// component. The upstream DOP853 tableau evaluates its last stage at the
/// wrong abscissa, which only matters when `f` reads `x` directly.
struct Autonomous<'a, F, const D: usize>(&'a F);

impl<F, const D: usize> System<f64, DVector<f64>> for Autonomous<'_, F, D>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    fn system(&self, _x: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let state = SVector::<f64, D>::from_iterator(y.iter().take(D).copied());
        let mut d = SVector::<f64, D>::zeros();
        (self.0)(y[D], &state, &mut d);
        dy.rows_mut(0, D).copy_from(&d);
        dy[D] = 1.0;
    }
}

fn solve<F, const D: usize>(f: &F, x0: f64, y0: SVector<f64, D>, t: f64) -> Result<SVector<f64, D>>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    let start = DVector::from_iterator(D + 1, y0.iter().copied().chain(std::iter::once(x0)));
    let mut s = Dop853::from_param(
        Autonomous::<F, D>(f),
        0.0,
        t,
        t,
        start,
        RTOL,
        ATOL,
        0.9,
        0.0,
        0.333,
        6.0,
        t,
        0.0,
        1_000_000,
        u32::MAX,
        OutputType::Sparse,
    );
    let res = s.integrate();
    let reached = s.x_out().last().copied().unwrap_or(0.0);
    res.map_err(|e| Error::Integration(format!("{e:?} (arclength reached {reached:.6})")))?;
    s.y_out()
        .last()
        .map(|y| SVector::<f64, D>::from_iterator(y.iter().take(D).copied()))
        .ok_or_else(|| Error::Integration("no output produced".into()))
}

/// Integrates from 0 to `t_end` and returns `n + 1` states at `t_k = k t_end / n`.
///
/// Each grid interval is integrated separately so samples land exactly on the
/// grid without dense-output interpolation.
pub fn sample_uniform<F, const D: usize>(
    f: F,
    y0: SVector<f64, D>,
    t_end: f64,
    n: usize,
) -> Result<Vec<SVector<f64, D>>>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    let dx = t_end / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(y0);
    for k in 0..n {
        let x0 = k as f64 * dx;
        let y = solve(&f, x0, out[k], dx).map_err(|e| match e {
            Error::Integration(m) => Error::Integration(format!("{m} from s = {x0:.6}")),
            other => other,
        })?;
        out.push(y);
    }
    Ok(out)
}

/// State at `t` (which may be negative).
pub fn endpoint<F, const D: usize>(f: F, y0: SVector<f64, D>, t: f64) -> Result<SVector<f64, D>>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    if t == 0.0 {
        Ok(y0)
    } else if t > 0.0 {
        solve(&f, 0.0, y0, t)
    } else {
        let g = |x: f64, y: &SVector<f64, D>, dy: &mut SVector<f64, D>| {
            f(-x, y, dy);
            *dy = -*dy;
        };
        solve(&g, 0.0, y0, -t)
    }
}

//! Exact expansion of the half-density Laplacian in Fermi coordinates `(s, y)`
//! along a geodesic, and its semiclassical grading.

mod constants;
mod jet;
mod operator;

pub use constants::{
    commutator_weights, constants_report, integrand_basis, round_sphere_value, CheckEntry, CommutatorWeight, ConstantEntry,
    ConstantsReport, IntegrandCoefficients,
};
pub use jet::{JetPolynomial, JetVar, Monomial};
pub use operator::{
    grade_expansion, half_density_laplacian, ConjugationData, FormalOperator, GradedExpansion, LocalConstants,
};

use crate::scalar::{factorial, Cq};
use crate::{Error, Result};

/// Truncated power series in `y` with jet-polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct YSeries(pub Vec<JetPolynomial>);

impl YSeries {
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeff(&self, k: usize) -> JetPolynomial {
        self.0.get(k).cloned().unwrap_or_default()
    }

    pub fn one(order: usize) -> Self {
        let mut v = vec![JetPolynomial::zero(); order + 1];
        v[0] = JetPolynomial::int(1);
        YSeries(v)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let mut v = vec![JetPolynomial::zero(); n + 1];
        for i in 0..=n {
            for j in 0..=(n - i) {
                v[i + j] = v[i + j].plus(&self.0[i].times(&o.0[j]));
            }
        }
        YSeries(v)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        YSeries((0..=n).map(|i| self.0[i].plus(&o.0[i])).collect())
    }

    pub fn scale(&self, k: &Cq) -> Self {
        YSeries(self.0.iter().map(|c| c.times_scalar(k)).collect())
    }

    /// `(1 + u)^p` for a series with unit constant term, by the binomial series.
    pub fn rational_power(&self, p: &Cq) -> Self {
        let order = self.order();
        let mut u = self.clone();
        u.0[0] = JetPolynomial::zero();
        let mut out = YSeries::one(order);
        let mut uk = YSeries::one(order);
        let mut binom = Cq::one();
        for k in 1..=order {
            uk = uk.mul(&u);
            binom = binom.mul(&p.sub(&Cq::int(k as i64 - 1))).mul(&Cq::frac(1, k as i64));
            out = out.add(&uk.scale(&binom));
        }
        out
    }

    /// `∂_y² S`.
    pub fn dy2(&self) -> Self {
        let n = self.order();
        let mut v = vec![JetPolynomial::zero(); n + 1];
        for k in 2..=n {
            v[k - 2] = self.0[k].times_scalar(&Cq::int((k * (k - 1)) as i64));
        }
        YSeries(v)
    }
}

/// Taylor jets of the area density `J` and of `g^{00} = J^{−2}`.
#[derive(Clone, Debug)]
pub struct FermiJets {
    pub j: YSeries,
    pub g00: YSeries,
    /// `K(s, y) = τ + τ_ν y + ½ τ_νν y²`.
    pub curvature: YSeries,
}

pub const MAX_JET_ORDER: usize = 6;

/// Solves `∂_y² J = −K J`, `J(s, 0) = 1`, `∂_y J(s, 0) = 0` order by order.
pub fn fermi_metric_jets(order: usize) -> Result<FermiJets> {
    if !(2..=MAX_JET_ORDER).contains(&order) {
        return Err(Error::Structure(format!("jet order {order} outside 2..=6")));
    }
    let mut k = vec![JetPolynomial::zero(); order + 1];
    for (i, ki) in k.iter_mut().enumerate().take(3) {
        *ki = JetPolynomial::var(JetVar::Tau { nu: i as u8, s: 0 }).times_scalar(&Cq::frac(1, factorial(i)));
    }
    let mut j = vec![JetPolynomial::zero(); order + 1];
    j[0] = JetPolynomial::int(1);
    for n in 0..=order - 2 {
        let mut acc = JetPolynomial::zero();
        for i in 0..=n {
            acc = acc.plus(&k[i].times(&j[n - i]));
        }
        j[n + 2] = acc.times_scalar(&Cq::frac(-1, ((n + 2) * (n + 1)) as i64));
    }
    let j = YSeries(j);
    let g00 = j.rational_power(&Cq::int(-2));
    Ok(FermiJets { j, g00, curvature: YSeries(k) })
}

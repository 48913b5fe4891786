//! Polynomial Weyl symbols in `z = y + iη`, `z̄ = y − iη` with `ħ = 1`.
//!
//! The star product is `a # b = Σ_j P_j(a, b) / j!` with
//! `P_j = (←∂_z →∂_z̄ − ←∂_z̄ →∂_z)^j`, so `[z, z̄]_# = 2`, matching
//! `ẑ = √2 a`, `ẑ̄ = √2 a†` on the oscillator basis.

use crate::scalar::{binomial, factorial, falling, Cq};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

pub const DEFAULT_DEGREE_CAP: usize = 8;

/// Coefficient ring for symbols: exact scalars, jet polynomials or sampled functions.
pub trait Coefficient: Clone + fmt::Debug + Send + Sync {
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, k: &Cq) -> Self;
    fn is_zero(&self) -> bool;
    /// The unit of the ring, shaped like `self`.
    fn one_like(&self) -> Self;

    fn constant_like(&self, k: &Cq) -> Self {
        self.one_like().scale(k)
    }
}

impl Coefficient for Cq {
    fn add(&self, other: &Self) -> Self {
        Cq::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Cq::mul(self, other)
    }
    fn scale(&self, k: &Cq) -> Self {
        Cq::mul(self, k)
    }
    fn is_zero(&self) -> bool {
        Cq::is_zero(self)
    }
    fn one_like(&self) -> Self {
        Cq::one()
    }
}

impl Coefficient for Complex64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, k: &Cq) -> Self {
        self * k.to_c64()
    }
    fn is_zero(&self) -> bool {
        *self == Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
}

/// `Σ c_{mn} z^m z̄^n` with sparse storage; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct PolySymbol<C> {
    terms: BTreeMap<(usize, usize), C>,
    cap: usize,
}

impl<C: Coefficient> fmt::Debug for PolySymbol<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<C: Coefficient> PolySymbol<C> {
    pub fn zero() -> Self {
        PolySymbol { terms: BTreeMap::new(), cap: DEFAULT_DEGREE_CAP }
    }

    pub fn with_cap(cap: usize) -> Self {
        PolySymbol { terms: BTreeMap::new(), cap }
    }

    pub fn monomial(m: usize, n: usize, c: C) -> Self {
        let mut s = Self::zero();
        s.insert(m, n, c);
        s
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: usize, n: usize) -> Option<&C> {
        self.terms.get(&(m, n))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of the highest monomial; 0 for the zero symbol.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|(m, n)| m + n).max().unwrap_or(0)
    }

    /// Adds `c z^m z̄^n`.
    pub fn insert(&mut self, m: usize, n: usize, c: C) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&(m, n)) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert((m, n), merged);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(m, n), c) in &other.terms {
            out.insert(m, n, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Cq::int(-1)))
    }

    pub fn scale(&self, k: &Cq) -> Self {
        self.map(|c| c.scale(k))
    }

    /// Multiplies every coefficient by the ring element `c`.
    pub fn mul_coeff(&self, c: &C) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> PolySymbol<D> {
        let mut out = PolySymbol::with_cap(self.cap);
        for (&(m, n), c) in &self.terms {
            out.insert(m, n, f(c));
        }
        out
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.cap {
            return Err(Error::DegreeOverflow { degree, cap: self.cap });
        }
        Ok(())
    }

    /// `P_j(a, b)`; degree drops by `2j`.
    pub fn transvectant(&self, other: &Self, j: usize) -> Result<Self> {
        let mut out = PolySymbol::with_cap(self.cap.max(other.cap));
        for (&(m, n), a) in &self.terms {
            for (&(mu, nu), b) in &other.terms {
                let k = transvectant_constant(j, (m, n), (mu, nu));
                if k == 0 {
                    continue;
                }
                let (p, q) = (m + mu - j, n + nu - j);
                out.check_degree(p + q)?;
                out.insert(p, q, a.mul(b).scale(&Cq::int(k)));
            }
        }
        Ok(out)
    }

    /// Pointwise product, `P_0`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.transvectant(other, 0)
    }

    pub fn pow(&self, k: usize, one: &C) -> Result<Self> {
        let mut acc = PolySymbol::monomial(0, 0, one.clone());
        acc.cap = self.cap;
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn max_order(&self, other: &Self) -> usize {
        self.degree().min(other.degree())
    }

    pub fn star(&self, other: &Self) -> Result<Self> {
        let mut out = PolySymbol::with_cap(self.cap.max(other.cap));
        for j in 0..=self.max_order(other) {
            let t = self.transvectant(other, j)?;
            out = out.add(&t.scale(&Cq::frac(1, factorial(j))));
        }
        Ok(out)
    }

    /// `a # b − b # a = Σ_{j odd} 2 P_j(a, b) / j!`.
    pub fn star_commutator(&self, other: &Self) -> Result<Self> {
        let mut out = PolySymbol::with_cap(self.cap.max(other.cap));
        for j in (1..=self.max_order(other)).step_by(2) {
            let t = self.transvectant(other, j)?;
            out = out.add(&t.scale(&Cq::frac(2, factorial(j))));
        }
        Ok(out)
    }

    /// Coefficients of `|z|^{2k}` and the off-diagonal remainder.
    pub fn diagonal_part(&self) -> (Vec<Option<C>>, Self) {
        let top = self.degree() / 2;
        let diag = (0..=top).map(|k| self.coeff(k, k).cloned()).collect();
        let mut rest = PolySymbol::with_cap(self.cap);
        for (&(m, n), c) in &self.terms {
            if m != n {
                rest.insert(m, n, c.clone());
            }
        }
        (diag, rest)
    }

    /// Substitutes `z ↦ zmap`, `z̄ ↦ zbarmap`.
    pub fn substitute(&self, zmap: &Self, zbarmap: &Self, one: &C) -> Result<Self> {
        let mut out = PolySymbol::with_cap(self.cap);
        let top = self.degree();
        let zp: Vec<Self> = (0..=top).map(|k| zmap.pow(k, one)).collect::<Result<_>>()?;
        let zbp: Vec<Self> = (0..=top).map(|k| zbarmap.pow(k, one)).collect::<Result<_>>()?;
        for (&(m, n), c) in &self.terms {
            out = out.add(&zp[m].mul(&zbp[n])?.mul_coeff(c));
        }
        Ok(out)
    }
}

impl PolySymbol<Cq> {
    pub fn constant(c: Cq) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn z() -> Self {
        Self::monomial(1, 0, Cq::one())
    }

    pub fn zbar() -> Self {
        Self::monomial(0, 1, Cq::one())
    }

    /// `y^a η^b` with `y = (z + z̄)/2`, `η = (z − z̄)/2i`.
    pub fn y_eta(a: usize, b: usize) -> Result<Self> {
        let half = Cq::frac(1, 2);
        let y = Self::z().add(&Self::zbar()).scale(&half);
        let eta = Self::z().sub(&Self::zbar()).scale(&Cq::frac(1, 2).mul(&Cq::i().inv()));
        y.pow(a, &Cq::one())?.mul(&eta.pow(b, &Cq::one())?)
    }

    /// Lifts exact coefficients into another ring using `proto` for shape.
    pub fn lift<C: Coefficient>(&self, proto: &C) -> PolySymbol<C> {
        self.map(|c| proto.constant_like(c))
    }

    /// `coeff(m, n) = conj(coeff(n, m))`.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(&(m, n), c)| self.coeff(n, m).is_some_and(|d| *d == c.conj()))
    }

    pub fn to_c64(&self) -> PolySymbol<Complex64> {
        self.map(|c| c.to_c64())
    }
}

impl PolySymbol<Complex64> {
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Largest `|coeff(m, n)|` over `m ≠ n`.
    pub fn offdiag_max(&self) -> f64 {
        self.terms.iter().filter(|((m, n), _)| m != n).fold(0.0, |a, (_, c)| a.max(c.norm()))
    }
}

/// Integer constant in `P_j(z^m z̄^n, z^μ z̄^ν) = C z^{m+μ−j} z̄^{n+ν−j}`.
pub fn transvectant_constant(j: usize, a: (usize, usize), b: (usize, usize)) -> i64 {
    let (m, n) = a;
    let (mu, nu) = b;
    (0..=j)
        .map(|k| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            sign * binomial(j, k) * falling(m, j - k) * falling(n, k) * falling(mu, k) * falling(nu, j - k)
        })
        .sum()
}

/// Weyl quantization of a symbol as a matrix on the first `n_trunc` oscillator states.
pub fn weyl_quantize(a: &PolySymbol<Complex64>, n_trunc: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(n_trunc, n_trunc);
    for (&(m, n), c) in a.terms() {
        out += quantize_monomial(m, n, n_trunc) * *c;
    }
    out
}

/// Applies `√2 a` (`raise = false`) or `√2 a†` on the left.
fn apply_ladder(mat: &DMatrix<Complex64>, raise: bool) -> DMatrix<Complex64> {
    let n = mat.nrows();
    let mut out = DMatrix::zeros(n, mat.ncols());
    for i in 0..n {
        let (src, w) = if raise {
            if i == 0 {
                continue;
            }
            (i - 1, (i as f64).sqrt())
        } else {
            if i + 1 >= n {
                continue;
            }
            (i + 1, ((i + 1) as f64).sqrt())
        };
        let w = w * std::f64::consts::SQRT_2;
        for j in 0..mat.ncols() {
            out[(i, j)] = mat[(src, j)] * w;
        }
    }
    out
}

/// Symmetrised product of `m` copies of `ẑ` and `n` copies of `ẑ̄`.
fn quantize_monomial(m: usize, n: usize, n_trunc: usize) -> DMatrix<Complex64> {
    let k = m + n;
    let mut total = DMatrix::zeros(n_trunc, n_trunc);
    let mut count = 0usize;
    for mask in 0u32..(1u32 << k) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut word = DMatrix::identity(n_trunc, n_trunc);
        for bit in 0..k {
            word = apply_ladder(&word, mask & (1 << bit) != 0);
        }
        total += word;
        count += 1;
    }
    total / Complex64::new(count as f64, 0.0)
}

/// Max entrywise difference on the leading `block × block` corner.
pub fn interior_max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, block: usize) -> f64 {
    interior_max(&(a - b), block)
}

pub fn interior_max(a: &DMatrix<Complex64>, block: usize) -> f64 {
    let mut out: f64 = 0.0;
    for i in 0..block {
        for j in 0..block {
            out = out.max(a[(i, j)].norm());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(m: usize, n: usize) -> PolySymbol<Cq> {
        PolySymbol::monomial(m, n, Cq::one())
    }

    #[test]
    fn z_zbar_commutator() {
        let c = PolySymbol::z().star_commutator(&PolySymbol::zbar()).unwrap();
        assert_eq!(c, PolySymbol::constant(Cq::int(2)));
    }

    #[test]
    fn first_transvectant_is_symplectic_form() {
        for (a, b) in [((2, 1), (0, 3)), ((1, 1), (3, 0)), ((2, 2), (1, 3))] {
            let p = mono(a.0, a.1).transvectant(&mono(b.0, b.1), 1).unwrap();
            let sigma = (a.0 * b.1) as i64 - (a.1 * b.0) as i64;
            assert_eq!(p, PolySymbol::monomial(a.0 + b.0 - 1, a.1 + b.1 - 1, Cq::int(sigma)));
        }
    }

    #[test]
    fn diagonal_split() {
        let a = mono(2, 2).add(&mono(3, 0));
        let (d, rest) = a.diagonal_part();
        assert_eq!(d, vec![None, None, Some(Cq::one())]);
        assert_eq!(rest, mono(3, 0));
    }

    #[test]
    fn degree_cap_is_enforced() {
        assert!(mono(5, 0).mul(&mono(4, 0)).is_err());
    }

    #[test]
    fn number_operator_spectrum() {
        let q = weyl_quantize(&mono(1, 1).to_c64(), 16);
        for i in 0..15 {
            assert!((q[(i, i)].re - (2 * i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn y_eta_round_trip() {
        let y2 = PolySymbol::y_eta(2, 0).unwrap();
        let quarter = Cq::frac(1, 4);
        let expect = PolySymbol::monomial(2, 0, quarter.clone())
            .add(&PolySymbol::monomial(1, 1, Cq::frac(1, 2)))
            .add(&PolySymbol::monomial(0, 2, quarter));
        assert_eq!(y2, expect);
    }
}

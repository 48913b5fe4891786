//! Exact polynomials in curvature jets, `L⁻¹` and the Jacobi field symbols.

use crate::scalar::Cq;
use crate::weyl::Coefficient;
use std::collections::BTreeMap;
use std::fmt;

/// Indeterminates. `Tau { nu, s }` is `∂_ν^nu ∂_s^s τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetVar {
    Tau { nu: u8, s: u8 },
    InvL,
    Y,
    Ybar,
    DY,
    DYbar,
}

impl JetVar {
    pub const TAU: JetVar = JetVar::Tau { nu: 0, s: 0 };
    pub const TAU_S: JetVar = JetVar::Tau { nu: 0, s: 1 };
    pub const TAU_NU: JetVar = JetVar::Tau { nu: 1, s: 0 };
    pub const TAU_NUNU: JetVar = JetVar::Tau { nu: 2, s: 0 };

    pub fn name(&self) -> String {
        match *self {
            JetVar::Tau { nu, s } => {
                let mut out = String::from("tau");
                if nu + s > 0 {
                    out.push('_');
                    out.push_str(&"nu".repeat(nu as usize));
                    out.push_str(&"s".repeat(s as usize));
                }
                out
            }
            JetVar::InvL => "Linv".into(),
            JetVar::Y => "Y".into(),
            JetVar::Ybar => "Ybar".into(),
            JetVar::DY => "dY".into(),
            JetVar::DYbar => "dYbar".into(),
        }
    }

    fn conj(&self) -> JetVar {
        match *self {
            JetVar::Y => JetVar::Ybar,
            JetVar::Ybar => JetVar::Y,
            JetVar::DY => JetVar::DYbar,
            JetVar::DYbar => JetVar::DY,
            v => v,
        }
    }
}

pub type Monomial = BTreeMap<JetVar, u32>;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct JetPolynomial {
    terms: BTreeMap<Monomial, Cq>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (v, e) in b {
        *out.entry(*v).or_insert(0) += e;
    }
    out
}

impl JetPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Cq) -> Self {
        let mut p = Self::zero();
        p.insert(Monomial::new(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Cq::int(n))
    }

    pub fn var(v: JetVar) -> Self {
        Self::monomial(&[(v, 1)], Cq::one())
    }

    pub fn monomial(vars: &[(JetVar, u32)], c: Cq) -> Self {
        let mut m = Monomial::new();
        for &(v, e) in vars {
            if e > 0 {
                *m.entry(v).or_insert(0) += e;
            }
        }
        let mut p = Self::zero();
        p.insert(m, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Cq)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, m: Monomial, c: Cq) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&m) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(m, merged);
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, o: &Self) -> Self {
        self.plus(&o.times_scalar(&Cq::int(-1)))
    }

    pub fn times(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                out.insert(mono_mul(a, b), x.mul(y));
            }
        }
        out
    }

    pub fn times_scalar(&self, k: &Cq) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.insert(m.clone(), c.mul(k));
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::int(1), |acc, _| acc.times(self))
    }

    /// The constant term.
    pub fn constant_part(&self) -> Cq {
        self.terms.get(&Monomial::new()).cloned().unwrap_or_else(Cq::zero)
    }

    /// Complex conjugation: conjugates scalars and swaps `Y ↔ Ȳ`, `Y' ↔ Ȳ'`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mm: Monomial = m.iter().map(|(v, e)| (v.conj(), *e)).collect();
            out.insert(mm, c.conj());
        }
        out
    }

    /// Coefficient of an exact monomial.
    pub fn coeff(&self, vars: &[(JetVar, u32)]) -> Cq {
        let key = JetPolynomial::monomial(vars, Cq::one());
        let m = key.terms.keys().next().cloned().unwrap_or_default();
        self.terms.get(&m).cloned().unwrap_or_else(Cq::zero)
    }

    /// Derivation along the geodesic: `Y' = dY`, `dY' = −τ Y`, `∂_s` raises the `s` jet index.
    pub fn ds(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (&v, &e) in m {
                let mut rest = m.clone();
                if e == 1 {
                    rest.remove(&v);
                } else {
                    rest.insert(v, e - 1);
                }
                let factor = JetPolynomial::monomial_from(rest, c.mul(&Cq::int(e as i64)));
                let dv = match v {
                    JetVar::Tau { nu, s } => JetPolynomial::var(JetVar::Tau { nu, s: s + 1 }),
                    JetVar::InvL => continue,
                    JetVar::Y => JetPolynomial::var(JetVar::DY),
                    JetVar::Ybar => JetPolynomial::var(JetVar::DYbar),
                    JetVar::DY => JetPolynomial::monomial(&[(JetVar::TAU, 1), (JetVar::Y, 1)], Cq::int(-1)),
                    JetVar::DYbar => JetPolynomial::monomial(&[(JetVar::TAU, 1), (JetVar::Ybar, 1)], Cq::int(-1)),
                };
                out = out.plus(&factor.times(&dv));
            }
        }
        out
    }

    fn monomial_from(m: Monomial, c: Cq) -> Self {
        let mut p = Self::zero();
        p.insert(m, c);
        p
    }

    /// Replaces `v` by the polynomial `value`.
    pub fn substitute(&self, v: JetVar, value: &Self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.remove(&v).unwrap_or(0);
            out = out.plus(&Self::monomial_from(rest, c.clone()).times(&value.pow(e)));
        }
        out
    }

    /// Every indeterminate that occurs.
    pub fn variables(&self) -> Vec<JetVar> {
        let mut vs: Vec<JetVar> = self.terms.keys().flat_map(|m| m.keys().copied()).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Power of `v` in every term, if uniform.
    pub fn degree_in(&self, v: JetVar) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.get(&v).copied().unwrap_or(0));
        let first = it.next()?;
        it.all(|e| e == first).then_some(first)
    }

    /// Evaluates into a coefficient ring given values for the indeterminates.
    pub fn eval<C: Coefficient>(&self, one: &C, value: &impl Fn(JetVar) -> Option<C>) -> Option<C> {
        let mut acc: Option<C> = None;
        for (m, c) in &self.terms {
            let mut t = one.constant_like(c);
            for (v, e) in m {
                let x = value(*v)?;
                for _ in 0..*e {
                    t = t.mul(&x);
                }
            }
            acc = Some(match acc {
                Some(a) => a.add(&t),
                None => t,
            });
        }
        Some(acc.unwrap_or_else(|| one.constant_like(&Cq::zero())))
    }
}

impl Coefficient for JetPolynomial {
    fn add(&self, other: &Self) -> Self {
        self.plus(other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.times(other)
    }
    fn scale(&self, k: &Cq) -> Self {
        self.times_scalar(k)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn one_like(&self) -> Self {
        JetPolynomial::int(1)
    }
}

impl fmt::Display for JetPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<String> = m
                    .iter()
                    .map(|(v, e)| if *e == 1 { v.name() } else { format!("{}^{}", v.name(), e) })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else if *c == Cq::one() {
                    vars.join("*")
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for JetPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_respects_jacobi() {
        let y = JetPolynomial::var(JetVar::Y);
        let ypp = y.ds().ds();
        assert_eq!(ypp, JetPolynomial::monomial(&[(JetVar::TAU, 1), (JetVar::Y, 1)], Cq::int(-1)));
    }

    #[test]
    fn wronskian_is_constant() {
        let w = JetPolynomial::monomial(&[(JetVar::Y, 1), (JetVar::DYbar, 1)], Cq::one())
            .minus(&JetPolynomial::monomial(&[(JetVar::DY, 1), (JetVar::Ybar, 1)], Cq::one()));
        assert!(w.ds().is_empty());
    }

    #[test]
    fn leibniz() {
        let a = JetPolynomial::var(JetVar::TAU_NU).times(&JetPolynomial::var(JetVar::Y).pow(2));
        let b = JetPolynomial::var(JetVar::TAU).plus(&JetPolynomial::int(3));
        assert_eq!(a.times(&b).ds(), a.ds().times(&b).plus(&a.times(&b.ds())));
    }

    #[test]
    fn display() {
        let p = JetPolynomial::monomial(&[(JetVar::TAU_NUNU, 1), (JetVar::Y, 2)], Cq::frac(1, 12));
        assert_eq!(p.to_string(), "1/12*tau_nunu*Y^2");
    }
}

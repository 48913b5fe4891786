//! The degree-two normal form invariant along a closed geodesic.
//!
//! The symbols are first derived once with exact coefficients in the jet
//! indeterminates `τ, τ_s, τ_ν, τ_νν` and the Jacobi field `Y, Ȳ, Ẏ, Ȳ'`
//! ([`SymbolicNormalForm`]); each geodesic then evaluates them on its samples.

use crate::expansion::{ConjugationData, JetPolynomial, JetVar};
use crate::geodesic::{trace_geodesic, GeodesicInit, GeodesicPath};
use crate::jacobi::{solve_fundamental, JacobiFrame};
use crate::scalar::Cq;
use crate::spectral;
use crate::surface::MetricModel;
use crate::weyl::{Coefficient, PolySymbol};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Largest admissible mean of a cubic coefficient `d_{1/2;mn}`.
pub const OBSTRUCTION_TOLERANCE: f64 = 1e-6;

/// Complex samples of an `s`-periodic function on the geodesic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFunction(pub Vec<Complex64>);

impl CoefficientFunction {
    pub fn from_real(x: &[f64]) -> Self {
        CoefficientFunction(spectral::to_complex(x))
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        CoefficientFunction(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Trapezoidal mean over one period.
    pub fn mean(&self) -> Complex64 {
        spectral::mean(&self.0)
    }

    /// `∫_0^s`, spectral on the mean-free part.
    pub fn antiderivative(&self) -> Self {
        CoefficientFunction(spectral::cumulative_integral(&self.0))
    }

    pub fn derivative(&self) -> Self {
        CoefficientFunction(spectral::derivative(&self.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |a, c| a.max(c.norm()))
    }
}

impl Coefficient for CoefficientFunction {
    fn add(&self, other: &Self) -> Self {
        CoefficientFunction(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
    fn mul(&self, other: &Self) -> Self {
        CoefficientFunction(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }
    fn scale(&self, k: &Cq) -> Self {
        let k = k.to_c64();
        CoefficientFunction(self.0.iter().map(|a| a * k).collect())
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
    fn one_like(&self) -> Self {
        CoefficientFunction::constant(self.0.len(), Complex64::new(1.0, 0.0))
    }
}

/// A symbol in `(z, z̄)` with coefficients sampled along the geodesic.
pub type SymbolField = PolySymbol<CoefficientFunction>;

/// `Y, Ȳ, Ẏ, Ȳ'` in some coefficient ring.
#[derive(Clone, Debug)]
pub struct FrameFunctions<C> {
    pub y: C,
    pub ybar: C,
    pub dy: C,
    pub dybar: C,
}

impl<C: Coefficient> FrameFunctions<C> {
    /// Images of `z = y + iη`, `z̄ = y − iη` under
    /// `y ↦ ½(Ȳ z + Y z̄)`, `η ↦ ½(Ȳ' z + Ẏ z̄)`.
    pub fn maps(&self) -> (PolySymbol<C>, PolySymbol<C>) {
        let half = Cq::frac(1, 2);
        let i = Cq::i();
        let lin = |a: &C, b: &C| {
            let mut p = PolySymbol::zero();
            p.insert(1, 0, a.scale(&half));
            p.insert(0, 1, b.scale(&half));
            p
        };
        let zmap = lin(&self.ybar.add(&self.dybar.scale(&i)), &self.y.add(&self.dy.scale(&i)));
        let zbarmap = lin(&self.ybar.add(&self.dybar.scale(&i.neg())), &self.y.add(&self.dy.scale(&i.neg())));
        (zmap, zbarmap)
    }

    /// Linear symplectic substitution of a `(y, η)` symbol written in `(z, z̄)`.
    pub fn substitute(&self, sym: &PolySymbol<C>) -> Result<PolySymbol<C>> {
        let (zmap, zbarmap) = self.maps();
        sym.substitute(&zmap, &zbarmap, &self.y.one_like())
    }
}

impl FrameFunctions<JetPolynomial> {
    pub fn symbolic() -> Self {
        FrameFunctions {
            y: JetPolynomial::var(JetVar::Y),
            ybar: JetPolynomial::var(JetVar::Ybar),
            dy: JetPolynomial::var(JetVar::DY),
            dybar: JetPolynomial::var(JetVar::DYbar),
        }
    }
}

impl FrameFunctions<CoefficientFunction> {
    pub fn sampled(frame: &JacobiFrame) -> Self {
        let y = CoefficientFunction(frame.y());
        let dy = CoefficientFunction(frame.dy());
        let conj = |f: &CoefficientFunction| CoefficientFunction(f.0.iter().map(|c| c.conj()).collect());
        FrameFunctions { ybar: conj(&y), dybar: conj(&dy), y, dy }
    }
}

/// Substitutes the sampled Jacobi frame into an exact `(z, z̄)` symbol.
pub fn metaplectic_substitute(sym: &PolySymbol<Cq>, frame: &JacobiFrame) -> Result<SymbolField> {
    let fields = FrameFunctions::sampled(frame);
    fields.substitute(&sym.lift(&fields.y))
}

/// One contribution to the restricted zeroth-order symbol.
#[derive(Clone, Debug)]
pub struct ZeroTerm {
    /// Jet monomial of the source term, its `D_s` power, and for `c > 0` the
    /// word in `∂` (`d`) and `−H̃ #` (`H`) produced by restricting `D_s^c`.
    pub label: String,
    pub symbol: PolySymbol<JetPolynomial>,
}

/// Exact symbols of the conjugated operator after the Jacobi substitution.
#[derive(Clone, Debug)]
pub struct SymbolicNormalForm {
    pub data: ConjugationData,
    /// `H̃`, the transverse Hamiltonian after substitution.
    pub h_tilde: PolySymbol<JetPolynomial>,
    /// `𝒟_{1/2}`.
    pub d_half: PolySymbol<JetPolynomial>,
    /// `𝒟₀|₀` split by source term.
    pub zero_terms: Vec<ZeroTerm>,
}

fn monomial_label(m: &BTreeMap<JetVar, u32>) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter()
        .map(|(v, &e)| if e == 1 { v.name() } else { format!("{}^{e}", v.name()) })
        .collect::<Vec<_>>()
        .join("*")
}

impl SymbolicNormalForm {
    pub fn derive() -> Result<Self> {
        let data = ConjugationData::compute()?;
        let frame = FrameFunctions::symbolic();
        let one = JetPolynomial::int(1);
        let h_tilde = frame.substitute(&data.transverse_hamiltonian)?;
        let d_half = frame.substitute(&data.half)?;

        // Restriction of (D_s − H̃)^c to ker D_s: R_c = −i ∂_s R_{c−1} − H̃ # R_{c−1}.
        let top = data.zero.keys().copied().max().unwrap_or(0) as usize;
        let mut restricted: Vec<Vec<(String, PolySymbol<JetPolynomial>)>> =
            vec![vec![(String::new(), PolySymbol::monomial(0, 0, one.clone()))]];
        for c in 1..=top {
            let mut next = Vec::new();
            for (word, r) in &restricted[c - 1] {
                next.push((format!("d{word}"), r.map(|f| f.ds()).scale(&Cq::i().neg())));
                next.push((format!("H{word}"), h_tilde.star(r)?.scale(&Cq::int(-1))));
            }
            restricted.push(next);
        }

        let mut zero_terms = Vec::new();
        for (&c, sym) in &data.zero {
            let mut by_jet: BTreeMap<BTreeMap<JetVar, u32>, PolySymbol<JetPolynomial>> = BTreeMap::new();
            for (&(m, n), coeff) in sym.terms() {
                for (mono, k) in coeff.terms() {
                    let entry = by_jet.entry(mono.clone()).or_insert_with(PolySymbol::zero);
                    let mut piece = PolySymbol::zero();
                    piece.insert(m, n, JetPolynomial::monomial(&mono.iter().map(|(v, e)| (*v, *e)).collect::<Vec<_>>(), k.clone()));
                    *entry = entry.add(&piece);
                }
            }
            for (mono, part) in by_jet {
                let lhs = frame.substitute(&part)?;
                for (word, r) in &restricted[c as usize] {
                    let mut label = monomial_label(&mono);
                    if c > 0 {
                        label = format!("{label} D_s^{c} [{word}]");
                    }
                    let symbol = lhs.star(r)?;
                    if !symbol.is_zero() {
                        zero_terms.push(ZeroTerm { label, symbol });
                    }
                }
            }
        }
        Ok(SymbolicNormalForm { data, h_tilde, d_half, zero_terms })
    }

    /// The cached derivation.
    pub fn get() -> Result<&'static Self> {
        static CELL: OnceLock<std::result::Result<SymbolicNormalForm, String>> = OnceLock::new();
        CELL.get_or_init(|| Self::derive().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Structure(e.clone()))
    }

    /// `𝒟₀|₀` as a single symbol.
    pub fn d_zero(&self) -> PolySymbol<JetPolynomial> {
        self.zero_terms.iter().fold(PolySymbol::zero(), |acc, t| acc.add(&t.symbol))
    }
}

/// Evaluates an exact symbol on sampled values of the indeterminates; `L⁻¹` is 1.
pub fn evaluate_symbol(
    sym: &PolySymbol<JetPolynomial>,
    n: usize,
    value: &impl Fn(JetVar) -> Option<CoefficientFunction>,
) -> Result<SymbolField> {
    let one = CoefficientFunction::constant(n, Complex64::new(1.0, 0.0));
    let lookup = |v: JetVar| match v {
        JetVar::InvL => Some(one.clone()),
        v => value(v),
    };
    let mut out = PolySymbol::zero();
    for (&(m, k), coeff) in sym.terms() {
        let f = coeff.eval(&one, &lookup).ok_or_else(|| {
            let missing = coeff.variables().into_iter().find(|v| lookup(*v).is_none());
            Error::MissingJet(missing.map(|v| v.name()).unwrap_or_default())
        })?;
        out.insert(m, k, f);
    }
    Ok(out)
}

/// Frame and curvature jets of one geodesic, as coefficient functions.
#[derive(Clone, Debug)]
pub struct GeodesicFields {
    pub frame: FrameFunctions<CoefficientFunction>,
    pub tau: CoefficientFunction,
    pub tau_s: CoefficientFunction,
    pub tau_nu: CoefficientFunction,
    pub tau_nunu: CoefficientFunction,
}

impl GeodesicFields {
    pub fn new(path: &GeodesicPath, frame: &JacobiFrame) -> Result<Self> {
        if frame.n() != path.n() {
            return Err(Error::InvalidGrid(frame.n()));
        }
        Ok(GeodesicFields {
            frame: FrameFunctions::sampled(frame),
            tau: CoefficientFunction::from_real(&path.tau()),
            tau_s: CoefficientFunction::from_real(&path.tau_s()),
            tau_nu: CoefficientFunction::from_real(&path.tau_nu()),
            tau_nunu: CoefficientFunction::from_real(&path.tau_nunu()),
        })
    }

    pub fn n(&self) -> usize {
        self.tau.len()
    }

    pub fn value(&self, v: JetVar) -> Option<CoefficientFunction> {
        Some(match v {
            JetVar::TAU => self.tau.clone(),
            JetVar::TAU_S => self.tau_s.clone(),
            JetVar::TAU_NU => self.tau_nu.clone(),
            JetVar::TAU_NUNU => self.tau_nunu.clone(),
            JetVar::Y => self.frame.y.clone(),
            JetVar::Ybar => self.frame.ybar.clone(),
            JetVar::DY => self.frame.dy.clone(),
            JetVar::DYbar => self.frame.dybar.clone(),
            _ => return None,
        })
    }

    pub fn evaluate(&self, sym: &PolySymbol<JetPolynomial>) -> Result<SymbolField> {
        evaluate_symbol(sym, self.n(), &|v| self.value(v))
    }
}

/// `𝒟_{1/2}(s)`, the cubic symbol after substitution.
pub fn d_half(frame: &JacobiFrame, tau_nu: &[f64]) -> Result<SymbolField> {
    if tau_nu.len() != frame.n() {
        return Err(Error::InvalidGrid(tau_nu.len()));
    }
    let fields = FrameFunctions::sampled(frame);
    let tau_nu = CoefficientFunction::from_real(tau_nu);
    let nf = SymbolicNormalForm::get()?;
    evaluate_symbol(&nf.d_half, frame.n(), &|v| match v {
        JetVar::TAU_NU => Some(tau_nu.clone()),
        JetVar::Y => Some(fields.y.clone()),
        JetVar::Ybar => Some(fields.ybar.clone()),
        JetVar::DY => Some(fields.dy.clone()),
        JetVar::DYbar => Some(fields.dybar.clone()),
        _ => None,
    })
}

/// Period means of every coefficient.
pub fn average(sym: &SymbolField) -> PolySymbol<Complex64> {
    sym.map(|f| f.mean())
}

/// `Q(s) = −κ⁻¹ ∫_0^s 𝒟_{1/2}`; fails if some coefficient of `d` has a mean above
/// [`OBSTRUCTION_TOLERANCE`].
pub fn solve_first_homological(d: &SymbolField) -> Result<SymbolField> {
    for (&(m, n), f) in d.terms() {
        let mean = f.mean().norm();
        if mean > OBSTRUCTION_TOLERANCE {
            return Err(Error::FirstObstruction { m, n, mean });
        }
    }
    let factor = SymbolicNormalForm::get()?.data.homological_factor.clone();
    Ok(d.map(|f| f.antiderivative().scale(&factor)))
}

/// Average over the period of `k [𝒟_{1/2}(s), Q(s)]_#`, the commutator part of `𝒟₀^{1/2}`.
pub fn commutator_double_integral(d: &SymbolField) -> Result<PolySymbol<Complex64>> {
    let q = solve_first_homological(d)?;
    let k = SymbolicNormalForm::get()?.data.commutator_factor.clone();
    Ok(average(&d.star_commutator(&q)?.scale(&k)))
}

/// `𝒟₀|₀(s)` on a geodesic, total and by source term.
#[derive(Clone, Debug)]
pub struct RestrictedZero {
    pub total: SymbolField,
    pub terms: Vec<(String, SymbolField)>,
}

pub fn d_zero_restricted(fields: &GeodesicFields) -> Result<RestrictedZero> {
    let nf = SymbolicNormalForm::get()?;
    let mut terms = Vec::with_capacity(nf.zero_terms.len());
    let mut total: SymbolField = PolySymbol::zero();
    for t in &nf.zero_terms {
        let sym = fields.evaluate(&t.symbol)?;
        total = total.add(&sym);
        terms.push((t.label.clone(), sym));
    }
    Ok(RestrictedZero { total, terms })
}

/// Diagonal coefficients `(|z|⁰, |z|², |z|⁴)` of an averaged symbol.
fn diagonal3(sym: &PolySymbol<Complex64>) -> [Complex64; 3] {
    let get = |k| sym.coeff(k, k).copied().unwrap_or_default();
    [get(0), get(1), get(2)]
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OffDiagonalMean {
    pub m: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TermDiagonal {
    pub label: String,
    pub c0: f64,
    pub c01: f64,
    pub c2: f64,
}

/// The two readings of the cluster-shift integral: the cubic factor taken as `y1` or `y2`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct HReadings {
    pub a: f64,
    pub b: f64,
}

impl HReadings {
    /// Reading `b`. Its bracket is `⅓B(u³, J³) − B(u²J, uJ²)` with
    /// `B(p, q) = ∫ τ_ν p ∫_0^s τ_ν q`, the third transvectant of the two cubics, which is
    /// unchanged when `(u, J)` is replaced by another normalised frame; reading `a` is not.
    pub fn invariant(&self) -> f64 {
        self.b
    }
}

/// `p₁(|z|²) = c₂|z|⁴ + c₀` on one geodesic, with diagnostics.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct InvariantRecord {
    pub c0: f64,
    pub c01: f64,
    pub c2: f64,
    /// Largest imaginary part among `c0, c01, c2`.
    pub imag_max: f64,
    /// Averaged coefficients with `m ≠ n`, `m + n ≤ 4`.
    pub offdiag: Vec<OffDiagonalMean>,
    pub offdiag_max: f64,
    /// Largest `|d̄_{1/2;mn}|`.
    pub first_obstruction: f64,
    /// Diagonal means of the commutator part alone.
    pub commutator: TermDiagonal,
    /// Diagonal means of each restricted term.
    pub terms: Vec<TermDiagonal>,
    pub h: HReadings,
}

fn term_diagonal(label: &str, sym: &PolySymbol<Complex64>) -> TermDiagonal {
    let [c0, c01, c2] = diagonal3(sym);
    TermDiagonal { label: label.into(), c0: c0.re, c01: c01.re, c2: c2.re }
}

/// Runs the whole construction on an already traced path.
pub fn assemble_from_path(path: &GeodesicPath) -> Result<InvariantRecord> {
    let frame = solve_fundamental(path)?;
    let fields = GeodesicFields::new(path, &frame)?;
    let d = d_half(&frame, &path.tau_nu())?;
    let first_obstruction = average(&d).max_abs();
    let comm = commutator_double_integral(&d)?;
    let zero = d_zero_restricted(&fields)?;
    let total = average(&zero.total).add(&comm);
    let [c0, c01, c2] = diagonal3(&total);
    let mut offdiag = Vec::new();
    let mut offdiag_max = 0.0f64;
    for (&(m, n), c) in total.terms() {
        if m != n && m + n <= 4 {
            offdiag.push(OffDiagonalMean { m, n, re: c.re, im: c.im });
            offdiag_max = offdiag_max.max(c.norm());
        }
    }
    let terms = zero.terms.iter().map(|(label, sym)| term_diagonal(label, &average(sym))).collect();
    Ok(InvariantRecord {
        c0: c0.re,
        c01: c01.re,
        c2: c2.re,
        imag_max: c0.im.abs().max(c01.im.abs()).max(c2.im.abs()),
        offdiag,
        offdiag_max,
        first_obstruction,
        commutator: term_diagonal("commutator", &comm),
        terms,
        h: compute_h(path, &frame)?,
    })
}

/// Traces the geodesic and runs [`assemble_from_path`].
pub fn assemble_p1(metric: &MetricModel, init: &GeodesicInit, n: usize) -> Result<InvariantRecord> {
    assemble_from_path(&trace_geodesic(metric, init, n)?)
}

/// `∫ τ + ⅓ τ_ν y³ ∫_0^s τ_ν J³ − τ_ν u² J ∫_0^s τ_ν u J²` with `u = y2`, `J = y1`,
/// and the free cubic factor `y` read as `J` (reading a) or `u` (reading b).
pub fn compute_h(path: &GeodesicPath, frame: &JacobiFrame) -> Result<HReadings> {
    if frame.n() != path.n() {
        return Err(Error::InvalidGrid(frame.n()));
    }
    let (tau, tau_nu) = (path.tau(), path.tau_nu());
    let (u, j) = (&frame.y2, &frame.y1);
    let cum = |f: Vec<f64>| -> Vec<f64> {
        spectral::cumulative_integral(&spectral::to_complex(&f)).iter().map(|c| c.re).collect()
    };
    let inner_j3 = cum((0..j.len()).map(|k| tau_nu[k] * j[k].powi(3)).collect());
    let inner_uj2 = cum((0..j.len()).map(|k| tau_nu[k] * u[k] * j[k] * j[k]).collect());
    let reading = |y: &[f64]| {
        let integrand: Vec<f64> = (0..j.len())
            .map(|k| {
                tau[k] + tau_nu[k] * y[k].powi(3) * inner_j3[k] / 3.0
                    - tau_nu[k] * u[k] * u[k] * j[k] * inner_uj2[k]
            })
            .collect();
        spectral::mean_real(&integrand) * crate::PERIOD
    };
    Ok(HReadings { a: reading(j), b: reading(u) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_frame_is_identity() {
        let frame = FrameFunctions { y: Cq::one(), ybar: Cq::one(), dy: Cq::i(), dybar: Cq::i().neg() };
        let (zmap, zbarmap) = frame.maps();
        assert_eq!(zmap, PolySymbol::z());
        assert_eq!(zbarmap, PolySymbol::zbar());
    }

    #[test]
    fn restricted_terms_have_degree_four() {
        let nf = SymbolicNormalForm::get().unwrap();
        assert!(nf.d_zero().degree() <= 4);
        assert_eq!(nf.d_half.degree(), 3);
        assert!(nf.zero_terms.iter().any(|t| t.label == "tau_nunu"));
    }
}

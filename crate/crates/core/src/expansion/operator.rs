use super::jet::{JetPolynomial, JetVar};
use super::{fermi_metric_jets, YSeries};
use crate::scalar::{binomial, falling, Cq};
use crate::weyl::PolySymbol;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// Maximum `y`-degree kept in intermediate compositions.
const WORK_DEGREE: u32 = 6;
/// `y`-degree of the final operator.
pub const OPERATOR_DEGREE: u32 = 4;

/// `Σ f_{abc}(s) y^a D_y^b D_s^c` with coefficients to the left, `D = −i∂`.
#[derive(Clone, PartialEq, Default)]
pub struct FormalOperator {
    terms: BTreeMap<(u32, u32, u32), JetPolynomial>,
}

impl FormalOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(a: u32, b: u32, c: u32, f: JetPolynomial) -> Self {
        let mut op = Self::zero();
        op.insert((a, b, c), f);
        op
    }

    /// Multiplication by a `y`-series.
    pub fn mult(s: &YSeries) -> Self {
        let mut op = Self::zero();
        for (k, c) in s.0.iter().enumerate() {
            op.insert((k as u32, 0, 0), c.clone());
        }
        op
    }

    /// `∂_s = i D_s`.
    pub fn partial_s() -> Self {
        Self::term(0, 0, 1, JetPolynomial::constant(Cq::i()))
    }

    /// `∂_y = i D_y`.
    pub fn partial_y() -> Self {
        Self::term(0, 1, 0, JetPolynomial::constant(Cq::i()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &JetPolynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: u32, b: u32, c: u32) -> JetPolynomial {
        self.terms.get(&(a, b, c)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, key: (u32, u32, u32), f: JetPolynomial) {
        if f.is_empty() {
            return;
        }
        let merged = match self.terms.remove(&key) {
            Some(old) => old.plus(&f),
            None => f,
        };
        if !merged.is_empty() {
            self.terms.insert(key, merged);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, f) in &o.terms {
            out.insert(*k, f.clone());
        }
        out
    }

    pub fn scale(&self, k: &Cq) -> Self {
        let mut out = Self::zero();
        for (key, f) in &self.terms {
            out.insert(*key, f.times_scalar(k));
        }
        out
    }

    pub fn map_coeffs(&self, g: impl Fn(&JetPolynomial) -> JetPolynomial) -> Self {
        let mut out = Self::zero();
        for (key, f) in &self.terms {
            out.insert(*key, g(f));
        }
        out
    }

    /// Keeps terms with `y`-degree at most `max`.
    pub fn truncate_y(&self, max: u32) -> Self {
        let mut out = Self::zero();
        for (&(a, b, c), f) in &self.terms {
            if a <= max {
                out.insert((a, b, c), f.clone());
            }
        }
        out
    }

    /// Composition `self ∘ other`, normal-ordered, dropping `y`-degrees above `max_y`.
    pub fn compose(&self, other: &Self, max_y: u32) -> Self {
        let mut out = Self::zero();
        for (&(a, b, c), f) in &self.terms {
            for (&(a2, b2, c2), g) in &other.terms {
                // D_s^c g = Σ_k C(c,k) (D_s^k g) D_s^{c−k}, D_s^k g = (−i)^k ∂_s^k g.
                let mut dg = g.clone();
                for k in 0..=c {
                    if k > 0 {
                        dg = dg.ds();
                    }
                    if dg.is_empty() {
                        break;
                    }
                    let ck = Cq::int(binomial(c as usize, k as usize)).mul(&Cq::pow_i(3 * k as usize));
                    for l in 0..=b.min(a2) {
                        let ya = a + a2 - l;
                        if ya > max_y {
                            continue;
                        }
                        let cl = Cq::int(binomial(b as usize, l as usize) * falling(a2 as usize, l as usize))
                            .mul(&Cq::pow_i(3 * l as usize));
                        let coeff = f.times(&dg).times_scalar(&ck.mul(&cl));
                        out.insert((ya, b + b2 - l, c - k + c2), coeff);
                    }
                }
            }
        }
        out
    }

    /// Replaces `D_s` by `D_s + delta`, with `delta` a coefficient commuting with everything.
    pub fn shift_ds(&self, delta: &JetPolynomial) -> Self {
        let mut out = Self::zero();
        for (&(a, b, c), f) in &self.terms {
            for k in 0..=c {
                let coeff = f.times(&delta.pow(k)).times_scalar(&Cq::int(binomial(c as usize, k as usize)));
                out.insert((a, b, c - k), coeff);
            }
        }
        out
    }

    /// Total Weyl symbol: each term contributes `f · (y^a # η^b)` with its `D_s` power.
    pub fn weyl_symbols(&self) -> Result<BTreeMap<u32, PolySymbol<JetPolynomial>>> {
        let mut out: BTreeMap<u32, PolySymbol<JetPolynomial>> = BTreeMap::new();
        for (&(a, b, c), f) in &self.terms {
            let sym = PolySymbol::y_eta(a as usize, 0)?.star(&PolySymbol::y_eta(0, b as usize)?)?;
            let lifted = sym.lift(&JetPolynomial::int(1)).mul_coeff(f);
            let e = out.entry(c).or_insert_with(PolySymbol::zero);
            *e = e.add(&lifted);
        }
        Ok(out)
    }
}

impl fmt::Display for FormalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(a, b, c), coeff)| {
                let mut ops = Vec::new();
                for (name, e) in [("y", a), ("D_y", b), ("D_s", c)] {
                    match e {
                        0 => {}
                        1 => ops.push(name.to_string()),
                        _ => ops.push(format!("{name}^{e}")),
                    }
                }
                if ops.is_empty() {
                    format!("({coeff})")
                } else {
                    format!("({coeff})*{}", ops.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for FormalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The positive Laplacian on half-densities,
/// `Δ = −(J^{−1/2} ∂_s g^{00} J ∂_s J^{−1/2} + J^{−1/2} ∂_y J ∂_y J^{−1/2})`,
/// truncated at `y`-degree 4.
pub fn half_density_laplacian() -> Result<FormalOperator> {
    let jets = fermi_metric_jets(WORK_DEGREE as usize)?;
    let j_m12 = FormalOperator::mult(&jets.j.rational_power(&Cq::frac(-1, 2)));
    let g_j = FormalOperator::mult(&jets.g00.mul(&jets.j));
    let j = FormalOperator::mult(&jets.j);
    let chain = |ops: &[&FormalOperator]| {
        ops.iter().skip(1).fold(ops[0].clone(), |acc, op| acc.compose(op, WORK_DEGREE))
    };
    let ds = FormalOperator::partial_s();
    let dy = FormalOperator::partial_y();
    let tangential = chain(&[&j_m12, &ds, &g_j, &ds, &j_m12]);
    let normal = chain(&[&j_m12, &dy, &j, &dy, &j_m12]);
    Ok(tangential.add(&normal).scale(&Cq::int(-1)).truncate_y(OPERATOR_DEGREE))
}

/// `Δ_h ∼ Σ_m h^{−2+m/2} 𝓛_{2−m/2}` with `L` kept as the indeterminate `L⁻¹`.
#[derive(Clone, Debug)]
pub struct GradedExpansion {
    /// `levels[m] = 𝓛_{2−m/2}`, `m = 0..=4`.
    pub levels: Vec<FormalOperator>,
    /// Terms at positive powers of `h`, keyed by twice the power.
    pub residual: BTreeMap<i32, FormalOperator>,
}

/// Applies `y → h^{1/2} y`, `D_y → h^{−1/2} D_y`, `D_s → (hL)^{−1} + D_s` and collects powers of `h`.
pub fn grade_expansion(op: &FormalOperator) -> Result<GradedExpansion> {
    let mut levels = vec![FormalOperator::zero(); 5];
    let mut residual: BTreeMap<i32, FormalOperator> = BTreeMap::new();
    for (&(a, b, c), f) in op.terms() {
        for k in 0..=c {
            let coeff = f
                .times(&JetPolynomial::monomial(&[(JetVar::InvL, k)], Cq::one()))
                .times_scalar(&Cq::int(binomial(c as usize, k as usize)));
            let twice_power = a as i32 - b as i32 - 2 * k as i32;
            let m = twice_power + 4;
            let piece = FormalOperator::term(a, b, c - k, coeff);
            if m < 0 {
                return Err(Error::Structure(format!("term y^{a} D_y^{b} D_s^{c} has weight below h^-2")));
            } else if m <= 4 {
                levels[m as usize] = levels[m as usize].add(&piece);
            } else {
                let e = residual.entry(twice_power).or_default();
                *e = e.add(&piece);
            }
        }
    }
    Ok(GradedExpansion { levels, residual })
}

impl GradedExpansion {
    /// `𝓛_{2−m/2}`.
    pub fn level(&self, m: usize) -> &FormalOperator {
        &self.levels[m]
    }

    /// Sum of all levels and residual terms at `h = 1`, with `D_s` shifted back.
    pub fn resum(&self) -> FormalOperator {
        let mut total = FormalOperator::zero();
        for l in self.levels.iter().chain(self.residual.values()) {
            total = total.add(l);
        }
        total.shift_ds(&JetPolynomial::var(JetVar::InvL).times_scalar(&Cq::int(-1)))
    }

    /// Every level with `L⁻¹ = 1`, i.e. in the semiclassical parameter `ħ = hL`.
    pub fn unit_length(&self) -> Vec<FormalOperator> {
        let one = JetPolynomial::int(1);
        self.levels.iter().map(|l| l.map_coeffs(|f| f.substitute(JetVar::InvL, &one))).collect()
    }
}

/// Constants of the local expansion in the `∂`-form
/// `𝓛_{1/2} = C L^{−2} τ_ν y³`,
/// `𝓛₀ = C₁ L^{−2} τ_νν y⁴ + C₂ L^{−1} τ y² ∂_s + C₃ L^{−1} τ_s y² + C_{ss} (−∂_s²) + C₄ τ y ∂_y + C₅ τ + …`.
#[derive(Clone, Debug)]
pub struct LocalConstants {
    pub c: Cq,
    pub c1: Cq,
    pub c2: Cq,
    pub c3: Cq,
    pub c_ss: Cq,
    pub c4: Cq,
    pub c5: Cq,
    /// Monomials of `𝓛₀` outside the pattern above, as `(description, coefficient)`.
    pub extra: Vec<(String, Cq)>,
}

fn jet_mono(vars: &[(JetVar, u32)]) -> JetPolynomial {
    JetPolynomial::monomial(vars, Cq::one())
}

impl LocalConstants {
    pub fn derive(graded: &GradedExpansion) -> Result<Self> {
        let half = graded.level(3);
        let c = half.coeff(3, 0, 0).coeff(&[(JetVar::InvL, 2), (JetVar::TAU_NU, 1)]);
        let l0 = graded.level(4);
        let mut rest = l0.clone();
        let mut take = |key: (u32, u32, u32), vars: &[(JetVar, u32)]| -> Cq {
            let k = rest.coeff(key.0, key.1, key.2).coeff(vars);
            rest = rest.add(&FormalOperator::term(key.0, key.1, key.2, jet_mono(vars).times_scalar(&k.neg())));
            k
        };
        let inv_l = |k: u32| (JetVar::InvL, k);
        let c1 = take((4, 0, 0), &[inv_l(2), (JetVar::TAU_NUNU, 1)]);
        // D_s = −i ∂_s, D_y = −i ∂_y.
        let c2 = take((2, 0, 1), &[inv_l(1), (JetVar::TAU, 1)]).mul(&Cq::i().neg());
        let c3 = take((2, 0, 0), &[inv_l(1), (JetVar::TAU_S, 1)]);
        let c_ss = take((0, 0, 2), &[]);
        let c4 = take((1, 1, 0), &[(JetVar::TAU, 1)]).mul(&Cq::i().neg());
        let c5 = take((0, 0, 0), &[(JetVar::TAU, 1)]);
        let mut extra = Vec::new();
        for (&(a, b, cc), f) in rest.terms() {
            for (m, k) in f.terms() {
                let vars: Vec<String> = m.iter().map(|(v, e)| format!("{}^{}", v.name(), e)).collect();
                extra.push((format!("{} * y^{a} D_y^{b} D_s^{cc}", vars.join("*")), k.clone()));
            }
        }
        if half.len() != 1 || half.coeff(3, 0, 0).len() != 1 {
            return Err(Error::Structure(format!("L_1/2 is not a single monomial: {half}")));
        }
        Ok(LocalConstants { c, c1, c2, c3, c_ss, c4, c5, extra })
    }
}

/// Data passed from the expansion to the normal-form construction, in `ħ = hL` units.
#[derive(Clone, Debug)]
pub struct ConjugationData {
    /// Coefficient of `D_s` in `𝓛₁`.
    pub kappa: Cq,
    /// Weyl symbol of `(𝓛₁ − κ D_s)/κ` in the `(y, η)` variables.
    pub transverse_hamiltonian: PolySymbol<JetPolynomial>,
    /// Weyl symbol of `𝓛_{1/2}`.
    pub half: PolySymbol<JetPolynomial>,
    /// Weyl symbols of `𝓛₀` grouped by the power of `D_s` standing to their right.
    pub zero: BTreeMap<u32, PolySymbol<JetPolynomial>>,
    /// `−1/κ`: factor in `Q = −κ⁻¹ ∫_0^s 𝒟_{1/2}`.
    pub homological_factor: Cq,
    /// Factor in `𝒟₀^{1/2} = 𝒟₀ + k [𝒟_{1/2}, Q]_#`, from the second-order conjugation.
    pub commutator_factor: Cq,
}

impl ConjugationData {
    pub fn derive(graded: &GradedExpansion) -> Result<Self> {
        let levels = graded.unit_length();
        if !levels[0].add(&FormalOperator::term(0, 0, 0, JetPolynomial::int(-1))).is_zero() {
            return Err(Error::Structure(format!("leading level is not 1: {}", levels[0])));
        }
        if !levels[1].is_zero() {
            return Err(Error::Structure(format!("level 3/2 does not vanish: {}", levels[1])));
        }
        let l1 = &levels[2];
        let kappa = l1.coeff(0, 0, 1).constant_part();
        if kappa.is_zero() || l1.coeff(0, 0, 1).len() != 1 {
            return Err(Error::Structure(format!("L_1 has no constant D_s term: {l1}")));
        }
        let transverse = l1.add(&FormalOperator::term(0, 0, 1, JetPolynomial::constant(kappa.neg())));
        if transverse.terms().any(|(&(_, _, c), _)| c > 0) {
            return Err(Error::Structure(format!("L_1 is not D_s plus a transverse operator: {l1}")));
        }
        let transverse = transverse.scale(&kappa.inv());
        let h_sym = transverse.weyl_symbols()?.remove(&0).unwrap_or_else(PolySymbol::zero);
        // The flow of H must be the Jacobi flow: H = ½(η² + τ y²).
        let expect = PolySymbol::y_eta(0, 2)?
            .lift(&JetPolynomial::int(1))
            .add(&PolySymbol::y_eta(2, 0)?.lift(&JetPolynomial::int(1)).mul_coeff(&JetPolynomial::var(JetVar::TAU)))
            .scale(&Cq::frac(1, 2));
        if h_sym != expect {
            return Err(Error::Structure(format!("transverse Hamiltonian is not the Jacobi one: {h_sym:?}")));
        }
        let half_syms = levels[3].weyl_symbols()?;
        if half_syms.keys().any(|&c| c > 0) {
            return Err(Error::Structure("L_1/2 carries D_s".into()));
        }
        let half = half_syms.get(&0).cloned().unwrap_or_else(PolySymbol::zero);
        let zero = levels[4].weyl_symbols()?;
        // Conjugation by exp(i ħ^{1/2} Q): order ħ^{-1/2} gives 𝒟_{1/2} + κ ∂_s Q = 0, order ħ⁰ gives
        // 𝒟₀ + i [𝒟_{1/2}, Q] + (i/2) κ [∂_s Q, Q].
        let homological_factor = kappa.inv().neg();
        let i = Cq::i();
        let commutator_factor = i.add(&i.mul(&Cq::frac(1, 2)).mul(&kappa).mul(&homological_factor));
        Ok(ConjugationData { kappa, transverse_hamiltonian: h_sym, half, zero, homological_factor, commutator_factor })
    }

    /// Derives everything from scratch.
    pub fn compute() -> Result<Self> {
        Self::derive(&grade_expansion(&half_density_laplacian()?)?)
    }
}

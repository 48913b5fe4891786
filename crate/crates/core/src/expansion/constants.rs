//! The table of universal constants produced by the exact derivation.

use super::jet::{JetPolynomial, JetVar};
use super::operator::{grade_expansion, half_density_laplacian, LocalConstants};
use super::fermi_metric_jets;
use crate::normalform::SymbolicNormalForm;
use crate::scalar::{binomial, Cq};
use crate::weyl::{transvectant_constant, PolySymbol};
use crate::Result;
use serde::Serialize;
use std::fmt::Write;

/// One derived constant with its exact value.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConstantEntry {
    pub name: String,
    pub value: String,
    pub re: f64,
    pub im: f64,
    pub definition: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A diagonal coefficient of `𝒟₀|₀` written as
/// `a|Ẏ|⁴ + b₁τ|ẎY|² + b₂τRe((ȲẎ)²) + cτ²|Y|⁴ + dτ_νν|Y|⁴ + eτ + residue`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrandCoefficients {
    pub a: Cq,
    pub b1: Cq,
    pub b2: Cq,
    pub c: Cq,
    pub d: Cq,
    pub e: Cq,
    /// Everything outside the six basis integrands.
    pub residue: JetPolynomial,
}

fn mono(vars: &[(JetVar, u32)]) -> JetPolynomial {
    JetPolynomial::monomial(vars, Cq::one())
}

/// The six basis integrands, in the order `a, b₁, b₂, c, d, e`.
pub fn integrand_basis() -> [JetPolynomial; 6] {
    use JetVar::*;
    let t = JetVar::TAU;
    [
        mono(&[(DY, 2), (DYbar, 2)]),
        mono(&[(t, 1), (Y, 1), (Ybar, 1), (DY, 1), (DYbar, 1)]),
        mono(&[(t, 1), (Ybar, 2), (DY, 2)])
            .plus(&mono(&[(t, 1), (Y, 2), (DYbar, 2)]))
            .times_scalar(&Cq::frac(1, 2)),
        mono(&[(t, 2), (Y, 2), (Ybar, 2)]),
        mono(&[(JetVar::TAU_NUNU, 1), (Y, 2), (Ybar, 2)]),
        mono(&[(t, 1)]),
    ]
}

impl IntegrandCoefficients {
    pub fn decompose(p: &JetPolynomial) -> Self {
        use JetVar::*;
        let t = JetVar::TAU;
        let a = p.coeff(&[(DY, 2), (DYbar, 2)]);
        let b1 = p.coeff(&[(t, 1), (Y, 1), (Ybar, 1), (DY, 1), (DYbar, 1)]);
        let b2 = p.coeff(&[(t, 1), (Ybar, 2), (DY, 2)]).mul(&Cq::int(2));
        let c = p.coeff(&[(t, 2), (Y, 2), (Ybar, 2)]);
        let d = p.coeff(&[(JetVar::TAU_NUNU, 1), (Y, 2), (Ybar, 2)]);
        let e = p.coeff(&[(t, 1)]);
        let mut out = IntegrandCoefficients { a, b1, b2, c, d, e, residue: JetPolynomial::zero() };
        out.residue = p.minus(&out.integrand());
        out
    }

    pub fn coefficients(&self) -> [&Cq; 6] {
        [&self.a, &self.b1, &self.b2, &self.c, &self.d, &self.e]
    }

    /// `Σ coefficient · basis`.
    pub fn integrand(&self) -> JetPolynomial {
        self.coefficients()
            .iter()
            .zip(integrand_basis())
            .fold(JetPolynomial::zero(), |acc, (k, b)| acc.plus(&b.times_scalar(k)))
    }
}

/// Value of a jet polynomial for `τ ≡ 1`, `Y = e^{is}` at `s = 0`, all other jets zero.
pub fn round_sphere_value(p: &JetPolynomial) -> Option<Cq> {
    p.eval(&Cq::one(), &|v| match v {
        JetVar::TAU | JetVar::InvL | JetVar::Y | JetVar::Ybar => Some(Cq::one()),
        JetVar::DY => Some(Cq::i()),
        JetVar::DYbar => Some(Cq::i().neg()),
        _ => Some(Cq::zero()),
    })
}

/// Weight of `I_mn = (1/L) ∫ τ_ν Ȳ^m Y^n(s) ∫_0^s τ_ν Ȳ^n Y^m` in the commutator part.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorWeight {
    pub m: usize,
    pub n: usize,
    /// Coefficient of `I_mn` in the `|z|⁴` coefficient.
    pub quartic: Cq,
    /// Coefficient of `I_mn` in the constant coefficient.
    pub constant: Cq,
}

/// Weights `w_mn`; together `Σ w_mn I_mn` is the diagonal average of the commutator part.
pub fn commutator_weights(nf: &SymbolicNormalForm) -> Vec<CommutatorWeight> {
    let k = nf.data.commutator_factor.mul(&nf.data.homological_factor);
    let delta = |m: usize, n: usize| {
        nf.d_half
            .coeff(m, n)
            .map(|c| c.coeff(&[(JetVar::TAU_NU, 1), (JetVar::Ybar, m as u32), (JetVar::Y, n as u32)]))
            .unwrap_or_else(Cq::zero)
    };
    let mut out = Vec::new();
    for m in 0..=3usize {
        let n = 3 - m;
        let dm = delta(m, n).mul(&delta(n, m)).mul(&k);
        let a = PolySymbol::monomial(m, n, Cq::one());
        let b = PolySymbol::monomial(n, m, Cq::one());
        let comm = a.star_commutator(&b).expect("cubic commutator stays below the degree cap");
        let at = |j: usize| comm.coeff(j, j).cloned().unwrap_or_else(Cq::zero).mul(&dm);
        out.push(CommutatorWeight { m, n, quartic: at(2), constant: at(0) });
    }
    out
}

/// All derived constants and the structural checks on them.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub sign_convention: String,
    pub entries: Vec<ConstantEntry>,
    pub checks: Vec<CheckEntry>,
    #[serde(skip)]
    pub local: LocalConstants,
    /// Decompositions of the `|z|⁰` and `|z|⁴` coefficients (`j = 0, 2`).
    #[serde(skip)]
    pub integrands: [IntegrandCoefficients; 2],
    #[serde(skip)]
    pub commutator: Vec<CommutatorWeight>,
}

impl ConstantsReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&ConstantEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_text(&self) -> String {
        let width = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        let vwidth = self.entries.iter().map(|e| e.value.len()).max().unwrap_or(0);
        let mut out = format!("# {}\n", self.sign_convention);
        for e in &self.entries {
            let _ = writeln!(out, "{:<width$}  {:<vwidth$}  {}", e.name, e.value, e.definition);
        }
        for c in &self.checks {
            let _ = writeln!(out, "[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }
}

struct Table(Vec<ConstantEntry>);

impl Table {
    fn push(&mut self, name: impl Into<String>, value: &Cq, definition: impl Into<String>) {
        let z = value.to_c64();
        self.0.push(ConstantEntry {
            name: name.into(),
            value: value.to_string(),
            re: z.re,
            im: z.im,
            definition: definition.into(),
        });
    }
}

pub fn constants_report() -> Result<ConstantsReport> {
    let mut t = Table(Vec::new());
    let jets = fermi_metric_jets(4)?;
    let g2 = jets.g00.coeff(2).coeff(&[(JetVar::TAU, 1)]);
    let g3 = jets.g00.coeff(3).coeff(&[(JetVar::TAU_NU, 1)]);
    t.push("g00.C1", &g2, "coefficient of tau y^2 in g^00");
    t.push("g00.C2", &g3, "coefficient of tau_nu y^3 in g^00");
    t.push("J.y2", &jets.j.coeff(2).coeff(&[(JetVar::TAU, 1)]), "coefficient of tau y^2 in J");
    t.push("J.y3", &jets.j.coeff(3).coeff(&[(JetVar::TAU_NU, 1)]), "coefficient of tau_nu y^3 in J");

    let graded = grade_expansion(&half_density_laplacian()?)?;
    let local = LocalConstants::derive(&graded)?;
    t.push("local.C", &local.c, "L_1/2 = C Linv^2 tau_nu y^3");
    t.push("local.C1", &local.c1, "coefficient of Linv^2 tau_nunu y^4 in L_0");
    t.push("local.C2", &local.c2, "coefficient of Linv tau y^2 d_s in L_0");
    t.push("local.C3", &local.c3, "coefficient of Linv tau_s y^2 in L_0");
    t.push("local.C_ss", &local.c_ss, "coefficient of -d_s^2 in L_0");
    t.push("local.C4", &local.c4, "coefficient of tau y d_y in L_0");
    t.push("local.C5", &local.c5, "coefficient of tau in L_0");
    for (label, k) in &local.extra {
        t.push(format!("local.extra[{label}]"), k, "term of L_0 outside the five-term pattern");
    }

    let nf = SymbolicNormalForm::get()?;
    t.push("kappa", &nf.data.kappa, "coefficient of D_s in L_1");
    t.push("homological_factor", &nf.data.homological_factor, "Q = factor * int_0^s D_1/2");
    t.push("commutator_factor", &nf.data.commutator_factor, "D_0^1/2 = D_0 + factor [D_1/2, Q]");
    for (&(m, n), c) in nf.d_half.terms() {
        let k = c.coeff(&[(JetVar::TAU_NU, 1), (JetVar::Ybar, m as u32), (JetVar::Y, n as u32)]);
        t.push(format!("half.C_{m}{n};3"), &k, format!("d_1/2;{m}{n} = C tau_nu Ybar^{m} Y^{n}"));
    }

    // P_1 and P_3 between conjugate cubic monomials, and the normalisation of P_1
    // against half the symplectic index m ν − n μ.
    for m in 0..=3usize {
        let n = 3 - m;
        for j in [1usize, 3] {
            let k = transvectant_constant(j, (m, n), (n, m));
            t.push(format!("P{j}[{m}{n},{n}{m}]"), &Cq::int(k), "transvectant constant");
        }
    }
    let (m, n) = (2usize, 1usize);
    let sigma = (m * m) as i64 - (n * n) as i64;
    let p1 = Cq::int(transvectant_constant(1, (m, n), (n, m)));
    // commutator leading term 2 P_1 = (1/i) P_1' defines P_1'.
    let p1_prime = p1.mul(&Cq::int(2)).mul(&Cq::i());
    t.push("p1_global_constant", &p1_prime.mul(&Cq::frac(2, sigma)), "P_1' / (sigma/2) with [a,b] = (1/i) P_1' + ...");

    let d_zero = nf.d_zero();
    let diag = |k: usize| d_zero.coeff(k, k).cloned().unwrap_or_default();
    let integrands = [IntegrandCoefficients::decompose(&diag(0)), IntegrandCoefficients::decompose(&diag(2))];
    for (j, ic) in [0usize, 2].iter().zip(&integrands) {
        for (name, k) in ["a", "b1", "b2", "c", "d", "e"].iter().zip(ic.coefficients()) {
            t.push(format!("{name}_{j}"), k, format!("|z|^{} coefficient of D_0 restricted", 2 * j));
        }
        if !ic.residue.is_empty() {
            t.push(format!("residue_{j}"), &Cq::zero(), ic.residue.to_string());
        }
    }
    let commutator = commutator_weights(nf);
    for w in &commutator {
        t.push(format!("w_{}{};2", w.m, w.n), &w.quartic, "weight of I_mn in the |z|^4 coefficient");
        t.push(format!("w_{}{};0", w.m, w.n), &w.constant, "weight of I_mn in the |z|^0 coefficient");
    }
    for w in commutator.iter().filter(|w| w.m > w.n) {
        let partner = commutator.iter().find(|p| p.m == w.n).expect("conjugate pair");
        for (j, a, b) in [(2, &w.quartic, &partner.quartic), (0, &w.constant, &partner.constant)] {
            let c = Cq::i().mul(&a.sub(b));
            t.push(format!("C2_{}{};{j}", w.m, w.n), &c, "coefficient of Im I_mn");
        }
    }

    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(CheckEntry { name: name.into(), passed, detail });
    };
    check("g00_C1_is_1", g2 == Cq::one(), format!("{g2}"));
    check("g00_C2_is_1/3", g3 == Cq::frac(1, 3), format!("{g3}"));
    let levels = graded.unit_length();
    check("L2_is_1", levels[0].coeff(0, 0, 0) == JetPolynomial::int(1) && levels[0].len() == 1, format!("{}", graded.levels[0]));
    check("L3/2_is_0", levels[1].is_zero(), format!("{}", graded.levels[1]));
    check(
        "L1_is_kappa(D_s + H)",
        nf.data.transverse_hamiltonian.degree() == 2,
        format!("{} with kappa = {}", graded.levels[2], nf.data.kappa),
    );
    check(
        "L1/2_single_monomial",
        graded.levels[3].len() == 1 && graded.levels[3].coeff(3, 0, 0).len() == 1,
        format!("{}", graded.levels[3]),
    );
    check("C4_no_diagonal", local.c4.is_zero(), format!("C4 = {}", local.c4));
    let [i0, i2] = &integrands;
    check("e_2_is_0", i2.e.is_zero(), format!("e_2 = {}", i2.e));
    check("d_0_is_0", i0.d.is_zero(), format!("d_0 = {}", i0.d));
    check("decomposition_0_complete", i0.residue.is_empty(), format!("residue {}", i0.residue));
    check("decomposition_2_complete", i2.residue.is_empty(), format!("residue {}", i2.residue));
    let round2 = round_sphere_value(&i2.integrand()).unwrap_or_else(Cq::zero);
    check("round_sphere_c2_relation", round2.is_zero(), format!("a + b1 - b2 + c = {round2}"));
    let round0 = round_sphere_value(&diag(0)).unwrap_or_else(Cq::zero);
    check("round_sphere_c0", round0 == Cq::frac(-1, 4), format!("c0 = {round0}"));
    let binom = (0..=3).all(|m| {
        let c = nf.d_half.coeff(m, 3 - m).map(|c| c.coeff(&[(JetVar::TAU_NU, 1), (JetVar::Ybar, m as u32), (JetVar::Y, 3 - m as u32)]));
        c == Some(local.c.mul(&Cq::frac(binomial(3, m), 8)))
    });
    check("half_binomial_structure", binom, "C_mn;3 = C binom(3,m) / 8".into());

    Ok(ConstantsReport {
        sign_convention: "positive Laplacian; Delta = -(J^-1/2 d_s g00 J d_s J^-1/2 + J^-1/2 d_y J d_y J^-1/2); hbar = hL".into(),
        entries: t.0,
        checks,
        local,
        integrands,
        commutator,
    })
}

//! Symbolic certification of compiled and embedded networks.
//!
//! Networks are interpreted layer by layer over symbolic slot values. Every
//! hidden unit must reduce to one of
//!
//! * zero or a constant,
//! * a ridge atom `γ·σ_e(r·x̂)` with `x̂ = (x, 1)`,
//! * a half `σ_k(α·σ_e(r·x̂) + β)` with `β ≠ 0`.
//!
//! Halves only ever appear in mirrored pairs `(α, β)`, `(−α, −β)` whose
//! consumers weight them `w` and `(−1)^k w`; such a pair collapses to the
//! polynomial `w(α a + β)^k` in the atom `a = σ_e(r·x̂)`, and `a^i = σ_{ei}`
//! because `a ≥ 0`. A unit whose input is affine in a single atom, `αa + β`,
//! becomes an atom again when `β = 0` (zero if `α < 0`) and a half otherwise.
//! Anything else is not recognized.
//!
//! The output is brought into a canonical form: a polynomial plus residual
//! atoms on negatively oriented ridges, using
//! `σ_E(r) = (r·x̂)^E − (−1)^E σ_E(−r)`. Residual atoms on distinct
//! `(ridge, E)` are linearly independent modulo polynomials, so two networks
//! realize the same function exactly when their canonical forms coincide.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::rational::{self, binomial, format_rational, Rational};
use crate::exact::{expand_affine_power, Polynomial};
use crate::network::{sigma, Network, ShallowNetwork};
use crate::points;

const EXPANSION_CAP: u32 = 256;
pub const POINT_CHECK_COUNT: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Proven,
    Refuted,
    NotRecognized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointCheck {
    pub count: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub status: Status,
    pub residual: Polynomial,
    pub checked_structure: Vec<String>,
    pub point_check: PointCheck,
}

impl CertificateReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "residual": serde_json::from_str::<serde_json::Value>(&self.residual.to_json()).expect("valid json"),
            "checked_structure": self.checked_structure,
            "point_check": self.point_check,
        })
    }
}

pub enum Target<'a> {
    Polynomial(&'a Polynomial),
    Shallow(&'a ShallowNetwork),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotRecognized(pub String);

impl std::fmt::Display for NotRecognized {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "not recognized: {}", self.0)
    }
}

impl std::error::Error for NotRecognized {}

/// `(w, u)` scaled so that the first nonzero entry of `w` is ±1.
type Ridge = Vec<Rational>;
/// Expanded atoms keyed by (ridge, exponent).
type AtomMap = BTreeMap<(usize, u32), Rational>;

#[derive(Debug, Default)]
struct Ridges {
    list: Vec<Ridge>,
    index: HashMap<Ridge, usize>,
}

impl Ridges {
    fn intern(&mut self, r: Ridge) -> usize {
        if let Some(&i) = self.index.get(&r) {
            return i;
        }
        self.list.push(r.clone());
        self.index.insert(r, self.list.len() - 1);
        self.list.len() - 1
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Zero,
    Const(Rational),
    Atom { coeff: Rational, ridge: usize, exp: u32 },
    Half { ridge: usize, exp: u32, slope: Rational, offset: Rational },
}

/// A pre-activation: constant + Σ atoms + Σ weighted halves.
#[derive(Debug, Default)]
struct Affine {
    constant: Rational,
    atoms: BTreeMap<(usize, u32), Rational>,
    halves: BTreeMap<(usize, u32), BTreeMap<(Rational, Rational), Rational>>,
}

impl Affine {
    fn add(&mut self, weight: &Rational, slot: &Slot) {
        if weight.is_zero() {
            return;
        }
        match slot {
            Slot::Zero => {}
            Slot::Const(c) => self.constant += weight * c,
            Slot::Atom { coeff, ridge, exp } => {
                *self.atoms.entry((*ridge, *exp)).or_insert_with(Rational::zero) += weight * coeff;
            }
            Slot::Half { ridge, exp, slope, offset } => {
                *self
                    .halves
                    .entry((*ridge, *exp))
                    .or_default()
                    .entry((slope.clone(), offset.clone()))
                    .or_insert_with(Rational::zero) += weight;
            }
        }
    }

    /// Collapses mirrored half pairs; returns constant and atom coefficients.
    fn resolve(self, k: u32, stats: &mut Stats) -> Result<(Rational, AtomMap), NotRecognized> {
        let Affine { mut constant, mut atoms, halves } = self;
        let sign = if k.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
        for ((ridge, exp), group) in halves {
            for ((slope, offset), w) in &group {
                if w.is_zero() {
                    continue;
                }
                let mirror = group.get(&(-slope, -offset)).cloned().unwrap_or_else(Rational::zero);
                if mirror != w * &sign {
                    return Err(NotRecognized(format!(
                        "shifted unit σ_{k}({}·a + {}) has weight {} but its mirror has {}",
                        format_rational(slope),
                        format_rational(offset),
                        format_rational(w),
                        format_rational(&mirror)
                    )));
                }
                if slope.is_negative() {
                    continue;
                }
                stats.pairs += 1;
                // w (α a + β)^k = Σ_i binom(k,i) α^i β^{k−i} w a^i
                for i in 0..=k {
                    let c = Rational::from_integer(binomial(u64::from(k), u64::from(i)))
                        * rational::pow(slope, u64::from(i))
                        * rational::pow(offset, u64::from(k - i))
                        * w;
                    if c.is_zero() {
                        continue;
                    }
                    if i == 0 {
                        constant += c;
                    } else {
                        *atoms.entry((ridge, exp * i)).or_insert_with(Rational::zero) += c;
                    }
                }
            }
        }
        atoms.retain(|_, c| !c.is_zero());
        Ok((constant, atoms))
    }
}

#[derive(Debug, Default)]
struct Stats {
    pairs: usize,
    atoms: usize,
    halves: usize,
    constants: usize,
}

/// A polynomial plus residual atoms on negatively oriented ridges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub polynomial: Polynomial,
    pub residual_atoms: BTreeMap<(Vec<Rational>, u32), Rational>,
}

fn orientation_positive(r: &[Rational], d: usize) -> bool {
    r[..d].iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_positive())
}

struct Interpretation {
    form: CanonicalForm,
    structure: Vec<String>,
}

fn interpret(net: &Network) -> Result<Interpretation, NotRecognized> {
    let d = net.input_dim();
    let k = net.k();
    let mut ridges = Ridges::default();
    let mut structure = Vec::new();
    let mut slots: Vec<Slot> = Vec::new();

    for (li, layer) in net.layers().iter().enumerate() {
        let mut stats = Stats::default();
        let bias = layer.bias.to_dense();
        let mut next = Vec::with_capacity(layer.width());
        for (r, b) in bias.iter().enumerate() {
            let row = layer.weights.row(r);
            let slot = if li == 0 {
                first_layer_slot(row, b, d, k, &mut ridges)
            } else {
                let mut pre = Affine { constant: b.clone(), ..Default::default() };
                for (c, w) in row {
                    pre.add(w, &slots[*c]);
                }
                let (constant, atoms) = pre
                    .resolve(k, &mut stats)
                    .map_err(|e| NotRecognized(format!("layer {}, unit {r}: {}", li + 1, e.0)))?;
                hidden_slot(constant, atoms, k)
                    .map_err(|e| NotRecognized(format!("layer {}, unit {r}: {}", li + 1, e.0)))?
            };
            match &slot {
                Slot::Atom { .. } => stats.atoms += 1,
                Slot::Half { .. } => stats.halves += 1,
                Slot::Const(_) => stats.constants += 1,
                Slot::Zero => {}
            }
            next.push(slot);
        }
        structure.push(format!(
            "layer {}: {} ridge units, {} shifted units, {} constant units; {} mirrored pairs collapsed",
            li + 1,
            stats.atoms,
            stats.halves,
            stats.constants,
            stats.pairs
        ));
        if li > 0 && stats.atoms > 0 {
            structure.push(format!("layer {}: power-raising inputs are σ-outputs, hence nonnegative", li + 1));
        }
        slots = next;
    }

    let mut out = Affine::default();
    for (i, c) in net.output().entries() {
        out.add(c, &slots[*i]);
    }
    let mut stats = Stats::default();
    let (constant, atoms) = out.resolve(k, &mut stats).map_err(|e| NotRecognized(format!("output: {}", e.0)))?;
    structure.push(format!("output: {} mirrored pairs collapsed, {} ridge terms", stats.pairs, atoms.len()));

    let mut polynomial = Polynomial::constant(d, constant);
    let mut residual: BTreeMap<(Vec<Rational>, u32), Rational> = BTreeMap::new();
    let mut collapsed = 0;
    for ((ridge, exp), gamma) in &atoms {
        let r = &ridges.list[*ridge];
        if orientation_positive(r, d) {
            let neg: Ridge = r.iter().map(|v| -v).collect();
            let power = expand_affine_power(&r[..d], &r[d], *exp, EXPANSION_CAP.max(*exp))
                .map_err(|e| NotRecognized(e.to_string()))?;
            polynomial.add_scaled(&power, gamma);
            let sign = if exp % 2 == 0 { Rational::one() } else { -Rational::one() };
            *residual.entry((neg, *exp)).or_insert_with(Rational::zero) -= sign * gamma;
            collapsed += 1;
        } else {
            *residual.entry((r.clone(), *exp)).or_insert_with(Rational::zero) += gamma;
        }
    }
    residual.retain(|_, c| !c.is_zero());
    structure.push(format!(
        "output: {collapsed} ridge powers expanded, {} residual ridge terms",
        residual.len()
    ));
    Ok(Interpretation { form: CanonicalForm { polynomial, residual_atoms: residual }, structure })
}

fn first_layer_slot(row: &[(usize, Rational)], b: &Rational, d: usize, k: u32, ridges: &mut Ridges) -> Slot {
    let mut w = vec![Rational::zero(); d];
    for (c, v) in row {
        w[*c] = v.clone();
    }
    let Some(lead) = w.iter().find(|v| !v.is_zero()).map(|v| v.abs()) else {
        return const_slot(sigma(b, k));
    };
    let mut r: Ridge = w.iter().map(|v| v / &lead).collect();
    r.push(b / &lead);
    Slot::Atom { coeff: rational::pow(&lead, u64::from(k)), ridge: ridges.intern(r), exp: k }
}

fn const_slot(c: Rational) -> Slot {
    if c.is_zero() {
        Slot::Zero
    } else {
        Slot::Const(c)
    }
}

fn hidden_slot(constant: Rational, atoms: BTreeMap<(usize, u32), Rational>, k: u32) -> Result<Slot, NotRecognized> {
    let mut iter = atoms.into_iter();
    let Some(((ridge, exp), alpha)) = iter.next() else {
        return Ok(const_slot(sigma(&constant, k)));
    };
    if iter.next().is_some() {
        return Err(NotRecognized("input depends on more than one ridge term".into()));
    }
    if !constant.is_zero() {
        return Ok(Slot::Half { ridge, exp, slope: alpha, offset: constant });
    }
    if alpha.is_negative() {
        return Ok(Slot::Zero);
    }
    Ok(Slot::Atom { coeff: rational::pow(&alpha, u64::from(k)), ridge, exp: exp * k })
}

/// The exact polynomial a recognized network realizes on all of ℝ^d.
pub fn reduce_to_polynomial(net: &Network) -> Result<Polynomial, NotRecognized> {
    let interp = interpret(net)?;
    if !interp.form.residual_atoms.is_empty() {
        return Err(NotRecognized(format!(
            "{} ridge terms do not pair up into polynomials",
            interp.form.residual_atoms.len()
        )));
    }
    Ok(interp.form.polynomial)
}

pub fn canonical_form(net: &Network) -> Result<CanonicalForm, NotRecognized> {
    Ok(interpret(net)?.form)
}

pub fn certify_equal(net: &Network, target: &Target) -> CertificateReport {
    let d = net.input_dim();
    let target_dim = match target {
        Target::Polynomial(p) => p.dim(),
        Target::Shallow(s) => s.input_dim(),
    };
    if target_dim != d {
        return CertificateReport {
            status: Status::Refuted,
            residual: Polynomial::zero(d),
            checked_structure: vec![format!("input dimension {d} differs from the target's {target_dim}")],
            point_check: PointCheck { count: 0, failures: 0 },
        };
    }
    let point_check = point_check(net, target);
    let mut structure = Vec::new();
    let (mut status, residual) = match interpret(net) {
        Err(e) => {
            structure.push(e.to_string());
            (Status::NotRecognized, Polynomial::zero(d))
        }
        Ok(interp) => {
            structure.extend(interp.structure);
            match target {
                Target::Polynomial(p) => {
                    if interp.form.residual_atoms.is_empty() {
                        let residual = &interp.form.polynomial - p;
                        let status = if residual.is_zero() { Status::Proven } else { Status::Refuted };
                        (status, residual)
                    } else {
                        structure.push(format!(
                            "{} ridge terms do not pair up into polynomials",
                            interp.form.residual_atoms.len()
                        ));
                        (Status::NotRecognized, Polynomial::zero(d))
                    }
                }
                Target::Shallow(s) => match interpret(&Network::Shallow((*s).clone())) {
                    Err(e) => {
                        structure.push(format!("target {e}"));
                        (Status::NotRecognized, Polynomial::zero(d))
                    }
                    Ok(t) => {
                        let residual = &interp.form.polynomial - &t.form.polynomial;
                        let same_atoms = interp.form.residual_atoms == t.form.residual_atoms;
                        if !same_atoms {
                            structure.push("residual ridge terms differ from the target's".into());
                        } else {
                            structure.push(format!(
                                "{} residual ridge terms match the target's",
                                t.form.residual_atoms.len()
                            ));
                        }
                        let status = if residual.is_zero() && same_atoms { Status::Proven } else { Status::Refuted };
                        (status, residual)
                    }
                },
            }
        }
    };
    if point_check.failures > 0 && status == Status::Proven {
        structure.push("point check disagrees with the symbolic proof".into());
        status = Status::Refuted;
    }
    structure.push(format!("point check: {} of {} points agree", point_check.count - point_check.failures, point_check.count));
    CertificateReport { status, residual, checked_structure: structure, point_check }
}

fn point_check(net: &Network, target: &Target) -> PointCheck {
    let pts = points::halton_ball(net.input_dim(), POINT_CHECK_COUNT);
    let target_net = match target {
        Target::Shallow(s) => Some(Network::Shallow((*s).clone())),
        Target::Polynomial(_) => None,
    };
    let failures = pts
        .iter()
        .filter(|x| {
            let got = net.eval_exact(x).expect("dimension checked");
            let want = match (target, &target_net) {
                (Target::Polynomial(p), _) => p.eval(x).expect("dimension checked"),
                (_, Some(t)) => t.eval_exact(x).expect("dimension checked"),
                _ => unreachable!(),
            };
            got != want
        })
        .count();
    PointCheck { count: pts.len(), failures }
}

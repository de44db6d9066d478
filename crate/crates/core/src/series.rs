//! Lower exponent-2 and lower central series of `K_n`, and the checks built
//! on them: the periodic bases of `lambda_i / (lambda_i ∩ H_{i+1})`, the
//! identity `lambda_i = G ∩ H_i`, and width statistics.
//!
//! Series terms are computed as [`Subgroup`] bases directly in `H/H_n`, so
//! none of this needs `K_n` enumerated; [`crate::quotient::QuotientGroup`]
//! is used to cross-check orders where enumeration is affordable.

use serde::Serialize;
use thiserror::Error;

use crate::generators::{ConstantTable, GeneratorSet};
use crate::gf2::{span, SBlock, Subspace27};
use crate::quotient::{QuotientGroup, Subgroup};
use crate::toeplitz::TruncElem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("index bound needs k >= 1, got {0}")]
    BadIndex(usize),
    #[error("need i >= {min}, got {i}")]
    RangeTooSmall { i: usize, min: usize },
}

/// `2^2`, `2^5`, then `2^{8i-1+mu(j)}` for `k = 3i + j` with
/// `mu = (0, 3, 6)`.
pub fn index_lower_bound(k: usize) -> Result<u128, SeriesError> {
    match k {
        0 => Err(SeriesError::BadIndex(k)),
        1 => Ok(1 << 2),
        2 => Ok(1 << 5),
        _ => {
            let (i, j) = (k / 3, k % 3);
            let mu = [0, 3, 6][j];
            Ok(1u128 << (8 * i - 1 + mu))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Exponent2,
    Central,
    Frattini,
}

/// A descending series of normal subgroups of `K_n`, ending at the trivial
/// group. For `Exponent2`, `terms[t]` is `lambda_t` (`lambda_0 = K_n`); for
/// `Central`, `terms[t]` is `gamma_{t+1}` (`gamma_1 = K_n`).
#[derive(Clone, Debug)]
pub struct SeriesChain {
    pub level: usize,
    pub kind: SeriesKind,
    pub terms: Vec<Subgroup>,
}

impl SeriesChain {
    /// `lambda_i` or `gamma_i`, trivial past the end of the chain.
    pub fn term(&self, i: usize) -> Subgroup {
        let t = match self.kind {
            SeriesKind::Exponent2 | SeriesKind::Frattini => Some(i),
            SeriesKind::Central => i.checked_sub(1),
        };
        let t = t.expect("central series starts at gamma_1");
        self.terms
            .get(t)
            .cloned()
            .unwrap_or_else(|| Subgroup::trivial(self.level))
    }

    pub fn order_log2(&self, i: usize) -> usize {
        self.term(i).order_log2()
    }

    /// `log2 |term(i) / term(i+1)|`.
    pub fn factor_log2(&self, i: usize) -> usize {
        self.order_log2(i) - self.order_log2(i + 1)
    }

    pub fn is_descending(&self) -> bool {
        self.terms.windows(2).all(|w| w[1].is_subgroup_of(&w[0]))
    }

    /// Whether `term(i) / term(i+1)` is elementary abelian.
    pub fn factor_is_elementary_abelian(&self, i: usize) -> bool {
        let top = self.term(i);
        let next = self.term(i + 1);
        let basis = top.basis_vec();
        basis.iter().all(|b| next.contains(&b.square()))
            && basis.iter().enumerate().all(|(n, b)| {
                basis[n + 1..]
                    .iter()
                    .all(|c| next.contains(&b.commutator(c).unwrap()))
            })
    }
}

fn gens_at(level: usize) -> [TruncElem; 2] {
    let g = GeneratorSet::clipped(level);
    [g.x0, g.x1]
}

/// `K_n` as a subgroup basis of `H/H_n`.
pub fn whole_group(level: usize) -> Subgroup {
    Subgroup::generated(level, &gens_at(level))
}

/// `lambda_{t+1} = [lambda_t, G] lambda_t^2`, the normal closure of the
/// squares of a basis of `lambda_t` and its commutators with `v0, v1`.
pub fn exponent2_series_at(level: usize) -> SeriesChain {
    let gens = gens_at(level);
    let mut terms = vec![whole_group(level)];
    while !terms.last().unwrap().is_trivial() {
        let basis = terms.last().unwrap().basis_vec();
        let mut words: Vec<TruncElem> = basis.iter().map(|b| b.square()).collect();
        for b in &basis {
            words.extend(gens.iter().map(|v| b.commutator(v).unwrap()));
        }
        terms.push(Subgroup::normal_closure(level, &words, &gens));
    }
    SeriesChain {
        level,
        kind: SeriesKind::Exponent2,
        terms,
    }
}

/// The Frattini series `Phi_{t+1} = [Phi_t, Phi_t] Phi_t^2`; it falls much
/// faster than `lambda` and is kept for comparison only.
pub fn frattini_series_at(level: usize) -> SeriesChain {
    let gens = gens_at(level);
    let mut terms = vec![whole_group(level)];
    while !terms.last().unwrap().is_trivial() {
        let basis = terms.last().unwrap().basis_vec();
        let mut words: Vec<TruncElem> = basis.iter().map(|b| b.square()).collect();
        for (n, b) in basis.iter().enumerate() {
            for c in &basis[n + 1..] {
                words.push(b.commutator(c).unwrap());
            }
        }
        terms.push(Subgroup::normal_closure(level, &words, &gens));
    }
    SeriesChain {
        level,
        kind: SeriesKind::Frattini,
        terms,
    }
}

pub fn central_series_at(level: usize) -> SeriesChain {
    let gens = gens_at(level);
    let mut terms = vec![whole_group(level)];
    while !terms.last().unwrap().is_trivial() {
        let basis = terms.last().unwrap().basis_vec();
        let words: Vec<TruncElem> = basis
            .iter()
            .flat_map(|b| gens.iter().map(move |v| b.commutator(v).unwrap()))
            .collect();
        let next = Subgroup::normal_closure(level, &words, &gens);
        if next.order_log2() == terms.last().unwrap().order_log2() {
            // perfect term; cannot happen in a finite 2-group
            break;
        }
        terms.push(next);
    }
    SeriesChain {
        level,
        kind: SeriesKind::Central,
        terms,
    }
}

pub fn exponent2_series(q: &QuotientGroup) -> SeriesChain {
    exponent2_series_at(q.level())
}

pub fn central_series(q: &QuotientGroup) -> SeriesChain {
    central_series_at(q.level())
}

/// The constant family the depth-`i` leads are expected in: `S_2`, `S_3`,
/// `S_1` for `i = 1, 2, 0 (mod 3)`.
pub fn predicted_family(i: usize) -> usize {
    match i % 3 {
        1 => 2,
        2 => 3,
        _ => 1,
    }
}

/// Generator-index words of the commutators listed as a basis at depth `i`.
pub fn basis_words(i: usize) -> Vec<Vec<usize>> {
    assert!(i >= 2);
    let left = |n: usize| {
        let mut w = vec![1];
        w.extend(std::iter::repeat_n(0, n));
        w
    };
    let with = |n: usize, tail: &[usize]| {
        let mut w = left(n);
        w.extend_from_slice(tail);
        w
    };
    match i % 3 {
        1 => vec![left(i), with(i - 2, &[1, 0]), with(i - 2, &[1, 1])],
        2 => vec![left(i), with(i - 1, &[1])],
        _ => vec![left(i), with(i - 1, &[1]), with(i - 2, &[1, 1])],
    }
}

/// `[x1, _n x0, ...]` notation for a generator word.
pub fn word_label(word: &[usize]) -> String {
    let name = |g: usize| format!("x{g}");
    let mut parts = vec![name(word[0])];
    let mut n = 1;
    while n < word.len() {
        let g = word[n];
        let run = word[n..].iter().take_while(|&&h| h == g).count();
        if run > 1 {
            parts.push(format!("_{run} {}", name(g)));
        } else {
            parts.push(name(g));
        }
        n += run;
    }
    format!("[{}]", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisLead {
    pub word: String,
    pub depth: usize,
    pub lead: SBlock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientBasisReport {
    pub i: usize,
    pub index: u64,
    pub expected_index: u64,
    pub lead_subspace: Subspace27,
    pub claimed_basis_leads: Vec<BasisLead>,
    /// Claimed leads sit at depth `i` and form a basis of `lead_subspace`.
    pub basis_matches: bool,
    /// `lead_subspace` lies in the predicted constant family span.
    pub in_predicted_family: bool,
    pub predicted_family: usize,
}

impl QuotientBasisReport {
    pub fn ok(&self) -> bool {
        self.index == self.expected_index && self.basis_matches && self.in_predicted_family
    }
}

pub fn expected_index(i: usize) -> u64 {
    match i {
        0 => 4,
        1 => 8,
        _ if i % 3 == 2 => 4,
        _ => 8,
    }
}

/// The depth-`i` quotient of `lambda_i`, computed inside `K_{i+1}`.
pub fn gammabasis_report(i: usize) -> Result<QuotientBasisReport, SeriesError> {
    if i < 2 {
        return Err(SeriesError::RangeTooSmall { i, min: 2 });
    }
    let level = i + 1;
    let lambda = exponent2_series_at(level).term(i);
    let lead_subspace = lambda.lead_subspace(i);
    let gens = GeneratorSet::clipped(level);
    let claimed: Vec<BasisLead> = basis_words(i)
        .iter()
        .map(|w| {
            let c = gens.left_normed(w);
            BasisLead {
                word: word_label(w),
                depth: c.depth(),
                lead: if c.depth() < level {
                    c.diagonal(c.depth() + 1)
                } else {
                    SBlock::ZERO
                },
            }
        })
        .collect();
    let claimed_span = span(claimed.iter().map(|b| b.lead));
    let basis_matches = claimed.iter().all(|b| b.depth == i)
        && claimed_span.dim() == claimed.len()
        && claimed_span == lead_subspace;
    let family = predicted_family(i);
    let fam_span = span(ConstantTable::get().family(family));
    Ok(QuotientBasisReport {
        i,
        index: 1 << lead_subspace.dim(),
        expected_index: expected_index(i),
        in_predicted_family: lead_subspace.is_subspace_of(&fam_span),
        predicted_family: family,
        lead_subspace,
        claimed_basis_leads: claimed,
        basis_matches,
    })
}

pub fn verify_gammabases(imax: usize) -> Vec<QuotientBasisReport> {
    use rayon::prelude::*;
    (2..=imax)
        .into_par_iter()
        .map(|i| gammabasis_report(i).expect("i >= 2"))
        .collect()
}

/// The two lowest cases: `[G : G ∩ H_1] = 4` with leads of `x0, x1`, and
/// `[lambda_1 : lambda_1 ∩ H_2] = 8` with leads of `x0^2, x1^2, [x1, x0]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LowCaseReport {
    pub index0: u64,
    pub index1: u64,
    pub basis0_matches: bool,
    pub basis1_matches: bool,
}

impl LowCaseReport {
    pub fn ok(&self) -> bool {
        self.index0 == 4 && self.index1 == 8 && self.basis0_matches && self.basis1_matches
    }
}

pub fn verify_low_cases() -> LowCaseReport {
    let chain = exponent2_series_at(2);
    let whole = chain.term(0);
    let lambda1 = chain.term(1);
    let g = GeneratorSet::clipped(2);
    let lead_at = |x: &TruncElem, d: usize| (x.depth() == d).then(|| x.diagonal(d + 1));
    let check = |elems: &[TruncElem], d: usize, target: &Subspace27| {
        let leads: Option<Vec<SBlock>> = elems.iter().map(|x| lead_at(x, d)).collect();
        leads.is_some_and(|l| {
            let s = span(l.iter().copied());
            s.dim() == elems.len() && &s == target
        })
    };
    let s0 = whole.lead_subspace(0);
    let s1 = lambda1.lead_subspace(1);
    LowCaseReport {
        index0: 1 << s0.dim(),
        index1: 1 << s1.dim(),
        basis0_matches: check(&[g.x0.clone(), g.x1.clone()], 0, &s0),
        basis1_matches: check(
            &[g.x0.square(), g.x1.square(), g.x1.commutator(&g.x0).unwrap()],
            1,
            &s1,
        ),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureRow {
    pub i: usize,
    pub lambda_order_log2: usize,
    pub kernel_order_log2: usize,
    pub contained: bool,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    /// The level `n` the identity was checked at.
    pub level: usize,
    pub rows: Vec<ConjectureRow>,
}

impl ConjectureReport {
    pub fn all_equal(&self) -> bool {
        self.rows.iter().all(|r| r.equal)
    }
}

/// Checks `lambda_i(K_n) = ker(K_n -> K_i)` for `0 <= i <= imax`, `n = imax + 1`.
pub fn check_conjecture(imax: usize) -> ConjectureReport {
    let level = imax + 1;
    let chain = exponent2_series_at(level);
    let whole = chain.term(0);
    let rows = (0..=imax)
        .map(|i| {
            let lambda = chain.term(i);
            let kernel = whole.deeper_than(i);
            let contained = lambda.min_depth() >= i;
            ConjectureRow {
                i,
                lambda_order_log2: lambda.order_log2(),
                kernel_order_log2: kernel.order_log2(),
                contained,
                equal: contained && lambda.order_log2() == kernel.order_log2(),
            }
        })
        .collect();
    ConjectureReport { level, rows }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WidthReport {
    pub level: usize,
    /// `(i, log2 |lambda_i / lambda_{i+1}|)`.
    pub widths: Vec<(usize, usize)>,
    pub max_width: usize,
    pub follows_pattern: bool,
}

/// Widths for `2 <= i <= imax`, computed in `K_{imax+1}`.
pub fn width_statistics(imax: usize) -> WidthReport {
    let level = imax + 1;
    let chain = exponent2_series_at(level);
    let widths: Vec<(usize, usize)> = (2..=imax).map(|i| (i, chain.factor_log2(i))).collect();
    let follows_pattern = widths
        .iter()
        .all(|&(i, w)| w as u64 == expected_index(i).trailing_zeros() as u64);
    WidthReport {
        level,
        max_width: widths.iter().map(|&(_, w)| w).max().unwrap_or(0),
        widths,
        follows_pattern,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorComparison {
    pub i: usize,
    pub lambda_factor_log2: usize,
    /// `log2 |gamma_i / gamma_{i+1}|` with `gamma_1 = K_n`.
    pub gamma_factor_log2: usize,
    /// `log2 |gamma_{i+1} / gamma_{i+2}|`, aligning `gamma_1` with `lambda_0`.
    pub gamma_next_factor_log2: usize,
    pub lambda_elementary_abelian: bool,
    pub gamma_elementary_abelian: bool,
    pub gamma_next_elementary_abelian: bool,
    /// Equal orders of elementary abelian factors, hence isomorphic.
    pub isomorphic: bool,
    pub isomorphic_next: bool,
}

/// Compares `lambda_i / lambda_{i+1}` with the lower central factors in
/// `K_n` for `2 <= i <= imax`, under both index alignments.
pub fn compare_factors(level: usize, imax: usize) -> Vec<FactorComparison> {
    let lambda = exponent2_series_at(level);
    let gamma = central_series_at(level);
    (2..=imax)
        .map(|i| {
            let le = lambda.factor_is_elementary_abelian(i);
            let ge = gamma.factor_is_elementary_abelian(i);
            let gne = gamma.factor_is_elementary_abelian(i + 1);
            let (lf, gf, gnf) = (
                lambda.factor_log2(i),
                gamma.factor_log2(i),
                gamma.factor_log2(i + 1),
            );
            FactorComparison {
                i,
                lambda_factor_log2: lf,
                gamma_factor_log2: gf,
                gamma_next_factor_log2: gnf,
                lambda_elementary_abelian: le,
                gamma_elementary_abelian: ge,
                gamma_next_elementary_abelian: gne,
                isomorphic: le && ge && lf == gf,
                isomorphic_next: le && gne && lf == gnf,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderBoundRow {
    pub level: usize,
    pub order_log2: usize,
    pub bound_log2: u32,
    pub meets_bound: bool,
    pub equal: bool,
}

/// `|K_k|` from the subgroup basis against the lower bound.
pub fn order_bound_row(level: usize) -> OrderBoundRow {
    let order_log2 = whole_group(level).order_log2();
    let bound_log2 = index_lower_bound(level).expect("level >= 1").trailing_zeros();
    OrderBoundRow {
        level,
        order_log2,
        bound_log2,
        meets_bound: order_log2 as u32 >= bound_log2,
        equal: order_log2 as u32 == bound_log2,
    }
}

//! Words in `Gamma = <x0, ..., x6 | x_i x_{i+1} x_{i+3}>` (indices mod 7)
//! and their reduction to `w` or `w x2` with `w` over `x0^{±1}, x1^{±1}`.
//!
//! Eliminating `x3 .. x6` leaves three relators in `x0, x1, x2`, used in
//! rotated form:
//!
//! ```text
//! R1 = x2 x1 x2 x0 x1 x0            x2 x1 x2    = x0^-1 x1^-1 x0^-1
//! R2 = x2 x0^-1 x2 x1^-1 x0^-1 x1   x2 x0^-1 x2 = x1^-1 x0 x1
//! R3 = x2 x2 x1^-1 x0^-1 x1^-1 x0   x2 x2       = x0^-1 x1 x0 x1
//! ```
//!
//! Every rewrite is recorded as a trace of elementary steps: inserting or
//! cancelling `g g^-1`, or replacing a subword `p` by `q` where `p q^-1` is
//! a cyclic rotation of a relator or its inverse. [`replay`] re-checks a
//! trace from scratch.

use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::generators::GeneratorSet;
use crate::quotient::QuotientGroup;
use crate::toeplitz::TruncElem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

impl Letter {
    pub const fn new(gen: u8, inv: bool) -> Letter {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inv {
            write!(f, "x{}^-1", self.gen)
        } else {
            write!(f, "x{}", self.gen)
        }
    }
}

const A: Letter = Letter::new(0, false);
const AI: Letter = Letter::new(0, true);
const B: Letter = Letter::new(1, false);
const BI: Letter = Letter::new(1, true);
const C: Letter = Letter::new(2, false);
const CI: Letter = Letter::new(2, true);

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct GammaWord {
    pub letters: Vec<Letter>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("cannot parse {0:?}; expected letters like x0, x3^-1, x2^2")]
    Parse(String),
}

impl GammaWord {
    pub fn new(letters: Vec<Letter>) -> GammaWord {
        GammaWord { letters }
    }

    pub fn empty() -> GammaWord {
        GammaWord::default()
    }

    /// Parses `x0 x1^-1 x2^2 ...` (whitespace or `*` separated).
    pub fn parse(s: &str) -> Result<GammaWord, WordError> {
        let mut letters = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
            let err = || WordError::Parse(tok.to_string());
            let body = tok.strip_prefix('x').ok_or_else(err)?;
            let (g, e) = match body.split_once('^') {
                Some((g, e)) => (g, e.parse::<i32>().map_err(|_| err())?),
                None => (body, 1),
            };
            let gen: u8 = g.parse().map_err(|_| err())?;
            if gen > 6 || e == 0 {
                return Err(err());
            }
            for _ in 0..e.unsigned_abs() {
                letters.push(Letter::new(gen, e < 0));
            }
        }
        Ok(GammaWord::new(letters).reduced())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> GammaWord {
        GammaWord::new(self.letters.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1].inverse())
    }

    pub fn reduced(&self) -> GammaWord {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GammaWord::new(out)
    }

    pub fn count(&self, gen: u8) -> usize {
        self.letters.iter().filter(|l| l.gen == gen).count()
    }

    /// Over `x0, x1, x2` only.
    pub fn is_eliminated(&self) -> bool {
        self.letters.iter().all(|l| l.gen <= 2)
    }

    /// Generator-exponent letters for [`GeneratorSet::eval`]; `None` if the
    /// word uses anything besides `x0, x1`.
    pub fn as_g_word(&self) -> Option<Vec<(usize, i64)>> {
        self.letters
            .iter()
            .map(|l| (l.gen <= 1).then_some((l.gen as usize, if l.inv { -1 } else { 1 })))
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> GammaWord {
        let n = rng.gen_range(0..=max_len);
        GammaWord::new(
            (0..n)
                .map(|_| Letter::new(rng.gen_range(0..7), rng.gen()))
                .collect(),
        )
        .reduced()
    }
}

impl fmt::Display for GammaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn word(s: &str) -> Vec<Letter> {
    GammaWord::parse(s).expect("static word").letters
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RelatorId {
    /// `x_i x_{i+1} x_{i+3}`.
    Defining(u8),
    /// `R1`, `R2`, `R3` in `x0, x1, x2`.
    Derived(u8),
}

impl RelatorId {
    pub fn all() -> Vec<RelatorId> {
        (0..7)
            .map(RelatorId::Defining)
            .chain((1..=3).map(RelatorId::Derived))
            .collect()
    }

    pub fn word(self) -> Vec<Letter> {
        match self {
            RelatorId::Defining(i) => vec![
                Letter::new(i % 7, false),
                Letter::new((i + 1) % 7, false),
                Letter::new((i + 3) % 7, false),
            ],
            RelatorId::Derived(1) => word("x2 x1 x2 x0 x1 x0"),
            RelatorId::Derived(2) => word("x2 x0^-1 x2 x1^-1 x0^-1 x1"),
            RelatorId::Derived(3) => word("x2 x2 x1^-1 x0^-1 x1^-1 x0"),
            RelatorId::Derived(k) => panic!("no derived relator R{k}"),
        }
    }
}

fn is_rotation(cyc: &[Letter], w: &[Letter]) -> bool {
    cyc.len() == w.len()
        && (cyc.is_empty() || (0..cyc.len()).any(|r| cyc[r..].iter().chain(&cyc[..r]).eq(w)))
}

/// Whether `w` is a cyclic rotation of `R` or `R^-1`.
pub fn is_relator_rotation(id: RelatorId, w: &[Letter]) -> bool {
    let r = id.word();
    let ri = GammaWord::new(r.clone()).inverse().letters;
    is_rotation(&r, w) || is_rotation(&ri, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    FreeInsert,
    FreeReduce,
    Relator(RelatorId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub pos: usize,
    pub removed: Vec<Letter>,
    pub inserted: Vec<Letter>,
    pub kind: StepKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub start: GammaWord,
    pub steps: Vec<Step>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {index}: subword at {pos} does not match")]
    Mismatch { index: usize, pos: usize },
    #[error("step {index}: not an elementary {kind:?} move")]
    NotSanctioned { index: usize, kind: StepKind },
}

fn step_is_sanctioned(s: &Step) -> bool {
    match s.kind {
        StepKind::FreeInsert => {
            s.removed.is_empty() && s.inserted.len() == 2 && s.inserted[0] == s.inserted[1].inverse()
        }
        StepKind::FreeReduce => {
            s.inserted.is_empty() && s.removed.len() == 2 && s.removed[0] == s.removed[1].inverse()
        }
        StepKind::Relator(id) => {
            let mut pq: Vec<Letter> = s.removed.clone();
            pq.extend(s.inserted.iter().rev().map(|l| l.inverse()));
            is_relator_rotation(id, &pq)
        }
    }
}

/// Re-applies every step, checking that each one is an elementary move.
pub fn replay(trace: &Trace) -> Result<GammaWord, ReplayError> {
    let mut w = trace.start.letters.clone();
    for (index, s) in trace.steps.iter().enumerate() {
        if !step_is_sanctioned(s) {
            return Err(ReplayError::NotSanctioned {
                index,
                kind: s.kind,
            });
        }
        let end = s.pos + s.removed.len();
        if end > w.len() || w[s.pos..end] != s.removed[..] {
            return Err(ReplayError::Mismatch { index, pos: s.pos });
        }
        w.splice(s.pos..end, s.inserted.iter().copied());
    }
    Ok(GammaWord::new(w))
}

struct Rewriter {
    word: Vec<Letter>,
    steps: Vec<Step>,
}

impl Rewriter {
    fn new(start: &[Letter]) -> Rewriter {
        Rewriter {
            word: start.to_vec(),
            steps: Vec::new(),
        }
    }

    fn replace(&mut self, pos: usize, len: usize, inserted: &[Letter], kind: StepKind) {
        let removed = self.word[pos..pos + len].to_vec();
        self.word.splice(pos..pos + len, inserted.iter().copied());
        let step = Step {
            pos,
            removed,
            inserted: inserted.to_vec(),
            kind,
        };
        debug_assert!(step_is_sanctioned(&step), "{step:?}");
        self.steps.push(step);
    }

    fn insert_pair(&mut self, pos: usize, l: Letter) {
        self.replace(pos, 0, &[l, l.inverse()], StepKind::FreeInsert);
    }

    fn free_reduce(&mut self) {
        let mut i = 0;
        while i + 1 < self.word.len() {
            if self.word[i] == self.word[i + 1].inverse() {
                self.replace(i, 2, &[], StepKind::FreeReduce);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
    }
}

/// The substitution for `x3 .. x6` (and inverses) as relator steps.
fn eliminate_at(r: &mut Rewriter, pos: usize) -> usize {
    let l = r.word[pos];
    let rel = |i| StepKind::Relator(RelatorId::Defining(i));
    match (l.gen, l.inv) {
        (3, false) => r.replace(pos, 1, &word("x1^-1 x0^-1"), rel(0)),
        (3, true) => r.replace(pos, 1, &word("x0 x1"), rel(0)),
        (4, false) => r.replace(pos, 1, &word("x2^-1 x1^-1"), rel(1)),
        (4, true) => r.replace(pos, 1, &word("x1 x2"), rel(1)),
        (5, false) => {
            r.replace(pos, 1, &word("x3^-1 x2^-1"), rel(2));
            r.replace(pos, 1, &word("x0 x1"), rel(0));
        }
        (5, true) => {
            r.replace(pos, 1, &word("x2 x3"), rel(2));
            r.replace(pos + 1, 1, &word("x1^-1 x0^-1"), rel(0));
        }
        (6, false) => r.replace(pos, 1, &word("x2^-1 x0^-1"), rel(6)),
        (6, true) => r.replace(pos, 1, &word("x0 x2"), rel(6)),
        _ => return pos + 1,
    }
    pos
}

fn eliminate_all(r: &mut Rewriter) {
    let mut i = 0;
    while i < r.word.len() {
        i = eliminate_at(r, i);
    }
    r.free_reduce();
}

/// Substitutes `x3 = (x0 x1)^-1`, `x4 = (x1 x2)^-1`, `x5 = x0 x1 x2^-1`,
/// `x6 = (x0 x2)^-1` and reduces freely.
pub fn eliminate(w: &GammaWord) -> GammaWord {
    eliminate_traced(w).0
}

pub fn eliminate_traced(w: &GammaWord) -> (GammaWord, Trace) {
    let mut r = Rewriter::new(&w.letters);
    eliminate_all(&mut r);
    (
        GammaWord::new(r.word),
        Trace {
            start: w.clone(),
            steps: r.steps,
        },
    )
}

fn rel(k: u8) -> StepKind {
    StepKind::Relator(RelatorId::Derived(k))
}

/// `x2 g -> phi(g) x2` for the letter after the `x2` at `p`.
fn push(r: &mut Rewriter, p: usize) {
    let g = r.word[p + 1];
    r.insert_pair(p + 2, CI);
    match (g.gen, g.inv) {
        (0, false) => {
            // x2 x0 x2^-1 x2 -> x2 x2 x1^-1 x0^-1 x1 x2 -> x0^-1 x1 x0 x1 x1^-1 x0^-1 x1 x2
            r.replace(p + 1, 2, &[C, BI, AI, B], rel(2));
            r.replace(p, 2, &[AI, B, A, B], rel(3));
        }
        (0, true) => {
            // x2 x0^-1 x2^-1 x2 -> x1^-1 x0 x1 x2^-1 x2^-1 x2 -> x1^-1 x0 x1 x1^-1 x0^-1 x1^-1 x0 x2
            r.replace(p, 2, &[BI, A, B, CI], rel(2));
            r.replace(p + 3, 2, &[BI, AI, BI, A], rel(3));
        }
        (1, false) => {
            r.replace(p, 2, &[AI, BI, AI, CI], rel(1));
            r.replace(p + 3, 2, &[BI, AI, BI, A], rel(3));
        }
        (1, true) => {
            r.replace(p + 1, 2, &[C, A, B, A], rel(1));
            r.replace(p, 2, &[AI, B, A, B], rel(3));
        }
        _ => unreachable!("push only past x0, x1 letters"),
    }
}

/// `x2 x2 -> x0^-1 x1 x0 x1` at `p`.
fn collapse(r: &mut Rewriter, p: usize) {
    r.replace(p, 2, &[AI, B, A, B], rel(3));
}

/// `x2^-1 -> x1^-1 x0^-1 x1^-1 x0 x2` at `p`.
fn invert(r: &mut Rewriter, p: usize) {
    r.replace(p, 1, &[BI, AI, BI, A, C], rel(3));
}

/// `w` or `w x2`, with `w` over `x0^{±1}, x1^{±1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NormalForm {
    pub w: GammaWord,
    pub tail: bool,
}

impl NormalForm {
    pub fn to_word(&self) -> GammaWord {
        let mut l = self.w.letters.clone();
        if self.tail {
            l.push(C);
        }
        GammaWord::new(l)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.w.is_empty(), self.tail) {
            (true, true) => write!(f, "x2"),
            (_, true) => write!(f, "{} x2", self.w),
            (_, false) => write!(f, "{}", self.w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Normalized {
    pub form: NormalForm,
    pub trace: Trace,
    /// Pushes and collapses performed after `x2^-1` was removed.
    pub rule_steps: usize,
    /// Word length when pushing started; `rule_steps` stays below its square.
    pub push_start_len: usize,
}

/// Eliminates `x3 .. x6`, then repeatedly rewrites at the leftmost `x2`
/// that is not the final letter.
pub fn normalize(w: &GammaWord) -> Normalized {
    let mut r = Rewriter::new(&w.letters);
    eliminate_all(&mut r);
    while let Some(p) = r.word.iter().position(|&l| l == CI) {
        invert(&mut r, p);
    }
    r.free_reduce();
    let push_start_len = r.word.len();
    let mut rule_steps = 0;
    loop {
        let n = r.word.len();
        let Some(p) = r.word.iter().position(|&l| l == C).filter(|&p| p + 1 < n) else {
            break;
        };
        if r.word[p + 1] == C {
            collapse(&mut r, p);
        } else {
            push(&mut r, p);
        }
        rule_steps += 1;
        r.free_reduce();
    }
    let tail = r.word.last() == Some(&C);
    let mut letters = r.word.clone();
    if tail {
        letters.pop();
    }
    debug_assert!(letters.iter().all(|l| l.gen <= 1));
    Normalized {
        form: NormalForm {
            w: GammaWord::new(letters),
            tail,
        },
        trace: Trace {
            start: w.clone(),
            steps: r.steps,
        },
        rule_steps,
        push_start_len,
    }
}

/// A derivation of a rewriting rule `lhs -> rhs` from elementary moves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleCertificate {
    pub name: String,
    pub lhs: GammaWord,
    pub rhs: GammaWord,
    pub trace: Trace,
    pub replays: bool,
}

fn certify(name: &str, lhs: &[Letter], rhs: &[Letter], f: impl FnOnce(&mut Rewriter)) -> RuleCertificate {
    let mut r = Rewriter::new(lhs);
    f(&mut r);
    let trace = Trace {
        start: GammaWord::new(lhs.to_vec()),
        steps: r.steps,
    };
    let replays = replay(&trace).is_ok_and(|w| w.letters == rhs);
    RuleCertificate {
        name: name.to_string(),
        lhs: GammaWord::new(lhs.to_vec()),
        rhs: GammaWord::new(rhs.to_vec()),
        trace,
        replays,
    }
}

/// Derivations of the rules used by [`normalize`].
pub fn rule_certificates() -> Vec<RuleCertificate> {
    let pushes = [
        ("x2 x0", "x0^-1 x1 x1 x2"),
        ("x2 x0^-1", "x1^-1 x1^-1 x0 x2"),
        ("x2 x1", "x0^-1 x1^-1 x0^-1 x1^-1 x0^-1 x1^-1 x0 x2"),
        ("x2 x1^-1", "x0^-1 x1 x0 x1 x0 x1 x0 x2"),
    ];
    let mut out: Vec<RuleCertificate> = pushes
        .iter()
        .map(|(l, rr)| {
            certify(l, &word(l), &word(rr), |r| {
                push(r, 0);
                r.free_reduce();
            })
        })
        .collect();
    out.push(certify("x2 x2", &[C, C], &word("x0^-1 x1 x0 x1"), |r| collapse(r, 0)));
    out.push(certify("x2^-1", &[CI], &word("x1^-1 x0^-1 x1^-1 x0 x2"), |r| invert(r, 0)));
    out
}

/// Each derived relator is a rotation of (the inverse of) a defining
/// relator after eliminating `x3 .. x6`; `i = 3, 4, 5` give `R1, R2, R3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedRelatorCertificate {
    pub derived: u8,
    pub from_defining: u8,
    pub eliminated: GammaWord,
    pub trace: Trace,
    pub holds: bool,
}

pub fn derived_relator_certificates() -> Vec<DerivedRelatorCertificate> {
    (1..=3u8)
        .map(|k| {
            let i = k + 2;
            let mut r = Rewriter::new(&[]);
            r.replace(0, 0, &RelatorId::Defining(i).word(), StepKind::Relator(RelatorId::Defining(i)));
            eliminate_all(&mut r);
            let trace = Trace {
                start: GammaWord::empty(),
                steps: r.steps,
            };
            let eliminated = GammaWord::new(r.word);
            let holds = replay(&trace).is_ok_and(|w| w == eliminated)
                && is_relator_rotation(RelatorId::Derived(k), &eliminated.letters);
            DerivedRelatorCertificate {
                derived: k,
                from_defining: i,
                eliminated,
                trace,
                holds,
            }
        })
        .collect()
}

/// Images of `x0, x1` under conjugation by `x2`, read off the push rules.
pub fn conjugation_images() -> [GammaWord; 2] {
    [
        GammaWord::parse("x0^-1 x1 x1").unwrap(),
        GammaWord::parse("x0^-1 x1^-1 x0^-1 x1^-1 x0^-1 x1^-1 x0").unwrap(),
    ]
}

/// An extension of `K_n` by `x2`: pairs `(g, t)` meaning `g x2^t`, with
/// `x2 h = phi(h) x2` and `x2^2 = s = x0^-1 x1 x0 x1`. It is a homomorphic
/// image of `Gamma` once [`ExtensionModel::check`] passes, which gives an
/// independent way to evaluate words containing `x2`.
#[derive(Clone, Debug)]
pub struct ExtensionModel {
    gens: GeneratorSet,
    phi: [TruncElem; 2],
    phi_inv: [TruncElem; 2],
    s: TruncElem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelCheck {
    pub level: usize,
    /// `phi` extends consistently along every edge of the Cayley graph.
    pub phi_well_defined: bool,
    pub phi_fixes_s: bool,
    /// `phi^2` is conjugation by `s`.
    pub phi_squared_is_conjugation: bool,
    /// All seven defining relators evaluate to the identity.
    pub relators_hold: bool,
}

impl ModelCheck {
    pub fn ok(&self) -> bool {
        self.phi_well_defined && self.phi_fixes_s && self.phi_squared_is_conjugation && self.relators_hold
    }
}

type ModelElem = (TruncElem, bool);

impl ExtensionModel {
    pub fn new(level: usize) -> ExtensionModel {
        let gens = GeneratorSet::clipped(level);
        let eval = |w: &GammaWord| gens.eval(&w.as_g_word().expect("x0, x1 word"));
        let [p0, p1] = conjugation_images();
        let phi = [eval(&p0), eval(&p1)];
        let phi_inv = [phi[0].inv(), phi[1].inv()];
        let s = eval(&GammaWord::parse("x0^-1 x1 x0 x1").unwrap());
        ExtensionModel {
            gens,
            phi,
            phi_inv,
            s,
        }
    }

    pub fn level(&self) -> usize {
        self.gens.level()
    }

    fn phi_of_word(&self, w: &[(usize, i64)]) -> TruncElem {
        let mut acc = TruncElem::identity(self.level());
        for &(g, e) in w {
            let f = if e < 0 { &self.phi_inv[g] } else { &self.phi[g] };
            for _ in 0..e.unsigned_abs() {
                acc = acc.mul(f).unwrap();
            }
        }
        acc
    }

    /// `phi` of an element given as a word.
    pub fn phi_word(&self, w: &GammaWord) -> TruncElem {
        self.phi_of_word(&w.as_g_word().expect("x0, x1 word"))
    }

    fn mul(&self, x: &ModelElem, y: &ModelElem, phi: &dyn Fn(&TruncElem) -> TruncElem) -> ModelElem {
        let (g, t) = x;
        let (h, u) = y;
        if !t {
            return (g.mul(h).unwrap(), *u);
        }
        let gp = g.mul(&phi(h)).unwrap();
        if *u {
            (gp.mul(&self.s).unwrap(), false)
        } else {
            (gp, true)
        }
    }

    /// Evaluates an eliminated word, applying `phi` through a lookup on
    /// `K_n` built by [`ExtensionModel::phi_table`].
    pub fn eval(&self, w: &GammaWord, table: &PhiTable) -> ModelElem {
        let e = eliminate(w);
        let phi = |h: &TruncElem| table.apply(h);
        let mut acc: ModelElem = (TruncElem::identity(self.level()), false);
        for l in &e.letters {
            let y: ModelElem = match (l.gen, l.inv) {
                (2, false) => (TruncElem::identity(self.level()), true),
                (2, true) => (self.s.inv(), true),
                (g, inv) => (self.gens.gen(g as usize).pow(if inv { -1 } else { 1 }), false),
            };
            acc = self.mul(&acc, &y, &phi);
        }
        acc
    }

    pub fn eval_form(&self, f: &NormalForm) -> ModelElem {
        let g = self.gens.eval(&f.w.as_g_word().expect("normal form over x0, x1"));
        (g, f.tail)
    }

    /// Tabulates `phi` on the enumerated `K_n` by breadth-first extension
    /// along generator edges, checking consistency on every edge.
    pub fn phi_table(&self, q: &QuotientGroup) -> (PhiTable, bool) {
        assert_eq!(q.level(), self.level());
        let n = q.order();
        let gens = q.generator_ordinals();
        let images = [
            self.phi[0].clone(),
            self.phi_inv[0].clone(),
            self.phi[1].clone(),
            self.phi_inv[1].clone(),
        ];
        let mut table: Vec<Option<u32>> = vec![None; n];
        table[0] = Some(0);
        let mut queue = std::collections::VecDeque::from([0u32]);
        let mut consistent = true;
        while let Some(x) = queue.pop_front() {
            let fx = q.elem(table[x as usize].unwrap());
            for (s, img) in gens.iter().zip(&images) {
                let y = q.mul(x, *s);
                let fy = fx.mul(img).unwrap();
                let Some(fy) = q.ordinal_of_elem(&fy) else {
                    consistent = false;
                    continue;
                };
                match table[y as usize] {
                    None => {
                        table[y as usize] = Some(fy);
                        queue.push_back(y);
                    }
                    Some(prev) => consistent &= prev == fy,
                }
            }
        }
        let table: Vec<u32> = table.into_iter().map(|t| t.unwrap_or(0)).collect();
        (
            PhiTable {
                group: q.clone(),
                table,
            },
            consistent,
        )
    }

    pub fn check(&self, q: &QuotientGroup) -> (ModelCheck, PhiTable) {
        let (table, phi_well_defined) = self.phi_table(q);
        let phi_fixes_s = table.apply(&self.s) == self.s;
        let s_inv = self.s.inv();
        let phi_squared_is_conjugation = (0..2).all(|g| {
            let x = self.gens.gen(g);
            table.apply(&table.apply(x)) == self.s.mul(x).unwrap().mul(&s_inv).unwrap()
        });
        let relators_hold = RelatorId::all().into_iter().all(|id| {
            let (g, t) = self.eval(&GammaWord::new(id.word()), &table);
            g.is_identity() && !t
        });
        (
            ModelCheck {
                level: self.level(),
                phi_well_defined,
                phi_fixes_s,
                phi_squared_is_conjugation,
                relators_hold,
            },
            table,
        )
    }
}

/// `phi` tabulated on ordinals of `K_n`.
#[derive(Clone, Debug)]
pub struct PhiTable {
    group: QuotientGroup,
    table: Vec<u32>,
}

impl PhiTable {
    pub fn apply(&self, h: &TruncElem) -> TruncElem {
        let n = self.group.ordinal_of_elem(h).expect("element of K_n");
        self.group.elem(self.table[n as usize])
    }
}

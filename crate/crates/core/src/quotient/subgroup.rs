//! Subgroups of `H/H_n` stored by a depth-layered basis.
//!
//! Every element of depth `d` has a leading diagonal in the 27-dimensional
//! diagonal space, and leading diagonals of depth-`d` elements add under
//! multiplication. A subgroup `U` is therefore described by, for each depth
//! `d`, elements of `U` whose leads form a basis of
//! `{lead(u) : u in U, depth(u) = d}`; `|U|` is two to the total basis size.
//! Membership is decided by sifting: cancel the lead with basis elements of
//! the same depth and continue with the (strictly deeper) remainder.
//!
//! A basis is closed once every square, every pairwise commutator and (for
//! normal closures) every commutator with a normalizing element sifts to the
//! identity.

use serde::Serialize;

use crate::gf2::{SBlock, Subspace27};
use crate::toeplitz::TruncElem;

#[derive(Clone, Debug)]
struct BasisElem {
    pivot: u32,
    elem: TruncElem,
    inv: TruncElem,
}

#[derive(Clone, Debug, Default)]
struct Layer {
    // sorted by descending pivot; the pivot is the highest bit of the lead,
    // and no other element of the layer has that bit set in its lead's
    // highest position
    basis: Vec<BasisElem>,
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    level: usize,
    layers: Vec<Layer>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupSummary {
    pub order_log2: usize,
    /// Basis size per depth.
    pub layer_dims: Vec<usize>,
}

impl Subgroup {
    pub fn trivial(level: usize) -> Subgroup {
        Subgroup {
            level,
            layers: vec![Layer::default(); level],
        }
    }

    /// `<gens>` inside `H/H_level`.
    pub fn generated(level: usize, gens: &[TruncElem]) -> Subgroup {
        let mut s = Subgroup::trivial(level);
        s.extend(gens, &[]);
        s
    }

    /// Normal closure of `gens` under conjugation by `normalizers` (which
    /// should generate the ambient group).
    pub fn normal_closure(level: usize, gens: &[TruncElem], normalizers: &[TruncElem]) -> Subgroup {
        let mut s = Subgroup::trivial(level);
        s.extend(gens, normalizers);
        s
    }

    /// Subgroup generated by `members`, which must already form a subgroup
    /// of order `size`; stops reading once that order is reached.
    pub fn from_members<I: IntoIterator<Item = TruncElem>>(
        level: usize,
        members: I,
        size: u128,
    ) -> Subgroup {
        let mut s = Subgroup::trivial(level);
        for m in members {
            if s.order() >= size {
                break;
            }
            s.extend(&[m], &[]);
        }
        s
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn order_log2(&self) -> usize {
        self.layers.iter().map(|l| l.basis.len()).sum()
    }

    /// Order as `u128`; subgroups above `2^127` are far beyond enumeration.
    pub fn order(&self) -> u128 {
        1u128 << self.order_log2()
    }

    pub fn is_trivial(&self) -> bool {
        self.order_log2() == 0
    }

    pub fn summary(&self) -> SubgroupSummary {
        SubgroupSummary {
            order_log2: self.order_log2(),
            layer_dims: self.layers.iter().map(|l| l.basis.len()).collect(),
        }
    }

    /// Smallest depth carrying a basis element (the level if trivial).
    pub fn min_depth(&self) -> usize {
        self.layers
            .iter()
            .position(|l| !l.basis.is_empty())
            .unwrap_or(self.level)
    }

    /// Span of the leads of the depth-`d` basis elements.
    pub fn lead_subspace(&self, d: usize) -> Subspace27 {
        let mut s = Subspace27::zero();
        for b in &self.layers[d].basis {
            s.insert(b.elem.diagonal(d + 1));
        }
        s
    }

    /// Basis elements, shallowest depth first.
    pub fn basis(&self) -> impl Iterator<Item = &TruncElem> {
        self.layers.iter().flat_map(|l| l.basis.iter().map(|b| &b.elem))
    }

    pub fn basis_vec(&self) -> Vec<TruncElem> {
        self.basis().cloned().collect()
    }

    /// Reduces `x` by the basis; `None` means `x` is in the subgroup.
    pub fn sift(&self, x: &TruncElem) -> Option<TruncElem> {
        debug_assert_eq!(x.level(), self.level);
        let mut x = x.clone();
        loop {
            let d = x.depth();
            if d == self.level {
                return None;
            }
            for b in &self.layers[d].basis {
                if (x.diagonal(d + 1).bits() >> b.pivot) & 1 == 1 {
                    x = x.mul(&b.inv).expect("same level");
                }
            }
            if x.depth() == d {
                return Some(x);
            }
        }
    }

    pub fn contains(&self, x: &TruncElem) -> bool {
        self.sift(x).is_none()
    }

    fn insert_residue(&mut self, r: TruncElem) {
        let d = r.depth();
        let lead: SBlock = r.diagonal(d + 1);
        let pivot = 31 - lead.bits().leading_zeros();
        let layer = &mut self.layers[d];
        let inv = r.inv();
        let pos = layer
            .basis
            .iter()
            .position(|b| b.pivot < pivot)
            .unwrap_or(layer.basis.len());
        layer.basis.insert(
            pos,
            BasisElem {
                pivot,
                elem: r,
                inv,
            },
        );
    }

    /// Adds `gens` and closes under squares, commutators and conjugation
    /// by `normalizers`.
    pub fn extend(&mut self, gens: &[TruncElem], normalizers: &[TruncElem]) {
        let mut queue: Vec<TruncElem> = gens.to_vec();
        while let Some(g) = queue.pop() {
            let Some(r) = self.sift(&g) else {
                continue;
            };
            queue.push(r.square());
            for b in self.basis() {
                queue.push(r.commutator(b).expect("same level"));
            }
            for n in normalizers {
                queue.push(r.commutator(n).expect("same level"));
            }
            self.insert_residue(r);
        }
    }

    /// The intersection with `H_depth`: elements whose first `depth`
    /// diagonals vanish.
    pub fn deeper_than(&self, depth: usize) -> Subgroup {
        let mut s = self.clone();
        for layer in s.layers.iter_mut().take(depth) {
            layer.basis.clear();
        }
        s
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.level == other.level && self.basis().all(|b| other.contains(b))
    }

    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.order_log2() == other.order_log2() && self.is_subgroup_of(other)
    }

    /// Whether conjugation by each of `elems` maps the subgroup into itself.
    pub fn is_normalized_by(&self, elems: &[TruncElem]) -> bool {
        self.basis().all(|b| {
            elems
                .iter()
                .all(|g| self.contains(&g.inv().mul(b).unwrap().mul(g).unwrap()))
        })
    }

    /// All elements, as products of basis powers (order `2^order_log2`).
    pub fn elements(&self) -> Vec<TruncElem> {
        let basis = self.basis_vec();
        let mut out = vec![TruncElem::identity(self.level)];
        for b in basis.iter().rev() {
            let more: Vec<TruncElem> = out.iter().map(|x| b.mul(x).unwrap()).collect();
            out.extend(more);
        }
        out
    }
}

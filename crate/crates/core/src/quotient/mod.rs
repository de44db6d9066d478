//! The finite quotients `K_i`, the image of `G = <x0, x1>` in `H/H_i`.
//!
//! `K_i` is enumerated by breadth-first closure of the identity under right
//! multiplication by `v0^{±1}, v1^{±1}`. Elements are then sorted
//! lexicographically by their diagonals (first diagonal most significant),
//! so ordinals are reproducible and the identity is ordinal 0. Elements whose
//! first `j` diagonals vanish form a contiguous block at the start.

mod cache;
mod subgroup;

pub use cache::{
    cache_header, decode_cache, encode_cache, read_cache, write_cache, CacheError, CacheHeader,
    CACHE_MAGIC,
};
pub use subgroup::{Subgroup, SubgroupSummary};

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::generators::GeneratorSet;
use crate::gf2::SBlock;
use crate::series::index_lower_bound;
use crate::toeplitz::{inv_into, mul_into, TruncElem};

pub const DEFAULT_LEVEL_CAP: usize = 8;
pub const FLAGGED_LEVEL_CAP: usize = 9;

// fixed-width hash key; wide enough for the flagged cap
const KEY_WIDTH: usize = FLAGGED_LEVEL_CAP;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("level {level} exceeds the enumeration cap {cap} (predicted order {predicted_order}); pass the level-9 flag to go higher")]
    CapExceeded {
        level: usize,
        cap: usize,
        predicted_order: u128,
    },
    #[error("level {level} would need more than {limit} elements (predicted order {predicted_order})")]
    ResourceLimit {
        level: usize,
        limit: usize,
        predicted_order: u128,
    },
    #[error("target level {j} is not below level {level}")]
    LevelNotBelow { j: usize, level: usize },
    #[error("truncation to level {j} is not a covering: fiber sizes {min}..{max}")]
    UnevenFibers { j: usize, min: usize, max: usize },
    #[error("truncated element is missing from the level-{j} quotient")]
    NotInTarget { j: usize },
    #[error("ordinal {0} out of range")]
    BadOrdinal(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub allow_level9: bool,
    /// Refuse enumerations whose predicted order exceeds this.
    pub max_elements: usize,
    pub parallel: bool,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            allow_level9: false,
            max_elements: 1 << 24,
            parallel: true,
        }
    }
}

impl EnumerationLimits {
    pub fn cap(&self) -> usize {
        if self.allow_level9 {
            FLAGGED_LEVEL_CAP
        } else {
            DEFAULT_LEVEL_CAP
        }
    }
}

/// An enumerated `K_i` with canonical ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientGroup {
    level: usize,
    order: usize,
    // element `n` occupies `flat[n * level .. (n + 1) * level]`
    flat: Vec<SBlock>,
    v0: u32,
    v1: u32,
    v0_inv: u32,
    v1_inv: u32,
}

fn key_of(x: &[SBlock]) -> [u32; KEY_WIDTH] {
    let mut k = [0u32; KEY_WIDTH];
    for (slot, d) in k.iter_mut().zip(x) {
        *slot = d.bits();
    }
    k
}

fn cmp_diagonals(a: &[SBlock], b: &[SBlock]) -> Ordering {
    a.iter().map(|d| d.bits()).cmp(b.iter().map(|d| d.bits()))
}

fn bfs(level: usize, gens: &[Vec<SBlock>; 4], parallel: bool) -> Vec<[u32; KEY_WIDTH]> {
    let identity = vec![SBlock::ZERO; level];
    let mut seen: HashSet<[u32; KEY_WIDTH]> = HashSet::new();
    seen.insert(key_of(&identity));
    let mut all = vec![key_of(&identity)];
    let mut frontier = vec![key_of(&identity)];
    let step = |k: &[u32; KEY_WIDTH]| -> [[u32; KEY_WIDTH]; 4] {
        let x: Vec<SBlock> = k[..level].iter().map(|&b| SBlock::from_bits(b)).collect();
        let mut out = [[0u32; KEY_WIDTH]; 4];
        let mut buf = vec![SBlock::ZERO; level];
        for (o, g) in out.iter_mut().zip(gens) {
            mul_into(&x, g, &mut buf);
            *o = key_of(&buf);
        }
        out
    };
    while !frontier.is_empty() {
        let candidates: Vec<[[u32; KEY_WIDTH]; 4]> = if parallel {
            frontier.par_iter().map(step).collect()
        } else {
            frontier.iter().map(step).collect()
        };
        let mut next = Vec::new();
        for k in candidates.iter().flatten() {
            if seen.insert(*k) {
                next.push(*k);
            }
        }
        all.extend_from_slice(&next);
        frontier = next;
    }
    all
}

impl QuotientGroup {
    /// Enumerates `K_level` under the default limits.
    pub fn enumerate(level: usize) -> Result<QuotientGroup, QuotientError> {
        Self::enumerate_with(level, &EnumerationLimits::default())
    }

    pub fn enumerate_with(
        level: usize,
        limits: &EnumerationLimits,
    ) -> Result<QuotientGroup, QuotientError> {
        let predicted_order = predicted_order(level);
        if level > limits.cap() {
            return Err(QuotientError::CapExceeded {
                level,
                cap: limits.cap(),
                predicted_order,
            });
        }
        if predicted_order > limits.max_elements as u128 {
            return Err(QuotientError::ResourceLimit {
                level,
                limit: limits.max_elements,
                predicted_order,
            });
        }
        let g = GeneratorSet::clipped(level);
        let gens = [
            g.x0.diagonals().to_vec(),
            g.x0.inv().diagonals().to_vec(),
            g.x1.diagonals().to_vec(),
            g.x1.inv().diagonals().to_vec(),
        ];
        let mut keys = bfs(level, &gens, limits.parallel);
        if limits.parallel {
            keys.par_sort_unstable();
        } else {
            keys.sort_unstable();
        }
        let flat: Vec<SBlock> = keys
            .iter()
            .flat_map(|k| k[..level].iter().map(|&b| SBlock::from_bits(b)))
            .collect();
        Ok(Self::from_sorted_flat(level, keys.len(), flat))
    }

    /// Builds a group from canonically sorted encodings (used by the cache).
    pub(crate) fn from_sorted_flat(level: usize, order: usize, flat: Vec<SBlock>) -> QuotientGroup {
        let mut q = QuotientGroup {
            level,
            order,
            flat,
            v0: 0,
            v1: 0,
            v0_inv: 0,
            v1_inv: 0,
        };
        let g = GeneratorSet::clipped(level);
        let find = |x: &TruncElem| q.ordinal_of(x.diagonals()).expect("generator image");
        let (a, b, c, d) = (find(&g.x0), find(&g.x1), find(&g.x0.inv()), find(&g.x1.inv()));
        q.v0 = a;
        q.v1 = b;
        q.v0_inv = c;
        q.v1_inv = d;
        q
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn order_log2(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn v0(&self) -> u32 {
        self.v0
    }

    pub fn v1(&self) -> u32 {
        self.v1
    }

    /// Ordinals of `v0, v0^{-1}, v1, v1^{-1}`, the Cayley graph's dart order.
    pub fn generator_ordinals(&self) -> [u32; 4] {
        [self.v0, self.v0_inv, self.v1, self.v1_inv]
    }

    /// Diagonals of element `n`.
    pub fn element(&self, n: u32) -> &[SBlock] {
        let l = self.level;
        let n = n as usize;
        &self.flat[n * l..(n + 1) * l]
    }

    pub fn elem(&self, n: u32) -> TruncElem {
        TruncElem::from_diagonals(self.element(n).to_vec())
    }

    pub fn elements(&self) -> impl Iterator<Item = &[SBlock]> + '_ {
        (0..self.order as u32).map(move |n| self.element(n))
    }

    /// Raw sorted encodings, `level` diagonals per element.
    pub fn flat(&self) -> &[SBlock] {
        &self.flat
    }

    pub fn ordinal_of(&self, x: &[SBlock]) -> Option<u32> {
        if x.len() != self.level {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.order);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match cmp_diagonals(self.element(mid as u32), x) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid as u32),
            }
        }
        None
    }

    pub fn ordinal_of_elem(&self, x: &TruncElem) -> Option<u32> {
        self.ordinal_of(x.diagonals())
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut buf = vec![SBlock::ZERO; self.level];
        mul_into(self.element(a), self.element(b), &mut buf);
        self.ordinal_of(&buf).expect("closed under multiplication")
    }

    pub fn inv(&self, a: u32) -> u32 {
        let mut buf = vec![SBlock::ZERO; self.level];
        inv_into(self.element(a), &mut buf);
        self.ordinal_of(&buf).expect("closed under inversion")
    }

    /// Image of every ordinal in `K_j`, as ordinals of `target`.
    pub fn truncation_hom(&self, target: &QuotientGroup) -> Result<Vec<u32>, QuotientError> {
        let j = target.level;
        if j > self.level {
            return Err(QuotientError::LevelNotBelow { j, level: self.level });
        }
        let map: Vec<Option<u32>> = (0..self.order as u32)
            .into_par_iter()
            .map(|n| target.ordinal_of(&self.element(n)[..j]))
            .collect();
        let map: Vec<u32> = map
            .into_iter()
            .collect::<Option<Vec<u32>>>()
            .ok_or(QuotientError::NotInTarget { j })?;
        let mut fibers = vec![0usize; target.order];
        for &m in &map {
            fibers[m as usize] += 1;
        }
        let (min, max) = (
            *fibers.iter().min().unwrap_or(&0),
            *fibers.iter().max().unwrap_or(&0),
        );
        if min != max || min * target.order != self.order {
            return Err(QuotientError::UnevenFibers { j, min, max });
        }
        Ok(map)
    }

    /// Ordinal range of the kernel of `K_level -> K_j`.
    pub fn kernel_range(&self, j: usize) -> Result<std::ops::Range<u32>, QuotientError> {
        if j > self.level {
            return Err(QuotientError::LevelNotBelow { j, level: self.level });
        }
        let end = self
            .elements()
            .position(|x| x[..j].iter().any(|d| !d.is_zero()))
            .unwrap_or(self.order);
        Ok(0..end as u32)
    }

    /// Kernel of `K_level -> K_j` as a subgroup.
    pub fn kernel(&self, j: usize) -> Result<Subgroup, QuotientError> {
        let range = self.kernel_range(j)?;
        let size = range.len() as u128;
        Ok(Subgroup::from_members(self.level, range.map(|n| self.elem(n)), size))
    }

    /// Ambient generators `v0, v1` as truncated elements.
    pub fn generators(&self) -> [TruncElem; 2] {
        [self.elem(self.v0), self.elem(self.v1)]
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::generated(self.level, &self.generators())
    }

    pub fn closure_of_elems(&self, gens: &[TruncElem], normal: bool) -> Subgroup {
        if normal {
            Subgroup::normal_closure(self.level, gens, &self.generators())
        } else {
            Subgroup::generated(self.level, gens)
        }
    }

    pub fn subgroup_closure(&self, gens: &[u32], normal: bool) -> Subgroup {
        let elems: Vec<TruncElem> = gens.iter().map(|&n| self.elem(n)).collect();
        self.closure_of_elems(&elems, normal)
    }

    /// Elements commuting with both generators.
    pub fn center(&self) -> Subgroup {
        let [g0, _, g1, _] = self.generator_ordinals();
        let central: Vec<u32> = (0..self.order as u32)
            .into_par_iter()
            .filter(|&z| self.mul(z, g0) == self.mul(g0, z) && self.mul(z, g1) == self.mul(g1, z))
            .collect();
        let size = central.len() as u128;
        Subgroup::from_members(self.level, central.into_iter().map(|n| self.elem(n)), size)
    }

    /// Sorted ordinals of the members of `s`.
    pub fn members(&self, s: &Subgroup) -> Vec<u32> {
        let mut out: Vec<u32> = s
            .elements()
            .iter()
            .map(|x| self.ordinal_of_elem(x).expect("subgroup of K"))
            .collect();
        out.sort_unstable();
        out
    }

    /// Order of element `n` (a power of two in a 2-group).
    pub fn element_order(&self, n: u32) -> u64 {
        let mut x = self.elem(n);
        let mut k = 1u64;
        while !x.is_identity() {
            x = x.mul(&self.elem(n)).expect("same level");
            k += 1;
        }
        k
    }
}

/// Predicted order of `K_level` from the lower bound (equality observed up
/// to the enumeration cap).
pub fn predicted_order(level: usize) -> u128 {
    if level == 0 {
        1
    } else {
        index_lower_bound(level).expect("level >= 1")
    }
}

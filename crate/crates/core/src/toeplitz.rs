//! The group `H` of upper unitriangular block-Toeplitz matrices over GF(2),
//! held exactly modulo `H_n`.
//!
//! An element of `H/H_n` is its first `n` block diagonals `(a_1, ..., a_n)`;
//! the `j`-th diagonal carries the 3-periodic entries `a_j(1), a_j(2), a_j(3)`.
//! Products follow
//!
//! ```text
//! c_j(k) = a_j(k) + b_j(k) + sum_{s=1}^{j-1} a_s(k) b_{j-s}(k+s)
//! ```
//!
//! with component indices taken mod 3. [`DenseBanded`] multiplies the same
//! elements as explicit finite block matrices and serves as the oracle for
//! the recursive formulas.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf2::{wrap3, Mat3, SBlock};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToeplitzError {
    #[error("truncation levels differ: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },
    #[error("depth {k} is not below truncation level {level}")]
    DepthOutOfRange { k: usize, level: usize },
    #[error("cannot truncate level {level} element to level {j}")]
    TruncationTooDeep { j: usize, level: usize },
    #[error("malformed element encoding: {0}")]
    Encoding(String),
}

/// `c = a * b` on raw diagonal slices of equal length.
#[inline]
pub fn mul_into(a: &[SBlock], b: &[SBlock], out: &mut [SBlock]) {
    let n = a.len();
    debug_assert_eq!(b.len(), n);
    debug_assert_eq!(out.len(), n);
    for j in 1..=n {
        let mut parts = [Mat3::ZERO; 3];
        for (ki, part) in parts.iter_mut().enumerate() {
            let k = ki + 1;
            let mut acc = a[j - 1].part(k) + b[j - 1].part(k);
            for s in 1..j {
                let lhs = a[s - 1].part(k);
                if lhs.is_zero() {
                    continue;
                }
                let rhs = b[j - s - 1].part(k + s);
                if !rhs.is_zero() {
                    acc += lhs * rhs;
                }
            }
            *part = acc;
        }
        out[j - 1] = SBlock::from_parts(parts);
    }
}

/// `d = a^{-1}` on raw diagonal slices.
#[inline]
pub fn inv_into(a: &[SBlock], out: &mut [SBlock]) {
    let n = a.len();
    debug_assert_eq!(out.len(), n);
    for j in 1..=n {
        let mut parts = [Mat3::ZERO; 3];
        for (ki, part) in parts.iter_mut().enumerate() {
            let k = ki + 1;
            let mut acc = a[j - 1].part(k);
            for s in 1..j {
                let lhs = a[s - 1].part(k);
                if !lhs.is_zero() {
                    acc += lhs * out[j - s - 1].part(k + s);
                }
            }
            *part = acc;
        }
        out[j - 1] = SBlock::from_parts(parts);
    }
}

/// An element of `H/H_n`: the first `n` diagonals of an infinite matrix.
///
/// Level 0 (no diagonals) is the trivial group and is allowed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncElem {
    diagonals: Vec<SBlock>,
}

impl TruncElem {
    pub fn identity(level: usize) -> TruncElem {
        TruncElem {
            diagonals: vec![SBlock::ZERO; level],
        }
    }

    pub fn from_diagonals(diagonals: Vec<SBlock>) -> TruncElem {
        TruncElem { diagonals }
    }

    /// Takes the first `level` entries of `diagonals`, padding with zeros.
    pub fn from_prefix(diagonals: &[SBlock], level: usize) -> TruncElem {
        let mut d = vec![SBlock::ZERO; level];
        let n = level.min(diagonals.len());
        d[..n].copy_from_slice(&diagonals[..n]);
        TruncElem { diagonals: d }
    }

    pub fn level(&self) -> usize {
        self.diagonals.len()
    }

    pub fn diagonals(&self) -> &[SBlock] {
        &self.diagonals
    }

    /// Diagonal `j`, 1-based.
    pub fn diagonal(&self, j: usize) -> SBlock {
        self.diagonals[j - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.diagonals.iter().all(|d| d.is_zero())
    }

    /// Number of leading zero diagonals (the level itself for the identity).
    pub fn depth(&self) -> usize {
        self.diagonals
            .iter()
            .position(|d| !d.is_zero())
            .unwrap_or(self.diagonals.len())
    }

    /// `(depth, first nonzero diagonal)`, or `None` for the identity.
    pub fn lead(&self) -> Option<(usize, SBlock)> {
        let d = self.depth();
        self.diagonals.get(d).map(|&a| (d, a))
    }

    fn check_level(&self, other: &TruncElem) -> Result<(), ToeplitzError> {
        if self.level() != other.level() {
            return Err(ToeplitzError::LevelMismatch {
                left: self.level(),
                right: other.level(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &TruncElem) -> Result<TruncElem, ToeplitzError> {
        self.check_level(other)?;
        let mut out = vec![SBlock::ZERO; self.level()];
        mul_into(&self.diagonals, &other.diagonals, &mut out);
        Ok(TruncElem { diagonals: out })
    }

    pub fn inv(&self) -> TruncElem {
        let mut out = vec![SBlock::ZERO; self.level()];
        inv_into(&self.diagonals, &mut out);
        TruncElem { diagonals: out }
    }

    /// `[x, y] = x^{-1} y^{-1} x y`.
    pub fn commutator(&self, other: &TruncElem) -> Result<TruncElem, ToeplitzError> {
        self.check_level(other)?;
        let xi = self.inv();
        let yi = other.inv();
        xi.mul(&yi)?.mul(self)?.mul(other)
    }

    pub fn square(&self) -> TruncElem {
        self.mul(self).expect("same level")
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, e: i64) -> TruncElem {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = TruncElem::identity(self.level());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base).expect("same level");
        }
        acc
    }

    pub fn truncate(&self, j: usize) -> Result<TruncElem, ToeplitzError> {
        if j > self.level() {
            return Err(ToeplitzError::TruncationTooDeep {
                j,
                level: self.level(),
            });
        }
        Ok(TruncElem {
            diagonals: self.diagonals[..j].to_vec(),
        })
    }

    /// Number of hex digits used by [`TruncElem::to_hex`] at `level`.
    pub fn hex_len(level: usize) -> usize {
        (27 * level).div_ceil(4)
    }

    /// Hex string of the `27 * level` bits: diagonal-major, then components
    /// `a(1), a(2), a(3)`, each row-major, most significant bit first and
    /// zero-padded to a whole hex digit.
    pub fn to_hex(&self) -> String {
        let mut bits = Vec::with_capacity(27 * self.level() + 3);
        for d in &self.diagonals {
            for p in d.parts() {
                for r in 0..3 {
                    for c in 0..3 {
                        bits.push(u8::from(p.entry(r, c)));
                    }
                }
            }
        }
        while bits.len() % 4 != 0 {
            bits.push(0);
        }
        bits.chunks(4)
            .map(|nib| {
                let v = nib.iter().fold(0u8, |acc, &b| (acc << 1) | b);
                char::from_digit(u32::from(v), 16).expect("nibble")
            })
            .collect()
    }

    /// Inverse of [`TruncElem::to_hex`]; the level is recovered from the length.
    pub fn from_hex(s: &str) -> Result<TruncElem, ToeplitzError> {
        let level = (0..=s.len())
            .find(|&l| Self::hex_len(l) == s.len())
            .ok_or_else(|| ToeplitzError::Encoding(format!("bad length {}", s.len())))?;
        let mut bits = Vec::with_capacity(4 * s.len());
        for ch in s.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| ToeplitzError::Encoding(format!("bad digit {ch:?}")))?;
            for i in (0..4).rev() {
                bits.push(((v >> i) & 1) as u8);
            }
        }
        if bits[27 * level..].iter().any(|&b| b != 0) {
            return Err(ToeplitzError::Encoding("nonzero padding".into()));
        }
        let mut diagonals = Vec::with_capacity(level);
        for j in 0..level {
            let mut parts = [Mat3::ZERO; 3];
            for (p, part) in parts.iter_mut().enumerate() {
                let mut rows = [[0u8; 3]; 3];
                for (r, row) in rows.iter_mut().enumerate() {
                    for (c, e) in row.iter_mut().enumerate() {
                        *e = bits[27 * j + 9 * p + 3 * r + c];
                    }
                }
                *part = Mat3::from_rows(rows);
            }
            diagonals.push(SBlock::from_parts(parts));
        }
        Ok(TruncElem { diagonals })
    }
}

impl fmt::Debug for TruncElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.diagonals.iter()).finish()
    }
}

impl fmt::Display for TruncElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for TruncElem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for TruncElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<TruncElem, D::Error> {
        let s = String::deserialize(d)?;
        TruncElem::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

pub fn mul(x: &TruncElem, y: &TruncElem) -> Result<TruncElem, ToeplitzError> {
    x.mul(y)
}

pub fn inv(x: &TruncElem) -> TruncElem {
    x.inv()
}

pub fn commutator(x: &TruncElem, y: &TruncElem) -> Result<TruncElem, ToeplitzError> {
    x.commutator(y)
}

pub fn truncate(x: &TruncElem, j: usize) -> Result<TruncElem, ToeplitzError> {
    x.truncate(j)
}

/// `M_k(a)` at truncation `level`: diagonals `1..=k` zero, diagonal `k+1`
/// equal to `a`, everything above zero.
pub fn make_mk(k: usize, a: SBlock, level: usize) -> Result<TruncElem, ToeplitzError> {
    if k >= level {
        return Err(ToeplitzError::DepthOutOfRange { k, level });
    }
    let mut d = vec![SBlock::ZERO; level];
    d[k] = a;
    Ok(TruncElem { diagonals: d })
}

/// `M_k(a, tail...)`: like [`make_mk`] but with the given higher diagonals.
pub fn make_mk_with_tail(
    k: usize,
    a: SBlock,
    tail: &[SBlock],
    level: usize,
) -> Result<TruncElem, ToeplitzError> {
    let mut x = make_mk(k, a, level)?;
    for (i, &t) in tail.iter().enumerate() {
        if let Some(slot) = x.diagonals.get_mut(k + 1 + i) {
            *slot = t;
        }
    }
    Ok(x)
}

/// Closed form for squares: `M_k(a, ...)^2 = M_{2k+1}(c, ...)` with
/// `c(i) = a(i) a(i+k+1)`. Returns `(2k+1, c)`.
pub fn closed_square_lead(k: usize, a: SBlock) -> (usize, SBlock) {
    let parts = [1, 2, 3].map(|i| a.part(i) * a.part(i + k + 1));
    (2 * k + 1, SBlock::from_parts(parts))
}

/// Closed form for commutators with a depth-0 element:
/// `[M_k(a, ...), M(b, ...)] = M_{k+1}(c, ...)` with
/// `c(i) = a(i) b(i+k+1) + b(i) a(i+1)`. Returns `(k+1, c)`.
pub fn closed_comm_lead(k: usize, a: SBlock, b: SBlock) -> (usize, SBlock) {
    let parts = [1, 2, 3].map(|i| a.part(i) * b.part(i + k + 1) + b.part(i) * a.part(i + 1));
    (k + 1, SBlock::from_parts(parts))
}

/// A finite upper-left corner of the infinite block matrix, stored as a
/// square array of 3x3 blocks (1-based block coordinates in the accessors).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DenseBanded {
    size: usize,
    blocks: Vec<Mat3>,
}

impl DenseBanded {
    /// Block dimension used to mirror an element of the given level.
    pub fn size_for_level(level: usize) -> usize {
        3 * (level + 2)
    }

    pub fn from_elem(x: &TruncElem) -> DenseBanded {
        let size = Self::size_for_level(x.level());
        let mut blocks = vec![Mat3::ZERO; size * size];
        for m in 1..=size {
            blocks[(m - 1) * size + (m - 1)] = Mat3::IDENTITY;
            for j in 1..=x.level() {
                let col = m + j;
                if col > size {
                    break;
                }
                blocks[(m - 1) * size + (col - 1)] = x.diagonal(j).part(wrap3(m));
            }
        }
        DenseBanded { size, blocks }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Block `(m, n)`, 1-based.
    pub fn block(&self, m: usize, n: usize) -> Mat3 {
        self.blocks[(m - 1) * self.size + (n - 1)]
    }

    pub fn mul(&self, other: &DenseBanded) -> DenseBanded {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut blocks = vec![Mat3::ZERO; n * n];
        for m in 0..n {
            for t in 0..n {
                let lhs = self.blocks[m * n + t];
                if lhs.is_zero() {
                    continue;
                }
                for c in 0..n {
                    blocks[m * n + c] += lhs * other.blocks[t * n + c];
                }
            }
        }
        DenseBanded { size: n, blocks }
    }

    /// Reads diagonals `1..=level` from block rows 1..3.
    pub fn to_elem(&self, level: usize) -> TruncElem {
        let diagonals = (1..=level)
            .map(|j| SBlock::from_parts([1, 2, 3].map(|m| self.block(m, m + j))))
            .collect();
        TruncElem { diagonals }
    }

    /// Whether the matrix is unitriangular and block `(m, m+j)` depends only
    /// on `j` and `m mod 3` wherever both are in range.
    pub fn is_periodic_toeplitz(&self, level: usize) -> bool {
        let n = self.size;
        for m in 1..=n {
            for c in 1..=n {
                let b = self.block(m, c);
                if c < m && !b.is_zero() {
                    return false;
                }
                if c == m && b != Mat3::IDENTITY {
                    return false;
                }
            }
            for j in 1..=level {
                if m + 3 + j <= n && self.block(m, m + j) != self.block(m + 3, m + 3 + j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Product computed literally on dense block matrices.
pub fn dense_mul(x: &TruncElem, y: &TruncElem) -> Result<TruncElem, ToeplitzError> {
    x.check_level(y)?;
    let p = DenseBanded::from_elem(x).mul(&DenseBanded::from_elem(y));
    Ok(p.to_elem(x.level()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedFormReport {
    pub samples: usize,
    pub square_mismatches: usize,
    pub comm_mismatches: usize,
    /// Recursive and dense products disagreed.
    pub oracle_mismatches: usize,
}

impl ClosedFormReport {
    pub fn ok(&self) -> bool {
        self.square_mismatches == 0 && self.comm_mismatches == 0 && self.oracle_mismatches == 0
    }
}

/// Checks [`closed_square_lead`] and [`closed_comm_lead`] against products
/// computed both recursively and on dense block matrices, for random
/// `k <= 5`, leads and tails.
pub fn verify_closed_forms(samples: usize, seed: u64) -> ClosedFormReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = ClosedFormReport {
        samples,
        square_mismatches: 0,
        comm_mismatches: 0,
        oracle_mismatches: 0,
    };
    for _ in 0..samples {
        let k = rng.gen_range(0..=5);
        let level = 2 * k + 3;
        let (a, b) = (SBlock::random(&mut rng), SBlock::random(&mut rng));
        let mut tail = || (0..level).map(|_| SBlock::random(&mut rng)).collect::<Vec<_>>();
        let (ta, tb) = (tail(), tail());
        let x = make_mk_with_tail(k, a, &ta, level).expect("k < level");
        let y = make_mk_with_tail(0, b, &tb, level).expect("0 < level");

        let sq = x.square();
        let sq_dense = dense_mul(&x, &x).expect("same level");
        let (xi, yi) = (x.inv(), y.inv());
        let comm = x.commutator(&y).expect("same level");
        let comm_dense = [&yi, &x, &y]
            .iter()
            .try_fold(xi.clone(), |acc, z| dense_mul(&acc, z))
            .expect("same level");
        if sq != sq_dense || comm != comm_dense {
            report.oracle_mismatches += 1;
        }
        let (d, c) = closed_square_lead(k, a);
        if sq.depth() < d || sq.diagonal(d + 1) != c {
            report.square_mismatches += 1;
        }
        let (d, c) = closed_comm_lead(k, a, b);
        if comm.depth() < d || comm.diagonal(d + 1) != c {
            report.comm_mismatches += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_elem(rng: &mut ChaCha8Rng, level: usize) -> TruncElem {
        TruncElem::from_diagonals((0..level).map(|_| SBlock::random(rng)).collect())
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_elem(&mut rng, 7);
        let e = TruncElem::identity(7);
        assert_eq!(e.mul(&x).unwrap(), x);
        assert_eq!(x.mul(&e).unwrap(), x);
        assert_eq!(e.inv(), e);
        assert_eq!(x.commutator(&e).unwrap(), e);
    }

    #[test]
    fn level_mismatch_is_an_error() {
        let a = TruncElem::identity(3);
        let b = TruncElem::identity(4);
        assert_eq!(
            a.mul(&b),
            Err(ToeplitzError::LevelMismatch { left: 3, right: 4 })
        );
        assert!(a.commutator(&b).is_err());
        assert!(dense_mul(&a, &b).is_err());
    }

    #[test]
    fn inverse_is_two_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for level in 1..=10 {
            let x = random_elem(&mut rng, level);
            let xi = x.inv();
            assert!(x.mul(&xi).unwrap().is_identity());
            assert!(xi.mul(&x).unwrap().is_identity());
        }
    }

    #[test]
    fn mul_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..300 {
            let level = rng.gen_range(1..=8);
            let x = random_elem(&mut rng, level);
            let y = random_elem(&mut rng, level);
            assert_eq!(x.mul(&y).unwrap(), dense_mul(&x, &y).unwrap());
        }
        let e = TruncElem::identity(5);
        assert_eq!(dense_mul(&e, &e).unwrap(), e);
    }

    #[test]
    fn dense_product_stays_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_elem(&mut rng, 4);
        let y = random_elem(&mut rng, 4);
        let p = DenseBanded::from_elem(&x).mul(&DenseBanded::from_elem(&y));
        assert!(p.is_periodic_toeplitz(4));
        for m in 1..=3 {
            for j in 1..=4 {
                assert_eq!(p.block(m, m + j), p.block(m + 3, m + 3 + j));
            }
        }
    }

    #[test]
    fn make_mk_shape() {
        assert!(make_mk(0, SBlock::ZERO, 3).unwrap().is_identity());
        assert_eq!(
            make_mk(3, SBlock::ZERO, 3),
            Err(ToeplitzError::DepthOutOfRange { k: 3, level: 3 })
        );
        let a = SBlock::from_bits(0x1234);
        for k in 0..6 {
            let x = make_mk(k, a, 6).unwrap();
            assert_eq!(x.depth(), k);
            assert_eq!(x.lead(), Some((k, a)));
        }
    }

    #[test]
    fn truncate_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let x = random_elem(&mut rng, 5);
        assert_eq!(x.truncate(5).unwrap(), x);
        assert_eq!(x.truncate(2).unwrap().diagonals(), &x.diagonals()[..2]);
        assert_eq!(
            x.truncate(6),
            Err(ToeplitzError::TruncationTooDeep { j: 6, level: 5 })
        );
    }

    #[test]
    fn zero_inputs_to_closed_forms() {
        let b = SBlock::from_bits(0x7654321);
        for k in 0..6 {
            assert_eq!(closed_square_lead(k, SBlock::ZERO), (2 * k + 1, SBlock::ZERO));
            assert_eq!(closed_comm_lead(k, SBlock::ZERO, b), (k + 1, SBlock::ZERO));
            assert_eq!(closed_comm_lead(k, b, SBlock::ZERO), (k + 1, SBlock::ZERO));
        }
    }

    #[test]
    fn hex_encoding() {
        assert_eq!(TruncElem::identity(1).to_hex(), "0000000");
        assert_eq!(TruncElem::hex_len(2), 14);
        let x = make_mk(0, SBlock::from_parts([Mat3::from_bits(1), Mat3::ZERO, Mat3::ZERO]), 1)
            .unwrap();
        // entry (0,0) of a(1) is the very first bit
        assert_eq!(x.to_hex(), "8000000");
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for level in 0..12 {
            let y = random_elem(&mut rng, level);
            assert_eq!(TruncElem::from_hex(&y.to_hex()).unwrap(), y);
        }
        assert!(TruncElem::from_hex("zz").is_err());
        assert!(TruncElem::from_hex("0000001").is_err());
    }
}

//! GF(2) kernels: 3x3 matrices, 27-bit diagonal blocks and their spans.
//!
//! A [`Mat3`] is a 9-bit mask with entry `(r, c)` at bit `3r + c`. An
//! [`SBlock`] packs three of them (`a(1)`, `a(2)`, `a(3)`) into the low 27 bits
//! of a `u32`, component `i` occupying bits `9(i-1)..9i`.

// Addition in characteristic 2 is XOR.
#![allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A 3x3 matrix over GF(2).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Mat3(u16);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3(0);
    pub const IDENTITY: Mat3 = Mat3(0b100_010_001);
    const MASK: u16 = 0x1ff;

    pub const fn from_bits(bits: u16) -> Mat3 {
        Mat3(bits & Self::MASK)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    /// Builds a matrix from rows of 0/1 entries.
    pub fn from_rows(rows: [[u8; 3]; 3]) -> Mat3 {
        let mut bits = 0u16;
        for (r, row) in rows.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                debug_assert!(e <= 1);
                bits |= u16::from(e & 1) << (3 * r + c);
            }
        }
        Mat3(bits)
    }

    pub fn entry(self, r: usize, c: usize) -> bool {
        (self.0 >> (3 * r + c)) & 1 == 1
    }

    #[inline]
    fn row(self, r: usize) -> u16 {
        (self.0 >> (3 * r)) & 0b111
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
        Mat3(rng.gen_range(0..512))
    }

    /// Row-by-row product: row `r` of `AB` is the XOR of the rows of `B`
    /// selected by row `r` of `A`.
    #[inline]
    pub fn mul_rows(self, rhs: Mat3) -> Mat3 {
        let mut out = 0u16;
        for r in 0..3 {
            let sel = self.row(r);
            let mut row = 0u16;
            for k in 0..3 {
                if (sel >> k) & 1 == 1 {
                    row ^= rhs.row(k);
                }
            }
            out |= row << (3 * r);
        }
        Mat3(out)
    }

    #[cfg(feature = "mul-table")]
    #[inline]
    fn mul_impl(self, rhs: Mat3) -> Mat3 {
        Mat3(table::get()[(usize::from(self.0) << 9) | usize::from(rhs.0)])
    }

    #[cfg(not(feature = "mul-table"))]
    #[inline]
    fn mul_impl(self, rhs: Mat3) -> Mat3 {
        self.mul_rows(rhs)
    }
}

#[cfg(feature = "mul-table")]
mod table {
    use super::Mat3;
    use std::sync::OnceLock;

    static TABLE: OnceLock<Vec<u16>> = OnceLock::new();

    pub(super) fn get() -> &'static [u16] {
        TABLE.get_or_init(|| {
            let mut t = vec![0u16; 512 * 512];
            for a in 0..512u16 {
                for b in 0..512u16 {
                    t[(usize::from(a) << 9) | usize::from(b)] =
                        Mat3::from_bits(a).mul_rows(Mat3::from_bits(b)).bits();
                }
            }
            t
        })
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    #[inline]
    fn add(self, rhs: Mat3) -> Mat3 {
        Mat3(self.0 ^ rhs.0)
    }
}

impl AddAssign for Mat3 {
    #[inline]
    fn add_assign(&mut self, rhs: Mat3) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    #[inline]
    fn mul(self, rhs: Mat3) -> Mat3 {
        self.mul_impl(rhs)
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat3[")?;
        for r in 0..3 {
            if r > 0 {
                write!(f, "/")?;
            }
            for c in 0..3 {
                write!(f, "{}", u8::from(self.entry(r, c)))?;
            }
        }
        write!(f, "]")
    }
}

/// Maps any 1-based component index onto `{1, 2, 3}`.
#[inline]
pub const fn wrap3(i: usize) -> usize {
    (i + 2) % 3 + 1
}

/// One 3-periodic block diagonal `(a(1), a(2), a(3))`, i.e. a 3x9 matrix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct SBlock(u32);

impl SBlock {
    pub const ZERO: SBlock = SBlock(0);
    pub const BITS: u32 = 27;
    const MASK: u32 = (1 << 27) - 1;

    pub const fn from_bits(bits: u32) -> SBlock {
        SBlock(bits & Self::MASK)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn from_parts(parts: [Mat3; 3]) -> SBlock {
        SBlock(
            u32::from(parts[0].bits())
                | (u32::from(parts[1].bits()) << 9)
                | (u32::from(parts[2].bits()) << 18),
        )
    }

    /// Parses the 3x9 display `(a(1) a(2) a(3))`.
    pub fn from_display(rows: [[u8; 9]; 3]) -> SBlock {
        let mut parts = [Mat3::ZERO; 3];
        for (p, part) in parts.iter_mut().enumerate() {
            let mut m = [[0u8; 3]; 3];
            for (r, row) in m.iter_mut().enumerate() {
                row.copy_from_slice(&rows[r][3 * p..3 * p + 3]);
            }
            *part = Mat3::from_rows(m);
        }
        SBlock::from_parts(parts)
    }

    /// Renders back to the 3x9 display.
    pub fn to_display(self) -> [[u8; 9]; 3] {
        let mut rows = [[0u8; 9]; 3];
        for p in 0..3 {
            let m = self.part(p + 1);
            for (r, row) in rows.iter_mut().enumerate() {
                for c in 0..3 {
                    row[3 * p + c] = u8::from(m.entry(r, c));
                }
            }
        }
        rows
    }

    /// Component `a(i)`; `i` is 1-based and taken mod 3.
    #[inline]
    pub fn part(self, i: usize) -> Mat3 {
        let idx = wrap3(i) - 1;
        Mat3::from_bits(((self.0 >> (9 * idx)) & 0x1ff) as u16)
    }

    pub fn parts(self) -> [Mat3; 3] {
        [self.part(1), self.part(2), self.part(3)]
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> SBlock {
        SBlock(rng.gen_range(0..=Self::MASK))
    }
}

impl Add for SBlock {
    type Output = SBlock;
    #[inline]
    fn add(self, rhs: SBlock) -> SBlock {
        SBlock(self.0 ^ rhs.0)
    }
}

impl AddAssign for SBlock {
    #[inline]
    fn add_assign(&mut self, rhs: SBlock) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for SBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.to_display();
        write!(f, "SBlock[")?;
        for (r, row) in rows.iter().enumerate() {
            if r > 0 {
                write!(f, "/")?;
            }
            for (c, e) in row.iter().enumerate() {
                if c > 0 && c % 3 == 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
        }
        write!(f, "]")
    }
}

/// Componentwise XOR of two diagonals.
pub fn sblock_add(a: SBlock, b: SBlock) -> SBlock {
    a + b
}

/// A subspace of the 27-dimensional space of diagonals, kept as a reduced
/// row-echelon basis (pivot = highest set bit, sorted by descending pivot).
#[derive(Clone, PartialEq, Eq, Default, Debug, Serialize, Deserialize)]
pub struct Subspace27 {
    basis: Vec<SBlock>,
}

impl Subspace27 {
    pub fn zero() -> Subspace27 {
        Subspace27 { basis: Vec::new() }
    }

    pub fn basis(&self) -> &[SBlock] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Reduces `v` against the basis; zero iff `v` lies in the subspace.
    pub fn reduce(&self, v: SBlock) -> SBlock {
        let mut x = v.bits();
        for b in &self.basis {
            let pivot = 31 - b.bits().leading_zeros();
            if (x >> pivot) & 1 == 1 {
                x ^= b.bits();
            }
        }
        SBlock::from_bits(x)
    }

    pub fn contains(&self, v: SBlock) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: SBlock) -> bool {
        let r = self.reduce(v);
        if r.is_zero() {
            return false;
        }
        let pivot = 31 - r.bits().leading_zeros();
        for b in &mut self.basis {
            if (b.bits() >> pivot) & 1 == 1 {
                *b += r;
            }
        }
        self.basis.push(r);
        self.basis.sort_by(|a, b| b.cmp(a));
        true
    }

    pub fn is_subspace_of(&self, other: &Subspace27) -> bool {
        self.basis.iter().all(|&b| other.contains(b))
    }
}

/// GF(2) span of `vectors`.
pub fn span<I: IntoIterator<Item = SBlock>>(vectors: I) -> Subspace27 {
    let mut s = Subspace27::zero();
    for v in vectors {
        s.insert(v);
    }
    s
}

//! Arithmetic in binary extension fields GF(2^w), 1 <= w <= 16.
//!
//! Each width has exactly one reduction polynomial (a primitive polynomial of
//! degree `w`), so codewords are reproducible bit for bit. Multiplication and
//! inversion go through log/antilog tables generated from that polynomial.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field width.
pub const MAX_WIDTH: u32 = 16;

/// Default width used when an instance does not ask for one.
pub const DEFAULT_WIDTH: u32 = 8;

/// Primitive polynomials indexed by width, including the leading `x^w` term.
const PRIMITIVE_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Width and reduction polynomial of a binary extension field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    width: u32,
    reduction_poly: u32,
}

impl FieldSpec {
    pub fn new(width: u32) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::FieldWidth(width));
        }
        Ok(FieldSpec {
            width,
            reduction_poly: PRIMITIVE_POLYS[width as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn reduction_poly(&self) -> u32 {
        self.reduction_poly
    }

    /// Number of field elements, `2^w`.
    pub fn order(&self) -> usize {
        1usize << self.width
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::new(DEFAULT_WIDTH).expect("default width is valid")
    }
}

/// An element of some GF(2^w), stored as its polynomial coefficient bits.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Table-driven GF(2^w) arithmetic.
#[derive(Debug)]
pub struct GaloisField {
    spec: FieldSpec,
    /// `exp[i] = x^i`, doubled in length so `exp[log a + log b]` needs no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

static FIELDS: [OnceLock<GaloisField>; 17] = [const { OnceLock::new() }; 17];

impl GaloisField {
    /// Shared instance for a field spec; tables are built once per width.
    pub fn get(spec: FieldSpec) -> &'static GaloisField {
        FIELDS[spec.width as usize].get_or_init(|| GaloisField::build(spec))
    }

    /// Shared instance for a width.
    pub fn with_width(width: u32) -> Result<&'static GaloisField> {
        Ok(Self::get(FieldSpec::new(width)?))
    }

    fn build(spec: FieldSpec) -> GaloisField {
        let order = spec.order();
        let group = order - 1;
        let mut exp = vec![0u16; 2 * group.max(1)];
        let mut log = vec![0u16; order];
        let mut val: u32 = 1;
        for i in 0..group {
            exp[i] = val as u16;
            exp[i + group] = val as u16;
            log[val as usize] = i as u16;
            val <<= 1;
            if val & (1 << spec.width) != 0 {
                val ^= spec.reduction_poly;
            }
        }
        GaloisField { spec, exp, log }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }

    /// Element from an integer, rejecting values outside `[0, 2^w)`.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if (value as usize) < self.order() {
            Ok(FieldElement(value as u16))
        } else {
            Err(Error::NotInField {
                value,
                width: self.spec.width,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    /// Same as `add`; every element is its own negative.
    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, b)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let idx = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElement(self.exp[idx])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let group = self.order() - 1;
        let l = self.log[a.0 as usize] as usize;
        Ok(FieldElement(self.exp[(group - l) % group]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, e: u32) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        let group = (self.order() - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        FieldElement(self.exp[((l * e as u64) % group) as usize])
    }
}

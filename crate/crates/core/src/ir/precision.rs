use std::fmt;

use serde::{Deserialize, Serialize};

/// How the bits of a value are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueKind {
    UnsignedInt,
    SignedInt,
    /// Bipolar `{-1, +1}`, stored in one bit.
    Binary,
    /// `{-1, 0, +1}`, stored in two bits.
    Ternary,
    FixedPoint { int_bits: u32, frac_bits: u32 },
    Float,
}

/// Bit width plus value kind of a weight or activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision {
    pub bits: u32,
    pub kind: ValueKind,
}

/// Why a [`Precision`] is malformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionIssue {
    /// Kind and bit count disagree (binary with 2 bits, fixed-point split not summing up).
    KindMismatch,
    /// Bit count outside `1..=64`.
    OutOfRange,
}

impl Precision {
    pub const fn binary() -> Self {
        Self { bits: 1, kind: ValueKind::Binary }
    }

    pub const fn ternary() -> Self {
        Self { bits: 2, kind: ValueKind::Ternary }
    }

    pub const fn unsigned(bits: u32) -> Self {
        Self { bits, kind: ValueKind::UnsignedInt }
    }

    pub const fn signed(bits: u32) -> Self {
        Self { bits, kind: ValueKind::SignedInt }
    }

    pub const fn fixed(int_bits: u32, frac_bits: u32) -> Self {
        Self { bits: int_bits + frac_bits, kind: ValueKind::FixedPoint { int_bits, frac_bits } }
    }

    pub const fn float(bits: u32) -> Self {
        Self { bits, kind: ValueKind::Float }
    }

    /// Default precision of convolution / fully-connected accumulators.
    pub const fn accumulator() -> Self {
        Self::signed(32)
    }

    pub fn check(&self) -> Result<(), PrecisionIssue> {
        if self.bits == 0 || self.bits > 64 {
            return Err(PrecisionIssue::OutOfRange);
        }
        let consistent = match self.kind {
            ValueKind::Binary => self.bits == 1,
            ValueKind::Ternary => self.bits == 2,
            ValueKind::FixedPoint { int_bits, frac_bits } => int_bits + frac_bits == self.bits,
            _ => true,
        };
        if consistent {
            Ok(())
        } else {
            Err(PrecisionIssue::KindMismatch)
        }
    }

    pub fn is_float(&self) -> bool {
        self.kind == ValueKind::Float
    }

    /// Fraction bits of the fixed-point encoding; zero for integer kinds.
    pub fn frac_bits(&self) -> u32 {
        match self.kind {
            ValueKind::FixedPoint { frac_bits, .. } => frac_bits,
            _ => 0,
        }
    }

    /// Range of the underlying integer code, `None` for floats.
    pub fn code_range(&self) -> Option<(i64, i64)> {
        let bits = self.bits.min(63);
        match self.kind {
            ValueKind::UnsignedInt => Some((0, (1i64 << bits) - 1)),
            ValueKind::SignedInt | ValueKind::FixedPoint { .. } => {
                Some((-(1i64 << (bits - 1)), (1i64 << (bits - 1)) - 1))
            }
            ValueKind::Binary => Some((-1, 1)),
            ValueKind::Ternary => Some((-1, 1)),
            ValueKind::Float => None,
        }
    }

    /// Whether `v` is exactly representable.
    pub fn represents(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self.kind {
            ValueKind::Float => true,
            ValueKind::Binary => v == 1.0 || v == -1.0,
            ValueKind::Ternary => v == 1.0 || v == 0.0 || v == -1.0,
            _ => {
                let code = v * f64::powi(2.0, self.frac_bits() as i32);
                let (lo, hi) = self.code_range().expect("integer kind");
                code.fract() == 0.0 && code >= lo as f64 && code <= hi as f64
            }
        }
    }

    /// Number of distinct values, `None` for floats or very wide integers.
    pub fn levels(&self) -> Option<u64> {
        match self.kind {
            ValueKind::Binary => Some(2),
            ValueKind::Ternary => Some(3),
            ValueKind::Float => None,
            _ if self.bits >= 63 => None,
            _ => Some(1u64 << self.bits),
        }
    }

    /// Value produced by a thresholding unit at quantized `level`.
    pub fn level_value(&self, level: u32) -> f64 {
        let level = level as f64;
        match self.kind {
            ValueKind::Binary => 2.0 * level - 1.0,
            ValueKind::Ternary => level - 1.0,
            ValueKind::SignedInt => level - f64::powi(2.0, self.bits as i32 - 1),
            ValueKind::FixedPoint { frac_bits, .. } => {
                (level - f64::powi(2.0, self.bits as i32 - 1)) / f64::powi(2.0, frac_bits as i32)
            }
            ValueKind::UnsignedInt | ValueKind::Float => level,
        }
    }

    /// Short label used in workload tables, e.g. `1` or `FP`.
    pub fn label(&self) -> String {
        match self.kind {
            ValueKind::Float => "FP".to_string(),
            _ => self.bits.to_string(),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ValueKind::UnsignedInt => write!(f, "uint{}", self.bits),
            ValueKind::SignedInt => write!(f, "int{}", self.bits),
            ValueKind::Binary => write!(f, "binary"),
            ValueKind::Ternary => write!(f, "ternary"),
            ValueKind::FixedPoint { int_bits, frac_bits } => write!(f, "fixed{int_bits}.{frac_bits}"),
            ValueKind::Float => write!(f, "float{}", self.bits),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_must_be_one_bit() {
        assert!(Precision::binary().check().is_ok());
        let bad = Precision { bits: 2, kind: ValueKind::Binary };
        assert_eq!(bad.check(), Err(PrecisionIssue::KindMismatch));
        let bad = Precision { bits: 1, kind: ValueKind::Ternary };
        assert_eq!(bad.check(), Err(PrecisionIssue::KindMismatch));
    }

    #[test]
    fn fixed_point_bits_add_up() {
        assert!(Precision::fixed(2, 6).check().is_ok());
        let bad = Precision { bits: 7, kind: ValueKind::FixedPoint { int_bits: 2, frac_bits: 6 } };
        assert_eq!(bad.check(), Err(PrecisionIssue::KindMismatch));
        assert_eq!(Precision::unsigned(0).check(), Err(PrecisionIssue::OutOfRange));
        assert_eq!(Precision::unsigned(65).check(), Err(PrecisionIssue::OutOfRange));
    }

    #[test]
    fn representability() {
        assert!(Precision::binary().represents(-1.0));
        assert!(!Precision::binary().represents(0.0));
        assert!(Precision::ternary().represents(0.0));
        assert!(Precision::unsigned(2).represents(3.0));
        assert!(!Precision::unsigned(2).represents(4.0));
        assert!(Precision::signed(8).represents(-128.0));
        assert!(!Precision::signed(8).represents(128.0));
        assert!(Precision::fixed(1, 7).represents(0.5));
        assert!(!Precision::fixed(1, 7).represents(1.0));
        assert!(Precision::fixed(2, 6).represents(-1.0));
    }

    #[test]
    fn level_values() {
        assert_eq!(Precision::binary().level_value(0), -1.0);
        assert_eq!(Precision::binary().level_value(1), 1.0);
        assert_eq!(Precision::ternary().level_value(2), 1.0);
        assert_eq!(Precision::unsigned(2).level_value(3), 3.0);
        assert_eq!(Precision::signed(2).level_value(0), -2.0);
    }
}

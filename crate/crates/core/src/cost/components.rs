//! Cost functions of the individual building blocks.

use super::{BramGeometry, CostCoefficients, CostError, Impl};
use crate::ir::{Precision, ValueKind};

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Weight width as seen by the LUT model, including the adjustment for
/// signed few-bit weight encodings.
///
/// Binary, ternary and 2-bit signed weights are priced relative to a 1-bit
/// unsigned weight, each step multiplying the previous one, so the cost keeps
/// growing with the width: 1-bit < binary < ternary < 2-bit signed < 3-bit.
pub fn effective_weight_bits(w: Precision, a: Precision, coeffs: &CostCoefficients) -> f64 {
    let binary = if a.bits == 1 { 1.0 } else { coeffs.binaryweight_factor };
    match w.kind {
        ValueKind::Binary => binary,
        ValueKind::Ternary => binary * coeffs.ternary_step_factor,
        ValueKind::SignedInt if w.bits == 2 => binary * coeffs.ternary_step_factor * coeffs.int2_step_factor,
        _ => f64::from(w.bits),
    }
}

/// LUTs of `n` multiply-accumulate units.
pub fn mac_lut_cost(n: u64, w: Precision, a: Precision, implementation: Impl, coeffs: &CostCoefficients) -> f64 {
    coeffs.mac_lut_per_bitop(implementation) * n as f64 * effective_weight_bits(w, a, coeffs) * f64::from(a.bits)
}

/// BRAM18 blocks of the sliding-window line buffer.
pub fn swu_bram(m: u64, k: u64, s: u64, n: u64, c: u64, a_bits: u32, geom: BramGeometry) -> u64 {
    m * (ceil_div(k, s) + 1) * ceil_div(s * n, geom.depth) * ceil_div(c * u64::from(a_bits), geom.width)
}

/// BRAM18 blocks of the weight memory for `weights` values spread over
/// `p` PEs of `q` lanes.
pub fn wm_bram(p: u64, q: u64, w_bits: u32, weights: u64, geom: BramGeometry) -> Result<u64, CostError> {
    let lanes = p * q;
    if lanes == 0 || weights % lanes != 0 {
        return Err(CostError::IndivisibleFolding {
            layer: String::new(),
            reason: format!("P·Q = {lanes} does not divide {weights} weights"),
        });
    }
    let depth = weights / lanes;
    Ok(p * ceil_div(depth, geom.depth) * ceil_div(q * u64::from(w_bits), geom.width))
}

/// LUTs of a matrix-vector unit.
pub fn mvu_lut(m: u64, p: u64, q: u64, w: Precision, a: Precision, coeffs: &CostCoefficients) -> f64 {
    coeffs.mvu_c0 + coeffs.mvu_c1 * (m * p * q) as f64 * effective_weight_bits(w, a, coeffs) * f64::from(a.bits)
}

/// LUTs of a max-pool comparator over `c` channels.
pub fn mp_lut(a: Precision, c: u64, coeffs: &CostCoefficients) -> f64 {
    coeffs.mp_lut_per_ac * f64::from(a.bits) * c as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: BramGeometry = BramGeometry { depth: 512, width: 36 };

    #[test]
    fn swu_examples() {
        assert_eq!(swu_bram(1, 3, 1, 32, 3, 8, G), 4);
        assert_eq!(swu_bram(2, 3, 1, 32, 3, 8, G), 8);
        assert_eq!(swu_bram(1, 2, 2, 32, 64, 1, G), 4);
    }

    #[test]
    fn wm_examples() {
        assert_eq!(wm_bram(8, 8, 1, 9 * 64 * 64, G).unwrap(), 16);
        assert_eq!(wm_bram(16, 32, 1, 1024 * 1024, G).unwrap(), 64);
        assert_eq!(wm_bram(3, 3, 1, 10, G).unwrap_err().kind(), "IndivisibleFolding");
    }

    #[test]
    fn mvu_example() {
        let c = CostCoefficients { mvu_c0: 100.0, mvu_c1: 0.5, ..Default::default() };
        let u1 = Precision::unsigned(1);
        assert_eq!(mvu_lut(1, 4, 8, u1, u1, &c), 116.0);
        assert_eq!(mvu_lut(2, 4, 8, u1, u1, &c), 132.0);
    }

    #[test]
    fn mp_example() {
        let c = CostCoefficients::default();
        assert_eq!(mp_lut(Precision::binary(), 64, &c), 64.0);
        assert_eq!(mp_lut(Precision::unsigned(2), 64, &c), 128.0);
    }

    #[test]
    fn weight_kind_progression() {
        let c = CostCoefficients::default();
        let a2 = Precision::unsigned(2);
        let cost = |w| mac_lut_cost(10, w, a2, Impl::Rtl, &c);
        let one = cost(Precision::unsigned(1));
        assert!((cost(Precision::binary()) / one - 1.35).abs() < 1e-12);
        assert!((cost(Precision::ternary()) / one - 1.35 * 1.2).abs() < 1e-12);
        assert!((cost(Precision::signed(2)) / one - 1.35 * 1.2 * 1.2).abs() < 1e-12);
        assert!(cost(Precision::signed(2)) < cost(Precision::signed(3)));
        // XNOR form: no binary surcharge with 1-bit activations.
        let b1 = Precision::binary();
        assert_eq!(
            mac_lut_cost(10, b1, b1, Impl::Rtl, &c),
            mac_lut_cost(10, Precision::unsigned(1), b1, Impl::Rtl, &c)
        );
    }
}

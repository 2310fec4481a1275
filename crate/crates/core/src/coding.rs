//! Bit-reversal coding between naturals and dyadic points of `[0, 1)`.
//!
//! `m = (a_n ... a_1 a_0)_2` is sent to `0.a_0 a_1 ... a_n`. Even naturals land
//! in `[0, 1/2)`, odd ones in `[1/2, 1)`.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Reverses the low `width` bits of `n`. Bits of `n` at or above `width` must
/// be zero.
pub(crate) fn reverse_bits(n: &BigUint, width: u32) -> BigUint {
    if width == 0 {
        return BigUint::zero();
    }
    debug_assert!(n.bits() <= u64::from(width));
    if width <= 64 {
        let low = n.iter_u64_digits().next().unwrap_or(0);
        return BigUint::from(reverse_low_bits(low, width));
    }
    let limbs = width.div_ceil(64) as usize;
    let mut digits = n.to_u64_digits();
    digits.resize(limbs, 0);
    let reversed: Vec<u64> = digits.iter().rev().map(|l| l.reverse_bits()).collect();
    let pad = limbs as u32 * 64 - width;
    BigUint::from_slice(
        &reversed
            .iter()
            .flat_map(|l| [*l as u32, (*l >> 32) as u32])
            .collect::<Vec<u32>>(),
    ) >> pad
}

/// `u64` version for residue classes.
pub(crate) fn reverse_low_bits(n: u64, width: u32) -> u64 {
    if width == 0 {
        0
    } else {
        n.reverse_bits() >> (64 - width)
    }
}

pub fn encode_h(m: &BigUint) -> Dyadic {
    let width = u32::try_from(m.bits()).expect("natural wider than u32::MAX bits");
    Dyadic::from_parts_unchecked(reverse_bits(m, width), width)
}

/// Inverse of [`encode_h`]. Non-canonical input is canonicalized first; the
/// value 1 has no finite preimage.
pub fn decode_h(x: &Dyadic) -> Result<BigUint> {
    if x.is_one() {
        return Err(Error::InfinitePoint);
    }
    let c = x.canonicalize();
    Ok(reverse_bits(c.num(), c.depth()))
}

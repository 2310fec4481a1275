//! Exact dyadic rationals `num / 2^depth` restricted to the unit interval.
//!
//! A [`Dyadic`] is the finite binary fraction `0.a0 a1 ... a(depth-1)`, where
//! digit `a_i` is bit `depth - 1 - i` of `num`. Values may be stored with
//! trailing zero digits; equality, ordering and hashing go through the exact
//! value, so `6/2^4 == 3/2^3`.
//!
//! Nothing here touches floating point except [`Dyadic::to_f64`], which exists
//! only for plot output.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Dyadic {
    num: BigUint,
    depth: u32,
}

impl Dyadic {
    /// Builds `num / 2^depth`, rejecting values above 1. The stored form is
    /// kept as given; call [`Dyadic::canonicalize`] to strip trailing zeros.
    pub fn new(num: impl Into<BigUint>, depth: u32) -> Result<Self> {
        let num = num.into();
        if num > (BigUint::one() << depth) {
            return Err(Error::OutOfUnitInterval {
                num: num.to_string(),
                depth,
            });
        }
        Ok(Dyadic { num, depth })
    }

    /// Caller guarantees `num <= 2^depth`.
    pub(crate) fn from_parts_unchecked(num: BigUint, depth: u32) -> Self {
        debug_assert!(num <= BigUint::one() << depth);
        Dyadic { num, depth }
    }

    pub fn zero() -> Self {
        Dyadic {
            num: BigUint::zero(),
            depth: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            num: BigUint::one(),
            depth: 0,
        }
    }

    pub fn half() -> Self {
        Dyadic {
            num: BigUint::one(),
            depth: 1,
        }
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == BigUint::one() << self.depth
    }

    pub fn is_canonical(&self) -> bool {
        if self.num.is_zero() {
            self.depth == 0
        } else {
            self.num.is_odd()
        }
    }

    pub fn canonicalize(&self) -> Self {
        if self.num.is_zero() {
            return Dyadic::zero();
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(u64::from(self.depth)) as u32;
        Dyadic {
            num: &self.num >> shift,
            depth: self.depth - shift,
        }
    }

    /// Depth of the canonical form, i.e. the number of significant fraction
    /// digits.
    pub fn canonical_depth(&self) -> u32 {
        if self.num.is_zero() {
            0
        } else {
            let tz = self.num.trailing_zeros().unwrap_or(0);
            self.depth - tz.min(u64::from(self.depth)) as u32
        }
    }

    /// Returns the same value written with exactly `depth` fraction digits,
    /// if that is possible without rounding.
    pub fn at_depth(&self, depth: u32) -> Option<Self> {
        if depth >= self.depth {
            Some(Dyadic {
                num: &self.num << (depth - self.depth),
                depth,
            })
        } else {
            let c = self.canonicalize();
            (c.depth <= depth).then(|| Dyadic {
                num: c.num << (depth - c.depth),
                depth,
            })
        }
    }

    /// Fraction digits `a0 ... a(width-1)`, zero padded on the right.
    pub fn fraction_digits(&self, width: u32) -> Result<Vec<u8>> {
        let c = self.canonicalize();
        if self.is_one() || width < c.depth {
            return Err(Error::WidthTooSmall {
                width,
                depth: if self.is_one() { u32::MAX } else { c.depth },
            });
        }
        let mut digits: Vec<u8> = (0..c.depth)
            .rev()
            .map(|bit| u8::from(c.num.bit(u64::from(bit))))
            .collect();
        digits.resize(width as usize, 0);
        Ok(digits)
    }

    pub fn from_fraction_digits(digits: &[u8]) -> Result<Self> {
        let depth = u32::try_from(digits.len()).map_err(|_| Error::Parse {
            input: format!("{} digits", digits.len()),
            reason: "too many fraction digits".into(),
        })?;
        let mut num = BigUint::zero();
        for (i, &d) in digits.iter().enumerate() {
            match d {
                0 => {}
                1 => num.set_bit(u64::from(depth) - 1 - i as u64, true),
                _ => {
                    return Err(Error::Parse {
                        input: format!("{digits:?}"),
                        reason: "binary digits must be 0 or 1".into(),
                    })
                }
            }
        }
        Ok(Dyadic { num, depth })
    }

    /// `x < 1/2`, the left (even) half of the partition.
    pub fn is_below_half(&self) -> bool {
        if self.depth == 0 {
            return self.num.is_zero();
        }
        self.num.bits() < u64::from(self.depth)
    }

    /// `2x`, defined for `x <= 1/2`.
    pub fn double(&self) -> Option<Self> {
        if self > &Dyadic::half() {
            return None;
        }
        let c = self.canonicalize();
        Some(if c.depth == 0 {
            c
        } else {
            Dyadic {
                num: c.num,
                depth: c.depth - 1,
            }
        })
    }

    /// Fractional part of `2x` for `x < 1`: drops the first fraction digit.
    pub fn shift_left_mod_one(&self) -> Option<Self> {
        if self.is_one() {
            return None;
        }
        let c = self.canonicalize();
        if c.depth == 0 {
            return Some(c);
        }
        let mut num = c.num;
        num.set_bit(u64::from(c.depth) - 1, false);
        Some(
            Dyadic {
                num,
                depth: c.depth - 1,
            }
            .canonicalize(),
        )
    }

    /// Index of the depth-`n` partition cell `[k/2^n, (k+1)/2^n)` holding
    /// this value; `None` for the value 1.
    pub fn cell_index(&self, n: u32) -> Option<BigUint> {
        if self.is_one() {
            return None;
        }
        Some(if n >= self.depth {
            &self.num << (n - self.depth)
        } else {
            &self.num >> (self.depth - n)
        })
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.num.clone()),
            BigInt::from(BigUint::one() << self.depth),
        )
    }

    /// Signed difference `self - other` as an integer over `2^depth`.
    pub(crate) fn signed_diff(&self, other: &Dyadic) -> (BigInt, u32) {
        let depth = self.depth.max(other.depth);
        let a = BigInt::from(&self.num << (depth - self.depth));
        let b = BigInt::from(&other.num << (depth - other.depth));
        (a - b, depth)
    }

    /// `|self - other|`, which stays in `[0, 1]`.
    pub fn abs_diff(&self, other: &Dyadic) -> Dyadic {
        let (diff, depth) = self.signed_diff(other);
        Dyadic {
            num: diff.magnitude().clone(),
            depth,
        }
        .canonicalize()
    }

    /// Nearest `f64`; only meant for plotting columns.
    pub fn to_f64(&self) -> f64 {
        let bits = self.num.bits();
        let shift = bits.saturating_sub(64);
        let mantissa = (&self.num >> shift).to_f64().unwrap_or(0.0);
        let mut exp = shift as i64 - i64::from(self.depth);
        let mut value = mantissa;
        while exp < -1000 {
            value *= 2f64.powi(-1000);
            exp += 1000;
        }
        value * 2f64.powi(exp as i32)
    }

    /// Exact decimal expansion; every dyadic has a finite one.
    pub fn to_decimal_string(&self) -> String {
        let c = self.canonicalize();
        if c.depth == 0 {
            return c.num.to_string();
        }
        let scaled = &c.num * BigUint::from(5u32).pow(c.depth);
        let digits = scaled.to_string();
        let width = c.depth as usize;
        let padded = format!("{digits:0>w$}", w = width + 1);
        let (int, frac) = padded.split_at(padded.len() - width);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    }

    /// `0.<digits>` for the canonical form; `"0"` and `"1"` for the ends.
    pub fn to_binary_string(&self) -> String {
        if self.is_one() {
            return "1".into();
        }
        let c = self.canonicalize();
        if c.depth == 0 {
            return "0".into();
        }
        let digits: String = (0..c.depth)
            .rev()
            .map(|b| if c.num.bit(u64::from(b)) { '1' } else { '0' })
            .collect();
        format!("0.{digits}")
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.depth.cmp(&other.depth) {
            Ordering::Equal => self.num.cmp(&other.num),
            Ordering::Less => (&self.num << (other.depth - self.depth)).cmp(&other.num),
            Ordering::Greater => self.num.cmp(&(&other.num << (self.depth - other.depth))),
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Dyadic {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let c = self.canonicalize();
        c.num.hash(state);
        c.depth.hash(state);
    }
}

/// Canonical `num/2^depth`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.canonicalize();
        write!(f, "{}/2^{}", c.num, c.depth)
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Accepts `k/2^n`, a binary fraction `0.1101b`, or a terminating decimal
/// such as `0.75`.
impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let input = s.trim();
        let fail = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if let Some((num, pow)) = input.split_once('/') {
            let exp = pow
                .strip_prefix("2^")
                .ok_or_else(|| fail("denominator must be written 2^n"))?;
            let num: BigUint = num.trim().parse().map_err(|_| fail("bad numerator"))?;
            let depth: u32 = exp.trim().parse().map_err(|_| fail("bad exponent"))?;
            return Dyadic::new(num, depth);
        }
        if let Some(bits) = input.strip_suffix('b') {
            let (int, frac) = bits.split_once('.').unwrap_or((bits, ""));
            if int != "0" && int != "1" {
                return Err(fail("binary literal must look like 0.<bits>b"));
            }
            let digits = frac
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(fail("binary literal digits must be 0 or 1")),
                })
                .collect::<Result<Vec<u8>>>()?;
            let frac = Dyadic::from_fraction_digits(&digits)?;
            return if int == "1" {
                if frac.is_zero() {
                    Ok(Dyadic::one())
                } else {
                    Err(Error::OutOfUnitInterval {
                        num: input.to_string(),
                        depth: frac.depth,
                    })
                }
            } else {
                Ok(frac)
            };
        }
        let (int, frac) = input.split_once('.').unwrap_or((input, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(fail("empty literal"));
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(fail("expected k/2^n, 0.<bits>b or a decimal"));
        }
        let scale = u32::try_from(frac.len()).map_err(|_| fail("too many digits"))?;
        let whole: BigUint = format!("{}{}", if int.is_empty() { "0" } else { int }, frac)
            .parse()
            .map_err(|_| fail("bad decimal"))?;
        let five_pow = BigUint::from(5u32).pow(scale);
        let (num, rem) = whole.div_rem(&five_pow);
        if !rem.is_zero() {
            return Err(fail("decimal is not a dyadic rational"));
        }
        Dyadic::new(num, scale)
    }
}

/// Reduced exact rational, used for difference quotients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRatio(BigRational);

impl ExactRatio {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(ExactRatio(BigRational::new(numerator, denominator)))
    }

    pub fn from_integer(n: i64) -> Self {
        ExactRatio(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_fraction(n: i64, d: i64) -> Self {
        ExactRatio(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        ExactRatio(self.0.abs())
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl std::ops::Mul for &ExactRatio {
    type Output = ExactRatio;

    fn mul(self, rhs: &ExactRatio) -> ExactRatio {
        ExactRatio(&self.0 * &rhs.0)
    }
}

impl From<BigRational> for ExactRatio {
    fn from(r: BigRational) -> Self {
        ExactRatio(r)
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl serde::Serialize for ExactRatio {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `(y1 - y2) / (x1 - x2)` with no rounding.
pub fn exact_quotient(y: (&Dyadic, &Dyadic), x: (&Dyadic, &Dyadic)) -> Result<ExactRatio> {
    let (dy, dy_depth) = y.0.signed_diff(y.1);
    let (dx, dx_depth) = x.0.signed_diff(x.1);
    if dx.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    // dy/2^a over dx/2^b  =  dy * 2^b / (dx * 2^a)
    let (num, den) = if dy_depth >= dx_depth {
        (dy, dx << (dy_depth - dx_depth))
    } else {
        (dy << (dx_depth - dy_depth), dx)
    };
    ExactRatio::new(num, den)
}

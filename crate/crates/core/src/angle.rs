//! Exact rotation angles `pi * n / 2^l`.

use core::fmt;
use core::ops::{Add, Neg, Sub};
use core::str::FromStr;

use crate::error::ParseError;

/// Largest denominator exponent accepted anywhere in the crate.
pub const MAX_LOG2_DENOM: u32 = 60;

/// The angle `pi * numerator / 2^log2_denom`, always kept canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicAngle {
    numerator: i64,
    log2_denom: u32,
}

impl Default for DyadicAngle {
    fn default() -> Self {
        Self::ZERO
    }
}

impl DyadicAngle {
    pub const ZERO: DyadicAngle = DyadicAngle { numerator: 0, log2_denom: 0 };
    pub const PI: DyadicAngle = DyadicAngle { numerator: 1, log2_denom: 0 };
    pub const PI_2: DyadicAngle = DyadicAngle { numerator: 1, log2_denom: 1 };

    /// Builds and canonicalizes `pi * numerator / 2^log2_denom`.
    pub fn new(numerator: i64, log2_denom: u32) -> Self {
        assert!(log2_denom <= MAX_LOG2_DENOM, "denominator 2^{log2_denom} too large");
        DyadicAngle { numerator, log2_denom }.canonicalize()
    }

    /// `pi / 2^l`.
    pub fn pi_over_pow2(l: u32) -> Self {
        Self::new(1, l)
    }

    /// The angle `pi * (x_0 . x_1 x_2 ... x_l)` with `bits[j] = x_j`.
    pub fn from_binary_fraction(bits: &[bool]) -> Self {
        assert!(!bits.is_empty(), "binary fraction needs at least the integer digit");
        let l = (bits.len() - 1) as u32;
        let numerator = bits.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| 1i64 << (l - j as u32)).sum();
        Self::new(numerator, l)
    }

    pub fn canonicalize(self) -> Self {
        let DyadicAngle { mut numerator, mut log2_denom } = self;
        if numerator == 0 {
            return Self::ZERO;
        }
        while log2_denom > 0 && numerator % 2 == 0 {
            numerator /= 2;
            log2_denom -= 1;
        }
        DyadicAngle { numerator, log2_denom }
    }

    pub fn numerator(self) -> i64 {
        self.numerator
    }

    pub fn log2_denom(self) -> u32 {
        self.log2_denom
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn half(self) -> Self {
        Self::new(self.numerator, self.log2_denom + 1)
    }

    pub fn double(self) -> Self {
        if self.log2_denom == 0 {
            Self::new(self.numerator.checked_mul(2).expect("angle overflow"), 0)
        } else {
            Self::new(self.numerator, self.log2_denom - 1)
        }
    }

    /// True when the angle is a multiple of `pi/2`, i.e. `R_P(theta)` is Clifford.
    pub fn is_clifford(self) -> bool {
        self.log2_denom <= 1
    }

    /// Reduces into `(-2pi, 2pi]`. `R_P` is `4pi`-periodic, so this is exact.
    pub fn reduce_mod_4pi(self) -> Self {
        let period = 4i128 << self.log2_denom;
        let mut n = (self.numerator as i128).rem_euclid(period);
        if n > period / 2 {
            n -= period;
        }
        Self::new(n as i64, self.log2_denom)
    }

    /// Writes the angle as `theta' + 2pi*m` with `theta'` in `(-pi, pi]`.
    /// Returns `theta'` and whether `m` is odd, in which case `R_P(theta) = -R_P(theta')`.
    pub fn wrap_2pi(self) -> (Self, bool) {
        let period = 2i128 << self.log2_denom;
        let n = self.numerator as i128;
        let mut r = n.rem_euclid(period);
        if r > period / 2 {
            r -= period;
        }
        let m = (n - r) / period;
        (Self::new(r as i64, self.log2_denom), m.rem_euclid(2) == 1)
    }

    /// Float value in radians; only simulation engines call this.
    pub fn radians(self) -> f64 {
        core::f64::consts::PI * self.numerator as f64 / libm::ldexp(1.0, self.log2_denom as i32)
    }

    fn combine(self, other: Self, sign: i128) -> Self {
        let l = self.log2_denom.max(other.log2_denom);
        let a = (self.numerator as i128) << (l - self.log2_denom);
        let b = (other.numerator as i128) << (l - other.log2_denom);
        let mut n = a + sign * b;
        let mut l = l;
        while l > 0 && n != 0 && n % 2 == 0 {
            n /= 2;
            l -= 1;
        }
        Self::new(i64::try_from(n).expect("angle overflow"), l)
    }
}

impl Neg for DyadicAngle {
    type Output = DyadicAngle;
    fn neg(self) -> Self {
        DyadicAngle { numerator: -self.numerator, log2_denom: self.log2_denom }
    }
}

impl Add for DyadicAngle {
    type Output = DyadicAngle;
    fn add(self, rhs: Self) -> Self {
        self.combine(rhs, 1)
    }
}

impl Sub for DyadicAngle {
    type Output = DyadicAngle;
    fn sub(self, rhs: Self) -> Self {
        self.combine(rhs, -1)
    }
}

impl fmt::Display for DyadicAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denom)
    }
}

impl FromStr for DyadicAngle {
    type Err = ParseError;

    /// Accepts `n/2^l` or a bare integer `n` (meaning `l = 0`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::new(0, alloc::format!("bad angle `{s}`, expected n/2^l"));
        let (num, l) = match s.split_once('/') {
            Some((num, den)) => {
                let l = den.strip_prefix("2^").ok_or_else(bad)?;
                (num, l.parse::<u32>().map_err(|_| bad())?)
            }
            None => (s, 0),
        };
        let n = num.trim().parse::<i64>().map_err(|_| bad())?;
        if l > MAX_LOG2_DENOM {
            return Err(bad());
        }
        Ok(Self::new(n, l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(DyadicAngle::new(2, 3), DyadicAngle::new(1, 2));
        let a = DyadicAngle::new(1, 3);
        assert_eq!((a.numerator(), a.log2_denom()), (1, 3));
        let z = DyadicAngle::new(0, 5);
        assert_eq!((z.numerator(), z.log2_denom()), (0, 0));
        let e = DyadicAngle::new(4, 0);
        assert_eq!((e.numerator(), e.log2_denom()), (4, 0));
    }

    #[test]
    fn halving_is_exact() {
        let mut a = DyadicAngle::PI;
        for l in 1..=40 {
            a = a.half();
            assert_eq!((a.numerator(), a.log2_denom()), (1, l));
        }
        assert_eq!(DyadicAngle::new(3, 2).double(), DyadicAngle::new(3, 1));
        assert_eq!(DyadicAngle::PI.double(), DyadicAngle::new(2, 0));
    }

    #[test]
    fn binary_fractions() {
        // 1.01 = 1 + 1/4
        let a = DyadicAngle::from_binary_fraction(&[true, false, true]);
        assert_eq!(a, DyadicAngle::new(5, 2));
        assert_eq!(DyadicAngle::from_binary_fraction(&[false, true]), DyadicAngle::PI_2);
        assert_eq!(DyadicAngle::from_binary_fraction(&[false, true, true]), DyadicAngle::new(3, 2));
    }

    #[test]
    fn wrapping() {
        let (w, flip) = DyadicAngle::new(5, 2).wrap_2pi();
        assert_eq!(w, DyadicAngle::new(-3, 2));
        assert!(flip);
        let (w, flip) = DyadicAngle::PI.wrap_2pi();
        assert_eq!(w, DyadicAngle::PI);
        assert!(!flip);
        let (w, flip) = DyadicAngle::new(-1, 0).wrap_2pi();
        assert_eq!(w, DyadicAngle::PI);
        assert!(flip);
        assert_eq!(DyadicAngle::new(9, 1).reduce_mod_4pi(), DyadicAngle::new(1, 1));
    }

    #[test]
    fn text_round_trip() {
        for s in ["1/2^3", "-5/2^2", "0/2^0", "4/2^0"] {
            let a: DyadicAngle = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert_eq!("3".parse::<DyadicAngle>().unwrap(), DyadicAngle::new(3, 0));
        assert!("1/3".parse::<DyadicAngle>().is_err());
        assert!("x/2^1".parse::<DyadicAngle>().is_err());
    }

    proptest! {
        #[test]
        fn canonicalize_preserves_value(n in -1000i64..1000, l in 0u32..20) {
            let a = DyadicAngle::new(n, l);
            prop_assert!((a.radians() - core::f64::consts::PI * n as f64 / (1u64 << l) as f64).abs() < 1e-9);
            prop_assert!(a.numerator() % 2 != 0 || a.log2_denom() == 0);
        }

        #[test]
        fn add_sub_inverse(a in -500i64..500, la in 0u32..12, b in -500i64..500, lb in 0u32..12) {
            let x = DyadicAngle::new(a, la);
            let y = DyadicAngle::new(b, lb);
            prop_assert_eq!((x + y) - y, x);
            prop_assert_eq!(x + (-x), DyadicAngle::ZERO);
            prop_assert_eq!(x.half().double(), x);
        }

        #[test]
        fn wrap_keeps_angle_mod_2pi(n in -5000i64..5000, l in 0u32..8) {
            let a = DyadicAngle::new(n, l);
            let (w, flip) = a.wrap_2pi();
            let diff = a - w;
            let turns = diff.radians() / (2.0 * core::f64::consts::PI);
            prop_assert!((turns - turns.round()).abs() < 1e-9);
            prop_assert_eq!((turns.round() as i64).rem_euclid(2) == 1, flip);
            prop_assert!(w.radians() > -core::f64::consts::PI && w.radians() <= core::f64::consts::PI + 1e-12);
        }
    }
}

//! Exact rational arithmetic helpers.
//!
//! Every distance, LP coefficient and rounding variable in the crate is a
//! [`Rational`]. Zero/one/tightness tests are exact comparisons.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"7"`, `"-3/4"` or a finite decimal such as `"0.125"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits = format!("{whole_digits}{frac}");
        let digits = if digits.is_empty() { "0".to_string() } else { digits };
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Formats as an integer when the denominator is one, otherwise `"num/den"`.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_zero_or_one(r: &Rational) -> bool {
    r.is_zero() || r.is_one()
}

pub fn is_fractional(r: &Rational) -> bool {
    r.is_positive() && r < &Rational::one()
}

pub fn sum<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

/// Smallest integer `>= r`.
pub fn ceil_usize(r: &Rational) -> usize {
    let c = r.ceil();
    if c.is_negative() {
        0
    } else {
        c.to_integer().to_usize().unwrap_or(usize::MAX)
    }
}

/// Largest integer `<= r`.
pub fn floor_i64(r: &Rational) -> i64 {
    r.floor().to_integer().to_i64().unwrap_or(i64::MAX)
}

/// Least common multiple of the denominators; used to move subset sums to
/// integer arithmetic.
pub fn common_denominator<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Numerators of `values` over the common denominator `den`.
pub fn scaled_numerators(values: &[Rational], den: &BigInt) -> Vec<BigInt> {
    values
        .iter()
        .map(|v| v.numer() * (den / v.denom()))
        .collect()
}

/// Draws `true` with probability `p` (clamped to `[0, 1]`), using a 64-bit
/// uniform integer compared exactly against `p * 2^64`.
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: &Rational) -> bool {
    if !p.is_positive() {
        return false;
    }
    if p >= &Rational::one() {
        return true;
    }
    let u = BigInt::from(rng.next_u64());
    let scale = BigInt::one() << 64u32;
    // u < p * 2^64  <=>  u * den < num * 2^64
    u * p.denom() < p.numer() * scale
}

/// Picks index `i` with probability `weights[i] / sum(weights)`.
pub fn choose_weighted<R: RngCore + ?Sized>(rng: &mut R, weights: &[Rational]) -> usize {
    let total = sum(weights);
    assert!(total.is_positive(), "weights must have positive mass");
    let u = Rational::new(BigInt::from(rng.next_u64()), BigInt::one() << 64u32) * &total;
    let mut acc = Rational::zero();
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if !w.is_positive() {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Serde adapter: rationals as `"num/den"` strings, integers, or decimals.
pub mod serde_rational {
    use super::*;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        if r.is_integer() {
            if let Some(v) = r.numer().to_i64() {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an integer or a \"num/den\" string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite number"));
            }
            parse(&v.to_string()).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
            parse(v).map_err(E::custom)
        }
    }

    pub mod vec {
        use super::*;
        use serde::de::SeqAccess;
        use serde::ser::SerializeSeq;

        struct Wrapped<'a>(&'a Rational);

        impl serde::Serialize for Wrapped<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                super::serialize(self.0, s)
            }
        }

        struct Owned(Rational);

        impl<'de> serde::Deserialize<'de> for Owned {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                super::deserialize(d).map(Owned)
            }
        }

        pub fn serialize<S: Serializer>(
            v: &[Rational],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&Wrapped(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            struct V;
            impl<'de> Visitor<'de> for V {
                type Value = Vec<Rational>;
                fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                    f.write_str("a list of rationals")
                }
                fn visit_seq<A: SeqAccess<'de>>(
                    self,
                    mut seq: A,
                ) -> std::result::Result<Vec<Rational>, A::Error> {
                    let mut out = Vec::new();
                    while let Some(Owned(r)) = seq.next_element()? {
                        out.push(r);
                    }
                    Ok(out)
                }
            }
            d.deserialize_seq(V)
        }
    }

    pub mod matrix {
        use super::*;
        use serde::Deserialize;

        #[derive(serde::Serialize)]
        struct Row<'a>(#[serde(with = "super::vec")] &'a Vec<Rational>);

        #[derive(Deserialize)]
        struct OwnedRow(#[serde(with = "super::vec")] Vec<Rational>);

        pub fn serialize<S: Serializer>(
            m: &[Vec<Rational>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            use serde::ser::SerializeSeq;
            let mut seq = s.serialize_seq(Some(m.len()))?;
            for row in m {
                seq.serialize_element(&Row(row))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            let rows: Vec<OwnedRow> = Vec::deserialize(d)?;
            Ok(rows.into_iter().map(|r| r.0).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(parse("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["0", "7", "-2/3", "5/12"] {
            assert_eq!(format(&parse(s).unwrap()), s);
        }
    }

    #[test]
    fn bernoulli_extremes_and_frequency() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(!bernoulli(&mut rng, &zero()));
        assert!(bernoulli(&mut rng, &one()));
        let p = ratio(1, 3);
        let hits = (0..30_000).filter(|_| bernoulli(&mut rng, &p)).count();
        let freq = hits as f64 / 30_000.0;
        assert!((freq - 1.0 / 3.0).abs() < 0.015, "freq {freq}");
    }

    #[test]
    fn weighted_choice_skips_zero_weights() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let w = vec![zero(), ratio(1, 2), zero(), ratio(1, 2)];
        for _ in 0..200 {
            let i = choose_weighted(&mut rng, &w);
            assert!(i == 1 || i == 3);
        }
    }
}

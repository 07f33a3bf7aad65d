//! Exact rational arithmetic helpers.
//!
//! All lengths, costs, and ratios in this crate are `Ratio<i128>` so that the
//! inequalities checked by the verification suites are exact, never float
//! comparisons.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = Ratio<i128>;

pub fn rat(numer: i128, denom: i128) -> Rat {
    Ratio::new(numer, denom)
}

pub fn rat_int(v: i128) -> Rat {
    Ratio::from_integer(v)
}

/// Parse "3", "3/4", or a plain decimal like "0.25" into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac: i128 = frac.parse().map_err(|_| bad())?;
        let abs = Ratio::new(int.abs() * scale + frac, scale);
        return Ok(if neg || int < 0 { -abs } else { abs });
    }
    let n: i128 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(n))
}

/// Render without spaces, integer values without a denominator.
pub fn rat_str(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// gcd over positive rationals: largest g with a = i*g and b = j*g for integers i, j.
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let denom = a.denom().lcm(b.denom());
    let an = a.numer().abs() * (denom / a.denom());
    let bn = b.numer().abs() * (denom / b.denom());
    Ratio::new(an.gcd(&bn), denom)
}

/// Exact quotient a/g when a is an integer multiple of g.
pub fn rat_div_exact(a: &Rat, g: &Rat) -> i128 {
    let q = a / g;
    debug_assert!(q.is_integer(), "{a} is not a multiple of {g}");
    q.to_integer()
}

/// Serialize rationals as strings ("3/4") so reports are byte-stable.
pub mod rat_serde {
    use super::{parse_rat, rat_str, Rat};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rat_str(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(de::Error::custom)
    }
}

/// Same, for `Option<Rat>` fields.
pub mod opt_rat_serde {
    use super::{parse_rat, rat_str, Rat};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&rat_str(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rat>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rat(&s).map_err(de::Error::custom))
            .transpose()
    }
}

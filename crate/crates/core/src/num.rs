//! Exact rational scalars shared by every engine.

use num_rational::Rational64;

/// Exact rational number. All max-plus, DBM and solver arithmetic uses it.
pub type Rat = Rational64;

/// Shorthand for an integral [`Rat`].
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(v)
}

/// Parses `7`, `-3`, `7/2` or a finite decimal such as `-2.25`.
pub fn parse_rat(token: &str) -> Option<Rat> {
    let token = token.trim();
    if token.is_empty() {
        return None;
    }
    if let Some((p, q)) = token.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rat::new(p, q));
    }
    if let Some((int_part, frac_part)) = token.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let whole: i64 = if int_digits.is_empty() {
            0
        } else {
            int_digits.parse().ok()?
        };
        let scale = 10i64.checked_pow(frac_part.len() as u32)?;
        let frac: i64 = frac_part.parse().ok()?;
        let magnitude = Rat::new(whole.checked_mul(scale)?.checked_add(frac)?, scale);
        return Some(if negative { -magnitude } else { magnitude });
    }
    token.parse::<i64>().ok().map(Rat::from_integer)
}

/// Converts a rational to `f64` for reporting only.
pub fn to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Serde adapter writing a [`Rat`] as its display string (`7`, `-7/2`).
pub mod rat_text {
    use super::{parse_rat, Rat};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).ok_or_else(|| D::Error::custom(format!("not a rational: {text}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_token_shapes() {
        assert_eq!(parse_rat("7"), Some(rat(7)));
        assert_eq!(parse_rat("-3"), Some(rat(-3)));
        assert_eq!(parse_rat("7/2"), Some(Rat::new(7, 2)));
        assert_eq!(parse_rat("-2.25"), Some(Rat::new(-9, 4)));
        assert_eq!(parse_rat("-0.5"), Some(Rat::new(-1, 2)));
        assert_eq!(parse_rat(".5"), Some(Rat::new(1, 2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("abc"), None);
        assert_eq!(parse_rat("1."), None);
    }
}

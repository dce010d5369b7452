//! Exact rational helpers: decimal parsing/formatting and common-denominator
//! scaling used by the enumeration oracles.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = num_rational::Ratio<i64>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `-2.1`, `3`, `1e-3`, `.5` or the fraction form `p/q` exactly.
pub fn parse_rational(token: &str) -> Option<Rational> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let all = all.trim_start_matches('0');
    let mut numer: i64 = if all.is_empty() { 0 } else { all.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    let mut denom: i64 = 1;
    if scale >= 0 {
        numer = numer.checked_mul(10i64.checked_pow(scale as u32)?)?;
    } else {
        denom = 10i64.checked_pow((-scale) as u32)?;
    }
    if neg {
        numer = -numer;
    }
    Some(Rational::new(numer, denom))
}

/// Shortest exact text for `r`: a terminating decimal when the reduced
/// denominator has only factors 2 and 5, otherwise `p/q`.
pub fn format_rational(r: Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let factor = match 10i128.checked_pow(places) {
        Some(f) => f,
        None => return format!("{}/{}", r.numer(), r.denom()),
    };
    let scaled = *r.numer() as i128 * factor / *r.denom() as i128;
    let neg = scaled < 0;
    let digits = scaled.unsigned_abs().to_string();
    let places = places as usize;
    let padded = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (ip, fp) = padded.split_at(padded.len() - places);
    let fp = fp.trim_end_matches('0');
    format!("{}{}.{}", if neg { "-" } else { "" }, ip, fp)
}

/// Least common multiple of the denominators; multiplying every value by it
/// yields integers.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values.into_iter().fold(1i64, |acc, r| acc.lcm(r.denom()))
}

/// `r * scale` as an integer; `scale` must be a multiple of `r`'s denominator.
pub fn scaled_int(r: Rational, scale: i64) -> i128 {
    *r.numer() as i128 * (scale / *r.denom()) as i128
}

/// Nearest rational on the `1/grid` lattice.
pub fn snap(x: f64, grid: i64) -> Rational {
    Rational::new((x * grid as f64).round() as i64, grid)
}

pub fn abs(r: Rational) -> Rational {
    if r.is_negative() {
        -r
    } else {
        r
    }
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_forms() {
        assert_eq!(parse_rational("-2.1"), Some(ratio(-21, 10)));
        assert_eq!(parse_rational("3"), Some(rat(3)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1e-3"), Some(ratio(1, 1000)));
        assert_eq!(parse_rational("2.5E2"), Some(rat(250)));
        assert_eq!(parse_rational("-5/1296"), Some(ratio(-5, 1296)));
        assert_eq!(parse_rational("0.000"), Some(rat(0)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("-"), None);
    }

    #[test]
    fn formats_shortest() {
        assert_eq!(format_rational(ratio(-21, 10)), "-2.1");
        assert_eq!(format_rational(ratio(1, 8)), "0.125");
        assert_eq!(format_rational(ratio(-1, 4)), "-0.25");
        assert_eq!(format_rational(rat(-7)), "-7");
        assert_eq!(format_rational(ratio(-5, 1296)), "-5/1296");
        assert_eq!(format_rational(ratio(3, 1000)), "0.003");
    }

    #[test]
    fn scaling_is_exact() {
        let vals = [ratio(1, 4), ratio(-21, 10), rat(3)];
        let l = common_denominator(vals.iter());
        assert_eq!(l, 20);
        assert_eq!(scaled_int(vals[1], l), -42);
    }
}

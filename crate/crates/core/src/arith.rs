//! Exact-arithmetic helpers shared by every module.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn rat_big(p: BigInt, q: BigInt) -> Rational {
    Rational::new(p, q)
}

pub fn uint_to_int(u: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, u.clone())
}

pub fn rat_from_uint(u: &BigUint) -> Rational {
    Rational::from_integer(uint_to_int(u))
}

/// `p/q` rendering; integers are rendered as `p/1` so every field parses the same way.
pub fn to_pq(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_pq(s: &str) -> Option<Rational> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(Rational::new(p, q))
}

/// Decimal rendering with `sig` significant digits, rounded half-up, computed exactly.
///
/// Convenience output only; comparisons always use the exact value.
pub fn to_decimal(x: &Rational, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let sig = sig.max(1);
    let neg = x.is_negative();
    let a = x.abs();
    let ten = BigInt::from(10);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = (a.numer().bits() as i64 - a.denom().bits() as i64) * 30103 / 100000;
    loop {
        let lo = pow10_rat(e);
        if a < lo {
            e -= 1;
            continue;
        }
        if a >= pow10_rat(e + 1) {
            e += 1;
            continue;
        }
        break;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &a * pow10_rat(shift);
    // round half up
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if BigInt::from(2) * r >= *scaled.denom() { q + 1 } else { q };
    if digits >= ten.pow(sig as u32) {
        digits /= &ten;
        e += 1;
    }
    let mut ds = digits.to_string();
    // strip trailing zeros of the mantissa
    while ds.len() > 1 && ds.ends_with('0') {
        ds.pop();
    }
    let body = if (-6..sig as i64).contains(&e) {
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if ds.len() <= int_len {
                format!("{}{}", ds, "0".repeat(int_len - ds.len()))
            } else {
                format!("{}.{}", &ds[..int_len], &ds[int_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), ds)
        }
    } else {
        let mant = if ds.len() > 1 { format!("{}.{}", &ds[..1], &ds[1..]) } else { ds };
        format!("{}e{}", mant, e)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn pow10_rat(e: i64) -> Rational {
    let p = BigInt::from(10).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn pow_uint(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

pub fn rat_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

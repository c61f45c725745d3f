//! Exact rational arithmetic for golden-value checks.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Dist;
use crate::error::{Error, Result};

/// Parse `"a/b"`, an integer, or a plain decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational or decimal: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Natural log of a positive big integer, accurate to double precision.
fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a nonnegative rational; `-inf` for zero.
pub fn ln_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    if let Some(v) = r.to_f64() {
        if v.is_normal() {
            return v.ln();
        }
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Parse `"a/b"` or a decimal and round to the nearest double.
pub fn parse_f64(s: &str) -> Result<f64> {
    parse_rational(s)?.to_f64().ok_or_else(|| Error::Parse(format!("{s:?} does not fit in a double")))
}

/// Distribution with exact rational masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatDist {
    pub states: Vec<i64>,
    pub probs: Vec<BigRational>,
}

impl RatDist {
    pub fn new(states: Vec<i64>, probs: Vec<BigRational>) -> Result<Self> {
        if states.len() != probs.len() || states.is_empty() {
            return Err(Error::InvalidDist("states and probabilities differ in length".into()));
        }
        if states.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDist("states must be strictly increasing".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDist("negative probability".into()));
        }
        let total: BigRational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::InvalidDist(format!("total mass {total} is not 1")));
        }
        Ok(RatDist { states, probs })
    }

    /// Parse strings on states `0..k`.
    pub fn parse_on_range(probs: &[&str]) -> Result<Self> {
        let p = probs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        RatDist::new((0..p.len() as i64).collect(), p)
    }

    pub fn prob(&self, state: i64) -> BigRational {
        self.states
            .binary_search(&state)
            .map_or_else(|_| BigRational::zero(), |i| self.probs[i].clone())
    }

    /// Floating-point copy with logs taken once from the exact values.
    pub fn to_dist(&self) -> Dist {
        Dist::from_logp(self.states.clone(), self.probs.iter().map(ln_rational).collect())
            .expect("exact distribution is normalized")
    }
}

/// JSON form of a distribution entry: `{"state": 0, "prob": "1/3"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbEntry {
    pub state: i64,
    pub prob: String,
}

/// Parse a JSON array of `{state, prob}` entries.
pub fn rat_dist_from_json(text: &str) -> Result<RatDist> {
    let mut entries: Vec<ProbEntry> = serde_json::from_str(text)?;
    entries.sort_by_key(|e| e.state);
    let states = entries.iter().map(|e| e.state).collect();
    let probs = entries.iter().map(|e| parse_rational(&e.prob)).collect::<Result<Vec<_>>>()?;
    RatDist::new(states, probs)
}

pub fn rat_dist_to_json(d: &RatDist) -> Result<String> {
    let entries: Vec<ProbEntry> =
        d.states.iter().zip(&d.probs).map(|(&state, p)| ProbEntry { state, prob: p.to_string() }).collect();
    Ok(serde_json::to_string(&entries)?)
}

/// Row-stochastic matrix with rational entries; `rows[x][y] = K(y | x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatKernel {
    pub states: Vec<i64>,
    pub rows: Vec<Vec<BigRational>>,
}

impl RatKernel {
    pub fn new(states: Vec<i64>, rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let k = states.len();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidKernel("kernel must be square over its states".into()));
        }
        for r in &rows {
            if r.iter().any(|p| p.is_negative()) || !r.iter().cloned().sum::<BigRational>().is_one() {
                return Err(Error::InvalidKernel("every row must be a probability vector".into()));
            }
        }
        Ok(RatKernel { states, rows })
    }

    /// Binary kernel on `{0,1}` that keeps its state with probability `stay`.
    pub fn binary_stay(stay: BigRational) -> Result<Self> {
        let flip = BigRational::one() - &stay;
        RatKernel::new(vec![0, 1], vec![vec![stay.clone(), flip.clone()], vec![flip, stay]])
    }
}

pub fn apply_kernel_exact(mu: &RatDist, k: &RatKernel) -> Result<RatDist> {
    let mut out = vec![BigRational::zero(); k.states.len()];
    for (s, p) in mu.states.iter().zip(&mu.probs) {
        let x = k
            .states
            .iter()
            .position(|t| t == s)
            .ok_or_else(|| Error::DomainMismatch(format!("state {s} not in the kernel domain")))?;
        for (y, kxy) in k.rows[x].iter().enumerate() {
            out[y] += p * kxy;
        }
    }
    RatDist::new(k.states.clone(), out)
}

/// Hellinger integral of integer order, `sum nu^k / mu^(k-1)`.
pub fn hellinger_integer_order(nu: &RatDist, mu: &RatDist, k: u32) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::InvalidParam("integer Hellinger order must be at least 2".into()));
    }
    let mut s = BigRational::zero();
    for (st, p) in nu.states.iter().zip(&nu.probs) {
        if p.is_zero() {
            continue;
        }
        let q = mu.prob(*st);
        if q.is_zero() {
            return Err(Error::AbsoluteContinuityViolation { state: *st });
        }
        s += num_traits::pow(p.clone(), k as usize) / num_traits::pow(q, (k - 1) as usize);
    }
    Ok(s)
}

pub fn chi2_exact(nu: &RatDist, mu: &RatDist) -> Result<BigRational> {
    Ok(hellinger_integer_order(nu, mu, 2)? - BigRational::one())
}

pub fn tv_exact(nu: &RatDist, mu: &RatDist) -> BigRational {
    let mut states: Vec<i64> = nu.states.iter().chain(&mu.states).copied().collect();
    states.sort_unstable();
    states.dedup();
    let s: BigRational = states.iter().map(|&x| (nu.prob(x) - mu.prob(x)).abs()).sum();
    s / BigRational::from_integer(BigInt::from(2))
}

pub fn dobrushin_exact(k: &RatKernel) -> BigRational {
    let mut best = BigRational::zero();
    for a in &k.rows {
        for b in &k.rows {
            let s: BigRational = a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum();
            let v = s / BigRational::from_integer(BigInt::from(2));
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// True when the value is an integer ratio with a small denominator worth printing.
pub fn is_displayable(r: &BigRational) -> bool {
    r.denom().sign() == Sign::Plus && r.denom().bits() <= 64 && r.numer().bits() <= 64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(r("1/3"), BigRational::new(1.into(), 3.into()));
        assert_eq!(r("0.25"), BigRational::new(1.into(), 4.into()));
        assert_eq!(r("2e-1"), BigRational::new(1.into(), 5.into()));
        assert_eq!(r("1"), BigRational::one());
        assert_eq!(r(".5"), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn example_chain_values_are_exact() {
        let nu = RatDist::parse_on_range(&["1/3", "2/3"]).unwrap();
        let pi = RatDist::parse_on_range(&["1/2", "1/2"]).unwrap();
        let k1 = RatKernel::binary_stay(r("1/3")).unwrap();
        let nk = apply_kernel_exact(&nu, &k1).unwrap();
        assert_eq!(nk.probs, vec![r("5/9"), r("4/9")]);
        let pk = apply_kernel_exact(&pi, &k1).unwrap();
        assert_eq!(hellinger_integer_order(&nk, &pk, 2).unwrap(), r("82/81"));
        assert_eq!(hellinger_integer_order(&nu, &pi, 2).unwrap(), r("10/9"));
        assert_eq!(chi2_exact(&nk, &pk).unwrap() / chi2_exact(&nu, &pi).unwrap(), r("1/9"));
        assert_eq!(dobrushin_exact(&k1), r("1/3"));
        assert_eq!(dobrushin_exact(&RatKernel::binary_stay(r("1/5")).unwrap()), r("3/5"));
    }

    #[test]
    fn json_round_trip() {
        let d = rat_dist_from_json(r#"[{"state":1,"prob":"2/3"},{"state":0,"prob":"1/3"}]"#).unwrap();
        assert_eq!(d.states, vec![0, 1]);
        let back = rat_dist_from_json(&rat_dist_to_json(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        assert!(rat_dist_from_json(r#"[{"state":0,"prob":"1/2"}]"#).is_err());
    }

    #[test]
    fn ln_of_tiny_rational() {
        let tiny = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(2), 3000));
        assert!((ln_rational(&tiny) + 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}

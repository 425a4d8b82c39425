//! Exact rotation-number arithmetic.
//!
//! A rotation number is a rational taken mod 1, so every [`Rational`] is kept
//! reduced and inside `[0, 1)`. Equality is therefore structural: `5/3`, `2/3`
//! and `4/6` all construct the same value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A reduced fraction `num/den` in `[0, 1)`. Zero is `0/1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Rational {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };

    /// Reduces `q/p` mod 1. Negative numerators wrap around, so `-1/3` is `2/3`.
    pub fn new(q: i64, p: i64) -> Result<Self> {
        if p <= 0 {
            return Err(Error::NonPositiveDenominator(p));
        }
        let num = q.rem_euclid(p) as u64;
        Ok(Self::reduced(num, p as u64))
    }

    /// `num < den` must already hold.
    fn reduced(num: u64, den: u64) -> Self {
        debug_assert!(den > 0 && num < den);
        let g = gcd(num, den);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    fn from_parts_mod1(num: u64, den: u64) -> Self {
        Self::reduced(num % den, den)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `|a.den * b.num - b.den * a.num|`.
    pub fn determinant(&self, other: &Rational) -> u64 {
        let lhs = self.den as u128 * other.num as u128;
        let rhs = other.den as u128 * self.num as u128;
        lhs.abs_diff(rhs) as u64
    }

    pub fn is_farey_neighbor(&self, other: &Rational) -> bool {
        self.determinant(other) == 1
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses the ASCII form `q/p` (no spaces).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let (q, p) = s.split_once('/').ok_or_else(bad)?;
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit());
        if !digits(q) || !digits(p) {
            return Err(bad());
        }
        let q: i64 = q.parse().map_err(|_| bad())?;
        let p: i64 = p.parse().map_err(|_| bad())?;
        Rational::new(q, p)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `(a.num + b.num) / (a.den + b.den)`, reduced.
pub fn mediant(a: Rational, b: Rational) -> Result<Rational> {
    if a == b {
        return Err(Error::EqualRationals(a.to_string()));
    }
    weighted_mediant(a, b, 1, 1)
}

/// `(n*a.num + m*b.num) / (n*a.den + m*b.den)`, reduced. One of the weights may
/// be zero, in which case the other endpoint is returned.
pub fn weighted_mediant(a: Rational, b: Rational, n: u64, m: u64) -> Result<Rational> {
    if n == 0 && m == 0 {
        return Err(Error::ZeroWeights);
    }
    let lin = |x: u64, y: u64| -> Result<u64> {
        n.checked_mul(x)
            .zip(m.checked_mul(y))
            .and_then(|(l, r)| l.checked_add(r))
            .ok_or(Error::Overflow)
    };
    let num = lin(a.num, b.num)?;
    let den = lin(a.den, b.den)?;
    Ok(Rational::from_parts_mod1(num, den))
}

type Frac = (u64, u64);

fn frac_lt(x: Frac, y: Frac) -> bool {
    (x.0 as u128) * (y.1 as u128) < (y.0 as u128) * (x.1 as u128)
}

/// Consecutive terms `l <= a < r` of the Farey sequence of order `n` on `[0, 1]`,
/// found by Stern–Brocot descent.
fn farey_bracket(a: Rational, n: u64) -> (Frac, Frac) {
    let target = (a.num, a.den);
    let (mut l, mut r): (Frac, Frac) = ((0, 1), (1, 1));
    loop {
        let m = (l.0 + r.0, l.1 + r.1);
        if m.1 > n {
            return (l, r);
        }
        if frac_lt(target, m) {
            r = m;
        } else {
            l = m;
        }
    }
}

/// All reduced `q/p` with `a < q/p < b` and `p <= max_den`, ascending.
///
/// Walks the Farey sequence of order `max_den` with the next-term recurrence,
/// so the cost is linear in the output plus the initial descent.
pub fn rationals_between(a: Rational, b: Rational, max_den: u64) -> Vec<Rational> {
    let mut out = Vec::new();
    if a >= b || max_den == 0 {
        return out;
    }
    let upper = (b.num, b.den);
    let (mut prev, mut cur) = farey_bracket(a, max_den);
    while frac_lt(cur, upper) {
        out.push(Rational::reduced(cur.0, cur.1));
        let k = (max_den + prev.1) / cur.1;
        let next = (k * cur.0 - prev.0, k * cur.1 - prev.1);
        (prev, cur) = (cur, next);
    }
    out
}

/// Which side the longer-period orbit lies on.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub enum Direction {
    /// `long < short` as rationals.
    Case1,
    /// `long > short`.
    Case2,
}

/// An ordered Farey-neighbour pair, normalised by period: `long` has the larger
/// denominator. The value order is kept separately in `direction`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FareyPair {
    long: Rational,
    short: Rational,
    direction: Direction,
}

impl FareyPair {
    /// Accepts the endpoints in either order.
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        let determinant = a.determinant(&b);
        if determinant != 1 {
            return Err(Error::NotFareyNeighbors {
                a: a.to_string(),
                b: b.to_string(),
                determinant,
            });
        }
        // determinant 1 rules out equal denominators inside [0, 1)
        let (long, short) = if a.den > b.den { (a, b) } else { (b, a) };
        let direction = if long < short {
            Direction::Case1
        } else {
            Direction::Case2
        };
        Ok(FareyPair {
            long,
            short,
            direction,
        })
    }

    pub fn long(&self) -> Rational {
        self.long
    }

    pub fn short(&self) -> Rational {
        self.short
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn lower(&self) -> Rational {
        self.long.min(self.short)
    }

    pub fn upper(&self) -> Rational {
        self.long.max(self.short)
    }

    /// Closed-interval membership.
    pub fn contains(&self, r: Rational) -> bool {
        self.lower() <= r && r <= self.upper()
    }

    pub fn contains_strictly(&self, r: Rational) -> bool {
        self.lower() < r && r < self.upper()
    }

    pub fn mediant(&self) -> Rational {
        // Farey neighbours are distinct and the sum cannot overflow for any
        // pair whose denominators fit comfortably in u64.
        mediant(self.long, self.short).expect("mediant of a Farey pair")
    }
}

impl fmt::Display for FareyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} v {}", self.long, self.short)
    }
}

impl FromStr for FareyPair {
    type Err = Error;

    /// Parses `q1/p1 v q2/p2`; spaces around the `v` are optional.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('v')
            .ok_or_else(|| Error::ParsePair(s.to_string()))?;
        let a: Rational = a.trim().parse()?;
        let b: Rational = b.trim().parse()?;
        FareyPair::new(a, b)
    }
}

impl Serialize for FareyPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.long, self.short].serialize(serializer)
    }
}

impl Ord for FareyPair {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.lower(), self.upper()).cmp(&(other.lower(), other.upper()))
    }
}

impl PartialOrd for FareyPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every Farey pair whose endpoints both have denominator `<= max_den`.
pub fn farey_pairs_up_to(max_den: u64) -> Vec<FareyPair> {
    let mut all: Vec<Rational> = all_rationals(max_den).collect();
    all.sort();
    let mut pairs = Vec::new();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if let Ok(pair) = FareyPair::new(*a, *b) {
                pairs.push(pair);
            }
        }
    }
    pairs
}

/// Reduced rationals in `[0, 1)` with denominator `<= max_den`.
pub fn all_rationals(max_den: u64) -> impl Iterator<Item = Rational> {
    (1..=max_den).flat_map(move |p| {
        (0..p)
            .filter(move |&q| gcd(q, p) == 1)
            .map(move |q| Rational { num: q, den: p })
    })
}

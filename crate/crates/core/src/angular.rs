//! Wigner 3j/6j symbols and the angular factors that connect radial integrals,
//! fine-structure reduced matrix elements and hyperfine-resolved transition dipoles.
//!
//! # Conventions
//!
//! Condon–Shortley phases throughout. The Racah sums are evaluated in exact
//! integer arithmetic (`i128`) and only the final square root is taken in
//! floating point; if an intermediate ever overflows the evaluation falls back
//! to `f64` factorials.
//!
//! Reduced matrix elements ⟨J‖d‖J'⟩ use the Clebsch–Gordan normalisation with
//! the *lower* state on the left,
//!
//! ```text
//! ⟨J' M'| d_q |J M⟩ = ⟨J M; 1 q | J' M'⟩ · √((2J+1)/(2J'+1)) · ⟨J‖d‖J'⟩
//! ```
//!
//! i.e. ⟨J‖d‖J'⟩ equals the Edmonds reduced element divided by √(2J+1). With this
//! normalisation the stretched |J, M=J⟩ → |J+1, M=J+1⟩ amplitude is
//! √((2J+1)/(2J+3)) times the reduced element, and the sum of squared fine-structure
//! factors over all upper j' is |⟨l‖C¹‖l'⟩|²/(2l+1) for any lower j.
//! The overall sign is chosen so that hydrogen 1s₁/₂ → 2p₃/₂ is positive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::RydbergState;

/// An integer or half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger(0);
    pub const HALF: HalfInteger = HalfInteger(1);
    pub const ONE: HalfInteger = HalfInteger(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInteger(twice)
    }

    pub const fn from_int(v: i32) -> Self {
        HalfInteger(2 * v)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// 2j + 1
    pub fn multiplicity(self) -> i32 {
        self.0 + 1
    }
}

impl std::ops::Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: Self) -> Self {
        HalfInteger(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: Self) -> Self {
        HalfInteger(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> Self {
        HalfInteger(-self.0)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = String;

    /// Accepts `3/2`, `2`, `-1/2` or a decimal such as `2.5`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| format!("bad half-integer `{s}`"))?;
            match den.trim() {
                "2" => Ok(HalfInteger(num)),
                "1" => Ok(HalfInteger(2 * num)),
                _ => Err(format!("bad half-integer `{s}`")),
            }
        } else if let Ok(v) = s.parse::<i32>() {
            Ok(HalfInteger(2 * v))
        } else {
            let v: f64 = s.parse().map_err(|_| format!("bad half-integer `{s}`"))?;
            let twice = (2.0 * v).round();
            if (twice - 2.0 * v).abs() > 1e-9 {
                return Err(format!("`{s}` is not a multiple of 1/2"));
            }
            Ok(HalfInteger(twice as i32))
        }
    }
}

// ---------------------------------------------------------------------------
// exact helpers

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn factorial_i128(n: i32) -> Option<i128> {
    (1..=n as i128).try_fold(1i128, |acc, k| acc.checked_mul(k))
}

fn factorial_f64(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Clone, Copy)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    fn new(num: i128, den: i128) -> Ratio {
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio {
            num: s * num / g,
            den: s * den / g,
        }
    }

    fn checked_add(self, o: Ratio) -> Option<Ratio> {
        let g = gcd(self.den, o.den).max(1);
        let lhs = self.num.checked_mul(o.den / g)?;
        let rhs = o.num.checked_mul(self.den / g)?;
        let den = (self.den / g).checked_mul(o.den)?;
        Some(Ratio::new(lhs.checked_add(rhs)?, den))
    }

    fn checked_mul(self, o: Ratio) -> Option<Ratio> {
        let g1 = gcd(self.num, o.den).max(1);
        let g2 = gcd(o.num, self.den).max(1);
        let num = (self.num / g1).checked_mul(o.num / g2)?;
        let den = (self.den / g2).checked_mul(o.den / g1)?;
        Some(Ratio::new(num, den))
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn product_of_factorials(args: &[i32]) -> Option<i128> {
    args.iter()
        .try_fold(1i128, |acc, &a| acc.checked_mul(factorial_i128(a)?))
}

/// A symbolic Racah-type expression: `sign * sqrt(root_num/root_den) * Σ terms`.
/// Each term is `(-1)^k * num_factorials / den_factorials`.
struct RacahSum {
    sign: f64,
    root_num: Vec<i32>,
    root_den: Vec<i32>,
    terms: Vec<(i32, Vec<i32>, Vec<i32>)>,
}

impl RacahSum {
    fn evaluate(&self) -> f64 {
        self.exact().unwrap_or_else(|| self.float())
    }

    fn exact(&self) -> Option<f64> {
        let root = Ratio::new(
            product_of_factorials(&self.root_num)?,
            product_of_factorials(&self.root_den)?,
        );
        let mut sum = Ratio::new(0, 1);
        for (k, num, den) in &self.terms {
            let s = if k % 2 == 0 { 1 } else { -1 };
            let t = Ratio::new(s * product_of_factorials(num)?, product_of_factorials(den)?);
            sum = sum.checked_add(t)?;
        }
        // sqrt(a/b) * (p/q): fold the rational part in before the single root
        let value_sq = root.checked_mul(sum)?.checked_mul(sum)?;
        let sign = if sum.num < 0 { -self.sign } else { self.sign };
        Some(sign * value_sq.to_f64().sqrt())
    }

    fn float(&self) -> f64 {
        let root: f64 = self.root_num.iter().map(|&a| factorial_f64(a)).product::<f64>()
            / self.root_den.iter().map(|&a| factorial_f64(a)).product::<f64>();
        let sum: f64 = self
            .terms
            .iter()
            .map(|(k, num, den)| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * num.iter().map(|&a| factorial_f64(a)).product::<f64>()
                    / den.iter().map(|&a| factorial_f64(a)).product::<f64>()
            })
            .sum();
        self.sign * root.sqrt() * sum
    }
}

fn triangle(a: HalfInteger, b: HalfInteger, c: HalfInteger) -> bool {
    let (a, b, c) = (a.0, b.0, c.0);
    a >= 0 && b >= 0 && c >= 0 && c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

fn projection_ok(j: HalfInteger, m: HalfInteger) -> bool {
    m.0.abs() <= j.0 && (j.0 + m.0) % 2 == 0
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3). Returns 0 when the triangle or
/// projection rules fail.
pub fn wigner3j(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    m1: HalfInteger,
    m2: HalfInteger,
    m3: HalfInteger,
) -> f64 {
    if m1.0 + m2.0 + m3.0 != 0
        || !triangle(j1, j2, j3)
        || !projection_ok(j1, m1)
        || !projection_ok(j2, m2)
        || !projection_ok(j3, m3)
    {
        return 0.0;
    }
    // all of these are integers once the rules above hold
    let h = |x: i32| x / 2;
    let (a, b, c) = (j1.0, j2.0, j3.0);
    let (x, y, z) = (m1.0, m2.0, m3.0);
    let phase = h(a - b - z);
    let sign = if phase.rem_euclid(2) == 0 { 1.0 } else { -1.0 };

    let kmin = 0.max(h(b - c - x)).max(h(a - c + y));
    let kmax = h(a + b - c).min(h(a - x)).min(h(b + y));
    let terms = (kmin..=kmax)
        .map(|k| {
            (
                k,
                vec![],
                vec![
                    k,
                    h(c - b + x) + k,
                    h(c - a - y) + k,
                    h(a + b - c) - k,
                    h(a - x) - k,
                    h(b + y) - k,
                ],
            )
        })
        .collect();
    RacahSum {
        sign,
        root_num: vec![
            h(a + b - c),
            h(a - b + c),
            h(-a + b + c),
            h(a + x),
            h(a - x),
            h(b + y),
            h(b - y),
            h(c + z),
            h(c - z),
        ],
        root_den: vec![h(a + b + c) + 1],
        terms,
    }
    .evaluate()
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}. Returns 0 when any triad fails.
pub fn wigner6j(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    j4: HalfInteger,
    j5: HalfInteger,
    j6: HalfInteger,
) -> f64 {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if triads.iter().any(|&(a, b, c)| !triangle(a, b, c)) {
        return 0.0;
    }
    let delta = |a: HalfInteger, b: HalfInteger, c: HalfInteger| {
        (
            [(a.0 + b.0 - c.0) / 2, (a.0 - b.0 + c.0) / 2, (-a.0 + b.0 + c.0) / 2],
            (a.0 + b.0 + c.0) / 2 + 1,
        )
    };
    let mut root_num = Vec::with_capacity(12);
    let mut root_den = Vec::with_capacity(4);
    for &(a, b, c) in &triads {
        let (n, d) = delta(a, b, c);
        root_num.extend_from_slice(&n);
        root_den.push(d);
    }
    let alpha: Vec<i32> = triads.iter().map(|&(a, b, c)| (a.0 + b.0 + c.0) / 2).collect();
    let beta = [
        (j1.0 + j2.0 + j4.0 + j5.0) / 2,
        (j2.0 + j3.0 + j5.0 + j6.0) / 2,
        (j3.0 + j1.0 + j6.0 + j4.0) / 2,
    ];
    let tmin = *alpha.iter().max().unwrap();
    let tmax = *beta.iter().min().unwrap();
    let terms = (tmin..=tmax)
        .map(|t| {
            let mut den: Vec<i32> = alpha.iter().map(|&a| t - a).collect();
            den.extend(beta.iter().map(|&b| b - t));
            (t, vec![t + 1], den)
        })
        .collect();
    RacahSum {
        sign: 1.0,
        root_num,
        root_den,
        terms,
    }
    .evaluate()
}

/// ⟨l‖C¹‖l'⟩ = (−1)^l √((2l+1)(2l'+1)) (l 1 l'; 0 0 0)
pub fn orbital_c1(l: u32, lp: u32) -> f64 {
    let (lh, lph) = (HalfInteger::from_int(l as i32), HalfInteger::from_int(lp as i32));
    let phase = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    phase
        * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt()
        * wigner3j(lh, HalfInteger::ONE, lph, HalfInteger::ZERO, HalfInteger::ZERO, HalfInteger::ZERO)
}

/// Fine-structure factor f with ⟨n l j‖d‖n' l' j'⟩ = f · ⟨n l|r|n' l'⟩, in the
/// lower-state-normalised convention described in the module docs.
pub fn reduced_j_factor(l: u32, j: HalfInteger, lp: u32, jp: HalfInteger) -> Result<f64> {
    if (l as i32 - lp as i32).abs() != 1 {
        return Err(Error::SelectionRule(format!(
            "fine-structure factor needs Δl = ±1, got l={l} → l'={lp}"
        )));
    }
    let s = HalfInteger::HALF;
    let (lh, lph) = (HalfInteger::from_int(l as i32), HalfInteger::from_int(lp as i32));
    if !triangle(lh, s, j) || !triangle(lph, s, jp) {
        return Err(Error::Domain(format!(
            "invalid j: l={l}, j={j}; l'={lp}, j'={jp}"
        )));
    }
    // Edmonds: (-1)^{j+l'+s+1} sqrt((2j+1)(2j'+1)) {l j s; j' l' 1} <l||C1||l'>
    let phase_twice = j.0 + lph.0 + s.0 + 2;
    let phase = if (phase_twice / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let edmonds = phase
        * ((j.multiplicity() * jp.multiplicity()) as f64).sqrt()
        * wigner6j(lh, j, s, jp, lph, HalfInteger::ONE)
        * orbital_c1(l, lp);
    Ok(-edmonds / (j.multiplicity() as f64).sqrt())
}

/// An electric-dipole transition between two hyperfine sublevels driven by a
/// photon of spherical component `q` (absorption: m_F(upper) = m_F(lower) + q).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfineTransition {
    pub lower: RydbergState,
    pub upper: RydbergState,
    pub q: i32,
    pub nuclear_spin: HalfInteger,
}

impl HyperfineTransition {
    /// The 5P₃/₂ F=3 m_F=3 → nD₅/₂ F=4 m_F=4, σ⁺ transition of ⁸⁷Rb.
    pub fn rb87_stretched(n: u32) -> Result<Self> {
        let h = HalfInteger::from_twice;
        Ok(HyperfineTransition {
            lower: RydbergState::with_hyperfine(5, 1, h(3), h(6), h(6))?,
            upper: RydbergState::with_hyperfine(n, 2, h(5), h(8), h(8))?,
            q: 1,
            nuclear_spin: h(3),
        })
    }
}

/// Coefficient c with μ(transition) = c · ⟨J‖d‖J'⟩, J the lower level.
///
/// Built from one 3j symbol (projection structure in F) and one 6j symbol
/// (recoupling of J with the nuclear spin).
pub fn stretched_hyperfine_factor(t: &HyperfineTransition) -> Result<f64> {
    let need = |s: &RydbergState, what: &str| -> Result<(HalfInteger, HalfInteger)> {
        match (s.f, s.m_f) {
            (Some(f), Some(m)) => Ok((f, m)),
            _ => Err(Error::Domain(format!("{what} state {s} lacks F or m_F"))),
        }
    };
    let (f, m) = need(&t.lower, "lower")?;
    let (fp, mp) = need(&t.upper, "upper")?;
    if !(-1..=1).contains(&t.q) {
        return Err(Error::SelectionRule(format!("photon component q={} not in {{-1,0,1}}", t.q)));
    }
    let q = HalfInteger::from_int(t.q);
    if mp != m + q {
        return Err(Error::SelectionRule(format!(
            "m_F' = {mp} does not equal m_F + q = {}",
            m + q
        )));
    }
    let (j, jp, i) = (t.lower.j, t.upper.j, t.nuclear_spin);
    if !triangle(j, i, f) || !triangle(jp, i, fp) {
        return Err(Error::Domain(format!(
            "F values inconsistent with J and I = {i}: F={f}, F'={fp}"
        )));
    }
    // <F' m'| d_q |F m> = (-1)^{F'-m'} (F' 1 F; -m' q m) <F'||d||F>
    // <F'||d||F> = (-1)^{J'+I+F+1} sqrt((2F'+1)(2F+1)) {J' F' I; F J 1} <J'||d||J>_Edmonds
    // <J'||d||J>_Edmonds = sqrt(2J+1) <J||d||J'>
    let sign_of = |twice: i32| if (twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let three_j = sign_of(fp.0 - mp.0) * wigner3j(fp, HalfInteger::ONE, f, -mp, q, m);
    let six_j = sign_of(jp.0 + i.0 + f.0 + 2)
        * ((fp.multiplicity() * f.multiplicity()) as f64).sqrt()
        * wigner6j(jp, fp, i, f, j, HalfInteger::ONE);
    Ok(three_j * six_j * (j.multiplicity() as f64).sqrt())
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angular::HalfInteger;
use crate::error::{Error, Result};

const L_LETTERS: &[char] = &['S', 'P', 'D', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'O', 'Q', 'R', 'T', 'U', 'V'];

/// Spectroscopic letter for an orbital quantum number, if one exists.
pub fn l_letter(l: u32) -> Option<char> {
    L_LETTERS.get(l as usize).copied()
}

pub fn l_from_letter(c: char) -> Option<u32> {
    let c = c.to_ascii_uppercase();
    L_LETTERS.iter().position(|&x| x == c).map(|p| p as u32)
}

/// Quantum numbers identifying a single-electron level, optionally resolved to
/// a hyperfine sublevel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RydbergState {
    pub n: u32,
    pub l: u32,
    pub j: HalfInteger,
    pub f: Option<HalfInteger>,
    pub m_f: Option<HalfInteger>,
}

impl RydbergState {
    pub fn new(n: u32, l: u32, j: HalfInteger) -> Result<Self> {
        let s = RydbergState { n, l, j, f: None, m_f: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_hyperfine(n: u32, l: u32, j: HalfInteger, f: HalfInteger, m_f: HalfInteger) -> Result<Self> {
        let s = RydbergState { n, l, j, f: Some(f), m_f: Some(m_f) };
        s.validate()?;
        Ok(s)
    }

    /// Hydrogen-style state with j = l + 1/2.
    pub fn stretched_j(n: u32, l: u32) -> Result<Self> {
        RydbergState::new(n, l, HalfInteger::from_twice(2 * l as i32 + 1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Domain("principal quantum number must be ≥ 1".into()));
        }
        if self.l >= self.n {
            return Err(Error::Domain(format!("l = {} must be < n = {}", self.l, self.n)));
        }
        let (l2, j2) = (2 * self.l as i32, self.j.twice());
        if j2 % 2 == 0 || j2 < (l2 - 1).abs() || j2 > l2 + 1 {
            return Err(Error::Domain(format!("j = {} incompatible with l = {}", self.j, self.l)));
        }
        match (self.f, self.m_f) {
            (None, None) => Ok(()),
            (None, Some(_)) => Err(Error::Domain("m_F given without F".into())),
            (Some(f), m) => {
                if f.twice() < 0 {
                    return Err(Error::Domain(format!("F = {f} is negative")));
                }
                if let Some(m) = m {
                    if m.twice().abs() > f.twice() || (f.twice() - m.twice()) % 2 != 0 {
                        return Err(Error::Domain(format!("|m_F| = {m} inconsistent with F = {f}")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Drops any hyperfine labels.
    pub fn fine(&self) -> RydbergState {
        RydbergState { f: None, m_f: None, ..*self }
    }
}

impl fmt::Display for RydbergState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match l_letter(self.l) {
            Some(c) => write!(f, "{}{}{}", self.n, c, self.j)?,
            None => write!(f, "n{}l{}j{}", self.n, self.l, self.j)?,
        }
        if let Some(ff) = self.f {
            write!(f, " F={ff}")?;
        }
        if let Some(m) = self.m_f {
            write!(f, " mF={m}")?;
        }
        Ok(())
    }
}

impl FromStr for RydbergState {
    type Err = Error;

    /// Parses labels such as `5P3/2` or `44D5/2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_ascii_alphabetic())
            .ok_or_else(|| Error::Domain(format!("state label `{s}` has no orbital letter")))?;
        let n: u32 = s[..split]
            .parse()
            .map_err(|_| Error::Domain(format!("bad principal quantum number in `{s}`")))?;
        let letter = s[split..].chars().next().unwrap();
        let l = l_from_letter(letter).ok_or_else(|| Error::Domain(format!("unknown orbital letter in `{s}`")))?;
        let j: HalfInteger = s[split + 1..].parse().map_err(Error::Domain)?;
        RydbergState::new(n, l, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(t: i32) -> HalfInteger {
        HalfInteger::from_twice(t)
    }

    #[test]
    fn validation() {
        assert!(RydbergState::new(5, 1, h(3)).is_ok());
        assert!(RydbergState::new(0, 0, h(1)).is_err());
        assert!(RydbergState::new(2, 2, h(5)).is_err());
        assert!(RydbergState::new(5, 1, h(5)).is_err());
        assert!(RydbergState::new(5, 1, h(2)).is_err());
        assert!(RydbergState::with_hyperfine(5, 1, h(3), h(6), h(8)).is_err());
        assert!(RydbergState::with_hyperfine(5, 1, h(3), h(6), h(5)).is_err());
        assert!(RydbergState::with_hyperfine(5, 1, h(3), h(6), h(-6)).is_ok());
    }

    #[test]
    fn labels_round_trip() {
        let s: RydbergState = "44D5/2".parse().unwrap();
        assert_eq!((s.n, s.l, s.j), (44, 2, h(5)));
        assert_eq!(s.to_string(), "44D5/2");
        assert!("4D5/2x".parse::<RydbergState>().is_err());
        assert!("D5/2".parse::<RydbergState>().is_err());
    }
}

#![allow(dead_code)]
//! Oracles shared by the integration tests. Nothing here calls the crate's
//! own Racah formulas.

/// Largest 2j covered by the tables.
pub const MAX_TWICE: i32 = 9;

/// Clebsch–Gordan coefficients ⟨j1 m1 j2 m2|J M⟩ built numerically from the
/// highest-weight state with the lowering operator and Gram–Schmidt
/// (Condon–Shortley phases). Arguments are twice the physical values.
pub struct CgTable {
    a: i32,
    b: i32,
    /// states[J index][M index] → vector over (m1, m2)
    states: Vec<Vec<Vec<f64>>>,
}

impl CgTable {
    pub fn new(a: i32, b: i32) -> Self {
        let dim = ((a + 1) * (b + 1)) as usize;
        let idx = |tm1: i32, tm2: i32| (((tm1 + a) / 2) * (b + 1) + (tm2 + b) / 2) as usize;
        let lower = |v: &[f64]| {
            let mut out = vec![0.0; dim];
            for tm1 in (-a..=a).step_by(2) {
                for tm2 in (-b..=b).step_by(2) {
                    let c = v[idx(tm1, tm2)];
                    if c == 0.0 {
                        continue;
                    }
                    let (j1, m1, j2, m2) = (a as f64 / 2.0, tm1 as f64 / 2.0, b as f64 / 2.0, tm2 as f64 / 2.0);
                    if tm1 > -a {
                        out[idx(tm1 - 2, tm2)] += c * ((j1 + m1) * (j1 - m1 + 1.0)).sqrt();
                    }
                    if tm2 > -b {
                        out[idx(tm1, tm2 - 2)] += c * ((j2 + m2) * (j2 - m2 + 1.0)).sqrt();
                    }
                }
            }
            out
        };
        let mut states: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut cap = a + b;
        while cap >= (a - b).abs() {
            // highest weight M = J, orthogonal to the M = J members of larger J
            let mut v = vec![0.0; dim];
            for tm1 in (-a..=a).step_by(2) {
                let tm2 = cap - tm1;
                if tm2.abs() <= b && (tm2 + b) % 2 == 0 {
                    v[idx(tm1, tm2)] = 1.0 + 0.1 * (tm1 + a) as f64;
                }
            }
            // two passes: one loses ~1e-9 to cancellation
            for _ in 0..2 {
                for (k, higher) in states.iter().enumerate() {
                    let big = a + b - 2 * k as i32;
                    let u = &higher[((big - cap) / 2) as usize];
                    let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            // Condon–Shortley: ⟨j1 j1; j2 J−j1|J J⟩ > 0
            let lead = v[idx(a, cap - a)];
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let mut ladder = vec![v];
            let jj = cap as f64 / 2.0;
            for step in 0..cap {
                let m = jj - step as f64;
                let mut next = lower(ladder.last().unwrap());
                let f = ((jj + m) * (jj - m + 1.0)).sqrt();
                next.iter_mut().for_each(|x| *x /= f);
                ladder.push(next);
            }
            states.push(ladder);
            cap -= 2;
        }
        CgTable { a, b, states }
    }

    pub fn cg(&self, tm1: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
        let (a, b) = (self.a, self.b);
        if tj > a + b || tj < (a - b).abs() || (tj + a + b) % 2 != 0 || tm1 + tm2 != tm || tm.abs() > tj {
            return 0.0;
        }
        if tm1.abs() > a || tm2.abs() > b || (tm1 + a) % 2 != 0 || (tm2 + b) % 2 != 0 {
            return 0.0;
        }
        let k = ((a + b - tj) / 2) as usize;
        let i = ((tj - tm) / 2) as usize;
        let id = (((tm1 + a) / 2) * (b + 1) + (tm2 + b) / 2) as usize;
        self.states[k][i][id]
    }
}

/// (j1 j2 j3; m1 m2 m3) from Clebsch–Gordan coefficients.
pub fn three_j_from_cg(t: &CgTable, c: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    let phase_twice = t.a - t.b - tm3;
    let sign = if (phase_twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign / ((c + 1) as f64).sqrt() * t.cg(tm1, tm2, c, -tm3)
}

/// Every 3j symbol with 2j ≤ MAX_TWICE, indexed by (a, b, c, m1, m2).
pub struct ThreeJTable {
    data: Vec<f64>,
}

impl ThreeJTable {
    const N: usize = (MAX_TWICE + 1) as usize;
    const M: usize = (2 * MAX_TWICE + 1) as usize;

    pub fn build() -> Self {
        let n = Self::N;
        let m = Self::M;
        let mut data = vec![0.0; n * n * n * m * m];
        for a in 0..=MAX_TWICE {
            for b in 0..=MAX_TWICE {
                let t = CgTable::new(a, b);
                for c in 0..=MAX_TWICE {
                    for tm1 in (-a..=a).step_by(2) {
                        for tm2 in (-b..=b).step_by(2) {
                            let v = three_j_from_cg(&t, c, tm1, tm2, -tm1 - tm2);
                            data[Self::index(a, b, c, tm1, tm2)] = v;
                        }
                    }
                }
            }
        }
        ThreeJTable { data }
    }

    fn index(a: i32, b: i32, c: i32, tm1: i32, tm2: i32) -> usize {
        let n = Self::N;
        let m = Self::M;
        ((((a as usize * n + b as usize) * n + c as usize) * m + (tm1 + MAX_TWICE) as usize) * m)
            + (tm2 + MAX_TWICE) as usize
    }

    pub fn get(&self, a: i32, b: i32, c: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
        if tm1 + tm2 + tm3 != 0 || tm1.abs() > a || tm2.abs() > b || tm3.abs() > c {
            return 0.0;
        }
        if (a + tm1) % 2 != 0 || (b + tm2) % 2 != 0 || (c + tm3) % 2 != 0 {
            return 0.0;
        }
        self.data[Self::index(a, b, c, tm1, tm2)]
    }
}

pub fn triangle(a: i32, b: i32, c: i32) -> bool {
    c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

/// 6j symbol as the contraction of four 3j symbols over all projections.
pub fn six_j_contraction(t: &ThreeJTable, j: [i32; 6]) -> f64 {
    let [a1, a2, a3, a4, a5, a6] = j;
    let mut s = 0.0;
    for m1 in (-a1..=a1).step_by(2) {
        for m2 in (-a2..=a2).step_by(2) {
            let m3 = -m1 - m2;
            if m3.abs() > a3 {
                continue;
            }
            for m4 in (-a4..=a4).step_by(2) {
                let m6 = m4 + m2;
                let m5 = m1 + m6;
                if m6.abs() > a6 || m5.abs() > a5 {
                    continue;
                }
                let w = t.get(a1, a2, a3, -m1, -m2, -m3)
                    * t.get(a1, a5, a6, m1, -m5, m6)
                    * t.get(a4, a2, a6, m4, m2, -m6)
                    * t.get(a4, a5, a3, -m4, m5, m3);
                if w == 0.0 {
                    continue;
                }
                let phase_twice: i32 = (a1 - m1) + (a2 - m2) + (a3 - m3) + (a4 - m4) + (a5 - m5) + (a6 - m6);
                let sign = if (phase_twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                s += sign * w;
            }
        }
    }
    s
}

/// Hydrogen ⟨n l|r|n' l'⟩ for low n from closed forms, a.u.
pub fn hydrogen_radial(n: u32, l: u32, np: u32, lp: u32) -> Option<f64> {
    let v = match (n, l, np, lp) {
        (1, 0, 2, 1) | (2, 1, 1, 0) => 128.0 * 6f64.sqrt() / 243.0,
        // |⟨2s|r|2p⟩| = 3√3
        (2, 0, 2, 1) | (2, 1, 2, 0) => 3.0 * 3f64.sqrt(),
        (1, 0, 3, 1) | (3, 1, 1, 0) => 27.0 * 6f64.sqrt() / 128.0,
        _ => return None,
    };
    Some(v)
}

//! Wigner symbols and the hyperfine factor of the stretched 5P₃/₂ → nD₅/₂ line.
//!
//! ```bash
//! cargo run -p rydberg-at --example angular_factors
//! ```

use rydberg_at::angular::{reduced_j_factor, stretched_hyperfine_factor, wigner3j, wigner6j, HalfInteger, HyperfineTransition};

fn main() -> rydberg_at::Result<()> {
    let h = HalfInteger::from_twice;
    println!("(1 1 1; 1 -1 0)      = {:+.12}", wigner3j(h(2), h(2), h(2), h(2), h(-2), h(0)));
    println!("(3/2 1 5/2; 3/2 1 -5/2) = {:+.12}", wigner3j(h(3), h(2), h(5), h(3), h(2), h(-5)));
    println!("{{1 1 1; 1 1 1}}      = {:+.12}", wigner6j(h(2), h(2), h(2), h(2), h(2), h(2)));
    println!("{{5/2 4 3/2; 3 3/2 1}} = {:+.12}", wigner6j(h(5), h(8), h(3), h(6), h(3), h(2)));

    // fine-structure branching out of 5P3/2 into the D manifold
    let to52 = reduced_j_factor(1, h(3), 2, h(5))?;
    let to32 = reduced_j_factor(1, h(3), 2, h(3))?;
    println!("J-factor  P3/2→D5/2 {to52:+.6}, P3/2→D3/2 {to32:+.6}");

    let t = HyperfineTransition::rb87_stretched(44)?;
    let c = stretched_hyperfine_factor(&t)?;
    println!("{} → {} (q = +1): c = {c:.12}, √(2/3) = {:.12}", t.lower, t.upper, (2.0f64 / 3.0).sqrt());
    Ok(())
}

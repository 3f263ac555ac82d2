//! Roots of a univariate polynomial from the eigenvalues of its companion
//! matrix.
//!
//! ```text
//! cargo run --example companion_roots [-- c0 c1 c2 ...]
//! ```
//!
//! Coefficients are given lowest degree first. Without arguments the example
//! uses (x - 1)(x - 2)(x + 3)(x^2 + 1).

use gazegeom::poly::companion_roots;
use gazegeom::{Result, RootSet, UniPoly};

pub fn run(p: &UniPoly) -> Result<RootSet> {
    let roots = companion_roots(p)?;
    println!("p(x) coefficients (ascending): {:?}", p.coeffs());
    for r in &roots.roots {
        let kind = if r.is_real() { "real" } else { "complex" };
        println!(
            "  {:>+.9} {:>+.9}i  residual {:.1e}  {kind}",
            r.value.re, r.value.im, r.residual
        );
    }
    println!("real roots: {:?}", roots.real());
    Ok(roots)
}

fn main() -> Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("coefficients must be numbers"))
        .collect();
    let p = if args.is_empty() {
        let cubic = UniPoly::from_roots(&[1.0, 2.0, -3.0]);
        let c = cubic.coeffs();
        // multiply by x^2 + 1
        let mut out = vec![0.0; c.len() + 2];
        for (i, &ci) in c.iter().enumerate() {
            out[i] += ci;
            out[i + 2] += ci;
        }
        UniPoly::new(out)
    } else {
        UniPoly::new(args)
    };
    run(&p)?;
    Ok(())
}

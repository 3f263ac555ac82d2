//! Intersection points of two conics, found by eliminating y with the
//! Sylvester resultant and back-substituting the real roots in x.
//!
//! ```text
//! cargo run --example conic_intersection
//! ```

use gazegeom::poly::{intersect_conics, sylvester_resultant_y};
use gazegeom::{BivariateQuadratic, Result};

pub fn run(f: &BivariateQuadratic, g: &BivariateQuadratic) -> Result<Vec<(f64, f64)>> {
    match sylvester_resultant_y(f, g) {
        Ok(res) => println!("resultant in x (ascending): {:?}", res.coeffs()),
        Err(_) => println!("one conic has no y terms, eliminating x instead"),
    }
    let points = intersect_conics(f, g)?;
    for (x, y) in &points {
        println!(
            "  ({x:+.9}, {y:+.9})  f = {:+.1e}  g = {:+.1e}",
            f.eval(*x, *y),
            g.eval(*x, *y)
        );
    }
    Ok(points)
}

fn main() -> Result<()> {
    // unit circle and the ellipse x^2/4 + 4y^2 = 1
    let circle = BivariateQuadratic::new(1.0, 0.0, 1.0, 0.0, 0.0, -1.0);
    let ellipse = BivariateQuadratic::new(0.25, 0.0, 4.0, 0.0, 0.0, -1.0);
    println!("circle and ellipse:");
    run(&circle, &ellipse)?;

    // a hyperbola and a shifted parabola
    let hyperbola = BivariateQuadratic::new(0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
    let parabola = BivariateQuadratic::new(1.0, 0.0, 0.0, 0.0, -1.0, -0.5);
    println!("hyperbola xy = 1 and parabola y = x^2 - 0.5:");
    run(&hyperbola, &parabola)?;

    // the vertical line pair x^2 = 1/4 and the unit circle
    let lines = BivariateQuadratic::new(1.0, 0.0, 0.0, 0.0, 0.0, -0.25);
    println!("line pair x^2 = 1/4 and unit circle:");
    run(&lines, &circle)?;
    Ok(())
}

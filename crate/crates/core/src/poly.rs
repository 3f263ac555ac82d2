//! Polynomial machinery for intersecting two conics.
//!
//! A pair of bivariate quadratics is reduced to a single univariate
//! polynomial by eliminating `y` with the Sylvester resultant. Its real roots
//! give the candidate `x` coordinates; the matching `y` values are recovered
//! from the conics themselves and polished with a few Newton steps on the
//! joint system.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, Matrix2, Vector2};

use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest one are treated as zero
/// when trimming the leading terms of a polynomial.
pub const TRIM_TOLERANCE: f64 = 1e-13;

/// Tolerance of the real-root filter, relative to `1 + |Re|`.
pub const REAL_ROOT_TOLERANCE: f64 = 1e-7;

/// Univariate polynomial with real coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

impl UniPoly {
    /// Builds a polynomial from ascending coefficients `c0, c1, ...`, dropping
    /// negligible leading terms.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut p = UniPoly::raw(coeffs.into());
        p.trim();
        p
    }

    fn raw(coeffs: Vec<f64>) -> Self {
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        UniPoly::new(vec![c])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(UniPoly::constant(1.0), |acc, &r| {
            acc * UniPoly::raw(vec![-r, 1.0])
        })
    }

    fn trim(&mut self) {
        let max = self.max_abs();
        if max == 0.0 || !max.is_finite() {
            if max == 0.0 {
                self.coeffs.clear();
            }
            return;
        }
        while let Some(&last) = self.coeffs.last() {
            if last.abs() <= TRIM_TOLERANCE * max {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn leading(&self) -> f64 {
        self.degree().map_or(0.0, |d| self.coeffs[d])
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex<f64>) -> Complex<f64> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect::<Vec<_>>();
        UniPoly::raw(coeffs)
    }

    /// Residual bound used to accept a root: `max|coeff| · max(1, |z|)^n`.
    pub fn residual_scale(&self, z: Complex<f64>) -> f64 {
        let n = self.degree().unwrap_or(0) as i32;
        self.max_abs() * z.norm().max(1.0).powi(n)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}x", c.abs())?,
                _ => write!(f, "{}x^{}", c.abs(), i)?,
            }
        }
        Ok(())
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;

    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        UniPoly::raw(coeffs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;

    fn neg(self) -> UniPoly {
        UniPoly::raw(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;

    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;

    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return UniPoly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::raw(out)
    }
}

impl Mul for UniPoly {
    type Output = UniPoly;

    fn mul(self, rhs: UniPoly) -> UniPoly {
        &self * &rhs
    }
}

/// `xx·x² + xy·x·y + yy·y² + x·x + y·y + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateQuadratic {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub x: f64,
    pub y: f64,
    pub c: f64,
}

impl BivariateQuadratic {
    pub const fn new(xx: f64, xy: f64, yy: f64, x: f64, y: f64, c: f64) -> Self {
        BivariateQuadratic {
            xx,
            xy,
            yy,
            x,
            y,
            c,
        }
    }

    /// Coefficients in the order `[x², xy, y², x, y, 1]`.
    pub fn coefficients(&self) -> [f64; 6] {
        [self.xx, self.xy, self.yy, self.x, self.y, self.c]
    }

    pub fn from_coefficients(c: [f64; 6]) -> Self {
        BivariateQuadratic::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.xx * x * x + self.xy * x * y + self.yy * y * y + self.x * x + self.y * y + self.c
    }

    pub fn gradient(&self, x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(
            2.0 * self.xx * x + self.xy * y + self.x,
            self.xy * x + 2.0 * self.yy * y + self.y,
        )
    }

    /// `|f(x, y)|` divided by the sum of the absolute monomial terms.
    pub fn relative_residual(&self, x: f64, y: f64) -> f64 {
        let terms = [
            self.xx * x * x,
            self.xy * x * y,
            self.yy * y * y,
            self.x * x,
            self.y * y,
            self.c,
        ];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        let value: f64 = terms.iter().sum();
        if scale == 0.0 {
            0.0
        } else {
            value.abs() / scale
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|&c| c == 0.0)
    }

    /// Divides by the coefficient of largest magnitude, keeping its sign, so
    /// that conics equal up to scale become identical.
    pub fn normalized(&self) -> Self {
        let c = self.coefficients();
        let pivot = c
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot == 0.0 {
            return *self;
        }
        Self::from_coefficients(c.map(|v| v / pivot))
    }

    pub fn swap_xy(&self) -> Self {
        BivariateQuadratic::new(self.yy, self.xy, self.xx, self.y, self.x, self.c)
    }

    /// The polynomial viewed in `y` with coefficients in `x`:
    /// `[a0(x), a1(x), a2(x)]` such that `f = a2 y² + a1 y + a0`.
    pub fn y_coefficients(&self) -> [UniPoly; 3] {
        [
            UniPoly::raw(vec![self.c, self.x, self.xx]),
            UniPoly::raw(vec![self.y, self.xy]),
            UniPoly::raw(vec![self.yy]),
        ]
    }

    fn degree_in_y(&self) -> usize {
        if self.yy != 0.0 {
            2
        } else if self.xy != 0.0 || self.y != 0.0 {
            1
        } else {
            0
        }
    }

    /// Real roots of `f(x0, y) = 0` in `y`. A vanishing leading coefficient
    /// falls back to the linear formula and a slightly negative discriminant
    /// is read as tangency.
    pub fn solve_y(&self, x0: f64) -> Vec<f64> {
        let a2 = self.yy;
        let a1 = self.xy * x0 + self.y;
        let a0 = self.xx * x0 * x0 + self.x * x0 + self.c;
        let scale = a2.abs().max(a1.abs()).max(a0.abs());
        if scale == 0.0 {
            return Vec::new();
        }
        if a2.abs() <= 1e-12 * scale {
            if a1.abs() <= 1e-12 * scale {
                return Vec::new();
            }
            return vec![-a0 / a1];
        }
        let disc = a1 * a1 - 4.0 * a2 * a0;
        let disc_scale = a1 * a1 + (4.0 * a2 * a0).abs();
        if disc < 0.0 {
            if -disc <= 1e-10 * disc_scale {
                return vec![-a1 / (2.0 * a2)];
            }
            return Vec::new();
        }
        let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / a2, a0 / q]
    }
}

impl fmt::Display for BivariateQuadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x² + {}xy + {}y² + {}x + {}y + {}",
            self.xx, self.xy, self.yy, self.x, self.y, self.c
        )
    }
}

/// A root with its residual `|p(root)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex<f64>,
    pub residual: f64,
}

impl Root {
    pub fn is_real(&self) -> bool {
        self.value.im.abs() <= REAL_ROOT_TOLERANCE * (1.0 + self.value.re.abs())
    }
}

/// All complex roots of a polynomial, one per degree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Real parts of the roots that pass the real-root filter, ascending.
    pub fn real(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .roots
            .iter()
            .filter(|r| r.is_real())
            .map(|r| r.value.re)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

fn determinant(m: &[Vec<UniPoly>]) -> UniPoly {
    let n = m.len();
    match n {
        0 => UniPoly::constant(1.0),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = UniPoly::zero();
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<UniPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != col)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][col] * &determinant(&minor);
                acc = if col % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Sylvester matrix of `f` and `g` viewed as polynomials in `y`, with entries
/// that are polynomials in `x`.
pub fn sylvester_matrix_y(
    f: &BivariateQuadratic,
    g: &BivariateQuadratic,
) -> Result<Vec<Vec<UniPoly>>> {
    let (m, n) = (f.degree_in_y(), g.degree_in_y());
    if m == 0 || n == 0 {
        return Err(Error::DegenerateConic);
    }
    let fc = f.y_coefficients();
    let gc = g.y_coefficients();
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    // n shifted copies of f, then m shifted copies of g, highest power first
    for (deg, coeffs, copies) in [(m, &fc, n), (n, &gc, m)] {
        for shift in 0..copies {
            let mut row = vec![UniPoly::zero(); size];
            for k in 0..=deg {
                row[shift + k] = coeffs[deg - k].clone();
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Resultant of `f` and `g` with respect to `y`: a polynomial in `x` of degree
/// at most four, expanded symbolically from the Sylvester determinant.
pub fn sylvester_resultant_y(f: &BivariateQuadratic, g: &BivariateQuadratic) -> Result<UniPoly> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::InvalidInput("conic with all coefficients zero".into()));
    }
    let s = sylvester_matrix_y(f, g)?;
    let scale = (f.max_abs() * g.max_abs()).powi(2);
    let coeffs = determinant(&s)
        .coeffs
        .into_iter()
        .map(|c| if c.abs() <= 1e-14 * scale { 0.0 } else { c })
        .collect::<Vec<_>>();
    Ok(UniPoly::new(coeffs))
}

/// Roots of `p` as eigenvalues of its companion matrix, polished by Newton.
pub fn companion_roots(p: &UniPoly) -> Result<RootSet> {
    if p.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
    }
    let p = UniPoly::new(p.coeffs.clone());
    let n = match p.degree() {
        None => return Err(Error::InvalidInput("zero polynomial".into())),
        Some(0) => return Err(Error::NoRoots),
        Some(n) => n,
    };
    let lead = p.coeffs[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        companion[(i, i + 1)] = 1.0;
    }
    for i in 0..n {
        companion[(n - 1, i)] = -p.coeffs[i] / lead;
    }
    let eigen = companion.complex_eigenvalues();
    let dp = p.derivative();
    let roots = eigen
        .iter()
        .map(|&z0| {
            let z = polish(&p, &dp, z0);
            Root {
                value: z,
                residual: p.eval_complex(z).norm(),
            }
        })
        .collect();
    Ok(RootSet { roots })
}

fn polish(p: &UniPoly, dp: &UniPoly, mut z: Complex<f64>) -> Complex<f64> {
    let mut res = p.eval_complex(z).norm();
    for _ in 0..8 {
        if res == 0.0 {
            break;
        }
        let d = dp.eval_complex(z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - p.eval_complex(z) / d;
        let next_res = p.eval_complex(next).norm();
        if !(next_res < res) {
            break;
        }
        z = next;
        res = next_res;
    }
    z
}

fn refine_point(f: &BivariateQuadratic, g: &BivariateQuadratic, mut p: Vector2<f64>) -> Vector2<f64> {
    let residual = |q: &Vector2<f64>| f.eval(q.x, q.y).abs() + g.eval(q.x, q.y).abs();
    let mut res = residual(&p);
    for _ in 0..8 {
        if res == 0.0 {
            break;
        }
        let (gf, gg) = (f.gradient(p.x, p.y), g.gradient(p.x, p.y));
        let jac = Matrix2::new(gf.x, gf.y, gg.x, gg.y);
        let Some(inv) = jac.try_inverse() else { break };
        let step = inv * Vector2::new(f.eval(p.x, p.y), g.eval(p.x, p.y));
        let next = p - step;
        let next_res = residual(&next);
        if !(next_res < res) {
            break;
        }
        p = next;
        res = next_res;
    }
    p
}

/// Candidate acceptance before Newton polishing.
const PAIRING_TOLERANCE: f64 = 1e-6;
/// Acceptance of a polished intersection point.
const ACCEPT_TOLERANCE: f64 = 1e-8;
/// Intersection points closer than this (relative) are reported once.
const MERGE_TOLERANCE: f64 = 1e-6;

/// Real intersection points of two conics (at most four).
///
/// Eliminates `y`, takes the real roots `x_i` of the resultant, solves each
/// conic for `y` at `x_i` and keeps the values that satisfy both. When one
/// conic does not involve `y` the variables are swapped.
pub fn intersect_conics(f: &BivariateQuadratic, g: &BivariateQuadratic) -> Result<Vec<(f64, f64)>> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::InvalidInput("conic with all coefficients zero".into()));
    }
    let (f, g) = (f.normalized(), g.normalized());
    if f.degree_in_y() == 0 || g.degree_in_y() == 0 {
        let (fs, gs) = (f.swap_xy(), g.swap_xy());
        if fs.degree_in_y() == 0 || gs.degree_in_y() == 0 {
            return Err(Error::DegenerateConic);
        }
        let pts = intersect_normalized(&fs, &gs)?;
        return Ok(pts.into_iter().map(|(x, y)| (y, x)).collect());
    }
    intersect_normalized(&f, &g)
}

fn intersect_normalized(f: &BivariateQuadratic, g: &BivariateQuadratic) -> Result<Vec<(f64, f64)>> {
    let s = sylvester_matrix_y(f, g)?;
    let raw = determinant(&s);
    if raw.max_abs() <= 1e-14 {
        return Err(Error::CurvesCoincide);
    }
    let res = UniPoly::new(raw.coeffs);
    if res.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let xs = companion_roots(&res)?.real();

    let mut points: Vec<Vector2<f64>> = Vec::new();
    for &x in &xs {
        let ys = f.solve_y(x).into_iter().chain(g.solve_y(x));
        for y in ys {
            let scale = 1.0 + x * x + y * y;
            if f.eval(x, y).abs() > PAIRING_TOLERANCE * scale
                || g.eval(x, y).abs() > PAIRING_TOLERANCE * scale
            {
                continue;
            }
            let p = refine_point(f, g, Vector2::new(x, y));
            let scale = 1.0 + p.norm_squared();
            if f.eval(p.x, p.y).abs() > ACCEPT_TOLERANCE * scale
                || g.eval(p.x, p.y).abs() > ACCEPT_TOLERANCE * scale
            {
                continue;
            }
            // tangencies give clustered roots that polish to the same point
            if !points
                .iter()
                .any(|q| (q - p).norm() <= MERGE_TOLERANCE * (1.0 + p.norm()))
            {
                points.push(p);
            }
        }
    }
    points.truncate(4);
    Ok(points.into_iter().map(|p| (p.x, p.y)).collect())
}

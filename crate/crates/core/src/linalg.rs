//! Exact determinants and inverses of small symbolic matrices.

use crate::error::{Error, Result};
use crate::expr::Expr;

pub type Matrix = Vec<Vec<Expr>>;

fn check_square(m: &Matrix) -> Result<usize> {
    let n = m.len();
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: row.len() });
    }
    Ok(n)
}

/// Determinant by fraction-free (Bareiss) elimination.
///
/// Rows are first brought to polynomial form by multiplying with their
/// entries' denominators; those factors are divided back out at the end.
pub fn determinant(m: &Matrix) -> Result<Expr> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Expr::one());
    }
    let mut a: Matrix = Vec::with_capacity(n);
    let mut cleared: Vec<Expr> = Vec::new();
    for row in m {
        let parts: Vec<(Expr, Expr)> = row.iter().map(Expr::together).collect();
        let mut dens: Vec<Expr> = Vec::new();
        for (_, d) in &parts {
            if !d.is_one() && !dens.contains(d) {
                dens.push(d.clone());
            }
        }
        let new_row = parts
            .into_iter()
            .map(|(num, den)| {
                dens.iter()
                    .filter(|d| **d != den)
                    .fold(num, |acc, d| &acc * d)
            })
            .collect();
        a.push(new_row);
        cleared.extend(dens);
    }

    let mut sign = false;
    let mut prev = Expr::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = !sign;
                }
                None => return Ok(Expr::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let cross = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = match cross.exact_div(&prev) {
                    Some(q) => q,
                    None => &cross * &prev.recip().expect("nonzero Bareiss pivot"),
                };
            }
            a[i][k] = Expr::zero();
        }
        prev = a[k][k].clone();
    }
    let mut det = a[n - 1][n - 1].clone();
    if sign {
        det = -det;
    }
    for d in &cleared {
        det = &det * &d.recip().expect("denominators are nonzero");
    }
    Ok(det)
}

/// Determinant by Laplace expansion along the first row. Exponential; kept as
/// an independent check for small matrices.
pub fn cofactor_determinant(m: &Matrix) -> Result<Expr> {
    let n = check_square(m)?;
    Ok(laplace(m, &(0..n).collect::<Vec<_>>(), 0))
}

fn laplace(m: &Matrix, cols: &[usize], row: usize) -> Expr {
    if cols.is_empty() {
        return Expr::one();
    }
    let mut out = Expr::zero();
    for (pos, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = &m[row][c] * &laplace(m, &rest, row + 1);
        out = if pos % 2 == 0 { &out + &term } else { &out - &term };
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// A maximal minor: the selected row and column indices with its value.
#[derive(Clone, Debug, PartialEq)]
pub struct Minor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: Expr,
}

/// All maximal minors of a rectangular matrix (just the determinant when
/// square).
pub fn maximal_minors(m: &Matrix) -> Result<Vec<Minor>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some(row) = m.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
    }
    let k = rows.min(cols);
    let mut out = Vec::new();
    for rs in combinations(rows, k) {
        for cs in combinations(cols, k) {
            let sub: Matrix = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c].clone()).collect()).collect();
            out.push(Minor { rows: rs.clone(), cols: cs, value: determinant(&sub)? });
        }
    }
    Ok(out)
}

/// Inverse through the adjugate. Fails if the determinant is structurally 0.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let n = check_square(m)?;
    let det = determinant(m)?;
    let inv_det = det.recip().ok_or_else(|| Error::DivisionByZero("singular matrix".into()))?;
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let sub: Matrix = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let cof = determinant(&sub)?;
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            out[j][i] = &cof * &inv_det;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ZeroTest, Verdict};

    fn mat(rows: &[&[&str]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|s| parse(s).unwrap()).collect()).collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(&mat(&[&["a", "b"], &["c", "d"]])).unwrap(), parse("a*d - b*c").unwrap());
        assert_eq!(determinant(&mat(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]])).unwrap(), Expr::one());
        let m = mat(&[&["0", "x", "1"], &["y", "0", "2"], &["1", "1", "z"]]);
        assert_eq!(determinant(&m).unwrap(), cofactor_determinant(&m).unwrap());
        let singular = mat(&[&["x", "y"], &["2*x", "2*y"]]);
        assert!(determinant(&singular).unwrap().is_zero());
    }

    #[test]
    fn rational_entries() {
        let m = mat(&[&["1/x", "y"], &["1/(x + y)", "1"]]);
        let d = determinant(&m).unwrap();
        let expected = cofactor_determinant(&m).unwrap();
        assert_eq!(ZeroTest::default().check(&(&d - &expected)), Verdict::Zero);
    }

    #[test]
    fn inverse_of_metric() {
        let g = mat(&[&["1", "0"], &["0", "sin(t)^2"]]);
        let inv = inverse(&g).unwrap();
        assert_eq!(inv[1][1], parse("sin(t)^-2").unwrap());
        let m = mat(&[&["a", "b"], &["c", "d"]]);
        let inv = inverse(&m).unwrap();
        let zt = ZeroTest::default();
        for i in 0..2 {
            for j in 0..2 {
                let e: Expr = (0..2).map(|k| &m[i][k] * &inv[k][j]).sum();
                let target = if i == j { Expr::one() } else { Expr::zero() };
                assert_eq!(zt.check(&(&e - &target)), Verdict::Zero, "({i},{j})");
            }
        }
        assert!(inverse(&mat(&[&["x", "x"], &["x", "x"]])).is_err());
    }

    #[test]
    fn rectangular_minors() {
        let m = mat(&[&["1", "p", "q"], &["0", "1", "r"]]);
        let minors = maximal_minors(&m).unwrap();
        assert_eq!(minors.len(), 3);
        assert_eq!(minors[0].value, Expr::one());
        assert_eq!(minors[2].value, parse("p*r - q").unwrap());
    }
}

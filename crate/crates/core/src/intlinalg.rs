//! Exact integer-lattice algorithms: Smith normal form with full
//! transformation tracking, lattice saturation, and unimodular completions.
//!
//! Everything runs on arbitrary-precision integers; there is no floating
//! point anywhere in this module. The Smith normal form pivot rule (smallest
//! nonzero absolute value, ties by row-major position) makes the transform
//! matrices deterministic.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense integer matrix with exact entries, row-major storage.
///
/// Zero-dimensional matrices are permitted internally (empty relator sets
/// produce 0 x n exponent matrices); the JSON-facing constructors insist on
/// positive dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<IntMatrix> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        Ok(IntMatrix { rows: nrows, cols: ncols, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&e| BigInt::from(e)).collect()).collect(),
        )
        .expect("rectangular")
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Invalid(format!(
                "matrix product shape mismatch: {}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = IntMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a * rhs.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product on a column vector.
    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::Invalid("matrix-vector shape mismatch".into()));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect())
    }

    /// Row-vector action `v * self`.
    pub fn vec_mul(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.rows {
            return Err(Error::Invalid("vector-matrix shape mismatch".into()));
        }
        Ok((0..self.cols)
            .map(|j| (0..self.rows).map(|i| &v[i] * self.get(i, j)).sum())
            .collect())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() }
                })
            })
    }

    /// Exact determinant via Smith normal form.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Invalid("determinant of non-square matrix".into()));
        }
        let snf = smith_normal_form(self);
        let mut det = BigInt::from(snf.sign_u * snf.sign_v);
        for i in 0..self.rows {
            det *= snf.d.get(i, i);
        }
        Ok(det)
    }

    /// Inverse of a matrix in `GL_n(Z)`; `None` when the determinant is not
    /// a unit.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        if !self.is_square() {
            return None;
        }
        let snf = smith_normal_form(self);
        if !(0..self.rows).all(|i| snf.d.get(i, i).is_one()) {
            return None;
        }
        // M = U V here, so M^-1 = V^-1 U^-1.
        Some(snf.v_inv.mul(&snf.u_inv).expect("square"))
    }
}

/// Smith normal form `M = U * D * V` with unimodular `U`, `V`, their exact
/// inverses, and the diagonal divisor chain.
#[derive(Debug, Clone)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
    /// Signs of det(U) and det(V).
    pub sign_u: i8,
    pub sign_v: i8,
}

impl SnfResult {
    /// The nonzero diagonal entries, in chain order.
    pub fn divisors(&self) -> Vec<BigInt> {
        let n = self.d.nrows().min(self.d.ncols());
        (0..n)
            .map(|i| self.d.get(i, i).clone())
            .filter(|d| !d.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.divisors().len()
    }
}

struct SnfCalc {
    w: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
    sign_u: i8,
    sign_v: i8,
}

impl SnfCalc {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.w.cols {
            self.w.entries.swap(i * self.w.cols + c, j * self.w.cols + c);
        }
        for r in 0..self.u.rows {
            self.u.entries.swap(r * self.u.cols + i, r * self.u.cols + j);
        }
        for c in 0..self.u_inv.cols {
            self.u_inv.entries.swap(i * self.u_inv.cols + c, j * self.u_inv.cols + c);
        }
        self.sign_u = -self.sign_u;
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.w.rows {
            self.w.entries.swap(r * self.w.cols + i, r * self.w.cols + j);
        }
        for c in 0..self.v.cols {
            self.v.entries.swap(i * self.v.cols + c, j * self.v.cols + c);
        }
        for r in 0..self.v_inv.rows {
            self.v_inv.entries.swap(r * self.v_inv.cols + i, r * self.v_inv.cols + j);
        }
        self.sign_v = -self.sign_v;
    }

    /// `row_i += q * row_t` on the working matrix.
    fn add_row(&mut self, i: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.w.cols {
            let add = q * self.w.get(t, c);
            let cur = self.w.get(i, c) + add;
            self.w.set(i, c, cur);
        }
        for r in 0..self.u.rows {
            let sub = q * self.u.get(r, i);
            let cur = self.u.get(r, t) - sub;
            self.u.set(r, t, cur);
        }
        for c in 0..self.u_inv.cols {
            let add = q * self.u_inv.get(t, c);
            let cur = self.u_inv.get(i, c) + add;
            self.u_inv.set(i, c, cur);
        }
    }

    /// `col_j += q * col_t` on the working matrix.
    fn add_col(&mut self, j: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.w.rows {
            let add = q * self.w.get(r, t);
            let cur = self.w.get(r, j) + add;
            self.w.set(r, j, cur);
        }
        for c in 0..self.v.cols {
            let sub = q * self.v.get(j, c);
            let cur = self.v.get(t, c) - sub;
            self.v.set(t, c, cur);
        }
        for r in 0..self.v_inv.rows {
            let add = q * self.v_inv.get(r, t);
            let cur = self.v_inv.get(r, j) + add;
            self.v_inv.set(r, j, cur);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.w.cols {
            let cur = -self.w.get(i, c);
            self.w.set(i, c, cur);
        }
        for r in 0..self.u.rows {
            let cur = -self.u.get(r, i);
            self.u.set(r, i, cur);
        }
        for c in 0..self.u_inv.cols {
            let cur = -self.u_inv.get(i, c);
            self.u_inv.set(i, c, cur);
        }
        self.sign_u = -self.sign_u;
    }

    /// Smallest nonzero absolute value in the trailing submatrix, ties by
    /// row-major position.
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.w.rows {
            for j in t..self.w.cols {
                let e = self.w.get(i, j);
                if e.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.w.get(bi, bj).abs() <= e.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }
}

/// Computes the Smith normal form `M = U * D * V`: `U`, `V` unimodular and
/// `D` diagonal with non-negative entries satisfying `d_i | d_{i+1}`.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let mut calc = SnfCalc {
        w: m.clone(),
        u: IntMatrix::identity(m.rows),
        u_inv: IntMatrix::identity(m.rows),
        v: IntMatrix::identity(m.cols),
        v_inv: IntMatrix::identity(m.cols),
        sign_u: 1,
        sign_v: 1,
    };
    let limit = m.rows.min(m.cols);
    let mut t = 0;
    while t < limit {
        let Some((pi, pj)) = calc.find_pivot(t) else {
            break;
        };
        calc.swap_rows(t, pi);
        calc.swap_cols(t, pj);
        'reduce: loop {
            // Clear column t below the pivot. Any nonzero remainder is
            // strictly smaller than the pivot; promote it and restart.
            for i in t + 1..calc.w.rows {
                if calc.w.get(i, t).is_zero() {
                    continue;
                }
                let q = calc.w.get(i, t) / calc.w.get(t, t);
                calc.add_row(i, t, &(-q));
                if !calc.w.get(i, t).is_zero() {
                    calc.swap_rows(t, i);
                    continue 'reduce;
                }
            }
            for j in t + 1..calc.w.cols {
                if calc.w.get(t, j).is_zero() {
                    continue;
                }
                let q = calc.w.get(t, j) / calc.w.get(t, t);
                calc.add_col(j, t, &(-q));
                if !calc.w.get(t, j).is_zero() {
                    calc.swap_cols(t, j);
                    continue 'reduce;
                }
            }
            // Enforce the divisibility chain: fold a non-divisible entry
            // into row t and repeat.
            for i in t + 1..calc.w.rows {
                for j in t + 1..calc.w.cols {
                    if !(calc.w.get(i, j) % calc.w.get(t, t)).is_zero() {
                        calc.add_row(t, i, &BigInt::one());
                        continue 'reduce;
                    }
                }
            }
            break;
        }
        if calc.w.get(t, t).is_negative() {
            calc.negate_row(t);
        }
        t += 1;
    }
    SnfResult {
        u: calc.u,
        d: calc.w,
        v: calc.v,
        u_inv: calc.u_inv,
        v_inv: calc.v_inv,
        sign_u: calc.sign_u,
        sign_v: calc.sign_v,
    }
}

/// Extended gcd: returns `(g, x, y)` with `g = a*x + b*y` and `g >= 0`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        return match a.sign() {
            num_bigint::Sign::Minus => (-a, BigInt::from(-1), BigInt::zero()),
            num_bigint::Sign::NoSign => (BigInt::zero(), BigInt::zero(), BigInt::zero()),
            num_bigint::Sign::Plus => (a.clone(), BigInt::one(), BigInt::zero()),
        };
    }
    let (g, x1, y1) = extended_gcd(b, &(a % b));
    let y = x1 - (a / b) * &y1;
    (g, y1, y)
}

/// A sublattice of `Z^r` given by a generating list of row vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    ambient: usize,
    generators: Vec<Vec<BigInt>>,
}

impl Lattice {
    pub fn new(ambient: usize, generators: Vec<Vec<BigInt>>) -> Result<Lattice> {
        for g in &generators {
            if g.len() != ambient {
                return Err(Error::Invalid(format!(
                    "lattice generator has length {}, ambient rank is {ambient}",
                    g.len()
                )));
            }
        }
        Ok(Lattice { ambient, generators })
    }

    pub fn from_i64(ambient: usize, generators: &[&[i64]]) -> Lattice {
        Lattice::new(
            ambient,
            generators.iter().map(|g| g.iter().map(|&e| BigInt::from(e)).collect()).collect(),
        )
        .expect("lengths checked by caller")
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.generators
    }

    /// Exact membership of a row vector in the lattice.
    pub fn contains(&self, v: &[BigInt]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::Invalid("vector length differs from ambient rank".into()));
        }
        if self.generators.is_empty() {
            return Ok(v.iter().all(BigInt::is_zero));
        }
        let g = IntMatrix::from_rows(self.generators.clone())?;
        let snf = smith_normal_form(&g);
        // x * G = v  <=>  y * D = v * V^-1 for y = x * U.
        let w = snf.v_inv.vec_mul(v)?;
        let limit = g.nrows().min(g.ncols());
        for (j, wj) in w.iter().enumerate() {
            if j < limit && !snf.d.get(j, j).is_zero() {
                if !(wj % snf.d.get(j, j)).is_zero() {
                    return Ok(false);
                }
            } else if !wj.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn rank(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        let g = IntMatrix::from_rows(self.generators.clone()).expect("validated");
        smith_normal_form(&g).rank()
    }
}

/// The saturation of a lattice: basis of the closure, a complementary basis
/// of the quotient, and the index of the input span inside the closure.
#[derive(Debug, Clone)]
pub struct Saturation {
    pub basis: Vec<Vec<BigInt>>,
    pub complement: Vec<Vec<BigInt>>,
    pub index: BigInt,
}

impl Saturation {
    pub fn closure(&self, ambient: usize) -> Lattice {
        Lattice::new(ambient, self.basis.clone()).expect("basis rows have ambient length")
    }
}

/// Computes the saturation `{v : every integer functional killing L kills
/// v}` via the Smith normal form of the generator matrix. The quotient of
/// the ambient lattice by the result is torsion-free, and the input span has
/// the reported finite index in the result.
pub fn saturation(l: &Lattice) -> Saturation {
    if l.generators.is_empty() {
        let complement =
            (0..l.ambient).map(|i| unit_vector(l.ambient, i)).collect();
        return Saturation { basis: Vec::new(), complement, index: BigInt::one() };
    }
    let g = IntMatrix::from_rows(l.generators.clone()).expect("validated");
    let snf = smith_normal_form(&g);
    let divisors = snf.divisors();
    let s = divisors.len();
    let basis = (0..s).map(|i| snf.v.row(i)).collect();
    let complement = (s..l.ambient).map(|i| snf.v.row(i)).collect();
    let index = divisors.into_iter().product();
    Saturation { basis, complement, index }
}

fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

/// Completes a nonzero integer tuple `k` to a unimodular matrix: returns
/// `(alpha, d)` with `d = gcd(k)`, `k * alpha = (d, 0, ..., 0)` as a
/// row-vector action, and `det(alpha) = +-1`. Columns `2..n` of `alpha`
/// span the kernel of `v -> <k, v>`.
pub fn unimodular_extend(k: &[BigInt]) -> Result<(IntMatrix, BigInt)> {
    if k.is_empty() || k.iter().all(BigInt::is_zero) {
        return Err(Error::Invalid("unimodular_extend requires a nonzero tuple".into()));
    }
    let n = k.len();
    if n == 1 {
        let d = k[0].abs();
        let sign = if k[0].is_negative() { -BigInt::one() } else { BigInt::one() };
        let mut alpha = IntMatrix::zero(1, 1);
        alpha.set(0, 0, sign);
        return Ok((alpha, d));
    }
    // Reduce the tail recursively, then fold the head in with one 2x2 block.
    let tail = &k[1..];
    let (beta, g2) = if tail.iter().all(BigInt::is_zero) {
        (IntMatrix::identity(n - 1), BigInt::zero())
    } else {
        unimodular_extend(tail)?
    };
    let mut embedded = IntMatrix::zero(n, n);
    embedded.set(0, 0, BigInt::one());
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            embedded.set(i + 1, j + 1, beta.get(i, j).clone());
        }
    }
    let block = if g2.is_zero() {
        let mut b = IntMatrix::identity(n);
        let sign = if k[0].is_negative() { -BigInt::one() } else { BigInt::one() };
        b.set(0, 0, sign);
        b
    } else {
        let (g, x, y) = extended_gcd(&k[0], &g2);
        let mut b = IntMatrix::identity(n);
        b.set(0, 0, x);
        b.set(0, 1, &g2 / &g);
        b.set(1, 0, y);
        b.set(1, 1, -(&k[0] / &g));
        b
    };
    let alpha = embedded.mul(&block)?;
    let d = alpha
        .col(0)
        .iter()
        .zip(k)
        .map(|(c, ki)| c * ki)
        .sum::<BigInt>();
    Ok((alpha, d))
}

pub fn bigints(values: &[i64]) -> Vec<BigInt> {
    values.iter().map(|&v| BigInt::from(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_snf_contract(m: &IntMatrix) {
        let snf = smith_normal_form(m);
        let rebuilt = snf.u.mul(&snf.d).unwrap().mul(&snf.v).unwrap();
        assert_eq!(&rebuilt, m, "U*D*V must reconstruct M");
        assert!(snf.u.mul(&snf.u_inv).unwrap().is_identity());
        assert!(snf.v.mul(&snf.v_inv).unwrap().is_identity());
        assert_eq!(snf.u.det().unwrap().abs(), BigInt::one());
        assert_eq!(snf.v.det().unwrap().abs(), BigInt::one());
        let n = m.nrows().min(m.ncols());
        for i in 0..n {
            assert!(!snf.d.get(i, i).is_negative());
            if i + 1 < n && !snf.d.get(i, i).is_zero() {
                let next = snf.d.get(i + 1, i + 1);
                assert!(
                    (next % snf.d.get(i, i)).is_zero(),
                    "divisibility chain broken at {i}"
                );
            }
            if snf.d.get(i, i).is_zero() && i + 1 < n {
                assert!(snf.d.get(i + 1, i + 1).is_zero());
            }
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    assert!(snf.d.get(i, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn snf_of_identity_is_identity() {
        let m = IntMatrix::identity(3);
        let snf = smith_normal_form(&m);
        assert!(snf.d.is_identity());
        assert!(snf.u.is_identity());
        assert!(snf.v.is_identity());
    }

    #[test]
    fn snf_of_the_2x2_example() {
        let m = IntMatrix::from_i64_rows(&[&[2, 4], &[6, 8]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.d.get(0, 0), &BigInt::from(2));
        assert_eq!(snf.d.get(1, 1), &BigInt::from(4));
        check_snf_contract(&m);
    }

    #[test]
    fn snf_of_zero_matrix_is_zero() {
        let m = IntMatrix::zero(2, 3);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.d, IntMatrix::zero(2, 3));
        assert!(snf.u.is_identity());
        assert!(snf.v.is_identity());
    }

    #[test]
    fn determinant_of_small_matrices() {
        let m = IntMatrix::from_i64_rows(&[&[2, 4], &[6, 8]]);
        assert_eq!(m.det().unwrap(), BigInt::from(-8));
        let m = IntMatrix::from_i64_rows(&[&[2, 5], &[-1, -3]]);
        assert_eq!(m.det().unwrap(), BigInt::from(-1));
        assert_eq!(IntMatrix::identity(4).det().unwrap(), BigInt::one());
    }

    #[test]
    fn unimodular_inverse_round_trips() {
        let m = IntMatrix::from_i64_rows(&[&[2, 5], &[-1, -3]]);
        let inv = m.inverse_unimodular().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&m).unwrap().is_identity());
        let m = IntMatrix::from_i64_rows(&[&[2, 0], &[0, 1]]);
        assert!(m.inverse_unimodular().is_none());
    }

    #[test]
    fn saturation_of_2_0_in_z2() {
        let l = Lattice::from_i64(2, &[&[2, 0]]);
        let sat = saturation(&l);
        assert_eq!(sat.basis, vec![bigints(&[1, 0])]);
        assert_eq!(sat.index, BigInt::from(2));
        assert_eq!(sat.complement, vec![bigints(&[0, 1])]);
    }

    #[test]
    fn saturation_of_primitive_vector_is_itself() {
        let l = Lattice::from_i64(2, &[&[1, 0]]);
        let sat = saturation(&l);
        assert_eq!(sat.basis, vec![bigints(&[1, 0])]);
        assert_eq!(sat.index, BigInt::one());
    }

    #[test]
    fn saturation_of_empty_lattice_is_zero() {
        let l = Lattice::from_i64(2, &[]);
        let sat = saturation(&l);
        assert!(sat.basis.is_empty());
        assert_eq!(sat.index, BigInt::one());
        assert_eq!(sat.complement.len(), 2);
    }

    #[test]
    fn saturation_is_idempotent() {
        for gens in [
            vec![vec![2i64, 0]],
            vec![vec![2, 4], vec![6, 8]],
            vec![vec![3, 6], vec![0, 0]],
        ] {
            let rows: Vec<&[i64]> = gens.iter().map(Vec::as_slice).collect();
            let l = Lattice::from_i64(2, &rows);
            let sat = saturation(&l);
            let closed = sat.closure(2);
            let again = saturation(&closed);
            assert_eq!(again.index, BigInt::one());
            for b in &sat.basis {
                assert!(again.closure(2).contains(b).unwrap());
            }
            for b in &again.basis {
                assert!(closed.contains(b).unwrap());
            }
        }
    }

    #[test]
    fn lattice_membership() {
        let l = Lattice::from_i64(2, &[&[2, 0], &[0, 3]]);
        assert!(l.contains(&bigints(&[2, 3])).unwrap());
        assert!(l.contains(&bigints(&[4, -3])).unwrap());
        assert!(!l.contains(&bigints(&[1, 0])).unwrap());
        assert!(!l.contains(&bigints(&[0, 1])).unwrap());
        assert!(l.contains(&bigints(&[0, 0])).unwrap());
    }

    #[test]
    fn extend_of_unit_vector_is_identity() {
        let (alpha, d) = unimodular_extend(&bigints(&[1, 0, 0])).unwrap();
        assert!(alpha.is_identity());
        assert_eq!(d, BigInt::one());
    }

    #[test]
    fn extend_of_3_5_matches_the_frozen_matrix() {
        let (alpha, d) = unimodular_extend(&bigints(&[3, 5])).unwrap();
        assert_eq!(alpha, IntMatrix::from_i64_rows(&[&[2, 5], &[-1, -3]]));
        assert_eq!(d, BigInt::one());
    }

    #[test]
    fn extend_of_4_6_has_gcd_2() {
        let k = bigints(&[4, 6]);
        let (alpha, d) = unimodular_extend(&k).unwrap();
        assert_eq!(d, BigInt::from(2));
        let action = alpha.vec_mul(&k).unwrap();
        assert_eq!(action, bigints(&[2, 0]));
        assert_eq!(alpha.det().unwrap().abs(), BigInt::one());
    }

    #[test]
    fn extended_gcd_conventions() {
        let (g, x, y) = extended_gcd(&BigInt::from(3), &BigInt::from(5));
        assert_eq!((g, x, y), (BigInt::from(1), BigInt::from(2), BigInt::from(-1)));
        let (g, x, y) = extended_gcd(&BigInt::from(-4), &BigInt::from(6));
        assert_eq!(&g, &BigInt::from(2));
        assert_eq!(g, BigInt::from(-4) * x + BigInt::from(6) * y);
    }

    fn arb_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
            prop::collection::vec(-20i64..=20, r * c).prop_map(move |vals| {
                let rows: Vec<Vec<BigInt>> = vals
                    .chunks(c)
                    .map(|chunk| chunk.iter().map(|&v| BigInt::from(v)).collect())
                    .collect();
                IntMatrix::from_rows(rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn snf_contract_holds_on_random_matrices(m in arb_matrix()) {
            check_snf_contract(&m);
        }

        #[test]
        fn unimodular_extend_postconditions(
            vals in prop::collection::vec(-30i64..=30, 1..=5)
        ) {
            let k = bigints(&vals);
            prop_assume!(!k.iter().all(BigInt::is_zero));
            let (alpha, d) = unimodular_extend(&k).unwrap();
            prop_assert_eq!(alpha.det().unwrap().abs(), BigInt::one());
            let action = alpha.vec_mul(&k).unwrap();
            prop_assert!(d > BigInt::zero());
            prop_assert_eq!(&action[0], &d);
            for entry in &action[1..] {
                prop_assert!(entry.is_zero());
            }
        }

        #[test]
        fn saturation_contains_its_input(
            vals in prop::collection::vec(-3i64..=3, 1..=9)
        ) {
            let r = 3usize;
            let rows: Vec<Vec<BigInt>> = vals.chunks(r)
                .filter(|c| c.len() == r)
                .map(|c| c.iter().map(|&v| BigInt::from(v)).collect())
                .collect();
            prop_assume!(!rows.is_empty());
            let l = Lattice::new(r, rows.clone()).unwrap();
            let sat = saturation(&l);
            let closure = sat.closure(r);
            for g in &rows {
                prop_assert!(closure.contains(g).unwrap());
            }
            prop_assert!(sat.index > BigInt::zero());
        }
    }
}

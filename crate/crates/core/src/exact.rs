//! Exact linear algebra over the integers and rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Incrementally maintained row-echelon basis with integer rows.
///
/// Rows are reduced fraction-free and divided by their content, so entries
/// stay primitive. The rank equals the number of stored rows.
#[derive(Debug, Clone, Default)]
pub struct EchelonBasis {
    width: usize,
    // sorted by pivot column
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl EchelonBasis {
    pub fn new(width: usize) -> Self {
        Self { width, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; returns true when it was independent of the basis.
    pub fn insert(&mut self, row: &[i64]) -> bool {
        assert_eq!(row.len(), self.width);
        if self.rows.len() == self.width {
            return false;
        }
        let mut v: Vec<BigInt> = row.iter().map(|&x| BigInt::from(x)).collect();
        for (pivot, b) in &self.rows {
            let c = &v[*pivot];
            if c.is_zero() {
                continue;
            }
            let bp = &b[*pivot];
            let g = c.gcd(bp);
            let fv = bp / &g;
            let fb = c / &g;
            for (x, y) in v.iter_mut().zip(b.iter()) {
                *x = &*x * &fv - y * &fb;
            }
            normalize(&mut v);
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(p) => {
                let at = self.rows.partition_point(|(q, _)| *q < p);
                self.rows.insert(at, (p, v));
                true
            }
        }
    }
}

fn normalize(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// Rank of an integer matrix, exactly.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let mut basis = EchelonBasis::new(first.len());
    for r in rows {
        basis.insert(r);
    }
    basis.rank()
}

pub type RatMatrix = Vec<Vec<BigRational>>;

/// Determinant by rational Gaussian elimination.
pub fn determinant(m: &RatMatrix) -> BigRational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Coefficients `c_0..c_n` of `det(x I - M) = sum c_i x^i` (Faddeev-LeVerrier).
pub fn characteristic_polynomial(m: &RatMatrix) -> Vec<BigRational> {
    let n = m.len();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    // M_k = M * M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(M M_k)/k
    let mut mk: RatMatrix = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        let mut next = mat_mul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        mk = next;
        let amk = mat_mul(m, &mk);
        let tr: BigRational = (0..n).map(|i| amk[i][i].clone()).sum();
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    coeffs
}

fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

/// Evaluates a polynomial given by ascending coefficients.
pub fn poly_eval(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

//! Banded LU factorization with partial pivoting and a Thomas solver.
//!
//! The high-order transport system couples each cell's edge unknowns to one
//! neighbor block, so the assembled matrix is banded with half-bandwidths of
//! a few times the quadrature order. Factoring once per operator and reusing
//! the factors across iterations keeps the per-iteration cost at O(n * band).

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    /// A zero pivot at the given elimination step; the system is singular.
    SingularPivot(usize),
    /// Entry written outside the declared band.
    OutOfBand { row: usize, col: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::SingularPivot(i) => write!(f, "singular system: zero pivot at index {i}"),
            LinalgError::OutOfBand { row, col } => {
                write!(f, "entry ({row}, {col}) lies outside the declared band")
            }
        }
    }
}

impl std::error::Error for LinalgError {}

/// Band matrix in LAPACK-style storage: entry (i, j) lives at
/// `ab[j * ldab + kl + ku + i - j]`. An extra `kl` rows of headroom above the
/// declared band absorb fill-in from row interchanges during factorization.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    /// Add `v` to entry (i, j). Fails if the entry is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<(), LinalgError> {
        let (id, jd) = (i as isize, j as isize);
        if jd - id > self.ku as isize || id - jd > self.kl as isize || i >= self.n || j >= self.n {
            return Err(LinalgError::OutOfBand { row: i, col: j });
        }
        let s = self.slot(i, j);
        self.ab[s] += v;
        Ok(())
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (id, jd) = (i as isize, j as isize);
        if jd - id > (self.ku + self.kl) as isize || id - jd > self.kl as isize {
            return 0.0;
        }
        self.ab[self.slot(i, j)]
    }

    /// y = A x using only entries inside the declared band.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.slot(i, j)] * x[j];
            }
        }
        y
    }

    /// LU factorization with partial pivoting (row interchanges), in place.
    pub fn factor(mut self) -> Result<BandLu, LinalgError> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku; // upper bandwidth of U after pivoting
        let mut piv = vec![0usize; n];
        for j in 0..n {
            let pmax = (j + kl).min(n - 1);
            let mut p = j;
            let mut pval = self.get(j, j).abs();
            for i in (j + 1)..=pmax {
                let v = self.get(i, j).abs();
                if v > pval {
                    p = i;
                    pval = v;
                }
            }
            if pval == 0.0 {
                return Err(LinalgError::SingularPivot(j));
            }
            piv[j] = p;
            let cmax = (j + kv).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let sa = self.slot(j, c);
                    let sb = self.slot(p, c);
                    self.ab.swap(sa, sb);
                }
            }
            let diag = self.ab[self.slot(j, j)];
            for i in (j + 1)..=pmax {
                let s = self.slot(i, j);
                let m = self.ab[s] / diag;
                self.ab[s] = m;
                if m != 0.0 {
                    for c in (j + 1)..=cmax {
                        let sj = self.slot(j, c);
                        let si = self.slot(i, c);
                        self.ab[si] -= m * self.ab[sj];
                    }
                }
            }
        }
        Ok(BandLu { mat: self, piv })
    }
}

/// Factored band matrix; `solve` applies the stored permutation, L, and U.
#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.mat.n;
        assert_eq!(b.len(), n);
        let kl = self.mat.kl;
        let kv = self.mat.kl + self.mat.ku;
        for j in 0..n {
            if self.piv[j] != j {
                b.swap(j, self.piv[j]);
            }
            let bj = b[j];
            if bj != 0.0 {
                let imax = (j + kl).min(n - 1);
                for i in (j + 1)..=imax {
                    b[i] -= self.mat.ab[self.mat.slot(i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let cmax = (j + kv).min(n - 1);
            let mut s = b[j];
            for c in (j + 1)..=cmax {
                s -= self.mat.ab[self.mat.slot(j, c)] * b[c];
            }
            b[j] = s / self.mat.ab[self.mat.slot(j, j)];
        }
    }
}

/// Solve a tridiagonal system by the Thomas algorithm.
///
/// `sub[0]` and `sup[n-1]` are ignored. Returns the pivot index on a zero
/// pivot; the elimination is pivotless, which is the standard trade for the
/// near-diagonally-dominant systems assembled here.
pub fn thomas_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let n = diag.len();
    assert!(n > 0);
    assert_eq!(sub.len(), n);
    assert_eq!(sup.len(), n);
    assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(LinalgError::SingularPivot(0));
    }
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        if den == 0.0 {
            return Err(LinalgError::SingularPivot(i));
        }
        if i + 1 < n {
            c[i] = sup[i] / den;
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    // deterministic pseudo-random stream, good enough for test matrices
    struct Lcg(u64);
    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
    }

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> (BandMatrix, DMatrix<f64>) {
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::zeros(n, n);
        let mut rng = Lcg(seed);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = if i == j { 4.0 + rng.next_f64() } else { rng.next_f64() };
                band.add(i, j, v).unwrap();
                dense[(i, j)] = v;
            }
        }
        (band, dense)
    }

    #[test]
    fn band_solve_matches_dense_lu() {
        for (n, kl, ku, seed) in [(40usize, 5usize, 3usize, 1u64), (61, 2, 7, 2), (30, 9, 9, 3)] {
            let (band, dense) = random_band(n, kl, ku, seed);
            let mut rng = Lcg(seed + 99);
            let b: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let lu = band.factor().unwrap();
            let mut x = b.clone();
            lu.solve(&mut x);
            let xd = dense
                .lu()
                .solve(&nalgebra::DVector::from_vec(b.clone()))
                .expect("dense solve");
            for i in 0..n {
                assert!(
                    (x[i] - xd[i]).abs() < 1e-10,
                    "n={n} kl={kl} ku={ku} i={i}: {} vs {}",
                    x[i],
                    xd[i]
                );
            }
        }
    }

    #[test]
    fn band_needs_pivoting_case() {
        // zero on the diagonal forces a row interchange
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.add(0, 0, 0.0).unwrap();
        band.add(0, 1, 2.0).unwrap();
        band.add(1, 0, 1.0).unwrap();
        band.add(1, 1, 1.0).unwrap();
        band.add(1, 2, 1.0).unwrap();
        band.add(2, 1, 3.0).unwrap();
        band.add(2, 2, 1.0).unwrap();
        let lu = band.factor().unwrap();
        // A = [[0,2,0],[1,1,1],[0,3,1]], b = [2, 3, 4] -> x = [1, 1, 1]
        let mut x = vec![2.0, 3.0, 4.0];
        lu.solve(&mut x);
        for v in &x {
            assert!((v - 1.0).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn band_reports_singularity() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        // column 1 is identically zero
        band.add(0, 0, 1.0).unwrap();
        band.add(1, 1, 0.0).unwrap();
        band.add(2, 2, 1.0).unwrap();
        match band.factor() {
            Err(LinalgError::SingularPivot(j)) => assert_eq!(j, 1),
            other => panic!("expected singular pivot, got {other:?}"),
        }
    }

    #[test]
    fn band_rejects_out_of_band_writes() {
        let mut band = BandMatrix::zeros(5, 1, 1);
        assert_eq!(band.add(0, 3, 1.0), Err(LinalgError::OutOfBand { row: 0, col: 3 }));
    }

    #[test]
    fn matvec_matches_dense() {
        let (band, dense) = random_band(25, 3, 4, 17);
        let mut rng = Lcg(4);
        let x: Vec<f64> = (0..25).map(|_| rng.next_f64()).collect();
        let y = band.matvec(&x);
        let yd = &dense * nalgebra::DVector::from_vec(x);
        for i in 0..25 {
            assert!((y[i] - yd[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn thomas_identity() {
        let x = thomas_solve(&[0.0; 4], &[1.0; 4], &[0.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn thomas_matches_dense_on_dominant_system() {
        let n = 50;
        let mut rng = Lcg(7);
        let sub: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let sup: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let diag: Vec<f64> = (0..n).map(|_| 3.0 + rng.next_f64()).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = diag[i];
            if i > 0 {
                dense[(i, i - 1)] = sub[i];
            }
            if i + 1 < n {
                dense[(i, i + 1)] = sup[i];
            }
        }
        let x = thomas_solve(&sub, &diag, &sup, &rhs).unwrap();
        let xd = dense.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn thomas_reports_pivot_index() {
        match thomas_solve(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]) {
            Err(LinalgError::SingularPivot(1)) => {}
            other => panic!("expected pivot error at 1, got {other:?}"),
        }
    }
}

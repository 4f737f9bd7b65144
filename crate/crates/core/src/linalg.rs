//! Dense Hermitian eigensolver and small matrix helpers.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix. Real symmetric input takes the cheaper real path.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::input("eigendecomposition of a non-square matrix"));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let real = m.iter().all(|z| z.im == 0.0);
    if real {
        let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let eig = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::input(format!("eigendecomposition failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let u = eig.U();
        let values = (0..n).map(|i| s[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| C64::new(u[(i, j)], 0.0));
        Ok((values, vectors))
    } else {
        let a = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
        let eig = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::input(format!("eigendecomposition failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let u = eig.U();
        let values = (0..n).map(|i| s[i].re).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
        Ok((values, vectors))
    }
}

/// Largest entry of `|M − M†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let d = u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols());
    max_abs(&d)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest `q` with `2^q ≥ k`.
pub fn ceil_log2(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// `⟨a|b⟩`.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `M` zero-padded to `dim × dim`.
pub fn zero_pad(m: &CMatrix, dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// JSON form of a complex matrix: `{"rows", "cols", "re", "im"}` with the
/// parts stored row-major.
pub mod matrix_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::{CMatrix, C64};

    #[derive(Serialize, Deserialize)]
    pub(crate) struct Repr {
        rows: usize,
        cols: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    }

    pub(crate) fn to_repr(m: &CMatrix) -> Repr {
        let cells = || (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]));
        Repr {
            rows: m.nrows(),
            cols: m.ncols(),
            re: cells().map(|z| z.re).collect(),
            im: cells().map(|z| z.im).collect(),
        }
    }

    pub(crate) fn from_repr(r: Repr) -> Result<CMatrix, String> {
        let n = r.rows * r.cols;
        if r.re.len() != n || r.im.len() != n {
            return Err(format!(
                "matrix {}x{} needs {n} entries, got {} real and {} imaginary",
                r.rows,
                r.cols,
                r.re.len(),
                r.im.len()
            ));
        }
        Ok(CMatrix::from_fn(r.rows, r.cols, |i, j| {
            C64::new(r.re[i * r.cols + j], r.im[i * r.cols + j])
        }))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        from_repr(Repr::deserialize(d)?).map_err(serde::de::Error::custom)
    }

    /// The same encoding for a list of matrices.
    pub mod list {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
            ms.iter().map(to_repr).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
            Vec::<Repr>::deserialize(d)?
                .into_iter()
                .map(|r| from_repr(r).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// JSON form of a complex vector as separate real and imaginary arrays.
pub mod vector_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::C64;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        re: Vec<f64>,
        im: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        Repr {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let r = Repr::deserialize(d)?;
        if r.re.len() != r.im.len() {
            return Err(serde::de::Error::custom("real and imaginary parts differ in length"));
        }
        Ok(r.re.iter().zip(&r.im).map(|(a, b)| C64::new(*a, *b)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        let got: Vec<usize> = [1, 2, 3, 4, 7, 8, 9, 13, 37, 85, 181]
            .iter()
            .map(|&k| ceil_log2(k))
            .collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 4, 6, 7, 8]);
    }

    #[test]
    fn eigen_reconstructs_complex_hermitian() {
        let m = CMatrix::from_fn(3, 3, |i, j| {
            let base = C64::new((i + 2 * j) as f64, (i as f64) - (j as f64));
            if i == j {
                C64::new(base.re, 0.0)
            } else {
                base
            }
        });
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let back = &vecs * d * vecs.adjoint();
        assert!(max_abs(&(back - &h)) < 1e-12);
        assert!(unitarity_error(&vecs) < 1e-12);
    }

    #[test]
    fn matrix_json_round_trip() {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct W(#[serde(with = "matrix_json")] CMatrix);
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64 - 0.5));
        let text = serde_json::to_string(&W(m.clone())).unwrap();
        assert!(text.contains("\"rows\":2"));
        let W(back) = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<W>(r#"{"rows":1,"cols":2,"re":[1],"im":[0]}"#).is_err());
    }
}

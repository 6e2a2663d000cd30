//! Dense complex linear algebra built on the system BLAS/LAPACK.
//!
//! Everything in the exact-diagonalization path works with dense
//! `Array2<Complex64>` matrices. Hermitian eigendecompositions, singular
//! values and matrix products are delegated to LAPACK/BLAS, with an
//! automatic dispatch to the real (`dsyevd`/`dgemm`/`dgesdd`) routines
//! whenever a matrix has exactly vanishing imaginary part, which is the
//! common case for the model catalog.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the exact-diagonalization path.
pub type CMat = Array2<Complex64>;
/// Dense complex vector.
pub type CVec = Array1<Complex64>;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

#[allow(clippy::too_many_arguments)]
mod ffi {
    use num_complex::Complex64;
    extern "C" {
        pub fn dsyevd_(
            jobz: *const u8,
            uplo: *const u8,
            n: *const i32,
            a: *mut f64,
            lda: *const i32,
            w: *mut f64,
            work: *mut f64,
            lwork: *const i32,
            iwork: *mut i32,
            liwork: *const i32,
            info: *mut i32,
        );
        pub fn zheevd_(
            jobz: *const u8,
            uplo: *const u8,
            n: *const i32,
            a: *mut Complex64,
            lda: *const i32,
            w: *mut f64,
            work: *mut Complex64,
            lwork: *const i32,
            rwork: *mut f64,
            lrwork: *const i32,
            iwork: *mut i32,
            liwork: *const i32,
            info: *mut i32,
        );
        pub fn dgemm_(
            transa: *const u8,
            transb: *const u8,
            m: *const i32,
            n: *const i32,
            k: *const i32,
            alpha: *const f64,
            a: *const f64,
            lda: *const i32,
            b: *const f64,
            ldb: *const i32,
            beta: *const f64,
            c: *mut f64,
            ldc: *const i32,
        );
        pub fn zgemm_(
            transa: *const u8,
            transb: *const u8,
            m: *const i32,
            n: *const i32,
            k: *const i32,
            alpha: *const Complex64,
            a: *const Complex64,
            lda: *const i32,
            b: *const Complex64,
            ldb: *const i32,
            beta: *const Complex64,
            c: *mut Complex64,
            ldc: *const i32,
        );
        pub fn dgesdd_(
            jobz: *const u8,
            m: *const i32,
            n: *const i32,
            a: *mut f64,
            lda: *const i32,
            s: *mut f64,
            u: *mut f64,
            ldu: *const i32,
            vt: *mut f64,
            ldvt: *const i32,
            work: *mut f64,
            lwork: *const i32,
            iwork: *mut i32,
            info: *mut i32,
        );
        pub fn zgesdd_(
            jobz: *const u8,
            m: *const i32,
            n: *const i32,
            a: *mut Complex64,
            lda: *const i32,
            s: *mut f64,
            u: *mut Complex64,
            ldu: *const i32,
            vt: *mut Complex64,
            ldvt: *const i32,
            work: *mut Complex64,
            lwork: *const i32,
            rwork: *mut f64,
            iwork: *mut i32,
            info: *mut i32,
        );
    }
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend; the k-th
/// column of `vectors` is the eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

fn is_exactly_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Hermitian eigendecomposition via `zheevd`, with a `dsyevd` fast path for
/// matrices that are exactly real.
pub fn eigh(m: &CMat) -> Result<Eigh> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!(
            "eigh expects square, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::Shape("eigh on empty matrix".into()));
    }
    if is_exactly_real(m) {
        return eigh_real(m);
    }
    let ni = n as i32;
    // The row-major buffer read column-major is the transpose; for a
    // Hermitian matrix that is the conjugate, so the returned vectors are
    // conjugated and we undo that below.
    let mut a: Vec<Complex64> = m.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info: i32 = 0;
    let (jobz, uplo) = (b'V', b'L');
    unsafe {
        let mut wk = C_ZERO;
        let mut rwk = 0.0f64;
        let mut iwk = 0i32;
        let m1 = -1i32;
        ffi::zheevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wk,
            &m1,
            &mut rwk,
            &m1,
            &mut iwk,
            &m1,
            &mut info,
        );
        if info != 0 {
            return Err(Error::Eigensolver(info));
        }
        let lwork = wk.re as i32;
        let lrwork = rwk as i32;
        let liwork = iwk;
        let mut work = vec![C_ZERO; lwork.max(1) as usize];
        let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
        let mut iwork = vec![0i32; liwork.max(1) as usize];
        ffi::zheevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    let mut vectors = CMat::zeros((n, n));
    for k in 0..n {
        for i in 0..n {
            // conj undoes the transpose-as-conjugate marshaling
            vectors[(i, k)] = a[k * n + i].conj();
        }
    }
    Ok(Eigh { values: w, vectors })
}

fn eigh_real(m: &CMat) -> Result<Eigh> {
    let n = m.nrows();
    let ni = n as i32;
    let mut a: Vec<f64> = m.iter().map(|z| z.re).collect();
    let mut w = vec![0.0f64; n];
    let mut info: i32 = 0;
    let (jobz, uplo) = (b'V', b'L');
    unsafe {
        let mut wk = 0.0f64;
        let mut iwk = 0i32;
        let m1 = -1i32;
        ffi::dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wk,
            &m1,
            &mut iwk,
            &m1,
            &mut info,
        );
        if info != 0 {
            return Err(Error::Eigensolver(info));
        }
        let lwork = wk as i32;
        let liwork = iwk;
        let mut work = vec![0.0f64; lwork.max(1) as usize];
        let mut iwork = vec![0i32; liwork.max(1) as usize];
        ffi::dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    let mut vectors = CMat::zeros((n, n));
    for k in 0..n {
        for i in 0..n {
            vectors[(i, k)] = Complex64::new(a[k * n + i], 0.0);
        }
    }
    Ok(Eigh { values: w, vectors })
}

/// `a * b` via BLAS gemm (real fast path when both factors are exactly real).
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (r, k) = (a.nrows(), a.ncols());
    let (k2, c) = (b.nrows(), b.ncols());
    assert_eq!(k, k2, "matmul inner dimension mismatch");
    if r == 0 || c == 0 || k == 0 {
        return CMat::zeros((r, c));
    }
    if is_exactly_real(a) && is_exactly_real(b) {
        let ar: Vec<f64> = a.iter().map(|z| z.re).collect();
        let br: Vec<f64> = b.iter().map(|z| z.re).collect();
        let mut cr = vec![0.0f64; r * c];
        let (mi, ni, ki) = (c as i32, r as i32, k as i32);
        let (alpha, beta) = (1.0f64, 0.0f64);
        let tn = b'N';
        unsafe {
            // row-major product through the transposed column-major view
            ffi::dgemm_(
                &tn,
                &tn,
                &mi,
                &ni,
                &ki,
                &alpha,
                br.as_ptr(),
                &mi,
                ar.as_ptr(),
                &ki,
                &beta,
                cr.as_mut_ptr(),
                &mi,
            );
        }
        return CMat::from_shape_vec(
            (r, c),
            cr.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        )
        .unwrap();
    }
    let av: Vec<Complex64> = a.iter().copied().collect();
    let bv: Vec<Complex64> = b.iter().copied().collect();
    let mut cv = vec![C_ZERO; r * c];
    let (mi, ni, ki) = (c as i32, r as i32, k as i32);
    let tn = b'N';
    unsafe {
        ffi::zgemm_(
            &tn,
            &tn,
            &mi,
            &ni,
            &ki,
            &C_ONE,
            bv.as_ptr(),
            &mi,
            av.as_ptr(),
            &ki,
            &C_ZERO,
            cv.as_mut_ptr(),
            &mi,
        );
    }
    CMat::from_shape_vec((r, c), cv).unwrap()
}

/// Conjugate transpose.
pub fn adjoint(a: &CMat) -> CMat {
    let (r, c) = (a.nrows(), a.ncols());
    let mut out = CMat::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Singular values in descending order (`zgesdd`/`dgesdd`, values only).
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let (r, c) = (m.nrows(), m.ncols());
    if r == 0 || c == 0 {
        return Ok(vec![]);
    }
    let mn = r.min(c);
    let mut s = vec![0.0f64; mn];
    let mut info: i32 = 0;
    let jobz = b'N';
    // Singular values are invariant under transposition, so the row-major
    // buffer can be handed to LAPACK directly with swapped dimensions.
    let (mi, ni) = (c as i32, r as i32);
    if is_exactly_real(m) {
        let mut a: Vec<f64> = m.iter().map(|z| z.re).collect();
        let mut iwork = vec![0i32; 8 * mn];
        unsafe {
            let mut wk = 0.0f64;
            let m1 = -1i32;
            ffi::dgesdd_(
                &jobz,
                &mi,
                &ni,
                a.as_mut_ptr(),
                &mi,
                s.as_mut_ptr(),
                std::ptr::null_mut(),
                &1,
                std::ptr::null_mut(),
                &1,
                &mut wk,
                &m1,
                iwork.as_mut_ptr(),
                &mut info,
            );
            if info != 0 {
                return Err(Error::Eigensolver(info));
            }
            let lwork = wk as i32;
            let mut work = vec![0.0f64; lwork.max(1) as usize];
            ffi::dgesdd_(
                &jobz,
                &mi,
                &ni,
                a.as_mut_ptr(),
                &mi,
                s.as_mut_ptr(),
                std::ptr::null_mut(),
                &1,
                std::ptr::null_mut(),
                &1,
                work.as_mut_ptr(),
                &lwork,
                iwork.as_mut_ptr(),
                &mut info,
            );
        }
    } else {
        let mut a: Vec<Complex64> = m.iter().copied().collect();
        let mut rwork = vec![0.0f64; 7 * mn];
        let mut iwork = vec![0i32; 8 * mn];
        unsafe {
            let mut wk = C_ZERO;
            let m1 = -1i32;
            ffi::zgesdd_(
                &jobz,
                &mi,
                &ni,
                a.as_mut_ptr(),
                &mi,
                s.as_mut_ptr(),
                std::ptr::null_mut(),
                &1,
                std::ptr::null_mut(),
                &1,
                &mut wk,
                &m1,
                rwork.as_mut_ptr(),
                iwork.as_mut_ptr(),
                &mut info,
            );
            if info != 0 {
                return Err(Error::Eigensolver(info));
            }
            let lwork = wk.re as i32;
            let mut work = vec![C_ZERO; lwork.max(1) as usize];
            ffi::zgesdd_(
                &jobz,
                &mi,
                &ni,
                a.as_mut_ptr(),
                &mi,
                s.as_mut_ptr(),
                std::ptr::null_mut(),
                &1,
                std::ptr::null_mut(),
                &1,
                work.as_mut_ptr(),
                &lwork,
                rwork.as_mut_ptr(),
                iwork.as_mut_ptr(),
                &mut info,
            );
        }
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    Ok(s)
}

/// Operator (spectral) norm.
pub fn operator_norm(m: &CMat) -> f64 {
    singular_values(m)
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

/// Trace norm, i.e. the sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    singular_values(m)
        .map(|s| s.iter().sum())
        .unwrap_or(f64::NAN)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diag().iter().sum()
}

/// `Tr(a * b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(b.ncols(), n);
    let mut acc = C_ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |m - m†|` entrywise.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut d = 0.0f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

/// Apply a scalar function to a Hermitian matrix through its spectrum:
/// `U diag(f(λ)) U†`.
pub fn func_hermitian<F: Fn(f64) -> Complex64>(m: &CMat, f: F) -> Result<CMat> {
    let Eigh { values, vectors } = eigh(m)?;
    Ok(recompose(
        &vectors,
        &values.iter().map(|&l| f(l)).collect::<Vec<_>>(),
    ))
}

/// `U diag(d) U†` for a unitary `u` whose columns are the basis vectors.
pub fn recompose(u: &CMat, d: &[Complex64]) -> CMat {
    let n = u.nrows();
    let mut scaled = u.clone();
    for (k, &dk) in d.iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] *= dk;
        }
    }
    matmul(&scaled, &adjoint(u))
}

/// `exp(scale * m)` for Hermitian `m` and arbitrary complex `scale`.
pub fn expm_hermitian(m: &CMat, scale: Complex64) -> Result<CMat> {
    func_hermitian(m, |l| (scale * l).exp())
}

pub fn identity(n: usize) -> CMat {
    CMat::eye(n)
}

/// Kronecker product, row-major convention: `(a ⊗ b)[(i*p+k, j*q+l)] = a[(i,j)] b[(k,l)]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

fn main() {
    // Dense eigensolvers, SVD and GEMM are delegated to the system BLAS/LAPACK.
    println!("cargo:rustc-link-lib=dylib=openblas");
}

fn main() {
    // Links the system LAPACK; override with QHT_LAPACK_LIB (for example `openblas`).
    let lib = std::env::var("QHT_LAPACK_LIB").unwrap_or_else(|_| "lapack".into());
    println!("cargo:rerun-if-env-changed=QHT_LAPACK_LIB");
    println!("cargo:rustc-link-lib={lib}");
}

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(format!("{crate_dir}/include/catkit.h"));
        }
        // Keep builds working even where header regeneration is impossible
        // (e.g. read-only checkouts); the committed header stays in place.
        Err(err) => println!("cargo:warning=skipping header generation: {err}"),
    }
}

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let out = crate_dir.join("include").join("spdc.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&out);
        }
        Err(e) => {
            // Keep the committed header if generation fails; fail hard only
            // when there is no header at all.
            if out.exists() {
                println!("cargo:warning=cbindgen failed ({e}); keeping existing include/spdc.h");
            } else {
                panic!("cbindgen failed and no committed header exists: {e}");
            }
        }
    }
}

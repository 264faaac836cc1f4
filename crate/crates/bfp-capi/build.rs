use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("read cbindgen.toml");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("generate C header");

    let out_path = PathBuf::from(env::var("OUT_DIR").unwrap()).join("bfp.h");
    bindings.write_to_file(&out_path);

    // keep the committed header in sync without dirtying mtimes needlessly
    let committed = crate_dir.join("include").join("bfp.h");
    let fresh = fs::read(&out_path).unwrap();
    let stale = fs::read(&committed).ok();
    if stale.as_deref() != Some(fresh.as_slice()) {
        fs::create_dir_all(committed.parent().unwrap()).unwrap();
        fs::write(&committed, &fresh).unwrap();
    }
}

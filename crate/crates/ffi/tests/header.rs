use std::path::Path;
use std::process::Command;

fn header() -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/suffbench.h");
    std::fs::read_to_string(p).expect("header generated by build script")
}

#[test]
fn header_declares_the_abi() {
    let h = header();
    for item in [
        "typedef struct SbModel SbModel;",
        "typedef struct SbStatistic SbStatistic;",
        "SB_STATUS_OK = 0",
        "SB_STATUS_PANIC",
        "sb_model_from_json",
        "sb_is_sufficient",
        "sb_is_conditionally_sufficient",
        "sb_minimal_sufficient",
        "sb_corner_point",
        "sb_run",
        "sb_string_free",
        "sb_last_error_code",
    ] {
        assert!(h.contains(item), "missing {item}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempdir();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"suffbench.h\"\n\
         int main(void) {\n\
           SbModel *m = 0; SbStatus s = sb_model_from_json(\"{}\", &m);\n\
           double h; bool ok; double cmi; (void)h; (void)ok; (void)cmi;\n\
           return s == SB_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("suffbench-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

use std::path::Path;
use std::process::Command;

fn main() {
    println!("cargo:rerun-if-env-changed=DDMAGSIM_REVISION");
    let git_head = Path::new("../../.git/HEAD");
    if git_head.exists() {
        println!("cargo:rerun-if-changed=../../.git/HEAD");
        println!("cargo:rerun-if-changed=../../.git/index");
    }
    let version = env!("CARGO_PKG_VERSION");
    let revision = std::env::var("DDMAGSIM_REVISION").ok().unwrap_or_else(|| {
        let hash = Command::new("git")
            .args(["rev-parse", "--short=12", "HEAD"])
            .output()
            .ok()
            .filter(|o| o.status.success())
            .and_then(|o| String::from_utf8(o.stdout).ok())
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty());
        let dirty = Command::new("git")
            .args(["status", "--porcelain", "--untracked-files=no"])
            .output()
            .ok()
            .filter(|o| o.status.success())
            .is_some_and(|o| !o.stdout.is_empty());
        match hash {
            Some(h) if dirty => format!("{version}+g{h}.dirty"),
            Some(h) => format!("{version}+g{h}"),
            None => version.to_owned(),
        }
    });
    println!("cargo:rustc-env=DDMAGSIM_BUILD_REVISION={revision}");
}

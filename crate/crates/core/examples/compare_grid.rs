//! The whole pipeline through the command layer: preprocess the bundled
//! corpus, extract its Simple subset, and run a reduced-budget system grid.
//!
//!     cargo run --release --example compare_grid

use minimt::pipeline::{cmd_compare, cmd_extract_simple, cmd_preprocess, render_markdown, ExtractMethod, Settings};
use minimt::synthetic::bundled_files;

fn main() -> minimt::Result<()> {
    let dir = tempfile::tempdir()?;
    let root = dir.path();
    for (name, content) in bundled_files() {
        std::fs::write(root.join(name), content)?;
    }
    let mut settings = Settings::default();
    for (k, v) in [("epochs", "15"), ("hidden", "48"), ("embed", "24"), ("lr", "0.005"), ("batch_size", "16"), ("eval", "train")] {
        settings.set(k, v)?;
    }

    let pre = cmd_preprocess(&root.join("synthetic.en"), &root.join("synthetic.bn"), &root.join("whole"), &settings, false)?;
    println!("preprocess: {pre:?}");
    let ext = cmd_extract_simple(
        &root.join("whole"),
        ExtractMethod::Rules,
        None,
        Some(&root.join("synthetic.labels")),
        Some(&root.join("synthetic.chunks")),
        false,
        &root.join("simple"),
        &settings,
        false,
    )?;
    println!("extract: {ext:?}");

    let report = cmd_compare(Some(&root.join("whole")), Some(&root.join("simple")), &root.join("grid"), &settings, false)?;
    print!("{}", render_markdown(&report));
    Ok(())
}

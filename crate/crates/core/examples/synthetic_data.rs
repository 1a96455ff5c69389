//! Writes the bundled toy corpus (sources, targets, chunk tags, labels) to a
//! directory.
//!
//!     cargo run --example synthetic_data -- /tmp/toy

use std::path::PathBuf;

use minimt::synthetic::{bundled_files, synthetic_pairs};

fn main() -> minimt::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synthetic-data".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, content) in bundled_files() {
        minimt::util::write_atomic(&dir.join(&name), content.as_bytes())?;
        println!("{} ({} lines)", dir.join(name).display(), content.lines().count());
    }
    for p in synthetic_pairs(3, 7) {
        println!("{:?}\t{}\n  -> {}\n  tags: {:?}", p.label, p.source, p.target, p.tags);
    }
    Ok(())
}

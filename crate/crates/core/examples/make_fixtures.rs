//! Regenerates `fixtures/`. Run with `cargo run --example make_fixtures`.

use std::path::Path;

use pairtest::rnaseq::{write_fixture_set, FIXTURE_SEEDS};

fn main() -> pairtest::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for p in write_fixture_set(&dir, FIXTURE_SEEDS)? {
        println!("{}", p.display());
    }
    Ok(())
}

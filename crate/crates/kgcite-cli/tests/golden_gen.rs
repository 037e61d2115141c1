//! Regenerates the golden prompt files. Run explicitly after a deliberate
//! template change, then review the diff:
//!
//! ```text
//! cargo test -p kgcite-cli --test golden_gen -- --ignored
//! ```

mod golden_support;

use golden_support::{assembled_prompts, GOLDEN_DIR};

#[test]
#[ignore = "writes tests/golden/*; run on purpose only"]
fn regenerate_golden_files() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(GOLDEN_DIR);
    std::fs::create_dir_all(&dir).unwrap();
    for (name, content) in assembled_prompts() {
        std::fs::write(dir.join(name), content).unwrap();
    }
}

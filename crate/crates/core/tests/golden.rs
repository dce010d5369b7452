use std::path::Path;

use trip::instance::{gen_random, read_instance, write_instance};
use trip::num::rat;

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

#[test]
fn generator_is_locked_for_three_seeds() {
    for seed in 0..3u64 {
        let inst = gen_random(seed, 4, 5, 0, 2, 3, rat(2)).unwrap();
        let text = golden(&format!("gen_seed{seed}.trip"));
        assert_eq!(write_instance(&inst), text, "seed {seed}");
        assert_eq!(read_instance(&text).unwrap(), inst);
    }
}

mod common;

use common::{naive_locate, patterns, suite};
use rlindex::Index;

#[test]
fn locate_and_count_match_naive_scan() {
    for (ci, c) in suite(1).into_iter().enumerate() {
        let idx = Index::build(&c.text, ci as u64).unwrap();
        for p in patterns(&c.text, 150, 64, ci as u64) {
            let want = naive_locate(&c.text, &p);
            assert_eq!(idx.locate(&p), want, "locate {:?} in {}", String::from_utf8_lossy(&p), c.name);
            assert_eq!(idx.count(&p), want.len() as u64, "count {:?} in {}", String::from_utf8_lossy(&p), c.name);
        }
    }
}

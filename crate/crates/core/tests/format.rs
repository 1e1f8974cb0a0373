mod common;

use rlindex::format::{FormatError, VERSION};
use rlindex::Index;

fn sample() -> (Vec<u8>, Index) {
    let t = rlindex::corpus::copy_edit(3000, 12, 3, 4, 5).unwrap();
    let idx = Index::build(&t, 11).unwrap();
    (t, idx)
}

#[test]
fn round_trip_answers_identically() {
    let (t, idx) = sample();
    let bytes = idx.to_bytes();
    let back = Index::from_bytes(&bytes).unwrap();
    assert_eq!(back.to_bytes(), bytes);
    for p in common::patterns(&t, 300, 40, 2) {
        assert_eq!(back.locate(&p), idx.locate(&p));
        assert_eq!(back.count(&p), idx.count(&p));
    }
    assert_eq!(back.extract_text(1, t.len() as u64).unwrap(), t);
}

#[test]
fn same_seed_same_bytes() {
    let t = rlindex::corpus::random(2000, 4, 1).unwrap();
    let a = Index::build(&t, 42).unwrap().to_bytes();
    let b = Index::build(&t, 42).unwrap().to_bytes();
    assert_eq!(a, b);
}

#[test]
fn rejects_bad_magic_and_version() {
    let (_, idx) = sample();
    let mut bytes = idx.to_bytes();
    bytes[0] = b'X';
    assert!(matches!(Index::from_bytes(&bytes), Err(FormatError::BadMagic)));
    let mut bytes = idx.to_bytes();
    bytes[4..8].copy_from_slice(&(VERSION + 1).to_le_bytes());
    assert!(matches!(Index::from_bytes(&bytes), Err(FormatError::Version { .. })));
}

#[test]
fn corruption_names_the_section() {
    let (_, idx) = sample();
    let bytes = idx.to_bytes();
    // Flip one byte in the middle of each section's payload.
    let mut at = 0;
    let mut seen = Vec::new();
    while let Some(k) = find_section(&bytes, at) {
        let (name, start, len) = k;
        if len > 0 {
            let mut bad = bytes.clone();
            bad[start + len / 2] ^= 0x5a;
            match Index::from_bytes(&bad) {
                Err(FormatError::Corrupt { section, .. }) => assert_eq!(section, name),
                other => panic!("corrupting {name} gave {other:?}"),
            }
            seen.push(name);
        }
        at = start + len + 8;
    }
    assert!(seen.len() >= 8, "{seen:?}");
    // Truncation is reported too.
    let cut = &bytes[..bytes.len() - 3];
    assert!(matches!(Index::from_bytes(cut), Err(FormatError::Corrupt { .. })));
}

/// Locates the next section frame after `from`: name, payload start, length.
fn find_section(b: &[u8], from: usize) -> Option<(String, usize, usize)> {
    let names = [
        "grammar", "rounds", "tree", "members", "locate-grid", "count-grid", "counts",
        "run-periods", "terminal-counts",
    ];
    for i in from..b.len().saturating_sub(8) {
        let n = u64::from_le_bytes(b[i..i + 8].try_into().unwrap()) as usize;
        if n == 0 || n > 32 || i + 8 + n + 8 > b.len() {
            continue;
        }
        let name = &b[i + 8..i + 8 + n];
        if let Some(s) = names.iter().find(|s| s.as_bytes() == name) {
            let l = u64::from_le_bytes(b[i + 8 + n..i + 16 + n].try_into().unwrap()) as usize;
            return Some((s.to_string(), i + 16 + n, l));
        }
    }
    None
}

mod common;

use std::collections::HashSet;

use so6_core::lut::LutOptions;
use so6_core::mitm::{mitm, mitm_sides, MitmOptions};
use so6_core::oracle::{naive_bfs, Variant};
use so6_core::store::{load_lut, lut_from_bytes, lut_to_bytes, save_lut, Verify, RECORD_LEN};
use so6_core::word::evaluate_word;
use so6_core::{apply_gen, generate_lut, generator, Error, GenIndex, Lut, So6Matrix};

fn build(depth: usize) -> Lut {
    generate_lut(&So6Matrix::identity(), depth, &LutOptions::default()).unwrap()
}

#[test]
fn layers_match_exhaustive_enumeration() {
    let lut = build(4);
    let naive = naive_bfs(&So6Matrix::identity(), 4, Variant::SignedPerms).unwrap();
    for d in 0..=4 {
        let ours: HashSet<_> = lut.layer(d).iter().map(|n| n.canon.clone()).collect();
        let want: HashSet<_> = naive[d].iter().cloned().collect();
        assert_eq!(ours, want, "distance {d}");
    }
}

#[test]
fn every_layer_class_has_a_closer_neighbour() {
    let lut = build(6);
    for d in 1..=6 {
        for n in lut.layer(d) {
            let near = GenIndex::all_involutive().any(|g| lut.lookup(&apply_gen(g, &n.canon).unwrap()).map(|h| h.0) == Some(d - 1));
            assert!(near);
        }
    }
}

#[test]
fn neighbours_differ_in_parity() {
    let lut = build(6);
    for d in 0..6 {
        for n in lut.layer(d) {
            for g in GenIndex::all_involutive() {
                let (e, _) = lut.lookup(&apply_gen(g, &n.canon).unwrap()).unwrap();
                assert!(e + 1 == d || e == d + 1, "{d} -> {e}");
            }
        }
    }
}

#[test]
fn involutive_paths_are_exact() {
    let lut = build(6);
    for d in 0..=6 {
        for (i, n) in lut.layer(d).iter().enumerate() {
            let (q, xs, right) = lut.involutive_path(d, i).unwrap();
            assert_eq!(xs.len(), d);
            let mut m = So6Matrix::identity();
            for &x in xs.iter().rev() {
                m = generator(x).mul(&m).unwrap();
            }
            assert_eq!(m.det().unwrap(), if d % 2 == 0 { 1 } else { -1 });
            assert_eq!(m.act_left(q).act_right(right), n.canon);
            let rec = lut.reconstruct(d, i).unwrap();
            assert_eq!(rec.tcount(), d);
        }
    }
}

#[test]
fn build_is_independent_of_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| build(6));
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| build(6));
    assert_eq!(lut_to_bytes(&one), lut_to_bytes(&many));
}

#[test]
fn suppression_does_not_change_layers() {
    let a = build(6);
    let b = generate_lut(&So6Matrix::identity(), 6, &LutOptions { suppress_backtracking: false, ..Default::default() }).unwrap();
    for d in 0..=6 {
        let x: Vec<_> = a.layer(d).iter().map(|n| &n.canon).collect();
        let y: Vec<_> = b.layer(d).iter().map(|n| &n.canon).collect();
        assert_eq!(x, y);
    }
}

#[test]
fn files_round_trip_and_detect_damage() {
    let lut = build(5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.lut");
    save_lut(&lut, &path).unwrap();
    let back = load_lut(&path, Verify::All).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(lut_to_bytes(&back), bytes);
    assert_eq!(back.cumulative_counts(), lut.cumulative_counts());

    let mut damaged = bytes.clone();
    let at = damaged.len() - 200;
    damaged[at] ^= 0x10;
    match lut_from_bytes(&damaged, Verify::None) {
        Err(Error::Format { offset, .. }) => {
            let offset = offset as usize;
            assert!(offset <= at && at < offset + RECORD_LEN, "flip at {at} reported at {offset}");
        }
        other => panic!("damage accepted: {:?}", other.map(|l| l.len())),
    }
    assert!(lut_from_bytes(&bytes[..bytes.len() - 5], Verify::None).is_err());
}

#[test]
fn search_reaches_table_distance() {
    let lut = build(6);
    let mut rng = common::rng(21);
    for _ in 0..15 {
        let len = rand::Rng::gen_range(&mut rng, 0..=6);
        let target = common::random_word_matrix(&mut rng, len);
        let (d, _) = lut.lookup(&target).unwrap();
        let r = mitm(&So6Matrix::identity(), &target, &MitmOptions::default()).unwrap();
        assert_eq!(r.tcount, d);
        let w = r.word_for_perm_root(so6_core::SignedPerm::IDENTITY);
        assert_eq!(evaluate_word(&w).unwrap(), target);
    }
}

#[test]
fn search_can_start_from_a_stored_table() {
    let mut left = build(3);
    let mut rng = common::rng(22);
    let target = common::random_word_matrix(&mut rng, 9);
    let mut right = Lut::init(&target).unwrap();
    let r = mitm_sides(&mut left, &mut right, &MitmOptions::default()).unwrap();
    assert!(r.tcount <= 9);
    let w = r.word_for_perm_root(so6_core::SignedPerm::IDENTITY);
    assert_eq!(evaluate_word(&w).unwrap(), target);
}

#[test]
fn depth_cap_is_reported() {
    let mut rng = common::rng(23);
    let target = common::random_word_matrix(&mut rng, 8);
    let opts = MitmOptions { max_depth: 2, ..Default::default() };
    match mitm(&So6Matrix::identity(), &target, &opts) {
        Err(Error::NotFoundWithinBudget { .. }) => {}
        other => panic!("{other:?}"),
    }
}

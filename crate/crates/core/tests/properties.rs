mod common;

use common::corpus;
use khovacable::diagram::{parse_diagram, ColorTuple, FramedLinkDiagram};
use khovacable::intlinalg::{rank, rank_fraction_free, smith_normal_form, IntMatrix};
use khovacable::khovanov::{differential, graded_euler};
use khovacable::pairing::{enumerate_pairings, k_vectors, pairing_complex, LineOrder};
use khovacable::polyoracle::{binom_tuple, bracket, jones};
use khovacable::DEFAULT_CAP;
use proptest::prelude::*;
use proptest::sample::Index;

/// Same diagram with crossings listed in a different order and arcs renamed.
fn relabel(d: &FramedLinkDiagram, order: &[usize], names: &[u32]) -> FramedLinkDiagram {
    let doc = d.to_document();
    let rename = |l: u32| names[(l - 1) as usize];
    let crossings: Vec<String> = order
        .iter()
        .map(|&x| {
            let c = &doc.crossings[x];
            let pd: Vec<String> = c.pd.iter().map(|&l| rename(l).to_string()).collect();
            format!("{{\"pd\": [{}]}}", pd.join(", "))
        })
        .collect();
    let orientations: Vec<String> = doc
        .orientations
        .unwrap()
        .iter()
        .map(|o| {
            let v: Vec<String> = o.iter().map(|&l| rename(l).to_string()).collect();
            format!("[{}]", v.join(", "))
        })
        .collect();
    let free: Vec<String> = doc.free_loops.unwrap().iter().map(|f| f.to_string()).collect();
    let text = format!(
        "{{\"components\": {}, \"crossings\": [{}], \"orientations\": [{}], \"free_loops\": [{}]}}",
        doc.components,
        crossings.join(", "),
        orientations.join(", "),
        free.join(", ")
    );
    parse_diagram(&text).unwrap()
}

fn permutation(n: usize, picks: &[Index]) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for p in picks.iter().take(n) {
        out.push(pool.remove(p.index(pool.len())));
    }
    out.extend(pool);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_ignores_labels(
        which in 1usize..7,
        xs in proptest::collection::vec(any::<Index>(), 8),
        ls in proptest::collection::vec(any::<Index>(), 16),
    ) {
        let d = corpus(common::CORPUS[which]);
        let order = permutation(d.crossing_count(), &xs);
        let names: Vec<u32> = permutation(d.arcs().len(), &ls).iter().map(|&i| i as u32 + 1).collect();
        let e = relabel(&d, &order, &names);
        prop_assert_eq!(e.writhe(), d.writhe());
        prop_assert_eq!(bracket(&e, DEFAULT_CAP).unwrap(), bracket(&d, DEFAULT_CAP).unwrap());
        let kc = differential(&e, DEFAULT_CAP).unwrap();
        prop_assert_eq!(graded_euler(&kc), jones(&d, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn smith_form_certificates(
        rows in 1usize..14,
        cols in 1usize..14,
        seed in proptest::collection::vec((0usize..14, 0usize..14, -6i64..7), 0..60),
    ) {
        let m = IntMatrix::from_triplets(rows, cols, seed.into_iter().filter(|&(r, c, _)| r < rows && c < cols));
        let snf = smith_normal_form(&m);
        prop_assert!(snf.verify(&m));
        prop_assert_eq!(snf.rank(), rank_fraction_free(&m));
        prop_assert_eq!(rank(&m), rank_fraction_free(&m));
    }

    #[test]
    fn pairing_counts(n in proptest::collection::vec(1u32..7, 1..3)) {
        let n = ColorTuple(n);
        for k in k_vectors(&n) {
            let count = enumerate_pairings(&n, &k).unwrap().len() as u64;
            prop_assert_eq!(count, binom_tuple(&n, &k).unwrap());
        }
    }
}

#[test]
fn sparse_rank_agrees_with_bareiss_up_to_200() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for size in [20usize, 60, 120, 200] {
        for _ in 0..3 {
            let (r, c) = (size, size - rng.gen_range(0..size / 4));
            let mut t = Vec::new();
            for _ in 0..(3 * size) {
                t.push((rng.gen_range(0..r), rng.gen_range(0..c), rng.gen_range(-1..=1i64)));
            }
            let m = IntMatrix::from_triplets(r, c, t);
            assert_eq!(rank(&m), rank_fraction_free(&m), "{r}x{c}");
        }
    }
}

#[test]
fn pairing_complexes_square_to_zero_in_both_line_orders() {
    for n in [vec![2, 2], vec![3, 2], vec![4, 4], vec![2, 2, 2]] {
        for order in [LineOrder::SmallerAbove, LineOrder::LargerAbove] {
            pairing_complex(&ColorTuple(n.clone()), order, 12).unwrap();
        }
    }
}

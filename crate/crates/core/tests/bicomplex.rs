use khovacable::bicomplex::{build_bicomplex, BicomplexError, contracted_circle_parity, total_homology, BicomplexOptions};
use khovacable::diagram::{parse_diagram, ColorTuple, FramedLinkDiagram};
use khovacable::polyoracle::colored_jones;
use khovacable::DEFAULT_CAP;

fn corpus(name: &str) -> FramedLinkDiagram {
    let path = format!("{}/../../corpus/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_diagram(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check(name: &str, n: &[u32]) {
    let d = corpus(name);
    let n = ColorTuple(n.to_vec());
    let b = build_bicomplex(&d, &n, BicomplexOptions::default()).unwrap();
    let cj = colored_jones(&d, &n, DEFAULT_CAP).unwrap();
    let r = b.verify(Some(cj));
    assert!(r.all_ok(), "{name} {:?}: {} {:?} {:?} {:?} {:?}", n.0, r.summary_line(),
        r.d1_squared.witness, r.anticommute.witness, r.chain_maps.witness, r.bigraded_euler);
}

#[test]
fn unknot_colors() {
    for k in 1..=4 {
        check("unknot-0", &[k]);
    }
}

#[test]
fn kinks_color_two() {
    check("unknot-kink+", &[2]);
    check("unknot-kink-", &[2]);
}

fn convention_error(name: &str, n: &[u32]) -> String {
    let d = corpus(name);
    match build_bicomplex(&d, &ColorTuple(n.to_vec()), BicomplexOptions::default()) {
        Err(BicomplexError::Convention { detail, .. }) => detail,
        other => panic!("expected a convention error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn a_type_edges_are_rejected() {
    assert!(convention_error("unknot-kink+", &[3]).contains("A"));
    assert!(convention_error("hopf", &[2, 1]).contains("joins a contracted strand"));
}

#[test]
fn trefoil_color_two() {
    check("trefoil-r", &[2]);
    check("trefoil-l", &[2]);
}

#[test]
fn figure_eight_color_two() {
    check("figure8", &[2]);
}

#[test]
fn hopf_even_colors() {
    check("hopf", &[1, 1]);
}

#[test]
fn unknot_parity_degenerate() {
    let d = corpus("unknot-0");
    let b = build_bicomplex(&d, &ColorTuple(vec![2]), BicomplexOptions::default()).unwrap();
    let p = contracted_circle_parity(&b);
    assert_eq!(p.len(), 1);
    assert!(p[0].degenerate && p[0].stable);
    let h = total_homology(&b).unwrap();
    assert!(!h.is_empty());
}

#[test]
fn rightmost_strand_order_also_validates() {
    use khovacable::diagram::StrandOrder;
    for name in ["unknot-kink+", "unknot-kink-", "trefoil-r"] {
        let d = corpus(name);
        let n = ColorTuple(vec![2]);
        let opts = BicomplexOptions {
            strand_order: StrandOrder::Rightmost,
            ..BicomplexOptions::default()
        };
        let b = build_bicomplex(&d, &n, opts).unwrap();
        let r = b.verify(Some(colored_jones(&d, &n, DEFAULT_CAP).unwrap()));
        assert!(r.all_ok(), "{name}: {}", r.summary_line());
    }
}

fn build(name: &str, n: &[u32]) -> khovacable::bicomplex::BicomplexData {
    build_bicomplex(&corpus(name), &ColorTuple(n.to_vec()), BicomplexOptions::default()).unwrap()
}

#[test]
fn parity_even_on_crossing_edges() {
    for name in ["unknot-kink+", "unknot-kink-", "trefoil-r", "trefoil-l", "figure8"] {
        let p = contracted_circle_parity(&build(name, &[2]));
        assert_eq!(p.len(), 1);
        let e = &p[0];
        assert!(!e.degenerate && e.stable && e.even, "{name}: {e:?}");
        assert!(e.states_checked > 0);
    }
}

#[test]
fn degenerate_edge_closes_both_free_loops() {
    let p = contracted_circle_parity(&build("unknot-0", &[2]));
    assert_eq!(p[0].contracted_circles, 2);
    let p = contracted_circle_parity(&build("unknot-0", &[4]));
    assert!(p.iter().all(|e| e.degenerate && e.contracted_circles == 2));
}

#[test]
fn annulus_maps_are_signed_partial_bijections() {
    for (name, n) in [("trefoil-r", 2), ("unknot-kink+", 2), ("unknot-0", 4)] {
        let b = build(name, &[n]);
        for e in &b.edges {
            let mut nonzero = 0;
            for m in e.phi.values() {
                let mut rows = std::collections::HashSet::new();
                let mut cols = std::collections::HashSet::new();
                for &(r, c, v) in m.entries() {
                    assert!(v == 1 || v == -1);
                    assert!(rows.insert(r) && cols.insert(c), "{name}");
                    nonzero += 1;
                }
            }
            assert_eq!(nonzero, e.type1_states);
            assert!(nonzero > 0);
        }
    }
}

#[test]
fn type2_candidates_are_enumerated() {
    // the strands of a doubled kink run opposite ways: two positive, two negative
    let b = build("unknot-kink+", &[2]);
    let ctx = &b.edges[0].context;
    assert_eq!(ctx.forced.len(), 4);
    assert_eq!(ctx.forced.iter().filter(|f| f.b_marker).count(), 2);
    assert_eq!(ctx.type2_patterns().len(), 4);
    let b = build("figure8", &[2]);
    let ctx = &b.edges[0].context;
    let a = ctx.forced.iter().filter(|f| !f.b_marker).count();
    assert_eq!(ctx.type2_patterns().len(), a * (ctx.forced.len() - a));
}

#[test]
fn color_one_is_a_single_column() {
    let b = build("trefoil-r", &[1]);
    assert_eq!(b.levels(), 1);
    assert!(b.edges.is_empty());
    let h = total_homology(&b).unwrap();
    let nonzero: Vec<i64> = h.iter().filter(|(_, g)| !g.is_zero()).map(|(&m, _)| m).collect();
    assert_eq!(nonzero, vec![0, 2, 3]);
}

#[test]
fn total_homology_values() {
    use khovacable::bicomplex::euler_of_total;
    let h = total_homology(&build("unknot-0", &[2])).unwrap();
    let groups: Vec<(i64, String)> = h.iter().map(|(&m, g)| (m, g.to_string())).collect();
    assert_eq!(groups, vec![(0, "Z^3".to_string()), (1, "0".to_string())]);
    for name in ["unknot-kink+", "trefoil-r"] {
        let b = build(name, &[2]);
        let h = total_homology(&b).unwrap();
        let at_one: i64 = khovacable::bicomplex::bigraded_euler(&b).terms().values().sum();
        assert_eq!(euler_of_total(&h), at_one, "{name}");
    }
}

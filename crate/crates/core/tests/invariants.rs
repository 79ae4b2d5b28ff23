mod common;

use common::{corpus, CORPUS};
use khovacable::diagram::{cable, ColorTuple};
use khovacable::intlinalg::HomologySummary;
use khovacable::khovanov::{differential, graded_euler, homology};
use khovacable::polyoracle::{colored_jones, jones, LaurentPoly, Variable};
use khovacable::DEFAULT_CAP;
use num_bigint::BigInt;

fn q(terms: &[(i64, i64)]) -> LaurentPoly {
    LaurentPoly::from_terms(Variable::Q, terms.iter().copied())
}

/// [n] = q^{n-1} + q^{n-3} + ... + q^{1-n}
fn quantum_integer(n: i64) -> LaurentPoly {
    q(&(0..n).map(|k| (n - 1 - 2 * k, 1)).collect::<Vec<_>>())
}

#[test]
fn jones_values() {
    let cases: [(&str, &[(i64, i64)]); 7] = [
        ("unknot-0", &[(1, 1), (-1, 1)]),
        ("unknot-kink+", &[(1, 1), (-1, 1)]),
        ("unknot-kink-", &[(1, 1), (-1, 1)]),
        ("hopf", &[(0, 1), (-2, 1), (-4, 1), (-6, 1)]),
        ("trefoil-r", &[(1, 1), (3, 1), (5, 1), (9, -1)]),
        ("trefoil-l", &[(-1, 1), (-3, 1), (-5, 1), (-9, -1)]),
        ("figure8", &[(5, 1), (-5, 1)]),
    ];
    for (name, t) in cases {
        assert_eq!(jones(&corpus(name), DEFAULT_CAP).unwrap(), q(t), "{name}");
    }
}

#[test]
fn two_component_unlink() {
    let d = khovacable::diagram::parse_diagram(
        r#"{"components": 2, "crossings": [], "orientations": [[], []], "base_edges": [null, null], "free_loops": [1, 1]}"#,
    )
    .unwrap();
    assert_eq!(jones(&d, DEFAULT_CAP).unwrap(), q(&[(2, 1), (0, 2), (-2, 1)]));
}

#[test]
fn colored_jones_frozen() {
    // values cross-checked against a separate prototype implementation
    let cases: [(&str, Vec<u32>, &[(i64, i64)]); 5] = [
        ("unknot-0", vec![2], &[(2, 1), (0, 1), (-2, 1)]),
        (
            "trefoil-r",
            vec![2],
            &[(12, 1), (8, -1), (6, -1), (4, -1), (-2, 1), (-4, 1), (-6, 1), (-8, 1), (-10, 1)],
        ),
        (
            "trefoil-l",
            vec![2],
            &[(-12, 1), (-8, -1), (-6, -1), (-4, -1), (2, 1), (4, 1), (6, 1), (8, 1), (10, 1)],
        ),
        ("figure8", vec![2], &[(14, 1), (10, -1), (2, 1), (0, 1), (-2, 1), (-10, -1), (-14, 1)]),
        ("hopf", vec![2, 1], &[(5, 1), (3, 1), (1, 1), (-1, 1), (-3, 1), (-5, 1)]),
    ];
    for (name, n, t) in cases {
        assert_eq!(colored_jones(&corpus(name), &ColorTuple(n.clone()), DEFAULT_CAP).unwrap(), q(t), "{name} {n:?}");
    }
}

#[test]
fn colored_unknot_is_quantum_integer() {
    let d = corpus("unknot-0");
    for n in 1..=6 {
        let cj = colored_jones(&d, &ColorTuple(vec![n]), DEFAULT_CAP).unwrap();
        assert_eq!(cj, quantum_integer(i64::from(n) + 1), "n = {n}");
    }
}

#[test]
fn colored_kinks_pick_up_the_framing_eigenvalue() {
    // a ±1 kink multiplies [n+1] by q^{∓(n(n+2) − 3(n mod 2))/2}
    for n in 1..=4i64 {
        let shift = (n * (n + 2) - 3 * (n % 2)) / 2;
        for (name, s) in [("unknot-kink+", -1), ("unknot-kink-", 1)] {
            let cj = colored_jones(&corpus(name), &ColorTuple(vec![n as u32]), DEFAULT_CAP).unwrap();
            let expected = quantum_integer(n + 1).mul(&q(&[(s * shift, 1)]));
            assert_eq!(cj, expected, "{name} n = {n}");
        }
    }
}

fn group(betti: usize, torsion: &[i64]) -> HomologySummary {
    HomologySummary {
        betti,
        torsion: torsion.iter().map(|&t| BigInt::from(t)).collect(),
    }
}

fn kh(name: &str) -> Vec<((i64, i64), HomologySummary)> {
    let kc = differential(&corpus(name), DEFAULT_CAP).unwrap();
    homology(&kc).unwrap().into_iter().collect()
}

#[test]
fn trefoil_homology() {
    assert_eq!(
        kh("trefoil-r"),
        vec![
            ((0, 1), group(1, &[])),
            ((0, 3), group(1, &[])),
            ((2, 5), group(1, &[])),
            ((3, 7), group(0, &[2])),
            ((3, 9), group(1, &[])),
        ]
    );
    assert_eq!(
        kh("trefoil-l"),
        vec![
            ((-3, -9), group(1, &[])),
            ((-2, -7), group(0, &[2])),
            ((-2, -5), group(1, &[])),
            ((0, -3), group(1, &[])),
            ((0, -1), group(1, &[])),
        ]
    );
}

#[test]
fn kinks_do_not_shift_homology() {
    let unknot = kh("unknot-0");
    assert_eq!(unknot, vec![((0, -1), group(1, &[])), ((0, 1), group(1, &[]))]);
    assert_eq!(kh("unknot-kink+"), unknot);
    assert_eq!(kh("unknot-kink-"), unknot);
}

#[test]
fn hopf_and_figure_eight_homology() {
    assert_eq!(
        kh("hopf"),
        vec![
            ((-2, -6), group(1, &[])),
            ((-2, -4), group(1, &[])),
            ((0, -2), group(1, &[])),
            ((0, 0), group(1, &[])),
        ]
    );
    let f8 = kh("figure8");
    let torsion: Vec<(i64, i64)> = f8.iter().filter(|(_, g)| !g.torsion.is_empty()).map(|&(k, _)| k).collect();
    assert_eq!(torsion, vec![(-1, -3), (2, 3)]);
    assert_eq!(f8.iter().map(|(_, g)| g.betti).sum::<usize>(), 6);
}

#[test]
fn euler_characteristic_is_jones_on_cables() {
    for name in CORPUS {
        let d = corpus(name);
        let c = d.components();
        let mut colors = vec![vec![1; c], vec![2; c]];
        if c == 2 {
            colors.push(vec![2, 1]);
            colors.push(vec![1, 2]);
        }
        for n in colors {
            let cd = cable(&d, &ColorTuple(n.clone())).unwrap();
            let kc = differential(&cd.diagram, DEFAULT_CAP).unwrap();
            assert_eq!(graded_euler(&kc), jones(&cd.diagram, DEFAULT_CAP).unwrap(), "{name} {n:?}");
        }
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. All comparisons are exact; the only pinned tolerances are
//! the wall-clock budgets listed next to each criterion.

use std::time::{Duration, Instant};

use khovacable::bicomplex::{build_bicomplex, contracted_circle_parity, BicomplexError, BicomplexOptions};
use khovacable::diagram::{cable, parse_diagram, ColorTuple, FramedLinkDiagram, StrandOrder};
use khovacable::intlinalg::{smith_normal_form, IntMatrix};
use khovacable::khovanov::{graded_euler, homology, KhovanovComplex};
use khovacable::pairing::{enumerate_pairings, k_vectors, pairing_complex, LineOrder};
use khovacable::polyoracle::{binom_tuple, colored_jones_with, jones, LaurentPoly, Variable};
use khovacable::DEFAULT_CAP;
use rand::{Rng, SeedableRng};

const CORPUS: [&str; 7] = [
    "unknot-0",
    "unknot-kink+",
    "unknot-kink-",
    "hopf",
    "trefoil-r",
    "trefoil-l",
    "figure8",
];

/// Wall-clock budgets.
const BUDGET_KHOVANOV: Duration = Duration::from_secs(60);
const BUDGET_TREFOIL_BICOMPLEX: Duration = Duration::from_secs(600);

/// Instances of the chain-map, bicomplex and Euler criteria.
const BICOMPLEX_SET: [(&str, u32); 6] = [
    ("unknot-0", 2),
    ("unknot-kink+", 2),
    ("unknot-kink-", 2),
    ("trefoil-r", 2),
    ("unknot-0", 3),
    ("unknot-0", 4),
];

fn corpus(name: &str) -> FramedLinkDiagram {
    let path = format!("{}/../../corpus/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_diagram(&std::fs::read_to_string(path).unwrap()).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Color tuples with every entry in {1, 2}.
fn small_colors(components: usize) -> Vec<ColorTuple> {
    (0..1u32 << components)
        .map(|m| ColorTuple((0..components).map(|c| 1 + (m >> c & 1)).collect()))
        .collect()
}

fn khovanov_instances() -> Vec<(String, FramedLinkDiagram)> {
    let mut out = Vec::new();
    for name in CORPUS {
        let d = corpus(name);
        for n in small_colors(d.components()) {
            let cd = cable(&d, &n).unwrap();
            out.push((format!("{name} {:?}", n.0), cd.diagram));
        }
    }
    out
}

fn criterion_1(instances: &[(String, FramedLinkDiagram)], t0: Instant) -> Outcome {
    let mut max_c = 0;
    for (name, d) in instances {
        max_c = max_c.max(d.crossing_count());
        let kc = match KhovanovComplex::build(d, DEFAULT_CAP) {
            Ok(kc) => kc,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        if let Err(e) = kc.check_d_squared() {
            return outcome(false, format!("{name}: {e}"));
        }
    }
    let el = t0.elapsed();
    outcome(
        el < BUDGET_KHOVANOV,
        format!("{} diagrams up to {max_c} crossings, {:.1?}", instances.len(), el),
    )
}

fn criterion_2(instances: &[(String, FramedLinkDiagram)], t0: Instant) -> Outcome {
    for (name, d) in instances {
        let kc = KhovanovComplex::build(d, DEFAULT_CAP).unwrap();
        let e = graded_euler(&kc);
        let j = jones(d, DEFAULT_CAP).unwrap();
        if e != j {
            return outcome(false, format!("{name}: euler {e} vs jones {j}"));
        }
    }
    let el = t0.elapsed();
    outcome(
        el < BUDGET_KHOVANOV,
        format!("{} diagrams, criteria 1-2 together {:.1?}", instances.len(), el),
    )
}

fn criterion_3() -> Outcome {
    let mut tuples: Vec<Vec<u32>> = Vec::new();
    fn extend(prefix: &mut Vec<u32>, left: u32, out: &mut Vec<Vec<u32>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if prefix.len() == 4 {
            return;
        }
        for c in 1..=left {
            prefix.push(c);
            extend(prefix, left - c, out);
            prefix.pop();
        }
    }
    extend(&mut Vec::new(), 8, &mut tuples);
    let mut checked = 0;
    for n in &tuples {
        let n = ColorTuple(n.clone());
        for order in [LineOrder::SmallerAbove, LineOrder::LargerAbove] {
            if let Err(e) = pairing_complex(&n, order, 8) {
                return outcome(false, format!("{:?} {order:?}: {e}", n.0));
            }
        }
        for k in k_vectors(&n) {
            let count = enumerate_pairings(&n, &k).unwrap().len() as u64;
            if count != binom_tuple(&n, &k).unwrap() {
                return outcome(false, format!("|I_k| mismatch at n={:?} k={k:?}", n.0));
            }
        }
        checked += 1;
    }
    let named = [vec![2, 2], vec![3, 2]].iter().all(|t| tuples.contains(t));
    outcome(named, format!("{checked} color tuples with sum <= 8, both line orders"))
}

struct BicomplexRun {
    label: String,
    chain_map: Result<usize, String>,
    main: Result<usize, String>,
    euler: Result<(), String>,
    elapsed: Duration,
}

fn run_bicomplex(name: &str, n: u32, order: StrandOrder) -> BicomplexRun {
    let t0 = Instant::now();
    let d = corpus(name);
    let colors = ColorTuple(vec![n]);
    let label = format!("{name} n=({n})");
    let opts = BicomplexOptions {
        strand_order: order,
        ..BicomplexOptions::default()
    };
    let b = match build_bicomplex(&d, &colors, opts) {
        Ok(b) => b,
        Err(e) => {
            let msg = format!("{label}: {e}");
            return BicomplexRun {
                label,
                chain_map: Err(msg.clone()),
                main: Err(msg.clone()),
                euler: Err(msg),
                elapsed: t0.elapsed(),
            };
        }
    };
    let cj = colored_jones_with(&d, &colors, DEFAULT_CAP, order).unwrap();
    let r = b.verify(Some(cj.clone()));
    let chain_map = match &r.chain_maps.witness {
        None => Ok(r.chain_maps.blocks_checked),
        Some(w) => Err(format!("{label}: {w}")),
    };
    let main = [&r.d1_squared, &r.d2_squared, &r.anticommute]
        .iter()
        .find_map(|c| c.witness.as_ref().map(|w| format!("{label}: {}: {w}", c.name)))
        .map_or(
            Ok(r.d1_squared.blocks_checked + r.d2_squared.blocks_checked + r.anticommute.blocks_checked),
            Err,
        );
    let euler = if r.euler == Some(true) {
        Ok(())
    } else {
        Err(format!("{label}: euler {} vs colored jones {cj}", r.bigraded_euler))
    };
    BicomplexRun {
        label,
        chain_map,
        main,
        euler,
        elapsed: t0.elapsed(),
    }
}

fn criterion_4(runs: &[BicomplexRun]) -> Outcome {
    let mut blocks = 0;
    for r in runs {
        match &r.chain_map {
            Ok(n) => blocks += n,
            Err(e) => return outcome(false, e.clone()),
        }
    }
    outcome(true, format!("{} instances, {blocks} edge/degree blocks", runs.len()))
}

fn criterion_5(runs: &[BicomplexRun]) -> Outcome {
    let mut blocks = 0;
    for r in runs {
        match &r.main {
            Ok(n) => blocks += n,
            Err(e) => return outcome(false, e.clone()),
        }
    }
    let trefoil = runs
        .iter()
        .find(|r| r.label.starts_with("trefoil-r"))
        .map_or(Duration::ZERO, |r| r.elapsed);
    outcome(
        trefoil < BUDGET_TREFOIL_BICOMPLEX,
        format!("{} instances, {blocks} blocks, trefoil n=(2) in {:.1?}", runs.len(), trefoil),
    )
}

fn criterion_6(runs: &[BicomplexRun]) -> Outcome {
    for r in runs {
        if let Err(e) = &r.euler {
            return outcome(false, e.clone());
        }
    }
    let expected = LaurentPoly::from_terms(Variable::Q, [(2, 1), (0, 1), (-2, 1)]);
    let got = colored_jones_with(&corpus("unknot-0"), &ColorTuple(vec![2]), DEFAULT_CAP, StrandOrder::Leftmost).unwrap();
    outcome(
        got == expected,
        format!("{} instances; colored jones of the unknot at n=(2) is {got}", runs.len()),
    )
}

fn criterion_7() -> Outcome {
    let mut edges = 0;
    let mut notes = Vec::new();
    for name in CORPUS {
        let d = corpus(name);
        let n = ColorTuple(vec![2; d.components()]);
        let b = match build_bicomplex(&d, &n, BicomplexOptions::default()) {
            Ok(b) => b,
            Err(BicomplexError::Convention { edge, .. }) => {
                notes.push(format!("{name} edge {edge} mixes contracted and kept strands, excluded"));
                continue;
            }
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        for p in contracted_circle_parity(&b) {
            if p.degenerate {
                notes.push(format!(
                    "{name} edge {} has no crossings and {} contracted circle(s), documented",
                    p.edge, p.contracted_circles
                ));
                continue;
            }
            if !p.stable || !p.even {
                return outcome(false, format!("{name} edge {}: {p:?}", p.edge));
            }
            edges += 1;
        }
    }
    outcome(edges > 0, format!("{edges} crossing edges even on all states; {}", notes.join("; ")))
}

fn criterion_8() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240601);
    for trial in 0..1000 {
        let rows = rng.gen_range(1..=50);
        let cols = rng.gen_range(1..=50);
        let nnz = rng.gen_range(0..=(rows * cols) / 4);
        let t: Vec<(usize, usize, i64)> = (0..nnz)
            .map(|_| (rng.gen_range(0..rows), rng.gen_range(0..cols), rng.gen_range(-4..=4)))
            .collect();
        let m = IntMatrix::from_triplets(rows, cols, t);
        if !smith_normal_form(&m).verify(&m) {
            return outcome(false, format!("trial {trial}: {rows}x{cols} certificate rejected"));
        }
    }
    let kc = KhovanovComplex::build(&corpus("trefoil-r"), DEFAULT_CAP).unwrap();
    let h = homology(&kc).unwrap();
    let torsion: Vec<String> = h
        .iter()
        .flat_map(|(&(i, j), g)| g.torsion.iter().map(move |t| format!("Z/{t} at ({i},{j})")))
        .collect();
    outcome(
        torsion == ["Z/2 at (3,7)"],
        format!("1000 random matrices up to 50x50; trefoil torsion {}", torsion.join(", ")),
    )
}

fn report(i: usize, name: &str, o: &Outcome) -> bool {
    println!(
        "criterion {i} [{}] {name}: {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    o.pass
}

fn main() {
    let mut ok = true;
    let instances = khovanov_instances();
    let t0 = Instant::now();
    ok &= report(1, "Khovanov d^2 = 0", &criterion_1(&instances, t0));
    ok &= report(2, "graded Euler = Jones", &criterion_2(&instances, t0));
    ok &= report(3, "pairing complex", &criterion_3());

    let mut validated = Vec::new();
    let mut leftmost = Vec::new();
    for order in [StrandOrder::Leftmost, StrandOrder::Rightmost] {
        let runs: Vec<BicomplexRun> = BICOMPLEX_SET
            .iter()
            .chain(std::iter::once(&("trefoil-l", 2)))
            .map(|&(name, n)| run_bicomplex(name, n, order))
            .collect();
        if runs.iter().all(|r| r.chain_map.is_ok() && r.main.is_ok() && r.euler.is_ok()) {
            validated.push(format!("{order:?}"));
        }
        if order == StrandOrder::Leftmost {
            leftmost = runs;
        }
    }
    ok &= report(4, "chain maps", &criterion_4(&leftmost));
    ok &= report(5, "bicomplex identities", &criterion_5(&leftmost));
    ok &= report(6, "bigraded Euler = colored Jones", &criterion_6(&leftmost));
    ok &= report(7, "contracted-circle parity", &criterion_7());
    ok &= report(8, "Smith normal form", &criterion_8());
    println!("strand order conventions validated: {}", validated.join(", "));
    if !ok {
        std::process::exit(1);
    }
}

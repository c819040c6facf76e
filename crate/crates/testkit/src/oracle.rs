//! Random set-containment instances and a brute-force matching oracle,
//! expressed over plain integers so they stay independent of the code under test.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

pub type Gav = (String, String, String);

#[derive(Debug, Clone)]
pub struct SetsOf {
    pub coordinate: Gav,
    pub qualified: BTreeSet<u128>,
    pub unqualified: BTreeSet<u128>,
}

#[derive(Debug, Clone)]
pub struct MatchInstance {
    pub artifacts: Vec<SetsOf>,
    pub archives: Vec<SetsOf>,
    pub min_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OracleKind {
    Rebundled,
    Repackaged,
}

/// Unqualified hashes live in their own range and collide more often than
/// qualified ones, as simple names do.
fn unqualified_of(q: u128) -> u128 {
    1_000_000 + (q * 7919) % 350
}

/// At most 50 artifacts of at most 20 classes, and at most 10 archives built
/// from whole, partial and relocated copies of artifacts plus noise.
pub fn random_instance(rng: &mut impl Rng) -> MatchInstance {
    let n_artifacts = rng.gen_range(1..=50);
    let mut artifacts: Vec<SetsOf> = Vec::with_capacity(n_artifacts);
    for k in 0..n_artifacts {
        let sibling = k > 0 && rng.gen_bool(0.2);
        let (group, artifact, qualified) = if sibling {
            let prev = &artifacts[k - 1];
            let mut q = prev.qualified.clone();
            if rng.gen_bool(0.3) {
                q.insert(rng.gen_range(0..400));
            }
            (prev.coordinate.0.clone(), prev.coordinate.1.clone(), q)
        } else {
            let n = rng.gen_range(1..=20);
            let q = (0..n).map(|_| rng.gen_range(0..400u128)).collect();
            (format!("g{}", k % 5), format!("a{k}"), q)
        };
        let unqualified = qualified.iter().map(|h| unqualified_of(*h)).collect();
        artifacts.push(SetsOf { coordinate: (group, artifact, format!("{k}")), qualified, unqualified });
    }

    let n_archives = rng.gen_range(1..=10);
    let archives = (0..n_archives)
        .map(|i| {
            let mut s = SetsOf {
                coordinate: if rng.gen_bool(0.2) {
                    artifacts.choose(rng).unwrap().coordinate.clone()
                } else {
                    ("container".into(), format!("c{i}"), "1".into())
                },
                qualified: BTreeSet::new(),
                unqualified: BTreeSet::new(),
            };
            for a in &artifacts {
                match rng.gen_range(0..10) {
                    0 => {
                        s.qualified.extend(&a.qualified);
                        s.unqualified.extend(&a.unqualified);
                    }
                    1 => {
                        s.unqualified.extend(&a.unqualified);
                        s.qualified.extend(a.qualified.iter().map(|h| h + 10_000));
                    }
                    2 => {
                        let skip = rng.gen_range(0..a.qualified.len());
                        for (j, h) in a.qualified.iter().enumerate() {
                            if j != skip {
                                s.qualified.insert(*h);
                                s.unqualified.insert(unqualified_of(*h));
                            }
                        }
                    }
                    _ => {}
                }
            }
            for _ in 0..rng.gen_range(0..30) {
                let h = rng.gen_range(0..400u128);
                s.qualified.insert(h);
                s.unqualified.insert(unqualified_of(h));
            }
            s
        })
        .collect();
    MatchInstance { artifacts, archives, min_classes: rng.gen_range(1..=3) }
}

/// Direct subset tests: (artifact index, kind) for every match of `archive`.
pub fn oracle(inst: &MatchInstance, archive: &SetsOf) -> BTreeSet<(usize, OracleKind)> {
    inst.artifacts
        .iter()
        .enumerate()
        .filter(|(_, a)| a.coordinate != archive.coordinate)
        .filter_map(|(i, a)| {
            let q = a.qualified.len() >= inst.min_classes && a.qualified.is_subset(&archive.qualified);
            let u = a.unqualified.len() >= inst.min_classes && a.unqualified.is_subset(&archive.unqualified);
            match (q, u) {
                (true, _) => Some((i, OracleKind::Rebundled)),
                (false, true) => Some((i, OracleKind::Repackaged)),
                _ => None,
            }
        })
        .collect()
}

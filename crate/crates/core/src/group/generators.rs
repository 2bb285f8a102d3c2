use serde::{Deserialize, Serialize};

use super::expr::GroupExpr;
use super::perm::Perm;
use super::GroupError;

/// A finite list of permutations of `0..degree` generating a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    degree: usize,
    gens: Vec<Perm>,
}

impl GeneratorSet {
    /// An empty list is normalized to `[identity]`.
    pub fn new(degree: usize, gens: Vec<Perm>) -> Result<Self, GroupError> {
        if degree == 0 {
            return Err(GroupError::InvalidPerm("degree must be at least 1".into()));
        }
        for g in &gens {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let mut gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        if gens.is_empty() {
            gens.push(Perm::identity(degree));
        }
        Ok(GeneratorSet { degree, gens })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Generators of the group `{σ g σ⁻¹}`.
    pub fn conjugate(&self, sigma: &Perm) -> Result<Self, GroupError> {
        if sigma.degree() != self.degree {
            return Err(GroupError::DegreeMismatch {
                expected: self.degree,
                found: sigma.degree(),
            });
        }
        let inv = sigma.inverse();
        GeneratorSet::new(
            self.degree,
            self.gens
                .iter()
                .map(|g| sigma.compose(g).compose(&inv))
                .collect(),
        )
    }

    /// `{g ⊗ id} ∪ {id ⊗ h}`.
    pub fn product(&self, other: &GeneratorSet) -> GeneratorSet {
        let id_a = Perm::identity(self.degree);
        let id_b = Perm::identity(other.degree);
        let mut gens: Vec<Perm> = self.gens.iter().map(|g| g.kron(&id_b)).collect();
        gens.extend(other.gens.iter().map(|h| id_a.kron(h)));
        GeneratorSet::new(self.degree * other.degree, gens).expect("degrees agree")
    }

    /// Each side padded with the identity on the other block.
    pub fn sum(&self, other: &GeneratorSet) -> GeneratorSet {
        let id_a = Perm::identity(self.degree);
        let id_b = Perm::identity(other.degree);
        let mut gens: Vec<Perm> = self.gens.iter().map(|g| g.direct_sum(&id_b)).collect();
        gens.extend(other.gens.iter().map(|h| id_a.direct_sum(h)));
        GeneratorSet::new(self.degree + other.degree, gens).expect("degrees agree")
    }
}

/// Builds a generating set for the group denoted by `g`.
pub fn generator_set(g: &GroupExpr, max_degree: usize) -> Result<GeneratorSet, GroupError> {
    let d = g.degree();
    if d > max_degree {
        return Err(GroupError::DegreeOverflow {
            degree: d,
            max: max_degree,
            pos: 0,
        });
    }
    Ok(build(g))
}

fn build(g: &GroupExpr) -> GeneratorSet {
    match g {
        GroupExpr::Trivial(m) => GeneratorSet::new(*m, vec![]).unwrap(),
        GroupExpr::Cyclic(m) => GeneratorSet::new(*m, vec![Perm::cycle(*m)]).unwrap(),
        GroupExpr::Symmetric(m) => {
            let gens = if *m == 1 {
                vec![]
            } else {
                vec![Perm::transposition(*m, 0, 1), Perm::cycle(*m)]
            };
            GeneratorSet::new(*m, gens).unwrap()
        }
        GroupExpr::Sum(a, b) => build(a).sum(&build(b)),
        GroupExpr::Product(a, b) => build(a).product(&build(b)),
        GroupExpr::Wreath { inner, outer } => {
            let h = build(inner);
            let g = build(outer);
            let (p, q) = (g.degree, h.degree);
            let mut gens = Vec::new();
            // outer generators permute whole blocks
            for og in &g.gens {
                let mut images = vec![0; p * q];
                for i in 0..p {
                    for j in 0..q {
                        images[i * q + j] = og.apply(i) * q + j;
                    }
                }
                gens.push(Perm::from_images(images).unwrap());
            }
            // inner generators act on one representative block per outer orbit;
            // conjugation by the outer group reaches the remaining blocks
            let reps: Vec<usize> = {
                let orb = orbits(&g);
                orb.iter().map(|o| o[0]).collect()
            };
            for &block in &reps {
                for ig in &h.gens {
                    let mut images: Vec<usize> = (0..p * q).collect();
                    for j in 0..q {
                        images[block * q + j] = block * q + ig.apply(j);
                    }
                    gens.push(Perm::from_images(images).unwrap());
                }
            }
            GeneratorSet::new(p * q, gens).unwrap()
        }
    }
}

/// Orbits of the generated group on its points, each sorted, ordered by
/// their smallest element.
pub fn orbits(gs: &GeneratorSet) -> Vec<Vec<usize>> {
    let n = gs.degree;
    let mut uf = UnionFind::new(n);
    for g in &gs.gens {
        for i in 0..n {
            uf.union(i, g.apply(i));
        }
    }
    uf.groups()
}

/// Orbit label of each point, labels assigned in order of first appearance.
pub fn orbit_labels(gs: &GeneratorSet) -> Vec<usize> {
    let mut labels = vec![0; gs.degree];
    for (k, orb) in orbits(gs).iter().enumerate() {
        for &i in orb {
            labels[i] = k;
        }
    }
    labels
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    /// Component label per element, labels in order of first appearance.
    pub(crate) fn labels(&mut self) -> (Vec<u32>, usize) {
        let n = self.parent.len();
        let mut root_label = vec![u32::MAX; n];
        let mut labels = vec![0u32; n];
        let mut next = 0u32;
        for i in 0..n {
            let r = self.find(i);
            if root_label[r] == u32::MAX {
                root_label[r] = next;
                next += 1;
            }
            labels[i] = root_label[r];
        }
        (labels, next as usize)
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let (labels, count) = self.labels();
        let mut out = vec![Vec::new(); count];
        for (i, &l) in labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Enumerates the whole group by breadth-first closure.
    fn group_elements(gs: &GeneratorSet) -> HashSet<Perm> {
        let mut seen = HashSet::new();
        let id = Perm::identity(gs.degree());
        let mut frontier = vec![id.clone()];
        seen.insert(id);
        while let Some(p) = frontier.pop() {
            for g in gs.gens() {
                let q = g.compose(&p);
                if seen.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        seen
    }

    fn gens_of(text: &str) -> GeneratorSet {
        generator_set(&text.parse().unwrap(), 4096).unwrap()
    }

    #[test]
    fn base_generators() {
        assert_eq!(gens_of("S3").len(), 2);
        assert_eq!(gens_of("S1").gens(), &[Perm::identity(1)]);
        assert_eq!(gens_of("I4").gens(), &[Perm::identity(4)]);
        let z = gens_of("Z2 + Z2");
        assert_eq!(z.degree(), 4);
        assert_eq!(z.gens()[0].images(), &[1, 0, 2, 3]);
        assert_eq!(z.gens()[1].images(), &[0, 1, 3, 2]);
    }

    #[test]
    fn wreath_group_order_by_enumeration() {
        let w = gens_of("S3 wr S3");
        assert_eq!(w.degree(), 9);
        assert_eq!(w.len(), 4);
        assert_eq!(group_elements(&w).len(), 1296);
    }

    #[test]
    fn wreath_with_intransitive_outer_group() {
        // I2 outer has two orbits, so both blocks need inner generators
        let w = gens_of("Z3 wr I2");
        assert_eq!(group_elements(&w).len(), 9);
        assert_eq!(orbits(&w), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn group_orders_of_small_expressions() {
        assert_eq!(group_elements(&gens_of("S4")).len(), 24);
        assert_eq!(group_elements(&gens_of("Z5")).len(), 5);
        assert_eq!(group_elements(&gens_of("S2 * S3")).len(), 12);
        assert_eq!(group_elements(&gens_of("Z2 + S3")).len(), 12);
        assert_eq!(group_elements(&gens_of("Z2 wr Z3")).len(), 24);
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(orbits(&gens_of("S9")), vec![(0..9).collect::<Vec<_>>()]);
        assert_eq!(orbits(&gens_of("I3")), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            orbits(&gens_of("S2 + S3")),
            vec![vec![0, 1], vec![2, 3, 4]]
        );
    }
}

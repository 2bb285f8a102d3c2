//! Facelet model of the 3×3×3 cube.
//!
//! Faces are ordered U, R, F, D, L, B and facelet `f·9 + row·3 + col` is
//! read on the face's usual net orientation. Each facelet is placed in 3D
//! (cubie position and outward normal); a move rotates every facelet of a
//! layer by a quarter turn, which gives its permutation directly.

use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{example_rng, Example, Task, TaskError};
use crate::group::{GeneratorSet, Perm};

type V3 = [i32; 3];

const NORMALS: [V3; 6] = [
    [0, 1, 0],  // U
    [1, 0, 0],  // R
    [0, 0, 1],  // F
    [0, -1, 0], // D
    [-1, 0, 0], // L
    [0, 0, -1], // B
];

/// (right, down) directions of each face on the net.
const TANGENTS: [(V3, V3); 6] = [
    ([1, 0, 0], [0, 0, 1]),
    ([0, 0, -1], [0, -1, 0]),
    ([1, 0, 0], [0, -1, 0]),
    ([1, 0, 0], [0, 0, -1]),
    ([0, 0, 1], [0, -1, 0]),
    ([-1, 0, 0], [0, -1, 0]),
];

fn add(a: V3, b: V3, s: i32) -> V3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn dot(a: V3, b: V3) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Clockwise quarter turn about `u` seen from its tip.
fn rotate(u: V3, v: V3) -> V3 {
    // v cos θ + (u × v) sin θ + u (u·v)(1 − cos θ) at θ = −90°
    let (c, d) = (cross(u, v), dot(u, v));
    [d * u[0] - c[0], d * u[1] - c[1], d * u[2] - c[2]]
}

fn facelet_geometry(idx: usize) -> (V3, V3) {
    let (face, pos) = (idx / 9, idx % 9);
    let (row, col) = ((pos / 3) as i32, (pos % 3) as i32);
    let (right, down) = TANGENTS[face];
    let p = add(add(NORMALS[face], right, col - 1), down, row - 1);
    (p, NORMALS[face])
}

fn facelet_index(pos: V3, normal: V3) -> usize {
    (0..54)
        .find(|&i| facelet_geometry(i) == (pos, normal))
        .expect("rotation maps facelets to facelets")
}

/// Quarter turn about `axis` of the facelets whose position along the axis
/// satisfies `layer`.
fn turn(axis: V3, layer: impl Fn(i32) -> bool) -> Perm {
    let images = (0..54)
        .map(|i| {
            let (p, n) = facelet_geometry(i);
            if layer(dot(p, axis)) {
                facelet_index(rotate(axis, p), rotate(axis, n))
            } else {
                i
            }
        })
        .collect();
    Perm::from_images(images).expect("a rotation is a bijection")
}

/// The nine quarter-turn moves. Slices follow the usual convention: `M`
/// turns like `L`, `E` like `D`, `S` like `F`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    U,
    D,
    F,
    B,
    L,
    R,
    M,
    E,
    S,
}

pub const CUBE_MOVES: [Move; 9] = [
    Move::U,
    Move::D,
    Move::F,
    Move::B,
    Move::L,
    Move::R,
    Move::M,
    Move::E,
    Move::S,
];

impl Move {
    /// Sticker permutation: the sticker at `i` moves to `perm(i)`.
    pub fn perm(&self) -> Perm {
        let (axis, layer) = match self {
            Move::U => ([0, 1, 0], 1),
            Move::D => ([0, -1, 0], 1),
            Move::F => ([0, 0, 1], 1),
            Move::B => ([0, 0, -1], 1),
            Move::L => ([-1, 0, 0], 1),
            Move::R => ([1, 0, 0], 1),
            Move::M => ([-1, 0, 0], 0),
            Move::E => ([0, -1, 0], 0),
            Move::S => ([0, 0, 1], 0),
        };
        turn(axis, move |x| x == layer)
    }
}

/// Whole-cube quarter turns about the x, y and z axes, as sticker
/// permutations.
pub fn whole_cube_turns() -> [Perm; 3] {
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|axis| turn(axis, |_| true))
}

/// Colour permutations induced by the whole-cube turns: colour `c` (the
/// colour of face `c` when solved) goes to the face its centre moves to.
fn colour_turns() -> Vec<Perm> {
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        .iter()
        .map(|&axis| {
            let images = (0..6)
                .map(|c| {
                    let n = rotate(axis, NORMALS[c]);
                    NORMALS.iter().position(|&m| m == n).unwrap()
                })
                .collect();
            Perm::from_images(images).unwrap()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CubeGenerators {
    /// The nine moves on the 54 facelets.
    pub r54: GeneratorSet,
    /// Three whole-cube turns acting on the 6 colours.
    pub r6: GeneratorSet,
    /// `{g ⊗ id₆} ∪ {id₅₄ ⊗ h}` on the 324 encoded entries.
    pub combined: GeneratorSet,
}

pub fn cube_generators() -> CubeGenerators {
    let r54 = GeneratorSet::new(54, CUBE_MOVES.iter().map(Move::perm).collect()).unwrap();
    let r6 = GeneratorSet::new(6, colour_turns()).unwrap();
    let combined = r54.product(&r6);
    CubeGenerators { r54, r6, combined }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceletKind {
    Corner,
    Edge,
    Center,
}

pub fn facelet_kind(idx: usize) -> FaceletKind {
    match idx % 9 {
        4 => FaceletKind::Center,
        0 | 2 | 6 | 8 => FaceletKind::Corner,
        _ => FaceletKind::Edge,
    }
}

/// Colour of every facelet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeState {
    pub colours: [u8; 54],
}

impl Default for CubeState {
    fn default() -> Self {
        Self::solved()
    }
}

impl CubeState {
    pub fn solved() -> Self {
        let mut colours = [0u8; 54];
        for (i, c) in colours.iter_mut().enumerate() {
            *c = (i / 9) as u8;
        }
        CubeState { colours }
    }

    /// Moves every sticker `i` to `perm(i)`.
    pub fn apply(&self, perm: &Perm) -> Self {
        let mut colours = [0u8; 54];
        for i in 0..54 {
            colours[perm.apply(i)] = self.colours[i];
        }
        CubeState { colours }
    }

    pub fn apply_move(&self, m: Move) -> Self {
        self.apply(&m.perm())
    }

    /// Replaces every colour `c` by `perm(c)`.
    pub fn recolour(&self, perm: &Perm) -> Self {
        let mut colours = self.colours;
        colours.iter_mut().for_each(|c| *c = perm.apply(*c as usize) as u8);
        CubeState { colours }
    }

    pub fn values(&self) -> Vec<usize> {
        self.colours.iter().map(|&c| c as usize).collect()
    }

    /// Every colour appears nine times.
    pub fn colour_counts_ok(&self) -> bool {
        (0..6u8).all(|c| self.colours.iter().filter(|&&x| x == c).count() == 9)
    }
}

/// Which facelets to hide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MissingSpec {
    /// Corner, edge and centre counts.
    Exact(usize, usize, usize),
    /// Total count; types are drawn at random under the caps.
    Total(usize),
}

/// At most two corners, two edges and one centre may be hidden.
pub const MISSING_CAPS: [usize; 3] = [2, 2, 1];

impl MissingSpec {
    pub fn validate(&self) -> Result<(), TaskError> {
        let ok = match *self {
            MissingSpec::Exact(c, e, m) => c <= 2 && e <= 2 && m <= 1,
            MissingSpec::Total(t) => t <= 5,
        };
        if ok {
            Ok(())
        } else {
            Err(TaskError::Spec(format!(
                "{self:?} exceeds the caps of 2 corners, 2 edges, 1 centre"
            )))
        }
    }

    pub fn total(&self) -> usize {
        match *self {
            MissingSpec::Exact(c, e, m) => c + e + m,
            MissingSpec::Total(t) => t,
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let kinds = [FaceletKind::Corner, FaceletKind::Edge, FaceletKind::Center];
        let caps = match *self {
            MissingSpec::Exact(c, e, m) => [c, e, m],
            MissingSpec::Total(_) => MISSING_CAPS,
        };
        let mut used = [0usize; 3];
        let mut hidden = Vec::new();
        while hidden.len() < self.total() {
            let open: Vec<usize> = (0..54)
                .filter(|i| !hidden.contains(i))
                .filter(|&i| {
                    let k = kinds.iter().position(|&k| k == facelet_kind(i)).unwrap();
                    used[k] < caps[k]
                })
                .collect();
            let pick = open[rng.gen_range(0..open.len())];
            used[kinds.iter().position(|&k| k == facelet_kind(pick)).unwrap()] += 1;
            hidden.push(pick);
        }
        hidden
    }
}

impl FromStr for MissingSpec {
    type Err = TaskError;

    /// `2,2,1` or a total such as `4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TaskError::Spec(format!("bad missing spec '{s}'"));
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let spec = match parts[..] {
            [t] => MissingSpec::Total(t),
            [c, e, m] => MissingSpec::Exact(c, e, m),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Scrambles of 20–40 random quarter turns with `missing` facelets hidden.
pub fn cube_generate(count: usize, missing: MissingSpec, seed: u64) -> Result<Vec<Example>, TaskError> {
    missing.validate()?;
    let moves: Vec<Perm> = CUBE_MOVES.iter().map(Move::perm).collect();
    Ok((0..count)
        .into_par_iter()
        .map(|idx| {
            let mut rng = example_rng(seed, idx);
            let mut state = CubeState::solved();
            for _ in 0..rng.gen_range(20..=40) {
                state = state.apply(&moves[rng.gen_range(0..moves.len())]);
            }
            let mut given = [true; 54];
            for i in missing.draw(&mut rng) {
                given[i] = false;
            }
            Example::from_values(Task::Cube333, &state.values(), &given)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::pair_orbits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moves_are_quarter_turns() {
        for m in CUBE_MOVES {
            let p = m.perm();
            assert_eq!(p.order(), 4, "{m:?}");
            let moved = (0..54).filter(|&i| p.apply(i) != i).count();
            let expected = match m {
                Move::M | Move::E | Move::S => 12,
                _ => 20,
            };
            assert_eq!(moved, expected, "{m:?}");
        }
        // U sends the front top row to the left face
        let u = Move::U.perm();
        assert_eq!(u.apply(2 * 9) / 9, 4);
    }

    #[test]
    fn whole_cube_turn_is_a_product_of_moves() {
        let [x, y, z] = whole_cube_turns();
        let inv = |m: Move| m.perm().inverse();
        assert_eq!(x, Move::R.perm().compose(&inv(Move::M)).compose(&inv(Move::L)));
        assert_eq!(y, Move::U.perm().compose(&inv(Move::E)).compose(&inv(Move::D)));
        assert_eq!(z, Move::F.perm().compose(&Move::S.perm()).compose(&inv(Move::B)));
    }

    #[test]
    fn combined_group_has_48_cells() {
        let gens = cube_generators();
        assert_eq!(gens.combined.degree(), 324);
        assert_eq!(pair_orbits(&gens.combined).num_cells(), 48);
    }

    fn random_state(seed: u64) -> (CubeState, Vec<Move>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq: Vec<Move> = (0..30).map(|_| CUBE_MOVES[rng.gen_range(0..9)]).collect();
        let state = seq.iter().fold(CubeState::solved(), |s, &m| s.apply_move(m));
        (state, seq)
    }

    fn encode(s: &CubeState) -> Vec<bool> {
        Example::from_values(Task::Cube333, &s.values(), &[true; 54]).bits
    }

    #[test]
    fn generators_map_solvable_states_to_solvable_states() {
        let gens = cube_generators();
        let turns = whole_cube_turns();
        for seed in 0..20 {
            let (state, seq) = random_state(seed);
            let bits = encode(&state);
            for (gi, g) in gens.combined.gens().iter().enumerate() {
                let mut moved = vec![false; 324];
                for i in 0..324 {
                    moved[g.apply(i)] = bits[i];
                }
                let expected = if gi < 9 {
                    // a face or slice move of the underlying cube
                    state.apply_move(CUBE_MOVES[gi])
                } else {
                    // recolouring by a whole-cube turn X equals applying X⁻¹
                    // to the solved cube before the scramble, so the state
                    // stays reachable
                    let x = &turns[gi - 9];
                    let start = CubeState::solved().apply(&x.inverse());
                    let reached = seq.iter().fold(start, |s, &m| s.apply_move(m));
                    assert_eq!(reached, state.recolour(&gens.r6.gens()[gi - 9]));
                    reached
                };
                assert_eq!(moved, encode(&expected));
                assert!(expected.colour_counts_ok());
            }
        }
    }

    #[test]
    fn missing_facelets_follow_the_spec() {
        let data = cube_generate(50, MissingSpec::Exact(2, 2, 1), 1).unwrap();
        for ex in &data {
            ex.validate().unwrap();
            assert_eq!(ex.masked_count(), 5);
        }
        let full = cube_generate(5, MissingSpec::Exact(0, 0, 0), 2).unwrap();
        assert!(full.iter().all(|e| e.masked_count() == 0));
        assert!(cube_generate(1, MissingSpec::Exact(3, 0, 0), 0).is_err());
        assert_eq!(
            cube_generate(3, MissingSpec::Total(4), 7).unwrap(),
            cube_generate(3, MissingSpec::Total(4), 7).unwrap()
        );
    }

    #[test]
    fn type_caps_hold_over_many_draws() {
        let data = cube_generate(1000, MissingSpec::Total(5), 3).unwrap();
        let mut centre_seen = 0;
        for ex in &data {
            let hidden: Vec<usize> = ex
                .given_blocks()
                .iter()
                .enumerate()
                .filter_map(|(i, &g)| (!g).then_some(i))
                .collect();
            assert_eq!(hidden.len(), 5);
            let count = |k| hidden.iter().filter(|&&i| facelet_kind(i) == k).count();
            assert!(count(FaceletKind::Corner) <= 2);
            assert!(count(FaceletKind::Edge) <= 2);
            assert!(count(FaceletKind::Center) <= 1);
            centre_seen += count(FaceletKind::Center);
        }
        assert_eq!(centre_seen, 1000);
        let data = cube_generate(1000, MissingSpec::Total(3), 4).unwrap();
        let centres: usize = data
            .iter()
            .map(|ex| (0..54).filter(|&i| !ex.given_blocks()[i] && facelet_kind(i) == FaceletKind::Center).count())
            .sum();
        // some but not all draws include the centre
        assert!(centres > 0 && centres < 1000);
    }

    #[test]
    fn missing_spec_parsing() {
        assert_eq!("2,2,1".parse::<MissingSpec>().unwrap(), MissingSpec::Exact(2, 2, 1));
        assert_eq!("4".parse::<MissingSpec>().unwrap(), MissingSpec::Total(4));
        assert!("3,0,0".parse::<MissingSpec>().is_err());
        assert!("1,2".parse::<MissingSpec>().is_err());
    }
}

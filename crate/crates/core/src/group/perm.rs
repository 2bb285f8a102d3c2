use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GroupError;

/// A permutation of `0..n`, stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n).collect(),
        }
    }

    /// Validates that `images` is a bijection on `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Result<Self, GroupError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(GroupError::InvalidPerm(format!(
                    "image {x} is out of range or repeated (degree {n})"
                )));
            }
            seen[x] = true;
        }
        Ok(Perm { images })
    }

    /// The cycle `i -> i + 1 mod n`.
    pub fn cycle(n: usize) -> Self {
        Perm {
            images: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Perm { images }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Perm { images }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Perm {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Perm { images }
    }

    /// Block-diagonal sum: `self` on the first block, `other` shifted onto the second.
    pub fn direct_sum(&self, other: &Perm) -> Perm {
        let p = self.degree();
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|&x| x + p));
        Perm { images }
    }

    /// Kronecker product: `(a, b) -> (self(a), other(b))` on index `a * q + b`.
    pub fn kron(&self, other: &Perm) -> Perm {
        let q = other.degree();
        let mut images = Vec::with_capacity(self.degree() * q);
        for a in 0..self.degree() {
            for b in 0..q {
                images.push(self.images[a] * q + other.images[b]);
            }
        }
        Perm { images }
    }

    /// Permutation matrix with `P[(g(i), i)] = 1`, so that `P e_i = e_{g(i)}`.
    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.degree();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (i, &x) in self.images.iter().enumerate() {
            m[(x, i)] = 1.0;
        }
        m
    }

    /// Order of the permutation (lcm of cycle lengths).
    pub fn order(&self) -> usize {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut order = 1usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images)
    }
}

impl TryFrom<Vec<usize>> for Perm {
    type Error = GroupError;

    fn try_from(images: Vec<usize>) -> Result<Self, Self::Error> {
        Perm::from_images(images)
    }
}

impl From<Perm> for Vec<usize> {
    fn from(p: Perm) -> Self {
        p.images
    }
}

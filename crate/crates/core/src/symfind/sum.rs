//! Direct-sum detection by greedy index swapping.
//!
//! Indices are reordered so that each diagonal block follows a cyclic
//! pattern (entry `(x, y)` equals entry `(x - 1, y - 1)` inside the block)
//! and every off-diagonal block is constant. Each diagonal block is then
//! handed back to the main search, or recognised as a wreath product.

use nalgebra::DMatrix;

use super::kron::wreath_split;
use super::twins::{align, group_aligned, twin_classes};
use super::{candidate_distance, entry_tol, find, permute, SymFindConfig, Stats};
use crate::group::{GroupExpr, Perm};

/// Finds a split `m = p₁ + … + p_N` and a permutation under which the
/// off-diagonal blocks of `M` are constant, and recurses on the diagonal
/// blocks.
pub fn sum_find(m: &DMatrix<f64>, cfg: &SymFindConfig) -> (GroupExpr, Perm) {
    assert!(m.is_square(), "sum_find needs a square matrix");
    let mut stats = Stats::default();
    sum_find_inner(m, cfg, 0, &mut stats)
}

pub(crate) fn sum_find_inner(
    m: &DMatrix<f64>,
    cfg: &SymFindConfig,
    depth: usize,
    stats: &mut Stats,
) -> (GroupExpr, Perm) {
    let n = m.nrows();
    let tol = entry_tol(m, cfg);
    let (order, bounds) = split(m, tol, cfg.backtrack_budget, stats);

    let mut parts = Vec::with_capacity(bounds.len());
    let mut images = vec![0usize; n];
    for &(s, e) in &bounds {
        let block = permute(m, &order[s..e]);
        let (h, local) = block_group(&block, e - s == n, cfg, depth, stats);
        for (i, &l) in local.images().iter().enumerate() {
            images[s + i] = order[s + l];
        }
        parts.push(h);
    }
    let plain = (
        GroupExpr::sum_all(parts),
        Perm::from_images(images).expect("block permutations compose"),
    );

    match merge_blocks(m, &order, &bounds, tol, cfg, depth, stats) {
        Some(merged) if merged.0.basis_dim() < plain.0.basis_dim() => {
            let d = candidate_distance(m, &merged.0, &merged.1);
            if d <= cfg.lambda2 {
                merged
            } else {
                plain
            }
        }
        _ => plain,
    }
}

/// Blocks larger than this are not split into inner blocks when merging.
const ATOM_MAX: usize = 256;

/// Splits every block into inner blocks of interchangeable points where
/// possible, then merges blocks with matching diagonal blocks into wreath
/// summands. Returns `None` when nothing merges.
fn merge_blocks(
    m: &DMatrix<f64>,
    order: &[usize],
    bounds: &[(usize, usize)],
    tol: f64,
    cfg: &SymFindConfig,
    depth: usize,
    stats: &mut Stats,
) -> Option<(GroupExpr, Perm)> {
    let n = m.nrows();
    let mut atoms: Vec<Vec<usize>> = Vec::new();
    for &(s, e) in bounds {
        let pts = &order[s..e];
        let b = pts.len();
        let split = if (4..=ATOM_MAX).contains(&b) {
            (2..b)
                .filter(|q| b % q == 0)
                .find_map(|q| twin_classes(m, pts, q, tol))
        } else {
            None
        };
        match split {
            Some(classes) => atoms.extend(classes),
            None => atoms.push(pts.to_vec()),
        }
    }
    let groups = group_aligned(m, atoms, tol);
    if groups.iter().all(|g| g.len() == 1) {
        return None;
    }

    let mut parts = Vec::with_capacity(groups.len());
    let mut images = Vec::with_capacity(n);
    let push_single = |pts: &[usize], parts: &mut Vec<GroupExpr>, images: &mut Vec<usize>, stats: &mut Stats| {
        let (h, local) = if pts.len() == 1 {
            (GroupExpr::Trivial(1), Perm::identity(1))
        } else {
            let (h, p, _) = find(&permute(m, pts), cfg, depth + 1, stats, None);
            (h, p)
        };
        images.extend(local.images().iter().map(|&l| pts[l]));
        parts.push(h);
    };
    for group in &groups {
        if group.len() == 1 {
            push_single(&group[0], &mut parts, &mut images, stats);
            continue;
        }
        let (p, q) = (group.len(), group[0].len());
        let union: Vec<usize> = group.concat();
        let merged = wreath_split(&permute(m, &union), p, q, tol).and_then(|w| {
            let (g, sg, _) = find(&w.a, cfg, depth + 1, stats, None);
            let (h, sh, _) = find(&w.b, cfg, depth + 1, stats, None);
            (!(g.is_trivial() && h.is_trivial())).then(|| (GroupExpr::wreath(h, g), sg.kron(&sh)))
        });
        match merged {
            Some((expr, local)) => {
                images.extend(local.images().iter().map(|&l| union[l]));
                parts.push(expr);
            }
            None => {
                for atom in group {
                    push_single(atom, &mut parts, &mut images, stats);
                }
            }
        }
    }
    Some((
        GroupExpr::sum_all(parts),
        Perm::from_images(images).expect("atoms partition the points"),
    ))
}

/// `M'[i, j] = M[order[i], order[j]]` without materialising `M'`.
struct View<'a> {
    m: &'a DMatrix<f64>,
    order: &'a [usize],
}

impl View<'_> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.m[(self.order[i], self.order[j])]
    }
}

/// Returns the reordering and the half-open block ranges.
fn split(
    m: &DMatrix<f64>,
    tol: f64,
    budget: usize,
    stats: &mut Stats,
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut bounds = Vec::new();
    let mut s = 0;
    while s < n {
        if s + 1 == n {
            bounds.push((s, n));
            break;
        }
        // candidates for the second index, closest diagonal first
        let d0 = m[(order[s], order[s])];
        let mut k1s: Vec<(f64, usize)> = (s + 1..n)
            .map(|k| ((m[(order[k], order[k])] - d0).abs(), k))
            .filter(|&(d, _)| d <= tol)
            .collect();
        k1s.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if k1s.len() > budget {
            stats.budget_hits += 1;
            k1s.truncate(budget);
        }

        let mut closed = None;
        for &(_, k1) in &k1s {
            let mut trial = order.clone();
            trial.swap(s + 1, k1);
            let end = grow(m, &mut trial, s, tol);
            if separated(m, &trial, s, end, tol) {
                closed = Some((trial, end));
                break;
            }
        }
        match closed {
            Some((trial, end)) => {
                order = trial;
                bounds.push((s, end));
                s = end;
            }
            None => {
                bounds.push((s, s + 1));
                s += 1;
            }
        }
    }
    (order, bounds)
}

/// Extends the block starting at `s` (whose first two indices are placed)
/// while some remaining index continues the cyclic pattern. Returns the
/// block end.
fn grow(m: &DMatrix<f64>, order: &mut [usize], s: usize, tol: f64) -> usize {
    let n = order.len();
    let mut t = s + 2;
    while t < n {
        let mut best: Option<(f64, usize)> = None;
        {
            let v = View { m, order };
            for k in t..n {
                if let Some(err) = l_shape_error(&v, s, t, k, tol) {
                    if best.map_or(true, |(e, _)| err < e) {
                        best = Some((err, k));
                    }
                }
            }
        }
        match best {
            Some((_, k)) => {
                order.swap(t, k);
                t += 1;
            }
            None => break,
        }
    }
    t
}

/// Largest deviation of the L-shaped entries of candidate `k` placed at
/// position `t`, or `None` as soon as one exceeds `tol`.
#[inline]
fn l_shape_error(v: &View, s: usize, t: usize, k: usize, tol: f64) -> Option<f64> {
    let ok = v.order[k];
    let m = v.m;
    let mut worst = (m[(ok, ok)] - v.at(t - 1, t - 1)).abs();
    if worst > tol {
        return None;
    }
    for x in s + 1..t {
        let e = (m[(v.order[x], ok)] - v.at(x - 1, t - 1)).abs();
        if e > tol {
            return None;
        }
        worst = worst.max(e);
        let e = (m[(ok, v.order[x])] - v.at(t - 1, x - 1)).abs();
        if e > tol {
            return None;
        }
        worst = worst.max(e);
    }
    Some(worst)
}

/// Rows of `M'[s..end, end..]` agree, and so do columns of `M'[end.., s..end]`.
fn separated(m: &DMatrix<f64>, order: &[usize], s: usize, end: usize, tol: f64) -> bool {
    let v = View { m, order };
    let n = order.len();
    let len = (end - s) as f64;
    for c in end..n {
        let mean_col: f64 = (s..end).map(|x| v.at(x, c)).sum::<f64>() / len;
        if (s..end).any(|x| (v.at(x, c) - mean_col).abs() > tol) {
            return false;
        }
        let mean_row: f64 = (s..end).map(|y| v.at(c, y)).sum::<f64>() / len;
        if (s..end).any(|y| (v.at(c, y) - mean_row).abs() > tol) {
            return false;
        }
    }
    true
}

/// Chooses the group for one diagonal block: the recursive search (or the
/// cyclic group when the block is the whole matrix) and every wreath
/// rearrangement that passes the constancy test. The admissible option with
/// the fewest basis elements wins.
fn block_group(
    block: &DMatrix<f64>,
    whole: bool,
    cfg: &SymFindConfig,
    depth: usize,
    stats: &mut Stats,
) -> (GroupExpr, Perm) {
    let b = block.nrows();
    if b == 1 {
        return (GroupExpr::Trivial(1), Perm::identity(1));
    }
    let tol = entry_tol(block, cfg);
    let mut options: Vec<(GroupExpr, Perm, f64)> = Vec::new();
    if whole {
        let z = GroupExpr::Cyclic(b);
        let id = Perm::identity(b);
        let d = candidate_distance(block, &z, &id);
        options.push((z, id, d));
    } else {
        options.push(find(block, cfg, depth + 1, stats, None));
    }

    for p in 2..b {
        if b % p != 0 {
            continue;
        }
        let q = b / p;
        let mut arrangements = vec![natural(b), transposed_grid(p, q)];
        if let Some(classes) = twin_classes(block, &natural(b), q, tol) {
            let aligned: Option<Vec<Vec<usize>>> =
                classes.iter().map(|c| align(block, &classes[0], c, tol)).collect();
            if let Some(aligned) = aligned {
                arrangements.push(aligned.concat());
            }
        }
        for arrangement in arrangements {
            let sub = permute(block, &arrangement);
            let Some(parts) = wreath_split(&sub, p, q, tol) else {
                continue;
            };
            let (g, sg, _) = find(&parts.a, cfg, depth + 1, stats, None);
            let (h, sh, _) = find(&parts.b, cfg, depth + 1, stats, None);
            if g.is_trivial() && h.is_trivial() {
                continue;
            }
            let expr = GroupExpr::wreath(h, g);
            let inner = sg.kron(&sh);
            let perm = Perm::from_images(inner.images().iter().map(|&i| arrangement[i]).collect())
                .expect("rearranged block permutation");
            let d = candidate_distance(block, &expr, &perm);
            options.push((expr, perm, d));
        }
    }

    let mut best = 0;
    for (k, o) in options.iter().enumerate().skip(1) {
        if o.2 > cfg.lambda2 {
            continue;
        }
        let (dk, db) = (o.0.basis_dim(), options[best].0.basis_dim());
        if options[best].2 > cfg.lambda2 || dk < db || (dk == db && o.2 < options[best].2) {
            best = k;
        }
    }
    let (e, p, _) = options.swap_remove(best);
    (e, p)
}

fn natural(b: usize) -> Vec<usize> {
    (0..b).collect()
}

/// New position `c·q + r` takes old position `r·p + c`: turns an ordering that
/// visits one point per block in turn into contiguous blocks.
fn transposed_grid(p: usize, q: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(p * q);
    for c in 0..p {
        for r in 0..q {
            out.push(r * p + c);
        }
    }
    out
}

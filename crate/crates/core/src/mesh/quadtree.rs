//! Graded quadtree triangulation of the comb box `(-1,1) x (-1,0)`.
//!
//! Cells are addressed by `(level, i, j)`; level-0 cells have side
//! `2^-p <= h`. Top-row cells overlapping the base of tooth `n` are split
//! until their side equals `2 a_n^2 / n0` so the base carries `n0 >= 4`
//! edges, then the tree is 2:1 balanced across edges. Every leaf is
//! triangulated as a fan from its centre through its corners and any
//! hanging midpoints, which keeps the mesh conforming.
//!
//! All positions live on an integer lattice of spacing `2^-E` so the tooth
//! bases at `2^-n +- 16^-n` are hit exactly for any number of teeth.

use std::collections::{BTreeSet, HashMap};

use super::domain::comb_height;
use super::Point2;
use crate::scalar::Real;

type Cell = (u32, i128, i128);

pub(super) struct CombBox {
    #[cfg_attr(not(test), allow(dead_code))]
    p: u32,
    e: u32,
    keys: Vec<(i128, i128)>,
    index: HashMap<(i128, i128), usize>,
    triangles: Vec<[usize; 3]>,
    bases: Vec<(i128, i128)>,
}

fn pow2_at_least(x: f64) -> u32 {
    let mut k = 0;
    while ((1u64 << k) as f64) < x {
        k += 1;
    }
    k
}

impl CombBox {
    pub(super) fn new(teeth: usize, h: f64) -> Self {
        let p = pow2_at_least(1.0 / h);
        // Per tooth: level of the base cells.
        let targets: Vec<u32> = (1..=teeth)
            .map(|n| {
                let a = comb_height(n);
                let k = pow2_at_least((2.0 * a * a / h).ceil()).max(2);
                4 * n as u32 + k - 1 - p
            })
            .collect();
        let lmax = targets.iter().copied().max().unwrap_or(0);
        let e = p + lmax + 1;
        let one: i128 = 1 << e;
        let bases: Vec<(i128, i128)> = (1..=teeth)
            .map(|n| {
                let c = one + (one >> n);
                let half = one >> (4 * n);
                (c - half, c + half)
            })
            .collect();
        let shift = |l: u32| e - p - l;

        let mut leaves: BTreeSet<Cell> = BTreeSet::new();
        let mut stack: Vec<Cell> = Vec::new();
        for i in 0..(2i128 << p) {
            for j in 0..(1i128 << p) {
                stack.push((0, i, j));
            }
        }
        while let Some((l, i, j)) = stack.pop() {
            let s = shift(l);
            let top = (j + 1) << s == one;
            let (lo, hi) = (i << s, (i + 1) << s);
            let split = top
                && bases
                    .iter()
                    .zip(&targets)
                    .any(|(&(blo, bhi), &t)| lo < bhi && hi > blo && l < t);
            if split {
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    stack.push((l + 1, 2 * i + di, 2 * j + dj));
                }
            } else {
                leaves.insert((l, i, j));
            }
        }
        balance(&mut leaves, p);

        let mut keys = Vec::new();
        let mut index = HashMap::new();
        for &(l, i, j) in &leaves {
            let s = shift(l);
            for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                add_key(&mut index, &mut keys, ((i + di) << s, (j + dj) << s));
            }
        }
        let mut triangles = Vec::with_capacity(6 * leaves.len());
        for &(l, i, j) in &leaves {
            let s = shift(l);
            let (x0, y0, x1, y1) = (i << s, j << s, (i + 1) << s, (j + 1) << s);
            let (xm, ym) = ((x0 + x1) / 2, (y0 + y1) / 2);
            let ring = [
                (x0, y0),
                (xm, y0),
                (x1, y0),
                (x1, ym),
                (x1, y1),
                (xm, y1),
                (x0, y1),
                (x0, ym),
            ];
            let around: Vec<usize> = ring
                .iter()
                .enumerate()
                .filter_map(|(k, key)| {
                    let id = index.get(key).copied();
                    if k % 2 == 0 {
                        Some(id.expect("leaf corner registered"))
                    } else {
                        id
                    }
                })
                .collect();
            let c = add_key(&mut index, &mut keys, (xm, ym));
            for k in 0..around.len() {
                triangles.push([c, around[k], around[(k + 1) % around.len()]]);
            }
        }
        CombBox {
            p,
            e,
            keys,
            index,
            triangles,
            bases,
        }
    }

    pub(super) fn triangulate<T: Real>(&self) -> (Vec<Point2<T>>, Vec<[usize; 3]>) {
        let one: i128 = 1 << self.e;
        let ex = -(self.e as i32);
        let vertices = self
            .keys
            .iter()
            .map(|&(x, y)| Point2::new(T::dyadic(x - one, ex), T::dyadic(y - one, ex)))
            .collect();
        (vertices, self.triangles.clone())
    }

    /// Vertices on the base of tooth `n`, left to right.
    pub(super) fn tooth_base(&self, n: usize) -> Vec<usize> {
        let one: i128 = 1 << self.e;
        let (lo, hi) = self.bases[n - 1];
        let mut on: Vec<(i128, usize)> = self
            .index
            .iter()
            .filter(|(&(x, y), _)| y == one && x >= lo && x <= hi)
            .map(|(&(x, _), &v)| (x, v))
            .collect();
        on.sort_unstable();
        debug_assert!(on.len() >= 5 && on[0].0 == lo && on[on.len() - 1].0 == hi);
        on.into_iter().map(|(_, v)| v).collect()
    }

    #[cfg(test)]
    fn root_level(&self) -> u32 {
        self.p
    }
}

fn add_key(index: &mut HashMap<(i128, i128), usize>, keys: &mut Vec<(i128, i128)>, k: (i128, i128)) -> usize {
    *index.entry(k).or_insert_with(|| {
        keys.push(k);
        keys.len() - 1
    })
}

/// Split leaves until edge-adjacent leaves differ by at most one level.
fn balance(leaves: &mut BTreeSet<Cell>, p: u32) {
    let mut queue: Vec<Cell> = leaves.iter().copied().collect();
    while let Some(cell) = queue.pop() {
        if !leaves.contains(&cell) {
            continue;
        }
        let (l, i, j) = cell;
        let (nx, ny) = (2i128 << (p + l), 1i128 << (p + l));
        for (di, dj) in [(-1i128, 0i128), (1, 0), (0, -1), (0, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= nx || nj >= ny {
                continue;
            }
            let owner = (0..=l)
                .rev()
                .map(|k| (k, ni >> (l - k), nj >> (l - k)))
                .find(|c| leaves.contains(c));
            if let Some(o) = owner {
                if o.0 + 1 < l {
                    leaves.remove(&o);
                    for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let child = (o.0 + 1, 2 * o.1 + a, 2 * o.2 + b);
                        leaves.insert(child);
                        queue.push(child);
                    }
                    queue.push(cell);
                }
            }
        }
    }
}

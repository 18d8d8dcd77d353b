//! Subset enumeration and sampling shared by the geometry, model and
//! information-theory modules.

use rand::Rng;

/// Binomial coefficient C(n, k), `None` on overflow of `u128`.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// Iterator over all size-`s` subsets of `{0, .., p-1}` in colexicographic
/// order (sorted by largest element, then next largest, ...).
///
/// The order is deterministic, which makes enumeration caps and extremal
/// witnesses reproducible.
pub struct SubsetsColex {
    p: usize,
    current: Option<Vec<usize>>,
}

impl SubsetsColex {
    pub fn new(p: usize, s: usize) -> Self {
        let current = if s <= p {
            Some((0..s).collect())
        } else {
            None
        };
        SubsetsColex { p, current }
    }
}

impl Iterator for SubsetsColex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let s = current.len();
        let mut next = current.clone();
        let mut advanced = false;
        for i in 0..s {
            let limit = if i + 1 < s { next[i + 1] } else { self.p };
            if next[i] + 1 < limit {
                next[i] += 1;
                for (j, slot) in next.iter_mut().enumerate().take(i) {
                    *slot = j;
                }
                advanced = true;
                break;
            }
        }
        if advanced {
            self.current = Some(next);
        }
        Some(current)
    }
}

/// Uniformly random size-`s` subset of `{0, .., p-1}` via partial
/// Fisher-Yates, returned sorted ascending.
pub fn random_subset<R: Rng + ?Sized>(p: usize, s: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(s <= p);
    let mut pool: Vec<usize> = (0..p).collect();
    for i in 0..s {
        let j = rng.gen_range(i..p);
        pool.swap(i, j);
    }
    let mut subset = pool[..s].to_vec();
    subset.sort_unstable();
    subset
}

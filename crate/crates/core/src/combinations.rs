//! k-subsets in colexicographic order.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Iterator over the k-subsets of `0..n` in colex order.
#[derive(Debug, Clone)]
pub struct Colex {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Colex {
    pub fn new(n: usize, k: usize) -> Self {
        Colex {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Colex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let k = current.len();
        let mut next = current.clone();
        let pivot = (0..k).find(|&i| {
            let limit = if i + 1 < k { next[i + 1] } else { self.n };
            next[i] + 1 < limit
        });
        if let Some(i) = pivot {
            next[i] += 1;
            for (slot, v) in next[..i].iter_mut().zip(0..) {
                *slot = v;
            }
            self.current = Some(next);
        }
        Some(current)
    }
}

/// The subset at position `rank` in colex order.
pub fn colex_unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    debug_assert!(rank < binomial(n, k));
    let mut out = vec![0; k];
    let mut upper = n;
    for i in (1..=k).rev() {
        let mut c = upper;
        while binomial(c, i) > rank {
            c -= 1;
        }
        out[i - 1] = c;
        rank -= binomial(c, i);
        upper = c;
    }
    out
}

pub fn colex_rank(subset: &[usize]) -> u128 {
    subset.iter().enumerate().map(|(i, &c)| binomial(c, i + 1)).sum()
}

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest ground size accepted by [`enumerate_nc`].
pub const MAX_NC_SIZE: usize = 12;

/// A set partition of `{1, …, p}`; blocks sorted internally and by minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SetPartition {
    p: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(p: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; p + 1];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            for &v in b {
                if v == 0 || v > p || seen[v] {
                    return Err(Error::InvalidArgument(format!(
                        "element {v} repeated or outside 1..={p}"
                    )));
                }
                seen[v] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::InvalidArgument("blocks do not cover the ground set".into()));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { p, blocks })
    }

    /// Builds from block labels of elements `1..=p` (any labelling).
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut map: Vec<(usize, usize)> = Vec::new();
        for (pos, &lab) in labels.iter().enumerate() {
            match map.iter().find(|(l, _)| *l == lab) {
                Some(&(_, b)) => blocks[b].push(pos + 1),
                None => {
                    map.push((lab, blocks.len()));
                    blocks.push(vec![pos + 1]);
                }
            }
        }
        Self {
            p: labels.len(),
            blocks,
        }
    }

    pub fn one_block(p: usize) -> Self {
        Self {
            p,
            blocks: vec![(1..=p).collect()],
        }
    }

    pub fn singletons(p: usize) -> Self {
        Self {
            p,
            blocks: (1..=p).map(|v| vec![v]).collect(),
        }
    }

    pub fn ground_size(&self) -> usize {
        self.p
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// `|π|`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block label of each element `1..=p`.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.p];
        for (k, b) in self.blocks.iter().enumerate() {
            for &v in b {
                out[v - 1] = k;
            }
        }
        out
    }

    /// No `a < b < c < d` with `a, c` in one block and `b, d` in another.
    pub fn is_noncrossing(&self) -> bool {
        let lab = self.labels();
        let p = self.p;
        for a in 0..p {
            for b in a + 1..p {
                if lab[b] == lab[a] {
                    continue;
                }
                for c in b + 1..p {
                    if lab[c] != lab[a] {
                        continue;
                    }
                    if (c + 1..p).any(|d| lab[d] == lab[b]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            let items: Vec<String> = b.iter().map(|v| v.to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        f.write_str("}")
    }
}

/// All set partitions of `{1..p}` via restricted growth strings.
pub fn enumerate_set_partitions(p: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; p];
    grow(
        &mut labels,
        0,
        0,
        &mut |l| out.push(SetPartition::from_labels(l)),
        false,
    );
    out
}

/// Depth-first restricted-growth enumeration; with `prune` set, a branch is
/// cut as soon as the element just placed closes a crossing.
fn grow(labels: &mut [usize], pos: usize, used: usize, emit: &mut impl FnMut(&[usize]), prune: bool) {
    if pos == labels.len() {
        emit(labels);
        return;
    }
    for lab in 0..=used {
        if prune && lab < used && closes_crossing(labels, pos, lab) {
            continue;
        }
        labels[pos] = lab;
        grow(labels, pos + 1, used.max(lab + 1), emit, prune);
    }
}

/// Adding `pos` to block `lab` whose last element is `l` crosses iff some
/// other block has an element in `(l, pos)` and one before `l`.
fn closes_crossing(labels: &[usize], pos: usize, lab: usize) -> bool {
    let last = (0..pos).rev().find(|&j| labels[j] == lab).expect("block exists");
    (last + 1..pos).any(|mid| {
        let other = labels[mid];
        other != lab && (0..last).any(|j| labels[j] == other)
    })
}

/// `NC(p)` for `1 ≤ p ≤ 12`, memoized.
pub fn enumerate_nc(p: usize) -> Result<Arc<Vec<SetPartition>>> {
    static CACHE: [OnceLock<Arc<Vec<SetPartition>>>; MAX_NC_SIZE + 1] = [const { OnceLock::new() }; MAX_NC_SIZE + 1];
    if p == 0 || p > MAX_NC_SIZE {
        return Err(Error::InvalidArgument(format!("p = {p} outside 1..={MAX_NC_SIZE}")));
    }
    Ok(Arc::clone(CACHE[p].get_or_init(|| {
        let mut out = Vec::new();
        let mut labels = vec![0usize; p];
        grow(&mut labels, 0, 0, &mut |l| out.push(SetPartition::from_labels(l)), true);
        Arc::new(out)
    })))
}

/// Kreweras complement `K(π) = π^{-1}γ` with `γ = (1 2 … p)` and `π` read as
/// the permutation cycling each block increasingly.
pub fn kreweras(pi: &SetPartition) -> Result<SetPartition> {
    if !pi.is_noncrossing() {
        return Err(Error::Crossing);
    }
    let p = pi.p;
    let mut inv = vec![0usize; p];
    for b in &pi.blocks {
        for (k, &v) in b.iter().enumerate() {
            let next = b[(k + 1) % b.len()];
            inv[next - 1] = v - 1;
        }
    }
    let composed: Vec<usize> = (0..p).map(|v| inv[(v + 1) % p]).collect();
    let mut labels = vec![usize::MAX; p];
    let mut next_label = 0;
    for start in 0..p {
        if labels[start] != usize::MAX {
            continue;
        }
        let mut v = start;
        while labels[v] == usize::MAX {
            labels[v] = next_label;
            v = composed[v];
        }
        next_label += 1;
    }
    Ok(SetPartition::from_labels(&labels))
}

/// `#{π ∈ NC(p) : |π| = r}`, counted from the enumeration.
pub fn narayana_count(p: usize, r: usize) -> Result<u64> {
    if r == 0 || r > p {
        return Err(Error::InvalidArgument(format!("r = {r} outside 1..={p}")));
    }
    Ok(enumerate_nc(p)?.iter().filter(|pi| pi.num_blocks() == r).count() as u64)
}

/// `|NC(p)|`, counted from the enumeration.
pub fn catalan(p: usize) -> Result<u64> {
    Ok(enumerate_nc(p)?.len() as u64)
}

/// `Σ_{π ∈ NC(p)} t^{|π|}`.
pub fn free_poisson_moment(t: f64, p: usize) -> Result<f64> {
    let mut by_blocks = vec![0u64; p + 1];
    for pi in enumerate_nc(p)?.iter() {
        by_blocks[pi.num_blocks()] += 1;
    }
    Ok((1..=p).map(|r| by_blocks[r] as f64 * t.powi(r as i32)).sum())
}

/// `Δ(π, σ) = 1` iff `|b ∩ c| = |(b-1) ∩ c|` for all blocks `b ∈ π`, `c ∈ σ`,
/// with `b - 1` the cyclic shift down by one on `{1..p}`.
pub fn delta_pair(pi: &SetPartition, sigma: &SetPartition) -> Result<u8> {
    if pi.p != sigma.p {
        return Err(Error::ShapeMismatch(format!("ground sizes {} and {}", pi.p, sigma.p)));
    }
    let p = pi.p;
    let sl = sigma.labels();
    let k = sigma.num_blocks();
    for b in &pi.blocks {
        let mut plain = vec![0i64; k];
        let mut shifted = vec![0i64; k];
        for &v in b {
            plain[sl[v - 1]] += 1;
            let down = if v == 1 { p } else { v - 1 };
            shifted[sl[down - 1]] += 1;
        }
        if plain != shifted {
            return Ok(0);
        }
    }
    Ok(1)
}

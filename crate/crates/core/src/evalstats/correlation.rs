//! Pearson, Spearman and Kendall tau-b.

use crate::error::{Error, Result};

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("correlation input contains a non-finite value".into()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson_unchecked(x, y)
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantVector);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn fractional_ranks(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    ranks_into(v, &mut vec![(0.0, 0); v.len()], &mut out);
    out
}

/// Inputs up to this length are ranked and paired in stack buffers.
const STACK_LEN: usize = 32;

/// Sorts by the first component; insertion sort for short inputs.
fn sort_by_value<T: Copy>(v: &mut [(f64, T)]) {
    if v.len() > STACK_LEN {
        v.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        return;
    }
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && x.0 < v[j - 1].0 {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

/// Writes the ranks of the finite values `v` into `out`, using `order` as
/// scratch. A run of ties at sorted positions `lo..hi` gets the mean of
/// `lo + 1 ..= hi`.
fn ranks_into(v: &[f64], order: &mut [(f64, usize)], out: &mut [f64]) {
    for (i, (o, x)) in order.iter_mut().zip(v).enumerate() {
        *o = (*x, i);
    }
    sort_by_value(order);
    let mut lo = 0;
    while lo < order.len() {
        let mut hi = lo + 1;
        while hi < order.len() && order[hi].0 == order[lo].0 {
            hi += 1;
        }
        let rank = (lo + hi + 1) as f64 / 2.0;
        for o in &order[lo..hi] {
            out[o.1] = rank;
        }
        lo = hi;
    }
}

/// Pearson correlation of fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    if n <= STACK_LEN {
        let (mut rx, mut ry, mut order) = ([0.0; STACK_LEN], [0.0; STACK_LEN], [(0.0, 0); STACK_LEN]);
        ranks_into(x, &mut order[..n], &mut rx[..n]);
        ranks_into(y, &mut order[..n], &mut ry[..n]);
        return pearson_unchecked(&rx[..n], &ry[..n]);
    }
    let mut order = vec![(0.0, 0); n];
    let (mut rx, mut ry) = (vec![0.0; n], vec![0.0; n]);
    ranks_into(x, &mut order, &mut rx);
    ranks_into(y, &mut order, &mut ry);
    pearson_unchecked(&rx, &ry)
}

/// Number of pairs within runs of equal adjacent values in a sorted sequence.
fn tied_pairs<T: PartialEq>(sorted: impl IntoIterator<Item = T>) -> u64 {
    let mut it = sorted.into_iter();
    let Some(mut prev) = it.next() else { return 0 };
    let (mut total, mut run) = (0u64, 1u64);
    for cur in it {
        if cur == prev {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
        prev = cur;
    }
    total + run * (run - 1) / 2
}

const INSERTION_CUTOFF: usize = 16;

/// Insertion sort by the second component, returning the number of
/// strictly decreasing pairs.
fn insertion_count(v: &mut [(f64, f64)]) -> u64 {
    let mut swaps = 0u64;
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && x.1 < v[j - 1].1 {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
        swaps += (i - j) as u64;
    }
    swaps
}

/// Merge sort by the second component counting inversions.
fn sort_counting_swaps(v: &mut [(f64, f64)], buf: &mut Vec<(f64, f64)>) -> u64 {
    let n = v.len();
    if n <= INSERTION_CUTOFF {
        return insertion_count(v);
    }
    let mid = n / 2;
    let mut swaps = sort_counting_swaps(&mut v[..mid], buf) + sort_counting_swaps(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].1 < v[i].1 {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall tau-b in O(n log n):
/// `(C - D) / sqrt((n0 - n1) (n0 - n2))` with n1, n2 the pairs tied in x
/// and in y.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as u64;
    let n0 = n * (n - 1) / 2;
    let mut stack = [(0.0, 0.0); STACK_LEN];
    let mut heap = Vec::new();
    let pairs = if x.len() <= STACK_LEN {
        &mut stack[..x.len()]
    } else {
        heap.resize(x.len(), (0.0, 0.0));
        &mut heap[..]
    };
    for (p, (a, b)) in pairs.iter_mut().zip(x.iter().zip(y)) {
        *p = (*a, *b);
    }
    if pairs.len() > STACK_LEN {
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    } else {
        for i in 1..pairs.len() {
            let p = pairs[i];
            let mut j = i;
            while j > 0 && (p.0 < pairs[j - 1].0 || (p.0 == pairs[j - 1].0 && p.1 < pairs[j - 1].1)) {
                pairs[j] = pairs[j - 1];
                j -= 1;
            }
            pairs[j] = p;
        }
    }
    let n1 = tied_pairs(pairs.iter().map(|p| p.0));
    let n3 = tied_pairs(pairs.iter().copied());
    let discordant = sort_counting_swaps(pairs, &mut Vec::new());
    let n2 = tied_pairs(pairs.iter().map(|p| p.1));
    if n1 == n0 || n2 == n0 {
        return Err(Error::AllTied);
    }
    let concordant_minus_discordant = (n0 + n3) as i64 - (n1 + n2) as i64 - 2 * discordant as i64;
    let denom = (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt();
    Ok((concordant_minus_discordant as f64 / denom).clamp(-1.0, 1.0))
}

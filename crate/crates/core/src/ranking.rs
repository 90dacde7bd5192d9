//! Pareto ranking: dominance, fast non-dominated sorting, crowding distance
//! and truncation of a population to a target size. All objectives are
//! minimized.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("fitness vectors have different lengths ({left} vs {right})")]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

/// Whether `a` dominates `b`: no component worse, at least one better.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, LengthMismatch> {
    if a.len() != b.len() {
        return Err(LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Splits a population into successive non-dominated fronts.
///
/// Indices inside each front are ascending. Every index appears in exactly
/// one front.
pub fn fast_non_dominated_sort<V: AsRef<[f64]>>(pop: &[V]) -> Vec<Vec<usize>> {
    if pop.iter().any(|v| v.as_ref().iter().any(|x| x.is_nan())) {
        return sort_by_counting(pop);
    }
    // Members are visited in lexicographic order, so anything dominating a
    // member is already placed. Membership in front k means being dominated
    // by someone in front k - 1, so the first front without a dominator is
    // found by binary search.
    let lex = |a: usize, b: usize| {
        let (x, y) = (pop[a].as_ref(), pop[b].as_ref());
        x.iter()
            .zip(y)
            .map(|(u, v)| u.partial_cmp(v).expect("no NaN"))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| lex(a, b));
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for p in order {
        let v = pop[p].as_ref();
        // Equal vectors are adjacent and share a front.
        if let Some((q, k)) = last {
            if pop[q].as_ref() == v {
                fronts[k].push(p);
                continue;
            }
        }
        let dominated_in = |front: &Vec<usize>| {
            front
                .iter()
                .rev()
                .any(|&q| dominates_unchecked(pop[q].as_ref(), v))
        };
        let (mut lo, mut hi) = (0, fronts.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if dominated_in(&fronts[mid]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == fronts.len() {
            fronts.push(Vec::new());
        }
        fronts[lo].push(p);
        last = Some((p, lo));
    }
    for front in &mut fronts {
        front.sort_unstable();
    }
    fronts
}

/// Domination counting, used when some value is NaN.
fn sort_by_counting<V: AsRef<[f64]>>(pop: &[V]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            let (a, b) = (pop[p].as_ref(), pop[q].as_ref());
            if dominates_unchecked(a, b) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates_unchecked(b, a) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Front rank of every member (0 = non-dominated).
pub fn ranks<V: AsRef<[f64]>>(pop: &[V]) -> Vec<usize> {
    let mut rank = vec![0; pop.len()];
    for (k, front) in fast_non_dominated_sort(pop).iter().enumerate() {
        for &i in front {
            rank[i] = k;
        }
    }
    rank
}

/// Crowding distance of each member of one front.
///
/// Extreme members of every objective get infinity; interior members add
/// the normalized gap between their neighbours. An objective whose values
/// are all equal adds nothing. Fronts of one or two members are all
/// boundary.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let value = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let lo = value(order[0]);
        let hi = value(order[n - 1]);
        let range = hi - lo;
        if range.is_nan() || range <= 0.0 {
            continue;
        }
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            let i = order[w];
            if distance[i].is_finite() {
                distance[i] += (value(order[w + 1]) - value(order[w - 1])) / range;
            }
        }
    }
    distance
}

/// Picks `size` members: whole fronts while they fit, then the straddling
/// front by descending crowding distance (ties by lower index).
///
/// Returned indices are in selection order.
pub fn truncate<V: AsRef<[f64]>>(pop: &[V], size: usize) -> Vec<usize> {
    let size = size.min(pop.len());
    let mut chosen = Vec::with_capacity(size);
    for front in fast_non_dominated_sort(pop) {
        if chosen.len() + front.len() <= size {
            chosen.extend_from_slice(&front);
            if chosen.len() == size {
                break;
            }
            continue;
        }
        let members: Vec<&[f64]> = front.iter().map(|&i| pop[i].as_ref()).collect();
        let distance = crowding_distance(&members);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| distance[b].total_cmp(&distance[a]).then(a.cmp(&b)));
        let missing = size - chosen.len();
        chosen.extend(order.into_iter().take(missing).map(|w| front[w]));
        break;
    }
    chosen
}

/// Rank and crowding distance for every member, as used by tournament
/// selection.
pub fn rank_and_crowding<V: AsRef<[f64]>>(pop: &[V]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (k, front) in fast_non_dominated_sort(pop).iter().enumerate() {
        let members: Vec<&[f64]> = front.iter().map(|&i| pop[i].as_ref()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = k;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

/// Indices of the non-dominated members.
pub fn non_dominated<V: AsRef<[f64]>>(pop: &[V]) -> Vec<usize> {
    if pop.is_empty() {
        return Vec::new();
    }
    fast_non_dominated_sort(pop).swap_remove(0)
}

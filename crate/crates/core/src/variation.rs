//! Genetic operators over usage-count chromosomes.
//!
//! Simulated binary crossover and polynomial mutation act on the genes as
//! reals; [`repair`] maps the result back onto a valid [`Allocation`].

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Allocation, SubTask};

/// Largest random draw fed to the operators (`1 - 2^-53`); keeps the
/// spread factor finite.
pub const R_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationError {
    #[error("sub-task `{subtask}` cannot absorb {quantity} units (capacity {capacity})")]
    Unsatisfiable {
        subtask: String,
        quantity: u32,
        capacity: u64,
    },
    #[error("raw vector has {got} genes but the sub-task has {expected} services")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid variation parameter {name}: {value}")]
    Param { name: &'static str, value: f64 },
}

/// Operator settings. Defaults follow the clothing case study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    /// Distribution index of the crossover spread factor.
    pub eta_c: f64,
    /// Distribution index of the mutation perturbation factor.
    pub eta_m: f64,
    /// Probability that crossover fires for a pair.
    pub pr_c: f64,
    /// Probability that mutation fires for an offspring.
    pub pr_m: f64,
}

impl Default for VariationParams {
    fn default() -> Self {
        VariationParams {
            eta_c: 0.1,
            eta_m: 0.01,
            pr_c: 1.0,
            pr_m: 1.0,
        }
    }
}

impl VariationParams {
    pub fn check(&self) -> Result<(), VariationError> {
        for (name, value) in [("eta_c", self.eta_c), ("eta_m", self.eta_m)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(VariationError::Param { name, value });
            }
        }
        for (name, value) in [("pr_c", self.pr_c), ("pr_m", self.pr_m)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(VariationError::Param { name, value });
            }
        }
        Ok(())
    }
}

/// Spread factor for a uniform draw `r`.
pub fn spread_factor(r: f64, eta_c: f64) -> f64 {
    let r = r.clamp(0.0, R_MAX);
    let exponent = 1.0 / (1.0 + eta_c);
    if r <= 0.5 {
        (2.0 * r).powf(exponent)
    } else {
        (1.0 / (2.0 - 2.0 * r)).powf(exponent)
    }
}

/// Simulated binary crossover of one gene pair.
pub fn sbx_pair(x1: f64, x2: f64, eta_c: f64, r: f64) -> (f64, f64) {
    let beta = spread_factor(r, eta_c);
    let mean = 0.5 * (x1 + x2);
    let half_spread = 0.5 * beta * (x1 - x2);
    (mean - half_spread, mean + half_spread)
}

/// Polynomial mutation of gene `x` within `[l, u]`.
pub fn polynomial_mutate(x: f64, l: f64, u: f64, eta_m: f64, r: f64) -> f64 {
    let range = u - l;
    if range.is_nan() || range <= 0.0 {
        return x;
    }
    let x = x.clamp(l, u);
    let r = r.clamp(0.0, R_MAX);
    let power = 1.0 + eta_m;
    let delta = if r <= 0.5 {
        let d1 = (x - l) / range;
        (2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(power)).powf(1.0 / power) - 1.0
    } else {
        let d2 = (u - x) / range;
        1.0 - (2.0 - 2.0 * r + (2.0 * r - 1.0) * (1.0 - d2).powf(power)).powf(1.0 / power)
    };
    (x + delta * range).clamp(l, u)
}

fn draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>().min(R_MAX)
}

fn round_half_even(v: f64) -> f64 {
    v.round_ties_even()
}

fn unsatisfiable(st: &SubTask, quantity: u32) -> VariationError {
    VariationError::Unsatisfiable {
        subtask: st.id.clone(),
        quantity,
        capacity: st.capacity(quantity),
    }
}

/// Maps a real-valued chromosome onto a valid allocation.
///
/// Genes are clamped to `[0, upper bound]` and rounded half-to-even. A
/// surplus or deficit is first absorbed by the genes with the largest
/// rounding remainder in the matching direction, then by filling the
/// cheapest services with slack (deficit) or draining the most expensive
/// used services (surplus). Ties go to the lower index.
pub fn repair(raw: &[f64], st: &SubTask, quantity: u32) -> Result<Allocation, VariationError> {
    if raw.len() != st.services.len() {
        return Err(VariationError::LengthMismatch {
            expected: st.services.len(),
            got: raw.len(),
        });
    }
    if !st.is_feasible(quantity) {
        return Err(unsatisfiable(st, quantity));
    }
    let bounds: Vec<u32> = st.services.iter().map(|s| s.upper_bound(quantity)).collect();
    let clamped: Vec<f64> = raw
        .iter()
        .zip(&bounds)
        .map(|(&v, &ub)| if v.is_nan() { 0.0 } else { v.clamp(0.0, f64::from(ub)) })
        .collect();
    let mut counts: Vec<u32> = clamped.iter().map(|&v| round_half_even(v) as u32).collect();
    let target = i64::from(quantity);
    let mut sum: i64 = counts.iter().map(|&c| i64::from(c)).sum();

    if sum != target {
        // Remainder pass: genes rounded in the opposite direction of the
        // needed correction, largest remainder first.
        let up = sum < target;
        let mut order: Vec<(usize, f64)> = clamped
            .iter()
            .zip(&counts)
            .enumerate()
            .filter_map(|(j, (&v, &c))| {
                let rem = if up { v - f64::from(c) } else { f64::from(c) - v };
                (rem > 0.0).then_some((j, rem))
            })
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (j, _) in order {
            if sum == target {
                break;
            }
            if up && counts[j] < bounds[j] {
                counts[j] += 1;
                sum += 1;
            } else if !up && counts[j] > 0 {
                counts[j] -= 1;
                sum -= 1;
            }
        }
    }

    if sum < target {
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            st.services[a]
                .unit_cost
                .total_cmp(&st.services[b].unit_cost)
                .then(a.cmp(&b))
        });
        for j in order {
            let take = (target - sum).min(i64::from(bounds[j] - counts[j]));
            counts[j] += take as u32;
            sum += take;
            if sum == target {
                break;
            }
        }
    } else if sum > target {
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            st.services[b]
                .unit_cost
                .total_cmp(&st.services[a].unit_cost)
                .then(a.cmp(&b))
        });
        for j in order {
            let take = (sum - target).min(i64::from(counts[j]));
            counts[j] -= take as u32;
            sum -= take;
            if sum == target {
                break;
            }
        }
    }
    debug_assert_eq!(sum, target);
    Ok(Allocation::new(counts))
}

/// Uniformly random composition of `quantity` into one part per service,
/// repaired onto the caps.
pub fn random_allocation<R: Rng + ?Sized>(
    st: &SubTask,
    quantity: u32,
    rng: &mut R,
) -> Result<Allocation, VariationError> {
    if !st.is_feasible(quantity) {
        return Err(unsatisfiable(st, quantity));
    }
    let parts = st.services.len();
    let slots = quantity as usize + parts - 1;
    // Stars and bars: choose the bar positions among all slots.
    let mut bars = sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut counts = Vec::with_capacity(parts);
    let mut prev = 0usize;
    for &bar in &bars {
        counts.push((bar - prev) as f64);
        prev = bar + 1;
    }
    counts.push((slots - prev) as f64);
    repair(&counts, st, quantity)
}

fn genes(a: &Allocation) -> Vec<f64> {
    a.counts.iter().map(|&c| f64::from(c)).collect()
}

/// Crosses two real chromosomes gene by gene, each gene with a fresh draw.
pub fn crossover_genes<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    eta_c: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    p1.iter()
        .zip(p2)
        .map(|(&x1, &x2)| sbx_pair(x1, x2, eta_c, draw(rng)))
        .unzip()
}

/// Mutates each gene with probability `1/J`; if none is picked, one random
/// gene is mutated.
pub fn mutate_genes<R: Rng + ?Sized>(
    genes: &mut [f64],
    upper: &[f64],
    eta_m: f64,
    rng: &mut R,
) {
    let n = genes.len();
    if n == 0 {
        return;
    }
    let rate = 1.0 / n as f64;
    let mut touched = false;
    for (g, &u) in genes.iter_mut().zip(upper) {
        if rng.gen::<f64>() < rate {
            *g = polynomial_mutate(*g, 0.0, u, eta_m, draw(rng));
            touched = true;
        }
    }
    if !touched {
        let j = rng.gen_range(0..n);
        genes[j] = polynomial_mutate(genes[j], 0.0, upper[j], eta_m, draw(rng));
    }
}

/// Produces two repaired children from two parents.
pub fn vary_pair<R: Rng + ?Sized>(
    p1: &Allocation,
    p2: &Allocation,
    st: &SubTask,
    quantity: u32,
    params: &VariationParams,
    rng: &mut R,
) -> Result<(Allocation, Allocation), VariationError> {
    let (mut c1, mut c2) = if rng.gen::<f64>() < params.pr_c {
        crossover_genes(&genes(p1), &genes(p2), params.eta_c, rng)
    } else {
        (genes(p1), genes(p2))
    };
    let upper: Vec<f64> = st
        .services
        .iter()
        .map(|s| f64::from(s.upper_bound(quantity)))
        .collect();
    for child in [&mut c1, &mut c2] {
        if rng.gen::<f64>() < params.pr_m {
            mutate_genes(child, &upper, params.eta_m, rng);
        }
    }
    Ok((repair(&c1, st, quantity)?, repair(&c2, st, quantity)?))
}

/// Builds `parents.len()` offspring by random pairing without replacement.
/// With an odd count the leftover parent is paired with a random partner
/// and only its first child is kept.
pub fn offspring<R: Rng + ?Sized>(
    parents: &[Allocation],
    st: &SubTask,
    quantity: u32,
    params: &VariationParams,
    rng: &mut R,
) -> Result<Vec<Allocation>, VariationError> {
    let n = parents.len();
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let mut children = Vec::with_capacity(n);
    for pair in order.chunks(2) {
        match *pair {
            [a, b] => {
                let (c1, c2) = vary_pair(&parents[a], &parents[b], st, quantity, params, rng)?;
                children.push(c1);
                children.push(c2);
            }
            [a] => {
                let b = if n > 1 {
                    let mut b = rng.gen_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    b
                } else {
                    a
                };
                let (c1, _) = vary_pair(&parents[a], &parents[b], st, quantity, params, rng)?;
                children.push(c1);
            }
            _ => unreachable!(),
        }
    }
    Ok(children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{check_counts, CandidateService};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn flat(j: usize, caps: &[Option<u32>]) -> SubTask {
        SubTask::new(
            "st",
            (0..j)
                .map(|k| {
                    CandidateService::new(
                        format!("s{k}"),
                        1.0 + k as f64,
                        1.0 + k as f64,
                        caps.get(k).copied().flatten(),
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    /// Direct substitution into the operator formulas, written out by hand.
    #[test]
    fn sbx_substitution() {
        // eta_c = 0, r = 0.125: beta = (0.25)^1 = 0.25.
        let (c1, c2) = sbx_pair(0.0, 8.0, 0.0, 0.125);
        assert!((c1 - 5.0).abs() < 1e-12);
        assert!((c2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sbx_identical_parents_and_swap() {
        for r in [0.0, 0.3, 0.5, 0.9, 1.0] {
            assert_eq!(sbx_pair(10.0, 10.0, 0.1, r), (10.0, 10.0));
        }
        let (c1, c2) = sbx_pair(3.0, 7.0, 2.0, 0.5);
        assert!((c1 - 7.0).abs() < 1e-12 && (c2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sbx_at_r_one_is_finite() {
        let (c1, c2) = sbx_pair(0.0, 1.0, 0.1, 1.0);
        assert!(c1.is_finite() && c2.is_finite());
    }

    #[test]
    fn mutation_substitution() {
        // delta1 = 0.5; delta = (0.5 + 0.5 * 0.5) - 1 = -0.25.
        let m = polynomial_mutate(5.0, 0.0, 10.0, 0.0, 0.25);
        assert!((m - 2.5).abs() < 1e-12);
    }

    #[test]
    fn mutation_fixed_points() {
        assert_eq!(polynomial_mutate(4.0, 0.0, 10.0, 0.01, 0.5), 4.0);
        assert_eq!(polynomial_mutate(0.0, 0.0, 10.0, 0.01, 0.0), 0.0);
        assert_eq!(polynomial_mutate(3.0, 2.0, 2.0, 0.01, 0.9), 3.0);
    }

    #[test]
    fn repair_rounds_and_keeps_sum() {
        let st = flat(3, &[]);
        let a = repair(&[3.4, 2.6, 4.2], &st, 10).unwrap();
        assert_eq!(a.counts, vec![3, 3, 4]);
    }

    #[test]
    fn repair_identity_on_feasible_integers() {
        let st = flat(3, &[]);
        assert_eq!(repair(&[2.0, 0.0, 8.0], &st, 10).unwrap().counts, vec![2, 0, 8]);
    }

    #[test]
    fn repair_clamps_to_cap() {
        let st = flat(2, &[Some(10)]);
        assert_eq!(repair(&[12.0, 0.0], &st, 10).unwrap().counts, vec![10, 0]);
    }

    #[test]
    fn repair_fills_deficit_cheapest_first() {
        let st = flat(3, &[]);
        // All zero: the whole order goes to service 0 (lowest cost).
        assert_eq!(repair(&[0.0, 0.0, 0.0], &st, 5).unwrap().counts, vec![5, 0, 0]);
        // Surplus drained from the most expensive service.
        assert_eq!(repair(&[5.0, 5.0, 5.0], &st, 10).unwrap().counts, vec![5, 5, 0]);
    }

    #[test]
    fn repair_uses_remainders_before_costs() {
        let st = flat(3, &[]);
        // 3.3 + 3.3 + 3.4 rounds to 9; the largest remainder (0.4) gets the unit.
        assert_eq!(repair(&[3.3, 3.3, 3.4], &st, 10).unwrap().counts, vec![3, 3, 4]);
    }

    #[test]
    fn repair_reports_unsatisfiable() {
        let st = flat(2, &[Some(2), Some(3)]);
        assert!(matches!(
            repair(&[1.0, 1.0], &st, 6),
            Err(VariationError::Unsatisfiable { capacity: 5, .. })
        ));
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(2.5), 2.0);
        assert_eq!(round_half_even(3.5), 4.0);
        assert_eq!(round_half_even(0.5), 0.0);
        assert_eq!(round_half_even(1.49), 1.0);
    }

    fn compositions(q: u32, j: usize) -> BTreeSet<Vec<u32>> {
        if j == 1 {
            return [vec![q]].into_iter().collect();
        }
        let mut out = BTreeSet::new();
        for first in 0..=q {
            for rest in compositions(q - first, j - 1) {
                let mut v = vec![first];
                v.extend(rest);
                out.insert(v);
            }
        }
        out
    }

    #[test]
    fn random_allocation_covers_all_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let st = flat(2, &[]);
        let seen: BTreeSet<_> = (0..200)
            .map(|_| random_allocation(&st, 2, &mut rng).unwrap().counts)
            .collect();
        assert_eq!(seen, compositions(2, 2));
        assert_eq!(seen.len(), 3);

        let st = flat(1, &[]);
        assert_eq!(random_allocation(&st, 1, &mut rng).unwrap().counts, vec![1]);

        let st = flat(3, &[]);
        let seen: BTreeSet<_> = (0..10_000)
            .map(|_| random_allocation(&st, 5, &mut rng).unwrap().counts)
            .collect();
        assert_eq!(seen, compositions(5, 3));
        assert_eq!(seen.len(), 21);
    }

    #[test]
    fn random_allocation_respects_caps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = flat(3, &[Some(2), Some(2), None]);
        for _ in 0..500 {
            let a = random_allocation(&st, 8, &mut rng).unwrap();
            check_counts(&a.counts, &st, 8).unwrap();
        }
    }

    #[test]
    fn zero_probability_variation_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let st = flat(3, &[]);
        let params = VariationParams {
            pr_c: 0.0,
            pr_m: 0.0,
            ..VariationParams::default()
        };
        let parents: Vec<_> = (0..9)
            .map(|_| random_allocation(&st, 12, &mut rng).unwrap())
            .collect();
        let kids = offspring(&parents, &st, 12, &params, &mut rng).unwrap();
        assert_eq!(kids.len(), parents.len());
        let mut a: Vec<_> = parents.iter().map(|p| p.counts.clone()).collect();
        let mut b: Vec<_> = kids.iter().map(|p| p.counts.clone()).collect();
        // The odd leftover keeps only its own child, so multisets match.
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn params_are_checked() {
        assert!(VariationParams::default().check().is_ok());
        let bad = VariationParams {
            pr_c: 1.5,
            ..VariationParams::default()
        };
        assert!(bad.check().is_err());
        let bad = VariationParams {
            eta_m: -1.0,
            ..VariationParams::default()
        };
        assert!(bad.check().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sbx_preserves_mean(x1 in -1e4f64..1e4, x2 in -1e4f64..1e4, eta in 0.0f64..20.0, r in 0.0f64..=1.0) {
                let (c1, c2) = sbx_pair(x1, x2, eta, r);
                prop_assert!(((c1 + c2) - (x1 + x2)).abs() <= 1e-9 * (1.0 + x1.abs() + x2.abs()));
            }

            #[test]
            fn sbx_is_symmetric(x1 in -1e3f64..1e3, x2 in -1e3f64..1e3, eta in 0.0f64..5.0, r in 0.0f64..=1.0) {
                let (a1, a2) = sbx_pair(x1, x2, eta, r);
                let (b1, b2) = sbx_pair(x2, x1, eta, r);
                prop_assert!((a1 - b2).abs() < 1e-9 && (a2 - b1).abs() < 1e-9);
            }

            #[test]
            fn mutation_stays_in_range(l in -100.0f64..100.0, w in 0.0f64..100.0, t in 0.0f64..=1.0, eta in 0.0f64..10.0, r in 0.0f64..=1.0) {
                let u = l + w;
                let x = l + t * w;
                let m = polynomial_mutate(x, l, u, eta, r);
                prop_assert!(m >= l && m <= u);
            }

            #[test]
            fn repair_is_valid_and_idempotent(
                raw in proptest::collection::vec(-5.0f64..40.0, 1..6),
                q in 1u32..30,
                cap in proptest::option::of(1u32..10),
            ) {
                let j = raw.len();
                let caps: Vec<Option<u32>> = (0..j).map(|k| if k == 0 && j > 1 { cap } else { None }).collect();
                let st = flat(j, &caps);
                let a = repair(&raw, &st, q).unwrap();
                prop_assert!(check_counts(&a.counts, &st, q).is_ok());
                let again = repair(&genes(&a), &st, q).unwrap();
                prop_assert_eq!(again, a);
            }
        }
    }
}

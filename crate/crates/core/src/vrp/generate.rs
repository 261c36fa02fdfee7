//! Tour generation: a greedy low-excess cover plus single-player moves that
//! avoid the current span subspaces.

use std::collections::HashMap;

use rayon::prelude::*;

use super::instance::VrpInstance;
use super::pool::{Tour, TourPool};
use crate::lp::SpanBasis;
use crate::Result;

/// Walk through `order` with `p` removed (shortcutting its two edges).
pub(crate) fn without(order: &[usize], p: usize) -> Vec<usize> {
    order.iter().copied().filter(|&q| q != p).collect()
}

/// Walk through `order` with `q` inserted where it adds the least length.
pub(crate) fn cheapest_insertion(inst: &VrpInstance, order: &[usize], q: usize) -> Vec<usize> {
    let m = order.len();
    let node = |i: usize| -> Option<usize> { (i >= 1 && i <= m).then(|| order[i - 1]) };
    let leg = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (None, None) => 0.0,
        (None, Some(x)) | (Some(x), None) => inst.d0(x),
        (Some(x), Some(y)) => inst.d(x, y),
    };
    let mut best = (f64::INFINITY, 0);
    for i in 0..=m {
        let a = node(i);
        let b = node(i + 1);
        let extra = leg(a, Some(q)) + leg(Some(q), b) - leg(a, b);
        if extra < best.0 {
            best = (extra, i);
        }
    }
    let mut out = order.to_vec();
    out.insert(best.1, q);
    out
}

/// Largest tour whose growth candidates are scored with optimal walks;
/// larger ones are scored by cheapest insertion and only the chosen tour is
/// re-solved.
const EXACT_SCORING_LIMIT: usize = 8;

/// Grows a tour from `seed` by the player that lowers its excess
/// `λ(T) − y(T)` most, until no player lowers it or the tour is full.
fn grow(inst: &VrpInstance, y: &[f64], seed: usize) -> Result<Tour> {
    let n = inst.n();
    let mut tour = Tour::solve(inst, &[seed])?;
    while tour.members.len() < inst.capacity {
        let excess = tour.excess(y);
        let exact = tour.members.len() < EXACT_SCORING_LIMIT;
        let mut best: Option<(f64, Tour)> = None;
        for q in 0..n {
            if tour.members.binary_search(&q).is_ok() {
                continue;
            }
            let t = if exact {
                let mut members = tour.members.clone();
                members.push(q);
                Tour::solve(inst, &members)?
            } else {
                Tour::from_order(inst, cheapest_insertion(inst, &tour.order, q))
            };
            let e = t.excess(y);
            if best.as_ref().is_none_or(|(be, _)| e < *be) {
                best = Some((e, t));
            }
        }
        match best {
            Some((e, t)) if e < excess => {
                tour = t;
                if !exact {
                    let solved = Tour::solve(inst, &tour.members)?;
                    if solved.lambda < tour.lambda {
                        tour = solved;
                    }
                }
            }
            _ => break,
        }
    }
    Ok(tour)
}

/// Greedily grows tours from the uncovered player with the largest `y`
/// until every player is covered.
pub fn covering_tours(inst: &VrpInstance, y: &[f64]) -> Result<Vec<Tour>> {
    let n = inst.n();
    let mut covered = vec![false; n];
    let mut out = Vec::new();
    while let Some(seed) = (0..n)
        .filter(|&p| !covered[p])
        .max_by(|&a, &b| y[a].total_cmp(&y[b]).then(b.cmp(&a)))
    {
        let tour = grow(inst, y, seed)?;
        for &p in &tour.members {
            covered[p] = true;
        }
        out.push(tour);
    }
    Ok(out)
}

/// Neighbourhood candidate: a pool tour with one player removed or added.
#[derive(Clone, Debug)]
struct Candidate {
    members: Vec<usize>,
    order: Vec<usize>,
    lambda: f64,
    excess: f64,
}

fn neighborhood(inst: &VrpInstance, y: &[f64], pool: &TourPool) -> Vec<Candidate> {
    let n = inst.n();
    let per_tour: Vec<Vec<Candidate>> = pool
        .tours()
        .par_iter()
        .map(|t| {
            let mut out = Vec::new();
            let mut push = |order: Vec<usize>| {
                let lambda = inst.walk_length(&order);
                let mut members = order.clone();
                members.sort_unstable();
                let excess = lambda - members.iter().map(|&p| y[p]).sum::<f64>();
                out.push(Candidate {
                    members,
                    order,
                    lambda,
                    excess,
                });
            };
            if t.members.len() > 1 {
                for &p in &t.members {
                    push(without(&t.order, p));
                }
            }
            if t.members.len() < inst.capacity {
                for q in 0..n {
                    if t.members.binary_search(&q).is_err() {
                        push(cheapest_insertion(inst, &t.order, q));
                    }
                }
            }
            out
        })
        .collect();
    let mut best: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut all: Vec<Candidate> = Vec::new();
    for c in per_tour.into_iter().flatten() {
        if pool.contains(&c.members) {
            continue;
        }
        match best.get(&c.members) {
            Some(&i) => {
                if c.lambda < all[i].lambda {
                    all[i] = c;
                }
            }
            None => {
                best.insert(c.members.clone(), all.len());
                all.push(c);
            }
        }
    }
    all.sort_by(|a, b| a.excess.total_cmp(&b.excess).then_with(|| a.members.cmp(&b.members)));
    all
}

/// Adds new tours to `pool` and returns their indices.
///
/// First a covering set of greedy low-excess tours is added. If there are
/// subspaces, the single-player neighbourhood of the pool is then scored by
/// excess: for every subspace the cheapest candidate outside it is added,
/// plus the `capacity` best candidates overall.
pub fn generate_tours(inst: &VrpInstance, y: &[f64], subspaces: &[SpanBasis], pool: &mut TourPool) -> Result<Vec<usize>> {
    let mut added = Vec::new();
    for t in covering_tours(inst, y)? {
        let (i, new) = pool.insert(t);
        if new {
            added.push(i);
        }
    }
    if subspaces.is_empty() {
        return Ok(added);
    }
    let candidates = neighborhood(inst, y, pool);
    let mut chosen = vec![false; candidates.len()];
    for l in subspaces {
        for (i, c) in candidates.iter().enumerate() {
            if chosen[i] {
                // Already selected; if it avoids `l` it is the cheapest that does.
                if !l.contains_members(&c.members)? {
                    break;
                }
                continue;
            }
            if !l.contains_members(&c.members)? {
                chosen[i] = true;
                break;
            }
        }
    }
    let mut extra = inst.capacity;
    for flag in chosen.iter_mut() {
        if extra == 0 {
            break;
        }
        if !*flag {
            *flag = true;
            extra -= 1;
        }
    }
    let picked: Vec<&Candidate> = candidates.iter().zip(&chosen).filter(|(_, &f)| f).map(|(c, _)| c).collect();
    let tours: Vec<Result<Tour>> = picked
        .par_iter()
        .map(|c| {
            let solved = Tour::solve(inst, &c.members)?;
            Ok(if solved.lambda <= c.lambda {
                solved
            } else {
                Tour::from_order(inst, c.order.clone())
            })
        })
        .collect();
    for t in tours {
        let (i, new) = pool.insert(t?);
        if new {
            added.push(i);
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vrp::random_instance;

    fn singleton_y(inst: &VrpInstance) -> Vec<f64> {
        (0..inst.n()).map(|p| 2.0 * inst.d0(p)).collect()
    }

    #[test]
    fn insertion_and_removal_keep_members() {
        let inst = random_instance(6, 6, 3).unwrap();
        let order = vec![0, 2, 4];
        let ins = cheapest_insertion(&inst, &order, 5);
        assert_eq!(ins.len(), 4);
        assert!(ins.contains(&5));
        assert!(inst.walk_length(&ins) >= inst.walk_length(&order) - 1e-12);
        assert_eq!(without(&ins, 5), order);
    }

    #[test]
    fn covering_step_covers_everyone() {
        let inst = random_instance(20, 4, 7).unwrap();
        let y = singleton_y(&inst);
        let mut pool = TourPool::new();
        let added = generate_tours(&inst, &y, &[], &mut pool).unwrap();
        assert_eq!(added.len(), pool.len());
        assert!(pool.covers(20));
        assert!(pool.tours().iter().all(|t| t.members.len() <= 4));
    }

    #[test]
    fn added_tours_avoid_the_subspace() {
        let inst = random_instance(10, 3, 11).unwrap();
        let y = singleton_y(&inst);
        let mut pool = TourPool::new();
        generate_tours(&inst, &y, &[], &mut pool).unwrap();
        let mut span = SpanBasis::new(10);
        for t in pool.tours() {
            span.insert_members(&t.members).unwrap();
        }
        assert!(!span.is_full());
        let before = pool.len();
        let added = generate_tours(&inst, &y, std::slice::from_ref(&span), &mut pool).unwrap();
        assert!(pool.len() > before);
        let outside = added.iter().filter(|&&i| !span.contains_members(&pool.get(i).members).unwrap()).count();
        assert!(outside >= 1);
        for t in pool.tours() {
            assert!((t.lambda - inst.walk_length(&t.order)).abs() < 1e-12);
        }
    }
}

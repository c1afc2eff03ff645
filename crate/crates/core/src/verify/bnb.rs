//! Generic branch-and-bound over boxes.
//!
//! Boxes are processed in breadth-first waves; each wave is evaluated in
//! parallel and the results are merged in index order, so outcomes (and in
//! particular the first reported counterexample) are independent of thread
//! scheduling. An undecided box is split along its widest dimension until
//! it is discharged, a center sample confirms a violation, or the width or
//! budget limit is hit.

use rayon::prelude::*;

use super::interval::BoxRegion;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbOutcome {
    /// Interval bounds prove the box cannot contain a violation.
    Discharged,
    /// Bounds are inconclusive; split further.
    Undecided,
}

#[derive(Debug, Clone)]
pub enum ExploreStatus<V> {
    AllDischarged,
    Falsified(V),
    /// Width or budget exhausted with undecided boxes left.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct ExploreResult<V> {
    pub status: ExploreStatus<V>,
    pub boxes_processed: u64,
    pub max_depth: u32,
}

pub fn explore<V: Send>(
    roots: Vec<BoxRegion>,
    check: &(impl Fn(&BoxRegion) -> BnbOutcome + Sync),
    falsify: &(impl Fn(&[f64]) -> Option<V> + Sync),
    delta_min: f64,
    budget: u64,
) -> ExploreResult<V> {
    let mut frontier: Vec<(BoxRegion, u32)> = roots.into_iter().map(|b| (b, 0)).collect();
    let mut processed = 0u64;
    let mut max_depth = 0u32;
    let mut width_exhausted = false;

    while !frontier.is_empty() {
        let take = ((budget - processed) as usize).min(frontier.len());
        if take == 0 {
            return ExploreResult {
                status: ExploreStatus::Exhausted,
                boxes_processed: processed,
                max_depth,
            };
        }
        let overflow = frontier.split_off(take);
        let wave: Vec<(BnbOutcome, Option<V>)> = frontier
            .par_iter()
            .map(|(b, _)| {
                let outcome = check(b);
                let violation = match outcome {
                    BnbOutcome::Undecided => falsify(&b.center()),
                    BnbOutcome::Discharged => None,
                };
                (outcome, violation)
            })
            .collect();
        processed += take as u64;

        for (_, violation) in &wave {
            if violation.is_some() {
                let v = frontier
                    .into_iter()
                    .zip(wave)
                    .find_map(|(_, (_, v))| v)
                    .unwrap();
                return ExploreResult {
                    status: ExploreStatus::Falsified(v),
                    boxes_processed: processed,
                    max_depth,
                };
            }
        }
        if !overflow.is_empty() {
            return ExploreResult {
                status: ExploreStatus::Exhausted,
                boxes_processed: processed,
                max_depth,
            };
        }

        let mut next = Vec::new();
        for ((b, depth), (outcome, _)) in frontier.into_iter().zip(wave) {
            if outcome == BnbOutcome::Discharged {
                continue;
            }
            if b.max_width() <= delta_min {
                width_exhausted = true;
                continue;
            }
            let (l, r) = b.split(b.widest_dim());
            max_depth = max_depth.max(depth + 1);
            next.push((l, depth + 1));
            next.push((r, depth + 1));
        }
        frontier = next;
    }

    ExploreResult {
        status: if width_exhausted {
            ExploreStatus::Exhausted
        } else {
            ExploreStatus::AllDischarged
        },
        boxes_processed: processed,
        max_depth,
    }
}

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// A scored coordinate. `Ord` ranks by score, then prefers the smaller index,
/// so `a > b` means `a` is selected before `b`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    index: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Reusable scratch space for exact top-k selection.
#[derive(Default)]
pub(crate) struct TopK {
    heap: BinaryHeap<Reverse<Candidate>>,
}

impl TopK {
    /// Indices of the `k` largest scores, best first; ties go to the smaller
    /// index. Appends to `out`.
    pub(crate) fn select_into(&mut self, scores: &[f64], k: usize, out: &mut Vec<u32>) {
        debug_assert!(k >= 1 && k <= scores.len());
        self.heap.clear();
        for (j, &score) in scores.iter().enumerate() {
            let cand = Candidate {
                score,
                index: j as u32,
            };
            if self.heap.len() < k {
                self.heap.push(Reverse(cand));
            } else if let Some(mut worst) = self.heap.peek_mut() {
                if cand > worst.0 {
                    *worst = Reverse(cand);
                }
            }
        }
        let start = out.len();
        out.extend(self.heap.drain().map(|Reverse(c)| c.index));
        let picked = &mut out[start..];
        picked.sort_unstable_by(|&a, &b| {
            scores[b as usize]
                .total_cmp(&scores[a as usize])
                .then_with(|| a.cmp(&b))
        });
    }
}

//! Frame conditions on the selection function.

use super::{full_mask, Selector, MAX_TABLE_WORLDS};

fn check_size(s: &Selector) -> usize {
    let n = s.world_len();
    assert!(
        n <= MAX_TABLE_WORLDS,
        "frame checks enumerate subsets and need at most {MAX_TABLE_WORLDS} worlds"
    );
    n
}

/// `s(w, A) = w` whenever `w ∈ A`.
pub fn is_reflexive(s: &Selector) -> bool {
    let n = check_size(s);
    (0..n).all(|w| {
        (1..=full_mask(n))
            .filter(|a| a >> w & 1 == 1)
            .all(|a| s.select(w, a) == Some(w))
    })
}

/// The transitivity condition checked literally over all `A, B ≠ ∅`, all `C`
/// (possibly empty) and all vantage worlds.
pub fn is_transitive(s: &Selector) -> bool {
    let n = check_size(s);
    let full = full_mask(n);
    for w in 0..n {
        for a in 1..=full {
            for b in 1..=full {
                let Some(ab) = s.select(w, a | b) else {
                    return false;
                };
                if a >> ab & 1 == 0 {
                    continue;
                }
                for c in 0..=full {
                    let Some(bc) = s.select(w, b | c) else {
                        return false;
                    };
                    if b >> bc & 1 == 1 && s.select(w, a | c) != Some(ab) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// For each world a strict linear order (listed best first) whose minimum in
/// every nonempty set is the selected member, if one exists.
///
/// Each row is decided from its binary choices: in a rationalizable row the
/// number of pairwise wins is a permutation of `0..n`, which fixes the order.
pub fn is_order_rationalizable(s: &Selector) -> Option<Vec<Vec<usize>>> {
    let n = check_size(s);
    let mut orders = Vec::with_capacity(n);
    for w in 0..n {
        let mut wins = vec![0usize; n];
        for a in 0..n {
            for b in a + 1..n {
                let c = s.select(w, 1 << a | 1 << b)?;
                if c != a && c != b {
                    return None;
                }
                wins[c] += 1;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&a| std::cmp::Reverse(wins[a]));
        if order.iter().enumerate().any(|(i, &a)| wins[a] != n - 1 - i) {
            return None;
        }
        let mut rank = vec![0usize; n];
        for (i, &a) in order.iter().enumerate() {
            rank[a] = i;
        }
        for set in 1..=full_mask(n) {
            let best = (0..n)
                .filter(|a| set >> a & 1 == 1)
                .min_by_key(|&a| rank[a])
                .expect("nonempty");
            if s.select(w, set) != Some(best) {
                return None;
            }
        }
        orders.push(order);
    }
    Some(orders)
}

/// Symmetric integer distances with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    pub d: Vec<Vec<u32>>,
}

impl DistanceMatrix {
    /// Checks the metric axioms and that `s(w, A)` is the unique closest member.
    pub fn realizes(&self, s: &Selector) -> bool {
        let n = s.world_len();
        let d = &self.d;
        for i in 0..n {
            if d[i][i] != 0 {
                return false;
            }
            for j in 0..n {
                if d[i][j] != d[j][i] || (i != j && d[i][j] == 0) {
                    return false;
                }
                for k in 0..n {
                    if d[i][k] > d[i][j] + d[j][k] {
                        return false;
                    }
                }
            }
        }
        (0..n).all(|w| {
            (1..=full_mask(n)).all(|set| {
                let mut best = None;
                let mut unique = true;
                for a in (0..n).filter(|a| set >> a & 1 == 1) {
                    match best {
                        None => best = Some(a),
                        Some(b) if d[w][a] < d[w][b] => {
                            best = Some(a);
                            unique = true;
                        }
                        Some(b) if d[w][a] == d[w][b] => unique = false,
                        _ => {}
                    }
                }
                unique && s.select(w, set) == best
            })
        })
    }
}

/// A metric with distances in `1..=max_distance` off the diagonal realizing
/// the selector, if one exists.
///
/// A metric selector is reflexive and each row is the minimum of the order by
/// distance from the vantage world, so the rows' linear orders come from
/// `is_order_rationalizable`; the search then assigns distances pair by pair
/// under the strict row orders and the triangle inequality.
pub fn metric_witness(s: &Selector, max_distance: u32) -> Option<DistanceMatrix> {
    let n = check_size(s);
    if !is_reflexive(s) {
        return None;
    }
    let orders = is_order_rationalizable(s)?;
    // Row constraints d(w, order[k]) < d(w, order[k + 1]).
    let mut lt: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for (w, order) in orders.iter().enumerate() {
        debug_assert_eq!(order[0], w);
        for pair in order[1..].windows(2) {
            lt.push(((w, pair[0]), (w, pair[1])));
        }
    }
    metric_with_constraints(n, &lt, false, max_distance)
}

/// A metric in `1..=max_distance` with `d(a) < d(b)` for each `(a, b)` in
/// `lt` (entries given as world pairs), optionally with all distances from
/// each world pairwise distinct.
pub(crate) fn metric_with_constraints(
    n: usize,
    lt: &[((usize, usize), (usize, usize))],
    distinct_rows: bool,
    max_distance: u32,
) -> Option<DistanceMatrix> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut search = MetricSearch {
        pairs,
        lt,
        distinct_rows,
        max: max_distance,
        d: vec![vec![0u32; n]; n],
        assigned: vec![vec![false; n]; n],
    };
    for i in 0..n {
        search.assigned[i][i] = true;
    }
    search.assign(0).then(|| DistanceMatrix { d: search.d })
}

struct MetricSearch<'a> {
    pairs: Vec<(usize, usize)>,
    lt: &'a [((usize, usize), (usize, usize))],
    distinct_rows: bool,
    max: u32,
    d: Vec<Vec<u32>>,
    assigned: Vec<Vec<bool>>,
}

impl MetricSearch<'_> {
    fn consistent(&self, i: usize, j: usize) -> bool {
        let (d, assigned) = (&self.d, &self.assigned);
        let n = d.len();
        let ok_order = self.lt.iter().all(|&((a, b), (c, e))| {
            !(assigned[a][b] && assigned[c][e]) || d[a][b] < d[c][e]
        });
        if !ok_order {
            return false;
        }
        if self.distinct_rows {
            for m in 0..n {
                if m != j && m != i && assigned[i][m] && d[i][m] == d[i][j] {
                    return false;
                }
                if m != i && m != j && assigned[j][m] && d[j][m] == d[i][j] {
                    return false;
                }
            }
        }
        (0..n).all(|m| {
            if !(assigned[i][m] && assigned[m][j]) {
                return true;
            }
            d[i][j] <= d[i][m] + d[m][j]
                && d[i][m] <= d[i][j] + d[m][j]
                && d[m][j] <= d[i][m] + d[i][j]
        })
    }

    fn assign(&mut self, k: usize) -> bool {
        let Some(&(i, j)) = self.pairs.get(k) else {
            return true;
        };
        for v in 1..=self.max {
            self.d[i][j] = v;
            self.d[j][i] = v;
            self.assigned[i][j] = true;
            self.assigned[j][i] = true;
            if self.consistent(i, j) && self.assign(k + 1) {
                return true;
            }
        }
        self.d[i][j] = 0;
        self.d[j][i] = 0;
        self.assigned[i][j] = false;
        self.assigned[j][i] = false;
        false
    }
}

/// Bounded metric check: distances are searched in `1..=max_distance`.
pub fn is_metric(s: &Selector, max_distance: u32) -> bool {
    metric_witness(s, max_distance).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_order(n: usize, order: impl Fn(usize) -> Vec<usize>) -> Selector {
        Selector::table_from_fn(n, |w, set| {
            *order(w)
                .iter()
                .find(|&&a| set >> a & 1 == 1)
                .expect("nonempty")
        })
        .unwrap()
    }

    #[test]
    fn min_index_is_transitive_not_reflexive() {
        let s = Selector::min_index(3).to_table().unwrap();
        assert!(is_transitive(&s));
        assert!(!is_reflexive(&s));
        assert!(!is_metric(&s, 4));
        assert_eq!(is_order_rationalizable(&s).unwrap()[2], vec![0, 1, 2]);
    }

    #[test]
    fn reflexive_min_index_rows() {
        let s = Selector::reflexive_min_index(3).to_table().unwrap();
        assert!(is_reflexive(&s));
        assert!(is_transitive(&s));
        assert_eq!(is_order_rationalizable(&s).unwrap()[2], vec![2, 0, 1]);
    }

    #[test]
    fn cyclic_pairwise_choice_is_not_transitive() {
        let mut s = Selector::min_index(3).to_table().unwrap();
        // 0 beats 1, 1 beats 2, 2 beats 0 at world 0.
        s.set(0, 0b101, 2);
        assert!(!is_transitive(&s));
        assert!(is_order_rationalizable(&s).is_none());
    }

    #[test]
    fn violating_contraction_is_not_transitive() {
        let mut s = Selector::min_index(3).to_table().unwrap();
        // s({0,1,2}) = 0 but s({0,2}) = 2.
        s.set(1, 0b101, 2);
        assert!(!is_transitive(&s));
    }

    #[test]
    fn line_metric_is_found() {
        // Worlds on a line at positions 0, 1, 3: closest-first orders.
        let pos = [0i32, 1, 3];
        let s = from_order(3, |w| {
            let mut o: Vec<usize> = (0..3).collect();
            o.sort_by_key(|&a| (pos[a] - pos[w]).abs());
            o
        });
        let m = metric_witness(&s, 4).expect("metric");
        assert!(m.realizes(&s));
    }

    #[test]
    fn metric_needs_consistent_rows() {
        // Each row orders the others so that no symmetric
        // distance can satisfy all rows: 0 prefers 1 over 2, 1 prefers 2 over 0,
        // 2 prefers 0 over 1 (a cycle of "d(0,1) < d(0,2) < d(1,2) < d(0,1)").
        let s = from_order(3, |w| match w {
            0 => vec![0, 1, 2],
            1 => vec![1, 2, 0],
            _ => vec![2, 0, 1],
        });
        assert!(is_reflexive(&s));
        assert!(is_transitive(&s));
        assert!(!is_metric(&s, 6));
    }
}

//! Damerau-Levenshtein distance (unrestricted: insertions, deletions,
//! substitutions and adjacent transpositions, with edits allowed between
//! transposed characters).

/// Edit distance between `a` and `b` counted in Unicode scalar values.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    damerau_levenshtein_chars(&a, &b)
}

/// Lowrance-Wagner dynamic program over a `(|a|+2) x (|b|+2)` matrix.
pub fn damerau_levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let (n, m) = (a.len(), b.len());
    let inf = n + m;
    let width = m + 2;
    let mut d = vec![0usize; (n + 2) * width];
    d[0] = inf;
    for i in 0..=n {
        d[(i + 1) * width] = inf;
        d[(i + 1) * width + 1] = i;
    }
    for j in 0..=m {
        d[j + 1] = inf;
        d[width + j + 1] = j;
    }
    // Last row (1-based) where each character of `a` was seen. Query strings
    // are short, so a linear list beats hashing.
    let mut last_row: Vec<(char, usize)> = Vec::new();
    for i in 1..=n {
        let mut last_match_col = 0;
        for j in 1..=m {
            let i1 = last_row
                .iter()
                .find(|(c, _)| *c == b[j - 1])
                .map_or(0, |&(_, r)| r);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            let substitution = d[i * width + j] + cost;
            let insertion = d[(i + 1) * width + j] + 1;
            let deletion = d[i * width + j + 1] + 1;
            let transposition = d[i1 * width + j1] + (i - i1 - 1) + 1 + (j - j1 - 1);
            d[(i + 1) * width + j + 1] = substitution.min(insertion).min(deletion).min(transposition);
        }
        match last_row.iter_mut().find(|(c, _)| *c == a[i - 1]) {
            Some(slot) => slot.1 = i,
            None => last_row.push((a[i - 1], i)),
        }
    }
    d[(n + 1) * width + m + 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Shortest edit path by breadth-first search over the four operations,
    /// feasible for tiny alphabets and short strings.
    fn bfs_distance(a: &str, b: &str) -> usize {
        use std::collections::{HashSet, VecDeque};
        let alphabet: Vec<char> = a.chars().chain(b.chars()).collect::<HashSet<_>>().into_iter().collect();
        let start: Vec<char> = a.chars().collect();
        let goal: Vec<char> = b.chars().collect();
        let mut seen = HashSet::from([start.clone()]);
        let cap = start.len().max(goal.len()) + 2;
        let mut queue = VecDeque::from([(start, 0)]);
        while let Some((s, dist)) = queue.pop_front() {
            if s == goal {
                return dist;
            }
            let mut next = Vec::new();
            for i in 0..=s.len() {
                for &c in &alphabet {
                    let mut t = s.clone();
                    t.insert(i, c);
                    next.push(t);
                }
            }
            for i in 0..s.len() {
                let mut t = s.clone();
                t.remove(i);
                next.push(t);
                for &c in &alphabet {
                    let mut t = s.clone();
                    t[i] = c;
                    next.push(t);
                }
                if i + 1 < s.len() {
                    let mut t = s.clone();
                    t.swap(i, i + 1);
                    next.push(t);
                }
            }
            for t in next {
                if t.len() <= cap && seen.insert(t.clone()) {
                    queue.push_back((t, dist + 1));
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn spelling_error_pairs() {
        assert_eq!(damerau_levenshtein("change", "chnage"), 1);
        assert_eq!(damerau_levenshtein("fresh", "frash"), 1);
        assert_eq!(damerau_levenshtein("check", "chekc"), 1);
        assert_eq!(damerau_levenshtein("muzeem", "museum"), 2);
        assert_eq!(damerau_levenshtein("x", "x"), 0);
    }

    #[test]
    fn edits_between_transposed_characters() {
        // Optimal string alignment would give 3.
        assert_eq!(damerau_levenshtein("ca", "abc"), 2);
    }

    #[test]
    fn empty_and_unicode() {
        assert_eq!(damerau_levenshtein("", "abc"), 3);
        assert_eq!(damerau_levenshtein("abc", ""), 3);
        assert_eq!(damerau_levenshtein("", ""), 0);
        assert_eq!(damerau_levenshtein("wörter", "worter"), 1);
        assert_eq!(damerau_levenshtein("français", "francais"), 1);
    }

    #[test]
    fn agrees_with_breadth_first_search() {
        let words = ["", "a", "ab", "ba", "abc", "cab", "bca", "aabb", "abab", "cba"];
        for a in words {
            for b in words {
                assert_eq!(damerau_levenshtein(a, b), bfs_distance(a, b), "{a:?} {b:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_zero_only_on_equal(a in "[abc]{0,6}", b in "[abc]{0,6}") {
            let d = damerau_levenshtein(&a, &b);
            prop_assert_eq!(d, damerau_levenshtein(&b, &a));
            prop_assert_eq!(d == 0, a == b);
            prop_assert!(d <= a.chars().count().max(b.chars().count()));
        }

        #[test]
        fn matches_search_on_small_strings(a in "[abc]{0,4}", b in "[abc]{0,4}") {
            prop_assert_eq!(damerau_levenshtein(&a, &b), bfs_distance(&a, &b));
        }
    }
}

//! Small helpers over head vectors. `heads[i]` is the head id of word `i + 1`
//! and 0 denotes the virtual root.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    NoRoot,
    MultipleRoots(Vec<usize>),
    HeadOutOfRange { word: usize, head: usize },
    SelfLoop(usize),
    Cycle(usize),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::NoRoot => write!(f, "no root word"),
            TreeError::MultipleRoots(r) => write!(f, "multiple roots {r:?}"),
            TreeError::HeadOutOfRange { word, head } => {
                write!(f, "word {word} has out-of-range head {head}")
            }
            TreeError::SelfLoop(w) => write!(f, "word {w} heads itself"),
            TreeError::Cycle(w) => write!(f, "cycle through word {w}"),
        }
    }
}

pub fn check_tree(heads: &[usize]) -> Result<(), TreeError> {
    let n = heads.len();
    let mut roots = Vec::new();
    for (i, &h) in heads.iter().enumerate() {
        let word = i + 1;
        if h > n {
            return Err(TreeError::HeadOutOfRange { word, head: h });
        }
        if h == word {
            return Err(TreeError::SelfLoop(word));
        }
        if h == 0 {
            roots.push(word);
        }
    }
    match roots.len() {
        0 if n > 0 => return Err(TreeError::NoRoot),
        0 | 1 => {}
        _ => return Err(TreeError::MultipleRoots(roots)),
    }
    if let Some(w) = find_cycle(heads) {
        return Err(TreeError::Cycle(w));
    }
    Ok(())
}

/// Some word on a cycle, if the head graph has one.
pub fn find_cycle(heads: &[usize]) -> Option<usize> {
    let n = heads.len();
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        let mut path = Vec::new();
        let mut w = start;
        while w != 0 && w <= n && state[w] == 0 {
            state[w] = 1;
            path.push(w);
            w = heads[w - 1];
        }
        if w != 0 && w <= n && state[w] == 1 {
            return Some(w);
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

pub fn is_tree(heads: &[usize]) -> bool {
    check_tree(heads).is_ok()
}

/// True if `ancestor` dominates `word` (reflexively).
pub fn dominates(heads: &[usize], ancestor: usize, mut word: usize) -> bool {
    let mut steps = 0;
    while word != 0 && steps <= heads.len() {
        if word == ancestor {
            return true;
        }
        word = heads[word - 1];
        steps += 1;
    }
    ancestor == 0
}

/// Every arc h -> d must dominate all words strictly between h and d.
pub fn is_projective(heads: &[usize]) -> bool {
    first_nonprojective_arc(heads).is_none()
}

/// Dependent of the shortest non-projective arc, leftmost on ties.
pub fn first_nonprojective_arc(heads: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, &h) in heads.iter().enumerate() {
        let d = i + 1;
        if h == 0 {
            continue;
        }
        let (lo, hi) = (h.min(d), h.max(d));
        if ((lo + 1)..hi).any(|k| !dominates(heads, h, k)) {
            let len = hi - lo;
            if best.is_none_or(|(l, _)| len < l) {
                best = Some((len, d));
            }
        }
    }
    best.map(|(_, d)| d)
}

/// Lifts non-projective arcs (dependent moves to its grandparent) until the
/// tree is projective. Returns the number of lifts.
pub fn projectivize(heads: &mut [usize]) -> usize {
    let mut lifts = 0;
    while let Some(d) = first_nonprojective_arc(heads) {
        let h = heads[d - 1];
        heads[d - 1] = heads[h - 1];
        lifts += 1;
    }
    lifts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_shapes() {
        assert!(is_tree(&[2, 0, 2]));
        assert_eq!(check_tree(&[0, 0]), Err(TreeError::MultipleRoots(vec![1, 2])));
        assert_eq!(check_tree(&[2, 1]), Err(TreeError::NoRoot));
        assert!(matches!(check_tree(&[0, 3, 2]), Err(TreeError::Cycle(_))));
        assert!(check_tree(&[]).is_ok());
    }

    #[test]
    fn projectivity() {
        // 1 <- 2 root, 3 -> 1 crosses nothing: projective
        assert!(is_projective(&[2, 0, 2]));
        // root 2, arcs 2->1, 1->3: arc 1-3 spans 2, which 1 does not dominate
        assert!(!is_projective(&[2, 0, 1]));
        let mut heads = [2, 0, 1];
        assert_eq!(projectivize(&mut heads), 1);
        assert_eq!(heads, [2, 0, 2]);
    }

    #[test]
    fn crossing_arcs_lifted() {
        // 1 -> 3, 2 -> 4, root 1
        let mut heads = [0, 4, 1, 1];
        assert!(is_tree(&heads));
        assert!(!is_projective(&heads));
        projectivize(&mut heads);
        assert!(is_projective(&heads));
        assert!(is_tree(&heads));
    }
}

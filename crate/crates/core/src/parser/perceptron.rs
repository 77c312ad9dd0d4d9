//! Sparse averaged perceptron over string features.

use std::collections::HashMap;

#[derive(Clone, Copy, Debug)]
struct Cell {
    class: u16,
    weight: f32,
    total: f64,
    stamp: u64,
}

/// Weights under training, with running sums for averaging.
#[derive(Debug)]
pub struct Trainer {
    n_classes: usize,
    index: HashMap<String, u32>,
    names: Vec<String>,
    rows: Vec<Vec<Cell>>,
    instances: u64,
}

impl Trainer {
    pub fn new(n_classes: usize) -> Trainer {
        Trainer {
            n_classes,
            index: HashMap::new(),
            names: Vec::new(),
            rows: Vec::new(),
            instances: 0,
        }
    }

    pub fn score(&self, features: &[String], scores: &mut Vec<f32>) {
        scores.clear();
        scores.resize(self.n_classes, 0.0);
        for f in features {
            if let Some(&id) = self.index.get(f.as_str()) {
                for cell in &self.rows[id as usize] {
                    scores[cell.class as usize] += cell.weight;
                }
            }
        }
    }

    /// Counts one training instance and, on a mistake, moves weight from
    /// `guess` to `truth`.
    pub fn update(&mut self, truth: usize, guess: usize, features: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in features {
            let id = match self.index.get(f.as_str()) {
                Some(&id) => id,
                None => {
                    let id = self.names.len() as u32;
                    self.index.insert(f.clone(), id);
                    self.names.push(f.clone());
                    self.rows.push(Vec::new());
                    id
                }
            };
            let row = &mut self.rows[id as usize];
            for (class, delta) in [(truth, 1.0f32), (guess, -1.0f32)] {
                let now = self.instances;
                match row.iter_mut().find(|c| c.class as usize == class) {
                    Some(cell) => {
                        cell.total += (now - cell.stamp) as f64 * cell.weight as f64;
                        cell.stamp = now;
                        cell.weight += delta;
                    }
                    None => row.push(Cell {
                        class: class as u16,
                        weight: delta,
                        total: 0.0,
                        stamp: now,
                    }),
                }
            }
        }
    }

    /// Averaged weights; zero entries are dropped.
    pub fn average(self) -> Weights {
        let instances = self.instances.max(1) as f64;
        let mut index = HashMap::new();
        let mut rows = Vec::new();
        for (name, row) in self.names.into_iter().zip(self.rows) {
            let averaged: Vec<(u16, f32)> = row
                .into_iter()
                .map(|c| {
                    let total = c.total + (self.instances - c.stamp) as f64 * c.weight as f64;
                    (c.class, (total / instances) as f32)
                })
                .filter(|&(_, w)| w != 0.0)
                .collect();
            if !averaged.is_empty() {
                index.insert(name, rows.len() as u32);
                rows.push(averaged);
            }
        }
        Weights {
            n_classes: self.n_classes,
            index,
            rows,
        }
    }
}

/// Final averaged weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Weights {
    pub n_classes: usize,
    pub index: HashMap<String, u32>,
    pub rows: Vec<Vec<(u16, f32)>>,
}

impl Weights {
    pub fn empty(n_classes: usize) -> Weights {
        Weights {
            n_classes,
            ..Weights::default()
        }
    }

    pub fn score(&self, features: &[String], scores: &mut Vec<f32>) {
        scores.clear();
        scores.resize(self.n_classes, 0.0);
        for f in features {
            if let Some(&id) = self.index.get(f.as_str()) {
                for &(class, w) in &self.rows[id as usize] {
                    scores[class as usize] += w;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Features in sorted order with their weight rows.
    pub fn sorted(&self) -> Vec<(&str, &[(u16, f32)])> {
        let mut out: Vec<_> = self
            .index
            .iter()
            .map(|(name, &id)| (name.as_str(), self.rows[id as usize].as_slice()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averaging_weights_history() {
        let mut t = Trainer::new(2);
        let f = vec!["x".to_string()];
        t.update(1, 0, &f); // instance 1: w1 = 1, w0 = -1
        t.update(1, 1, &f); // instance 2: correct
        let w = t.average();
        // both weights held their value from stamp 1 through instance 2
        let row = &w.rows[w.index["x"] as usize];
        assert!(row.contains(&(1, 0.5)) && row.contains(&(0, -0.5)), "{row:?}");
    }

    #[test]
    fn unknown_features_score_zero() {
        let w = Weights::empty(3);
        let mut scores = Vec::new();
        w.score(&["nope".to_string()], &mut scores);
        assert_eq!(scores, [0.0, 0.0, 0.0]);
    }
}

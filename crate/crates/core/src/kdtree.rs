//! Exact k-nearest-neighbour search over fixed-dimension points.
//!
//! Ties are resolved by point index, so the result is exactly the first `k`
//! entries of the list sorted by `(distance, index)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
struct Node {
    point: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    /// Build from points of equal length `dim`.
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Self {
        assert!(points.iter().all(|p| p.len() == dim), "points must share dimension {dim}");
        let coords: Vec<f64> = points.iter().flatten().copied().collect();
        let mut tree = KdTree {
            dim,
            coords,
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        let mut order: Vec<usize> = (0..points.len()).collect();
        tree.root = tree.build(&mut order);
        tree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn coord(&self, point: usize, axis: usize) -> f64 {
        self.coords[point * self.dim + axis]
    }

    fn point(&self, point: usize) -> &[f64] {
        &self.coords[point * self.dim..(point + 1) * self.dim]
    }

    fn widest_axis(&self, items: &[usize]) -> usize {
        (0..self.dim)
            .map(|axis| {
                let (lo, hi) = items.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                    let c = self.coord(p, axis);
                    (lo.min(c), hi.max(c))
                });
                (axis, hi - lo)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(axis, _)| axis)
    }

    fn build(&mut self, items: &mut [usize]) -> Option<usize> {
        if items.is_empty() {
            return None;
        }
        let axis = if self.dim == 0 { 0 } else { self.widest_axis(items) };
        let mid = items.len() / 2;
        if self.dim > 0 {
            items.select_nth_unstable_by(mid, |&a, &b| {
                self.coord(a, axis)
                    .total_cmp(&self.coord(b, axis))
                    .then(a.cmp(&b))
            });
        }
        let point = items[mid];
        let id = self.nodes.len();
        self.nodes.push(Node {
            point,
            axis,
            left: None,
            right: None,
        });
        let (lo, rest) = items.split_at_mut(mid);
        let left = self.build(lo);
        let right = self.build(&mut rest[1..]);
        self.nodes[id].left = left;
        self.nodes[id].right = right;
        Some(id)
    }

    /// The `k` nearest points as `(index, distance)`, nondecreasing.
    pub fn nearest(&self, query: &[f64], k: usize) -> Vec<(usize, f64)> {
        assert_eq!(query.len(), self.dim, "query dimension");
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 {
            self.search(self.root, query, k, &mut heap);
        }
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2.sqrt())).collect()
    }

    fn search(&self, node: Option<usize>, query: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        let Some(id) = node else { return };
        let node = &self.nodes[id];
        let dist2 = self
            .point(node.point)
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let cand = Candidate {
            dist2,
            index: node.point,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if heap.peek().is_some_and(|w| cand < *w) {
            heap.pop();
            heap.push(cand);
        }
        if self.dim == 0 {
            self.search(node.left, query, k, heap);
            self.search(node.right, query, k, heap);
            return;
        }
        let diff = query[node.axis] - self.coord(node.point, node.axis);
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, query, k, heap);
        let must_visit = heap.len() < k || heap.peek().is_some_and(|w| diff * diff <= w.dist2);
        if must_visit {
            self.search(far, query, k, heap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[Vec<f64>], q: &[f64], k: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
            .collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        all.into_iter().map(|(i, d)| (i, d.sqrt())).collect()
    }

    #[test]
    fn empty_tree() {
        let t = KdTree::new(3, &[]);
        assert!(t.is_empty());
        assert!(t.nearest(&[0.0, 0.0, 0.0], 3).is_empty());
    }

    #[test]
    fn ties_break_by_index() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let t = KdTree::new(2, &pts);
        let got: Vec<usize> = t.nearest(&[0.0, 0.0], 2).iter().map(|x| x.0).collect();
        assert_eq!(got, vec![0, 1]);
        let dup = vec![vec![0.5, 0.5]; 5];
        let t = KdTree::new(2, &dup);
        let got: Vec<usize> = t.nearest(&[0.5, 0.5], 3).iter().map(|x| x.0).collect();
        assert_eq!(got, vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in prop::collection::vec(prop::collection::vec(-3i32..3, 3), 1..60),
            q in prop::collection::vec(-3.5f64..3.5, 3),
            k in 1usize..10,
        ) {
            // integer grid coordinates force many exact ties
            let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect();
            let t = KdTree::new(3, &pts);
            prop_assert_eq!(t.nearest(&q, k), brute(&pts, &q, k));
        }
    }
}

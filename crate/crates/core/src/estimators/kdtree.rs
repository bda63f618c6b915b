//! Static kd-tree for k-nearest-neighbor distances over a row-major point set.

const LEAF_SIZE: usize = 8;

enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

/// After construction the points are stored in tree order, so each leaf is
/// one contiguous block.
pub(crate) struct KdTree<'a> {
    points: &'a [f64],
    n: usize,
    idx: Vec<usize>,
    nodes: Vec<Node>,
    root: usize,
    ordered: Vec<f64>,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [f64], n: usize) -> Self {
        let count = points.len() / n;
        let mut tree = Self {
            points,
            n,
            idx: (0..count).collect(),
            nodes: Vec::with_capacity(2 * count / LEAF_SIZE + 1),
            root: 0,
            ordered: Vec::new(),
        };
        tree.root = tree.build_range(0, count);
        let mut ordered = Vec::with_capacity(points.len());
        for &i in &tree.idx {
            ordered.extend_from_slice(&points[i * n..(i + 1) * n]);
        }
        tree.ordered = ordered;
        tree
    }

    /// `k`-th neighbor distance of every point, indexed like the input.
    /// Queries run in tree order for locality.
    pub fn all_kth_distances(&self, k: usize) -> Vec<f64> {
        use rayon::prelude::*;
        let by_position: Vec<f64> = (0..self.idx.len())
            .into_par_iter()
            .map(|p| self.kth_at_position(p, k))
            .collect();
        let mut out = vec![0.0; by_position.len()];
        for (p, d) in by_position.into_iter().enumerate() {
            out[self.idx[p]] = d;
        }
        out
    }

    fn kth_at_position(&self, p: usize, k: usize) -> f64 {
        let q = &self.ordered[p * self.n..(p + 1) * self.n];
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        let mut offsets = vec![0.0; self.n];
        self.search(self.root, q, p, k, &mut best, 0.0, &mut offsets);
        best[k - 1].sqrt()
    }

    fn coord(&self, i: usize, d: usize) -> f64 {
        self.points[i * self.n + d]
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        // split on the widest axis
        let mut dim = 0;
        let mut best = f64::NEG_INFINITY;
        for d in 0..self.n {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.idx[start..end] {
                let v = self.coord(i, d);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best {
                best = hi - lo;
                dim = d;
            }
        }
        let mid = (end - start) / 2;
        let (points, n) = (self.points, self.n);
        self.idx[start..end].select_nth_unstable_by(mid, |a, b| {
            points[a * n + dim].total_cmp(&points[b * n + dim])
        });
        let value = self.coord(self.idx[start + mid], dim);
        let left = self.build_range(start, start + mid);
        let right = self.build_range(start + mid, end);
        self.nodes.push(Node::Split { dim, value, left, right });
        self.nodes.len() - 1
    }

    /// Distance from point `i` to its `k`-th nearest other point.
    #[cfg(test)]
    pub fn kth_neighbor_distance(&self, i: usize, k: usize) -> f64 {
        let p = self.idx.iter().position(|&j| j == i).expect("point index");
        self.kth_at_position(p, k)
    }

    fn worst(best: &[f64], k: usize) -> f64 {
        if best.len() < k {
            f64::INFINITY
        } else {
            best[k - 1]
        }
    }

    // `skip` is the query's own position. `cell_d2` is the squared distance
    // from `q` to the current cell, kept incrementally through `offsets`.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        node: usize,
        q: &[f64],
        skip: usize,
        k: usize,
        best: &mut Vec<f64>,
        cell_d2: f64,
        offsets: &mut [f64],
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for j in start..end {
                    if j == skip {
                        continue;
                    }
                    let limit = Self::worst(best, k);
                    let p = &self.ordered[j * self.n..(j + 1) * self.n];
                    let mut d2 = 0.0;
                    for (a, b) in q.iter().zip(p) {
                        d2 += (a - b) * (a - b);
                        if d2 >= limit {
                            break;
                        }
                    }
                    if d2 < limit {
                        let pos = best.partition_point(|v| *v <= d2);
                        best.insert(pos, d2);
                        best.truncate(k);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, skip, k, best, cell_d2, offsets);
                let old = offsets[dim];
                let far_d2 = cell_d2 - old * old + diff * diff;
                if far_d2 < Self::worst(best, k) {
                    offsets[dim] = diff;
                    self.search(far, q, skip, k, best, far_d2, offsets);
                    offsets[dim] = old;
                }
            }
        }
    }
}

use std::collections::{HashMap, VecDeque};

use super::{PointCode, Space, SpaceError};

/// Default cap on the number of points in a ball.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

/// Finite truncation `B(e, R)` of a space: points sorted by
/// `(length, encoding)`, exact word lengths, adjacency restricted to the ball
/// and interior flags (`true` iff every neighbour lies in the ball).
#[derive(Clone, Debug)]
pub struct BallIndex {
    space: String,
    radius: u32,
    points: Vec<PointCode>,
    lengths: Vec<u32>,
    index: HashMap<PointCode, usize>,
    adjacency: Vec<Vec<usize>>,
    interior: Vec<bool>,
    max_degree: usize,
}

impl BallIndex {
    pub(crate) fn build(space: &Space, radius: u32, cap: usize) -> Result<BallIndex, SpaceError> {
        let base = space.basepoint();
        let mut found: HashMap<PointCode, u32> = HashMap::from([(base.clone(), 0)]);
        let mut order = vec![base];
        let mut nbrs: Vec<Vec<PointCode>> = Vec::new();
        let mut head = 0;
        while head < order.len() {
            let p = order[head].clone();
            let len = found[&p];
            let ns = space.neighbors(&p)?;
            if len < radius {
                for q in &ns {
                    if !found.contains_key(q) {
                        if order.len() >= cap {
                            return Err(SpaceError::BallCapExceeded { radius: len + 1, cap });
                        }
                        found.insert(q.clone(), len + 1);
                        order.push(q.clone());
                    }
                }
            }
            nbrs.push(ns);
            head += 1;
        }

        let mut perm: Vec<usize> = (0..order.len()).collect();
        perm.sort_by(|&a, &b| (found[&order[a]], &order[a]).cmp(&(found[&order[b]], &order[b])));
        let points: Vec<PointCode> = perm.iter().map(|&i| order[i].clone()).collect();
        let index: HashMap<PointCode, usize> = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let lengths: Vec<u32> = points.iter().map(|p| found[p]).collect();
        let mut adjacency = Vec::with_capacity(points.len());
        let mut interior = Vec::with_capacity(points.len());
        let mut max_degree = 0;
        for &old in &perm {
            let ns = &nbrs[old];
            max_degree = max_degree.max(ns.len());
            let inside: Vec<usize> = ns.iter().filter_map(|q| index.get(q).copied()).collect();
            interior.push(inside.len() == ns.len());
            adjacency.push(inside);
        }
        Ok(BallIndex {
            space: space.descriptor().to_string(),
            radius,
            points,
            lengths,
            index,
            adjacency,
            interior,
            max_degree,
        })
    }

    /// Descriptor of the space this ball was built from.
    pub fn space(&self) -> &str {
        &self.space
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PointCode] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &PointCode {
        &self.points[i]
    }

    pub fn length(&self, i: usize) -> u32 {
        self.lengths[i]
    }

    pub fn index_of(&self, p: &PointCode) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn length_of(&self, p: &PointCode) -> Option<u32> {
        self.index_of(p).map(|i| self.lengths[i])
    }

    pub fn contains(&self, p: &PointCode) -> bool {
        self.index.contains_key(p)
    }

    /// Neighbours of point `i` that lie in the ball, in the space's order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.interior[i])
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    /// Largest number of neighbours of any point (in the whole space).
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Unordered edges `(i, j)` with `i < j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(&j)
    }

    /// Number of points at each length `0..=R`.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.radius as usize + 1];
        for &l in &self.lengths {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Graph distance between two ball points using only edges inside the ball.
    pub fn distance(&self, from: usize, to: usize) -> Option<u32> {
        if from == to {
            return Some(0);
        }
        let mut dist = vec![u32::MAX; self.len()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    if v == to {
                        return Some(dist[v]);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Breadth-first search from the basepoint until `target` is reached.
pub(crate) fn bfs_length(space: &Space, target: &PointCode, cap: usize) -> Result<u32, SpaceError> {
    let base = space.basepoint();
    if *target == base {
        return Ok(0);
    }
    space.neighbors(target)?;
    let mut seen: HashMap<PointCode, u32> = HashMap::from([(base.clone(), 0)]);
    let mut queue = VecDeque::from([base]);
    while let Some(p) = queue.pop_front() {
        let len = seen[&p];
        for q in space.neighbors(&p)? {
            if !seen.contains_key(&q) {
                if q == *target {
                    return Ok(len + 1);
                }
                if seen.len() >= cap {
                    return Err(SpaceError::BallCapExceeded { radius: len + 1, cap });
                }
                seen.insert(q.clone(), len + 1);
                queue.push_back(q);
            }
        }
    }
    Err(SpaceError::NotInBall(space.display(target)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_counts() {
        let z1 = Space::parse("zd:1").unwrap();
        let b = z1.ball(3).unwrap();
        assert_eq!(b.len(), 7);
        assert_eq!(b.sphere_sizes(), vec![1, 2, 2, 2]);
        let interior: Vec<u32> = b.interior_indices().map(|i| b.length(i)).collect();
        assert_eq!(interior, vec![0, 1, 1, 2, 2]);

        assert_eq!(Space::parse("zd:2").unwrap().ball(2).unwrap().len(), 13);
        assert_eq!(Space::parse("free:2").unwrap().ball(3).unwrap().len(), 53);
    }

    #[test]
    fn deterministic_order() {
        let s = Space::parse("heis").unwrap();
        let a = s.ball(3).unwrap();
        let b = s.ball(3).unwrap();
        assert_eq!(a.points(), b.points());
        for w in a.points().windows(2) {
            let (i, j) = (a.index_of(&w[0]).unwrap(), a.index_of(&w[1]).unwrap());
            assert!((a.length(i), &w[0]) < (a.length(j), &w[1]));
        }
    }

    #[test]
    fn cap_reports_radius() {
        let s = Space::parse("free:3").unwrap();
        match s.ball_with_cap(6, 100) {
            Err(SpaceError::BallCapExceeded { radius, cap }) => {
                assert_eq!(cap, 100);
                assert_eq!(radius, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn word_length_by_search() {
        let s = Space::parse("bs:1:2").unwrap();
        let b2 = s.parse_point("0|2").unwrap();
        // b^2 = a b a^-1
        assert_eq!(s.word_length(&b2, DEFAULT_BALL_CAP).unwrap(), 2);
        let b4 = s.parse_point("0|4").unwrap();
        // b^4 = a b^2 a^-1
        assert_eq!(s.word_length(&b4, DEFAULT_BALL_CAP).unwrap(), 4);
    }
}

/// Union by size with path halving. Edges are only ever added, so there is no
/// deletion support.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
    largest: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            sets: n,
            largest: usize::from(n > 0),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if they already coincide.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.largest = self.largest.max(self.size[ra] as usize);
        self.sets -= 1;
        true
    }

    pub(crate) fn sets(&self) -> usize {
        self.sets
    }

    pub(crate) fn largest(&self) -> usize {
        self.largest
    }

    /// Size of the set rooted at `root`; only meaningful for roots.
    pub(crate) fn root_size(&self, root: usize) -> usize {
        self.size[root] as usize
    }

    pub(crate) fn is_root(&self, x: usize) -> bool {
        self.parent[x] as usize == x
    }

    pub(crate) fn len(&self) -> usize {
        self.parent.len()
    }
}

//! Static 3-D KD-tree for radius queries.
//!
//! The tree is stored implicitly: points are permuted so that every subrange
//! `[lo, hi)` larger than a leaf has its splitting point at the midpoint,
//! with all points of the left half at or below it on the split axis and all
//! points of the right half at or above it.

const LEAF_SIZE: usize = 8;

/// Slack applied to query radii so a point sitting exactly on the sphere
/// survives rounding in the squared-distance computation.
pub const RADIUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct SpatialIndex {
    points: Vec<[f64; 3]>,
    ids: Vec<usize>,
    split_axis: Vec<u8>,
}

impl SpatialIndex {
    pub fn build(positions: &[[f64; 3]]) -> Self {
        let mut order: Vec<usize> = (0..positions.len()).collect();
        let mut split_axis = vec![0u8; positions.len()];
        build_range(positions, &mut order, &mut split_axis);
        let points = order.iter().map(|&i| positions[i]).collect();
        Self {
            points,
            ids: order,
            split_axis,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `visit(index, squared_distance)` for every point within
    /// `radius` of `center`, boundary included.
    pub fn for_each_within(
        &self,
        center: [f64; 3],
        radius: f64,
        mut visit: impl FnMut(usize, f64),
    ) {
        if radius < 0.0 || self.points.is_empty() {
            return;
        }
        let r = radius + RADIUS_SLACK;
        self.visit_range(0, self.points.len(), &center, r, r * r, &mut visit);
    }

    /// Indices (into the slice given to [`SpatialIndex::build`]) of all
    /// points within `radius` of `center`, sorted ascending.
    pub fn within_radius(&self, center: [f64; 3], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    fn visit_range(
        &self,
        lo: usize,
        hi: usize,
        c: &[f64; 3],
        r: f64,
        r2: f64,
        visit: &mut impl FnMut(usize, f64),
    ) {
        if hi - lo <= LEAF_SIZE {
            for k in lo..hi {
                let d2 = dist2(&self.points[k], c);
                if d2 <= r2 {
                    visit(self.ids[k], d2);
                }
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = &self.points[mid];
        let d2 = dist2(p, c);
        if d2 <= r2 {
            visit(self.ids[mid], d2);
        }
        let axis = self.split_axis[mid] as usize;
        let diff = c[axis] - p[axis];
        if diff <= r {
            self.visit_range(lo, mid, c, r, r2, visit);
        }
        if diff >= -r {
            self.visit_range(mid + 1, hi, c, r, r2, visit);
        }
    }
}

/// A [`SpatialIndex`] from which points can be taken out. Queries skip
/// removed points and prune subtrees that have emptied, so repeatedly
/// draining neighborhoods costs time proportional to the points removed
/// rather than to everything that was ever near the query.
pub struct Remaining<'a> {
    index: &'a SpatialIndex,
    present: Vec<bool>,
    /// Points still present under each internal node, keyed by the node's
    /// split position.
    live: Vec<u32>,
    /// Tree position of each original point index.
    slot: Vec<usize>,
    found: Vec<usize>,
}

impl<'a> Remaining<'a> {
    pub fn new(index: &'a SpatialIndex) -> Self {
        let n = index.len();
        let mut live = vec![0u32; n];
        init_live(&mut live, 0, n);
        let mut slot = vec![0; n];
        for (k, &id) in index.ids.iter().enumerate() {
            slot[id] = k;
        }
        Self {
            index,
            present: vec![true; n],
            live,
            slot,
            found: Vec::new(),
        }
    }

    pub fn contains(&self, id: usize) -> bool {
        self.present[self.slot[id]]
    }

    /// Removes `id`; returns false if it was already gone.
    pub fn remove(&mut self, id: usize) -> bool {
        let k = self.slot[id];
        if !self.present[k] {
            return false;
        }
        self.present[k] = false;
        let (mut lo, mut hi) = (0, self.index.len());
        while hi - lo > LEAF_SIZE {
            let mid = lo + (hi - lo) / 2;
            self.live[mid] -= 1;
            if k == mid {
                break;
            } else if k < mid {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        true
    }

    /// Removes every present point within `radius` of `center` (boundary
    /// included) whose squared distance satisfies `accept`, appending its
    /// index to `out`.
    pub fn take_within(
        &mut self,
        center: [f64; 3],
        radius: f64,
        accept: impl Fn(f64) -> bool,
        out: &mut Vec<usize>,
    ) {
        if radius < 0.0 || self.index.is_empty() {
            return;
        }
        let r = radius + RADIUS_SLACK;
        let mut found = std::mem::take(&mut self.found);
        found.clear();
        self.collect(0, self.index.len(), &center, r, r * r, &accept, &mut found);
        for &id in &found {
            self.remove(id);
        }
        out.extend_from_slice(&found);
        self.found = found;
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(
        &self,
        lo: usize,
        hi: usize,
        c: &[f64; 3],
        r: f64,
        r2: f64,
        accept: &impl Fn(f64) -> bool,
        found: &mut Vec<usize>,
    ) {
        let idx = self.index;
        if hi - lo <= LEAF_SIZE {
            for k in lo..hi {
                if self.present[k] {
                    let d2 = dist2(&idx.points[k], c);
                    if d2 <= r2 && accept(d2) {
                        found.push(idx.ids[k]);
                    }
                }
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        if self.live[mid] == 0 {
            return;
        }
        let p = &idx.points[mid];
        if self.present[mid] {
            let d2 = dist2(p, c);
            if d2 <= r2 && accept(d2) {
                found.push(idx.ids[mid]);
            }
        }
        let axis = idx.split_axis[mid] as usize;
        let diff = c[axis] - p[axis];
        if diff <= r {
            self.collect(lo, mid, c, r, r2, accept, found);
        }
        if diff >= -r {
            self.collect(mid + 1, hi, c, r, r2, accept, found);
        }
    }
}

fn init_live(live: &mut [u32], lo: usize, hi: usize) {
    if hi - lo <= LEAF_SIZE {
        return;
    }
    let mid = lo + (hi - lo) / 2;
    live[mid] = (hi - lo) as u32;
    init_live(live, lo, mid);
    init_live(live, mid + 1, hi);
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn build_range(positions: &[[f64; 3]], order: &mut [usize], axes: &mut [u8]) {
    let n = order.len();
    if n <= LEAF_SIZE {
        return;
    }
    let axis = widest_axis(positions, order);
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        positions[a][axis].total_cmp(&positions[b][axis])
    });
    axes[mid] = axis as u8;
    let (left, rest) = order.split_at_mut(mid);
    let (left_axes, rest_axes) = axes.split_at_mut(mid);
    build_range(positions, left, left_axes);
    build_range(positions, &mut rest[1..], &mut rest_axes[1..]);
}

fn widest_axis(positions: &[[f64; 3]], order: &[usize]) -> usize {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order {
        for a in 0..3 {
            lo[a] = lo[a].min(positions[i][a]);
            hi[a] = hi[a].max(positions[i][a]);
        }
    }
    (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0)
}

//! Bucket PR-quadtree over a fixed square region.

use crate::geom::{BBox, PointXY};

const LEAF_CAPACITY: usize = 8;
const MAX_DEPTH: u32 = 24;

#[derive(Debug)]
enum Node {
    Leaf(Vec<(PointXY, u32)>),
    /// Children in NE, NW, SW, SE order.
    Inner(Box<[Node; 4]>),
}

/// Points tagged with a `u32` payload. Leaves split once they exceed eight
/// points, down to depth 24; deeper leaves just grow.
#[derive(Debug)]
pub struct QuadTree {
    root: Node,
    cx: f64,
    cy: f64,
    half: f64,
    len: usize,
}

impl QuadTree {
    pub fn new(bounds: BBox) -> Self {
        let (c, half) = if bounds.is_empty() {
            (PointXY::new(0.0, 0.0), 1.0)
        } else {
            let c = bounds.center();
            let half = 0.5 * (bounds.max_x - bounds.min_x).max(bounds.max_y - bounds.min_y);
            // pad so boundary points are strictly inside
            (c, half.max(1.0) * 1.0001 + 1e-6)
        };
        Self {
            root: Node::Leaf(Vec::new()),
            cx: c.x,
            cy: c.y,
            half,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn quadrant(cx: f64, cy: f64, p: &PointXY) -> usize {
        match (p.x >= cx, p.y >= cy) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        }
    }

    fn child_center(cx: f64, cy: f64, half: f64, q: usize) -> (f64, f64) {
        let h = half / 2.0;
        match q {
            0 => (cx + h, cy + h),
            1 => (cx - h, cy + h),
            2 => (cx - h, cy - h),
            _ => (cx + h, cy - h),
        }
    }

    pub fn insert(&mut self, p: PointXY, payload: u32) {
        let (mut cx, mut cy, mut half) = (self.cx, self.cy, self.half);
        let mut node = &mut self.root;
        let mut depth = 0;
        loop {
            match node {
                Node::Inner(children) => {
                    let q = Self::quadrant(cx, cy, &p);
                    (cx, cy) = Self::child_center(cx, cy, half, q);
                    half /= 2.0;
                    depth += 1;
                    node = &mut children[q];
                }
                Node::Leaf(items) => {
                    items.push((p, payload));
                    if items.len() > LEAF_CAPACITY && depth < MAX_DEPTH {
                        let items = std::mem::take(items);
                        let mut children: [Node; 4] = std::array::from_fn(|_| Node::Leaf(Vec::new()));
                        for (pt, pl) in items {
                            if let Node::Leaf(v) = &mut children[Self::quadrant(cx, cy, &pt)] {
                                v.push((pt, pl));
                            }
                        }
                        *node = Node::Inner(Box::new(children));
                    }
                    self.len += 1;
                    return;
                }
            }
        }
    }

    /// Visit every stored point within `radius` of `center` (inclusive).
    pub fn for_each_within(&self, center: &PointXY, radius: f64, mut f: impl FnMut(&PointXY, u32)) {
        let mut stack = vec![(&self.root, self.cx, self.cy, self.half)];
        let r2 = radius * radius;
        while let Some((node, cx, cy, half)) = stack.pop() {
            // reject cells the query disk cannot reach; the slack absorbs
            // rounding in the child centers
            let slack = 1e-9 * (half + cx.abs() + cy.abs());
            let dx = ((center.x - cx).abs() - half - slack).max(0.0);
            let dy = ((center.y - cy).abs() - half - slack).max(0.0);
            if dx * dx + dy * dy > r2 {
                continue;
            }
            match node {
                Node::Leaf(items) => {
                    for (p, pl) in items {
                        let (ex, ey) = (p.x - center.x, p.y - center.y);
                        if ex * ex + ey * ey <= r2 {
                            f(p, *pl);
                        }
                    }
                }
                Node::Inner(children) => {
                    for (q, child) in children.iter().enumerate() {
                        let (ccx, ccy) = Self::child_center(cx, cy, half, q);
                        stack.push((child, ccx, ccy, half / 2.0));
                    }
                }
            }
        }
    }
}

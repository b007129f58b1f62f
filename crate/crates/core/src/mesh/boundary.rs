use super::Grid;

/// Boundary tag of a grid node.
///
/// `Gamma` is the lateral `X` boundary. On the boundary of the `(Y, t)` box
/// the sign of `(X, 1) . N` decides between inflow (`SigmaMinus`), outflow
/// (`SigmaPlus`) and characteristic (`SigmaZero`) points. `Gamma` and
/// `SigmaMinus` together form the Kolmogorov boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Interior,
    Gamma,
    SigmaMinus,
    SigmaZero,
    SigmaPlus,
}

impl NodeTag {
    pub fn is_kolmogorov(self) -> bool {
        matches!(self, NodeTag::Gamma | NodeTag::SigmaMinus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryClass {
    pub tags: Vec<NodeTag>,
}

impl BoundaryClass {
    pub fn tag(&self, idx: usize) -> NodeTag {
        self.tags[idx]
    }

    pub fn count(&self, tag: NodeTag) -> usize {
        self.tags.iter().filter(|t| **t == tag).count()
    }

    /// Nodes not on the Kolmogorov boundary, in storage order.
    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.tags.len()).filter(|&i| !self.tags[i].is_kolmogorov()).collect()
    }
}

/// Classifies every node. At edges and corners, where the normal is not
/// unique, `Gamma` wins, then any face with `(X, 1) . N < 0`, then any face
/// with a positive sign; a node whose faces all give zero is `SigmaZero`.
pub fn classify_boundary(grid: &Grid) -> BoundaryClass {
    let m = grid.m();
    let mut tags = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let n = grid.unravel(idx);
        if grid.is_x_boundary(&n) {
            tags.push(NodeTag::Gamma);
            continue;
        }
        let (mut neg, mut pos, mut zero) = (false, false, false);
        let mut record = |s: f64| {
            if s < 0.0 {
                neg = true
            } else if s > 0.0 {
                pos = true
            } else {
                zero = true
            }
        };
        if n.it == 0 {
            record(-1.0);
        }
        if n.it == grid.nt - 1 {
            record(1.0);
        }
        for k in 0..m {
            let xk = grid.x_coord(k, n.ix[k]);
            if n.iy[k] == 0 {
                record(-xk);
            }
            if n.iy[k] == grid.ny - 1 {
                record(xk);
            }
        }
        tags.push(if neg {
            NodeTag::SigmaMinus
        } else if pos {
            NodeTag::SigmaPlus
        } else if zero {
            NodeTag::SigmaZero
        } else {
            NodeTag::Interior
        });
    }
    BoundaryClass { tags }
}

//! Time grids on `[0, T]` and functions sampled on them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::GridError;
use crate::num;

/// Strictly increasing nodes starting at 0; the grading exponent is kept for
/// provenance only.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    grading: f64,
}

impl Grid {
    /// Graded nodes `t_j = T (j/N)^r`, `j = 0..=N`. `r = 1` is uniform.
    pub fn graded(horizon: f64, intervals: usize, grading: f64) -> Result<Self, GridError> {
        if !(horizon > 0.0) {
            return Err(GridError::BadNodes(format!("horizon {horizon} not positive")));
        }
        if intervals < 1 {
            return Err(GridError::TooCoarse { needed: 2, got: intervals + 1 });
        }
        if !(grading >= 1.0) {
            return Err(GridError::BadNodes(format!("grading {grading} below 1")));
        }
        let n = intervals as f64;
        let nodes = (0..=intervals)
            .map(|j| horizon * num::pow(j as f64 / n, grading))
            .collect();
        Ok(Self { nodes, grading })
    }

    /// Wrap explicit nodes, validating the invariants.
    pub fn from_nodes(nodes: Vec<f64>, grading: f64) -> Result<Self, GridError> {
        if nodes.len() < 2 {
            return Err(GridError::TooCoarse { needed: 2, got: nodes.len() });
        }
        if nodes[0] != 0.0 {
            return Err(GridError::BadNodes(format!("first node {} is not 0", nodes[0])));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(GridError::BadNodes(format!("nodes {} -> {} not increasing", w[0], w[1])));
            }
        }
        Ok(Self { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least two nodes by construction
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Index of the first node `>= epsilon`.
    pub fn first_node_at_or_after(&self, epsilon: f64) -> usize {
        self.nodes.partition_point(|&t| t < epsilon)
    }
}

/// Node values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch { nodes: grid.len(), values: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { index: i });
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` at every node.
    pub fn sample(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Result<Self, GridError> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(num::abs(*v)))
    }

    /// `sup |self - other|` on the shared grid.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max(num::abs(x - y)))
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }
}

/// Values attached to a tail of grid nodes (`t >= epsilon`); used where an
/// operation only reports away from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(num::abs(*v)))
    }
}

/// `m`-th derivative at every node from non-uniform Newton divided
/// differences: the degree-`m+1` interpolant through the `m + 2` nodes nearest
/// each node, differentiated `m` times and evaluated there. Exact for
/// polynomials up to degree `m + 1`; differences of constant data vanish
/// identically.
pub fn nth_divided_derivative(u: &GridFunction, m: usize) -> Result<GridFunction, GridError> {
    if m == 0 {
        return Ok(u.clone());
    }
    let n = u.len();
    let w = m + 2;
    if n < w {
        return Err(GridError::TooCoarse { needed: w, got: n });
    }
    let t = u.grid().nodes();
    let vals = u.values();
    let mut m_fact = 1.0;
    for k in 2..=m {
        m_fact *= k as f64;
    }
    let mut out = vec![0.0; n];
    let mut dd = vec![0.0; w];
    for (j, slot) in out.iter_mut().enumerate() {
        let lo = j.saturating_sub((w - 1) / 2).min(n - w);
        let x = &t[lo..lo + w];
        dd.copy_from_slice(&vals[lo..lo + w]);
        for order in 1..w {
            for i in (order..w).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - order]);
            }
        }
        // p^(m)(t_j) = m! (f[x_0..x_m] + f[x_0..x_{m+1}] ((m+1) t_j - sum_{l<=m} x_l))
        let xsum: f64 = x[..=m].iter().sum();
        *slot = m_fact * (dd[m] + dd[m + 1] * ((m + 1) as f64 * t[j] - xsum));
    }
    Ok(GridFunction::from_raw(u.grid().clone(), out))
}

//! Problem instances: node pairing, coordinates and the dense cost matrix.
//!
//! Node `0` is the depot, `1..=n` are pickups and `n+1..=2n` the matching
//! deliveries, so pickup `i` pairs with delivery `n + i`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Node identifier in `0..=2n`.
pub type NodeId = usize;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Straight-line distance between two points.
pub fn euclidean_cost(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("invalid size: an instance needs at least one pickup-delivery pair")]
    InvalidSize,
    #[error("the depot has no pair")]
    DepotHasNoPair,
    #[error("node {node} is out of range for n = {n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("cost matrix must be square of dimension {expected}, got {got} entries")]
    BadMatrix { expected: usize, got: usize },
    #[error("cost matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("cost matrix has a nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("cost matrix entry ({i}, {j}) is negative or not finite")]
    BadEntry { i: usize, j: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

/// An immutable PDTSP instance with a precomputed symmetric cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    coords: Option<Vec<Point>>,
    /// Row-major `(2n+1)^2` matrix.
    cost: Vec<f64>,
}

impl Instance {
    /// Builds an instance from `2n + 1` coordinates using Euclidean costs.
    pub fn from_coords(coords: Vec<Point>) -> Result<Self, InstanceError> {
        let dim = coords.len();
        if dim < 3 || dim.is_multiple_of(2) {
            return Err(InstanceError::InvalidSize);
        }
        let mut cost = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let c = euclidean_cost(coords[i], coords[j]);
                cost[i * dim + j] = c;
                cost[j * dim + i] = c;
            }
        }
        Ok(Self { n: (dim - 1) / 2, coords: Some(coords), cost })
    }

    /// Builds an instance from an explicit row-major matrix of dimension `2n + 1`.
    pub fn from_matrix(n: usize, cost: Vec<f64>) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::InvalidSize);
        }
        let dim = 2 * n + 1;
        if cost.len() != dim * dim {
            return Err(InstanceError::BadMatrix { expected: dim, got: cost.len() });
        }
        for i in 0..dim {
            if cost[i * dim + i] != 0.0 {
                return Err(InstanceError::NonzeroDiagonal(i));
            }
            for j in 0..dim {
                let c = cost[i * dim + j];
                if !c.is_finite() || c < 0.0 {
                    return Err(InstanceError::BadEntry { i, j });
                }
                if c != cost[j * dim + i] {
                    return Err(InstanceError::Asymmetric { i, j });
                }
            }
        }
        Ok(Self { n, coords: None, cost })
    }

    /// `2n + 1` points drawn uniformly from the unit square. Deterministic in `seed`.
    pub fn generate_random(n: usize, seed: u64) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::InvalidSize);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..2 * n + 1)
            .map(|_| Point::new(rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        Self::from_coords(coords)
    }

    /// Number of pickup-delivery pairs.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes including the depot.
    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    #[inline]
    pub fn cost(&self, i: NodeId, j: NodeId) -> f64 {
        self.cost[i * self.dim() + j]
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    /// Coordinates of `node`, or the origin for explicit-matrix instances.
    pub fn point(&self, node: NodeId) -> Point {
        self.coords.as_ref().map_or(Point::new(0.0, 0.0), |c| c[node])
    }

    #[inline]
    pub fn is_pickup(&self, node: NodeId) -> bool {
        (1..=self.n).contains(&node)
    }

    #[inline]
    pub fn is_delivery(&self, node: NodeId) -> bool {
        node > self.n && node <= 2 * self.n
    }

    pub fn pair_of(&self, node: NodeId) -> Result<NodeId, InstanceError> {
        match node {
            0 => Err(InstanceError::DepotHasNoPair),
            i if i <= self.n => Ok(i + self.n),
            i if i <= 2 * self.n => Ok(i - self.n),
            i => Err(InstanceError::NodeOutOfRange { node: i, n: self.n }),
        }
    }

    /// Every coordinate (or every matrix entry) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match &self.coords {
            Some(c) => Self::from_coords(
                c.iter().map(|p| Point::new(p.x * factor, p.y * factor)).collect(),
            )
            .expect("scaling keeps the dimension"),
            None => Self {
                n: self.n,
                coords: None,
                cost: self.cost.iter().map(|c| c * factor).collect(),
            },
        }
    }

    /// Text form; see [`Instance::parse`] for the grammar.
    pub fn serialize(&self) -> String {
        let mut out = format!("PDTSP {}\n", self.n);
        match &self.coords {
            Some(coords) => {
                out.push_str("MODE COORDS\n");
                for (id, p) in coords.iter().enumerate() {
                    let _ = writeln!(out, "{id} {} {}", p.x, p.y);
                }
            }
            None => {
                out.push_str("MODE MATRIX\n");
                for row in self.cost.chunks(self.dim()) {
                    let line: Vec<String> = row.iter().map(f64::to_string).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Parses the instance text format:
    ///
    /// ```text
    /// PDTSP <n>
    /// MODE COORDS | MODE MATRIX
    /// <id> <x> <y>            (COORDS, ids 0..=2n in order)
    /// <c_0> <c_1> ... <c_2n>  (MATRIX, 2n+1 rows)
    /// ```
    ///
    /// Blank lines and text after `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line_no, header) = lines.next().ok_or_else(|| ParseError::new(1, "empty input"))?;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["PDTSP", n] => n
                .parse::<usize>()
                .map_err(|_| ParseError::new(line_no, format!("bad pair count `{n}`")))?,
            _ => return Err(ParseError::new(line_no, "expected header `PDTSP <n>`")),
        };
        if n == 0 {
            return Err(ParseError::new(line_no, "pair count must be at least 1"));
        }
        let dim = 2 * n + 1;

        let (line_no, mode) = lines
            .next()
            .ok_or_else(|| ParseError::new(line_no + 1, "missing MODE line"))?;
        let rows: Vec<(usize, &str)> = lines.collect();
        let last_line = rows.last().map_or(line_no, |(l, _)| *l);
        if rows.len() != dim {
            return Err(ParseError::new(
                last_line,
                format!("expected {dim} data lines for n = {n}, found {}", rows.len()),
            ));
        }

        let parse_f64 = |line: usize, tok: &str| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ParseError::new(line, format!("bad number `{tok}`")))
        };

        match mode.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["MODE", "COORDS"] => {
                let mut coords = Vec::with_capacity(dim);
                for (expected, (line, row)) in rows.iter().enumerate() {
                    let toks: Vec<&str> = row.split_whitespace().collect();
                    if toks.len() != 3 {
                        return Err(ParseError::new(*line, "expected `<id> <x> <y>`"));
                    }
                    if toks[0].parse::<usize>().ok() != Some(expected) {
                        return Err(ParseError::new(*line, format!("expected node id {expected}")));
                    }
                    coords.push(Point::new(parse_f64(*line, toks[1])?, parse_f64(*line, toks[2])?));
                }
                Instance::from_coords(coords).map_err(|e| ParseError::new(last_line, e.to_string()))
            }
            ["MODE", "MATRIX"] => {
                let mut cost = Vec::with_capacity(dim * dim);
                for (line, row) in &rows {
                    let before = cost.len();
                    for tok in row.split_whitespace() {
                        cost.push(parse_f64(*line, tok)?);
                    }
                    if cost.len() - before != dim {
                        return Err(ParseError::new(*line, format!("expected {dim} entries")));
                    }
                }
                Instance::from_matrix(n, cost).map_err(|e| {
                    let line = match e {
                        InstanceError::Asymmetric { i, .. }
                        | InstanceError::BadEntry { i, .. }
                        | InstanceError::NonzeroDiagonal(i) => rows[i].0,
                        _ => last_line,
                    };
                    ParseError::new(line, e.to_string())
                })
            }
            _ => Err(ParseError::new(line_no, "expected `MODE COORDS` or `MODE MATRIX`")),
        }
    }
}

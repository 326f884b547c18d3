//! Piecewise power-log functions on `(0, infinity)` with segment lookup.

use crate::powerlog::PowerLogExpr;

/// A function given by one power-log expression per interval of the partition
/// `(0, r_1), (r_1, r_2), ..., (r_n, infinity)`.
///
/// `interior` has one entry per bounded interval, so it is empty when the
/// partition has a single breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseRadial {
    pub breaks: Vec<f64>,
    pub head: PowerLogExpr,
    pub interior: Vec<PowerLogExpr>,
    pub tail: PowerLogExpr,
}

impl PiecewiseRadial {
    /// The expression active at radius `r`. Breakpoints resolve to the piece
    /// on their right, except the last one, which belongs to the tail.
    pub fn piece_at(&self, r: f64) -> &PowerLogExpr {
        let idx = self.breaks.partition_point(|&x| x <= r);
        if idx == 0 {
            &self.head
        } else if idx == self.breaks.len() {
            &self.tail
        } else {
            &self.interior[idx - 1]
        }
    }

    /// Evaluate the `order`-th derivative at `r >= 0` (limit from the right
    /// at `r = 0`).
    pub fn eval(&self, r: f64, order: u32) -> f64 {
        self.piece_at(r).derivative(order).eval(r)
    }

    /// All pieces with their (possibly improper) supporting intervals.
    pub fn segments(&self) -> Vec<(f64, f64, &PowerLogExpr)> {
        let mut out = Vec::with_capacity(self.interior.len() + 2);
        out.push((0.0, self.breaks[0], &self.head));
        for (i, piece) in self.interior.iter().enumerate() {
            out.push((self.breaks[i], self.breaks[i + 1], piece));
        }
        out.push((*self.breaks.last().unwrap(), f64::INFINITY, &self.tail));
        out
    }

    /// Apply an expression transform piece by piece, keeping the partition.
    pub fn map_pieces(&self, f: impl Fn(&PowerLogExpr) -> PowerLogExpr) -> Self {
        Self {
            breaks: self.breaks.clone(),
            head: f(&self.head),
            interior: self.interior.iter().map(&f).collect(),
            tail: f(&self.tail),
        }
    }

    /// Precompute derivatives up to order 2 for repeated evaluation.
    pub fn with_derivatives(&self) -> PiecewiseDerivs {
        PiecewiseDerivs {
            levels: [
                self.clone(),
                self.map_pieces(|e| e.differentiate()),
                self.map_pieces(|e| e.derivative(2)),
            ],
        }
    }
}

/// A piecewise function with its first two derivative levels materialized,
/// so quadrature loops avoid re-deriving expressions at every node.
#[derive(Debug, Clone)]
pub struct PiecewiseDerivs {
    levels: [PiecewiseRadial; 3],
}

impl PiecewiseDerivs {
    pub fn eval(&self, r: f64, order: u32) -> f64 {
        self.levels[order as usize].piece_at(r).eval(r)
    }
}

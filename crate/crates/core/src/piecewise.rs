//! One-dimensional piecewise-quadratic functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c2/2 (x - x_ref)^2 + c1 (x - x_ref) + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadPiece {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub x_ref: f64,
}

impl QuadPiece {
    pub fn new(c2: f64, c1: f64, c0: f64, x_ref: f64) -> Self {
        QuadPiece { c2, c1, c0, x_ref }
    }

    pub fn value(&self, x: f64) -> f64 {
        let d = x - self.x_ref;
        0.5 * self.c2 * d * d + self.c1 * d + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.c2 * (x - self.x_ref) + self.c1
    }
}

/// Piece `i` covers `[b_(i-1), b_i]`, with `b_(-1) = -inf` and
/// `b_m = +inf` for `m` breakpoints; there are `m + 1` pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewiseQuadratic1D {
    breakpoints: Vec<f64>,
    pieces: Vec<QuadPiece>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    breakpoints: Vec<f64>,
    pieces: Vec<QuadPiece>,
}

impl TryFrom<RawPiecewise> for PiecewiseQuadratic1D {
    type Error = Error;

    fn try_from(r: RawPiecewise) -> Result<Self> {
        PiecewiseQuadratic1D::new(r.breakpoints, r.pieces)
    }
}

/// Relative tolerance used when validating continuity at breakpoints.
pub const CONTINUITY_TOL: f64 = 1e-12;

/// Relative derivative gap below which [`PiecewiseQuadratic1D::inverse_derivative`]
/// returns a breakpoint.
pub const SNAP_TOL: f64 = 1e-12;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

impl PiecewiseQuadratic1D {
    /// Validates ordering, finiteness and C1 continuity.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<QuadPiece>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidPiecewise(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || pieces
                .iter()
                .any(|p| !(p.c2.is_finite() && p.c1.is_finite() && p.c0.is_finite() && p.x_ref.is_finite()))
        {
            return Err(Error::InvalidPiecewise("non-finite coefficient".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPiecewise("breakpoints must be strictly increasing".into()));
        }
        for (i, &b) in breakpoints.iter().enumerate() {
            let (l, r) = (&pieces[i], &pieces[i + 1]);
            if !close(l.value(b), r.value(b), CONTINUITY_TOL) {
                return Err(Error::InvalidPiecewise(format!(
                    "value jump at x = {b}: {} vs {}",
                    l.value(b),
                    r.value(b)
                )));
            }
            if !close(l.derivative(b), r.derivative(b), CONTINUITY_TOL) {
                return Err(Error::InvalidPiecewise(format!(
                    "derivative jump at x = {b}: {} vs {}",
                    l.derivative(b),
                    r.derivative(b)
                )));
            }
        }
        Ok(PiecewiseQuadratic1D { breakpoints, pieces })
    }

    /// A single quadratic with curvature `c2` through `(x0, f0)` with slope `g0`.
    pub fn quadratic(c2: f64, x0: f64, f0: f64, g0: f64) -> Self {
        PiecewiseQuadratic1D {
            breakpoints: vec![],
            pieces: vec![QuadPiece::new(c2, g0, f0, x0)],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[QuadPiece] {
        &self.pieces
    }

    /// Index of the piece containing `x`; a breakpoint belongs to the piece
    /// on its left.
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < x)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].value(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].derivative(x)
    }

    /// Smallest and largest piece curvature.
    pub fn curvature_range(&self) -> (f64, f64) {
        self.pieces
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.c2), hi.max(p.c2)))
    }

    /// Every piece curvature lies in `[mu, l]`.
    pub fn in_class(&self, mu: f64, l: f64) -> bool {
        let (lo, hi) = self.curvature_range();
        lo >= mu && hi <= l
    }

    /// Solves `f'(x) = g` when the derivative is strictly increasing.
    ///
    /// Binary search over the breakpoint derivatives locates the piece, which
    /// is then inverted in closed form. A `g` within [`SNAP_TOL`] (relative)
    /// of a breakpoint derivative maps to the breakpoint itself, so rounding
    /// cannot push the result onto a neighbouring piece.
    pub fn inverse_derivative(&self, g: f64) -> Result<f64> {
        if !g.is_finite() {
            return Err(Error::NonInvertibleDerivative(g));
        }
        let i = self
            .breakpoints
            .partition_point(|&b| self.pieces[self.piece_index(b)].derivative(b) < g);
        let near = |b: f64| (self.derivative(b) - g).abs() <= SNAP_TOL * g.abs().max(1.0);
        if i < self.breakpoints.len() && near(self.breakpoints[i]) {
            return Ok(self.breakpoints[i]);
        }
        if i > 0 && near(self.breakpoints[i - 1]) {
            return Ok(self.breakpoints[i - 1]);
        }
        let piece = &self.pieces[i];
        if !(piece.c2 > 0.0) {
            return Err(Error::NonInvertibleDerivative(g));
        }
        let mut x = piece.x_ref + (g - piece.c1) / piece.c2;
        if i > 0 {
            x = x.max(self.breakpoints[i - 1]);
        }
        if i < self.breakpoints.len() {
            x = x.min(self.breakpoints[i]);
        }
        Ok(x)
    }
}

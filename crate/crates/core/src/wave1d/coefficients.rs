use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant coefficient values on `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub rho: f64,
    pub gamma: f64,
    pub d: f64,
    pub k: f64,
}

/// Piecewise-constant coefficient tables and the boundary damping `ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveCoefficients {
    pub a: f64,
    pub b: f64,
    pub zeta: f64,
    pub pieces: Vec<Piece>,
    /// Multiply the boundary term by `k(b)`.
    #[serde(default)]
    pub zeta_times_k: bool,
}

fn close(x: f64, y: f64, len: f64) -> bool {
    (x - y).abs() <= 1e-12 * len
}

impl WaveCoefficients {
    /// Constant coefficients on `(a, b)`.
    pub fn uniform(a: f64, b: f64, rho: f64, gamma: f64, d: f64, k: f64, zeta: f64) -> Self {
        Self {
            a,
            b,
            zeta,
            pieces: vec![Piece {
                x0: a,
                x1: b,
                rho,
                gamma,
                d,
                k,
            }],
            zeta_times_k: false,
        }
    }

    /// Checks coverage of `[a, b]`, nonnegativity, finiteness and `inf k > 0`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Coefficients(msg));
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return bad(format!("need finite a < b, got ({}, {})", self.a, self.b));
        }
        if !(self.zeta.is_finite() && self.zeta >= 0.0) {
            return bad(format!("ζ must be finite and nonnegative, got {}", self.zeta));
        }
        if self.pieces.is_empty() {
            return bad("no coefficient pieces".into());
        }
        let len = self.b - self.a;
        let mut at = self.a;
        for (i, p) in self.pieces.iter().enumerate() {
            if !close(p.x0, at, len) || !(p.x1 > p.x0) {
                return bad(format!("piece {i} [{}, {}] does not continue from {at}", p.x0, p.x1));
            }
            for (name, v) in [("rho", p.rho), ("gamma", p.gamma), ("d", p.d), ("k", p.k)] {
                if !(v.is_finite() && v >= 0.0) {
                    return bad(format!("piece {i}: {name} = {v} must be finite and nonnegative"));
                }
            }
            if p.k <= 0.0 {
                return bad(format!("piece {i}: k = {} but ess inf k must be positive", p.k));
            }
            at = p.x1;
        }
        if !close(at, self.b, len) {
            return bad(format!("pieces end at {at}, expected b = {}", self.b));
        }
        Ok(())
    }

    /// Piece containing `x`; interior points of pieces are unambiguous.
    pub fn piece_at(&self, x: f64) -> &Piece {
        self.pieces
            .iter()
            .find(|p| x < p.x1)
            .unwrap_or_else(|| self.pieces.last().expect("validated coefficients"))
    }

    /// Interior piece breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.x0).collect()
    }

    /// Boundary damping as it enters the damping form.
    pub fn boundary_damping(&self) -> f64 {
        if self.zeta_times_k {
            self.zeta * self.piece_at(self.b).k
        } else {
            self.zeta
        }
    }
}

/// Nodes `a = x₀ < … < x_m = b`; the basis is the hat functions of `x₁, …, x_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemMesh {
    nodes: Vec<f64>,
}

impl FemMesh {
    pub fn uniform(a: f64, b: f64, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one element".into()));
        }
        let h = (b - a) / elements as f64;
        let mut nodes: Vec<f64> = (0..=elements).map(|i| a + h * i as f64).collect();
        nodes[elements] = b;
        Self::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("mesh needs at least two nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("mesh nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of basis functions (equal to the number of elements).
    pub fn dim(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the node at `x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let len = self.b() - self.a();
        self.nodes.iter().position(|&n| close(n, x, len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0).validate().is_ok());
        assert!(WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0).validate().is_err());
        assert!(WaveCoefficients::uniform(0.0, 1.0, -1.0, 0.0, 0.0, 1.0, 0.0).validate().is_err());
        let mut gap = WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0);
        gap.pieces[0].x1 = 0.5;
        assert!(gap.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"a":0,"b":1,"zeta":0.5,"pieces":[{"x0":0,"x1":0.5,"rho":1,"gamma":0,"d":0,"k":1},{"x0":0.5,"x1":1,"rho":0,"gamma":1,"d":0.1,"k":2}]}"#;
        let c: WaveCoefficients = serde_json::from_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.piece_at(0.75).k, 2.0);
        assert_eq!(c.piece_at(1.0).k, 2.0);
        assert_eq!(c.breakpoints(), vec![0.5]);
        assert!(!c.zeta_times_k);
    }

    #[test]
    fn mesh() {
        let m = FemMesh::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.dim(), 4);
        assert_eq!(m.node_index(0.5), Some(2));
        assert_eq!(m.node_index(0.3), None);
        assert!(FemMesh::from_nodes(vec![0.0, 0.0, 1.0]).is_err());
    }
}

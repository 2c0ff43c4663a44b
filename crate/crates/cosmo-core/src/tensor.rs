//! Four-dimensional tensor calculus over symbolic expressions: metrics
//! with validated inverses, Christoffel symbols, curvature tensors, index
//! movement, and the covariant differential operators built from them.

use thiserror::Error;

use crate::expr::{canonically_equal, is_zero, rat, Expr, ZeroError};
use crate::par;

pub const DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexPosition {
    Up,
    Down,
}

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("rank {got} exceeds the supported maximum of 4")]
    RankTooHigh { got: usize },
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("component index {index:?} out of range")]
    IndexOutOfRange { index: Vec<usize> },
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slot {slot} is already {position:?}")]
    SlotPosition { slot: usize, position: IndexPosition },
    #[error("operation requires a rank-{expected} tensor, got rank {got}")]
    Rank { expected: usize, got: usize },
    #[error("coordinate names must be distinct")]
    CoordinatesNotDistinct,
    #[error("metric is not symmetric at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("metric determinant is zero")]
    Degenerate,
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

/// Dense symbolic tensor of rank 0 through 4 over a fixed 4-dimensional
/// chart. Components are stored row-major: the last index varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    name: String,
    valence: Vec<IndexPosition>,
    comps: Vec<Expr>,
}

impl Tensor {
    pub fn new(
        name: impl Into<String>,
        valence: Vec<IndexPosition>,
        comps: Vec<Expr>,
    ) -> Result<Tensor, TensorError> {
        if valence.len() > 4 {
            return Err(TensorError::RankTooHigh { got: valence.len() });
        }
        let expected = DIM.pow(valence.len() as u32);
        if comps.len() != expected {
            return Err(TensorError::ComponentCount {
                expected,
                got: comps.len(),
            });
        }
        Ok(Tensor {
            name: name.into(),
            valence,
            comps,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[IndexPosition] {
        &self.valence
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, index: &[usize]) -> Result<&Expr, TensorError> {
        if index.len() != self.rank() || index.iter().any(|&i| i >= DIM) {
            return Err(TensorError::IndexOutOfRange {
                index: index.to_vec(),
            });
        }
        Ok(&self.comps[pack(index)])
    }

    fn at(&self, index: &[usize]) -> &Expr {
        debug_assert_eq!(index.len(), self.rank());
        &self.comps[pack(index)]
    }
}

fn pack(index: &[usize]) -> usize {
    index.iter().fold(0, |acc, &i| acc * DIM + i)
}

fn unpack(mut n: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for slot in (0..rank).rev() {
        out[slot] = n % DIM;
        n /= DIM;
    }
    out
}

/// Symmetric nondegenerate metric on a 4-dimensional chart. Construction
/// validates symmetry, computes the determinant, rejects a vanishing one,
/// and stores the inverse built from the adjugate.
#[derive(Clone, Debug)]
pub struct Metric {
    coords: [String; 4],
    g: Vec<Expr>,
    ginv: Vec<Expr>,
    det: Expr,
}

impl Metric {
    /// Builds a metric from its 16 lower components in row-major order.
    pub fn new(coords: [&str; 4], components: Vec<Expr>) -> Result<Metric, TensorError> {
        if components.len() != 16 {
            return Err(TensorError::ComponentCount {
                expected: 16,
                got: components.len(),
            });
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                if coords[i] == coords[j] {
                    return Err(TensorError::CoordinatesNotDistinct);
                }
            }
        }
        let g: Vec<Expr> = components.iter().map(Expr::simplify).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                if !canonically_equal(&g[i * 4 + j], &g[j * 4 + i])? {
                    return Err(TensorError::NotSymmetric { i, j });
                }
            }
        }
        let det = det4(&g).simplify();
        if is_zero(&det)? {
            return Err(TensorError::Degenerate);
        }
        let ginv = par::map_indexed(16, |n| {
            let (i, j) = (n / 4, n % 4);
            // Inverse = adjugate / det; the adjugate entry (i,j) is the
            // cofactor of g[j][i].
            let cof = det3(&minor3(&g, j, i));
            let signed = if (i + j) % 2 == 0 { cof } else { -cof };
            (signed / det.clone()).simplify()
        });
        Ok(Metric {
            coords: coords.map(str::to_owned),
            g,
            ginv,
            det,
        })
    }

    /// Homogeneous isotropic expanding-universe metric on coordinates
    /// (t, r, theta, phi) with scale function R(t), curvature constant k,
    /// and light speed c.
    pub fn frw() -> Metric {
        let mut comps = vec![Expr::zero(); 16];
        comps[0] = Expr::parse("-c^2").unwrap();
        comps[5] = Expr::parse("R(t)^2/(1 - k*r^2)").unwrap();
        comps[10] = Expr::parse("R(t)^2*r^2").unwrap();
        comps[15] = Expr::parse("R(t)^2*r^2*sin(theta)^2").unwrap();
        Metric::new(["t", "r", "theta", "phi"], comps)
            .expect("the standard expanding-universe metric is well formed")
    }

    /// Flat metric diag(-c^2, 1, 1, 1) on coordinates (t, x, y, z).
    pub fn minkowski() -> Metric {
        let mut comps = vec![Expr::zero(); 16];
        comps[0] = Expr::parse("-c^2").unwrap();
        comps[5] = Expr::one();
        comps[10] = Expr::one();
        comps[15] = Expr::one();
        Metric::new(["t", "x", "y", "z"], comps).expect("the flat metric is well formed")
    }

    pub fn coords(&self) -> &[String; 4] {
        &self.coords
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i * 4 + j]
    }

    pub fn inverse_component(&self, i: usize, j: usize) -> &Expr {
        &self.ginv[i * 4 + j]
    }

    pub fn determinant(&self) -> &Expr {
        &self.det
    }

    /// The metric itself as a rank-2 tensor with both indices down.
    pub fn metric_tensor(&self) -> Tensor {
        Tensor {
            name: "g".into(),
            valence: vec![IndexPosition::Down, IndexPosition::Down],
            comps: self.g.clone(),
        }
    }

    fn d(&self, e: &Expr, coord: usize) -> Expr {
        e.diff(&self.coords[coord], 1)
    }

    fn christoffel_comps(&self) -> Vec<Expr> {
        par::map_indexed(64, |n| {
            let (a, b, c) = (n >> 4, (n >> 2) & 3, n & 3);
            let mut sum = Expr::zero();
            for d in 0..4 {
                let term = self.d(self.component(d, c), b)
                    + self.d(self.component(b, d), c)
                    - self.d(self.component(b, c), d);
                sum = sum + self.inverse_component(a, d).clone() * term;
            }
            (Expr::rational(rat(1, 2)) * sum).simplify()
        })
    }

    /// Connection coefficients with valence (up, down, down): component
    /// [a, b, c] multiplies the basis as the a-th output of transporting
    /// along b against c.
    pub fn christoffel(&self) -> Tensor {
        Tensor {
            name: "Gamma".into(),
            valence: vec![
                IndexPosition::Up,
                IndexPosition::Down,
                IndexPosition::Down,
            ],
            comps: self.christoffel_comps(),
        }
    }

    fn ricci_comps(&self, gamma: &[Expr]) -> Vec<Expr> {
        let gi = |a: usize, b: usize, c: usize| &gamma[(a << 4) | (b << 2) | c];
        par::map_indexed(16, |n| {
            let (i, j) = (n / 4, n % 4);
            let mut sum = Expr::zero();
            for a in 0..4 {
                sum = sum + self.d(gi(a, i, j), a) - self.d(gi(a, i, a), j);
            }
            for a in 0..4 {
                for b in 0..4 {
                    sum = sum + gi(a, a, b).clone() * gi(b, i, j).clone()
                        - gi(a, i, b).clone() * gi(b, a, j).clone();
                }
            }
            sum.simplify()
        })
    }

    pub fn ricci_tensor(&self) -> Tensor {
        Tensor {
            name: "Ric".into(),
            valence: vec![IndexPosition::Down, IndexPosition::Down],
            comps: self.ricci_comps(&self.christoffel_comps()),
        }
    }

    pub fn ricci_scalar(&self) -> Expr {
        let ricci = self.ricci_comps(&self.christoffel_comps());
        self.scalar_from_ricci(&ricci)
    }

    fn scalar_from_ricci(&self, ricci: &[Expr]) -> Expr {
        let mut sum = Expr::zero();
        for i in 0..4 {
            for j in 0..4 {
                sum = sum + self.inverse_component(i, j).clone() * ricci[i * 4 + j].clone();
            }
        }
        sum.simplify()
    }

    /// Rank-2 curvature combination R_ij - (1/2) g_ij R with both indices
    /// down.
    pub fn einstein_tensor(&self) -> Tensor {
        let gamma = self.christoffel_comps();
        let ricci = self.ricci_comps(&gamma);
        let scalar = self.scalar_from_ricci(&ricci);
        let comps = par::map_indexed(16, |n| {
            let (i, j) = (n / 4, n % 4);
            (ricci[n].clone()
                - Expr::rational(rat(1, 2)) * self.component(i, j).clone() * scalar.clone())
            .simplify()
        });
        Tensor {
            name: "G".into(),
            valence: vec![IndexPosition::Down, IndexPosition::Down],
            comps,
        }
    }

    /// Contracts the given slot with the inverse metric, turning a down
    /// index into an up index.
    pub fn raise_index(&self, t: &Tensor, slot: usize) -> Result<Tensor, TensorError> {
        self.move_index(t, slot, IndexPosition::Down)
    }

    /// Contracts the given slot with the metric, turning an up index into
    /// a down index.
    pub fn lower_index(&self, t: &Tensor, slot: usize) -> Result<Tensor, TensorError> {
        self.move_index(t, slot, IndexPosition::Up)
    }

    fn move_index(
        &self,
        t: &Tensor,
        slot: usize,
        from: IndexPosition,
    ) -> Result<Tensor, TensorError> {
        if slot >= t.rank() {
            return Err(TensorError::SlotOutOfRange {
                slot,
                rank: t.rank(),
            });
        }
        if t.valence[slot] != from {
            return Err(TensorError::SlotPosition {
                slot,
                position: t.valence[slot],
            });
        }
        let rank = t.rank();
        let comps = par::map_indexed(t.comps.len(), |n| {
            let idx = unpack(n, rank);
            let mut sum = Expr::zero();
            for b in 0..4 {
                let mut src = idx.clone();
                src[slot] = b;
                let weight = match from {
                    IndexPosition::Down => self.inverse_component(idx[slot], b),
                    IndexPosition::Up => self.component(idx[slot], b),
                };
                sum = sum + weight.clone() * t.at(&src).clone();
            }
            sum.simplify()
        });
        let mut valence = t.valence.clone();
        valence[slot] = match from {
            IndexPosition::Down => IndexPosition::Up,
            IndexPosition::Up => IndexPosition::Down,
        };
        Ok(Tensor {
            name: t.name.clone(),
            valence,
            comps,
        })
    }

    /// Covariant divergence of a rank-2 tensor over its second slot,
    /// producing the rank-1 tensor with components
    /// d_j T[i,j] + Gamma[j,j,a] T[i,a] - Gamma[a,j,i] T[a,j]
    /// where the second slot of T is up. A (down, down) input has its
    /// second index raised first.
    pub fn covariant_divergence(&self, t: &Tensor) -> Result<Tensor, TensorError> {
        if t.rank() != 2 {
            return Err(TensorError::Rank {
                expected: 2,
                got: t.rank(),
            });
        }
        if t.valence[0] != IndexPosition::Down {
            return Err(TensorError::SlotPosition {
                slot: 0,
                position: t.valence[0],
            });
        }
        let mixed;
        let t = if t.valence[1] == IndexPosition::Down {
            mixed = self.raise_index(t, 1)?;
            &mixed
        } else {
            t
        };
        let gamma = self.christoffel_comps();
        let gi = |a: usize, b: usize, c: usize| &gamma[(a << 4) | (b << 2) | c];
        let comps = par::map_indexed(4, |i| {
            let mut sum = Expr::zero();
            for j in 0..4 {
                sum = sum + self.d(t.at(&[i, j]), j);
                for a in 0..4 {
                    sum = sum + gi(j, j, a).clone() * t.at(&[i, a]).clone()
                        - gi(a, j, i).clone() * t.at(&[a, j]).clone();
                }
            }
            sum.simplify()
        });
        Ok(Tensor {
            name: format!("div({})", t.name),
            valence: vec![IndexPosition::Down],
            comps,
        })
    }

    /// Curved-space wave operator applied to a scalar:
    /// g^ij (d_i d_j f - Gamma[a,i,j] d_a f).
    pub fn box_scalar(&self, f: &Expr) -> Expr {
        let gamma = self.christoffel_comps();
        let gi = |a: usize, b: usize, c: usize| &gamma[(a << 4) | (b << 2) | c];
        let mut sum = Expr::zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut term = self.d(&self.d(f, i), j);
                for a in 0..4 {
                    term = term - gi(a, i, j).clone() * self.d(f, a);
                }
                sum = sum + self.inverse_component(i, j).clone() * term;
            }
        }
        sum.simplify()
    }
}

fn minor3(g: &[Expr], skip_row: usize, skip_col: usize) -> Vec<Vec<Expr>> {
    let mut rows = Vec::with_capacity(3);
    for i in 0..4 {
        if i == skip_row {
            continue;
        }
        let mut row = Vec::with_capacity(3);
        for j in 0..4 {
            if j == skip_col {
                continue;
            }
            row.push(g[i * 4 + j].clone());
        }
        rows.push(row);
    }
    rows
}

fn det3(m: &[Vec<Expr>]) -> Expr {
    m[0][0].clone() * (m[1][1].clone() * m[2][2].clone() - m[1][2].clone() * m[2][1].clone())
        - m[0][1].clone()
            * (m[1][0].clone() * m[2][2].clone() - m[1][2].clone() * m[2][0].clone())
        + m[0][2].clone()
            * (m[1][0].clone() * m[2][1].clone() - m[1][1].clone() * m[2][0].clone())
}

fn det4(g: &[Expr]) -> Expr {
    let mut det = Expr::zero();
    for j in 0..4 {
        let cof = det3(&minor3(g, 0, j));
        let term = g[j].clone() * cof;
        det = if j % 2 == 0 { det + term } else { det - term };
    }
    det
}

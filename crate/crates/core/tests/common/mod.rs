#![allow(clippy::needless_range_loop)]

//! Independent reference implementations used by the oracle and acceptance
//! suites. Nothing here reuses the element formulas of the library.
#![allow(dead_code)]

use penalty_stab::MeshPartition;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// 50 equal subintervals, five Gauss points each.
pub fn composite(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const PANELS: usize = 50;
    let rule = gauss_legendre(5);
    let w = (b - a) / PANELS as f64;
    let mut s = 0.0;
    for p in 0..PANELS {
        let (lo, hi) = (a + p as f64 * w, a + (p + 1) as f64 * w);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for &(x, wt) in &rule {
            s += half * wt * f(mid + half * x);
        }
    }
    s
}

/// Hat function of node `j` (nodes indexed from 0) evaluated at `x`.
pub fn hat(nodes: &[f64], j: usize, x: f64) -> f64 {
    let xj = nodes[j];
    if j > 0 && x >= nodes[j - 1] && x <= xj {
        (x - nodes[j - 1]) / (xj - nodes[j - 1])
    } else if j + 1 < nodes.len() && x >= xj && x <= nodes[j + 1] {
        (nodes[j + 1] - x) / (nodes[j + 1] - xj)
    } else {
        0.0
    }
}

pub fn hat_slope(nodes: &[f64], j: usize, x: f64) -> f64 {
    let xj = nodes[j];
    if j > 0 && x > nodes[j - 1] && x < xj {
        1.0 / (xj - nodes[j - 1])
    } else if j + 1 < nodes.len() && x > xj && x < nodes[j + 1] {
        -1.0 / (nodes[j + 1] - xj)
    } else {
        0.0
    }
}

/// Integral over [0,1] split at the mesh nodes so every piece is smooth.
pub fn integrate_mesh(mesh: &MeshPartition, f: impl Fn(f64) -> f64) -> f64 {
    let nodes = mesh.nodes();
    nodes.windows(2).map(|w| composite(w[0], w[1], &f)).sum()
}

/// Dense operators for DOFs at nodes 1..=N.
pub struct DenseSystem {
    pub nodes: Vec<f64>,
    pub mass: Vec<Vec<f64>>,
    pub stiffness: Vec<Vec<f64>>,
    pub moment: Vec<f64>,
}

impl DenseSystem {
    pub fn new(mesh: &MeshPartition) -> Self {
        let nodes = mesh.nodes().to_vec();
        let n = nodes.len() - 1;
        let mut mass = vec![vec![0.0; n]; n];
        let mut stiffness = vec![vec![0.0; n]; n];
        let mut moment = vec![0.0; n];
        for i in 0..n {
            moment[i] = integrate_mesh(mesh, |x| x * hat(&nodes, i + 1, x));
            for j in 0..n {
                mass[i][j] = integrate_mesh(mesh, |x| hat(&nodes, i + 1, x) * hat(&nodes, j + 1, x));
                stiffness[i][j] =
                    integrate_mesh(mesh, |x| hat_slope(&nodes, i + 1, x) * hat_slope(&nodes, j + 1, x));
            }
        }
        DenseSystem {
            nodes,
            mass,
            stiffness,
            moment,
        }
    }

    pub fn n(&self) -> usize {
        self.moment.len()
    }

    pub fn eval(&self, y: &[f64], x: f64) -> f64 {
        y.iter().enumerate().map(|(j, c)| c * hat(&self.nodes, j + 1, x)).sum()
    }

    pub fn load(&self, mesh: &MeshPartition, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n())
            .map(|i| integrate_mesh(mesh, |x| f(x) * hat(&self.nodes, i + 1, x)))
            .collect()
    }

    pub fn cubic(&self, mesh: &MeshPartition, y: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| integrate_mesh(mesh, |x| self.eval(y, x).powi(3) * hat(&self.nodes, i + 1, x)))
            .collect()
    }

    pub fn cubic_jacobian(&self, mesh: &MeshPartition, y: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut j = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                j[a][b] = integrate_mesh(mesh, |x| {
                    3.0 * self.eval(y, x).powi(2) * hat(&self.nodes, a + 1, x) * hat(&self.nodes, b + 1, x)
                });
            }
        }
        j
    }
}

#[derive(Clone, Copy)]
pub struct Coeffs {
    pub nu: f64,
    pub alpha: f64,
    pub delta: f64,
    pub r: f64,
    pub epsilon: f64,
}

/// Step residual of the penalized scheme with the implicit feedback.
pub fn dense_residual(
    sys: &DenseSystem,
    mesh: &MeshPartition,
    c: Coeffs,
    y: &[f64],
    y_prev: &[f64],
    k: f64,
) -> Vec<f64> {
    let n = sys.n();
    let dy: Vec<f64> = y.iter().zip(y_prev).map(|(a, b)| (a - b) / k).collect();
    let m_dy = mat_vec(&sys.mass, &dy);
    let k_y = mat_vec(&sys.stiffness, y);
    let m_y = mat_vec(&sys.mass, y);
    let cub = sys.cubic(mesh, y);
    let wy: f64 = sys.moment.iter().zip(y).map(|(a, b)| a * b).sum();
    let mut f: Vec<f64> = (0..n)
        .map(|i| m_dy[i] + c.nu * k_y[i] + c.delta * cub[i] - c.alpha * m_y[i])
        .collect();
    f[n - 1] += c.nu / c.epsilon * y[n - 1] + c.nu * c.r / c.epsilon * wy;
    f
}

pub fn dense_jacobian(sys: &DenseSystem, mesh: &MeshPartition, c: Coeffs, y: &[f64], k: f64) -> Vec<Vec<f64>> {
    let n = sys.n();
    let cj = sys.cubic_jacobian(mesh, y);
    let mut j = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            j[a][b] = sys.mass[a][b] / k + c.nu * sys.stiffness[a][b] - c.alpha * sys.mass[a][b] + c.delta * cj[a][b];
        }
    }
    j[n - 1][n - 1] += c.nu / c.epsilon;
    for b in 0..n {
        j[n - 1][b] += c.nu * c.r / c.epsilon * sys.moment[b];
    }
    j
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

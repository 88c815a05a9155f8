//! P1 finite element operators on a [`MeshPartition`].
//!
//! Trial/test space: continuous piecewise-linear functions vanishing at
//! `x = 0`. All matrices are assembled element by element from closed-form
//! integrals; nonlinear integrands use [`gauss3`], which is exact for them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, SymTridiag};
use crate::mesh::MeshPartition;
use crate::quadrature::gauss3;

/// Nodal coefficients at `x₁ … x_N`; the value at `x₀ = 0` is implicitly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        StateVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Coefficient at the node `x = 1`.
    pub fn boundary_value(&self) -> f64 {
        *self.0.last().expect("empty state")
    }

    /// Evaluates the P1 function at `x ∈ [0, 1]`.
    pub fn value_at(&self, mesh: &MeshPartition, x: f64) -> f64 {
        let nodes = mesh.nodes();
        if x <= 0.0 {
            return 0.0;
        }
        // first node strictly right of x, clamped to the last element
        let e = nodes.partition_point(|&n| n <= x).clamp(1, nodes.len() - 1) - 1;
        let (a, b) = (nodes[e], nodes[e + 1]);
        let (ya, yb) = element_values(&self.0, e);
        let s = (x - a) / (b - a);
        ya * (1.0 - s) + yb * s
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Nodal values at the two ends of element `e`.
#[inline]
fn element_values(y: &[f64], e: usize) -> (f64, f64) {
    let left = if e == 0 { 0.0 } else { y[e - 1] };
    (left, y[e])
}

/// Mass, stiffness and moment data of the pinned P1 space.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub mesh: MeshPartition,
    /// `M_ij = ∫ φ_j φ_i dx`.
    pub mass: SymTridiag,
    /// `K_ij = ∫ φ_j' φ_i' dx`.
    pub stiffness: SymTridiag,
    /// `w_i = ∫ x φ_i dx`, so that `∫ x Y dx = w · Y`.
    pub moment: Vec<f64>,
}

impl AssembledSystem {
    pub fn n_dofs(&self) -> usize {
        self.moment.len()
    }

    pub fn boundary_index(&self) -> usize {
        self.n_dofs() - 1
    }

    pub fn check_len(&self, y: &StateVector) -> Result<()> {
        if y.len() != self.n_dofs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_dofs(),
                actual: y.len(),
            });
        }
        Ok(())
    }

    /// `∫₀¹ x Y(x) dx`.
    pub fn moment_of(&self, y: &StateVector) -> f64 {
        dot(&self.moment, &y.0)
    }
}

pub fn assemble(mesh: &MeshPartition) -> AssembledSystem {
    let n = mesh.n_dofs();
    let mut mass = SymTridiag::zeros(n);
    let mut stiffness = SymTridiag::zeros(n);
    let mut moment = vec![0.0; n];

    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        // local dofs: node e (dof e-1, absent when e == 0) and node e+1 (dof e)
        let right = e;
        mass.diag[right] += h / 3.0;
        stiffness.diag[right] += 1.0 / h;
        moment[right] += h * (a + 2.0 * b) / 6.0;
        if e > 0 {
            let left = e - 1;
            mass.diag[left] += h / 3.0;
            mass.off[left] += h / 6.0;
            stiffness.diag[left] += 1.0 / h;
            stiffness.off[left] -= 1.0 / h;
            moment[left] += h * (2.0 * a + b) / 6.0;
        }
    }
    AssembledSystem {
        mesh: mesh.clone(),
        mass,
        stiffness,
        moment,
    }
}

/// Stiffness matrix over all `N + 1` nodes, node 0 included.
pub fn assemble_full_stiffness(mesh: &MeshPartition) -> SymTridiag {
    let mut k = SymTridiag::zeros(mesh.n_elements() + 1);
    for (e, h) in mesh.element_sizes().enumerate() {
        k.diag[e] += 1.0 / h;
        k.diag[e + 1] += 1.0 / h;
        k.off[e] -= 1.0 / h;
    }
    k
}

/// How initial data is mapped into the discrete space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Solve `M c = ((f, φ_i))_i`.
    #[default]
    L2,
    /// Sample `f` at the nodes.
    Interpolation,
}

/// Maps `f` (with `f(0) = 0`) into the pinned P1 space.
pub fn project_initial(
    system: &AssembledSystem,
    f: impl Fn(f64) -> f64,
    mode: Projection,
) -> StateVector {
    match mode {
        Projection::Interpolation => {
            StateVector(system.mesh.nodes()[1..].iter().map(|&x| f(x)).collect())
        }
        Projection::L2 => {
            let load = load_vector(&system.mesh, &f);
            let c = system
                .mass
                .solve(&load)
                .expect("mass matrix of a valid mesh is nonsingular");
            StateVector(c)
        }
    }
}

/// Same as [`project_initial`] but into the space that also vanishes at
/// `x = 1`; the returned vector keeps full length with a zero last entry.
pub fn project_initial_dirichlet(
    system: &AssembledSystem,
    f: impl Fn(f64) -> f64,
    mode: Projection,
) -> StateVector {
    let n = system.n_dofs();
    let mut c = match mode {
        Projection::Interpolation => system.mesh.nodes()[1..].iter().map(|&x| f(x)).collect(),
        Projection::L2 => {
            let load = load_vector(&system.mesh, &f);
            let mut c = system
                .mass
                .truncated(n - 1)
                .solve(&load[..n - 1])
                .expect("mass matrix of a valid mesh is nonsingular");
            c.push(0.0);
            c
        }
    };
    c[n - 1] = 0.0;
    StateVector(c)
}

/// `((f, φ_i))_i` with the three-point rule on each element.
pub fn load_vector(mesh: &MeshPartition, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.n_dofs()];
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        let (mut left, mut right) = (0.0, 0.0);
        for (s, w) in gauss3() {
            let fx = f(a + s * h) * w * h;
            left += fx * (1.0 - s);
            right += fx * s;
        }
        load[e] += right;
        if e > 0 {
            load[e - 1] += left;
        }
    }
    load
}

/// `(∫ Y³ φ_i dx)_i`.
pub fn cubic_term(mesh: &MeshPartition, y: &StateVector) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_dofs()];
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        let (ya, yb) = element_values(&y.0, e);
        let (mut left, mut right) = (0.0, 0.0);
        for (s, w) in gauss3() {
            let v = ya * (1.0 - s) + yb * s;
            let c = v * v * v * w * h;
            left += c * (1.0 - s);
            right += c * s;
        }
        out[e] += right;
        if e > 0 {
            out[e - 1] += left;
        }
    }
    out
}

/// `(∫ 3Y² φ_j φ_i dx)_ij`, the derivative of [`cubic_term`].
pub fn cubic_jacobian(mesh: &MeshPartition, y: &StateVector) -> SymTridiag {
    let mut jac = SymTridiag::zeros(mesh.n_dofs());
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        let (ya, yb) = element_values(&y.0, e);
        let (mut ll, mut lr, mut rr) = (0.0, 0.0, 0.0);
        for (s, w) in gauss3() {
            let v = ya * (1.0 - s) + yb * s;
            let c = 3.0 * v * v * w * h;
            ll += c * (1.0 - s) * (1.0 - s);
            lr += c * (1.0 - s) * s;
            rr += c * s * s;
        }
        jac.diag[e] += rr;
        if e > 0 {
            jac.diag[e - 1] += ll;
            jac.off[e - 1] += lr;
        }
    }
    jac
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub l_inf: f64,
    pub l4: f64,
    pub h1_semi: f64,
}

pub fn norms(system: &AssembledSystem, y: &StateVector) -> Result<Norms> {
    system.check_len(y)?;
    let mesh = &system.mesh;
    let mut int4 = 0.0;
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let (ya, yb) = element_values(&y.0, e);
        for (s, w) in gauss3() {
            let v = ya * (1.0 - s) + yb * s;
            int4 += w * (b - a) * v * v * v * v;
        }
    }
    Ok(Norms {
        l2: system.mass.quad_form(&y.0).max(0.0).sqrt(),
        l_inf: y.max_abs(),
        l4: int4.sqrt().sqrt(),
        h1_semi: system.stiffness.quad_form(&y.0).max(0.0).sqrt(),
    })
}

//! Exact H-representation polytope engine: vertex enumeration, volume,
//! linear programming, and lower-dimensional slice volumes.
//!
//! Everything here is exact. Vertices come from exhaustive subset solving,
//! volume from recursive facet triangulation coned from the vertex centroid,
//! and slices from rational changes of variables with the Fubini Jacobian.
//! The exhaustive enumeration is meant for desk scale (around 12 constraints
//! rows and dimension up to 5); it trades asymptotic speed for being
//! trivially correct.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{self, Vector};
use crate::rational::Rational;
use crate::simplex::{lp_maximize_free, LpOutcome};

/// Convex polytope `{x : normal_i . x <= bound_i}` in R^dim.
///
/// Boundedness is a checked property, not a constructor invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    constraints: Vec<(Vector, Rational)>,
}

/// An extreme point together with the full set of constraint indices it
/// satisfies with equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub point: Vector,
    pub active: BTreeSet<usize>,
}

impl Polytope {
    /// All normals must be nonzero and of length `dim >= 1`.
    pub fn new(dim: usize, constraints: Vec<(Vector, Rational)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParameter(
                "polytope dimension must be >= 1".into(),
            ));
        }
        for (normal, _) in &constraints {
            if normal.len() != dim {
                return Err(Error::BadParameter(
                    "constraint normal has wrong length".into(),
                ));
            }
            if linalg::is_zero_vector(normal) {
                return Err(Error::BadParameter("constraint normal is zero".into()));
            }
        }
        Ok(Polytope { dim, constraints })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[(Vector, Rational)] {
        &self.constraints
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.constraints
            .iter()
            .all(|(normal, bound)| linalg::dot(normal, x) <= *bound)
    }

    fn active_set(&self, x: &[Rational]) -> BTreeSet<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, (normal, bound))| linalg::dot(normal, x) == *bound)
            .map(|(i, _)| i)
            .collect()
    }

    /// Exact maximum of `objective . x` over the polytope, with a vertex
    /// attaining it. Simplex with exact pivots; the returned point is then
    /// walked to a vertex of the optimal face.
    pub fn lp_maximize(&self, objective: &[Rational]) -> Result<(Rational, Vector)> {
        match lp_maximize_free(&self.constraints, objective) {
            LpOutcome::Infeasible => Err(Error::Infeasible),
            LpOutcome::Unbounded => Err(Error::UnboundedObjective),
            LpOutcome::Optimal { value, point } => {
                let vertex = self.purify_to_vertex(point, objective);
                Ok((value, vertex))
            }
        }
    }

    /// Moves an optimal point within the optimal face until the active
    /// normals span R^dim. Bounded polytopes always reach a vertex.
    fn purify_to_vertex(&self, mut p: Vector, objective: &[Rational]) -> Vector {
        loop {
            let active = self.active_set(&p);
            let normals: Vec<Vector> = active
                .iter()
                .map(|&i| self.constraints[i].0.clone())
                .collect();
            if linalg::rank(&normals) == self.dim {
                return p;
            }
            let kernel = linalg::kernel_basis(&normals, self.dim);
            let Some(d) = kernel.into_iter().next() else {
                return p;
            };
            debug_assert!(linalg::dot(objective, &d).is_zero());
            let mut moved = false;
            for dir in [d.clone(), linalg::neg(&d)] {
                let mut t_max: Option<Rational> = None;
                for (normal, bound) in &self.constraints {
                    let nd = linalg::dot(normal, &dir);
                    if nd.is_positive() {
                        let slack = bound - linalg::dot(normal, &p);
                        let t = slack / nd;
                        if t_max.as_ref().is_none_or(|m| t < *m) {
                            t_max = Some(t);
                        }
                    }
                }
                if let Some(t) = t_max {
                    p = linalg::add(&p, &linalg::scale(&dir, &t));
                    moved = true;
                    break;
                }
            }
            if !moved {
                // The polytope contains a line; no vertex exists.
                return p;
            }
        }
    }

    /// True when the feasible set is nonempty.
    pub fn is_feasible(&self) -> bool {
        !matches!(
            lp_maximize_free(&self.constraints, &linalg::zeros(self.dim)),
            LpOutcome::Infeasible
        )
    }

    /// Boundedness probe via LPs in the +-coordinate directions.
    /// The empty polytope counts as bounded.
    pub fn is_bounded(&self) -> bool {
        if !self.is_feasible() {
            return true;
        }
        for i in 0..self.dim {
            for sign in [Rational::one(), -Rational::one()] {
                let mut obj = linalg::zeros(self.dim);
                obj[i] = sign;
                if matches!(
                    lp_maximize_free(&self.constraints, &obj),
                    LpOutcome::Unbounded
                ) {
                    return false;
                }
            }
        }
        true
    }

    /// All vertices, exactly, each with its full active set. Every
    /// dim-subset of constraints with invertible normal matrix is solved and
    /// filtered by feasibility. Errors on unbounded input; the empty
    /// polytope yields an empty list.
    pub fn enumerate_vertices(&self) -> Result<Vec<Vertex>> {
        if !self.is_bounded() {
            return Err(Error::UnboundedPolytope);
        }
        Ok(self.vertices_assuming_bounded())
    }

    /// Subset enumeration without the boundedness probe; callers guarantee
    /// boundedness (e.g. box polytopes of a spanning row family).
    pub(crate) fn vertices_assuming_bounded(&self) -> Vec<Vertex> {
        let n = self.constraints.len();
        let m = self.dim;
        if n < m {
            return Vec::new();
        }
        let mut seen: BTreeSet<Vector> = BTreeSet::new();
        let mut out: Vec<Vertex> = Vec::new();
        let mut subset: Vec<usize> = (0..m).collect();
        loop {
            // Solve the m x m system the subset defines.
            let mat: Vec<Vector> = subset
                .iter()
                .map(|&i| self.constraints[i].0.clone())
                .collect();
            let rhs: Vector = subset
                .iter()
                .map(|&i| self.constraints[i].1.clone())
                .collect();
            if let Some(x) = linalg::solve(&mat, &rhs) {
                if self.contains(&x) && !seen.contains(&x) {
                    let active = self.active_set(&x);
                    seen.insert(x.clone());
                    out.push(Vertex { point: x, active });
                }
            }
            // Advance the combination lexicographically.
            let mut i = m;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if subset[i] != i + n - m {
                    subset[i] += 1;
                    for k in i + 1..m {
                        subset[k] = subset[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Exact dim-dimensional volume. Unbounded input errors; empty or
    /// lower-dimensional bodies have volume 0.
    pub fn volume(&self) -> Result<Rational> {
        if !self.is_bounded() {
            return Err(Error::UnboundedPolytope);
        }
        Ok(self.volume_assuming_bounded())
    }

    pub(crate) fn volume_assuming_bounded(&self) -> Rational {
        let vertices = self.vertices_assuming_bounded();
        self.volume_from_vertices(&vertices)
    }

    /// Recursive facet triangulation coned from vertex centroids; all
    /// simplex corners stay rational, so every simplex volume is exact.
    pub fn volume_from_vertices(&self, vertices: &[Vertex]) -> Rational {
        let m = self.dim;
        if vertices.len() < m + 1 {
            return Rational::zero();
        }
        let points: Vec<&Vector> = vertices.iter().map(|v| &v.point).collect();
        let all: Vec<Vector> = points.iter().map(|p| (*p).clone()).collect();
        if linalg::affine_rank(&all) < m {
            return Rational::zero();
        }
        let indices: Vec<usize> = (0..vertices.len()).collect();
        let simplices = self.triangulate_face(vertices, &indices, m);
        let factorial = (1..=m as u64).product::<u64>();
        let mut total = Rational::zero();
        for simplex in simplices {
            let base = &simplex[0];
            let mat: Vec<Vector> = simplex[1..].iter().map(|p| linalg::sub(p, base)).collect();
            total += linalg::abs_val(&linalg::det(&mat));
        }
        total / Rational::from_integer(factorial.into())
    }

    /// Triangulates the face spanned by `face` (vertex indices) of dimension
    /// `face_dim`, returning simplices as point lists of length
    /// `face_dim + 1`.
    fn triangulate_face(
        &self,
        vertices: &[Vertex],
        face: &[usize],
        face_dim: usize,
    ) -> Vec<Vec<Vector>> {
        if face_dim == 0 || face.len() == face_dim + 1 {
            return vec![face.iter().map(|&i| vertices[i].point.clone()).collect()];
        }
        let centroid = centroid_of(vertices, face);
        // Facets: constraints active on a (face_dim - 1)-dimensional subset.
        let mut out = Vec::new();
        let mut seen_facets: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in 0..self.constraints.len() {
            let sub: Vec<usize> = face
                .iter()
                .copied()
                .filter(|&i| vertices[i].active.contains(&c))
                .collect();
            if sub.len() == face.len() || sub.len() < face_dim {
                continue;
            }
            let pts: Vec<Vector> = sub.iter().map(|&i| vertices[i].point.clone()).collect();
            if linalg::affine_rank(&pts) != face_dim - 1 {
                continue;
            }
            if !seen_facets.insert(sub.clone()) {
                continue;
            }
            for mut simplex in self.triangulate_face(vertices, &sub, face_dim - 1) {
                simplex.push(centroid.clone());
                out.push(simplex);
            }
        }
        out
    }

    /// The (dim-1)-volume of `P ∩ {functional . x = level}`, normalized by
    /// the substitution Jacobian so that integrating over `level` reproduces
    /// `volume`.
    pub fn slice_volume(&self, functional: &[Rational], level: &Rational) -> Result<Rational> {
        if linalg::is_zero_vector(functional) {
            return Err(Error::ZeroFunctional);
        }
        let pivot = functional
            .iter()
            .position(|c| !c.is_zero())
            .expect("nonzero functional");
        let mut w = linalg::zeros(self.dim);
        w[pivot] = Rational::one() / functional[pivot].clone();
        let basis = linalg::kernel_basis(&[functional.to_vec()], self.dim);
        debug_assert_eq!(basis.len(), self.dim - 1);

        let mut columns = vec![w.clone()];
        columns.extend(basis.iter().cloned());
        let jac = linalg::abs_val(&linalg::det(&transpose(&columns)));

        let origin = linalg::scale(&w, level);
        let reduced = self.reduced_volume(&origin, &basis)?;
        Ok(jac * reduced)
    }

    /// The (dim-2)-volume of the double slice `{f1 . x = l1, f2 . x = l2}`,
    /// Jacobian-corrected like `slice_volume` with two pinned functionals.
    pub fn double_slice_volume(
        &self,
        f1: &[Rational],
        f2: &[Rational],
        l1: &Rational,
        l2: &Rational,
    ) -> Result<Rational> {
        let rows = vec![f1.to_vec(), f2.to_vec()];
        if linalg::rank(&rows) < 2 {
            return Err(Error::ColinearFunctionals);
        }
        if self.dim < 2 {
            return Err(Error::BadParameter("double slice needs dim >= 2".into()));
        }
        let w = linalg::right_inverse(&rows, self.dim).ok_or(Error::ColinearFunctionals)?;
        let basis = linalg::kernel_basis(&rows, self.dim);
        debug_assert_eq!(basis.len(), self.dim - 2);

        let mut columns = w.clone();
        columns.extend(basis.iter().cloned());
        let jac = linalg::abs_val(&linalg::det(&transpose(&columns)));

        let origin = linalg::add(&linalg::scale(&w[0], l1), &linalg::scale(&w[1], l2));
        let reduced = self.reduced_volume(&origin, &basis)?;
        Ok(jac * reduced)
    }

    /// Volume of `{y : origin + basis . y in P}` in the `y` coordinates.
    /// An empty basis asks for the 0-dimensional volume: 1 if the origin is
    /// feasible, else 0.
    fn reduced_volume(&self, origin: &[Rational], basis: &[Vector]) -> Result<Rational> {
        if basis.is_empty() {
            return Ok(if self.contains(origin) {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (normal, bound) in &self.constraints {
            let reduced_normal: Vector = basis.iter().map(|b| linalg::dot(normal, b)).collect();
            let reduced_bound = bound - linalg::dot(normal, origin);
            if linalg::is_zero_vector(&reduced_normal) {
                if reduced_bound.is_negative() {
                    return Ok(Rational::zero());
                }
                continue;
            }
            constraints.push((reduced_normal, reduced_bound));
        }
        let reduced = Polytope::new(basis.len(), constraints)?;
        reduced.volume()
    }
}

fn centroid_of(vertices: &[Vertex], face: &[usize]) -> Vector {
    let dim = vertices[face[0]].point.len();
    let mut sum = linalg::zeros(dim);
    for &i in face {
        sum = linalg::add(&sum, &vertices[i].point);
    }
    let k = Rational::from_integer((face.len() as u64).into());
    sum.into_iter().map(|x| x / &k).collect()
}

fn transpose(columns: &[Vector]) -> Vec<Vector> {
    let rows = columns[0].len();
    (0..rows)
        .map(|r| columns.iter().map(|c| c[r].clone()).collect())
        .collect()
}

/// The feasible box polytope `{x : L_j(x) in box_j}`: constraints
/// `L_j(x) <= hi_j` and `-L_j(x) <= -lo_j`, two per slot, in slot order.
pub fn build_box_polytope(config: &Configuration, boxes: &[Interval]) -> Polytope {
    assert_eq!(boxes.len(), config.slots(), "one box per slot");
    let mut constraints = Vec::with_capacity(2 * boxes.len());
    for (j, b) in boxes.iter().enumerate() {
        constraints.push((config.row(j).clone(), b.hi.clone()));
        constraints.push((linalg::neg(config.row(j)), -b.lo.clone()));
    }
    Polytope::new(config.dim(), constraints).expect("config rows are nonzero")
}

/// `K_e`: the centered box polytope `{x : |L_j(x)| <= e_j / 2}`.
pub fn body_of(config: &Configuration, e: &crate::config::MeasureVector) -> Polytope {
    let boxes: Vec<Interval> = e
        .values()
        .iter()
        .map(|ej| Interval::centered(&Rational::zero(), ej))
        .collect();
    build_box_polytope(config, &boxes)
}

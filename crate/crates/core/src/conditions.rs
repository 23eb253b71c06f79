//! Deciders for the structural hypotheses on a pair (L, e): nondegeneracy,
//! admissibility, strict admissibility, genericity, and the 1-skeleton graph
//! of the centered body.
//!
//! All verdicts are exact rational decisions; every negative verdict carries
//! an exact witness (an index pair, a vertex, or an LP certificate).

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::config::{Configuration, MeasureVector};
use crate::error::{Error, Result};
use crate::functional;
use crate::linalg::{self, Vector};
use crate::polytope::{body_of, Vertex};
use crate::rational::Rational;
use crate::report::rational_string;
use crate::simplex::{lp_maximize_free, LpOutcome};

/// Verdicts for the three nondegeneracy clauses, with witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct NondegeneracyReport {
    pub nondegenerate: bool,
    /// Clause (i): rows that fail surjectivity (zero rows).
    pub zero_rows: Vec<usize>,
    /// Clause (ii): proportional row pairs.
    pub proportional_pairs: Vec<(usize, usize)>,
    /// Clause (iii): slots j for which the remaining rows do not span.
    pub rank_deficient_slots: Vec<usize>,
}

/// Per-slot admissibility: is `|L_k| = e_k/2` attained on the body?
#[derive(Debug, Clone, Serialize)]
pub struct SlotAdmissibility {
    pub slot: usize,
    pub admissible: bool,
    /// Exact LP maximum of `L_k` over the body (always `<= e_k/2`).
    #[serde(serialize_with = "rational_string")]
    pub attained: Rational,
    #[serde(serialize_with = "rational_string")]
    pub target: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub slots: Vec<SlotAdmissibility>,
}

/// Per-slot strictness: the slack LP value for condition (i) and the exact
/// left derivative of the kernel at e_j/2 for condition (ii).
#[derive(Debug, Clone, Serialize)]
pub struct SlotStrictness {
    pub slot: usize,
    pub strict: bool,
    #[serde(serialize_with = "rational_string")]
    pub slack: Rational,
    pub witness: Vec<String>,
    #[serde(serialize_with = "rational_string")]
    pub left_derivative: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictAdmissibilityReport {
    pub strictly_admissible: bool,
    pub slots: Vec<SlotStrictness>,
}

/// Per-vertex genericity: which slots are active and how many.
#[derive(Debug, Clone, Serialize)]
pub struct VertexGenericity {
    pub point: Vec<String>,
    pub active_slots: Vec<usize>,
    pub generic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityReport {
    pub generic: bool,
    pub dim: usize,
    pub vertices: Vec<VertexGenericity>,
}

/// The combined hypothesis report for (L, e).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub nondegenerate: NondegeneracyReport,
    pub admissible: Option<AdmissibilityReport>,
    pub strictly_admissible: Option<StrictAdmissibilityReport>,
    pub generic: Option<GenericityReport>,
}

/// Checks the three nondegeneracy clauses by exact rational elimination.
pub fn check_nondegenerate(config: &Configuration) -> NondegeneracyReport {
    let m = config.dim();
    let rows = config.rows();

    let zero_rows: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| linalg::is_zero_vector(r))
        .map(|(j, _)| j)
        .collect();

    let mut proportional_pairs = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if linalg::proportional(&rows[i], &rows[j]) {
                proportional_pairs.push((i, j));
            }
        }
    }

    let mut rank_deficient_slots = Vec::new();
    for j in 0..rows.len() {
        let others: Vec<Vector> = rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, r)| r.clone())
            .collect();
        if linalg::rank(&others) < m {
            rank_deficient_slots.push(j);
        }
    }

    NondegeneracyReport {
        nondegenerate: zero_rows.is_empty()
            && proportional_pairs.is_empty()
            && rank_deficient_slots.is_empty(),
        zero_rows,
        proportional_pairs,
        rank_deficient_slots,
    }
}

fn require_bounded_body(config: &Configuration) -> Result<()> {
    if linalg::rank(config.rows()) < config.dim() {
        return Err(Error::DegenerateConfiguration);
    }
    Ok(())
}

/// Slot k is admissible exactly when the LP maximum of `L_k` over the body
/// equals `e_k/2` (it is never larger; by central symmetry the sign choice
/// does not matter).
pub fn check_admissible(config: &Configuration, e: &MeasureVector) -> Result<AdmissibilityReport> {
    require_bounded_body(config)?;
    let body = body_of(config, e);
    let two = Rational::from_integer(2.into());
    let mut slots = Vec::with_capacity(config.slots());
    for k in 0..config.slots() {
        let (attained, _) = body.lp_maximize(config.row(k))?;
        let target = e.get(k) / &two;
        slots.push(SlotAdmissibility {
            slot: k,
            admissible: attained == target,
            attained,
            target,
        });
    }
    Ok(AdmissibilityReport {
        admissible: slots.iter().all(|s| s.admissible),
        slots,
    })
}

/// Condition (i) per slot j: the exact LP
/// `maximize d  s.t.  L_j(x) = e_j/2, |L_i(x)| <= e_i/2 - d (i != j)`
/// has optimum `d* > 0`. Condition (ii): the exact left derivative of K_j at
/// `e_j/2` is strictly negative.
pub fn check_strictly_admissible(
    config: &Configuration,
    e: &MeasureVector,
) -> Result<StrictAdmissibilityReport> {
    let nd = check_nondegenerate(config);
    if !nd.nondegenerate {
        return Err(Error::HypothesisFailed(
            "strict admissibility requires a nondegenerate configuration".into(),
        ));
    }
    let m = config.dim();
    let two = Rational::from_integer(2.into());
    let mut slots = Vec::with_capacity(config.slots());
    for j in 0..config.slots() {
        // Variables (x, d) in R^{m+1}.
        let mut constraints: Vec<(Vector, Rational)> = Vec::new();
        let target = e.get(j) / &two;
        let mut row_eq = config.row(j).clone();
        row_eq.push(Rational::zero());
        constraints.push((row_eq.clone(), target.clone()));
        constraints.push((linalg::neg(&row_eq), -target.clone()));
        for i in 0..config.slots() {
            if i == j {
                continue;
            }
            let bound = e.get(i) / &two;
            let mut upper = config.row(i).clone();
            upper.push(Rational::one());
            constraints.push((upper, bound.clone()));
            let mut lower = linalg::neg(config.row(i));
            lower.push(Rational::one());
            constraints.push((lower, bound));
        }
        let mut objective = linalg::zeros(m);
        objective.push(Rational::one());
        let (slack, witness) = match lp_maximize_free(&constraints, &objective) {
            LpOutcome::Optimal { value, point } => (value, point[..m].to_vec()),
            LpOutcome::Infeasible => return Err(Error::Infeasible),
            LpOutcome::Unbounded => return Err(Error::UnboundedObjective),
        };
        let left_derivative = functional::kernel_left_derivative(config, e, j, &target)?;
        slots.push(SlotStrictness {
            slot: j,
            strict: slack.is_positive() && left_derivative.is_negative(),
            slack,
            witness: witness
                .iter()
                .map(crate::rational::format_rational)
                .collect(),
            left_derivative,
        });
    }
    Ok(StrictAdmissibilityReport {
        strictly_admissible: slots.iter().all(|s| s.strict),
        slots,
    })
}

/// The distinct slots active at a vertex of the body (constraint index c
/// belongs to slot c/2: upper bound at 2j, lower at 2j+1).
pub fn active_slots(vertex: &Vertex) -> BTreeSet<usize> {
    vertex.active.iter().map(|&c| c / 2).collect()
}

/// Genericity: every vertex of the body activates exactly m distinct slots.
pub fn check_generic(config: &Configuration, e: &MeasureVector) -> Result<GenericityReport> {
    require_bounded_body(config)?;
    let body = body_of(config, e);
    let m = config.dim();
    let vertices = body.enumerate_vertices()?;
    let mut rows = Vec::with_capacity(vertices.len());
    for v in &vertices {
        let slots: Vec<usize> = active_slots(v).into_iter().collect();
        rows.push(VertexGenericity {
            point: v
                .point
                .iter()
                .map(crate::rational::format_rational)
                .collect(),
            generic: slots.len() == m,
            active_slots: slots,
        });
    }
    Ok(GenericityReport {
        generic: rows.iter().all(|r| r.generic),
        dim: m,
        vertices: rows,
    })
}

/// Runs all four checkers in dependency order. Downstream checks that lack
/// their preconditions are reported as `None` rather than errors.
pub fn check_all(config: &Configuration, e: &MeasureVector) -> ConditionReport {
    let nondegenerate = check_nondegenerate(config);
    let spanning = linalg::rank(config.rows()) == config.dim();
    let admissible = if spanning {
        check_admissible(config, e).ok()
    } else {
        None
    };
    let strictly_admissible = if nondegenerate.nondegenerate {
        check_strictly_admissible(config, e).ok()
    } else {
        None
    };
    let generic = if spanning {
        check_generic(config, e).ok()
    } else {
        None
    };
    ConditionReport {
        nondegenerate,
        admissible,
        strictly_admissible,
        generic,
    }
}

/// The 1-skeleton graph of the body: nodes are its vertices, and two nodes
/// are adjacent exactly when their active constraint sets share m-1 indices
/// whose normals are linearly independent.
#[derive(Debug, Clone)]
pub struct SkeletonGraph {
    pub nodes: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
}

impl SkeletonGraph {
    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == node || b == node)
            .count()
    }
}

/// Builds the skeleton graph. The combinatorial adjacency rule is valid only
/// under genericity; non-generic input is rejected.
pub fn skeleton_graph(config: &Configuration, e: &MeasureVector) -> Result<SkeletonGraph> {
    let generic = check_generic(config, e)?;
    if !generic.generic {
        return Err(Error::NonGeneric);
    }
    let body = body_of(config, e);
    let nodes = body.enumerate_vertices()?;
    let m = config.dim();
    let mut edges = Vec::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let shared: Vec<usize> = nodes[a]
                .active
                .intersection(&nodes[b].active)
                .copied()
                .collect();
            if shared.len() != m - 1 {
                continue;
            }
            let normals: Vec<Vector> = shared
                .iter()
                .map(|&c| body.constraints()[c].0.clone())
                .collect();
            if linalg::rank(&normals) == m - 1 {
                edges.push((a, b));
            }
        }
    }
    Ok(SkeletonGraph { nodes, edges })
}

/// Breadth-first reachability. The empty graph counts as connected.
pub fn is_connected(g: &SkeletonGraph) -> bool {
    if g.nodes.is_empty() {
        return true;
    }
    let n = g.nodes.len();
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &g.edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1usize;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

//! Exact evaluation of the multilinear form, its slice kernels, the
//! first/second-order expansion terms, and the shifted-interval functional.
//!
//! The form on a tuple of interval unions decomposes over component tuples
//! into box-polytope volumes, so every value here is an exact rational. The
//! expansion terms are computed as exact differences of form values, never
//! by quadrature against sampled kernels; multilinearity makes those
//! identities exact, and quadrature would pollute the cubic-order residual
//! they are used to test.

use num_traits::{One, Signed, Zero};

use crate::conditions::check_nondegenerate;
use crate::config::{Configuration, MeasureVector};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::linalg::{self, Vector};
use crate::polytope::{build_box_polytope, Polytope};
use crate::rational::{format_rational, Rational};

/// A slot-indexed tuple of interval unions with strictly positive measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetTuple {
    slots: Vec<IntervalUnion>,
}

impl SetTuple {
    pub fn new(slots: Vec<IntervalUnion>) -> Result<Self> {
        for s in &slots {
            if s.measure() <= Rational::zero() {
                return Err(Error::DegenerateSet);
            }
        }
        Ok(SetTuple { slots })
    }

    /// The tuple of centered intervals `[-e_j/2, e_j/2]`.
    pub fn star_of(e: &MeasureVector) -> Self {
        let slots = e
            .values()
            .iter()
            .map(|ej| {
                let half = ej / Rational::from_integer(2.into());
                IntervalUnion::of(-half.clone(), half)
            })
            .collect();
        SetTuple { slots }
    }

    /// Symmetrizes each slot.
    pub fn star(&self) -> Self {
        let slots = self
            .slots
            .iter()
            .map(|s| s.symmetrize().expect("positive measure by invariant"))
            .collect();
        SetTuple { slots }
    }

    /// The orbit image `(E_j + L_j(v))_j`.
    pub fn translate_orbit(&self, config: &Configuration, v: &[Rational]) -> Self {
        let slots = self
            .slots
            .iter()
            .enumerate()
            .map(|(j, s)| s.translate(&linalg::dot(config.row(j), v)))
            .collect();
        SetTuple { slots }
    }

    pub fn with_slot(&self, j: usize, value: IntervalUnion) -> Self {
        let mut slots = self.slots.clone();
        slots[j] = value;
        SetTuple { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, j: usize) -> &IntervalUnion {
        &self.slots[j]
    }

    pub fn slots(&self) -> &[IntervalUnion] {
        &self.slots
    }

    pub fn measures(&self) -> Vec<Rational> {
        self.slots.iter().map(|s| s.measure()).collect()
    }

    /// Requires `|E_j| = e_j` for every slot.
    pub fn check_measures(&self, e: &MeasureVector) -> Result<()> {
        if self.slots.len() != e.len() {
            return Err(Error::SlotCountMismatch {
                got: self.slots.len(),
                want: e.len(),
            });
        }
        for (j, s) in self.slots.iter().enumerate() {
            let got = s.measure();
            if got != *e.get(j) {
                return Err(Error::MeasureMismatch {
                    slot: j,
                    got: format_rational(&got),
                    want: format_rational(e.get(j)),
                });
            }
        }
        Ok(())
    }

    /// Human-readable one-line serialization, used in scan CSV rows.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.slots.iter().map(|s| s.to_string()).collect();
        parts.join(" | ")
    }
}

fn require_nondegenerate(config: &Configuration) -> Result<()> {
    if !check_nondegenerate(config).nondegenerate {
        return Err(Error::DegenerateConfiguration);
    }
    Ok(())
}

fn require_slot(config: &Configuration, j: usize) -> Result<()> {
    if j >= config.slots() {
        return Err(Error::SlotOutOfRange(j));
    }
    Ok(())
}

/// The form value: the sum over component tuples of the volume of the
/// corresponding box polytope. Nondegeneracy is checked first; it guarantees
/// that every box polytope is bounded.
pub fn phi(config: &Configuration, tuple: &SetTuple) -> Result<Rational> {
    if tuple.len() != config.slots() {
        return Err(Error::SlotCountMismatch {
            got: tuple.len(),
            want: config.slots(),
        });
    }
    require_nondegenerate(config)?;
    let comps: Vec<&[Interval]> = tuple.slots.iter().map(|s| s.components()).collect();
    let mut total = Rational::zero();
    let mut choice = vec![0usize; comps.len()];
    'outer: loop {
        let boxes: Vec<Interval> = choice
            .iter()
            .enumerate()
            .map(|(j, &k)| comps[j][k].clone())
            .collect();
        let p = build_box_polytope(config, &boxes);
        total += p.volume_assuming_bounded();
        // Odometer over component choices.
        for j in 0..choice.len() {
            choice[j] += 1;
            if choice[j] < comps[j].len() {
                continue 'outer;
            }
            choice[j] = 0;
        }
        break;
    }
    Ok(total)
}

/// The reduced body `{x : |L_i(x)| <= e_i/2, i != j}`; bounded whenever the
/// configuration is nondegenerate.
fn reduced_body(config: &Configuration, e: &MeasureVector, skip: &[usize]) -> Polytope {
    let two = Rational::from_integer(2.into());
    let mut constraints: Vec<(Vector, Rational)> = Vec::new();
    for i in 0..config.slots() {
        if skip.contains(&i) {
            continue;
        }
        let half = e.get(i) / &two;
        constraints.push((config.row(i).clone(), half.clone()));
        constraints.push((linalg::neg(config.row(i)), half));
    }
    Polytope::new(config.dim(), constraints).expect("rows are nonzero")
}

/// The slice kernel: the normalized (m-1)-volume of the reduced body sliced
/// along `L_j` at level `s`. Even in `s`; the parameter `e_j` does not enter.
pub fn kernel(
    config: &Configuration,
    e: &MeasureVector,
    j: usize,
    s: &Rational,
) -> Result<Rational> {
    require_slot(config, j)?;
    require_nondegenerate(config)?;
    reduced_body(config, e, &[j]).slice_volume(config.row(j), s)
}

/// Kernel of the shifted-interval form: slot boxes `I_i` for `i != j` need
/// not be centered.
pub fn kernel_shifted(
    config: &Configuration,
    boxes: &[Interval],
    j: usize,
    s: &Rational,
) -> Result<Rational> {
    require_slot(config, j)?;
    require_nondegenerate(config)?;
    if boxes.len() != config.slots() {
        return Err(Error::SlotCountMismatch {
            got: boxes.len(),
            want: config.slots(),
        });
    }
    let mut constraints: Vec<(Vector, Rational)> = Vec::new();
    for (i, b) in boxes.iter().enumerate() {
        if i == j {
            continue;
        }
        constraints.push((config.row(i).clone(), b.hi.clone()));
        constraints.push((linalg::neg(config.row(i)), -b.lo.clone()));
    }
    let body = Polytope::new(config.dim(), constraints).expect("rows are nonzero");
    body.slice_volume(config.row(j), s)
}

/// The level values at which the kernel's polynomial pieces can change:
/// projections of the reduced body's vertices onto `L_j`, sorted, distinct.
pub fn kernel_breakpoints(
    config: &Configuration,
    e: &MeasureVector,
    j: usize,
) -> Result<Vec<Rational>> {
    require_slot(config, j)?;
    require_nondegenerate(config)?;
    let body = reduced_body(config, e, &[j]);
    let mut levels: Vec<Rational> = body
        .enumerate_vertices()?
        .iter()
        .map(|v| linalg::dot(config.row(j), &v.point))
        .collect();
    levels.sort();
    levels.dedup();
    Ok(levels)
}

/// Evaluates a polynomial given by low-to-high coefficients.
fn poly_eval(coeffs: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_derivative_eval(coeffs: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
        let kc = c * Rational::from_integer((k as u64).into());
        acc = acc * x + kc;
    }
    acc
}

/// Integral of the polynomial over `[lo, hi]`, exact.
fn poly_integral(coeffs: &[Rational], lo: &Rational, hi: &Rational) -> Rational {
    let anti: Vec<Rational> = std::iter::once(Rational::zero())
        .chain(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / Rational::from_integer(((k + 1) as u64).into())),
        )
        .collect();
    poly_eval(&anti, hi) - poly_eval(&anti, lo)
}

/// Exact interpolation through distinct sample points (Newton form expanded
/// to monomial coefficients).
fn interpolate(points: &[(Rational, Rational)]) -> Vec<Rational> {
    let n = points.len();
    // Divided differences.
    let mut table: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
    let xs: Vec<Rational> = points.iter().map(|(x, _)| x.clone()).collect();
    let mut newton = vec![table[0].clone()];
    for level in 1..n {
        for i in 0..n - level {
            let num = &table[i + 1] - &table[i];
            let den = &xs[i + level] - &xs[i];
            table[i] = num / den;
        }
        table.truncate(n - level);
        newton.push(table[0].clone());
    }
    // Expand sum_k newton[k] * prod_{i<k} (x - xs[i]).
    let mut coeffs = vec![Rational::zero(); n];
    let mut basis = vec![Rational::one()];
    for (k, nk) in newton.iter().enumerate() {
        for (i, b) in basis.iter().enumerate() {
            coeffs[i] += nk * b;
        }
        if k + 1 < n {
            // basis *= (x - xs[k])
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * &xs[k];
            }
            basis = next;
        }
    }
    coeffs
}

/// Reconstructs the kernel's polynomial piece on the open window
/// `(s - h, s)` by sampling `m + 1` exact points and verifying against one
/// extra sample; `h` halves on mismatch.
fn piece_on_left_window(
    config: &Configuration,
    e: &MeasureVector,
    j: usize,
    s: &Rational,
    h0: Rational,
) -> Result<Vec<Rational>> {
    let m = config.dim();
    let mut h = h0;
    let denom = Rational::from_integer(((m + 3) as u64).into());
    for _ in 0..32 {
        let step = &h / &denom;
        let mut samples = Vec::with_capacity(m + 1);
        for k in 1..=m + 1 {
            let x = s - &step * Rational::from_integer((k as u64).into());
            let y = kernel(config, e, j, &x)?;
            samples.push((x, y));
        }
        let coeffs = interpolate(&samples);
        let extra_x = s - &step * Rational::from_integer(((m + 2) as u64).into());
        let extra_y = kernel(config, e, j, &extra_x)?;
        if poly_eval(&coeffs, &extra_x) == extra_y {
            return Ok(coeffs);
        }
        h /= Rational::from_integer(2.into());
    }
    Err(Error::BreakpointCongestion {
        smallest_h: format_rational(&h),
    })
}

/// Exact one-sided derivative `D^- K_j(s)` for `s > 0`. The kernel is
/// piecewise polynomial of degree <= m-1; the piece immediately left of `s`
/// is reconstructed exactly and differentiated at `s`.
pub fn kernel_left_derivative(
    config: &Configuration,
    e: &MeasureVector,
    j: usize,
    s: &Rational,
) -> Result<Rational> {
    if !s.is_positive() {
        return Err(Error::BadParameter("left derivative requires s > 0".into()));
    }
    let breakpoints = kernel_breakpoints(config, e, j)?;
    let Some(max_b) = breakpoints.last() else {
        return Ok(Rational::zero());
    };
    if s > max_b {
        // The kernel vanishes identically beyond its support.
        return Ok(Rational::zero());
    }
    let left = breakpoints.iter().rev().find(|b| *b < s);
    let h0 = match left {
        Some(b) => s - b,
        None => s.clone(),
    };
    let coeffs = piece_on_left_window(config, e, j, s, h0)?;
    Ok(poly_derivative_eval(&coeffs, s))
}

/// Piecewise-exact integral of the kernel over an interval union: each
/// polynomial piece between exact breakpoints is reconstructed by
/// interpolation and integrated in closed form.
pub fn kernel_integral(
    config: &Configuration,
    e: &MeasureVector,
    j: usize,
    set: &IntervalUnion,
) -> Result<Rational> {
    let breakpoints = kernel_breakpoints(config, e, j)?;
    if breakpoints.len() < 2 {
        return Ok(Rational::zero());
    }
    let support_lo = &breakpoints[0];
    let support_hi = &breakpoints[breakpoints.len() - 1];
    let m = config.dim();
    let mut total = Rational::zero();
    for comp in set.components() {
        let lo = if &comp.lo > support_lo {
            comp.lo.clone()
        } else {
            support_lo.clone()
        };
        let hi = if &comp.hi < support_hi {
            comp.hi.clone()
        } else {
            support_hi.clone()
        };
        if lo >= hi {
            continue;
        }
        // Cut [lo, hi] at interior breakpoints.
        let mut cuts = vec![lo.clone()];
        for b in &breakpoints {
            if *b > lo && *b < hi {
                cuts.push(b.clone());
            }
        }
        cuts.push(hi.clone());
        for w in cuts.windows(2) {
            let (u, v) = (&w[0], &w[1]);
            // m + 1 interior samples pin the degree <= m-1 piece exactly.
            let denom = Rational::from_integer(((m + 2) as u64).into());
            let step = (v - u) / &denom;
            let mut samples = Vec::with_capacity(m + 1);
            for k in 1..=m + 1 {
                let x = u + &step * Rational::from_integer((k as u64).into());
                let y = kernel(config, e, j, &x)?;
                samples.push((x, y));
            }
            let coeffs = interpolate(&samples);
            total += poly_integral(&coeffs, u, v);
        }
    }
    Ok(total)
}

/// A sampled kernel with its exact polynomial pieces.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub slot: usize,
    /// `(s, K_j(s))` samples, symmetric about 0.
    pub samples: Vec<(Rational, Rational)>,
    /// `(coefficients low-to-high, piece interval)` between breakpoints.
    pub pieces: Vec<(Vec<Rational>, Interval)>,
}

impl KernelTable {
    /// CSV with columns: s, the kernel value as a decimal, and the kernel
    /// value as an exact rational string.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .samples
            .iter()
            .map(|(s, v)| {
                vec![
                    format_rational(s),
                    crate::rational::format_decimal(v),
                    format_rational(v),
                ]
            })
            .collect();
        crate::report::csv_document(&["s", "k_decimal", "k_exact"], &rows)
    }
}

/// Samples the kernel on a symmetric uniform grid over its support and
/// reconstructs the polynomial pieces.
pub fn kernel_table(
    config: &Configuration,
    e: &MeasureVector,
    j: usize,
    grid: usize,
) -> Result<KernelTable> {
    if grid < 2 {
        return Err(Error::BadParameter(
            "kernel table needs a grid of >= 2".into(),
        ));
    }
    let breakpoints = kernel_breakpoints(config, e, j)?;
    let hi = breakpoints.last().cloned().unwrap_or_else(Rational::zero);
    let lo = -hi.clone();
    let mut samples = Vec::with_capacity(grid + 1);
    let n = Rational::from_integer((grid as u64).into());
    for k in 0..=grid {
        let frac = Rational::from_integer((k as u64).into()) / &n;
        let s = &lo + (&hi - &lo) * frac;
        let v = kernel(config, e, j, &s)?;
        samples.push((s, v));
    }
    // Evenness on the symmetric grid and monotonicity on s >= 0.
    for k in 0..samples.len() / 2 {
        debug_assert_eq!(samples[k].1, samples[samples.len() - 1 - k].1);
    }
    for w in samples[samples.len() / 2..].windows(2) {
        debug_assert!(w[0].1 >= w[1].1);
    }
    let m = config.dim();
    let mut pieces = Vec::new();
    for w in breakpoints.windows(2) {
        let (u, v) = (&w[0], &w[1]);
        let denom = Rational::from_integer(((m + 2) as u64).into());
        let step = (v - u) / &denom;
        let mut pts = Vec::with_capacity(m + 1);
        for k in 1..=m + 1 {
            let x = u + &step * Rational::from_integer((k as u64).into());
            let y = kernel(config, e, j, &x)?;
            pts.push((x, y));
        }
        pieces.push((interpolate(&pts), Interval::new(u.clone(), v.clone())));
    }
    Ok(KernelTable {
        slot: j,
        samples,
        pieces,
    })
}

/// The bilinear kernel: normalized codimension-2 slice of the body with
/// slots i and j removed, pinned at `L_i = s` and `L_j = t`.
pub fn kernel_pair(
    config: &Configuration,
    e: &MeasureVector,
    i: usize,
    j: usize,
    s: &Rational,
    t: &Rational,
) -> Result<Rational> {
    if i == j {
        return Err(Error::EqualSlots);
    }
    require_slot(config, i)?;
    require_slot(config, j)?;
    require_nondegenerate(config)?;
    let body = reduced_body(config, e, &[i, j]);
    body.double_slice_volume(config.row(i), config.row(j), s, t)
}

/// First-order expansion term for slot j, computed as the exact difference
/// `phi(slot j = E_j, others centered) - phi(all centered)`.
pub fn first_order_term(
    config: &Configuration,
    e: &MeasureVector,
    tuple: &SetTuple,
    j: usize,
) -> Result<Rational> {
    require_slot(config, j)?;
    let got = tuple.slot(j).measure();
    if got != *e.get(j) {
        return Err(Error::MeasureMismatch {
            slot: j,
            got: format_rational(&got),
            want: format_rational(e.get(j)),
        });
    }
    let star = SetTuple::star_of(e);
    let perturbed = star.with_slot(j, tuple.slot(j).clone());
    Ok(phi(config, &perturbed)? - phi(config, &star)?)
}

/// Second-order expansion term for slots i < j: the exact four-term
/// inclusion-exclusion of form values.
pub fn second_order_term(
    config: &Configuration,
    e: &MeasureVector,
    tuple: &SetTuple,
    i: usize,
    j: usize,
) -> Result<Rational> {
    if i == j {
        return Err(Error::EqualSlots);
    }
    require_slot(config, i)?;
    require_slot(config, j)?;
    for k in [i, j] {
        let got = tuple.slot(k).measure();
        if got != *e.get(k) {
            return Err(Error::MeasureMismatch {
                slot: k,
                got: format_rational(&got),
                want: format_rational(e.get(k)),
            });
        }
    }
    let star = SetTuple::star_of(e);
    let both = star
        .with_slot(i, tuple.slot(i).clone())
        .with_slot(j, tuple.slot(j).clone());
    let only_i = star.with_slot(i, tuple.slot(i).clone());
    let only_j = star.with_slot(j, tuple.slot(j).clone());
    Ok(phi(config, &both)? - phi(config, &only_i)? - phi(config, &only_j)? + phi(config, &star)?)
}

/// The exact remainder of the second-order expansion:
/// `phi(E) - phi(E*) - sum_j first - sum_{i<j} second`.
pub fn expansion_residual(
    config: &Configuration,
    e: &MeasureVector,
    tuple: &SetTuple,
) -> Result<Rational> {
    tuple.check_measures(e)?;
    let star = SetTuple::star_of(e);
    let phi_star = phi(config, &star)?;
    let n = tuple.len();

    let mut singles = Vec::with_capacity(n);
    for j in 0..n {
        let t = star.with_slot(j, tuple.slot(j).clone());
        singles.push(phi(config, &t)?);
    }

    let mut residual = phi(config, tuple)? - &phi_star;
    for s in &singles {
        residual -= s - &phi_star;
    }
    for i in 0..n {
        for j in i + 1..n {
            let t = star
                .with_slot(i, tuple.slot(i).clone())
                .with_slot(j, tuple.slot(j).clone());
            let pair = phi(config, &t)?;
            residual -= pair - &singles[i] - &singles[j] + &phi_star;
        }
    }
    Ok(residual)
}

/// The shifted-interval functional: the volume of
/// `{x : L_j(x) in I_j + v_j}` with `I_j` centered of length `e_j`.
/// Evaluated through `phi` on the shifted single-interval tuple, which is
/// the same box volume.
pub fn psi(config: &Configuration, e: &MeasureVector, v: &[Rational]) -> Result<Rational> {
    if v.len() != config.slots() {
        return Err(Error::SlotCountMismatch {
            got: v.len(),
            want: config.slots(),
        });
    }
    require_nondegenerate(config)?;
    let star = SetTuple::star_of(e);
    let slots: Vec<IntervalUnion> = star
        .slots()
        .iter()
        .zip(v)
        .map(|(s, vj)| s.translate(vj))
        .collect();
    phi(config, &SetTuple { slots })
}

/// Does the shift vector `v` lie in the row space image `{(L_j(y))_j}`?
/// Exact consistency test of the linear system.
pub fn in_row_space(config: &Configuration, v: &[Rational]) -> bool {
    let rows = config.rows().to_vec();
    let mut augmented: Vec<Vector> = Vec::with_capacity(rows.len());
    for (row, vj) in rows.iter().zip(v) {
        let mut r = row.clone();
        r.push(vj.clone());
        augmented.push(r);
    }
    linalg::rank(&rows) == linalg::rank(&augmented)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{builtin_config, Preset};
    use crate::rational::{rat, ratio};

    fn riesz() -> (Configuration, MeasureVector) {
        builtin_config(&Preset::RieszSobolev).unwrap()
    }

    fn interval(lo: i64, hi: i64) -> IntervalUnion {
        IntervalUnion::of(rat(lo), rat(hi))
    }

    fn split_e1() -> IntervalUnion {
        IntervalUnion::new(vec![
            Interval::new(ratio(-3, 2), ratio(-1, 2)),
            Interval::new(ratio(1, 2), ratio(3, 2)),
        ])
    }

    #[test]
    fn phi_riesz_sobolev_centered_is_three() {
        let (config, _) = riesz();
        let tuple = SetTuple::new(vec![interval(-1, 1); 3]).unwrap();
        assert_eq!(phi(&config, &tuple).unwrap(), rat(3));
    }

    #[test]
    fn gowers_centered_value_matches_convolution_oracle() {
        // Substituting u = x, a = x+h1, b = x+h2 (unimodular) turns the
        // centered value into P(|a + b - u| <= 1/2) over the unit cube,
        // which is the middle mass of the triple uniform convolution: 2/3.
        let (config, e) = builtin_config(&Preset::Gowers { k: 2 }).unwrap();
        let star = SetTuple::star_of(&e);
        assert_eq!(phi(&config, &star).unwrap(), ratio(2, 3));
    }

    #[test]
    fn phi_with_split_first_slot_is_two() {
        // Oracle: integral of the triangle kernel max(0, 2-|s|) over the
        // split set equals 2.
        let (config, _) = riesz();
        let tuple = SetTuple::new(vec![split_e1(), interval(-1, 1), interval(-1, 1)]).unwrap();
        assert_eq!(phi(&config, &tuple).unwrap(), rat(2));
    }

    #[test]
    fn phi_translation_symmetry_example() {
        // v = (1, 1): slots shift by L_1(v)=1, L_2(v)=1, L_3(v)=-2.
        let (config, _) = riesz();
        let tuple = SetTuple::new(vec![
            interval(-1, 1).translate(&rat(1)),
            interval(-1, 1).translate(&rat(1)),
            interval(-1, 1).translate(&rat(-2)),
        ])
        .unwrap();
        assert_eq!(phi(&config, &tuple).unwrap(), rat(3));
    }

    #[test]
    fn phi_rejects_degenerate_configuration() {
        let config = Configuration::new(
            2,
            vec![
                vec![rat(1), rat(0)],
                vec![rat(2), rat(0)],
                vec![rat(0), rat(1)],
            ],
        )
        .unwrap();
        let tuple = SetTuple::new(vec![interval(-1, 1); 3]).unwrap();
        assert_eq!(phi(&config, &tuple), Err(Error::DegenerateConfiguration));
    }

    #[test]
    fn kernel_is_the_triangle() {
        let (config, e) = riesz();
        assert_eq!(kernel(&config, &e, 2, &rat(0)).unwrap(), rat(2));
        assert_eq!(kernel(&config, &e, 2, &rat(1)).unwrap(), rat(1));
        assert_eq!(kernel(&config, &e, 2, &rat(3)).unwrap(), rat(0));
        // Evenness on a few samples.
        for s in [ratio(1, 3), ratio(5, 4), rat(2)] {
            assert_eq!(
                kernel(&config, &e, 2, &s).unwrap(),
                kernel(&config, &e, 2, &(-s.clone())).unwrap()
            );
        }
    }

    #[test]
    fn kernel_ignores_own_slot_measure() {
        let (config, e) = riesz();
        let e_other = MeasureVector::new(vec![rat(2), rat(2), rat(100)]).unwrap();
        for s in [rat(0), ratio(1, 2), ratio(3, 2)] {
            assert_eq!(
                kernel(&config, &e, 2, &s).unwrap(),
                kernel(&config, &e_other, 2, &s).unwrap()
            );
        }
    }

    #[test]
    fn kernel_breakpoints_of_triangle() {
        let (config, e) = riesz();
        assert_eq!(
            kernel_breakpoints(&config, &e, 2).unwrap(),
            vec![rat(-2), rat(0), rat(2)]
        );
    }

    #[test]
    fn kernel_integral_defining_identity() {
        // Integral of K_3 over the centered interval of measure e_3
        // equals phi of the centered tuple.
        let (config, e) = riesz();
        let star = IntervalUnion::of(rat(-1), rat(1));
        assert_eq!(kernel_integral(&config, &e, 2, &star).unwrap(), rat(3));
        // And over the split set it matches the phi example.
        assert_eq!(
            kernel_integral(&config, &e, 0, &split_e1()).unwrap(),
            rat(2)
        );
    }

    #[test]
    fn left_derivative_of_triangle_kernel() {
        let (config, e) = riesz();
        assert_eq!(
            kernel_left_derivative(&config, &e, 2, &rat(1)).unwrap(),
            rat(-1)
        );
        // Beyond the support the kernel vanishes identically.
        assert_eq!(
            kernel_left_derivative(&config, &e, 2, &rat(5)).unwrap(),
            rat(0)
        );
    }

    #[test]
    fn left_derivative_on_flat_piece_is_zero() {
        // Body with a flat kernel: rows (1,0),(0,1),(1,1) with e large on
        // the diagonal slot; K_3(s) near s=1/2 is determined by the square
        // alone... use slot 0 of the square-ish body instead:
        // K_1(s) = length{x2 : |x2|<=1, |s+x2|<=5} = 2 for small s.
        let config = Configuration::new(
            2,
            vec![
                vec![rat(1), rat(0)],
                vec![rat(0), rat(1)],
                vec![rat(1), rat(1)],
            ],
        )
        .unwrap();
        let e = MeasureVector::new(vec![rat(2), rat(2), rat(10)]).unwrap();
        assert_eq!(
            kernel_left_derivative(&config, &e, 0, &ratio(1, 2)).unwrap(),
            rat(0)
        );
    }

    #[test]
    fn kernel_pair_examples() {
        let (config, e) = riesz();
        // Codimension-2 slice in R^2 is an indicator with Jacobian 1.
        assert_eq!(
            kernel_pair(&config, &e, 0, 1, &rat(0), &rat(0)).unwrap(),
            rat(1)
        );
        assert_eq!(
            kernel_pair(&config, &e, 0, 1, &rat(1), &rat(1)).unwrap(),
            rat(0)
        );
        assert_eq!(
            kernel_pair(&config, &e, 1, 1, &rat(0), &rat(0)),
            Err(Error::EqualSlots)
        );

        let (config, e) = builtin_config(&Preset::Gowers { k: 2 }).unwrap();
        // 1-D slice length, computed exactly: the reduced body is
        // {|x1+x3| <= 1/2, |x1+x2+x3| <= 1/2}; pinned at x1 = 0,
        // x1+x2 = 0 it is {|x3| <= 1/2} of length 1.
        assert_eq!(
            kernel_pair(&config, &e, 0, 1, &rat(0), &rat(0)).unwrap(),
            rat(1)
        );
    }

    #[test]
    fn first_order_term_examples() {
        let (config, e) = riesz();
        let star = SetTuple::star_of(&e);
        assert_eq!(first_order_term(&config, &e, &star, 0).unwrap(), rat(0));

        let tuple = star.with_slot(0, split_e1());
        assert_eq!(first_order_term(&config, &e, &tuple, 0).unwrap(), rat(-1));

        // Measure mismatch is rejected.
        let bad = star.with_slot(0, interval(-2, 2));
        assert!(matches!(
            first_order_term(&config, &e, &bad, 0),
            Err(Error::MeasureMismatch { slot: 0, .. })
        ));
    }

    #[test]
    fn second_order_term_examples() {
        let (config, e) = riesz();
        let star = SetTuple::star_of(&e);
        let tuple = star.with_slot(0, split_e1());
        // E_i = E_i* makes the term vanish.
        assert_eq!(
            second_order_term(&config, &e, &tuple, 0, 1).unwrap(),
            rat(0)
        );
        // Symmetry under swapping the slot pair.
        let both = tuple.with_slot(1, split_e1());
        assert_eq!(
            second_order_term(&config, &e, &both, 0, 1).unwrap(),
            second_order_term(&config, &e, &both, 1, 0).unwrap()
        );
    }

    #[test]
    fn expansion_residual_trivial_cases() {
        let (config, e) = riesz();
        let star = SetTuple::star_of(&e);
        assert_eq!(expansion_residual(&config, &e, &star).unwrap(), rat(0));

        // Orbit tuple: phi is unchanged, and the residual equals the exact
        // difference of the expansion terms.
        let v = vec![ratio(1, 3), ratio(-1, 5)];
        let orbit = star.translate_orbit(&config, &v);
        assert_eq!(phi(&config, &orbit).unwrap(), phi(&config, &star).unwrap());
        let mut terms = Rational::zero();
        for j in 0..3 {
            terms += first_order_term(&config, &e, &orbit, j).unwrap();
        }
        for i in 0..3 {
            for j in i + 1..3 {
                terms += second_order_term(&config, &e, &orbit, i, j).unwrap();
            }
        }
        assert_eq!(expansion_residual(&config, &e, &orbit).unwrap(), -terms);
    }

    #[test]
    fn psi_clipping_oracle() {
        // psi(0,0,w) = 3 - w^2 for |w| <= 1: square minus two corner
        // triangles of areas (1±w)^2 / 2.
        let (config, e) = riesz();
        for w in [ratio(1, 10), ratio(1, 5), ratio(1, 2), rat(1)] {
            let got = psi(&config, &e, &[rat(0), rat(0), w.clone()]).unwrap();
            assert_eq!(got, rat(3) - &w * &w);
        }
    }

    #[test]
    fn psi_row_space_shift_is_exact_identity() {
        let (config, e) = riesz();
        let y = vec![ratio(2, 7), ratio(-1, 3)];
        let v: Vec<Rational> = (0..3).map(|j| linalg::dot(config.row(j), &y)).collect();
        assert!(in_row_space(&config, &v));
        assert_eq!(
            psi(&config, &e, &v).unwrap(),
            psi(&config, &e, &[rat(0), rat(0), rat(0)]).unwrap()
        );
    }

    #[test]
    fn psi_never_exceeds_centered_value() {
        let (config, e) = riesz();
        let psi0 = psi(&config, &e, &[rat(0), rat(0), rat(0)]).unwrap();
        let mut rng = crate::rng::Rng::new(11);
        for _ in 0..25 {
            let v: Vec<Rational> = (0..3).map(|_| rng.rational_in(-2, 2, 8)).collect();
            let val = psi(&config, &e, &v).unwrap();
            assert!(val <= psi0);
            assert_eq!(val, psi(&config, &e, &linalg::neg(&v)).unwrap());
        }
    }

    #[test]
    fn row_space_membership_is_exact() {
        let (config, _) = riesz();
        assert!(in_row_space(&config, &[rat(1), rat(1), rat(-2)]));
        assert!(!in_row_space(&config, &[rat(0), rat(0), rat(1)]));
    }

    #[test]
    fn kernel_shifted_matches_centered_when_unshifted() {
        let (config, e) = riesz();
        let boxes = vec![
            Interval::new(rat(-1), rat(1)),
            Interval::new(rat(-1), rat(1)),
            Interval::new(rat(-1), rat(1)),
        ];
        for s in [rat(0), ratio(1, 2), ratio(3, 2)] {
            assert_eq!(
                kernel_shifted(&config, &boxes, 2, &s).unwrap(),
                kernel(&config, &e, 2, &s).unwrap()
            );
        }
    }

    #[test]
    fn interpolation_recovers_polynomials() {
        // p(x) = x^2 - 3x + 1/2 through three points.
        let pts = vec![
            (rat(0), ratio(1, 2)),
            (rat(1), ratio(-3, 2)),
            (rat(2), ratio(-3, 2)),
        ];
        let coeffs = interpolate(&pts);
        assert_eq!(coeffs, vec![ratio(1, 2), rat(-3), rat(1)]);
        assert_eq!(poly_derivative_eval(&coeffs, &rat(2)), rat(1));
        assert_eq!(poly_integral(&coeffs, &rat(0), &rat(1)), ratio(-2, 3));
    }
}

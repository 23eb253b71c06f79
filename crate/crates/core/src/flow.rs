//! The measure-preserving symmetrization flow on interval unions, realized
//! as proportional center contraction with merge-on-contact.
//!
//! Between merge events every component keeps its half-length while its
//! center obeys `c(t) = c(t0) (1-t)/(1-t0)`; components centered at 0 stay
//! put. When two components touch they merge into their union and the flow
//! continues from the merged state. Merge times are exact rational roots of
//! equations linear in `(1-t)`, so the whole trajectory is event-driven and
//! exact. By construction the flow fixes measure, starts at the given set,
//! and ends at its symmetrization.

use num_traits::{One, Zero};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::functional::{phi, SetTuple};
use crate::interval::{Interval, IntervalUnion};
use crate::rational::{format_rational, Rational};

/// One merge event along the flow of a single interval union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEvent {
    /// Event time in (0, 1).
    pub time: Rational,
    /// Indices (into the pre-event component list) that merged.
    pub merged: Vec<usize>,
    /// The state immediately after the merge.
    pub after: IntervalUnion,
}

#[derive(Debug, Clone)]
struct Component {
    center: Rational,
    half: Rational,
}

fn components_of(set: &IntervalUnion) -> Vec<Component> {
    set.components()
        .iter()
        .map(|it| Component {
            center: it.center(),
            half: it.length() / Rational::from_integer(2.into()),
        })
        .collect()
}

fn assemble(comps: &[Component]) -> IntervalUnion {
    IntervalUnion::new(
        comps
            .iter()
            .map(|c| Interval::new(&c.center - &c.half, &c.center + &c.half))
            .collect(),
    )
}

/// Earliest merge time strictly after `t0`, if any: adjacent centers close
/// proportionally, so the pair (i, i+1) touches when
/// `(c_{i+1} - c_i)(1-t)/(1-t0) = r_i + r_{i+1}`.
fn next_merge_time(comps: &[Component], t0: &Rational) -> Option<Rational> {
    let one = Rational::one();
    let mut best: Option<Rational> = None;
    for w in comps.windows(2) {
        let gap_centers = &w[1].center - &w[0].center;
        let radii = &w[0].half + &w[1].half;
        debug_assert!(gap_centers > radii, "components must have positive gaps");
        let t = &one - radii * (&one - t0) / gap_centers;
        if best.as_ref().is_none_or(|b| t < *b) {
            best = Some(t);
        }
    }
    best
}

fn advance(comps: &[Component], t0: &Rational, t: &Rational) -> Vec<Component> {
    let one = Rational::one();
    let factor = (&one - t) / (&one - t0);
    comps
        .iter()
        .map(|c| Component {
            center: &c.center * &factor,
            half: c.half.clone(),
        })
        .collect()
}

/// Merges runs of touching components (gap exactly zero) after an event.
fn merge_touching(comps: Vec<Component>) -> (Vec<Component>, Vec<usize>) {
    let mut merged_indices = Vec::new();
    let mut out: Vec<Component> = Vec::new();
    let mut i = 0usize;
    while i < comps.len() {
        let lo = &comps[i].center - &comps[i].half;
        let mut hi = &comps[i].center + &comps[i].half;
        let mut j = i;
        while j + 1 < comps.len() && (&comps[j + 1].center - &comps[j + 1].half) == hi {
            hi = &comps[j + 1].center + &comps[j + 1].half;
            j += 1;
        }
        if j > i {
            merged_indices.extend(i..=j);
        }
        let two = Rational::from_integer(2.into());
        out.push(Component {
            center: (&lo + &hi) / &two,
            half: (&hi - &lo) / &two,
        });
        i = j + 1;
    }
    (out, merged_indices)
}

fn check_time(t: &Rational) -> Result<()> {
    if t < &Rational::zero() || t > &Rational::one() {
        return Err(Error::TimeOutOfRange(format_rational(t)));
    }
    Ok(())
}

/// The flow state `E(t)` for `t` in [0, 1]; `E(0) = E` and
/// `E(1) = symmetrize(E)` exactly.
pub fn flow_state(set: &IntervalUnion, t: &Rational) -> Result<IntervalUnion> {
    check_time(t)?;
    if set.measure().is_zero() {
        return Err(Error::DegenerateSet);
    }
    let mut comps = components_of(set);
    let mut t0 = Rational::zero();
    loop {
        match next_merge_time(&comps, &t0) {
            Some(tm) if tm < *t => {
                comps = advance(&comps, &t0, &tm);
                let (merged, _) = merge_touching(comps);
                comps = merged;
                t0 = tm;
            }
            _ => {
                comps = advance(&comps, &t0, t);
                return Ok(assemble(&comps));
            }
        }
    }
}

/// All merge events of the flow, in time order.
pub fn flow_events(set: &IntervalUnion) -> Result<Vec<FlowEvent>> {
    if set.measure().is_zero() {
        return Err(Error::DegenerateSet);
    }
    let mut comps = components_of(set);
    let mut t0 = Rational::zero();
    let mut events = Vec::new();
    while let Some(tm) = next_merge_time(&comps, &t0) {
        comps = advance(&comps, &t0, &tm);
        let (merged, indices) = merge_touching(comps);
        comps = merged;
        events.push(FlowEvent {
            time: tm.clone(),
            merged: indices,
            after: assemble(&comps),
        });
        t0 = tm;
    }
    Ok(events)
}

/// One row of a flow trace.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub t: Rational,
    pub phi: Rational,
    /// True when `t` is a merge event of some slot.
    pub is_event: bool,
}

/// CSV with columns: t, the form value as decimal and as exact rational,
/// and the merge-event flag.
pub fn trace_to_csv(trace: &[TracePoint]) -> String {
    let rows: Vec<Vec<String>> = trace
        .iter()
        .map(|p| {
            vec![
                format_rational(&p.t),
                crate::rational::format_decimal(&p.phi),
                format_rational(&p.phi),
                if p.is_event {
                    "event".to_string()
                } else {
                    String::new()
                },
            ]
        })
        .collect();
    crate::report::csv_document(&["t", "phi_decimal", "phi_exact", "event"], &rows)
}

/// Exact form values along the tuple flow (all slots share the time
/// parameter). The output grid is the input grid refined with every merge
/// event of every slot inside the grid's span.
pub fn flow_trace(
    config: &Configuration,
    tuple: &SetTuple,
    grid: &[Rational],
) -> Result<Vec<TracePoint>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    for w in grid.windows(2) {
        if w[0] > w[1] {
            return Err(Error::BadParameter("grid must be sorted".into()));
        }
    }
    for t in grid {
        check_time(t)?;
    }
    let lo = &grid[0];
    let hi = &grid[grid.len() - 1];

    let mut event_times: Vec<Rational> = Vec::new();
    for slot in tuple.slots() {
        for ev in flow_events(slot)? {
            if ev.time >= *lo && ev.time <= *hi {
                event_times.push(ev.time);
            }
        }
    }
    let mut times: Vec<Rational> = grid.to_vec();
    times.extend(event_times.iter().cloned());
    times.sort();
    times.dedup();

    let mut out = Vec::with_capacity(times.len());
    for t in times {
        let slots: Vec<IntervalUnion> = tuple
            .slots()
            .iter()
            .map(|s| flow_state(s, &t))
            .collect::<Result<_>>()?;
        let flowed = SetTuple::new(slots)?;
        let value = phi(config, &flowed)?;
        let is_event = event_times.contains(&t);
        out.push(TracePoint {
            t,
            phi: value,
            is_event,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{builtin_config, Preset};
    use crate::rational::{rat, ratio};

    fn split() -> IntervalUnion {
        IntervalUnion::new(vec![
            Interval::new(ratio(-3, 2), ratio(-1, 2)),
            Interval::new(ratio(1, 2), ratio(3, 2)),
        ])
    }

    #[test]
    fn state_at_quarter() {
        // Centers ±1 shrink to ±3/4.
        let got = flow_state(&split(), &ratio(1, 4)).unwrap();
        let expect = IntervalUnion::new(vec![
            Interval::new(ratio(-5, 4), ratio(-1, 4)),
            Interval::new(ratio(1, 4), ratio(5, 4)),
        ]);
        assert_eq!(got, expect);
    }

    #[test]
    fn merge_exactly_at_one_half() {
        let got = flow_state(&split(), &ratio(1, 2)).unwrap();
        assert_eq!(got, IntervalUnion::of(rat(-1), rat(1)));
        let events = flow_events(&split()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].time, ratio(1, 2));
        assert_eq!(events[0].merged, vec![0, 1]);
        assert_eq!(events[0].after, IntervalUnion::of(rat(-1), rat(1)));
    }

    #[test]
    fn endpoint_states() {
        let e = IntervalUnion::new(vec![
            Interval::new(rat(1), rat(2)),
            Interval::new(rat(5), rat(6)),
            Interval::new(rat(10), rat(11)),
        ]);
        assert_eq!(flow_state(&e, &rat(0)).unwrap(), e);
        assert_eq!(flow_state(&e, &rat(1)).unwrap(), e.symmetrize().unwrap());
    }

    #[test]
    fn measure_preserved_along_the_flow() {
        let e = IntervalUnion::new(vec![
            Interval::new(rat(-7), rat(-5)),
            Interval::new(rat(-1), rat(0)),
            Interval::new(rat(3), rat(4)),
        ]);
        let mu = e.measure();
        for k in 0..=16 {
            let t = ratio(k, 16);
            assert_eq!(flow_state(&e, &t).unwrap().measure(), mu);
        }
    }

    #[test]
    fn zero_centered_component_is_fixed() {
        let e = IntervalUnion::new(vec![
            Interval::new(rat(-1), rat(1)),
            Interval::new(rat(4), rat(5)),
        ]);
        let state = flow_state(&e, &ratio(1, 4)).unwrap();
        assert_eq!(state.components()[0], Interval::new(rat(-1), rat(1)));
    }

    #[test]
    fn markov_property_with_reparameterization() {
        // flow(flow(E, s), (t-s)/(1-s)) = flow(E, t).
        let e = IntervalUnion::new(vec![
            Interval::new(rat(-9), rat(-8)),
            Interval::new(rat(-3), rat(-2)),
            Interval::new(rat(1), rat(4)),
            Interval::new(rat(7), rat(8)),
        ]);
        for (sn, tn) in [(1, 3), (1, 2), (3, 7), (5, 8)] {
            let s = ratio(sn, 8);
            let t = ratio(tn, 8);
            let direct = flow_state(&e, &t).unwrap();
            let mid = flow_state(&e, &s).unwrap();
            let reparam = (&t - &s) / (rat(1) - &s);
            let staged = flow_state(&mid, &reparam).unwrap();
            assert_eq!(staged, direct);
        }
    }

    #[test]
    fn out_of_range_times_and_empty_sets_error() {
        assert!(flow_state(&split(), &rat(2)).is_err());
        assert!(flow_state(&split(), &rat(-1)).is_err());
        assert!(flow_state(&IntervalUnion::empty(), &rat(0)).is_err());
    }

    #[test]
    fn trace_on_split_tuple_is_nondecreasing_to_three() {
        let (config, _) = builtin_config(&Preset::RieszSobolev).unwrap();
        let star = IntervalUnion::of(rat(-1), rat(1));
        let tuple = SetTuple::new(vec![split(), star.clone(), star]).unwrap();
        let grid: Vec<Rational> = (0..=8).map(|k| ratio(k, 8)).collect();
        let trace = flow_trace(&config, &tuple, &grid).unwrap();
        assert_eq!(trace.first().unwrap().phi, rat(2));
        assert_eq!(trace.last().unwrap().phi, rat(3));
        // Closed form on this family: phi(t) = 2 + 2t until the merge at
        // t = 1/2, then constant 3.
        for p in &trace {
            let expect = if p.t <= ratio(1, 2) {
                rat(2) + rat(2) * &p.t
            } else {
                rat(3)
            };
            assert_eq!(p.phi, expect, "at t = {}", p.t);
        }
        for w in trace.windows(2) {
            assert!(w[0].phi <= w[1].phi, "monotonicity failed");
        }
        // The merge event at t = 1/2 is on the refined grid (it is also a
        // grid point here); check the event flag.
        let ev = trace.iter().find(|p| p.t == ratio(1, 2)).unwrap();
        assert!(ev.is_event);
    }

    #[test]
    fn trace_on_star_tuple_is_constant() {
        let (config, e) = builtin_config(&Preset::RieszSobolev).unwrap();
        let star = SetTuple::star_of(&e);
        let grid: Vec<Rational> = (0..=4).map(|k| ratio(k, 4)).collect();
        let trace = flow_trace(&config, &star, &grid).unwrap();
        for p in &trace {
            assert_eq!(p.phi, rat(3));
        }
    }

    #[test]
    fn singleton_grid() {
        let (config, _) = builtin_config(&Preset::RieszSobolev).unwrap();
        let star = IntervalUnion::of(rat(-1), rat(1));
        let tuple = SetTuple::new(vec![split(), star.clone(), star]).unwrap();
        let trace = flow_trace(&config, &tuple, &[rat(0)]).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].t, rat(0));
        assert_eq!(trace[0].phi, rat(2));
    }

    #[test]
    fn event_times_increase_and_preserve_measure() {
        let e = IntervalUnion::new(vec![
            Interval::new(rat(-9), rat(-8)),
            Interval::new(rat(-4), rat(-2)),
            Interval::new(rat(1), rat(2)),
            Interval::new(rat(6), rat(7)),
        ]);
        let events = flow_events(&e).unwrap();
        assert!(!events.is_empty());
        let mu = e.measure();
        let mut last = rat(0);
        for ev in &events {
            assert!(ev.time > last && ev.time < rat(1));
            assert_eq!(ev.after.measure(), mu);
            assert!(!ev.merged.is_empty());
            last = ev.time.clone();
        }
    }

    #[test]
    fn simultaneous_merges() {
        // Symmetric triple: the two outer components hit the inner one at
        // the same time.
        let e = IntervalUnion::new(vec![
            Interval::new(rat(-4), rat(-2)),
            Interval::new(rat(-1), rat(1)),
            Interval::new(rat(2), rat(4)),
        ]);
        let events = flow_events(&e).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].merged, vec![0, 1, 2]);
        assert_eq!(flow_state(&e, &rat(1)).unwrap(), e.symmetrize().unwrap());
    }
}

//! Exhaustive reference computations for small windows.
//!
//! These enumerate paths directly and share no code with the dynamic
//! program or the shortest-path search they are used to cross-check.

use fpplab_core::lattice::{Axis, Orientation, PassageField, Site};
use fpplab_core::oriented::ESCAPES;

const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn step_weight(field: &PassageField, a: Site, b: Site) -> f64 {
    let (dx, dt) = (b.x - a.x, b.t - a.t);
    match (dx, dt) {
        (1, 0) => field.weight(a, Axis::Right).unwrap(),
        (-1, 0) => field.weight(b, Axis::Right).unwrap(),
        (0, 1) => field.weight(a, Axis::Up).unwrap(),
        (0, -1) => field.weight(b, Axis::Up).unwrap(),
        _ => panic!("not neighbours"),
    }
}

/// Minimum passage time over all self-avoiding 4-neighbour paths, found by
/// branch-and-bound depth-first search. Windows must have at most 64 sites.
pub fn passage_by_enumeration(field: &PassageField, from: Site, to: Site) -> f64 {
    let w = field.window();
    assert!(w.len() <= 64, "enumeration oracle is for tiny windows");
    fn dfs(field: &PassageField, cur: Site, to: Site, visited: u64, time: f64, best: &mut f64) {
        if time >= *best {
            return;
        }
        if cur == to {
            *best = time;
            return;
        }
        let w = field.window();
        for (dx, dt) in DIRECTIONS {
            let nbr = cur.offset(dx, dt);
            if !w.contains(nbr) {
                continue;
            }
            let bit = 1u64 << w.index(nbr);
            if visited & bit != 0 {
                continue;
            }
            dfs(field, nbr, to, visited | bit, time + step_weight(field, cur, nbr), best);
        }
    }
    let mut best = f64::INFINITY;
    dfs(field, from, to, 1u64 << w.index(from), 0.0, &mut best);
    best
}

/// Longest oriented open path from `site` by explicit path enumeration,
/// with the same window-escape sentinel convention as the level tables.
pub fn level_by_enumeration(field: &PassageField, orientation: Orientation, site: Site) -> u32 {
    let w = field.window();
    if w.far_distance(site, orientation) == 0 {
        return ESCAPES;
    }
    let mut best = 0u32;
    let mut stack = vec![(site, 0u32, 0u8)];
    while let Some((s, depth, tried)) = stack.pop() {
        if tried >= 2 {
            continue;
        }
        stack.push((s, depth, tried + 1));
        let axis = if tried == 0 { Axis::Right } else { Axis::Up };
        if field.step_open(s, orientation, axis) == Some(true) {
            let (dx, dt) = orientation.step(axis);
            let nxt = s.offset(dx, dt);
            if w.far_distance(nxt, orientation) == 0 {
                return ESCAPES;
            }
            best = best.max(depth + 1);
            stack.push((nxt, depth + 1, 0));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpplab_core::lattice::{ExcessDistribution, Window};

    #[test]
    fn enumeration_handles_trivial_cases() {
        let w = Window::square(0, 3).unwrap();
        let f = PassageField::sample(w, 1.0, ExcessDistribution::Atom { value: 2.0 }, 1).unwrap();
        assert_eq!(passage_by_enumeration(&f, Site::new(0, 0), Site::new(0, 0)), 0.0);
        assert_eq!(passage_by_enumeration(&f, Site::new(0, 0), Site::new(3, 3)), 6.0);
        assert_eq!(level_by_enumeration(&f, Orientation::Forward, Site::new(1, 1)), ESCAPES);
    }
}

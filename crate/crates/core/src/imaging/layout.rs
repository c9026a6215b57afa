use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;

use super::ImagingError;
use crate::smiles::{BondOrder, MolecularGraph};

pub type Point = [f64; 2];

pub const BOND_TOLERANCE: f64 = 0.15;
pub const MIN_SEPARATION: f64 = 0.5;
pub const MAX_REFINE_ITERATIONS: usize = 200;

const REPULSION_RADIUS: f64 = 0.8;
const CLEARANCE: f64 = 0.75;

/// 2D coordinates, in bond-length units, for the largest connected component
/// of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout2D {
    atoms: Vec<usize>,
    positions: Vec<Point>,
}

impl Layout2D {
    pub fn new(atoms: Vec<usize>, positions: Vec<Point>) -> Self {
        assert_eq!(atoms.len(), positions.len());
        Layout2D { atoms, positions }
    }

    /// Graph indices of the laid-out atoms, ascending.
    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position_of(&self, atom: usize) -> Option<Point> {
        self.atoms.binary_search(&atom).ok().map(|i| self.positions[i])
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.positions.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p[0]), b.min(p[1]), c.max(p[0]), d.max(p[1])),
        )
    }

    /// `(width, height)`.
    pub fn bounding_box(&self) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.bounds();
        (x1 - x0, y1 - y0)
    }

    /// Rotates every position by 90° counter-clockwise about the origin.
    pub fn rotated90(&self) -> Layout2D {
        Layout2D {
            atoms: self.atoms.clone(),
            positions: self.positions.iter().map(|p| [-p[1], p[0]]).collect(),
        }
    }

    pub fn min_separation(&self) -> f64 {
        min_separation(&self.positions)
    }

    /// Largest `|length - 1|` over bonds inside the layout.
    pub fn max_bond_deviation(&self, graph: &MolecularGraph) -> f64 {
        let local = |a| self.atoms.binary_search(&a).ok();
        graph
            .bonds()
            .iter()
            .filter_map(|b| Some((local(b.a)?, local(b.b)?)))
            .map(|(i, j)| (dist(self.positions[i], self.positions[j]) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn unit_at(angle: f64) -> Point {
    [angle.cos(), angle.sin()]
}

fn angle_of(a: Point) -> f64 {
    a[1].atan2(a[0])
}

fn centroid(points: &[Point]) -> Option<Point> {
    if points.is_empty() {
        return None;
    }
    let s = points.iter().fold([0.0, 0.0], |acc, &p| add(acc, p));
    Some(scale(s, 1.0 / points.len() as f64))
}

fn min_separation(points: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(dist(points[i], points[j]));
        }
    }
    best
}

/// Angle step of `k` unit chords on a circle whose endpoints are `d` apart.
fn chord_step(k: usize, d: f64) -> f64 {
    let kf = k as f64;
    let f = |phi: f64| (kf * phi / 2.0).sin() / (phi / 2.0).sin() - d;
    let (mut lo, mut hi) = (1e-9, 2.0 * PI / kf);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct RingSystem {
    atoms: Vec<usize>,
    rings: Vec<usize>,
}

fn ring_systems(graph: &MolecularGraph, members: &[bool]) -> Vec<RingSystem> {
    let rings: Vec<usize> = (0..graph.rings().len())
        .filter(|&r| graph.rings()[r].iter().all(|&a| members[a]))
        .collect();
    let mut parent: Vec<usize> = (0..rings.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for i in 0..rings.len() {
        for j in i + 1..rings.len() {
            let shares = graph.rings()[rings[i]]
                .iter()
                .any(|a| graph.rings()[rings[j]].contains(a));
            if shares {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut systems: Vec<RingSystem> = Vec::new();
    let mut root_to_system = vec![usize::MAX; rings.len()];
    for (i, ring) in rings.iter().enumerate() {
        let root = find(&mut parent, i);
        if root_to_system[root] == usize::MAX {
            root_to_system[root] = systems.len();
            systems.push(RingSystem {
                atoms: Vec::new(),
                rings: Vec::new(),
            });
        }
        systems[root_to_system[root]].rings.push(*ring);
    }
    for s in &mut systems {
        let set: BTreeSet<usize> = s.rings.iter().flat_map(|&r| graph.rings()[r].iter().copied()).collect();
        s.atoms = set.into_iter().collect();
    }
    systems
}

/// Places a ring system in its own frame: the largest ring as a regular
/// polygon, then each further ring's unplaced runs on unit-chord arcs bulging
/// away from what is already placed.
fn layout_system(graph: &MolecularGraph, system: &RingSystem) -> Vec<(usize, Point)> {
    let n = graph.atom_count();
    let mut pos: Vec<Option<Point>> = vec![None; n];
    let in_system: Vec<bool> = {
        let mut v = vec![false; n];
        for &a in &system.atoms {
            v[a] = true;
        }
        v
    };
    let rings = graph.rings();
    let first = *system
        .rings
        .iter()
        .max_by_key(|&&r| (rings[r].len(), std::cmp::Reverse(r)))
        .expect("ring system has rings");
    let size = rings[first].len();
    let radius = 0.5 / (PI / size as f64).sin();
    for (i, &a) in rings[first].iter().enumerate() {
        pos[a] = Some(scale(unit_at(2.0 * PI * i as f64 / size as f64), radius));
    }
    let mut done = vec![first];
    while done.len() < system.rings.len() {
        let next = system
            .rings
            .iter()
            .copied()
            .filter(|r| !done.contains(r))
            .max_by_key(|&r| {
                let placed = rings[r].iter().filter(|&&a| pos[a].is_some()).count();
                (placed, std::cmp::Reverse(r))
            })
            .unwrap();
        place_ring(graph, &rings[next], &in_system, &mut pos);
        done.push(next);
    }
    system.atoms.iter().map(|&a| (a, pos[a].unwrap())).collect()
}

fn place_ring(graph: &MolecularGraph, cycle: &[usize], in_system: &[bool], pos: &mut [Option<Point>]) {
    let len = cycle.len();
    let Some(anchor) = (0..len).find(|&i| pos[cycle[i]].is_some()) else {
        return;
    };
    // Walk the cycle from a placed atom, collecting runs of unplaced atoms.
    let mut runs: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let mut i = 1;
    while i <= len {
        let idx = (anchor + i) % len;
        if pos[cycle[idx]].is_none() {
            let before = cycle[(anchor + i - 1) % len];
            let mut run = Vec::new();
            while pos[cycle[(anchor + i) % len]].is_none() {
                run.push(cycle[(anchor + i) % len]);
                i += 1;
            }
            runs.push((before, run, cycle[(anchor + i) % len]));
        }
        i += 1;
    }
    for (a, run, b) in runs {
        let pa = pos[a].unwrap();
        let pb = pos[b].unwrap();
        let placed_system: Vec<Point> = pos
            .iter()
            .enumerate()
            .filter(|&(k, p)| in_system[k] && p.is_some())
            .map(|(_, p)| p.unwrap())
            .collect();
        let flank_neighbors: Vec<Point> = [a, b]
            .iter()
            .flat_map(|&x| graph.neighbors(x).iter().map(|&(nb, _)| nb))
            .filter(|&nb| nb != a && nb != b && in_system[nb])
            .filter_map(|nb| pos[nb])
            .collect();
        let k = run.len() + 1;
        let d = dist(pa, pb);
        let mid = scale(add(pa, pb), 0.5);
        let bulge = if d < 1e-9 {
            let away = centroid(&flank_neighbors).map(|c| sub(pa, c));
            match away {
                Some(v) if norm(v) > 1e-9 => scale(v, 1.0 / norm(v)),
                _ => [1.0, 0.0],
            }
        } else {
            let ab = sub(pb, pa);
            let normal = [-ab[1] / d, ab[0] / d];
            let side =
                |reference: Option<Point>| reference.map(|r| dot(sub(mid, r), normal)).filter(|s| s.abs() > 1e-6);
            match side(centroid(&flank_neighbors)).or_else(|| side(centroid(&placed_system))) {
                Some(s) if s < 0.0 => scale(normal, -1.0),
                _ => normal,
            }
        };
        if d >= k as f64 - 1e-9 {
            for (j, &atom) in run.iter().enumerate() {
                let t = (j + 1) as f64 / k as f64;
                pos[atom] = Some(add(pa, scale(sub(pb, pa), t)));
            }
            continue;
        }
        let phi = if d < 1e-9 {
            2.0 * PI / k as f64
        } else {
            chord_step(k, d)
        };
        let rho = 0.5 / (phi / 2.0).sin();
        let theta = k as f64 * phi;
        let center = sub(mid, scale(bulge, rho * (theta / 2.0).cos()));
        let alpha = angle_of(sub(pa, center));
        let apex = add(center, scale(bulge, rho));
        let sign = [1.0, -1.0]
            .into_iter()
            .min_by(|&s1: &f64, &s2: &f64| {
                let m = |s: f64| dist(add(center, scale(unit_at(alpha + s * theta / 2.0), rho)), apex);
                m(s1).total_cmp(&m(s2))
            })
            .unwrap();
        for (j, &atom) in run.iter().enumerate() {
            let ang = alpha + sign * (j + 1) as f64 * phi;
            pos[atom] = Some(add(center, scale(unit_at(ang), rho)));
        }
    }
}

fn is_linear(graph: &MolecularGraph, atom: usize) -> bool {
    let mut doubles = 0;
    for &(_, b) in graph.neighbors(atom) {
        match graph.bond(b).order {
            BondOrder::Triple => return true,
            BondOrder::Double => doubles += 1,
            _ => {}
        }
    }
    doubles >= 2
}

struct Placer<'a> {
    graph: &'a MolecularGraph,
    members: Vec<bool>,
    pos: Vec<Option<Point>>,
    system_of: Vec<Option<usize>>,
    systems: Vec<RingSystem>,
    turn: Vec<f64>,
    queue: VecDeque<usize>,
}

impl Placer<'_> {
    fn placed(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        self.pos.iter().enumerate().filter_map(|(i, p)| p.map(|p| (i, p)))
    }

    fn clearance(&self, p: Point, ignore: usize) -> f64 {
        self.placed()
            .filter(|&(i, _)| i != ignore)
            .map(|(_, q)| dist(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    fn place_system(&mut self, sys: usize, frame: impl Fn(Point) -> Point) {
        let local = layout_system(self.graph, &self.systems[sys]);
        for (a, p) in local {
            self.pos[a] = Some(frame(p));
        }
        for &a in &self.systems[sys].atoms {
            self.queue.push_back(a);
        }
    }

    /// Attaches an unplaced ring system through atom `v`, bonded to `u`.
    fn attach_system(&mut self, u: usize, v: usize, dir: f64) {
        let sys = self.system_of[v].unwrap();
        let local = layout_system(self.graph, &self.systems[sys]);
        let lookup = |a: usize| local.iter().find(|(x, _)| *x == a).map(|&(_, p)| p);
        let pv = lookup(v).unwrap();
        let ring_nbrs: Vec<Point> = self
            .graph
            .neighbors(v)
            .iter()
            .filter_map(|&(nb, _)| {
                if self.system_of[nb] == Some(sys) {
                    lookup(nb)
                } else {
                    None
                }
            })
            .collect();
        let all: Vec<Point> = local.iter().map(|&(_, p)| p).collect();
        let axis = [centroid(&ring_nbrs), centroid(&all)]
            .into_iter()
            .flatten()
            .map(|c| sub(c, pv))
            .find(|w| norm(*w) > 1e-9)
            .unwrap_or([1.0, 0.0]);
        let axis = scale(axis, 1.0 / norm(axis));
        let target = add(self.pos[u].unwrap(), unit_at(dir));
        let offsets: [f64; 11] = [0.0, 15.0, -15.0, 30.0, -30.0, 45.0, -45.0, 60.0, -60.0, 90.0, -90.0];
        let mut best: Option<(f64, bool, f64)> = None;
        for mirror in [false, true] {
            for &deg in &offsets {
                let rot = dir + deg.to_radians() - angle_of(axis);
                let frame = make_frame(pv, axis, mirror, rot, target);
                let mut score = 0.0;
                for &(a, p) in &local {
                    let q = frame(p);
                    for (other, r) in self.placed() {
                        if other == u && a == v {
                            continue;
                        }
                        let d = dist(q, r);
                        if d < 1.2 {
                            score += (1.2 - d) * (1.2 - d);
                        }
                    }
                }
                if best.is_none_or(|(s, _, _)| score < s - 1e-12) {
                    best = Some((score, mirror, rot));
                }
            }
        }
        let (_, mirror, rot) = best.unwrap();
        let frame = make_frame(pv, axis, mirror, rot, target);
        for (a, p) in local {
            self.pos[a] = Some(frame(p));
        }
        self.queue.push_back(v);
        for &a in &self.systems[sys].atoms {
            if a != v {
                self.queue.push_back(a);
            }
        }
    }

    fn expand(&mut self, u: usize) {
        let pu = self.pos[u].unwrap();
        let children: Vec<usize> = self
            .graph
            .neighbors(u)
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| self.members[v] && self.pos[v].is_none())
            .collect();
        if children.is_empty() {
            return;
        }
        let placed_nbrs: Vec<usize> = self
            .graph
            .neighbors(u)
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| self.pos[v].is_some())
            .collect();
        let mut dirs: Vec<f64> = Vec::with_capacity(children.len());
        if placed_nbrs.len() == 1 && children.len() == 1 {
            let p = placed_nbrs[0];
            let incoming = angle_of(sub(pu, self.pos[p].unwrap()));
            if is_linear(self.graph, u) {
                dirs.push(incoming);
            } else {
                let sign = if self.turn[p] > 0.0 { -1.0 } else { 1.0 };
                self.turn[u] = sign;
                dirs.push(incoming + sign * PI / 3.0);
            }
        } else {
            let mut angles: Vec<f64> = placed_nbrs
                .iter()
                .map(|&v| angle_of(sub(self.pos[v].unwrap(), pu)))
                .collect();
            angles.sort_by(f64::total_cmp);
            let k = children.len() as f64;
            if angles.is_empty() {
                for j in 0..children.len() {
                    dirs.push(2.0 * PI * j as f64 / k);
                }
            } else {
                let mut start = angles[0];
                let mut gap = 0.0;
                for i in 0..angles.len() {
                    let next = if i + 1 < angles.len() {
                        angles[i + 1]
                    } else {
                        angles[0] + 2.0 * PI
                    };
                    if next - angles[i] > gap + 1e-9 {
                        gap = next - angles[i];
                        start = angles[i];
                    }
                }
                for j in 0..children.len() {
                    dirs.push(start + gap * (j + 1) as f64 / (k + 1.0));
                }
            }
        }
        for (&v, &dir) in children.iter().zip(&dirs) {
            if self.pos[v].is_some() {
                continue;
            }
            if self.system_of[v].is_some() {
                self.attach_system(u, v, dir);
                continue;
            }
            let tweaks = [0.0, 30.0, -30.0, 60.0, -60.0, 90.0, -90.0, 120.0, -120.0];
            let mut chosen = add(pu, unit_at(dir));
            let mut best = -1.0;
            for deg in tweaks {
                let p = add(pu, unit_at(dir + f64::to_radians(deg)));
                let c = self.clearance(p, u);
                if c >= CLEARANCE {
                    chosen = p;
                    break;
                }
                if c > best + 1e-12 {
                    best = c;
                    chosen = p;
                }
            }
            self.pos[v] = Some(chosen);
            self.queue.push_back(v);
        }
    }
}

fn make_frame(pivot: Point, axis: Point, mirror: bool, rot: f64, target: Point) -> impl Fn(Point) -> Point {
    let (s, c) = rot.sin_cos();
    move |p: Point| {
        let mut q = sub(p, pivot);
        if mirror {
            q = sub(scale(axis, 2.0 * dot(q, axis)), q);
        }
        add(target, [c * q[0] - s * q[1], s * q[0] + c * q[1]])
    }
}

fn refine(graph: &MolecularGraph, atoms: &[usize], pos: &mut [Point]) {
    let local = |a: usize| atoms.binary_search(&a).ok();
    let bonds: Vec<(usize, usize)> = graph
        .bonds()
        .iter()
        .filter_map(|b| Some((local(b.a)?, local(b.b)?)))
        .collect();
    let n = pos.len();
    let mut bonded = vec![vec![false; n]; n];
    for &(i, j) in &bonds {
        bonded[i][j] = true;
        bonded[j][i] = true;
    }
    for _ in 0..MAX_REFINE_ITERATIONS {
        for i in 0..n {
            for j in i + 1..n {
                if bonded[i][j] {
                    continue;
                }
                let delta = sub(pos[j], pos[i]);
                let d = norm(delta);
                if d >= REPULSION_RADIUS {
                    continue;
                }
                let dir = if d > 1e-9 {
                    scale(delta, 1.0 / d)
                } else {
                    unit_at((i * 7 + j * 13) as f64)
                };
                let push = scale(dir, 0.5 * (REPULSION_RADIUS - d));
                pos[i] = sub(pos[i], push);
                pos[j] = add(pos[j], push);
            }
        }
        for &(i, j) in &bonds {
            let delta = sub(pos[j], pos[i]);
            let d = norm(delta).max(1e-9);
            let corr = scale(delta, 0.5 * (d - 1.0) / d);
            pos[i] = add(pos[i], corr);
            pos[j] = sub(pos[j], corr);
        }
        if quality(&bonds, pos).0 <= 0.05 && min_separation(pos) >= 0.6 {
            break;
        }
    }
}

fn quality(bonds: &[(usize, usize)], pos: &[Point]) -> (f64, f64) {
    let dev = bonds
        .iter()
        .map(|&(i, j)| (dist(pos[i], pos[j]) - 1.0).abs())
        .fold(0.0, f64::max);
    (dev, min_separation(pos))
}

/// Lays out the largest connected component (ties: the one with the lowest
/// atom index).
pub fn layout_2d(graph: &MolecularGraph) -> Result<Layout2D, ImagingError> {
    let n = graph.atom_count();
    if n == 0 {
        return Ok(Layout2D::new(Vec::new(), Vec::new()));
    }
    let component = graph.components().into_iter().rev().max_by_key(|c| c.len()).unwrap();
    let mut members = vec![false; n];
    for &a in &component {
        members[a] = true;
    }
    let systems = ring_systems(graph, &members);
    let mut system_of = vec![None; n];
    for (s, sys) in systems.iter().enumerate() {
        for &a in &sys.atoms {
            system_of[a] = Some(s);
        }
    }
    let mut placer = Placer {
        graph,
        members,
        pos: vec![None; n],
        system_of,
        systems,
        turn: vec![0.0; n],
        queue: VecDeque::new(),
    };
    let largest_system = (0..placer.systems.len())
        .rev()
        .max_by_key(|&s| placer.systems[s].atoms.len());
    match largest_system {
        Some(s) => placer.place_system(s, |p| p),
        None => {
            let start = *component.iter().min_by_key(|&&a| (graph.heavy_degree(a), a)).unwrap();
            placer.pos[start] = Some([0.0, 0.0]);
            placer.queue.push_back(start);
        }
    }
    while let Some(u) = placer.queue.pop_front() {
        placer.expand(u);
    }
    let mut positions: Vec<Point> = component.iter().map(|&a| placer.pos[a].unwrap()).collect();

    let local = |a: usize| component.binary_search(&a).ok();
    let bonds: Vec<(usize, usize)> = graph
        .bonds()
        .iter()
        .filter_map(|b| Some((local(b.a)?, local(b.b)?)))
        .collect();
    let (dev, sep) = quality(&bonds, &positions);
    if dev > 0.1 || sep < 0.6 {
        refine(graph, &component, &mut positions);
    }
    let (dev, sep) = quality(&bonds, &positions);
    if dev > BOND_TOLERANCE || sep < MIN_SEPARATION || positions.iter().any(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(ImagingError::LayoutFailure {
            max_bond_deviation: dev,
            min_separation: sep,
        });
    }
    Ok(Layout2D::new(component, positions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn lay(s: &str) -> (MolecularGraph, Layout2D) {
        let g = parse_smiles(s).unwrap();
        let l = layout_2d(&g).unwrap_or_else(|e| panic!("{s}: {e:?}"));
        (g, l)
    }

    #[test]
    fn single_atom() {
        let (_, l) = lay("C");
        assert_eq!(l.positions(), &[[0.0, 0.0]]);
        assert_eq!(l.bounding_box(), (0.0, 0.0));
    }

    #[test]
    fn ethane_unit_bond() {
        let (_, l) = lay("CC");
        assert!((dist(l.positions()[0], l.positions()[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn benzene_regular_hexagon() {
        let (g, l) = lay("c1ccccc1");
        for b in g.bonds() {
            let d = dist(l.position_of(b.a).unwrap(), l.position_of(b.b).unwrap());
            assert!((d - 1.0).abs() < 0.05, "{d}");
        }
        let c = centroid(l.positions()).unwrap();
        for &p in l.positions() {
            assert!((dist(p, c) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn chord_step_recovers_hexagon() {
        assert!((chord_step(5, 1.0) - PI / 3.0).abs() < 1e-9);
        assert!((chord_step(4, 1.0) - 2.0 * PI / 5.0).abs() < 1e-9);
    }

    #[test]
    fn fused_and_spiro_systems_keep_invariants() {
        for s in [
            "c1ccc2ccccc2c1",
            "c1ccc2cc3ccccc3cc2c1",
            "C1CCC2(CC1)CCCC2",
            "C1CC2CCC1CC2",
            "C1C2CC3CC1CC(C2)C3",
            "c1ccc2c(c1)ccc1ccccc12",
            "CC12CCC3C(CCC4CC(O)CCC34C)C1CCC2O",
            "O=C1CCCCCCCCCCC1",
            "c1ccc(cc1)-c1ccccc1",
            "CC(C)(C)c1ccc(cc1)C(C)(C)C",
            "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
            "C#CC#CC#C",
            "C=C=C",
        ] {
            let (g, l) = lay(s);
            assert_eq!(l.atoms().len(), g.atom_count(), "{s}");
            assert!(l.max_bond_deviation(&g) <= BOND_TOLERANCE, "{s}");
            assert!(l.min_separation() >= MIN_SEPARATION, "{s}");
        }
    }

    #[test]
    fn cage_either_fails_cleanly_or_holds() {
        let g = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        match layout_2d(&g) {
            Ok(l) => assert!(l.min_separation() >= MIN_SEPARATION),
            Err(e) => assert_eq!(e.kind(), "LayoutFailure"),
        }
    }

    #[test]
    fn largest_component_only() {
        let (_, l) = lay("CCCC(=O)[O-].[Na+]");
        assert_eq!(l.atoms(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn chain_zigzags() {
        let (_, l) = lay("CCCC");
        let p = l.positions();
        let a = dist(p[0], p[2]);
        assert!((a - 3f64.sqrt()).abs() < 1e-9);
        // trans zigzag: the ends are farther apart than in a cis arrangement
        assert!(dist(p[0], p[3]) > 2.5);
    }

    #[test]
    fn deterministic() {
        let s = "CC(=O)Nc1ccc(O)cc1";
        assert_eq!(lay(s).1, lay(s).1);
    }
}

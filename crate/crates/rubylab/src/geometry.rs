//! Ruby-lattice geometry: site layout, punctures, and string paths.
//!
//! The ruby lattice is built from the links of a kagome lattice (aspect ratio
//! rho = sqrt(3)): every kagome edge midpoint is an atom site, and the three
//! sites around a kagome triangle form a ruby triangle. Each unit cell holds
//! one up and one down triangle, six sites total. `spacing` is the
//! intra-triangle nearest-neighbor distance `a`; from any bulk site the next
//! shells sit at sqrt(3)a, 2a and sqrt(7)a.
//!
//! Strings are walks that cut through triangles. A Z-type string cuts each
//! triangle it crosses at two sites; its dual X-type string passes through
//! the remaining site of each triangle.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryY {
    Open,
    Periodic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub cells_x: usize,
    pub cells_y: usize,
    pub boundary_y: BoundaryY,
    /// Intra-triangle nearest-neighbor distance.
    pub spacing: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Site {
    pub index: usize,
    pub cell: [usize; 2],
    /// Position within the cell: 0..3 up triangle, 3..6 down triangle.
    pub slot: usize,
    pub pos: [f64; 2],
    pub triangle: usize,
    /// Multiplier on the uniform detuning (reduced on e-boundary sites).
    pub detuning_scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Up,
    Down,
}

#[derive(Clone, Debug, Serialize)]
pub struct Triangle {
    pub index: usize,
    pub cell: [usize; 2],
    pub orientation: Orientation,
    /// Site k is the midpoint of the kagome edge (corner k, corner k+1).
    pub sites: [usize; 3],
    pub corners: [[f64; 2]; 3],
}

impl Triangle {
    /// The two sites of the triangle other than `site`.
    pub fn others(&self, site: usize) -> [usize; 2] {
        let s = self.sites;
        if site == s[0] {
            [s[1], s[2]]
        } else if site == s[1] {
            [s[0], s[2]]
        } else if site == s[2] {
            [s[0], s[1]]
        } else {
            panic!("site {site} not in triangle {}", self.index);
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentSplit {
    /// Whole boundary condenses m (plain puncture, no detuning change).
    AllM,
    /// Whole boundary condenses e (detuning reduced everywhere on it).
    AllE,
    /// Upper half (by angle around the puncture) is e, lower half is m.
    HalfByAngle,
    /// Explicit site lists, indices of the lattice being punctured.
    Explicit { e_sites: Vec<usize>, m_sites: Vec<usize> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PunctureSpec {
    pub removed_cells: Vec<[usize; 2]>,
    pub split: SegmentSplit,
    /// Detuning multiplier applied on the e segment.
    pub e_detuning_scale: f64,
}

impl PunctureSpec {
    pub fn new(removed_cells: Vec<[usize; 2]>, split: SegmentSplit) -> Self {
        PunctureSpec { removed_cells, split, e_detuning_scale: 0.48 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PunctureRecord {
    pub removed_cells: Vec<[usize; 2]>,
    pub centroid: [f64; 2],
    /// Post-removal site indices.
    pub e_sites: Vec<usize>,
    pub m_sites: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StringKind {
    Z,
    XDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Open,
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    E,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub puncture: usize,
    pub segment: SegmentKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StringPath {
    pub kind: StringKind,
    pub topology: Topology,
    /// For Z strings: consecutive pairs share a triangle. For X-dual
    /// strings: one site per crossed triangle.
    pub sites: Vec<usize>,
    pub anchors: Option<(Anchor, Anchor)>,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("lattice spec invalid: {0}")]
    BadSpec(String),
    #[error("puncture cell [{0}, {1}] out of range or not interior")]
    BadPunctureCell(usize, usize),
    #[error("punctures overlap at cell [{0}, {1}]")]
    PunctureOverlap(usize, usize),
    #[error("explicit segment lists do not partition the puncture boundary")]
    BadSegments,
    #[error("loop paths require a periodic lattice")]
    NotPeriodic,
    #[error("column {0} out of range")]
    BadColumn(usize),
    #[error("path blocked by a puncture at cell [{0}, {1}]")]
    PathBlocked(usize, usize),
    #[error("could not route a non-degenerate path")]
    PathDegenerate,
    #[error("string cuts triangle {triangle} at {count} sites")]
    TriangleCut { triangle: usize, count: usize },
    #[error("path kind does not match anchor segment types")]
    SegmentMismatch,
    #[error("anchor references puncture {0} which does not exist")]
    BadAnchor(usize),
}

/// Slot offsets within a cell, in units of `spacing`.
const SLOT_POS: [[f64; 2]; 6] = [
    [1.0, 0.0],
    [1.5, 0.5 * SQRT3],
    [0.5, 0.5 * SQRT3],
    [3.0, 0.0],
    [2.5, -0.5 * SQRT3],
    [3.5, -0.5 * SQRT3],
];

/// Kagome corners of the up / down triangle of a cell, units of `spacing`.
const UP_CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [2.0, 0.0], [1.0, SQRT3]];
const DOWN_CORNERS: [[f64; 2]; 3] = [[4.0, 0.0], [2.0, 0.0], [3.0, -SQRT3]];

#[derive(Clone, Debug, Serialize)]
pub struct Lattice {
    pub spec: LatticeSpec,
    pub sites: Vec<Site>,
    pub triangles: Vec<Triangle>,
    pub punctures: Vec<PunctureRecord>,
    #[serde(skip)]
    slot_index: HashMap<(usize, usize, usize), usize>,
}

pub fn build_ruby_lattice(spec: &LatticeSpec) -> Result<Lattice, GeometryError> {
    if spec.cells_x == 0 || spec.cells_y == 0 {
        return Err(GeometryError::BadSpec("cell counts must be positive".into()));
    }
    if !(spec.spacing > 0.0) {
        return Err(GeometryError::BadSpec("spacing must be positive".into()));
    }
    if spec.boundary_y == BoundaryY::Periodic && spec.cells_y < 2 {
        return Err(GeometryError::BadSpec(
            "periodic lattices need cells_y >= 2".into(),
        ));
    }
    let s = spec.spacing;
    let a1 = [4.0 * s, 0.0];
    let a2 = [2.0 * s, 2.0 * SQRT3 * s];
    let mut sites = Vec::new();
    let mut triangles = Vec::new();
    let mut slot_index = HashMap::new();
    for iy in 0..spec.cells_y {
        for ix in 0..spec.cells_x {
            let ox = ix as f64 * a1[0] + iy as f64 * a2[0];
            let oy = ix as f64 * a1[1] + iy as f64 * a2[1];
            for (t, (orientation, corners)) in [
                (Orientation::Up, UP_CORNERS),
                (Orientation::Down, DOWN_CORNERS),
            ]
            .into_iter()
            .enumerate()
            {
                let tri_index = triangles.len();
                let mut tri_sites = [0usize; 3];
                for k in 0..3 {
                    let slot = 3 * t + k;
                    let index = sites.len();
                    tri_sites[k] = index;
                    slot_index.insert((ix, iy, slot), index);
                    sites.push(Site {
                        index,
                        cell: [ix, iy],
                        slot,
                        pos: [ox + s * SLOT_POS[slot][0], oy + s * SLOT_POS[slot][1]],
                        triangle: tri_index,
                        detuning_scale: 1.0,
                    });
                }
                triangles.push(Triangle {
                    index: tri_index,
                    cell: [ix, iy],
                    orientation,
                    sites: tri_sites,
                    corners: [
                        [ox + s * corners[0][0], oy + s * corners[0][1]],
                        [ox + s * corners[1][0], oy + s * corners[1][1]],
                        [ox + s * corners[2][0], oy + s * corners[2][1]],
                    ],
                });
            }
        }
    }
    Ok(Lattice { spec: spec.clone(), sites, triangles, punctures: Vec::new(), slot_index })
}

impl Lattice {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Period vector of the cylinder, if any.
    fn period(&self) -> Option<[f64; 2]> {
        match self.spec.boundary_y {
            BoundaryY::Open => None,
            BoundaryY::Periodic => {
                let s = self.spec.spacing;
                let cy = self.spec.cells_y as f64;
                Some([2.0 * s * cy, 2.0 * SQRT3 * s * cy])
            }
        }
    }

    /// Minimum-image displacement from site `i` to site `j`.
    pub fn displacement(&self, i: usize, j: usize) -> [f64; 2] {
        self.displacement_points(self.sites[i].pos, self.sites[j].pos)
    }

    pub fn displacement_points(&self, p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
        let raw = [q[0] - p[0], q[1] - p[1]];
        match self.period() {
            None => raw,
            Some(w) => {
                let mut best = raw;
                let mut best_n = raw[0] * raw[0] + raw[1] * raw[1];
                for k in [-1.0, 1.0] {
                    let d = [raw[0] + k * w[0], raw[1] + k * w[1]];
                    let n = d[0] * d[0] + d[1] * d[1];
                    if n < best_n {
                        best_n = n;
                        best = d;
                    }
                }
                best
            }
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let d = self.displacement(i, j);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    /// All unordered pairs with distance at most `radius` (inclusive, with a
    /// small tolerance), together with their distances.
    pub fn pairs_within(&self, radius: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        let r = radius * (1.0 + EPS);
        for i in 0..self.sites.len() {
            for j in (i + 1)..self.sites.len() {
                let d = self.distance(i, j);
                if d <= r {
                    out.push((i, j, d));
                }
            }
        }
        out
    }

    pub fn site_at(&self, cell: [usize; 2], slot: usize) -> Option<usize> {
        self.slot_index.get(&(cell[0], cell[1], slot)).copied()
    }

    pub fn triangle_of(&self, site: usize) -> &Triangle {
        &self.triangles[self.sites[site].triangle]
    }
}

pub fn apply_puncture(
    lattice: &Lattice,
    punctures: &[PunctureSpec],
) -> Result<Lattice, GeometryError> {
    let spec = &lattice.spec;
    let mut removed_by: HashMap<[usize; 2], usize> = HashMap::new();
    for (pi, p) in punctures.iter().enumerate() {
        if p.removed_cells.is_empty() {
            return Err(GeometryError::BadSpec("puncture removes no cells".into()));
        }
        for &[cx, cy] in &p.removed_cells {
            let x_ok = cx >= 1 && cx + 1 < spec.cells_x;
            let y_ok = match spec.boundary_y {
                BoundaryY::Open => cy >= 1 && cy + 1 < spec.cells_y,
                BoundaryY::Periodic => cy < spec.cells_y,
            };
            if !x_ok || !y_ok {
                return Err(GeometryError::BadPunctureCell(cx, cy));
            }
            if removed_by.insert([cx, cy], pi).is_some() {
                return Err(GeometryError::PunctureOverlap(cx, cy));
            }
        }
    }

    // Reindex the surviving sites and triangles.
    let keep_site: Vec<bool> = lattice
        .sites
        .iter()
        .map(|s| !removed_by.contains_key(&s.cell))
        .collect();
    let mut new_site_index = vec![usize::MAX; lattice.sites.len()];
    let mut new_tri_index = vec![usize::MAX; lattice.triangles.len()];
    let mut sites = Vec::new();
    let mut triangles = Vec::new();
    let mut slot_index = HashMap::new();
    for tri in &lattice.triangles {
        if removed_by.contains_key(&tri.cell) {
            continue;
        }
        new_tri_index[tri.index] = triangles.len();
        triangles.push(tri.clone());
    }
    for site in &lattice.sites {
        if !keep_site[site.index] {
            continue;
        }
        let index = sites.len();
        new_site_index[site.index] = index;
        slot_index.insert((site.cell[0], site.cell[1], site.slot), index);
        let mut s = site.clone();
        s.index = index;
        s.triangle = new_tri_index[site.triangle];
        sites.push(s);
    }
    for tri in triangles.iter_mut() {
        let old = tri.index;
        tri.index = new_tri_index[old];
        for k in 0..3 {
            tri.sites[k] = new_site_index[tri.sites[k]];
        }
    }

    let mut out = Lattice {
        spec: spec.clone(),
        sites,
        triangles,
        punctures: lattice
            .punctures
            .iter()
            .map(|p| PunctureRecord {
                removed_cells: p.removed_cells.clone(),
                centroid: p.centroid,
                e_sites: p.e_sites.iter().map(|&i| new_site_index[i]).collect(),
                m_sites: p.m_sites.iter().map(|&i| new_site_index[i]).collect(),
            })
            .collect(),
        slot_index,
    };

    // Boundary detection: a surviving site belongs to the boundary of the
    // puncture whose removed sites it sits closest to, within twice the
    // lattice spacing (this captures the sqrt(3)a and 2a shells).
    let cutoff = 2.0 * spec.spacing * (1.0 + EPS);
    let removed_pos: Vec<Vec<[f64; 2]>> = punctures
        .iter()
        .map(|p| {
            lattice
                .sites
                .iter()
                .filter(|s| p.removed_cells.contains(&s.cell))
                .map(|s| s.pos)
                .collect()
        })
        .collect();
    for (pi, p) in punctures.iter().enumerate() {
        let n_rm = removed_pos[pi].len() as f64;
        let centroid_raw = removed_pos[pi]
            .iter()
            .fold([0.0, 0.0], |acc, q| [acc[0] + q[0], acc[1] + q[1]]);
        let centroid = [centroid_raw[0] / n_rm, centroid_raw[1] / n_rm];
        let mut boundary = Vec::new();
        for site in &out.sites {
            let mine = removed_pos[pi]
                .iter()
                .map(|&q| {
                    let d = out.displacement_points(site.pos, q);
                    (d[0] * d[0] + d[1] * d[1]).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            if mine > cutoff {
                continue;
            }
            let other = removed_pos
                .iter()
                .enumerate()
                .filter(|&(qi, _)| qi != pi)
                .flat_map(|(_, v)| v.iter())
                .map(|&q| {
                    let d = out.displacement_points(site.pos, q);
                    (d[0] * d[0] + d[1] * d[1]).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            if mine <= other {
                boundary.push(site.index);
            }
        }
        let (e_sites, m_sites): (Vec<usize>, Vec<usize>) = match &p.split {
            SegmentSplit::AllM => (Vec::new(), boundary.clone()),
            SegmentSplit::AllE => (boundary.clone(), Vec::new()),
            SegmentSplit::HalfByAngle => {
                let mut e = Vec::new();
                let mut m = Vec::new();
                for &i in &boundary {
                    let d = out.displacement_points(centroid, out.sites[i].pos);
                    if d[1] >= -EPS {
                        e.push(i);
                    } else {
                        m.push(i);
                    }
                }
                (e, m)
            }
            SegmentSplit::Explicit { e_sites, m_sites } => {
                let e: Vec<usize> = e_sites
                    .iter()
                    .map(|&i| new_site_index.get(i).copied().unwrap_or(usize::MAX))
                    .collect();
                let m: Vec<usize> = m_sites
                    .iter()
                    .map(|&i| new_site_index.get(i).copied().unwrap_or(usize::MAX))
                    .collect();
                let mut all: Vec<usize> = e.iter().chain(m.iter()).copied().collect();
                all.sort_unstable();
                all.dedup();
                let mut want = boundary.clone();
                want.sort_unstable();
                if all != want || all.len() != e.len() + m.len() {
                    return Err(GeometryError::BadSegments);
                }
                (e, m)
            }
        };
        for &i in &e_sites {
            out.sites[i].detuning_scale = p.e_detuning_scale;
        }
        out.punctures.push(PunctureRecord {
            removed_cells: p.removed_cells.clone(),
            centroid,
            e_sites,
            m_sites,
        });
    }
    Ok(out)
}

impl Lattice {
    /// Closed string winding once around the cylinder through the up
    /// triangles of the given cell column.
    pub fn loop_path(&self, column: usize, kind: StringKind) -> Result<StringPath, GeometryError> {
        if self.spec.boundary_y != BoundaryY::Periodic {
            return Err(GeometryError::NotPeriodic);
        }
        if column >= self.spec.cells_x {
            return Err(GeometryError::BadColumn(column));
        }
        let mut sites = Vec::new();
        for iy in 0..self.spec.cells_y {
            let slots: &[usize] = match kind {
                StringKind::Z => &[0, 1],
                StringKind::XDual => &[2],
            };
            for &slot in slots {
                match self.site_at([column, iy], slot) {
                    Some(i) => sites.push(i),
                    None => return Err(GeometryError::PathBlocked(column, iy)),
                }
            }
        }
        Ok(StringPath { kind, topology: Topology::Loop, sites, anchors: None })
    }

    /// Open string along the straight segment from `p0` to `p1`, cutting
    /// every triangle the segment crosses.
    pub fn path_through(
        &self,
        p0: [f64; 2],
        p1: [f64; 2],
        kind: StringKind,
    ) -> Result<StringPath, GeometryError> {
        let dir = [p1[0] - p0[0], p1[1] - p0[1]];
        let len = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        if len < EPS {
            return Err(GeometryError::PathDegenerate);
        }
        let perp = [-dir[1] / len, dir[0] / len];
        let shifts = self.image_shifts();
        for attempt in 0..12 {
            // Deterministic jitter transverse to the segment to escape
            // corner and midpoint degeneracies.
            let off = attempt as f64 * 7.3e-4 * self.spec.spacing;
            let q0 = [p0[0] + off * perp[0], p0[1] + off * perp[1]];
            let q1 = [p1[0] + off * perp[0], p1[1] + off * perp[1]];
            match self.collect_cuts(q0, q1, &shifts) {
                Some(mut cuts) => {
                    cuts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    let mut seen = std::collections::HashSet::new();
                    if !cuts.iter().all(|c| seen.insert(c.1)) {
                        continue;
                    }
                    if cuts.is_empty() {
                        return Err(GeometryError::PathDegenerate);
                    }
                    let mut sites = Vec::new();
                    for (_, tri, pair) in &cuts {
                        match kind {
                            StringKind::Z => sites.extend_from_slice(pair),
                            StringKind::XDual => {
                                let t = &self.triangles[*tri];
                                let third = *t
                                    .sites
                                    .iter()
                                    .find(|s| !pair.contains(s))
                                    .expect("triangle has three sites");
                                sites.push(third);
                            }
                        }
                    }
                    return Ok(StringPath {
                        kind,
                        topology: Topology::Open,
                        sites,
                        anchors: None,
                    });
                }
                None => continue,
            }
        }
        Err(GeometryError::PathDegenerate)
    }

    fn image_shifts(&self) -> Vec<[f64; 2]> {
        match self.period() {
            None => vec![[0.0, 0.0]],
            Some(w) => vec![[0.0, 0.0], [w[0], w[1]], [-w[0], -w[1]]],
        }
    }

    /// For each triangle crossed by segment `q0`-`q1`, the two cut sites in
    /// crossing order. Returns None on a degenerate configuration.
    #[allow(clippy::type_complexity)]
    fn collect_cuts(
        &self,
        q0: [f64; 2],
        q1: [f64; 2],
        shifts: &[[f64; 2]],
    ) -> Option<Vec<(f64, usize, [usize; 2])>> {
        let mut cuts = Vec::new();
        for tri in &self.triangles {
            let mut found: Option<(f64, [usize; 2])> = None;
            for shift in shifts {
                let c: Vec<[f64; 2]> = tri
                    .corners
                    .iter()
                    .map(|p| [p[0] + shift[0], p[1] + shift[1]])
                    .collect();
                let endpoint_inside = point_in_triangle(q0, &c) || point_in_triangle(q1, &c);
                let mut hits: Vec<(f64, usize)> = Vec::new();
                for k in 0..3 {
                    match seg_intersect(q0, q1, c[k], c[(k + 1) % 3]) {
                        SegHit::Cross(t) => hits.push((t, k)),
                        SegHit::Degenerate => return None,
                        SegHit::Miss => {}
                    }
                }
                match hits.len() {
                    0 => {}
                    // A terminal triangle: the path starts or ends inside it
                    // and exits through a single edge. It is not cut.
                    1 if endpoint_inside => {}
                    2 if endpoint_inside => return None,
                    2 => {
                        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                        let pair = [tri.sites[hits[0].1], tri.sites[hits[1].1]];
                        let tmid = 0.5 * (hits[0].0 + hits[1].0);
                        if found.is_some() {
                            // Crossed both the triangle and a periodic image.
                            return None;
                        }
                        found = Some((tmid, pair));
                    }
                    _ => return None,
                }
            }
            if let Some((tmid, pair)) = found {
                cuts.push((tmid, tri.index, pair));
            }
        }
        Some(cuts)
    }

    /// Open string between two puncture boundary segments. Z strings run
    /// between m segments, X-dual strings between e segments.
    pub fn connector_path(
        &self,
        from: Anchor,
        to: Anchor,
        kind: StringKind,
    ) -> Result<StringPath, GeometryError> {
        for a in [from, to] {
            if a.puncture >= self.punctures.len() {
                return Err(GeometryError::BadAnchor(a.puncture));
            }
            let want = match kind {
                StringKind::Z => SegmentKind::M,
                StringKind::XDual => SegmentKind::E,
            };
            if a.segment != want {
                return Err(GeometryError::SegmentMismatch);
            }
            let rec = &self.punctures[a.puncture];
            let seg = match a.segment {
                SegmentKind::E => &rec.e_sites,
                SegmentKind::M => &rec.m_sites,
            };
            if seg.is_empty() {
                return Err(GeometryError::SegmentMismatch);
            }
        }
        let p0 = self.punctures[from.puncture].centroid;
        let p1 = self.punctures[to.puncture].centroid;
        let mut path = self.path_through(p0, p1, kind)?;
        path.anchors = Some((from, to));
        Ok(path)
    }

    /// Swap a string for its dual through the same triangles: the pair of
    /// cut sites of each triangle is exchanged with the remaining site.
    pub fn dual_path(&self, path: &StringPath) -> Result<StringPath, GeometryError> {
        let mut sites = Vec::new();
        match path.kind {
            StringKind::Z => {
                if path.sites.len() % 2 != 0 {
                    return Err(GeometryError::TriangleCut {
                        triangle: self.sites[*path.sites.last().unwrap()].triangle,
                        count: 1,
                    });
                }
                let mut seen = std::collections::HashSet::new();
                for pair in path.sites.chunks(2) {
                    let t0 = self.sites[pair[0]].triangle;
                    let t1 = self.sites[pair[1]].triangle;
                    if t0 != t1 || pair[0] == pair[1] {
                        return Err(GeometryError::TriangleCut { triangle: t0, count: 1 });
                    }
                    if !seen.insert(t0) {
                        return Err(GeometryError::TriangleCut { triangle: t0, count: 3 });
                    }
                    let tri = &self.triangles[t0];
                    let third = *tri
                        .sites
                        .iter()
                        .find(|s| **s != pair[0] && **s != pair[1])
                        .expect("triangle has three sites");
                    sites.push(third);
                }
            }
            StringKind::XDual => {
                let mut seen = std::collections::HashSet::new();
                for &s in &path.sites {
                    let t = self.sites[s].triangle;
                    if !seen.insert(t) {
                        return Err(GeometryError::TriangleCut { triangle: t, count: 3 });
                    }
                    let others = self.triangles[t].others(s);
                    sites.extend_from_slice(&others);
                }
            }
        }
        Ok(StringPath {
            kind: match path.kind {
                StringKind::Z => StringKind::XDual,
                StringKind::XDual => StringKind::Z,
            },
            topology: path.topology,
            sites,
            anchors: path.anchors,
        })
    }

    /// JSON document with sites, triangles, punctures and named paths.
    pub fn to_json(&self, paths: &[(&str, &StringPath)]) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "sites": self.sites,
            "triangles": self.triangles,
            "punctures": self.punctures,
            "paths": paths
                .iter()
                .map(|(name, p)| serde_json::json!({ "name": name, "path": p }))
                .collect::<Vec<_>>(),
        })
    }

    /// Simple SVG rendering: sites as circles (e-boundary sites hollow),
    /// triangles as outlines, paths as colored polylines.
    pub fn to_svg(&self, paths: &[(&str, &StringPath)]) -> String {
        let (mut min_x, mut min_y, mut max_x, mut max_y) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for site in &self.sites {
            min_x = min_x.min(site.pos[0]);
            min_y = min_y.min(site.pos[1]);
            max_x = max_x.max(site.pos[0]);
            max_y = max_y.max(site.pos[1]);
        }
        let pad = 2.0 * self.spec.spacing;
        let scale = 40.0 / self.spec.spacing;
        let w = (max_x - min_x + 2.0 * pad) * scale;
        let h = (max_y - min_y + 2.0 * pad) * scale;
        let tx = |x: f64| (x - min_x + pad) * scale;
        let ty = |y: f64| h - (y - min_y + pad) * scale;
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\">\n"
        );
        for tri in &self.triangles {
            let pts: Vec<String> = tri
                .corners
                .iter()
                .map(|c| format!("{:.1},{:.1}", tx(c[0]), ty(c[1])))
                .collect();
            svg.push_str(&format!(
                "  <polygon points=\"{}\" fill=\"none\" stroke=\"#ccc\"/>\n",
                pts.join(" ")
            ));
        }
        let colors = ["#d33", "#36c", "#2a2", "#a3a", "#b80", "#088"];
        for (pi, (name, path)) in paths.iter().enumerate() {
            let color = colors[pi % colors.len()];
            let pts: Vec<String> = path
                .sites
                .iter()
                .map(|&i| {
                    let p = self.sites[i].pos;
                    format!("{:.1},{:.1}", tx(p[0]), ty(p[1]))
                })
                .collect();
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"><title>{name}</title></polyline>\n",
                pts.join(" ")
            ));
        }
        for site in &self.sites {
            let fill = if site.detuning_scale < 1.0 { "none" } else { "#222" };
            svg.push_str(&format!(
                "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"{fill}\" stroke=\"#222\"/>\n",
                tx(site.pos[0]),
                ty(site.pos[1])
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn point_in_triangle(p: [f64; 2], c: &[[f64; 2]]) -> bool {
    let sign = |a: [f64; 2], b: [f64; 2]| (p[0] - b[0]) * (a[1] - b[1]) - (a[0] - b[0]) * (p[1] - b[1]);
    let d1 = sign(c[0], c[1]);
    let d2 = sign(c[1], c[2]);
    let d3 = sign(c[2], c[0]);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

enum SegHit {
    Cross(f64),
    Degenerate,
    Miss,
}

/// Proper intersection of segments `p0p1` and `q0q1`; returns the parameter
/// along `p0p1`. Near-parallel or endpoint-touching cases are degenerate.
fn seg_intersect(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> SegHit {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    let scale = (r[0].abs() + r[1].abs()) * (s[0].abs() + s[1].abs());
    if denom.abs() < 1e-12 * scale.max(1e-300) {
        return SegHit::Miss;
    }
    let qp = [q0[0] - p0[0], q0[1] - p0[1]];
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    let tol = 1e-9;
    if t < -tol || t > 1.0 + tol || u < -tol || u > 1.0 + tol {
        return SegHit::Miss;
    }
    if t.abs() < tol || (t - 1.0).abs() < tol || u.abs() < tol || (u - 1.0).abs() < tol {
        return SegHit::Degenerate;
    }
    SegHit::Cross(t)
}

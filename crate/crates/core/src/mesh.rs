//! Polygonal spatial meshes.
//!
//! A [`SpatialMesh`] stores counter-clockwise polygonal elements, the faces
//! extracted from shared vertex pairs, and a sub-triangulation of every element
//! in which each boundary edge of the element owns one triangle. The triangles
//! carry the quadrature and give the measured shape constant `C_s` reported by
//! [`shape_regularity_report`].
//!
//! Hanging nodes are expressed by listing the hanging vertex in the loops of
//! both neighbours, so a large element simply has several collinear faces.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Spatial dimension of the meshes handled here.
pub const SPACE_DIM: usize = 2;

/// Default threshold above which a measured `C_s` triggers a warning.
pub const DEFAULT_SHAPE_WARNING: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(x: f64, y: f64) -> Self {
        Vertex { x, y }
    }

    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

#[derive(Clone, Debug)]
pub struct PolygonalElement {
    pub id: usize,
    /// Counter-clockwise boundary loop.
    pub vertex_ids: Vec<usize>,
    /// Diameter, the largest pairwise vertex distance.
    pub h: f64,
    pub centroid: Point,
    pub area: f64,
    /// Face id of each local edge `(vertex_ids[i], vertex_ids[i + 1])`.
    pub faces: Vec<usize>,
    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]`.
    pub bbox: [f64; 4],
}

impl PolygonalElement {
    pub fn num_edges(&self) -> usize {
        self.vertex_ids.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: usize,
    /// Endpoints in the orientation of the first incident element's loop.
    pub endpoints: [usize; 2],
    pub kind: FaceKind,
    /// First incident element (the one the normal points out of) and the
    /// neighbour across the face for interior faces.
    pub elements: (usize, Option<usize>),
    /// Local edge index of the face in each incident element.
    pub local_edges: (usize, Option<usize>),
    /// Unit normal, outward from `elements.0`.
    pub normal: Point,
    pub length: f64,
    pub boundary_tag: Option<String>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.kind == FaceKind::Boundary
    }
}

/// One triangle of an element's sub-triangulation.
#[derive(Clone, Debug)]
pub struct SubTriangle {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Local edges of the element that are edges of this triangle and are
    /// assigned to it. Empty for interior fill triangles.
    pub tagged_edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ElementTriangulation {
    pub triangles: Vec<SubTriangle>,
    /// For each local edge: index of its tagged triangle.
    pub edge_triangle: Vec<usize>,
    /// For each local edge: `h |F| / (d |s_F|)`.
    pub edge_ratios: Vec<f64>,
    /// Maximum of `edge_ratios`.
    pub shape_constant: f64,
}

impl ElementTriangulation {
    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SubTriangulation {
    pub elements: Vec<ElementTriangulation>,
}

impl SubTriangulation {
    pub fn shape_constant(&self) -> f64 {
        self.elements.iter().map(|e| e.shape_constant).fold(0.0, f64::max)
    }
}

/// Axis-aligned rectangle `(x0, x1) x (y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
}

impl Default for Rect {
    fn default() -> Self {
        Rect::UNIT
    }
}

#[derive(Clone, Debug)]
pub struct SpatialMesh {
    pub vertices: Vec<Vertex>,
    pub elements: Vec<PolygonalElement>,
    pub faces: Vec<Face>,
    pub sub_triangulation: SubTriangulation,
    pub h_max: f64,
}

/// Boundary tag for the face joining two vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryTag {
    pub edge: [usize; 2],
    pub tag: String,
}

/// On-disk mesh description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_tags: Vec<BoundaryTag>,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed shoelace area.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let a = signed_area(poly);
    let (mut cx, mut cy) = (0.0, 0.0);
    // shift to the first vertex to limit cancellation
    let o = poly[0];
    for i in 0..n {
        let p = [poly[i][0] - o[0], poly[i][1] - o[1]];
        let q = [poly[(i + 1) % n][0] - o[0], poly[(i + 1) % n][1] - o[1]];
        let c = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    [o[0] + cx / (6.0 * a), o[1] + cy / (6.0 * a)]
}

fn diameter(poly: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            h = h.max(dist(poly[i], poly[j]));
        }
    }
    h
}

fn triangle_area(t: &[Point; 3]) -> f64 {
    0.5 * cross(t[0], t[1], t[2])
}

fn on_segment(p: Point, a: Point, b: Point, tol: f64) -> bool {
    cross(a, b, p).abs() <= tol
        && p[0] >= a[0].min(b[0]) - tol
        && p[0] <= a[0].max(b[0]) + tol
        && p[1] >= a[1].min(b[1]) - tol
        && p[1] <= a[1].max(b[1]) + tol
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)) {
        return true;
    }
    on_segment(a, c, d, tol) || on_segment(b, c, d, tol) || on_segment(c, a, b, tol) || on_segment(d, a, b, tol)
}

/// Checks that the loop is a simple polygon. Returns a description of the
/// first defect found.
pub fn check_simple(poly: &[Point]) -> std::result::Result<(), String> {
    let n = poly.len();
    if n < 3 {
        return Err(format!("polygon has {n} vertices, at least 3 required"));
    }
    if poly.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err("non-finite vertex coordinate".into());
    }
    let scale = diameter(poly);
    if scale <= 0.0 {
        return Err("all vertices coincide".into());
    }
    let tol = 1e-12 * scale * scale;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if dist(a, b) <= 1e-14 * scale {
            return Err(format!("edge {i} has zero length"));
        }
        // adjacent edges must not fold back onto each other
        let c = poly[(i + 2) % n];
        if n > 3 && cross(a, b, c).abs() <= tol {
            let dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]);
            if dot < 0.0 {
                return Err(format!("edges {i} and {} overlap", (i + 1) % n));
            }
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let c = poly[j];
            let d = poly[(j + 1) % n];
            if segments_intersect(a, b, c, d, tol) {
                return Err(format!("boundary self-intersects (edges {i} and {j})"));
            }
        }
    }
    if signed_area(poly).abs() <= tol {
        return Err("polygon has zero area".into());
    }
    Ok(())
}

fn is_convex(poly: &[Point]) -> bool {
    let n = poly.len();
    let scale = diameter(poly);
    let tol = 1e-12 * scale * scale;
    (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) >= -tol)
}

fn point_in_triangle(p: Point, t: &[Point; 3], tol: f64) -> bool {
    cross(t[0], t[1], p) >= -tol && cross(t[1], t[2], p) >= -tol && cross(t[2], t[0], p) >= -tol
}

/// Ear clipping of a simple counter-clockwise polygon. Returns vertex index
/// triples.
fn ear_clip(poly: &[Point]) -> std::result::Result<Vec<[usize; 3]>, String> {
    let scale = diameter(poly);
    let tol = 1e-12 * scale * scale;
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::with_capacity(poly.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let t = [poly[ia], poly[ib], poly[ic]];
            if cross(t[0], t[1], t[2]) <= tol {
                continue;
            }
            let blocked = idx
                .iter()
                .any(|&j| j != ia && j != ib && j != ic && point_in_triangle(poly[j], &t, tol));
            if !blocked {
                tris.push([ia, ib, ic]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err("ear clipping found no ear".into());
        }
    }
    if cross(poly[idx[0]], poly[idx[1]], poly[idx[2]]) <= tol {
        return Err("ear clipping produced a degenerate final triangle".into());
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Sub-triangulates a simple counter-clockwise polygon so that every boundary
/// edge belongs to exactly one tagged triangle.
///
/// Triangles are returned unchanged. Convex polygons use a fan from the area
/// centroid, one triangle per edge. Other polygons are ear clipped and every
/// ear touching two or more boundary edges is split from its own centroid.
pub fn sub_triangulate(poly: &[Point]) -> std::result::Result<ElementTriangulation, String> {
    check_simple(poly)?;
    let n = poly.len();
    if signed_area(poly) <= 0.0 {
        return Err("loop is not counter-clockwise".into());
    }
    let mut triangles = Vec::new();
    if n == 3 {
        let v = [poly[0], poly[1], poly[2]];
        triangles.push(SubTriangle {
            area: triangle_area(&v),
            vertices: v,
            tagged_edges: vec![0, 1, 2],
        });
    } else if is_convex(poly) {
        let c = centroid(poly);
        for i in 0..n {
            let v = [c, poly[i], poly[(i + 1) % n]];
            triangles.push(SubTriangle {
                area: triangle_area(&v),
                vertices: v,
                tagged_edges: vec![i],
            });
        }
    } else {
        for [a, b, c] in ear_clip(poly)? {
            let tri = [poly[a], poly[b], poly[c]];
            // local edge index of (u, v) if it is a polygon edge
            let edge_of = |u: usize, v: usize| {
                if (u + 1) % n == v {
                    Some(u)
                } else if (v + 1) % n == u {
                    Some(v)
                } else {
                    None
                }
            };
            let edges = [edge_of(a, b), edge_of(b, c), edge_of(c, a)];
            let boundary = edges.iter().filter(|e| e.is_some()).count();
            if boundary <= 1 {
                triangles.push(SubTriangle {
                    area: triangle_area(&tri),
                    vertices: tri,
                    tagged_edges: edges.iter().flatten().copied().collect(),
                });
            } else {
                let g = [
                    (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0,
                    (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0,
                ];
                for k in 0..3 {
                    let v = [g, tri[k], tri[(k + 1) % 3]];
                    triangles.push(SubTriangle {
                        area: triangle_area(&v),
                        vertices: v,
                        tagged_edges: edges[k].into_iter().collect(),
                    });
                }
            }
        }
    }
    let h = diameter(poly);
    let mut edge_triangle = vec![usize::MAX; n];
    for (ti, t) in triangles.iter().enumerate() {
        for &e in &t.tagged_edges {
            edge_triangle[e] = ti;
        }
    }
    if let Some(e) = edge_triangle.iter().position(|&t| t == usize::MAX) {
        return Err(format!("edge {e} has no tagged triangle"));
    }
    if triangles.iter().any(|t| t.area <= 0.0) {
        return Err("degenerate sub-triangle".into());
    }
    let edge_ratios: Vec<f64> = (0..n)
        .map(|e| {
            let len = dist(poly[e], poly[(e + 1) % n]);
            h * len / (SPACE_DIM as f64 * triangles[edge_triangle[e]].area)
        })
        .collect();
    let shape_constant = edge_ratios.iter().copied().fold(0.0, f64::max);
    Ok(ElementTriangulation {
        triangles,
        edge_triangle,
        edge_ratios,
        shape_constant,
    })
}

impl SpatialMesh {
    /// Builds a mesh from vertex coordinates and element loops. Clockwise loops
    /// are reversed.
    pub fn from_parts(coords: Vec<Point>, loops: Vec<Vec<usize>>, boundary_tags: &[BoundaryTag]) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::InvalidArgument("mesh has no elements".into()));
        }
        let vertices: Vec<Vertex> = coords.iter().map(|p| Vertex::new(p[0], p[1])).collect();
        for (i, v) in vertices.iter().enumerate() {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(Error::InvalidArgument(format!("vertex {i} is not finite")));
            }
        }

        let mut elements = Vec::with_capacity(loops.len());
        let mut triangulations = Vec::with_capacity(loops.len());
        for (id, mut lp) in loops.into_iter().enumerate() {
            let geom = |message: String| Error::Geometry { element: id, message };
            if let Some(&bad) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(geom(format!("unknown vertex id {bad}")));
            }
            let mut seen = lp.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != lp.len() {
                return Err(geom("repeated vertex in boundary loop".into()));
            }
            let mut poly: Vec<Point> = lp.iter().map(|&v| coords[v]).collect();
            check_simple(&poly).map_err(geom)?;
            if signed_area(&poly) < 0.0 {
                lp.reverse();
                poly.reverse();
            }
            let tri = sub_triangulate(&poly).map_err(geom)?;
            let xs = poly.iter().map(|p| p[0]);
            let ys = poly.iter().map(|p| p[1]);
            let bbox = [
                xs.clone().fold(f64::INFINITY, f64::min),
                xs.fold(f64::NEG_INFINITY, f64::max),
                ys.clone().fold(f64::INFINITY, f64::min),
                ys.fold(f64::NEG_INFINITY, f64::max),
            ];
            elements.push(PolygonalElement {
                id,
                h: diameter(&poly),
                centroid: centroid(&poly),
                area: signed_area(&poly),
                faces: vec![usize::MAX; lp.len()],
                vertex_ids: lp,
                bbox,
            });
            triangulations.push(tri);
        }

        let mut edge_owner: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        let mut order = Vec::new();
        for el in &elements {
            let n = el.vertex_ids.len();
            for k in 0..n {
                let (a, b) = (el.vertex_ids[k], el.vertex_ids[(k + 1) % n]);
                let key = (a.min(b), a.max(b));
                let entry = edge_owner.entry(key).or_default();
                if entry.is_empty() {
                    order.push(key);
                }
                entry.push((el.id, k));
            }
        }

        let tags: HashMap<(usize, usize), &str> = boundary_tags
            .iter()
            .map(|t| ((t.edge[0].min(t.edge[1]), t.edge[0].max(t.edge[1])), t.tag.as_str()))
            .collect();

        let mut faces = Vec::with_capacity(order.len());
        for key in order {
            let owners = &edge_owner[&key];
            let (e1, k1) = owners[0];
            let el = &elements[e1];
            let n = el.vertex_ids.len();
            let a = el.vertex_ids[k1];
            let b = el.vertex_ids[(k1 + 1) % n];
            let pa = coords[a];
            let pb = coords[b];
            let length = dist(pa, pb);
            let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
            let id = faces.len();
            let face = match owners.len() {
                1 => Face {
                    id,
                    endpoints: [a, b],
                    kind: FaceKind::Boundary,
                    elements: (e1, None),
                    local_edges: (k1, None),
                    normal,
                    length,
                    boundary_tag: tags.get(&key).map(|s| s.to_string()),
                },
                2 => {
                    let (e2, k2) = owners[1];
                    let other = &elements[e2];
                    let m = other.vertex_ids.len();
                    if other.vertex_ids[k2] != b || other.vertex_ids[(k2 + 1) % m] != a {
                        return Err(Error::Geometry {
                            element: e2,
                            message: format!("edge ({a}, {b}) is traversed in the same direction by element {e1}"),
                        });
                    }
                    Face {
                        id,
                        endpoints: [a, b],
                        kind: FaceKind::Interior,
                        elements: (e1, Some(e2)),
                        local_edges: (k1, Some(k2)),
                        normal,
                        length,
                        boundary_tag: None,
                    }
                }
                _ => {
                    return Err(Error::Geometry {
                        element: owners[2].0,
                        message: format!("edge ({a}, {b}) is shared by more than two elements"),
                    })
                }
            };
            faces.push(face);
        }
        for f in &faces {
            elements[f.elements.0].faces[f.local_edges.0] = f.id;
            if let (Some(e2), Some(k2)) = (f.elements.1, f.local_edges.1) {
                elements[e2].faces[k2] = f.id;
            }
        }
        let h_max = elements.iter().map(|e| e.h).fold(0.0, f64::max);
        Ok(SpatialMesh {
            vertices,
            elements,
            faces,
            sub_triangulation: SubTriangulation {
                elements: triangulations,
            },
            h_max,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn polygon(&self, element: usize) -> Vec<Point> {
        self.elements[element]
            .vertex_ids
            .iter()
            .map(|&v| self.vertices[v].point())
            .collect()
    }

    pub fn face_points(&self, face: usize) -> (Point, Point) {
        let f = &self.faces[face];
        (
            self.vertices[f.endpoints[0]].point(),
            self.vertices[f.endpoints[1]].point(),
        )
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    /// Elements sharing at least one face with `element`, in face order.
    pub fn neighbours(&self, element: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &f in &self.elements[element].faces {
            let face = &self.faces[f];
            let other = match face.elements {
                (a, Some(b)) if a == element => Some(b),
                (a, Some(_)) => Some(a),
                _ => None,
            };
            if let Some(o) = other {
                if !out.contains(&o) {
                    out.push(o);
                }
            }
        }
        out
    }

    /// Outward unit normal of `face` as seen from `element`.
    pub fn outward_normal(&self, face: usize, element: usize) -> Point {
        let f = &self.faces[face];
        if f.elements.0 == element {
            f.normal
        } else {
            [-f.normal[0], -f.normal[1]]
        }
    }

    /// Element containing the point, searched over the sub-triangles.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let tol = 1e-12 * self.h_max.max(1.0);
        for (e, el) in self.elements.iter().enumerate() {
            let [x0, x1, y0, y1] = el.bbox;
            if p[0] < x0 - tol || p[0] > x1 + tol || p[1] < y0 - tol || p[1] > y1 + tol {
                continue;
            }
            let ttol = 1e-12 * el.h * el.h;
            if self.sub_triangulation.elements[e]
                .triangles
                .iter()
                .any(|t| point_in_triangle(p, &t.vertices, ttol))
            {
                return Some(e);
            }
        }
        None
    }

    /// Elements whose measured `C_s` exceeds `threshold`.
    pub fn shape_warnings(&self, threshold: f64) -> Vec<(usize, f64)> {
        self.sub_triangulation
            .elements
            .iter()
            .enumerate()
            .filter(|(_, t)| t.shape_constant > threshold)
            .map(|(e, t)| (e, t.shape_constant))
            .collect()
    }

    pub fn to_file(&self) -> MeshFile {
        MeshFile {
            vertices: self.vertices.iter().map(|v| v.point()).collect(),
            elements: self.elements.iter().map(|e| e.vertex_ids.clone()).collect(),
            boundary_tags: self
                .faces
                .iter()
                .filter_map(|f| {
                    f.boundary_tag.as_ref().map(|t| BoundaryTag {
                        edge: f.endpoints,
                        tag: t.clone(),
                    })
                })
                .collect(),
        }
    }

    /// Returns the same geometry with every face split into `k` collinear
    /// sub-faces.
    pub fn split_faces(&self, k: usize) -> Result<SpatialMesh> {
        if k == 0 {
            return Err(Error::InvalidArgument("split count must be >= 1".into()));
        }
        let mut coords: Vec<Point> = self.vertices.iter().map(|v| v.point()).collect();
        // interior points of each face, ordered from endpoints[0] to endpoints[1]
        let mut inserted: Vec<Vec<usize>> = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let (a, b) = self.face_points(f.id);
            let mut ids = Vec::with_capacity(k - 1);
            for i in 1..k {
                let s = i as f64 / k as f64;
                ids.push(coords.len());
                coords.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
            inserted.push(ids);
        }
        let mut loops = Vec::with_capacity(self.elements.len());
        for el in &self.elements {
            let n = el.vertex_ids.len();
            let mut lp = Vec::with_capacity(n * k);
            for i in 0..n {
                let a = el.vertex_ids[i];
                lp.push(a);
                let f = &self.faces[el.faces[i]];
                if f.endpoints[0] == a {
                    lp.extend(inserted[f.id].iter().copied());
                } else {
                    lp.extend(inserted[f.id].iter().rev().copied());
                }
            }
            loops.push(lp);
        }
        let mut tags = Vec::new();
        for f in &self.faces {
            if let Some(tag) = &f.boundary_tag {
                let mut chain = vec![f.endpoints[0]];
                chain.extend(inserted[f.id].iter().copied());
                chain.push(f.endpoints[1]);
                for w in chain.windows(2) {
                    tags.push(BoundaryTag {
                        edge: [w[0], w[1]],
                        tag: tag.clone(),
                    });
                }
            }
        }
        SpatialMesh::from_parts(coords, loops, &tags)
    }
}

/// `nx * ny` congruent rectangles stored as 4-gons.
pub fn build_rectangular_mesh(nx: usize, ny: usize, domain: Rect) -> Result<SpatialMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "element counts must be positive, got {nx} x {ny}"
        )));
    }
    if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
        return Err(Error::InvalidArgument(format!("empty domain {domain:?}")));
    }
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push([
                domain.x0 + (domain.x1 - domain.x0) * i as f64 / nx as f64,
                domain.y0 + (domain.y1 - domain.y0) * j as f64 / ny as f64,
            ]);
        }
    }
    let v = |i: usize, j: usize| j * (nx + 1) + i;
    let mut loops = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            loops.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    SpatialMesh::from_parts(coords, loops, &[])
}

/// Parses a mesh from the JSON text format.
pub fn parse_mesh(text: &str) -> Result<SpatialMesh> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    SpatialMesh::from_parts(file.vertices, file.elements, &file.boundary_tags)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SpatialMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Per-element `C_s` estimates and their maximum.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    pub per_element: BTreeMap<usize, f64>,
    pub max: f64,
}

pub fn shape_regularity_report(mesh: &SpatialMesh) -> ShapeReport {
    let per_element: BTreeMap<usize, f64> = mesh
        .sub_triangulation
        .elements
        .iter()
        .enumerate()
        .map(|(e, t)| (e, t.shape_constant))
        .collect();
    let max = per_element.values().copied().fold(0.0, f64::max);
    ShapeReport { per_element, max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn unit_square() -> Vec<Point> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn single_cell_mesh() {
        let m = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.num_boundary_faces(), 4);
        assert_eq!(m.num_interior_faces(), 0);
    }

    #[test]
    fn two_by_two_face_counts() {
        let m = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.num_interior_faces(), 4);
        assert_eq!(m.num_boundary_faces(), 8);
    }

    #[test]
    fn four_by_four_diameters() {
        let m = build_rectangular_mesh(4, 4, Rect::UNIT).unwrap();
        for e in &m.elements {
            assert!((e.h - SQRT_2 / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(build_rectangular_mesh(0, 3, Rect::UNIT).is_err());
        assert!(build_rectangular_mesh(3, 0, Rect::UNIT).is_err());
    }

    #[test]
    fn square_gets_centroid_fan() {
        let t = sub_triangulate(&unit_square()).unwrap();
        assert_eq!(t.triangles.len(), 4);
        for tri in &t.triangles {
            assert!((tri.area - 0.25).abs() < 1e-15);
            assert_eq!(tri.tagged_edges.len(), 1);
        }
        assert!((t.shape_constant - 2.0 * SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn hexagon_fan() {
        let hex: Vec<Point> = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let t = sub_triangulate(&hex).unwrap();
        assert_eq!(t.triangles.len(), 6);
        let a0 = t.triangles[0].area;
        for tri in &t.triangles {
            assert!((tri.area - a0).abs() < 1e-14);
            assert_eq!(tri.tagged_edges.len(), 1);
        }
    }

    #[test]
    fn triangle_is_its_own_triangulation() {
        let s = 2.0;
        let tri = vec![[0.0, 0.0], [s, 0.0], [s / 2.0, s * 3f64.sqrt() / 2.0]];
        let t = sub_triangulate(&tri).unwrap();
        assert_eq!(t.triangles.len(), 1);
        let area = 3f64.sqrt() / 4.0 * s * s;
        let expected = s * s / (2.0 * area);
        for r in &t.edge_ratios {
            assert!((r - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn nonconvex_polygon_gets_one_triangle_per_edge() {
        // L-shaped hexagon
        let l = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let t = sub_triangulate(&l).unwrap();
        assert!((t.total_area() - 3.0).abs() < 1e-14);
        for e in 0..l.len() {
            let owners = t.triangles.iter().filter(|tri| tri.tagged_edges.contains(&e)).count();
            assert_eq!(owners, 1, "edge {e}");
        }
        for tri in &t.triangles {
            assert!(tri.tagged_edges.len() <= 1);
        }
    }

    #[test]
    fn self_intersecting_polygon_rejected() {
        let bow = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(check_simple(&bow).is_err());
        let err = SpatialMesh::from_parts(bow, vec![vec![0, 1, 2, 3]], &[]).unwrap_err();
        assert!(matches!(err, Error::Geometry { element: 0, .. }));
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let line = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(sub_triangulate(&line).is_err());
    }

    #[test]
    fn clockwise_loops_are_reoriented() {
        let coords = unit_square();
        let m = SpatialMesh::from_parts(coords, vec![vec![3, 2, 1, 0]], &[]).unwrap();
        assert!((m.elements[0].area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pentagon_and_triangle_share_one_face() {
        let text = r#"{
            "vertices": [[0,0],[1,0],[1.5,0.5],[1,1],[0,1],[2,1]],
            "elements": [[0,1,2,3,4],[2,5,3]]
        }"#;
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.num_interior_faces(), 1);
        let f = m.faces.iter().find(|f| !f.is_boundary()).unwrap();
        assert_eq!(f.elements, (0, Some(1)));
    }

    #[test]
    fn unit_square_file_matches_builder() {
        let text = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "elements": [[0,1,2,3]]}"#;
        let a = parse_mesh(text).unwrap();
        let b = build_rectangular_mesh(1, 1, Rect::UNIT).unwrap();
        assert_eq!(a.polygon(0), b.polygon(0));
        assert_eq!(a.faces.len(), b.faces.len());
        for (fa, fb) in a.faces.iter().zip(&b.faces) {
            assert_eq!(a.face_points(fa.id), b.face_points(fb.id));
            assert_eq!(fa.normal, fb.normal);
        }
    }

    #[test]
    fn malformed_file_reports_line() {
        let text = "{\n \"vertices\": [[0,0],[1,0]\n \"elements\": []}";
        match parse_mesh(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn boundary_tags_are_attached() {
        let text = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "elements": [[0,1,2,3]],
            "boundary_tags": [{"edge": [1, 0], "tag": "bottom"}]}"#;
        let m = parse_mesh(text).unwrap();
        let tagged: Vec<_> = m.faces.iter().filter(|f| f.boundary_tag.is_some()).collect();
        assert_eq!(tagged.len(), 1);
        assert_eq!(tagged[0].endpoints, [0, 1]);
    }

    #[test]
    fn face_lengths_partition_boundaries() {
        let m = build_rectangular_mesh(3, 2, Rect::UNIT)
            .unwrap()
            .split_faces(3)
            .unwrap();
        for el in &m.elements {
            let poly = m.polygon(el.id);
            let perimeter: f64 = (0..poly.len()).map(|i| dist(poly[i], poly[(i + 1) % poly.len()])).sum();
            let faces: f64 = el.faces.iter().map(|&f| m.faces[f].length).sum();
            assert!((perimeter - faces).abs() <= 1e-12 * perimeter);
        }
    }

    #[test]
    fn interior_normals_are_reciprocal() {
        let m = build_rectangular_mesh(3, 3, Rect::UNIT).unwrap();
        for f in m.faces.iter().filter(|f| !f.is_boundary()) {
            let (e1, e2) = (f.elements.0, f.elements.1.unwrap());
            let n1 = m.outward_normal(f.id, e1);
            let n2 = m.outward_normal(f.id, e2);
            assert_eq!(n1, [-n2[0], -n2[1]]);
            // n1 points from e1 towards e2
            let c1 = m.elements[e1].centroid;
            let c2 = m.elements[e2].centroid;
            assert!(n1[0] * (c2[0] - c1[0]) + n1[1] * (c2[1] - c1[1]) > 0.0);
        }
    }

    #[test]
    fn split_faces_preserves_geometry() {
        let m = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
        let s = m.split_faces(3).unwrap();
        assert_eq!(s.num_elements(), 4);
        assert_eq!(s.faces.len(), 3 * m.faces.len());
        assert!((s.area() - 1.0).abs() < 1e-14);
        for (a, b) in m.elements.iter().zip(&s.elements) {
            assert!((a.h - b.h).abs() < 1e-15);
            assert!((a.area - b.area).abs() < 1e-15);
        }
    }

    #[test]
    fn congruent_elements_share_shape_constant() {
        let m = build_rectangular_mesh(3, 5, Rect::UNIT).unwrap();
        let r = shape_regularity_report(&m);
        let first = r.per_element[&0];
        assert!(r.per_element.values().all(|c| (c - first).abs() < 1e-12));
        assert!((r.max - first).abs() < 1e-12);
    }

    #[test]
    fn locate_finds_containing_element() {
        let m = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
        assert_eq!(m.locate([0.25, 0.25]), Some(0));
        assert_eq!(m.locate([0.75, 0.75]), Some(3));
        assert_eq!(m.locate([1.5, 0.5]), None);
    }
}

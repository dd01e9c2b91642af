//! Gmsh ASCII `.msh` version 2.2 reader and writer for quad and hex meshes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{face_vertices, BoundaryFace, Mesh, Point};
use crate::error::{Error, Result};

const LINE: u32 = 1;
const QUAD: u32 = 3;
const HEX: u32 = 5;
const POINT: u32 = 15;

// gmsh node order -> lexicographic local order
const QUAD_TO_LEX: [usize; 4] = [0, 1, 3, 2];
const HEX_TO_LEX: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];

struct Element {
    kind: u32,
    tag: u32,
    nodes: Vec<usize>,
}

pub fn read_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_msh(&text, path)
}

fn parse_msh(text: &str, path: &Path) -> Result<Mesh> {
    let err = |line: usize, msg: &str| Error::MshParse { path: path.to_path_buf(), line: line + 1, msg: msg.to_string() };
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let mut nodes: Vec<(usize, Point)> = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut seen_nodes = false;
    let mut seen_elements = false;
    while i < lines.len() {
        match lines[i].trim() {
            "$MeshFormat" => {
                let version = lines.get(i + 1).ok_or_else(|| err(i, "truncated $MeshFormat"))?;
                let mut it = version.split_whitespace();
                let v = it.next().unwrap_or("");
                if !v.starts_with('2') {
                    return Err(err(i + 1, &format!("unsupported msh version {v}")));
                }
                if it.next() != Some("0") {
                    return Err(err(i + 1, "only ASCII msh files are supported"));
                }
                i = expect_end(&lines, i + 2, "$EndMeshFormat").map_err(|l| err(l, "missing $EndMeshFormat"))?;
            }
            "$Nodes" => {
                let n: usize = parse_field(lines.get(i + 1).copied()).ok_or_else(|| err(i + 1, "bad node count"))?;
                for k in 0..n {
                    let l = i + 2 + k;
                    let row = lines.get(l).ok_or_else(|| err(l, "truncated $Nodes"))?;
                    let f: Vec<&str> = row.split_whitespace().collect();
                    if f.len() != 4 {
                        return Err(err(l, "node line must have 4 fields"));
                    }
                    let id: usize = f[0].parse().map_err(|_| err(l, "bad node id"))?;
                    let mut x = [0.0; 3];
                    for d in 0..3 {
                        x[d] = f[d + 1].parse().map_err(|_| err(l, "bad coordinate"))?;
                    }
                    nodes.push((id, x));
                }
                i = expect_end(&lines, i + 2 + n, "$EndNodes").map_err(|l| err(l, "missing $EndNodes"))?;
                seen_nodes = true;
            }
            "$Elements" => {
                let n: usize = parse_field(lines.get(i + 1).copied()).ok_or_else(|| err(i + 1, "bad element count"))?;
                for k in 0..n {
                    let l = i + 2 + k;
                    let row = lines.get(l).ok_or_else(|| err(l, "truncated $Elements"))?;
                    let f: Vec<usize> = row
                        .split_whitespace()
                        .map(|t| t.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(l, "bad integer in element line"))?;
                    if f.len() < 3 {
                        return Err(err(l, "element line too short"));
                    }
                    let kind = f[1] as u32;
                    let ntags = f[2];
                    let n_nodes = match kind {
                        POINT => 1,
                        LINE => 2,
                        QUAD => 4,
                        HEX => 8,
                        other => return Err(Error::UnsupportedElementType(other)),
                    };
                    if f.len() != 3 + ntags + n_nodes {
                        return Err(err(l, "element line has wrong number of fields"));
                    }
                    let tag = if ntags > 0 { f[3] as u32 } else { 0 };
                    elements.push(Element { kind, tag, nodes: f[3 + ntags..].to_vec() });
                }
                i = expect_end(&lines, i + 2 + n, "$EndElements").map_err(|l| err(l, "missing $EndElements"))?;
                seen_elements = true;
            }
            "" => i += 1,
            s if s.starts_with('$') => {
                // skip unknown sections such as $PhysicalNames
                let end = format!("$End{}", &s[1..]);
                i = expect_end_anywhere(&lines, i + 1, &end).map_err(|l| err(l, "unterminated section"))?;
            }
            _ => return Err(err(i, "unexpected content outside a section")),
        }
    }
    if !seen_nodes || !seen_elements {
        return Err(err(lines.len().saturating_sub(1), "file needs $Nodes and $Elements sections"));
    }

    let dim = if elements.iter().any(|e| e.kind == HEX) { 3 } else { 2 };
    let (cell_kind, face_kind, perm): (u32, u32, &[usize]) =
        if dim == 3 { (HEX, QUAD, &HEX_TO_LEX) } else { (QUAD, LINE, &QUAD_TO_LEX) };

    let mut index_of = HashMap::with_capacity(nodes.len());
    let mut vertices = Vec::with_capacity(nodes.len());
    for (id, x) in &nodes {
        index_of.insert(*id, vertices.len());
        vertices.push(if dim == 2 { [x[0], x[1], 0.0] } else { *x });
    }
    let lookup = |id: usize| index_of.get(&id).copied().ok_or_else(|| err(0, &format!("element references unknown node {id}")));

    let mut cells = Vec::new();
    let mut face_tags: Vec<(Vec<usize>, u32)> = Vec::new();
    for e in &elements {
        if e.kind == cell_kind {
            for &p in perm {
                cells.push(lookup(e.nodes[p])?);
            }
        } else if e.kind == face_kind {
            let mut key = e.nodes.iter().map(|&id| lookup(id)).collect::<Result<Vec<_>>>()?;
            key.sort_unstable();
            face_tags.push((key, e.tag));
        } else if e.kind != POINT && !(dim == 3 && e.kind == LINE) {
            return Err(Error::UnsupportedElementType(e.kind));
        }
    }
    // drop nodes that are not used by any cell (e.g. geometry points)
    let mut used = vec![false; vertices.len()];
    for &v in &cells {
        used[v] = true;
    }
    if used.iter().any(|u| !u) {
        let mut remap = vec![usize::MAX; vertices.len()];
        let mut kept = Vec::new();
        for (v, x) in vertices.iter().enumerate() {
            if used[v] {
                remap[v] = kept.len();
                kept.push(*x);
            }
        }
        vertices = kept;
        for c in cells.iter_mut() {
            *c = remap[*c];
        }
        for (key, _) in face_tags.iter_mut() {
            for v in key.iter_mut() {
                *v = remap[*v];
            }
        }
    }

    // boundary faces follow the order of the boundary elements in the file;
    // untagged boundary faces get id 0 and come last
    let mut topo = Mesh::from_cells(dim, vertices.clone(), cells.clone(), |_| 0)?;
    let mut by_key: HashMap<Vec<usize>, (usize, u8)> = HashMap::new();
    for f in topo.boundary_faces() {
        by_key.insert(topo.face_key(f.cell, f.face), (f.cell, f.face));
    }
    let mut faces = Vec::new();
    for (key, tag) in &face_tags {
        if let Some((cell, face)) = by_key.remove(key) {
            faces.push(BoundaryFace { cell, face, id: *tag });
        }
    }
    let mut rest: Vec<(usize, u8)> = by_key.into_values().collect();
    rest.sort_unstable();
    faces.extend(rest.into_iter().map(|(cell, face)| BoundaryFace { cell, face, id: 0 }));
    topo.boundary_faces = faces;
    topo.validate()?;
    Ok(topo)
}

fn parse_field(line: Option<&str>) -> Option<usize> {
    line?.trim().parse().ok()
}

fn expect_end(lines: &[&str], at: usize, end: &str) -> std::result::Result<usize, usize> {
    match lines.get(at) {
        Some(l) if l.trim() == end => Ok(at + 1),
        _ => Err(at),
    }
}

fn expect_end_anywhere(lines: &[&str], from: usize, end: &str) -> std::result::Result<usize, usize> {
    (from..lines.len()).find(|&l| lines[l].trim() == end).map(|l| l + 1).ok_or(from)
}

/// Serializes a mesh; boundary faces become line (2D) or quad (3D) elements
/// with their boundary id as physical tag.
pub fn write_msh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_msh_string(mesh))?;
    Ok(())
}

pub(crate) fn to_msh_string(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, x) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {} {} {}", i + 1, x[0], x[1], x[2]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.boundary_faces().len() + mesh.n_cells());
    let mut id = 1;
    let (face_kind, cell_kind, perm): (u32, u32, &[usize]) =
        if dim == 3 { (QUAD, HEX, &HEX_TO_LEX) } else { (LINE, QUAD, &QUAD_TO_LEX) };
    for f in mesh.boundary_faces() {
        let vs = mesh.cell_vertices(f.cell);
        let local = face_vertices(dim, f.face);
        // face vertices are lexicographic in the face; reorder to a cycle for quads
        let order: Vec<usize> = if dim == 3 { vec![local[0], local[1], local[3], local[2]] } else { local };
        let nodes: Vec<String> = order.iter().map(|&l| (vs[l] + 1).to_string()).collect();
        let _ = writeln!(s, "{id} {face_kind} 2 {} {} {}", f.id, f.id, nodes.join(" "));
        id += 1;
    }
    for cell in 0..mesh.n_cells() {
        let vs = mesh.cell_vertices(cell);
        // inverse of the gmsh->lex permutation is the permutation itself
        let nodes: Vec<String> = perm.iter().map(|&l| (vs[l] + 1).to_string()).collect();
        let _ = writeln!(s, "{id} {cell_kind} 2 0 1 {}", nodes.join(" "));
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

//! Legacy ASCII VTK output on the unmerged P2 nodes (quadratic triangles).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::TaylorHoodSpace;

const QUADRATIC_TRIANGLE: u8 = 22;

/// Renders velocity, and pressure if given, as an unstructured grid.
/// Periodic copies of a node get their own point with the shared value.
pub fn render_vtk(space: &TaylorHoodSpace, u: &[f64], p: Option<&[f64]>, title: &str) -> Result<String> {
    space.check_velocity(u)?;
    if let Some(p) = p {
        space.check_pressure(p)?;
    }
    let mesh = space.mesh();
    let nv = mesh.num_vertices();
    let verts = mesh.vertices();
    let edges = mesh.edges();
    let node_of_raw = space.node_of_raw();
    let n_raw = nv + edges.len();
    let pv = space.pressure_node_of_vertex();

    let mut s = String::new();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n_raw} double");
    for v in verts {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", v[0], v[1]);
    }
    for &[a, b] in edges {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", 0.5 * (verts[a][0] + verts[b][0]), 0.5 * (verts[a][1] + verts[b][1]));
    }
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "CELLS {nt} {}", 7 * nt);
    for (t, e) in mesh.triangles().iter().zip(mesh.triangle_edges()) {
        let _ = writeln!(s, "6 {} {} {} {} {} {}", t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "{QUADRATIC_TRIANGLE}");
    }
    let _ = writeln!(s, "POINT_DATA {n_raw}\nVECTORS velocity double");
    for &node in node_of_raw {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", u[2 * node], u[2 * node + 1]);
    }
    if let Some(p) = p {
        let _ = writeln!(s, "SCALARS pressure double 1\nLOOKUP_TABLE default");
        for v in 0..nv {
            let _ = writeln!(s, "{:.16e}", p[pv[v]]);
        }
        for &[a, b] in edges {
            let _ = writeln!(s, "{:.16e}", 0.5 * (p[pv[a]] + p[pv[b]]));
        }
    }
    Ok(s)
}

pub fn write_vtk(path: &Path, space: &TaylorHoodSpace, u: &[f64], p: Option<&[f64]>, title: &str) -> Result<()> {
    let text = render_vtk(space, u, p, title)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::taylor_green;

    #[test]
    fn counts_and_values() {
        let setup = taylor_green(3, 0.01).unwrap();
        let s = &setup.space;
        let u = s.interpolate(|x, y| [x, -y]);
        let p = s.interpolate_pressure(|x, _| x);
        let text = render_vtk(s, &u, Some(&p), "tg").unwrap();
        let m = s.mesh();
        let n_raw = m.num_vertices() + m.num_edges();
        assert!(text.contains(&format!("POINTS {n_raw} double")));
        assert!(text.contains(&format!("CELLS {} {}", m.num_triangles(), 7 * m.num_triangles())));
        let lines: Vec<&str> = text.lines().collect();
        let pts = lines.iter().position(|l| l.starts_with("POINTS")).unwrap() + 1;
        let vel = lines.iter().position(|l| l.starts_with("VECTORS")).unwrap() + 1;
        let pre = lines.iter().position(|l| l.starts_with("LOOKUP_TABLE")).unwrap() + 1;
        for i in 0..n_raw {
            let xy: Vec<f64> = lines[pts + i].split(' ').map(|v| v.parse().unwrap()).collect();
            let uv: Vec<f64> = lines[vel + i].split(' ').map(|v| v.parse().unwrap()).collect();
            let pp: f64 = lines[pre + i].parse().unwrap();
            // periodic copies carry the partner's value, so compare only interior points
            if xy[0] > 0.0 && xy[0] < 2.0 && xy[1] > 0.0 && xy[1] < 2.0 {
                assert!((uv[0] - xy[0]).abs() < 1e-12 && (uv[1] + xy[1]).abs() < 1e-12);
                if i < m.num_vertices() {
                    assert!((pp - xy[0]).abs() < 1e-12);
                }
            }
        }
        let nv = m.num_vertices();
        for (k, &[a, b]) in m.edges().iter().enumerate() {
            let val = |i: usize| lines[pre + i].parse::<f64>().unwrap();
            assert_eq!(val(nv + k), 0.5 * (val(a) + val(b)));
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        let setup = taylor_green(2, 0.01).unwrap();
        assert!(render_vtk(&setup.space, &[0.0; 3], None, "x").is_err());
    }
}

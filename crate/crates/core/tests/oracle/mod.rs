//! Reference evaluation of Taylor-Hood velocity fields, written against the
//! raw mesh only: barycentric P2 shape functions and a collapsed tensor
//! Gauss rule, sharing nothing with the library's element tables.

use nsrom::fem::TaylorHoodSpace;

/// Value and gradient `g[a][b] = d u_a / d x_b` at a point.
#[derive(Debug, Clone, Copy)]
pub struct Local {
    pub v: [f64; 2],
    pub g: [[f64; 2]; 2],
}

impl Local {
    pub fn div(&self) -> f64 {
        self.g[0][0] + self.g[1][1]
    }

    pub fn curl(&self) -> f64 {
        self.g[1][0] - self.g[0][1]
    }
}

const GL_X: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Points `(xi, eta)` and weights on the reference triangle, exact to
/// degree 8.
fn collapsed_rule() -> Vec<([f64; 2], f64)> {
    let mut out = Vec::with_capacity(25);
    for (sx, sw) in GL_X.iter().zip(GL_W) {
        let s = 0.5 * (1.0 + sx);
        for (tx, tw) in GL_X.iter().zip(GL_W) {
            let t = 0.5 * (1.0 + tx);
            out.push(([s, t * (1.0 - s)], 0.25 * sw * tw * (1.0 - s)));
        }
    }
    out
}

/// `sum_T int_T f(x, fields)` over the mesh.
pub fn integrate(space: &TaylorHoodSpace, fields: &[&[f64]], f: impl Fn([f64; 2], &[Local]) -> f64) -> f64 {
    let mesh = space.mesh();
    let verts = mesh.vertices();
    let nv = mesh.num_vertices();
    let raw = space.node_of_raw();
    let rule = collapsed_rule();
    let mut total = 0.0;
    let mut locals = vec![Local { v: [0.0; 2], g: [[0.0; 2]; 2] }; fields.len()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = tri.map(|v| verts[v]);
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let gl = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        // (node, i, j): vertex basis when i == j, edge bubble otherwise
        let mut basis = Vec::with_capacity(6);
        for i in 0..3 {
            basis.push((raw[tri[i]], i, i));
        }
        for &e in &mesh.triangle_edges()[t] {
            let [a, b] = mesh.edges()[e];
            let ia = tri.iter().position(|&v| v == a).unwrap();
            let ib = tri.iter().position(|&v| v == b).unwrap();
            basis.push((raw[nv + e], ia, ib));
        }
        for &([xi, eta], w) in &rule {
            let l = [1.0 - xi - eta, xi, eta];
            let x =
                [l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0], l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1]];
            for (loc, u) in locals.iter_mut().zip(fields) {
                *loc = Local { v: [0.0; 2], g: [[0.0; 2]; 2] };
                for &(node, i, j) in &basis {
                    let (phi, dphi) = if i == j {
                        (l[i] * (2.0 * l[i] - 1.0), gl[i].map(|d| (4.0 * l[i] - 1.0) * d))
                    } else {
                        (
                            4.0 * l[i] * l[j],
                            [4.0 * (l[j] * gl[i][0] + l[i] * gl[j][0]), 4.0 * (l[j] * gl[i][1] + l[i] * gl[j][1])],
                        )
                    };
                    for c in 0..2 {
                        let coef = u[2 * node + c];
                        loc.v[c] += coef * phi;
                        loc.g[c][0] += coef * dphi[0];
                        loc.g[c][1] += coef * dphi[1];
                    }
                }
            }
            total += w * det.abs() * f(x, &locals);
        }
    }
    total
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `(v . grad w)` with `w` given by its gradient.
fn adv(v: [f64; 2], g: &[[f64; 2]; 2]) -> [f64; 2] {
    [g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1]]
}

/// `(u . grad v, w)`
pub fn conv_density(u: &Local, v: &Local, w: &Local) -> f64 {
    dot(adv(u.v, &v.g), w.v)
}

/// Trilinear forms written out from their definitions.
pub fn trilinear(form: nsrom::fem::NonlinearForm, u: &Local, v: &Local, w: &Local) -> f64 {
    use nsrom::fem::NonlinearForm::*;
    match form {
        Convective => conv_density(u, v, w),
        Skew => conv_density(u, v, w) + 0.5 * u.div() * dot(v.v, w.v),
        Rotational => {
            let om = u.curl();
            dot([-om * v.v[1], om * v.v[0]], w.v)
        }
        Emac => {
            // 2 D(v) u = grad v u + grad v^T u
            let gt = [v.g[0][0] * u.v[0] + v.g[1][0] * u.v[1], v.g[0][1] * u.v[0] + v.g[1][1] * u.v[1]];
            conv_density(u, v, w) + dot(gt, w.v) + u.div() * dot(v.v, w.v)
        }
    }
}

pub fn trilinear_value(
    form: nsrom::fem::NonlinearForm,
    space: &TaylorHoodSpace,
    u: &[f64],
    v: &[f64],
    w: &[f64],
) -> f64 {
    integrate(space, &[u, v, w], |_, f| trilinear(form, &f[0], &f[1], &f[2]))
}

/// Full H1 norm.
pub fn h1_norm(space: &TaylorHoodSpace, u: &[f64]) -> f64 {
    integrate(space, &[u], |_, f| {
        let g = f[0].g;
        dot(f[0].v, f[0].v) + g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]
    })
    .sqrt()
}

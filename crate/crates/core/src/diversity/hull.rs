//! Incremental 3-D convex hull; only the enclosed volume is exposed.

type P3 = [f64; 3];

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: P3,
    offset: f64,
}

impl Face {
    fn new(pts: &[P3], v: [usize; 3]) -> Self {
        let n = cross(sub(pts[v[1]], pts[v[0]]), sub(pts[v[2]], pts[v[0]]));
        let len = norm(n);
        let normal = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { [0.0; 3] };
        Self {
            v,
            normal,
            offset: dot(normal, pts[v[0]]),
        }
    }

    fn distance(&self, p: P3) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Hull volume, or `None` when the points span less than three dimensions.
pub(crate) fn hull_volume(pts: &[P3]) -> Option<f64> {
    if pts.len() < 4 {
        return None;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = norm(sub(hi, lo));
    if !(scale > 0.0) {
        return None;
    }
    let eps = 1e-10 * scale;

    let i0 = 0;
    let i1 = (0..pts.len()).max_by(|&a, &b| cmp(norm(sub(pts[a], pts[i0])), norm(sub(pts[b], pts[i0]))))?;
    let axis = sub(pts[i1], pts[i0]);
    let axis_len = norm(axis);
    if axis_len <= eps {
        return None;
    }
    let line_dist = |p: P3| norm(cross(sub(p, pts[i0]), axis)) / axis_len;
    let i2 = (0..pts.len()).max_by(|&a, &b| cmp(line_dist(pts[a]), line_dist(pts[b])))?;
    if line_dist(pts[i2]) <= eps {
        return None;
    }
    let base = Face::new(pts, [i0, i1, i2]);
    let i3 = (0..pts.len()).max_by(|&a, &b| cmp(base.distance(pts[a]).abs(), base.distance(pts[b]).abs()))?;
    if base.distance(pts[i3]).abs() <= eps {
        return None;
    }

    let inside = {
        let s = [pts[i0], pts[i1], pts[i2], pts[i3]];
        [0, 1, 2].map(|k| (s[0][k] + s[1][k] + s[2][k] + s[3][k]) / 4.0)
    };
    let oriented = |v: [usize; 3]| {
        let f = Face::new(pts, v);
        if f.distance(inside) > 0.0 {
            Face::new(pts, [v[0], v[2], v[1]])
        } else {
            f
        }
    };
    let mut faces: Vec<Face> = [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]]
        .into_iter()
        .map(oriented)
        .collect();

    for (idx, &p) in pts.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&idx) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.distance(p) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut lit_edges = std::collections::HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for e in 0..3 {
                lit_edges.insert((f.v[e], f.v[(e + 1) % 3]));
            }
        }
        let mut next = Vec::with_capacity(faces.len());
        let mut horizon = Vec::new();
        for (f, &vis) in faces.iter().zip(&visible) {
            if !vis {
                next.push(*f);
                continue;
            }
            for e in 0..3 {
                let (a, b) = (f.v[e], f.v[(e + 1) % 3]);
                if !lit_edges.contains(&(b, a)) {
                    horizon.push((a, b));
                }
            }
        }
        for (a, b) in horizon {
            next.push(Face::new(pts, [a, b, idx]));
        }
        faces = next;
    }

    let volume: f64 = faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.v.map(|i| sub(pts[i], inside));
            dot(a, cross(b, c)) / 6.0
        })
        .sum();
    Some(volume.abs())
}

fn cmp(a: f64, b: f64) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_tetrahedron() {
        let v = hull_volume(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn cube_with_interior_points() {
        let mut pts: Vec<P3> = (0..8).map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]).collect();
        assert!((hull_volume(&pts).unwrap() - 1.0).abs() < 1e-14);
        pts.extend([[0.5, 0.5, 0.5], [0.1, 0.9, 0.3], [0.99, 0.01, 0.5]]);
        pts.rotate_left(3);
        assert!((hull_volume(&pts).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coplanar_points_are_degenerate() {
        let pts: Vec<P3> = (0..10).map(|i| [i as f64, (i * i) as f64, 0.0]).collect();
        assert_eq!(hull_volume(&pts), None);
        assert_eq!(hull_volume(&[[1.0; 3]; 6]), None);
    }
}

//! Half-edge connectivity of a valid [`TorusMesh`].
//!
//! Half-edge `h = 3t + k` runs from corner `k` to corner `k+1` of triangle `t`,
//! so the triangle lies to its left.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{Shift, TorusMesh};

pub struct HalfEdges<'a> {
    pub mesh: &'a TorusMesh,
    twin: Vec<u32>,
    /// One outgoing half-edge per vertex.
    out: Vec<u32>,
}

impl<'a> HalfEdges<'a> {
    pub fn build(mesh: &'a TorusMesh) -> Result<Self> {
        let nh = mesh.triangles.len() * 3;
        let mut by_edge: HashMap<(u32, u32), u32> = HashMap::with_capacity(nh);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if by_edge.insert(e, (3 * t + k) as u32).is_some() {
                    return Err(Error::Computation(format!(
                        "mesh not consistently oriented at edge {e:?}"
                    )));
                }
            }
        }
        let mut twin = vec![u32::MAX; nh];
        let mut out = vec![u32::MAX; mesh.vertices.len()];
        for (&(a, b), &h) in &by_edge {
            match by_edge.get(&(b, a)) {
                Some(&g) => twin[h as usize] = g,
                None => {
                    return Err(Error::Computation(format!("mesh has boundary edge ({a}, {b})")));
                }
            }
            let o = &mut out[a as usize];
            if *o == u32::MAX || h < *o {
                *o = h;
            }
        }
        Ok(HalfEdges { mesh, twin, out })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.twin.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.twin.is_empty()
    }

    #[inline]
    pub fn twin(&self, h: u32) -> u32 {
        self.twin[h as usize]
    }

    #[inline]
    pub fn next(&self, h: u32) -> u32 {
        let t = h / 3;
        3 * t + (h % 3 + 1) % 3
    }

    #[inline]
    pub fn prev(&self, h: u32) -> u32 {
        let t = h / 3;
        3 * t + (h % 3 + 2) % 3
    }

    #[inline]
    pub fn tri(&self, h: u32) -> u32 {
        h / 3
    }

    #[inline]
    pub fn origin(&self, h: u32) -> u32 {
        self.mesh.triangles[(h / 3) as usize][(h % 3) as usize]
    }

    #[inline]
    pub fn dest(&self, h: u32) -> u32 {
        self.mesh.triangles[(h / 3) as usize][((h % 3 + 1) % 3) as usize]
    }

    #[inline]
    pub fn shift(&self, h: u32) -> Shift {
        self.mesh.shifts[(h / 3) as usize][(h % 3) as usize]
    }

    /// Next outgoing half-edge counter-clockwise around the origin.
    #[inline]
    pub fn rot_ccw(&self, h: u32) -> u32 {
        self.twin(self.prev(h))
    }

    pub fn outgoing(&self, v: u32) -> u32 {
        self.out[v as usize]
    }

    /// Outgoing half-edges of `v` in counter-clockwise order, starting at `outgoing(v)`.
    pub fn star(&self, v: u32) -> Vec<u32> {
        let start = self.out[v as usize];
        let mut res = Vec::with_capacity(8);
        if start == u32::MAX {
            return res;
        }
        let mut h = start;
        loop {
            res.push(h);
            h = self.rot_ccw(h);
            if h == start {
                break;
            }
        }
        res
    }

    /// Smaller id of the two half-edges of an undirected edge.
    #[inline]
    pub fn edge_key(&self, h: u32) -> u32 {
        h.min(self.twin(h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::builtin_model;
    use crate::mesh::extract_isosurface;

    #[test]
    fn twin_and_rotation_are_consistent() {
        let m = extract_isosurface(&builtin_model("c3").unwrap(), 0.0, 16).unwrap();
        let he = HalfEdges::build(&m).unwrap();
        for h in 0..he.len() as u32 {
            let g = he.twin(h);
            assert_eq!(he.twin(g), h);
            assert_eq!(he.origin(g), he.dest(h));
            assert_eq!(he.dest(g), he.origin(h));
            let s = he.shift(h);
            let r = he.shift(g);
            assert_eq!([s[0] + r[0], s[1] + r[1], s[2] + r[2]], [0, 0, 0]);
            assert_eq!(he.origin(he.rot_ccw(h)), he.origin(h));
        }
        let mut total = 0;
        for v in 0..m.vertices.len() as u32 {
            let star = he.star(v);
            assert!(star.len() >= 3);
            total += star.len();
        }
        assert_eq!(total, he.len());
    }
}

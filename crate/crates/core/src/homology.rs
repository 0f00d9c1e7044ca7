//! Exact integer linear algebra and homology of closed surfaces in the 3-torus.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mesh::{SurfaceComponent, TorusMesh};
use crate::topology::HalfEdges;

/// Dense matrix of arbitrary-precision integers, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds from rows of machine integers; all rows must have length `cols`.
    pub fn from_rows<R: AsRef<[i64]>>(cols: usize, rows: &[R]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::argument(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            for (j, &x) in r.iter().enumerate() {
                m[(i, j)] = BigInt::from(x);
            }
        }
        Ok(m)
    }

    fn from_big_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            debug_assert_eq!(r.len(), cols);
            data.extend(r);
        }
        IntegerMatrix { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix> {
        if self.cols != other.rows {
            return Err(Error::argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::argument("determinant of a non-square matrix"));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.row_vecs();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().map(|d| d.abs().is_one()).unwrap_or(false)
    }

    pub fn rank(&self) -> usize {
        hermite_rows(self.row_vecs(), self.cols).len()
    }

    /// Entries as machine integers, or `None` on overflow.
    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IntegerMatrix {
    /// One CSV row per matrix row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `u · m · v = d` with `d` diagonal, each diagonal entry dividing the next.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
    pub rank: usize,
}

impl SmithForm {
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d[(i, i)].clone()).collect()
    }
}

pub fn smith_normal_form(m: &IntegerMatrix) -> SmithForm {
    let (r, c) = (m.rows, m.cols);
    let mut a = m.row_vecs();
    let mut u = IntegerMatrix::identity(r).row_vecs();
    // Columns of v are stored as rows of vt.
    let mut vt = IntegerMatrix::identity(c).row_vecs();

    fn add_row(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        let (s, d) = if src < dst {
            let (lo, hi) = a.split_at_mut(dst);
            (&lo[src], &mut hi[0])
        } else {
            let (lo, hi) = a.split_at_mut(src);
            (&hi[0], &mut lo[dst])
        };
        for (x, y) in d.iter_mut().zip(s.iter()) {
            if !y.is_zero() {
                *x += q * y;
            }
        }
    }
    fn add_col(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for row in a.iter_mut() {
            if !row[src].is_zero() {
                let t = q * &row[src];
                row[dst] += t;
            }
        }
    }
    fn swap_cols(a: &mut [Vec<BigInt>], i: usize, j: usize) {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }

    let mut rank = 0;
    for t in 0..r.min(c) {
        let pick = |a: &[Vec<BigInt>]| {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    if !a[i][j].is_zero()
                        && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            best
        };
        let Some((pi, pj)) = pick(&a) else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut a, t, pj);
        vt.swap(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..r {
                if !a[i][t].is_zero() {
                    let q = -(&a[i][t] / &a[t][t]);
                    add_row(&mut a, i, t, &q);
                    add_row(&mut u, i, t, &q);
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..c {
                if !a[t][j].is_zero() {
                    let q = -(&a[t][j] / &a[t][t]);
                    add_col(&mut a, j, t, &q);
                    add_row(&mut vt, j, t, &q);
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // Bring the smallest remaining entry of row t / column t to the pivot.
                let mut best = (t, t);
                for i in t + 1..r {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..c {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    a.swap(t, best.0);
                    u.swap(t, best.0);
                } else if best.1 != t {
                    swap_cols(&mut a, t, best.1);
                    vt.swap(t, best.1);
                }
                continue;
            }
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    add_row(&mut a, t, i, &one);
                    add_row(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        rank += 1;
    }
    let v = IntegerMatrix::from_big_rows(c, vt).transpose();
    SmithForm {
        u: IntegerMatrix::from_big_rows(r, u),
        d: IntegerMatrix::from_big_rows(c, a),
        v,
        rank,
    }
}

/// Basis of the integer kernel {x : m·x = 0}, one vector per row.
pub fn integer_kernel(m: &IntegerMatrix) -> IntegerMatrix {
    let snf = smith_normal_form(m);
    let n = m.cols;
    let rows: Vec<Vec<BigInt>> =
        (snf.rank..n).map(|j| (0..n).map(|i| snf.v[(i, j)].clone()).collect()).collect();
    IntegerMatrix::from_big_rows(n, rows)
}

/// Row-style Hermite normal form; zero rows dropped.
fn hermite_rows(mut a: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let nrows = a.len();
    let mut r = 0;
    for col in 0..cols {
        if r == nrows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..nrows {
                if !a[i][col].is_zero() && best.map_or(true, |b| a[i][col].abs() < a[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..nrows {
                if !a[i][col].is_zero() {
                    let q = &a[i][col] / &a[r][col];
                    let pivot = a[r].clone();
                    for (x, y) in a[i].iter_mut().zip(pivot.iter()) {
                        *x -= &q * y;
                    }
                    if !a[i][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][col].is_zero() {
            continue;
        }
        if a[r][col].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot = a[r].clone();
        for i in 0..r {
            let q = a[i][col].div_floor(&pivot[col]);
            if !q.is_zero() {
                for (x, y) in a[i].iter_mut().zip(pivot.iter()) {
                    *x -= &q * y;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a.retain(|row| row.iter().any(|x| !x.is_zero()));
    a
}

/// A subgroup of ℤⁿ given by generators in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sublattice {
    ambient: usize,
    basis: IntegerMatrix,
}

impl Sublattice {
    pub fn from_generators(ambient: usize, generators: &IntegerMatrix) -> Result<Self> {
        if generators.rows > 0 && generators.cols != ambient {
            return Err(Error::argument(format!(
                "generators have {} columns, ambient rank is {ambient}",
                generators.cols
            )));
        }
        let rows = hermite_rows(generators.row_vecs(), ambient);
        Ok(Sublattice { ambient, basis: IntegerMatrix::from_big_rows(ambient, rows) })
    }

    pub fn from_i64(ambient: usize, generators: &[Vec<i64>]) -> Result<Self> {
        Self::from_generators(ambient, &IntegerMatrix::from_rows(ambient, generators)?)
    }

    pub fn full(ambient: usize) -> Self {
        Sublattice { ambient, basis: IntegerMatrix::identity(ambient) }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &IntegerMatrix {
        &self.basis
    }

    pub fn generators_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.basis.to_i64()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let mut rows = self.basis.row_vecs();
        rows.push(v.iter().map(|&x| BigInt::from(x)).collect());
        hermite_rows(rows, self.ambient) == self.basis.row_vecs()
    }
}

/// Coprime vector orthogonal to a rank-2 sublattice of ℤ³, first nonzero entry positive.
pub fn annihilator_direction(sub: &Sublattice) -> Result<[i64; 3]> {
    if sub.ambient != 3 || sub.rank() != 2 {
        return Err(Error::argument(format!(
            "annihilator needs a rank-2 sublattice of Z^3, got rank {} in Z^{}",
            sub.rank(),
            sub.ambient
        )));
    }
    let a = sub.basis.row(0);
    let b = sub.basis.row(1);
    let c = [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ];
    let g = c[0].gcd(&c[1]).gcd(&c[2]);
    let mut out = [0i64; 3];
    for k in 0..3 {
        out[k] = (&c[k] / &g)
            .to_i64()
            .ok_or_else(|| Error::Computation("annihilator entry overflows i64".into()))?;
    }
    Ok(normalize_sign(out))
}

pub fn normalize_sign(v: [i64; 3]) -> [i64; 3] {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => [-v[0], -v[1], -v[2]],
        _ => v,
    }
}

pub fn gcd3(v: [i64; 3]) -> i64 {
    v[0].gcd(&v[1]).gcd(&v[2])
}

/// A closed walk of half-edges on one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceLoop {
    pub component: usize,
    pub halfedges: Vec<u32>,
    pub class3: [i64; 3],
}

impl SurfaceLoop {
    pub fn new(he: &HalfEdges, component: usize, halfedges: Vec<u32>) -> Result<Self> {
        if halfedges.is_empty() {
            return Err(Error::argument("empty loop"));
        }
        for w in 0..halfedges.len() {
            let a = halfedges[w];
            let b = halfedges[(w + 1) % halfedges.len()];
            if he.dest(a) != he.origin(b) {
                return Err(Error::argument(format!("walk breaks between half-edges {a} and {b}")));
            }
        }
        let class3 = loop_class(he, &halfedges);
        Ok(SurfaceLoop { component, halfedges, class3 })
    }

    pub fn reversed(&self, he: &HalfEdges) -> SurfaceLoop {
        let halfedges: Vec<u32> = self.halfedges.iter().rev().map(|&h| he.twin(h)).collect();
        SurfaceLoop {
            component: self.component,
            halfedges,
            class3: [-self.class3[0], -self.class3[1], -self.class3[2]],
        }
    }

    /// Concatenation; both loops must start at the same vertex.
    pub fn concat(&self, other: &SurfaceLoop, he: &HalfEdges) -> Result<SurfaceLoop> {
        if self.component != other.component
            || he.origin(self.halfedges[0]) != he.origin(other.halfedges[0])
        {
            return Err(Error::argument("loops do not share a base point"));
        }
        let mut h = self.halfedges.clone();
        h.extend_from_slice(&other.halfedges);
        Ok(SurfaceLoop {
            component: self.component,
            halfedges: h,
            class3: [
                self.class3[0] + other.class3[0],
                self.class3[1] + other.class3[1],
                self.class3[2] + other.class3[2],
            ],
        })
    }

    /// Dual 1-cochain of the loop pushed off to its left.
    pub fn cochain(&self, he: &HalfEdges) -> Cochain {
        let n = self.halfedges.len();
        let mut c = Cochain::default();
        for i in 0..n {
            let h_in = self.halfedges[i];
            let h_out = self.halfedges[(i + 1) % n];
            let stop = he.twin(h_in);
            let mut x = he.rot_ccw(h_out);
            if h_out == stop {
                // Backtrack: the push-off goes once around the vertex.
                x = he.rot_ccw(h_out);
                while x != h_out {
                    c.cross_into(he, x);
                    x = he.rot_ccw(x);
                }
                continue;
            }
            while x != stop {
                c.cross_into(he, x);
                x = he.rot_ccw(x);
            }
        }
        c
    }
}

/// Sum of lattice shifts along a walk.
pub fn loop_class(he: &HalfEdges, halfedges: &[u32]) -> [i64; 3] {
    let mut c = [0i64; 3];
    for &h in halfedges {
        let s = he.shift(h);
        for a in 0..3 {
            c[a] += s[a] as i64;
        }
    }
    c
}

/// Sparse dual 1-cochain: a list of (half-edge, weight) entries, duplicates summed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cochain {
    pub entries: Vec<(u32, i64)>,
}

impl Cochain {
    /// Records a dual crossing from the triangle left of `h` into the one left of `twin(h)`.
    #[inline]
    pub fn cross_into(&mut self, he: &HalfEdges, h: u32) {
        self.entries.push((he.twin(h), 1));
        self.entries.push((h, -1));
    }

    pub fn to_map(&self) -> HashMap<u32, i64> {
        let mut m = HashMap::with_capacity(self.entries.len());
        for &(h, w) in &self.entries {
            *m.entry(h).or_insert(0) += w;
        }
        m.retain(|_, v| *v != 0);
        m
    }

    /// Evaluation on a walk.
    pub fn evaluate(&self, halfedges: &[u32]) -> i64 {
        let m = self.to_map();
        halfedges.iter().map(|h| m.get(h).copied().unwrap_or(0)).sum()
    }
}

/// Signed intersection number of two loops on one component.
pub fn intersection_number(he: &HalfEdges, a: &SurfaceLoop, b: &SurfaceLoop) -> Result<i64> {
    if a.component != b.component {
        return Err(Error::argument(format!(
            "loops lie on different components ({} and {})",
            a.component, b.component
        )));
    }
    Ok(b.cochain(he).evaluate(&a.halfedges))
}

/// Canonical symplectic basis of H₁ of one component.
#[derive(Clone, Debug)]
pub struct CycleBasis {
    pub component: usize,
    pub root: u32,
    /// Tree–cotree generators, all based at `root`.
    pub generators: Vec<SurfaceLoop>,
    pub generator_pairing: IntegerMatrix,
    /// Row j expresses canonical loop j in the generators.
    pub change: IntegerMatrix,
    /// Canonical loops as closed walks at `root`.
    pub loops: Vec<SurfaceLoop>,
    /// Pairing of the canonical loops: blocks [[0,1],[−1,0]] along the diagonal.
    pub pairing: IntegerMatrix,
    /// Row j is the ℤ³ class of canonical loop j.
    pub push_forward: IntegerMatrix,
    change_i64: Vec<Vec<i64>>,
    /// half-edge → (generator, multiplicity)
    index: HashMap<u32, Vec<(usize, i64)>>,
}

impl CycleBasis {
    pub fn genus(&self) -> usize {
        self.generators.len() / 2
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    /// Canonical coordinates of the class of a closed dual curve with the given cochain.
    pub fn coordinates(&self, cochain: &Cochain) -> Vec<i64> {
        let n = self.generators.len();
        let mut g = vec![0i64; n];
        for &(h, w) in &cochain.entries {
            if let Some(list) = self.index.get(&h) {
                for &(m, mult) in list {
                    g[m] += w * mult;
                }
            }
        }
        // y_j = I(z_j, γ); x = −Ω y.
        let y: Vec<i64> = (0..n)
            .map(|j| (0..n).map(|m| self.change_i64[j][m] * g[m]).sum())
            .collect();
        let mut x = vec![0i64; n];
        for i in 0..n / 2 {
            x[2 * i] = -y[2 * i + 1];
            x[2 * i + 1] = y[2 * i];
        }
        x
    }

    /// ℤ³ class of canonical coordinates.
    pub fn push(&self, x: &[i64]) -> [i64; 3] {
        let mut out = [0i64; 3];
        for (j, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for a in 0..3 {
                out[a] += c * self.push_forward[(j, a)].to_i64().unwrap_or(0);
            }
        }
        out
    }

    /// Standard symplectic form ω(x, y) in canonical coordinates.
    pub fn omega(x: &[i64], y: &[i64]) -> i64 {
        (0..x.len() / 2).map(|i| x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i]).sum()
    }
}

/// Standard symplectic matrix of size 2g.
pub fn standard_symplectic(n: usize) -> IntegerMatrix {
    let mut m = IntegerMatrix::zeros(n, n);
    for i in 0..n / 2 {
        m[(2 * i, 2 * i + 1)] = BigInt::one();
        m[(2 * i + 1, 2 * i)] = -BigInt::one();
    }
    m
}

struct TreeCotree {
    root: u32,
    /// Generator edges (half-edge ids), ascending.
    generators: Vec<u32>,
    parent: HashMap<u32, u32>,
    lift: HashMap<u32, [i64; 3]>,
}

fn tree_cotree(he: &HalfEdges, triangles: &[u32]) -> Result<TreeCotree> {
    let mesh = he.mesh;
    let mut in_comp = vec![false; mesh.triangles.len()];
    for &t in triangles {
        in_comp[t as usize] = true;
    }
    let root = triangles
        .iter()
        .flat_map(|&t| mesh.triangles[t as usize])
        .min()
        .ok_or_else(|| Error::argument("empty component"))?;
    let mut parent: HashMap<u32, u32> = HashMap::new();
    let mut lift: HashMap<u32, [i64; 3]> = HashMap::new();
    lift.insert(root, [0, 0, 0]);
    let mut tree_edges = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let lv = lift[&v];
        for h in he.star(v) {
            let w = he.dest(h);
            if lift.contains_key(&w) {
                continue;
            }
            let s = he.shift(h);
            lift.insert(w, [lv[0] + s[0] as i64, lv[1] + s[1] as i64, lv[2] + s[2] as i64]);
            parent.insert(w, h);
            tree_edges.insert(he.edge_key(h));
            queue.push_back(w);
        }
    }
    let t0 = *triangles.iter().min().unwrap();
    let mut seen = vec![false; mesh.triangles.len()];
    seen[t0 as usize] = true;
    let mut dual_edges = std::collections::HashSet::new();
    let mut tq = std::collections::VecDeque::from([t0]);
    while let Some(t) = tq.pop_front() {
        for k in 0..3 {
            let h = 3 * t + k;
            let key = he.edge_key(h);
            if tree_edges.contains(&key) {
                continue;
            }
            let t2 = he.tri(he.twin(h));
            if !seen[t2 as usize] {
                seen[t2 as usize] = true;
                dual_edges.insert(key);
                tq.push_back(t2);
            }
        }
    }
    let mut generators = Vec::new();
    for &t in triangles {
        for k in 0..3 {
            let h = 3 * t + k;
            if he.edge_key(h) == h && !tree_edges.contains(&h) && !dual_edges.contains(&h) {
                generators.push(h);
            }
        }
    }
    generators.sort_unstable();
    if generators.len() % 2 != 0 {
        return Err(Error::Computation(format!(
            "tree-cotree left an odd number ({}) of generators",
            generators.len()
        )));
    }
    Ok(TreeCotree { root, generators, parent, lift })
}

impl TreeCotree {
    fn class_of(&self, he: &HalfEdges, h: u32) -> [i64; 3] {
        let lu = self.lift[&he.origin(h)];
        let lw = self.lift[&he.dest(h)];
        let s = he.shift(h);
        [
            lu[0] + s[0] as i64 - lw[0],
            lu[1] + s[1] as i64 - lw[1],
            lu[2] + s[2] as i64 - lw[2],
        ]
    }
}

/// Rank of the ℤ³ classes of the tree–cotree generators (the embedding rank).
pub fn generator_push_forward_rank(he: &HalfEdges, triangles: &[u32]) -> usize {
    let Ok(tc) = tree_cotree(he, triangles) else { return 0 };
    let rows: Vec<Vec<i64>> = tc.generators.iter().map(|&h| tc.class_of(he, h).to_vec()).collect();
    match IntegerMatrix::from_rows(3, &rows) {
        Ok(m) => m.rank(),
        Err(_) => 0,
    }
}

/// Tree–cotree generators followed by a unimodular congruence to the standard
/// symplectic form.
pub fn cycle_basis(he: &HalfEdges, component: &SurfaceComponent) -> Result<CycleBasis> {
    let tc = tree_cotree(he, &component.triangles)?;
    let n = tc.generators.len();
    let path_to = |v: u32| -> Vec<u32> {
        let mut p = Vec::new();
        let mut x = v;
        while x != tc.root {
            let h = tc.parent[&x];
            p.push(h);
            x = he.origin(h);
        }
        p.reverse();
        p
    };
    let mut generators = Vec::with_capacity(n);
    for &h in &tc.generators {
        let mut walk = path_to(he.origin(h));
        walk.push(h);
        let back: Vec<u32> = path_to(he.dest(h)).iter().rev().map(|&g| he.twin(g)).collect();
        walk.extend(back);
        let lp = SurfaceLoop::new(he, component.index, walk)?;
        debug_assert_eq!(lp.class3, tc.class_of(he, h));
        generators.push(lp);
    }

    let cochains: Vec<Cochain> = generators.iter().map(|g| g.cochain(he)).collect();
    let mut j = vec![vec![0i64; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                j[a][b] = cochains[b].evaluate(&generators[a].halfedges);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if j[a][b] != -j[b][a] {
                return Err(Error::Computation("generator pairing is not antisymmetric".into()));
            }
        }
    }
    let generator_pairing = IntegerMatrix::from_rows(n, &j)?;
    let change = symplectic_reduction(&generator_pairing)?;
    let change_i64 = change
        .to_i64()
        .ok_or_else(|| Error::Computation("basis change overflows i64".into()))?;

    let root_walk_start = tc.root;
    let mut loops = Vec::with_capacity(n);
    for row in &change_i64 {
        let mut walk: Vec<u32> = Vec::new();
        let mut class3 = [0i64; 3];
        for (m, &c) in row.iter().enumerate() {
            let piece = if c >= 0 { generators[m].clone() } else { generators[m].reversed(he) };
            for _ in 0..c.unsigned_abs() {
                walk.extend_from_slice(&piece.halfedges);
                for a in 0..3 {
                    class3[a] += piece.class3[a];
                }
            }
        }
        if walk.is_empty() {
            return Err(Error::Computation("canonical loop is trivial".into()));
        }
        debug_assert_eq!(he.origin(walk[0]), root_walk_start);
        loops.push(SurfaceLoop { component: component.index, halfedges: walk, class3 });
    }
    let gen_classes: Vec<Vec<i64>> = generators.iter().map(|g| g.class3.to_vec()).collect();
    let push_forward = change.mul(&IntegerMatrix::from_rows(3, &gen_classes)?)?;

    let mut index: HashMap<u32, Vec<(usize, i64)>> = HashMap::new();
    for (m, g) in generators.iter().enumerate() {
        for &h in &g.halfedges {
            let list = index.entry(h).or_default();
            match list.iter_mut().find(|e| e.0 == m) {
                Some(e) => e.1 += 1,
                None => list.push((m, 1)),
            }
        }
    }

    Ok(CycleBasis {
        component: component.index,
        root: tc.root,
        generators,
        generator_pairing,
        change,
        loops,
        pairing: standard_symplectic(n),
        push_forward,
        change_i64,
        index,
    })
}

/// Unimodular P with P·J·Pᵀ equal to the standard symplectic form, for an
/// antisymmetric unimodular J.
pub fn symplectic_reduction(j: &IntegerMatrix) -> Result<IntegerMatrix> {
    let n = j.rows;
    if j.cols != n || n % 2 != 0 {
        return Err(Error::argument("pairing must be square of even size"));
    }
    let mut m = j.row_vecs();
    let mut p = IntegerMatrix::identity(n).row_vecs();

    // v_t += c · v_s, applied as a congruence.
    fn add(m: &mut [Vec<BigInt>], p: &mut [Vec<BigInt>], t: usize, s: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let rs = p[s].clone();
        for (x, y) in p[t].iter_mut().zip(rs.iter()) {
            *x += c * y;
        }
        let ms = m[s].clone();
        for (x, y) in m[t].iter_mut().zip(ms.iter()) {
            *x += c * y;
        }
        for row in m.iter_mut() {
            let y = row[s].clone();
            row[t] += c * y;
        }
    }
    fn swap(m: &mut [Vec<BigInt>], p: &mut [Vec<BigInt>], a: usize, b: usize) {
        if a == b {
            return;
        }
        p.swap(a, b);
        m.swap(a, b);
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
    fn negate(m: &mut [Vec<BigInt>], p: &mut [Vec<BigInt>], a: usize) {
        for x in p[a].iter_mut() {
            *x = -&*x;
        }
        for x in m[a].iter_mut() {
            *x = -&*x;
        }
        for row in m.iter_mut() {
            row[a] = -&row[a];
        }
    }

    for blk in 0..n / 2 {
        let i = 2 * blk;
        loop {
            let mut best: Option<usize> = None;
            for jj in i + 1..n {
                if !m[i][jj].is_zero() && best.map_or(true, |b| m[i][jj].abs() < m[i][b].abs()) {
                    best = Some(jj);
                }
            }
            let Some(b) = best else {
                return Err(Error::Computation("pairing is degenerate".into()));
            };
            swap(&mut m, &mut p, i + 1, b);
            let mut clean = true;
            for jj in i + 2..n {
                if !m[i][jj].is_zero() {
                    let q = -(&m[i][jj] / &m[i][i + 1]);
                    add(&mut m, &mut p, jj, i + 1, &q);
                    if !m[i][jj].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if !m[i][i + 1].abs().is_one() {
            return Err(Error::Computation(format!(
                "pairing is not unimodular (block entry {})",
                m[i][i + 1]
            )));
        }
        if m[i][i + 1].is_negative() {
            negate(&mut m, &mut p, i + 1);
        }
        for k in i + 2..n {
            let a = -m[k][i + 1].clone();
            let b = m[k][i].clone();
            add(&mut m, &mut p, k, i, &a);
            add(&mut m, &mut p, k, i + 1, &b);
        }
    }
    let pm = IntegerMatrix::from_big_rows(n, p);
    let check = pm.mul(j)?.mul(&pm.transpose())?;
    if check != standard_symplectic(n) {
        return Err(Error::Computation("symplectic reduction failed to converge".into()));
    }
    Ok(pm)
}

/// Classes with zero pairing against every given class (canonical coordinates).
pub fn symplectic_orthogonal(basis: &CycleBasis, classes: &[Vec<i64>]) -> Result<Sublattice> {
    let n = basis.dimension();
    if classes.is_empty() {
        return Ok(Sublattice::full(n));
    }
    let mut rows = Vec::with_capacity(classes.len());
    for c in classes {
        if c.len() != n {
            return Err(Error::argument(format!("class has {} coordinates, expected {n}", c.len())));
        }
        // ω(x, c) = Σ x_{2i} c_{2i+1} − x_{2i+1} c_{2i}
        let mut r = vec![0i64; n];
        for i in 0..n / 2 {
            r[2 * i] = c[2 * i + 1];
            r[2 * i + 1] = -c[2 * i];
        }
        rows.push(r);
    }
    let a = IntegerMatrix::from_rows(n, &rows)?;
    Sublattice::from_generators(n, &integer_kernel(&a))
}

/// Image in ℤ³ of a sublattice of H₁(component).
pub fn push_forward(basis: &CycleBasis, sub: &Sublattice) -> Result<Sublattice> {
    if sub.ambient != basis.dimension() {
        return Err(Error::argument("sublattice does not live in this basis"));
    }
    if sub.rank() == 0 {
        return Ok(Sublattice { ambient: 3, basis: IntegerMatrix::zeros(0, 3) });
    }
    Sublattice::from_generators(3, &sub.basis.mul(&basis.push_forward)?)
}

/// Cycle bases of every component of positive genus, keyed by component index.
pub fn all_cycle_bases(mesh: &TorusMesh, components: &[SurfaceComponent]) -> Result<Vec<Option<CycleBasis>>> {
    let he = HalfEdges::build(mesh)?;
    components
        .iter()
        .map(|c| if c.genus > 0 { cycle_basis(&he, c).map(Some) } else { Ok(None) })
        .collect()
}

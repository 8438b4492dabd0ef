//! Full enumeration of GL_m(F_q) with stable lexicographic ids, the
//! distinguished subgroups (upper unitriangular U, mirabolic P), coset
//! tables for U\G and U\P with canonical representatives, and the
//! special elements w_n, ε_n, s_n.

use std::collections::HashMap;

use crate::algebra::{inv_mod, is_supported_prime};
use crate::{Error, Result};

/// An invertible m×m matrix over F_q, entries row-major and reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub m: usize,
    pub q: u8,
    pub entries: Vec<u8>,
}

impl GroupElement {
    pub fn identity(m: usize, q: u8) -> Self {
        let mut entries = vec![0u8; m * m];
        for i in 0..m {
            entries[i * m + i] = 1;
        }
        Self { m, q, entries }
    }

    pub fn from_rows(rows: &[&[i64]], q: u8) -> Self {
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * m);
        for r in rows {
            assert_eq!(r.len(), m);
            for &x in *r {
                entries.push(x.rem_euclid(i64::from(q)) as u8);
            }
        }
        Self { m, q, entries }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.m + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        assert_eq!(self.q, other.q);
        let m = self.m;
        let q = u16::from(self.q);
        let mut entries = vec![0u8; m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc: u16 = 0;
                for k in 0..m {
                    acc += u16::from(self.get(i, k)) * u16::from(other.get(k, j));
                }
                entries[i * m + j] = (acc % q) as u8;
            }
        }
        Self { m, q: self.q, entries }
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        let mut entries = vec![0u8; m * m];
        for i in 0..m {
            for j in 0..m {
                entries[j * m + i] = self.get(i, j);
            }
        }
        Self { m, q: self.q, entries }
    }

    /// Determinant in F_q by Gaussian elimination.
    pub fn det(&self) -> u8 {
        let m = self.m;
        let q = i64::from(self.q);
        let mut a: Vec<i64> = self.entries.iter().map(|&x| i64::from(x)).collect();
        let mut det: i64 = 1;
        for col in 0..m {
            let pivot = (col..m).find(|&r| a[r * m + col] % q != 0);
            let Some(p) = pivot else { return 0 };
            if p != col {
                for j in 0..m {
                    a.swap(p * m + j, col * m + j);
                }
                det = -det;
            }
            let pv = a[col * m + col].rem_euclid(q) as u8;
            det = det * i64::from(pv) % q;
            let pivinv = i64::from(inv_mod(pv, self.q).unwrap());
            for r in (col + 1)..m {
                let factor = a[r * m + col].rem_euclid(q) * pivinv % q;
                for j in col..m {
                    a[r * m + j] = (a[r * m + j] - factor * a[col * m + j]).rem_euclid(q);
                }
            }
        }
        det.rem_euclid(q) as u8
    }

    /// Inverse by Gauss-Jordan; panics if singular (group elements never are).
    pub fn inverse(&self) -> Self {
        let m = self.m;
        let q = i64::from(self.q);
        let mut a: Vec<i64> = self.entries.iter().map(|&x| i64::from(x)).collect();
        let mut b: Vec<i64> = GroupElement::identity(m, self.q)
            .entries
            .iter()
            .map(|&x| i64::from(x))
            .collect();
        for col in 0..m {
            let p = (col..m)
                .find(|&r| a[r * m + col] % q != 0)
                .expect("singular matrix in GroupElement::inverse");
            if p != col {
                for j in 0..m {
                    a.swap(p * m + j, col * m + j);
                    b.swap(p * m + j, col * m + j);
                }
            }
            let pivinv = i64::from(inv_mod(a[col * m + col].rem_euclid(q) as u8, self.q).unwrap());
            for j in 0..m {
                a[col * m + j] = a[col * m + j] * pivinv % q;
                b[col * m + j] = b[col * m + j] * pivinv % q;
            }
            for r in 0..m {
                if r != col {
                    let factor = a[r * m + col].rem_euclid(q);
                    for j in 0..m {
                        a[r * m + j] = (a[r * m + j] - factor * a[col * m + j]).rem_euclid(q);
                        b[r * m + j] = (b[r * m + j] - factor * b[col * m + j]).rem_euclid(q);
                    }
                }
            }
        }
        Self {
            m,
            q: self.q,
            entries: b.iter().map(|&x| x.rem_euclid(q) as u8).collect(),
        }
    }

    /// Transpose inverse g^ι.
    pub fn iota(&self) -> Self {
        self.inverse().transpose()
    }

    pub fn is_upper_unitriangular(&self) -> bool {
        let m = self.m;
        (0..m).all(|i| {
            (0..=i).all(|j| self.get(i, j) == if i == j { 1 } else { 0 })
        })
    }

    /// Last row equal to (0, ..., 0, 1).
    pub fn is_mirabolic(&self) -> bool {
        let m = self.m;
        (0..m).all(|j| self.get(m - 1, j) == if j == m - 1 { 1 } else { 0 })
    }

    /// Sum of superdiagonal entries, the argument of the generic character.
    pub fn superdiagonal_sum(&self) -> u8 {
        let mut s: u16 = 0;
        for i in 0..self.m.saturating_sub(1) {
            s += u16::from(self.get(i, i + 1));
        }
        (s % u16::from(self.q)) as u8
    }

    /// Block-diagonal embedding diag(g, 1) into rank m+1.
    pub fn embed_lower(&self) -> Self {
        let m = self.m + 1;
        let mut out = GroupElement::identity(m, self.q);
        for i in 0..self.m {
            for j in 0..self.m {
                out.entries[i * m + j] = self.get(i, j);
            }
        }
        out
    }
}

pub fn group_order(m: usize, q: u8) -> u128 {
    let qm = (0..m).fold(1u128, |acc, _| acc * u128::from(q));
    (0..m)
        .map(|k| qm - (0..k).fold(1u128, |acc, _| acc * u128::from(q)))
        .product()
}

/// A fully enumerated GL_m(F_q). Element ids are indices into the
/// lexicographic (row-major) ordering of matrix encodings, so every
/// downstream matrix is reproducible bit-for-bit given (m, q).
pub struct GroupTable {
    pub m: usize,
    pub q: u8,
    pub elements: Vec<GroupElement>,
    index: HashMap<Vec<u8>, u32>,
    inverse: Vec<u32>,
    iota: Vec<u32>,
    /// Ids of U_m, in id order.
    pub unipotent_ids: Vec<u32>,
    /// Ids of the mirabolic subgroup P, in id order.
    pub mirabolic_ids: Vec<u32>,
    /// θ-exponent per element: superdiagonal sum for unipotent ids, 0xFF otherwise.
    theta_exp: Vec<u8>,
}

impl GroupTable {
    pub fn enumerate(m: usize, q: u8, cap: u128) -> Result<Self> {
        if !is_supported_prime(u64::from(q)) {
            return Err(Error::UnsupportedField(u64::from(q)));
        }
        let order = group_order(m, q);
        if order > cap {
            return Err(Error::BudgetExceeded { order, cap });
        }
        let cells = m * m;
        let mut elements = Vec::with_capacity(order as usize);
        let mut cur = vec![0u8; cells];
        loop {
            let cand = GroupElement {
                m,
                q,
                entries: cur.clone(),
            };
            if cand.det() != 0 {
                elements.push(cand);
            }
            // odometer in lexicographic order
            let mut i = cells;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < q {
                    break;
                }
                cur[i] = 0;
            }
            if cur.iter().all(|&x| x == 0) {
                break;
            }
        }
        debug_assert_eq!(elements.len() as u128, order);

        let index: HashMap<Vec<u8>, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.entries.clone(), i as u32))
            .collect();
        let inverse: Vec<u32> = elements
            .iter()
            .map(|e| index[&e.inverse().entries])
            .collect();
        let iota: Vec<u32> = elements
            .iter()
            .map(|e| index[&e.iota().entries])
            .collect();
        let unipotent_ids: Vec<u32> = elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_upper_unitriangular())
            .map(|(i, _)| i as u32)
            .collect();
        let mirabolic_ids: Vec<u32> = elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_mirabolic())
            .map(|(i, _)| i as u32)
            .collect();
        let theta_exp: Vec<u8> = elements
            .iter()
            .map(|e| {
                if e.is_upper_unitriangular() {
                    e.superdiagonal_sum()
                } else {
                    0xFF
                }
            })
            .collect();

        Ok(Self {
            m,
            q,
            elements,
            index,
            inverse,
            iota,
            unipotent_ids,
            mirabolic_ids,
            theta_exp,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn id_of(&self, e: &GroupElement) -> Option<u32> {
        self.index.get(&e.entries).copied()
    }

    #[inline]
    pub fn element(&self, id: u32) -> &GroupElement {
        &self.elements[id as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let prod = self.element(a).mul(self.element(b));
        self.index[&prod.entries]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    #[inline]
    pub fn iota(&self, a: u32) -> u32 {
        self.iota[a as usize]
    }

    pub fn identity_id(&self) -> u32 {
        self.index[&GroupElement::identity(self.m, self.q).entries]
    }

    /// θ-exponent of a unipotent element id.
    pub fn theta_exponent(&self, u: u32) -> Result<u8> {
        let e = self.theta_exp[u as usize];
        if e == 0xFF {
            Err(Error::NotUnipotent)
        } else {
            Ok(e)
        }
    }

    /// Id of the central element z·I for z in F_q^×.
    pub fn central_id(&self, z: u8) -> u32 {
        let mut e = GroupElement::identity(self.m, self.q);
        for i in 0..self.m {
            e.entries[i * self.m + i] = z % self.q;
        }
        self.index[&e.entries]
    }
}

/// Canonical representatives and reduction data for H\A, where H is a
/// subgroup of the ambient set A (A = G or A = P). The representative
/// of each coset is its lexicographically least matrix encoding.
pub struct CosetTable {
    pub subgroup: Vec<u32>,
    /// Global ids of the canonical representatives, in id order.
    pub reps: Vec<u32>,
    /// element id -> (rep index, u id) with element = u · rep exactly.
    decomp: HashMap<u32, (u32, u32)>,
}

impl CosetTable {
    pub fn new(table: &GroupTable, subgroup: Vec<u32>, ambient: &[u32]) -> Self {
        let mut decomp: HashMap<u32, (u32, u32)> = HashMap::with_capacity(ambient.len());
        let mut reps = Vec::new();
        // ambient is in id order = lex order, so the first unseen member
        // of each coset is its lex-least element.
        for &g in ambient {
            if decomp.contains_key(&g) {
                continue;
            }
            let rep_idx = reps.len() as u32;
            reps.push(g);
            for &u in &subgroup {
                let x = table.mul(u, g);
                decomp.entry(x).or_insert((rep_idx, u));
            }
        }
        Self {
            subgroup,
            reps,
            decomp,
        }
    }

    pub fn count(&self) -> usize {
        self.reps.len()
    }

    /// Factor g = u · rep; errors if g is outside the ambient set.
    pub fn decompose(&self, g: u32) -> Result<(u32, u32)> {
        self.decomp.get(&g).copied().ok_or(Error::NotInAmbient)
    }

    pub fn rep_index_of(&self, g: u32) -> Result<u32> {
        Ok(self.decompose(g)?.0)
    }
}

/// w_n, ε_n, s_n at a fixed rank, over F_q.
pub struct SpecialElements {
    pub w: GroupElement,
    pub eps: GroupElement,
    pub s: GroupElement,
}

pub fn special_elements(n: usize, q: u8) -> SpecialElements {
    let qi = i64::from(q);
    let mut w = GroupElement::identity(n, q);
    let mut eps = GroupElement::identity(n, q);
    let mut s = GroupElement::identity(n, q);
    for i in 0..n {
        for j in 0..n {
            w.entries[i * n + j] = u8::from(j == n - 1 - i);
            s.entries[i * n + j] = if j == n - 1 - i {
                (if i % 2 == 0 { 1i64 } else { -1i64 }).rem_euclid(qi) as u8
            } else {
                0
            };
        }
        // ε_n = diag((-1)^(n-1), ..., -1, 1): entry i is (-1)^(n-1-i)
        eps.entries[i * n + i] = (if (n - 1 - i).is_multiple_of(2) { 1i64 } else { -1i64 })
            .rem_euclid(qi) as u8;
    }
    SpecialElements { w, eps, s }
}

/// An enumerated GL_m(F_q) with its U\G coset table and the cached ids
/// of the special elements.
pub struct GroupData {
    pub table: GroupTable,
    /// U_m \ GL_m, canonical reps.
    pub cosets: CosetTable,
    pub w_id: u32,
    pub eps_id: u32,
    pub s_id: u32,
}

impl GroupData {
    pub fn new(m: usize, q: u8, cap: u128) -> Result<Self> {
        let table = GroupTable::enumerate(m, q, cap)?;
        let all: Vec<u32> = (0..table.order() as u32).collect();
        let cosets = CosetTable::new(&table, table.unipotent_ids.clone(), &all);
        let sp = special_elements(m, q);
        let w_id = table.id_of(&sp.w).expect("w_n invertible");
        let eps_id = table.id_of(&sp.eps).expect("eps_n invertible");
        let s_id = table.id_of(&sp.s).expect("s_n invertible");
        Ok(Self {
            table,
            cosets,
            w_id,
            eps_id,
            s_id,
        })
    }

    /// ĵ(g) = s_n g^ι s_n^{-1}.
    pub fn jhat(&self, g: u32) -> u32 {
        let t = &self.table;
        t.mul(t.mul(self.s_id, t.iota(g)), t.inv(self.s_id))
    }
}

//! The Gelfand-Graev space ind_U^G θ realized on the canonical U\G
//! representatives, its multiplicity-free decomposition into irreducible
//! generic constituents by commutant eigen-splitting, cuspidality
//! detection by Jacquet averaging, and central characters.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{eigenspaces_normal, AdditiveCharacter, C64, CLUSTER_TOL};
use crate::group::{GroupData, GroupElement};
use crate::{Error, Result, DEFAULT_TOL};

/// Right translation by a fixed group element is a monomial operator in
/// the delta basis: (ρ(g)f)(r_i) = phase[i] · f(r_{dest[i]}).
pub struct MonomialOp {
    pub dest: Vec<u32>,
    pub phase: Vec<C64>,
}

impl MonomialOp {
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dest.len();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            m[(i, self.dest[i] as usize)] = self.phase[i];
        }
        m
    }

    /// ρ(g) X ρ(g)^* without forming the monomial matrix.
    pub fn conjugate(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dest.len();
        DMatrix::from_fn(d, d, |i, j| {
            self.phase[i]
                * x[(self.dest[i] as usize, self.dest[j] as usize)]
                * self.phase[j].conj()
        })
    }

    /// ρ(g) · Q for a tall matrix of column vectors.
    pub fn apply(&self, q: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dest.len();
        let k = q.ncols();
        DMatrix::from_fn(d, k, |i, c| self.phase[i] * q[(self.dest[i] as usize, c)])
    }
}

/// ind_U^G θ^{direction} with its right-translation action tabulated
/// for every group element.
pub struct GGSpace {
    pub n: usize,
    pub q: u8,
    pub direction: i8,
    pub data: Arc<GroupData>,
    pub psi: AdditiveCharacter,
    /// Flattened [g * dim + i] -> destination rep index of r_i · g.
    act_dest: Vec<u32>,
    /// Flattened θ-exponents matching `act_dest`.
    act_exp: Vec<u8>,
    /// roots[t] = exp(2πi · direction · t / q).
    roots: Vec<C64>,
}

impl GGSpace {
    pub fn build(data: Arc<GroupData>, direction: i8) -> Result<Self> {
        let q = data.table.q;
        let psi = AdditiveCharacter::new(q, direction)?;
        let dim = data.cosets.count();
        let order = data.table.order();
        let mut act_dest = vec![0u32; order * dim];
        let mut act_exp = vec![0u8; order * dim];
        for g in 0..order as u32 {
            for (i, &r) in data.cosets.reps.iter().enumerate() {
                let x = data.table.mul(r, g);
                let (rep_idx, u) = data.cosets.decompose(x)?;
                act_dest[g as usize * dim + i] = rep_idx;
                act_exp[g as usize * dim + i] = data.table.theta_exponent(u)?;
            }
        }
        let roots: Vec<C64> = (0..q).map(|t| psi.eval_residue(i64::from(t))).collect();
        Ok(Self {
            n: data.table.m,
            q,
            direction,
            data,
            psi,
            act_dest,
            act_exp,
            roots,
        })
    }

    /// Convenience constructor that enumerates the group itself.
    pub fn new(n: usize, q: u8, direction: i8, cap: u128) -> Result<Self> {
        Self::build(Arc::new(GroupData::new(n, q, cap)?), direction)
    }

    pub fn dim(&self) -> usize {
        self.data.cosets.count()
    }

    #[inline]
    fn phase_of(&self, exp: u8) -> C64 {
        self.roots[exp as usize]
    }

    pub fn action(&self, g: u32) -> MonomialOp {
        let dim = self.dim();
        let base = g as usize * dim;
        MonomialOp {
            dest: self.act_dest[base..base + dim].to_vec(),
            phase: self.act_exp[base..base + dim]
                .iter()
                .map(|&e| self.phase_of(e))
                .collect(),
        }
    }

    /// Average of ρ(g) X ρ(g)^{-1} over the whole group; an element of
    /// the commutant of the action.
    pub fn commutant_average(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let dim = self.dim();
        let order = self.data.table.order();
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for g in 0..order {
            let base = g * dim;
            let dest = &self.act_dest[base..base + dim];
            let exp = &self.act_exp[base..base + dim];
            for i in 0..dim {
                let pi = self.phase_of(exp[i]);
                let di = dest[i] as usize;
                for j in 0..dim {
                    acc[(i, j)] +=
                        pi * x[(di, dest[j] as usize)] * self.phase_of(exp[j]).conj();
                }
            }
        }
        acc.unscale(order as f64)
    }

    /// tr(Q^* ρ(g) Q) for an orthonormal subspace basis Q.
    pub fn restricted_character(&self, basis: &DMatrix<C64>, g: u32) -> C64 {
        let dim = self.dim();
        let base = g as usize * dim;
        let dest = &self.act_dest[base..base + dim];
        let exp = &self.act_exp[base..base + dim];
        let mut tr = C64::new(0.0, 0.0);
        for c in 0..basis.ncols() {
            for i in 0..dim {
                tr += basis[(i, c)].conj() * self.phase_of(exp[i]) * basis[(dest[i] as usize, c)];
            }
        }
        tr
    }

    /// Dimension of the commutant of the action restricted to the span
    /// of `basis` (Σ_g |χ(g)|² / |G|); 1 certifies irreducibility.
    pub fn commutant_dim(&self, basis: &DMatrix<C64>) -> f64 {
        let order = self.data.table.order();
        (0..order as u32)
            .map(|g| self.restricted_character(basis, g).norm_sqr())
            .sum::<f64>()
            / order as f64
    }
}

/// An irreducible generic constituent of the Gelfand-Graev space,
/// stored as an orthonormal Whittaker-model subspace.
pub struct IrrepComponent {
    pub id: usize,
    pub n: usize,
    pub q: u8,
    pub direction: i8,
    pub dim: usize,
    /// dim(GG) × dim orthonormal columns.
    pub basis: DMatrix<C64>,
    pub cuspidal: bool,
    /// ω(z) for z = 1, ..., q-1 (index z-1).
    pub central_character: Vec<C64>,
}

impl IrrepComponent {
    pub fn omega(&self, z: u8) -> C64 {
        self.central_character[(z as usize - 1) % (self.q as usize - 1)]
    }

    /// ω(-1); equals ω(1) = 1 when q = 2.
    pub fn omega_minus_one(&self) -> C64 {
        self.omega(self.q - 1)
    }
}

const MAX_REDRAWS: usize = 8;

/// Decompose the Gelfand-Graev space into its irreducible constituents.
/// Deterministic for a fixed seed; component ids are stable, ordered by
/// (dim, character fingerprint on the first 16 group ids).
pub fn decompose(gg: &GGSpace, seed: u64) -> Result<Vec<IrrepComponent>> {
    let d = gg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work: Vec<DMatrix<C64>> = vec![DMatrix::identity(d, d)];
    let mut done: Vec<DMatrix<C64>> = Vec::new();

    while let Some(basis) = work.pop() {
        let k = basis.ncols();
        if k == 1 {
            done.push(basis);
            continue;
        }
        let cdim = gg.commutant_dim(&basis);
        if (cdim - 1.0).abs() < 0.1 {
            done.push(basis);
            continue;
        }
        let mut split = None;
        for _ in 0..MAX_REDRAWS {
            let x = random_hermitian(&mut rng, k);
            let lifted = &basis * x * basis.adjoint();
            let avg = gg.commutant_average(&lifted);
            let restricted = basis.adjoint() * &avg * &basis;
            match eigenspaces_normal(&restricted, CLUSTER_TOL) {
                Ok(spaces) if spaces.len() > 1 => {
                    split = Some(spaces);
                    break;
                }
                Ok(_) => continue, // degenerate sample, redraw
                Err(Error::ClusterAmbiguity { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        match split {
            Some(spaces) => {
                for sp in spaces {
                    work.push(&basis * sp.basis);
                }
            }
            None => return Err(Error::SplitExhausted { retries: MAX_REDRAWS }),
        }
    }

    // stable ordering: (dim, rounded character fingerprint)
    type Keyed = (usize, Vec<(i64, i64)>, DMatrix<C64>);
    let mut keyed: Vec<Keyed> = done
        .into_iter()
        .map(|b| {
            let fp: Vec<(i64, i64)> = (0..16.min(gg.data.table.order()) as u32)
                .map(|g| {
                    let ch = gg.restricted_character(&b, g);
                    ((ch.re * 1e9).round() as i64, (ch.im * 1e9).round() as i64)
                })
                .collect();
            (b.ncols(), fp, b)
        })
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    keyed
        .into_iter()
        .enumerate()
        .map(|(id, (dim, _, basis))| {
            let cuspidal = is_cuspidal_basis(gg, &basis)?;
            let central_character = central_character_basis(gg, &basis, DEFAULT_TOL)?;
            Ok(IrrepComponent {
                id,
                n: gg.n,
                q: gg.q,
                direction: gg.direction,
                dim,
                basis,
                cuspidal,
                central_character,
            })
        })
        .collect()
}

fn random_hermitian(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<C64> {
    let m = DMatrix::<C64>::from_fn(k, k, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    (&m + m.adjoint()).scale(0.5)
}

/// Jacquet criterion: cuspidal iff the average of ρ over the unipotent
/// radical of every maximal standard parabolic kills the component.
pub fn is_cuspidal_basis(gg: &GGSpace, basis: &DMatrix<C64>) -> Result<bool> {
    let n = gg.n;
    if n < 2 {
        return Ok(true); // GL_1: vacuously cuspidal
    }
    let scale = basis.ncols() as f64;
    for k in 1..n {
        let radical = parabolic_radical_ids(gg, k)?;
        let mut avg = DMatrix::<C64>::zeros(gg.dim(), basis.ncols());
        for &x in &radical {
            avg += gg.action(x).apply(basis);
        }
        avg.unscale_mut(radical.len() as f64);
        if avg.norm() > DEFAULT_TOL * scale.sqrt().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_cuspidal(gg: &GGSpace, c: &IrrepComponent) -> Result<bool> {
    is_cuspidal_basis(gg, &c.basis)
}

/// Ids of N_k = { [[I_k, B], [0, I_{n-k}]] }.
fn parabolic_radical_ids(gg: &GGSpace, k: usize) -> Result<Vec<u32>> {
    let n = gg.n;
    let q = gg.q;
    let cells = k * (n - k);
    let count = (0..cells).fold(1usize, |acc, _| acc * q as usize);
    let mut ids = Vec::with_capacity(count);
    let mut b = vec![0u8; cells];
    for _ in 0..count {
        let mut e = GroupElement::identity(n, q);
        for (idx, &v) in b.iter().enumerate() {
            let i = idx / (n - k);
            let j = k + idx % (n - k);
            e.entries[i * n + j] = v;
        }
        ids.push(gg.data.table.id_of(&e).expect("unipotent element in table"));
        // odometer
        for slot in b.iter_mut() {
            *slot += 1;
            if *slot < q {
                break;
            }
            *slot = 0;
        }
    }
    Ok(ids)
}

fn central_character_basis(gg: &GGSpace, basis: &DMatrix<C64>, tol: f64) -> Result<Vec<C64>> {
    let k = basis.ncols() as f64;
    (1..gg.q)
        .map(|z| {
            let zid = gg.data.table.central_id(z);
            let m = basis.adjoint() * gg.action(zid).apply(basis);
            let omega = m.trace() / C64::new(k, 0.0);
            let dev = (&m - DMatrix::<C64>::identity(m.nrows(), m.ncols()).map(|e| e * omega))
                .norm();
            if dev > tol * k.sqrt().max(1.0) {
                Err(Error::NotScalar { deviation: dev })
            } else {
                Ok(omega)
            }
        })
        .collect()
}

pub fn central_character(gg: &GGSpace, c: &IrrepComponent, tol: f64) -> Result<Vec<C64>> {
    central_character_basis(gg, &c.basis, tol)
}

//! Whittaker/Kirillov model mechanics: evaluation through coset
//! decomposition, restriction to the mirabolic subgroup and its inverse
//! on cuspidal components, the tilde and epsilon maps, the bilinear
//! pairing, and the embedding of rank-(n-1) Whittaker models into the
//! rank-n Kirillov space.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{solve_linear, AdditiveCharacter, C64};
use crate::group::{CosetTable, GroupData, GroupElement};
use crate::spectra::IrrepComponent;
use crate::{Error, Result};

/// A function on G determined by its values at U\G canonical reps and
/// the equivariance W(ug) = θ^{direction}(u) W(g).
#[derive(Clone)]
pub struct WhittakerFunction {
    pub n: usize,
    pub q: u8,
    pub direction: i8,
    pub values: DVector<C64>,
}

/// A function on P determined by its values at U_n\P canonical reps.
#[derive(Clone)]
pub struct KirillovFunction {
    pub n: usize,
    pub q: u8,
    pub direction: i8,
    pub values: DVector<C64>,
}

/// The two-rank setting every gamma computation lives in: GL_n with its
/// U\G cosets, GL_{n-1} likewise, and the U_n\P coset table with the
/// factorization p = v · diag(g, 1) cached per representative.
pub struct Tower {
    pub q: u8,
    pub n: usize,
    pub upper: Arc<GroupData>,
    pub lower: Arc<GroupData>,
    pub pcosets: CosetTable,
    /// Per P-representative: (id of g in the lower table, v_{n-1,n}).
    pub pfact: Vec<(u32, u8)>,
}

impl Tower {
    pub fn new(q: u8, n: usize, cap: u128) -> Result<Self> {
        assert!(n >= 2, "a tower needs rank n >= 2");
        let upper = Arc::new(GroupData::new(n, q, cap)?);
        let lower = Arc::new(GroupData::new(n - 1, q, cap)?);
        Self::from_data(upper, lower)
    }

    pub fn from_data(upper: Arc<GroupData>, lower: Arc<GroupData>) -> Result<Self> {
        let n = upper.table.m;
        let q = upper.table.q;
        if lower.table.m != n - 1 || lower.table.q != q {
            return Err(Error::RankMismatch {
                expected: n - 1,
                got: lower.table.m,
            });
        }
        let pcosets = CosetTable::new(
            &upper.table,
            upper.table.unipotent_ids.clone(),
            &upper.table.mirabolic_ids,
        );
        let pfact = pcosets
            .reps
            .iter()
            .map(|&rid| {
                let e = upper.table.element(rid);
                let mut g = GroupElement::identity(n - 1, q);
                for i in 0..n - 1 {
                    for j in 0..n - 1 {
                        g.entries[i * (n - 1) + j] = e.get(i, j);
                    }
                }
                let gid = lower.table.id_of(&g).expect("mirabolic block invertible");
                (gid, e.get(n - 2, n - 1))
            })
            .collect();
        Ok(Self {
            q,
            n,
            upper,
            lower,
            pcosets,
            pfact,
        })
    }

    /// Dimension of the Kirillov space, |P| / |U_n|.
    pub fn kirillov_dim(&self) -> usize {
        self.pcosets.count()
    }

    /// Id in the upper table of diag(g, 1) for a lower-table id.
    pub fn embed_id(&self, g: u32) -> u32 {
        let e = self.lower.table.element(g).embed_lower();
        self.upper.table.id_of(&e).expect("embedding stays invertible")
    }

    /// Id in the upper table of v · diag(g, 1) = [[g, b], [0, 1]] where
    /// b is the last column of v.
    pub fn assemble_p_full(&self, g: u32, b: &[u8]) -> u32 {
        let n = self.n;
        assert_eq!(b.len(), n - 1);
        let mut e = self.lower.table.element(g).embed_lower();
        for (i, &v) in b.iter().enumerate() {
            e.entries[i * n + (n - 1)] = v;
        }
        self.upper.table.id_of(&e).expect("element of P")
    }
}

/// θ^{±1}(u) = ψ^{±1}(sum of superdiagonal entries); NotUnipotent on
/// anything outside U.
pub fn theta_eval(u: &GroupElement, psi: &AdditiveCharacter) -> Result<C64> {
    if !u.is_upper_unitriangular() {
        return Err(Error::NotUnipotent);
    }
    Ok(psi.eval_residue(i64::from(u.superdiagonal_sum())))
}

fn psi_for(q: u8, direction: i8) -> AdditiveCharacter {
    AdditiveCharacter::new(q, direction).expect("supported prime")
}

/// Evaluate a Whittaker function at an arbitrary element id through the
/// single source of truth: coset decomposition plus θ.
pub fn eval_whittaker(data: &GroupData, w: &WhittakerFunction, g: u32) -> C64 {
    let (rep_idx, u) = data
        .cosets
        .decompose(g)
        .expect("U\\G covers the whole group");
    let exp = data.table.theta_exponent(u).expect("u lies in U");
    psi_for(w.q, w.direction).eval_residue(i64::from(exp)) * w.values[rep_idx as usize]
}

/// Evaluate a Kirillov function at an arbitrary element of P.
pub fn eval_kirillov(tw: &Tower, f: &KirillovFunction, p: u32) -> Result<C64> {
    let (rep_idx, u) = tw.pcosets.decompose(p)?;
    let exp = tw.upper.table.theta_exponent(u)?;
    Ok(psi_for(f.q, f.direction).eval_residue(i64::from(exp)) * f.values[rep_idx as usize])
}

/// Values of a component basis column as a Whittaker function.
pub fn component_function(c: &IrrepComponent, col: usize) -> WhittakerFunction {
    WhittakerFunction {
        n: c.n,
        q: c.q,
        direction: c.direction,
        values: c.basis.column(col).into_owned(),
    }
}

/// W|_P: values at the U_n\P canonical representatives.
pub fn restrict_to_p(tw: &Tower, w: &WhittakerFunction) -> KirillovFunction {
    let values = DVector::from_iterator(
        tw.kirillov_dim(),
        tw.pcosets
            .reps
            .iter()
            .map(|&p| eval_whittaker(&tw.upper, w, p)),
    );
    KirillovFunction {
        n: tw.n,
        q: tw.q,
        direction: w.direction,
        values,
    }
}

/// Restriction matrix of a component: column j is (basis_j)|_P.
pub fn restriction_matrix(tw: &Tower, c: &IrrepComponent) -> DMatrix<C64> {
    let kp = tw.kirillov_dim();
    let mut m = DMatrix::<C64>::zeros(kp, c.dim);
    for j in 0..c.dim {
        let w = component_function(c, j);
        m.set_column(j, &restrict_to_p(tw, &w).values);
    }
    m
}

/// The unique W in the cuspidal component c with W|_P = f.
pub fn extend_from_p(
    tw: &Tower,
    c: &IrrepComponent,
    f: &KirillovFunction,
) -> Result<WhittakerFunction> {
    if f.direction != c.direction {
        return Err(Error::DirectionMismatch);
    }
    let r = restriction_matrix(tw, c);
    if r.nrows() != r.ncols() {
        // only cuspidal components restrict bijectively
        return Err(Error::SingularMatrix { tol: 0.0 });
    }
    let coeffs = solve_linear(&r, &f.values)?;
    Ok(WhittakerFunction {
        n: c.n,
        q: c.q,
        direction: c.direction,
        values: &c.basis * coeffs,
    })
}

/// W̃(g) = W(w_n g^ι); lands in the opposite θ-direction.
pub fn tilde_map(data: &GroupData, w: &WhittakerFunction) -> WhittakerFunction {
    let t = &data.table;
    let values = DVector::from_iterator(
        data.cosets.count(),
        data.cosets
            .reps
            .iter()
            .map(|&r| eval_whittaker(data, w, t.mul(data.w_id, t.iota(r)))),
    );
    WhittakerFunction {
        n: w.n,
        q: w.q,
        direction: -w.direction,
        values,
    }
}

/// W^ε(g) = W(ε_n g); flips the θ-direction, stays in the same
/// representation.
pub fn epsilon_map(data: &GroupData, w: &WhittakerFunction) -> WhittakerFunction {
    let t = &data.table;
    let values = DVector::from_iterator(
        data.cosets.count(),
        data.cosets
            .reps
            .iter()
            .map(|&r| eval_whittaker(data, w, t.mul(data.eps_id, r))),
    );
    WhittakerFunction {
        n: w.n,
        q: w.q,
        direction: -w.direction,
        values,
    }
}

/// Bilinear pairing Σ f(r) φ(r) over the U_n\P representatives with
/// counting measure scaled by `weight`; no conjugation.
pub fn pairing_weighted(f: &KirillovFunction, phi: &KirillovFunction, weight: f64) -> Result<C64> {
    if f.n != phi.n {
        return Err(Error::RankMismatch {
            expected: f.n,
            got: phi.n,
        });
    }
    if f.direction != -phi.direction {
        return Err(Error::DirectionMismatch);
    }
    Ok(f.values
        .iter()
        .zip(phi.values.iter())
        .map(|(a, b)| a * b)
        .sum::<C64>()
        * C64::new(weight, 0.0))
}

pub fn pairing(f: &KirillovFunction, phi: &KirillovFunction) -> Result<C64> {
    pairing_weighted(f, phi, 1.0)
}

/// Embed a rank-(n-1) Whittaker function into the rank-n Kirillov space
/// by φ(v · diag(g,1)) = θ^{dir}(v) · W(g).
pub fn embed_tau(tw: &Tower, wtau: &WhittakerFunction) -> Result<KirillovFunction> {
    if wtau.n != tw.n - 1 {
        return Err(Error::RankMismatch {
            expected: tw.n - 1,
            got: wtau.n,
        });
    }
    let psi = psi_for(wtau.q, wtau.direction);
    let values = DVector::from_iterator(
        tw.kirillov_dim(),
        tw.pfact.iter().map(|&(gid, vlast)| {
            psi.eval_residue(i64::from(vlast)) * eval_whittaker(&tw.lower, wtau, gid)
        }),
    );
    Ok(KirillovFunction {
        n: tw.n,
        q: tw.q,
        direction: wtau.direction,
        values,
    })
}

/// Restrict a rank-n Kirillov function back to G_{n-1}; inverse of
/// `embed_tau` on its image.
pub fn restrict_to_lower(tw: &Tower, f: &KirillovFunction) -> Result<WhittakerFunction> {
    let values = DVector::from_iterator(
        tw.lower.cosets.count(),
        tw.lower
            .cosets
            .reps
            .iter()
            .map(|&g| eval_kirillov(tw, f, tw.embed_id(g)))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(WhittakerFunction {
        n: tw.n - 1,
        q: tw.q,
        direction: f.direction,
        values,
    })
}

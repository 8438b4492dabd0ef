//! The two gamma-factor constructions and their comparison: the
//! Gelfand-Kazhdan operators K(π), A, C(π), C*(π) on the Kirillov space
//! and the scalar they induce on an embedded Whittaker model of τ, and
//! the Rankin-Selberg gamma factor read off the functional equation of
//! the zeta pairing. Their agreement for every cuspidal π and generic τ
//! is the headline assertion of the crate.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AdditiveCharacter, C64};
use crate::models::{
    component_function, embed_tau, epsilon_map, eval_whittaker, restrict_to_p,
    restriction_matrix, tilde_map, Tower, WhittakerFunction,
};
use crate::spectra::{decompose, GGSpace, IrrepComponent};
use crate::{Error, Result, LINALG_TOL};

/// How a gamma value was extracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    GK,
    JPSS,
}

/// A gamma factor together with its extraction diagnostics.
#[derive(Clone, Debug)]
pub struct GammaValue {
    pub value: C64,
    pub method: Method,
    /// Max deviation across basis vectors / probe pairs.
    pub deviation: f64,
    pub pairs_used: usize,
}

/// A Whittaker model of a generic τ at rank n-1 prepared for the rank-n
/// gamma machinery: θ̄-side functions on G_{n-1} and their embedding
/// into the Kirillov space of P.
pub struct TauModel {
    pub component_id: usize,
    pub dim: usize,
    /// W(τ, θ̄): one function per basis vector of τ, rank n-1.
    pub whittaker: Vec<WhittakerFunction>,
    /// Their images in the Kirillov space; kirillov_dim × dim.
    pub embedded: DMatrix<C64>,
    pub omega_minus_one: C64,
}

/// Transport a θ-direction component of the lower Gelfand-Graev space
/// to the θ̄ side with the ε-map and embed it.
pub fn build_tau_model(tw: &Tower, comp: &IrrepComponent) -> Result<TauModel> {
    let mut whittaker = Vec::with_capacity(comp.dim);
    let mut embedded = DMatrix::<C64>::zeros(tw.kirillov_dim(), comp.dim);
    for j in 0..comp.dim {
        let w = component_function(comp, j);
        let w_bar = epsilon_map(&tw.lower, &w);
        let f = embed_tau(tw, &w_bar)?;
        embedded.set_column(j, &f.values);
        whittaker.push(w_bar);
    }
    Ok(TauModel {
        component_id: comp.id,
        dim: comp.dim,
        whittaker,
        embedded,
        omega_minus_one: comp.omega_minus_one(),
    })
}

/// The operator A on the Kirillov space: (Af)(v·g) = f(v·s_{n-1}·g^ι).
pub fn op_a(tw: &Tower, direction: i8) -> DMatrix<C64> {
    let kp = tw.kirillov_dim();
    let lt = &tw.lower.table;
    let ut = &tw.upper.table;
    let psi = AdditiveCharacter::new(tw.q, direction).expect("supported prime");
    let mut a = DMatrix::<C64>::zeros(kp, kp);
    for i in 0..kp {
        let (gid, _) = tw.pfact[i];
        let rid = tw.pcosets.reps[i];
        // replace the G_{n-1} block g by s_{n-1} g^ι, keep the V column
        let h = lt.mul(tw.lower.s_id, lt.iota(gid));
        let b: Vec<u8> = (0..tw.n - 1)
            .map(|r| ut.element(rid).get(r, tw.n - 1))
            .collect();
        let target = tw.assemble_p_full(h, &b);
        let (rep_idx, u) = tw.pcosets.decompose(target).expect("target stays in P");
        let exp = ut.theta_exponent(u).expect("u in U");
        a[(i, rep_idx as usize)] += psi.eval_residue(i64::from(exp));
    }
    a
}

/// K(π) on the Kirillov space of a cuspidal component: extend f to the
/// Whittaker model, apply W ↦ W(s_n · (·)^ι) = (W̃)^ε, restrict back.
pub fn op_k(tw: &Tower, comp: &IrrepComponent) -> Result<DMatrix<C64>> {
    let kp = tw.kirillov_dim();
    let r = restriction_matrix(tw, comp);
    if r.nrows() != r.ncols() || crate::algebra::rank(&r, LINALG_TOL) < kp {
        return Err(Error::SingularMatrix { tol: LINALG_TOL });
    }
    // M: column j = ((basis_j~)^ε)|_P
    let mut m = DMatrix::<C64>::zeros(kp, comp.dim);
    for j in 0..comp.dim {
        let w = component_function(comp, j);
        let img = epsilon_map(&tw.upper, &tilde_map(&tw.upper, &w));
        m.set_column(j, &restrict_to_p(tw, &img).values);
    }
    // K = M R^{-1}
    let k_t = r
        .transpose()
        .lu()
        .solve(&m.transpose())
        .ok_or(Error::SingularMatrix { tol: LINALG_TOL })?;
    Ok(k_t.transpose())
}

/// C(π) = A ∘ K(π).
pub fn op_c(tw: &Tower, comp: &IrrepComponent) -> Result<DMatrix<C64>> {
    Ok(op_a(tw, comp.direction) * op_k(tw, comp)?)
}

/// C*(π): transpose of C(π) with respect to the bilinear delta-basis
/// pairing (no conjugation); acts on the opposite-direction space.
pub fn op_cstar(tw: &Tower, comp: &IrrepComponent) -> Result<DMatrix<C64>> {
    Ok(op_c(tw, comp)?.transpose())
}

/// γ_GK(π, τ, ψ): the scalar by which C*(π) acts on the embedded
/// W(τ, θ̄). Primary extraction is per-column eigenvalue read-off; the
/// defining pairing equation ⟨K(π)f, A*W'⟩ = γ ⟨f, W'⟩ is evaluated on
/// all delta/basis probe pairs as an independent cross-check, and the
/// worst disagreement across both routes is reported as the deviation.
pub fn gamma_gk(
    tw: &Tower,
    comp_pi: &IrrepComponent,
    tau: &TauModel,
    tol: f64,
) -> Result<GammaValue> {
    gamma_gk_weighted(tw, comp_pi, tau, tol, 1.0)
}

pub fn gamma_gk_weighted(
    tw: &Tower,
    comp_pi: &IrrepComponent,
    tau: &TauModel,
    tol: f64,
    weight: f64,
) -> Result<GammaValue> {
    let k = op_k(tw, comp_pi)?;
    let a = op_a(tw, comp_pi.direction);
    let cstar = (&a * &k).transpose();

    // eigen-extraction from C*(π) restricted to the embedded τ-model
    let cv = &cstar * &tau.embedded;
    let mut gamma = C64::new(0.0, 0.0);
    let mut deviation: f64 = 0.0;
    for j in 0..tau.dim {
        let v = tau.embedded.column(j);
        let cvj = cv.column(j);
        let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let lam: C64 = v
            .iter()
            .zip(cvj.iter())
            .map(|(vi, ci)| vi.conj() * ci)
            .sum::<C64>()
            / vnorm2;
        let resid = v
            .iter()
            .zip(cvj.iter())
            .map(|(vi, ci)| (ci - lam * vi).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / vnorm2.sqrt();
        if j == 0 {
            gamma = lam;
        } else {
            deviation = deviation.max((lam - gamma).norm());
        }
        deviation = deviation.max(resid);
    }
    if deviation > tol {
        return Err(Error::NotScalar { deviation });
    }

    // independent cross-check via the defining pairing equation, on
    // probe pairs (f = delta_i, W' = embedded column j)
    let kp = tw.kirillov_dim();
    let at = a.transpose();
    let mut pairs_used = 0;
    let scale = tau.embedded.norm().max(1.0);
    for j in 0..tau.dim {
        let astar_w = &at * tau.embedded.column(j);
        for i in 0..kp {
            let rhs = tau.embedded[(i, j)] * C64::new(weight, 0.0);
            if rhs.norm() < 1e-6 * scale {
                continue;
            }
            // ⟨K δ_i, A* W'⟩ with counting measure · weight
            let kf = k.column(i);
            let lhs = kf
                .iter()
                .zip(astar_w.iter())
                .map(|(x, y)| x * y)
                .sum::<C64>()
                * C64::new(weight, 0.0);
            deviation = deviation.max((lhs / rhs - gamma).norm());
            pairs_used += 1;
        }
    }
    if pairs_used == 0 {
        return Err(Error::NoNonvanishingPair);
    }
    if deviation > tol {
        return Err(Error::NotScalar { deviation });
    }
    Ok(GammaValue {
        value: gamma,
        method: Method::GK,
        deviation,
        pairs_used,
    })
}

/// The zeta pairing Σ_{U_{n-1}\G_{n-1}} W(diag(g,1)) W'(g) with
/// counting measure; the |det|^(s-1/2) factor of the local-field zeta
/// integral is identically 1 here.
pub fn zeta(tw: &Tower, w: &WhittakerFunction, wp: &WhittakerFunction) -> Result<C64> {
    zeta_weighted(tw, w, wp, 1.0)
}

pub fn zeta_weighted(
    tw: &Tower,
    w: &WhittakerFunction,
    wp: &WhittakerFunction,
    weight: f64,
) -> Result<C64> {
    if w.n != tw.n {
        return Err(Error::RankMismatch {
            expected: tw.n,
            got: w.n,
        });
    }
    if wp.n != tw.n - 1 {
        return Err(Error::RankMismatch {
            expected: tw.n - 1,
            got: wp.n,
        });
    }
    if w.direction != -wp.direction {
        return Err(Error::DirectionMismatch);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, &g) in tw.lower.cosets.reps.iter().enumerate() {
        acc += eval_whittaker(&tw.upper, w, tw.embed_id(g)) * wp.values[i];
    }
    Ok(acc * C64::new(weight, 0.0))
}

/// γ_JPSS(π, τ, ψ) = Z(W̃, W̃') / (ω_τ(-1)^{n-1} Z(W, W')), extracted
/// from every basis pair with a nonvanishing denominator; all pairs
/// must agree within `tol`.
pub fn gamma_jpss(
    tw: &Tower,
    comp_pi: &IrrepComponent,
    tau: &TauModel,
    tol: f64,
) -> Result<GammaValue> {
    gamma_jpss_weighted(tw, comp_pi, tau, tol, 1.0)
}

pub fn gamma_jpss_weighted(
    tw: &Tower,
    comp_pi: &IrrepComponent,
    tau: &TauModel,
    tol: f64,
    weight: f64,
) -> Result<GammaValue> {
    let prefactor = omega_power(tau.omega_minus_one, tw.n - 1);
    let ws: Vec<WhittakerFunction> =
        (0..comp_pi.dim).map(|j| component_function(comp_pi, j)).collect();
    let ws_tilde: Vec<WhittakerFunction> =
        ws.iter().map(|w| tilde_map(&tw.upper, w)).collect();
    let wps = &tau.whittaker;
    let wps_tilde: Vec<WhittakerFunction> =
        wps.iter().map(|w| tilde_map(&tw.lower, w)).collect();

    let mut zs = Vec::new();
    for (i, w) in ws.iter().enumerate() {
        for (j, wp) in wps.iter().enumerate() {
            let z = zeta_weighted(tw, w, wp, weight)?;
            let zt = zeta_weighted(tw, &ws_tilde[i], &wps_tilde[j], weight)?;
            zs.push((z, zt));
        }
    }
    let zmax = zs.iter().map(|(z, _)| z.norm()).fold(0.0_f64, f64::max);
    if zmax < 1e-12 {
        return Err(Error::NoNonvanishingPair);
    }
    let mut gamma = C64::new(0.0, 0.0);
    let mut spread: f64 = 0.0;
    let mut pairs_used = 0;
    for (z, zt) in &zs {
        if z.norm() <= 1e-6 * zmax {
            continue;
        }
        let g = zt / (prefactor * z);
        if pairs_used == 0 {
            gamma = g;
        } else {
            spread = spread.max((g - gamma).norm());
        }
        pairs_used += 1;
    }
    if pairs_used == 0 {
        return Err(Error::NoNonvanishingPair);
    }
    let rel_spread = spread / gamma.norm().max(1e-300);
    if rel_spread > tol {
        return Err(Error::InconsistentRatio { spread: rel_spread });
    }
    Ok(GammaValue {
        value: gamma,
        method: Method::JPSS,
        deviation: rel_spread,
        pairs_used,
    })
}

fn omega_power(omega: C64, e: usize) -> C64 {
    (0..e).fold(C64::new(1.0, 0.0), |acc, _| acc * omega)
}

/// Per-(π, τ) record of a verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaReport {
    pub q: u8,
    pub n: usize,
    pub psi: String,
    pub pi_id: usize,
    pub pi_dim: usize,
    pub tau_id: usize,
    pub tau_dim: usize,
    pub gamma_gk: [f64; 2],
    pub gamma_jpss: [f64; 2],
    pub abs_diff: f64,
    pub gamma_abs: f64,
    pub omega_tau_minus_one: [f64; 2],
    pub gk_deviation: f64,
    pub jpss_spread: f64,
    pub pairs_used: usize,
}

/// Everything a verification run at (q, n) needs: the tower, both
/// Gelfand-Graev decompositions, and the prepared τ models.
pub struct Instance {
    pub tower: Tower,
    pub direction: i8,
    pub components_upper: Vec<IrrepComponent>,
    pub components_lower: Vec<IrrepComponent>,
    pub taus: Vec<TauModel>,
}

impl Instance {
    pub fn build(q: u8, n: usize, seed: u64, direction: i8, cap: u128) -> Result<Self> {
        let tower = Tower::new(q, n, cap)?;
        let inst = Self::from_parts(tower, seed, direction)?;
        Ok(inst)
    }

    pub fn from_parts(tower: Tower, seed: u64, direction: i8) -> Result<Self> {
        let gg_upper = GGSpace::build(tower.upper.clone(), direction)?;
        let components_upper = decompose(&gg_upper, seed)?;
        let gg_lower = GGSpace::build(tower.lower.clone(), direction)?;
        let components_lower = decompose(&gg_lower, seed.wrapping_add(1))?;
        let taus = components_lower
            .iter()
            .map(|c| build_tau_model(&tower, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tower,
            direction,
            components_upper,
            components_lower,
            taus,
        })
    }

    /// Build from precomputed decompositions (e.g. loaded from cache).
    pub fn from_components(
        tower: Tower,
        direction: i8,
        components_upper: Vec<IrrepComponent>,
        components_lower: Vec<IrrepComponent>,
    ) -> Result<Self> {
        let taus = components_lower
            .iter()
            .map(|c| build_tau_model(&tower, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tower,
            direction,
            components_upper,
            components_lower,
            taus,
        })
    }

    pub fn cuspidal(&self) -> impl Iterator<Item = &IrrepComponent> {
        self.components_upper.iter().filter(|c| c.cuspidal)
    }

    pub fn psi_descriptor(&self) -> String {
        if self.direction == 1 {
            "exp(2*pi*i*x/q)".to_string()
        } else {
            "exp(-2*pi*i*x/q)".to_string()
        }
    }
}

/// Run the full comparison for every cuspidal π at rank n against every
/// generic τ at rank n-1. Report order is (π id, τ id).
pub fn verify_theorem(q: u8, n: usize, seed: u64, tol: f64, cap: u128) -> Result<Vec<GammaReport>> {
    let inst = Instance::build(q, n, seed, 1, cap)?;
    verify_instance(&inst, tol)
}

pub fn verify_instance(inst: &Instance, tol: f64) -> Result<Vec<GammaReport>> {
    let mut reports = Vec::new();
    for pi in inst.cuspidal() {
        for tau in &inst.taus {
            let gk = gamma_gk(&inst.tower, pi, tau, tol)?;
            let jpss = gamma_jpss(&inst.tower, pi, tau, tol)?;
            let diff = (gk.value - jpss.value).norm();
            reports.push(GammaReport {
                q: inst.tower.q,
                n: inst.tower.n,
                psi: inst.psi_descriptor(),
                pi_id: pi.id,
                pi_dim: pi.dim,
                tau_id: tau.component_id,
                tau_dim: tau.dim,
                gamma_gk: [gk.value.re, gk.value.im],
                gamma_jpss: [jpss.value.re, jpss.value.im],
                abs_diff: diff,
                gamma_abs: gk.value.norm(),
                omega_tau_minus_one: [tau.omega_minus_one.re, tau.omega_minus_one.im],
                gk_deviation: gk.deviation,
                jpss_spread: jpss.deviation,
                pairs_used: gk.pairs_used + jpss.pairs_used,
            });
        }
    }
    Ok(reports)
}

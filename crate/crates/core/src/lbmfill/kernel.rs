//! Collide and stream for the two-component Shan-Chen model.
//!
//! Each step is two data-parallel sweeps over the slab decomposition: an
//! in-place collision that reads neighbour densities, then a pull stream into
//! the spare buffer that also recomputes densities. Every site is computed the
//! same way regardless of which slab owns it, so results do not depend on the
//! worker count.

use std::ops::Range;

use rayon::prelude::*;

use super::d3q19::{equilibrium, ef, OPP, Q, W};
use super::state::{CellType, LatticeState, NONE, STRIDE};
use super::{LbmError, ShanChenParams};

const BLOWUP_DENSITY: f64 = 1e6;

impl LatticeState {
    /// Advances one time step: collide, stream, apply inlet/outlet densities.
    pub fn step(&mut self, params: &ShanChenParams) -> Result<(), LbmError> {
        self.collide(params);
        let ok = self.stream();
        self.step += 1;
        if ok {
            Ok(())
        } else {
            Err(LbmError::NumericBlowup {
                step: self.step,
                level: None,
            })
        }
    }

    /// Runs `n` steps, stopping at the first numeric failure.
    pub fn run(&mut self, params: &ShanChenParams, n: usize) -> Result<(), LbmError> {
        for _ in 0..n {
            self.step(params)?;
        }
        Ok(())
    }

    fn collide(&mut self, p: &ShanChenParams) {
        let LatticeState {
            f,
            rho,
            nbr,
            wall,
            kind,
            slabs,
            pool,
            ..
        } = self;
        let rho: &[[f64; 2]] = rho;
        let nbr: &[u32] = nbr;
        let wall: &[[f64; 3]] = wall;
        let kind: &[CellType] = kind;
        let coeffs = Coeffs::new(p);
        let parts = split_by_slabs(f, slabs, STRIDE);
        pool.install(|| {
            parts.into_par_iter().for_each(|(range, chunk)| {
                for s in range.clone() {
                    if kind[s] != CellType::Fluid {
                        continue;
                    }
                    let off = (s - range.start) * STRIDE;
                    collide_site(
                        &mut chunk[off..off + STRIDE],
                        s,
                        rho,
                        nbr,
                        wall[s],
                        &coeffs,
                    );
                }
            })
        });
    }

    fn stream(&mut self) -> bool {
        let LatticeState {
            f,
            f_tmp,
            rho,
            nbr,
            kind,
            slabs,
            pool,
            inlet_rho,
            outlet_rho,
            ..
        } = self;
        let src: &[f64] = f;
        let nbr: &[u32] = nbr;
        let kind: &[CellType] = kind;
        let (inlet, outlet) = (*inlet_rho, *outlet_rho);
        let dst_parts = split_by_slabs(f_tmp, slabs, STRIDE);
        let rho_parts = split_by_slabs(rho, slabs, 1);
        let healthy = pool.install(|| {
            dst_parts
                .into_par_iter()
                .zip(rho_parts)
                .map(|((range, dst), (_, rho_out))| {
                    let mut ok = true;
                    for s in range.clone() {
                        let local = s - range.start;
                        let out = &mut dst[local * STRIDE..(local + 1) * STRIDE];
                        let r = match kind[s] {
                            CellType::Inlet => hold(out, inlet),
                            CellType::Outlet => hold(out, outlet),
                            _ => pull_site(out, s, src, nbr),
                        };
                        ok &= r[0].is_finite()
                            && r[1].is_finite()
                            && r[0] <= BLOWUP_DENSITY
                            && r[1] <= BLOWUP_DENSITY;
                        rho_out[local] = r;
                    }
                    ok
                })
                .reduce(|| true, |a, b| a && b)
        });
        std::mem::swap(f, f_tmp);
        healthy
    }
}

struct Coeffs {
    g_ab: f64,
    g_ads: [f64; 2],
    tau: [f64; 2],
    omega: [f64; 2],
}

impl Coeffs {
    fn new(p: &ShanChenParams) -> Self {
        Coeffs {
            g_ab: p.g_ab,
            g_ads: [p.g_ads_a, p.g_ads_b],
            tau: [p.tau_a, p.tau_b],
            omega: [1.0 / p.tau_a, 1.0 / p.tau_b],
        }
    }
}

#[inline(always)]
fn collide_site(
    cell: &mut [f64],
    s: usize,
    rho: &[[f64; 2]],
    nbr: &[u32],
    wall: [f64; 3],
    c: &Coeffs,
) {
    let [ra, rb] = rho[s];
    let (fa, fb) = cell.split_at_mut(Q);

    let mut ja = [0.0; 3];
    let mut jb = [0.0; 3];
    let mut sa = [0.0; 3];
    let mut sb = [0.0; 3];
    let links = &nbr[s * Q..(s + 1) * Q];
    for q in 1..Q {
        let e = ef(q);
        for k in 0..3 {
            ja[k] += fa[q] * e[k];
            jb[k] += fb[q] * e[k];
        }
        // neighbour at x + e_q is the pull source of the opposite direction
        let n = links[OPP[q]];
        if n != NONE {
            let r = rho[n as usize];
            for k in 0..3 {
                sa[k] += W[q] * r[0] * e[k];
                sb[k] += W[q] * r[1] * e[k];
            }
        }
    }

    let denom = ra * c.omega[0] + rb * c.omega[1];
    let mut common = [0.0; 3];
    if denom > 0.0 {
        for k in 0..3 {
            common[k] = (ja[k] * c.omega[0] + jb[k] * c.omega[1]) / denom;
        }
    }
    let mut ua = [0.0; 3];
    let mut ub = [0.0; 3];
    for k in 0..3 {
        let acc_a = -c.g_ab * sb[k] - c.g_ads[0] * wall[k];
        let acc_b = -c.g_ab * sa[k] - c.g_ads[1] * wall[k];
        ua[k] = common[k] + c.tau[0] * acc_a;
        ub[k] = common[k] + c.tau[1] * acc_b;
    }
    relax(fa, ra, ua, c.omega[0]);
    relax(fb, rb, ub, c.omega[1]);
}

#[inline(always)]
fn relax(f: &mut [f64], rho: f64, u: [f64; 3], omega: f64) {
    let mut eq = [0.0; Q];
    equilibrium(rho, u, &mut eq);
    for q in 0..Q {
        f[q] += omega * (eq[q] - f[q]);
    }
}

#[inline(always)]
fn pull_site(out: &mut [f64], s: usize, src: &[f64], nbr: &[u32]) -> [f64; 2] {
    let own = s * STRIDE;
    out[0] = src[own];
    out[Q] = src[own + Q];
    let links = &nbr[s * Q..(s + 1) * Q];
    for q in 1..Q {
        let n = links[q];
        if n == NONE {
            out[q] = src[own + OPP[q]];
            out[Q + q] = src[own + Q + OPP[q]];
        } else {
            let b = n as usize * STRIDE;
            out[q] = src[b + q];
            out[Q + q] = src[b + Q + q];
        }
    }
    [out[..Q].iter().sum(), out[Q..].iter().sum()]
}

#[inline]
fn hold(out: &mut [f64], r: [f64; 2]) -> [f64; 2] {
    equilibrium(r[0], [0.0; 3], &mut out[..Q]);
    equilibrium(r[1], [0.0; 3], &mut out[Q..]);
    r
}

/// Disjoint mutable views of `data`, one per slab, `per_site` values per slot.
fn split_by_slabs<'a, T>(
    data: &'a mut [T],
    slabs: &[Range<usize>],
    per_site: usize,
) -> Vec<(Range<usize>, &'a mut [T])> {
    let mut out = Vec::with_capacity(slabs.len());
    let mut rest = data;
    for r in slabs {
        let (head, tail) = rest.split_at_mut(r.len() * per_site);
        out.push((r.clone(), head));
        rest = tail;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbmfill::d3q19::E;
    use crate::lbmfill::CellType;
    use crate::voxelgrid::Dims;

    fn periodic_box(n: usize, init: impl FnMut(usize) -> ([f64; 2], [f64; 3])) -> LatticeState {
        let dims = Dims::cube(n);
        LatticeState::from_cells(dims, vec![CellType::Fluid; dims.len()], [true; 3], 1, init)
            .unwrap()
    }

    #[test]
    fn uniform_rest_state_is_fixed_point() {
        let p = ShanChenParams {
            g_ab: 0.0,
            ..ShanChenParams::default()
        };
        let mut st = periodic_box(6, |_| ([1.0, 0.0], [0.0; 3]));
        let before = st.distributions().to_vec();
        st.run(&p, 20).unwrap();
        for (a, b) in st.distributions().iter().zip(&before) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_flow_advects_without_spurious_force() {
        let p = ShanChenParams {
            g_ab: 0.0,
            ..ShanChenParams::default()
        };
        let u0 = [0.02, -0.01, 0.005];
        let mut st = periodic_box(6, |_| ([1.0, 0.0], u0));
        st.run(&p, 50).unwrap();
        for cell in 0..st.dims().len() {
            let u = st.velocity(cell, &p);
            for k in 0..3 {
                assert!((u[k] - u0[k]).abs() < 1e-13, "{u:?}");
            }
        }
    }

    #[test]
    fn halfway_bounce_back_reverses_populations() {
        // 3x1x1 channel with walls at both x ends, single moving population
        let dims = Dims::new(3, 1, 1);
        let mut st = LatticeState::from_cells(
            dims,
            vec![CellType::Fluid; 3],
            [false, true, true],
            1,
            |_| ([0.0, 0.0], [0.0; 3]),
        )
        .unwrap();
        // population moving +x at the last site
        st.f[2 * STRIDE + 1] = 1.0;
        st.stream();
        assert_eq!(st.f[2 * STRIDE + 2], 1.0);
        assert_eq!(E[2], [-1, 0, 0]);
        st.stream();
        assert_eq!(st.f[STRIDE + 2], 1.0);
    }
}

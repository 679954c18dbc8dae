//! D3Q19 velocity set.
//!
//! Index 0 is the rest population, 1..=6 the face directions and 7..=18 the
//! edge diagonals. Weights are 1/3, 1/18 and 1/36; the lattice speed of sound
//! is c_s^2 = 1/3.

pub const Q: usize = 19;

pub const CS2: f64 = 1.0 / 3.0;

pub const E: [[i32; 3]; Q] = [
    [0, 0, 0],
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [1, 0, 1],
    [-1, 0, -1],
    [1, 0, -1],
    [-1, 0, 1],
    [0, 1, 1],
    [0, -1, -1],
    [0, 1, -1],
    [0, -1, 1],
];

pub const W: [f64; Q] = [
    1.0 / 3.0,
    1.0 / 18.0,
    1.0 / 18.0,
    1.0 / 18.0,
    1.0 / 18.0,
    1.0 / 18.0,
    1.0 / 18.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

pub const OPP: [usize; Q] = [0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17];

const EF: [[f64; 3]; Q] = {
    let mut out = [[0.0; 3]; Q];
    let mut q = 0;
    while q < Q {
        out[q] = [E[q][0] as f64, E[q][1] as f64, E[q][2] as f64];
        q += 1;
    }
    out
};

#[inline(always)]
pub fn ef(q: usize) -> [f64; 3] {
    EF[q]
}

/// Second-order equilibrium populations for density `rho` and velocity `u`.
#[inline(always)]
pub fn equilibrium(rho: f64, u: [f64; 3], out: &mut [f64]) {
    let usq = 1.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    for q in 0..Q {
        let e = EF[q];
        let eu = 3.0 * (e[0] * u[0] + e[1] * u[1] + e[2] * u[2]);
        out[q] = W[q] * rho * (1.0 + eu + 0.5 * eu * eu - usq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_isotropy() {
        let wsum: f64 = W.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-15);
        for a in 0..3 {
            let first: f64 = (0..Q).map(|q| W[q] * EF[q][a]).sum();
            assert!(first.abs() < 1e-15);
            for b in 0..3 {
                let second: f64 = (0..Q).map(|q| W[q] * EF[q][a] * EF[q][b]).sum();
                let want = if a == b { CS2 } else { 0.0 };
                assert!((second - want).abs() < 1e-15);
            }
        }
        for q in 0..Q {
            let o = OPP[q];
            assert_eq!([-E[q][0], -E[q][1], -E[q][2]], E[o]);
        }
    }

    #[test]
    fn equilibrium_moments() {
        let mut f = [0.0; Q];
        let u = [0.03, -0.01, 0.02];
        equilibrium(1.3, u, &mut f);
        let rho: f64 = f.iter().sum();
        assert!((rho - 1.3).abs() < 1e-14);
        for a in 0..3 {
            let j: f64 = (0..Q).map(|q| f[q] * EF[q][a]).sum();
            assert!((j - 1.3 * u[a]).abs() < 1e-14);
        }
    }
}

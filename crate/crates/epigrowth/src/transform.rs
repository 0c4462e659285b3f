//! Physical <-> spectral transforms.
//!
//! The sine/cosine tensor basis is carried on a complex DFT lattice. Per
//! axis, a real mode m occupies the two conjugate bins m and n - m:
//!
//! ```text
//!   m > 0 (sin):   A[m]   += -i/2 * sqrt(2/L) * c      A[n-m] += +i/2 * sqrt(2/L) * c
//!   m < 0 (cos):   A[|m|] += 1/2 * sqrt(2/L) * c       A[n-|m|] += 1/2 * sqrt(2/L) * c
//!   m = 0:         A[0]   += c / sqrt(L)
//! ```
//!
//! so synthesis is a sparse scatter (4 bins per 2-d mode) followed by an
//! unnormalized inverse DFT, and analysis is a forward DFT followed by the
//! conjugate gather times the quadrature weight (L/n)^2. Both directions
//! cost O(n^2 log n); the scatter/gather is exact, so round trips are exact
//! up to rounding whenever the grid resolves the truncation (n >= 2N+2,
//! which keeps bins m and n-m distinct).

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

use crate::field::{PhysicalGrid, SpectralField};
use crate::lattice::WavenumberLattice;
use crate::{Error, Result};

type C64 = Complex<f64>;

/// Up to two (bin, amplitude) pairs for one axis component.
fn axis_bins(l: f64, m: i32, n: usize, synthesis: bool) -> ((usize, C64), Option<(usize, C64)>) {
    let s = (2.0 / l).sqrt();
    if m == 0 {
        return ((0, C64::new(1.0 / l.sqrt(), 0.0)), None);
    }
    let a = m.unsigned_abs() as usize;
    debug_assert!(2 * a < n, "bins {a} and {} must stay distinct", n - a);
    if m > 0 {
        // analysis uses the conjugate weights of synthesis
        let im = if synthesis { -0.5 * s } else { 0.5 * s };
        (
            (a, C64::new(0.0, im)),
            Some((n - a, C64::new(0.0, -im))),
        )
    } else {
        ((a, C64::new(0.5 * s, 0.0)), Some((n - a, C64::new(0.5 * s, 0.0))))
    }
}

fn min_grid(lat: &WavenumberLattice) -> usize {
    (2 * lat.trunc() + 2) as usize
}

thread_local! {
    // plans are cached per size inside the planner; keep one per thread so
    // hot stepping loops do not re-plan every transform
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn fft_2d(buf: &mut [C64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, n);
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, n);
}

fn transpose_square(buf: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Evaluate the finite series on the uniform n x n grid. Exact synthesis
/// (the only error is rounding); n may be any size >= 2N+2, powers of two
/// are fastest.
pub fn to_physical(u: &SpectralField, n: usize) -> Result<PhysicalGrid> {
    let lat = u.lattice();
    if n < min_grid(lat) {
        return Err(Error::GridTooCoarse {
            n,
            trunc: lat.trunc(),
            min: min_grid(lat),
        });
    }
    let l = lat.domain_len();
    let mut buf = vec![C64::new(0.0, 0.0); n * n];
    for (m, &c) in lat.modes().iter().zip(u.coeffs()) {
        if c == 0.0 {
            continue;
        }
        let (b1, b1b) = axis_bins(l, m.k1, n, true);
        let (b2, b2b) = axis_bins(l, m.k2, n, true);
        for (p1, a1) in std::iter::once(b1).chain(b1b) {
            for (p2, a2) in std::iter::once(b2).chain(b2b) {
                buf[p1 * n + p2] += a1 * a2 * c;
            }
        }
    }
    let fft = plan(n, true);
    fft_2d(&mut buf, n, &fft);
    Ok(PhysicalGrid::new(l, n, buf.iter().map(|z| z.re).collect()))
}

/// Project grid samples onto the lattice: u_k = <g, e_k> by the rectangle
/// rule, which is exact for band-limited g. The grid mean (the k = 0
/// component) is discarded.
pub fn to_spectral(g: &PhysicalGrid, lattice: &Arc<WavenumberLattice>) -> Result<SpectralField> {
    assert_eq!(
        g.domain_len,
        lattice.domain_len(),
        "grid and lattice disagree on L"
    );
    let n = g.n;
    if n < min_grid(lattice) {
        return Err(Error::GridTooCoarse {
            n,
            trunc: lattice.trunc(),
            min: min_grid(lattice),
        });
    }
    let mut buf: Vec<C64> = g.values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let fft = plan(n, false);
    fft_2d(&mut buf, n, &fft);
    let l = lattice.domain_len();
    let cell = (l / n as f64) * (l / n as f64);
    let mut out = SpectralField::zeros(lattice);
    for (m, c) in lattice.modes().iter().zip(out.coeffs_mut()) {
        let (b1, b1b) = axis_bins(l, m.k1, n, false);
        let (b2, b2b) = axis_bins(l, m.k2, n, false);
        let mut acc = C64::new(0.0, 0.0);
        for (p1, w1) in std::iter::once(b1).chain(b1b) {
            for (p2, w2) in std::iter::once(b2).chain(b2b) {
                acc += w1 * w2 * buf[p1 * n + p2];
            }
        }
        *c = cell * acc.re;
    }
    Ok(out)
}

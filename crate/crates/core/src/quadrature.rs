//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.
//!
//! Used to build reference values (densities integrating to one, CDFs,
//! integral representations of special functions) that are independent of
//! the closed forms implemented elsewhere in the crate.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol * |integral|)`. Returns `(value, error estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    // Subdivide up front so narrow peaks are not missed by the first rule.
    const INITIAL: usize = 16;
    const MAX_INTERVALS: usize = 20_000;
    let mut pending: Vec<(f64, f64, f64, f64)> = (0..INITIAL)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / INITIAL as f64;
            let hi = a + (b - a) * (i + 1) as f64 / INITIAL as f64;
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let total: f64 = pending.iter().map(|s| s.2).sum();
        let err: f64 = pending.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || pending.len() >= MAX_INTERVALS {
            return (total, err);
        }
        let (idx, _) = pending
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pending.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pending.push((lo, mid, v1, e1));
        pending.push((mid, hi, v2, e2));
    }
}

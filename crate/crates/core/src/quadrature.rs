//! Fixed quadrature rules on the reference triangle and interval.

/// Barycentric coordinates and weights (weights sum to 1).
#[derive(Debug, Clone, Copy)]
pub struct TriRule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

/// Interior 3-point rule, exact for quadratics.
pub const TRI3: TriRule = TriRule {
    points: &[
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

const D6_A: f64 = 0.445_948_490_915_965;
const D6_B: f64 = 0.091_576_213_509_771;
const D6_WA: f64 = 0.223_381_589_678_011;
const D6_WB: f64 = 0.109_951_743_655_322;

/// Dunavant 6-point rule, exact for quartics.
pub const TRI6: TriRule = TriRule {
    points: &[
        [1.0 - 2.0 * D6_A, D6_A, D6_A],
        [D6_A, 1.0 - 2.0 * D6_A, D6_A],
        [D6_A, D6_A, 1.0 - 2.0 * D6_A],
        [1.0 - 2.0 * D6_B, D6_B, D6_B],
        [D6_B, 1.0 - 2.0 * D6_B, D6_B],
        [D6_B, D6_B, 1.0 - 2.0 * D6_B],
    ],
    weights: &[D6_WA, D6_WA, D6_WA, D6_WB, D6_WB, D6_WB],
};

/// Gauss–Legendre nodes on `[0, 1]` with weights summing to 1.
#[derive(Debug, Clone, Copy)]
pub struct LineRule {
    pub points: &'static [f64],
    pub weights: &'static [f64],
}

const GL3_X: f64 = 0.387_298_334_620_741_7; // sqrt(3/5)/2

pub const GL3: LineRule = LineRule {
    points: &[0.5 - GL3_X, 0.5, 0.5 + GL3_X],
    weights: &[5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
};

const GL5_X1: f64 = 0.538_469_310_105_683_1;
const GL5_X2: f64 = 0.906_179_845_938_664;
const GL5_W0: f64 = 0.568_888_888_888_888_9;
const GL5_W1: f64 = 0.478_628_670_499_366_5;
const GL5_W2: f64 = 0.236_926_885_056_189_1;

pub const GL5: LineRule = LineRule {
    points: &[
        0.5 - 0.5 * GL5_X2,
        0.5 - 0.5 * GL5_X1,
        0.5,
        0.5 + 0.5 * GL5_X1,
        0.5 + 0.5 * GL5_X2,
    ],
    weights: &[
        0.5 * GL5_W2,
        0.5 * GL5_W1,
        0.5 * GL5_W0,
        0.5 * GL5_W1,
        0.5 * GL5_W2,
    ],
};

/// Composite Gauss–Legendre integral of `f` over `[a, b]` with `panels` panels.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let x0 = a + k as f64 * h;
        let mut s = 0.0;
        for (t, w) in GL5.points.iter().zip(GL5.weights) {
            s += w * f(x0 + t * h);
        }
        total += s * h;
    }
    total
}

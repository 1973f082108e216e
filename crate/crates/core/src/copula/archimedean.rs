//! Gumbel and Clayton copulas.

/// `exp(−[(−ln u)^θ + (−ln v)^θ]^{1/θ})`.
pub fn gumbel_cdf(theta: f64, u: f64, v: f64) -> f64 {
    let a = gumbel_a(theta, -u.ln(), -v.ln());
    (-a).exp()
}

fn gumbel_a(theta: f64, x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return y;
    }
    if y == 0.0 {
        return x;
    }
    let (lx, ly) = (theta * x.ln(), theta * y.ln());
    let m = lx.max(ly);
    let lse = m + ((lx - m).exp() + (ly - m).exp()).ln();
    (lse / theta).exp()
}

pub fn gumbel_ln_pdf(theta: f64, u: f64, v: f64) -> f64 {
    let (x, y) = (-u.ln(), -v.ln());
    let a = gumbel_a(theta, x, y);
    -a + x + y + (theta - 1.0) * (x.ln() + y.ln()) + (2.0 - 2.0 * theta) * a.ln() + ((theta - 1.0) / a).ln_1p()
}

/// `P(V ≤ v | U = u)` for Gumbel.
pub fn gumbel_h(theta: f64, u: f64, v: f64) -> f64 {
    let (x, y) = (-u.ln(), -v.ln());
    let a = gumbel_a(theta, x, y);
    // C · A^{1−θ} · x^{θ−1} / u
    ((-a) + (1.0 - theta) * a.ln() + (theta - 1.0) * x.ln() + x).exp()
}

/// `ln(u^{−δ} + v^{−δ} − 1)` from `ln u`, `ln v`; `None` outside the support.
fn clayton_ln_bracket(delta: f64, lu: f64, lv: f64) -> Option<f64> {
    let (a, b) = (-delta * lu, -delta * lv);
    let m = a.max(b);
    if m > 30.0 {
        return Some(m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln());
    }
    let s = a.exp_m1() + b.exp_m1();
    (s > -1.0).then(|| s.ln_1p())
}

/// `(u^{−δ} + v^{−δ} − 1)^{−1/δ}`, zero outside the support when `δ < 0`.
pub fn clayton_cdf(delta: f64, u: f64, v: f64) -> f64 {
    if delta == 0.0 {
        return u * v;
    }
    match clayton_ln_bracket(delta, u.ln(), v.ln()) {
        Some(l) => (-l / delta).exp(),
        None => 0.0,
    }
}

pub fn clayton_ln_pdf(delta: f64, u: f64, v: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let (lu, lv) = (u.ln(), v.ln());
    match clayton_ln_bracket(delta, lu, lv) {
        Some(l) => delta.ln_1p() - (1.0 + delta) * (lu + lv) - (2.0 + 1.0 / delta) * l,
        None => f64::NEG_INFINITY,
    }
}

/// `P(V ≤ v | U = u)` for Clayton.
pub fn clayton_h(delta: f64, u: f64, v: f64) -> f64 {
    if delta == 0.0 {
        return v;
    }
    let lu = u.ln();
    match clayton_ln_bracket(delta, lu, v.ln()) {
        // u^{−δ−1} · bracket^{−1/δ−1}
        Some(l) => ((-delta - 1.0) * lu - (1.0 / delta + 1.0) * l).exp(),
        None => 0.0,
    }
}

/// Inverse of [`clayton_h`] in `v`.
pub fn clayton_h_inv(delta: f64, u: f64, w: f64) -> f64 {
    if delta == 0.0 {
        return w;
    }
    // v^{−δ} = (w^{−δ/(1+δ)} − 1)·u^{−δ} + 1
    let a = (-delta / (1.0 + delta) * w.ln()).exp_m1();
    let b = (-delta * u.ln()).exp();
    let inner = a * b;
    if inner <= -1.0 {
        return 0.0;
    }
    (-inner.ln_1p() / delta).exp().clamp(0.0, 1.0)
}

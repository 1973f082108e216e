//! Joe–Clayton and symmetrised Joe–Clayton copulas, parameterised by their
//! tail-dependence coefficients.
//!
//! JC: `C = 1 − (1 − {[1−(1−u)^κ]^{−γ} + [1−(1−v)^κ]^{−γ} − 1}^{−1/γ})^{1/κ}`
//! with `κ = 1/log₂(2−λ_U)` and `γ = −1/log₂(λ_L)`.
//! SJC: `½(C_JC(u,v | λ_U,λ_L) + C_JC(1−u,1−v | λ_L,λ_U) + u + v − 1)`; the
//! tail arguments swap in the survival term so that the SJC tails are exactly
//! `(λ_U, λ_L)`.

#[derive(Debug, Clone, Copy)]
struct Jc {
    kappa: f64,
    gamma: f64,
}

impl Jc {
    fn new(lambda_u: f64, lambda_l: f64) -> Self {
        Jc {
            kappa: 1.0 / (2.0 - lambda_u).log2(),
            gamma: -1.0 / lambda_l.log2(),
        }
    }

    /// ln A(u) with A(u) = 1 − (1−u)^κ.
    fn ln_a(&self, u: f64) -> f64 {
        let y = self.kappa * (-u).ln_1p();
        if y < -std::f64::consts::LN_2 {
            (-y.exp()).ln_1p()
        } else {
            (-y.exp_m1()).ln()
        }
    }

    /// (x − 1, S) where x = A(u)^{−γ} + A(v)^{−γ} − 1 and S = x^{−1/γ}.
    fn inner(&self, lau: f64, lav: f64) -> (f64, f64) {
        let xm1 = (-self.gamma * lau).exp_m1() + (-self.gamma * lav).exp_m1();
        let s = (-xm1.ln_1p() / self.gamma).exp();
        (xm1, s)
    }

    /// ln(1 − S), accurate when S is close to 1.
    fn ln_one_minus_s(&self, xm1: f64) -> f64 {
        (-(-xm1.ln_1p() / self.gamma).exp_m1()).ln()
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let (xm1, _) = self.inner(self.ln_a(u), self.ln_a(v));
        -(self.ln_one_minus_s(xm1) / self.kappa).exp_m1()
    }

    fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        let (k, g) = (self.kappa, self.gamma);
        let (lau, lav) = (self.ln_a(u), self.ln_a(v));
        let (xm1, s) = self.inner(lau, lav);
        let l1s = self.ln_one_minus_s(xm1);
        let ln_p = (-g - 1.0) * (lau + lav) + 2.0 * k.ln() + (k - 1.0) * ((-u).ln_1p() + (-v).ln_1p());
        let bracket = (1.0 - 1.0 / k) * s + (1.0 + g) * l1s.exp();
        -k.ln() + ln_p + (1.0 / k - 2.0) * l1s + (-1.0 / g - 2.0) * xm1.ln_1p() + bracket.ln()
    }

    /// ∂C/∂u.
    fn d_du(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let (k, g) = (self.kappa, self.gamma);
        let (lau, lav) = (self.ln_a(u), self.ln_a(v));
        let (xm1, _) = self.inner(lau, lav);
        let l1s = self.ln_one_minus_s(xm1);
        ((1.0 / k - 1.0) * l1s + (-1.0 / g - 1.0) * xm1.ln_1p() + (-g - 1.0) * lau + (k - 1.0) * (-u).ln_1p()).exp()
    }
}

/// Joe–Clayton CDF.
pub fn joe_clayton_cdf(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> f64 {
    Jc::new(lambda_u, lambda_l).cdf(u, v)
}

/// Joe–Clayton log density.
pub fn joe_clayton_ln_pdf(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> f64 {
    Jc::new(lambda_u, lambda_l).ln_pdf(u, v)
}

/// Symmetrised Joe–Clayton CDF.
pub fn sjc_cdf(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> f64 {
    let upper = Jc::new(lambda_u, lambda_l);
    let survival = Jc::new(lambda_l, lambda_u);
    let c = 0.5 * (upper.cdf(u, v) + survival.cdf(1.0 - u, 1.0 - v) + u + v - 1.0);
    c.clamp((u + v - 1.0).max(0.0), u.min(v))
}

pub fn sjc_ln_pdf(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> f64 {
    let a = Jc::new(lambda_u, lambda_l).ln_pdf(u, v);
    let b = Jc::new(lambda_l, lambda_u).ln_pdf(1.0 - u, 1.0 - v);
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln() - std::f64::consts::LN_2
}

/// `P(V ≤ v | U = u)` for SJC.
pub fn sjc_h(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> f64 {
    let a = Jc::new(lambda_u, lambda_l).d_du(u, v);
    let b = Jc::new(lambda_l, lambda_u).d_du(1.0 - u, 1.0 - v);
    (0.5 * (a - b + 1.0)).clamp(0.0, 1.0)
}

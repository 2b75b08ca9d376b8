//! Quadrature evaluation of the LK double integral for two Laplace densities.

use crate::error::{Error, Result};

/// Composite Gauss-Legendre settings, expressed in multiples of the scale `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Integration extends this many `b` beyond both means.
    pub half_width: f64,
    /// Width of each Gauss-Legendre panel.
    pub panel_width: f64,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { half_width: 40.0, panel_width: 0.4, nodes_per_panel: 10 }
    }
}

impl QuadratureSettings {
    /// Nodes on the shortest possible axis (both means equal).
    pub fn min_nodes_per_axis(&self) -> usize {
        ((2.0 * self.half_width / self.panel_width).ceil() as usize) * self.nodes_per_panel
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= 12.0) {
            return Err(Error::Config(format!(
                "quadrature half-width must be at least 12 scales, got {}",
                self.half_width
            )));
        }
        if !(self.panel_width > 0.0) || self.nodes_per_panel == 0 {
            return Err(Error::Config("quadrature panels need positive width and at least one node".into()));
        }
        if self.min_nodes_per_axis() < 2000 {
            return Err(Error::Config(format!(
                "quadrature needs at least 2000 nodes per axis, settings give {}",
                self.min_nodes_per_axis()
            )));
        }
        Ok(())
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panel: f64,
}

impl Rule {
    /// Integrate `f` over `[lo, hi]`, splitting at every breakpoint inside
    /// the interval so no panel straddles a kink.
    fn integrate(&self, lo: f64, hi: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        cuts.push(lo);
        cuts.extend(breaks.iter().copied().filter(|&c| c > lo && c < hi));
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for seg in cuts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let panels = (len / self.panel).ceil().max(1.0) as usize;
            let h = len / panels as f64;
            for k in 0..panels {
                let mid = a + (k as f64 + 0.5) * h;
                let half = 0.5 * h;
                let s: f64 = self
                    .nodes
                    .iter()
                    .zip(&self.weights)
                    .map(|(&t, &w)| w * f(mid + half * t))
                    .sum();
                total += half * s;
            }
        }
        total
    }
}

/// Numerical value of `∬ |x − y| f(x) g(y) dx dy` with `f = Laplace(0, b)`
/// and `g = Laplace(mu, b)`.
///
/// Both axes are integrated with composite Gauss-Legendre panels, split at
/// the density peaks and, for the inner axis, at the `|x − y|` kink.
pub fn lk_numeric_oracle(mu: f64, b: f64, settings: &QuadratureSettings) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("LK scale must be positive and finite, got {b}")));
    }
    if !mu.is_finite() {
        return Err(Error::Domain(format!("LK mean difference must be finite, got {mu}")));
    }
    settings.validate()?;
    let (nodes, weights) = gauss_legendre(settings.nodes_per_panel);
    let rule = Rule { nodes, weights, panel: settings.panel_width * b };
    let lo = mu.min(0.0) - settings.half_width * b;
    let hi = mu.max(0.0) + settings.half_width * b;
    let density = |t: f64, centre: f64| (-(t - centre).abs() / b).exp() / (2.0 * b);

    let outer = |x: f64| {
        let inner = rule.integrate(lo, hi, &[x, mu], |y| (x - y).abs() * density(y, mu));
        density(x, 0.0) * inner
    };
    Ok(rule.integrate(lo, hi, &[0.0, mu], outer))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 10 polynomial: ∫ t^10 = 2/11
        let v: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.powi(10)).sum();
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
        let (x1, w1) = gauss_legendre(1);
        assert_eq!(x1, vec![0.0]);
        assert!((w1[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn settings_enforce_minimums() {
        assert!(QuadratureSettings::default().validate().is_ok());
        let narrow = QuadratureSettings { half_width: 8.0, ..Default::default() };
        assert!(narrow.validate().is_err());
        let coarse = QuadratureSettings { nodes_per_panel: 2, ..Default::default() };
        assert!(coarse.validate().is_err());
    }

    #[test]
    fn oracle_at_zero_mean_difference() {
        let v = lk_numeric_oracle(0.0, 1.0, &QuadratureSettings::default()).unwrap();
        assert!((v - 1.5).abs() <= 1e-6, "{v}");
    }

    #[test]
    fn oracle_is_symmetric_in_sign_of_mu() {
        let s = QuadratureSettings::default();
        let a = lk_numeric_oracle(1.3, 0.7, &s).unwrap();
        let b = lk_numeric_oracle(-1.3, 0.7, &s).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}

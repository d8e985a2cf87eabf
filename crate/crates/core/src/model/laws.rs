//! Pointwise constitutive laws: relative conductivity, inter-continuum
//! transfer coefficients and source terms.

use serde::{Deserialize, Serialize};

/// Relative conductivity `mu(p)` multiplying the spatial field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `e^p`
    Exponential,
    /// `1 / (1 + |p|)`
    InverseShift,
    /// `e^{-alpha |p|}`
    Gardner { alpha: f64 },
    Constant,
}

impl Nonlinearity {
    pub fn mu(&self, p: f64) -> f64 {
        match *self {
            Nonlinearity::Exponential => p.exp(),
            Nonlinearity::InverseShift => 1.0 / (1.0 + p.abs()),
            Nonlinearity::Gardner { alpha } => (-alpha * p.abs()).exp(),
            Nonlinearity::Constant => 1.0,
        }
    }

    /// True when `mu` does not depend on the pressure.
    pub fn is_linear(&self) -> bool {
        matches!(self, Nonlinearity::Constant)
    }
}

/// `kappa_cell * mu(p)`.
pub fn eval_conductivity(nl: &Nonlinearity, kappa_cell: f64, p: f64) -> f64 {
    kappa_cell * nl.mu(p)
}

/// Transfer coefficient `Q_il(p_i, p_l)`; it multiplies `p_i - p_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransferLaw {
    Zero,
    Constant { beta: f64 },
    /// `beta / (1 + |p_i|)`
    ScaledInverseShift { beta: f64 },
}

impl TransferLaw {
    pub fn coefficient(&self, p_i: f64, _p_l: f64) -> f64 {
        match *self {
            TransferLaw::Zero => 0.0,
            TransferLaw::Constant { beta } => beta,
            TransferLaw::ScaledInverseShift { beta } => beta / (1.0 + p_i.abs()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            TransferLaw::Zero => true,
            TransferLaw::Constant { beta } | TransferLaw::ScaledInverseShift { beta } => beta == 0.0,
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, TransferLaw::ScaledInverseShift { .. })
    }

    /// Upper bound of the coefficient over all pressures.
    pub fn bound(&self) -> f64 {
        match *self {
            TransferLaw::Zero => 0.0,
            TransferLaw::Constant { beta } | TransferLaw::ScaledInverseShift { beta } => beta,
        }
    }
}

/// Transfer laws for every ordered pair of continua. Diagonal entries are
/// ignored and kept as `Zero`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    n: usize,
    laws: Vec<TransferLaw>,
}

impl Transfer {
    pub fn none(n: usize) -> Self {
        Self {
            n,
            laws: vec![TransferLaw::Zero; n * n],
        }
    }

    /// The same law for every ordered pair `i != l`.
    pub fn uniform(n: usize, law: TransferLaw) -> Self {
        let mut t = Self::none(n);
        for i in 0..n {
            for l in 0..n {
                if i != l {
                    t.laws[i * n + l] = law;
                }
            }
        }
        t
    }

    pub fn set(&mut self, i: usize, l: usize, law: TransferLaw) {
        assert!(i != l && i < self.n && l < self.n, "transfer pair ({i}, {l}) out of range");
        self.laws[i * self.n + l] = law;
    }

    pub fn law(&self, i: usize, l: usize) -> &TransferLaw {
        &self.laws[i * self.n + l]
    }

    pub fn continua(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.laws.iter().all(TransferLaw::is_zero)
    }

    pub fn is_linear(&self) -> bool {
        self.laws.iter().all(TransferLaw::is_linear)
    }
}

pub fn eval_transfer(transfer: &Transfer, i: usize, l: usize, p_i: f64, p_l: f64) -> f64 {
    transfer.law(i, l).coefficient(p_i, p_l)
}

/// Right-hand side `f_i(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Constant { value: f64 },
    /// `amplitude * sin(pi x) sin(pi y)`
    SeparableSine { amplitude: f64 },
    /// `scale * e^{x + y}`
    ExpSum { scale: f64 },
}

impl Source {
    pub fn eval(&self, _t: f64, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Source::Constant { value } => value,
            Source::SeparableSine { amplitude } => amplitude * (PI * x).sin() * (PI * y).sin(),
            Source::ExpSum { scale } => scale * (x + y).exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Source::Constant { value } => value == 0.0,
            Source::SeparableSine { amplitude } => amplitude == 0.0,
            Source::ExpSum { scale } => scale == 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conductivity_values() {
        let g = Nonlinearity::Gardner { alpha: 0.1 };
        assert_eq!(eval_conductivity(&g, 1.0, 0.0), 1.0);
        assert!((eval_conductivity(&g, 1.0, 10.0) - 0.367879).abs() < 1e-6);
        assert_eq!(eval_conductivity(&Nonlinearity::InverseShift, 10.0, 1.0), 5.0);
        assert_eq!(eval_conductivity(&Nonlinearity::Exponential, 2.0, 0.0), 2.0);
    }

    #[test]
    fn transfer_values() {
        let t = Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta: 10.0 });
        assert_eq!(eval_transfer(&t, 0, 1, 0.0, 3.0), 10.0);
        let t = Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta: 100.0 });
        assert_eq!(eval_transfer(&t, 0, 1, 1.0, 0.0), 50.0);
        assert_eq!(eval_transfer(&Transfer::none(2), 0, 1, 1.0, 2.0), 0.0);
    }

    #[test]
    fn sources() {
        assert_eq!(Source::Constant { value: -1.0 }.eval(0.0, 0.3, 0.2), -1.0);
        let s = Source::SeparableSine { amplitude: 1.0 }.eval(0.0, 0.5, 0.5);
        assert!((s - 1.0).abs() < 1e-15);
        assert!((Source::ExpSum { scale: -1.0 }.eval(0.0, 1.0, 1.0) + 2f64.exp()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bounded_laws_stay_in_range(p in -1e6f64..1e6, kappa in 1e-3f64..1e5) {
            for nl in [Nonlinearity::InverseShift, Nonlinearity::Gardner { alpha: 0.1 }] {
                let k = eval_conductivity(&nl, kappa, p);
                prop_assert!(k > 0.0 || p.abs() > 1e3);
                prop_assert!(k <= kappa);
            }
            let e = eval_conductivity(&Nonlinearity::Exponential, kappa, p.clamp(-50.0, 50.0));
            prop_assert!((e - kappa * p.clamp(-50.0, 50.0).exp()).abs() <= 1e-12 * e);
        }

        #[test]
        fn transfer_bound(p_i in -1e6f64..1e6, p_l in -1e6f64..1e6, beta in 1e-3f64..1e3) {
            let q = TransferLaw::ScaledInverseShift { beta }.coefficient(p_i, p_l);
            prop_assert!(q > 0.0 && q <= beta);
        }

        #[test]
        fn inverse_shift_is_lipschitz(a in -100f64..100.0, b in -100f64..100.0) {
            let nl = Nonlinearity::InverseShift;
            prop_assert!((nl.mu(a) - nl.mu(b)).abs() <= (a - b).abs() + 1e-15);
        }
    }
}

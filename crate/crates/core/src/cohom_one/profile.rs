use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stencil;

/// Pointwise data needed for curvature: q, q', a_i, a_i', a_i'' (t-derivatives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub q: f64,
    pub dq: f64,
    pub a: [f64; 3],
    pub da: [f64; 3],
    pub dda: [f64; 3],
}

impl Jet {
    pub fn cylinder() -> Self {
        Self { q: 1.0, dq: 0.0, a: [0.5; 3], da: [0.0; 3], dda: [0.0; 3] }
    }
}

/// A profile with closed-form t-derivatives.
pub trait ProfileFn: Sync {
    fn jet(&self, t: f64) -> Jet;
}

impl<F: Fn(f64) -> Jet + Sync> ProfileFn for F {
    fn jet(&self, t: f64) -> Jet {
        self(t)
    }
}

/// q dt² + Σ a_i² σ_i² sampled on a uniform t-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoframeProfile {
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dq: Option<Vec<f64>>,
    /// First derivatives of a1..a3 (analytic, when known).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub da: Option<[Vec<f64>; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dda: Option<[Vec<f64>; 3]>,
    pub quotient_k: u32,
    pub orientation: i8,
}

impl CoframeProfile {
    /// Sample a closed-form profile, keeping its analytic derivatives.
    pub fn sample<P: ProfileFn + ?Sized>(p: &P, t0: f64, t1: f64, n: usize, quotient_k: u32, orientation: i8) -> Self {
        let t: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        let jets: Vec<Jet> = t.iter().map(|&x| p.jet(x)).collect();
        Self::from_jets(t, &jets, quotient_k, orientation)
    }

    pub fn from_jets(t: Vec<f64>, jets: &[Jet], quotient_k: u32, orientation: i8) -> Self {
        let col = |f: &dyn Fn(&Jet) -> f64| jets.iter().map(f).collect::<Vec<_>>();
        Self {
            q: col(&|j| j.q),
            a1: col(&|j| j.a[0]),
            a2: col(&|j| j.a[1]),
            a3: col(&|j| j.a[2]),
            dq: Some(col(&|j| j.dq)),
            da: Some([col(&|j| j.da[0]), col(&|j| j.da[1]), col(&|j| j.da[2])]),
            dda: Some([col(&|j| j.dda[0]), col(&|j| j.dda[1]), col(&|j| j.dda[2])]),
            t,
            quotient_k,
            orientation,
        }
    }

    /// Samples only; derivatives will be taken by finite differences.
    pub fn from_samples(t: Vec<f64>, q: Vec<f64>, a: [Vec<f64>; 3], quotient_k: u32, orientation: i8) -> Self {
        let [a1, a2, a3] = a;
        Self { t, q, a1, a2, a3, dq: None, da: None, dda: None, quotient_k, orientation }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn a(&self, i: usize) -> &[f64] {
        match i {
            0 => &self.a1,
            1 => &self.a2,
            _ => &self.a3,
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.t.len() < 2 {
            1.0
        } else {
            self.t[1] - self.t[0]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::GridTooSmall("profile needs at least 2 nodes".into()));
        }
        for v in [&self.q, &self.a1, &self.a2, &self.a3] {
            if v.len() != n {
                return Err(Error::GridMismatch("profile array lengths differ".into()));
            }
        }
        if self.quotient_k < 1 {
            return Err(Error::Invalid("quotient_k must be ≥ 1".into()));
        }
        if self.orientation != 1 && self.orientation != -1 {
            return Err(Error::Invalid("orientation must be ±1".into()));
        }
        let h = self.spacing();
        if !(h > 0.0) {
            return Err(Error::Invalid("t-grid must increase".into()));
        }
        for w in self.t.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::Invalid("t-grid must be uniform".into()));
            }
        }
        for (name, v) in [("q", &self.q), ("a1", &self.a1), ("a2", &self.a2), ("a3", &self.a3)] {
            if let Some(node) = v.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::NonPositive { field: name, node });
            }
        }
        Ok(())
    }

    /// Jets at every node: analytic derivatives when supplied, 4th-order differences otherwise.
    pub fn jets(&self) -> Result<Vec<Jet>> {
        self.validate()?;
        let n = self.len();
        let h = self.spacing();
        let need_fd = self.dq.is_none() || self.da.is_none() || self.dda.is_none();
        if need_fd && n < 6 {
            return Err(Error::GridTooSmall("finite-difference derivatives need 6 nodes".into()));
        }
        let dq = match &self.dq {
            Some(v) => v.clone(),
            None => stencil::derivative(&self.q, h),
        };
        let da: [Vec<f64>; 3] = match &self.da {
            Some(v) => v.clone(),
            None => std::array::from_fn(|i| stencil::derivative(self.a(i), h)),
        };
        let dda: [Vec<f64>; 3] = match &self.dda {
            Some(v) => v.clone(),
            None => std::array::from_fn(|i| stencil::second_derivative(self.a(i), h)),
        };
        Ok((0..n)
            .map(|k| Jet {
                q: self.q[k],
                dq: dq[k],
                a: [self.a1[k], self.a2[k], self.a3[k]],
                da: [da[0][k], da[1][k], da[2][k]],
                dda: [dda[0][k], dda[1][k], dda[2][k]],
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

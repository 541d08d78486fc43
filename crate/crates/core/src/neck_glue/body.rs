//! Bodies with a cylindrical end, ready to be cut off and glued.

use std::sync::Arc;

use crate::cohom_one::cartan::wplus_diag;
use crate::cohom_one::cylindrify::{cylindrify, CEProfile, Cylindrified};
use crate::cohom_one::exact::{CompactifiedEguchiHanson, FubiniStudy, Quotient, RadialProfile, RoundS4};
use crate::cohom_one::profile::{Jet, ProfileFn};
use crate::error::{Error, Result};
use crate::ift_solver::Strip;

/// W below this (in frame components) counts as zero when detecting the ASD flag.
const FLAG_TOL: f64 = 1e-9;

/// Profile sampling used for the decay fit of a body.
const FIT_RANGE: (f64, f64, usize) = (0.0, 12.0, 241);

type Source = Arc<dyn ProfileFn + Send + Sync>;

/// A cylindrical-end body. `flag` is the orientation for which the body is ASD in
/// its own t-chart, or 0 when it is conformally flat.
#[derive(Clone)]
pub struct Body {
    pub name: String,
    pub quotient_k: u32,
    pub flag: i8,
    /// Decay rate toward the round end (∞ for an exact half-cylinder).
    pub eta: f64,
    pub ce: Option<CEProfile>,
    /// Leftmost admissible t.
    pub t_min: f64,
    /// Rightmost sampled t (∞ for closed-form bodies).
    pub t_max: f64,
    /// (dim J, dim K): obstruction and Killing spaces supplied by the caller.
    pub obstructions: (usize, usize),
    source: Source,
}

impl std::fmt::Debug for Body {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Body")
            .field("name", &self.name)
            .field("quotient_k", &self.quotient_k)
            .field("flag", &self.flag)
            .field("eta", &self.eta)
            .finish()
    }
}

/// ±1 if exactly one of W^± vanishes along the samples, 0 if both do.
pub fn detect_flag<P: ProfileFn + ?Sized>(p: &P, ts: &[f64]) -> Result<i8> {
    let zero = |s: f64| ts.iter().all(|&t| wplus_diag(&p.jet(t), s).iter().all(|v| v.abs() < FLAG_TOL));
    match (zero(1.0), zero(-1.0)) {
        (true, true) => Ok(0),
        (true, false) => Ok(1),
        (false, true) => Ok(-1),
        (false, false) => Err(Error::Hypothesis("body is anti-self-dual for neither orientation".into())),
    }
}

impl Body {
    pub fn half_cylinder(quotient_k: u32) -> Self {
        Self {
            name: "half-cylinder".into(),
            quotient_k,
            flag: 0,
            eta: f64::INFINITY,
            ce: None,
            t_min: f64::NEG_INFINITY,
            t_max: f64::INFINITY,
            obstructions: (0, 0),
            source: Arc::new(|_t: f64| Jet::cylinder()),
        }
    }

    /// Cylindrify a compact radial profile about its marked point.
    pub fn from_radial<P: RadialProfile + Clone + 'static>(profile: P) -> Result<Self> {
        let name = profile.name().to_string();
        let k = profile.quotient_k();
        let c = Cylindrified::new(profile.clone(), 1.0)?;
        c.check_smooth()?;
        let flag = detect_flag(&c, &[0.3, 1.0, 2.5])?;
        let (t0, t1, n) = FIT_RANGE;
        let ce = cylindrify(profile, 1.0, t0, t1, n, if flag == 0 { 1 } else { flag })?;
        Ok(Self {
            name,
            quotient_k: k,
            flag,
            eta: ce.eta,
            ce: Some(ce),
            t_min: c.t_min(),
            t_max: f64::INFINITY,
            obstructions: (0, 0),
            source: Arc::new(c),
        })
    }

    pub fn round_s4() -> Result<Self> {
        Self::from_radial(RoundS4)
    }

    /// S⁴/ℤ_k about a fixed point of the σ3 circle action.
    pub fn round_s4_quotient(k: u32) -> Result<Self> {
        Self::from_radial(Quotient::new(RoundS4, k, "round-s4-quotient")?)
    }

    /// Fubini–Study ℂP² about a point; ASD for the reversed orientation.
    pub fn fubini_study() -> Result<Self> {
        Self::from_radial(FubiniStudy { quotient_k: 1 })
    }

    pub fn compactified_eguchi_hanson(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Invalid("Eguchi–Hanson scale must be positive".into()));
        }
        Self::from_radial(CompactifiedEguchiHanson { a })
    }

    /// Body from a stored profile, evaluated by linear interpolation of its jets.
    pub fn from_ce(ce: CEProfile) -> Result<Self> {
        ce.base.validate()?;
        let jets = ce.base.jets()?;
        let t = ce.base.t.clone();
        let (t_min, t_max) = (t[0], t[t.len() - 1]);
        let sampled = SampledJets { t, jets };
        let mid: Vec<f64> = (1..4).map(|i| t_min + (t_max - t_min) * i as f64 / 4.0).collect();
        let flag = detect_flag(&sampled, &mid)?;
        Ok(Self {
            name: ce.name.clone(),
            quotient_k: ce.base.quotient_k,
            flag,
            eta: ce.eta,
            t_min,
            t_max,
            ce: Some(ce),
            obstructions: (0, 0),
            source: Arc::new(sampled),
        })
    }

    pub fn with_obstructions(mut self, j: usize, k: usize) -> Self {
        self.obstructions = (j, k);
        self
    }

    pub fn jet(&self, t: f64) -> Jet {
        self.source.jet(t)
    }

    /// Stand-alone discrete operator on t ∈ [−pad, t_end] with unit weight.
    pub fn strip(&self, pad: f64, t_end: f64, h: f64, flag: f64, dirichlet_left: bool) -> Result<Strip> {
        if -pad <= self.t_min || t_end > self.t_max {
            return Err(Error::Invalid(format!(
                "{}: strip [{}, {t_end}] leaves the body range [{}, {}]",
                self.name, -pad, self.t_min, self.t_max
            )));
        }
        let n = ((t_end + pad) / h).round() as usize + 1;
        let t: Vec<f64> = (0..n).map(|i| -pad + i as f64 * h).collect();
        let jets = t.iter().map(|&x| self.jet(x)).collect();
        Strip::new(t, jets, vec![1.0; n], flag, (dirichlet_left, false))
    }

    /// The same operator written in the chart s = −t, on s ∈ [−t_end, pad].
    pub fn reflected_strip(&self, pad: f64, t_end: f64, h: f64, flag: f64) -> Result<Strip> {
        let fwd = self.strip(pad, t_end, h, flag, false)?;
        let t: Vec<f64> = fwd.t.iter().rev().map(|x| -x).collect();
        let jets = fwd.jets.iter().rev().map(|j| Jet { dq: -j.dq, da: j.da.map(|v| -v), ..*j }).collect();
        Strip::new(t, jets, vec![1.0; fwd.n()], flag, (false, false))
    }
}

/// Jets on a uniform grid, linearly interpolated (exact at the nodes).
pub struct SampledJets {
    t: Vec<f64>,
    jets: Vec<Jet>,
}

impl SampledJets {
    pub fn new(t: Vec<f64>, jets: Vec<Jet>) -> Result<Self> {
        if t.len() < 2 || t.len() != jets.len() {
            return Err(Error::GridMismatch("sampled jets need ≥ 2 nodes matching the grid".into()));
        }
        Ok(Self { t, jets })
    }
}

impl ProfileFn for SampledJets {
    fn jet(&self, t: f64) -> Jet {
        let n = self.t.len();
        let h = self.t[1] - self.t[0];
        let x = ((t - self.t[0]) / h).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let f = x - i as f64;
        let (a, b) = (&self.jets[i], &self.jets[i + 1]);
        let mix = |u: f64, v: f64| (1.0 - f) * u + f * v;
        Jet {
            q: mix(a.q, b.q),
            dq: mix(a.dq, b.dq),
            a: [0, 1, 2].map(|k| mix(a.a[k], b.a[k])),
            da: [0, 1, 2].map(|k| mix(a.da[k], b.da[k])),
            dda: [0, 1, 2].map(|k| mix(a.dda[k], b.dda[k])),
        }
    }
}

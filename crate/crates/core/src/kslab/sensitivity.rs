use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ks_run, KsConfig, KsInit, KsState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    DtDependent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDivergence {
    pub dt_a: f64,
    pub dt_b: f64,
    /// First snapshot time with relative separation above the threshold.
    pub t_div: Option<f64>,
    pub final_separation: f64,
    pub max_separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub config: KsConfig,
    pub threshold: f64,
    pub dts: Vec<f64>,
    pub digests: Vec<String>,
    /// Time-averaged `L2` norm per run.
    pub mean_norms: Vec<f64>,
    pub pairs: Vec<PairDivergence>,
    /// Whether divergence times shrink as the compared time steps move apart.
    pub monotone: bool,
    pub verdict: Verdict,
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_separation(a: &KsState, b: &KsState) -> f64 {
    let scale = a.l2_norm().max(b.l2_norm());
    if scale == 0.0 {
        0.0
    } else {
        a.distance(b) / scale
    }
}

/// Integrates the same initial data with each time step in `dts` and compares
/// every pair of trajectories at the common snapshot times.
pub fn timestep_sensitivity(
    base: &KsConfig,
    init: &KsInit,
    dts: &[f64],
    threshold: f64,
) -> Result<SensitivityReport> {
    if dts.len() < 2 {
        return Err(Error::Config(format!("need at least two time steps, got {}", dts.len())));
    }
    if dts.iter().any(|dt| !(*dt > 0.0)) {
        return Err(Error::Config(format!("time steps must be positive: {dts:?}")));
    }
    let runs = dts
        .iter()
        .map(|&dt| ks_run(&KsConfig { dt, ..base.clone() }, init))
        .collect::<Result<Vec<_>>>()?;
    if let Some(f) = runs.iter().find_map(|r| r.failure.clone()) {
        return Err(Error::Numerical(format!("KS run failed: {f}")));
    }
    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (a, b) = (&runs[i].snapshots, &runs[j].snapshots);
            let seps: Vec<(f64, f64)> = a.iter().zip(b).map(|(x, y)| (x.t, relative_separation(x, y))).collect();
            pairs.push(PairDivergence {
                dt_a: dts[i],
                dt_b: dts[j],
                t_div: seps.iter().find(|s| s.1 > threshold).map(|s| s.0),
                final_separation: seps.last().map_or(0.0, |s| s.1),
                max_separation: seps.iter().fold(0.0, |m, s| m.max(s.1)),
            });
        }
    }
    let mut by_gap: Vec<&PairDivergence> = pairs.iter().collect();
    by_gap.sort_by(|x, y| (x.dt_a - x.dt_b).abs().total_cmp(&(y.dt_a - y.dt_b).abs()));
    let monotone = by_gap.windows(2).all(|w| match (w[0].t_div, w[1].t_div) {
        (Some(a), Some(b)) => b <= a,
        (None, _) => true,
        (Some(_), None) => false,
    });
    if !monotone {
        log::warn!("divergence times do not shrink monotonically with the time-step gap");
    }
    let verdict = if pairs.iter().any(|p| p.final_separation > threshold || p.t_div.is_some()) {
        Verdict::DtDependent
    } else {
        Verdict::Converged
    };
    Ok(SensitivityReport {
        config: base.clone(),
        threshold,
        dts: dts.to_vec(),
        digests: runs.iter().map(|r| r.last().digest()).collect(),
        mean_norms: runs
            .iter()
            .map(|r| r.snapshots.iter().map(|s| s.l2_norm()).sum::<f64>() / r.snapshots.len() as f64)
            .collect(),
        pairs,
        monotone,
        verdict,
    })
}

impl SensitivityReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("l_domain: {}\n", self.config.l_domain));
        s.push_str(&format!("n_modes: {}\n", self.config.n_modes));
        s.push_str(&format!("t_end: {}\n", self.config.t_end));
        s.push_str(&format!("threshold: {}\n", self.threshold));
        for ((dt, d), n) in self.dts.iter().zip(&self.digests).zip(&self.mean_norms) {
            s.push_str(&format!("run dt={dt}: digest={d} mean_norm={n:e}\n"));
        }
        for p in &self.pairs {
            let t = p.t_div.map_or("none".to_string(), |t| t.to_string());
            s.push_str(&format!(
                "pair dt={} vs dt={}: t_div={t} final_separation={:e} max_separation={:e}\n",
                p.dt_a, p.dt_b, p.final_separation, p.max_separation
            ));
        }
        s.push_str(&format!("monotone: {}\n", self.monotone));
        let v = match self.verdict {
            Verdict::Converged => "converged",
            Verdict::DtDependent => "dt-dependent",
        };
        s.push_str(&format!("verdict: {v}\n"));
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "dt_a,dt_b,t_div,final_separation,max_separation")?;
        for p in &self.pairs {
            let t = p.t_div.map_or(String::new(), |t| format!("{t:e}"));
            writeln!(
                w,
                "{},{},{t},{:e},{:e}",
                p.dt_a, p.dt_b, p.final_separation, p.max_separation
            )?;
        }
        Ok(())
    }
}

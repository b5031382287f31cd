//! On-disk formats: domain, toolpath and model JSON, and the CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use lpbf_core::learner::{EpisodeLog, QNetwork};
use lpbf_core::thermal::{AngleDepth, MeltPoolTrace};
use lpbf_core::{MoveKind, Point2, PolygonDomain, Toolpath};
use serde::{Deserialize, Serialize};

pub const MODEL_VERSION: u32 = 1;

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serialises");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub units: String,
    pub vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<[f64; 2]>>,
}

impl DomainFile {
    pub fn from_domain(domain: &PolygonDomain) -> Self {
        Self { units: "mm".into(), vertices: domain.vertices().iter().map(|p| [p.x, p.y]).collect(), seeds: None }
    }

    pub fn domain(&self) -> Result<PolygonDomain> {
        ensure!(self.units == "mm", "domain units must be \"mm\", got {:?}", self.units);
        let v = self.vertices.iter().map(|&[x, y]| Point2::new(x, y)).collect();
        PolygonDomain::new(v).context("invalid domain polygon")
    }

    pub fn seed_points(&self) -> Option<Vec<Point2>> {
        self.seeds.as_ref().map(|s| s.iter().map(|&[x, y]| Point2::new(x, y)).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub i: usize,
    pub x_mm: f64,
    pub y_mm: f64,
    pub laser: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolpathFile {
    pub hatch_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
    pub moves: Vec<MoveRecord>,
}

impl ToolpathFile {
    pub fn new(path: &Toolpath, generator: Option<serde_json::Value>) -> Self {
        let moves = path
            .moves
            .iter()
            .map(|m| MoveRecord { i: m.index, x_mm: m.pos.x, y_mm: m.pos.y, laser: u8::from(m.laser_on()) })
            .collect();
        Self { hatch_um: path.hatch * 1e3, generator, moves }
    }

    /// The path back; laser-off moves after the first come back as
    /// transitions.
    pub fn toolpath(&self) -> Result<Toolpath> {
        ensure!(self.hatch_um > 0.0, "hatch_um must be positive");
        let mut p = Toolpath::new(self.hatch_um * 1e-3);
        for (k, m) in self.moves.iter().enumerate() {
            let kind = match (k, m.laser) {
                (0, _) => MoveKind::Start,
                (_, 1) => MoveKind::Laser,
                (_, 0) => MoveKind::Transition,
                (_, other) => bail!("move {k}: laser flag must be 0 or 1, got {other}"),
            };
            p.push(m.i, Point2::new(m.x_mm, m.y_mm), kind);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub absorptivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub dims: Vec<usize>,
    /// Per layer, row-major `out x in`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub config: serde_json::Value,
    pub calibration: Calibration,
}

impl ModelFile {
    pub fn new(net: &QNetwork, config: serde_json::Value, absorptivity: Option<f64>) -> Self {
        Self {
            version: MODEL_VERSION,
            dims: net.dims().to_vec(),
            weights: (0..net.num_layers()).map(|l| net.weights_row_major(l)).collect(),
            biases: (0..net.num_layers()).map(|l| net.biases(l).to_vec()).collect(),
            config,
            calibration: Calibration { absorptivity },
        }
    }

    pub fn network(&self) -> Result<QNetwork> {
        ensure!(self.version == MODEL_VERSION, "unsupported model version {}", self.version);
        QNetwork::from_parts(&self.dims, &self.weights, &self.biases).context("model parameters do not match dims")
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

/// `step,time_s,x_mm,y_mm,depth_um`
pub fn depth_csv(trace: &MeltPoolTrace) -> String {
    let mut s = String::from("step,time_s,x_mm,y_mm,depth_um\n");
    for d in &trace.samples {
        writeln!(s, "{},{:e},{},{},{}", d.step, d.time, d.pos.x, d.pos.y, d.depth_um).unwrap();
    }
    s
}

/// `episode,total_reward,sensitive_count,collisions,isolated,steps`
/// followed by the exploration rate and loss statistics.
pub fn episode_csv(log: &[EpisodeLog]) -> String {
    let mut s = String::from("episode,total_reward,sensitive_count,collisions,isolated,steps,epsilon,mean_loss,max_loss\n");
    for e in log {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            e.episode, e.total_reward, e.sensitive, e.collisions, e.isolated, e.steps, e.epsilon, e.mean_loss, e.max_loss
        )
        .unwrap();
    }
    s
}

pub fn angle_csv(rows: &[AngleDepth]) -> String {
    let mut s = String::from("angle_deg,depth_um\n");
    for r in rows {
        writeln!(s, "{},{}", r.angle_deg, r.depth_um).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn toolpath_round_trip() {
        let mut p = Toolpath::new(0.05);
        p.push(3, Point2::new(0.0, 0.0), MoveKind::Start);
        p.push(4, Point2::new(0.05, 0.0), MoveKind::Laser);
        p.push(9, Point2::new(0.5, 0.5), MoveKind::Transition);
        let f = ToolpathFile::new(&p, Some(serde_json::json!({"strategy": "test"})));
        let text = to_json(&f);
        assert!(text.contains("\"laser\": 0"));
        let back: ToolpathFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.toolpath().unwrap(), p);
    }

    #[test]
    fn model_round_trip_and_version_check() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let net = QNetwork::new(&[38, 16, 3], &mut rng).unwrap();
        let f = ModelFile::new(&net, serde_json::json!({}), Some(0.6));
        let back: ModelFile = serde_json::from_str(&to_json(&f)).unwrap();
        assert_eq!(back.network().unwrap(), net);
        let obs = [0.3; 38];
        assert_eq!(back.network().unwrap().forward(&obs).unwrap(), net.forward(&obs).unwrap());
        let mut v2 = back.clone();
        v2.version = 2;
        assert!(v2.network().is_err());
        let mut bad = back;
        bad.dims = vec![38, 15, 3];
        assert!(bad.network().is_err());
        let text = to_json(&f);
        assert!(serde_json::from_str::<ModelFile>(&text[..text.len() / 2]).is_err());
    }

    #[test]
    fn domain_units_checked() {
        let f: DomainFile = serde_json::from_str(r#"{"units":"mm","vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!(f.domain().is_ok());
        let g = DomainFile { units: "in".into(), ..f };
        assert!(g.domain().is_err());
    }
}

//! File formats and rendering for the `sfmlab` command-line tool.
//!
//! Scenes and measurements are JSON documents tagged with [`VERSION`].
//! Numbers are written with 17 significant digits so that reading a file and
//! writing it back reproduces it byte for byte.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use sfmlab_core::counting::FeasibilityReport;
use sfmlab_core::{Camera, CameraKind, JetScene, Measurements, MotionModel, RetinalPoint, Scene};

pub const VERSION: &str = "sfmlab/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraEntry {
    pub params: Vec<f64>,
}

/// A static scene or, when `motion` is present, a scene of moving points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: String,
    pub class: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    pub cameras: Vec<CameraEntry>,
    pub globals: Vec<f64>,
    /// `"circle"` or `"taylor"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Per point, its motion coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<Vec<Vec<Vec<f64>>>>,
}

/// Either kind of scene a [`SceneFile`] can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyScene {
    Static(Scene),
    Jet(JetScene),
}

fn cameras_of(kind: CameraKind, entries: &[CameraEntry]) -> Result<Vec<Camera>> {
    entries
        .iter()
        .enumerate()
        .map(|(j, e)| Camera::new(kind, e.params.clone()).with_context(|| format!("camera {j}")))
        .collect()
}

fn entries_of(cameras: &[Camera]) -> Vec<CameraEntry> {
    cameras.iter().map(|c| CameraEntry { params: c.params.clone() }).collect()
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            version: VERSION.into(),
            class: scene.kind.name().into(),
            points: scene.points.iter().map(|p| p.as_slice().to_vec()).collect(),
            cameras: entries_of(&scene.cameras),
            globals: scene.globals.clone(),
            model: None,
            omega: None,
            order: None,
            times: None,
            motion: None,
        }
    }

    pub fn from_jet(scene: &JetScene) -> Self {
        let (model, omega, order) = match scene.model {
            MotionModel::Circle { omega } => ("circle", Some(omega), None),
            MotionModel::Taylor { order } => ("taylor", None, Some(order)),
        };
        Self {
            version: VERSION.into(),
            class: scene.kind.name().into(),
            points: Vec::new(),
            cameras: entries_of(&scene.cameras),
            globals: scene.globals.clone(),
            model: Some(model.into()),
            omega,
            order,
            times: Some(scene.times.clone()),
            motion: Some(
                scene
                    .motion
                    .iter()
                    .map(|cs| cs.iter().map(|c| c.as_slice().to_vec()).collect())
                    .collect(),
            ),
        }
    }

    pub fn from_any(scene: &AnyScene) -> Self {
        match scene {
            AnyScene::Static(s) => Self::from_scene(s),
            AnyScene::Jet(j) => Self::from_jet(j),
        }
    }

    pub fn kind(&self) -> Result<CameraKind> {
        Ok(self.class.parse::<CameraKind>()?)
    }

    /// Validates the document against the catalog and builds the scene.
    pub fn to_scene(&self) -> Result<AnyScene> {
        ensure!(self.version == VERSION, "unsupported version `{}`, expected `{VERSION}`", self.version);
        let kind = self.kind()?;
        let cameras = cameras_of(kind, &self.cameras)?;
        let Some(model) = &self.model else {
            ensure!(
                self.motion.is_none() && self.times.is_none(),
                "motion and times need a motion model"
            );
            let points = self.points.iter().map(|p| DVector::from_column_slice(p)).collect();
            return Ok(AnyScene::Static(Scene::new(kind, points, cameras, self.globals.clone())?));
        };
        ensure!(self.points.is_empty(), "a moving-point scene stores its points under `motion`");
        let model = match model.as_str() {
            "circle" => MotionModel::Circle {
                omega: self.omega.context("circle model needs `omega`")?,
            },
            "taylor" => MotionModel::Taylor {
                order: self.order.context("taylor model needs `order`")?,
            },
            other => bail!("unknown motion model `{other}`"),
        };
        let motion = self
            .motion
            .as_ref()
            .context("moving-point scene needs `motion`")?
            .iter()
            .map(|cs| cs.iter().map(|c| DVector::from_column_slice(c)).collect())
            .collect();
        let times = self.times.clone().context("moving-point scene needs `times`")?;
        Ok(AnyScene::Jet(JetScene::new(kind, model, motion, times, cameras, self.globals.clone())?))
    }
}

/// Image data in row-major `[point][camera][coordinate]` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementsFile {
    pub version: String,
    pub class: String,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub data: Vec<Vec<Vec<f64>>>,
}

impl MeasurementsFile {
    pub fn new(kind: CameraKind, meas: &Measurements) -> Self {
        let data = (0..meas.n)
            .map(|i| (0..meas.m).map(|j| meas.get(i, j).coords.clone()).collect())
            .collect();
        Self {
            version: VERSION.into(),
            class: kind.name().into(),
            n: meas.n,
            m: meas.m,
            s: meas.s,
            data,
        }
    }

    pub fn to_measurements(&self) -> Result<(CameraKind, Measurements)> {
        ensure!(self.version == VERSION, "unsupported version `{}`, expected `{VERSION}`", self.version);
        let kind: CameraKind = self.class.parse()?;
        ensure!(
            self.s == kind.class().s,
            "{} images have {} coordinates, header says {}",
            kind,
            kind.class().s,
            self.s
        );
        ensure!(self.data.len() == self.n, "header says {} points, data has {}", self.n, self.data.len());
        let mut flat = Vec::with_capacity(self.n * self.m);
        for (i, row) in self.data.iter().enumerate() {
            ensure!(row.len() == self.m, "point {i} has {} images, header says {}", row.len(), self.m);
            for (j, coords) in row.iter().enumerate() {
                ensure!(coords.len() == self.s, "image ({i}, {j}) has {} coordinates", coords.len());
                ensure!(coords.iter().all(|v| v.is_finite()), "image ({i}, {j}) is not finite");
                flat.push(RetinalPoint::new(coords.clone()));
            }
        }
        Ok((kind, Measurements::new(self.n, self.m, self.s, flat)?))
    }
}

/// JSON formatter printing every float with 17 significant digits.
struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes to compact JSON with exact floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct RegionRow {
    n: u64,
    m: u64,
    lhs: i64,
    rhs: i64,
    slack: i64,
    feasible: bool,
}

/// CSV with columns `n,m,lhs,rhs,slack,feasible`.
pub fn region_csv(grid: &[FeasibilityReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in grid {
        w.serialize(RegionRow {
            n: r.n,
            m: r.m,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            feasible: r.feasible,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

const CELL: u64 = 40;
const MARGIN: u64 = 60;

/// Heat grid of the forbidden region: one 40px cell per `(n, m)`, infeasible
/// cells filled, `n` growing to the right and `m` growing upwards.
pub fn region_svg(class: &str, grid: &[FeasibilityReport], n_max: u64, m_max: u64) -> String {
    let width = 2 * MARGIN + CELL * n_max;
    let height = 2 * MARGIN + CELL * m_max;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    s.push_str(&format!(
        "<title>forbidden region of {class}</title>\n<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    for r in grid {
        let x = MARGIN + CELL * (r.n - 1);
        let y = MARGIN + CELL * (m_max - r.m);
        let fill = if r.feasible { "white" } else { "#555555" };
        s.push_str(&format!(
            "<rect class=\"{}\" x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\" stroke=\"#999999\"/>\n",
            if r.feasible { "feasible" } else { "infeasible" }
        ));
    }
    let font = "font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\"";
    for n in 1..=n_max {
        let x = MARGIN + CELL * (n - 1) + CELL / 2;
        let y = MARGIN + CELL * m_max + 16;
        s.push_str(&format!("<text x=\"{x}\" y=\"{y}\" {font}>{n}</text>\n"));
    }
    for m in 1..=m_max {
        let y = MARGIN + CELL * (m_max - m) + CELL / 2 + 4;
        s.push_str(&format!("<text x=\"{}\" y=\"{y}\" {font}>{m}</text>\n", MARGIN - 14));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" {font}>n (points)</text>\n",
        MARGIN + CELL * n_max / 2,
        height - 16
    ));
    s.push_str(&format!(
        "<text x=\"20\" y=\"{0}\" {font} transform=\"rotate(-90 20 {0})\">m (cameras)</text>\n",
        MARGIN + CELL * m_max / 2
    ));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use sfmlab_core::counting::forbidden_region;
    use sfmlab_core::sfm::synth::{random_jet_scene, random_scene};
    use sfmlab_core::Configuration;

    #[test]
    fn floats_keep_17_digits() {
        assert_eq!(to_json(&vec![0.1, -2.0]).unwrap(), "[1.0000000000000001e-1,-2.0000000000000000e0]\n");
        let back: Vec<f64> = serde_json::from_str("[1.0000000000000001e-1]").unwrap();
        assert_eq!(back[0], 0.1);
    }

    #[test]
    fn scene_round_trip_is_byte_identical() {
        let scene = random_scene(CameraKind::Perspective3d, 4, 2, 3).unwrap();
        let text = to_json(&SceneFile::from_scene(&scene)).unwrap();
        let file: SceneFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.to_scene().unwrap(), AnyScene::Static(scene.clone()));
        assert_eq!(to_json(&file).unwrap(), text);

        let js = random_jet_scene(CameraKind::Omni2d, 3, 3, 1).unwrap();
        let text = to_json(&SceneFile::from_jet(&js)).unwrap();
        let file: SceneFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.to_scene().unwrap(), AnyScene::Jet(js));
        assert_eq!(to_json(&file).unwrap(), text);

        let meas = scene.evaluate().unwrap();
        let text = to_json(&MeasurementsFile::new(scene.kind, &meas)).unwrap();
        let file: MeasurementsFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.to_measurements().unwrap().1, meas);
        assert_eq!(to_json(&file).unwrap(), text);
    }

    #[test]
    fn invalid_documents_are_rejected() {
        let scene = random_scene(CameraKind::AffineOrtho2d, 3, 2, 0).unwrap();
        let mut file = SceneFile::from_scene(&scene);
        file.version = "sfmlab/0".into();
        assert!(file.to_scene().is_err());
        let mut file = SceneFile::from_scene(&scene);
        file.cameras[0].params.pop();
        assert!(file.to_scene().is_err());
        let mut file = SceneFile::from_scene(&scene);
        file.class = "fisheye".into();
        assert!(file.to_scene().is_err());

        let meas = MeasurementsFile::new(scene.kind, &scene.evaluate().unwrap());
        let mut bad = meas.clone();
        bad.data[1].pop();
        assert!(bad.to_measurements().is_err());
        let mut bad = meas;
        bad.s = 2;
        assert!(bad.to_measurements().is_err());
    }

    #[test]
    fn csv_and_svg_shapes() {
        let grid = forbidden_region(CameraKind::OmniOriented2d, 6, 6);
        let csv = region_csv(&grid).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,m,lhs,rhs,slack,feasible");
        assert_eq!(lines.len(), 37);
        let svg = region_svg("omni-oriented-2d", &grid, 6, 6);
        let infeasible = grid.iter().filter(|r| !r.feasible).count();
        assert_eq!(svg.matches("class=\"infeasible\"").count(), infeasible);
        assert!(svg.contains("n (points)") && svg.contains("m (cameras)"));
    }
}

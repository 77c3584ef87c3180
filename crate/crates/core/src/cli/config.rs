//! TOML experiment files layered over per-problem desk defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::NonlinearForm;
use crate::fom::{
    cylinder_channel, kelvin_helmholtz, kh_viscosity, taylor_green, FomConfig, ProblemKind, ProblemSetup,
    SnapshotWindow, TimeScheme,
};
use crate::mesh::{bundled_cylinder_mesh, read_triangle_files};
use crate::pod::Centering;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    /// Cells per side of the built-in rectangle meshes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `<file>.node`, `<file>.ele`, `<file>.edge`; relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PodSettings {
    pub centering: Centering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomSettings {
    /// Mode counts swept by `compare`; `rom` uses the first.
    pub r: Vec<usize>,
    /// Forms swept by `compare`; `rom` uses the first.
    pub forms: Vec<NonlinearForm>,
    pub scheme: TimeScheme,
    /// Defaults to the full-order step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Defaults to the end of the snapshot window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: PathBuf,
    /// File name prefix, `kh_snapshots.bin` and so on.
    pub prefix: String,
    /// Every how many snapshots a VTK file is written; 0 disables.
    #[serde(default)]
    pub vtk_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Seeds the random test fields of `verify`.
    pub seed: u64,
    pub mesh: MeshSource,
    pub fom: FomConfig,
    pub pod: PodSettings,
    pub rom: RomSettings,
    pub output: OutputSettings,
}

impl ExperimentConfig {
    /// Scaled-down versions of the published setups.
    pub fn desk(problem: ProblemKind) -> Self {
        match problem {
            ProblemKind::KelvinHelmholtz => Self {
                problem,
                seed: 7,
                mesh: MeshSource { n: Some(32), file: None },
                fom: FomConfig::new(kh_viscosity(100.0), 0.02, 3.0, NonlinearForm::Skew, TimeScheme::BackwardEuler),
                pod: PodSettings { centering: Centering::None },
                rom: RomSettings {
                    r: vec![10, 20, 30, 40],
                    forms: vec![NonlinearForm::Skew, NonlinearForm::Emac],
                    scheme: TimeScheme::BackwardEuler,
                    dt: None,
                    t_end: None,
                },
                output: OutputSettings { dir: "out".into(), prefix: "kh".into(), vtk_stride: 0 },
            },
            ProblemKind::CylinderChannel => {
                let mut fom = FomConfig::new(0.0005, 0.004, 7.0, NonlinearForm::Emac, TimeScheme::Bdf2);
                fom.snapshots = SnapshotWindow { start: 5.0, end: None, stride: 5 };
                Self {
                    problem,
                    seed: 7,
                    mesh: MeshSource { n: None, file: None },
                    fom,
                    pod: PodSettings { centering: Centering::Mean },
                    rom: RomSettings {
                        r: vec![13],
                        forms: vec![NonlinearForm::Emac, NonlinearForm::Skew, NonlinearForm::Convective],
                        scheme: TimeScheme::Bdf2,
                        dt: None,
                        t_end: None,
                    },
                    output: OutputSettings { dir: "out".into(), prefix: "cylinder".into(), vtk_stride: 0 },
                }
            }
            ProblemKind::TaylorGreen => Self {
                problem,
                seed: 7,
                mesh: MeshSource { n: Some(16), file: None },
                fom: FomConfig::new(0.01, 0.03125, 1.0, NonlinearForm::Skew, TimeScheme::Bdf2),
                pod: PodSettings { centering: Centering::None },
                rom: RomSettings {
                    r: vec![1, 2],
                    forms: vec![NonlinearForm::Skew],
                    scheme: TimeScheme::Bdf2,
                    dt: None,
                    t_end: None,
                },
                output: OutputSettings { dir: "out".into(), prefix: "tg".into(), vtk_stride: 0 },
            },
        }
    }

    /// Parses TOML; every key except `problem` falls back to [`Self::desk`].
    /// Relative mesh paths are resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let user: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let problem: ProblemKind = user
            .get("problem")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("missing key 'problem'".into()))?
            .parse()?;
        let defaults = match toml::Value::try_from(Self::desk(problem)).map_err(|e| Error::Config(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("a struct serializes to a table"),
        };
        let merged = merge(defaults, user);
        let mut cfg: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        if let (Some(base), Some(f)) = (base, cfg.mesh.file.as_mut()) {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Config(format!("config file not found: {}", path.display())),
            _ => Error::io(path, e),
        })?;
        Self::from_toml(&text, path.parent())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.fom.validate()?;
        if self.rom.r.is_empty() || self.rom.r.contains(&0) {
            return Err(Error::Config("rom.r needs at least one positive mode count".into()));
        }
        if self.rom.forms.is_empty() {
            return Err(Error::Config("rom.forms is empty".into()));
        }
        if let Some(dt) = self.rom.dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("rom.dt must be positive, got {dt}")));
            }
        }
        if self.output.prefix.is_empty() || self.output.prefix.contains(['/', '\\']) {
            return Err(Error::Config(format!("bad output prefix '{}'", self.output.prefix)));
        }
        match self.problem {
            ProblemKind::CylinderChannel => {
                if self.mesh.n.is_some() {
                    return Err(Error::Config("the cylinder mesh is read from files; drop mesh.n".into()));
                }
                if let Some(f) = &self.mesh.file {
                    for ext in ["node", "ele", "edge"] {
                        let p = f.with_extension(ext);
                        if !p.is_file() {
                            return Err(Error::Config(format!("mesh file not found: {}", p.display())));
                        }
                    }
                }
            }
            _ => {
                if self.mesh.file.is_some() {
                    return Err(Error::Config(format!("{} uses a built-in mesh; drop mesh.file", self.problem)));
                }
                if self.mesh.n.unwrap_or(0) < 2 {
                    return Err(Error::Config("mesh.n must be at least 2".into()));
                }
            }
        }
        let n_snap = self.snapshot_count()?;
        if let Some(&r) = self.rom.r.iter().find(|&&r| r > n_snap) {
            return Err(Error::Config(format!("r = {r} exceeds the {n_snap} snapshots the run records")));
        }
        Ok(())
    }

    /// Snapshots the full-order run will record.
    pub fn snapshot_count(&self) -> Result<usize> {
        let f = &self.fom;
        let w = &f.snapshots;
        let first = (w.start / f.dt - 1e-9).ceil().max(0.0) as usize;
        let last = (w.end.unwrap_or(f.t_end) / f.dt + 1e-9).floor() as usize;
        Ok(if last < first { 0 } else { (last - first) / w.stride + 1 })
    }

    pub fn build_setup(&self) -> Result<ProblemSetup> {
        match self.problem {
            ProblemKind::KelvinHelmholtz => kelvin_helmholtz(self.mesh.n.unwrap_or(32)),
            ProblemKind::TaylorGreen => taylor_green(self.mesh.n.unwrap_or(16), self.fom.nu),
            ProblemKind::CylinderChannel => {
                let mesh = match &self.mesh.file {
                    Some(f) => read_triangle_files(f)?,
                    None => bundled_cylinder_mesh()?,
                };
                cylinder_channel(mesh)
            }
        }
    }

    /// `<dir>/<prefix>_<name>`
    pub fn artifact(&self, name: &str) -> PathBuf {
        self.output.dir.join(format!("{}_{name}", self.output.prefix))
    }

    pub fn rom_dt(&self) -> f64 {
        self.rom.dt.unwrap_or(self.fom.dt)
    }

    pub fn rom_t_end(&self) -> f64 {
        self.rom.t_end.or(self.fom.snapshots.end).unwrap_or(self.fom.t_end)
    }
}

fn merge(mut base: toml::Table, over: toml::Table) -> toml::Table {
    for (k, v) in over {
        match (base.remove(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                base.insert(k, toml::Value::Table(merge(b, o)));
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_defaults_round_trip_and_validate() {
        for p in [ProblemKind::KelvinHelmholtz, ProblemKind::CylinderChannel, ProblemKind::TaylorGreen] {
            let d = ExperimentConfig::desk(p);
            d.validate().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&d.to_toml(), None).unwrap(), d);
        }
        let kh = ExperimentConfig::desk(ProblemKind::KelvinHelmholtz);
        assert_eq!(kh.snapshot_count().unwrap(), 151);
        assert_eq!(kh.fom.nu, 1.0 / 2800.0);
        let cyl = ExperimentConfig::desk(ProblemKind::CylinderChannel);
        assert_eq!(cyl.snapshot_count().unwrap(), 101);
    }

    #[test]
    fn partial_files_overlay_the_defaults() {
        let c = ExperimentConfig::from_toml(
            "problem = \"kelvin-helmholtz\"\n[mesh]\nn = 8\n[fom]\nt_end = 0.2\n[rom]\nr = [3]\nforms = [\"emac\"]\n",
            None,
        )
        .unwrap();
        assert_eq!(c.mesh.n, Some(8));
        assert_eq!(c.fom.t_end, 0.2);
        assert_eq!(c.fom.dt, 0.02);
        assert_eq!(c.rom.forms, vec![NonlinearForm::Emac]);
        assert_eq!(c.output.prefix, "kh");
    }

    #[test]
    fn bad_files_are_config_errors() {
        let cases = [
            "",
            "problem = \"vortex\"",
            "problem = \"kelvin-helmholtz\"\nbogus = 1",
            "problem = \"kelvin-helmholtz\"\n[fom]\nform = \"upwind\"",
            "problem = \"kelvin-helmholtz\"\n[fom]\nt_end = 0.1\n[rom]\nr = [10]",
            "problem = \"cylinder-channel\"\n[mesh]\nfile = \"/nonexistent/cyl\"",
        ];
        for c in cases {
            assert!(matches!(ExperimentConfig::from_toml(c, None), Err(Error::Config(_))), "{c}");
        }
        let e = ExperimentConfig::from_toml(cases[5], None).unwrap_err();
        assert!(e.to_string().contains("mesh file not found"));
    }
}

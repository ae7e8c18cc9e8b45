use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::dp::{value_iterate, DpProblem, PolicyTable};
use crate::error::{Error, Result};

pub const TRANSLATION_FILES: [&str; 3] = ["translation_x.policy", "translation_y.policy", "translation_z.policy"];
pub const ROTATION_FILES: [&str; 3] = ["rotation_1.policy", "rotation_2.policy", "rotation_3.policy"];

/// The six channel policies used by the DP controller.
#[derive(Debug, Clone)]
pub struct PolicySet {
    /// RSW x, y, z force policies over (position, velocity).
    pub translation: [Arc<PolicyTable>; 3],
    /// Body torque policies over (controller angle, body rate).
    pub rotation: [Arc<PolicyTable>; 3],
}

impl PolicySet {
    /// Solves the six problems; identical problems are solved once.
    ///
    /// With a cache directory, solutions are read from and written to
    /// `<dir>/<problem fingerprint>.policy`.
    pub fn solve(translation: &[DpProblem; 3], rotation: &[DpProblem; 3], cache: Option<&Path>) -> Result<Self> {
        let mut solved: Vec<(String, Arc<PolicyTable>)> = Vec::new();
        let mut get = |p: &DpProblem| -> Result<Arc<PolicyTable>> {
            let fp = p.fingerprint();
            if let Some((_, t)) = solved.iter().find(|(f, _)| *f == fp) {
                return Ok(t.clone());
            }
            let table = Arc::new(solve_cached(p, &fp, cache)?);
            solved.push((fp, table.clone()));
            Ok(table)
        };
        let translation = [get(&translation[0])?, get(&translation[1])?, get(&translation[2])?];
        let rotation = [get(&rotation[0])?, get(&rotation[1])?, get(&rotation[2])?];
        Ok(Self { translation, rotation })
    }

    pub fn save_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut out = Vec::new();
        for (name, table) in self.named() {
            let path = dir.join(name);
            table.save(&path)?;
            out.push(path);
        }
        Ok(out)
    }

    /// Reads the six policy files; a missing file is reported by path.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let load = |name: &str| PolicyTable::load(&dir.join(name)).map(Arc::new);
        Ok(Self {
            translation: [load(TRANSLATION_FILES[0])?, load(TRANSLATION_FILES[1])?, load(TRANSLATION_FILES[2])?],
            rotation: [load(ROTATION_FILES[0])?, load(ROTATION_FILES[1])?, load(ROTATION_FILES[2])?],
        })
    }

    /// Problem fingerprints in file order.
    pub fn fingerprints(&self) -> [String; 6] {
        let all: Vec<String> = self.named().map(|(_, t)| t.problem.fingerprint()).collect();
        std::array::from_fn(|i| all[i].clone())
    }

    /// Fails unless the loaded policies were solved from exactly these problems.
    pub fn check_matches(&self, translation: &[DpProblem; 3], rotation: &[DpProblem; 3]) -> Result<()> {
        for ((name, table), expected) in self.named().zip(translation.iter().chain(rotation)) {
            if table.problem != *expected {
                return Err(Error::InvalidInput(format!("policy {name} was solved for a different design")));
            }
        }
        Ok(())
    }

    fn named(&self) -> impl Iterator<Item = (&'static str, &Arc<PolicyTable>)> {
        TRANSLATION_FILES
            .into_iter()
            .zip(self.translation.iter())
            .chain(ROTATION_FILES.into_iter().zip(self.rotation.iter()))
    }
}

fn solve_cached(problem: &DpProblem, fingerprint: &str, cache: Option<&Path>) -> Result<PolicyTable> {
    let Some(dir) = cache else {
        return value_iterate(problem);
    };
    let path = dir.join(format!("{fingerprint}.policy"));
    if path.exists() {
        if let Ok(t) = PolicyTable::load(&path) {
            if t.problem == *problem {
                return Ok(t);
            }
        }
    }
    let table = value_iterate(problem)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    // write then rename so a concurrent reader never sees a partial file
    let tmp = dir.join(format!("{fingerprint}.policy.tmp{}", std::process::id()));
    table.save(&tmp)?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(table)
}

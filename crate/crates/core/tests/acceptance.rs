//! Acceptance run: every shipped scenario at its default settings, one
//! pass/fail line per criterion. Exits nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use varilab::scenarios::{catalog, run_scenario, RunSummary};

struct Runs {
    root: tempfile::TempDir,
    done: BTreeMap<&'static str, RunSummary>,
}

impl Runs {
    fn dir(&self, name: &str, copy: usize) -> PathBuf {
        self.root.path().join(format!("{name}-{copy}"))
    }

    fn get(&mut self, name: &'static str) -> Result<&RunSummary, String> {
        if !self.done.contains_key(name) {
            let cfg = catalog::default_config(name).expect("shipped scenario");
            let s = run_scenario(&cfg, &self.dir(name, 0)).map_err(|e| format!("{name}: {e}"))?;
            self.done.insert(name, s);
        }
        Ok(&self.done[name])
    }
}

/// Criteria of `summary` named in `names`, all of which must pass.
fn criteria(summary: &RunSummary, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = vec![];
    for n in names {
        match summary.criterion(n) {
            Some(c) => {
                ok &= c.pass;
                parts.push(format!("{}/{} {:.3e} {}", summary.scenario, n, c.value, c.bound));
            }
            None => {
                ok = false;
                parts.push(format!("{}/{n} missing", summary.scenario));
            }
        }
    }
    (ok, parts.join(", "))
}

fn all_criteria(summary: &RunSummary) -> (bool, String) {
    let names: Vec<&str> = summary.criteria.iter().map(|c| c.name.as_str()).collect();
    criteria(summary, &names)
}

fn runtime(summary: &RunSummary, limit: f64) -> (bool, String) {
    (summary.wall_time_s < limit, format!("runtime {:.2} s (< {limit} s)", summary.wall_time_s))
}

fn join(parts: &[(bool, String)]) -> (bool, String) {
    (parts.iter().all(|p| p.0), parts.iter().map(|p| p.1.as_str()).collect::<Vec<_>>().join("; "))
}

fn identical_csvs(a: &Path, b: &Path, files: &[String]) -> Result<(), String> {
    for f in files.iter().filter(|f| f.ends_with(".csv")) {
        let read = |d: &Path| std::fs::read(d.join(f)).map_err(|e| format!("{f}: {e}"));
        if read(a)? != read(b)? {
            return Err(format!("{f} differs"));
        }
    }
    Ok(())
}

fn check(runs: &mut Runs, criterion: usize) -> Result<(bool, String), String> {
    Ok(match criterion {
        1 => {
            let s = runs.get("flat-halfplane")?;
            join(&[criteria(s, &["density"]), runtime(s, 10.0)])
        }
        2 => {
            let a = criteria(runs.get("flat-halfplane")?, &["flat-equality"]);
            let b = criteria(runs.get("offset-plane")?, &["flat-equality"]);
            join(&[a, b])
        }
        3 => {
            let a = criteria(runs.get("tilted-cone")?, &["allard"]);
            let b = criteria(runs.get("offset-plane")?, &["allard"]);
            join(&[a, b])
        }
        4 => {
            let s = runs.get("disk-circle-boundary")?;
            join(&[criteria(s, &["min-slack", "sharp-monotone"]), runtime(s, 60.0)])
        }
        5 => all_criteria(runs.get("axiom-check")?),
        6 => all_criteria(runs.get("two-circles")?),
        7 => criteria(runs.get("disk-circle-boundary")?, &["divergence-exponent"]),
        8 => all_criteria(runs.get("stationarity")?),
        9 => all_criteria(runs.get("frequency-homogeneous")?),
        10 => {
            let a = all_criteria(runs.get("collapsed-dir-minimizer")?);
            let b = all_criteria(runs.get("branch-dir-minimizer")?);
            join(&[a, b])
        }
        11 => {
            let mut compared = 0;
            for info in catalog::all() {
                let files = runs.get(info.name)?.files.clone();
                let again = runs.dir(info.name, 1);
                run_scenario(&info.default_config(), &again).map_err(|e| format!("{}: {e}", info.name))?;
                identical_csvs(&runs.dir(info.name, 0), &again, &files).map_err(|e| format!("{}: {e}", info.name))?;
                compared += files.len();
            }
            (true, format!("{compared} CSVs byte-identical across two runs of every scenario"))
        }
        _ => unreachable!(),
    })
}

const TITLES: [&str; 11] = [
    "flat half-plane density",
    "flat-case equality",
    "Allard identity",
    "curved-boundary monotonicity",
    "distance axioms",
    "two-circles boundary density",
    "divergence expansion",
    "stationarity",
    "frequency function",
    "collapse phenomenon",
    "determinism",
];

fn main() -> ExitCode {
    let mut runs = Runs { root: tempfile::tempdir().expect("temp dir"), done: BTreeMap::new() };
    let mut failed = 0;
    for (k, title) in TITLES.iter().enumerate() {
        let (pass, detail) = match check(&mut runs, k + 1) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {title}: {detail}", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria pass", TITLES.len() - failed, TITLES.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::io::Write;
use std::path::{Path, PathBuf};

use lipquo::chain::{ConstantChain, GridDensity};
use lipquo::params::{check_choice_of_r, ConstructionConstants, RadiusCheck};
use lipquo::quotient::{default_corpus, QuotientMap};
use lipquo::report::Report;
use lipquo::suite::{run_suite, SuiteKind, SuiteOptions, DEFAULT_SAMPLES, DEFAULT_SEED};
use lipquo::{Complex, CriticalPoint};
use serde::Serialize;

use crate::config::{GridSpec, JobConfig};
use crate::{CliError, Common};

/// Flags override the config file, which overrides the defaults.
struct Job {
    config: Option<JobConfig>,
    seed: u64,
    samples: usize,
    out: Option<PathBuf>,
}

impl Job {
    fn resolve(common: &Common) -> Result<Self, CliError> {
        let config = common.poly.as_deref().map(JobConfig::load).transpose()?;
        let cfg = config.as_ref();
        let samples = common.samples.or(cfg.and_then(|c| c.samples)).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(Self {
            seed: common.seed.or(cfg.and_then(|c| c.seed)).unwrap_or(DEFAULT_SEED),
            samples,
            out: common.out.clone().or(cfg.and_then(|c| c.out.clone())),
            config,
        })
    }

    /// The configured polynomial, or the default corpus when there is none.
    fn maps(&self) -> Result<Vec<QuotientMap>, CliError> {
        match &self.config {
            Some(cfg) => Ok(vec![QuotientMap::build_with(&cfg.polynomial()?, cfg.finder()?)?]),
            None => Ok(default_corpus()
                .iter()
                .map(QuotientMap::build)
                .collect::<lipquo::Result<_>>()?),
        }
    }

    fn single_map(&self, command: &str) -> Result<QuotientMap, CliError> {
        if self.config.is_none() {
            return Err(CliError::Config(format!("{command} needs --poly")));
        }
        Ok(self.maps()?.remove(0))
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        write_output(self.out.as_deref(), text)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct AnalyzeReport {
    command: &'static str,
    seed: u64,
    samples: usize,
    polynomials: Vec<Analysis>,
}

#[derive(Serialize)]
struct Analysis {
    polynomial: String,
    degree: usize,
    leading: Complex,
    linear: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
    critical_points: Vec<CriticalPoint>,
    /// Built for the monic part `P/a`.
    constants: Option<ConstructionConstants>,
    radius_check: Option<RadiusCheck>,
    constant_chain: Option<ConstantChain>,
}

fn analysis(q: &QuotientMap, samples: usize, seed: u64) -> Result<Analysis, CliError> {
    let chain = match q.consts {
        Some(_) => Some(ConstantChain::estimate(q, GridDensity::default())?),
        None => None,
    };
    Ok(Analysis {
        polynomial: q.p.to_string(),
        degree: q.degree(),
        leading: q.lead,
        linear: q.is_linear(),
        note: q.is_linear().then_some("linear short-circuit, h = id"),
        critical_points: q.cps.clone(),
        radius_check: q.consts.as_ref().map(|k| check_choice_of_r(k, &q.cps, samples, seed)),
        constants: q.consts.clone(),
        constant_chain: chain,
    })
}

pub fn analyze(common: &Common) -> Result<(), CliError> {
    let job = Job::resolve(common)?;
    let polynomials = job
        .maps()?
        .iter()
        .map(|q| analysis(q, job.samples, job.seed))
        .collect::<Result<_, _>>()?;
    job.emit(&to_json(&AnalyzeReport {
        command: "analyze",
        seed: job.seed,
        samples: job.samples,
        polynomials,
    }))
}

#[derive(Serialize)]
struct VerifyReport {
    suite: SuiteKind,
    samples: usize,
    force_c: Option<f64>,
    polynomials: Vec<String>,
    #[serde(flatten)]
    report: Report,
}

pub fn verify(common: &Common, suite: &str, force_c: Option<f64>) -> Result<(), CliError> {
    let job = Job::resolve(common)?;
    let kind: SuiteKind = suite.parse()?;
    if let Some(c) = force_c {
        if !(c > 0.0 && c.is_finite()) {
            return Err(CliError::Config(format!("--force-c must be positive and finite, got {c}")));
        }
    }
    let maps = job.maps()?;
    let opts = SuiteOptions {
        seed: job.seed,
        samples: job.samples,
        force_c,
    };
    let results = run_suite(kind, &maps, &opts)?;
    for r in &results {
        eprintln!("{}", r.line());
    }
    let report = VerifyReport {
        suite: kind,
        samples: job.samples,
        force_c,
        polynomials: maps.iter().map(|q| q.p.to_string()).collect(),
        report: Report::new("verify", job.seed, results),
    };
    job.emit(&to_json(&report))?;
    if report.report.pass {
        Ok(())
    } else {
        Err(CliError::Violation)
    }
}

pub const GRID_HEADER: &str = "z_re,z_im,F2_re,F2_im";

pub fn grid(common: &Common, spec: Option<&str>, with_h2: bool) -> Result<(), CliError> {
    let job = Job::resolve(common)?;
    let spec = match (spec, job.config.as_ref().and_then(|c| c.grid.clone())) {
        (Some(s), _) => GridSpec::parse(s)?,
        (None, Some(g)) => g,
        (None, None) => return Err(CliError::Config("grid needs --grid or a [grid] table".into())),
    };
    spec.validate()?;
    let q = job.single_map("grid")?;
    let mut text = String::from(GRID_HEADER);
    if with_h2 {
        text.push_str(",h2_re,h2_im");
    }
    text.push('\n');
    for z in spec.points() {
        let w = q.f2(z);
        text.push_str(&format!("{},{},{},{}", z.re, z.im, w.re, w.im));
        if with_h2 {
            let h = q.h2.eval(z);
            text.push_str(&format!(",{},{}", h.re, h.im));
        }
        text.push('\n');
    }
    job.emit(&text)
}

#[derive(Serialize)]
struct FiberReport {
    polynomial: String,
    target: Complex,
    points: Vec<FiberPoint>,
}

#[derive(Serialize)]
struct FiberPoint {
    z: Complex,
    residual: f64,
}

fn parse_complex(s: &str) -> Result<Complex, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parsed: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
    match parsed[..] {
        [re, im] if parts.len() == 2 && re.is_finite() && im.is_finite() => Ok(Complex::new(re, im)),
        _ => Err(CliError::Config(format!("expected re,im, got {s:?}"))),
    }
}

pub fn fiber(common: &Common, target: &str) -> Result<(), CliError> {
    let job = Job::resolve(common)?;
    let w = parse_complex(target)?;
    let q = job.single_map("fiber")?;
    let mut points: Vec<FiberPoint> = q
        .fiber(w)?
        .into_iter()
        .map(|z| FiberPoint {
            z,
            residual: (q.f2(z) - w).norm(),
        })
        .collect();
    points.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    job.emit(&to_json(&FiberReport {
        polynomial: q.p.to_string(),
        target: w,
        points,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex::new(1.5, -2.0));
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("a,b").is_err());
        assert!(parse_complex("inf,0").is_err());
    }
}

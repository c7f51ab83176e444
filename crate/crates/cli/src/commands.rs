//! Subcommand implementations. Each writes its outputs into `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use spamsep::analysis::{
    fidelity, mitigate_circuit, Benchmark, run_sweep, Calibration, SweepConfig, SweepMode, SweepResult,
};
use spamsep::characterize::{
    build_characterization_plan, cooling_forward, cooling_solve, run_characterization, CharacterizationReport,
    CoolingObservables, CoolingRates, CountsDir, CountsSource, PlannedCircuit, Protocol, SimulatedDevice,
    ZneDetail, ZnePoint,
};
use spamsep::mitigate::{Method, MitigationReport};
use spamsep::seed::derive_seed_tagged;
use spamsep::sim::simulate_ideal;
use spamsep::tomo::{reconstruct, simulate_tomography};
use spamsep::{display_label, Circuit, NoiseModel};

use crate::args::{load_circuit, load_noise, read_json, CircuitArg, Shots};
use crate::plot::{bar_chart, line_chart, Series, Style};

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

fn default_pairs(n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    (0..n).map(|q| (q, (q + 1) % n)).collect()
}

fn report_csv(report: &CharacterizationReport) -> String {
    let mut out = String::from(
        "qubit,ancilla,method,delta_sp,se_sp,delta_m0,se_m0,delta_m1,se_m1,delta_spam0,se_spam0,delta_spam1,se_spam1,clamped\n",
    );
    for r in &report.qubits {
        out.push_str(&format!("{},{},{}", r.label, r.ancilla, r.method));
        for e in [r.delta_sp, r.delta_m0, r.delta_m1, r.delta_spam0, r.delta_spam1] {
            out.push_str(&format!(",{:.10},{:.10}", e.value, e.se));
        }
        out.push_str(&format!(",{}\n", r.clamped));
    }
    out
}

pub struct CharacterizeArgs {
    pub noise: Option<PathBuf>,
    pub pairs: Option<Vec<(usize, usize)>>,
    pub protocol: Protocol,
    pub counts_dir: Option<PathBuf>,
    pub emit_counts: bool,
    pub shots: Shots,
    pub seed: u64,
}

pub fn characterize(a: &CharacterizeArgs, out: &Output) -> Result<()> {
    let noise = a.noise.as_deref().map(load_noise).transpose()?;
    let pairs = match (&a.pairs, &noise) {
        (Some(p), _) => p.clone(),
        (None, Some(n)) => default_pairs(n.n_qubits()),
        (None, None) => bail!("--pairs is required when no --noise model is given"),
    };
    let plan = build_characterization_plan(&pairs, &a.protocol, None)?;
    let source: Box<dyn CountsSource> = match (&a.counts_dir, noise) {
        (Some(dir), _) => Box::new(CountsDir::new(dir)),
        (None, Some(noise)) => Box::new(SimulatedDevice::new(noise, a.shots.mode(a.seed))),
        (None, None) => bail!("either --noise or --counts-dir is required"),
    };
    out.json("plan.json", &plan)?;
    if a.emit_counts {
        emit_counts(a, &plan, out)?;
    }
    let report = run_characterization(&plan, &a.protocol, source.as_ref())?;
    out.json("characterization.json", &report)?;
    out.write("characterization.csv", &report_csv(&report))?;
    Ok(())
}

fn emit_counts(a: &CharacterizeArgs, plan: &[PlannedCircuit], out: &Output) -> Result<()> {
    let (Some(noise), Shots::Sampled(_), None) = (&a.noise, a.shots, &a.counts_dir) else {
        bail!("--emit-counts needs a simulated device in sampled mode");
    };
    let device = SimulatedDevice::new(load_noise(noise)?, a.shots.mode(a.seed));
    let counts = Output::new(&out.dir.join("counts"))?;
    for pc in plan {
        counts.json(&format!("{}.json", pc.id), &device.counts(pc)?)?;
    }
    Ok(())
}

fn resolve_circuit(arg: &CircuitArg, theta: Option<f64>) -> Result<(Circuit, Option<f64>)> {
    match arg {
        CircuitArg::Builtin(b) => {
            let Some(t) = theta else {
                bail!("built-in circuits need a single --theta");
            };
            Ok((b.circuit(t), Some(t)))
        }
        CircuitArg::File(path) => Ok((load_circuit(path)?, None)),
    }
}

#[derive(Serialize)]
struct MitigationOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    labels: Vec<String>,
    ideal: Vec<f64>,
    fidelity_raw: f64,
    calibration: Calibration,
    srm: MitigationReport,
    sprm: MitigationReport,
}

pub struct MitigateArgs {
    pub noise: PathBuf,
    pub circuit: CircuitArg,
    pub theta: Option<f64>,
    pub calibration: Option<PathBuf>,
    pub protocol: Protocol,
    pub shots: Shots,
    pub seed: u64,
}

pub fn mitigate(a: &MitigateArgs, out: &Output) -> Result<()> {
    let noise = load_noise(&a.noise)?;
    let (circuit, theta) = resolve_circuit(&a.circuit, a.theta)?;
    let n = circuit.n_qubits();
    if noise.n_qubits() != n {
        bail!("noise model has {} qubits but the circuit has {n}", noise.n_qubits());
    }
    let calibration = match &a.calibration {
        Some(path) => {
            let report: CharacterizationReport = read_json(path)?;
            Calibration::from_report(&report, n)?
        }
        None => Calibration::measure(
            &noise,
            &a.protocol,
            a.shots.mode(derive_seed_tagged(a.seed, "calibration")),
        )?,
    };
    let run = mitigate_circuit(&circuit, &noise, &calibration, a.shots.mode(a.seed))?;
    let ideal = simulate_ideal(&circuit)?;
    let labels: Vec<String> = (0..ideal.len()).map(|k| display_label(k, n)).collect();
    let result = MitigationOutput {
        theta,
        labels: labels.clone(),
        ideal: ideal.probs().to_vec(),
        fidelity_raw: fidelity(&run.raw, &ideal)?,
        calibration,
        srm: MitigationReport::new(run.raw.clone(), &run.srm, Method::Srm, Some(&ideal))?,
        sprm: MitigationReport::new(run.raw.clone(), &run.sprm, Method::Sprm, Some(&ideal))?,
    };
    out.json("mitigation.json", &result)?;
    let svg = bar_chart(
        "Outcome distributions",
        "probability",
        &labels,
        &[
            ("ideal".into(), ideal.probs().to_vec()),
            ("raw".into(), run.raw.probs().to_vec()),
            ("SRM".into(), run.srm.dist.probs().to_vec()),
            ("SPRM".into(), run.sprm.dist.probs().to_vec()),
        ],
    );
    out.write("mitigation.svg", &svg)?;
    Ok(())
}

pub struct SweepArgs {
    pub noise: PathBuf,
    pub circuit: CircuitArg,
    pub thetas: Vec<f64>,
    pub protocol: Protocol,
    pub shots: Shots,
    pub calibration_shots: u64,
    pub repetitions: u32,
    pub seed: u64,
}

pub fn sweep(a: &SweepArgs, out: &Output) -> Result<()> {
    let CircuitArg::Builtin(benchmark) = a.circuit else {
        bail!("sweeps run a built-in benchmark (builtin:2q or builtin:4q)");
    };
    let mut config = SweepConfig::new(benchmark, a.thetas.clone(), load_noise(&a.noise)?);
    config.protocol = a.protocol.clone();
    config.master_seed = a.seed;
    config.mode = match a.shots {
        Shots::Exact => SweepMode::Exact,
        Shots::Sampled(target_shots) => SweepMode::Sampled {
            calibration_shots: a.calibration_shots,
            target_shots,
            repetitions: a.repetitions,
        },
    };
    let result = run_sweep(&config)?;
    out.write("sweep.csv", &result.to_csv())?;
    out.json("sweep.json", &result)?;
    out.write("sweep.svg", &sweep_plot(&result))?;
    Ok(())
}

fn sweep_plot(r: &SweepResult) -> String {
    let series = |name: &str, est: &[spamsep::Estimate], color| Series {
        name: name.into(),
        points: r
            .theta_values
            .iter()
            .zip(est)
            .map(|(&t, e)| (t, e.value, e.se))
            .collect(),
        style: Style::ErrorBars,
        color,
    };
    let lines = |s: &Series| Series {
        name: String::new(),
        style: Style::Line,
        ..s.clone()
    };
    let pts = [
        series("raw", &r.fidelity_raw, 0),
        series("SRM", &r.fidelity_srm, 1),
        series("SPRM", &r.fidelity_sprm, 2),
    ];
    let mut all: Vec<Series> = pts.iter().map(lines).collect();
    all.extend(pts);
    line_chart(
        match r.config.benchmark {
            Benchmark::TwoQubit => "Two-qubit benchmark",
            Benchmark::FourQubit => "Four-qubit benchmark",
        },
        "theta (rad)",
        "fidelity",
        &all,
    )
}

pub struct ZneArgs {
    pub noise: PathBuf,
    pub pairs: Option<Vec<(usize, usize)>>,
    pub folds: Option<Vec<u32>>,
    pub shots: Shots,
    pub seed: u64,
}

pub fn zne(a: &ZneArgs, out: &Output) -> Result<()> {
    let noise = load_noise(&a.noise)?;
    let pairs = a.pairs.clone().unwrap_or_else(|| default_pairs(noise.n_qubits()));
    let protocol = match &a.folds {
        Some(folds) => Protocol::Zne { folds: folds.clone() },
        None => Protocol::zne_default(),
    };
    let plan = build_characterization_plan(&pairs, &protocol, None)?;
    let report = run_characterization(&plan, &protocol, &SimulatedDevice::new(noise, a.shots.mode(a.seed)))?;
    out.json("zne.json", &report)?;
    out.write("characterization.csv", &report_csv(&report))?;
    for row in &report.qubits {
        if let Some(detail) = &row.zne {
            out.write(&format!("zne_{}_a{}.svg", row.label, row.ancilla), &zne_plot(&row.label, detail))?;
        }
    }
    Ok(())
}

fn zne_plot(label: &str, d: &ZneDetail) -> String {
    let names = ["target ctrl, prep 0", "target ctrl, prep 1", "ancilla ctrl, prep 0", "ancilla ctrl, prep 1"];
    let fits = [d.cnot_ta[0], d.cnot_ta[1], d.cnot_at[0], d.cnot_at[1]];
    let points: [&Vec<ZnePoint>; 4] = [&d.cnot_ta_points[0], &d.cnot_ta_points[1], &d.cnot_at_points[0], &d.cnot_at_points[1]];
    let m_max = d.folds.iter().copied().max().unwrap_or(1) as f64;
    let mut series = Vec::new();
    for k in 0..4 {
        series.push(Series {
            name: names[k].into(),
            points: points[k].iter().map(|p| (p.m as f64, p.value, p.se)).collect(),
            style: Style::ErrorBars,
            color: k,
        });
        series.push(Series {
            name: String::new(),
            points: vec![
                (0.0, fits[k].intercept.value, 0.0),
                (m_max, fits[k].intercept.value + fits[k].slope * m_max, 0.0),
            ],
            style: Style::Dashed,
            color: k,
        });
    }
    line_chart(&format!("Ancilla SPAM vs CNOT folds, {label}"), "CNOT repetitions m", "ancilla SPAM rate", &series)
}

#[derive(Serialize)]
struct CoolingOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    injected: Option<CoolingRates>,
    observables: CoolingObservables,
    solution: spamsep::characterize::CoolingSolution,
    reproduced: CoolingObservables,
    max_observable_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_rate_error: Option<f64>,
}

/// Default observables of the demo.
pub const DEMO_OBSERVABLES: [f64; 4] = [0.22923, 0.277084, 0.222717, 0.275828];

pub fn cooling_demo(observables: Option<[f64; 4]>, rates: Option<[f64; 4]>, out: &Output) -> Result<()> {
    let injected = rates.map(|[dsp1, dm1, dsp2, dm2]| CoolingRates { dsp1, dm1, dsp2, dm2 });
    let observables = match (observables, &injected) {
        (Some(_), Some(_)) => bail!("give either --observables or --rates, not both"),
        (_, Some(r)) => cooling_forward(r)?,
        (o, None) => {
            let [dspam1, dspam2, dspam1_tilde, dspam2_tilde] = o.unwrap_or(DEMO_OBSERVABLES);
            CoolingObservables { dspam1, dspam2, dspam1_tilde, dspam2_tilde }
        }
    };
    let solution = cooling_solve(&observables)?;
    let reproduced = cooling_forward(&solution.rates())?;
    let max_observable_error = [
        reproduced.dspam1 - observables.dspam1,
        reproduced.dspam2 - observables.dspam2,
        reproduced.dspam1_tilde - observables.dspam1_tilde,
        reproduced.dspam2_tilde - observables.dspam2_tilde,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    if solution.non_unique {
        log::warn!("{} other roots reproduce the same observables", solution.alternatives.len());
    }
    out.json(
        "cooling.json",
        &CoolingOutput {
            max_rate_error: injected.map(|r| r.max_abs_diff(&solution.rates())),
            injected,
            observables,
            solution,
            reproduced,
            max_observable_error,
        },
    )?;
    Ok(())
}

pub struct TomoArgs {
    pub noise: PathBuf,
    pub qubit: usize,
    pub prep_one: bool,
    pub shots: Shots,
    pub seed: u64,
}

pub fn tomo(a: &TomoArgs, out: &Output) -> Result<()> {
    let noise: NoiseModel = load_noise(&a.noise)?.restrict(&[a.qubit])?;
    let data = simulate_tomography(&noise, a.prep_one, a.shots.mode(a.seed))?;
    let report = reconstruct(&data)?;
    out.json("tomo.json", &report)?;
    Ok(())
}

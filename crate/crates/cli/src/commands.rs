use std::path::Path;

use serde::Serialize;
use serde_json::json;

use pulsemu::dynamics::{
    evolve, fidelity, project_computational, DensityMatrix, SimOptions, SimResult, StateDocument, SNAPSHOT_FINAL,
    SNAPSHOT_GATES_END, SNAPSHOT_READOUT_ONSET,
};
use pulsemu::qasm::parse_qasm;
use pulsemu::transpiler::{transpile, NativeCircuit, TranspileOptions, TranspileOutput};
use pulsemu::validator::{self, ideal_output_state, Thresholds, ValidationReport};
use pulsemu::{schedule, Circuit, Error, PlatformSpec, PulseSchedule, SchedulerPolicy};

use crate::artifacts::{read, sha256_hex, CliError, OutDir, WithFile, EXIT_INVALID};
use crate::{Command, Common, SimArgs, ThresholdArgs, TranspileArgs};

const BUNDLED: &[(&str, &str)] = &[
    ("anyon_2q", include_str!("../../../platforms/anyon_2q.json")),
    ("anyon_4q", include_str!("../../../platforms/anyon_4q.json")),
];

struct LoadedPlatform {
    spec: PlatformSpec,
    source: String,
    sha256: String,
}

fn load_platform(arg: &str) -> Result<LoadedPlatform, CliError> {
    let path = Path::new(arg);
    let (text, source) = if path.exists() {
        (read(path)?, path.display().to_string())
    } else if let Some((name, text)) = BUNDLED.iter().find(|(n, _)| *n == arg) {
        (text.to_string(), format!("bundled:{name}"))
    } else {
        let e = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled platform"));
        return Err(e).at(path);
    };
    let spec = PlatformSpec::from_json_str(&text).at(path)?;
    Ok(LoadedPlatform { spec, source, sha256: sha256_hex(text.as_bytes()) })
}

fn load_circuit(path: &Path) -> Result<(Circuit, String), CliError> {
    let text = read(path)?;
    let c = parse_qasm(&text).at(path)?;
    Ok((c, sha256_hex(text.as_bytes())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).at(path)
}

fn sim_options(a: &SimArgs) -> SimOptions {
    SimOptions {
        atol: a.atol,
        rtol: a.rtol,
        output_dt: a.output_dt,
        decoherence: !a.no_noise,
        shots: a.shots,
        seed: a.sample_seed,
        ..Default::default()
    }
}

fn thresholds(a: &ThresholdArgs) -> Thresholds {
    Thresholds { min_fidelity: a.min_fidelity, evolution: a.evolution_tol, ..Default::default() }
}

pub fn dispatch(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Transpile { input, common, transpile } => {
            let p = load_platform(&common.platform)?;
            let (c, _) = load_circuit(&input)?;
            let mut out = OutDir::create(&common.out_dir)?;
            let t = do_transpile(&c, &p.spec, &transpile, &mut out)?;
            println!(
                "{} -> {} native gates ({} GPI2, {} CZ, {} swaps inserted)",
                input.display(),
                t.report.folded_gates,
                t.report.gpi2_pulses,
                t.report.cz_pulses,
                t.report.swaps_inserted
            );
            Ok(0)
        }
        Command::Compile { native, common, policy } => {
            let p = load_platform(&common.platform)?;
            let nc: NativeCircuit = load_json(&native)?;
            let mut out = OutDir::create(&common.out_dir)?;
            let s = do_compile(&nc, &p.spec, policy.into(), &mut out)?;
            println!("{} pulses, {} ns", s.pulses.len(), s.total_duration_ns);
            Ok(0)
        }
        Command::Simulate { schedule, common, sim } => {
            let p = load_platform(&common.platform)?;
            let s = PulseSchedule::from_json_str(&read(&schedule)?).at(&schedule)?;
            let mut out = OutDir::create(&common.out_dir)?;
            do_simulate(&s, &p.spec, &sim, &mut out)?;
            Ok(0)
        }
        Command::Run { input, common, transpile, policy, sim, validate, thresholds: th } => {
            run(&input, &common, &transpile, policy.into(), &sim, validate.then(|| thresholds(&th)))
        }
        Command::Validate { input, native, schedule, state, common, thresholds: th } => {
            let p = load_platform(&common.platform)?;
            let (c, _) = load_circuit(&input)?;
            let nc: NativeCircuit = load_json(&native)?;
            let s = PulseSchedule::from_json_str(&read(&schedule)?).at(&schedule)?;
            let th = thresholds(&th);
            let mut report = ValidationReport::default();
            report.verdicts.push(validator::validate_circuit_equivalence(&c, &nc, &th)?);
            report.verdicts.push(validator::validate_schedule(&s, &nc, &p.spec));
            report.verdicts.push(validator::validate_evolution(&s, &p.spec, &nc, &th)?);
            if let Some(state) = &state {
                let doc: StateDocument = load_json(state)?;
                let rho = DensityMatrix::from_document(&doc).at(state)?;
                let space = pulsemu::dynamics::HilbertSpace::new(p.spec.n_qubits(), p.spec.levels_per_qubit)?;
                let target = ideal_output_state(&nc)?;
                // The state file does not record whether noise was on; assume it was.
                let floor = th.fidelity_floor(&s, &p.spec, true);
                report.verdicts.push(validator::validate_state_fidelity(&rho, &space, &target, floor)?);
            }
            for (name, path) in [("circuit", &input), ("native", &native), ("schedule", &schedule)] {
                report.artifacts.insert(name.into(), path.display().to_string());
            }
            if let Some(state) = &state {
                report.artifacts.insert("state".into(), state.display().to_string());
            }
            let mut out = OutDir::create(&common.out_dir)?;
            out.write("validation.json", &report.to_json_string()?)?;
            Ok(print_report(&report))
        }
    }
}

fn do_transpile(c: &Circuit, p: &PlatformSpec, a: &TranspileArgs, out: &mut OutDir) -> Result<TranspileOutput, CliError> {
    let opts = TranspileOptions { placement: a.placement(), fold_virtual_z: !a.no_fold, ..Default::default() };
    let t = transpile(c, p, &opts)?;
    out.write_json("native.json", &t.native)?;
    out.write_json("native_unfolded.json", &t.unfolded)?;
    out.write_json("transpile_report.json", &t.report)?;
    Ok(t)
}

fn do_compile(
    nc: &NativeCircuit,
    p: &PlatformSpec,
    policy: SchedulerPolicy,
    out: &mut OutDir,
) -> Result<PulseSchedule, CliError> {
    let s = schedule(nc, p, policy)?;
    out.write("schedule.json", &s.to_json_string()?)?;
    Ok(s)
}

#[derive(Serialize)]
struct InstantMetrics {
    time_ns: f64,
    fidelity: f64,
    leakage: f64,
}

fn instant(r: &SimResult<f64>, name: &str, target: &DensityMatrix<f64>) -> Result<Option<InstantMetrics>, CliError> {
    let Some(snap) = r.snapshot(name) else { return Ok(None) };
    let (proj, leakage) = project_computational(&snap.state, &r.space)?;
    Ok(Some(InstantMetrics { time_ns: snap.time_ns, fidelity: fidelity(&proj, target)?, leakage }))
}

fn do_simulate(s: &PulseSchedule, p: &PlatformSpec, a: &SimArgs, out: &mut OutDir) -> Result<SimResult<f64>, CliError> {
    let opts = sim_options(a);
    let r = evolve::<f64>(s, p, None, &opts)?;
    out.write("populations.csv", &r.populations_csv())?;
    let counts = r.sample(opts.shots, opts.seed)?;
    out.write_json("counts.json", &json!({ "shots": opts.shots, "seed": opts.seed, "counts": counts }))?;
    out.write_json("state.json", &r.readout_state().to_document((0..r.space.dim()).map(|i| r.space.label(i)).collect()))?;

    let nc = s.to_native_circuit(p.n_qubits());
    let target = DensityMatrix::pure(&ideal_output_state(&nc)?);
    let mut fid = serde_json::Map::new();
    for name in [SNAPSHOT_GATES_END, SNAPSHOT_READOUT_ONSET, SNAPSHOT_FINAL] {
        if let Some(m) = instant(&r, name, &target)? {
            fid.insert(name.into(), serde_json::to_value(m).map_err(Error::from)?);
        }
    }
    let metrics = json!({
        "platform": p.name,
        "hilbert_dim": r.space.dim(),
        "decoherence": opts.decoherence,
        "total_duration_ns": s.total_duration_ns,
        "instants": fid,
        "max_trace_error": r.max_trace_error,
        "min_eigenvalue": r.min_eigenvalue,
        "min_purity": r.min_purity,
        "rhs_evaluations": r.rhs_evaluations,
        "accepted_steps": r.accepted_steps,
        "rejected_steps": r.rejected_steps,
        "options": opts,
    });
    out.write_json("metrics.json", &metrics)?;

    let ro = r.snapshot(SNAPSHOT_READOUT_ONSET).or_else(|| r.snapshot(SNAPSHOT_FINAL));
    if let Some(snap) = ro {
        let f = instant(&r, snap.name, &target)?.map_or(f64::NAN, |m| m.fidelity);
        println!("fidelity {f:.6} at {} ns ({} rhs evaluations)", snap.time_ns, r.rhs_evaluations);
    }
    let shown: Vec<String> = counts.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    println!("counts {}", shown.join(" "));
    Ok(r)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    input: ArtifactRef,
    platform: ArtifactRef,
    options: serde_json::Value,
    artifacts: &'a std::collections::BTreeMap<String, crate::artifacts::ArtifactEntry>,
}

#[derive(Serialize)]
struct ArtifactRef {
    path: String,
    sha256: String,
}

fn run(
    input: &Path,
    common: &Common,
    ta: &TranspileArgs,
    policy: SchedulerPolicy,
    sim: &SimArgs,
    validate: Option<Thresholds>,
) -> Result<u8, CliError> {
    let p = load_platform(&common.platform)?;
    let (c, input_sha) = load_circuit(input)?;
    let mut out = OutDir::create(&common.out_dir)?;
    let t = do_transpile(&c, &p.spec, ta, &mut out)?;
    let s = do_compile(&t.native, &p.spec, policy, &mut out)?;
    println!("{} pulses, {} ns", s.pulses.len(), s.total_duration_ns);
    let r = do_simulate(&s, &p.spec, sim, &mut out)?;

    let mut code = 0;
    if let Some(th) = &validate {
        let mut report = validator::validate_all(&c, &t.native, &s, &p.spec, Some((&r, !sim.no_noise)), th)?;
        for name in ["native", "schedule", "state"] {
            report.artifacts.insert(name.into(), out.path(&format!("{name}.json")).display().to_string());
        }
        out.write("validation.json", &report.to_json_string()?)?;
        code = print_report(&report);
    }

    let options = json!({
        "placement": ta.placement(),
        "fold_virtual_z": !ta.no_fold,
        "policy": policy,
        "simulation": sim_options(sim),
        "validate": validate,
    });
    let written = out.written.clone();
    let manifest = RunManifest {
        tool: "pulsemu",
        version: env!("CARGO_PKG_VERSION"),
        input: ArtifactRef { path: input.display().to_string(), sha256: input_sha },
        platform: ArtifactRef { path: p.source, sha256: p.sha256 },
        options,
        artifacts: &written,
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(code)
}

fn print_report(r: &ValidationReport) -> u8 {
    for v in &r.verdicts {
        println!("{:?}: {} ({})", v.stage, if v.passed { "pass" } else { "FAIL" }, v.details);
    }
    if r.passed() {
        0
    } else {
        EXIT_INVALID
    }
}

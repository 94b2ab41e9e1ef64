//! Subcommand implementations.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use beltrami_core::diagnostics::{
    energy, magnetic_helicity, magneto_vorticity_helicity, read_column, CsvSink,
};
use beltrami_core::dynamics::{
    fit_decay_rate, load_checkpoint, run_with, save_checkpoint, stability_bound, write_b_only,
    ExactSolution, Observer, PhysicalParams, SimState,
};
use beltrami_core::fields::{
    abc_flow, make_double_beltrami, random_solenoidal, shell_field, BeltramiComponent,
    DoubleBeltramiSpec, Shell, ShellAmplitudes,
};
use beltrami_core::spectral::{curl_hat, inverse_transform, GridSpec, SpectralVectorField};
use beltrami_core::variational::{
    minimize_fixed_omega, minimize_full, minimize_woltjer, MinimizeMode, MinimizeOptions,
    MinimizerResult, MinimizerStatus,
};
use beltrami_core::verify::{run_suite, suite_ids, Suite, VerifyOptions};
use beltrami_core::Error;

use crate::config::{
    mode_name, ConfigError, FieldTarget, InitSpec, RawConfig, RunConfig, TimeStep,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    NotConverged,
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Usage(_) => 2,
            CliError::NotConverged => 3,
            CliError::Core(e) => match e {
                Error::BlowupDetected { .. }
                | Error::StabilityViolated { .. }
                | Error::ImaginaryResidue { .. }
                | Error::NotSolenoidal { .. } => 3,
                Error::InfeasibleTargets(_) => 4,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::NotConverged => f.write_str("minimizer did not converge"),
            CliError::VerifyFailed => f.write_str("verification failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(format!("config: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

/// Global flags shared by every subcommand.
pub struct Context {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

fn load_config(ctx: &Context) -> Result<RunConfig, CliError> {
    let mut raw = match &ctx.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    if let Some(s) = ctx.seed {
        raw.set("init.seed", s.to_string());
    }
    let cfg = RunConfig::from_raw(&raw)?;
    Ok(match &ctx.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            cfg.with_output_dir(dir)
        }
        None => cfg,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Initial state plus what is known about it in closed form.
struct Initial {
    state: SimState,
    spec: Option<DoubleBeltramiSpec>,
    exact: Option<ExactSolution>,
}

fn place(
    f: SpectralVectorField,
    g: Option<SpectralVectorField>,
    target: FieldTarget,
) -> (SpectralVectorField, SpectralVectorField) {
    let zero = SpectralVectorField::zeros(f.grid());
    match target {
        FieldTarget::U => (f, zero),
        FieldTarget::B => (zero, f),
        FieldTarget::Both => {
            let b = g.unwrap_or_else(|| f.clone());
            (f, b)
        }
    }
}

fn physical_max(f: &SpectralVectorField) -> Result<f64, CliError> {
    Ok(inverse_transform(f)?.max_abs())
}

fn build_initial(cfg: &RunConfig) -> Result<Initial, CliError> {
    let grid = GridSpec::new(cfg.grid_n)?;
    let params = PhysicalParams::new(cfg.nu, cfg.eta, cfg.hall)?;
    let mut spec = None;
    let mut db = None;
    let mut beltrami_lambda = None;
    let (mut u, mut b, t0) = match &cfg.init {
        InitSpec::Abc { a, b, c, lambda0 } => {
            beltrami_lambda = Some(*lambda0);
            let f = abc_flow(*a, *b, *c, *lambda0, grid)?;
            let (u, b) = place(f, None, cfg.target);
            (u, b, 0.0)
        }
        InitSpec::Shell { n, sign } => {
            let shell = Shell::new(*n, *sign)?;
            beltrami_lambda = Some(shell.lambda());
            let f = shell_field(shell, &ShellAmplitudes::Seeded(cfg.seed), grid)?;
            let g = shell_field(
                shell,
                &ShellAmplitudes::Seeded(cfg.seed.wrapping_add(1)),
                grid,
            )?;
            let (u, b) = place(f, Some(g), cfg.target);
            (u, b, 0.0)
        }
        InitSpec::DoubleBeltrami { first, second } => {
            let c = |(n, s): (u32, i8), seed: u64| -> Result<BeltramiComponent, Error> {
                let shell = Shell::new(n, s)?;
                Ok(BeltramiComponent::new(
                    shell,
                    shell_field(shell, &ShellAmplitudes::Seeded(seed), grid)?,
                ))
            };
            let st = make_double_beltrami(
                &c(*first, cfg.seed)?,
                &c(*second, cfg.seed.wrapping_add(1))?,
            )?;
            spec = Some(st.spec);
            let (u, b) = (st.u.clone(), st.b.clone());
            db = Some(st);
            (u, b, 0.0)
        }
        InitSpec::Checkpoint { path } => {
            let ck = load_checkpoint(path)?;
            if ck.grid() != grid {
                return Err(CliError::Usage(format!(
                    "checkpoint grid n = {} differs from grid.n = {}",
                    ck.grid().n(),
                    grid.n()
                )));
            }
            let u = ck.u.unwrap_or_else(|| SpectralVectorField::zeros(grid));
            (u, ck.b, ck.t)
        }
        InitSpec::Random { band } => {
            let f = random_solenoidal(grid, *band, cfg.seed)?;
            let g = random_solenoidal(grid, *band, cfg.seed.wrapping_add(1))?;
            let (u, b) = place(f, Some(g), cfg.target);
            (u, b, 0.0)
        }
    };
    let mut scale = cfg.amplitude;
    if let Some(peak) = cfg.peak {
        let m = physical_max(&u)?.max(physical_max(&b)?);
        if m > 0.0 {
            scale *= peak / m;
        }
    }
    if scale != 1.0 {
        u = u.scale(scale);
        b = b.scale(scale);
        db = db.map(|s| s.scaled(scale));
    }
    let mut exact = None;
    if let Some(p) = cfg.perturbation {
        let size = (u.energy() + b.energy()).sqrt() * p.amplitude / 2f64.sqrt();
        let v = random_solenoidal(grid, p.band, p.seed)?;
        let w = random_solenoidal(grid, p.band, p.seed.wrapping_add(1))?;
        u = u.axpy(size, &v);
        b = b.axpy(size, &w);
    } else if t0 == 0.0 {
        exact = match (&db, beltrami_lambda, cfg.target) {
            (Some(st), _, _) if cfg.nu == cfg.eta => {
                Some(ExactSolution::double_beltrami(st, params)?)
            }
            (None, Some(l), FieldTarget::U) => Some(ExactSolution::trkalian(u.clone(), l, cfg.nu)),
            (None, Some(l), FieldTarget::B) => {
                Some(ExactSolution::mhd_force_free(b.clone(), l, cfg.eta))
            }
            _ => None,
        };
    }
    Ok(Initial {
        state: SimState::new(t0, u, b, params)?,
        spec,
        exact,
    })
}

fn report_state(s: &SimState, spec: Option<&DoubleBeltramiSpec>) {
    let (eu, eb, e) = energy(&s.u, &s.b);
    println!("t = {:?}", s.t);
    println!("energy = {e:?} (u {eu:?}, B {eb:?})");
    if let Ok(h) = magnetic_helicity(&s.b) {
        println!("magnetic_helicity = {h:?}");
    }
    if let Ok(h) = magneto_vorticity_helicity(&s.u, &s.b) {
        println!("magneto_vorticity_helicity = {h:?}");
    }
    if let Some(sp) = spec {
        println!(
            "alpha = {:?}, beta = {:?}, lambda1 = {:?}, lambda2 = {:?}{}",
            sp.alpha,
            sp.beta,
            sp.lambda1,
            sp.lambda2,
            if sp.degenerate { " (degenerate)" } else { "" }
        );
    }
}

pub fn init(ctx: &Context) -> Result<(), CliError> {
    let cfg = load_config(ctx)?;
    let ini = build_initial(&cfg)?;
    report_state(&ini.state, ini.spec.as_ref());
    let mut w = create(&cfg.checkpoint_path)?;
    beltrami_core::dynamics::write_checkpoint(&mut w, &ini.state)?;
    w.flush()?;
    println!("checkpoint = {}", cfg.checkpoint_path.display());
    Ok(())
}

/// Step size: the configured value, or half the stability bound at the start.
fn resolve_dt(cfg: &RunConfig, s: &SimState) -> f64 {
    match cfg.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => {
            let b = 0.5 * stability_bound(s);
            if b.is_finite() {
                b
            } else {
                0.01
            }
        }
    }
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let cfg = load_config(ctx)?;
    let ini = build_initial(&cfg)?;
    let dt = resolve_dt(&cfg, &ini.state);
    let t_end = ini.state.t + cfg.t_end;
    let mut w = create(&cfg.csv_path)?;
    for line in cfg.echo(Some(dt)) {
        writeln!(w, "{line}")?;
    }
    let mut sink = CsvSink::new(w)?;
    let obs = Observer {
        record_every: cfg.record_every,
        factors: ini.spec.map(|s| (s.alpha, s.beta)),
        exact: ini.exact.as_ref(),
    };
    let ck_path = cfg.checkpoint_path.clone();
    let every = cfg.checkpoint_every;
    let result = run_with(ini.state, t_end, dt, &obs, |ev| {
        if let Some(r) = ev.record {
            sink.push(r)?;
        }
        if every > 0 && ev.step > 0 && ev.step % every == 0 {
            save_checkpoint(&ck_path, ev.state)?;
        }
        Ok(())
    });
    // rows up to a failure stay on disk
    sink.flush()?;
    let fin = result?;
    if let Some(parent) = ck_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_checkpoint(&ck_path, &fin)?;
    println!("dt = {dt:?}");
    report_state(&fin, None);
    println!("csv = {}", cfg.csv_path.display());
    println!("checkpoint = {}", ck_path.display());
    Ok(())
}

pub fn verify(
    suite: &str,
    reference_nu: Option<f64>,
    only: Option<Vec<String>>,
) -> Result<(), CliError> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite
            .parse()
            .map_err(|e: Error| CliError::Usage(e.to_string()))?]
    };
    if let Some(nu) = reference_nu {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(CliError::Usage(format!(
                "--reference-nu must be >= 0, got {nu}"
            )));
        }
    }
    if let Some(ids) = &only {
        let known: Vec<&str> = suites.iter().flat_map(|&s| suite_ids(s)).collect();
        if let Some(bad) = ids.iter().find(|i| !known.contains(&i.as_str())) {
            return Err(CliError::Usage(format!(
                "no check '{bad}' in suite '{suite}'"
            )));
        }
    }
    let opts = VerifyOptions { reference_nu, only };
    let mut total = 0;
    let mut passed = 0;
    for s in suites {
        for r in run_suite(s, &opts) {
            println!("{r}");
            total += 1;
            passed += usize::from(r.passed);
        }
    }
    println!("{passed}/{total} checks passed");
    if passed == total {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

const MINIMIZE_HEADER: &str = "mode,energy,multiplier_1,multiplier_2,kkt_residual,\
constraint_residual_1,constraint_residual_2,iterations,status";

fn cell(v: Option<&f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn summary_row(mode: MinimizeMode, r: &MinimizerResult) -> String {
    let status = match r.status {
        MinimizerStatus::Converged => "converged",
        MinimizerStatus::NotConverged => "not_converged",
    };
    format!(
        "{},{:?},{},{},{:?},{},{},{},{status}",
        mode_name(mode),
        r.energy,
        cell(r.multipliers.first()),
        cell(r.multipliers.get(1)),
        r.kkt_residual,
        cell(r.constraint_residuals.first()),
        cell(r.constraint_residuals.get(1)),
        r.iterations,
    )
}

pub fn minimize(ctx: &Context) -> Result<(), CliError> {
    let cfg = load_config(ctx)?;
    let grid = GridSpec::new(cfg.grid_n)?;
    let h1 = cfg
        .h1
        .ok_or_else(|| CliError::Usage("config: missing required key 'minimize.h1'".into()))?;
    let need_h2 = || {
        cfg.h2
            .ok_or_else(|| CliError::Usage("config: missing required key 'minimize.h2'".into()))
    };
    let opts = MinimizeOptions {
        max_iter: cfg.max_iter,
    };
    let r = match cfg.mode {
        MinimizeMode::Woltjer => minimize_woltjer(h1, grid, cfg.seed, opts)?,
        MinimizeMode::FixedOmega => {
            let h2 = need_h2()?;
            let u = build_initial(&cfg)?.state.u;
            minimize_fixed_omega(&curl_hat(&u), h1, h2, grid, cfg.seed, opts)?
        }
        MinimizeMode::Full => minimize_full(h1, need_h2()?, grid, cfg.seed, opts)?,
    };
    let mut w = create(&cfg.csv_path)?;
    for line in cfg.echo_minimize() {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{MINIMIZE_HEADER}")?;
    writeln!(w, "{}", summary_row(cfg.mode, &r))?;
    w.flush()?;

    let params = PhysicalParams::new(cfg.nu, cfg.eta, cfg.hall)?;
    let mut ck = create(&cfg.checkpoint_path)?;
    match &r.u {
        Some(u) => {
            let s = SimState::new(0.0, u.clone(), r.b.clone(), params)?;
            beltrami_core::dynamics::write_checkpoint(&mut ck, &s)?;
        }
        None => write_b_only(&mut ck, &r.b, 0.0, params)?,
    }
    ck.flush()?;

    println!("energy = {:?}", r.energy);
    println!("multipliers = {:?}", r.multipliers);
    println!("kkt_residual = {:?}", r.kkt_residual);
    println!("constraint_residuals = {:?}", r.constraint_residuals);
    println!("iterations = {}", r.iterations);
    println!("csv = {}", cfg.csv_path.display());
    println!("checkpoint = {}", cfg.checkpoint_path.display());
    match r.status {
        MinimizerStatus::Converged => Ok(()),
        MinimizerStatus::NotConverged => Err(CliError::NotConverged),
    }
}

pub fn decay_fit(csv: &Path, column: &str, window: Option<(f64, f64)>) -> Result<(), CliError> {
    let f = File::open(csv)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", csv.display())))?;
    let series = read_column(f, column)?;
    let fit = fit_decay_rate(&series, window)?;
    println!("slope = {:?}", fit.slope);
    println!("rate = {:?}", -fit.slope);
    println!("intercept = {:?}", fit.intercept);
    println!("r_squared = {:?}", fit.r_squared);
    println!("samples = {}", fit.samples);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::VerifyFailed.exit_code(), 1);
        assert_eq!(
            CliError::Core(Error::BlowupDetected { t: 1.0 }).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(Error::InfeasibleTargets("x".into())).exit_code(),
            4
        );
        assert_eq!(CliError::Core(Error::EmptyShell(7)).exit_code(), 2);
    }

    #[test]
    fn minimize_row_layout() {
        let g = GridSpec::new(8).unwrap();
        let r = MinimizerResult {
            b: SpectralVectorField::zeros(g),
            u: None,
            multipliers: vec![1.0],
            energy: 2.5,
            kkt_residual: 1e-9,
            kkt_residuals: vec![1e-9],
            constraint_residuals: vec![0.0],
            iterations: 3,
            status: MinimizerStatus::Converged,
            energy_history: vec![],
        };
        let row = summary_row(MinimizeMode::Woltjer, &r);
        assert_eq!(row, "woltjer,2.5,1.0,,1e-9,0.0,,3,converged");
        assert_eq!(row.split(',').count(), MINIMIZE_HEADER.split(',').count());
    }
}

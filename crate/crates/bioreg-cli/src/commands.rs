//! Subcommand implementations.
//!
//! Each command is an ordinary function over parsed arguments so tests can
//! drive them without spawning the binary. File writes are atomic (temp
//! file in the target directory, then rename), so an interrupted run never
//! leaves a truncated output behind.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use bioreg_core::elasticity::{strain_energy_density, strain_tensor, Material};
use bioreg_core::metrics::{evaluate_masks, jacobian_determinant_map};
use bioreg_core::objective::{LossConfig, RegKind};
use bioreg_core::phantom::{endpoint_error, make_pair, NoiseSpec, PhantomSpec};
use bioreg_core::solver::{register, SolverConfig, StopReason};
use bioreg_core::{BinaryMask2D, DisplacementField2D, ScalarImage2D, SegMaskSet};

use crate::cli::{
    MetricsArgs, PhantomArgs, RegChoice, RegisterArgs, RegisterCommon, StrainArgs, SweepArgs,
    SweepParam,
};
use crate::error::CliError;
use crate::raster::RasterFile;
use crate::report::{
    to_json_bytes, ConfigEcho, EndpointErrorJson, FieldStatsJson, LossTermsJson, MetricReportJson,
    MetricsReport, RunReport, SweepReport, SweepRow, TimingCounters,
};

/// Reads and parses one BIOREG1 file, tagging errors with the path.
fn read_raster(path: &Path) -> Result<RasterFile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    RasterFile::parse(&bytes).map_err(|e| match e {
        CliError::Format { detail } => CliError::Format {
            detail: format!("{}: {detail}", path.display()),
        },
        other => other,
    })
}

/// Writes `bytes` to `path` atomically (temp file + rename).
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn read_image(path: &Path) -> Result<ScalarImage2D, CliError> {
    read_raster(path)?.to_scalar_image()
}

fn read_field(path: &Path) -> Result<DisplacementField2D, CliError> {
    read_raster(path)?.to_field()
}

fn read_mask_set(path: &Path) -> Result<SegMaskSet, CliError> {
    read_raster(path)?.to_mask_set()
}

fn read_single_mask(path: &Path) -> Result<BinaryMask2D, CliError> {
    read_raster(path)?.to_single_mask()
}

fn path_string(path: &Path) -> String {
    path.display().to_string()
}

impl RegisterCommon {
    /// The segmentation term only exists when masks are supplied, so its
    /// weight is zeroed otherwise (the default weight is nonzero and would
    /// just trigger inactive-term warnings).
    fn loss_config(&self, have_masks: bool) -> Result<LossConfig, CliError> {
        Ok(LossConfig {
            lambda: self.lambda,
            gamma: if have_masks { self.gamma } else { 0.0 },
            material: Material::new(self.young, self.nu)?,
            regularizer: match self.reg {
                RegChoice::Bim => RegKind::Bim,
                RegChoice::L2 => RegKind::L2,
                RegChoice::None => RegKind::None,
            },
            ..LossConfig::default()
        })
    }

    fn solver_config(&self, have_masks: bool) -> Result<SolverConfig, CliError> {
        Ok(SolverConfig {
            learning_rate: self.lr,
            max_iterations: self.iters,
            loss: self.loss_config(have_masks)?,
            pyramid: self.pyramid,
            ..SolverConfig::default()
        })
    }

    fn config_echo(&self) -> ConfigEcho {
        ConfigEcho {
            moving: path_string(&self.moving),
            fixed: path_string(&self.fixed),
            moving_masks: self.moving_masks.as_deref().map(path_string),
            fixed_masks: self.fixed_masks.as_deref().map(path_string),
            regularizer: match self.reg {
                RegChoice::Bim => "bim",
                RegChoice::L2 => "l2",
                RegChoice::None => "none",
            }
            .to_string(),
            lambda: self.lambda,
            gamma: self.gamma,
            nu: self.nu,
            young: self.young,
            lr: self.lr,
            iters: self.iters,
            pyramid: self.pyramid,
            gt_dvf: self.gt_dvf.as_deref().map(path_string),
            roi: self.roi.as_deref().map(path_string),
        }
    }
}

/// Inputs loaded for one registration run.
struct RegisterInputs {
    moving: ScalarImage2D,
    fixed: ScalarImage2D,
    masks: Option<(SegMaskSet, SegMaskSet)>,
    gt: Option<DisplacementField2D>,
    roi: Option<BinaryMask2D>,
}

fn load_register_inputs(common: &RegisterCommon) -> Result<RegisterInputs, CliError> {
    let moving = read_image(&common.moving)?;
    let fixed = read_image(&common.fixed)?;
    let masks = match (&common.moving_masks, &common.fixed_masks) {
        (Some(m), Some(f)) => Some((read_mask_set(m)?, read_mask_set(f)?)),
        (None, None) => None,
        _ => return Err(bioreg_core::Error::MissingMasks.into()),
    };
    let gt = common.gt_dvf.as_deref().map(read_field).transpose()?;
    let roi = common.roi.as_deref().map(read_single_mask).transpose()?;
    Ok(RegisterInputs {
        moving,
        fixed,
        masks,
        gt,
        roi,
    })
}

/// The solve plus everything derived from it that reports want.
struct RunOutcome {
    displacement: DisplacementField2D,
    iterations: usize,
    stop_reason: StopReason,
    final_loss: LossTermsJson,
    history: Vec<LossTermsJson>,
    metrics: Option<MetricReportJson>,
    endpoint_error: Option<EndpointErrorJson>,
}

fn run_registration(
    inputs: &RegisterInputs,
    cfg: &SolverConfig,
) -> Result<RunOutcome, CliError> {
    let mask_refs = inputs.masks.as_ref().map(|(m, f)| (m, f));
    let started = Instant::now();
    let result = register(&inputs.moving, &inputs.fixed, mask_refs, None, cfg)?;
    log::info!(
        "solved {} evaluations in {:.3}s ({:?})",
        result.iterations,
        started.elapsed().as_secs_f64(),
        result.stop_reason
    );

    let metrics = match &inputs.masks {
        Some((m, f)) => Some(MetricReportJson::from(&evaluate_masks(
            m,
            f,
            Some(&result.displacement),
        )?)),
        None => None,
    };

    let endpoint = match &inputs.gt {
        Some(gt) => {
            let full;
            let roi = match &inputs.roi {
                Some(r) => r,
                None => {
                    full = BinaryMask2D::from_fn(gt.grid(), |_, _| true);
                    &full
                }
            };
            let (mean, max) = endpoint_error(&result.displacement, gt, roi)?;
            Some(EndpointErrorJson {
                mean_mm: mean,
                max_mm: max,
            })
        }
        None => None,
    };

    Ok(RunOutcome {
        iterations: result.iterations,
        stop_reason: result.stop_reason,
        final_loss: result.final_loss.into(),
        history: result.history.into_iter().map(Into::into).collect(),
        metrics,
        endpoint_error: endpoint,
        displacement: result.displacement,
    })
}

fn stop_reason_str(reason: StopReason) -> String {
    match reason {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max_iterations",
    }
    .to_string()
}

pub fn cmd_register(args: &RegisterArgs) -> Result<(), CliError> {
    let inputs = load_register_inputs(&args.common)?;
    let cfg = args.common.solver_config(inputs.masks.is_some())?;
    let outcome = run_registration(&inputs, &cfg)?;

    write_atomic(
        &args.out_dvf,
        &RasterFile::from_field(&outcome.displacement).serialize(),
    )?;

    if let Some(report_path) = &args.report {
        let report = RunReport {
            command: "register".to_string(),
            config: args.common.config_echo(),
            iterations: outcome.iterations,
            stop_reason: stop_reason_str(outcome.stop_reason),
            final_loss: outcome.final_loss,
            field: FieldStatsJson {
                mean_abs_mm: outcome.displacement.mean_magnitude(),
                max_abs_mm: outcome.displacement.max_magnitude(),
            },
            metrics: outcome.metrics,
            endpoint_error: outcome.endpoint_error,
            timing: TimingCounters {
                objective_evaluations: outcome.iterations,
            },
            history: outcome.history,
        };
        write_atomic(report_path, &to_json_bytes(&report))?;
    }
    Ok(())
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let field = read_field(&args.dvf)?;
    let moving = read_mask_set(&args.moving_masks)?;
    let fixed = read_mask_set(&args.fixed_masks)?;
    let report = evaluate_masks(&moving, &fixed, Some(&field))?;
    let doc = MetricsReport {
        command: "metrics".to_string(),
        dvf: path_string(&args.dvf),
        moving_masks: path_string(&args.moving_masks),
        fixed_masks: path_string(&args.fixed_masks),
        metrics: MetricReportJson::from(&report),
    };
    write_atomic(&args.report, &to_json_bytes(&doc))
}

pub fn cmd_strain(args: &StrainArgs) -> Result<(), CliError> {
    let field = read_field(&args.dvf)?;
    let material = Material::new(args.young, args.nu)?;
    let energy = strain_energy_density(&strain_tensor(&field), &material);
    write_atomic(
        &args.out_energy,
        &RasterFile::from_scalar_image(energy.as_image()).serialize(),
    )?;
    let detj = jacobian_determinant_map(&field);
    write_atomic(
        &args.out_detj,
        &RasterFile::from_scalar_image(&detj).serialize(),
    )
}

pub fn cmd_phantom(args: &PhantomArgs) -> Result<(), CliError> {
    let defaults = PhantomSpec::default();
    let half = (args.size as f64 - 1.0) / 2.0;
    let spec = PhantomSpec {
        width: args.size,
        height: args.size,
        center: (half, half),
        inner_radius: args.ri,
        outer_radius: args.ro,
        contraction: args.contraction,
        taper_start: args.ro + 8.0,
        noise: (args.noise > 0.0).then_some(NoiseSpec {
            sigma: args.noise,
            seed: args.seed,
        }),
        ..defaults
    };
    let pair = make_pair(&spec)?;
    let prefix = &args.out_prefix;
    let out = |suffix: &str| format!("{prefix}_{suffix}.brs");
    write_atomic(
        Path::new(&out("moving")),
        &RasterFile::from_scalar_image(&pair.moving).serialize(),
    )?;
    write_atomic(
        Path::new(&out("fixed")),
        &RasterFile::from_scalar_image(&pair.fixed).serialize(),
    )?;
    write_atomic(
        Path::new(&out("moving_masks")),
        &RasterFile::from_mask_set(&pair.moving_masks).serialize(),
    )?;
    write_atomic(
        Path::new(&out("fixed_masks")),
        &RasterFile::from_mask_set(&pair.fixed_masks).serialize(),
    )?;
    write_atomic(
        Path::new(&out("gt_dvf")),
        &RasterFile::from_field(&pair.ground_truth).serialize(),
    )?;
    write_atomic(
        Path::new(&out("roi")),
        &RasterFile::from_single_mask(&pair.roi).serialize(),
    )?;
    log::info!("wrote phantom files with prefix {prefix}");
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let inputs = load_register_inputs(&args.common)?;
    let mut rows = Vec::with_capacity(args.values.len());
    for &value in &args.values {
        let mut common = args.common.clone();
        match args.param {
            SweepParam::Lambda => common.lambda = value,
            SweepParam::Gamma => common.gamma = value,
            SweepParam::Nu => common.nu = value,
        }
        let cfg = common.solver_config(inputs.masks.is_some())?;
        let outcome = run_registration(&inputs, &cfg)?;
        log::info!(
            "{:?}={value}: mean |u| = {:.4} mm",
            args.param,
            outcome.displacement.mean_magnitude()
        );
        rows.push(SweepRow {
            value,
            iterations: outcome.iterations,
            mean_abs_u_mm: outcome.displacement.mean_magnitude(),
            final_loss: outcome.final_loss,
            metrics: outcome.metrics,
            endpoint_error: outcome.endpoint_error,
        });
    }
    let report = SweepReport {
        command: "sweep".to_string(),
        param: match args.param {
            SweepParam::Lambda => "lambda",
            SweepParam::Gamma => "gamma",
            SweepParam::Nu => "nu",
        }
        .to_string(),
        config: args.common.config_echo(),
        rows,
    };
    write_atomic(&args.report, &to_json_bytes(&report))
}

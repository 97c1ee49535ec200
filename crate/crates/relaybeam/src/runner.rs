use std::fs;
use std::path::PathBuf;

use relaybeam_core::beamsolver::{receive_snr_no_dl, solve_no_dl_detailed};
use relaybeam_core::feedback::{apply_all, encode_index_list, encode_threshold};
use relaybeam_core::montecarlo::{budget_at_db, BlerCurve};
use relaybeam_core::RngSeed;

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::report::{csv_file_name, curve_to_csv, FeedbackStats, Summary};
use crate::sweep::{with_workers, CurveJob};

/// Channel draws per power point for the feedback statistics.
const FEEDBACK_DRAWS: u64 = 10_000;

/// Files written by [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curves: Vec<BlerCurve>,
    pub csv_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: String,
}

/// Estimates every configured curve and writes the CSV files and
/// `summary.txt` into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    fs::create_dir_all(&cfg.output_dir).map_err(RunError::io(format!("creating {}", cfg.output_dir.display())))?;
    let topology = cfg.topology.label();
    let relay_count = cfg.topology.relay_count;

    let curves = with_workers(cfg.workers, || {
        cfg.schemes
            .iter()
            .map(|&scheme| {
                CurveJob {
                    scheme,
                    topology: &cfg.topology,
                    powers_db: &cfg.powers_db,
                    relay_ratios: &cfg.relay_ratios,
                    trials: cfg.trials,
                    adaptive: cfg.adaptive,
                    seed: cfg.seed,
                    control: cfg.control,
                }
                .run()
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut csv_paths = Vec::with_capacity(curves.len());
    for curve in &curves {
        let path = cfg.output_dir.join(csv_file_name(curve.scheme, topology));
        fs::write(&path, curve_to_csv(curve, topology, relay_count))
            .map_err(RunError::io(format!("writing {}", path.display())))?;
        csv_paths.push(path);
    }

    let feedback = match cfg.b1 {
        Some(b1) => feedback_stats(cfg, b1)?,
        None => Vec::new(),
    };
    let summary = Summary {
        curves: &curves,
        targets: &cfg.targets,
        slope_window_db: cfg.slope_window_db,
        b1: cfg.b1,
        feedback: &feedback,
    }
    .render();
    let summary_path = cfg.output_dir.join("summary.txt");
    fs::write(&summary_path, &summary).map_err(RunError::io(format!("writing {}", summary_path.display())))?;
    Ok(RunOutput { curves, csv_paths, summary_path, summary })
}

/// Bits and reconstruction loss of both feedback strategies for the
/// no-direct-link allocation, on a channel stream separate from the BLER
/// trials.
pub fn feedback_stats(cfg: &ExperimentConfig, b1: u32) -> Result<Vec<FeedbackStats>, RunError> {
    let runtime = |e: relaybeam_core::Error| RunError::Runtime(format!("feedback: {e}"));
    cfg.topology.validate().map_err(runtime)?;
    let draws = cfg.trials.min(FEEDBACK_DRAWS);
    let r = cfg.topology.relay_count;
    let stream = RngSeed::new(cfg.seed, 1);
    let mut out = Vec::with_capacity(cfg.powers_db.len());
    for &p_db in &cfg.powers_db {
        let budget = budget_at_db(p_db, &cfg.relay_ratios).map_err(runtime)?;
        let (mut list_bits, mut thr_bits, mut list_loss, mut thr_loss) = (0.0, 0.0, 0.0, 0.0);
        for t in 0..draws {
            let ch = cfg.topology.realize_with(&mut stream.trial(t).rng()).without_direct_link();
            let (alloc, ws) = solve_no_dl_detailed(&ch, &budget).map_err(runtime)?;
            let f: Vec<f64> = (0..r).map(|j| ch.f_mag(j)).collect();
            let g: Vec<f64> = (0..r).map(|j| ch.g_mag(j)).collect();
            for (threshold, bits, loss) in
                [(false, &mut list_bits, &mut list_loss), (true, &mut thr_bits, &mut thr_loss)]
            {
                let msg =
                    if threshold { encode_threshold(&alloc, &ws, b1) } else { encode_index_list(&alloc, &ws, b1) }
                        .map_err(runtime)?;
                let alpha = apply_all(&msg, &f, &g, budget.p0(), budget.relays()).map_err(runtime)?;
                let snr = receive_snr_no_dl(&ch, &budget, &alpha).map_err(runtime)?;
                *bits += msg.bit_cost(r) as f64;
                if alloc.snr > 0.0 {
                    *loss += 10.0 * (alloc.snr / snr.max(f64::MIN_POSITIVE)).log10().max(0.0);
                }
            }
        }
        let n = draws as f64;
        out.push(FeedbackStats {
            p_db,
            draws,
            index_list_bits: list_bits / n,
            threshold_bits: thr_bits / n,
            threshold_loss_db: thr_loss / n,
            index_list_loss_db: list_loss / n,
        });
    }
    Ok(out)
}

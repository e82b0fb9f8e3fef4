#pragma once

#include "ptycho/config.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/scan.hpp"
#include "ptycho/solver_types.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>

namespace ptycho {

/// Synthetic experiment: ground truth, geometry and both raw and shifted frame stacks.
struct Dataset {
    ScanGeometry geometry;
    ComplexField2D probe_true;
    ComplexField2D object_true;
    RealField2D background_true;
    FrameStack raw;
    FrameStack shifted;
    SimulationLog log;
};

/// Builds the phantom, probe and background from the config and simulates the measurements.
Dataset build_dataset(const RunConfig& cfg);

/// The run config's solver block with the lens support attached when requested.
SolverConfig solver_config(const RunConfig& cfg);

/// Dispatches to run_adp / run_adpr / run_baseline according to cfg.algo.
Reconstruction reconstruct(const RunConfig& cfg, const FrameStack& stack, const ScanGeometry& g);

/// One-line per-iteration cost estimate: about 63 m + 2 J FFT, m = J * frame pixels.
std::string flop_estimate(std::size_t frames, Shape frame_shape);

void write_geometry(const std::filesystem::path& path, const ScanGeometry& g);
ScanGeometry read_geometry(const std::filesystem::path& path);

/// `simulate`: writes probe_true, object_true, background_true, geometry.json, frames_raw, frames,
/// config.json and manifest.json into out_dir.
void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// `reconstruct`: reads a simulate output directory and writes object, probe, background, history.csv,
/// images and run_header.json (plus eta and eta_trace.csv for the baseline).
void cmd_reconstruct(const RunConfig& cfg, const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                     std::ostream& log);

struct EvaluationReport {
    std::optional<double> snr_db;
    std::optional<double> r_factor;
};

/// `evaluate`: SNR against truth_dir/object_true (when given) and R-factor against data_dir frames
/// (when given). Writes evaluation.json into recon_dir.
EvaluationReport cmd_evaluate(const std::filesystem::path& recon_dir, const std::optional<std::filesystem::path>& truth_dir,
                              const std::optional<std::filesystem::path>& data_dir, std::size_t margin, long max_shift,
                              std::ostream& out);

}  // namespace ptycho

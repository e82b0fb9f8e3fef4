#pragma once

#include "ptycho/forward.hpp"
#include "ptycho/phantom.hpp"
#include "ptycho/solver_types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace ptycho {

/// Config problem located in the source text. line() is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct GeometryConfig {
    Shape object{128, 128};
    std::size_t frame_side = 32;
    std::size_t step = 8;
};

struct SimNoiseConfig {
    bool poisson = false;
    bool gaussian = false;
    std::optional<double> gaussian_sigma2;
    double gaussian_relative_variance = 1e-6;
    /// Peak of the synthetic parasitic background as a multiple of the mean exact intensity; 0 = none.
    double background_peak = 0.0;
    bool outliers = false;
    double outlier_frame_fraction = 0.10;
    double outlier_patch_fraction = 0.7071;
};

struct IoConfig {
    std::string data_dir;
    bool export_images = true;
    /// When false the elapsed_ms column is written as 0 so logs compare bytewise across runs.
    bool record_elapsed = true;
    long snr_max_shift = 16;
    std::size_t snr_margin = 0;
};

struct RunConfig {
    std::string algo = "adp";
    std::uint64_t seed = 0;
    GeometryConfig geometry;
    ProbeSpec probe;
    SimNoiseConfig noise;
    SolverConfig solver;
    /// Apply the probe's lens support as a Fourier constraint in the solver.
    bool lens_constraint = false;
    IoConfig io;

    /// Cross-field checks (frame fits the object, warm start before max_iters, ...).
    void validate() const;
};

/// Parses JSON text. Unknown keys, wrong types and out-of-range values raise ConfigError with
/// the offending line.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every config value (after defaults), for run headers and manifests.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace ptycho

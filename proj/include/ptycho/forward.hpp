#pragma once

#include "ptycho/field.hpp"
#include "ptycho/scan.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ptycho {

/// J detector frames plus the Gaussian variance used for the shift-Poisson offset.
struct FrameStack {
    std::vector<RealField2D> frames;
    double sigma2 = 0.0;
    /// True once frames hold I = I_raw + sigma2.
    bool shifted = false;

    std::size_t num_frames() const { return frames.size(); }
    Shape frame_shape() const { return frames.empty() ? Shape{} : frames.front().shape(); }
    double mean_intensity() const;
    double max_intensity() const;
    /// Throws ShapeError if the stack does not match the geometry.
    void check_against(const ScanGeometry& g) const;
};

struct NoiseConfig {
    bool poisson = false;
    bool gaussian = false;
    /// Unset: variance = gaussian_relative_variance * mean of the Poissonized intensities.
    std::optional<double> gaussian_sigma2;
    double gaussian_relative_variance = 1e-6;
    /// phi*, frame-shaped and >= 0; empty means no background.
    RealField2D background;
    bool outliers = false;
    double outlier_frame_fraction = 0.10;
    /// Patch side as a fraction of the frame side; 0.7071 gives ~50% of the frame area.
    double outlier_patch_fraction = 0.7071;
    std::uint64_t seed = 0;

    void validate(Shape frame_shape) const;
};

/// Record of what simulate() actually did.
struct SimulationLog {
    std::string rng = "std::mt19937_64 seeded with std::seed_seq{seed, stream, frame}; libstdc++ distributions";
    double sigma2 = 0.0;
    std::vector<std::size_t> corrupted_frames;
    /// (row, col, side) of the zeroed patch, one per corrupted frame.
    std::vector<std::array<std::size_t, 3>> patches;
};

/// A_j(omega, u) = F(omega o S_j u) for one frame.
ComplexField2D forward_frame(const ComplexField2D& probe, const ComplexField2D& object, const ScanGeometry& g,
                             std::size_t j);

/// All J exit-wave spectra z_j = dft2(omega o S_j u).
std::vector<ComplexField2D> forward(const ComplexField2D& probe, const ComplexField2D& object,
                                    const ScanGeometry& g);

/// frames[j] = |z_j|^2 + phi. Throws on negative phi or shape mismatch.
FrameStack intensities(const std::vector<ComplexField2D>& z, const RealField2D& background);

/// Raw measurements: Poisson(|A|^2 + phi*) + N(0, sigma2), then zeroed outlier patches.
/// Deterministic given noise.seed.
FrameStack simulate(const ComplexField2D& probe, const ComplexField2D& object, const ScanGeometry& g,
                    const NoiseConfig& noise, SimulationLog* log = nullptr);

/// I = I_raw + sigma2. Throws std::logic_error if the stack is already shifted.
FrameStack shift_poisson(const FrameStack& raw, double sigma2);

/// Clamps negative shifted intensities to zero before a solver consumes them.
/// Returns the number of clamped pixels.
std::size_t clamp_negative(FrameStack& stack);

}  // namespace ptycho

#pragma once

#include "ptycho/adp.hpp"

namespace ptycho {

/// eta = max(eta_floor, sum_j |z_j|^2 (I_j - phi) / sum_j (I_j - phi)^2) per detector pixel;
/// pixels with a zero denominator get eta_floor.
RealField2D eta_update(std::span<const ComplexField2D> z, const FrameStack& stack, const RealField2D& phi,
                       double eta_floor);

/// phi = mean_j(I_j - |z_j|^2) + (1 - 1/eta) mean_j |z_j|^2, clamped to >= 0.
/// Throws std::invalid_argument if eta has a non-positive entry.
RealField2D phi_update(std::span<const ComplexField2D> z, const FrameStack& stack, const RealField2D& eta);

/// ADP host loop with the background amplitude frozen at zero. The (z) step fits max(0, I - phi);
/// after the warm-start iteration every iteration refreshes eta and phi from the model spectra
/// A_j(omega, u) of that iteration.
Reconstruction run_baseline(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg,
                            const IterationObserver& observer = {});

}  // namespace ptycho

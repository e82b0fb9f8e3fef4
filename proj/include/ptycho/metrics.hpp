#pragma once

#include "ptycho/forward.hpp"
#include "ptycho/scan.hpp"
#include "ptycho/solver_types.hpp"

#include <limits>
#include <span>

namespace ptycho {

/// Returned by snr() when the aligned residual is exactly zero; written as "inf" in CSV.
inline constexpr double kSnrInfinity = std::numeric_limits<double>::infinity();

struct Alignment {
    long shift_row = 0;
    long shift_col = 0;
    cplx zeta{1.0, 0.0};
    double residual = 0.0;
};

/// Best (zeta, T) minimizing sum_t |zeta u(t + T) - u_g(t)|^2 over integer circular shifts
/// |T| <= max_shift per axis. Inner product convention <a, g> = sum conj(a) g.
Alignment align(const ComplexField2D& u, const ComplexField2D& truth, long max_shift);

/// -10 log10(||zeta* u(. + T*) - u_g||^2 / ||zeta* u||^2) in dB; kSnrInfinity on exact match.
double snr(const ComplexField2D& u, const ComplexField2D& truth, long max_shift = 16);

/// sum_j || sqrt(|A_j|^2 + phi_tilde^2) - sqrt(I_j) ||_1 / || sqrt(I) ||_1.
double r_factor(const ComplexField2D& probe, const ComplexField2D& object, const RealField2D& phi_tilde,
                const FrameStack& stack, const ScanGeometry& g);
/// Same, from precomputed A_j(omega, u). An empty phi_tilde means zero background.
double r_factor(std::span<const ComplexField2D> model, const RealField2D& phi_tilde, const FrameStack& stack);

/// G_eps(z, mu) = 1/2 sum_j <C_j, s + eps^2 - (I_j + eps^2) log(s + eps^2)>, s = |z_j|^2 + mu_j^2.
double data_term(std::span<const ComplexField2D> z, std::span<const RealField2D> mu,
                 std::span<const RealField2D> weights, const FrameStack& stack, double eps);

/// Augmented Lagrangian of the split problem (plus TV blocks for TvState).
double augmented_lagrangian(const SolverState& s, const FrameStack& stack, const ScanGeometry& g,
                            const ResolvedConfig& rc);
double augmented_lagrangian(const SolverState& s, const FrameStack& stack, const ResolvedConfig& rc,
                            std::span<const ComplexField2D> model);
double augmented_lagrangian(const TvState& s, const FrameStack& stack, const ScanGeometry& g,
                            const ResolvedConfig& rc, std::span<const ComplexField2D> model);

/// Framewise TV energy sum_j || |grad S_j u| ||_1.
double tv_energy(const ComplexField2D& object, const ScanGeometry& g);

/// Full KL objective with background phi >= 0, weights C, shift eps and TV weight lambda.
/// Empty `weights` means C = 1. Throws std::domain_error on log of a non-positive argument.
double kl_objective(const ComplexField2D& probe, const ComplexField2D& object, const RealField2D& phi,
                    const FrameStack& stack, const ScanGeometry& g, std::span<const RealField2D> weights,
                    double eps, double lambda);

/// Zero-mean normalized cross-correlation (Pearson) of two real fields.
double normalized_cross_correlation(const RealField2D& a, const RealField2D& b);

/// ||a - b|| / ||b||.
double relative_l2_error(const RealField2D& a, const RealField2D& b);

}  // namespace ptycho

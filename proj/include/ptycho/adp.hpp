#pragma once

#include "ptycho/forward.hpp"
#include "ptycho/scan.hpp"
#include "ptycho/solver_types.hpp"

#include <functional>
#include <span>
#include <stdexcept>

namespace ptycho {

/// Solver failure carrying the iteration at which it happened.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int iteration = -1)
        : std::runtime_error(iteration >= 0 ? what + " (iteration " + std::to_string(iteration) + ")" : what),
          iteration_(iteration)
    {
    }
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

/// Fills data-dependent defaults: alpha = 1e-8 * mean(I), TV weights, residual floor.
ResolvedConfig resolve(const SolverConfig& cfg, const FrameStack& stack);

/// Per-pixel magnitude for the joint (z, mu) update with eps = 0:
/// the positive root of (C + r) rho^2 - r x rho - C I = 0.
double rho_closed_form(double weight, double r, double intensity, double xbar);

/// Default projected-gradient stepsize for one pixel.
double rho_default_step(double weight, double r, double intensity, double eps);

/// `iters` projected-gradient steps on
///   H(rho) = C/2 (rho^2 - (I + eps^2) log(rho^2 + eps^2)) + r/2 (rho - x)^2,  rho >= 0.
double rho_projected_gradient(double weight, double r, double intensity, double xbar, double eps, double tau,
                              int iters, double rho0);

/// Initial iterate: u = 1, omega = fftshift(mean_j idft2(sqrt(I_j))), z = A(omega, u), mu = 0, multipliers 0,
/// weights = detector mask (or 1). Rejects unshifted stacks.
SolverState init_state(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg);

/// idft2(z_j + Lambda1_j) for every frame; shared by the probe and object updates.
std::vector<ComplexField2D> backpropagate(const SolverState& s);

/// Closed-form probe refinement, then the optional lens constraint.
ComplexField2D probe_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc);
ComplexField2D probe_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                            std::span<const ComplexField2D> back);

/// Closed-form object refinement, using s.omega as omega^{k+1}.
ComplexField2D object_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc);
ComplexField2D object_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                             std::span<const ComplexField2D> back);

/// Joint (z, mu) proximal step: updates s.z, s.mu (and s.rho). `model` is A(omega^{k+1}, u^{k+1}).
void zmu_update(SolverState& s, const FrameStack& stack, const ResolvedConfig& rc,
                std::span<const ComplexField2D> model);

/// Multiplier ascent: Lambda1 += z - A, Lambda2 += mu - mean(mu); refreshes s.phi_tilde.
void multiplier_update(SolverState& s, std::span<const ComplexField2D> model);

/// Background warm start: every mu_j <- sqrt(max(0, mean_j(I_j - |A_j|^2))).
void background_warm_start(SolverState& s, const FrameStack& stack, std::span<const ComplexField2D> model);

/// Outlier-robust weights C_j = (2/gamma) |1 / (sqrt(|z|^2 + mu^2 + eps^2) - sqrt(I + eps^2))|^(2 - gamma),
/// with the residual floored and the weight capped; detector-mask zeros stay zero.
void weight_update(SolverState& s, const FrameStack& stack, const ResolvedConfig& rc);

/// Optional per-iteration observer: (iteration record, state after the iteration).
using IterationObserver = std::function<void(const MetricsRecord&, const SolverState&)>;

/// Full ADP run from the standard initialization.
Reconstruction run_adp(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg,
                       const IterationObserver& observer = {});
/// Full ADP run from a caller-supplied initial state.
Reconstruction run_adp(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg, SolverState state,
                       const IterationObserver& observer = {});

/// max_t |sum_j Lambda2_j(t)|.
double lambda2_sum_max(const SolverState& s);

/// Largest local Lipschitz constant of the gradient of the data term at the current (z, mu):
/// max over pixels of the Hessian spectral radius of C/2 (s^2 - (I+eps^2) log(s^2+eps^2)), s = |(z, mu)|.
double local_lipschitz(const SolverState& s, const FrameStack& stack, double eps);

}  // namespace ptycho

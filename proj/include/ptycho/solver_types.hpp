#pragma once

#include "ptycho/field.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ptycho {

/// Every tunable of the ADMM solvers. Unset optionals resolve to data-dependent defaults
/// (see resolve()).
struct SolverConfig {
    double r = 1.0;
    std::optional<double> alpha1;
    std::optional<double> alpha2;
    double epsilon = 0.0;
    double gamma = 1.0;
    /// Projected-gradient stepsize; unset = per-pixel bound 0.9 / (C + r + C (I + eps^2) / eps^2).
    std::optional<double> tau;
    int inner_iters = 10;
    int warm_start_iter = 5;
    int max_iters = 1000;
    double tol = 0.0;
    bool weights_enabled = false;
    /// When false the background variable is frozen at zero (no warm start).
    bool background_enabled = true;
    RealField2D lens_mask;
    RealField2D detector_mask;

    // TV-regularized variant.
    std::optional<double> lambda;
    std::optional<double> beta;
    int cg_iters = 5;

    // Weight safeguards.
    double weight_cap = 1e6;
    double residual_floor_rel = 1e-8;

    // Baseline background retrieval.
    double eta_floor = 0.1;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

/// Config with every default filled in for a particular data set.
struct ResolvedConfig {
    SolverConfig cfg;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double lambda = 0.0;
    double beta = 0.0;
    double residual_floor = 0.0;
};

/// Per-pixel 2-vector (d/drow, d/dcol) field over one frame.
struct GradField {
    ComplexField2D d_row;
    ComplexField2D d_col;
};

/// Full ADMM iterate Y^k.
struct SolverState {
    ComplexField2D omega;
    ComplexField2D u;
    std::vector<ComplexField2D> z;
    /// Per-frame background amplitude candidates (signed).
    std::vector<RealField2D> mu;
    /// Mean of mu over frames.
    RealField2D phi_tilde;
    std::vector<ComplexField2D> lambda1;
    std::vector<RealField2D> lambda2;
    std::vector<RealField2D> weights;
    /// Last rho per frame, warm start of the projected-gradient inner loop.
    std::vector<RealField2D> rho;
    int k = 0;
};

/// ADMM iterate plus the TV splitting blocks p_j and their multipliers.
struct TvState : SolverState {
    std::vector<GradField> p;
    std::vector<GradField> lambda3;
};

struct MetricsRecord {
    int iter = 0;
    double r_factor = 0.0;
    double lagrangian = 0.0;
    double rel_change = 0.0;
    double elapsed_ms = 0.0;
};

struct Reconstruction {
    ComplexField2D u;
    ComplexField2D omega;
    /// Recovered background phi = phi_tilde^2 (or the baseline's phi).
    RealField2D phi;
    std::vector<MetricsRecord> history;
    /// Baseline only: eta after the last update and its per-iteration mean.
    RealField2D eta;
    std::vector<double> eta_mean_history;
    /// Largest local Lipschitz estimate of the data-term gradient seen over the run.
    double lipschitz_estimate = 0.0;
    /// Max over iterations of max_t |sum_j Lambda2_j(t)|.
    double max_lambda2_sum = 0.0;
    int iterations = 0;
};

}  // namespace ptycho

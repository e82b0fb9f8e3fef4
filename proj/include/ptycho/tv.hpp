#pragma once

#include "ptycho/adp.hpp"
#include "ptycho/field.hpp"
#include "ptycho/solver_types.hpp"

namespace ptycho {

/// Forward differences with replicate (Neumann) boundary: the last row/column difference is 0.
GradField grad(const ComplexField2D& patch);

/// Discrete divergence, the exact negative adjoint of grad: <grad u, q> = -<u, div q>.
ComplexField2D div(const GradField& q);

/// div(grad(patch)).
ComplexField2D laplacian(const ComplexField2D& patch);

/// Per-pixel isotropic magnitude sqrt(|d_row|^2 + |d_col|^2).
RealField2D magnitude(const GradField& q);

/// Matrix-free object operator M v = (sum_j S_j^T |omega|^2 + alpha2) v - (beta / r) sum_j S_j^T Lap S_j v.
class ObjectOperator {
public:
    ObjectOperator(const ComplexField2D& omega, const ScanGeometry& g, double alpha2, double tv_coupling);

    ComplexField2D apply(const ComplexField2D& v) const;
    const RealField2D& diagonal() const { return diag_; }
    /// Full diagonal of M including the Laplacian part; the Jacobi preconditioner.
    const RealField2D& full_diagonal() const { return full_diag_; }

private:
    const ScanGeometry& geometry_;
    RealField2D diag_;
    RealField2D full_diag_;
    double coupling_;
};

struct CgReport {
    int iterations = 0;
    std::vector<double> residual_norms;
};

/// Jacobi-preconditioned conjugate gradient for a Hermitian positive definite operator, warm-started at x0.
/// Residual norms in the report are unpreconditioned.
/// Throws SolverError on breakdown (<p, Mp> <= 0 or a non-finite residual).
ComplexField2D conjugate_gradient(const ObjectOperator& op, const ComplexField2D& rhs, ComplexField2D x0, int iters,
                                  CgReport* report = nullptr, double abs_tol = 0.0);

/// TV-variant object update: CG solve of the object system, warm-started at s.u.
ComplexField2D object_update_cg(const TvState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                                CgReport* report = nullptr);
ComplexField2D object_update_cg(const TvState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                                std::span<const ComplexField2D> back, CgReport* report = nullptr);

/// Isotropic shrinkage p = max(0, |w| - lambda/beta) w / |w| at one pixel pair, w = (wr, wc).
std::array<cplx, 2> shrink(cplx wr, cplx wc, double threshold);

/// p_j = shrink(grad S_j u - Lambda3_j, lambda / beta). Throws if beta == 0.
void p_update(TvState& s, const ScanGeometry& g, const ResolvedConfig& rc);

/// Lambda3_j += p_j - grad S_j u.
void lambda3_update(TvState& s, const ScanGeometry& g);

/// Initial TV state: the ADP initialization plus zero p and Lambda3.
TvState init_tv_state(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg);

Reconstruction run_adpr(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg,
                        const IterationObserver& observer = {});
Reconstruction run_adpr(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg, TvState state,
                        const IterationObserver& observer = {});

}  // namespace ptycho

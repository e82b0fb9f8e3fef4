#include "ptycho/baseline.hpp"

#include "ptycho/metrics.hpp"

#include <chrono>
#include <cmath>

namespace ptycho {

RealField2D eta_update(std::span<const ComplexField2D> z, const FrameStack& stack, const RealField2D& phi,
                       double eta_floor)
{
    if (z.size() != stack.num_frames()) throw ShapeError("eta_update: frame count mismatch");
    const Shape fs = stack.frame_shape();
    if (phi.shape() != fs) throw ShapeError("eta_update: background shape mismatch");
    RealField2D num(fs), den(fs);
    for (std::size_t j = 0; j < z.size(); ++j)
        for (std::size_t t = 0; t < num.size(); ++t) {
            const double d = stack.frames[j][t] - phi[t];
            num[t] += std::norm(z[j][t]) * d;
            den[t] += d * d;
        }
    RealField2D eta(fs, eta_floor);
    for (std::size_t t = 0; t < eta.size(); ++t)
        if (den[t] > 0.0) eta[t] = std::max(eta_floor, num[t] / den[t]);
    return eta;
}

RealField2D phi_update(std::span<const ComplexField2D> z, const FrameStack& stack, const RealField2D& eta)
{
    if (z.size() != stack.num_frames() || z.empty()) throw ShapeError("phi_update: frame count mismatch");
    const Shape fs = stack.frame_shape();
    if (eta.shape() != fs) throw ShapeError("phi_update: eta shape mismatch");
    for (double e : eta)
        if (!(e > 0.0)) throw std::invalid_argument("phi_update: eta must be > 0");
    RealField2D resid(fs), power(fs);
    for (std::size_t j = 0; j < z.size(); ++j)
        for (std::size_t t = 0; t < resid.size(); ++t) {
            const double p = std::norm(z[j][t]);
            resid[t] += stack.frames[j][t] - p;
            power[t] += p;
        }
    const double inv_j = 1.0 / static_cast<double>(z.size());
    RealField2D phi(fs);
    for (std::size_t t = 0; t < phi.size(); ++t)
        phi[t] = std::max(0.0, inv_j * resid[t] + (1.0 - 1.0 / eta[t]) * inv_j * power[t]);
    return phi;
}

Reconstruction run_baseline(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg,
                            const IterationObserver& observer)
{
    if (!stack.shifted) throw std::invalid_argument("run_baseline: frame stack must be shift-Poisson corrected first");
    stack.check_against(g);
    SolverConfig host_cfg = cfg;
    host_cfg.background_enabled = false;
    const ResolvedConfig rc = resolve(host_cfg, stack);
    SolverState s = init_state(stack, g, host_cfg);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    const Shape fs = g.frame_shape();
    RealField2D phi(fs);
    RealField2D amp(fs);
    RealField2D eta(fs, 1.0);
    FrameStack host = stack;

    Reconstruction out;
    int small_changes = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        s.k = it;
        const auto back = backpropagate(s);
        s.omega = probe_update(s, g, rc, back);
        ComplexField2D u_next = object_update(s, g, rc, back);
        const double u_norm = norm(s.u);
        const double rel_change = u_norm > 0.0 ? norm(u_next - s.u) / u_norm : 0.0;
        s.u = std::move(u_next);

        const auto model = forward(s.omega, s.u, g);
        zmu_update(s, host, rc, model);
        if (cfg.weights_enabled && it > cfg.warm_start_iter) weight_update(s, host, rc);
        multiplier_update(s, model);

        if (it >= cfg.warm_start_iter) {
            eta = eta_update(model, stack, phi, cfg.eta_floor);
            phi = phi_update(model, stack, eta);
            for (std::size_t t = 0; t < phi.size(); ++t) amp[t] = std::sqrt(phi[t]);
            for (std::size_t j = 0; j < host.frames.size(); ++j)
                for (std::size_t t = 0; t < phi.size(); ++t)
                    host.frames[j][t] = std::max(0.0, stack.frames[j][t] - phi[t]);
        }
        out.eta_mean_history.push_back(mean(eta));

        MetricsRecord rec;
        rec.iter = it;
        rec.r_factor = r_factor(model, amp, stack);
        rec.lagrangian = augmented_lagrangian(s, host, rc, model);
        rec.rel_change = rel_change;
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        if (!std::isfinite(rec.r_factor)) throw SolverError("non-finite R-factor", it);
        out.history.push_back(rec);
        s.k = it + 1;
        if (observer) observer(rec, s);

        if (cfg.tol > 0.0) {
            small_changes = rel_change < cfg.tol ? small_changes + 1 : 0;
            if (small_changes >= 10) break;
        }
    }

    out.iterations = s.k;
    out.u = s.u;
    out.omega = s.omega;
    out.phi = phi;
    out.eta = eta;
    return out;
}

}  // namespace ptycho

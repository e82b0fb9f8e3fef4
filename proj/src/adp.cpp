#include "ptycho/adp.hpp"

#include "ptycho/fft.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ptycho {

void SolverConfig::validate() const
{
    auto fail = [](const std::string& m) { throw std::invalid_argument("solver config: " + m); };
    if (!(r > 0.0)) fail("r must be > 0");
    if (alpha1 && *alpha1 < 0.0) fail("alpha1 must be >= 0");
    if (alpha2 && *alpha2 < 0.0) fail("alpha2 must be >= 0");
    if (epsilon < 0.0) fail("epsilon must be >= 0");
    if (!(gamma > 0.0) || gamma > 2.0) fail("gamma must be in (0, 2]");
    if (tau && !(*tau > 0.0)) fail("tau must be > 0");
    if (inner_iters < 1) fail("inner_iters must be >= 1");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (warm_start_iter < 0 || warm_start_iter >= max_iters) fail("warm_start_iter must be in [0, max_iters)");
    if (tol < 0.0) fail("tol must be >= 0");
    if (lambda && *lambda < 0.0) fail("lambda must be >= 0");
    if (beta && *beta < 0.0) fail("beta must be >= 0");
    if (cg_iters < 1) fail("cg_iters must be >= 1");
    if (!(weight_cap > 0.0)) fail("weight_cap must be > 0");
    if (!(eta_floor > 0.0) || eta_floor > 1.0) fail("eta_floor must be in (0, 1]");
}

ResolvedConfig resolve(const SolverConfig& cfg, const FrameStack& stack)
{
    cfg.validate();
    ResolvedConfig rc;
    rc.cfg = cfg;
    const double mean_i = stack.mean_intensity();
    rc.alpha1 = cfg.alpha1.value_or(1e-8 * mean_i);
    rc.alpha2 = cfg.alpha2.value_or(1e-8 * mean_i);

    double mean_sqrt = 0.0;
    std::size_t n = 0;
    for (const auto& f : stack.frames) {
        for (double v : f) mean_sqrt += std::sqrt(std::max(0.0, v));
        n += f.size();
    }
    mean_sqrt = n ? mean_sqrt / static_cast<double>(n) : 0.0;
    rc.lambda = cfg.lambda.value_or(1e-3 * mean_sqrt);
    rc.beta = cfg.beta.value_or(10.0 * rc.lambda);
    rc.residual_floor = cfg.residual_floor_rel * std::sqrt(std::max(0.0, mean_i));
    return rc;
}

double rho_closed_form(double weight, double r, double intensity, double xbar)
{
    const double a = weight + r;
    return (r * xbar + std::sqrt(r * r * xbar * xbar + 4.0 * a * weight * intensity)) / (2.0 * a);
}

double rho_default_step(double weight, double r, double intensity, double eps)
{
    const double e2 = eps * eps;
    return 0.9 / (weight + r + weight * (intensity + e2) / e2);
}

double rho_projected_gradient(double weight, double r, double intensity, double xbar, double eps, double tau,
                              int iters, double rho0)
{
    const double e2 = eps * eps;
    const double ie = intensity + e2;
    double rho = rho0;
    for (int l = 0; l < iters; ++l) {
        const double factor = (1.0 - tau * r) - tau * weight + tau * weight * ie / (rho * rho + e2);
        rho = std::max(0.0, factor * rho + tau * r * xbar);
    }
    return rho;
}

SolverState init_state(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg)
{
    if (!stack.shifted) throw std::invalid_argument("init_state: frame stack must be shift-Poisson corrected first");
    stack.check_against(g);
    const Shape fs = g.frame_shape();
    const std::size_t J = g.num_frames();
    if (!cfg.detector_mask.empty() && cfg.detector_mask.shape() != fs)
        throw ShapeError("detector mask shape " + to_string(cfg.detector_mask.shape()) + " expected " + to_string(fs));
    if (!cfg.lens_mask.empty() && cfg.lens_mask.shape() != fs)
        throw ShapeError("lens mask shape " + to_string(cfg.lens_mask.shape()) + " expected " + to_string(fs));

    SolverState s;
    s.u = ComplexField2D(g.object_shape(), cplx{1.0, 0.0});
    ComplexField2D avg(fs);
    for (const auto& f : stack.frames) {
        ComplexField2D amp(fs);
        for (std::size_t i = 0; i < f.size(); ++i) amp[i] = std::sqrt(std::max(0.0, f[i]));
        idft2_inplace(amp);
        avg += amp;
    }
    avg *= 1.0 / static_cast<double>(J);
    // Centre the zero-delay peak in the frame (fftshift), where the illumination sits.
    s.omega = ComplexField2D(fs);
    for (std::size_t r = 0; r < fs.rows; ++r)
        for (std::size_t c = 0; c < fs.cols; ++c)
            s.omega((r + fs.rows / 2) % fs.rows, (c + fs.cols / 2) % fs.cols) = avg(r, c);

    s.z = forward(s.omega, s.u, g);
    s.mu.assign(J, RealField2D(fs));
    s.phi_tilde = RealField2D(fs);
    s.lambda1.assign(J, ComplexField2D(fs));
    s.lambda2.assign(J, RealField2D(fs));
    s.weights.assign(J, cfg.detector_mask.empty() ? RealField2D(fs, 1.0) : cfg.detector_mask);
    s.rho.clear();
    s.k = 0;
    return s;
}

std::vector<ComplexField2D> backpropagate(const SolverState& s)
{
    std::vector<ComplexField2D> back(s.z.size());
    parallel_for(back.size(), [&](std::size_t j) {
        back[j] = s.z[j];
        back[j] += s.lambda1[j];
        idft2_inplace(back[j]);
    });
    return back;
}

ComplexField2D probe_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc)
{
    const auto back = backpropagate(s);
    return probe_update(s, g, rc, back);
}

ComplexField2D probe_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                            std::span<const ComplexField2D> back)
{
    const Shape fs = g.frame_shape();
    ComplexField2D num(fs);
    RealField2D den(fs);
    for (std::size_t j = 0; j < g.num_frames(); ++j) {
        const ComplexField2D patch = extract(s.u, g, j);
        const ComplexField2D& b = back[j];
        for (std::size_t i = 0; i < patch.size(); ++i) {
            num[i] += std::conj(patch[i]) * b[i];
            den[i] += std::norm(patch[i]);
        }
    }
    ComplexField2D omega(fs);
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double d = den[i] + rc.alpha1;
        if (!(d > 0.0))
            throw SolverError("probe update singular at pixel (" + std::to_string(i / fs.cols) + ", " +
                                  std::to_string(i % fs.cols) + "): zero illumination and alpha1 = 0",
                              s.k);
        omega[i] = (num[i] + rc.alpha1 * s.omega[i]) / d;
    }
    if (!rc.cfg.lens_mask.empty()) {
        dft2_inplace(omega);
        for (std::size_t i = 0; i < omega.size(); ++i) omega[i] *= rc.cfg.lens_mask[i];
        idft2_inplace(omega);
    }
    return omega;
}

ComplexField2D object_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc)
{
    const auto back = backpropagate(s);
    return object_update(s, g, rc, back);
}

ComplexField2D object_update(const SolverState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                             std::span<const ComplexField2D> back)
{
    const Shape os = g.object_shape();
    const RealField2D probe_power = abs_sq(s.omega);
    ComplexField2D num(os);
    RealField2D den(os);
    ComplexField2D patch(g.frame_shape());
    for (std::size_t j = 0; j < g.num_frames(); ++j) {
        const ComplexField2D& b = back[j];
        for (std::size_t i = 0; i < patch.size(); ++i) patch[i] = std::conj(s.omega[i]) * b[i];
        embed_accumulate(patch, g, j, num);
        embed_accumulate(probe_power, g, j, den);
    }
    ComplexField2D u(os);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = den[i] + rc.alpha2;
        if (!(d > 0.0))
            throw SolverError("object update singular at pixel (" + std::to_string(i / os.cols) + ", " +
                                  std::to_string(i % os.cols) + "): zero illumination and alpha2 = 0",
                              s.k);
        u[i] = (num[i] + rc.alpha2 * s.u[i]) / d;
    }
    return u;
}

void zmu_update(SolverState& s, const FrameStack& stack, const ResolvedConfig& rc,
                std::span<const ComplexField2D> model)
{
    const auto& cfg = rc.cfg;
    const double r = cfg.r;
    const double eps = cfg.epsilon;
    const bool background = cfg.background_enabled;
    const std::size_t J = s.z.size();
    if (s.rho.size() != J) s.rho.assign(J, RealField2D(s.z.front().shape()));

    for (const auto& f : stack.frames)
        if (std::any_of(f.begin(), f.end(), [](double v) { return v < 0.0; }))
            throw SolverError("negative intensity passed to the (z, mu) update", s.k);

    parallel_for(J, [&](std::size_t j) {
        const auto& A = model[j];
        const auto& L1 = s.lambda1[j];
        const auto& L2 = s.lambda2[j];
        const auto& C = s.weights[j];
        const auto& I = stack.frames[j];
        auto& z = s.z[j];
        auto& mu = s.mu[j];
        auto& rho_prev = s.rho[j];
        for (std::size_t t = 0; t < z.size(); ++t) {
            const cplx a = A[t] - L1[t];
            const double b = background ? s.phi_tilde[t] - L2[t] : 0.0;
            const double xbar = std::sqrt(std::norm(a) + b * b);
            double rho = rho_closed_form(C[t], r, I[t], xbar);
            if (eps > 0.0) {
                const double start = rho_prev[t] > 0.0 ? rho_prev[t] : rho;
                const double tau = cfg.tau ? *cfg.tau : rho_default_step(C[t], r, I[t], eps);
                rho = rho_projected_gradient(C[t], r, I[t], xbar, eps, tau, cfg.inner_iters, start);
            }
            rho_prev[t] = rho;
            if (xbar > 0.0) {
                z[t] = a * (rho / xbar);
                mu[t] = b * (rho / xbar);
            } else {
                z[t] = rho;
                mu[t] = 0.0;
            }
        }
    });
}

void multiplier_update(SolverState& s, std::span<const ComplexField2D> model)
{
    const std::size_t J = s.z.size();
    RealField2D avg(s.mu.front().shape());
    for (const auto& m : s.mu) avg += m;
    avg *= 1.0 / static_cast<double>(J);
    parallel_for(J, [&](std::size_t j) {
        auto& L1 = s.lambda1[j];
        auto& L2 = s.lambda2[j];
        for (std::size_t t = 0; t < L1.size(); ++t) {
            L1[t] += s.z[j][t] - model[j][t];
            L2[t] += s.mu[j][t] - avg[t];
        }
    });
    s.phi_tilde = std::move(avg);
}

void background_warm_start(SolverState& s, const FrameStack& stack, std::span<const ComplexField2D> model)
{
    const std::size_t J = s.z.size();
    RealField2D resid(s.phi_tilde.shape());
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t t = 0; t < resid.size(); ++t) resid[t] += stack.frames[j][t] - std::norm(model[j][t]);
    for (double& v : resid) v = std::sqrt(std::max(0.0, v / static_cast<double>(J)));
    for (auto& m : s.mu) m = resid;
    s.phi_tilde = std::move(resid);
}

void weight_update(SolverState& s, const FrameStack& stack, const ResolvedConfig& rc)
{
    const auto& cfg = rc.cfg;
    if (cfg.gamma > 2.0 || !(cfg.gamma > 0.0)) throw std::invalid_argument("weight update: gamma must be in (0, 2]");
    const double e2 = cfg.epsilon * cfg.epsilon;
    const double expo = 2.0 - cfg.gamma;
    const double scale = 2.0 / cfg.gamma;
    const bool masked = !cfg.detector_mask.empty();
    parallel_for(s.z.size(), [&](std::size_t j) {
        auto& C = s.weights[j];
        for (std::size_t t = 0; t < C.size(); ++t) {
            const double model = std::sqrt(std::norm(s.z[j][t]) + s.mu[j][t] * s.mu[j][t] + e2);
            const double data = std::sqrt(std::max(0.0, stack.frames[j][t]) + e2);
            const double resid = std::max(std::abs(model - data), rc.residual_floor);
            double w = expo == 0.0 ? scale : scale * std::pow(resid, -expo);
            w = std::min(w, cfg.weight_cap);
            if (masked) w *= cfg.detector_mask[t];
            C[t] = w;
        }
    });
}

double lambda2_sum_max(const SolverState& s)
{
    RealField2D sum(s.lambda2.front().shape());
    for (const auto& l : s.lambda2) sum += l;
    double m = 0.0;
    for (double v : sum) m = std::max(m, std::abs(v));
    return m;
}

double local_lipschitz(const SolverState& s, const FrameStack& stack, double eps)
{
    const double e2 = eps * eps;
    double best = 0.0;
    for (std::size_t j = 0; j < s.z.size(); ++j)
        for (std::size_t t = 0; t < s.z[j].size(); ++t) {
            const double C = s.weights[j][t];
            const double ie = std::max(0.0, stack.frames[j][t]) + e2;
            const double q = std::norm(s.z[j][t]) + s.mu[j][t] * s.mu[j][t];
            const double d = q + e2;
            if (!(d > 0.0)) continue;
            const double radial = C - C * ie * (e2 - q) / (d * d);
            const double tangential = C - C * ie / d;
            best = std::max({best, std::abs(radial), std::abs(tangential)});
        }
    return best;
}

Reconstruction run_adp(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg,
                       const IterationObserver& observer)
{
    return run_adp(stack, g, cfg, init_state(stack, g, cfg), observer);
}

Reconstruction run_adp(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg, SolverState s,
                       const IterationObserver& observer)
{
    if (!stack.shifted) throw std::invalid_argument("run_adp: frame stack must be shift-Poisson corrected first");
    stack.check_against(g);
    const ResolvedConfig rc = resolve(cfg, stack);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    Reconstruction out;
    int small_changes = 0;
    const int first = s.k;
    for (int it = first; it < cfg.max_iters; ++it) {
        s.k = it;
        const auto back = backpropagate(s);
        s.omega = probe_update(s, g, rc, back);
        ComplexField2D u_next = object_update(s, g, rc, back);
        const double u_norm = norm(s.u);
        const double rel_change = u_norm > 0.0 ? norm(u_next - s.u) / u_norm : 0.0;
        s.u = std::move(u_next);

        const auto model = forward(s.omega, s.u, g);
        zmu_update(s, stack, rc, model);
        if (cfg.weights_enabled && it > cfg.warm_start_iter) weight_update(s, stack, rc);
        multiplier_update(s, model);
        if (cfg.background_enabled && it == cfg.warm_start_iter) background_warm_start(s, stack, model);

        MetricsRecord rec;
        rec.iter = it;
        rec.r_factor = r_factor(model, s.phi_tilde, stack);
        rec.lagrangian = augmented_lagrangian(s, stack, rc, model);
        rec.rel_change = rel_change;
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        if (!std::isfinite(rec.r_factor)) throw SolverError("non-finite R-factor", it);
        out.history.push_back(rec);
        out.lipschitz_estimate = std::max(out.lipschitz_estimate, local_lipschitz(s, stack, cfg.epsilon));
        out.max_lambda2_sum = std::max(out.max_lambda2_sum, lambda2_sum_max(s));
        s.k = it + 1;
        if (observer) observer(rec, s);

        if (cfg.tol > 0.0) {
            small_changes = rel_change < cfg.tol ? small_changes + 1 : 0;
            if (small_changes >= 10) break;
        }
    }

    out.iterations = s.k - first;
    out.u = s.u;
    out.omega = s.omega;
    out.phi = s.phi_tilde;
    for (double& v : out.phi) v *= v;
    return out;
}

}  // namespace ptycho

#include "ptycho/tv.hpp"

#include "ptycho/fft.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/parallel.hpp"

#include <chrono>
#include <cmath>

namespace ptycho {

GradField grad(const ComplexField2D& patch)
{
    const std::size_t R = patch.rows(), C = patch.cols();
    GradField g{ComplexField2D(patch.shape()), ComplexField2D(patch.shape())};
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) {
            if (r + 1 < R) g.d_row(r, c) = patch(r + 1, c) - patch(r, c);
            if (c + 1 < C) g.d_col(r, c) = patch(r, c + 1) - patch(r, c);
        }
    return g;
}

ComplexField2D div(const GradField& q)
{
    q.d_row.check_same(q.d_col);
    const std::size_t R = q.d_row.rows(), C = q.d_row.cols();
    ComplexField2D out(q.d_row.shape());
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) {
            cplx v{};
            if (r + 1 < R) v += q.d_row(r, c);
            if (r > 0) v -= q.d_row(r - 1, c);
            if (c + 1 < C) v += q.d_col(r, c);
            if (c > 0) v -= q.d_col(r, c - 1);
            out(r, c) = v;
        }
    return out;
}

ComplexField2D laplacian(const ComplexField2D& patch) { return div(grad(patch)); }

RealField2D magnitude(const GradField& q)
{
    RealField2D m(q.d_row.shape());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::sqrt(std::norm(q.d_row[i]) + std::norm(q.d_col[i]));
    return m;
}

ObjectOperator::ObjectOperator(const ComplexField2D& omega, const ScanGeometry& g, double alpha2, double tv_coupling)
    : geometry_(g), diag_(g.object_shape(), alpha2), coupling_(tv_coupling)
{
    const RealField2D power = abs_sq(omega);
    for (std::size_t j = 0; j < g.num_frames(); ++j) embed_accumulate(power, g, j, diag_);
    full_diag_ = diag_;
    if (coupling_ != 0.0) {
        // -Lap has the in-frame neighbour count on its diagonal.
        const std::size_t R = g.frame_shape().rows, C = g.frame_shape().cols;
        RealField2D links(g.frame_shape());
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c)
                links(r, c) = coupling_ * static_cast<double>((r > 0) + (r + 1 < R) + (c > 0) + (c + 1 < C));
        for (std::size_t j = 0; j < g.num_frames(); ++j) embed_accumulate(links, g, j, full_diag_);
    }
}

ComplexField2D ObjectOperator::apply(const ComplexField2D& v) const
{
    ComplexField2D out(v.shape());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag_[i] * v[i];
    if (coupling_ != 0.0) {
        std::vector<ComplexField2D> lap(geometry_.num_frames());
        parallel_for(lap.size(), [&](std::size_t j) {
            lap[j] = laplacian(extract(v, geometry_, j));
            lap[j] *= -coupling_;
        });
        for (std::size_t j = 0; j < lap.size(); ++j) embed_accumulate(lap[j], geometry_, j, out);
    }
    return out;
}

ComplexField2D conjugate_gradient(const ObjectOperator& op, const ComplexField2D& rhs, ComplexField2D x, int iters,
                                  CgReport* report, double abs_tol)
{
    const RealField2D& pd = op.full_diagonal();
    auto precondition = [&](const ComplexField2D& v) {
        ComplexField2D out(v.shape());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = pd[i] > 0.0 ? v[i] / pd[i] : v[i];
        return out;
    };
    ComplexField2D res = rhs - op.apply(x);
    ComplexField2D pres = precondition(res);
    ComplexField2D dir = pres;
    double rz = dot(res, pres).real();
    double rr = norm_sq(res);
    if (report) {
        report->iterations = 0;
        report->residual_norms.assign(1, std::sqrt(rr));
    }
    for (int it = 0; it < iters; ++it) {
        if (rr == 0.0 || std::sqrt(rr) <= abs_tol) break;
        const ComplexField2D Md = op.apply(dir);
        const double curvature = dot(dir, Md).real();
        if (curvature == 0.0 && norm_sq(dir) == 0.0) break;
        if (!(curvature > 0.0) || !std::isfinite(curvature))
            throw SolverError("conjugate gradient breakdown: <p, Mp> = " + std::to_string(curvature));
        const double step = rz / curvature;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += step * dir[i];
            res[i] -= step * Md[i];
        }
        rr = norm_sq(res);
        if (!std::isfinite(rr)) throw SolverError("conjugate gradient breakdown: non-finite residual");
        pres = precondition(res);
        const double rz_next = dot(res, pres).real();
        const double beta = rz_next / rz;
        for (std::size_t i = 0; i < x.size(); ++i) dir[i] = pres[i] + beta * dir[i];
        rz = rz_next;
        if (report) {
            report->iterations = it + 1;
            report->residual_norms.push_back(std::sqrt(rr));
        }
    }
    return x;
}

namespace {

bool tv_active(const ResolvedConfig& rc) { return rc.lambda > 0.0 && rc.beta > 0.0; }

}  // namespace

ComplexField2D object_update_cg(const TvState& s, const ScanGeometry& g, const ResolvedConfig& rc, CgReport* report)
{
    const auto back = backpropagate(s);
    return object_update_cg(s, g, rc, back, report);
}

ComplexField2D object_update_cg(const TvState& s, const ScanGeometry& g, const ResolvedConfig& rc,
                                std::span<const ComplexField2D> back, CgReport* report)
{
    const double coupling = tv_active(rc) ? rc.beta / rc.cfg.r : 0.0;
    const ObjectOperator op(s.omega, g, rc.alpha2, coupling);

    ComplexField2D rhs = rc.alpha2 * s.u;
    ComplexField2D patch(g.frame_shape());
    for (std::size_t j = 0; j < g.num_frames(); ++j) {
        for (std::size_t i = 0; i < patch.size(); ++i) patch[i] = std::conj(s.omega[i]) * back[j][i];
        if (coupling != 0.0) {
            GradField q{s.p[j].d_row + s.lambda3[j].d_row, s.p[j].d_col + s.lambda3[j].d_col};
            const ComplexField2D d = div(q);
            for (std::size_t i = 0; i < patch.size(); ++i) patch[i] -= coupling * d[i];
        }
        embed_accumulate(patch, g, j, rhs);
    }
    for (std::size_t i = 0; i < op.diagonal().size(); ++i)
        if (!(op.diagonal()[i] > 0.0) && coupling == 0.0)
            throw SolverError("object system singular at pixel (" + std::to_string(i / g.object_shape().cols) +
                                  ", " + std::to_string(i % g.object_shape().cols) + ")",
                              s.k);
    return conjugate_gradient(op, rhs, s.u, rc.cfg.cg_iters, report);
}

std::array<cplx, 2> shrink(cplx wr, cplx wc, double threshold)
{
    const double mag = std::sqrt(std::norm(wr) + std::norm(wc));
    if (mag <= threshold || mag == 0.0) return {cplx{}, cplx{}};
    const double scale = (mag - threshold) / mag;
    return {wr * scale, wc * scale};
}

void p_update(TvState& s, const ScanGeometry& g, const ResolvedConfig& rc)
{
    if (!(rc.beta > 0.0)) throw std::invalid_argument("p_update: beta must be > 0");
    const double threshold = rc.lambda / rc.beta;
    parallel_for(g.num_frames(), [&](std::size_t j) {
        const GradField gu = grad(extract(s.u, g, j));
        auto& p = s.p[j];
        const auto& l3 = s.lambda3[j];
        for (std::size_t i = 0; i < gu.d_row.size(); ++i) {
            const auto [pr, pc] = shrink(gu.d_row[i] - l3.d_row[i], gu.d_col[i] - l3.d_col[i], threshold);
            p.d_row[i] = pr;
            p.d_col[i] = pc;
        }
    });
}

void lambda3_update(TvState& s, const ScanGeometry& g)
{
    parallel_for(g.num_frames(), [&](std::size_t j) {
        const GradField gu = grad(extract(s.u, g, j));
        auto& l3 = s.lambda3[j];
        for (std::size_t i = 0; i < gu.d_row.size(); ++i) {
            l3.d_row[i] += s.p[j].d_row[i] - gu.d_row[i];
            l3.d_col[i] += s.p[j].d_col[i] - gu.d_col[i];
        }
    });
}

TvState init_tv_state(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg)
{
    TvState s;
    static_cast<SolverState&>(s) = init_state(stack, g, cfg);
    const Shape fs = g.frame_shape();
    s.p.assign(g.num_frames(), GradField{ComplexField2D(fs), ComplexField2D(fs)});
    s.lambda3 = s.p;
    return s;
}

Reconstruction run_adpr(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg,
                        const IterationObserver& observer)
{
    return run_adpr(stack, g, cfg, init_tv_state(stack, g, cfg), observer);
}

Reconstruction run_adpr(const FrameStack& stack, const ScanGeometry& g, const SolverConfig& cfg, TvState s,
                        const IterationObserver& observer)
{
    if (!stack.shifted) throw std::invalid_argument("run_adpr: frame stack must be shift-Poisson corrected first");
    stack.check_against(g);
    const ResolvedConfig rc = resolve(cfg, stack);
    const bool tv = tv_active(rc);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    Reconstruction out;
    int small_changes = 0;
    const int first = s.k;
    for (int it = first; it < cfg.max_iters; ++it) {
        s.k = it;
        const auto back = backpropagate(s);
        s.omega = probe_update(s, g, rc, back);
        ComplexField2D u_next = object_update_cg(s, g, rc, back);
        const double u_norm = norm(s.u);
        const double rel_change = u_norm > 0.0 ? norm(u_next - s.u) / u_norm : 0.0;
        s.u = std::move(u_next);
        if (tv) p_update(s, g, rc);

        const auto model = forward(s.omega, s.u, g);
        zmu_update(s, stack, rc, model);
        if (cfg.weights_enabled && it > cfg.warm_start_iter) weight_update(s, stack, rc);
        multiplier_update(s, model);
        if (tv) lambda3_update(s, g);
        if (cfg.background_enabled && it == cfg.warm_start_iter) background_warm_start(s, stack, model);

        MetricsRecord rec;
        rec.iter = it;
        rec.r_factor = r_factor(model, s.phi_tilde, stack);
        rec.lagrangian = augmented_lagrangian(s, stack, g, rc, model);
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

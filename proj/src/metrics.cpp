#include "ptycho/metrics.hpp"

#include "ptycho/fft.hpp"
#include "ptycho/tv.hpp"

#include <cmath>
#include <stdexcept>

namespace ptycho {

namespace {

// Relative residual below which the aligned match is reported as exact (about 240 dB).
constexpr double kExactMatchRatio = 1e-24;

ComplexField2D circular_shift(const ComplexField2D& u, long dr, long dc)
{
    const long R = static_cast<long>(u.rows()), C = static_cast<long>(u.cols());
    ComplexField2D out(u.shape());
    for (long r = 0; r < R; ++r)
        for (long c = 0; c < C; ++c)
            out(r, c) = u(static_cast<std::size_t>(((r + dr) % R + R) % R), static_cast<std::size_t>(((c + dc) % C + C) % C));
    return out;
}

// Candidate shifts along one axis, each residue mod n listed once.
std::vector<long> shift_candidates(long n, long max_shift)
{
    std::vector<long> out;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (long d = 0; d <= max_shift; ++d)
        for (long s : {d, -d}) {
            const auto idx = static_cast<std::size_t>(((s % n) + n) % n);
            if (!seen[idx]) {
                seen[idx] = true;
                out.push_back(s);
            }
        }
    return out;
}

}  // namespace

Alignment align(const ComplexField2D& u, const ComplexField2D& truth, long max_shift)
{
    u.check_same(truth);
    if (max_shift < 0) throw std::invalid_argument("align: max_shift must be >= 0");
    const double unorm = norm_sq(u);
    if (!(unorm > 0.0)) throw std::invalid_argument("align: reconstruction has zero norm");

    // corr(T) = sum_t conj(u(t + T)) g(t) is proportional to dft2(conj(U) G)(T)
    ComplexField2D spec = dft2(u);
    const ComplexField2D G = dft2(truth);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = std::conj(spec[i]) * G[i];
    dft2_inplace(spec);

    const long R = static_cast<long>(u.rows()), C = static_cast<long>(u.cols());
    Alignment best;
    double best_mag = -1.0;
    for (long dr : shift_candidates(R, max_shift))
        for (long dc : shift_candidates(C, max_shift)) {
            const double mag = std::abs(spec(static_cast<std::size_t>((dr % R + R) % R),
                                             static_cast<std::size_t>((dc % C + C) % C)));
            if (mag > best_mag) {
                best_mag = mag;
                best.shift_row = dr;
                best.shift_col = dc;
            }
        }

    const ComplexField2D a = circular_shift(u, best.shift_row, best.shift_col);
    best.zeta = dot(a, truth) / norm_sq(a);
    double resid = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) resid += std::norm(best.zeta * a[i] - truth[i]);
    best.residual = resid;
    return best;
}

double snr(const ComplexField2D& u, const ComplexField2D& truth, long max_shift)
{
    const Alignment al = align(u, truth, max_shift);
    const double signal = std::norm(al.zeta) * norm_sq(u);
    if (al.residual <= kExactMatchRatio * signal) return kSnrInfinity;
    return -10.0 * std::log10(al.residual / signal);
}

double r_factor(const ComplexField2D& probe, const ComplexField2D& object, const RealField2D& phi_tilde,
                const FrameStack& stack, const ScanGeometry& g)
{
    stack.check_against(g);
    const auto model = forward(probe, object, g);
    return r_factor(model, phi_tilde, stack);
}

double r_factor(std::span<const ComplexField2D> model, const RealField2D& phi_tilde, const FrameStack& stack)
{
    if (model.size() != stack.num_frames())
        throw ShapeError("r_factor: " + std::to_string(model.size()) + " model frames for " +
                         std::to_string(stack.num_frames()) + " data frames");
    const bool has_bg = !phi_tilde.empty();
    if (has_bg && phi_tilde.shape() != stack.frame_shape()) throw ShapeError("r_factor: background shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& A = model[j];
        const auto& I = stack.frames[j];
        if (A.shape() != I.shape()) throw ShapeError("r_factor: model/data frame shape mismatch");
        for (std::size_t t = 0; t < A.size(); ++t) {
            const double b = has_bg ? phi_tilde[t] : 0.0;
            const double data = std::sqrt(std::max(0.0, I[t]));
            num += std::abs(std::sqrt(std::norm(A[t]) + b * b) - data);
            den += data;
        }
    }
    if (!(den > 0.0)) throw std::domain_error("r_factor: data has zero l1 norm");
    return num / den;
}

double data_term(std::span<const ComplexField2D> z, std::span<const RealField2D> mu,
                 std::span<const RealField2D> weights, const FrameStack& stack, double eps)
{
    const double e2 = eps * eps;
    double total = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j)
        for (std::size_t t = 0; t < z[j].size(); ++t) {
            const double C = weights.empty() ? 1.0 : weights[j][t];
            const double m = mu.empty() ? 0.0 : mu[j][t];
            const double v = std::norm(z[j][t]) + m * m + e2;
            const double ie = stack.frames[j][t] + e2;
            double term = v;
            if (ie != 0.0) {
                if (!(v > 0.0)) throw std::domain_error("data term: log of non-positive model intensity");
                term -= ie * std::log(v);
            }
            total += 0.5 * C * term;
        }
    return total;
}

double augmented_lagrangian(const SolverState& s, const FrameStack& stack, const ScanGeometry& g,
                            const ResolvedConfig& rc)
{
    const auto model = forward(s.omega, s.u, g);
    return augmented_lagrangian(s, stack, rc, model);
}

double augmented_lagrangian(const SolverState& s, const FrameStack& stack, const ResolvedConfig& rc,
                            std::span<const ComplexField2D> model)
{
    const double r = rc.cfg.r;
    double total = data_term(s.z, s.mu, s.weights, stack, rc.cfg.epsilon);
    for (std::size_t j = 0; j < s.z.size(); ++j) {
        double pen = 0.0;
        for (std::size_t t = 0; t < s.z[j].size(); ++t) {
            const cplx dz = s.z[j][t] - model[j][t];
            const double dm = s.mu[j][t] - s.phi_tilde[t];
            pen += (std::conj(s.lambda1[j][t]) * dz).real() + 0.5 * std::norm(dz) + s.lambda2[j][t] * dm +
                   0.5 * dm * dm;
        }
        total += r * pen;
    }
    return total;
}

double augmented_lagrangian(const TvState& s, const FrameStack& stack, const ScanGeometry& g,
                            const ResolvedConfig& rc, std::span<const ComplexField2D> model)
{
    double total = augmented_lagrangian(static_cast<const SolverState&>(s), stack, rc, model);
    if (s.p.empty()) return total;
    for (std::size_t j = 0; j < g.num_frames(); ++j) {
        const GradField gu = grad(extract(s.u, g, j));
        const auto& p = s.p[j];
        const auto& l3 = s.lambda3[j];
        double l1 = 0.0, pen = 0.0;
        for (std::size_t t = 0; t < gu.d_row.size(); ++t) {
            l1 += std::sqrt(std::norm(p.d_row[t]) + std::norm(p.d_col[t]));
            const cplx er = p.d_row[t] - gu.d_row[t];
            const cplx ec = p.d_col[t] - gu.d_col[t];
            pen += (std::conj(l3.d_row[t]) * er).real() + (std::conj(l3.d_col[t]) * ec).real() +
                   0.5 * (std::norm(er) + std::norm(ec));
        }
        total += rc.lambda * l1 + rc.beta * pen;
    }
    return total;
}

double tv_energy(const ComplexField2D& object, const ScanGeometry& g)
{
    double total = 0.0;
    for (std::size_t j = 0; j < g.num_frames(); ++j)
        for (double v : magnitude(grad(extract(object, g, j)))) total += v;
    return total;
}

double kl_objective(const ComplexField2D& probe, const ComplexField2D& object, const RealField2D& phi,
                    const FrameStack& stack, const ScanGeometry& g, std::span<const RealField2D> weights,
                    double eps, double lambda)
{
    stack.check_against(g);
    const bool has_bg = !phi.empty();
    if (has_bg) {
        if (phi.shape() != stack.frame_shape()) throw ShapeError("kl_objective: background shape mismatch");
        for (double v : phi)
            if (v < 0.0) throw std::invalid_argument("kl_objective: background must be >= 0");
    }
    const auto model = forward(probe, object, g);
    const double e2 = eps * eps;
    double total = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j)
        for (std::size_t t = 0; t < model[j].size(); ++t) {
            const double C = weights.empty() ? 1.0 : weights[j][t];
            const double v = std::norm(model[j][t]) + (has_bg ? phi[t] : 0.0) + e2;
            const double ie = stack.frames[j][t] + e2;
            double term = v;
            if (ie != 0.0) {
                if (!(v > 0.0)) throw std::domain_error("kl_objective: log of non-positive model intensity");
                term -= ie * std::log(v);
            }
            total += 0.5 * C * term;
        }
    if (lambda > 0.0) total += lambda * tv_energy(object, g);
    return total;
}

double normalized_cross_correlation(const RealField2D& a, const RealField2D& b)
{
    a.check_same(b);
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw std::domain_error("normalized_cross_correlation: constant input");
    return sab / std::sqrt(saa * sbb);
}

double relative_l2_error(const RealField2D& a, const RealField2D& b)
{
    a.check_same(b);
    const double nb = norm(b);
    if (!(nb > 0.0)) throw std::domain_error("relative_l2_error: reference has zero norm");
    return norm(a - b) / nb;
}

}  // namespace ptycho

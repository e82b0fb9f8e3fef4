#include "ptycho/forward.hpp"

#include "ptycho/fft.hpp"
#include "ptycho/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ptycho {
namespace {

enum class Stream : std::uint32_t { poisson = 1, gaussian = 2, outliers = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

double FrameStack::mean_intensity() const
{
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& f : frames) {
        for (double v : f) acc += v;
        n += f.size();
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double FrameStack::max_intensity() const
{
    double m = 0.0;
    for (const auto& f : frames)
        for (double v : f) m = std::max(m, v);
    return m;
}

void FrameStack::check_against(const ScanGeometry& g) const
{
    if (frames.size() != g.num_frames())
        throw ShapeError("stack has " + std::to_string(frames.size()) + " frames, geometry has " +
                         std::to_string(g.num_frames()));
    for (const auto& f : frames)
        if (f.shape() != g.frame_shape())
            throw ShapeError("frame shape " + to_string(f.shape()) + " does not match geometry frame " +
                             to_string(g.frame_shape()));
}

void NoiseConfig::validate(Shape frame_shape) const
{
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(outlier_frame_fraction)) throw std::invalid_argument("outlier_frame_fraction must be in [0, 1]");
    if (!in_unit(outlier_patch_fraction)) throw std::invalid_argument("outlier_patch_fraction must be in [0, 1]");
    if (gaussian_sigma2 && *gaussian_sigma2 < 0.0) throw std::invalid_argument("gaussian_sigma2 must be >= 0");
    if (!background.empty()) {
        if (background.shape() != frame_shape)
            throw ShapeError("background shape " + to_string(background.shape()) + " does not match frame " +
                             to_string(frame_shape));
        if (std::any_of(background.begin(), background.end(), [](double v) { return v < 0.0; }))
            throw std::invalid_argument("background must be non-negative");
    }
}

ComplexField2D forward_frame(const ComplexField2D& probe, const ComplexField2D& object, const ScanGeometry& g,
                             std::size_t j)
{
    if (probe.shape() != g.frame_shape())
        throw ShapeError("probe shape " + to_string(probe.shape()) + " does not match frame " +
                         to_string(g.frame_shape()));
    ComplexField2D psi = extract(object, g, j);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= probe[i];
    dft2_inplace(psi);
    return psi;
}

std::vector<ComplexField2D> forward(const ComplexField2D& probe, const ComplexField2D& object,
                                    const ScanGeometry& g)
{
    std::vector<ComplexField2D> z(g.num_frames());
    parallel_for(z.size(), [&](std::size_t j) { z[j] = forward_frame(probe, object, g, j); });
    return z;
}

FrameStack intensities(const std::vector<ComplexField2D>& z, const RealField2D& background)
{
    if (std::any_of(background.begin(), background.end(), [](double v) { return v < 0.0; }))
        throw std::invalid_argument("background must be non-negative");
    FrameStack out;
    out.frames.reserve(z.size());
    for (const auto& zj : z) {
        RealField2D f = abs_sq(zj);
        if (!background.empty()) f += background;
        out.frames.push_back(std::move(f));
    }
    return out;
}

FrameStack simulate(const ComplexField2D& probe, const ComplexField2D& object, const ScanGeometry& g,
                    const NoiseConfig& noise, SimulationLog* log)
{
    noise.validate(g.frame_shape());
    FrameStack stack = intensities(forward(probe, object, g), noise.background);
    const std::size_t J = stack.num_frames();

    if (noise.poisson) {
        parallel_for(J, [&](std::size_t j) {
            auto rng = make_rng(noise.seed, Stream::poisson, j);
            for (double& v : stack.frames[j]) {
                if (v <= 0.0) {
                    v = 0.0;
                    continue;
                }
                std::poisson_distribution<long long> dist(v);
                v = static_cast<double>(dist(rng));
            }
        });
    }

    double sigma2 = 0.0;
    if (noise.gaussian) {
        sigma2 = noise.gaussian_sigma2.value_or(noise.gaussian_relative_variance * stack.mean_intensity());
        const double sd = std::sqrt(sigma2);
        if (sd > 0.0) {
            parallel_for(J, [&](std::size_t j) {
                auto rng = make_rng(noise.seed, Stream::gaussian, j);
                std::normal_distribution<double> dist(0.0, sd);
                for (double& v : stack.frames[j]) v += dist(rng);
            });
        }
    }
    stack.sigma2 = sigma2;

    if (log) {
        *log = SimulationLog{};
        log->sigma2 = sigma2;
    }

    if (noise.outliers && noise.outlier_frame_fraction > 0.0) {
        // Round up; the small epsilon keeps e.g. 0.1 * 10 from becoming 2.
        const auto count = static_cast<std::size_t>(
            std::ceil(noise.outlier_frame_fraction * static_cast<double>(J) - 1e-9));
        auto rng = make_rng(noise.seed, Stream::outliers, 0);
        std::vector<std::size_t> order(J);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(std::min(count, J));
        std::sort(order.begin(), order.end());

        const std::size_t n = g.frame_side();
        const auto side = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::lround(noise.outlier_patch_fraction * static_cast<double>(n))), 1, n);
        std::uniform_int_distribution<std::size_t> pos(0, n - side);
        for (std::size_t j : order) {
            const std::size_t r0 = pos(rng);
            const std::size_t c0 = pos(rng);
            auto& f = stack.frames[j];
            for (std::size_t r = r0; r < r0 + side; ++r)
                for (std::size_t c = c0; c < c0 + side; ++c) f(r, c) = 0.0;
            if (log) log->patches.push_back({r0, c0, side});
        }
        if (log) log->corrupted_frames = order;
    }
    return stack;
}

FrameStack shift_poisson(const FrameStack& raw, double sigma2)
{
    if (raw.shifted) throw std::logic_error("frame stack is already shift-Poisson corrected");
    if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
    FrameStack out = raw;
    for (auto& f : out.frames)
        for (double& v : f) v += sigma2;
    out.sigma2 = sigma2;
    out.shifted = true;
    return out;
}

std::size_t clamp_negative(FrameStack& stack)
{
    std::size_t n = 0;
    for (auto& f : stack.frames)
        for (double& v : f)
            if (v < 0.0) {
                v = 0.0;
                ++n;
            }
    return n;
}

}  // namespace ptycho

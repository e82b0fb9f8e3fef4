#include "ptycho/phantom.hpp"

#include "ptycho/fft.hpp"

#include <numbers>
#include <random>

namespace ptycho {
namespace {

// Signed frequency index in [-n/2, n/2).
double wrapped(std::size_t i, std::size_t n)
{
    const auto v = static_cast<double>(i);
    return i < (n + 1) / 2 ? v : v - static_cast<double>(n);
}

void paint_shapes(RealField2D& map, std::mt19937_64& rng, std::size_t count, double lo, double hi)
{
    const double rows = static_cast<double>(map.rows());
    const double cols = static_cast<double>(map.cols());
    const double scale = std::min(rows, cols);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t s = 0; s < count; ++s) {
        const double cr = unit(rng) * rows;
        const double cc = unit(rng) * cols;
        const double size = scale * (0.03 + 0.09 * unit(rng));
        const double value = lo + (hi - lo) * unit(rng);
        const bool disk = unit(rng) < 0.5;
        const double aspect = 0.5 + unit(rng);
        for (std::size_t r = 0; r < map.rows(); ++r) {
            for (std::size_t c = 0; c < map.cols(); ++c) {
                const double dr = (static_cast<double>(r) - cr) / size;
                const double dc = (static_cast<double>(c) - cc) / (size * aspect);
                const bool inside = disk ? dr * dr + dc * dc <= 1.0 : std::abs(dr) <= 1.0 && std::abs(dc) <= 1.0;
                if (inside) map(r, c) = value;
            }
        }
    }
}

}  // namespace

ComplexField2D make_phantom(Shape shape, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    RealField2D amp(shape), ph(shape);
    const double rows = static_cast<double>(shape.rows);
    const double cols = static_cast<double>(shape.cols);

    // Low-frequency base texture so that no window is flat.
    const double fa1 = 1.0 + 3.0 * unit(rng), fa2 = 1.0 + 3.0 * unit(rng), pa = 6.0 * unit(rng);
    const double fp1 = 1.0 + 3.0 * unit(rng), fp2 = 1.0 + 3.0 * unit(rng), pp = 6.0 * unit(rng);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t r = 0; r < shape.rows; ++r) {
        for (std::size_t c = 0; c < shape.cols; ++c) {
            const double y = static_cast<double>(r) / rows;
            const double x = static_cast<double>(c) / cols;
            amp(r, c) = 0.75 + 0.08 * std::sin(two_pi * fa1 * x + pa) * std::cos(two_pi * fa2 * y);
            ph(r, c) = 0.15 * std::cos(two_pi * fp1 * y + pp) * std::sin(two_pi * fp2 * x);
        }
    }

    const std::size_t count = std::max<std::size_t>(8, shape.size() / 400);
    paint_shapes(amp, rng, count, 0.4, 1.0);
    paint_shapes(ph, rng, count, -0.8, 0.8);

    ComplexField2D out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(amp[i], ph[i]);
    return out;
}

RealField2D make_lens_mask(std::size_t side, double radius)
{
    RealField2D mask(side, side);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            const double qr = wrapped(r, side);
            const double qc = wrapped(c, side);
            mask(r, c) = qr * qr + qc * qc <= radius * radius ? 1.0 : 0.0;
        }
    return mask;
}

ComplexField2D make_probe(const ProbeSpec& spec)
{
    const std::size_t n = spec.side;
    const double center = (static_cast<double>(n) - 1.0) / 2.0;
    const double sigma = spec.fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    ComplexField2D probe(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double dr = static_cast<double>(r) - center;
            const double dc = static_cast<double>(c) - center;
            const double rr = dr * dr + dc * dc;
            probe(r, c) = std::polar(std::exp(-rr / (4.0 * sigma * sigma)), spec.curvature * rr);
        }
    if (spec.lens_radius > 0.0) {
        const auto mask = make_lens_mask(n, spec.lens_radius);
        dft2_inplace(probe);
        for (std::size_t i = 0; i < probe.size(); ++i) probe[i] *= mask[i];
        idft2_inplace(probe);
    }
    const double energy = norm_sq(probe);
    if (energy > 0.0) probe *= std::sqrt(spec.photons_per_frame / energy);
    return probe;
}

RealField2D make_background(std::size_t side, double peak)
{
    const double n = static_cast<double>(side);
    const double ring_radius = n / 4.0;
    const double ring_width = n / 16.0;
    const double streak_width = n / 24.0;
    const double streak_offset = n / 6.0;
    const double hole = n / 10.0;
    RealField2D bg(side, side);
    double max_v = 0.0;
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            const double qr = wrapped(r, side);
            const double qc = wrapped(c, side);
            const double d2 = qr * qr + qc * qc;
            const double dr = std::sqrt(d2) - ring_radius;
            const double sr = qr - streak_offset;
            const double sc = qc + streak_offset;
            const double v = 0.5 * std::exp(-dr * dr / (2.0 * ring_width * ring_width)) +
                             0.35 * std::exp(-sr * sr / (2.0 * streak_width * streak_width)) +
                             0.35 * std::exp(-sc * sc / (2.0 * streak_width * streak_width));
            bg(r, c) = v * (1.0 - std::exp(-d2 / (2.0 * hole * hole)));
            max_v = std::max(max_v, bg(r, c));
        }
    if (max_v > 0.0) bg *= peak / max_v;
    return bg;
}

}  // namespace ptycho

#pragma once

#include "ptycho/field.hpp"

#include <numbers>
#include <random>

namespace testutil {

inline ptycho::ComplexField2D random_complex(ptycho::Shape s, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    ptycho::ComplexField2D f(s);
    for (auto& v : f) v = {n(rng), n(rng)};
    return f;
}

inline ptycho::RealField2D random_real(ptycho::Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    ptycho::RealField2D f(s);
    for (auto& v : f) v = u(rng);
    return f;
}

inline double max_abs_diff(const ptycho::ComplexField2D& a, const ptycho::ComplexField2D& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const ptycho::RealField2D& a, const ptycho::RealField2D& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Direct O(n^2) unitary DFT, exp(-2 pi i (k r / R + l c / C)) / sqrt(RC).
inline ptycho::ComplexField2D naive_dft(const ptycho::ComplexField2D& f, double sign)
{
    const std::size_t R = f.rows(), C = f.cols();
    ptycho::ComplexField2D out(f.shape());
    for (std::size_t k = 0; k < R; ++k)
        for (std::size_t l = 0; l < C; ++l) {
            ptycho::cplx acc{};
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t c = 0; c < C; ++c) {
                    const double ang = sign * 2.0 * std::numbers::pi *
                                       (static_cast<double>(k * r) / R + static_cast<double>(l * c) / C);
                    acc += f(r, c) * std::polar(1.0, ang);
                }
            out(k, l) = acc / std::sqrt(static_cast<double>(R * C));
        }
    return out;
}

}  // namespace testutil

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptycho {

using cplx = std::complex<double>;

struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const { return rows * cols; }
    bool operator==(const Shape&) const = default;
};

inline std::string to_string(const Shape& s)
{
    return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense 2-D array stored in row-major (lexicographic) order.
template <typename T>
class Field2D {
public:
    using value_type = T;

    Field2D() = default;
    Field2D(std::size_t rows, std::size_t cols, T fill = T{})
        : shape_{rows, cols}, data_(rows * cols, fill)
    {
    }
    explicit Field2D(Shape shape, T fill = T{}) : Field2D(shape.rows, shape.cols, fill) {}
    Field2D(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data))
    {
        if (data_.size() != shape_.size())
            throw ShapeError("field data length " + std::to_string(data_.size()) +
                             " does not match shape " + to_string(shape_));
    }

    std::size_t rows() const { return shape_.rows; }
    std::size_t cols() const { return shape_.cols; }
    Shape shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> span() { return data_; }
    std::span<const T> span() const { return data_; }
    const std::vector<T>& values() const { return data_; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    Field2D& operator+=(const Field2D& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field2D& operator-=(const Field2D& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    template <typename S>
    Field2D& operator*=(S s)
    {
        for (auto& v : data_) v *= s;
        return *this;
    }

    bool operator==(const Field2D&) const = default;

    void check_same(const Field2D& o) const
    {
        if (o.shape_ != shape_)
            throw ShapeError("shape mismatch: " + to_string(shape_) + " vs " + to_string(o.shape_));
    }

private:
    Shape shape_{};
    std::vector<T> data_;
};

using ComplexField2D = Field2D<cplx>;
using RealField2D = Field2D<double>;

template <typename T>
Field2D<T> operator+(Field2D<T> a, const Field2D<T>& b)
{
    a += b;
    return a;
}
template <typename T>
Field2D<T> operator-(Field2D<T> a, const Field2D<T>& b)
{
    a -= b;
    return a;
}
template <typename T, typename S>
Field2D<T> operator*(S s, Field2D<T> a)
{
    a *= s;
    return a;
}

/// Hermitian inner product <a, b> = sum conj(a) * b.
inline cplx dot(const ComplexField2D& a, const ComplexField2D& b)
{
    a.check_same(b);
    cplx acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

inline double dot(const RealField2D& a, const RealField2D& b)
{
    a.check_same(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm_sq(const ComplexField2D& a)
{
    double acc = 0.0;
    for (const auto& v : a) acc += std::norm(v);
    return acc;
}

inline double norm_sq(const RealField2D& a)
{
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return acc;
}

template <typename T>
double norm(const Field2D<T>& a)
{
    return std::sqrt(norm_sq(a));
}

template <typename T>
bool all_finite(const Field2D<T>& a)
{
    if constexpr (std::is_same_v<T, cplx>) {
        return std::all_of(a.begin(), a.end(),
                           [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
    } else {
        return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
    }
}

inline double mean(const RealField2D& a)
{
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (double v : a) acc += v;
    return acc / static_cast<double>(a.size());
}

inline RealField2D abs_sq(const ComplexField2D& a)
{
    RealField2D out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::norm(a[i]);
    return out;
}

inline RealField2D amplitude(const ComplexField2D& a)
{
    RealField2D out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i]);
    return out;
}

inline RealField2D phase(const ComplexField2D& a)
{
    RealField2D out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::arg(a[i]);
    return out;
}

inline ComplexField2D to_complex(const RealField2D& a)
{
    ComplexField2D out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
    return out;
}

/// Rectangular sub-block [row0, row0+rows) x [col0, col0+cols).
template <typename T>
Field2D<T> crop(const Field2D<T>& a, std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols)
{
    if (row0 + rows > a.rows() || col0 + cols > a.cols())
        throw ShapeError("crop window exceeds field " + to_string(a.shape()));
    Field2D<T> out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out(r, c) = a(row0 + r, col0 + c);
    return out;
}

/// Strips `margin` pixels from every edge.
template <typename T>
Field2D<T> crop_margin(const Field2D<T>& a, std::size_t margin)
{
    if (2 * margin >= a.rows() || 2 * margin >= a.cols())
        throw ShapeError("margin " + std::to_string(margin) + " too large for " + to_string(a.shape()));
    return crop(a, margin, margin, a.rows() - 2 * margin, a.cols() - 2 * margin);
}

}  // namespace ptycho

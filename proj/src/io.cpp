#include "ptycho/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ptycho {

static_assert(std::endian::native == std::endian::little, "PTYA payloads are written in native little-endian order");

namespace {

constexpr char kMagic[4] = {'P', 'T', 'Y', 'A'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError(path.string() + ": truncated header");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::binary)
{
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path)
{
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace

std::size_t ArrayData::element_count() const
{
    std::size_t n = 1;
    for (auto d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

void write_array(const std::filesystem::path& path, const ArrayData& a)
{
    const std::size_t words = a.element_count() * (a.dtype == DType::Complex128 ? 2 : 1);
    if (words != a.values.size())
        throw IoError("write_array: payload has " + std::to_string(a.values.size()) + " words, dims imply " +
                      std::to_string(words));
    auto os = open_out(path);
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(a.dtype));
    put(os, static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) put(os, d);
    os.write(reinterpret_cast<const char*>(a.values.data()), static_cast<std::streamsize>(words * sizeof(double)));
    finish(os, path);
}

ArrayData read_array(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError(path.string() + ": not a PTYA file");
    const auto version = get<std::uint32_t>(is, path);
    if (version != kVersion) throw IoError(path.string() + ": unsupported version " + std::to_string(version));
    const auto code = get<std::uint32_t>(is, path);
    if (code != 1 && code != 2) throw IoError(path.string() + ": unknown dtype code " + std::to_string(code));
    const auto ndim = get<std::uint32_t>(is, path);
    if (ndim > 16) throw IoError(path.string() + ": implausible ndim " + std::to_string(ndim));
    ArrayData a;
    a.dtype = static_cast<DType>(code);
    for (std::uint32_t i = 0; i < ndim; ++i) a.dims.push_back(get<std::uint64_t>(is, path));
    const std::size_t words = a.element_count() * (a.dtype == DType::Complex128 ? 2 : 1);
    a.values.resize(words);
    if (!is.read(reinterpret_cast<char*>(a.values.data()), static_cast<std::streamsize>(words * sizeof(double))))
        throw IoError(path.string() + ": truncated payload");
    if (is.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes after payload");
    return a;
}

void write_field(const std::filesystem::path& path, const RealField2D& f)
{
    write_array(path, ArrayData{DType::Float64, {f.rows(), f.cols()}, f.values()});
}

void write_field(const std::filesystem::path& path, const ComplexField2D& f)
{
    ArrayData a{DType::Complex128, {f.rows(), f.cols()}, {}};
    a.values.reserve(2 * f.size());
    for (const cplx& v : f) {
        a.values.push_back(v.real());
        a.values.push_back(v.imag());
    }
    write_array(path, a);
}

void write_stack(const std::filesystem::path& path, const std::vector<RealField2D>& frames)
{
    if (frames.empty()) throw IoError("write_stack: empty stack");
    const Shape s = frames.front().shape();
    ArrayData a{DType::Float64, {frames.size(), s.rows, s.cols}, {}};
    a.values.reserve(frames.size() * frames.front().size());
    for (const auto& f : frames) {
        if (f.shape() != s) throw ShapeError("write_stack: frames differ in shape");
        a.values.insert(a.values.end(), f.begin(), f.end());
    }
    write_array(path, a);
}

RealField2D read_real_field(const std::filesystem::path& path)
{
    ArrayData a = read_array(path);
    if (a.dtype != DType::Float64 || a.dims.size() != 2)
        throw IoError(path.string() + ": expected a 2-D float64 array");
    return RealField2D(Shape{a.dims[0], a.dims[1]}, std::move(a.values));
}

ComplexField2D read_complex_field(const std::filesystem::path& path)
{
    const ArrayData a = read_array(path);
    if (a.dtype != DType::Complex128 || a.dims.size() != 2)
        throw IoError(path.string() + ": expected a 2-D complex128 array");
    ComplexField2D f(Shape{a.dims[0], a.dims[1]});
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = {a.values[2 * i], a.values[2 * i + 1]};
    return f;
}

std::vector<RealField2D> read_stack(const std::filesystem::path& path)
{
    const ArrayData a = read_array(path);
    if (a.dtype != DType::Float64 || a.dims.size() != 3)
        throw IoError(path.string() + ": expected a 3-D float64 array");
    const Shape s{a.dims[1], a.dims[2]};
    const std::size_t n = s.rows * s.cols;
    std::vector<RealField2D> frames;
    for (std::size_t j = 0; j < a.dims[0]; ++j)
        frames.emplace_back(s, std::vector<double>(a.values.begin() + static_cast<std::ptrdiff_t>(j * n),
                                                   a.values.begin() + static_cast<std::ptrdiff_t>((j + 1) * n)));
    return frames;
}

void write_pgm16(const std::filesystem::path& path, const RealField2D& values, double lo, double hi)
{
    auto os = open_out(path);
    os << "P5\n" << values.cols() << ' ' << values.rows() << "\n65535\n";
    const double span = hi - lo;
    for (double v : values) {
        double t = span > 0.0 ? (v - lo) / span : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
        const char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
        os.write(bytes, 2);
    }
    finish(os, path);
}

void export_amplitude(const std::filesystem::path& path, const ComplexField2D& f)
{
    const RealField2D amp = amplitude(f);
    const auto [lo, hi] = std::minmax_element(amp.begin(), amp.end());
    write_pgm16(path, amp, *lo, *hi);
    write_text(std::filesystem::path(path.string() + ".scale.txt"),
               "min " + format_double(*lo) + "\nmax " + format_double(*hi) + "\n");
}

void export_phase(const std::filesystem::path& path, const ComplexField2D& f)
{
    write_pgm16(path, phase(f), -std::numbers::pi, std::numbers::pi);
}

std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& history)
{
    std::ostringstream ss;
    ss << "iter,r_factor,lagrangian,rel_change,elapsed_ms\n";
    for (const auto& r : history)
        ss << r.iter << ',' << format_double(r.r_factor) << ',' << format_double(r.lagrangian) << ','
           << format_double(r.rel_change) << ',' << format_double(r.elapsed_ms) << '\n';
    write_text(path, ss.str());
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto os = open_out(path);
    os << text;
    finish(os, path);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace ptycho

#pragma once

#include "ptycho/field.hpp"
#include "ptycho/solver_types.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptycho {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DType : std::uint32_t { Float64 = 1, Complex128 = 2 };

/// Decoded PTYA container. `values` holds float64 payload words (complex arrays interleave re/im).
struct ArrayData {
    DType dtype = DType::Float64;
    std::vector<std::uint64_t> dims;
    std::vector<double> values;

    std::size_t element_count() const;
};

// PTYA container: "PTYA", u32 version = 1, u32 dtype, u32 ndim, ndim x u64 dims, little-endian row-major payload.
void write_array(const std::filesystem::path& path, const ArrayData& a);
ArrayData read_array(const std::filesystem::path& path);

void write_field(const std::filesystem::path& path, const RealField2D& f);
void write_field(const std::filesystem::path& path, const ComplexField2D& f);
void write_stack(const std::filesystem::path& path, const std::vector<RealField2D>& frames);

RealField2D read_real_field(const std::filesystem::path& path);
ComplexField2D read_complex_field(const std::filesystem::path& path);
std::vector<RealField2D> read_stack(const std::filesystem::path& path);

/// 16-bit binary PGM (P5, big-endian samples). `values` are mapped linearly from [lo, hi] to [0, 65535].
void write_pgm16(const std::filesystem::path& path, const RealField2D& values, double lo, double hi);

/// Amplitude image, min-max scaled; writes `<path>.scale.txt` with the min and max.
void export_amplitude(const std::filesystem::path& path, const ComplexField2D& f);
/// Phase image mapped from [-pi, pi] to [0, 65535].
void export_phase(const std::filesystem::path& path, const ComplexField2D& f);

/// Shortest round-trip decimal form; infinities as "inf"/"-inf".
std::string format_double(double v);

/// Iteration log with header iter,r_factor,lagrangian,rel_change,elapsed_ms.
void write_history_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& history);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ptycho

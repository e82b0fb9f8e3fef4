#include "ptycho/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace ptycho {
namespace {

// FFTW planning is not thread-safe; execution with fftw_execute_dft is.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t rows, std::size_t cols, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(rows, cols, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        std::vector<cplx> scratch(rows * cols);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

void transform(ComplexField2D& f, int sign)
{
    if (f.empty()) throw ShapeError("DFT of an empty field");
    fftw_plan plan = cache().get(f.rows(), f.cols(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(f.data());
    fftw_execute_dft(plan, buf, buf);
    f *= 1.0 / std::sqrt(static_cast<double>(f.size()));
}

}  // namespace

void dft2_inplace(ComplexField2D& f) { transform(f, FFTW_FORWARD); }
void idft2_inplace(ComplexField2D& f) { transform(f, FFTW_BACKWARD); }

ComplexField2D dft2(const ComplexField2D& f)
{
    ComplexField2D out = f;
    dft2_inplace(out);
    return out;
}

ComplexField2D idft2(const ComplexField2D& f)
{
    ComplexField2D out = f;
    idft2_inplace(out);
    return out;
}

}  // namespace ptycho

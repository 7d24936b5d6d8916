#include "fft.hpp"

#include <map>
#include <mutex>
#include <new>
#include <tuple>

#include <fftw3.h>

namespace groupdet::detail {

ComplexBuffer::ComplexBuffer(std::size_t n)
    : ptr_(reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n))), n_(n) {
    if (!ptr_) throw std::bad_alloc();
    for (std::size_t i = 0; i < n; ++i) ptr_[i] = 0.0;
}

void ComplexBuffer::Free::operator()(std::complex<double>* p) const noexcept { fftw_free(p); }

namespace {

// Planning is not thread-safe in FFTW; execution with new-array is.
std::mutex plan_mutex;
std::map<std::tuple<int, int, bool>, fftw_plan> plans;

fftw_plan plan_for(int width, int height, bool inverse) {
    std::lock_guard lock(plan_mutex);
    auto key = std::make_tuple(width, height, inverse);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    ComplexBuffer scratch(static_cast<std::size_t>(width) * height);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(height, width, p, p, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    plans.emplace(key, plan);
    return plan;
}

}  // namespace

void fft2d_inplace(ComplexBuffer& buf, int width, int height, bool inverse) {
    fftw_plan plan = plan_for(width, height, inverse);
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace groupdet::detail

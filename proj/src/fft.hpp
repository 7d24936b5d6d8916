#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace groupdet::detail {

/// FFTW-backed aligned complex buffer.
class ComplexBuffer {
public:
    explicit ComplexBuffer(std::size_t n);
    ComplexBuffer(ComplexBuffer&&) noexcept = default;
    ComplexBuffer& operator=(ComplexBuffer&&) noexcept = default;

    std::complex<double>* data() noexcept { return ptr_.get(); }
    const std::complex<double>* data() const noexcept { return ptr_.get(); }
    std::size_t size() const noexcept { return n_; }
    std::complex<double>& operator[](std::size_t i) noexcept { return ptr_[i]; }
    const std::complex<double>& operator[](std::size_t i) const noexcept { return ptr_[i]; }

private:
    struct Free {
        void operator()(std::complex<double>* p) const noexcept;
    };
    std::unique_ptr<std::complex<double>[], Free> ptr_;
    std::size_t n_;
};

/// Unnormalized in-place 2D DFT of a height x width row-major buffer.
/// Safe to call concurrently; plans are created once per shape.
void fft2d_inplace(ComplexBuffer& buf, int width, int height, bool inverse);

}  // namespace groupdet::detail

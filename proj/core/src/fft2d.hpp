#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace harmrec::detail {

struct AlignedBufferDeleter {
  void operator()(std::complex<double>* p) const noexcept;
};

using AlignedBuffer = std::unique_ptr<std::complex<double>[], AlignedBufferDeleter>;

/// SIMD-aligned buffer suitable for the transforms below.
AlignedBuffer make_aligned_buffer(std::size_t n);

/// In-place, unnormalized 2D DFT pair over an n1 x n2 array stored with the
/// first index fastest. Plans are made once with FFTW_ESTIMATE so results do
/// not depend on run-time measurements; execution is safe from any thread.
class Fft2d {
 public:
  Fft2d(std::ptrdiff_t n1, std::ptrdiff_t n2);
  ~Fft2d();

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  std::ptrdiff_t n1() const noexcept { return n1_; }
  std::ptrdiff_t n2() const noexcept { return n2_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n1_ * n2_); }

  /// data must come from make_aligned_buffer.
  void forward(std::complex<double>* data) const;
  void backward(std::complex<double>* data) const;

 private:
  std::ptrdiff_t n1_;
  std::ptrdiff_t n2_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace harmrec::detail

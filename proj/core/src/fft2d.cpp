#include "fft2d.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>
#include <stdexcept>

namespace harmrec::detail {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void AlignedBufferDeleter::operator()(std::complex<double>* p) const noexcept { fftw_free(p); }

AlignedBuffer make_aligned_buffer(std::size_t n) {
  auto* raw = static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * (n == 0 ? 1 : n)));
  if (raw == nullptr) throw std::bad_alloc();
  return AlignedBuffer(raw);
}

Fft2d::Fft2d(std::ptrdiff_t n1, std::ptrdiff_t n2) : n1_(n1), n2_(n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("transform extents must be positive");
  auto scratch = make_aligned_buffer(size());
  std::lock_guard lock(planner_mutex());
  // FFTW is row-major: the slow dimension (n2) comes first.
  forward_plan_ = fftw_plan_dft_2d(static_cast<int>(n2), static_cast<int>(n1), as_fftw(scratch.get()),
                                   as_fftw(scratch.get()), FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_2d(static_cast<int>(n2), static_cast<int>(n1), as_fftw(scratch.get()),
                                    as_fftw(scratch.get()), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    throw std::runtime_error("FFTW failed to create a 2D plan");
  }
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void Fft2d::forward(std::complex<double>* data) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data), as_fftw(data));
}

void Fft2d::backward(std::complex<double>* data) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data), as_fftw(data));
}

}  // namespace harmrec::detail

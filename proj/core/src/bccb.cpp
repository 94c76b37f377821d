#include "harmrec/bccb.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fft2d.hpp"
#include "harmrec/dictionary.hpp"
#include "harmrec/errors.hpp"

namespace harmrec {

namespace {

std::vector<Complex> roots_of_unity(Index n, double sign) {
  std::vector<Complex> w(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    w[static_cast<std::size_t>(k)] = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
  }
  return w;
}

void check_extents(Index l1, Index l2) {
  if (l1 < 1 || l2 < 1) {
    throw InvalidArgument("BCCB extents must be positive, got " + std::to_string(l1) + "x" +
                          std::to_string(l2));
  }
}

Index wrap(Index k, Index n) {
  const Index r = k % n;
  return r < 0 ? r + n : r;
}

}  // namespace

void BccbOperator::Workspace::Free::operator()(Complex* p) const noexcept {
  detail::AlignedBufferDeleter{}(p);
}

BccbOperator::Workspace::Workspace(Index size)
    : buffer_(detail::make_aligned_buffer(static_cast<std::size_t>(size)).release()), size_(size) {}

BccbOperator::Workspace::~Workspace() = default;

BccbOperator::BccbOperator(Index l1, Index l2, ComplexMatrix eigenvalues)
    : l1_(l1), l2_(l2), eigenvalues_(std::move(eigenvalues)) {
  check_extents(l1, l2);
  if (eigenvalues_.rows() != l1 || eigenvalues_.cols() != l2) {
    throw InvalidArgument("eigenvalue matrix must be " + std::to_string(l1) + "x" + std::to_string(l2));
  }
  fft_ = std::make_shared<const detail::Fft2d>(l1, l2);
}

BccbOperator BccbOperator::identity(Index l1, Index l2) {
  check_extents(l1, l2);
  return BccbOperator(l1, l2, ComplexMatrix::Ones(l1, l2));
}

void BccbOperator::apply(const ComplexVector& x, ComplexVector& y, Workspace& ws) const {
  const Index n = size();
  if (x.size() != n) {
    throw InvalidArgument("BCCB product expects a vector of length " + std::to_string(n) + ", got " +
                          std::to_string(x.size()));
  }
  if (ws.size_ != n) {
    throw InvalidArgument("workspace belongs to an operator of a different size");
  }
  Complex* buf = ws.buffer_.get();
  std::copy(x.data(), x.data() + n, buf);
  fft_->forward(buf);
  const Complex* omega = eigenvalues_.data();
  for (Index k = 0; k < n; ++k) buf[k] *= omega[k];
  fft_->backward(buf);
  const double scale = 1.0 / static_cast<double>(n);
  y.resize(n);
  for (Index k = 0; k < n; ++k) y(k) = buf[k] * scale;
}

ComplexVector BccbOperator::apply(const ComplexVector& x) const {
  auto ws = make_workspace();
  ComplexVector y(size());
  apply(x, y, ws);
  return y;
}

FirstColumn gram_first_column(const ArrayGeometry& geometry, Index l1, Index l2) {
  check_extents(l1, l2);
  const auto w1 = roots_of_unity(l1, +1.0);
  const auto w2 = roots_of_unity(l2, +1.0);
  ComplexMatrix r = ComplexMatrix::Zero(l1, l2);
  for (const auto& e : geometry.elements()) {
    for (Index a2 = 0; a2 < l2; ++a2) {
      const Complex p2 = w2[static_cast<std::size_t>((e.m2 * a2) % l2)];
      for (Index a1 = 0; a1 < l1; ++a1) {
        r(a1, a2) += p2 * w1[static_cast<std::size_t>((e.m1 * a1) % l1)];
      }
    }
  }
  return FirstColumn{l1, l2, r.reshaped()};
}

BccbOperator bccb_from_first_column(const FirstColumn& col, Index l1, Index l2) {
  check_extents(l1, l2);
  if (col.r.size() != l1 * l2) {
    throw InvalidArgument("first column has length " + std::to_string(col.r.size()) + ", expected " +
                          std::to_string(l1 * l2));
  }
  detail::Fft2d fft(l1, l2);
  auto buf = detail::make_aligned_buffer(static_cast<std::size_t>(l1 * l2));
  std::copy(col.r.data(), col.r.data() + col.r.size(), buf.get());
  fft.forward(buf.get());
  ComplexMatrix omega(l1, l2);
  std::copy(buf.get(), buf.get() + l1 * l2, omega.data());
  return BccbOperator(l1, l2, std::move(omega));
}

BccbOperator bccb_from_first_column(const FirstColumn& col) {
  return bccb_from_first_column(col, col.l1, col.l2);
}

BccbOperator gram_operator(const ArrayGeometry& geometry, Index l1, Index l2) {
  return bccb_from_first_column(gram_first_column(geometry, l1, l2));
}

ComplexVector bccb_matvec(const BccbOperator& op, const ComplexVector& c) { return op.apply(c); }

BccbOperator bccb_scale_add_identity(const BccbOperator& op, Complex alpha, Complex beta) {
  BccbOperator out = op;
  out.eigenvalues_ = (alpha * op.eigenvalues().array() + beta).matrix();
  return out;
}

BccbOperator bccb_inverse(const BccbOperator& op, double relative_guard) {
  const auto magnitudes = op.eigenvalues().cwiseAbs();
  const double largest = magnitudes.maxCoeff();
  const double smallest = magnitudes.minCoeff();
  if (!(smallest > relative_guard * largest)) {
    throw SingularityError("BCCB operator is singular to working precision: smallest eigenvalue magnitude " +
                               std::to_string(smallest) + " against largest " + std::to_string(largest),
                           smallest);
  }
  BccbOperator out = op;
  out.eigenvalues_ = op.eigenvalues().cwiseInverse();
  return out;
}

FirstColumn first_column(const BccbOperator& op) {
  const Index n = op.size();
  detail::Fft2d fft(op.l1(), op.l2());
  auto buf = detail::make_aligned_buffer(static_cast<std::size_t>(n));
  std::copy(op.eigenvalues().data(), op.eigenvalues().data() + n, buf.get());
  fft.backward(buf.get());
  ComplexVector r(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (Index k = 0; k < n; ++k) r(k) = buf.get()[k] * scale;
  return FirstColumn{op.l1(), op.l2(), std::move(r)};
}

ComplexMatrix bccb_to_dense(const BccbOperator& op, Index cap) {
  const Index n = op.size();
  if (n > cap) {
    throw ResourceError("dense BCCB reconstruction of size " + std::to_string(n) + " exceeds the cap of " +
                            std::to_string(cap),
                        static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * sizeof(Complex),
                        static_cast<std::size_t>(cap) * static_cast<std::size_t>(cap) * sizeof(Complex));
  }
  const auto col = first_column(op);
  const Index l1 = op.l1();
  const Index l2 = op.l2();
  ComplexMatrix dense(n, n);
  for (Index j2 = 0; j2 < l2; ++j2) {
    for (Index j1 = 0; j1 < l1; ++j1) {
      const Index j = j1 + j2 * l1;
      for (Index i2 = 0; i2 < l2; ++i2) {
        for (Index i1 = 0; i1 < l1; ++i1) {
          dense(i1 + i2 * l1, j) = col.r(wrap(i1 - j1, l1) + wrap(i2 - j2, l2) * l1);
        }
      }
    }
  }
  return dense;
}

BccbCheck is_bccb(const ComplexMatrix& dense, Index l1, Index l2, double tol) {
  check_extents(l1, l2);
  const Index n = l1 * l2;
  if (dense.rows() != n || dense.cols() != n) {
    throw InvalidArgument("matrix is " + std::to_string(dense.rows()) + "x" + std::to_string(dense.cols()) +
                          ", expected " + std::to_string(n) + "x" + std::to_string(n));
  }
  double deviation = 0.0;
  for (Index j2 = 0; j2 < l2; ++j2) {
    for (Index j1 = 0; j1 < l1; ++j1) {
      const Index j = j1 + j2 * l1;
      for (Index i2 = 0; i2 < l2; ++i2) {
        for (Index i1 = 0; i1 < l1; ++i1) {
          const Complex rep = dense(wrap(i1 - j1, l1) + wrap(i2 - j2, l2) * l1, 0);
          deviation = std::max(deviation, std::abs(dense(i1 + i2 * l1, j) - rep));
        }
      }
    }
  }
  return BccbCheck{deviation <= tol, deviation};
}

SpectralSummary spectral_summary(const BccbOperator& op) {
  const auto& omega = op.eigenvalues();
  SpectralSummary s;
  s.sum = omega.sum();
  s.min_real = omega.real().minCoeff();
  s.max_real = omega.real().maxCoeff();
  s.max_abs_imag = omega.imag().cwiseAbs().maxCoeff();
  return s;
}

}  // namespace harmrec

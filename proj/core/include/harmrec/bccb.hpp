#pragma once

#include <memory>

#include "harmrec/array_signal.hpp"
#include "harmrec/types.hpp"

namespace harmrec {

namespace detail {
class Fft2d;
}

inline constexpr Index kDenseCheckCap = 4096;

/// First column r of an L x L BCCB matrix with L2 blocks of size L1. The
/// block sequence is r_{l2}(l1) = r(l1 + l2 * L1).
struct FirstColumn {
  Index l1 = 0;
  Index l2 = 0;
  ComplexVector r;
};

/// First column of D_s^H D_s for uniform grids with half-wavelength spacing:
///   r(l1 + l2 L1) = sum over occupied (m1, m2) of exp(+j 2 pi (m1 l1 / L1 + m2 l2 / L2)).
/// Costs O(M L) and never forms the dictionary.
FirstColumn gram_first_column(const ArrayGeometry& geometry, Index l1, Index l2);

/// A BCCB matrix held as its eigenvalues.
///
/// Omega is L1 x L2 and equals the unnormalized forward 2D DFT of the first
/// column reshaped first-dimension-fastest. Products are evaluated as
/// IDFT2(Omega .* DFT2(C)) in O(L log L). Instances are immutable; copies
/// share the transform plans.
class BccbOperator {
 public:
  /// Per-caller scratch space for apply(). One workspace must not be used by
  /// two threads at once; the operator itself may be.
  class Workspace {
   public:
    Workspace(Workspace&&) noexcept = default;
    Workspace& operator=(Workspace&&) noexcept = default;
    ~Workspace();

   private:
    friend class BccbOperator;
    explicit Workspace(Index size);

    struct Free {
      void operator()(Complex* p) const noexcept;
    };
    std::unique_ptr<Complex, Free> buffer_;
    Index size_ = 0;
  };

  BccbOperator(Index l1, Index l2, ComplexMatrix eigenvalues);

  Index l1() const noexcept { return l1_; }
  Index l2() const noexcept { return l2_; }
  Index size() const noexcept { return l1_ * l2_; }
  const ComplexMatrix& eigenvalues() const noexcept { return eigenvalues_; }

  Workspace make_workspace() const { return Workspace(size()); }

  /// y = R x. x and y may alias.
  void apply(const ComplexVector& x, ComplexVector& y, Workspace& ws) const;
  ComplexVector apply(const ComplexVector& x) const;

  static BccbOperator identity(Index l1, Index l2);

 private:
  Index l1_;
  Index l2_;
  ComplexMatrix eigenvalues_;
  std::shared_ptr<const detail::Fft2d> fft_;

  friend BccbOperator bccb_scale_add_identity(const BccbOperator& op, Complex alpha, Complex beta);
  friend BccbOperator bccb_inverse(const BccbOperator& op, double relative_guard);
};

BccbOperator bccb_from_first_column(const FirstColumn& col, Index l1, Index l2);
BccbOperator bccb_from_first_column(const FirstColumn& col);

/// Eigenvalues of the Gram of the subsampled dictionary.
BccbOperator gram_operator(const ArrayGeometry& geometry, Index l1, Index l2);

ComplexVector bccb_matvec(const BccbOperator& op, const ComplexVector& c);

/// alpha * R + beta * I.
BccbOperator bccb_scale_add_identity(const BccbOperator& op, Complex alpha, Complex beta);

/// Entrywise eigenvalue inversion. Throws SingularityError when
/// min |lambda| <= relative_guard * max |lambda|.
BccbOperator bccb_inverse(const BccbOperator& op, double relative_guard = 1e-12);

/// Explicit matrix, for checks on small sizes. Throws ResourceError above cap.
ComplexMatrix bccb_to_dense(const BccbOperator& op, Index cap = kDenseCheckCap);

/// First column recovered by the inverse 2D DFT of the eigenvalues.
FirstColumn first_column(const BccbOperator& op);

struct BccbCheck {
  bool is_bccb = false;
  double max_deviation = 0.0;
};

/// Scans every entry against the representative of its class
/// ((b - b') mod L2, (i - j) mod L1).
BccbCheck is_bccb(const ComplexMatrix& dense, Index l1, Index l2, double tol);

struct SpectralSummary {
  Complex sum{0.0, 0.0};
  double min_real = 0.0;
  double max_real = 0.0;
  double max_abs_imag = 0.0;
};

SpectralSummary spectral_summary(const BccbOperator& op);

}  // namespace harmrec

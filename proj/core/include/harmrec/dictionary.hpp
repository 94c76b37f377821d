#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "harmrec/array_signal.hpp"
#include "harmrec/types.hpp"

namespace harmrec {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{8} << 30;

/// Harmonic grid f_l = -1/2 + l / L for l = 0..L-1.
class UniformGrid {
 public:
  Index length() const noexcept { return static_cast<Index>(frequencies_.size()); }
  double gamma() const noexcept { return 0.5; }
  std::span<const double> frequencies() const noexcept { return frequencies_; }
  double operator[](Index l) const { return frequencies_[static_cast<std::size_t>(l)]; }

 private:
  explicit UniformGrid(std::vector<double> frequencies) : frequencies_(std::move(frequencies)) {}

  std::vector<double> frequencies_;

  friend UniformGrid make_uniform_grid(Index length);
  friend UniformGrid perturbed_grid_for_testing(const UniformGrid& grid, Index index, double delta);
};

UniformGrid make_uniform_grid(Index length);

/// Breaks grid uniformity by shifting one frequency. Exists only so that the
/// structure checks can be shown to fail on a non-uniform grid.
UniformGrid perturbed_grid_for_testing(const UniformGrid& grid, Index index, double delta);

/// D_i(m, l) = exp(-j 2 pi f_l m), m_count x grid.length().
ComplexMatrix build_subdictionary(int m_count, const UniformGrid& grid);

/// Row-subsampled Kronecker dictionary D_s = Psi (D2 kron D1).
///
/// Rows follow the geometry's scan order; column l1 + l2 * L1 holds the
/// steering product for (grid1[l1], grid2[l2]). The explicit matrix is
/// built on first use and shared between copies.
class SubsampledDictionary {
 public:
  SubsampledDictionary(ArrayGeometry geometry, UniformGrid grid1, UniformGrid grid2,
                       std::size_t memory_budget = kDefaultMemoryBudget);

  const ArrayGeometry& geometry() const noexcept;
  const UniformGrid& grid1() const noexcept;
  const UniformGrid& grid2() const noexcept;
  Index rows() const noexcept;
  Index cols() const noexcept;
  std::size_t memory_budget() const noexcept;

  const ComplexMatrix& matrix() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

SubsampledDictionary build_subsampled_dictionary(const ArrayGeometry& geometry, const UniformGrid& grid1,
                                                 const UniformGrid& grid2,
                                                 std::size_t memory_budget = kDefaultMemoryBudget);

ComplexVector apply_forward(const SubsampledDictionary& dict, const ComplexVector& c);
ComplexVector apply_adjoint(const SubsampledDictionary& dict, const ComplexVector& y);

/// Explicit D_s^H D_s for the regular baseline.
struct DenseGram {
  ComplexMatrix entries;

  Index size() const noexcept { return entries.rows(); }
};

DenseGram dense_gram(const SubsampledDictionary& dict);

/// Throws ResourceError when a rows x cols complex matrix exceeds the budget.
void check_dense_budget(Index rows, Index cols, std::size_t budget, const char* what);

}  // namespace harmrec

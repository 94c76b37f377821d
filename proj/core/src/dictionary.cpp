#include "harmrec/dictionary.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "harmrec/errors.hpp"

namespace harmrec {

struct SubsampledDictionary::State {
  State(ArrayGeometry g, UniformGrid f1, UniformGrid f2, std::size_t budget)
      : geometry(std::move(g)), grid1(std::move(f1)), grid2(std::move(f2)), memory_budget(budget) {}

  ArrayGeometry geometry;
  UniformGrid grid1;
  UniformGrid grid2;
  std::size_t memory_budget;
  std::once_flag once;
  ComplexMatrix matrix;
};

UniformGrid make_uniform_grid(Index length) {
  if (length < 1) {
    throw InvalidArgument("grid length must be positive, got " + std::to_string(length));
  }
  std::vector<double> f(static_cast<std::size_t>(length));
  for (Index l = 0; l < length; ++l) {
    f[static_cast<std::size_t>(l)] = -0.5 + static_cast<double>(l) / static_cast<double>(length);
  }
  return UniformGrid(std::move(f));
}

UniformGrid perturbed_grid_for_testing(const UniformGrid& grid, Index index, double delta) {
  if (index < 0 || index >= grid.length()) {
    throw InvalidArgument("grid index out of range");
  }
  std::vector<double> f(grid.frequencies().begin(), grid.frequencies().end());
  f[static_cast<std::size_t>(index)] += delta;
  return UniformGrid(std::move(f));
}

ComplexMatrix build_subdictionary(int m_count, const UniformGrid& grid) {
  if (m_count < 1) {
    throw InvalidArgument("subdictionary needs at least one row");
  }
  ComplexMatrix d(m_count, grid.length());
  for (Index l = 0; l < grid.length(); ++l) {
    d.col(l) = steering_vector(grid[l], m_count);
  }
  return d;
}

void check_dense_budget(Index rows, Index cols, std::size_t budget, const char* what) {
  const auto required = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * sizeof(Complex);
  if (required > budget) {
    throw ResourceError(std::string(what) + " of size " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " exceeds the memory budget",
                        required, budget);
  }
}

SubsampledDictionary::SubsampledDictionary(ArrayGeometry geometry, UniformGrid grid1, UniformGrid grid2,
                                           std::size_t memory_budget)
    : state_(std::make_shared<State>(std::move(geometry), std::move(grid1), std::move(grid2),
                                     memory_budget)) {
  check_dense_budget(rows(), cols(), memory_budget, "dictionary");
}

const ArrayGeometry& SubsampledDictionary::geometry() const noexcept { return state_->geometry; }
const UniformGrid& SubsampledDictionary::grid1() const noexcept { return state_->grid1; }
const UniformGrid& SubsampledDictionary::grid2() const noexcept { return state_->grid2; }
Index SubsampledDictionary::rows() const noexcept { return state_->geometry.element_count(); }
Index SubsampledDictionary::cols() const noexcept { return state_->grid1.length() * state_->grid2.length(); }
std::size_t SubsampledDictionary::memory_budget() const noexcept { return state_->memory_budget; }

const ComplexMatrix& SubsampledDictionary::matrix() const {
  std::call_once(state_->once, [s = state_.get()] {
    const Index l1 = s->grid1.length();
    const Index l2 = s->grid2.length();
    const auto elements = s->geometry.elements();
    ComplexMatrix d(static_cast<Index>(elements.size()), l1 * l2);
    ComplexVector a1;
    ComplexVector a2;
    for (std::size_t row = 0; row < elements.size(); ++row) {
      const auto [m1, m2] = elements[row];
      // Row m of D2 kron D1 factorizes as a2(m2) x a1(m1) over (l2, l1).
      a1.resize(l1);
      a2.resize(l2);
      for (Index l = 0; l < l1; ++l) {
        const double x = m1 * s->grid1[l];
        a1(l) = std::polar(1.0, -2.0 * kPi * (x - std::round(x)));
      }
      for (Index l = 0; l < l2; ++l) {
        const double x = m2 * s->grid2[l];
        a2(l) = std::polar(1.0, -2.0 * kPi * (x - std::round(x)));
      }
      const auto r = static_cast<Index>(row);
      for (Index j2 = 0; j2 < l2; ++j2) {
        for (Index j1 = 0; j1 < l1; ++j1) d(r, j1 + j2 * l1) = a2(j2) * a1(j1);
      }
    }
    s->matrix = std::move(d);
  });
  return state_->matrix;
}

SubsampledDictionary build_subsampled_dictionary(const ArrayGeometry& geometry, const UniformGrid& grid1,
                                                 const UniformGrid& grid2, std::size_t memory_budget) {
  return SubsampledDictionary(geometry, grid1, grid2, memory_budget);
}

ComplexVector apply_forward(const SubsampledDictionary& dict, const ComplexVector& c) {
  if (c.size() != dict.cols()) {
    throw InvalidArgument("forward application expects a vector of length " +
                          std::to_string(dict.cols()) + ", got " + std::to_string(c.size()));
  }
  return dict.matrix() * c;
}

ComplexVector apply_adjoint(const SubsampledDictionary& dict, const ComplexVector& y) {
  if (y.size() != dict.rows()) {
    throw InvalidArgument("adjoint application expects a vector of length " +
                          std::to_string(dict.rows()) + ", got " + std::to_string(y.size()));
  }
  return dict.matrix().adjoint() * y;
}

DenseGram dense_gram(const SubsampledDictionary& dict) {
  check_dense_budget(dict.cols(), dict.cols(), dict.memory_budget(), "dense Gram");
  const auto& d = dict.matrix();
  DenseGram g;
  g.entries.resize(d.cols(), d.cols());
  g.entries.noalias() = d.adjoint() * d;
  return g;
}

}  // namespace harmrec

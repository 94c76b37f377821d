#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "harmrec/types.hpp"

namespace harmrec {

/// Grid coordinates of one array element, in half-wavelength units.
struct ElementPosition {
  int m1 = 0;
  int m2 = 0;

  friend bool operator==(const ElementPosition&, const ElementPosition&) = default;
};

/// Planar array whose elements sit on an m1_count x m2_count half-wavelength
/// grid. Elements are stored in scan order: m2 outer, m1 inner, so the
/// linear grid index is m1 + m2 * m1_count.
class ArrayGeometry {
 public:
  /// Throws InvalidArgument on non-positive extents, an empty element list,
  /// out-of-grid positions or duplicates.
  ArrayGeometry(int m1_count, int m2_count, std::vector<ElementPosition> elements);

  int m1_count() const noexcept { return m1_count_; }
  int m2_count() const noexcept { return m2_count_; }
  Index element_count() const noexcept { return static_cast<Index>(elements_.size()); }
  bool occupied(int m1, int m2) const;
  bool is_full() const noexcept { return element_count() == Index{m1_count_} * m2_count_; }

  /// Occupied elements in scan order.
  std::span<const ElementPosition> elements() const noexcept { return elements_; }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

 private:
  int m1_count_;
  int m2_count_;
  std::vector<bool> occupancy_;
  std::vector<ElementPosition> elements_;
};

struct Target {
  double f1 = 0.0;
  double f2 = 0.0;
  Complex amplitude{1.0, 0.0};
};

struct Harmonics {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct Angles {
  double phi = 0.0;
  double theta = 0.0;
};

struct Snapshot {
  ComplexVector values;
  ArrayGeometry geometry;
  double noise_variance = 0.0;
};

ArrayGeometry make_ura(int m1_count, int m2_count);

/// Draws m elements of a full URA while keeping both apertures: one element is
/// forced onto each of the four outer edges (row 0, row M1-1, column 0,
/// column M2-1), the remainder is drawn uniformly without replacement.
ArrayGeometry subsample_preserving_aperture(const ArrayGeometry& ura, Index m, std::uint64_t seed);

/// exp(-j 2 pi f m) for m = 0..m_count-1.
ComplexVector steering_vector(double f, int m_count);

Harmonics angles_to_harmonics(double phi, double theta);

/// Inverse of angles_to_harmonics. phi is reported as 0 when theta is 0.
Angles harmonics_to_angles(double f1, double f2);

/// Single-snapshot model over the occupied elements with circular complex
/// Gaussian noise of total variance noise_variance.
Snapshot synthesize_snapshot(const ArrayGeometry& geometry, std::span<const Target> targets,
                             double noise_variance, std::uint64_t seed);

/// Noise variance giving the requested SNR, with SNR taken as total source
/// power over per-element noise variance.
double snr_to_noise_variance(std::span<const Target> targets, double snr_db);

bool harmonic_in_range(double f) noexcept;

}  // namespace harmrec

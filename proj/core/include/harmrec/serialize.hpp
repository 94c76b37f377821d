#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "harmrec/array_signal.hpp"
#include "harmrec/bccb.hpp"
#include "harmrec/solvers.hpp"

namespace harmrec {

// Text formats shared by the CLI. Complex values are written as "re im"
// pairs with 17 significant digits so doubles survive a round trip.

/// JSON object {"m1_count", "m2_count", "occupied": [[m1, m2], ...]}.
void write_geometry(std::ostream& out, const ArrayGeometry& geometry);
ArrayGeometry read_geometry(std::istream& in);

/// JSON array of {"f1", "f2", "amplitude": [re, im]}.
void write_targets(std::ostream& out, std::span<const Target> targets);
std::vector<Target> read_targets(std::istream& in);

/// Header lines "noise_variance <v>" and "count <M>", then one pair per
/// element in the geometry's scan order.
void write_snapshot(std::ostream& out, const Snapshot& snapshot);
Snapshot read_snapshot(std::istream& in, const ArrayGeometry& geometry);

/// Header lines "l1 <L1>" and "l2 <L2>", then L1 * L2 pairs in coefficient
/// order l1 + l2 * L1.
void write_estimate(std::ostream& out, const ComplexVector& c, Index l1, Index l2);
ComplexVector read_estimate(std::istream& in, Index& l1, Index& l2);

/// One line per entry: f1 f2 re im magnitude index.
void write_support(std::ostream& out, std::span<const SupportEntry> support);

/// Header lines "l1 <L1>" and "l2 <L2>", then the eigenvalue matrix in
/// row-major order (l1 outer, l2 inner) as pairs.
void write_eigenvalues(std::ostream& out, const BccbOperator& op);
ComplexMatrix read_eigenvalues(std::istream& in);

}  // namespace harmrec

#pragma once

#include <random>
#include <string>
#include <vector>

#include "logsymp/deformations.hpp"
#include "logsymp/error.hpp"
#include "logsymp/locus.hpp"
#include "logsymp/moser.hpp"

namespace logsymp::cli {

/// An Error raised inside one pipeline stage; the message names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOptions {
  int steps = 200;
  GridSpec seeds{129, 64};
  /// tabulation of the normalized form before Moser, shared by the homotopy
  /// primitive (matching resolutions keep its residual below 1e-7)
  GridSpec table{513, 256};
  /// period quadrature tolerance: the normalized form is only C^2 across the
  /// cutoff plateau, where tight tolerances exhaust the quadrature budget
  double class_tol = 1e-8;
  double jacobi_tol = 1e-9;
};

struct PipelineResult {
  std::vector<LocusReport> loci;
  double max_abs_g = 0.0;
  double tangency_defect = 0.0;
  double route_gap = 0.0;
  DeformationParams params;  ///< (epsilon, delta) of the normal form
  double class_gap = 0.0;
  PullbackReport pullback;
  double reverse = 0.0;
  double z_drift = 0.0;
};

/// locus normalization -> invert -> classify -> primitive -> flow -> pullback
/// check for a Poisson bivector w near the catalog structure. Throws
/// StageError.
PipelineResult pipeline(const BMultiVector& w, const LogSymplecticStructure& base, const PipelineOptions& options = {});

/// Input of the round trip: the normal form omega_{epsilon, delta}, plus d(exact),
/// inverted and pushed along the locus shift.
BMultiVector round_trip_input(const LogSymplecticStructure& base, const DeformationParams& params,
                              const BForm& exact_primitive, const ScalarField& locus_shift);

/// A random admissible round trip on s2: (epsilon, delta) in [-0.2, 0.2], an
/// exact term d((1 - z^2)(a cos(th + p) + b sin(2 th)) dth) with |a|, |b| <= 0.03
/// and a locus shift c sin(th) + d cos(th) with |c|, |d| <= 0.015.
struct RoundTripCase {
  DeformationParams params;
  std::string exact;  ///< coefficient of dth (b frame)
  std::string shift;
};

RoundTripCase random_round_trip(std::mt19937& rng);
BMultiVector round_trip_input(const LogSymplecticStructure& base, const RoundTripCase& c);

}  // namespace logsymp::cli

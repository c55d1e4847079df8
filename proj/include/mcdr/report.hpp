#pragma once

#include "mcdr/data_model.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/objectives.hpp"

#include <chrono>
#include <string>
#include <vector>

namespace mcdr {

enum class Certificate { MW_GAP, FW_GAP, SDP_GAP, ORACLE_EXACT };
enum class Status { CONVERGED, UNCONVERGED };

inline const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::MW_GAP: return "MW_GAP";
    case Certificate::FW_GAP: return "FW_GAP";
    case Certificate::SDP_GAP: return "SDP_GAP";
    case Certificate::ORACLE_EXACT: return "ORACLE_EXACT";
  }
  return "?";
}

inline const char* to_string(Status s) { return s == Status::CONVERGED ? "CONVERGED" : "UNCONVERGED"; }

struct SolveReport {
  std::string solver;
  double value = 0.0;  // g at the returned point
  double gap = 0.0;    // dual bound minus value
  int iterations = 0;
  Vector z;
  Vector losses;
  int rank = 0;        // eigenvalues above kTauInt
  int fractional = 0;  // eigenvalues strictly inside (kTauInt, 1 - kTauInt]
  double wall_seconds = 0.0;
  Certificate certificate = Certificate::SDP_GAP;
  Status status = Status::CONVERGED;
  std::vector<double> gap_history;  // one entry per iteration
  Vector weights;                   // final dual weights, when the solver has them

  /// Fill z, losses, value, rank counts from a point.
  void describe(const Objective& obj, const CovarianceSet& cov, const FantopePoint& x) {
    const GroupUtilities u = evaluate(obj, cov, x);
    z = u.z;
    losses = u.losses;
    value = u.value;
    rank = x.rank();
    fractional = x.fractional();
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace mcdr

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "blvos/timesim.hpp"

namespace blvos {

struct ErrorReport {
  double er = 0.0;
  double med = 0.0;
  double mred = 0.0;
  double nmed = 0.0;
  double mean_err = 0.0;
  double var_err = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// Samples with exact product 0, left out of MRED.
  std::uint64_t excluded_zero_exact = 0;
};

struct SamplePlan {
  std::uint64_t count = 10000;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::Paired;

  void check() const;
  /// 10,000 for n <= 8, 1,000,000 above.
  static std::uint64_t default_count(unsigned n);
  /// True when the whole 2^(2n) input space fits in the budget.
  bool exhaustive(unsigned n) const;
  /// Number of samples actually evaluated.
  std::uint64_t effective_count(unsigned n) const;
};

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Operands of sample i. Exhaustive plans walk (a, b) row-major; sampled
/// plans draw uniformly from a hash of (seed, i).
Operands sample_operands(const SamplePlan& plan, unsigned n, std::uint64_t i);

/// The vector the circuit holds before sample i: (0, 0) in RESET mode or for
/// the first sample, otherwise sample i - 1.
Operands previous_operands(const SamplePlan& plan, unsigned n, std::uint64_t i);

std::uint64_t error_distance(std::uint64_t exact, std::uint64_t approx);

struct SampleRecord {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint64_t exact = 0;
  std::uint64_t approx = 0;
};

struct Characterization {
  ErrorReport report;
  /// Toggle energy summed over the trace.
  double energy = 0.0;
  /// Filled only when requested.
  std::vector<SampleRecord> log;
};

/// Folds raw (exact, approx) pairs into a report, in sample order.
ErrorReport summarize(std::span<const SampleRecord> samples, unsigned n, std::uint64_t seed);

Characterization characterize(const TimedNetlist& tn, const SamplePlan& plan, unsigned threads = 1,
                              bool keep_log = false);
Characterization characterize(const MultiplierConfig& config, const SamplePlan& plan,
                              const ElectricalModel& model = {}, unsigned threads = 1, bool keep_log = false);

/// S(i) = (Err(i+1) - Err(i)) / (V(i) - V(i+1)) for each adjacent pair of
/// strictly decreasing voltage levels.
std::vector<double> sensitivity(std::span<const double> levels, std::span<const double> values);

void to_json(nlohmann::json& j, const ErrorReport& r);
std::string csv_header(const ErrorReport&);
std::string csv_row(const ErrorReport& r);
std::string sample_log_csv(std::span<const SampleRecord> log);

}  // namespace blvos

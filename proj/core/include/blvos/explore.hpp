#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "blvos/metrics.hpp"

namespace blvos {

struct Candidate {
  MultiplierSpec spec;
  double v_approx = 0.8;
  bool accurate_mode = false;

  MultiplierConfig config() const { return {spec, v_approx, accurate_mode}; }
};

/// Cartesian product of the axes. BLVOS0 is paired with the nominal voltage
/// only, in accurate mode.
std::vector<Candidate> enumerate_space(unsigned n, std::span<const unsigned> k_set, std::span<const Structure> structures,
                                       std::span<const double> voltages, const VoltageModel& model = {});

struct DesignPoint {
  Candidate candidate;
  ErrorReport metrics;
  double energy = 0.0;
  double baseline_energy = 0.0;
  double energy_rel = 0.0;
  std::size_t shifters = 0;
};

/// Exact reference of a candidate: BLVOS0, same n and k, accurate mode, no
/// truncation or gating.
Candidate baseline_of(const Candidate& c, const VoltageModel& model = {});

DesignPoint evaluate_point(const Candidate& c, const SamplePlan& plan, const ElectricalModel& model = {},
                           unsigned threads = 1);

/// Evaluates every candidate against baselines run on the same trace. Output
/// order follows the input order.
std::vector<DesignPoint> evaluate_space(std::span<const Candidate> candidates, const SamplePlan& plan,
                                        const ElectricalModel& model = {}, unsigned threads = 1);

/// Non-dominated points under (energy_rel, MRED), both minimised, in stable
/// (energy_rel, MRED, structure) order. Duplicates are kept.
std::vector<DesignPoint> pareto_front(std::span<const DesignPoint> points);

enum class Objective : std::uint8_t { MinEnergy, MinMred };
std::string_view to_string(Objective o);
Objective parse_objective(std::string_view s);

struct Constraint {
  std::optional<double> max_mred;
  std::optional<double> max_nmed;
  std::optional<double> max_med;
  std::optional<double> energy_budget_rel;
  Objective objective = Objective::MinEnergy;

  bool admits(const DesignPoint& p) const;
};

/// Objective optimum among the admitted points; nullopt when none qualifies.
std::optional<DesignPoint> select(std::span<const DesignPoint> points, const Constraint& c);

void to_json(nlohmann::json& j, const Candidate& c);
void to_json(nlohmann::json& j, const DesignPoint& p);
void to_json(nlohmann::json& j, const Constraint& c);
std::string sweep_csv(std::span<const DesignPoint> points);

}  // namespace blvos

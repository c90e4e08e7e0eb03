#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "blvos/metrics.hpp"
#include "blvos/timesim.hpp"
#include "blvos/volt.hpp"

namespace blvos {

inline constexpr double kSecondsPerYear = 365.0 * 24.0 * 3600.0;

/// Stress model dVth = A exp(-kappa/theta) t^exp_t E_ox^exp_field f^exp_duty
/// with E_ox = (V - Vth) / t_inv.
struct AgingParams {
  double a_nmos = 1.0;
  double a_pmos = 1.0;
  double kappa = 1500.0;
  double theta = 300.0;
  double t_stress = 10.0 * kSecondsPerYear;
  double duty_f = 0.5;
  double exp_t = 1.0 / 6.0;
  double exp_field = 4.5;
  double exp_duty = 1.0 / 6.0;
  double t_inv = 1.0;

  /// Ten-year shift targets at 0.8 V the prefactors are fitted to.
  double anchor_v = 0.8;
  double anchor_years = 10.0;
  double anchor_nmos = 0.151;
  double anchor_pmos = 0.190;

  void check() const;
};

/// Returns `p` with a_nmos and a_pmos solved from the anchors.
AgingParams calibrate(AgingParams p, const VoltageModel& model);

/// Threshold shift after `seconds` of stress at supply v.
double delta_vth_bti(const AgingParams& p, const VoltageModel& model, double v, Device device, double seconds);
/// Same, at p.t_stress.
double delta_vth_bti(const AgingParams& p, const VoltageModel& model, double v, Device device);
/// Mean of the NMOS and PMOS shifts.
double delta_vth_mean(const AgingParams& p, const VoltageModel& model, double v, double seconds);

struct AgingReport {
  double years = 0.0;
  double delta_vth_approx = 0.0;
  double delta_vth_accurate = 0.0;
  /// Aged over fresh delay scale of each region.
  double factor_approx = 1.0;
  double factor_accurate = 1.0;
  double fresh_critical_path = 0.0;
  double aged_critical_path = 0.0;
  /// aged / fresh - 1.
  double increment = 0.0;
};

/// Delay adjustment for a configuration after `years` of stress.
DelayAdjust aging_adjust(const MultiplierConfig& config, const ElectricalModel& model, const AgingParams& aging,
                         double years);

AgingReport aged_delay_increment(const MultiplierConfig& config, double years, const ElectricalModel& model,
                                 const AgingParams& aging);

struct AgedCharacterization {
  AgingReport aging;
  ErrorReport fresh;
  ErrorReport aged;
  /// aged.mred - fresh.mred
  double mred_delta = 0.0;
};

/// Characterizes with aged delays against the design-time clock.
AgedCharacterization aged_characterize(const MultiplierConfig& config, double years, const SamplePlan& plan,
                                       const ElectricalModel& model, const AgingParams& aging, unsigned threads = 1);

struct PVPlan {
  double sigma_rel = 0.0333;
  std::uint64_t trials = 5000;
  std::uint64_t seed = 0;
  /// Floor on the per-gate delay factor.
  double floor = 0.05;

  void check() const;
};

/// Per-gate delay factors of one trial, max(floor, 1 + N(0, sigma)).
std::vector<double> pv_factors(const PVPlan& pv, std::uint64_t trial, std::size_t gates);

struct MetricStats {
  double nominal = 0.0;
  double mean = 0.0;
  /// Population standard deviation over trials.
  double std = 0.0;
  /// mean / std, absent when std is 0.
  std::optional<double> ratio;
};

struct PVReport {
  PVPlan pv;
  MetricStats med;
  MetricStats mred;
  MetricStats nmed;
  std::vector<ErrorReport> trials;
};

PVReport pv_trials(const MultiplierConfig& config, const PVPlan& pv, const SamplePlan& plan,
                   const ElectricalModel& model, unsigned threads = 1);

void to_json(nlohmann::json& j, const AgingParams& p);
void to_json(nlohmann::json& j, const AgingReport& r);
void to_json(nlohmann::json& j, const MetricStats& s);
void to_json(nlohmann::json& j, const PVPlan& p);

}  // namespace blvos

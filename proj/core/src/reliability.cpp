#include "blvos/reliability.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "blvos/parallel.hpp"

namespace blvos {

namespace {

double stress_term(const AgingParams& p, const VoltageModel& model, double v, Device device, double seconds) {
  const double overdrive = v - vth_at(model, v, device);
  if (overdrive <= 0.0) return 0.0;
  return std::exp(-p.kappa / p.theta) * std::pow(seconds, p.exp_t) * std::pow(overdrive / p.t_inv, p.exp_field) *
         std::pow(p.duty_f, p.exp_duty);
}

double to_seconds(double years) { return years * kSecondsPerYear; }

MetricStats stats(double nominal, const std::vector<double>& xs) {
  MetricStats s;
  s.nominal = nominal;
  // Offsets from the first trial, so identical trials give exactly zero spread.
  const double origin = xs.front();
  const auto count = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x - origin;
  const double shift = sum / count;
  s.mean = origin + shift;
  double ss = 0.0;
  for (double x : xs) ss += (x - origin - shift) * (x - origin - shift);
  s.std = std::sqrt(ss / count);
  if (s.std > 0.0) s.ratio = s.mean / s.std;
  return s;
}

}  // namespace

void AgingParams::check() const {
  if (!(t_stress >= 0.0)) throw InvalidArgument("stress time must be non-negative");
  if (!(theta > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(duty_f > 0.0 && duty_f <= 1.0)) throw InvalidArgument("duty factor must lie in (0, 1]");
  if (!(t_inv > 0.0)) throw InvalidArgument("inversion layer thickness must be positive");
  if (!(exp_t > 0.0)) throw InvalidArgument("time exponent must be positive");
}

AgingParams calibrate(AgingParams p, const VoltageModel& model) {
  p.check();
  const double t = to_seconds(p.anchor_years);
  p.a_nmos = p.anchor_nmos / stress_term(p, model, p.anchor_v, Device::NMOS, t);
  p.a_pmos = p.anchor_pmos / stress_term(p, model, p.anchor_v, Device::PMOS, t);
  return p;
}

double delta_vth_bti(const AgingParams& p, const VoltageModel& model, double v, Device device, double seconds) {
  if (seconds < 0.0) throw InvalidArgument("stress time must be non-negative");
  p.check();
  const double a = device == Device::NMOS ? p.a_nmos : p.a_pmos;
  return a * stress_term(p, model, v, device, seconds);
}

double delta_vth_bti(const AgingParams& p, const VoltageModel& model, double v, Device device) {
  return delta_vth_bti(p, model, v, device, p.t_stress);
}

double delta_vth_mean(const AgingParams& p, const VoltageModel& model, double v, double seconds) {
  return 0.5 * (delta_vth_bti(p, model, v, Device::NMOS, seconds) + delta_vth_bti(p, model, v, Device::PMOS, seconds));
}

DelayAdjust aging_adjust(const MultiplierConfig& config, const ElectricalModel& model, const AgingParams& aging,
                         double years) {
  if (years < 0.0) throw InvalidArgument("years must be non-negative");
  const double seconds = to_seconds(years);
  const double v_nom = model.voltage.v_nominal;
  const double v_approx = config.accurate_mode ? v_nom : config.v_approx;
  DelayAdjust adj;
  adj.delta_vth_accurate = delta_vth_mean(aging, model.voltage, v_nom, seconds);
  adj.delta_vth_approx = delta_vth_mean(aging, model.voltage, v_approx, seconds);
  return adj;
}

AgingReport aged_delay_increment(const MultiplierConfig& config, double years, const ElectricalModel& model,
                                 const AgingParams& aging) {
  const Multiplier fresh(config, model);
  const DelayAdjust adj = aging_adjust(config, model, aging, years);
  const TimedNetlist aged = make_timed(fresh.netlist(), fresh.domains(), model, adj);

  const auto& vm = model.voltage;
  const double v_nom = vm.v_nominal;
  const double v_approx = fresh.domains().v_approx;
  AgingReport r;
  r.years = years;
  r.delta_vth_approx = adj.delta_vth_approx;
  r.delta_vth_accurate = adj.delta_vth_accurate;
  r.factor_approx = delay_scale(vm, v_approx, adj.delta_vth_approx) / delay_scale(vm, v_approx);
  r.factor_accurate = delay_scale(vm, v_nom, adj.delta_vth_accurate) / delay_scale(vm, v_nom);
  r.fresh_critical_path = to_units(critical_path(fresh.timed()));
  r.aged_critical_path = to_units(critical_path(aged));
  r.increment = r.aged_critical_path / r.fresh_critical_path - 1.0;
  return r;
}

AgedCharacterization aged_characterize(const MultiplierConfig& config, double years, const SamplePlan& plan,
                                       const ElectricalModel& model, const AgingParams& aging, unsigned threads) {
  const Multiplier fresh(config, model);
  const TimedNetlist aged =
      make_timed(fresh.netlist(), fresh.domains(), model, aging_adjust(config, model, aging, years));
  AgedCharacterization r;
  r.aging = aged_delay_increment(config, years, model, aging);
  r.fresh = characterize(fresh.timed(), plan, threads).report;
  r.aged = characterize(aged, plan, threads).report;
  r.mred_delta = r.aged.mred - r.fresh.mred;
  return r;
}

void PVPlan::check() const {
  if (!(sigma_rel >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  if (trials == 0) throw InvalidArgument("trial count must be positive");
  if (!(floor > 0.0)) throw InvalidArgument("delay factor floor must be positive");
}

std::vector<double> pv_factors(const PVPlan& pv, std::uint64_t trial, std::size_t gates) {
  std::mt19937_64 rng(mix64(mix64(pv.seed) ^ trial));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> f(gates);
  for (double& x : f) x = std::max(pv.floor, 1.0 + pv.sigma_rel * normal(rng));
  return f;
}

PVReport pv_trials(const MultiplierConfig& config, const PVPlan& pv, const SamplePlan& plan,
                   const ElectricalModel& model, unsigned threads) {
  pv.check();
  plan.check();
  const Multiplier base(config, model);
  const std::size_t gates = base.netlist().gates.size() + base.domains().shifter_nets.size();
  const ErrorReport nominal = characterize(base.timed(), plan, threads).report;

  PVReport r;
  r.pv = pv;
  r.trials.resize(pv.trials);
  parallel_chunks(pv.trials, 1, threads, [&](unsigned, std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      DelayAdjust adj;
      adj.gate_multiplier = pv_factors(pv, t, gates);
      const TimedNetlist tn = make_timed(base.netlist(), base.domains(), model, adj);
      r.trials[t] = characterize(tn, plan, 1).report;
    }
  });

  std::vector<double> med, mred, nmed;
  for (const auto& t : r.trials) {
    med.push_back(t.med);
    mred.push_back(t.mred);
    nmed.push_back(t.nmed);
  }
  r.med = stats(nominal.med, med);
  r.mred = stats(nominal.mred, mred);
  r.nmed = stats(nominal.nmed, nmed);
  return r;
}

void to_json(nlohmann::json& j, const AgingParams& p) {
  j = nlohmann::json{{"a_nmos", p.a_nmos},     {"a_pmos", p.a_pmos},       {"kappa", p.kappa},
                     {"theta", p.theta},       {"t_stress", p.t_stress},   {"duty_f", p.duty_f},
                     {"exp_t", p.exp_t},       {"exp_field", p.exp_field}, {"exp_duty", p.exp_duty},
                     {"t_inv", p.t_inv},       {"anchor_v", p.anchor_v},   {"anchor_years", p.anchor_years},
                     {"anchor_nmos", p.anchor_nmos}, {"anchor_pmos", p.anchor_pmos}};
}

void to_json(nlohmann::json& j, const AgingReport& r) {
  j = nlohmann::json{{"years", r.years},
                     {"delta_vth_approx", r.delta_vth_approx},
                     {"delta_vth_accurate", r.delta_vth_accurate},
                     {"factor_approx", r.factor_approx},
                     {"factor_accurate", r.factor_accurate},
                     {"fresh_critical_path", r.fresh_critical_path},
                     {"aged_critical_path", r.aged_critical_path},
                     {"increment", r.increment}};
}

void to_json(nlohmann::json& j, const MetricStats& s) {
  j = nlohmann::json{{"nominal", s.nominal}, {"mean", s.mean}, {"std", s.std}};
  j["mean_over_std"] = s.ratio ? nlohmann::json(*s.ratio) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const PVPlan& p) {
  j = nlohmann::json{{"sigma_rel", p.sigma_rel}, {"trials", p.trials}, {"seed", p.seed}, {"floor", p.floor}};
}

}  // namespace blvos

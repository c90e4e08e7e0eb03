#include "blvos/volt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace blvos {

namespace {

constexpr double kVoltEps = 1e-9;

bool same_volt(double a, double b) { return std::fabs(a - b) < kVoltEps; }

std::string volts(double v) {
  std::ostringstream os;
  os << v << " V";
  return os.str();
}

}  // namespace

void VoltageModel::check() const {
  if (!(v_nominal > 0.0)) throw InvalidArgument("nominal voltage must be positive");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  for (std::size_t i = 0; i < approx_levels.size(); ++i) {
    if (!(approx_levels[i] < v_nominal)) throw InvalidArgument("approximate levels must lie below nominal");
    if (!(approx_levels[i] > 0.0)) throw InvalidArgument("approximate levels must be positive");
    if (i > 0 && !(approx_levels[i] < approx_levels[i - 1]))
      throw InvalidArgument("approximate levels must be strictly decreasing");
  }
  if (vth_anchors.empty()) throw InvalidArgument("at least one Vth anchor is required");
  for (std::size_t i = 0; i < vth_anchors.size(); ++i) {
    const auto& a = vth_anchors[i];
    if (!(a.vdd - a.vth_nmos > 0.0)) throw InvalidArgument("Vth anchor with V_DD <= Vth_nmos");
    if (i > 0 && !(a.vdd > vth_anchors[i - 1].vdd)) throw InvalidArgument("Vth anchors must be sorted by V_DD");
  }
}

bool VoltageModel::is_level(double v) const {
  return std::any_of(approx_levels.begin(), approx_levels.end(), [&](double l) { return same_volt(l, v); });
}

double vth_at(const VoltageModel& model, double v, Device device) {
  const auto& anchors = model.vth_anchors;
  if (anchors.empty()) throw InvalidArgument("no Vth anchors configured");
  auto pick = [&](const VthAnchor& a) { return device == Device::NMOS ? a.vth_nmos : std::fabs(a.vth_pmos); };
  if (v < anchors.front().vdd - kVoltEps || v > anchors.back().vdd + kVoltEps)
    throw InvalidArgument("voltage " + volts(v) + " outside the Vth anchor range");
  if (anchors.size() == 1) return pick(anchors.front());
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const auto& lo = anchors[i - 1];
    const auto& hi = anchors[i];
    if (v <= hi.vdd + kVoltEps || i + 1 == anchors.size()) {
      const double t = std::clamp((v - lo.vdd) / (hi.vdd - lo.vdd), 0.0, 1.0);
      return pick(lo) + t * (pick(hi) - pick(lo));
    }
  }
  return pick(anchors.back());
}

double vth_effective(const VoltageModel& model, double v) {
  return 0.5 * (vth_at(model, v, Device::NMOS) + vth_at(model, v, Device::PMOS));
}

double delay_scale(const VoltageModel& model, double v, double delta_vth) {
  const double overdrive = v - vth_effective(model, v) - delta_vth;
  if (overdrive <= model.margin_floor)
    throw ThresholdMarginError("overscaling below threshold margin at " + volts(v));
  const double vn = model.v_nominal;
  const double ref = vn / std::pow(vn - vth_effective(model, vn), model.alpha);
  return (v / std::pow(overdrive, model.alpha)) / ref;
}

double shifter_delay(const ShifterTable& table, double v_from) {
  for (const auto& [level, delay] : table.delay_by_level)
    if (same_volt(level, v_from)) return delay;
  throw InvalidArgument("no level-shifter delay for " + volts(v_from));
}

void EnergyModel::check() const {
  for (double c : cap_per_kind)
    if (!(c > 0.0)) throw InvalidArgument("gate capacitances must be positive");
  if (!(shifter_energy_per_event >= 0.0)) throw InvalidArgument("shifter energy must be non-negative");
}

double toggle_energy(const EnergyModel& model, GateKind kind, double v) {
  const auto idx = static_cast<std::size_t>(kind);
  if (idx >= kGateKindCount) throw InvalidArgument("unknown gate kind");
  if (v < 0.0) throw InvalidArgument("negative supply voltage");
  return model.cap_per_kind[idx] * v * v;
}

DomainAssignment assign_domains(const VoltageModel& model, const Netlist& net, Structure s, double v_approx,
                                bool accurate_mode) {
  if (!model.is_level(v_approx) && !same_volt(v_approx, model.v_nominal))
    throw InvalidArgument("unknown approximate voltage level " + volts(v_approx));

  DomainAssignment d;
  d.structure = s;
  d.accurate_mode = accurate_mode || same_volt(v_approx, model.v_nominal);
  d.v_accurate = model.v_nominal;
  d.v_approx = d.accurate_mode ? model.v_nominal : v_approx;
  d.gate_voltage.assign(net.gates.size(), model.v_nominal);
  if (!d.accurate_mode) {
    for (GateId g : region_gate_sets(net, s).approx) d.gate_voltage[g] = d.v_approx;
    d.shifter_nets = crossing_nets(net, s);
  }
  return d;
}

}  // namespace blvos

#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blvos/circuit.hpp"

namespace blvos {

enum class Device : std::uint8_t { NMOS, PMOS };

/// Fresh threshold voltages at one supply level. PMOS may be given signed
/// (negative); its magnitude is what the delay model uses.
struct VthAnchor {
  double vdd = 0.0;
  double vth_nmos = 0.0;
  double vth_pmos = 0.0;
};

struct VoltageModel {
  double v_nominal = 0.8;
  std::vector<double> approx_levels{0.75, 0.65, 0.55, 0.45, 0.4};
  std::vector<VthAnchor> vth_anchors{{0.4, 0.205, -0.181}, {0.8, 0.175, -0.190}};
  double alpha = 1.3;
  /// Minimum overdrive (V - Vth) accepted by delay_scale.
  double margin_floor = 0.05;

  void check() const;
  bool is_level(double v) const;
};

/// Overdrive fell to or below the configured floor.
class ThresholdMarginError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear interpolation between anchors; PMOS returned as a magnitude.
double vth_at(const VoltageModel& model, double v, Device device);

/// Mean of NMOS and PMOS threshold magnitudes at v.
double vth_effective(const VoltageModel& model, double v);

/// Alpha-power-law delay at v with an extra threshold shift, normalised so the
/// fresh delay at v_nominal is 1.
double delay_scale(const VoltageModel& model, double v, double delta_vth = 0.0);

/// Level-shifter delay by source voltage, in unit-delay scale.
struct ShifterTable {
  std::vector<std::pair<double, double>> delay_by_level{
      {0.75, 0.5}, {0.65, 0.5}, {0.55, 0.5}, {0.45, 2.0}, {0.4, 4.0}};
};

double shifter_delay(const ShifterTable& table, double v_from);

struct EnergyModel {
  /// Effective switched capacitance per gate kind (AND2 NAND2 NOR2 OR2 XOR2 INV BUF LS).
  std::array<double, kGateKindCount> cap_per_kind{1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0};
  /// One BUF-equivalent transition at 0.8 V.
  double shifter_energy_per_event = 0.64;

  void check() const;
};

/// E = C * V^2 for one output transition.
double toggle_energy(const EnergyModel& model, GateKind kind, double v);

/// The electrical tables every timing and energy computation draws on.
struct ElectricalModel {
  DelayTable delays;
  VoltageModel voltage;
  ShifterTable shifters;
  EnergyModel energy;
};

struct DomainAssignment {
  Structure structure = Structure::BLVOS0;
  bool accurate_mode = true;
  double v_approx = 0.8;
  double v_accurate = 0.8;
  std::vector<double> gate_voltage;
  std::vector<NetId> shifter_nets;

  double region_voltage(Region r) const { return r == Region::Approx ? v_approx : v_accurate; }
};

/// Places approximate-region gates at v_approx and the rest at v_nominal.
/// accurate_mode (or v_approx equal to v_nominal) switches every region to
/// nominal, in which case no net needs a level shifter.
DomainAssignment assign_domains(const VoltageModel& model, const Netlist& net, Structure s, double v_approx,
                                bool accurate_mode);

}  // namespace blvos

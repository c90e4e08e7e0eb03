#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "blvos/circuit.hpp"
#include "blvos/volt.hpp"

namespace blvos {

/// Simulation time in integer ticks. Gate delays are quantised as
/// (nominal delay in 1/1000 units) x (delay factor in 1/10000 steps) so that
/// every gate of one region scales by exactly the same integer factor.
using Ticks = std::int64_t;
inline constexpr Ticks kDelayQuantum = 1000;
inline constexpr Ticks kFactorQuantum = 10000;
inline constexpr Ticks kTicksPerUnit = kDelayQuantum * kFactorQuantum;

inline double to_units(Ticks t) { return static_cast<double>(t) / static_cast<double>(kTicksPerUnit); }
Ticks quantize_delay(double nominal_units);
Ticks quantize_factor(double factor);

enum class SimMode : std::uint8_t { Reset, Paired };
std::string_view to_string(SimMode m);

struct MultiplierConfig {
  MultiplierSpec spec;
  double v_approx = 0.8;
  bool accurate_mode = false;
};

/// Extra delay perturbations applied on top of the voltage scaling.
struct DelayAdjust {
  /// Threshold shifts per region (aging).
  double delta_vth_approx = 0.0;
  double delta_vth_accurate = 0.0;
  /// Per-gate multipliers indexed like TimedNetlist::net.gates (process
  /// variation). Empty means 1 everywhere.
  std::vector<double> gate_multiplier;
};

struct TimedNetlist {
  /// The multiplier netlist with LEVEL_SHIFTER gates inserted on crossing nets,
  /// gates in topological order.
  Netlist net;
  std::vector<Ticks> gate_delay;
  std::vector<double> gate_voltage;
  /// Energy charged per output transition of each gate.
  std::vector<double> gate_energy;
  /// Sampling clock: nominal-voltage critical path of the unshifted netlist.
  Ticks t_clk = 0;
};

/// Longest input-to-output path over the given per-gate delays.
Ticks critical_path(const Netlist& net, std::span<const Ticks> delays);
Ticks critical_path(const TimedNetlist& tn);

/// Nominal delays of a netlist, quantised.
std::vector<Ticks> nominal_delays(const Netlist& net);

/// Inserts level shifters, applies voltage scaling (and any adjustment) and
/// fixes the clock at the netlist's own nominal critical path.
TimedNetlist make_timed(const Netlist& base, const DomainAssignment& domains, const ElectricalModel& model,
                        const DelayAdjust& adjust = {});

/// Timed netlist over explicit per-gate delays (unit scale) for hand-built
/// circuits.
TimedNetlist make_timed(const Netlist& net, std::span<const double> delays_units, double t_clk_units);

struct SimOutcome {
  std::uint64_t sampled = 0;
  std::uint64_t settled = 0;
  /// Bit i set when output i last switched after t_clk.
  std::uint64_t violating_bits = 0;
  /// Latest transition over all outputs; -1 when no output switched.
  Ticks last_output_transition = -1;
  double energy = 0.0;
  /// Output transitions per gate, glitches included. Filled only on request.
  std::vector<std::uint32_t> toggles;
};

struct Operands {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  friend bool operator==(const Operands&, const Operands&) = default;
};

/// Two-vector transport-delay simulator. Transitions are propagated gate by
/// gate in topological order: each gate merges its input transition lists in
/// time order and emits an output transition whenever its value changes,
/// delayed by the gate delay. Holds scratch state, so use one instance per
/// thread; the timed netlist must outlive it.
class Simulator {
 public:
  explicit Simulator(const TimedNetlist& tn);

  /// Settles on `prev`, switches the primary inputs to `cur` at t = 0 and
  /// samples the outputs at t_clk: a bit whose last transition is after t_clk
  /// keeps its pre-switch value.
  SimOutcome run(Operands prev, Operands cur, bool record_toggles = false);

  const TimedNetlist& timed() const { return *tn_; }

 private:
  struct Op {
    GateKind kind;
    bool unary;
    NetId in0, in1, out;
    Ticks delay;
    double energy;
  };

  const TimedNetlist* tn_;
  unsigned n_;
  std::vector<Op> ops_;
  std::vector<std::int32_t> driver_;

  std::vector<std::uint8_t> initial_;
  std::vector<std::uint32_t> begin_;
  std::vector<std::uint32_t> end_;
  std::vector<Ticks> times_;
};

SimOutcome simulate_pair(const TimedNetlist& tn, Operands prev, Operands cur);

/// Builds the netlist, assigns domains and times it in one step.
class Multiplier {
 public:
  Multiplier(const MultiplierConfig& config, const ElectricalModel& model, const DelayAdjust& adjust = {});

  const MultiplierConfig& config() const { return config_; }
  const Netlist& netlist() const { return base_; }
  const DomainAssignment& domains() const { return domains_; }
  const TimedNetlist& timed() const { return timed_; }

 private:
  MultiplierConfig config_;
  Netlist base_;
  DomainAssignment domains_;
  TimedNetlist timed_;
};

/// Outputs and energies for every (a, b) simulated from the reset state
/// (0, 0); index = a * 2^n + b.
struct ResetTable {
  unsigned n = 0;
  std::vector<std::uint32_t> product;
  std::vector<double> energy;

  std::uint32_t at(std::uint32_t a, std::uint32_t b) const { return product[(std::size_t{a} << n) | b]; }
  double energy_at(std::uint32_t a, std::uint32_t b) const { return energy[(std::size_t{a} << n) | b]; }
};

inline constexpr unsigned kMaxTableWidth = 12;

/// Throws InvalidArgument when n exceeds kMaxTableWidth.
ResetTable tabulate_reset(const TimedNetlist& tn, unsigned threads = 1);

/// Streaming evaluator: each call's previous vector is the last call's operands,
/// starting from (0, 0).
class PairedStream {
 public:
  explicit PairedStream(const TimedNetlist& tn) : sim_(tn) {}
  SimOutcome operator()(std::uint32_t a, std::uint32_t b);
  void reset() { prev_ = {}; }

 private:
  Simulator sim_;
  Operands prev_;
};

/// One-shot multiplication through the timing model. A single PAIRED call
/// starts from the reset state, so both modes agree here.
std::uint64_t multiply_approx(const MultiplierConfig& config, std::uint32_t a, std::uint32_t b, SimMode mode,
                              const ElectricalModel& model = {});

/// Flat little-endian uint32 table plus a JSON sidecar (<path>.json) holding
/// `config_json` and its hash.
void save_reset_table(const ResetTable& table, const std::filesystem::path& path, const std::string& config_json);

struct LoadedTable {
  ResetTable table;
  std::string config_hash;
};

/// Reads a table written by save_reset_table. When expected_hash is non-empty
/// it must match the sidecar.
LoadedTable load_reset_table(const std::filesystem::path& path, const std::string& expected_hash = {});

/// FNV-1a 64 of a canonical configuration string, as 16 hex digits.
std::string config_hash(const std::string& canonical);

}  // namespace blvos

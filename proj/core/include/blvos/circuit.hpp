#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blvos {

/// Raised when a multiplier description or argument violates its contract.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using NetId = std::uint32_t;
using GateId = std::uint32_t;

/// Net 0 of every netlist is tied to logic 0.
inline constexpr NetId kTieLow = 0;

inline constexpr unsigned kMaxWidth = 16;

enum class GateKind : std::uint8_t { And2, Nand2, Nor2, Or2, Xor2, Inv, Buf, LevelShifter };
inline constexpr std::size_t kGateKindCount = 8;

enum class BlockTag : std::uint8_t { LL, HL, LH, HH, Adder1, Adder2, Adder3, HaFinal, Glue };
inline constexpr std::size_t kBlockTagCount = 9;

enum class Structure : std::uint8_t { BLVOS0, BLVOS1, BLVOS2, BLVOS3, BLVOS4 };

enum class Region : std::uint8_t { Approx, Accurate };

std::string_view to_string(GateKind kind);
std::string_view to_string(BlockTag tag);
std::string_view to_string(Structure s);
std::optional<GateKind> parse_gate_kind(std::string_view text);
std::optional<BlockTag> parse_block_tag(std::string_view text);
/// Accepts "blvos3", "BLVOS3", "BL-VOS3" or a bare digit.
std::optional<Structure> parse_structure(std::string_view text);

constexpr unsigned arity(GateKind kind) {
  switch (kind) {
    case GateKind::Inv:
    case GateKind::Buf:
    case GateKind::LevelShifter:
      return 1;
    default:
      return 2;
  }
}

struct Gate {
  GateId id = 0;
  GateKind kind = GateKind::Buf;
  std::vector<NetId> inputs;
  NetId output = 0;
  BlockTag block = BlockTag::Glue;
  double nominal_delay = 1.0;
};

/// Combinational gate graph. Primary inputs are A[0..n) followed by B[0..n);
/// primary outputs are product bits 0..2n-1, LSB first.
struct Netlist {
  unsigned n = 0;
  unsigned k = 0;
  std::size_t net_count = 1;
  std::vector<Gate> gates;
  std::vector<NetId> primary_inputs;
  std::vector<NetId> primary_outputs;
};

/// Nominal delay per gate kind in unit-delay scale (one nominal inverter = 1.0).
/// The level-shifter entry is unused here; shifter delay depends on the
/// source voltage and lives in the voltage model.
struct DelayTable {
  std::array<double, kGateKindCount> by_kind{1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.5};

  double operator[](GateKind kind) const { return by_kind[static_cast<std::size_t>(kind)]; }
  double& operator[](GateKind kind) { return by_kind[static_cast<std::size_t>(kind)]; }
};

struct MultiplierSpec {
  unsigned n = 8;
  unsigned k = 4;
  Structure structure = Structure::BLVOS0;
  unsigned truncation = 0;
  /// Power-gated sub-blocks; only LL, HL and LH may be gated.
  std::vector<BlockTag> gated_blocks;

  bool is_gated(BlockTag tag) const;
  /// Throws InvalidArgument when 0 < k < n, truncation < 2n or the gating set
  /// rules are broken.
  void check() const;
};

struct OperandParts {
  std::uint32_t high = 0;
  std::uint32_t low = 0;
  friend bool operator==(const OperandParts&, const OperandParts&) = default;
};

OperandParts decompose_operand(std::uint32_t x, unsigned n, unsigned k);

/// Builds the four-block multiplier: A_L*B_L, A_H*B_L, A_L*B_H and A_H*B_H as
/// carry-save AND arrays, merged by two n-bit ripple adders, a half adder on
/// their carries and a 2(n-k)-bit ripple adder. Gated blocks and truncated
/// product columns are folded to constant zero and swept from the graph.
Netlist build_multiplier(const MultiplierSpec& spec, const DelayTable& delays = {});

struct Diagnostic {
  enum class Kind { Width, Arity, Delay, UnknownNet, MultipleDrivers, Undriven, Cycle, OutputCount, BlockTag };
  Kind kind;
  std::optional<GateId> gate;
  std::optional<NetId> net;
  std::string message;
};

/// Empty on success; otherwise every problem found, the first offender first.
std::vector<Diagnostic> validate(const Netlist& net);

/// Topological gate order; throws InvalidArgument on a cycle.
std::vector<GateId> topological_order(const Netlist& net);

/// Block tags whose supply is overscaled in each structure.
std::vector<BlockTag> approx_blocks(Structure s);
bool is_approx_block(Structure s, BlockTag tag);

/// Region in which primary outputs are sampled: the domain of the final adder.
Region output_region(Structure s);

struct RegionSets {
  std::vector<GateId> approx;
  std::vector<GateId> accurate;
};

RegionSets region_gate_sets(const Netlist& net, Structure s);

/// Nets driven from the approximate region that feed an accurate-region gate
/// or an accurately sampled primary output. Sorted ascending.
std::vector<NetId> crossing_nets(const Netlist& net, Structure s);

/// Closed-form number of level shifters for a structure (2k, 2k+n, 2k+n+1).
unsigned level_shifter_count(Structure s, unsigned n, unsigned k);

/// Zero-delay evaluation; the netlist must be acyclic.
class CombinationalEvaluator {
 public:
  explicit CombinationalEvaluator(const Netlist& net);
  std::uint64_t operator()(std::uint32_t a, std::uint32_t b) const;

 private:
  struct Op {
    GateKind kind;
    NetId in0, in1, out;
  };
  unsigned n_;
  std::size_t net_count_;
  std::vector<Op> ops_;
  std::vector<NetId> inputs_;
  std::vector<NetId> outputs_;
};

bool eval_gate(GateKind kind, bool a, bool b);

/// Text dump, one gate per line: "<id> <KIND> <BLOCK> <in>[,<in>] <out>".
void write_netlist(std::ostream& os, const Netlist& net);

}  // namespace blvos

#include "blvos/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace blvos {

namespace {

constexpr std::array<std::string_view, kGateKindCount> kKindNames{
    "AND2", "NAND2", "NOR2", "OR2", "XOR2", "INV", "BUF", "LEVEL_SHIFTER"};
constexpr std::array<std::string_view, kBlockTagCount> kTagNames{
    "LL", "HL", "LH", "HH", "ADDER1", "ADDER2", "ADDER3", "HA_FINAL", "GLUE"};

std::string upper(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

// Structural builder with constant folding on the tie-low net. Only logic 0
// ever appears as a constant because the multiplier uses no inversion.
class Builder {
 public:
  explicit Builder(const DelayTable& delays) : delays_(delays) {}

  NetId input() { return next_net_++; }

  NetId and2(NetId a, NetId b, BlockTag tag) {
    if (a == kTieLow || b == kTieLow) return kTieLow;
    return emit(GateKind::And2, a, b, tag);
  }
  NetId or2(NetId a, NetId b, BlockTag tag) {
    if (a == kTieLow) return b;
    if (b == kTieLow) return a;
    return emit(GateKind::Or2, a, b, tag);
  }
  NetId xor2(NetId a, NetId b, BlockTag tag) {
    if (a == kTieLow) return b;
    if (b == kTieLow) return a;
    return emit(GateKind::Xor2, a, b, tag);
  }

  std::pair<NetId, NetId> half_adder(NetId a, NetId b, BlockTag tag) {
    return {xor2(a, b, tag), and2(a, b, tag)};
  }

  std::pair<NetId, NetId> full_adder(NetId a, NetId b, NetId c, BlockTag tag) {
    if (a == kTieLow) return half_adder(b, c, tag);
    if (b == kTieLow) return half_adder(a, c, tag);
    if (c == kTieLow) return half_adder(a, b, tag);
    const NetId ab = xor2(a, b, tag);
    const NetId sum = xor2(ab, c, tag);
    const NetId carry = or2(and2(a, b, tag), and2(c, ab, tag), tag);
    return {sum, carry};
  }

  NetId sum3(NetId a, NetId b, NetId c, BlockTag tag) { return xor2(xor2(a, b, tag), c, tag); }

  std::vector<Gate>& gates() { return gates_; }
  NetId net_count() const { return next_net_; }

 private:
  NetId emit(GateKind kind, NetId a, NetId b, BlockTag tag) {
    Gate g;
    g.id = static_cast<GateId>(gates_.size());
    g.kind = kind;
    g.inputs = {a, b};
    g.output = next_net_++;
    g.block = tag;
    g.nominal_delay = delays_[kind];
    gates_.push_back(std::move(g));
    return gates_.back().output;
  }

  const DelayTable& delays_;
  std::vector<Gate> gates_;
  NetId next_net_ = 1;
};

// Unsigned carry-save array multiplier. `weight` is the column of bit 0 of the
// block product in the full product; partial products below `truncation` are
// dropped.
std::vector<NetId> array_multiply(Builder& b, const std::vector<NetId>& x, const std::vector<NetId>& y,
                                  unsigned weight, unsigned truncation, BlockTag tag) {
  const std::size_t m = x.size();
  const std::size_t p = y.size();
  auto pp = [&](std::size_t i, std::size_t j) -> NetId {
    if (weight + i + j < truncation) return kTieLow;
    return b.and2(x[i], y[j], tag);
  };

  std::vector<NetId> sum(m + p, kTieLow);
  std::vector<NetId> carry(m + p + 1, kTieLow);
  for (std::size_t i = 0; i < m; ++i) sum[i] = pp(i, 0);
  for (std::size_t j = 1; j < p; ++j) {
    std::vector<NetId> next(m + p + 1, kTieLow);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t w = i + j;
      auto [s, c] = b.full_adder(pp(i, j), sum[w], carry[w], tag);
      sum[w] = s;
      next[w + 1] = c;
    }
    carry = std::move(next);
  }

  // Vector-merging ripple over the columns still holding a carry. The top
  // column cannot carry out: the product fits in m + p bits.
  NetId cin = kTieLow;
  for (std::size_t w = p; w < m + p; ++w) {
    if (w + 1 == m + p) {
      sum[w] = b.sum3(sum[w], carry[w], cin, tag);
    } else {
      auto [s, c] = b.full_adder(sum[w], carry[w], cin, tag);
      sum[w] = s;
      cin = c;
    }
  }
  return sum;
}

struct RippleResult {
  std::vector<NetId> sum;
  NetId carry = kTieLow;
};

RippleResult ripple_add(Builder& b, const std::vector<NetId>& x, const std::vector<NetId>& y,
                        std::size_t width, BlockTag tag, bool carry_out) {
  RippleResult r;
  r.sum.resize(width, kTieLow);
  NetId cin = kTieLow;
  for (std::size_t i = 0; i < width; ++i) {
    const NetId xi = i < x.size() ? x[i] : kTieLow;
    const NetId yi = i < y.size() ? y[i] : kTieLow;
    if (i + 1 == width && !carry_out) {
      r.sum[i] = b.sum3(xi, yi, cin, tag);
    } else {
      auto [s, c] = b.full_adder(xi, yi, cin, tag);
      r.sum[i] = s;
      cin = c;
    }
  }
  r.carry = carry_out ? cin : kTieLow;
  return r;
}

// Drops gates that no primary output depends on and renumbers nets densely:
// tie-low, primary inputs, then gate outputs in gate order.
Netlist compact(std::vector<Gate> gates, std::size_t net_count, std::vector<NetId> inputs,
                std::vector<NetId> outputs, unsigned n, unsigned k) {
  std::vector<bool> needed(net_count, false);
  for (NetId o : outputs) needed[o] = true;
  std::vector<bool> keep(gates.size(), false);
  for (std::size_t gi = gates.size(); gi-- > 0;) {
    if (!needed[gates[gi].output]) continue;
    keep[gi] = true;
    for (NetId in : gates[gi].inputs) needed[in] = true;
  }

  std::vector<NetId> remap(net_count, kTieLow);
  NetId next = 1;
  for (NetId in : inputs) remap[in] = next++;

  Netlist out;
  out.n = n;
  out.k = k;
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    if (!keep[gi]) continue;
    Gate g = std::move(gates[gi]);
    for (NetId& in : g.inputs) in = remap[in];
    remap[g.output] = next;
    g.output = next++;
    g.id = static_cast<GateId>(out.gates.size());
    out.gates.push_back(std::move(g));
  }
  out.net_count = next;
  for (NetId in : inputs) out.primary_inputs.push_back(remap[in]);
  for (NetId o : outputs) out.primary_outputs.push_back(remap[o]);
  return out;
}

Diagnostic make_diag(Diagnostic::Kind kind, std::optional<GateId> gate, std::optional<NetId> net,
                     std::string message) {
  return Diagnostic{kind, gate, net, std::move(message)};
}

}  // namespace

std::string_view to_string(GateKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }
std::string_view to_string(BlockTag tag) { return kTagNames.at(static_cast<std::size_t>(tag)); }

std::string_view to_string(Structure s) {
  static constexpr std::array<std::string_view, 5> names{"BLVOS0", "BLVOS1", "BLVOS2", "BLVOS3", "BLVOS4"};
  return names.at(static_cast<std::size_t>(s));
}

std::optional<GateKind> parse_gate_kind(std::string_view text) {
  const std::string u = upper(text);
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (u == kKindNames[i]) return static_cast<GateKind>(i);
  return std::nullopt;
}

std::optional<BlockTag> parse_block_tag(std::string_view text) {
  const std::string u = upper(text);
  for (std::size_t i = 0; i < kTagNames.size(); ++i)
    if (u == kTagNames[i]) return static_cast<BlockTag>(i);
  return std::nullopt;
}

std::optional<Structure> parse_structure(std::string_view text) {
  std::string u = upper(text);
  u.erase(std::remove(u.begin(), u.end(), '-'), u.end());
  if (u.rfind("BLVOS", 0) == 0) u = u.substr(5);
  if (u.size() != 1 || u[0] < '0' || u[0] > '4') return std::nullopt;
  return static_cast<Structure>(u[0] - '0');
}

bool MultiplierSpec::is_gated(BlockTag tag) const {
  return std::find(gated_blocks.begin(), gated_blocks.end(), tag) != gated_blocks.end();
}

void MultiplierSpec::check() const {
  if (n < 2 || n > kMaxWidth)
    throw InvalidArgument("operand width n must be in [2, " + std::to_string(kMaxWidth) + "], got " +
                          std::to_string(n));
  if (k == 0 || k >= n)
    throw InvalidArgument("0 < k < n violated: n=" + std::to_string(n) + " k=" + std::to_string(k));
  if (truncation >= 2 * n)
    throw InvalidArgument("truncation must be < 2n, got " + std::to_string(truncation));
  if (static_cast<unsigned>(structure) > 4) throw InvalidArgument("unknown structure");
  for (BlockTag t : gated_blocks) {
    if (t != BlockTag::LL && t != BlockTag::HL && t != BlockTag::LH)
      throw InvalidArgument("only LL, HL and LH may be power gated, got " + std::string(to_string(t)));
  }
}

OperandParts decompose_operand(std::uint32_t x, unsigned n, unsigned k) {
  if (n == 0 || n > kMaxWidth || k == 0 || k >= n)
    throw InvalidArgument("decompose_operand requires 0 < k < n <= 16");
  if (x >> n) throw InvalidArgument("operand does not fit in n bits");
  return {x >> k, x & ((1u << k) - 1u)};
}

Netlist build_multiplier(const MultiplierSpec& spec, const DelayTable& delays) {
  spec.check();
  for (std::size_t i = 0; i < kGateKindCount; ++i)
    if (!(delays.by_kind[i] > 0.0) || !std::isfinite(delays.by_kind[i]))
      throw InvalidArgument("gate delays must be positive");

  const unsigned n = spec.n;
  const unsigned k = spec.k;
  const unsigned t = spec.truncation;
  Builder b(delays);

  std::vector<NetId> a(n), bb(n);
  for (auto& x : a) x = b.input();
  for (auto& x : bb) x = b.input();
  const std::vector<NetId> a_lo(a.begin(), a.begin() + k), a_hi(a.begin() + k, a.end());
  const std::vector<NetId> b_lo(bb.begin(), bb.begin() + k), b_hi(bb.begin() + k, bb.end());

  auto block = [&](const std::vector<NetId>& x, const std::vector<NetId>& y, unsigned weight, BlockTag tag) {
    if (spec.is_gated(tag)) return std::vector<NetId>(x.size() + y.size(), kTieLow);
    return array_multiply(b, x, y, weight, t, tag);
  };
  const auto ll = block(a_lo, b_lo, 0, BlockTag::LL);
  const auto hl = block(a_hi, b_lo, k, BlockTag::HL);
  const auto lh = block(a_lo, b_hi, k, BlockTag::LH);
  const auto hh = block(a_hi, b_hi, 2 * k, BlockTag::HH);

  const auto s = ripple_add(b, hl, lh, n, BlockTag::Adder1, true);
  const std::vector<NetId> ll_hi(ll.begin() + k, ll.end());
  const auto tsum = ripple_add(b, s.sum, ll_hi, n, BlockTag::Adder2, true);
  const auto [ha_sum, ha_carry] = b.half_adder(s.carry, tsum.carry, BlockTag::HaFinal);

  const std::size_t upper_width = 2 * (n - k);
  std::vector<NetId> addend(tsum.sum.begin() + k, tsum.sum.end());
  addend.push_back(ha_sum);
  addend.push_back(ha_carry);
  addend.resize(std::min(addend.size(), upper_width));
  const auto top = ripple_add(b, hh, addend, upper_width, BlockTag::Adder3, false);

  std::vector<NetId> outputs;
  outputs.reserve(2 * n);
  outputs.insert(outputs.end(), ll.begin(), ll.begin() + k);
  outputs.insert(outputs.end(), tsum.sum.begin(), tsum.sum.begin() + k);
  outputs.insert(outputs.end(), top.sum.begin(), top.sum.end());

  std::vector<NetId> inputs(a);
  inputs.insert(inputs.end(), bb.begin(), bb.end());
  const std::size_t nets = b.net_count();
  return compact(std::move(b.gates()), nets, std::move(inputs), std::move(outputs), n, k);
}

std::vector<GateId> topological_order(const Netlist& net) {
  const std::size_t g = net.gates.size();
  std::vector<std::int64_t> driver(net.net_count, -1);
  for (std::size_t i = 0; i < g; ++i)
    if (net.gates[i].output < net.net_count) driver[net.gates[i].output] = static_cast<std::int64_t>(i);

  std::vector<unsigned> pending(g, 0);
  std::vector<std::vector<GateId>> fanout(g);
  for (std::size_t i = 0; i < g; ++i) {
    for (NetId in : net.gates[i].inputs) {
      if (in >= net.net_count || driver[in] < 0) continue;
      ++pending[i];
      fanout[static_cast<std::size_t>(driver[in])].push_back(static_cast<GateId>(i));
    }
  }
  std::vector<GateId> order;
  order.reserve(g);
  for (std::size_t i = 0; i < g; ++i)
    if (pending[i] == 0) order.push_back(static_cast<GateId>(i));
  for (std::size_t head = 0; head < order.size(); ++head)
    for (GateId f : fanout[order[head]])
      if (--pending[f] == 0) order.push_back(f);
  if (order.size() != g) throw InvalidArgument("netlist contains a combinational cycle");
  return order;
}

std::vector<Diagnostic> validate(const Netlist& net) {
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> diags;

  if (net.n < 2 || net.n > kMaxWidth || net.k == 0 || net.k >= net.n)
    diags.push_back(make_diag(K::Width, {}, {},
                              "0 < k < n <= 16 violated: n=" + std::to_string(net.n) + " k=" + std::to_string(net.k)));
  if (net.primary_outputs.size() != 2 * static_cast<std::size_t>(net.n))
    diags.push_back(make_diag(K::OutputCount, {}, {},
                              "expected " + std::to_string(2 * net.n) + " primary outputs, found " +
                                  std::to_string(net.primary_outputs.size())));
  if (net.primary_inputs.size() != 2 * static_cast<std::size_t>(net.n))
    diags.push_back(make_diag(K::Width, {}, {},
                              "expected " + std::to_string(2 * net.n) + " primary inputs, found " +
                                  std::to_string(net.primary_inputs.size())));

  std::vector<int> drivers(net.net_count, 0);
  if (net.net_count > 0) drivers[kTieLow] = 1;
  for (NetId in : net.primary_inputs) {
    if (in >= net.net_count) {
      diags.push_back(make_diag(K::UnknownNet, {}, in, "primary input refers to unknown net " + std::to_string(in)));
      continue;
    }
    if (++drivers[in] == 2)
      diags.push_back(make_diag(K::MultipleDrivers, {}, in, "net " + std::to_string(in) + " has multiple drivers"));
  }

  bool structural_ok = true;
  for (std::size_t i = 0; i < net.gates.size(); ++i) {
    const Gate& g = net.gates[i];
    const auto gid = static_cast<GateId>(i);
    const std::string who = "gate " + std::to_string(i);
    if (static_cast<std::size_t>(g.kind) >= kGateKindCount) {
      diags.push_back(make_diag(K::Arity, gid, {}, who + " has an unknown kind"));
      structural_ok = false;
      continue;
    }
    if (g.id != gid) diags.push_back(make_diag(K::Arity, gid, {}, who + " carries mismatched id " + std::to_string(g.id)));
    if (g.inputs.size() != arity(g.kind)) {
      diags.push_back(make_diag(K::Arity, gid, {},
                                who + " (" + std::string(to_string(g.kind)) + ") has arity " +
                                    std::to_string(g.inputs.size()) + ", expected " + std::to_string(arity(g.kind))));
      structural_ok = false;
    }
    if (static_cast<std::size_t>(g.block) >= kBlockTagCount)
      diags.push_back(make_diag(K::BlockTag, gid, {}, who + " has an unknown block tag"));
    if (!(g.nominal_delay > 0.0) || !std::isfinite(g.nominal_delay))
      diags.push_back(make_diag(K::Delay, gid, {}, who + " has non-positive delay"));
    for (NetId in : g.inputs) {
      if (in >= net.net_count) {
        diags.push_back(make_diag(K::UnknownNet, gid, in, who + " reads unknown net " + std::to_string(in)));
        structural_ok = false;
      }
    }
    if (g.output >= net.net_count) {
      diags.push_back(make_diag(K::UnknownNet, gid, g.output, who + " drives unknown net " + std::to_string(g.output)));
      structural_ok = false;
      continue;
    }
    if (++drivers[g.output] == 2)
      diags.push_back(make_diag(K::MultipleDrivers, gid, g.output,
                                "net " + std::to_string(g.output) + " has multiple drivers (second: " + who + ")"));
  }

  for (std::size_t i = 0; i < net.gates.size(); ++i)
    for (NetId in : net.gates[i].inputs)
      if (in < net.net_count && drivers[in] == 0)
        diags.push_back(make_diag(K::Undriven, static_cast<GateId>(i), in,
                                  "gate " + std::to_string(i) + " reads undriven net " + std::to_string(in)));
  for (NetId o : net.primary_outputs) {
    if (o >= net.net_count)
      diags.push_back(make_diag(K::UnknownNet, {}, o, "primary output refers to unknown net " + std::to_string(o)));
    else if (drivers[o] == 0)
      diags.push_back(make_diag(K::Undriven, {}, o, "primary output net " + std::to_string(o) + " is undriven"));
  }

  if (structural_ok) {
    try {
      (void)topological_order(net);
    } catch (const InvalidArgument&) {
      // Report the lowest-indexed gate that never became ready.
      std::vector<bool> done(net.gates.size(), false);
      std::vector<bool> ready(net.net_count, true);
      for (const Gate& g : net.gates) ready[g.output] = false;
      bool progress = true;
      while (progress) {
        progress = false;
        for (std::size_t i = 0; i < net.gates.size(); ++i) {
          if (done[i]) continue;
          const Gate& g = net.gates[i];
          if (std::all_of(g.inputs.begin(), g.inputs.end(), [&](NetId in) { return ready[in]; })) {
            done[i] = true;
            ready[g.output] = true;
            progress = true;
          }
        }
      }
      const auto first = static_cast<GateId>(std::find(done.begin(), done.end(), false) - done.begin());
      diags.push_back(make_diag(K::Cycle, first, {}, "gate " + std::to_string(first) + " lies on a combinational cycle"));
    }
  }
  return diags;
}

std::vector<BlockTag> approx_blocks(Structure s) {
  using B = BlockTag;
  switch (s) {
    case Structure::BLVOS0:
      return {};
    case Structure::BLVOS1:
      return {B::LL};
    case Structure::BLVOS2:
      return {B::LL, B::HL};
    case Structure::BLVOS3:
      return {B::LL, B::HL, B::LH, B::Adder1};
    case Structure::BLVOS4:
      return {B::LL, B::HL, B::LH, B::HH, B::Adder1, B::Adder2, B::Adder3, B::HaFinal};
  }
  throw InvalidArgument("unknown structure");
}

bool is_approx_block(Structure s, BlockTag tag) {
  const auto blocks = approx_blocks(s);
  return std::find(blocks.begin(), blocks.end(), tag) != blocks.end();
}

Region output_region(Structure s) {
  return is_approx_block(s, BlockTag::Adder3) ? Region::Approx : Region::Accurate;
}

RegionSets region_gate_sets(const Netlist& net, Structure s) {
  std::array<bool, kBlockTagCount> approx{};
  for (BlockTag t : approx_blocks(s)) approx[static_cast<std::size_t>(t)] = true;
  RegionSets sets;
  for (const Gate& g : net.gates)
    (approx[static_cast<std::size_t>(g.block)] ? sets.approx : sets.accurate).push_back(g.id);
  return sets;
}

std::vector<NetId> crossing_nets(const Netlist& net, Structure s) {
  std::array<bool, kBlockTagCount> approx{};
  for (BlockTag t : approx_blocks(s)) approx[static_cast<std::size_t>(t)] = true;
  std::vector<bool> from_approx(net.net_count, false);
  for (const Gate& g : net.gates)
    if (approx[static_cast<std::size_t>(g.block)]) from_approx[g.output] = true;

  std::vector<bool> crossing(net.net_count, false);
  for (const Gate& g : net.gates) {
    if (approx[static_cast<std::size_t>(g.block)]) continue;
    for (NetId in : g.inputs)
      if (from_approx[in]) crossing[in] = true;
  }
  if (output_region(s) == Region::Accurate)
    for (NetId o : net.primary_outputs)
      if (from_approx[o]) crossing[o] = true;

  std::vector<NetId> out;
  for (NetId i = 0; i < net.net_count; ++i)
    if (crossing[i]) out.push_back(i);
  return out;
}

unsigned level_shifter_count(Structure s, unsigned n, unsigned k) {
  if (k == 0 || k >= n) throw InvalidArgument("0 < k < n violated");
  switch (s) {
    case Structure::BLVOS1:
      return 2 * k;
    case Structure::BLVOS2:
      return 2 * k + n;
    case Structure::BLVOS3:
      return 2 * k + n + 1;
    case Structure::BLVOS0:
    case Structure::BLVOS4:
      return 0;
  }
  throw InvalidArgument("unknown structure");
}

bool eval_gate(GateKind kind, bool a, bool b) {
  switch (kind) {
    case GateKind::And2:
      return a && b;
    case GateKind::Nand2:
      return !(a && b);
    case GateKind::Nor2:
      return !(a || b);
    case GateKind::Or2:
      return a || b;
    case GateKind::Xor2:
      return a != b;
    case GateKind::Inv:
      return !a;
    case GateKind::Buf:
    case GateKind::LevelShifter:
      return a;
  }
  return false;
}

CombinationalEvaluator::CombinationalEvaluator(const Netlist& net)
    : n_(net.n), net_count_(net.net_count), inputs_(net.primary_inputs), outputs_(net.primary_outputs) {
  for (GateId id : topological_order(net)) {
    const Gate& g = net.gates[id];
    ops_.push_back({g.kind, g.inputs[0], g.inputs.size() > 1 ? g.inputs[1] : g.inputs[0], g.output});
  }
}

std::uint64_t CombinationalEvaluator::operator()(std::uint32_t a, std::uint32_t b) const {
  std::vector<std::uint8_t> v(net_count_, 0);
  for (unsigned i = 0; i < n_; ++i) {
    v[inputs_[i]] = (a >> i) & 1u;
    v[inputs_[n_ + i]] = (b >> i) & 1u;
  }
  for (const Op& op : ops_) v[op.out] = eval_gate(op.kind, v[op.in0] != 0, v[op.in1] != 0);
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < outputs_.size(); ++i)
    if (v[outputs_[i]]) out |= std::uint64_t{1} << i;
  return out;
}

void write_netlist(std::ostream& os, const Netlist& net) {
  os << "# blvos netlist n=" << net.n << " k=" << net.k << " nets=" << net.net_count
     << " gates=" << net.gates.size() << "\n";
  os << "inputs";
  for (NetId in : net.primary_inputs) os << ' ' << in;
  os << "\noutputs";
  for (NetId o : net.primary_outputs) os << ' ' << o;
  os << '\n';
  for (const Gate& g : net.gates) {
    os << g.id << ' ' << to_string(g.kind) << ' ' << to_string(g.block) << ' ';
    for (std::size_t i = 0; i < g.inputs.size(); ++i) os << (i ? "," : "") << g.inputs[i];
    os << ' ' << g.output << '\n';
  }
}

}  // namespace blvos

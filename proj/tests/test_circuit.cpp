#include <algorithm>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "blvos/circuit.hpp"

using namespace blvos;

namespace {

MultiplierSpec spec_of(unsigned n, unsigned k, Structure s = Structure::BLVOS0) {
  MultiplierSpec sp;
  sp.n = n;
  sp.k = k;
  sp.structure = s;
  return sp;
}

// Column-wise partial product sum, columns below t dropped.
std::uint64_t truncated_product(std::uint32_t a, std::uint32_t b, unsigned n, unsigned t) {
  std::uint64_t sum = 0;
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j)
      if (i + j >= t && ((a >> i) & 1) && ((b >> j) & 1)) sum += std::uint64_t{1} << (i + j);
  return sum;
}

bool subset(std::vector<GateId> a, std::vector<GateId> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

const Structure kAll[] = {Structure::BLVOS0, Structure::BLVOS1, Structure::BLVOS2, Structure::BLVOS3,
                          Structure::BLVOS4};

}  // namespace

TEST(Decompose, Examples) {
  EXPECT_EQ(decompose_operand(0xAB, 8, 4), (OperandParts{0xA, 0xB}));
  EXPECT_EQ(decompose_operand(0, 16, 12), (OperandParts{0, 0}));
  EXPECT_EQ(decompose_operand(255, 8, 2), (OperandParts{63, 3}));
}

TEST(Decompose, RoundTrips) {
  for (unsigned n = 2; n <= 10; ++n)
    for (unsigned k = 1; k < n; ++k)
      for (std::uint32_t x = 0; x < (1u << n); ++x) {
        const auto p = decompose_operand(x, n, k);
        ASSERT_EQ((p.high << k) + p.low, x);
        ASSERT_LT(p.low, 1u << k);
      }
}

TEST(Decompose, RejectsBadK) {
  EXPECT_THROW(decompose_operand(3, 8, 0), InvalidArgument);
  EXPECT_THROW(decompose_operand(3, 8, 8), InvalidArgument);
}

TEST(Spec, CheckMessages) {
  MultiplierSpec s = spec_of(8, 8);
  try {
    s.check();
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("0 < k < n"), std::string::npos);
  }
  s = spec_of(8, 4);
  s.truncation = 16;
  EXPECT_THROW(s.check(), InvalidArgument);
  s.truncation = 0;
  s.gated_blocks = {BlockTag::HH};
  EXPECT_THROW(s.check(), InvalidArgument);
}

TEST(Build, ExampleProducts) {
  const CombinationalEvaluator exact(build_multiplier(spec_of(8, 4)));
  EXPECT_EQ(exact(171, 205), 35055u);
  MultiplierSpec g = spec_of(8, 4);
  g.gated_blocks = {BlockTag::LL};
  EXPECT_EQ(CombinationalEvaluator(build_multiplier(g))(171, 205), 34912u);
}

TEST(Build, TwoBitTable) {
  const CombinationalEvaluator eval(build_multiplier(spec_of(2, 1)));
  for (std::uint32_t a = 0; a < 4; ++a)
    for (std::uint32_t b = 0; b < 4; ++b) EXPECT_EQ(eval(a, b), a * b);
}

TEST(Build, ExhaustiveExactForAllSplits) {
  for (unsigned n = 2; n <= 8; ++n)
    for (unsigned k = 1; k < n; ++k) {
      const Netlist net = build_multiplier(spec_of(n, k));
      ASSERT_TRUE(validate(net).empty());
      const CombinationalEvaluator eval(net);
      const std::uint32_t lim = 1u << n;
      for (std::uint32_t a = 0; a < lim; ++a)
        for (std::uint32_t b = 0; b < lim; ++b) ASSERT_EQ(eval(a, b), std::uint64_t{a} * b) << n << ' ' << k;
    }
}

TEST(Build, StructureDoesNotChangeLogic) {
  for (Structure s : kAll) {
    const CombinationalEvaluator eval(build_multiplier(spec_of(6, 2, s)));
    for (std::uint32_t a = 0; a < 64; ++a)
      for (std::uint32_t b = 0; b < 64; ++b) ASSERT_EQ(eval(a, b), std::uint64_t{a} * b);
  }
}

TEST(Build, GatedBlockIdentities) {
  for (unsigned n : {4u, 8u})
    for (unsigned k = 1; k < n; ++k)
      for (BlockTag tag : {BlockTag::LL, BlockTag::HL, BlockTag::LH}) {
        MultiplierSpec s = spec_of(n, k);
        s.gated_blocks = {tag};
        const CombinationalEvaluator eval(build_multiplier(s));
        const std::uint32_t lim = 1u << n;
        for (std::uint32_t a = 0; a < lim; ++a)
          for (std::uint32_t b = 0; b < lim; ++b) {
            const auto pa = decompose_operand(a, n, k), pb = decompose_operand(b, n, k);
            std::uint64_t removed = 0;
            if (tag == BlockTag::LL) removed = std::uint64_t{pa.low} * pb.low;
            if (tag == BlockTag::HL) removed = (std::uint64_t{pa.high} * pb.low) << k;
            if (tag == BlockTag::LH) removed = (std::uint64_t{pa.low} * pb.high) << k;
            ASSERT_EQ(eval(a, b), std::uint64_t{a} * b - removed);
          }
      }
}

TEST(Build, AllLowerBlocksGated) {
  MultiplierSpec s = spec_of(8, 4);
  s.gated_blocks = {BlockTag::LL, BlockTag::HL, BlockTag::LH};
  const CombinationalEvaluator eval(build_multiplier(s));
  for (std::uint32_t a = 0; a < 256; a += 7)
    for (std::uint32_t b = 0; b < 256; b += 3) {
      const auto pa = decompose_operand(a, 8, 4), pb = decompose_operand(b, 8, 4);
      ASSERT_EQ(eval(a, b), (std::uint64_t{pa.high} * pb.high) << 8);
    }
}

TEST(Build, TruncationDropsLowColumns) {
  for (unsigned t : {1u, 4u, 7u}) {
    MultiplierSpec s = spec_of(6, 3);
    s.truncation = t;
    const Netlist net = build_multiplier(s);
    ASSERT_TRUE(validate(net).empty());
    const CombinationalEvaluator eval(net);
    for (std::uint32_t a = 0; a < 64; ++a)
      for (std::uint32_t b = 0; b < 64; ++b) ASSERT_EQ(eval(a, b), truncated_product(a, b, 6, t)) << t;
  }
}

TEST(Build, TruncationShrinksNetlist) {
  MultiplierSpec s = spec_of(8, 4);
  const auto full = build_multiplier(s).gates.size();
  s.truncation = 4;
  EXPECT_LT(build_multiplier(s).gates.size(), full);
}

TEST(Validate, WellFormedBlvos3) { EXPECT_TRUE(validate(build_multiplier(spec_of(8, 4, Structure::BLVOS3))).empty()); }

TEST(Validate, TwoDriverNet) {
  Netlist net = build_multiplier(spec_of(2, 1));
  const NetId victim = net.gates[1].output;
  net.gates[2].output = victim;
  const auto d = validate(net);
  ASSERT_FALSE(d.empty());
  const auto it = std::find_if(d.begin(), d.end(), [](const Diagnostic& x) {
    return x.kind == Diagnostic::Kind::MultipleDrivers;
  });
  ASSERT_NE(it, d.end());
  ASSERT_TRUE(it->net.has_value());
  EXPECT_EQ(*it->net, victim);
  EXPECT_NE(it->message.find(std::to_string(victim)), std::string::npos);
}

TEST(Validate, ArityFault) {
  Netlist net = build_multiplier(spec_of(2, 1));
  auto g = std::find_if(net.gates.begin(), net.gates.end(), [](const Gate& x) { return x.kind == GateKind::And2; });
  g->inputs.pop_back();
  const auto d = validate(net);
  ASSERT_FALSE(d.empty());
  EXPECT_TRUE(std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.kind == Diagnostic::Kind::Arity; }));
}

TEST(Validate, CycleIsReported) {
  Netlist net = build_multiplier(spec_of(2, 1));
  // Feed gate 0 from the output of the last gate downstream of it.
  net.gates[0].inputs[0] = net.gates.back().output;
  net.gates.back().inputs[0] = net.gates[0].output;
  const auto d = validate(net);
  EXPECT_TRUE(std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.kind == Diagnostic::Kind::Cycle; }));
  EXPECT_THROW(topological_order(net), InvalidArgument);
}

TEST(Regions, Extremes) {
  for (unsigned n : {2u, 8u, 16u}) {
    const Netlist net = build_multiplier(spec_of(n, n / 2));
    EXPECT_TRUE(region_gate_sets(net, Structure::BLVOS0).approx.empty());
    EXPECT_EQ(region_gate_sets(net, Structure::BLVOS4).approx.size(), net.gates.size());
    EXPECT_TRUE(region_gate_sets(net, Structure::BLVOS4).accurate.empty());
  }
}

TEST(Regions, Nested) {
  for (unsigned n = 2; n <= 10; ++n)
    for (unsigned k = 1; k < n; ++k) {
      const Netlist net = build_multiplier(spec_of(n, k));
      for (int i = 0; i < 4; ++i) {
        const auto lo = region_gate_sets(net, kAll[i]).approx;
        const auto hi = region_gate_sets(net, kAll[i + 1]).approx;
        ASSERT_TRUE(subset(lo, hi)) << n << ' ' << k << ' ' << i;
        if (i > 0) ASSERT_LT(lo.size(), hi.size());
      }
    }
}

TEST(Regions, PartitionAllGates) {
  const Netlist net = build_multiplier(spec_of(8, 3));
  for (Structure s : kAll) {
    const auto r = region_gate_sets(net, s);
    EXPECT_EQ(r.approx.size() + r.accurate.size(), net.gates.size());
    for (GateId g : r.approx) EXPECT_TRUE(is_approx_block(s, net.gates[g].block));
  }
}

TEST(Regions, OutputDomain) {
  EXPECT_EQ(output_region(Structure::BLVOS3), Region::Accurate);
  EXPECT_EQ(output_region(Structure::BLVOS4), Region::Approx);
}

TEST(LevelShifters, FormulaExamples) {
  EXPECT_EQ(level_shifter_count(Structure::BLVOS1, 8, 2), 4u);
  EXPECT_EQ(level_shifter_count(Structure::BLVOS2, 8, 2), 12u);
  EXPECT_EQ(level_shifter_count(Structure::BLVOS3, 8, 2), 13u);
  EXPECT_EQ(level_shifter_count(Structure::BLVOS4, 16, 8), 0u);
  EXPECT_EQ(level_shifter_count(Structure::BLVOS0, 8, 4), 0u);
}

TEST(LevelShifters, CrossingNetsMatchFormula) {
  for (unsigned n : {4u, 6u, 8u, 12u, 16u})
    for (unsigned k = 2; k + 2 <= n; ++k) {
      const Netlist net = build_multiplier(spec_of(n, k));
      for (Structure s : kAll) {
        const auto nets = crossing_nets(net, s);
        ASSERT_EQ(nets.size(), level_shifter_count(s, n, k)) << n << ' ' << k << ' ' << to_string(s);
        ASSERT_TRUE(std::is_sorted(nets.begin(), nets.end()));
      }
    }
}

TEST(LevelShifters, CrossingNetsCrossTheBoundary) {
  const Netlist net = build_multiplier(spec_of(8, 4));
  for (Structure s : {Structure::BLVOS1, Structure::BLVOS2, Structure::BLVOS3}) {
    std::vector<int> region(net.net_count, -1);
    for (const Gate& g : net.gates) region[g.output] = is_approx_block(s, g.block) ? 1 : 0;
    for (NetId x : crossing_nets(net, s)) {
      EXPECT_EQ(region[x], 1);
      const bool feeds_accurate = std::any_of(net.gates.begin(), net.gates.end(), [&](const Gate& g) {
        return !is_approx_block(s, g.block) && std::find(g.inputs.begin(), g.inputs.end(), x) != g.inputs.end();
      });
      const bool sampled = std::find(net.primary_outputs.begin(), net.primary_outputs.end(), x) !=
                           net.primary_outputs.end();
      EXPECT_TRUE(feeds_accurate || sampled);
    }
  }
}

TEST(Names, RoundTrip) {
  for (Structure s : kAll) EXPECT_EQ(parse_structure(to_string(s)), s);
  EXPECT_EQ(parse_structure("blvos2"), Structure::BLVOS2);
  EXPECT_FALSE(parse_structure("blvos5").has_value());
  EXPECT_EQ(parse_block_tag("LL"), BlockTag::LL);
  EXPECT_EQ(parse_gate_kind("XOR2"), GateKind::Xor2);
}

TEST(Netlist, GoldenDump) {
  std::ifstream f(BLVOS_TEST_DATA "/golden/netlist_n2_k1.txt");
  ASSERT_TRUE(f.good());
  std::stringstream expected;
  expected << f.rdbuf();
  std::ostringstream os;
  write_netlist(os, build_multiplier(spec_of(2, 1)));
  EXPECT_EQ(os.str(), expected.str());
}

TEST(Netlist, DumpIsDeterministic) {
  std::ostringstream a, b;
  write_netlist(a, build_multiplier(spec_of(8, 4, Structure::BLVOS2)));
  write_netlist(b, build_multiplier(spec_of(8, 4, Structure::BLVOS2)));
  EXPECT_EQ(a.str(), b.str());
}

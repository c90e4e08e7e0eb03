#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "blvos/metrics.hpp"
#include "support/oracle.hpp"

using namespace blvos;

namespace {

MultiplierConfig gated_ll(unsigned n, unsigned k) {
  MultiplierConfig c;
  c.spec.n = n;
  c.spec.k = k;
  c.spec.gated_blocks = {BlockTag::LL};
  c.accurate_mode = true;
  return c;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs_of(const std::vector<SampleRecord>& log) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const auto& s : log) out.emplace_back(s.exact, s.approx);
  return out;
}

}  // namespace

TEST(ErrorDistance, Examples) {
  EXPECT_EQ(error_distance(35055, 34912), 143u);
  EXPECT_EQ(error_distance(77, 77), 0u);
  EXPECT_EQ(error_distance(0, 9), 9u);
}

TEST(Characterize, TwoBitGatedLL) {
  SamplePlan plan;
  plan.count = 16;
  const auto c = characterize(gated_ll(2, 1), plan);
  EXPECT_EQ(c.report.samples, 16u);
  EXPECT_NEAR(c.report.er, 0.25, 1e-12);
  EXPECT_NEAR(c.report.med, 0.25, 1e-12);
  EXPECT_NEAR(c.report.nmed, 0.25 / 9, 1e-12);
  EXPECT_NEAR(c.report.mred, (1 + 1.0 / 3 + 1.0 / 3 + 1.0 / 9) / 9, 1e-12);
  EXPECT_EQ(c.report.excluded_zero_exact, 7u);
}

TEST(Characterize, MatchesBruteForceExhaustive) {
  for (unsigned k = 1; k < 4; ++k)
    for (SimMode mode : {SimMode::Reset, SimMode::Paired}) {
      SamplePlan plan;
      plan.count = 256;
      plan.mode = mode;
      const auto c = characterize(gated_ll(4, k), plan, ElectricalModel{}, 1, true);
      ASSERT_EQ(c.log.size(), 256u);
      std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
      for (const auto& s : c.log) seen.emplace(s.a, s.b);
      EXPECT_EQ(seen.size(), 256u);
      const auto m = oracle::brute_metrics(pairs_of(c.log), 4);
      EXPECT_EQ(c.report.er, m.er);
      EXPECT_EQ(c.report.med, m.med);
      EXPECT_EQ(c.report.nmed, m.nmed);
      EXPECT_EQ(c.report.mred, m.mred);
      EXPECT_EQ(c.report.excluded_zero_exact, m.excluded);
    }
}

TEST(Characterize, OverscaledMatchesBruteForce) {
  MultiplierConfig c;
  c.spec.n = 8;
  c.spec.structure = Structure::BLVOS4;
  c.v_approx = 0.4;
  SamplePlan plan;
  plan.count = 3000;
  plan.seed = 17;
  const auto ch = characterize(c, plan, ElectricalModel{}, 2, true);
  const auto m = oracle::brute_metrics(pairs_of(ch.log), 8);
  EXPECT_EQ(ch.report.er, m.er);
  EXPECT_EQ(ch.report.med, m.med);
  EXPECT_EQ(ch.report.mred, m.mred);
  EXPECT_GT(ch.report.er, 0.0);
  for (const auto& s : ch.log) ASSERT_EQ(s.exact, std::uint64_t{s.a} * s.b);
}

TEST(Characterize, ExactCircuitHasNoError) {
  MultiplierConfig c;
  c.accurate_mode = true;
  for (SimMode mode : {SimMode::Reset, SimMode::Paired}) {
    SamplePlan plan;
    plan.count = 5000;
    plan.mode = mode;
    plan.seed = 99;
    const auto r = characterize(c, plan).report;
    EXPECT_EQ(r.er, 0.0);
    EXPECT_EQ(r.med, 0.0);
    EXPECT_EQ(r.mred, 0.0);
    EXPECT_EQ(r.nmed, 0.0);
    EXPECT_EQ(r.var_err, 0.0);
  }
}

TEST(Characterize, Blvos4WorseThanBlvos1AtLowestLevel) {
  SamplePlan plan;
  plan.count = 10000;
  plan.seed = 1;
  MultiplierConfig c;
  c.v_approx = 0.4;
  c.spec.structure = Structure::BLVOS4;
  const double m4 = characterize(c, plan).report.mred;
  c.spec.structure = Structure::BLVOS1;
  const double m1 = characterize(c, plan).report.mred;
  EXPECT_GT(m4, m1);
}

TEST(Characterize, ThreadCountInvariant) {
  MultiplierConfig c;
  c.spec.structure = Structure::BLVOS3;
  c.v_approx = 0.45;
  SamplePlan plan;
  plan.count = 4000;
  plan.seed = 8;
  const auto a = characterize(c, plan, ElectricalModel{}, 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const auto b = characterize(c, plan, ElectricalModel{}, t);
    EXPECT_EQ(nlohmann::json(a.report).dump(), nlohmann::json(b.report).dump());
    EXPECT_EQ(a.energy, b.energy);
  }
}

TEST(Characterize, NmedAndVarianceIdentities) {
  MultiplierConfig c;
  c.spec.structure = Structure::BLVOS2;
  c.v_approx = 0.4;
  SamplePlan plan;
  plan.count = 3000;
  const auto ch = characterize(c, plan, ElectricalModel{}, 1, true);
  EXPECT_DOUBLE_EQ(ch.report.nmed, ch.report.med / (255.0 * 255.0));
  EXPECT_GE(ch.report.var_err, 0.0);
  double sum = 0, sq = 0;
  for (const auto& s : ch.log) {
    const double d = static_cast<double>(s.approx) - static_cast<double>(s.exact);
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(ch.log.size());
  EXPECT_NEAR(ch.report.mean_err, sum / n, 1e-9);
  EXPECT_LE(ch.report.mean_err * ch.report.mean_err, sq / n);
  EXPECT_NEAR(ch.report.var_err, sq / n - (sum / n) * (sum / n), 1e-6 * (1 + ch.report.var_err));
}

TEST(Sampling, ExhaustiveWhenBudgetCoversSpace) {
  SamplePlan plan;
  plan.count = 100000;
  EXPECT_TRUE(plan.exhaustive(8));
  EXPECT_EQ(plan.effective_count(8), 65536u);
  EXPECT_FALSE(plan.exhaustive(9));
  EXPECT_EQ(sample_operands(plan, 8, 0), (Operands{0, 0}));
  EXPECT_EQ(sample_operands(plan, 8, 257), (Operands{1, 1}));
}

TEST(Sampling, SeededDrawsAreReproducibleAndInRange) {
  SamplePlan p;
  p.seed = 42;
  SamplePlan q = p;
  q.seed = 43;
  int same = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto x = sample_operands(p, 8, i);
    EXPECT_EQ(x, sample_operands(p, 8, i));
    EXPECT_LT(x.a, 256u);
    EXPECT_LT(x.b, 256u);
    same += x == sample_operands(q, 8, i);
  }
  EXPECT_LT(same, 10);
}

TEST(Sampling, PreviousOperands) {
  SamplePlan p;
  p.seed = 5;
  EXPECT_EQ(previous_operands(p, 8, 0), (Operands{}));
  EXPECT_EQ(previous_operands(p, 8, 7), sample_operands(p, 8, 6));
  p.mode = SimMode::Reset;
  EXPECT_EQ(previous_operands(p, 8, 7), (Operands{}));
}

TEST(Sampling, DefaultCounts) {
  EXPECT_EQ(SamplePlan::default_count(8), 10000u);
  EXPECT_EQ(SamplePlan::default_count(16), 1000000u);
  SamplePlan p;
  p.count = 0;
  EXPECT_THROW(p.check(), InvalidArgument);
}

TEST(Summarize, RejectsEmpty) { EXPECT_THROW(summarize({}, 8, 0), InvalidArgument); }

TEST(Sensitivity, Examples) {
  const double lv[] = {0.65, 0.55};
  const double err[] = {0.002, 0.013};
  EXPECT_NEAR(sensitivity(lv, err)[0], 0.11, 1e-12);
  const double lv2[] = {0.75, 0.65};
  const double err2[] = {0.0, 0.004};
  EXPECT_NEAR(sensitivity(lv2, err2)[0], 0.04, 1e-12);
  const double all[] = {0.75, 0.65, 0.55, 0.45, 0.4};
  const double flat[] = {0.3, 0.3, 0.3, 0.3, 0.3};
  for (double s : sensitivity(all, flat)) EXPECT_EQ(s, 0.0);
  const double bad[] = {0.4, 0.75};
  EXPECT_THROW(sensitivity(bad, err), InvalidArgument);
}

TEST(Report, JsonAndCsv) {
  ErrorReport r;
  r.er = 0.5;
  r.samples = 4;
  const auto j = nlohmann::json(r);
  EXPECT_EQ(j.at("er"), 0.5);
  EXPECT_EQ(j.at("samples"), 4);
  EXPECT_EQ(csv_header(r), "er,med,mred,nmed,mean_err,var_err,samples,seed,excluded_zero_exact");
  EXPECT_EQ(csv_row(r), "0.5,0,0,0,0,0,4,0,0");
}

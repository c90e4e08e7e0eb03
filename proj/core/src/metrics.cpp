#include "blvos/metrics.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blvos/parallel.hpp"

namespace blvos {

namespace {

constexpr std::size_t kChunk = 256;

__extension__ using i128 = __int128;
__extension__ using u128 = unsigned __int128;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

}  // namespace

void SamplePlan::check() const {
  if (count == 0) throw InvalidArgument("sample count must be positive");
}

std::uint64_t SamplePlan::default_count(unsigned n) { return n <= 8 ? 10000 : 1000000; }

bool SamplePlan::exhaustive(unsigned n) const { return 2 * n < 64 && (std::uint64_t{1} << (2 * n)) <= count; }

std::uint64_t SamplePlan::effective_count(unsigned n) const {
  return exhaustive(n) ? std::uint64_t{1} << (2 * n) : count;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Operands sample_operands(const SamplePlan& plan, unsigned n, std::uint64_t i) {
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  if (plan.exhaustive(n))
    return {static_cast<std::uint32_t>(i >> n), static_cast<std::uint32_t>(i & mask)};
  const std::uint64_t x = mix64(mix64(plan.seed) ^ i);
  return {static_cast<std::uint32_t>(x & mask), static_cast<std::uint32_t>((x >> 32) & mask)};
}

Operands previous_operands(const SamplePlan& plan, unsigned n, std::uint64_t i) {
  if (plan.mode == SimMode::Reset || i == 0) return {};
  return sample_operands(plan, n, i - 1);
}

std::uint64_t error_distance(std::uint64_t exact, std::uint64_t approx) {
  return exact > approx ? exact - approx : approx - exact;
}

ErrorReport summarize(std::span<const SampleRecord> samples, unsigned n, std::uint64_t seed) {
  if (samples.empty()) throw InvalidArgument("no samples to summarize");
  ErrorReport r;
  r.samples = samples.size();
  r.seed = seed;

  std::uint64_t wrong = 0;
  u128 sum_ed = 0;
  i128 sum_signed = 0;
  u128 sum_sq = 0;
  double sum_rel = 0.0;
  for (const auto& s : samples) {
    const std::uint64_t ed = error_distance(s.exact, s.approx);
    if (ed != 0) ++wrong;
    sum_ed += ed;
    const i128 diff = static_cast<i128>(s.approx) - static_cast<i128>(s.exact);
    sum_signed += diff;
    sum_sq += static_cast<u128>(ed) * ed;
    if (s.exact == 0)
      ++r.excluded_zero_exact;
    else
      sum_rel += static_cast<double>(ed) / static_cast<double>(s.exact);
  }

  const auto count = static_cast<double>(r.samples);
  const double d = std::pow(2.0, n) - 1.0;
  r.er = static_cast<double>(wrong) / count;
  r.med = static_cast<double>(sum_ed) / count;
  r.nmed = r.med / (d * d);
  const std::uint64_t nonzero = r.samples - r.excluded_zero_exact;
  r.mred = nonzero == 0 ? 0.0 : sum_rel / static_cast<double>(nonzero);
  r.mean_err = static_cast<double>(sum_signed) / count;
  // N * sum(x^2) - (sum x)^2 is exact and non-negative.
  const auto big_n = static_cast<i128>(r.samples);
  const i128 numer = big_n * static_cast<i128>(sum_sq) - sum_signed * sum_signed;
  r.var_err = static_cast<double>(numer) / (count * count);
  return r;
}

Characterization characterize(const TimedNetlist& tn, const SamplePlan& plan, unsigned threads, bool keep_log) {
  plan.check();
  const unsigned n = tn.net.n;
  const std::uint64_t total = plan.effective_count(n);

  std::vector<SampleRecord> records(total);
  std::vector<double> energy(total);
  const unsigned workers = resolve_threads(threads);
  std::vector<std::unique_ptr<Simulator>> sims(workers);

  parallel_chunks(total, kChunk, workers, [&](unsigned w, std::size_t, std::size_t begin, std::size_t end) {
    if (!sims[w]) sims[w] = std::make_unique<Simulator>(tn);
    for (std::size_t i = begin; i < end; ++i) {
      const Operands cur = sample_operands(plan, n, i);
      const SimOutcome out = sims[w]->run(previous_operands(plan, n, i), cur);
      records[i] = {cur.a, cur.b, std::uint64_t{cur.a} * cur.b, out.sampled};
      energy[i] = out.energy;
    }
  });

  Characterization c;
  c.report = summarize(records, n, plan.seed);
  for (double e : energy) c.energy += e;
  if (keep_log) c.log = std::move(records);
  return c;
}

Characterization characterize(const MultiplierConfig& config, const SamplePlan& plan, const ElectricalModel& model,
                              unsigned threads, bool keep_log) {
  const Multiplier m(config, model);
  return characterize(m.timed(), plan, threads, keep_log);
}

std::vector<double> sensitivity(std::span<const double> levels, std::span<const double> values) {
  if (levels.size() != values.size()) throw InvalidArgument("sensitivity needs one value per voltage level");
  if (levels.size() < 2) throw InvalidArgument("sensitivity needs at least two voltage levels");
  std::vector<double> s;
  s.reserve(levels.size() - 1);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    if (!(levels[i] > levels[i + 1])) throw InvalidArgument("voltage levels must be strictly decreasing");
    s.push_back((values[i + 1] - values[i]) / (levels[i] - levels[i + 1]));
  }
  return s;
}

void to_json(nlohmann::json& j, const ErrorReport& r) {
  j = nlohmann::json{{"er", r.er},
                     {"med", r.med},
                     {"mred", r.mred},
                     {"nmed", r.nmed},
                     {"mean_err", r.mean_err},
                     {"var_err", r.var_err},
                     {"samples", r.samples},
                     {"seed", r.seed},
                     {"excluded_zero_exact", r.excluded_zero_exact}};
}

std::string csv_header(const ErrorReport&) { return "er,med,mred,nmed,mean_err,var_err,samples,seed,excluded_zero_exact"; }

std::string csv_row(const ErrorReport& r) {
  std::ostringstream os;
  os << fmt(r.er) << ',' << fmt(r.med) << ',' << fmt(r.mred) << ',' << fmt(r.nmed) << ',' << fmt(r.mean_err) << ','
     << fmt(r.var_err) << ',' << r.samples << ',' << r.seed << ',' << r.excluded_zero_exact;
  return os.str();
}

std::string sample_log_csv(std::span<const SampleRecord> log) {
  std::ostringstream os;
  os << "a,b,exact,approx\n";
  for (const auto& s : log) os << s.a << ',' << s.b << ',' << s.exact << ',' << s.approx << '\n';
  return os.str();
}

}  // namespace blvos

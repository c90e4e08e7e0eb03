#include "blvos/explore.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "blvos/parallel.hpp"

namespace blvos {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

bool dominates(const DesignPoint& q, const DesignPoint& p) {
  const bool no_worse = q.energy_rel <= p.energy_rel && q.metrics.mred <= p.metrics.mred;
  const bool better = q.energy_rel < p.energy_rel || q.metrics.mred < p.metrics.mred;
  return no_worse && better;
}

bool stable_less(const DesignPoint& a, const DesignPoint& b) {
  if (a.energy_rel != b.energy_rel) return a.energy_rel < b.energy_rel;
  if (a.metrics.mred != b.metrics.mred) return a.metrics.mred < b.metrics.mred;
  return a.candidate.spec.structure < b.candidate.spec.structure;
}

std::string gated_list(const MultiplierSpec& s) {
  std::string out;
  for (BlockTag t : s.gated_blocks) {
    if (!out.empty()) out += '+';
    out += to_string(t);
  }
  return out;
}

}  // namespace

std::vector<Candidate> enumerate_space(unsigned n, std::span<const unsigned> k_set, std::span<const Structure> structures,
                                       std::span<const double> voltages, const VoltageModel& model) {
  if (k_set.empty() || structures.empty() || voltages.empty())
    throw InvalidArgument("design-space axes must not be empty");
  std::vector<Candidate> out;
  for (unsigned k : k_set) {
    MultiplierSpec spec;
    spec.n = n;
    spec.k = k;
    spec.check();
    for (Structure s : structures) {
      spec.structure = s;
      if (s == Structure::BLVOS0) {
        out.push_back({spec, model.v_nominal, true});
        continue;
      }
      for (double v : voltages) {
        if (!model.is_level(v)) throw InvalidArgument("voltage " + fmt(v) + " is not an approximate level");
        out.push_back({spec, v, false});
      }
    }
  }
  return out;
}

Candidate baseline_of(const Candidate& c, const VoltageModel& model) {
  Candidate b;
  b.spec.n = c.spec.n;
  b.spec.k = c.spec.k;
  b.spec.structure = Structure::BLVOS0;
  b.v_approx = model.v_nominal;
  b.accurate_mode = true;
  return b;
}

namespace {

DesignPoint measure(const Candidate& c, const SamplePlan& plan, const ElectricalModel& model, unsigned threads) {
  const Multiplier m(c.config(), model);
  const Characterization ch = characterize(m.timed(), plan, threads);
  DesignPoint p;
  p.candidate = c;
  p.metrics = ch.report;
  p.energy = ch.energy;
  p.shifters = m.domains().shifter_nets.size();
  return p;
}

void relate(DesignPoint& p, double baseline) {
  if (!(baseline > 0.0)) throw InvalidArgument("baseline trace switched no gates; energy ratio undefined");
  p.baseline_energy = baseline;
  p.energy_rel = p.energy / baseline;
}

}  // namespace

DesignPoint evaluate_point(const Candidate& c, const SamplePlan& plan, const ElectricalModel& model, unsigned threads) {
  DesignPoint p = measure(c, plan, model, threads);
  const DesignPoint base = measure(baseline_of(c, model.voltage), plan, model, threads);
  relate(p, base.energy);
  return p;
}

std::vector<DesignPoint> evaluate_space(std::span<const Candidate> candidates, const SamplePlan& plan,
                                        const ElectricalModel& model, unsigned threads) {
  std::map<std::pair<unsigned, unsigned>, double> baselines;
  for (const auto& c : candidates) baselines.emplace(std::pair{c.spec.n, c.spec.k}, 0.0);
  for (auto& [nk, energy] : baselines) {
    Candidate probe;
    probe.spec.n = nk.first;
    probe.spec.k = nk.second;
    energy = measure(baseline_of(probe, model.voltage), plan, model, threads).energy;
  }

  std::vector<DesignPoint> out(candidates.size());
  parallel_chunks(candidates.size(), 1, threads, [&](unsigned, std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = measure(candidates[i], plan, model, 1);
      relate(out[i], baselines.at({candidates[i].spec.n, candidates[i].spec.k}));
    }
  });
  return out;
}

std::vector<DesignPoint> pareto_front(std::span<const DesignPoint> points) {
  std::vector<DesignPoint> front;
  for (const auto& p : points) {
    const bool dominated = std::any_of(points.begin(), points.end(), [&](const DesignPoint& q) { return dominates(q, p); });
    if (!dominated) front.push_back(p);
  }
  std::stable_sort(front.begin(), front.end(), stable_less);
  return front;
}

std::string_view to_string(Objective o) { return o == Objective::MinEnergy ? "MIN_ENERGY" : "MIN_MRED"; }

Objective parse_objective(std::string_view s) {
  if (s == "MIN_ENERGY" || s == "min-energy" || s == "energy") return Objective::MinEnergy;
  if (s == "MIN_MRED" || s == "min-mred" || s == "mred") return Objective::MinMred;
  throw InvalidArgument("unknown objective '" + std::string(s) + "'");
}

bool Constraint::admits(const DesignPoint& p) const {
  if (max_mred && !(p.metrics.mred <= *max_mred)) return false;
  if (max_nmed && !(p.metrics.nmed <= *max_nmed)) return false;
  if (max_med && !(p.metrics.med <= *max_med)) return false;
  if (energy_budget_rel && !(p.energy_rel <= *energy_budget_rel)) return false;
  return true;
}

std::optional<DesignPoint> select(std::span<const DesignPoint> points, const Constraint& c) {
  std::vector<DesignPoint> feasible;
  for (const auto& p : points)
    if (c.admits(p)) feasible.push_back(p);
  if (feasible.empty()) return std::nullopt;
  const auto front = pareto_front(feasible);
  if (c.objective == Objective::MinEnergy) return front.front();
  auto best = front.begin();
  for (auto it = front.begin(); it != front.end(); ++it)
    if (it->metrics.mred < best->metrics.mred) best = it;
  return *best;
}

void to_json(nlohmann::json& j, const Candidate& c) {
  nlohmann::json gated = nlohmann::json::array();
  for (BlockTag t : c.spec.gated_blocks) gated.push_back(std::string(to_string(t)));
  j = nlohmann::json{{"n", c.spec.n},
                     {"k", c.spec.k},
                     {"structure", std::string(to_string(c.spec.structure))},
                     {"truncation", c.spec.truncation},
                     {"gated_blocks", gated},
                     {"v_approx", c.v_approx},
                     {"accurate_mode", c.accurate_mode}};
}

void to_json(nlohmann::json& j, const DesignPoint& p) {
  j = nlohmann::json{{"candidate", p.candidate},       {"metrics", p.metrics}, {"energy", p.energy},
                     {"baseline_energy", p.baseline_energy}, {"energy_rel", p.energy_rel}, {"shifters", p.shifters}};
}

void to_json(nlohmann::json& j, const Constraint& c) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = nlohmann::json{{"max_mred", opt(c.max_mred)},
                     {"max_nmed", opt(c.max_nmed)},
                     {"max_med", opt(c.max_med)},
                     {"energy_budget_rel", opt(c.energy_budget_rel)},
                     {"objective", std::string(to_string(c.objective))}};
}

std::string sweep_csv(std::span<const DesignPoint> points) {
  std::ostringstream os;
  os << "n,k,structure,v_approx,accurate_mode,truncation,gated_blocks,shifters,energy,baseline_energy,energy_rel,"
     << csv_header(ErrorReport{}) << '\n';
  for (const auto& p : points) {
    const auto& c = p.candidate;
    os << c.spec.n << ',' << c.spec.k << ',' << to_string(c.spec.structure) << ',' << fmt(c.v_approx) << ','
       << (c.accurate_mode ? 1 : 0) << ',' << c.spec.truncation << ',' << gated_list(c.spec) << ',' << p.shifters
       << ',' << fmt(p.energy) << ',' << fmt(p.baseline_energy) << ',' << fmt(p.energy_rel) << ','
       << csv_row(p.metrics) << '\n';
  }
  return os.str();
}

}  // namespace blvos

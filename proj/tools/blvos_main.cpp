#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blvos/config.hpp"
#include "blvos/explore.hpp"
#include "blvos/imgbench.hpp"
#include "blvos/metrics.hpp"
#include "blvos/reliability.hpp"

using nlohmann::json;
using namespace blvos;

namespace {

/// Usage problems detected after parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  unsigned n = 8;
  unsigned k = 4;
  std::string structure = "blvos0";
  std::string vdd = "nominal";
  bool accurate = false;
  std::optional<unsigned> truncation;
  bool with_truncation = false;
  std::vector<std::string> gated;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> mode;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::optional<std::string> config;
  std::optional<std::string> out;

  // characterize
  std::optional<std::string> sample_log;
  // explore
  std::optional<std::string> k_set;
  std::string structures = "blvos1,blvos2,blvos3,blvos4";
  std::optional<std::string> voltages;
  std::optional<double> max_mred, max_nmed, max_med, energy_budget;
  std::string objective = "min-energy";
  // age
  double years = 10.0;
  // pv
  double sigma = 0.0333;
  std::uint64_t trials = 5000;
  std::optional<std::string> trial_log;
  // image
  std::string app = "sharpen";
  std::string input;
  std::optional<std::string> output_image;
};

void add_spec_flags(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.n, "Operand width in bits")->capture_default_str();
  sub->add_option("--k", o.k, "Lower-part width, 0 < k < n")->capture_default_str();
  sub->add_option("--structure", o.structure, "blvos0..blvos4")->capture_default_str();
  sub->add_option("--truncation", o.truncation, "Least-significant product columns removed");
  sub->add_flag("--with-truncation", o.with_truncation, "Truncate 4 columns unless --truncation is given");
  sub->add_option("--gate", o.gated, "Power-gated blocks (LL, HL, LH)")->delimiter(',');
  sub->add_option("--config", o.config, "Model-table override file (JSON)");
}

void add_run_flags(CLI::App* sub, Options& o, bool sampling) {
  add_spec_flags(sub, o);
  sub->add_option("--vdd", o.vdd, "Approximate-region supply: a level or 'nominal'")->capture_default_str();
  sub->add_flag("--accurate", o.accurate, "Switch every region to the nominal supply");
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sub->add_option("--out", o.out, "Output path prefix for .json/.csv (default: JSON on stdout)");
  if (sampling) {
    sub->add_option("--samples", o.samples, "Samples per characterization");
    sub->add_option("--mode", o.mode, "paired or reset");
  }
}

MultiplierSpec make_spec(const Options& o) {
  MultiplierSpec s;
  s.n = o.n;
  s.k = o.k;
  const auto st = parse_structure(o.structure);
  if (!st) throw UsageError("unknown structure '" + o.structure + "'");
  s.structure = *st;
  s.truncation = o.truncation.value_or(o.with_truncation ? 4u : 0u);
  for (const auto& g : o.gated) {
    const auto tag = parse_block_tag(g);
    if (!tag) throw UsageError("unknown block '" + g + "'");
    s.gated_blocks.push_back(*tag);
  }
  s.check();
  return s;
}

double parse_volts(const std::string& text, const VoltageModel& vm) {
  if (text == "nominal") return vm.v_nominal;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw UsageError("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid voltage '" + text + "'");
  }
}

MultiplierConfig make_config(const Options& o, const ModelTables& t) {
  MultiplierConfig c;
  c.spec = make_spec(o);
  c.v_approx = parse_volts(o.vdd, t.electrical.voltage);
  c.accurate_mode = o.accurate || c.v_approx == t.electrical.voltage.v_nominal;
  if (!c.accurate_mode && !t.electrical.voltage.is_level(c.v_approx))
    throw UsageError("--vdd must be one of the approximate levels or 'nominal'");
  if (c.accurate_mode) c.v_approx = t.electrical.voltage.v_nominal;
  return c;
}

SimMode parse_mode(const std::string& m) {
  if (m == "paired" || m == "PAIRED") return SimMode::Paired;
  if (m == "reset" || m == "RESET") return SimMode::Reset;
  throw UsageError("--mode must be 'paired' or 'reset'");
}

SamplePlan make_plan(const Options& o, SimMode default_mode) {
  SamplePlan p;
  p.count = o.samples.value_or(SamplePlan::default_count(o.n));
  if (p.count == 0) throw UsageError("--samples must be positive");
  p.seed = o.seed;
  p.mode = o.mode ? parse_mode(*o.mode) : default_mode;
  return p;
}

json config_json(const MultiplierConfig& c) {
  return Candidate{c.spec, c.v_approx, c.accurate_mode};
}

json plan_json(const SamplePlan& p, unsigned n) {
  return {{"count", p.count},
          {"effective_count", p.effective_count(n)},
          {"exhaustive", p.exhaustive(n)},
          {"seed", p.seed},
          {"mode", std::string(to_string(p.mode))}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

void emit(const Options& o, const json& report, const std::optional<std::string>& csv) {
  const std::string text = report.dump(2) + "\n";
  if (!o.out) {
    std::cout << text;
    return;
  }
  write_file(*o.out + ".json", text);
  if (csv) write_file(*o.out + ".csv", *csv);
}

ModelTables tables_for(const Options& o) {
  return load_model_tables(o.config ? std::optional<std::filesystem::path>(*o.config) : std::nullopt);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_characterize(const Options& o) {
  const ModelTables t = tables_for(o);
  const MultiplierConfig c = make_config(o, t);
  const SamplePlan plan = make_plan(o, SimMode::Paired);
  const Multiplier m(c, t.electrical);
  const Characterization ch = characterize(m.timed(), plan, o.threads, o.sample_log.has_value());

  json cfg = {{"multiplier", config_json(c)}, {"plan", plan_json(plan, c.spec.n)}};
  json report = report_envelope("characterize", cfg, o.seed, t);
  report["result"] = {{"metrics", ch.report},
                      {"energy", ch.energy},
                      {"shifters", m.domains().shifter_nets.size()},
                      {"t_clk", to_units(m.timed().t_clk)}};
  const std::string csv = "n,k,structure,v_approx,accurate_mode,mode,energy," + csv_header(ch.report) + "\n" +
                          std::to_string(c.spec.n) + "," + std::to_string(c.spec.k) + "," +
                          std::string(to_string(c.spec.structure)) + "," + json(c.v_approx).dump() + "," +
                          (c.accurate_mode ? "1" : "0") + "," + std::string(to_string(plan.mode)) + "," +
                          json(ch.energy).dump() + "," + csv_row(ch.report) + "\n";
  emit(o, report, csv);
  if (o.sample_log) write_file(*o.sample_log, sample_log_csv(ch.log));
  return 0;
}

std::vector<unsigned> default_k_set(unsigned n) {
  if (n == 8) return {2, 4, 6};
  if (n == 16) return {4, 8, 12};
  std::vector<unsigned> ks;
  for (unsigned k : {n / 4, n / 2, (3 * n) / 4})
    if (k > 0 && k < n && (ks.empty() || ks.back() != k)) ks.push_back(k);
  return ks;
}

int cmd_explore(const Options& o) {
  const ModelTables t = tables_for(o);
  const auto& vm = t.electrical.voltage;
  std::vector<unsigned> ks;
  if (o.k_set) {
    for (const auto& s : split(*o.k_set)) {
      try {
        ks.push_back(static_cast<unsigned>(std::stoul(s)));
      } catch (const std::exception&) {
        throw UsageError("invalid --k-set entry '" + s + "'");
      }
    }
  } else {
    ks = default_k_set(o.n);
  }
  std::vector<Structure> structures;
  for (const auto& s : split(o.structures)) {
    const auto st = parse_structure(s);
    if (!st) throw UsageError("unknown structure '" + s + "'");
    structures.push_back(*st);
  }
  std::vector<double> volts = vm.approx_levels;
  if (o.voltages) {
    volts.clear();
    for (const auto& s : split(*o.voltages)) volts.push_back(parse_volts(s, vm));
  }
  const auto candidates = enumerate_space(o.n, ks, structures, volts, vm);
  const SamplePlan plan = make_plan(o, SimMode::Paired);
  const auto points = evaluate_space(candidates, plan, t.electrical, o.threads);
  const auto front = pareto_front(points);

  Constraint c;
  c.max_mred = o.max_mred;
  c.max_nmed = o.max_nmed;
  c.max_med = o.max_med;
  c.energy_budget_rel = o.energy_budget;
  c.objective = parse_objective(o.objective);
  const auto chosen = select(points, c);

  json structures_json = json::array();
  for (Structure s : structures) structures_json.push_back(std::string(to_string(s)));
  json cfg = {{"n", o.n},
              {"k_set", ks},
              {"structures", structures_json},
              {"voltages", volts},
              {"constraint", c},
              {"plan", plan_json(plan, o.n)}};
  json report = report_envelope("explore", cfg, o.seed, t);
  report["result"] = {{"points", points},
                      {"pareto", front},
                      {"selection", chosen ? json(*chosen) : json("infeasible")},
                      {"feasible", chosen.has_value()}};
  emit(o, report, sweep_csv(points));
  return 0;
}

int cmd_age(const Options& o) {
  const ModelTables t = tables_for(o);
  const MultiplierConfig c = make_config(o, t);
  if (o.years < 0) throw UsageError("--years must be non-negative");
  const SamplePlan plan = make_plan(o, SimMode::Paired);
  const auto aged = aged_characterize(c, o.years, plan, t.electrical, t.aging, o.threads);
  const double seconds = o.years * kSecondsPerYear;
  const auto& vm = t.electrical.voltage;
  auto shifts = [&](double v) {
    return json{{"v", v},
                {"nmos", delta_vth_bti(t.aging, vm, v, Device::NMOS, seconds)},
                {"pmos", delta_vth_bti(t.aging, vm, v, Device::PMOS, seconds)}};
  };

  json cfg = {{"multiplier", config_json(c)}, {"years", o.years}, {"plan", plan_json(plan, c.spec.n)}};
  json report = report_envelope("age", cfg, o.seed, t);
  report["result"] = {{"aging", aged.aging},
                      {"delta_vth", {{"approx", shifts(c.v_approx)}, {"accurate", shifts(vm.v_nominal)}}},
                      {"fresh", aged.fresh},
                      {"aged", aged.aged},
                      {"mred_delta", aged.mred_delta}};
  const std::string csv = "years,increment,fresh_mred,aged_mred,mred_delta\n" + json(o.years).dump() + "," +
                          json(aged.aging.increment).dump() + "," + json(aged.fresh.mred).dump() + "," +
                          json(aged.aged.mred).dump() + "," + json(aged.mred_delta).dump() + "\n";
  emit(o, report, csv);
  return 0;
}

int cmd_pv(const Options& o) {
  const ModelTables t = tables_for(o);
  const MultiplierConfig c = make_config(o, t);
  const SamplePlan plan = make_plan(o, SimMode::Paired);
  PVPlan pv;
  pv.sigma_rel = o.sigma;
  pv.trials = o.trials;
  pv.seed = o.seed;
  pv.check();
  const PVReport r = pv_trials(c, pv, plan, t.electrical, o.threads);

  json cfg = {{"multiplier", config_json(c)}, {"pv", pv}, {"plan", plan_json(plan, c.spec.n)},
              {"model", "relative gate-delay dispersion standing in for geometry variation"}};
  json report = report_envelope("pv", cfg, o.seed, t);
  report["result"] = {{"med", r.med}, {"mred", r.mred}, {"nmed", r.nmed}};
  auto row = [](const char* name, const MetricStats& s) {
    return std::string(name) + "," + json(s.nominal).dump() + "," + json(s.mean).dump() + "," + json(s.std).dump() +
           "," + (s.ratio ? json(*s.ratio).dump() : std::string()) + "\n";
  };
  const std::string csv = "metric,nominal,mean,std,mean_over_std\n" + row("med", r.med) + row("mred", r.mred) +
                          row("nmed", r.nmed);
  emit(o, report, csv);
  if (o.trial_log) {
    std::string log = "trial," + csv_header(ErrorReport{}) + "\n";
    for (std::size_t i = 0; i < r.trials.size(); ++i) log += std::to_string(i) + "," + csv_row(r.trials[i]) + "\n";
    write_file(*o.trial_log, log);
  }
  return 0;
}

int cmd_image(const Options& o) {
  const ModelTables t = tables_for(o);
  const MultiplierConfig c = make_config(o, t);
  const App app = parse_app(o.app);
  const SimMode mode = o.mode ? parse_mode(*o.mode) : SimMode::Reset;
  const GrayImage img = load_pgm(o.input);
  const Kernel& kernel = app == App::Sharpen ? t.sharpen : t.smooth;
  const AppReport r = run_app(app, img, {c.spec, c.v_approx, c.accurate_mode}, mode, t.electrical, &kernel, o.threads);

  json cfg = {{"multiplier", config_json(c)},
              {"app", std::string(to_string(app))},
              {"mode", std::string(to_string(mode))},
              {"input", o.input}};
  json report = report_envelope("image", cfg, o.seed, t);
  report["result"] = r;
  const std::string csv = "app,mode,mssim,energy_reduction_pct\n" + std::string(to_string(app)) + "," +
                          std::string(to_string(mode)) + "," + json(r.mssim).dump() + "," +
                          json(r.energy_reduction_pct).dump() + "\n";
  emit(o, report, csv);
  if (o.output_image) save_pgm(r.output, *o.output_image);
  return 0;
}

int cmd_dump(const Options& o) {
  const ModelTables t = tables_for(o);
  const Netlist net = build_multiplier(make_spec(o), t.electrical.delays);
  std::ostringstream os;
  write_netlist(os, net);
  if (o.out)
    write_file(*o.out, os.str());
  else
    std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-level voltage-overscaled multiplier simulator"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  Options o;

  auto* ch = app.add_subcommand("characterize", "Error metrics and energy of one configuration");
  add_run_flags(ch, o, true);
  ch->add_option("--log", o.sample_log, "CSV of every sample (a, b, exact, approx)");

  auto* ex = app.add_subcommand("explore", "Design-space sweep, Pareto front and constrained selection");
  add_run_flags(ex, o, true);
  ex->add_option("--k-set", o.k_set, "Comma-separated k values");
  ex->add_option("--structures", o.structures, "Comma-separated structures")->capture_default_str();
  ex->add_option("--voltages", o.voltages, "Comma-separated approximate levels");
  ex->add_option("--max-mred", o.max_mred, "Upper bound on MRED");
  ex->add_option("--max-nmed", o.max_nmed, "Upper bound on NMED");
  ex->add_option("--max-med", o.max_med, "Upper bound on MED");
  ex->add_option("--energy-budget", o.energy_budget, "Upper bound on energy relative to the exact multiplier");
  ex->add_option("--objective", o.objective, "min-energy or min-mred")->capture_default_str();

  auto* ag = app.add_subcommand("age", "Aged delay increase and MRED drift");
  add_run_flags(ag, o, true);
  ag->add_option("--years", o.years, "Stress time in years")->capture_default_str();

  auto* pv = app.add_subcommand("pv", "Monte Carlo over per-gate delay variation");
  add_run_flags(pv, o, true);
  pv->add_option("--sigma", o.sigma, "Relative delay standard deviation")->capture_default_str();
  pv->add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
  pv->add_option("--trial-log", o.trial_log, "CSV of per-trial metrics");

  auto* im = app.add_subcommand("image", "Sharpen or smooth a PGM image through the multiplier");
  add_run_flags(im, o, false);
  im->add_option("--mode", o.mode, "reset (default) or paired");
  im->add_option("--app", o.app, "sharpen or smooth")->capture_default_str();
  im->add_option("--input", o.input, "Input PGM (P2 or P5, maxval 255)")->required();
  im->add_option("--output-image", o.output_image, "Write the approximate output image here");

  auto* dn = app.add_subcommand("dump-netlist", "Print the gate-level netlist");
  add_spec_flags(dn, o);
  dn->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ch->parsed()) return cmd_characterize(o);
    if (ex->parsed()) return cmd_explore(o);
    if (ag->parsed()) return cmd_age(o);
    if (pv->parsed()) return cmd_pv(o);
    if (im->parsed()) return cmd_image(o);
    if (dn->parsed()) return cmd_dump(o);
  } catch (const UsageError& e) {
    std::cerr << "blvos: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "blvos: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "blvos: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include "blvos/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

namespace blvos {

namespace {

void only_keys(const nlohmann::json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InvalidArgument(std::string(where) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument(std::string(where) + ": unknown key '" + key + "'");
  }
}

double number(const nlohmann::json& j, std::string_view where) {
  if (!j.is_number()) throw InvalidArgument(std::string(where) + ": expected a number");
  return j.get<double>();
}

template <class T>
void maybe(const nlohmann::json& obj, const char* key, T& out, std::string_view where) {
  if (!obj.contains(key)) return;
  out = static_cast<T>(number(obj.at(key), std::string(where) + "." + key));
}

std::array<double, kGateKindCount> kind_table(const nlohmann::json& obj, std::array<double, kGateKindCount> base,
                                              std::string_view where) {
  if (!obj.is_object()) throw InvalidArgument(std::string(where) + ": expected an object");
  for (const auto& [key, val] : obj.items()) {
    const auto kind = parse_gate_kind(key);
    if (!kind) throw InvalidArgument(std::string(where) + ": unknown gate kind '" + key + "'");
    base[static_cast<std::size_t>(*kind)] = number(val, std::string(where) + "." + key);
  }
  return base;
}

nlohmann::json kind_json(const std::array<double, kGateKindCount>& t) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kGateKindCount; ++i) j[std::string(to_string(static_cast<GateKind>(i)))] = t[i];
  return j;
}

Kernel kernel_from(const nlohmann::json& obj, const std::string& where) {
  only_keys(obj, where, {"coef", "divisor"});
  Kernel k;
  const auto& c = obj.at("coef");
  if (!c.is_array() || c.size() != 9) throw InvalidArgument(where + ".coef: expected 9 integers");
  for (std::size_t i = 0; i < 9; ++i) {
    if (!c[i].is_number_integer()) throw InvalidArgument(where + ".coef: expected integers");
    k.coef[i] = c[i].get<int>();
  }
  if (!obj.at("divisor").is_number_integer()) throw InvalidArgument(where + ".divisor: expected an integer");
  k.divisor = obj.at("divisor").get<int>();
  k.check();
  return k;
}

nlohmann::json kernel_json(const Kernel& k) { return {{"coef", k.coef}, {"divisor", k.divisor}}; }

}  // namespace

ModelTables apply_overrides(ModelTables t, const nlohmann::json& doc) {
  only_keys(doc, "config", {"delays", "energy", "voltage", "vth_anchors", "shifter_delays", "aging", "kernels"});
  auto& e = t.electrical;

  if (doc.contains("delays")) {
    e.delays.by_kind = kind_table(doc["delays"], e.delays.by_kind, "delays");
    for (double d : e.delays.by_kind)
      if (!(d > 0.0)) throw InvalidArgument("delays: every gate delay must be positive");
  }
  if (doc.contains("energy")) {
    const auto& en = doc["energy"];
    only_keys(en, "energy", {"cap", "shifter_energy_per_event"});
    if (en.contains("cap")) e.energy.cap_per_kind = kind_table(en["cap"], e.energy.cap_per_kind, "energy.cap");
    maybe(en, "shifter_energy_per_event", e.energy.shifter_energy_per_event, "energy");
  }
  if (doc.contains("voltage")) {
    const auto& v = doc["voltage"];
    only_keys(v, "voltage", {"v_nominal", "approx_levels", "alpha", "margin_floor"});
    maybe(v, "v_nominal", e.voltage.v_nominal, "voltage");
    maybe(v, "alpha", e.voltage.alpha, "voltage");
    maybe(v, "margin_floor", e.voltage.margin_floor, "voltage");
    if (v.contains("approx_levels")) {
      if (!v["approx_levels"].is_array()) throw InvalidArgument("voltage.approx_levels: expected an array");
      e.voltage.approx_levels.clear();
      for (const auto& x : v["approx_levels"]) e.voltage.approx_levels.push_back(number(x, "voltage.approx_levels"));
    }
  }
  if (doc.contains("vth_anchors")) {
    const auto& a = doc["vth_anchors"];
    if (!a.is_array()) throw InvalidArgument("vth_anchors: expected an array");
    e.voltage.vth_anchors.clear();
    for (const auto& x : a) {
      only_keys(x, "vth_anchors[]", {"vdd", "vth_nmos", "vth_pmos"});
      e.voltage.vth_anchors.push_back({number(x.at("vdd"), "vth_anchors.vdd"), number(x.at("vth_nmos"), "vth_anchors.vth_nmos"),
                                       number(x.at("vth_pmos"), "vth_anchors.vth_pmos")});
    }
  }
  if (doc.contains("shifter_delays")) {
    const auto& s = doc["shifter_delays"];
    if (!s.is_array()) throw InvalidArgument("shifter_delays: expected an array");
    auto& table = e.shifters.delay_by_level;
    for (const auto& x : s) {
      only_keys(x, "shifter_delays[]", {"v_from", "delay"});
      const double d = number(x.at("delay"), "shifter_delays.delay");
      if (!(d > 0.0)) throw InvalidArgument("shifter_delays: delays must be positive");
      const double v = number(x.at("v_from"), "shifter_delays.v_from");
      const auto it = std::find_if(table.begin(), table.end(), [&](const auto& entry) { return entry.first == v; });
      if (it != table.end()) it->second = d;
      else table.emplace_back(v, d);
    }
  }
  if (doc.contains("aging")) {
    const auto& a = doc["aging"];
    only_keys(a, "aging", {"kappa", "theta", "t_stress", "duty_f", "exp_t", "exp_field", "exp_duty", "t_inv", "anchor_v",
                           "anchor_years", "anchor_nmos", "anchor_pmos", "a_nmos", "a_pmos"});
    // a_nmos/a_pmos are derived from the anchors and recomputed below.
    auto& p = t.aging;
    maybe(a, "kappa", p.kappa, "aging");
    maybe(a, "theta", p.theta, "aging");
    maybe(a, "t_stress", p.t_stress, "aging");
    maybe(a, "duty_f", p.duty_f, "aging");
    maybe(a, "exp_t", p.exp_t, "aging");
    maybe(a, "exp_field", p.exp_field, "aging");
    maybe(a, "exp_duty", p.exp_duty, "aging");
    maybe(a, "t_inv", p.t_inv, "aging");
    maybe(a, "anchor_v", p.anchor_v, "aging");
    maybe(a, "anchor_years", p.anchor_years, "aging");
    maybe(a, "anchor_nmos", p.anchor_nmos, "aging");
    maybe(a, "anchor_pmos", p.anchor_pmos, "aging");
  }
  if (doc.contains("kernels")) {
    const auto& k = doc["kernels"];
    only_keys(k, "kernels", {"sharpen", "smooth"});
    if (k.contains("sharpen")) t.sharpen = kernel_from(k["sharpen"], "kernels.sharpen");
    if (k.contains("smooth")) t.smooth = kernel_from(k["smooth"], "kernels.smooth");
  }

  e.voltage.check();
  e.energy.check();
  t.aging = calibrate(t.aging, e.voltage);
  return t;
}

ModelTables load_model_tables(const std::optional<std::filesystem::path>& override_file) {
  ModelTables t;
  if (!override_file) {
    t.aging = calibrate(t.aging, t.electrical.voltage);
    return t;
  }
  std::ifstream in(*override_file);
  if (!in) throw InvalidArgument("cannot open config file " + override_file->string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("config file " + override_file->string() + ": " + e.what());
  }
  try {
    t = apply_overrides(std::move(t), doc);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config file " + override_file->string() + ": " + e.what());
  }
  t.provenance = override_file->string();
  return t;
}

nlohmann::json tables_json(const ModelTables& t) {
  const auto& e = t.electrical;
  nlohmann::json anchors = nlohmann::json::array();
  for (const auto& a : e.voltage.vth_anchors)
    anchors.push_back({{"vdd", a.vdd}, {"vth_nmos", a.vth_nmos}, {"vth_pmos", a.vth_pmos}});
  nlohmann::json shifters = nlohmann::json::array();
  for (const auto& [v, d] : e.shifters.delay_by_level) shifters.push_back({{"v_from", v}, {"delay", d}});
  return {{"delays", kind_json(e.delays.by_kind)},
          {"energy", {{"cap", kind_json(e.energy.cap_per_kind)},
                      {"shifter_energy_per_event", e.energy.shifter_energy_per_event}}},
          {"voltage", {{"v_nominal", e.voltage.v_nominal},
                       {"approx_levels", e.voltage.approx_levels},
                       {"alpha", e.voltage.alpha},
                       {"margin_floor", e.voltage.margin_floor}}},
          {"vth_anchors", anchors},
          {"shifter_delays", shifters},
          {"aging", t.aging},
          {"kernels", {{"sharpen", kernel_json(t.sharpen)}, {"smooth", kernel_json(t.smooth)}}}};
}

std::string_view tool_version() { return BLVOS_VERSION; }

std::string canonical(const nlohmann::json& j) { return j.dump(); }

nlohmann::json report_envelope(std::string_view command, const nlohmann::json& config, std::uint64_t seed,
                               const ModelTables& tables) {
  nlohmann::json env;
  env["schema_version"] = kSchemaVersion;
  env["tool"] = {{"name", "blvos"}, {"version", std::string(tool_version())}};
  env["command"] = std::string(command);
  env["config"] = config;
  env["seed"] = seed;
  env["model_tables"] = {{"provenance", tables.provenance}, {"tables", tables_json(tables)}};
  env["config_hash"] = config_hash(canonical({{"command", env["command"]}, {"config", config}, {"seed", seed},
                                               {"tables", env["model_tables"]["tables"]}}));
  return env;
}

}  // namespace blvos

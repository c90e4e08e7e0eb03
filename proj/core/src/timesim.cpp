#include "blvos/timesim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>

#include "blvos/parallel.hpp"

namespace blvos {

namespace {

std::vector<Ticks> delays_from_units(const Netlist& net, std::span<const double> units) {
  if (units.size() != net.gates.size()) throw InvalidArgument("one delay per gate required");
  std::vector<Ticks> out(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (!(units[i] > 0.0)) throw InvalidArgument("gate delays must be positive");
    out[i] = std::max<Ticks>(1, std::llround(units[i] * static_cast<double>(kTicksPerUnit)));
  }
  return out;
}

// Reorders gates topologically and renumbers their ids; per-gate side arrays
// are permuted alongside.
template <class... Arrays>
void sort_topologically(Netlist& net, Arrays&... side) {
  const auto order = topological_order(net);
  std::vector<Gate> gates;
  gates.reserve(order.size());
  for (GateId id : order) gates.push_back(std::move(net.gates[id]));
  for (std::size_t i = 0; i < gates.size(); ++i) gates[i].id = static_cast<GateId>(i);
  net.gates = std::move(gates);
  auto permute = [&](auto& arr) {
    std::remove_reference_t<decltype(arr)> out;
    out.reserve(order.size());
    for (GateId id : order) out.push_back(arr[id]);
    arr = std::move(out);
  };
  (permute(side), ...);
}

}  // namespace

Ticks quantize_delay(double nominal_units) {
  if (!(nominal_units > 0.0)) throw InvalidArgument("gate delays must be positive");
  return std::max<Ticks>(1, std::llround(nominal_units * static_cast<double>(kDelayQuantum)));
}

Ticks quantize_factor(double factor) {
  if (!(factor > 0.0)) throw InvalidArgument("delay factors must be positive");
  return std::max<Ticks>(1, std::llround(factor * static_cast<double>(kFactorQuantum)));
}

std::string_view to_string(SimMode m) { return m == SimMode::Reset ? "reset" : "paired"; }

Ticks critical_path(const Netlist& net, std::span<const Ticks> delays) {
  if (delays.size() != net.gates.size()) throw InvalidArgument("one delay per gate required");
  std::vector<Ticks> arrival(net.net_count, 0);
  for (GateId id : topological_order(net)) {
    const Gate& g = net.gates[id];
    Ticks latest = 0;
    for (NetId in : g.inputs) latest = std::max(latest, arrival[in]);
    arrival[g.output] = latest + delays[id];
  }
  Ticks cp = 0;
  for (NetId o : net.primary_outputs) cp = std::max(cp, arrival[o]);
  return cp;
}

Ticks critical_path(const TimedNetlist& tn) { return critical_path(tn.net, tn.gate_delay); }

std::vector<Ticks> nominal_delays(const Netlist& net) {
  std::vector<Ticks> out;
  out.reserve(net.gates.size());
  for (const Gate& g : net.gates) out.push_back(quantize_delay(g.nominal_delay) * kFactorQuantum);
  return out;
}

TimedNetlist make_timed(const Netlist& base, const DomainAssignment& domains, const ElectricalModel& model,
                        const DelayAdjust& adjust) {
  if (domains.gate_voltage.size() != base.gates.size())
    throw InvalidArgument("domain assignment does not match the netlist");

  TimedNetlist tn;
  tn.t_clk = critical_path(base, nominal_delays(base));
  tn.net = base;
  Netlist& net = tn.net;

  const double v_nom = model.voltage.v_nominal;
  auto delta = [&](double v) { return v == v_nom ? adjust.delta_vth_accurate : adjust.delta_vth_approx; };
  auto factor_for = [&](double v) { return quantize_factor(delay_scale(model.voltage, v, delta(v))); };
  const Ticks f_nom = factor_for(v_nom);
  const Ticks f_approx = domains.accurate_mode ? f_nom : factor_for(domains.v_approx);

  std::vector<Ticks> delay;
  std::vector<double> voltage;
  std::vector<double> energy;
  for (std::size_t i = 0; i < net.gates.size(); ++i) {
    const Gate& g = net.gates[i];
    const double v = domains.gate_voltage[i];
    delay.push_back(quantize_delay(g.nominal_delay) * (v == v_nom ? f_nom : f_approx));
    voltage.push_back(v);
    energy.push_back(toggle_energy(model.energy, g.kind, v));
  }

  if (!domains.shifter_nets.empty()) {
    std::vector<NetId> shifted(net.net_count, kTieLow);
    const double ls_delay = shifter_delay(model.shifters, domains.v_approx);
    for (NetId s : domains.shifter_nets) {
      Gate ls;
      ls.id = static_cast<GateId>(net.gates.size());
      ls.kind = GateKind::LevelShifter;
      ls.inputs = {s};
      ls.output = static_cast<NetId>(net.net_count++);
      ls.block = BlockTag::Glue;
      ls.nominal_delay = ls_delay;
      shifted[s] = ls.output;
      net.gates.push_back(std::move(ls));
      delay.push_back(quantize_delay(ls_delay) * kFactorQuantum);
      voltage.push_back(v_nom);
      energy.push_back(model.energy.shifter_energy_per_event);
    }
    const std::size_t original = base.gates.size();
    for (std::size_t i = 0; i < original; ++i) {
      if (domains.gate_voltage[i] != v_nom) continue;
      for (NetId& in : net.gates[i].inputs)
        if (in < shifted.size() && shifted[in] != kTieLow) in = shifted[in];
    }
    if (output_region(domains.structure) == Region::Accurate)
      for (NetId& o : net.primary_outputs)
        if (shifted[o] != kTieLow) o = shifted[o];
  }

  if (!adjust.gate_multiplier.empty()) {
    if (adjust.gate_multiplier.size() != net.gates.size())
      throw InvalidArgument("per-gate delay multipliers do not match the timed netlist");
    for (std::size_t i = 0; i < delay.size(); ++i)
      delay[i] = std::max<Ticks>(1, std::llround(static_cast<double>(delay[i]) * adjust.gate_multiplier[i]));
  }

  sort_topologically(net, delay, voltage, energy);
  tn.gate_delay = std::move(delay);
  tn.gate_voltage = std::move(voltage);
  tn.gate_energy = std::move(energy);
  return tn;
}

TimedNetlist make_timed(const Netlist& net, std::span<const double> delays_units, double t_clk_units) {
  TimedNetlist tn;
  tn.net = net;
  tn.gate_delay = delays_from_units(net, delays_units);
  tn.gate_voltage.assign(net.gates.size(), 0.8);
  tn.gate_energy.assign(net.gates.size(), 1.0);
  tn.t_clk = std::llround(t_clk_units * static_cast<double>(kTicksPerUnit));
  sort_topologically(tn.net, tn.gate_delay, tn.gate_voltage, tn.gate_energy);
  return tn;
}

Simulator::Simulator(const TimedNetlist& tn) : tn_(&tn), n_(tn.net.n) {
  const Netlist& net = tn.net;
  if (net.primary_outputs.size() > 64) throw InvalidArgument("at most 64 outputs can be simulated");
  if (net.primary_inputs.size() < 2 * static_cast<std::size_t>(n_))
    throw InvalidArgument("netlist has fewer than 2n primary inputs");
  if (tn.gate_delay.size() != net.gates.size() || tn.gate_energy.size() != net.gates.size())
    throw InvalidArgument("timed netlist is missing per-gate data");

  const std::size_t nets = net.net_count;
  driver_.assign(nets, -1);
  std::vector<std::uint8_t> ready(nets, 0);
  ready[kTieLow] = 1;
  for (NetId pi : net.primary_inputs) ready.at(pi) = 1;
  ops_.reserve(net.gates.size());
  for (std::size_t i = 0; i < net.gates.size(); ++i) {
    const Gate& g = net.gates[i];
    if (tn.gate_delay[i] <= 0) throw InvalidArgument("gate delays must be positive");
    if (g.inputs.empty() || g.inputs.size() > 2) throw InvalidArgument("gates take one or two inputs");
    for (NetId in : g.inputs)
      if (in >= nets || !ready[in]) throw InvalidArgument("timed netlist gates must be in topological order");
    if (g.output >= nets || ready[g.output]) throw InvalidArgument("net driven twice");
    ready[g.output] = 1;
    const bool unary = g.inputs.size() == 1;
    ops_.push_back({g.kind, unary, g.inputs[0], unary ? g.inputs[0] : g.inputs[1], g.output, tn.gate_delay[i],
                    tn.gate_energy[i]});
    driver_[g.output] = static_cast<std::int32_t>(i);
  }
  for (NetId o : net.primary_outputs)
    if (o >= nets || !ready[o]) throw InvalidArgument("primary output is not driven");

  initial_.assign(nets, 0);
  begin_.assign(nets, 0);
  end_.assign(nets, 0);
  times_.reserve(4 * nets);
}

SimOutcome Simulator::run(Operands prev, Operands cur, bool record_toggles) {
  const Netlist& net = tn_->net;
  times_.clear();

  const auto& pis = net.primary_inputs;
  auto drive = [&](NetId pi, unsigned before, unsigned after) {
    initial_[pi] = static_cast<std::uint8_t>(before);
    begin_[pi] = static_cast<std::uint32_t>(times_.size());
    if (before != after) times_.push_back(0);
    end_[pi] = static_cast<std::uint32_t>(times_.size());
  };
  begin_[kTieLow] = end_[kTieLow] = 0;
  initial_[kTieLow] = 0;
  for (unsigned i = 0; i < n_; ++i) {
    drive(pis[i], (prev.a >> i) & 1u, (cur.a >> i) & 1u);
    drive(pis[n_ + i], (prev.b >> i) & 1u, (cur.b >> i) & 1u);
  }

  SimOutcome r;
  if (record_toggles) r.toggles.assign(ops_.size(), 0);
  for (std::size_t g = 0; g < ops_.size(); ++g) {
    const Op& op = ops_[g];
    bool va = initial_[op.in0] != 0;
    bool vb = initial_[op.in1] != 0;
    bool out = eval_gate(op.kind, va, vb);
    initial_[op.out] = out;
    const auto first = static_cast<std::uint32_t>(times_.size());

    std::uint32_t i = begin_[op.in0];
    const std::uint32_t ie = end_[op.in0];
    std::uint32_t j = op.unary ? 0 : begin_[op.in1];
    const std::uint32_t je = op.unary ? 0 : end_[op.in1];
    while (i < ie || j < je) {
      const Ticks ta = i < ie ? times_[i] : std::numeric_limits<Ticks>::max();
      const Ticks tb = j < je ? times_[j] : std::numeric_limits<Ticks>::max();
      const Ticks t = std::min(ta, tb);
      if (ta == t) {
        va = !va;
        ++i;
      }
      if (tb == t) {
        vb = !vb;
        ++j;
      }
      const bool v = eval_gate(op.kind, va, op.unary ? va : vb);
      if (v != out) {
        out = v;
        times_.push_back(t + op.delay);
      }
    }
    begin_[op.out] = first;
    end_[op.out] = static_cast<std::uint32_t>(times_.size());
    const std::uint32_t toggles = end_[op.out] - first;
    r.energy += toggles * op.energy;
    if (record_toggles) r.toggles[g] = toggles;
  }

  const auto& outs = net.primary_outputs;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    const NetId o = outs[i];
    const std::uint32_t count = end_[o] - begin_[o];
    const bool before = initial_[o] != 0;
    const bool after = before != ((count & 1u) != 0);
    if (after) r.settled |= bit;
    if (count == 0) {
      if (before) r.sampled |= bit;
      continue;
    }
    const Ticks last = times_[end_[o] - 1];
    r.last_output_transition = std::max(r.last_output_transition, last);
    if (last > tn_->t_clk) {
      r.violating_bits |= bit;
      if (before) r.sampled |= bit;
    } else if (after) {
      r.sampled |= bit;
    }
  }
  return r;
}

SimOutcome simulate_pair(const TimedNetlist& tn, Operands prev, Operands cur) {
  Simulator sim(tn);
  return sim.run(prev, cur, true);
}

Multiplier::Multiplier(const MultiplierConfig& config, const ElectricalModel& model, const DelayAdjust& adjust)
    : config_(config),
      base_(build_multiplier(config.spec, model.delays)),
      domains_(assign_domains(model.voltage, base_, config.spec.structure, config.v_approx, config.accurate_mode)),
      timed_(make_timed(base_, domains_, model, adjust)) {}

ResetTable tabulate_reset(const TimedNetlist& tn, unsigned threads) {
  const unsigned n = tn.net.n;
  if (n > kMaxTableWidth)
    throw InvalidArgument("reset tables are limited to n <= " + std::to_string(kMaxTableWidth));
  ResetTable table;
  table.n = n;
  const std::size_t side = std::size_t{1} << n;
  table.product.resize(side * side);
  table.energy.resize(side * side);

  const unsigned workers = resolve_threads(threads);
  std::vector<std::unique_ptr<Simulator>> sims(workers);
  parallel_chunks(side, 1, workers, [&](unsigned w, std::size_t, std::size_t begin, std::size_t end) {
    if (!sims[w]) sims[w] = std::make_unique<Simulator>(tn);
    for (std::size_t a = begin; a < end; ++a)
      for (std::size_t b = 0; b < side; ++b) {
        const auto r = sims[w]->run({}, {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
        table.product[a * side + b] = static_cast<std::uint32_t>(r.sampled);
        table.energy[a * side + b] = r.energy;
      }
  });
  return table;
}

SimOutcome PairedStream::operator()(std::uint32_t a, std::uint32_t b) {
  const Operands cur{a, b};
  auto r = sim_.run(prev_, cur);
  prev_ = cur;
  return r;
}

std::uint64_t multiply_approx(const MultiplierConfig& config, std::uint32_t a, std::uint32_t b, SimMode,
                              const ElectricalModel& model) {
  const std::uint32_t limit = 1u << config.spec.n;
  if (a >= limit || b >= limit) throw InvalidArgument("operand does not fit in n bits");
  const Multiplier mul(config, model);
  Simulator sim(mul.timed());
  return sim.run({}, {a, b}).sampled;
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_reset_table(const ResetTable& table, const std::filesystem::path& path, const std::string& config_json) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::vector<unsigned char> bytes;
  bytes.reserve(table.product.size() * 4);
  for (std::uint32_t v : table.product)
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<unsigned char>(v >> s));
  bin.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!bin) throw std::runtime_error("failed writing " + path.string());

  nlohmann::ordered_json side;
  side["format"] = "blvos-reset-table";
  side["version"] = 1;
  side["n"] = table.n;
  side["entries"] = table.product.size();
  side["entry_bits"] = 32;
  side["byte_order"] = "little";
  side["layout"] = "row-major over (a, b)";
  side["config_hash"] = config_hash(config_json);
  side["config"] = nlohmann::ordered_json::parse(config_json);
  std::ofstream js(path.string() + ".json");
  js << side.dump(2) << '\n';
  if (!js) throw std::runtime_error("failed writing sidecar for " + path.string());
}

LoadedTable load_reset_table(const std::filesystem::path& path, const std::string& expected_hash) {
  std::ifstream js(path.string() + ".json");
  if (!js) throw std::runtime_error("missing sidecar " + path.string() + ".json");
  const auto side = nlohmann::json::parse(js);
  LoadedTable out;
  out.config_hash = side.at("config_hash").get<std::string>();
  if (!expected_hash.empty() && expected_hash != out.config_hash)
    throw std::runtime_error("table configuration hash mismatch");
  out.table.n = side.at("n").get<unsigned>();
  if (out.table.n > kMaxTableWidth) throw std::runtime_error("table width out of range");
  const std::size_t entries = std::size_t{1} << (2 * out.table.n);

  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes(entries * 4);
  bin.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (bin.gcount() != static_cast<std::streamsize>(bytes.size()) || bin.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("table payload size does not match 2^(2n) entries");
  out.table.product.resize(entries);
  for (std::size_t i = 0; i < entries; ++i)
    out.table.product[i] = static_cast<std::uint32_t>(bytes[4 * i]) | static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8 |
                           static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16 |
                           static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24;
  return out;
}

}  // namespace blvos

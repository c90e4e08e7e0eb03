#include <benchmark/benchmark.h>

#include "blvos/imgbench.hpp"
#include "blvos/metrics.hpp"
#include "blvos/timesim.hpp"

using namespace blvos;

namespace {

MultiplierConfig config(unsigned n, unsigned k, Structure s, double v) {
  MultiplierConfig c;
  c.spec.n = n;
  c.spec.k = k;
  c.spec.structure = s;
  c.v_approx = v;
  return c;
}

void BM_BuildMultiplier(benchmark::State& state) {
  const auto n = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Multiplier(config(n, n / 2, Structure::BLVOS3, 0.45), ElectricalModel{}));
}
BENCHMARK(BM_BuildMultiplier)->Arg(8)->Arg(16);

void BM_SimulatePair(benchmark::State& state) {
  const auto n = static_cast<unsigned>(state.range(0));
  const Multiplier m(config(n, n / 2, Structure::BLVOS4, 0.4), ElectricalModel{});
  const std::uint32_t mask = (1u << n) - 1;
  std::uint32_t i = 0;
  for (auto _ : state) {
    const Operands prev{i & mask, (i * 7u) & mask};
    const Operands cur{(i * 13u + 5u) & mask, (i * 31u + 3u) & mask};
    benchmark::DoNotOptimize(simulate_pair(m.timed(), prev, cur));
    ++i;
  }
}
BENCHMARK(BM_SimulatePair)->Arg(8)->Arg(16);

void BM_TabulateReset(benchmark::State& state) {
  const Multiplier m(config(8, 4, Structure::BLVOS4, 0.4), ElectricalModel{});
  for (auto _ : state) benchmark::DoNotOptimize(tabulate_reset(m.timed(), 1));
}
BENCHMARK(BM_TabulateReset)->Unit(benchmark::kMillisecond);

void BM_Characterize(benchmark::State& state) {
  const Multiplier m(config(8, 4, Structure::BLVOS2, 0.45), ElectricalModel{});
  SamplePlan plan;
  plan.count = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(characterize(m.timed(), plan, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Characterize)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ConvolveExact(benchmark::State& state) {
  GrayImage img(256, 256);
  for (unsigned y = 0; y < 256; ++y)
    for (unsigned x = 0; x < 256; ++x) img.at(x, y) = static_cast<std::uint8_t>((x * 3 + y * 5) & 0xFF);
  const MulFn exact = [](std::uint32_t a, std::uint32_t b) { return std::uint64_t{a} * b; };
  for (auto _ : state) benchmark::DoNotOptimize(convolve(img, sharpen_kernel(), exact));
}
BENCHMARK(BM_ConvolveExact)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "blvos/explore.hpp"
#include "blvos/timesim.hpp"

namespace blvos {

struct GrayImage {
  unsigned width = 0;
  unsigned height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(unsigned w, unsigned h, std::uint8_t fill = 0) : width(w), height(h), pixels(std::size_t{w} * h, fill) {}

  std::uint8_t at(unsigned x, unsigned y) const { return pixels[std::size_t{y} * width + x]; }
  std::uint8_t& at(unsigned x, unsigned y) { return pixels[std::size_t{y} * width + x]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

class PgmError : public std::runtime_error {
 public:
  enum class Kind : std::uint8_t { Io, Header, Maxval, Payload };
  PgmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

GrayImage parse_pgm(const std::string& bytes);
GrayImage load_pgm(const std::filesystem::path& path);
/// Writes P5 by default, P2 when `ascii` is set.
void save_pgm(const GrayImage& img, const std::filesystem::path& path, bool ascii = false);

struct Kernel {
  std::array<int, 9> coef{};
  int divisor = 1;

  void check() const;
};

Kernel sharpen_kernel();
Kernel smooth_kernel();

using MulFn = std::function<std::uint64_t(std::uint32_t, std::uint32_t)>;

/// 3x3 convolution with replicated borders. Each tap is sign(c) * mul(|c|, p)
/// (taps with c = 0 are skipped); the sum is divided by the divisor rounding
/// to nearest (ties upward) and saturated to [0, 255].
GrayImage convolve(const GrayImage& img, const Kernel& kernel, const MulFn& mul);

/// Mean SSIM over every 8x8 window, stride 1.
double mssim(const GrayImage& reference, const GrayImage& test);

enum class App : std::uint8_t { Sharpen, Smooth };
std::string_view to_string(App a);
App parse_app(std::string_view s);

struct AppReport {
  App app = App::Sharpen;
  SimMode mode = SimMode::Reset;
  Candidate config;
  double mssim = 1.0;
  /// Set when the raw value fell below 0 and was reported as 0.
  bool mssim_clamped = false;
  double mssim_raw = 1.0;
  double energy = 0.0;
  double baseline_energy = 0.0;
  double energy_reduction_pct = 0.0;
  std::uint64_t multiplications = 0;
  GrayImage exact_output;
  GrayImage output;
};

/// Runs the app through the configured multiplier and through the exact
/// BLVOS0 circuit, scoring quality and energy on the same multiplication
/// trace. RESET mode tabulates both circuits (n <= 12).
AppReport run_app(App app, const GrayImage& image, const Candidate& config, SimMode mode,
                  const ElectricalModel& model = {}, const Kernel* kernel = nullptr, unsigned threads = 1);

void to_json(nlohmann::json& j, const AppReport& r);

}  // namespace blvos

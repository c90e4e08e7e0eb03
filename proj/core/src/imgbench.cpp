#include "blvos/imgbench.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

namespace blvos {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : s_(bytes) {}

  unsigned number(const char* what) {
    skip();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
      throw PgmError(PgmError::Kind::Header, std::string("PGM header: missing ") + what);
    unsigned long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(s_[pos_++] - '0');
      if (v > 1000000) throw PgmError(PgmError::Kind::Header, std::string("PGM header: ") + what + " too large");
    }
    return static_cast<unsigned>(v);
  }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

/// floor(num / den) for den > 0.
std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && (num < 0)) --q;
  return q;
}

}  // namespace

GrayImage parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw PgmError(PgmError::Kind::Header, "not a P2 or P5 PGM file");
  const bool binary = bytes[1] == '5';
  HeaderReader r(bytes);
  r.advance(2);
  const unsigned w = r.number("width");
  const unsigned h = r.number("height");
  const unsigned maxval = r.number("maxval");
  if (w == 0 || h == 0) throw PgmError(PgmError::Kind::Header, "PGM header: zero image dimension");
  if (maxval != 255) throw PgmError(PgmError::Kind::Maxval, "PGM maxval " + std::to_string(maxval) + " (only 255 is supported)");

  GrayImage img(w, h);
  if (binary) {
    std::size_t p = r.pos();
    if (p >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[p])))
      throw PgmError(PgmError::Kind::Header, "PGM header: missing separator before raster");
    ++p;
    if (bytes.size() - p < img.pixels.size())
      throw PgmError(PgmError::Kind::Payload, "PGM raster truncated: expected " + std::to_string(img.pixels.size()) +
                                                  " bytes, found " + std::to_string(bytes.size() - p));
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(p), img.pixels.size(), img.pixels.begin());
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      r.skip();
      if (r.pos() >= bytes.size())
        throw PgmError(PgmError::Kind::Payload, "PGM raster truncated after " + std::to_string(i) + " samples");
      const unsigned v = r.number("sample");
      if (v > 255) throw PgmError(PgmError::Kind::Payload, "PGM sample exceeds maxval");
      img.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError(PgmError::Kind::Io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path, bool ascii) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PgmError(PgmError::Kind::Io, "cannot write " + path.string());
  out << (ascii ? "P2" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  if (ascii) {
    for (unsigned y = 0; y < img.height; ++y) {
      for (unsigned x = 0; x < img.width; ++x) out << (x ? " " : "") << static_cast<unsigned>(img.at(x, y));
      out << '\n';
    }
  } else {
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  }
  if (!out) throw PgmError(PgmError::Kind::Io, "write failed for " + path.string());
}

void Kernel::check() const {
  if (divisor <= 0) throw InvalidArgument("kernel divisor must be positive");
  for (int c : coef)
    if (c < -255 || c > 255) throw InvalidArgument("kernel coefficient magnitudes must fit in 8 bits");
}

Kernel sharpen_kernel() { return {{0, -1, 0, -1, 5, -1, 0, -1, 0}, 1}; }
Kernel smooth_kernel() { return {{1, 1, 1, 1, 1, 1, 1, 1, 1}, 9}; }

GrayImage convolve(const GrayImage& img, const Kernel& kernel, const MulFn& mul) {
  kernel.check();
  GrayImage out(img.width, img.height);
  const auto w = static_cast<int>(img.width);
  const auto h = static_cast<int>(img.height);
  const std::int64_t d = kernel.divisor;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int64_t acc = 0;
      for (int t = 0; t < 9; ++t) {
        const int c = kernel.coef[static_cast<std::size_t>(t)];
        if (c == 0) continue;
        const int sx = std::clamp(x + t % 3 - 1, 0, w - 1);
        const int sy = std::clamp(y + t / 3 - 1, 0, h - 1);
        const auto prod = static_cast<std::int64_t>(
            mul(static_cast<std::uint32_t>(std::abs(c)), img.at(static_cast<unsigned>(sx), static_cast<unsigned>(sy))));
        acc += c < 0 ? -prod : prod;
      }
      const std::int64_t q = floor_div(2 * acc + d, 2 * d);
      out.at(static_cast<unsigned>(x), static_cast<unsigned>(y)) = static_cast<std::uint8_t>(std::clamp<std::int64_t>(q, 0, 255));
    }
  }
  return out;
}

double mssim(const GrayImage& reference, const GrayImage& test) {
  constexpr unsigned kWin = 8;
  if (reference.width != test.width || reference.height != test.height)
    throw InvalidArgument("MSSIM needs images of equal dimensions");
  if (reference.width < kWin || reference.height < kWin) throw InvalidArgument("MSSIM needs images of at least 8x8");
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  constexpr std::int64_t n = kWin * kWin;
  const double nn = static_cast<double>(n * n);

  double total = 0.0;
  std::size_t windows = 0;
  for (unsigned y0 = 0; y0 + kWin <= reference.height; ++y0) {
    for (unsigned x0 = 0; x0 + kWin <= reference.width; ++x0) {
      std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (unsigned y = y0; y < y0 + kWin; ++y) {
        for (unsigned x = x0; x < x0 + kWin; ++x) {
          const std::int64_t a = reference.at(x, y);
          const std::int64_t b = test.at(x, y);
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      }
      const double mu_xy = static_cast<double>(sx * sy) / nn;
      const double mu_xx = static_cast<double>(sx * sx) / nn;
      const double mu_yy = static_cast<double>(sy * sy) / nn;
      const double var_x = static_cast<double>(n * sxx - sx * sx) / nn;
      const double var_y = static_cast<double>(n * syy - sy * sy) / nn;
      const double cov = static_cast<double>(n * sxy - sx * sy) / nn;
      total += ((2 * mu_xy + c1) * (2 * cov + c2)) / ((mu_xx + mu_yy + c1) * (var_x + var_y + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

std::string_view to_string(App a) { return a == App::Sharpen ? "sharpen" : "smooth"; }

App parse_app(std::string_view s) {
  if (s == "sharpen" || s == "SHARPEN") return App::Sharpen;
  if (s == "smooth" || s == "SMOOTH") return App::Smooth;
  throw InvalidArgument("unknown app '" + std::string(s) + "'");
}

namespace {

/// A multiplier front end that also totals toggle energy.
class MeteredMul {
 public:
  MeteredMul(const Candidate& c, SimMode mode, const ElectricalModel& model, unsigned threads)
      : m_(c.config(), model), mode_(mode) {
    if (mode_ == SimMode::Reset)
      table_ = tabulate_reset(m_.timed(), threads);
    else
      stream_ = std::make_unique<PairedStream>(m_.timed());
  }

  std::uint64_t operator()(std::uint32_t a, std::uint32_t b) {
    ++calls_;
    if (mode_ == SimMode::Reset) {
      energy_ += table_.energy_at(a, b);
      return table_.at(a, b);
    }
    const SimOutcome r = (*stream_)(a, b);
    energy_ += r.energy;
    return r.sampled;
  }

  double energy() const { return energy_; }
  std::uint64_t calls() const { return calls_; }

 private:
  Multiplier m_;
  SimMode mode_;
  ResetTable table_;
  std::unique_ptr<PairedStream> stream_;
  double energy_ = 0.0;
  std::uint64_t calls_ = 0;
};

}  // namespace

AppReport run_app(App app, const GrayImage& image, const Candidate& config, SimMode mode, const ElectricalModel& model,
                  const Kernel* kernel, unsigned threads) {
  if (config.spec.n < 8) throw InvalidArgument("image apps need a multiplier of at least 8 bits");
  const Kernel k = kernel ? *kernel : (app == App::Sharpen ? sharpen_kernel() : smooth_kernel());

  AppReport r;
  r.app = app;
  r.mode = mode;
  r.config = config;
  r.exact_output = convolve(image, k, [](std::uint32_t a, std::uint32_t b) { return std::uint64_t{a} * b; });

  MeteredMul approx(config, mode, model, threads);
  r.output = convolve(image, k, std::ref(approx));
  MeteredMul baseline(baseline_of(config, model.voltage), mode, model, threads);
  const GrayImage reference = convolve(image, k, std::ref(baseline));
  if (!(reference == r.exact_output)) throw std::logic_error("exact circuit disagrees with exact arithmetic");

  r.multiplications = approx.calls();
  r.energy = approx.energy();
  r.baseline_energy = baseline.energy();
  r.energy_reduction_pct = r.baseline_energy > 0.0 ? 100.0 * (1.0 - r.energy / r.baseline_energy) : 0.0;
  r.mssim_raw = mssim(r.exact_output, r.output);
  r.mssim_clamped = r.mssim_raw < 0.0;
  r.mssim = r.mssim_clamped ? 0.0 : r.mssim_raw;
  return r;
}

void to_json(nlohmann::json& j, const AppReport& r) {
  j = nlohmann::json{{"app", std::string(to_string(r.app))},
                     {"mode", std::string(to_string(r.mode))},
                     {"config", r.config},
                     {"width", r.output.width},
                     {"height", r.output.height},
                     {"mssim", r.mssim},
                     {"mssim_raw", r.mssim_raw},
                     {"mssim_clamped", r.mssim_clamped},
                     {"energy", r.energy},
                     {"baseline_energy", r.baseline_energy},
                     {"energy_reduction_pct", r.energy_reduction_pct},
                     {"multiplications", r.multiplications}};
}

}  // namespace blvos

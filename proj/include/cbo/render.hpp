#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cbo/dynamics.hpp"
#include "cbo/loci.hpp"

namespace cbo {

/// Pixel (i, j) sits at center + ((2i+1-W)/(2W)) width + i ((2j+1-H)/(2H)) height, height = width H/W,
/// so j counts from the bottom. Written this way the grid is exactly antisymmetric about the center.
/// Images are stored top row first, i.e. buffer row r holds j = H-1-r.
struct Viewport {
  cplx center{};
  double width = 4.0;
  int px_w = 256;
  int px_h = 256;

  double height() const { return width * px_h / px_w; }

  void validate() const {
    if (!(width > 0) || !std::isfinite(width) || px_w < 1 || px_h < 1 || !is_finite(center))
      throw Error(ErrorKind::InvalidArgument, "degenerate viewport");
  }

  /// Coordinate of sub-sample (k, l) of pixel (i, j) on an ss x ss grid.
  cplx point(int i, int j, int ss = 1, int k = 0, int l = 0) const {
    const double W = static_cast<double>(px_w) * ss, H = static_cast<double>(px_h) * ss;
    const double x = static_cast<double>(2 * (static_cast<long long>(i) * ss + k) + 1) - W;
    const double y = static_cast<double>(2 * (static_cast<long long>(j) * ss + l) + 1) - H;
    return {center.real() + x / (2.0 * W) * width, center.imag() + y / (2.0 * H) * height()};
  }
};

struct MultibrotPlane {
  int d = 1;  ///< z^{d+1} + c
};
struct CboPlane {
  int d = 1;
};
struct MboPlane {
  int d = 1;
};
using DynamicalMap = std::variant<Unicritical, BicriticalOdd, MonicOdd>;
struct DynamicalPlane {
  DynamicalMap map;
};
using Plane = std::variant<MultibrotPlane, CboPlane, MboPlane, DynamicalPlane>;

enum class Coloring { Binary, SmoothPotential, PmVerdictOverlay };

inline std::string_view to_string(Coloring c) {
  switch (c) {
    case Coloring::Binary: return "binary";
    case Coloring::SmoothPotential: return "smooth";
    case Coloring::PmVerdictOverlay: return "verdict";
  }
  return "";
}

struct RenderJob {
  Plane plane = MultibrotPlane{};
  Viewport viewport;
  int max_iter = kDefaultRenderIter;
  double escape_radius = 0.0;  ///< 0: certified radius per pixel (or per map)
  Coloring coloring = Coloring::Binary;
  int supersample = 1;

  void validate() const {
    viewport.validate();
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
    if (supersample != 1 && supersample != 2 && supersample != 4)
      throw Error(ErrorKind::InvalidArgument, "supersample must be 1, 2 or 4");
    if (!(escape_radius >= 0) || !std::isfinite(escape_radius))
      throw Error(ErrorKind::InvalidArgument, "escape radius must be finite and >= 0");
    auto check_d = [](int d) {
      if (d < 1 || d > 8) throw Error(ErrorKind::DegreeUnsupported, "d must be in 1..8");
    };
    std::visit([&](const auto& p) {
      using P = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<P, DynamicalPlane>)
        std::visit([&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Unicritical>) check_d(m.d);
          else check_d(m.d());
        }, p.map);
      else check_d(p.d);
    }, plane);
    const bool parameter_bicritical = std::holds_alternative<CboPlane>(plane) || std::holds_alternative<MboPlane>(plane);
    if (coloring == Coloring::PmVerdictOverlay && !parameter_bicritical)
      throw Error(ErrorKind::InvalidArgument, "verdict overlay needs a cbo or mbo plane");
  }
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  ///< row-major, top row first

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::array<std::uint8_t, 3> at(int x, int row) const {
    const std::size_t o = (static_cast<std::size_t>(row) * width + x) * 3;
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
  friend bool operator==(const Image&, const Image&) = default;
};

struct RenderResult {
  Image image;
  std::vector<std::string> warnings;
  double fraction_max_iter = 0.0;  ///< pixels (sub-samples) that never escaped
};

// ---------------------------------------------------------------------------
// Per-sample escape time. Hot loops use real arithmetic.

struct EscapeSample {
  int iter = 0;  ///< iterations until escape; max_iter if bounded
  double modulus = 0.0;
  bool escaped = false;
};

namespace detail {

struct Fast {
  double re = 0, im = 0;
};

inline Fast mul(Fast a, Fast b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }

/// z * sum c_k (z^2)^k with real arithmetic; exactly odd in z.
struct FastOdd {
  int d = 1;
  std::array<Fast, 9> c{};

  Fast operator()(Fast z) const {
    const Fast w = mul(z, z);
    Fast acc = c[d];
    for (int k = d - 1; k >= 0; --k) {
      acc = mul(acc, w);
      acc.re += c[k].re;
      acc.im += c[k].im;
    }
    return mul(z, acc);
  }
};

inline FastOdd fast_odd(std::span<const cplx> coeffs) {
  FastOdd f;
  f.d = static_cast<int>(coeffs.size()) - 1;
  for (int k = 0; k <= f.d; ++k) f.c[k] = {coeffs[k].real(), coeffs[k].imag()};
  return f;
}

template <class Step>
EscapeSample run_orbit(Fast z, const Step& step, int max_iter, double radius) {
  const double r2 = radius * radius;
  for (int n = 0; n < max_iter; ++n) {
    const double m2 = z.re * z.re + z.im * z.im;
    if (m2 >= r2) return {n, std::sqrt(m2), true};
    z = step(z);
  }
  const double m2 = z.re * z.re + z.im * z.im;
  if (m2 >= r2) return {max_iter, std::sqrt(m2), true};
  return {max_iter, std::sqrt(m2), false};
}

/// |z|^D - |c| >= 2|z| once |z| >= max(4, 2(1+|c|)).
inline double unicritical_radius(double abs_c) { return std::max(4.0, 2.0 * (1.0 + abs_c)); }

inline EscapeSample multibrot_sample(int D, cplx c, int max_iter, double radius) {
  if (radius <= 0) radius = unicritical_radius(std::abs(c));
  const Fast fc{c.real(), c.imag()};
  auto step = [&](Fast z) {
    Fast p = z;
    for (int k = 1; k < D; ++k) p = mul(p, z);
    return Fast{p.re + fc.re, p.im + fc.im};
  };
  return run_orbit(Fast{0, 0}, step, max_iter, radius);
}

/// Per-d constants of the closed-form escape radius for p_a: with S = sum_{k<d} |r_k/r_d| and
/// R0 = max(4, 2(1+S)) the lower-order terms cost at most a quarter of the top one beyond R0, so
/// |p_a(z)| >= 2|z| for |z| >= max(R0, (8/(3|a||r_d|))^{1/(2d)}).
struct BicriticalRadius {
  double r0 = 4.0;
  double top = 1.0;
  int d = 1;

  explicit BicriticalRadius(int d_) : d(d_) {
    const auto& r = odd_series(d).rounded;
    top = std::abs(r[d]);
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += std::abs(r[k]) / top;
    r0 = std::max(4.0, 2.0 * (1.0 + s));
  }
  double operator()(double abs_a) const { return std::max(r0, std::pow(8.0 / (3.0 * abs_a * top), 0.5 / d)); }
};

inline EscapeSample cbo_sample(int d, const BicriticalRadius& rad, cplx a, int max_iter, double radius) {
  if (a == cplx{}) return {max_iter, 0.0, false};  // p_0 = 0
  if (radius <= 0) radius = rad(std::abs(a));
  const auto& r = odd_series(d).rounded;
  FastOdd f;
  f.d = d;
  for (int k = 0; k <= d; ++k) f.c[k] = {a.real() * r[k], a.imag() * r[k]};
  return run_orbit(Fast{std::sqrt(static_cast<double>(d)), 0.0}, f, max_iter, radius);
}

/// a(s) = (-1)^d s^{2d} d^d (2d+1).
inline cplx a_from_s(int d, cplx s) {
  const cplx s2d = ipow(s, 2 * d);
  return (d % 2 ? -s2d : s2d) * (std::pow(static_cast<double>(d), d) * (2 * d + 1));
}

inline std::array<std::uint8_t, 3> smooth_color(double nu) {
  // Three phase-shifted cosine ramps; deterministic for a given libm.
  const double t = nu / 48.0;
  auto ch = [&](double phase) {
    const double v = 0.5 + 0.5 * std::cos(kTwoPi * (t + phase));
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  return {ch(0.0), ch(0.15), ch(0.35)};
}

inline std::array<std::uint8_t, 3> verdict_color(const PmVerdict& v) {
  switch (v.outcome) {
    case Outcome::Accept: return {0, 170, 60};
    case Outcome::Indeterminate: return {230, 200, 0};
    case Outcome::Reject: break;
  }
  if (v.reason == Reason::Escaped) return {255, 255, 255};
  return {128, 128, 128};
}

}  // namespace detail

/// Pure function from a sample coordinate to its color for the given job.
class PixelShader {
 public:
  explicit PixelShader(const RenderJob& job) : job_(job), rad_(plane_d(job.plane)) {
    if (auto* dyn = std::get_if<DynamicalPlane>(&job.plane)) {
      std::visit([&](const auto& m) {
        map_radius_ = std::max(job.escape_radius, escape_radius(m));
        degree_ = m.degree();
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Unicritical>) {
          uni_ = true;
          uni_c_ = m.c;
        } else {
          odd_ = detail::fast_odd(m.odd_coefficients());
        }
      }, dyn->map);
    }
  }

  /// Color and whether the sample stayed bounded.
  std::pair<std::array<std::uint8_t, 3>, bool> operator()(cplx x) const {
    if (job_.coloring == Coloring::PmVerdictOverlay) {
      const int d = plane_d(job_.plane);
      cplx a = std::holds_alternative<MboPlane>(job_.plane) ? detail::a_from_s(d, x) : x;
      if (a == cplx{}) return {{128, 128, 128}, true};
      MembershipParams mp;
      mp.max_iter = job_.max_iter;
      const PmVerdict v = membership_pm(a, d, mp);
      return {detail::verdict_color(v), v.reason != Reason::Escaped};
    }
    const EscapeSample e = sample(x);
    if (!e.escaped) return {{0, 0, 0}, true};
    if (job_.coloring == Coloring::Binary) return {{255, 255, 255}, false};
    const double R = radius_used_;
    double nu = e.iter + 1.0 - std::log(std::log(e.modulus) / std::log(R)) / std::log(static_cast<double>(degree_));
    if (!std::isfinite(nu)) nu = e.iter;
    return {detail::smooth_color(std::max(0.0, nu)), false};
  }

 private:
  static int plane_d(const Plane& p) {
    return std::visit([](const auto& q) {
      using P = std::decay_t<decltype(q)>;
      if constexpr (std::is_same_v<P, DynamicalPlane>)
        return std::visit([](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Unicritical>) return m.d;
          else return m.d();
        }, q.map);
      else return q.d;
    }, p);
  }

  EscapeSample sample(cplx x) const {
    const int iters = job_.max_iter;
    return std::visit([&](const auto& p) -> EscapeSample {
      using P = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<P, MultibrotPlane>) {
        degree_ = p.d + 1;
        radius_used_ = job_.escape_radius > 0 ? job_.escape_radius : detail::unicritical_radius(std::abs(x));
        return detail::multibrot_sample(p.d + 1, x, iters, radius_used_);
      } else if constexpr (std::is_same_v<P, CboPlane> || std::is_same_v<P, MboPlane>) {
        const cplx a = std::is_same_v<P, MboPlane> ? detail::a_from_s(p.d, x) : x;
        degree_ = 2 * p.d + 1;
        radius_used_ = job_.escape_radius > 0 ? job_.escape_radius : (a == cplx{} ? 4.0 : rad_(std::abs(a)));
        return detail::cbo_sample(p.d, rad_, a, iters, radius_used_);
      } else {
        radius_used_ = map_radius_;
        const detail::Fast z0{x.real(), x.imag()};
        if (uni_) {
          const detail::Fast fc{uni_c_.real(), uni_c_.imag()};
          auto step = [&](detail::Fast z) {
            detail::Fast q = z;
            for (int k = 1; k < degree_; ++k) q = detail::mul(q, z);
            return detail::Fast{q.re + fc.re, q.im + fc.im};
          };
          return detail::run_orbit(z0, step, iters, map_radius_);
        }
        return detail::run_orbit(z0, odd_, iters, map_radius_);
      }
    }, job_.plane);
  }

  const RenderJob& job_;
  detail::BicriticalRadius rad_;
  double map_radius_ = 0.0;
  bool uni_ = false;
  cplx uni_c_{};
  detail::FastOdd odd_;
  // Scratch values of the current sample; each worker owns its shader.
  mutable int degree_ = 2;
  mutable double radius_used_ = 4.0;
};

inline constexpr int kTileSize = 64;

/// Tiles of 64x64 are handed to workers through an atomic counter; every pixel is a pure function
/// of its coordinates, so the bytes do not depend on the number of threads.
inline RenderResult render(const RenderJob& job, int threads = 0, const Deadline& deadline = {}) {
  job.validate();
  const Viewport& vp = job.viewport;
  RenderResult out;
  out.image = Image(vp.px_w, vp.px_h);
  const int ss = job.supersample;
  const int tiles_x = (vp.px_w + kTileSize - 1) / kTileSize, tiles_y = (vp.px_h + kTileSize - 1) / kTileSize;
  const int tiles = tiles_x * tiles_y;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, tiles);
  std::atomic<int> next{0};
  std::atomic<long long> bounded{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    try {
      const PixelShader shade(job);
      long long local_bounded = 0;
      for (int t = next++; t < tiles; t = next++) {
        const int tx = t % tiles_x, ty = t / tiles_x;
        for (int row = ty * kTileSize; row < std::min(vp.px_h, (ty + 1) * kTileSize); ++row) {
          check_deadline(deadline);
          const int j = vp.px_h - 1 - row;
          for (int i = tx * kTileSize; i < std::min(vp.px_w, (tx + 1) * kTileSize); ++i) {
            unsigned sum[3] = {0, 0, 0};
            for (int l = 0; l < ss; ++l)
              for (int k = 0; k < ss; ++k) {
                const auto [c, in] = shade(vp.point(i, j, ss, k, l));
                for (int ch = 0; ch < 3; ++ch) sum[ch] += c[ch];
                local_bounded += in;
              }
            const unsigned n = static_cast<unsigned>(ss * ss);
            std::uint8_t* px = &out.image.rgb[(static_cast<std::size_t>(row) * vp.px_w + i) * 3];
            for (int ch = 0; ch < 3; ++ch) px[ch] = static_cast<std::uint8_t>((sum[ch] + n / 2) / n);
          }
        }
      }
      bounded += local_bounded;
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = tiles;
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  const double total = static_cast<double>(vp.px_w) * vp.px_h * ss * ss;
  out.fraction_max_iter = bounded / total;
  if (job.coloring == Coloring::SmoothPotential && out.fraction_max_iter > 0.5)
    out.warnings.push_back("BudgetTooSmall: " + std::to_string(out.fraction_max_iter * 100.0) +
                           "% of samples reached max_iter");
  return out;
}

// ---------------------------------------------------------------------------
// PPM and hashing

inline std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

inline void write_ppm(const Image& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  const std::string bytes = encode_ppm(img);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorKind::Io, "write failed: " + path);
}

inline Image decode_ppm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w < 1 || h < 1 || maxval != 255) throw Error(ErrorKind::Io, "not an 8-bit P6 image");
  in.get();
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) throw Error(ErrorKind::Io, "truncated image");
  return img;
}

inline Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_ppm(ss.str());
}

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string image_hash(const Image& img) { return fnv1a_hex(encode_ppm(img)); }

/// Symmetry helpers: 180 degree rotation, top-bottom flip (complex conjugation), left-right flip.
inline Image rotate180(const Image& img) {
  Image out(img.width, img.height);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t p = 0; p < n; ++p)
    for (int ch = 0; ch < 3; ++ch) out.rgb[(n - 1 - p) * 3 + ch] = img.rgb[p * 3 + ch];
  return out;
}

inline Image flip_rows(const Image& img) {
  Image out(img.width, img.height);
  for (int row = 0; row < img.height; ++row)
    for (int x = 0; x < img.width; ++x)
      for (int ch = 0; ch < 3; ++ch)
        out.rgb[(static_cast<std::size_t>(img.height - 1 - row) * img.width + x) * 3 + ch] =
            img.rgb[(static_cast<std::size_t>(row) * img.width + x) * 3 + ch];
  return out;
}

inline Image flip_columns(const Image& img) {
  Image out(img.width, img.height);
  for (int row = 0; row < img.height; ++row)
    for (int x = 0; x < img.width; ++x)
      for (int ch = 0; ch < 3; ++ch)
        out.rgb[(static_cast<std::size_t>(row) * img.width + (img.width - 1 - x)) * 3 + ch] =
            img.rgb[(static_cast<std::size_t>(row) * img.width + x) * 3 + ch];
  return out;
}

/// Default square viewport framing the whole set: the locus, or for a dynamical plane the disk of
/// the certified escape radius.
inline Viewport root_viewport(const Plane& plane, int px = 256) {
  return std::visit([&](const auto& p) -> Viewport {
    using P = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<P, MultibrotPlane>) {
      return p.d == 1 ? Viewport{-0.25, 4.0, px, px} : Viewport{0.0, 4.5, px, px};
    } else if constexpr (std::is_same_v<P, CboPlane>) {
      return {0.0, 6.0, px, px};
    } else if constexpr (std::is_same_v<P, MboPlane>) {
      return {0.0, 3.0, px, px};
    } else {
      const double r = std::visit([](const auto& m) { return escape_radius(m); }, p.map);
      return {0.0, 2.0 * r, px, px};
    }
  }, plane);
}

}  // namespace cbo

#pragma once

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <map>
#include <string>

#include "cbo/json_io.hpp"
#include "cbo/loci.hpp"
#include "cbo/pcf.hpp"
#include "cbo/rays.hpp"
#include "cbo/render.hpp"

// last: resolv.h, pulled in by httplib, defines _res, which Eigen uses as an identifier
#include <httplib.h>

namespace cbo::service {

inline constexpr const char* kApiVersion = "v1";
inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kTilePx = 256;

struct Config {
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 4;         ///< concurrent requests
  int render_threads = 1;  ///< threads per tile
  int time_budget_ms = 10000;
  int max_zoom = 40;
  int max_iter_cap = 100000;
};

using Params = std::multimap<std::string, std::string>;

struct Reply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::string etag;
};

/// Request failure carrying its HTTP status.
struct HttpError : std::runtime_error {
  int status;
  std::string kind;
  HttpError(int st, std::string k, const std::string& msg) : std::runtime_error(msg), status(st), kind(std::move(k)) {}
};

namespace detail {

inline HttpError bad(const std::string& msg) { return {400, "BadRequest", msg}; }
inline HttpError range(const std::string& msg) { return {422, "OutOfRange", msg}; }

inline std::optional<std::string> get(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  return it->second;
}

inline std::string req_str(const Params& p, const std::string& key) {
  auto v = get(p, key);
  if (!v) throw bad("missing parameter '" + key + "'");
  return *v;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw bad("parameter '" + key + "' is not an integer");
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) throw bad("parameter '" + key + "' is not a finite number");
  return out;
}

inline long long req_int(const Params& p, const std::string& key) { return parse_int(key, req_str(p, key)); }

inline long long opt_int(const Params& p, const std::string& key, long long dflt) {
  auto v = get(p, key);
  return v ? parse_int(key, *v) : dflt;
}

inline double opt_double(const Params& p, const std::string& key, double dflt) {
  auto v = get(p, key);
  return v ? parse_double(key, *v) : dflt;
}

inline cplx req_complex(const Params& p, const std::string& name) {
  return {parse_double(name + "_re", req_str(p, name + "_re")), parse_double(name + "_im", req_str(p, name + "_im"))};
}

inline int degree_param(const Params& p) {
  const long long d = req_int(p, "d");
  if (d < 1 || d > 8) throw range("d must be in 1..8");
  return static_cast<int>(d);
}

inline Deadline deadline_for(const Config& cfg) {
  if (cfg.time_budget_ms <= 0) return std::nullopt;
  return std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg.time_budget_ms);
}

inline std::string etag_of(const std::string& resolved) {
  return "\"" + fnv1a_hex(resolved + "|" + kApiVersion + "|" + kLibraryVersion) + "\"";
}

inline std::string canonical(const std::string& route, const Params& p) {
  Json j;
  j["route"] = route;
  for (const auto& [k, v] : p) j["params"][k] = v;
  return j.dump();
}

inline Reply json_reply(const Json& j, std::string etag = {}) { return {200, "application/json", j.dump(), std::move(etag)}; }

inline RayParams ray_params(const Params& p) {
  RayParams rp;
  rp.eta = opt_double(p, "eta", rp.eta);
  rp.step_ratio = opt_double(p, "step_ratio", rp.step_ratio);
  rp.max_levels = static_cast<int>(opt_int(p, "max_levels", rp.max_levels));
  rp.validate();
  return rp;
}

inline DynamicalMap map_param(const Params& p, int d) {
  const std::string fam = get(p, "map").value_or("bicritical");
  if (fam == "unicritical") return Unicritical{d, req_complex(p, "c")};
  if (fam == "bicritical") return BicriticalOdd(d, req_complex(p, "a"));
  if (fam == "monic") return MonicOdd::from_s(d, req_complex(p, "s"));
  throw bad("unknown map '" + fam + "'");
}

inline int max_iter_param(const Params& p, const Config& cfg, int dflt) {
  const long long m = opt_int(p, "max_iter", dflt);
  if (m < 1 || m > cfg.max_iter_cap) throw range("max_iter must be in 1.." + std::to_string(cfg.max_iter_cap));
  return static_cast<int>(m);
}

}  // namespace detail

/// Tile (z, x, y) of a root viewport: 2^z x 2^z tiles, y counted from the top.
inline Viewport tile_viewport(const Viewport& root, int z, long long x, long long y, int px = kTilePx) {
  const double n = std::ldexp(1.0, z);
  const double w = root.width, h = root.height();
  const cplx center = root.center + cplx{((x + 0.5) / n - 0.5) * w, (0.5 - (y + 0.5) / n) * h};
  return {center, w / n, px, px};
}

/// Resolved render job for a tile request; 400/422 on bad parameters.
inline RenderJob tile_job(const Plane& plane, const Params& p, const Config& cfg) {
  const long long z = detail::req_int(p, "z"), x = detail::req_int(p, "x"), y = detail::req_int(p, "y");
  if (z < 0 || z > cfg.max_zoom) throw detail::range("zoom must be in 0.." + std::to_string(cfg.max_zoom));
  const long long n = 1LL << z;
  if (x < 0 || x >= n || y < 0 || y >= n) throw detail::range("tile index outside 0..2^z-1");
  RenderJob job;
  job.plane = plane;
  job.viewport = tile_viewport(root_viewport(plane), static_cast<int>(z), x, y);
  job.max_iter = detail::max_iter_param(p, cfg, kDefaultRenderIter);
  job.escape_radius = detail::opt_double(p, "escape_radius", 0.0);
  if (auto c = detail::get(p, "coloring")) {
    try {
      job.coloring = coloring_from_string(*c);
    } catch (const Error& e) {
      throw detail::bad(e.what());
    }
  }
  job.supersample = static_cast<int>(detail::opt_int(p, "supersample", 1));
  try {
    job.validate();
  } catch (const Error& e) {
    throw detail::range(e.what());
  }
  return job;
}

inline Reply tile_reply(const RenderJob& job, const Config& cfg, const std::string& if_none_match) {
  const std::string etag = detail::etag_of(to_json(job).dump());
  if (!if_none_match.empty() && if_none_match == etag) return {304, "", "", etag};
  const RenderResult r = render(job, cfg.render_threads, detail::deadline_for(cfg));
  return {200, "image/x-portable-pixmap", encode_ppm(r.image), etag};
}

inline Reply locus_tile(const Params& p, const Config& cfg, const std::string& inm = {}) {
  const std::string fam = detail::req_str(p, "family");
  const int d = detail::degree_param(p);
  Plane plane;
  if (fam == "multibrot") plane = MultibrotPlane{d};
  else if (fam == "cbo") plane = CboPlane{d};
  else if (fam == "mbo") plane = MboPlane{d};
  else throw detail::bad("unknown family '" + fam + "'");
  return tile_reply(tile_job(plane, p, cfg), cfg, inm);
}

inline Reply dyn_tile(const Params& p, const Config& cfg, const std::string& inm = {}) {
  const int d = detail::degree_param(p);
  DynamicalMap map = [&] {
    try {
      return detail::map_param(p, d);
    } catch (const Error& e) {
      throw detail::range(e.what());
    }
  }();
  return tile_reply(tile_job(DynamicalPlane{std::move(map)}, p, cfg), cfg, inm);
}

inline Reply membership(const Params& p, const Config& cfg, const std::string& inm = {}) {
  const int d = detail::degree_param(p);
  const cplx a = detail::req_complex(p, "a");
  MembershipParams mp;
  mp.orbit_len = static_cast<int>(detail::opt_int(p, "orbit_len", mp.orbit_len));
  mp.max_iter = detail::max_iter_param(p, cfg, mp.max_iter);
  mp.eps0 = detail::opt_double(p, "eps0", mp.eps0);
  mp.eps_sep = detail::opt_double(p, "eps_sep", mp.eps_sep);
  mp.rays = detail::ray_params(p);
  if (mp.orbit_len < 1) throw detail::range("orbit_len must be >= 1");
  const std::string etag = detail::etag_of(detail::canonical("membership", p));
  if (inm == etag) return {304, "", "", etag};
  return detail::json_reply(to_json(membership_pm(a, d, mp, detail::deadline_for(cfg))), etag);
}

inline Reply ray(const Params& p, const Config& cfg, const std::string& inm = {}) {
  const int d = detail::degree_param(p);
  const Angle theta = [&] {
    try {
      return Angle::parse(detail::req_str(p, "angle"));
    } catch (const Error& e) {
      throw detail::bad(e.what());
    }
  }();
  const RayParams rp = detail::ray_params(p);
  const DynamicalMap map = detail::map_param(p, d);
  const std::string etag = detail::etag_of(detail::canonical("ray", p));
  if (inm == etag) return {304, "", "", etag};
  const Deadline deadline = detail::deadline_for(cfg);
  const RayTrace tr = std::visit([&](const auto& m) -> RayTrace {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, BicriticalOdd>) {
      // rays live in the monic conjugate; the branch with rays 0 and 1/2 landing at 0 if there is one
      const auto br = search_branch(m.a(), d, rp, deadline);
      const cplx s = br.s && !br.ambiguous ? *br.s : candidate_branches(m.a(), d).front();
      return trace_ray(MonicOdd(d, m.a(), s), theta, rp, deadline);
    } else {
      return trace_ray(m, theta, rp, deadline);
    }
  }, map);
  return detail::json_reply(to_json(tr), etag);
}

inline Reply center(const Params& p, const Config&, const std::string& inm = {}) {
  const std::string kind = detail::get(p, "kind").value_or("center");
  const std::string family = detail::get(p, "family").value_or("cbo");
  const int d = detail::degree_param(p);
  const cplx seed = detail::req_complex(p, "seed");
  const std::string etag = detail::etag_of(detail::canonical("center", p));
  if (inm == etag) return {304, "", "", etag};
  CenterSpec spec;
  if (kind == "cut") {
    const long long k = detail::req_int(p, "k");
    if (k < 2 || k > 64) throw detail::range("k must be in 2..64");
    spec = solve_cut_point(d, static_cast<int>(k), seed);
  } else if (kind == "center") {
    const long long period = detail::req_int(p, "period");
    if (period < 1 || period > 64) throw detail::range("period must be in 1..64");
    if (family == "unicritical") spec = solve_center_unicritical(d + 1, static_cast<int>(period), seed);
    else if (family == "cbo") spec = solve_center_bicritical(d, static_cast<int>(period), seed);
    else throw detail::bad("unknown family '" + family + "'");
  } else {
    throw detail::bad("kind must be center or cut");
  }
  return detail::json_reply(to_json(spec), etag);
}

inline Reply version(const Params&, const Config& cfg, const std::string& = {}) {
  Json j;
  j["api"] = kApiVersion;
  j["library"] = "cbo";
  j["version"] = kLibraryVersion;
  j["tile_px"] = kTilePx;
  j["max_zoom"] = cfg.max_zoom;
  j["time_budget_ms"] = cfg.time_budget_ms;
  return detail::json_reply(j);
}

inline Json error_json(const std::string& kind, const std::string& msg) {
  Json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = msg;
  return j;
}

/// Runs a handler and maps failures to statuses: 400 malformed, 422 out of range or unsolvable,
/// 504 time budget exceeded.
template <class Handler>
Reply guarded(const Handler& h, const Params& p, const Config& cfg, const std::string& inm) {
  auto fail = [](int st, const std::string& kind, const std::string& msg) {
    return Reply{st, "application/json", error_json(kind, msg).dump(), ""};
  };
  try {
    return h(p, cfg, inm);
  } catch (const HttpError& e) {
    return fail(e.status, e.kind, e.what());
  } catch (const Error& e) {
    const std::string kind(to_string(e.kind()));
    if (e.kind() == ErrorKind::TimeBudgetExceeded) return fail(504, kind, e.what());
    if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::NonFiniteInput) return fail(400, kind, e.what());
    return fail(422, kind, e.what());
  } catch (const std::exception& e) {
    return fail(500, "Internal", e.what());
  }
}

using HandlerFn = Reply (*)(const Params&, const Config&, const std::string&);

inline const std::map<std::string, HandlerFn>& routes() {
  static const std::map<std::string, HandlerFn> r{
      {"/api/v1/version", &version},       {"/api/v1/locus-tile", &locus_tile},
      {"/api/v1/dyn-tile", &dyn_tile}, {"/api/v1/membership", &membership},
      {"/api/v1/ray", &ray},               {"/api/v1/center", &center},
  };
  return r;
}

/// In-process entry point used by the HTTP routes and by tests.
inline Reply dispatch(const std::string& path, const Params& p, const Config& cfg, const std::string& if_none_match = {}) {
  auto it = routes().find(path);
  if (it == routes().end()) return {404, "application/json", error_json("NotFound", path).dump(), ""};
  return guarded(it->second, p, cfg, if_none_match);
}

inline void install_routes(httplib::Server& server, const Config& cfg) {
  for (const auto& [path, fn] : routes()) {
    const std::string route = path;
    server.Get(route, [route, cfg](const httplib::Request& req, httplib::Response& res) {
      const Params params(req.params.begin(), req.params.end());
      const Reply r = dispatch(route, params, cfg, req.get_header_value("If-None-Match"));
      res.status = r.status;
      res.set_header("Access-Control-Allow-Origin", "*");
      if (!r.etag.empty()) res.set_header("ETag", r.etag);
      if (r.status != 304) res.set_content(r.body, r.content_type);
    });
  }
}

inline void configure(httplib::Server& server, const Config& cfg) {
  const int workers = std::max(1, cfg.workers);
  server.new_task_queue = [workers] { return new httplib::ThreadPool(static_cast<std::size_t>(workers)); };
  install_routes(server, cfg);
}

/// Blocks until the server stops.
inline void serve(const Config& cfg) {
  httplib::Server server;
  configure(server, cfg);
  if (!server.listen(cfg.host, cfg.port))
    throw Error(ErrorKind::Io, "cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
}

}  // namespace cbo::service

#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cbo/json_io.hpp"
#include "cbo/loci.hpp"
#include "cbo/pcf.hpp"
#include "cbo/render.hpp"
#include "cbo/service.hpp"
#include "cbo/verify.hpp"

namespace cbo::cli {

enum ExitCode { kOk = 0, kReject = 1, kUsage = 2, kIo = 3, kIndeterminate = 4 };

inline cplx parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  double re = 0, im = 0;
  auto num = [&](const std::string& part) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size() || !std::isfinite(v))
      throw Error(ErrorKind::InvalidArgument, "expected RE,IM but got '" + text + "'");
    return v;
  };
  if (comma == std::string::npos) {
    re = num(text);
  } else {
    re = num(text.substr(0, comma));
    im = num(text.substr(comma + 1));
  }
  return {re, im};
}

inline std::pair<int, int> parse_px(const std::string& text) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || x != 'x' || w < 1 || h < 1)
    throw Error(ErrorKind::InvalidArgument, "expected WxH but got '" + text + "'");
  return {w, h};
}

/// Replaces `--config FILE` by the file's `key=value` lines as `--key value` pairs placed right after the
/// subcommand, so flags given on the command line (which come later) win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path);
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#' || line[b] == ';' || line[b] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, "config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto f = s.find_first_not_of(" \t\r"), l = s.find_last_not_of(" \t\r");
      s = f == std::string::npos ? "" : s.substr(f, l - f + 1);
      if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
      return s;
    };
    const std::string key = trim(line.substr(b, eq - b)), value = trim(line.substr(eq + 1));
    if (value == "true" || value == "false") {
      if (value == "true") extra.push_back("--" + key);
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  const std::size_t at = args.empty() ? 0 : 1;
  args.insert(args.begin() + static_cast<long>(at), extra.begin(), extra.end());
  return args;
}

struct ViewOptions {
  std::string center;
  double width = 0.0;
  std::string px = "1024x1024";
  int max_iter = kDefaultRenderIter;
  double escape_radius = 0.0;
  std::string coloring = "binary";
  int supersample = 1;
};

struct Options {
  int threads = 0;
  std::string out;
  int d = 1;
  std::string family, map = "bicritical", a, s, c, angle, seed, job, listen = "127.0.0.1:8080", filter;
  int period = 1, k = 2, orbit_len = 200, max_iter = kDefaultMembershipIter;
  double eps0 = 1e-8, eps_sep = 0.0;
  RayParams rays;
  ViewOptions view;
  service::Config svc;
};

namespace detail {

inline void add_view(CLI::App* sub, Options& o) {
  sub->add_option("--center", o.view.center, "viewport center RE,IM (default: root viewport)");
  sub->add_option("--width", o.view.width, "viewport width (default: root viewport)")->check(CLI::NonNegativeNumber);
  sub->add_option("--px", o.view.px, "image size WxH")->capture_default_str();
  sub->add_option("--max-iter", o.view.max_iter, "iteration budget")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--escape-radius", o.view.escape_radius, "0 for the certified radius")->capture_default_str();
  sub->add_option("--coloring", o.view.coloring)->capture_default_str()->check(CLI::IsMember({"binary", "smooth", "verdict"}));
  sub->add_option("--supersample", o.view.supersample)->capture_default_str()->check(CLI::IsMember({1, 2, 4}));
  sub->add_option("--threads", o.threads, "0 for all cores")->capture_default_str();
  sub->add_option("--out", o.out, "output .ppm")->required();
}

inline void add_rays(CLI::App* sub, Options& o) {
  sub->add_option("--eta", o.rays.eta, "starting potential")->capture_default_str();
  sub->add_option("--step-ratio", o.rays.step_ratio)->capture_default_str();
  sub->add_option("--max-levels", o.rays.max_levels)->capture_default_str();
}

inline void add_degree(CLI::App* sub, Options& o) {
  sub->add_option("--d", o.d, "family index d")->required()->check(CLI::Range(1, 8));
}

inline RenderJob view_job(Plane plane, const Options& o) {
  RenderJob job;
  const auto [w, h] = parse_px(o.view.px);
  job.plane = std::move(plane);
  job.viewport = root_viewport(job.plane, w);
  job.viewport.px_h = h;
  if (!o.view.center.empty()) job.viewport.center = parse_complex(o.view.center);
  if (o.view.width > 0) job.viewport.width = o.view.width;
  job.max_iter = o.view.max_iter;
  job.escape_radius = o.view.escape_radius;
  job.coloring = coloring_from_string(o.view.coloring);
  job.supersample = o.view.supersample;
  job.validate();
  return job;
}

inline int finish_render(const RenderJob& job, const Options& o, std::ostream& out, std::ostream& err) {
  const RenderResult r = render(job, o.threads);
  write_ppm(r.image, o.out);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  Json j;
  j["out"] = o.out;
  j["hash"] = image_hash(r.image);
  j["fraction_max_iter"] = r.fraction_max_iter;
  j["warnings"] = r.warnings;
  j["job"] = to_json(job);
  out << j.dump() << "\n";
  return kOk;
}

inline DynamicalMap dyn_map(const Options& o) {
  if (o.map == "unicritical") return Unicritical{o.d, parse_complex(o.c)};
  if (o.map == "bicritical") return BicriticalOdd(o.d, parse_complex(o.a));
  if (o.s.empty()) throw Error(ErrorKind::InvalidArgument, "--s is required for the monic map");
  if (!o.a.empty()) return MonicOdd(o.d, parse_complex(o.a), parse_complex(o.s));
  return MonicOdd::from_s(o.d, parse_complex(o.s));
}

inline int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonFiniteInput:
    case ErrorKind::ZeroParameter:
    case ErrorKind::DegreeUnsupported: return kUsage;
    case ErrorKind::Io: return kIo;
    default: return kReject;
  }
}

}  // namespace detail

/// Runs the command line `args` (without the program name). Exit codes: 0 success or accept,
/// 1 reject or failed computation, 2 usage error, 3 I/O error, 4 indeterminate.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Explore bicritical odd polynomials and the Multibrot embedding", "cbo"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(service::kLibraryVersion));
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", "key=value file; command-line flags override it");
    return sub;
  };

  CLI::App* locus = add("render-locus", "render a parameter-space locus to PPM");
  locus->add_option("--family", o.family)->required()->check(CLI::IsMember({"multibrot", "cbo", "mbo"}));
  detail::add_degree(locus, o);
  detail::add_view(locus, o);

  CLI::App* dyn = add("render-dyn", "render a filled Julia set to PPM");
  dyn->add_option("--map", o.map)->capture_default_str()->check(CLI::IsMember({"unicritical", "bicritical", "monic"}));
  detail::add_degree(dyn, o);
  dyn->add_option("--a", o.a, "RE,IM");
  dyn->add_option("--s", o.s, "RE,IM");
  dyn->add_option("--c", o.c, "RE,IM");
  detail::add_view(dyn, o);

  CLI::App* job = add("render-job", "render a RenderJob JSON file");
  job->add_option("--job", o.job)->required();
  job->add_option("--threads", o.threads)->capture_default_str();
  job->add_option("--out", o.out)->required();

  CLI::App* mem = add("membership", "decide whether a lies in the Multibrot embedding image");
  detail::add_degree(mem, o);
  mem->add_option("--a", o.a, "RE,IM")->required();
  mem->add_option("--orbit-len", o.orbit_len)->capture_default_str()->check(CLI::PositiveNumber);
  mem->add_option("--max-iter", o.max_iter)->capture_default_str()->check(CLI::PositiveNumber);
  mem->add_option("--eps0", o.eps0)->capture_default_str();
  mem->add_option("--eps-sep", o.eps_sep, "0 for the separatrix default")->capture_default_str();
  detail::add_rays(mem, o);

  CLI::App* ray = add("trace-ray", "trace an external ray");
  ray->add_option("--map", o.map)->capture_default_str()->check(CLI::IsMember({"unicritical", "bicritical", "monic"}));
  detail::add_degree(ray, o);
  ray->add_option("--a", o.a, "RE,IM");
  ray->add_option("--s", o.s, "RE,IM");
  ray->add_option("--c", o.c, "RE,IM");
  ray->add_option("--angle", o.angle, "p/q")->required();
  detail::add_rays(ray, o);

  CLI::App* fc = add("find-center", "Newton for a hyperbolic center");
  fc->add_option("--family", o.family)->required()->check(CLI::IsMember({"unicritical", "cbo"}));
  detail::add_degree(fc, o);
  fc->add_option("--period", o.period)->required()->check(CLI::Range(1, 64));
  fc->add_option("--seed", o.seed, "RE,IM")->required();

  CLI::App* cut = add("cut-point", "Newton for a parameter with p_a^k(sqrt d) = 0");
  detail::add_degree(cut, o);
  cut->add_option("--k", o.k)->required()->check(CLI::Range(2, 64));
  cut->add_option("--seed", o.seed, "RE,IM")->required();

  CLI::App* match = add("match-center", "unicritical center with the same critical portrait");
  detail::add_degree(match, o);
  match->add_option("--a", o.a, "RE,IM")->required();

  CLI::App* ver = add("verify", "run the invariant suite");
  ver->add_option("--filter", o.filter, "substring of check names");

  CLI::App* srv = add("serve", "HTTP/JSON service");
  srv->add_option("--listen", o.listen, "HOST:PORT")->capture_default_str();
  srv->add_option("--workers", o.svc.workers)->capture_default_str()->check(CLI::PositiveNumber);
  srv->add_option("--threads", o.svc.render_threads, "threads per tile")->capture_default_str();
  srv->add_option("--time-budget-ms", o.svc.time_budget_ms)->capture_default_str();
  srv->add_option("--max-zoom", o.svc.max_zoom)->capture_default_str()->check(CLI::Range(0, 60));

  try {
    args = expand_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_for(e.kind());
  }

  CLI::App* cmd = app.get_subcommands().front();
  err << "# " << cmd->get_name() << "\n" << cmd->config_to_str(true, false);

  try {
    if (cmd == locus) {
      Plane plane = o.family == "multibrot" ? Plane{MultibrotPlane{o.d}}
                  : o.family == "cbo"       ? Plane{CboPlane{o.d}}
                                            : Plane{MboPlane{o.d}};
      return detail::finish_render(detail::view_job(std::move(plane), o), o, out, err);
    }
    if (cmd == dyn) return detail::finish_render(detail::view_job(DynamicalPlane{detail::dyn_map(o)}, o), o, out, err);
    if (cmd == job) {
      std::ifstream in(o.job);
      if (!in) throw Error(ErrorKind::Io, "cannot read " + o.job);
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return detail::finish_render(render_job_from_string(text), o, out, err);
    }
    if (cmd == mem) {
      MembershipParams mp;
      mp.orbit_len = o.orbit_len;
      mp.max_iter = o.max_iter;
      mp.eps0 = o.eps0;
      mp.eps_sep = o.eps_sep;
      mp.rays = o.rays;
      mp.rays.validate();
      const PmVerdict v = membership_pm(parse_complex(o.a), o.d, mp);
      out << to_json(v).dump() << "\n";
      return v.outcome == Outcome::Accept ? kOk : v.outcome == Outcome::Reject ? kReject : kIndeterminate;
    }
    if (cmd == ray) {
      o.rays.validate();
      const Angle theta = Angle::parse(o.angle);
      const DynamicalMap map = detail::dyn_map(o);
      const RayTrace tr = std::visit([&](const auto& m) -> RayTrace {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, BicriticalOdd>) {
          const auto br = search_branch(m.a(), o.d, o.rays);
          const cplx s = br.s && !br.ambiguous ? *br.s : candidate_branches(m.a(), o.d).front();
          err << "# branch s = " << s.real() << "," << s.imag() << "\n";
          return trace_ray(MonicOdd(o.d, m.a(), s), theta, o.rays);
        } else {
          return trace_ray(m, theta, o.rays);
        }
      }, map);
      out << to_json(tr).dump() << "\n";
      return kOk;
    }
    if (cmd == fc) {
      const cplx seed = parse_complex(o.seed);
      const CenterSpec spec = o.family == "unicritical" ? solve_center_unicritical(o.d + 1, o.period, seed)
                                                        : solve_center_bicritical(o.d, o.period, seed);
      out << to_json(spec).dump() << "\n";
      return kOk;
    }
    if (cmd == cut) {
      out << to_json(solve_cut_point(o.d, o.k, parse_complex(o.seed))).dump() << "\n";
      return kOk;
    }
    if (cmd == match) {
      const cplx a = parse_complex(o.a);
      const CenterMatch m = match_center(a, o.d);
      Json j;
      j["a"] = to_json(a);
      j["d"] = o.d;
      j["period"] = m.period;
      j["c"] = to_json(m.c);
      j["code"] = m.code.str();
      out << j.dump() << "\n";
      return kOk;
    }
    if (cmd == ver) {
      bool all = true;
      for (const auto& check : invariant_checks()) {
        if (!o.filter.empty() && check.name.find(o.filter) == std::string::npos) continue;
        const CheckResult r = run_check(check);
        all = all && r.pass;
        out << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
      }
      return all ? kOk : kReject;
    }
    if (cmd == srv) {
      const auto colon = o.listen.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--listen expects HOST:PORT");
      o.svc.host = o.listen.substr(0, colon);
      o.svc.port = static_cast<int>(service::detail::parse_int("port", o.listen.substr(colon + 1)));
      err << "listening on " << o.svc.host << ":" << o.svc.port << "\n";
      service::serve(o.svc);
      return kOk;
    }
  } catch (const service::HttpError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_for(e.kind());
  }
  return kUsage;
}

}  // namespace cbo::cli

#pragma once

#include <json.hpp>

#include <string>

#include "cbo/pcf.hpp"
#include "cbo/rays.hpp"
#include "cbo/render.hpp"

namespace cbo {

using Json = nlohmann::ordered_json;

inline Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::InvalidArgument, "expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? to_json(*v) : Json(nullptr);
}

inline Json to_json(const RayTrace& tr) {
  Json j;
  j["angle"] = tr.angle.str();
  Json pts = Json::array();
  for (cplx z : tr.points) pts.push_back(to_json(z));
  j["points"] = std::move(pts);
  j["landing"] = optional_json(tr.landing);
  j["status"] = std::string(to_string(tr.status));
  return j;
}

inline Json to_json(const PmVerdict& v) {
  Json j;
  j["a"] = to_json(v.a);
  j["d"] = v.d;
  j["outcome"] = std::string(to_string(v.outcome));
  j["reason"] = v.reason ? Json(std::string(to_string(*v.reason))) : Json(nullptr);
  j["s"] = optional_json(v.s);
  if (v.witness) {
    Json w;
    w["index"] = v.witness->index;
    w["point"] = to_json(v.witness->point);
    w["side"] = std::string(to_string(v.witness->side));
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  j["orbit_len"] = v.orbit_len;
  return j;
}

inline Json to_json(const CenterSpec& c) {
  Json j;
  j["family"] = std::string(to_string(c.family));
  j["d"] = c.d;
  j["period"] = c.period;
  j["seed"] = to_json(c.seed);
  j["found"] = optional_json(c.found);
  j["residual"] = c.residual;
  j["newton_iters"] = c.newton_iters;
  return j;
}

// ---------------------------------------------------------------------------
// RenderJob

inline Json to_json(const DynamicalMap& map) {
  Json j;
  std::visit([&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, Unicritical>) {
      j["family"] = "unicritical";
      j["d"] = m.d;
      j["c"] = to_json(m.c);
    } else if constexpr (std::is_same_v<M, BicriticalOdd>) {
      j["family"] = "bicritical";
      j["d"] = m.d();
      j["a"] = to_json(m.a());
    } else {
      j["family"] = "monic";
      j["d"] = m.d();
      j["a"] = to_json(m.a());
      j["s"] = to_json(m.s());
    }
  }, map);
  return j;
}

inline Json to_json(const Plane& plane) {
  Json j;
  std::visit([&](const auto& p) {
    using P = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<P, MultibrotPlane>) {
      j["kind"] = "multibrot";
      j["d"] = p.d;
    } else if constexpr (std::is_same_v<P, CboPlane>) {
      j["kind"] = "cbo";
      j["d"] = p.d;
    } else if constexpr (std::is_same_v<P, MboPlane>) {
      j["kind"] = "mbo";
      j["d"] = p.d;
    } else {
      j["kind"] = "dynamical";
      j["map"] = to_json(p.map);
    }
  }, plane);
  return j;
}

inline Json to_json(const RenderJob& job) {
  Json j;
  j["plane"] = to_json(job.plane);
  Json vp;
  vp["center"] = to_json(job.viewport.center);
  vp["width"] = job.viewport.width;
  vp["px_w"] = job.viewport.px_w;
  vp["px_h"] = job.viewport.px_h;
  j["viewport"] = std::move(vp);
  j["max_iter"] = job.max_iter;
  j["escape_radius"] = job.escape_radius;
  j["coloring"] = std::string(to_string(job.coloring));
  j["supersample"] = job.supersample;
  return j;
}

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::InvalidArgument, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw Error(ErrorKind::InvalidArgument, std::string("field '") + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw Error(ErrorKind::InvalidArgument, std::string("field '") + key + "' must be an integer");
  }
  return v.get<T>();
}

inline std::string text(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw Error(ErrorKind::InvalidArgument, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline DynamicalMap map_from_json(const Json& j) {
  const std::string fam = detail::text(j, "family");
  const int d = detail::number<int>(j, "d");
  if (fam == "unicritical") return Unicritical{d, complex_from_json(detail::field(j, "c"))};
  if (fam == "bicritical") return BicriticalOdd(d, complex_from_json(detail::field(j, "a")));
  if (fam == "monic") {
    const cplx s = complex_from_json(detail::field(j, "s"));
    if (j.contains("a")) return MonicOdd(d, complex_from_json(j.at("a")), s);
    return MonicOdd::from_s(d, s);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown map family '" + fam + "'");
}

inline Plane plane_from_json(const Json& j) {
  const std::string kind = detail::text(j, "kind");
  if (kind == "dynamical") return DynamicalPlane{map_from_json(detail::field(j, "map"))};
  const int d = detail::number<int>(j, "d");
  if (kind == "multibrot") return MultibrotPlane{d};
  if (kind == "cbo") return CboPlane{d};
  if (kind == "mbo") return MboPlane{d};
  throw Error(ErrorKind::InvalidArgument, "unknown plane kind '" + kind + "'");
}

inline Coloring coloring_from_string(const std::string& s) {
  if (s == "binary") return Coloring::Binary;
  if (s == "smooth") return Coloring::SmoothPotential;
  if (s == "verdict") return Coloring::PmVerdictOverlay;
  throw Error(ErrorKind::InvalidArgument, "unknown coloring '" + s + "'");
}

/// Missing optional fields (max_iter, escape_radius, coloring, supersample) take their defaults.
inline RenderJob render_job_from_json(const Json& j) {
  RenderJob job;
  job.plane = plane_from_json(detail::field(j, "plane"));
  const Json& vp = detail::field(j, "viewport");
  job.viewport.center = complex_from_json(detail::field(vp, "center"));
  job.viewport.width = detail::number<double>(vp, "width");
  job.viewport.px_w = detail::number<int>(vp, "px_w");
  job.viewport.px_h = detail::number<int>(vp, "px_h");
  if (j.contains("max_iter")) job.max_iter = detail::number<int>(j, "max_iter");
  if (j.contains("escape_radius")) job.escape_radius = detail::number<double>(j, "escape_radius");
  if (j.contains("coloring")) job.coloring = coloring_from_string(detail::text(j, "coloring"));
  if (j.contains("supersample")) job.supersample = detail::number<int>(j, "supersample");
  job.validate();
  return job;
}

inline RenderJob render_job_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed JSON: ") + e.what());
  }
  return render_job_from_json(j);
}

}  // namespace cbo

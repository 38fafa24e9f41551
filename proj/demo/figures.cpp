// Regenerates the locus panels (CBO_1..CBO_5, M_3, the CBO_2 zoom at the cut point a = 1) and the
// dynamical planes of the (+,-) type centers with both critical orbits marked.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "cbo/cbo.hpp"

namespace {

using namespace cbo;

void mark(Image& img, const Viewport& vp, cplx z, std::array<std::uint8_t, 3> color) {
  const double fx = ((z.real() - vp.center.real()) / vp.width + 0.5) * vp.px_w;
  const double fy = (0.5 - (z.imag() - vp.center.imag()) / vp.height()) * vp.px_h;
  const int r = std::max(2, vp.px_w / 160);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int x = static_cast<int>(std::floor(fx)) + dx, y = static_cast<int>(std::floor(fy)) + dy;
      if (dx * dx + dy * dy > r * r || x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      for (int ch = 0; ch < 3; ++ch) img.rgb[(static_cast<std::size_t>(y) * img.width + x) * 3 + ch] = color[ch];
    }
}

struct Panel {
  std::string name;
  RenderJob job;
  std::vector<cplx> red, blue;
};

// Outermost period-2 points of p_a satisfy p_a(q) = -q, so 2.1|q| frames the Julia set.
double julia_width(cplx a) { return 2.1 * std::sqrt(3.0 * (1.0 + 1.0 / std::abs(a))); }

Panel dynamical(const std::string& name, cplx a, int period, int px, int iters) {
  Panel p{name, {}, {}, {}};
  p.job.plane = DynamicalPlane{BicriticalOdd(1, a)};
  p.job.viewport = {0.0, julia_width(a), px, px};
  p.job.max_iter = iters;
  const BicriticalOdd f(1, a);
  cplx zr = 1.0, zl = -1.0;
  for (int k = 0; k < period; ++k) {
    p.red.push_back(zr);
    p.blue.push_back(zl);
    zr = f(zr);
    zl = f(zl);
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Render the locus and dynamical-plane panels"};
  std::string dir = "figures_out";
  int px = 1024, iters = 500, threads = 0;
  app.add_option("--out", dir)->capture_default_str();
  app.add_option("--px", px)->capture_default_str()->check(CLI::Range(16, 8192));
  app.add_option("--max-iter", iters)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--threads", threads)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::vector<Panel> panels;
  for (int d = 1; d <= 5; ++d) {
    Panel p{"cbo" + std::to_string(d), {}, {}, {}};
    p.job.plane = CboPlane{d};
    p.job.viewport = root_viewport(p.job.plane, px);
    p.job.max_iter = iters;
    panels.push_back(p);
  }
  Panel m3{"m3", {}, {}, {}};
  m3.job.plane = MultibrotPlane{2};
  m3.job.viewport = root_viewport(m3.job.plane, px);
  m3.job.max_iter = iters;
  panels.push_back(m3);
  Panel zoom{"cbo2_cut_point_zoom", {}, {}, {}};
  zoom.job.plane = CboPlane{2};
  zoom.job.viewport = {cplx{1.85, 0.0}, 2.0, px, px};
  zoom.job.max_iter = iters;
  panels.push_back(zoom);

  const int dpx = std::max(16, px / 2);
  panels.push_back(dynamical("dyn_z2", 1.5, 1, dpx, iters));
  panels.push_back(dynamical("dyn_basilica", *solve_center_bicritical(1, 2, 2.2).found, 2, dpx, iters));
  panels.push_back(dynamical("dyn_airplane", *solve_center_bicritical(1, 3, 2.45).found, 3, dpx, iters));
  panels.push_back(dynamical("dyn_rabbit", *solve_center_bicritical(1, 3, cplx(1.776, -0.48)).found, 3, dpx, iters));
  Panel uni{"fc_seed_0.10003_0.95227", {}, {}, {}};
  uni.job.plane = DynamicalPlane{Unicritical{1, cplx(-0.10003, 0.95227)}};
  uni.job.viewport = {0.0, 3.2, dpx, dpx};
  uni.job.max_iter = iters;
  panels.push_back(uni);

  std::filesystem::create_directories(dir);
  Json index = Json::array();
  for (auto& p : panels) {
    RenderResult r = render(p.job, threads);
    for (cplx z : p.red) mark(r.image, p.job.viewport, z, {220, 30, 30});
    for (cplx z : p.blue) mark(r.image, p.job.viewport, z, {30, 80, 220});
    const std::string path = dir + "/" + p.name + ".ppm";
    write_ppm(r.image, path);
    Json e;
    e["file"] = path;
    e["hash"] = image_hash(r.image);
    e["job"] = to_json(p.job);
    index.push_back(e);
    std::cerr << path << "\n";
  }
  std::cout << index.dump(2) << "\n";
}

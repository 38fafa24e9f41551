#include <gtest/gtest.h>

#include <future>
#include <sstream>
#include <thread>

#include "cbo/service.hpp"
#include "cbo/cli.hpp"

using namespace cbo;
using service::Params;
using service::Reply;

namespace {

Reply get(const std::string& path, Params p, const service::Config& cfg = {}, const std::string& inm = {}) {
  return service::dispatch(path, p, cfg, inm);
}

Params tile(const std::string& family, int d, int z, int x, int y) {
  return {{"family", family}, {"d", std::to_string(d)}, {"z", std::to_string(z)},
          {"x", std::to_string(x)}, {"y", std::to_string(y)}};
}

Json body(const Reply& r) { return Json::parse(r.body); }

// Live server on an ephemeral port for the lifetime of a test.
struct LiveServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LiveServer(const service::Config& cfg) {
    service::configure(server, cfg);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST(Service, RootTileMatchesDirectRenderAndCli) {
  const Reply r = get("/api/v1/locus-tile", tile("cbo", 2, 0, 0, 0));
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "image/x-portable-pixmap");
  RenderJob job;
  job.plane = CboPlane{2};
  job.viewport = root_viewport(job.plane, service::kTilePx);
  const Image direct = render(job).image;
  EXPECT_EQ(decode_ppm(r.body), direct);

  const std::string out = ::testing::TempDir() + "/svc_root.ppm";
  std::ostringstream so, se;
  ASSERT_EQ(cli::run({"render-locus", "--family", "cbo", "--d", "2", "--px", "256x256", "--out", out}, so, se), 0) << se.str();
  EXPECT_EQ(read_ppm(out), direct);
}

TEST(Service, ZoomOneTilesAssembleRootRender) {
  RenderJob job;
  job.plane = CboPlane{1};
  job.viewport = root_viewport(job.plane, 2 * service::kTilePx);
  const Image big = render(job).image;
  int differing = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const Reply r = get("/api/v1/locus-tile", tile("cbo", 1, 1, x, y));
      ASSERT_EQ(r.status, 200) << r.body;
      const Image t = decode_ppm(r.body);
      for (int row = 0; row < t.height; ++row)
        for (int i = 0; i < t.width; ++i)
          differing += t.at(i, row) != big.at(x * service::kTilePx + i, y * service::kTilePx + row);
    }
  EXPECT_LE(differing, 0.001 * big.width * big.height) << differing;
}

TEST(Service, EtagsAndConditionalRequests) {
  const Params p = tile("multibrot", 1, 2, 1, 1);
  const Reply a = get("/api/v1/locus-tile", p), b = get("/api/v1/locus-tile", p);
  ASSERT_EQ(a.status, 200);
  EXPECT_FALSE(a.etag.empty());
  EXPECT_EQ(a.etag, b.etag);
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(get("/api/v1/locus-tile", p, {}, a.etag).status, 304);
  EXPECT_NE(get("/api/v1/locus-tile", tile("multibrot", 1, 2, 1, 2)).etag, a.etag);
  const Params m{{"d", "1"}, {"a_re", "1.5"}, {"a_im", "0"}};
  const Reply ma = get("/api/v1/membership", m);
  EXPECT_EQ(get("/api/v1/membership", m, {}, ma.etag).status, 304);
}

TEST(Service, StatusCodes) {
  EXPECT_EQ(get("/api/v1/nope", {}).status, 404);
  EXPECT_EQ(get("/api/v1/locus-tile", tile("cbo", 1, 41, 0, 0)).status, 422);
  EXPECT_EQ(get("/api/v1/locus-tile", tile("cbo", 1, 1, 2, 0)).status, 422);
  EXPECT_EQ(get("/api/v1/locus-tile", tile("cbo", 1, 1, 0, -1)).status, 422);
  EXPECT_EQ(get("/api/v1/locus-tile", tile("cbo", 9, 0, 0, 0)).status, 422);
  EXPECT_EQ(get("/api/v1/locus-tile", tile("plaid", 1, 0, 0, 0)).status, 400);
  Params bad_z = tile("cbo", 1, 0, 0, 0);
  bad_z.find("z")->second = "zero";
  EXPECT_EQ(get("/api/v1/locus-tile", bad_z).status, 400);
  EXPECT_EQ(get("/api/v1/locus-tile", {{"family", "cbo"}, {"d", "1"}}).status, 400);
  Params big_iter = tile("cbo", 1, 0, 0, 0);
  big_iter.emplace("max_iter", "100000000");
  EXPECT_EQ(get("/api/v1/locus-tile", big_iter).status, 422);
  EXPECT_EQ(get("/api/v1/ray", {{"d", "1"}, {"map", "unicritical"}, {"c_re", "0"}, {"c_im", "0"}, {"angle", "1/0"}}).status, 400);
  EXPECT_EQ(get("/api/v1/membership", {{"d", "1"}, {"a_re", "zz"}, {"a_im", "0"}}).status, 400);
  EXPECT_EQ(get("/api/v1/membership", {{"d", "1"}, {"a_re", "0"}, {"a_im", "0"}}).status, 422);
  const Reply err = get("/api/v1/center", {{"d", "1"}, {"kind", "cut"}, {"k", "3"}, {"seed_re", "2.6"}, {"seed_im", "0"}});
  EXPECT_EQ(err.status, 422);
  EXPECT_EQ(body(err)["error"]["kind"], "DegenerateOrbit");
}

TEST(Service, TimeBudget) {
  service::Config cfg;
  cfg.time_budget_ms = 1;
  Params p = tile("cbo", 1, 0, 0, 0);
  p.emplace("max_iter", "100000");
  const Reply r = get("/api/v1/locus-tile", p, cfg);
  EXPECT_EQ(r.status, 504);
  EXPECT_EQ(body(r)["error"]["kind"], "TimeBudgetExceeded");
}

TEST(Service, JsonEndpoints) {
  auto outcome = [](const char* re) {
    return body(get("/api/v1/membership", {{"d", "1"}, {"a_re", re}, {"a_im", "0"}}))["outcome"].get<std::string>();
  };
  EXPECT_EQ(outcome("1.5"), "accept");
  EXPECT_EQ(outcome("3"), "reject");
  EXPECT_EQ(outcome("0.5"), "reject");
  EXPECT_EQ(outcome("-1"), "indeterminate");

  const Params base{{"d", "1"}, {"a_re", "1.5"}, {"a_im", "0"}};
  Params r0 = base, r1 = base;
  r0.emplace("angle", "0/1");
  r1.emplace("angle", "1/2");
  const Json t0 = body(get("/api/v1/ray", r0)), t1 = body(get("/api/v1/ray", r1));
  ASSERT_EQ(t0["points"].size(), t1["points"].size());
  for (std::size_t k = 0; k < t0["points"].size(); ++k)
    EXPECT_LT(std::abs(complex_from_json(t0["points"][k]) + complex_from_json(t1["points"][k])), 1e-9);
  EXPECT_EQ(t0["status"], "landed");

  const Json c = body(get("/api/v1/center", {{"d", "1"}, {"period", "2"}, {"seed_re", "2.2"}, {"seed_im", "0"}}));
  EXPECT_NEAR(complex_from_json(c["found"]).real(), 3.0 / std::sqrt(2.0), 1e-12);
  const Json cut = body(get("/api/v1/center", {{"d", "1"}, {"kind", "cut"}, {"k", "2"}, {"seed_re", "2.5"}, {"seed_im", "0"}}));
  EXPECT_NEAR(complex_from_json(cut["found"]).real(), 1.5 * std::sqrt(3.0), 1e-12);

  const Json v = body(get("/api/v1/version", {}));
  EXPECT_EQ(v["api"], "v1");
  EXPECT_EQ(v["version"], service::kLibraryVersion);
  EXPECT_EQ(v["tile_px"], service::kTilePx);

  const Reply dyn = get("/api/v1/dyn-tile", {{"d", "1"}, {"map", "unicritical"}, {"c_re", "-1"}, {"c_im", "0"},
                                             {"z", "0"}, {"x", "0"}, {"y", "0"}});
  ASSERT_EQ(dyn.status, 200) << dyn.body;
  EXPECT_EQ(decode_ppm(dyn.body).width, service::kTilePx);
}

TEST(Service, OverHttp) {
  service::Config cfg;
  cfg.workers = 4;
  LiveServer live(cfg);
  ASSERT_GT(live.port, 0);
  httplib::Client client("127.0.0.1", live.port);
  const std::string path = "/api/v1/locus-tile?family=cbo&d=3&z=1&x=0&y=1&max_iter=300";
  auto first = client.Get(path);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->status, 200);
  EXPECT_EQ(first->get_header_value("Content-Type"), "image/x-portable-pixmap");
  EXPECT_EQ(first->get_header_value("Access-Control-Allow-Origin"), "*");
  const std::string etag = first->get_header_value("ETag");
  ASSERT_FALSE(etag.empty());
  auto again = client.Get(path, {{"If-None-Match", etag}});
  ASSERT_TRUE(again);
  EXPECT_EQ(again->status, 304);
  EXPECT_TRUE(again->body.empty());

  // concurrent identical requests yield byte-identical bodies
  std::vector<std::future<std::string>> jobs;
  for (int i = 0; i < 6; ++i)
    jobs.push_back(std::async(std::launch::async, [&live, path] {
      httplib::Client c("127.0.0.1", live.port);
      auto res = c.Get(path);
      return res && res->status == 200 ? res->body : std::string("failed");
    }));
  for (auto& j : jobs) EXPECT_EQ(j.get(), first->body);

  auto bad = client.Get("/api/v1/locus-tile?family=cbo&d=1&z=99&x=0&y=0");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 422);
  EXPECT_EQ(Json::parse(bad->body)["error"]["kind"], "OutOfRange");
  auto v = client.Get("/api/v1/version");
  ASSERT_TRUE(v);
  EXPECT_EQ(Json::parse(v->body)["api"], "v1");
}

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cbo/cli.hpp"

using namespace cbo;

namespace {

struct CliRun {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out.substr(0, out.find('\n'))); }
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string temp(const std::string& name) { return ::testing::TempDir() + "/" + name; }

}  // namespace

TEST(Cli, MembershipExitCodes) {
  const CliRun acc = run_cli({"membership", "--d", "1", "--a", "1.5,0"});
  EXPECT_EQ(acc.code, 0) << acc.err;
  EXPECT_EQ(acc.json()["outcome"], "accept");
  const CliRun rej = run_cli({"membership", "--d", "1", "--a", "3"});
  EXPECT_EQ(rej.code, 1);
  EXPECT_EQ(rej.json()["reason"], "SideViolation");
  EXPECT_EQ(rej.json()["witness"]["index"], 2);
  const CliRun ind = run_cli({"membership", "--d", "1", "--a", "-1,0"});
  EXPECT_EQ(ind.code, 4);
  EXPECT_EQ(ind.json()["outcome"], "indeterminate");
  EXPECT_EQ(run_cli({"membership", "--d", "2", "--a", "1.875"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({"membership", "--a", "1.5"}).code, 2);
  EXPECT_EQ(run_cli({"membership", "--d", "9", "--a", "1.5"}).code, 2);
  EXPECT_EQ(run_cli({"membership", "--d", "1", "--a", "1.5,zz"}).code, 2);
  EXPECT_EQ(run_cli({"membership", "--d", "1", "--a", "0"}).code, 2);
  EXPECT_EQ(run_cli({"trace-ray", "--d", "1", "--map", "unicritical", "--c", "0", "--angle", "1/0"}).code, 2);
  EXPECT_EQ(run_cli({"render-locus", "--d", "1", "--family", "cbo", "--px", "12", "--out", temp("x.ppm")}).code, 2);
  EXPECT_EQ(run_cli({"no-such-command"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST(Cli, IoErrors) {
  EXPECT_EQ(run_cli({"render-locus", "--d", "1", "--family", "cbo", "--px", "8x8", "--out", "/nonexistent-dir/a.ppm"}).code, 3);
  EXPECT_EQ(run_cli({"render-job", "--job", "/nonexistent-dir/job.json", "--out", temp("j.ppm")}).code, 3);
  EXPECT_EQ(run_cli({"membership", "--config", "/nonexistent-dir/c.ini", "--a", "1.5"}).code, 3);
}

TEST(Cli, ConfigFileWithOverride) {
  const std::string path = temp("membership.ini");
  std::ofstream(path) << "# parameters for a = 3\n"
                      << "d = 1\n"
                      << "a = \"3,0\"\n"
                      << "orbit-len = 150\n";
  const CliRun from_file = run_cli({"membership", "--config", path});
  EXPECT_EQ(from_file.code, 1) << from_file.err;
  EXPECT_EQ(from_file.json()["orbit_len"], 150);
  const CliRun overridden = run_cli({"membership", "--config", path, "--a", "1.5"});
  EXPECT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(overridden.json()["orbit_len"], 150);
  // the resolved configuration is echoed to stderr
  EXPECT_NE(overridden.err.find("# membership"), std::string::npos);
  EXPECT_NE(overridden.err.find("orbit-len=150"), std::string::npos) << overridden.err;
}

TEST(Cli, TraceRay) {
  const CliRun r = run_cli({"trace-ray", "--d", "1", "--map", "unicritical", "--c", "-2", "--angle", "1/3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["status"], "landed");
  EXPECT_NEAR(complex_from_json(r.json()["landing"]).real(), -1.0, 1e-6);
  const CliRun b = run_cli({"trace-ray", "--d", "1", "--a", "1.5", "--angle", "0/1"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_LT(std::abs(complex_from_json(b.json()["landing"])), 1e-9);
}

TEST(Cli, CentersAndMatching) {
  const CliRun fc = run_cli({"find-center", "--d", "1", "--family", "cbo", "--period", "2", "--seed", "2.2,0"});
  ASSERT_EQ(fc.code, 0) << fc.err;
  EXPECT_NEAR(complex_from_json(fc.json()["found"]).real(), 3.0 / std::sqrt(2.0), 1e-12);
  const CliRun uc = run_cli({"find-center", "--d", "1", "--family", "unicritical", "--period", "3", "--seed", "-1.75"});
  ASSERT_EQ(uc.code, 0) << uc.err;
  EXPECT_NEAR(complex_from_json(uc.json()["found"]).real(), -1.754877666246693, 1e-12);
  const CliRun cut = run_cli({"cut-point", "--d", "1", "--k", "2", "--seed", "2.5"});
  ASSERT_EQ(cut.code, 0) << cut.err;
  EXPECT_NEAR(complex_from_json(cut.json()["found"]).real(), 2.598076211353316, 1e-12);
  const CliRun m = run_cli({"match-center", "--d", "1", "--a", "2.453155583645754"});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(m.json()["code"], "RRR|1-2-3|0");
  EXPECT_EQ(m.json()["period"], 3);
  EXPECT_EQ(run_cli({"match-center", "--d", "1", "--a", "3"}).code, 1);
}

TEST(Cli, RenderCommandsAgree) {
  const std::string a = temp("cli_locus.ppm"), b = temp("cli_job.ppm"), job = temp("cli_job.json");
  const CliRun r = run_cli({"render-locus", "--d", "2", "--family", "cbo", "--px", "64x64", "--max-iter", "200", "--out", a});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ofstream(job) << r.json()["job"].dump();
  const CliRun j = run_cli({"render-job", "--job", job, "--out", b});
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_EQ(r.json()["hash"], j.json()["hash"]);
  EXPECT_EQ(read_ppm(a), read_ppm(b));
  RenderJob direct;
  direct.plane = CboPlane{2};
  direct.viewport = root_viewport(direct.plane, 64);
  direct.max_iter = 200;
  EXPECT_EQ(read_ppm(a), render(direct).image);

  const CliRun d = run_cli({"render-dyn", "--d", "1", "--map", "unicritical", "--c", "-1", "--px", "40x30", "--out", a});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(read_ppm(a).width, 40);
  EXPECT_EQ(read_ppm(a).height, 30);
}

TEST(Cli, VerifyAndVersion) {
  const CliRun v = run_cli({"verify", "--filter", "family."});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("PASS family.oddness"), std::string::npos);
  EXPECT_EQ(v.out.find("FAIL"), std::string::npos);
  const CliRun ver = run_cli({"--version"});
  EXPECT_EQ(ver.code, 0);
  EXPECT_NE(ver.out.find(service::kLibraryVersion), std::string::npos);
}

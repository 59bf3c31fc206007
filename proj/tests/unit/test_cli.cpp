#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "iiss/cli.hpp"
#include "iiss/io.hpp"

using namespace iiss;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("iiss_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

cli::Result run(std::vector<std::string> args, const fs::path& out) {
  args.push_back("--out");
  args.push_back(out.string());
  return cli::run(args);
}

}  // namespace

TEST_CASE("certify exit codes follow the verdict", "[cli]") {
  const auto out = scratch("certify");
  auto r = run({"certify", "example-5.2", "--theta", "0.8", "--no-validate"}, out / "a");
  CHECK(r.exit_code == cli::kExitOk);
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].theorem == TheoremCase::Thm2);
  CHECK(fs::exists(out / "a" / "verdict.json"));

  r = run({"certify", "example-5.2", "--theta", "0.9", "--no-validate"}, out / "b");
  CHECK(r.exit_code == cli::kExitInconclusive);

  r = run({"certify", "example-5.2", "--theta", "0.7,0.8", "--theta", "0.9", "--no-validate"},
          out / "c");
  CHECK(r.verdicts.size() == 3);
  CHECK(r.exit_code == cli::kExitInconclusive);
  CHECK(fs::exists(out / "c" / "verdicts.json"));
}

TEST_CASE("certify reports candidate violations with exit 3", "[cli]") {
  const auto out = scratch("violation");
  fs::create_directories(out);
  // φ = s overstates the decay of V = |x| under f = −x/2.
  io::write_text(out / "bad.toml", R"toml(
schema = 1
[system]
n = 1
m = 0
f = ["-x0/2"]
g = ["-x0/2"]
[candidate]
V = "abs(x0)"
phi1 = "s"
phi2 = "s"
chi = "s"
pi = "s"
phi = "s"
psi = "s/2"
[certify]
theta = [1.0]
)toml");
  const auto r = run({"certify", "--config", (out / "bad.toml").string()}, out / "o");
  CHECK(r.exit_code == cli::kExitViolation);
  CHECK(r.text.find("candidate violates b-i ") != std::string::npos);
}

TEST_CASE("simulate writes runs and clips impulses to the horizon", "[cli]") {
  const auto out = scratch("simulate");
  auto r = run({"simulate", "example-5.1", "--seeds", "3", "--horizon", "5"}, out / "a");
  CHECK(r.exit_code == cli::kExitOk);
  for (int i = 0; i < 3; ++i) {
    CHECK(fs::exists(out / "a" / ("traj_00" + std::to_string(i) + ".csv")));
  }
  CHECK(fs::exists(out / "a" / "manifest.json"));

  r = run({"simulate", "example-5.1", "--explicit", "1,2,3", "--horizon", "2"}, out / "b");
  CHECK(r.exit_code == cli::kExitOk);
  const auto jumps = io::read_text(out / "b" / "jumps_000.csv");
  CHECK(jumps.find("\n1,") != std::string::npos);
  CHECK(jumps.find("\n2,") != std::string::npos);
  CHECK(jumps.find("\n3,") == std::string::npos);

  r = run({"simulate", "example-5.2", "--no-impulses", "--horizon", "10", "--plot"}, out / "c");
  CHECK(fs::exists(out / "c" / "plot_000.csv"));

  r = run({"simulate", "example-5.1", "--x0", "1,2"}, out / "d");
  CHECK(r.exit_code == cli::kExitFailure);
}

TEST_CASE("classify reports ADT witnesses and frequency windows", "[cli]") {
  const auto out = scratch("classify");
  auto r = run({"classify", "example2-slow", "--adt", "1,1"}, out / "a");
  CHECK(r.exit_code == cli::kExitViolation);
  CHECK(r.text.find("ADT(1, 1): fail") != std::string::npos);

  r = run({"classify", "--adt-gen", "2,1.25", "--check-freq", "0.8,0.1"}, out / "b");
  CHECK(r.exit_code == cli::kExitOk);
  CHECK(fs::exists(out / "b" / "classify_000.json"));

  r = run({"classify", "example3", "--n0", "2", "--and", "--n0", "8"}, out / "c");
  CHECK(r.exit_code == cli::kExitOk);
  CHECK(fs::exists(out / "c" / "classify_001.json"));
}

TEST_CASE("usage errors exit 1", "[cli]") {
  const auto out = scratch("errors");
  CHECK(cli::run({}).exit_code == cli::kExitFailure);
  CHECK(run({"certify"}, out).exit_code == cli::kExitFailure);
  CHECK(run({"certify", "example-7"}, out).exit_code == cli::kExitFailure);
  CHECK(run({"reproduce", "nothing"}, out).exit_code == cli::kExitFailure);
  CHECK(run({"classify", "example1", "--adt", "1"}, out).exit_code == cli::kExitFailure);
  CHECK(run({"simulate", "example-5.1", "--tolerance-profile", "loose"}, out).exit_code ==
        cli::kExitFailure);
  CHECK(cli::run({"--help"}).exit_code == cli::kExitOk);
}

TEST_CASE("output directory precedence", "[cli]") {
  config::RunConfig cfg;
  cfg.output_dir = "from-config";
  cli::GlobalOptions g;
  ::unsetenv(cli::kOutDirEnv);
  CHECK(cli::resolve_out_dir(g, cfg) == "from-config");
  ::setenv(cli::kOutDirEnv, "from-env", 1);
  CHECK(cli::resolve_out_dir(g, cfg) == "from-env");
  g.out = "from-flag";
  CHECK(cli::resolve_out_dir(g, cfg) == "from-flag");
  ::unsetenv(cli::kOutDirEnv);
}

TEST_CASE("reproduce runs the sequence bundles", "[cli]") {
  const auto out = scratch("reproduce");
  for (const std::string name : {"lemma1-suite", "example-sequences"}) {
    const auto r = run({"reproduce", name, "--threads", "2"}, out);
    CHECK(r.exit_code == cli::kExitOk);
    CHECK(r.text.find("[FAIL]") == std::string::npos);
    CHECK(fs::exists(out / name / "summary.json"));
  }
}

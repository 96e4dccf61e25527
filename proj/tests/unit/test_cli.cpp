#include "rlasso/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace rlasso;

namespace {

namespace fs = std::filesystem;

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "rlasso_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(RLASSO_CLI_PATH) + " -q " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file;
  cmd += " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("generate, solve and verify a seeded instance") {
  REQUIRE(run("generate --n 300 --p 64 --k 4 --s 60 --sigma 0.05 --seed 3 -o " + path("inst.json")) == 0);
  REQUIRE(run("solve -i " + path("inst.json") + " -o " + path("sol.json")) == 0);
  CHECK(run("verify -i " + path("inst.json") + " -s " + path("sol.json") + " -o " + path("report.json")) == 0);
  const Json report = read_json(path("report.json"));
  CHECK(report["schema"] == "rlasso.verify");
  CHECK(report["certified"] == true);
  CHECK(report["kkt"]["stationarity_residual"].get<double>() <= 1e-9);
  CHECK(report["witness"].is_object());
  CHECK(report["metrics"].is_object());
  const Json sol = read_json(path("sol.json"));
  CHECK(sol["schema"] == "rlasso.solution");
  CHECK(sol["converged"] == true);
  CHECK(sol["algorithm"] == "block-coordinate");
}

TEST_CASE("verify rejects a tampered solution with exit code 4") {
  Json sol = read_json(path("sol.json"));
  std::vector<double> beta = decode_f64(sol["beta_hat"]["data"].get<std::string>());
  beta[0] += 0.25;
  sol["beta_hat"]["data"] = encode_f64(beta);
  write_json(sol, path("tampered.json"));
  CHECK(run("verify -i " + path("inst.json") + " -s " + path("tampered.json")) == 4);
}

TEST_CASE("solve reads stdin and honours explicit penalties") {
  const std::string cmd = "solve --lambda-beta 0.05 --lambda-e 0.02 --algorithm proximal-gradient --tol-kkt 1e-7 < " +
                          path("inst.json");
  REQUIRE(run(cmd, path("sol_pg.json")) == 0);
  const Json sol = read_json(path("sol_pg.json"));
  CHECK(sol["lambda_beta"].get<double>() == 0.05);
  CHECK(sol["algorithm"] == "proximal-gradient");
}

TEST_CASE("params prints unit covariance scalars for an identity design") {
  REQUIRE(run("params -i " + path("inst.json"), path("params.json")) == 0);
  const Json doc = read_json(path("params.json"));
  CHECK(doc["schema"] == "rlasso.params");
  for (const char* key : {"C_min", "C_max", "D_plus_max", "D_minus_max", "rho_u", "rho_l"}) {
    CHECK(doc["covariance"][key].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(doc["covariance"]["incoherence_value"].get<double>() == 0);
  CHECK(doc["lambdas"]["simulation"]["lambda_beta"].get<double>() > 0);
  CHECK(doc["lambdas"]["theorem1"].is_object());
  REQUIRE(run("params --n 1068 --p 128 --k 8 --sigma 0.1", path("params2.json")) == 0);
  const Json flags = read_json(path("params2.json"));
  CHECK(flags["inputs"]["s"] == 534);
}

TEST_CASE("sweep writes results, curves and reproducible instances") {
  const std::string out = path("sweep");
  REQUIRE(run("sweep -o " + out + " --p 64 --regime sublinear --theta 0.5 --theta 2 --trials 3") == 0);
  CHECK(fs::exists(out + "/sweep.json"));
  CHECK(fs::exists(out + "/curve_p64_sublinear.csv"));
  CHECK(fs::exists(out + "/curves.svg"));
  REQUIRE(run("report -r " + out + "/sweep.json -o " + path("report") + " --format csv") == 0);
  std::ifstream a(out + "/curve_p64_sublinear.csv"), b(path("report") + "/curve_p64_sublinear.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(run("sweep -o " + out + " --p 64 --regime sublinear --theta 0.5 --theta 2 --trials 3 --dump-instance " +
            path("dumped.json") + " --dump-cell 1 --dump-trial 2") == 0);
  CHECK(read_json(path("dumped.json"))["schema"] == "rlasso.instance");

  write_json(Json{{"trials", 2}, {"bogus", 1}}, path("bad_config.json"));
  CHECK(run("sweep -c " + path("bad_config.json") + " -o " + out) == 2);
}

TEST_CASE("bad invocations exit with code 2") {
  CHECK(run("solve --no-such-flag") == 2);
  CHECK(run("") == 2);
  CHECK(run("verify -i " + path("missing.json") + " -s " + path("sol.json")) == 2);
  std::ofstream(path("garbage.json")) << "{not json";
  CHECK(run("solve -i " + path("garbage.json")) == 2);
  CHECK(run("generate --p 10 --k 20 --n 50") == 2);
  CHECK(run("verify -i " + path("inst.json") + " -s " + path("inst.json")) == 2);
}

#include "alab/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

using namespace alab;
using namespace alab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alab_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

const json kUniformJson = {{"kind", "uniform"}, {"a", 0.0}, {"b", 1.0}};

json lattice_config(int d, int L, double lambda, std::size_t n) {
  return {{"model", {{"d", d}, {"L", L}, {"lambda", lambda}, {"distribution", kUniformJson}}}, {"run", {{"n", n}}}};
}

// Small configurations that run in a few seconds, with the CSV files each kind writes.
std::map<std::string, std::pair<json, std::map<std::string, std::string>>> small_runs() {
  std::map<std::string, std::pair<json, std::map<std::string, std::string>>> runs;
  runs["spectrum-scan"] = {lattice_config(1, 5, 1.0, 3),
                           {{"spectrum.csv", "L[lattice],min_eig[energy],max_eig[energy],predicted_lo[energy],predicted_hi[energy],all_inside"}}};
  runs["fmm-decay"] = {lattice_config(1, 6, 8.0, 300), {{"decay.csv", "distance[lattice],mean_abs_g_s[energy^-s],stderr[energy^-s],n,s"}}};
  runs["decoupling-scan"] = {json{{"model", {{"distribution", kUniformJson}}}},
                             {{"decoupling.csv", "eta_re[energy],eta_im[energy],beta_re[energy],beta_im[energy],ratio"}}};
  runs["second-moment"] = {lattice_config(1, 0, 1.0, 1000),
                           {{"second_moment.csv",
                             "epsilon[energy],E[energy],mean_abs_g_2[energy^-2],stderr_abs_g_2[energy^-2],"
                             "mean_abs_g_s[energy^-s],stderr_abs_g_s[energy^-s],eps_times_mean_abs_g_2[energy^-1],"
                             "ratio[energy^(s-1)],ratio_stderr[energy^(s-1)]"}}};
  runs["dynloc"] = {lattice_config(1, 6, 3.0, 200), {{"dynloc.csv", "distance[lattice],mean_sup_kernel,stderr,mean_sup_kernel_refined"}}};
  runs["position-moment"] = {lattice_config(1, 8, 5.0, 5), {{"moment.csv", "t[time],mean_moment[lattice^p]"}}};
  runs["rage"] = {lattice_config(1, 8, 5.0, 5), {{"rage.csv", "R[lattice],escape_mass,stderr"}}};
  json lif = lattice_config(1, 4, 0.3, 50);
  lif["method"] = {{"L_list", {2, 4}}};
  runs["lifshitz"] = {lif, {{"lifshitz.csv", "L[lattice],threshold[energy],successes,n,tail_probability,stderr,upper_bound"}}};
  runs["ids"] = {lattice_config(1, 5, 1.0, 5), {{"ids.csv", "E[energy],N[per_site]"}}};
  runs["level-stats"] = {lattice_config(1, 100, 5.0, 10), {{"spacings.csv", "spacing[mean_spacing]"}}};
  runs["rankone-verify"] = {json{{"method", {{"instances", 5}, {"identity_instances", 2}}}, {"run", {{"n", 1}}}},
                            {{"intertwine.csv", "instance,v[energy],slack[energy],passed,flagged"},
                             {"derivative.csv", "instance,v[energy],k,numeric,overlap,difference"},
                             {"flow.csv", "v[energy],E_1[energy],E_2[energy],E_3[energy],E_4[energy],E_5[energy],E_6[energy]"},
                             {"identity.csv", "instance,lo[energy],hi[energy],lhs,rhs,relative_gap"}}};
  runs["krein-verify"] = {lattice_config(1, 3, 1.0, 3), {{"krein.csv", "realization,max_difference[energy^-1],im_a_top_eigenvalue[energy]"}}};
  runs["geometric-identity"] = {lattice_config(1, 4, 1.0, 3),
                                {{"geometric.csv", "realization,residual[energy^-1],far_leading_terms[energy^-1]"}}};
  return runs;
}

int run_binary(const std::string& args) {
  const char* bin = std::getenv("ALAB_BINARY");
  REQUIRE(bin != nullptr);
  const int status = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("every kind has a small run") {
  CHECK(small_runs().size() == experiment_kinds().size());
}

TEST_CASE("defaults are filled in and recorded") {
  const ExperimentConfig c = resolve_config("fmm-decay", lattice_config(2, 4, 10.0, 50));
  CHECK(c.model.d == 2);
  CHECK(c.method["s"] == 0.5);
  CHECK(c.method["distances"].size() == 5);
  CHECK(c.method["x0"] == json::array({0, 0}));
  CHECK(c.run.seed == 1);
  CHECK(c.run.workers == 1);
  bool noted = false;
  for (const auto& d : c.defaults_applied) noted = noted || d.rfind("method.s = ", 0) == 0;
  CHECK(noted);
  CHECK(c.resolved["model"]["distribution"]["kind"] == "uniform");
}

TEST_CASE("malformed configurations are rejected") {
  json typo = lattice_config(1, 4, 1.0, 5);
  typo["model"]["lamda"] = 2.0;
  CHECK_THROWS_WITH_AS(resolve_config("spectrum-scan", typo), doctest::Contains("model.lamda"), ConfigError);

  json missing = lattice_config(1, 4, 1.0, 5);
  missing["model"].erase("L");
  CHECK_THROWS_WITH_AS(resolve_config("spectrum-scan", missing), doctest::Contains("model.L"), ConfigError);

  json wrong_type = lattice_config(1, 4, 1.0, 5);
  wrong_type["run"]["n"] = "many";
  CHECK_THROWS_AS(resolve_config("spectrum-scan", wrong_type), ConfigError);

  json atoms = lattice_config(1, 4, 1.0, 5);
  atoms["model"]["distribution"] = {{"kind", "bernoulli"}, {"p", 0.3}};
  CHECK_NOTHROW(resolve_config("spectrum-scan", atoms));
  CHECK_THROWS_WITH_AS(resolve_config("fmm-decay", atoms), doctest::Contains("no density"), ConfigError);

  CHECK_THROWS_AS(resolve_config("no-such-kind", lattice_config(1, 4, 1.0, 5)), ConfigError);
  json site = lattice_config(2, 4, 1.0, 5);
  site["method"] = {{"x0", {0}}};
  CHECK_THROWS_AS(resolve_config("fmm-decay", site), ConfigError);
  CHECK_THROWS_AS(parse_distribution(json{{"kind", "gauss"}}), ConfigError);
}

TEST_CASE("overrides set dotted paths") {
  json raw = lattice_config(1, 4, 1.0, 5);
  apply_override(raw, "model.lambda=2.5");
  apply_override(raw, "method.L_list=[2,3]");
  apply_override(raw, "run.out=some/dir");
  CHECK(raw["model"]["lambda"] == 2.5);
  CHECK(raw["method"]["L_list"] == json::array({2, 3}));
  CHECK(raw["run"]["out"] == "some/dir");
  CHECK_THROWS_AS(apply_override(raw, "model.lambda"), ConfigError);
}

TEST_CASE("hashes") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  json a = lattice_config(1, 4, 1.0, 5);
  json b = a;
  b["run"]["workers"] = 8;
  b["run"]["out"] = "elsewhere";
  CHECK(config_hash(resolve_config("spectrum-scan", a)) == config_hash(resolve_config("spectrum-scan", b)));
  b["run"]["seed"] = 2;
  CHECK(config_hash(resolve_config("spectrum-scan", a)) != config_hash(resolve_config("spectrum-scan", b)));
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("every kind writes its CSV headers and a summary") {
  for (const auto& [kind, spec] : small_runs()) {
    CAPTURE(kind);
    const fs::path dir = scratch(kind);
    json raw = spec.first;
    raw["run"]["out"] = dir.string();
    const json summary = run_experiment(resolve_config(kind, raw));
    CHECK(summary["kind"] == kind);
    CHECK(summary["artifact_version"] == kArtifactVersion);
    CHECK(summary["config_hash"].get<std::string>().size() == 40);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "resolved_config.json"));
    for (const auto& [file, header] : spec.second) CHECK(first_line(dir / file) == header);
    fs::remove_all(dir);
  }
}

TEST_CASE("spectrum scan and rank-one runs pass their audits") {
  const fs::path dir = scratch("audits");
  json raw = lattice_config(1, 40, 0.0, 2);
  raw["run"]["out"] = dir.string();
  const json s = run_experiment(resolve_config("spectrum-scan", raw));
  CHECK(s["all_audits_passed"] == true);
  CHECK(s["results"]["rows"][0]["min_eig"].get<double>() == doctest::Approx(-2.0).epsilon(1e-2));
  json r = small_runs().at("rankone-verify").first;
  r["run"]["out"] = dir.string();
  CHECK(run_experiment(resolve_config("rankone-verify", r))["all_audits_passed"] == true);
  fs::remove_all(dir);
}

TEST_CASE("CSV output does not depend on the worker count") {
  auto runs = small_runs();
  for (const std::string kind : {"fmm-decay", "level-stats", "lifshitz", "rage", "dynloc"}) {
    CAPTURE(kind);
    json raw = runs[kind].first;
    const fs::path one = scratch(kind + "_w1");
    const fs::path eight = scratch(kind + "_w8");
    raw["run"]["out"] = one.string();
    raw["run"]["workers"] = 1;
    run_experiment(resolve_config(kind, raw));
    raw["run"]["out"] = eight.string();
    raw["run"]["workers"] = 8;
    run_experiment(resolve_config(kind, raw));
    for (const auto& [file, header] : runs[kind].second) CHECK(slurp(one / file) == slurp(eight / file));
    fs::remove_all(one);
    fs::remove_all(eight);
  }
}

TEST_CASE("exit codes of the binary") {
  const fs::path dir = scratch("exit");
  const fs::path good = dir / "good.json";
  std::ofstream(good) << lattice_config(1, 3, 1.0, 2).dump();
  const fs::path bad = dir / "bad.json";
  json typo = lattice_config(1, 3, 1.0, 2);
  typo["model"]["lamda"] = 1.0;
  std::ofstream(bad) << typo.dump();
  const std::string out = " --out " + (dir / "out").string();
  CHECK(run_binary("spectrum-scan --config " + good.string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "spectrum.csv"));
  CHECK(run_binary("spectrum-scan --config " + bad.string() + out) == 2);
  CHECK(run_binary("spectrum-scan --config " + good.string() + " --set model.L=-1" + out) == 2);
  CHECK(run_binary("spectrum-scan" + out) == 2);
  // Too few levels in the window for a KS test.
  CHECK(run_binary("level-stats --config " + good.string() + " --set run.n=1" + out) == 3);
  fs::remove_all(dir);
}

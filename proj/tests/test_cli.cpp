#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qdob/cli_runner.hpp"
#include "qdob/suite.hpp"

using namespace qdob;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "qdob_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

json analyze_config() {
  return json{{"kind", "channel_analyze"},
              {"channel", {{"name", "amplitude_damping"}, {"gamma", 0.36}}},
              {"restarts", 24}};
}

}  // namespace

TEST_CASE("config validation diagnostics") {
  CHECK(cli::validate_config(analyze_config()).empty());

  json missing_seed{{"kind", "cocycle_lyapunov"},
                    {"base", {{"kind", "iid"}, {"atoms", json::array()}}},
                    {"n", 10},
                    {"samples", 4}};
  auto diags = cli::validate_config(missing_seed);
  bool found = false;
  for (const auto& d : diags)
    if (d.find("seed") != std::string::npos) found = true;
  CHECK(found);

  json bad_gamma = analyze_config();
  bad_gamma["channel"]["gamma"] = -0.2;
  auto range_diags = cli::validate_config(bad_gamma);
  REQUIRE_FALSE(range_diags.empty());
  CHECK(range_diags.front().find("gamma") != std::string::npos);

  json unknown{{"kind", "so_new_it_does_not_exist"}};
  CHECK_FALSE(cli::validate_config(unknown).empty());

  json missing_file = analyze_config();
  missing_file.erase("channel");
  missing_file["channel_file"] = "/nonexistent/channel.json";
  auto file_diags = cli::validate_config(missing_file);
  REQUIRE_FALSE(file_diags.empty());
  CHECK(file_diags.front().find("missing") != std::string::npos);
}

TEST_CASE("channel analyze run reports the expected contraction") {
  auto out = scratch_dir() / "analyze";
  json report = cli::run_experiment(analyze_config(), out.string());
  CHECK(report.at("results").at("kappa_tr").at("value").get<double>() ==
        doctest::Approx(0.8).epsilon(1e-8));
  CHECK(cli::report_all_passed(report));
  CHECK(report.at("input_hash").is_string());
}

TEST_CASE("runs are deterministic modulo timing") {
  json config{{"kind", "cocycle_lyapunov"},
              {"base",
               {{"kind", "iid"},
                {"d", 2},
                {"seed", 7},
                {"atoms",
                 json::array({{{"weight", 0.5},
                               {"channel", {{"name", "amplitude_damping"}, {"gamma", 0.3}}}},
                              {{"weight", 0.5},
                               {"channel", {{"name", "amplitude_damping"}, {"gamma", 0.6}}}}})}}},
              {"n", 8},
              {"samples", 12},
              {"seed", 99}};
  auto out1 = scratch_dir() / "det1";
  auto out2 = scratch_dir() / "det2";
  json r1 = cli::run_experiment(config, out1.string());
  json r2 = cli::run_experiment(config, out2.string());
  r1.erase("timing");
  r2.erase("timing");
  CHECK(r1.dump() == r2.dump());
}

TEST_CASE("unitary chain limit reports no memory loss with failing check") {
  // a chain of identical unitary tensors never contracts
  json site = json::array();
  json u = json::array();
  // 2x2 unitary [[0,1],[1,0]]
  u.push_back(json::array({0.0, 0.0}));
  u.push_back(json::array({1.0, 0.0}));
  u.push_back(json::array({1.0, 0.0}));
  u.push_back(json::array({0.0, 0.0}));
  site.push_back(u);
  json sites = json::array();
  for (int k = 0; k < 12; ++k) sites.push_back(site);
  json config{{"kind", "mps_limit"},
              {"chain", {{"d_K", 1}, {"D_H", 2}, {"sites", sites}}},
              {"observable",
               {{"support", json::array({1, 1})},
                {"matrix", json::array({json::array({1.0, 0.0})})}}},
              {"tol", 1e-6},
              {"max_n", 12}};
  CHECK(cli::validate_config(config).empty());
  auto out = scratch_dir() / "unitary_limit";
  json report = cli::run_experiment(config, out.string());
  CHECK_FALSE(cli::report_all_passed(report));
  std::string finding = report.at("results").value("finding", "");
  CHECK(finding.find("no memory loss") != std::string::npos);
}

TEST_CASE("exit codes through the real argv entry point") {
  auto dir = scratch_dir();
  auto config_path = dir / "analyze.json";
  {
    std::ofstream os(config_path);
    os << analyze_config().dump();
  }
  auto out = dir / "cli_out";

  std::string run = "run", validate = "validate", cfg = config_path.string();
  std::string out_flag = "--out", out_val = out.string();
  {
    char* argv[] = {const_cast<char*>("qdob"), const_cast<char*>(validate.c_str()),
                    const_cast<char*>(cfg.c_str())};
    CHECK(cli::run_main(3, argv) == 0);
  }
  {
    char* argv[] = {const_cast<char*>("qdob"), const_cast<char*>(run.c_str()),
                    const_cast<char*>(cfg.c_str()), const_cast<char*>(out_flag.c_str()),
                    const_cast<char*>(out_val.c_str())};
    CHECK(cli::run_main(5, argv) == 0);
    CHECK(std::filesystem::exists(out / "report.json"));
  }
  {
    std::string missing = (dir / "missing.json").string();
    char* argv[] = {const_cast<char*>("qdob"), const_cast<char*>(run.c_str()),
                    const_cast<char*>(missing.c_str())};
    CHECK(cli::run_main(3, argv) == 1);
  }

  // a failed inequality exits with 2: unitary tensors give no memory loss
  json u = json::array({json::array({0.0, 0.0}), json::array({1.0, 0.0}),
                        json::array({1.0, 0.0}), json::array({0.0, 0.0})});
  json sites = json::array();
  for (int k = 0; k < 10; ++k) sites.push_back(json::array({u}));
  json unitary_cfg{{"kind", "mps_limit"},
                   {"chain", {{"d_K", 1}, {"D_H", 2}, {"sites", sites}}},
                   {"observable",
                    {{"support", json::array({1, 1})},
                     {"matrix", json::array({json::array({1.0, 0.0})})}}},
                   {"max_n", 10}};
  auto ucfg_path = dir / "unitary.json";
  {
    std::ofstream os(ucfg_path);
    os << unitary_cfg.dump();
  }
  std::string ucfg = ucfg_path.string();
  std::string uout = (dir / "uout").string();
  {
    char* argv[] = {const_cast<char*>("qdob"), const_cast<char*>(run.c_str()),
                    const_cast<char*>(ucfg.c_str()), const_cast<char*>(out_flag.c_str()),
                    const_cast<char*>(uout.c_str())};
    CHECK(cli::run_main(5, argv) == 2);
  }
}

TEST_CASE("suite filter narrows to matching tags") {
  auto results = run_paper_suite("diamond");
  REQUIRE(results.size() == 1);
  CHECK(results.front().tag == "diamond-witness-unity");
  CHECK(results.front().pass);
}

TEST_CASE("product sweep experiment") {
  json config{
      {"kind", "product_sweep"},
      {"sequence",
       {{"d", 2},
        {"rule",
         {{"name", "constant"},
          {"channels",
           json::array({json{{"name", "amplitude_damping"}, {"gamma", 0.36}}})}}}}},
      {"windows", json::array({json::array({0, 1}), json::array({0, 3})})}};
  CHECK(cli::validate_config(config).empty());
  auto out = scratch_dir() / "sweep";
  json report = cli::run_experiment(config, out.string());
  CHECK(cli::report_all_passed(report));
  auto windows = report.at("results").at("windows");
  CHECK(windows[0].at("kappa").get<double>() == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(windows[1].at("kappa").get<double>() == doctest::Approx(0.512).epsilon(1e-8));
  CHECK(std::filesystem::exists(out / "product_sweep.csv"));
}

#include "qdob/cli_runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qdob/coefficients.hpp"
#include "qdob/contraction.hpp"
#include "qdob/mps.hpp"
#include "qdob/parallel.hpp"
#include "qdob/products.hpp"
#include "qdob/random_cocycle.hpp"
#include "qdob/suite.hpp"

namespace qdob::cli {

namespace {

const std::vector<std::string> kKinds = {
    "channel_analyze", "product_sweep",    "cocycle_lyapunov", "cocycle_annealed",
    "mps_limit",       "mps_correlations", "random_mps"};

bool is_stochastic_kind(const std::string& kind) {
  return kind == "cocycle_lyapunov" || kind == "cocycle_annealed" || kind == "random_mps";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(const json& config) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

void add_check(json& report, const std::string& tag, bool pass, const std::string& detail) {
  report["checks"].push_back({{"tag", tag}, {"pass", pass}, {"detail", detail}});
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  os << header << "\n";
  os.precision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

// inline any "<key>_file" references
json resolve_files(const json& config) {
  json out = config;
  std::vector<std::string> keys;
  for (auto it = out.begin(); it != out.end(); ++it) keys.push_back(it.key());
  for (const std::string& key : keys) {
    if (key.size() > 5 && key.substr(key.size() - 5) == "_file") {
      std::string path = out.at(key).get<std::string>();
      std::ifstream in(path);
      if (!in) throw std::invalid_argument("referenced file does not exist: " + path);
      json loaded = json::parse(in);
      out[key.substr(0, key.size() - 5)] = loaded;
      out.erase(key);
    }
  }
  return out;
}

json run_channel_analyze(const json& config, const std::string& out_dir) {
  QuantumChannel phi = [&] {
    const json& spec = config.at("channel");
    ChannelLabel label = label_from_json(spec);
    if (label.stochastic()) {
      RngStream rng(config.value("seed", 0ULL), 0xC11A);
      return realize(label, rng);
    }
    return make_named(label);
  }();
  std::uint64_t seed = config.value("seed", static_cast<std::uint64_t>(kDefaultSeed));
  int restarts = config.value("restarts", 64);

  json report;
  report["checks"] = json::array();
  ContractionReport kappa = kappa_tr(phi, restarts, 1e-8, seed);
  double s0v = s0(phi);
  MinorizationCertificate md = alpha_md(phi, 192, restarts, seed);
  DoeblinResult doeb = alpha_doeblin(phi);
  double diamond = diamond_witness(phi, seed);
  auto [strict_flag, strict_a] = is_strictly_positive(phi, restarts, seed);

  json results;
  results["d"] = phi.dim();
  results["kappa_tr"] = {{"value", kappa.value},
                         {"mode", kappa.mode == KappaMode::exact_closed_form ? "exact_closed_form"
                                                                             : "optimized_lower"}};
  results["kappa_upper_aggregate"] = kappa_upper_aggregate(phi, seed);
  results["s0"] = s0v;
  results["alpha_md"] = {{"value", md.alpha}, {"verified", md.verified}};
  results["alpha_doeblin"] = {{"value", doeb.alpha}, {"approximate", doeb.approximate}};
  results["diamond_witness"] = diamond;
  results["bistochastic"] = is_bistochastic(phi);
  results["strictly_positive"] = {{"flag", strict_flag}, {"a", strict_a}};
  report["results"] = results;

  add_check(report, "md-upper-bound", kappa.value <= 1.0 - md.alpha + 1e-5,
            "kappa=" + std::to_string(kappa.value) + " 1-alpha_md=" + std::to_string(1.0 - md.alpha));
  add_check(report, "doeblin-below-md", doeb.alpha <= md.alpha + 1e-5,
            "doeb=" + std::to_string(doeb.alpha) + " md=" + std::to_string(md.alpha));
  add_check(report, "hs-upper-bound",
            kappa.value <= std::sqrt(static_cast<double>(phi.dim())) * s0v + 1e-6,
            "sqrt(d) s0=" + std::to_string(std::sqrt(static_cast<double>(phi.dim())) * s0v));
  add_check(report, "diamond-unity", std::abs(diamond - 1.0) <= 1e-12,
            "ratio=" + std::to_string(diamond));
  (void)out_dir;
  return report;
}

json run_product_sweep(const json& config, const std::string& out_dir) {
  ChannelSequence seq = sequence_from_json(config.at("sequence"));
  std::uint64_t seed = config.value("seed", static_cast<std::uint64_t>(kDefaultSeed));
  DensityMatrix tau = config.contains("tau")
                          ? DensityMatrix::make(matrix_from_json(config.at("tau"), seq.dim(), seq.dim()))
                          : maximally_mixed(seq.dim());
  DensityMatrix tau2 = maximally_mixed(seq.dim());

  json report;
  report["checks"] = json::array();
  json windows = json::array();
  std::vector<std::vector<double>> rows;
  bool all_ok = true;
  for (const json& w : config.at("windows")) {
    std::int64_t s = w[0].get<std::int64_t>();
    std::int64_t t = w[1].get<std::int64_t>();
    ForwardReplacementReport rep = forward_replacement_check(seq, s, t, tau, tau2, 48, seed);
    windows.push_back({{"s", s},
                       {"t", t},
                       {"kappa", rep.kappa.value},
                       {"dist", rep.dist},
                       {"sandwich_ok", rep.sandwich_ok},
                       {"center_drift", rep.center_drift},
                       {"drift_ok", rep.drift_ok}});
    rows.push_back({static_cast<double>(s), static_cast<double>(t), rep.kappa.value, rep.dist,
                    rep.center_drift});
    all_ok = all_ok && rep.sandwich_ok && rep.drift_ok;
  }
  report["results"] = {{"windows", windows}};
  add_check(report, "replacement-sandwich", all_ok, "all windows within the factor-4 envelope");
  write_csv(out_dir + "/product_sweep.csv", "s,t,kappa,dist,center_drift", rows);
  return report;
}

json run_cocycle_lyapunov(const json& config, const std::string& out_dir) {
  EnvironmentBase base = base_from_json(config.at("base"));
  int n = config.at("n").get<int>();
  int samples = config.at("samples").get<int>();
  std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  LyapunovEstimate est = lyapunov_estimate(base, n, samples, seed);

  json report;
  report["checks"] = json::array();
  json results;
  results["n"] = est.n;
  results["samples"] = est.samples;
  results["minus_inf_count"] = est.minus_inf_count;
  results["exact_replacement"] = est.minus_inf;
  if (est.minus_inf) {
    results["mean_log_kappa_over_n"] = "-inf";
  } else {
    results["mean_log_kappa_over_n"] = est.mean_log_kappa_over_n;
    results["ci_halfwidth"] = est.ci_halfwidth;
  }
  report["results"] = results;

  std::vector<std::vector<double>> rows;
  for (const auto& [k, v] : est.kingman_curve)
    if (!std::isinf(v)) rows.push_back({static_cast<double>(k), v});
  write_csv(out_dir + "/kingman_curve.csv", "n,mean_log_kappa_over_n", rows);

  bool nonpositive = est.minus_inf || est.mean_log_kappa_over_n <= 1e-9;
  add_check(report, "exponent-nonpositive", nonpositive, "subadditive limit cannot be positive");
  return report;
}

json run_cocycle_annealed(const json& config, const std::string& out_dir) {
  EnvironmentBase base = base_from_json(config.at("base"));
  std::vector<int> n_list = config.at("n_list").get<std::vector<int>>();
  int samples = config.at("samples").get<int>();
  std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  AnnealedReport rep = annealed_mean_kappa(base, n_list, samples, seed);

  json report;
  report["checks"] = json::array();
  json table = json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.table) {
    table.push_back({{"n", r.n}, {"mean", r.mean}, {"stderr", r.stderr_}});
    rows.push_back({static_cast<double>(r.n), r.mean, r.stderr_});
  }
  report["results"] = {{"table", table},
                       {"fit_valid", rep.fit_valid},
                       {"fit_eta", rep.fit_eta},
                       {"fit_log_a", rep.fit_log_a}};
  write_csv(out_dir + "/annealed.csv", "n,mean,stderr", rows);
  add_check(report, "annealed-recursion", rep.recursion_ok,
            "block recursion within combined Monte Carlo noise");
  return report;
}

json run_mps_limit(const json& config, const std::string& out_dir) {
  MpsChain chain = chain_from_json(config.at("chain"));
  LocalObservable obs = observable_from_json(config.at("observable"), chain.physical_dim());
  double tol = config.value("tol", 1e-6);
  int max_n = config.value("max_n", chain.n_max());
  LimitReport rep = thermodynamic_limit(chain, obs, tol, max_n);

  json report;
  report["checks"] = json::array();
  json results;
  results["converged"] = rep.converged;
  results["n_used"] = rep.n_used;
  results["kappa_tail"] = rep.kappa_tail;
  if (rep.converged) {
    results["phi_inf"] = {rep.phi_inf.real(), rep.phi_inf.imag()};
    results["error_bound"] = rep.error_bound;
    results["boundary"] = matrix_to_json(rep.boundary.rho);
  } else {
    results["finding"] = "no memory loss in the right tail at this depth";
  }
  report["results"] = results;

  std::vector<std::vector<double>> rows;
  bool envelopes = rep.converged;
  for (const auto& h : rep.history) {
    rows.push_back({static_cast<double>(h.n), h.phi_n.real(), h.phi_n.imag(), h.phi_err,
                    h.z_abs_err, h.kappa_tail});
    envelopes = envelopes && h.z_bound_ok && h.phi_bound_ok;
  }
  write_csv(out_dir + "/mps_limit.csv", "n,phi_re,phi_im,phi_err,z_err,kappa_tail", rows);

  add_check(report, "tail-memory-loss", rep.converged,
            rep.converged ? "tail contraction reached tolerance" : "no memory loss");
  add_check(report, "normalization-envelope", envelopes, "|Z_n - 1| within 4 D^2 kappa");
  add_check(report, "boundary-recursion", !rep.converged || rep.boundary_recursion_ok,
            "rho_r = Phi_r(rho_{r+1}) along the block");
  return report;
}

json run_mps_correlations(const json& config, const std::string& out_dir) {
  MpsChain chain = chain_from_json(config.at("chain"));
  LocalObservable a = observable_from_json(config.at("A"), chain.physical_dim());
  LocalObservable b = observable_from_json(config.at("B"), chain.physical_dim());

  json report;
  report["checks"] = json::array();
  std::vector<std::vector<double>> rows;
  json pairs = json::array();
  bool all_pass = true;

  auto run_pair = [&](const LocalObservable& right, int gap) {
    CorrelationReport rep = correlation_bound_check(chain, a, right);
    pairs.push_back({{"gap", gap},
                     {"connected", rep.connected},
                     {"bound", rep.bound},
                     {"pass", rep.pass}});
    rows.push_back({static_cast<double>(gap), rep.connected, rep.bound, rep.pass ? 1.0 : 0.0});
    all_pass = all_pass && rep.pass;
  };

  if (config.contains("gaps")) {
    int len = b.b - b.a;
    for (const json& g : config.at("gaps")) {
      int gap = g.get<int>();
      LocalObservable shifted{a.b + 1 + gap, a.b + 1 + gap + len, b.x};
      run_pair(shifted, gap);
    }
  } else {
    run_pair(b, b.a - a.b - 1);
  }
  report["results"] = {{"pairs", pairs}};
  write_csv(out_dir + "/correlations.csv", "gap,connected,bound,pass", rows);
  add_check(report, "clustering-bound", all_pass, "connected correlations under 4|A||B|kappa");
  return report;
}

json run_random_mps(const json& config, const std::string& out_dir) {
  EnvironmentBase base = base_from_json(config.at("base"));
  int m = config.at("m").get<int>();
  LocalObservable obs = observable_from_json(config.at("observable"), 0 /*unused*/);
  int n_max = config.at("n_max").get<int>();
  int samples = config.at("samples").get<int>();
  std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  RandomMpsReport rep = random_mps_experiment(base, m, obs, n_max, samples, seed);

  json report;
  report["checks"] = json::array();
  json results;
  results["lambda_hat_mean"] = std::isinf(rep.lambda_hat_mean) ? -1e300 : rep.lambda_hat_mean;
  results["all_limits_converged"] = rep.all_limits_converged;
  results["gamma"] = rep.gamma;
  results["threshold_c"] = rep.threshold_c;
  report["results"] = results;

  std::vector<std::vector<double>> rows;
  for (std::size_t g = 0; g < rep.gaps.size(); ++g)
    rows.push_back({static_cast<double>(rep.gaps[g]), rep.exceedance_freq[g], rep.claim_level[g],
                    rep.binom_stderr[g]});
  write_csv(out_dir + "/random_mps_tails.csv", "gap,exceedance_freq,claim_level,binom_stderr", rows);

  add_check(report, "identity-bookkeeping", rep.identity_check_ok,
            "right-tail product equals the pullback product");
  add_check(report, "negative-exponent", rep.lambda_negative, "sampled exponent below zero");
  add_check(report, "quenched-limits", rep.all_limits_converged, "every fiber limit converged");
  add_check(report, "tail-consistency", rep.tail_consistent,
            "exceedance frequencies within the exponential claim");
  return report;
}

}  // namespace

std::vector<std::string> validate_config(const json& config) {
  std::vector<std::string> diags;
  if (!config.is_object()) {
    diags.push_back("config must be a JSON object");
    return diags;
  }
  if (!config.contains("kind")) {
    diags.push_back("missing required field: kind");
    return diags;
  }
  std::string kind = config.at("kind").get<std::string>();
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
    diags.push_back("unknown kind: " + kind);
    return diags;
  }

  // referenced files must exist
  for (auto it = config.begin(); it != config.end(); ++it) {
    const std::string& key = it.key();
    if (key.size() > 5 && key.substr(key.size() - 5) == "_file") {
      std::string path = it.value().get<std::string>();
      if (!std::filesystem::exists(path)) diags.push_back("referenced file missing: " + path);
    }
  }

  auto need = [&](const char* field, const char* base_name) {
    std::string with_file = std::string(field) + "_file";
    if (!config.contains(field) && !config.contains(with_file))
      diags.push_back(std::string("missing required field for ") + base_name + ": " + field);
  };

  if (is_stochastic_kind(kind) && !config.contains("seed"))
    diags.push_back("missing required field for stochastic kind: seed");

  if (kind == "channel_analyze") need("channel", kind.c_str());
  if (kind == "product_sweep") {
    need("sequence", kind.c_str());
    need("windows", kind.c_str());
  }
  if (kind == "cocycle_lyapunov" || kind == "cocycle_annealed") {
    need("base", kind.c_str());
    need("samples", kind.c_str());
    if (kind == "cocycle_lyapunov") need("n", kind.c_str());
    if (kind == "cocycle_annealed") need("n_list", kind.c_str());
  }
  if (kind == "mps_limit") {
    need("chain", kind.c_str());
    need("observable", kind.c_str());
  }
  if (kind == "mps_correlations") {
    need("chain", kind.c_str());
    need("A", kind.c_str());
    need("B", kind.c_str());
  }
  if (kind == "random_mps") {
    need("base", kind.c_str());
    need("m", kind.c_str());
    need("observable", kind.c_str());
    need("n_max", kind.c_str());
    need("samples", kind.c_str());
  }
  if (diags.empty()) {
    // parameter-range diagnostics come from attempting to build the inputs
    try {
      json resolved = resolve_files(config);
      if (resolved.contains("channel")) label_from_json(resolved.at("channel")).validate();
      if (resolved.contains("base")) base_from_json(resolved.at("base"));
      if (resolved.contains("sequence")) sequence_from_json(resolved.at("sequence"));
      if (resolved.contains("chain")) chain_from_json(resolved.at("chain"));
    } catch (const std::exception& e) {
      diags.push_back(std::string("input error: ") + e.what());
    }
  }
  return diags;
}

json run_experiment(const json& raw_config, const std::string& out_dir) {
  json config = resolve_files(raw_config);
  std::string kind = config.at("kind").get<std::string>();
  std::filesystem::create_directories(out_dir);

  auto t0 = std::chrono::steady_clock::now();
  json report;
  if (kind == "channel_analyze") report = run_channel_analyze(config, out_dir);
  else if (kind == "product_sweep") report = run_product_sweep(config, out_dir);
  else if (kind == "cocycle_lyapunov") report = run_cocycle_lyapunov(config, out_dir);
  else if (kind == "cocycle_annealed") report = run_cocycle_annealed(config, out_dir);
  else if (kind == "mps_limit") report = run_mps_limit(config, out_dir);
  else if (kind == "mps_correlations") report = run_mps_correlations(config, out_dir);
  else if (kind == "random_mps") report = run_random_mps(config, out_dir);
  else throw std::invalid_argument("unknown kind: " + kind);

  report["kind"] = kind;
  report["config"] = raw_config;
  report["input_hash"] = hash_hex(raw_config);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto now = std::chrono::system_clock::now().time_since_epoch();
  report["timing"] = {
      {"wall_time_sec", secs},
      {"timestamp", std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
  return report;
}

bool report_all_passed(const json& report) {
  for (const json& check : report.at("checks"))
    if (!check.at("pass").get<bool>()) return false;
  return true;
}

int run_main(int argc, char** argv) {
  CLI::App app{"trace-norm contraction toolbox for channel products, cocycles, and MPS limits"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", filter;
  int threads = 0;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--threads", threads, "worker thread budget");

  CLI::App* validate = app.add_subcommand("validate", "schema-check a config without running");
  validate->add_option("config", config_path, "experiment config JSON")->required();

  CLI::App* suite = app.add_subcommand("paper-suite", "run the full verification battery");
  suite->add_option("--filter", filter, "run only checks whose tag contains this substring");
  suite->add_option("--out", out_dir, "output directory for the summary");
  suite->add_option("--threads", threads, "worker thread budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (threads > 0) par::set_threads(threads);
  has_seed_override = seed_opt->count() > 0;

  try {
    if (validate->parsed()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open config: " << config_path << "\n";
        return 1;
      }
      json config = json::parse(in);
      auto diags = validate_config(config);
      if (diags.empty()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const auto& d : diags) std::cout << d << "\n";
      return 1;
    }

    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open config: " << config_path << "\n";
        return 1;
      }
      json config = json::parse(in);
      auto diags = validate_config(config);
      if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << d << "\n";
        return 1;
      }
      if (has_seed_override) config["seed"] = seed_override;
      json report = run_experiment(config, out_dir);
      std::ofstream os(out_dir + "/report.json");
      os << report.dump(2) << "\n";
      std::cout << report.dump(2) << "\n";
      return report_all_passed(report) ? 0 : 2;
    }

    if (suite->parsed()) {
      auto results = run_paper_suite(filter);
      int failures = print_suite_results(results, std::cout);
      if (!out_dir.empty() && out_dir != ".") {
        std::filesystem::create_directories(out_dir);
        json summary = json::array();
        for (const auto& r : results)
          summary.push_back({{"tag", r.tag},
                             {"pass", r.pass},
                             {"detail", r.detail},
                             {"seconds", r.seconds}});
        std::ofstream os(out_dir + "/paper_suite.json");
        os << summary.dump(2) << "\n";
      }
      return failures == 0 ? 0 : 2;
    }
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qdob::cli

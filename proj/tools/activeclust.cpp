#include "activeclust/engine.hpp"
#include "activeclust/error.hpp"
#include "activeclust/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

using namespace activeclust;

namespace {

struct RunArgs {
  std::string config;
  std::string data;
  std::string labels;
  std::string format;
  std::string kernel;
  std::optional<double> sigma;
  std::optional<double> gamma;
  std::string strategy;
  std::optional<int> budget;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::string k;
  std::optional<int> b;
  std::optional<int> knn;
  std::optional<int> eval_every;
  bool no_standardize = false;
  std::string out;
  std::string save;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "JSON config; flags override its fields");
  cmd->add_option("--data", a.data, "CSV features (last column labels) or similarity file");
  cmd->add_option("--labels", a.labels, "label file for precomputed similarities");
  cmd->add_option("--format", a.format, "csv_features | csv_features_labeled");
  cmd->add_option("--kernel", a.kernel, "gaussian | chi2 | precomputed");
  cmd->add_option("--sigma", a.sigma, "gaussian bandwidth (default: median distance)");
  cmd->add_option("--gamma", a.gamma, "chi2 scale");
  cmd->add_option("--strategy", a.strategy, "urasc_n | urasc_p | urasc_go | urasc_no | urasc_po | random | random_pairs");
  cmd->add_option("--budget", a.budget, "query budget");
  cmd->add_option("--seed", a.seed, "random seed");
  cmd->add_option("--noise", a.noise, "oracle error rate");
  cmd->add_option("--k", a.k, "cluster count or 'auto'");
  cmd->add_option("--b", a.b, "gradient candidate budget");
  cmd->add_option("--knn", a.knn, "neighbors for the nonparametric model");
  cmd->add_option("--eval-every", a.eval_every, "iterations between evaluations");
  cmd->add_flag("--no-standardize", a.no_standardize, "use raw features in the kernel");
  cmd->add_option("--out", a.out, "curve output (.csv or .json; default stdout)");
}

SessionConfig build_config(const RunArgs& a) {
  SessionConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidParameter, std::string("config: ") + e.what());
    }
    cfg = j.get<SessionConfig>();
  }
  if (!a.data.empty()) cfg.data = a.data;
  if (!a.labels.empty()) cfg.labels = a.labels;
  if (!a.format.empty()) cfg.format = a.format;
  if (!a.kernel.empty()) {
    auto k = parse_kernel(a.kernel);
    if (!k) throw Error(ErrorCode::InvalidParameter, "unknown kernel '" + a.kernel + "'");
    cfg.kernel = *k;
  }
  if (a.sigma) cfg.sigma = *a.sigma;
  if (a.gamma) cfg.gamma = *a.gamma;
  if (!a.strategy.empty()) {
    auto s = parse_strategy(a.strategy);
    if (!s) throw Error(ErrorCode::InvalidParameter, "unknown strategy '" + a.strategy + "'");
    cfg.strategy = *s;
  }
  if (a.budget) cfg.query_budget = *a.budget;
  if (a.seed) cfg.seed = *a.seed;
  if (a.noise) cfg.noise_rate = *a.noise;
  if (!a.k.empty()) {
    if (a.k == "auto" || a.k == "unknown") {
      cfg.n_c.reset();
    } else {
      try {
        cfg.n_c = std::stoi(a.k);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidParameter, "--k expects an integer or 'auto'");
      }
    }
  }
  if (a.b) cfg.b = *a.b;
  if (a.knn) cfg.knn_k = *a.knn;
  if (a.eval_every) cfg.eval_every = *a.eval_every;
  if (a.no_standardize) cfg.standardize = false;
  cfg.validate();
  return cfg;
}

void write_curve(const std::vector<CurvePoint>& curve, const std::string& out) {
  if (out.empty()) {
    write_curve_csv(curve, std::cout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + out);
  if (out.size() >= 5 && out.substr(out.size() - 5) == ".json") {
    f << curve_to_json(curve).dump(2) << '\n';
  } else {
    write_curve_csv(curve, f);
  }
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto s = std::stoull(text);
      return {s, s};
    }
    const auto lo = std::stoull(text.substr(0, dots));
    const auto hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw Error(ErrorCode::InvalidParameter, "empty seed range");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidParameter, "--seeds expects a..b");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active spectral clustering with pairwise queries"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run one simulated session and write its curve");
  add_run_options(run_cmd, run_args);
  run_cmd->add_option("--save", run_args.save, "write the final session file here");

  RunArgs sweep_args;
  std::string seeds = "0..9";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string per_seed;
  auto* sweep_cmd = app.add_subcommand("sweep", "run several seeds and write the mean curve");
  add_run_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--seeds", seeds, "inclusive seed range a..b");
  sweep_cmd->add_option("--threads", threads, "parallel sessions");
  sweep_cmd->add_option("--per-seed", per_seed, "directory for individual curves");

  ServiceOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "serve interactive sessions over HTTP");
  serve_cmd->add_option("--port", serve_opts.port, "listen port");
  serve_cmd->add_option("--host", serve_opts.host, "bind address");
  serve_cmd->add_option("--data-dir", serve_opts.data_dir, "where evicted and exported sessions are saved");
  serve_cmd->add_option("--static", serve_opts.static_dir, "UI bundle directory mounted at /");
  serve_cmd->add_option("--cors-origin", serve_opts.cors_origin, "allowed CORS origin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto session = Session::create(build_config(run_args));
      write_curve(session.run(), run_args.out);
      if (!run_args.save.empty()) session.save(run_args.save);
    } else if (*sweep_cmd) {
      const auto cfg = build_config(sweep_args);
      const auto [lo, hi] = parse_seed_range(seeds);
      std::vector<std::uint64_t> seed_list;
      for (auto s = lo; s <= hi; ++s) seed_list.push_back(s);
      std::vector<std::vector<CurvePoint>> curves(seed_list.size());
      std::vector<std::string> errors(seed_list.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < seed_list.size(); i = next++) {
          try {
            auto c = cfg;
            c.seed = seed_list[i];
            curves[i] = run(c);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < std::max(1, threads); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) throw std::runtime_error("seed " + std::to_string(seed_list[i]) + ": " + errors[i]);
      }
      if (!per_seed.empty()) {
        std::filesystem::create_directories(per_seed);
        for (std::size_t i = 0; i < curves.size(); ++i) {
          write_curve(curves[i], (std::filesystem::path(per_seed) / ("seed_" + std::to_string(seed_list[i]) + ".csv")).string());
        }
      }
      write_curve(mean_curve(curves), sweep_args.out);
    } else if (*serve_cmd) {
      SessionService service(serve_opts);
      std::cerr << "listening on " << serve_opts.host << ':' << serve_opts.port << '\n';
      service.listen();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cfrechet/errors.hpp"
#include "cfrechet/experiments.hpp"
#include "cfrechet/instances.hpp"
#include "cfrechet/io.hpp"
#include "cfrechet/metrics.hpp"
#include "cfrechet/ot.hpp"
#include "cfrechet/report.hpp"
#include "cfrechet/stats.hpp"
#include "cfrechet/version.hpp"

namespace cfrechet {

/// Process exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;

namespace cli_detail {

using nlohmann::json;

inline void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

inline std::string num(double v) { return json(v).dump(); }

inline std::string reports_csv(const std::vector<MetricReport>& reports,
                               const std::vector<std::pair<std::string, double>>& extras = {}) {
  std::string text = report_csv_header() + "\n";
  for (const MetricReport& r : reports) {
    text += to_csv_row(r) + "\n";
  }
  for (const auto& [name, value] : extras) {
    text += name + "," + num(value) + ",,,,,,," + std::string(kToolVersion) + "\n";
  }
  return text;
}

inline json reports_json(const std::vector<MetricReport>& reports) {
  json arr = json::array();
  for (const MetricReport& r : reports) arr.push_back(to_json(r));
  return arr;
}

inline DiscreteJoint joint_from_json(const json& j, const std::string& name) {
  if (!j.contains("x") || !j.contains("y") || !j.contains("weights")) {
    throw InputError("instance joint \"" + name +
                     "\" must have \"x\", \"y\" and \"weights\" arrays");
  }
  const auto to_matrix = [&](const json& rows, const char* field) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
      throw InputError("instance joint \"" + name + "\": \"" + field +
                       "\" must be a non-empty array of non-empty rows");
    }
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].is_array() || rows[i].size() != rows[0].size()) {
        throw InputError("instance joint \"" + name + "\": ragged \"" +
                         std::string(field) + "\" rows");
      }
      for (std::size_t c = 0; c < rows[i].size(); ++c) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            rows[i][c].get<double>();
      }
    }
    return m;
  };
  DiscreteJoint dj{to_matrix(j["x"], "x"), to_matrix(j["y"], "y"),
                   Eigen::VectorXd(j["weights"].size())};
  for (std::size_t i = 0; i < j["weights"].size(); ++i) {
    dj.w(static_cast<Eigen::Index>(i)) = j["weights"][i].get<double>();
  }
  dj.validate();
  return dj;
}

struct OracleResult {
  std::vector<MetricReport> reports;
  double slack_rwd_mwd = 0.0;
  double slack_rwd3_rwd = 0.0;
  double slack_cwd_rwd3 = 0.0;
};

inline OracleResult oracle_on_instance(const InstancePair& inst,
                                       std::optional<std::uint64_t> seed) {
  OracleResult res;
  MetricReport mwd = mwd_discrete(inst.a, inst.b);
  MetricReport rwd = rwd_discrete(inst.a, inst.b);
  MetricReport rwd3 = rwd3_discrete(inst.a, inst.b);
  MetricReport cwd = cwd_discrete(inst.a, inst.b);
  mwd.seed = rwd.seed = rwd3.seed = cwd.seed = seed;
  res.slack_rwd_mwd = rwd.value - mwd.value;
  res.slack_rwd3_rwd = rwd3.value - rwd.value;
  res.slack_cwd_rwd3 = cwd.value - rwd3.value;
  res.reports = {mwd, rwd, rwd3, cwd};
  return res;
}

}  // namespace cli_detail

struct MetricsOptions {
  std::string x_path, y_path, yhat_path;
  std::string format = "json";
  std::string out;
  double clamp_tol = kDefaultClampTol;
  double pinv_eps = kDefaultPinvEps;
};

/// Ingests a (x, y, yhat) triplet of sample files (binary embedding format
/// or CSV, sniffed), estimates shared-x statistics, and reports MFID, RFID,
/// CFID and JFD.
inline std::vector<MetricReport> cmd_metrics(const MetricsOptions& opt) {
  const Eigen::MatrixXd x = load_samples(opt.x_path);
  const Eigen::MatrixXd y = load_samples(opt.y_path);
  const Eigen::MatrixXd yhat = load_samples(opt.yhat_path);
  const CondPairStats ps = estimate_cond_pair(x, y, yhat);

  std::vector<MetricReport> reports{
      mfid(ps, opt.clamp_tol),
      rfid(ps, opt.clamp_tol),
      cfid(ps, opt.clamp_tol, opt.pinv_eps),
      jfd(ps.true_joint(), ps.generated_joint(), opt.clamp_tol),
  };
  for (MetricReport& r : reports) {
    r.clamp_tol = opt.clamp_tol;
    r.pinv_eps = opt.pinv_eps;
  }
  return reports;
}

struct OracleOptions {
  std::string instance_path;
  int random_instances = 0;
  bool demo_shuffle = false;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
};

struct ExperimentOptions {
  std::string kind;  // "synthetic", "contour" or "alpha"
  double rho = 0.5;
  double rhohat = 0.5;
  Eigen::Index n = 50;
  int trials = 200;
  Eigen::Index resolution = 41;
  std::vector<double> alphas = {0.001, 0.01, 0.1, 0.5, 1.0};
  std::uint64_t seed = 0;
  CxxSource cxx_source = CxxSource::True;
  std::string format = "json";
  std::string out;
};

namespace cli_detail {

inline int do_metrics(const MetricsOptions& opt) {
  const std::vector<MetricReport> reports = cmd_metrics(opt);
  if (opt.format == "csv") {
    emit(reports_csv(reports), opt.out);
  } else {
    emit(reports_json(reports).dump(2) + "\n", opt.out);
  }
  return kExitOk;
}

inline int do_oracle(const OracleOptions& opt) {
  if (opt.random_instances > 0) {
    Rng base(opt.seed);
    int violations = 0;
    double min_slack_rwd_mwd = std::numeric_limits<double>::infinity();
    double min_slack_rwd3_rwd = std::numeric_limits<double>::infinity();
    double min_slack_cwd_rwd3 = std::numeric_limits<double>::infinity();
    double max_abs_cwd_minus_rwd3 = 0.0;
    for (int k = 0; k < opt.random_instances; ++k) {
      Rng rng = base.substream(k);
      const InstancePair inst = random_shared_instance(rng);
      const OracleResult res = oracle_on_instance(inst, opt.seed);
      min_slack_rwd_mwd = std::min(min_slack_rwd_mwd, res.slack_rwd_mwd);
      min_slack_rwd3_rwd = std::min(min_slack_rwd3_rwd, res.slack_rwd3_rwd);
      min_slack_cwd_rwd3 = std::min(min_slack_cwd_rwd3, res.slack_cwd_rwd3);
      max_abs_cwd_minus_rwd3 =
          std::max(max_abs_cwd_minus_rwd3, std::abs(res.slack_cwd_rwd3));
      if (res.slack_rwd_mwd < -1e-9 || res.slack_rwd3_rwd < -1e-9 ||
          res.slack_cwd_rwd3 < -1e-9) {
        ++violations;
      }
    }
    if (opt.format == "csv") {
      std::string text = "key,value\n";
      text += "instances," + std::to_string(opt.random_instances) + "\n";
      text += "seed," + std::to_string(opt.seed) + "\n";
      text += "violations," + std::to_string(violations) + "\n";
      text += "min_slack_rwd_mwd," + num(min_slack_rwd_mwd) + "\n";
      text += "min_slack_rwd3_rwd," + num(min_slack_rwd3_rwd) + "\n";
      text += "min_slack_cwd_rwd3," + num(min_slack_cwd_rwd3) + "\n";
      text += "max_abs_cwd_minus_rwd3," + num(max_abs_cwd_minus_rwd3) + "\n";
      emit(text, opt.out);
    } else {
      json j{{"instances", opt.random_instances},
             {"seed", opt.seed},
             {"violations", violations},
             {"min_slack_rwd_mwd", min_slack_rwd_mwd},
             {"min_slack_rwd3_rwd", min_slack_rwd3_rwd},
             {"min_slack_cwd_rwd3", min_slack_cwd_rwd3},
             {"max_abs_cwd_minus_rwd3", max_abs_cwd_minus_rwd3},
             {"rng", Rng::kAlgorithm},
             {"tool_version", kToolVersion}};
      emit(j.dump(2) + "\n", opt.out);
    }
    return kExitOk;
  }

  InstancePair inst = [&]() {
    if (opt.demo_shuffle) return shuffle_instance();
    if (opt.instance_path.empty()) {
      throw InputError("oracle: pass --instance PATH, --random N or --demo-shuffle");
    }
    json j;
    try {
      j = json::parse(detail::read_file_bytes(opt.instance_path));
    } catch (const json::parse_error& e) {
      throw InputError(opt.instance_path + ": invalid JSON: " + e.what());
    }
    if (!j.contains("a") || !j.contains("b")) {
      throw InputError(opt.instance_path + ": instance must have joints \"a\" and \"b\"");
    }
    return InstancePair{joint_from_json(j["a"], "a"), joint_from_json(j["b"], "b")};
  }();

  const OracleResult res = oracle_on_instance(inst, std::nullopt);
  const std::vector<std::pair<std::string, double>> slacks = {
      {"slack_rwd_mwd", res.slack_rwd_mwd},
      {"slack_rwd3_rwd", res.slack_rwd3_rwd},
      {"slack_cwd_rwd3", res.slack_cwd_rwd3},
  };
  if (opt.format == "csv") {
    emit(reports_csv(res.reports, slacks), opt.out);
  } else {
    json j{{"reports", reports_json(res.reports)},
           {"chain_slacks",
            {{"rwd_minus_mwd", res.slack_rwd_mwd},
             {"rwd3_minus_rwd", res.slack_rwd3_rwd},
             {"cwd_minus_rwd3", res.slack_cwd_rwd3}}},
           {"tool_version", kToolVersion}};
    emit(j.dump(2) + "\n", opt.out);
  }
  return kExitOk;
}

inline json experiment_config_json(const ExperimentOptions& opt) {
  json config{{"experiment", opt.kind},
              {"seed", opt.seed},
              {"rng", Rng::kAlgorithm},
              {"tool_version", kToolVersion}};
  if (opt.kind == "synthetic") {
    config["rho"] = opt.rho;
    config["n"] = opt.n;
    config["trials"] = opt.trials;
    config["cxx_source"] = opt.cxx_source == CxxSource::True ? "true" : "estimated";
  } else if (opt.kind == "contour") {
    config["resolution"] = opt.resolution;
  } else {
    config["rho"] = opt.rho;
    config["rhohat"] = opt.rhohat;
    config["alphas"] = opt.alphas;
  }
  return config;
}

inline int do_experiment(const ExperimentOptions& opt) {
  if (opt.kind == "synthetic") {
    const TrialTable table = run_synthetic(opt.rho, opt.n, opt.trials, opt.seed,
                                           opt.cxx_source);
    if (opt.format == "csv") {
      std::string text = "trial,estimator,mfid,rfid,cfid\n";
      for (int t = 0; t < table.trials; ++t) {
        for (std::size_t e = 0; e < kEstimators.size(); ++e) {
          text += std::to_string(t) + "," + estimator_name(kEstimators[e]) + "," +
                  num(table.values[e][0][t]) + "," + num(table.values[e][1][t]) + "," +
                  num(table.values[e][2][t]) + "\n";
        }
      }
      for (std::size_t e = 0; e < kEstimators.size(); ++e) {
        text += std::string("median,") + estimator_name(kEstimators[e]) + "," +
                num(table.medians[e][0]) + "," + num(table.medians[e][1]) + "," +
                num(table.medians[e][2]) + "\n";
      }
      emit(text, opt.out);
    } else {
      json medians;
      json trials = json::array();
      for (std::size_t e = 0; e < kEstimators.size(); ++e) {
        medians[estimator_name(kEstimators[e])] = {
            {"MFID", table.medians[e][0]},
            {"RFID", table.medians[e][1]},
            {"CFID", table.medians[e][2]}};
      }
      for (int t = 0; t < table.trials; ++t) {
        for (std::size_t e = 0; e < kEstimators.size(); ++e) {
          trials.push_back(json{{"trial", t},
                                {"estimator", estimator_name(kEstimators[e])},
                                {"MFID", table.values[e][0][t]},
                                {"RFID", table.values[e][1][t]},
                                {"CFID", table.values[e][2][t]}});
        }
      }
      json j{{"config", experiment_config_json(opt)},
             {"medians", medians},
             {"trials", trials}};
      emit(j.dump(2) + "\n", opt.out);
    }
    return kExitOk;
  }

  if (opt.kind == "contour") {
    const GridResult grid = contour_grid(opt.resolution);
    if (opt.format == "csv") {
      std::string text = "rho,rhohat,squared_diff,rfid,cfid\n";
      for (Eigen::Index i = 0; i < grid.rho_axis.size(); ++i) {
        for (Eigen::Index j = 0; j < grid.rhohat_axis.size(); ++j) {
          text += num(grid.rho_axis(i)) + "," + num(grid.rhohat_axis(j)) + "," +
                  num(grid.squared_diff(i, j)) + "," + num(grid.rfid(i, j)) + "," +
                  num(grid.cfid(i, j)) + "\n";
        }
      }
      emit(text, opt.out);
    } else {
      const auto matrix_json = [](const Eigen::MatrixXd& m) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          json row = json::array();
          for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
          rows.push_back(row);
        }
        return rows;
      };
      json axis = json::array();
      for (Eigen::Index i = 0; i < grid.rho_axis.size(); ++i) {
        axis.push_back(grid.rho_axis(i));
      }
      json j{{"config", experiment_config_json(opt)},
             {"rho_axis", axis},
             {"rhohat_axis", axis},
             {"squared_diff", matrix_json(grid.squared_diff)},
             {"rfid", matrix_json(grid.rfid)},
             {"cfid", matrix_json(grid.cfid)}};
      emit(j.dump(2) + "\n", opt.out);
    }
    return kExitOk;
  }

  if (opt.kind == "alpha") {
    const std::vector<AlphaSweepPoint> points = alpha_sweep(opt.rho, opt.rhohat,
                                                            opt.alphas);
    if (opt.format == "csv") {
      std::string text = "alpha,mfid,rfid,cfid\n";
      for (const AlphaSweepPoint& p : points) {
        text += num(p.alpha) + "," + num(p.mfid) + "," + num(p.rfid) + "," +
                num(p.cfid) + "\n";
      }
      emit(text, opt.out);
    } else {
      json arr = json::array();
      for (const AlphaSweepPoint& p : points) {
        arr.push_back(json{{"alpha", p.alpha},
                           {"MFID", p.mfid},
                           {"RFID", p.rfid},
                           {"CFID", p.cfid}});
      }
      json j{{"config", experiment_config_json(opt)}, {"points", arr}};
      emit(j.dump(2) + "\n", opt.out);
    }
    return kExitOk;
  }

  throw InputError("unknown experiment kind \"" + opt.kind + "\"");
}

inline int do_convert(const std::string& in_path, const std::string& out_path,
                      std::string to_format) {
  const bool in_binary = is_embedding_file(in_path);
  if (to_format.empty()) {
    to_format = in_binary ? "csv" : "cfmb";
  }
  const Eigen::MatrixXd rows = in_binary ? read_embedding_file(in_path)
                                         : read_csv(in_path);
  if (to_format == "csv") {
    write_csv(out_path, rows);
  } else if (to_format == "cfmb") {
    write_embedding_file(out_path, rows);
  } else {
    throw InputError("unknown conversion target \"" + to_format + "\"");
  }
  return kExitOk;
}

}  // namespace cli_detail

/// Command-line front end. Returns the process exit code: 0 on success,
/// 2 on input or format errors, 3 on numerical failures.
inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Conditional, restricted, marginal and joint Frechet distances "
               "between conditional distributions, with an exact discrete optimal "
               "transport oracle"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  MetricsOptions metrics_opt;
  CLI::App* metrics_cmd =
      app.add_subcommand("metrics", "Compute MFID/RFID/CFID/JFD from sample files");
  metrics_cmd->add_option("--x", metrics_opt.x_path, "conditioning samples (CFMB or CSV)")
      ->required();
  metrics_cmd->add_option("--y", metrics_opt.y_path, "true output samples")->required();
  metrics_cmd->add_option("--yhat", metrics_opt.yhat_path, "generated output samples")
      ->required();
  metrics_cmd->add_option("--format", metrics_opt.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  metrics_cmd->add_option("--out", metrics_opt.out, "output path (default stdout)");
  metrics_cmd->add_option("--clamp-tol", metrics_opt.clamp_tol,
                          "relative PSD clamp tolerance");
  metrics_cmd->add_option("--eps", metrics_opt.pinv_eps,
                          "relative pseudo-inverse cutoff");

  OracleOptions oracle_opt;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Exact discrete OT distances MWD/RWD/RWD3/CWD and chain slacks");
  oracle_cmd->add_option("--instance", oracle_opt.instance_path,
                         "JSON instance with joints \"a\" and \"b\"");
  oracle_cmd->add_option("--random", oracle_opt.random_instances,
                         "verify the chain on N random shared-x instances");
  oracle_cmd->add_flag("--demo-shuffle", oracle_opt.demo_shuffle,
                       "run the bundled label-shuffling instance");
  oracle_cmd->add_option("--seed", oracle_opt.seed, "random instance seed");
  oracle_cmd->add_option("--format", oracle_opt.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  oracle_cmd->add_option("--out", oracle_opt.out, "output path (default stdout)");

  ExperimentOptions exp_opt;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Reproducible studies");
  exp_cmd->require_subcommand(1);

  CLI::App* synth_cmd = exp_cmd->add_subcommand(
      "synthetic", "Estimator comparison (SC/NSC1/NSC2) on the bivariate model");
  synth_cmd->add_option("--rho", exp_opt.rho, "true correlation");
  synth_cmd->add_option("--n", exp_opt.n, "samples per trial");
  synth_cmd->add_option("--trials", exp_opt.trials, "number of trials");
  synth_cmd->add_option("--seed", exp_opt.seed, "base seed");
  bool est_cxx = false;
  bool true_cxx = false;
  synth_cmd->add_flag("--est-cxx", est_cxx,
                      "plug the estimated x variance into the metrics");
  synth_cmd->add_flag("--true-cxx", true_cxx,
                      "plug the true x variance into the metrics (default)");

  CLI::App* contour_cmd =
      exp_cmd->add_subcommand("contour", "Metric surfaces over a correlation grid");
  contour_cmd->add_option("--resolution", exp_opt.resolution, "grid points per axis");

  CLI::App* alpha_cmd =
      exp_cmd->add_subcommand("alpha", "Metric response to rescaling x by alpha");
  alpha_cmd->add_option("--rho", exp_opt.rho, "true correlation");
  alpha_cmd->add_option("--rhohat", exp_opt.rhohat, "generated correlation");
  alpha_cmd->add_option("--alphas", exp_opt.alphas, "alpha values in (0, 1]");

  for (CLI::App* sub : {synth_cmd, contour_cmd, alpha_cmd}) {
    sub->add_option("--format", exp_opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", exp_opt.out, "output path (default stdout)");
  }

  std::string convert_in, convert_out, convert_to;
  CLI::App* convert_cmd =
      app.add_subcommand("convert", "Convert between CSV and the binary format");
  convert_cmd->add_option("--in", convert_in, "input path")->required();
  convert_cmd->add_option("--out", convert_out, "output path")->required();
  convert_cmd->add_option("--to", convert_to, "target format")
      ->check(CLI::IsMember({"csv", "cfmb"}));

  // CLI11 parses argv-style reversed vectors.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (metrics_cmd->parsed()) {
      return cli_detail::do_metrics(metrics_opt);
    }
    if (oracle_cmd->parsed()) {
      return cli_detail::do_oracle(oracle_opt);
    }
    if (exp_cmd->parsed()) {
      if (est_cxx && true_cxx) {
        throw InputError("--est-cxx and --true-cxx are mutually exclusive");
      }
      exp_opt.cxx_source = est_cxx ? CxxSource::Estimated : CxxSource::True;
      if (synth_cmd->parsed()) exp_opt.kind = "synthetic";
      if (contour_cmd->parsed()) exp_opt.kind = "contour";
      if (alpha_cmd->parsed()) exp_opt.kind = "alpha";
      return cli_detail::do_experiment(exp_opt);
    }
    if (convert_cmd->parsed()) {
      return cli_detail::do_convert(convert_in, convert_out, convert_to);
    }
    throw InputError("no subcommand given");
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
}

inline int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace cfrechet

#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scca/campaign.hpp"
#include "scca/cca.hpp"
#include "scca/csv.hpp"
#include "scca/designs.hpp"
#include "scca/errors.hpp"
#include "scca/linalg.hpp"
#include "scca/sar.hpp"

namespace scca::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 12345;

struct Options {
  std::string x_path, y_path;
  std::string method = "sar";
  std::string methods = "sar,ridge,cca";
  std::string rank = "auto";
  std::string lambda = "bic";
  std::string design;
  std::string out;
  std::string format = "json";
  double epsilon = 1e-3;
  std::size_t runs = 100;
  std::uint64_t seed = kDefaultSeed;
};

std::optional<std::size_t> parse_rank(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t pos = 0;
    long long value = std::stoll(text, &pos);
    if (pos != text.size() || value < 1) throw std::invalid_argument(text);
    return static_cast<std::size_t>(value);
  } catch (const std::exception&) {
    throw ContractError("--rank must be \"auto\" or a positive integer, got \"" +
                        text + "\"");
  }
}

std::vector<double> parse_lambda(const std::string& text) {
  if (text == "bic") return {};
  try {
    std::size_t pos = 0;
    double value = std::stod(text, &pos);
    if (pos != text.size() || !(value >= 0.0)) throw std::invalid_argument(text);
    return {value};
  } catch (const std::exception&) {
    throw ContractError(
        "--lambda must be \"bic\" or a nonnegative number, got \"" + text +
        "\"");
  }
}

std::vector<sim::Method> parse_methods(const std::string& text) {
  std::vector<sim::Method> methods;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string token = comma == std::string::npos
                            ? text.substr(start)
                            : text.substr(start, comma - start);
    if (!token.empty()) methods.push_back(sim::method_from_string(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (methods.empty()) throw ContractError("no methods given");
  return methods;
}

sar::SarConfig make_config(const Options& opt) {
  sar::SarConfig config;
  config.epsilon = opt.epsilon;
  config.rank = parse_rank(opt.rank);
  config.lambda_overrides = parse_lambda(opt.lambda);
  config.seed = opt.seed;
  return config;
}

ordered_json matrix_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const Vec& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw CsvError(out_path + ": cannot open file for writing");
  out << text;
}

int cmd_fit(const Options& opt) {
  Mat x = read_csv_file(opt.x_path);
  Mat y = read_csv_file(opt.y_path);
  if (x.rows() != y.rows())
    throw ShapeError("--x has " + std::to_string(x.rows()) + " rows, --y has " +
                     std::to_string(y.rows()));
  sar::SarConfig config = make_config(opt);

  ordered_json doc;
  doc["schema_version"] = 1;
  doc["command"] = "fit";
  doc["method"] = opt.method;
  doc["n"] = x.rows();
  doc["p"] = x.cols();
  doc["q"] = y.cols();
  doc["seed"] = opt.seed;

  if (opt.method == "sar") {
    sar::SarModel model = sar::sar_fit(x, y, config);
    doc["rank"] = model.rank();
    doc["rho"] = vector_json(model.rho_hat);
    doc["a"] = matrix_json(model.a_sparse);
    doc["b"] = matrix_json(model.b_sparse);
    ordered_json pairs = ordered_json::array();
    for (const sar::PairSummary& pair : model.pairs) {
      pairs.push_back({{"lambda_a", pair.lambda_a},
                       {"lambda_b", pair.lambda_b},
                       {"iterations", pair.iterations},
                       {"converged", pair.converged}});
    }
    doc["pairs"] = std::move(pairs);
  } else {
    sim::Method method = sim::method_from_string(opt.method);
    Mat xc = linalg::center_columns(x).centered;
    Mat yc = linalg::center_columns(y).centered;
    auto cap = static_cast<std::size_t>(std::min(x.cols(), y.cols()));
    std::size_t fit_rank = config.rank.value_or(cap);
    cca::CcaModel model;
    if (method == sim::Method::Ridge) {
      cca::RidgeParams params =
          cca::ridge_cv(xc, yc, cca::default_ridge_grid(),
                        cca::default_ridge_grid(), 5, opt.seed);
      model = cca::canonical_ridge(xc, yc, params, fit_rank);
      doc["k1"] = params.k1;
      doc["k2"] = params.k2;
    } else {
      model = cca::classical_cca(xc, yc, fit_rank);
    }
    std::size_t rank = config.rank ? *config.rank
                       : model.rho.size() < 2
                           ? std::size_t{1}
                           : cca::select_rank(model.rho).rank;
    doc["rank"] = rank;
    doc["rho"] = vector_json(model.rho.head(static_cast<Index>(rank)));
    doc["a"] = matrix_json(model.a.leftCols(static_cast<Index>(rank)));
    doc["b"] = matrix_json(model.b.leftCols(static_cast<Index>(rank)));
  }

  std::string text = doc.dump(2) + "\n";
  emit(text, opt.out);
  if (!opt.out.empty()) {
    std::cout << "fit method=" << opt.method << " rank=" << doc["rank"]
              << " rho=";
    const auto& rho = doc["rho"];
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (i > 0) std::cout << ",";
      std::cout << format_double(rho[i].get<double>());
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_simulate(const Options& opt) {
  if (opt.runs < 1) throw ContractError("--runs must be at least 1");
  sim::DesignSpec design = sim::build_design(opt.design);
  std::vector<sim::Method> methods = parse_methods(opt.methods);
  sar::SarConfig base;
  base.epsilon = opt.epsilon;
  base.lambda_overrides = parse_lambda(opt.lambda);

  sim::SimulationReport report =
      sim::run_campaign(design, methods, opt.runs, opt.seed, base);

  // summary in the shape of the benchmark tables; values bit-equal to the
  // serialized report
  std::cout << "design=" << report.design << " runs=" << report.runs
            << " seed=" << report.seed << "\n";
  std::cout << "method,angle_a,angle_b,tpr_a,tnr_a,tpr_b,tnr_b,failed\n";
  for (const sim::MethodReport& mr : report.methods) {
    if (!mr.feasible) {
      std::cout << sim::method_name(mr.method) << ",infeasible\n";
      continue;
    }
    std::cout << sim::method_name(mr.method) << ","
              << format_double(mr.mean_angle_a) << ","
              << format_double(mr.mean_angle_b) << ","
              << format_double(mr.mean_tpr_a) << ","
              << format_double(mr.mean_tnr_a) << ","
              << format_double(mr.mean_tpr_b) << ","
              << format_double(mr.mean_tnr_b) << "," << mr.failed << "\n";
  }
  std::cerr << "campaign wall time: " << report.wall_seconds << " s\n";

  std::string text = opt.format == "csv" ? sim::report_to_csv(report)
                                         : sim::report_to_json(report);
  emit(text, opt.out);
  return 0;
}

int cmd_cv(const Options& opt) {
  Mat x = read_csv_file(opt.x_path);
  Mat y = read_csv_file(opt.y_path);
  if (x.rows() != y.rows())
    throw ShapeError("--x has " + std::to_string(x.rows()) + " rows, --y has " +
                     std::to_string(y.rows()));
  std::vector<sim::Method> methods = parse_methods(opt.methods);
  sar::SarConfig config = make_config(opt);

  std::vector<std::pair<sim::Method, double>> scores;
  for (sim::Method method : methods) {
    bool seen = false;
    for (const auto& s : scores) seen = seen || s.first == method;
    if (seen) continue;
    scores.emplace_back(method, sim::loo_cv_score(x, y, method, config));
  }

  double sar_score = 0.0;
  bool have_sar = false;
  for (const auto& s : scores) {
    if (s.first == sim::Method::Sar) {
      sar_score = s.second;
      have_sar = true;
    }
  }

  if (opt.format == "csv") {
    std::string text = "metric,method,value\n";
    for (const auto& s : scores)
      text += "score," + sim::method_name(s.first) + "," +
              format_double(s.second) + "\n";
    if (have_sar)
      for (const auto& s : scores)
        if (s.first != sim::Method::Sar)
          text += "ratio_vs_sar," + sim::method_name(s.first) + "," +
                  format_double(s.second / sar_score) + "\n";
    emit(text, opt.out);
    return 0;
  }

  ordered_json doc;
  doc["schema_version"] = 1;
  doc["command"] = "cv";
  doc["n"] = x.rows();
  doc["p"] = x.cols();
  doc["q"] = y.cols();
  doc["seed"] = opt.seed;
  ordered_json js = ordered_json::object();
  for (const auto& s : scores) js[sim::method_name(s.first)] = s.second;
  doc["scores"] = std::move(js);
  ordered_json jr = ordered_json::object();
  if (have_sar)
    for (const auto& s : scores)
      if (s.first != sim::Method::Sar)
        jr[sim::method_name(s.first)] = s.second / sar_score;
  doc["ratios_vs_sar"] = std::move(jr);
  emit(doc.dump(2) + "\n", opt.out);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  Options opt;
  CLI::App app{"sparse canonical correlation analysis toolkit"};
  app.require_subcommand(1);

  CLI::App* fit = app.add_subcommand("fit", "fit a model on two CSV files");
  fit->add_option("--x", opt.x_path, "observations x variables CSV")->required();
  fit->add_option("--y", opt.y_path, "observations x variables CSV")->required();
  fit->add_option("--method", opt.method, "sar, ridge or cca")
      ->check(CLI::IsMember({"sar", "ridge", "cca"}));
  fit->add_option("--rank", opt.rank, "auto or a positive integer");
  fit->add_option("--lambda", opt.lambda, "bic or a fixed penalty");
  fit->add_option("--epsilon", opt.epsilon, "convergence angle threshold");
  fit->add_option("--seed", opt.seed, "random seed");
  fit->add_option("--out", opt.out, "output path (default: stdout)");

  CLI::App* simulate =
      app.add_subcommand("simulate", "run a Monte-Carlo benchmark campaign");
  simulate->add_option("--design", opt.design, "simulation design name")
      ->required();
  simulate->add_option("--methods", opt.methods, "comma-separated methods");
  simulate->add_option("--runs", opt.runs, "number of repetitions");
  simulate->add_option("--seed", opt.seed, "random seed");
  simulate->add_option("--epsilon", opt.epsilon, "sparse-fit angle threshold");
  simulate->add_option("--lambda", opt.lambda, "bic or a fixed penalty");
  simulate->add_option("--out", opt.out, "report path (default: stdout)");
  simulate->add_option("--format", opt.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* cv =
      app.add_subcommand("cv", "leave-one-out cross-validation scores");
  cv->add_option("--x", opt.x_path, "observations x variables CSV")->required();
  cv->add_option("--y", opt.y_path, "observations x variables CSV")->required();
  cv->add_option("--methods", opt.methods, "comma-separated methods")
      ->default_val("sar");
  cv->add_option("--rank", opt.rank, "auto or a positive integer");
  cv->add_option("--lambda", opt.lambda, "bic or a fixed penalty");
  cv->add_option("--epsilon", opt.epsilon, "convergence angle threshold");
  cv->add_option("--seed", opt.seed, "random seed");
  cv->add_option("--out", opt.out, "output path (default: stdout)");
  cv->add_option("--format", opt.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
    if (fit->parsed()) return cmd_fit(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (cv->parsed()) return cmd_cv(opt);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const FoldFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    // singularity, rank deficiency, failed convergence, lost association
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace scca::cli

// Batch front-end: cross-validated grid runs, single-model training and
// prediction, disjunct profiling, and mu-based model selection.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <variant>

#include "kpb/boost.hpp"
#include "kpb/dataset.hpp"
#include "kpb/disjuncts.hpp"
#include "kpb/errors.hpp"
#include "kpb/metrics.hpp"
#include "kpb/multiclass.hpp"
#include "kpb/roi.hpp"
#include "kpb/serialize.hpp"
#include "kpb/version.hpp"

namespace {

using kpb::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::vector<double> default_sigma_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(i / 100.0);
  for (int i = 2; i <= 10; ++i) g.push_back(i / 10.0);
  for (int i = 2; i <= 10; ++i) g.push_back(i);
  for (int i = 2; i <= 10; ++i) g.push_back(10.0 * i);
  g.push_back(200.0);
  return g;
}

std::vector<double> default_step_grid() {
  std::vector<double> g;
  for (int e = -4; e <= -2; ++e)
    for (int m = 1; m <= 9; ++m) g.push_back(m * std::pow(10.0, e));
  for (int m = 1; m <= 10; ++m) g.push_back(m / 10.0);
  return g;
}

struct Options {
  std::string data;
  std::string test;
  std::string model;
  std::string algo = "kpboost";
  std::string decomp = "auto";
  std::vector<double> sigma = default_sigma_grid();
  std::vector<double> cost = {100.0, 1000.0};
  std::vector<double> step = default_step_grid();
  std::vector<double> theta = {0.6, 0.7, 0.8};
  int rounds = 10;
  int folds = 10;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int kappa = 0;  // 0 = knee of the curve
  int label_column = -1;
  int threads = 0;
  std::string knn_scope = "within";
  std::string graph = "symmetric";
  std::vector<std::string> reports;
};

kpb::DisjunctOptions disjunct_options(const Options& opt) {
  kpb::DisjunctOptions d;
  if (opt.knn_scope == "within") {
    d.scope = kpb::NeighborScope::WithinClass;
  } else if (opt.knn_scope == "global") {
    d.scope = kpb::NeighborScope::GlobalFiltered;
  } else {
    throw kpb::ConfigError("--knn-scope must be 'within' or 'global'");
  }
  if (opt.graph == "symmetric") {
    d.traversal = kpb::TraversalMode::Symmetrized;
  } else if (opt.graph == "directed") {
    d.traversal = kpb::TraversalMode::Directed;
  } else {
    throw kpb::ConfigError("--graph must be 'symmetric' or 'directed'");
  }
  return d;
}

kpb::Dataset load_csv_default_last(const std::string& path, int label_column) {
  if (label_column >= 0) return kpb::load_csv(path, label_column);
  std::ifstream probe(path);
  if (!probe) throw kpb::DataError("cannot open " + path);
  std::string first;
  std::getline(probe, first);
  const int arity = 1 + static_cast<int>(std::count(first.begin(), first.end(), ','));
  return kpb::load_csv(path, arity - 1);
}

kpb::Dataset load_data(const Options& opt) {
  if (opt.data.empty()) throw kpb::ConfigError("--data is required");
  return load_csv_default_last(opt.data, opt.label_column);
}

// One hyperparameter tuple of the search grid.
struct Cell {
  double sigma = 0.0;
  double cost = 0.0;
  std::optional<double> step;
  std::optional<double> theta;
};

std::vector<Cell> build_grid(const Options& opt) {
  std::vector<Cell> cells;
  for (double sg : opt.sigma) {
    for (double c : opt.cost) {
      if (opt.algo == "svm") {
        cells.push_back({sg, c, std::nullopt, std::nullopt});
      } else if (opt.algo == "kpboost") {
        for (double st : opt.step) cells.push_back({sg, c, st, std::nullopt});
      } else if (opt.algo == "kproi") {
        for (double st : opt.step)
          for (double th : opt.theta) cells.push_back({sg, c, st, th});
      } else {
        throw kpb::ConfigError("--algo must be one of svm, kpboost, kproi");
      }
    }
  }
  if (cells.empty()) throw kpb::ConfigError("empty hyperparameter grid");
  return cells;
}

std::string resolve_decomp(const Options& opt, int classes) {
  if (opt.decomp == "auto") return classes == 2 ? "binary" : "ovo";
  if (opt.decomp == "ovo" || opt.decomp == "ova") return opt.decomp;
  throw kpb::ConfigError("--decomp must be one of auto, ovo, ova");
}

kpb::BoostParams boost_params(const Options& opt, const Cell& cell) {
  kpb::BoostParams p;
  p.sigma = cell.sigma;
  p.C = cell.cost;
  // plain SVM is the single-round degenerate ensemble
  p.rounds = opt.algo == "svm" ? 1 : opt.rounds;
  p.step = cell.step.value_or(1.0);
  return p;
}

// Fits on the (already normalized) training data and predicts class ids for
// the test features.
Eigen::VectorXi fit_predict(const Options& opt, const Cell& cell, const std::string& decomp,
                            const kpb::Dataset& train, const kpb::Dataset& test) {
  const kpb::BoostParams base = boost_params(opt, cell);
  if (opt.algo == "kproi") {
    kpb::RoiParams rp{base, cell.theta.value_or(0.6)};
    if (decomp == "binary") {
      const kpb::Ensemble ens = kpb::fit_roi(train, rp);
      const kpb::Prediction pred = kpb::predict_roi(ens, train, test);
      return kpb::to_class_ids(ens, pred.labels, train);
    }
    if (decomp == "ovo") return kpb::predict_ovo(kpb::fit_ovo(train, rp), train, test);
    return kpb::predict_ova(kpb::fit_ova(train, rp), train, test);
  }
  if (decomp == "binary") {
    const kpb::Ensemble ens = kpb::fit(train, base);
    const kpb::Prediction pred = kpb::predict(ens, train, test);
    return kpb::to_class_ids(ens, pred.labels, train);
  }
  if (decomp == "ovo") return kpb::predict_ovo(kpb::fit_ovo(train, base), train, test);
  return kpb::predict_ova(kpb::fit_ova(train, base), train, test);
}

struct FoldResult {
  bool ok = false;
  std::string error;
  double gmean = 0.0, auc = 0.0, gsdi = 0.0;
  std::vector<double> recalls;
};

void append_cell_keys(ordered_json& rec, const Options& opt, const Cell& cell, int cell_id) {
  rec["algo"] = opt.algo;
  rec["cell"] = cell_id;
  rec["sigma"] = cell.sigma;
  rec["cost"] = cell.cost;
  if (cell.step) {
    rec["step"] = *cell.step;
  } else {
    rec["step"] = nullptr;
  }
  if (cell.theta) {
    rec["theta"] = *cell.theta;
  } else {
    rec["theta"] = nullptr;
  }
  rec["rounds"] = opt.algo == "svm" ? 1 : opt.rounds;
  rec["version"] = kpb::kVersion;
}

int cmd_cv(const Options& opt) {
  if (!opt.seed_set) throw kpb::ConfigError("cv requires --seed for reproducibility");
  if (opt.folds < 2) throw kpb::ConfigError("--folds must be >= 2");
  if (opt.out.empty()) throw kpb::ConfigError("cv requires --out");

  const kpb::Dataset ds = load_data(opt);
  const std::string decomp = resolve_decomp(opt, ds.classes());
  const std::vector<Cell> cells = build_grid(opt);
  const kpb::FoldPlan plan = kpb::stratified_kfold(ds, opt.folds, opt.seed);

  // disjunct structure on the whole normalized dataset, fixed across folds
  const kpb::Dataset whole = kpb::normalize(ds, ds).first;
  const kpb::DisjunctOptions dopts = disjunct_options(opt);
  int kappa = opt.kappa;
  if (kappa <= 0) kappa = kpb::kappa_delta_curve(whole, dopts).knee;
  const kpb::DisjunctPartition partition = kpb::find_disjuncts(whole, kappa, dopts);

  const int n_tasks = static_cast<int>(cells.size()) * opt.folds;
  std::vector<FoldResult> results(n_tasks);
  std::atomic<int> next{0};
  const int workers =
      std::max(1, opt.threads > 0 ? opt.threads
                                  : static_cast<int>(std::thread::hardware_concurrency()));

  auto run_task = [&](int task) {
    const Cell& cell = cells[task / opt.folds];
    const auto& fold = plan.folds[task % opt.folds];
    FoldResult& out = results[task];
    try {
      const kpb::Dataset train_raw = kpb::slice(ds, fold.train);
      const kpb::Dataset test_raw = kpb::slice(ds, fold.test);
      auto [train, test] = kpb::normalize(train_raw, test_raw);
      const Eigen::VectorXi pred = fit_predict(opt, cell, decomp, train, test);

      const kpb::ConfusionMatrix conf = kpb::confusion(test_raw.labels, pred, ds.classes());
      out.gmean = kpb::gmean(conf);
      out.auc = kpb::auc(conf);
      std::vector<char> correct(fold.test.size());
      for (std::size_t i = 0; i < fold.test.size(); ++i)
        correct[i] = pred[static_cast<int>(i)] == test_raw.labels[static_cast<int>(i)];
      out.gsdi = kpb::gsdi(partition, fold.test, correct);
      out.recalls = kpb::per_class_recall(conf);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int task = next.fetch_add(1); task < n_tasks; task = next.fetch_add(1))
        run_task(task);
    });
  }
  for (auto& t : pool) t.join();

  std::ofstream out(opt.out);
  if (!out) throw kpb::DataError("cannot open " + opt.out + " for writing");

  ordered_json header;
  header["record"] = "header";
  header["version"] = kpb::kVersion;
  header["data"] = opt.data;
  header["n"] = ds.n();
  header["dims"] = ds.dim();
  header["classes"] = ds.classes();
  std::string labels;
  for (std::size_t c = 0; c < ds.label_names.size(); ++c) {
    if (c) labels += ",";
    labels += ds.label_names[c];
  }
  header["label_encoding"] = labels;
  header["decomp"] = decomp;
  header["rounds"] = opt.rounds;
  header["folds"] = opt.folds;
  header["seed"] = opt.seed;
  header["kappa"] = kappa;
  header["disjunct_scope"] = opt.knn_scope;
  header["disjunct_graph"] = opt.graph;
  out << header.dump() << "\n";

  for (std::size_t c = 0; c < cells.size(); ++c) {
    int ok_folds = 0;
    double g = 0.0, a = 0.0, s = 0.0;
    std::vector<double> rec_sum(ds.classes(), 0.0);
    std::string first_error;
    for (int f = 0; f < opt.folds; ++f) {
      const FoldResult& r = results[c * opt.folds + f];
      ordered_json rec;
      rec["record"] = "fold";
      append_cell_keys(rec, opt, cells[c], static_cast<int>(c));
      rec["fold"] = f;
      rec["seed"] = opt.seed;
      if (r.ok) {
        rec["gmean"] = r.gmean;
        rec["auc"] = r.auc;
        rec["gsdi"] = r.gsdi;
        for (int cl = 0; cl < ds.classes(); ++cl)
          rec["recall_" + std::to_string(cl)] = r.recalls[cl];
        ++ok_folds;
        g += r.gmean;
        a += r.auc;
        s += r.gsdi;
        for (int cl = 0; cl < ds.classes(); ++cl) rec_sum[cl] += r.recalls[cl];
      } else {
        rec["error"] = r.error;
        if (first_error.empty()) first_error = r.error;
      }
      out << rec.dump() << "\n";
    }
    ordered_json avg;
    avg["record"] = ok_folds == opt.folds ? "cell-avg" : "cell-failed";
    append_cell_keys(avg, opt, cells[c], static_cast<int>(c));
    avg["seed"] = opt.seed;
    avg["folds_ok"] = ok_folds;
    if (ok_folds == opt.folds) {
      avg["gmean"] = g / ok_folds;
      avg["auc"] = a / ok_folds;
      avg["gsdi"] = s / ok_folds;
      for (int cl = 0; cl < ds.classes(); ++cl)
        avg["recall_" + std::to_string(cl)] = rec_sum[cl] / ok_folds;
    } else {
      avg["error"] = first_error;
    }
    out << avg.dump() << "\n";
  }
  if (!out) throw kpb::DataError("short write to " + opt.out);
  std::cout << "wrote " << opt.out << " (" << cells.size() << " cells x " << opt.folds
            << " folds)\n";
  return 0;
}

int cmd_train(const Options& opt) {
  if (opt.out.empty()) throw kpb::ConfigError("train requires --out");
  if (opt.algo != "svm" && opt.algo != "kpboost" && opt.algo != "kproi")
    throw kpb::ConfigError("--algo must be one of svm, kpboost, kproi");
  if (opt.sigma.size() != 1 || opt.cost.size() != 1 ||
      (opt.algo != "svm" && opt.step.size() != 1) ||
      (opt.algo == "kproi" && opt.theta.size() != 1))
    throw kpb::ConfigError("train takes single values, not grids");

  const kpb::Dataset ds = load_data(opt);
  const std::string decomp = resolve_decomp(opt, ds.classes());
  Cell cell;
  cell.sigma = opt.sigma[0];
  cell.cost = opt.cost[0];
  if (opt.algo != "svm") cell.step = opt.step[0];
  if (opt.algo == "kproi") cell.theta = opt.theta[0];

  const kpb::FeatureStats stats = kpb::feature_stats(ds);
  const kpb::Dataset norm = kpb::apply_stats(ds, stats);
  const kpb::BoostParams base = boost_params(opt, cell);

  kpb::ModelBundle bundle;
  bundle.algorithm = opt.algo;
  bundle.decomposition = decomp;
  bundle.stats = stats;
  bundle.label_names = ds.label_names;
  if (opt.algo == "kproi") {
    kpb::RoiParams rp{base, cell.theta.value_or(0.6)};
    if (decomp == "binary") {
      bundle.model = kpb::fit_roi(norm, rp);
    } else if (decomp == "ovo") {
      bundle.model = kpb::fit_ovo(norm, rp);
    } else {
      bundle.model = kpb::fit_ova(norm, rp);
    }
  } else {
    if (decomp == "binary") {
      bundle.model = kpb::fit(norm, base);
    } else if (decomp == "ovo") {
      bundle.model = kpb::fit_ovo(norm, base);
    } else {
      bundle.model = kpb::fit_ova(norm, base);
    }
  }
  kpb::save_model(opt.out, bundle);
  std::cout << "wrote " << opt.out << "\n";
  return 0;
}

int cmd_predict(const Options& opt) {
  if (opt.model.empty()) throw kpb::ConfigError("predict requires --model");
  if (opt.test.empty()) throw kpb::ConfigError("predict requires --test");

  const kpb::ModelBundle bundle = kpb::load_model(opt.model);
  const kpb::Dataset train_raw = load_data(opt);
  if (train_raw.label_names != bundle.label_names)
    throw kpb::DataError("training data labels do not match the model bundle");
  const kpb::Dataset test_raw = load_csv_default_last(opt.test, opt.label_column);

  const kpb::Dataset train = kpb::apply_stats(train_raw, bundle.stats);
  const kpb::Dataset test = kpb::apply_stats(test_raw, bundle.stats);

  Eigen::VectorXi pred_ids(test.n());
  Eigen::VectorXd margins;
  if (std::holds_alternative<kpb::Ensemble>(bundle.model)) {
    const auto& ens = std::get<kpb::Ensemble>(bundle.model);
    const kpb::Prediction pred =
        ens.roi ? kpb::predict_roi(ens, train, test) : kpb::predict(ens, train, test);
    pred_ids = kpb::to_class_ids(ens, pred.labels, train);
    margins = pred.margins;
  } else if (std::holds_alternative<kpb::OvoEnsemble>(bundle.model)) {
    pred_ids = kpb::predict_ovo(std::get<kpb::OvoEnsemble>(bundle.model), train, test);
  } else {
    pred_ids = kpb::predict_ova(std::get<kpb::OvaEnsemble>(bundle.model), train, test);
  }

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) throw kpb::DataError("cannot open " + opt.out + " for writing");
    os = &file;
  }
  for (int j = 0; j < test.n(); ++j) {
    *os << bundle.label_names[pred_ids[j]];
    if (margins.size() > 0) *os << " " << margins[j];
    *os << "\n";
  }
  return 0;
}

int cmd_disjuncts(const Options& opt) {
  if (opt.out.empty()) throw kpb::ConfigError("disjuncts requires --out");
  const kpb::Dataset ds = load_data(opt);
  const kpb::Dataset whole = kpb::normalize(ds, ds).first;
  const kpb::DisjunctOptions dopts = disjunct_options(opt);

  std::vector<std::pair<int, int>> points;
  int kappa = opt.kappa;
  if (kappa <= 0) {
    const kpb::KappaDeltaCurve curve = kpb::kappa_delta_curve(whole, dopts);
    points = curve.points;
    kappa = curve.knee;
  }
  const kpb::DisjunctPartition part = kpb::find_disjuncts(whole, kappa, dopts);
  if (points.empty()) points.push_back({kappa, part.delta_total()});

  {
    std::ofstream curve_out(opt.out + ".curve.txt");
    if (!curve_out) throw kpb::DataError("cannot open " + opt.out + ".curve.txt");
    for (const auto& [k, d] : points) curve_out << k << " " << d << "\n";
    curve_out << "# knee " << kappa << "\n";
    curve_out << "# graph " << opt.graph << " scope " << opt.knn_scope << "\n";
  }
  {
    std::ofstream part_out(opt.out + ".partition.txt");
    if (!part_out) throw kpb::DataError("cannot open " + opt.out + ".partition.txt");
    for (std::size_t c = 0; c < part.per_class.size(); ++c)
      for (std::size_t d = 0; d < part.per_class[c].size(); ++d)
        for (int i : part.per_class[c][d])
          part_out << c << " " << d << " " << i << "\n";
  }
  std::cout << "kappa " << kappa << " delta " << part.delta_total() << "\n";
  return 0;
}

int cmd_select(const Options& opt) {
  if (opt.reports.empty()) throw kpb::ConfigError("select requires report files");

  struct CellRow {
    std::string algo;
    ordered_json params;
    std::vector<double> recalls;
  };
  std::map<std::string, std::vector<CellRow>> by_algo;

  for (const std::string& path : opt.reports) {
    std::ifstream in(path);
    if (!in) throw kpb::DataError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ordered_json rec;
      try {
        rec = ordered_json::parse(line);
      } catch (const std::exception& e) {
        throw kpb::DataError(path + ": bad record: " + e.what());
      }
      if (rec.value("record", "") != std::string("cell-avg")) continue;
      CellRow row;
      row.algo = rec.value("algo", "unknown");
      for (const char* key : {"cell", "sigma", "cost", "step", "theta"})
        if (rec.contains(key)) row.params[key] = rec[key];
      for (int c = 0;; ++c) {
        const std::string key = "recall_" + std::to_string(c);
        if (!rec.contains(key)) break;
        row.recalls.push_back(rec[key].get<double>());
      }
      if (row.recalls.empty()) throw kpb::DataError(path + ": record without recalls");
      by_algo[row.algo].push_back(std::move(row));
    }
  }
  if (by_algo.empty()) throw kpb::DataError("select: no cell-avg records found");

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) throw kpb::DataError("cannot open " + opt.out + " for writing");
    os = &file;
  }

  for (const auto& [algo, rows] : by_algo) {
    if (rows.size() < 2)
      throw kpb::DataError("select: algorithm '" + algo + "' has fewer than two cells");
    const int classes = static_cast<int>(rows.front().recalls.size());
    kpb::ClassAccuracyTable table(static_cast<int>(rows.size()), classes);
    for (std::size_t h = 0; h < rows.size(); ++h) {
      if (static_cast<int>(rows[h].recalls.size()) != classes)
        throw kpb::DataError("select: inconsistent class counts across cells");
      for (int c = 0; c < classes; ++c) table(static_cast<int>(h), c) = rows[h].recalls[c];
    }
    const auto mu = kpb::mu_scores(table);
    const int best = kpb::select_best(table);
    ordered_json rec;
    rec["record"] = "winner";
    rec["algo"] = algo;
    rec["mu"] = mu[best];
    rec["params"] = rows[best].params;
    *os << rec.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-perturbation boosted SVMs for imbalanced data"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--data", opt.data, "input CSV file")->required();
    sub->add_option("--label-column", opt.label_column,
                    "label column index (default: last)");
    sub->add_option("--out", opt.out, "output path");
  };
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--algo", opt.algo, "svm | kpboost | kproi");
    sub->add_option("--decomp", opt.decomp, "auto | ovo | ova");
    sub->add_option("--sigma", opt.sigma, "RBF width grid")->delimiter(',');
    sub->add_option("--cost", opt.cost, "regularization grid")->delimiter(',');
    sub->add_option("--step", opt.step, "perturbation step grid")->delimiter(',');
    sub->add_option("--theta", opt.theta, "ROI scaling grid")->delimiter(',');
    sub->add_option("--rounds", opt.rounds, "boosting rounds");
  };

  auto* cv = app.add_subcommand("cv", "cross-validated grid evaluation");
  add_common(cv);
  add_model_flags(cv);
  cv->add_option("--folds", opt.folds, "fold count");
  cv->add_option("--seed", opt.seed, "fold-plan seed")->each([&](const std::string&) {
    opt.seed_set = true;
  });
  cv->add_option("--kappa", opt.kappa, "fixed disjunct neighborhood size");
  cv->add_option("--threads", opt.threads, "worker threads (default: hardware)");
  cv->add_option("--knn-scope", opt.knn_scope, "within | global");
  cv->add_option("--graph", opt.graph, "symmetric | directed");

  auto* train = app.add_subcommand("train", "fit one model on the full dataset");
  add_common(train);
  add_model_flags(train);

  auto* predict = app.add_subcommand("predict", "predict with a trained model");
  add_common(predict);
  predict->add_option("--model", opt.model, "model bundle path")->required();
  predict->add_option("--test", opt.test, "CSV file to predict")->required();

  auto* disjuncts = app.add_subcommand("disjuncts", "disjunct profile of a dataset");
  add_common(disjuncts);
  disjuncts->add_option("--kappa", opt.kappa, "fixed neighborhood size (default: knee)");
  disjuncts->add_option("--knn-scope", opt.knn_scope, "within | global");
  disjuncts->add_option("--graph", opt.graph, "symmetric | directed");

  auto* select = app.add_subcommand("select", "mu-based selection across report files");
  select->add_option("reports", opt.reports, "cv report files")->required();
  select->add_option("--out", opt.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (cv->parsed()) return cmd_cv(opt);
    if (train->parsed()) return cmd_train(opt);
    if (predict->parsed()) return cmd_predict(opt);
    if (disjuncts->parsed()) return cmd_disjuncts(opt);
    if (select->parsed()) return cmd_select(opt);
    throw kpb::ConfigError("no subcommand");
  } catch (const kpb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kpb::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const kpb::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

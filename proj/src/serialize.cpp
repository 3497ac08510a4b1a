#include "kpb/serialize.hpp"

#include <fstream>

#include "kpb/errors.hpp"
#include "kpb/version.hpp"

namespace kpb {

namespace {

ordered_json vec_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json vec_to_json(const Eigen::VectorXi& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vecd_from_json(const ordered_json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

Eigen::VectorXi veci_from_json(const ordered_json& a) {
  Eigen::VectorXi v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<int>();
  return v;
}

}  // namespace

ordered_json ensemble_to_json(const Ensemble& ens) {
  ordered_json j;
  j["format"] = "kpboost-ensemble";
  j["version"] = 1;
  j["sigma"] = ens.sigma;
  j["cost"] = ens.C;
  j["step"] = ens.step;
  j["positive_class"] = ens.positive_class;
  if (ens.roi) {
    j["roi"] = {{"roi_pos", ens.roi->roi_pos},
                {"roi_neg", ens.roi->roi_neg},
                {"theta", ens.roi->theta}};
  }
  ordered_json rounds = ordered_json::array();
  for (const RoundRecord& r : ens.rounds) {
    ordered_json rj;
    rj["alpha"] = r.alpha;
    rj["epsilon"] = r.epsilon;
    rj["tpr"] = r.tpr;
    rj["tnr"] = r.tnr;
    rj["retained"] = r.retained;
    rj["lambda"] = vec_to_json(r.model.lambda);
    rj["bias"] = r.model.bias;
    rj["labels_signed"] = vec_to_json(r.model.labels_signed);
    rj["C"] = r.model.C;
    rj["D_train"] = vec_to_json(r.D_train);
    rounds.push_back(std::move(rj));
  }
  j["rounds"] = std::move(rounds);
  ordered_json hist = ordered_json::array();
  for (const auto& k : ens.perturbation_history) hist.push_back(vec_to_json(k));
  j["k_history"] = std::move(hist);
  return j;
}

Ensemble ensemble_from_json(const ordered_json& j) {
  if (j.value("format", "") != std::string("kpboost-ensemble"))
    throw DataError("ensemble load: unrecognized format");
  Ensemble ens;
  ens.sigma = j.at("sigma").get<double>();
  ens.C = j.at("cost").get<double>();
  ens.step = j.at("step").get<double>();
  ens.positive_class = j.at("positive_class").get<int>();
  if (j.contains("roi")) {
    RoiInfo info;
    info.roi_pos = j["roi"].at("roi_pos").get<double>();
    info.roi_neg = j["roi"].at("roi_neg").get<double>();
    info.theta = j["roi"].at("theta").get<double>();
    ens.roi = info;
  }
  for (const auto& rj : j.at("rounds")) {
    RoundRecord r;
    r.alpha = rj.at("alpha").get<double>();
    r.epsilon = rj.at("epsilon").get<double>();
    r.tpr = rj.at("tpr").get<double>();
    r.tnr = rj.at("tnr").get<double>();
    r.retained = rj.at("retained").get<bool>();
    r.model.lambda = vecd_from_json(rj.at("lambda"));
    r.model.bias = rj.at("bias").get<double>();
    r.model.labels_signed = veci_from_json(rj.at("labels_signed"));
    r.model.C = rj.at("C").get<double>();
    for (int i = 0; i < r.model.lambda.size(); ++i)
      if (r.model.lambda[i] > 0.0) r.model.sv_indices.push_back(i);
    r.D_train = vecd_from_json(rj.at("D_train"));
    ens.rounds.push_back(std::move(r));
  }
  for (const auto& kj : j.at("k_history"))
    ens.perturbation_history.push_back(vecd_from_json(kj));
  return ens;
}

void save_model(const std::string& path, const ModelBundle& bundle) {
  ordered_json j;
  j["format"] = "kpboost-model";
  j["version"] = 1;
  j["tool_version"] = kVersion;
  j["algorithm"] = bundle.algorithm;
  j["decomposition"] = bundle.decomposition;
  j["feature_mean"] = vec_to_json(bundle.stats.mean);
  j["feature_std"] = vec_to_json(bundle.stats.stddev);
  j["label_names"] = bundle.label_names;

  if (std::holds_alternative<Ensemble>(bundle.model)) {
    j["model"] = ensemble_to_json(std::get<Ensemble>(bundle.model));
  } else if (std::holds_alternative<OvoEnsemble>(bundle.model)) {
    const auto& ovo = std::get<OvoEnsemble>(bundle.model);
    j["classes"] = ovo.classes;
    ordered_json pairs = ordered_json::array();
    for (const auto& p : ovo.pairs) {
      pairs.push_back({{"class_a", p.class_a},
                       {"class_b", p.class_b},
                       {"ensemble", ensemble_to_json(p.ensemble)}});
    }
    j["pairs"] = std::move(pairs);
  } else {
    const auto& ova = std::get<OvaEnsemble>(bundle.model);
    j["classes"] = ova.classes;
    ordered_json per = ordered_json::array();
    for (const auto& e : ova.per_class) per.push_back(ensemble_to_json(e));
    j["per_class"] = std::move(per);
  }

  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << j.dump(1) << "\n";
  if (!out) throw DataError("short write to " + path);
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (j.value("format", "") != std::string("kpboost-model"))
    throw DataError(path + ": not a model bundle");

  ModelBundle b;
  b.algorithm = j.at("algorithm").get<std::string>();
  b.decomposition = j.at("decomposition").get<std::string>();
  b.stats.mean = vecd_from_json(j.at("feature_mean"));
  b.stats.stddev = vecd_from_json(j.at("feature_std"));
  b.label_names = j.at("label_names").get<std::vector<std::string>>();

  if (b.decomposition == "binary") {
    b.model = ensemble_from_json(j.at("model"));
  } else if (b.decomposition == "ovo") {
    OvoEnsemble ovo;
    ovo.classes = j.at("classes").get<int>();
    for (const auto& pj : j.at("pairs")) {
      OvoEnsemble::Pair p;
      p.class_a = pj.at("class_a").get<int>();
      p.class_b = pj.at("class_b").get<int>();
      p.ensemble = ensemble_from_json(pj.at("ensemble"));
      ovo.pairs.push_back(std::move(p));
    }
    b.model = std::move(ovo);
  } else if (b.decomposition == "ova") {
    OvaEnsemble ova;
    ova.classes = j.at("classes").get<int>();
    for (const auto& ej : j.at("per_class"))
      ova.per_class.push_back(ensemble_from_json(ej));
    b.model = std::move(ova);
  } else {
    throw DataError(path + ": unknown decomposition '" + b.decomposition + "'");
  }
  return b;
}

}  // namespace kpb

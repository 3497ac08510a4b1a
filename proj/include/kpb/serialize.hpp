#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "kpb/boost.hpp"
#include "kpb/dataset.hpp"
#include "kpb/multiclass.hpp"

namespace kpb {

using ordered_json = nlohmann::ordered_json;

ordered_json ensemble_to_json(const Ensemble& ens);
Ensemble ensemble_from_json(const ordered_json& j);

// Everything needed to reload a trained model and predict on raw CSV data:
// the fitted ensembles, the normalization statistics of the training data,
// and the label encoding.
struct ModelBundle {
  std::string algorithm;      // "svm", "kpboost" or "kproi"
  std::string decomposition;  // "binary", "ovo" or "ova"
  FeatureStats stats;
  std::vector<std::string> label_names;
  std::variant<Ensemble, OvoEnsemble, OvaEnsemble> model;
};

void save_model(const std::string& path, const ModelBundle& bundle);
ModelBundle load_model(const std::string& path);

}  // namespace kpb

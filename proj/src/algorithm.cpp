#include "enose/algorithm.hpp"

#include <sstream>

#include "enose/error.hpp"

namespace enose {
namespace {

using nlohmann::json;

constexpr std::string_view kKeys[] = {"lr", "mlp", "cnn", "dt", "rf", "ada", "svm"};
constexpr std::string_view kNames[] = {"Logistic regression", "MLP", "CNN", "Decision tree",
                                       "Random Forest", "AdaBoostTree", "SVM"};

json sgd_json(const SgdParams& p) {
  return {{"epochs", p.epochs},
          {"batch_size", p.batch_size},
          {"learning_rate", p.learning_rate},
          {"momentum", p.momentum},
          {"gradient_clip", p.gradient_clip}};
}

SgdParams sgd_from(const json& j) {
  SgdParams p;
  p.epochs = j.at("epochs").get<int>();
  p.batch_size = j.at("batch_size").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.momentum = j.at("momentum").get<double>();
  p.gradient_clip = j.at("gradient_clip").get<double>();
  return p;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw InvalidHyperparameter(what);
}

void validate_sgd(const SgdParams& p) {
  check(p.epochs >= 1, "epochs must be >= 1");
  check(p.batch_size >= 1, "batch_size must be >= 1");
  check(p.learning_rate > 0.0, "learning_rate must be > 0");
  check(p.momentum >= 0.0 && p.momentum < 1.0, "momentum must be in [0, 1)");
}

}  // namespace

std::string_view algorithm_key(Algorithm algorithm) { return kKeys[static_cast<int>(algorithm)]; }

AlgorithmSpec AlgorithmSpec::make(Algorithm algorithm, Preprocessing preprocessing) {
  AlgorithmSpec spec;
  spec.preprocessing = preprocessing;
  switch (algorithm) {
    case Algorithm::LogisticRegression:
      spec.params = LogisticParams{};
      break;
    case Algorithm::Mlp:
      spec.params = MlpParams{};
      break;
    case Algorithm::Cnn:
      spec.params = CnnParams{};
      spec.preprocessing = Preprocessing::Raw;
      break;
    case Algorithm::DecisionTree:
      spec.params = TreeParams{};
      break;
    case Algorithm::RandomForest:
      spec.params = ForestParams{};
      break;
    case Algorithm::AdaBoost:
      spec.params = AdaBoostParams{};
      break;
    case Algorithm::Svm:
      spec.params = SvmParams{};
      break;
  }
  return spec;
}

void AlgorithmSpec::validate() const {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogisticParams>) {
          check(p.l2 >= 0.0, "l2 must be >= 0");
          check(p.learning_rate > 0.0, "learning_rate must be > 0");
          check(p.iterations >= 1, "iterations must be >= 1");
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          check(!p.hidden.empty(), "MLP needs at least one hidden layer");
          for (int h : p.hidden) check(h >= 1, "hidden widths must be >= 1");
          check(p.dropout >= 0.0 && p.dropout < 1.0, "dropout must be in [0, 1)");
          validate_sgd(p.sgd);
        } else if constexpr (std::is_same_v<P, CnnParams>) {
          check(preprocessing == Preprocessing::Raw,
                "CNN consumes the raw 4x10 grid; projection would destroy it");
          check(p.conv1_filters >= 1 && p.conv2_filters >= 1 && p.dense_units >= 1,
                "CNN layer sizes must be >= 1");
          check(p.dropout >= 0.0 && p.dropout < 1.0, "dropout must be in [0, 1)");
          validate_sgd(p.sgd);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          check(p.min_samples_split >= 2, "min_samples_split must be >= 2");
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          check(p.trees >= 1, "trees must be >= 1");
          check(p.min_samples_split >= 2, "min_samples_split must be >= 2");
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          check(p.rounds >= 1, "rounds must be >= 1");
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          check(p.c > 0.0, "C must be > 0");
          check(p.tolerance > 0.0, "tolerance must be > 0");
          check(p.max_iterations >= 1, "max_iterations must be >= 1");
        }
      },
      params);
}

std::string AlgorithmSpec::key() const {
  std::string k(algorithm_key(algorithm()));
  if (preprocessing == Preprocessing::Raw && algorithm() != Algorithm::Cnn) k += "-raw";
  return k;
}

std::string AlgorithmSpec::display_name() const {
  std::string n(kNames[static_cast<int>(algorithm())]);
  if (preprocessing == Preprocessing::Raw) n += " (no preprocessing)";
  return n;
}

json AlgorithmSpec::to_json() const {
  json p = std::visit(
      [](const auto& v) -> json {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, LogisticParams>) {
          return {{"l2", v.l2}, {"learning_rate", v.learning_rate}, {"iterations", v.iterations}};
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          return {{"hidden", v.hidden},
                  {"dropout", v.dropout},
                  {"standardize_inputs", v.standardize_inputs},
                  {"sgd", sgd_json(v.sgd)}};
        } else if constexpr (std::is_same_v<P, CnnParams>) {
          return {{"conv1_filters", v.conv1_filters},
                  {"conv2_filters", v.conv2_filters},
                  {"dense_units", v.dense_units},
                  {"dropout", v.dropout},
                  {"sgd", sgd_json(v.sgd)}};
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return {{"max_depth", v.max_depth}, {"min_samples_split", v.min_samples_split}};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          return {{"trees", v.trees},
                  {"max_depth", v.max_depth},
                  {"min_samples_split", v.min_samples_split}};
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          return {{"rounds", v.rounds}};
        } else {
          return {{"c", v.c},
                  {"kernel", v.kernel == SvmKernel::Rbf ? "rbf" : "linear"},
                  {"gamma", v.gamma},
                  {"tolerance", v.tolerance},
                  {"max_iterations", v.max_iterations}};
        }
      },
      params);
  json proj = {{"normalization",
                projection.normalization == NormalizationMode::PerVector ? "per_vector" : "per_column"}};
  if (const auto* f = std::get_if<VarianceFraction>(&projection.pca)) {
    proj["pca_variance_fraction"] = f->value;
  } else {
    proj["pca_components"] = std::get<ComponentCount>(projection.pca).value;
  }
  return {{"algorithm", std::string(algorithm_key(algorithm()))},
          {"preprocessing", preprocessing == Preprocessing::Raw ? "raw" : "projection"},
          {"projection", std::move(proj)},
          {"hyperparameters", std::move(p)}};
}

AlgorithmSpec AlgorithmSpec::from_json(const json& j) {
  const std::string key = j.at("algorithm").get<std::string>();
  int index = -1;
  for (int i = 0; i < 7; ++i) {
    if (kKeys[i] == key) index = i;
  }
  if (index < 0) throw CorruptModel("unknown algorithm '" + key + "'");
  const std::string pre = j.at("preprocessing").get<std::string>();
  if (pre != "raw" && pre != "projection") throw CorruptModel("unknown preprocessing '" + pre + "'");
  AlgorithmSpec spec = make(static_cast<Algorithm>(index),
                            pre == "raw" ? Preprocessing::Raw : Preprocessing::WithProjection);
  spec.preprocessing = pre == "raw" ? Preprocessing::Raw : Preprocessing::WithProjection;

  const json& proj = j.at("projection");
  spec.projection.normalization = proj.at("normalization").get<std::string>() == "per_column"
                                      ? NormalizationMode::PerColumn
                                      : NormalizationMode::PerVector;
  if (proj.contains("pca_components")) {
    spec.projection.pca = ComponentCount{proj.at("pca_components").get<std::size_t>()};
  } else {
    spec.projection.pca = VarianceFraction{proj.at("pca_variance_fraction").get<double>()};
  }

  const json& h = j.at("hyperparameters");
  std::visit(
      [&](auto& v) {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, LogisticParams>) {
          v.l2 = h.at("l2").get<double>();
          v.learning_rate = h.at("learning_rate").get<double>();
          v.iterations = h.at("iterations").get<int>();
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          v.hidden = h.at("hidden").get<std::vector<int>>();
          v.dropout = h.at("dropout").get<double>();
          v.standardize_inputs = h.at("standardize_inputs").get<bool>();
          v.sgd = sgd_from(h.at("sgd"));
        } else if constexpr (std::is_same_v<P, CnnParams>) {
          v.conv1_filters = h.at("conv1_filters").get<int>();
          v.conv2_filters = h.at("conv2_filters").get<int>();
          v.dense_units = h.at("dense_units").get<int>();
          v.dropout = h.at("dropout").get<double>();
          v.sgd = sgd_from(h.at("sgd"));
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          v.max_depth = h.at("max_depth").get<int>();
          v.min_samples_split = h.at("min_samples_split").get<int>();
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          v.trees = h.at("trees").get<int>();
          v.max_depth = h.at("max_depth").get<int>();
          v.min_samples_split = h.at("min_samples_split").get<int>();
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          v.rounds = h.at("rounds").get<int>();
        } else {
          v.c = h.at("c").get<double>();
          v.kernel = h.at("kernel").get<std::string>() == "linear" ? SvmKernel::Linear : SvmKernel::Rbf;
          v.gamma = h.at("gamma").get<double>();
          v.tolerance = h.at("tolerance").get<double>();
          v.max_iterations = h.at("max_iterations").get<int>();
        }
      },
      spec.params);
  return spec;
}

AlgorithmSpec parse_algorithm_spec(std::string_view key) {
  std::string_view base = key;
  Preprocessing pre = Preprocessing::WithProjection;
  if (base.size() > 4 && base.substr(base.size() - 4) == "-raw") {
    base.remove_suffix(4);
    pre = Preprocessing::Raw;
  }
  for (int i = 0; i < 7; ++i) {
    if (kKeys[i] == base) return AlgorithmSpec::make(static_cast<Algorithm>(i), pre);
  }
  throw InvalidConfig("unknown algorithm '" + std::string(key) +
                      "' (expected lr, mlp, cnn, dt, rf, ada or svm, optionally with -raw)");
}

std::vector<AlgorithmSpec> paper_candidates() {
  return {
      AlgorithmSpec::make(Algorithm::Mlp, Preprocessing::Raw),
      AlgorithmSpec::make(Algorithm::Cnn, Preprocessing::Raw),
      AlgorithmSpec::make(Algorithm::Mlp),
      AlgorithmSpec::make(Algorithm::RandomForest),
      AlgorithmSpec::make(Algorithm::Svm),
      AlgorithmSpec::make(Algorithm::AdaBoost),
      AlgorithmSpec::make(Algorithm::LogisticRegression),
  };
}

std::vector<AlgorithmSpec> all_candidates() {
  auto out = paper_candidates();
  out.push_back(AlgorithmSpec::make(Algorithm::DecisionTree));
  return out;
}

std::vector<AlgorithmSpec> parse_candidates(std::string_view list) {
  if (list == "all") return all_candidates();
  if (list == "paper") return paper_candidates();
  std::vector<AlgorithmSpec> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const std::string_view item =
        list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) out.push_back(parse_algorithm_spec(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidConfig("empty candidate list");
  return out;
}

MlpParams freshness_net_params() {
  MlpParams p;
  p.hidden = {16, 16};
  p.dropout = 0.0;
  p.standardize_inputs = true;
  // A label's branch sees a few dozen rows; at 1e-3 fifty epochs barely move it.
  p.sgd.learning_rate = 0.1;
  return p;
}

}  // namespace enose

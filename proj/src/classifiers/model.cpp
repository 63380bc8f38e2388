#include "histostack/classifiers/model.hpp"

#include <set>

namespace histostack {
namespace {

using nlohmann::json;

void reject_unknown(const json& params, std::initializer_list<const char*> known, std::string_view head) {
  if (params.is_null()) return;
  if (!params.is_object()) fail(ErrorCode::kBadConfig, "hyper-parameters must be a JSON object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : params.items()) {
    if (!allowed.contains(key)) {
      fail(ErrorCode::kBadConfig, "unknown " + std::string(head) + " parameter '" + key + "'");
    }
  }
}

template <typename T>
T get_or(const json& params, const char* key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kBadConfig, std::string("bad value for parameter '") + key + "'");
  }
}

std::size_t get_count(const json& params, const char* key, std::size_t fallback) {
  const auto v = get_or<std::int64_t>(params, key, static_cast<std::int64_t>(fallback));
  if (v < 0) fail(ErrorCode::kBadConfig, std::string("parameter '") + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) nodes.push_back({{"value", n.value}});
    else nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
  }
  return nodes;
}

Tree tree_from_json(const json& doc) {
  Tree tree;
  for (const auto& n : doc) {
    TreeNode node;
    if (n.contains("feature")) {
      node.feature = n.at("feature").get<std::int32_t>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<std::int32_t>();
      node.right = n.at("right").get<std::int32_t>();
    } else {
      node.value = n.at("value").get<double>();
    }
    tree.nodes.push_back(node);
  }
  const auto count = static_cast<std::int32_t>(tree.nodes.size());
  for (std::int32_t i = 0; i < count; ++i) {
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= count || n.right >= count)) {
      fail(ErrorCode::kFormatError, "tree node references an invalid child");
    }
  }
  if (tree.nodes.empty()) fail(ErrorCode::kFormatError, "empty tree");
  return tree;
}

json matrix_to_json(const FeatureMatrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

FeatureMatrix matrix_from_json(const json& doc) {
  return FeatureMatrix(doc.at("rows").get<std::size_t>(), doc.at("cols").get<std::size_t>(),
                       doc.at("values").get<std::vector<float>>());
}

struct ToJson {
  json operator()(const LRModel& m) const {
    return {{"type", "lr"},
            {"num_classes", m.num_classes},
            {"num_features", m.num_features},
            {"c", m.c},
            {"intercepts", m.intercepts},
            {"coefficients", m.coefficients},
            {"converged", m.converged},
            {"iterations", m.iterations}};
  }
  json operator()(const SVCModel& m) const {
    json machines = json::array();
    for (const auto& svm : m.machines) {
      machines.push_back({{"support_vectors", matrix_to_json(svm.support_vectors)},
                          {"dual_coefs", svm.dual_coefs},
                          {"bias", svm.bias}});
    }
    return {{"type", "svc"},
            {"num_classes", m.num_classes},
            {"num_features", m.num_features},
            {"c", m.c},
            {"kernel", {{"kind", kernel_name(m.kernel.kind)},
                        {"gamma", m.kernel.gamma},
                        {"degree", m.kernel.degree},
                        {"coef0", m.kernel.coef0}}},
            {"converged", m.converged},
            {"machines", machines}};
  }
  json operator()(const ForestModel& m) const {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    return {{"type", "rf"},
            {"num_classes", m.num_classes},
            {"num_features", m.num_features},
            {"max_features", m.max_features},
            {"max_depth", m.max_depth ? json(*m.max_depth) : json(nullptr)},
            {"bootstrap", m.bootstrap},
            {"seed", m.seed},
            {"trees", trees}};
  }
  json operator()(const GBDTModel& m) const {
    json per_class = json::array();
    for (const auto& seq : m.stages) {
      json stages = json::array();
      for (const auto& st : seq) stages.push_back({{"shrinkage", st.shrinkage}, {"tree", tree_to_json(st.tree)}});
      per_class.push_back(stages);
    }
    return {{"type", "lgbm"},
            {"num_classes", m.num_classes},
            {"num_features", m.num_features},
            {"num_leaves", m.num_leaves},
            {"min_samples_leaf", m.min_samples_leaf},
            {"learning_rate", m.learning_rate},
            {"lambda", m.lambda},
            {"initial_scores", m.initial_scores},
            {"stages", per_class}};
  }
};

}  // namespace

std::string_view head_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::kLR: return "lr";
    case HeadKind::kSVC: return "svc";
    case HeadKind::kRF: return "rf";
    case HeadKind::kGBDT: return "lgbm";
  }
  return "lr";
}

HeadKind parse_head(std::string_view name) {
  if (name == "lr") return HeadKind::kLR;
  if (name == "svc") return HeadKind::kSVC;
  if (name == "rf") return HeadKind::kRF;
  if (name == "lgbm") return HeadKind::kGBDT;
  fail(ErrorCode::kBadConfig, "unknown classifier head '" + std::string(name) + "'");
}

HeadKind head_kind(const ClassifierModel& model) { return static_cast<HeadKind>(model.index()); }

ClassifierModel fit_head(HeadKind kind, const FeatureMatrix& x, std::span<const std::int64_t> y,
                         const json& params, const FitContext& ctx) {
  switch (kind) {
    case HeadKind::kLR: {
      reject_unknown(params, {"c", "tol", "max_iter"}, "lr");
      LRParams p;
      p.c = get_or(params, "c", p.c);
      p.tol = get_or(params, "tol", p.tol);
      p.max_iter = get_or(params, "max_iter", p.max_iter);
      p.threads = ctx.threads;
      return lr_fit(x, y, p, ctx.num_classes);
    }
    case HeadKind::kSVC: {
      reject_unknown(params, {"C", "kernel", "gamma", "degree", "coef0", "tol", "max_iter"}, "svc");
      SVCParams p;
      p.c = get_or(params, "C", p.c);
      p.kernel.kind = parse_kernel(get_or<std::string>(params, "kernel", "rbf"));
      if (params.contains("gamma") && params.at("gamma").is_string()) {
        if (params.at("gamma") != "auto") fail(ErrorCode::kBadKernelParams, "gamma must be a number or \"auto\"");
        p.kernel.gamma = 1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1));
      } else {
        p.kernel.gamma = get_or(params, "gamma", 1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1)));
      }
      p.kernel.degree = get_or(params, "degree", p.kernel.degree);
      p.kernel.coef0 = get_or(params, "coef0", p.kernel.coef0);
      p.tol = get_or(params, "tol", p.tol);
      p.max_iter = get_or(params, "max_iter", p.max_iter);
      p.threads = ctx.threads;
      return svc_fit(x, y, p, ctx.num_classes);
    }
    case HeadKind::kRF: {
      reject_unknown(params, {"n_estimators", "max_features", "max_depth", "bootstrap"}, "rf");
      RFParams p;
      p.n_estimators = get_count(params, "n_estimators", p.n_estimators);
      p.max_features = get_count(params, "max_features", p.max_features);
      if (params.contains("max_depth") && !params.at("max_depth").is_null()) {
        p.max_depth = get_count(params, "max_depth", 0);
      }
      p.bootstrap = get_or(params, "bootstrap", p.bootstrap);
      p.seed = ctx.seed;
      p.threads = ctx.threads;
      return rf_fit(x, y, p, ctx.num_classes);
    }
    case HeadKind::kGBDT: {
      reject_unknown(params, {"n_stages", "learning_rate", "num_leaves", "min_samples_leaf", "lambda"}, "lgbm");
      GBDTParams p;
      p.n_stages = get_count(params, "n_stages", p.n_stages);
      p.learning_rate = get_or(params, "learning_rate", p.learning_rate);
      p.num_leaves = get_count(params, "num_leaves", p.num_leaves);
      p.min_samples_leaf = get_count(params, "min_samples_leaf", p.min_samples_leaf);
      p.lambda = get_or(params, "lambda", p.lambda);
      p.threads = ctx.threads;
      return gbdt_fit(x, y, p, ctx.num_classes);
    }
  }
  fail(ErrorCode::kBadConfig, "unknown classifier head");
}

Labels predict_labels(const ClassifierModel& model, const FeatureMatrix& x) {
  struct Visitor {
    const FeatureMatrix& x;
    Labels operator()(const LRModel& m) const { return lr_predict(m, x); }
    Labels operator()(const SVCModel& m) const { return svc_predict(m, x); }
    Labels operator()(const ForestModel& m) const { return rf_predict(m, x); }
    Labels operator()(const GBDTModel& m) const { return gbdt_predict(m, x); }
  };
  return std::visit(Visitor{x}, model);
}

std::size_t model_num_features(const ClassifierModel& model) {
  return std::visit([](const auto& m) { return m.num_features; }, model);
}

json model_to_json(const ClassifierModel& model) {
  json doc = std::visit(ToJson{}, model);
  doc["schema_version"] = kModelSchemaVersion;
  return doc;
}

ClassifierModel model_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kModelSchemaVersion) {
      fail(ErrorCode::kFormatError, "unsupported model schema version");
    }
    const auto kind = parse_head(doc.at("type").get<std::string>());
    switch (kind) {
      case HeadKind::kLR: {
        LRModel m;
        m.num_classes = doc.at("num_classes").get<std::size_t>();
        m.num_features = doc.at("num_features").get<std::size_t>();
        m.c = doc.at("c").get<double>();
        m.intercepts = doc.at("intercepts").get<std::vector<double>>();
        m.coefficients = doc.at("coefficients").get<std::vector<std::vector<double>>>();
        m.converged = doc.at("converged").get<bool>();
        m.iterations = doc.at("iterations").get<std::vector<int>>();
        if (m.intercepts.size() != m.num_classes || m.coefficients.size() != m.num_classes) {
          fail(ErrorCode::kFormatError, "LR model arrays do not match the class count");
        }
        for (const auto& row : m.coefficients) {
          if (row.size() != m.num_features) fail(ErrorCode::kFormatError, "LR coefficient width mismatch");
        }
        return m;
      }
      case HeadKind::kSVC: {
        SVCModel m;
        m.num_classes = doc.at("num_classes").get<std::size_t>();
        m.num_features = doc.at("num_features").get<std::size_t>();
        m.c = doc.at("c").get<double>();
        const auto& k = doc.at("kernel");
        m.kernel = {parse_kernel(k.at("kind").get<std::string>()), k.at("gamma").get<double>(),
                    k.at("degree").get<int>(), k.at("coef0").get<double>()};
        m.converged = doc.at("converged").get<bool>();
        for (const auto& svm : doc.at("machines")) {
          BinarySVM b;
          b.support_vectors = matrix_from_json(svm.at("support_vectors"));
          b.dual_coefs = svm.at("dual_coefs").get<std::vector<double>>();
          b.bias = svm.at("bias").get<double>();
          if (b.support_vectors.rows() != b.dual_coefs.size() ||
              (b.support_vectors.rows() > 0 && b.support_vectors.cols() != m.num_features)) {
            fail(ErrorCode::kFormatError, "SVC machine shape mismatch");
          }
          m.machines.push_back(std::move(b));
        }
        return m;
      }
      case HeadKind::kRF: {
        ForestModel m;
        m.num_classes = doc.at("num_classes").get<std::size_t>();
        m.num_features = doc.at("num_features").get<std::size_t>();
        m.max_features = doc.at("max_features").get<std::size_t>();
        if (!doc.at("max_depth").is_null()) m.max_depth = doc.at("max_depth").get<std::size_t>();
        m.bootstrap = doc.at("bootstrap").get<bool>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& t : doc.at("trees")) m.trees.push_back(tree_from_json(t));
        return m;
      }
      case HeadKind::kGBDT: {
        GBDTModel m;
        m.num_classes = doc.at("num_classes").get<std::size_t>();
        m.num_features = doc.at("num_features").get<std::size_t>();
        m.num_leaves = doc.at("num_leaves").get<std::size_t>();
        m.min_samples_leaf = doc.at("min_samples_leaf").get<std::size_t>();
        m.learning_rate = doc.at("learning_rate").get<double>();
        m.lambda = doc.at("lambda").get<double>();
        m.initial_scores = doc.at("initial_scores").get<std::vector<double>>();
        for (const auto& seq : doc.at("stages")) {
          std::vector<BoostStage> stages;
          for (const auto& st : seq) stages.push_back({tree_from_json(st.at("tree")), st.at("shrinkage").get<double>()});
          m.stages.push_back(std::move(stages));
        }
        if (m.initial_scores.size() != m.num_classes || m.stages.size() != m.num_classes) {
          fail(ErrorCode::kFormatError, "GBDT model arrays do not match the class count");
        }
        return m;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed model document: ") + e.what());
  }
  fail(ErrorCode::kFormatError, "unknown model type");
}

}  // namespace histostack

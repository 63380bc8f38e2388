#include "doctest.h"
#include "histostack/classifiers/model.hpp"
#include "histostack/rng.hpp"
#include "test_support.hpp"

using namespace histostack;
using nlohmann::json;

namespace {

struct Data {
  FeatureMatrix x;
  Labels y;
};

// Three well separated clusters in 4-D.
Data clusters(std::uint64_t seed, std::size_t per_class = 15) {
  Rng rng(seed);
  const std::size_t n = 3 * per_class;
  Data d{FeatureMatrix(n, 4), Labels(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::int64_t>(i % 3);
    d.y[i] = c;
    for (std::size_t j = 0; j < 4; ++j) {
      d.x(i, j) = static_cast<float>((j == static_cast<std::size_t>(c) ? 4.0 : 0.0) + 0.3 * rng.normal());
    }
  }
  return d;
}

const json kSmall[] = {
    {{"c", 10.0}},
    {{"C", 10.0}, {"kernel", "rbf"}, {"gamma", "auto"}},
    {{"n_estimators", 15}, {"max_depth", nullptr}},
    {{"n_stages", 20}, {"num_leaves", 4}},
};

}  // namespace

TEST_CASE("head names") {
  for (auto k : {HeadKind::kLR, HeadKind::kSVC, HeadKind::kRF, HeadKind::kGBDT}) CHECK(parse_head(head_name(k)) == k);
  CHECK(head_name(HeadKind::kGBDT) == "lgbm");
  CHECK_ERROR_CODE(parse_head("xgb"), ErrorCode::kBadConfig);
}

TEST_CASE("every head fits separable data perfectly") {
  const auto d = clusters(1);
  for (int h = 0; h < 4; ++h) {
    const auto kind = static_cast<HeadKind>(h);
    const auto model = fit_head(kind, d.x, d.y, kSmall[h], {.seed = 4});
    CHECK(head_kind(model) == kind);
    CHECK(predict_labels(model, d.x) == d.y);
    CHECK(model_num_features(model) == 4);
  }
}

TEST_CASE("models survive a JSON round trip") {
  const auto d = clusters(2);
  const auto probe = clusters(3).x;
  for (int h = 0; h < 4; ++h) {
    const auto model = fit_head(static_cast<HeadKind>(h), d.x, d.y, kSmall[h], {.seed = 4});
    const auto doc = model_to_json(model);
    CHECK(doc.at("schema_version") == kModelSchemaVersion);
    const auto back = model_from_json(json::parse(doc.dump()));
    CHECK(model_to_json(back).dump() == doc.dump());
    CHECK(predict_labels(back, probe) == predict_labels(model, probe));
  }
}

TEST_CASE("parameters reach the classifier") {
  const auto d = clusters(4);
  const auto svc = std::get<SVCModel>(fit_head(HeadKind::kSVC, d.x, d.y, {{"kernel", "poly"}, {"degree", 2}, {"gamma", "auto"}}));
  CHECK(svc.kernel.kind == KernelKind::kPoly);
  CHECK(svc.kernel.degree == 2);
  CHECK(svc.kernel.gamma == 0.25);
  const auto rf = std::get<ForestModel>(fit_head(HeadKind::kRF, d.x, d.y, {{"n_estimators", 3}, {"max_depth", 2}}));
  CHECK(rf.trees.size() == 3);
  CHECK(rf.max_depth == std::optional<std::size_t>(2));
  const auto lr = std::get<LRModel>(fit_head(HeadKind::kLR, d.x, d.y, {{"c", 0.5}}));
  CHECK(lr.c == 0.5);
  const auto gb = std::get<GBDTModel>(fit_head(HeadKind::kGBDT, d.x, d.y, {{"n_stages", 4}, {"learning_rate", 0.05}}));
  CHECK(gb.stages[0].size() == 4);
  CHECK(gb.learning_rate == 0.05);
}

TEST_CASE("bad parameters are rejected") {
  const auto d = clusters(5);
  CHECK_ERROR_CODE(fit_head(HeadKind::kLR, d.x, d.y, {{"C", 1.0}}), ErrorCode::kBadConfig);
  CHECK_ERROR_CODE(fit_head(HeadKind::kLR, d.x, d.y, {{"c", "big"}}), ErrorCode::kBadConfig);
  CHECK_ERROR_CODE(fit_head(HeadKind::kSVC, d.x, d.y, {{"gamma", "scale"}}), ErrorCode::kBadKernelParams);
  CHECK_ERROR_CODE(fit_head(HeadKind::kRF, d.x, d.y, {{"n_estimators", -2}}), ErrorCode::kBadConfig);
  CHECK_ERROR_CODE(fit_head(HeadKind::kGBDT, d.x, d.y, json::array()), ErrorCode::kBadConfig);
}

TEST_CASE("malformed model documents") {
  CHECK_ERROR_CODE(model_from_json(json{{"schema_version", 1}}), ErrorCode::kFormatError);
  CHECK_ERROR_CODE(model_from_json(json{{"schema_version", 99}, {"type", "lr"}}), ErrorCode::kFormatError);
  const auto d = clusters(6);
  auto doc = model_to_json(fit_head(HeadKind::kRF, d.x, d.y, {{"n_estimators", 1}}));
  doc["trees"][0][0]["left"] = 0;
  CHECK_ERROR_CODE(model_from_json(doc), ErrorCode::kFormatError);
}

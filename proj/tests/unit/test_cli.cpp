#include <fstream>
#include <sstream>

#include "doctest.h"
#include "histostack/cli.hpp"
#include "histostack/harness.hpp"
#include "histostack/image.hpp"
#include "histostack/rng.hpp"
#include "test_support.hpp"

using namespace histostack;
using histostack::testing::TempDir;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_corpus(const std::filesystem::path& root, std::size_t classes, std::size_t per_class) {
  Rng rng(1);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto dir = root / ("class" + std::to_string(c));
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < per_class; ++i) {
      Image img(4, 4);
      for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
      write_png(img, dir / (std::to_string(i) + ".png"));
    }
  }
}

json strip_timestamps(const std::filesystem::path& p) {
  auto doc = json::parse(read_file(p));
  doc.erase("timestamps");
  return doc;
}

std::filesystem::path only_record(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> found;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.path().filename() == "hyperparameters.json") found.push_back(e.path());
  }
  REQUIRE(found.size() == 1);
  return found.front();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"bogus"}).code == kExitUsage);
  CHECK(run({"curate"}).code == kExitUsage);
  CHECK(run({"curate", "x", "--unknown-flag"}).code == kExitUsage);
  CHECK(run({"--log-level", "loud", "curate", "x"}).code == kExitUsage);
  CHECK(run({"--threads", "0", "curate", "x"}).code == kExitUsage);
  const auto help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("synth-features") != std::string::npos);
}

TEST_CASE("domain errors exit with 1 and a structured message") {
  TempDir tmp;
  const auto plain = run({"curate", (tmp / "missing").string()});
  CHECK(plain.code == kExitDomainError);
  CHECK(plain.err.find("error[IoError]") != std::string::npos);
  std::filesystem::create_directories(tmp / "empty");
  const auto structured = run({"--json", "curate", (tmp / "empty").string()});
  CHECK(structured.code == kExitDomainError);
  const auto doc = json::parse(structured.err);
  CHECK(doc.at("error").at("code") == "NothingToCurate");
}

TEST_CASE("split writes 60/20/20 per class") {
  TempDir tmp;
  make_corpus(tmp / "corpus", 4, 100);
  const auto r = run({"--seed", "5", "--json", "split", "--root", (tmp / "corpus").string(), "--ratios", "60,20,20",
                      "--size", "4x4", "--out", (tmp / "bundle").string()});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  const auto doc = json::parse(r.out);
  for (const auto& [name, counts] : doc.at("counts").items()) {
    CHECK(counts.at("train") == 60);
    CHECK(counts.at("val") == 20);
    CHECK(counts.at("test") == 20);
  }
  CHECK(doc.at("counts").size() == 4);
  CHECK(run({"leak-check", "--manifest", (tmp / "bundle").string()}).code == kExitOk);

  // Same seed, same bundle; pack from the manifest reproduces it.
  const auto again = run({"--seed", "5", "--json", "split", "--root", (tmp / "corpus").string(), "--size", "4x4",
                          "--out", (tmp / "bundle2").string()});
  CHECK(json::parse(again.out).at("manifest_hash") == doc.at("manifest_hash"));
  const auto packed = run({"--json", "pack", "--manifest", (tmp / "bundle" / "manifest.json").string(), "--out",
                           (tmp / "packed").string()});
  REQUIRE_MESSAGE(packed.code == kExitOk, packed.err);
  CHECK(json::parse(packed.out).at("manifest_hash") == doc.at("manifest_hash"));
  CHECK(read_file(tmp / "packed" / "x_test.npy") == read_file(tmp / "bundle" / "x_test.npy"));

  CHECK(run({"split", "--root", (tmp / "corpus").string(), "--ratios", "1,0,0", "--size", "4x4", "--out",
             (tmp / "bad").string()})
            .code == kExitDomainError);
}

TEST_CASE("leak-check flags a planted duplicate") {
  TempDir tmp;
  make_corpus(tmp / "corpus", 2, 10);
  REQUIRE(run({"split", "--root", (tmp / "corpus").string(), "--size", "4x4", "--out", (tmp / "bundle").string()})
              .code == kExitOk);
  auto manifest = json::parse(read_file(tmp / "bundle" / "manifest.json"));
  std::string train_hash;
  for (const auto& e : manifest.at("entries")) {
    if (e.at("split") == "train") train_hash = e.at("hash").get<std::string>();
  }
  for (auto& e : manifest.at("entries")) {
    if (e.at("split") == "test") {
      e["hash"] = train_hash;
      break;
    }
  }
  std::ofstream(tmp / "planted.json") << manifest.dump(2);
  const auto r = run({"--json", "leak-check", "--manifest", (tmp / "planted.json").string()});
  CHECK(r.code == kExitDomainError);
  const auto report = json::parse(r.out);
  REQUIRE(report.at("findings").size() == 1);
  CHECK(report.at("findings")[0].at("hash") == train_hash);
}

TEST_CASE("augment expands the training split") {
  TempDir tmp;
  make_corpus(tmp / "corpus", 2, 10);
  REQUIRE(run({"split", "--root", (tmp / "corpus").string(), "--size", "4x4", "--out", (tmp / "bundle").string()})
              .code == kExitOk);
  std::ofstream(tmp / "aug.json") << R"({"rotation_range": 10, "fill_mode": "wrap"})";
  const auto r = run({"--json", "augment", "--bundle", (tmp / "bundle").string(), "--config",
                      (tmp / "aug.json").string(), "--k", "3", "--out", (tmp / "aug").string()});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  const auto doc = json::parse(r.out);
  CHECK(doc.at("train_images") == 48);
  CHECK(doc.at("augmentation").at("config").at("fill_mode") == "wrap");
  std::ofstream(tmp / "bad.json") << R"({"rotate": 10})";
  CHECK(run({"augment", "--bundle", (tmp / "bundle").string(), "--config", (tmp / "bad.json").string(), "--out",
             (tmp / "aug2").string()})
            .code == kExitDomainError);
}

TEST_CASE("synthetic pipeline through the command line is reproducible") {
  TempDir tmp;
  const auto data = (tmp / "data").string();
  REQUIRE(run({"--seed", "4", "synth-features", "--out", data, "--sizes", "120,40,40"}).code == kExitOk);
  std::ofstream(tmp / "grid.json") << R"({"head": "lgbm", "axes": {"n_stages": [10, 30], "num_leaves": [4]}})";
  auto evaluate = [&](const std::string& threads, const std::string& out) {
    return run({"--seed", "9", "--threads", threads, "--json", "evaluate", "--manifest", data + "/bundle",
                "--features", data + "/features", "--ensemble", "1d", "--grid", (tmp / "grid.json").string(),
                "--dataset", "synthetic", "--out", (tmp / out).string()});
  };
  const auto one = evaluate("1", "runs1");
  REQUIRE_MESSAGE(one.code == kExitOk, one.err);
  const auto two = evaluate("3", "runs2");
  REQUIRE(two.code == kExitOk);
  auto a = json::parse(one.out), b = json::parse(two.out);
  a.erase("run_dir");
  b.erase("run_dir");
  CHECK(a == b);
  CHECK(strip_timestamps(only_record(tmp / "runs1")) == strip_timestamps(only_record(tmp / "runs2")));

  const auto grid = run({"--json", "grid", "--manifest", data + "/bundle", "--features", data + "/features",
                         "--ensemble", "1d", "--grid", (tmp / "grid.json").string(), "--seed", "9"});
  REQUIRE(grid.code == kExitOk);
  CHECK(json::parse(grid.out).at("best_params") == a.at("selected_params"));

  const auto md = tmp / "board.md", csv = tmp / "board.csv";
  const auto cur = run({"--json", "curate", (tmp / "runs1").string(), "--out", md.string(), "--out", csv.string()});
  REQUIRE(cur.code == kExitOk);
  CHECK(json::parse(cur.out).at("rows").size() == 1);
  CHECK(read_file(md).find("| 1 | ens1d |") != std::string::npos);
  CHECK(read_file(csv).rfind("rank,model,synthetic,weighted_average\n", 0) == 0);

  const auto sub = tmp / "sub.csv";
  const auto ch = run({"challenge-csv", "--model", only_record(tmp / "runs1").parent_path().string(), "--features",
                       data + "/features", "--out", sub.string()});
  REQUIRE_MESSAGE(ch.code == kExitOk, ch.err);
  const auto rows = parse_challenge_csv(read_file(sub));
  CHECK(rows.size() == 40);
  CHECK(rows[7].first == "7");

  CHECK(run({"evaluate", "--manifest", data + "/bundle", "--features", data + "/features", "--ensemble", "1d",
             "--head", "svc", "--dataset", "x", "--out", (tmp / "r").string()})
            .code == kExitUsage);
}

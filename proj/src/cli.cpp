#include "histostack/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "histostack/augment.hpp"
#include "histostack/dataset_prep.hpp"
#include "histostack/harness.hpp"
#include "histostack/synthetic.hpp"
#include "histostack/tensor_store.hpp"

namespace histostack {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "warn";
  bool json_output = false;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorCode::kBadConfig, "cannot read " + what + " from '" + text + "'");
}

SplitRatios parse_ratios(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 3) fail(ErrorCode::kBadRatios, "ratios need three values, got '" + text + "'");
  SplitRatios r{};
  double sum = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    r[i] = to_number(parts[i], "ratio");
    sum += r[i];
  }
  if (!(sum > 0)) fail(ErrorCode::kBadRatios, "ratios must sum to a positive value");
  for (auto& v : r) v /= sum;
  return r;
}

ImageSize parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) fail(ErrorCode::kBadConfig, "image size must look like HxW, got '" + text + "'");
  const double h = to_number(text.substr(0, x), "image height");
  const double w = to_number(text.substr(x + 1), "image width");
  if (h < 1 || w < 1 || h != std::floor(h) || w != std::floor(w)) {
    fail(ErrorCode::kBadConfig, "image size must be positive integers, got '" + text + "'");
  }
  return {static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

// A bundle directory stands for its manifest.json.
fs::path manifest_file(const fs::path& p) { return fs::is_directory(p) ? p / "manifest.json" : p; }

// A directory without source.json stands for its feature-source children.
std::vector<fs::path> expand_feature_dirs(const std::vector<std::string>& given) {
  std::vector<fs::path> out;
  for (const auto& g : given) {
    const fs::path p(g);
    if (fs::exists(p / "source.json") || !fs::is_directory(p)) {
      out.push_back(p);
      continue;
    }
    std::vector<fs::path> children;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_directory() && fs::exists(e.path() / "source.json")) children.push_back(e.path());
    }
    if (children.empty()) fail(ErrorCode::kIoError, "no feature sources under " + p.string());
    std::sort(children.begin(), children.end());
    out.insert(out.end(), children.begin(), children.end());
  }
  return out;
}

std::vector<FeatureSource> load_sources(const std::vector<fs::path>& dirs) {
  std::vector<FeatureSource> out;
  for (const auto& d : dirs) out.push_back(load_feature_source(d));
  return out;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string metrics_table(const MetricsReport& report) {
  std::ostringstream out;
  out << pad("class", 16) << pad("accuracy", 10) << pad("precision", 11) << pad("recall", 9) << pad("f1", 9)
      << "specificity\n";
  auto line = [&](const std::string& name, double a, double p, double r, double f, double s) {
    out << pad(name, 16) << pad(format_percent(a), 10) << pad(format_percent(p), 11) << pad(format_percent(r), 9)
        << pad(format_percent(f), 9) << format_percent(s) << '\n';
  };
  for (const auto& m : report.per_class) line(m.name, m.accuracy, m.precision, m.recall, m.f1, m.specificity);
  const auto& a = report.aggregate;
  line(report.averaging, a.accuracy, a.precision, a.recall, a.f1, a.specificity);
  return out.str();
}

// Options shared by grid and evaluate.
struct RunOptions {
  std::string manifest;
  std::vector<std::string> features;
  std::string ensemble;
  std::string sources;
  std::string head;
  std::string grid_file;
  bool standardize = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--manifest", o.manifest, "Bundle manifest (or bundle directory)")->required();
  cmd->add_option("--features", o.features, "Feature source directories, or parents of them")->required();
  cmd->add_option("--ensemble", o.ensemble, "Ensemble shorthand such as 3c");
  cmd->add_option("--sources", o.sources, "Comma-separated source names for a custom ensemble");
  cmd->add_option("--head", o.head, "Head for a custom ensemble: lr, svc, rf, lgbm");
  cmd->add_option("--grid", o.grid_file, "Parameter grid JSON; defaults per head otherwise");
  cmd->add_flag("--standardize", o.standardize, "Standardize columns with training statistics");
}

EvaluateConfig base_config(const RunOptions& o, const Globals& g) {
  EvaluateConfig c;
  if (!o.ensemble.empty() && (!o.sources.empty() || !o.head.empty())) {
    throw CLI::ValidationError("--ensemble", "cannot be combined with --sources/--head");
  }
  if (!o.ensemble.empty()) {
    c.spec = parse_ensemble_spec(o.ensemble);
  } else if (!o.sources.empty() && !o.head.empty()) {
    c.spec = custom_ensemble(split_list(o.sources), parse_head(o.head));
  } else {
    throw CLI::ValidationError("ensemble", "give --ensemble or both --sources and --head");
  }
  c.manifest_path = manifest_file(o.manifest);
  c.source_dirs = expand_feature_dirs(o.features);
  if (!o.grid_file.empty()) c.grid = grid_from_text(read_text_file(o.grid_file));
  c.standardize = o.standardize;
  c.seed = g.seed;
  c.threads = g.threads;
  return c;
}

void configure_logging(const Globals& g, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("histostack", sink);
  logger->set_pattern("[%l] %v");
  const auto level = spdlog::level::from_str(g.log_level);
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stacked-ensemble classification toolkit for histopathology feature maps", "histostack"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Globals g;
  app.add_option("--seed", g.seed, "Master seed; every random stream derives from it");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_flag("--json", g.json_output, "Machine-readable JSON output");
  for (auto* opt : app.get_options()) opt->configurable(false);
  app.fallthrough();

  // split
  auto* split = app.add_subcommand("split", "Scan a class-per-folder corpus, split it and serialize the bundle");
  std::string split_root, split_ratios = "60,20,20", split_size, split_out;
  split->add_option("--root", split_root, "Corpus root with one folder per class")->required();
  split->add_option("--ratios", split_ratios, "Train,val,test proportions");
  split->add_option("--size", split_size, "Image size HxW")->required();
  split->add_option("--out", split_out, "Output bundle directory")->required();

  // leak-check
  auto* leak = app.add_subcommand("leak-check", "Report identical images shared across splits");
  std::string leak_manifest;
  leak->add_option("--manifest", leak_manifest, "Manifest (or bundle directory)")->required();

  // pack
  auto* pack = app.add_subcommand("pack", "Re-materialize a bundle from an existing manifest");
  std::string pack_manifest, pack_root, pack_size, pack_out;
  pack->add_option("--manifest", pack_manifest, "Manifest (or bundle directory)")->required();
  pack->add_option("--root", pack_root, "Corpus root; defaults to the one recorded in the manifest");
  pack->add_option("--size", pack_size, "Image size HxW; defaults to the recorded size");
  pack->add_option("--out", pack_out, "Output bundle directory")->required();

  // augment
  auto* augment = app.add_subcommand("augment", "Statically augment the training split of a bundle");
  std::string aug_bundle, aug_config, aug_out;
  std::size_t aug_k = 10;
  augment->add_option("--bundle", aug_bundle, "Bundle directory or manifest")->required();
  augment->add_option("--config", aug_config, "Augmentation config JSON");
  augment->add_option("--k", aug_k, "Augmented variants per original")->check(CLI::NonNegativeNumber);
  augment->add_option("--out", aug_out, "Output bundle directory")->required();

  // synth-features
  auto* synth = app.add_subcommand("synth-features", "Write a synthetic bundle with matching feature sources");
  std::string synth_out, synth_kind = "joint", synth_sizes = "300,100,100", synth_sources;
  std::size_t synth_classes = 2, synth_width = 0;
  double synth_nuisance = 8.0, synth_noise = 0.05;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--kind", synth_kind, "joint or separable")->check(CLI::IsMember({"joint", "separable"}));
  synth->add_option("--sizes", synth_sizes, "Train,val,test sample counts");
  synth->add_option("--classes", synth_classes, "Class count (separable only)");
  synth->add_option("--sources", synth_sources, "Comma-separated source names");
  synth->add_option("--width", synth_width, "Columns per source; 0 picks the kind's default");
  synth->add_option("--nuisance", synth_nuisance, "Spread of the shared nuisance (joint only)");
  synth->add_option("--noise", synth_noise, "Independent per-column noise");

  // grid
  auto* grid = app.add_subcommand("grid", "Grid-search a head on the validation split");
  RunOptions grid_opts;
  add_run_options(grid, grid_opts);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Grid search, refit, test and write a run record");
  RunOptions eval_opts;
  std::string eval_dataset, eval_out, eval_run_id, eval_positive, eval_cnn;
  bool eval_augmented = false, eval_static = false;
  add_run_options(evaluate, eval_opts);
  evaluate->add_option("--dataset", eval_dataset, "Dataset name recorded in the run")->required();
  evaluate->add_option("--out", eval_out, "Root of the run directory tree")->required();
  evaluate->add_option("--run-id", eval_run_id, "Run id; derived from the configuration when omitted");
  evaluate->add_option("--positive-class", eval_positive, "Positive class for two-class metrics");
  evaluate->add_flag("--augmented", eval_augmented, "Extractors were trained on augmented data");
  evaluate->add_flag("--static-augmentation", eval_static, "Augmentation was serialized before training");
  evaluate->add_option("--cnn-training", eval_cnn, "JSON file with the extractor training settings");

  // curate
  auto* curate_cmd = app.add_subcommand("curate", "Rank run records into a leaderboard");
  std::vector<std::string> curate_dirs, curate_out;
  std::string curate_config;
  curate_cmd->add_option("runs", curate_dirs, "Run directories, trees of them, or record files")->required();
  curate_cmd->add_option("--config", curate_config, "Curation config JSON {groups, dataset_order}");
  curate_cmd->add_option("--out", curate_out, "Output files; .md, .csv or .json by extension");

  // challenge-csv
  auto* challenge = app.add_subcommand("challenge-csv", "Write headerless id,class_index predictions");
  std::string ch_model, ch_ids, ch_manifest, ch_out, ch_split = "test";
  std::vector<std::string> ch_features;
  challenge->add_option("--model", ch_model, "model.json or the run directory holding it")->required();
  challenge->add_option("--features", ch_features, "Feature source directories, or parents of them")->required();
  challenge->add_option("--split", ch_split, "Split to predict")->check(CLI::IsMember({"train", "val", "test"}));
  challenge->add_option("--ids", ch_ids, "File with one image id per line");
  challenge->add_option("--manifest", ch_manifest, "Manifest whose entry names serve as ids");
  challenge->add_option("--out", ch_out, "Output CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  configure_logging(g, err);
  try {
    if (split->parsed()) {
      const auto ratios = parse_ratios(split_ratios);
      const auto size = parse_size(split_size);
      const auto corpus = scan_corpus(split_root, g.threads);
      const auto assignment = stratified_split(corpus, ratios, g.seed);
      const auto bundle = materialize_bundle(assignment, corpus, size, split_out, g.threads);
      json counts = json::object();
      for (const auto& name : bundle.class_names) counts[name] = {{"train", 0}, {"val", 0}, {"test", 0}};
      for (const auto& e : bundle.manifest.entries) counts[e.class_name][std::string(split_name(e.split))] =
          counts[e.class_name][std::string(split_name(e.split))].get<int>() + 1;
      if (g.json_output) {
        out << json{{"manifest", (fs::path(split_out) / "manifest.json").generic_string()},
                    {"manifest_hash", bundle.manifest_hash},
                    {"counts", counts}}
                   .dump(2)
            << '\n';
      } else {
        out << pad("class", 20) << pad("train", 8) << pad("val", 8) << "test\n";
        for (const auto& name : bundle.class_names) {
          const auto& c = counts[name];
          out << pad(name, 20) << pad(c["train"].dump(), 8) << pad(c["val"].dump(), 8) << c["test"].dump() << '\n';
        }
        out << "manifest " << (fs::path(split_out) / "manifest.json").generic_string() << " sha256 "
            << bundle.manifest_hash << '\n';
      }
    } else if (leak->parsed()) {
      const auto report = leak_check(read_manifest(manifest_file(leak_manifest)));
      if (g.json_output) {
        out << leak_report_to_json(report).dump(2) << '\n';
      } else if (report.clean()) {
        out << "no leaks\n";
      } else {
        for (const auto& f : report.findings) {
          out << f.hash << '\n';
          for (const auto& o : f.occurrences) out << "  " << split_name(o.split) << "  " << o.path << '\n';
        }
      }
      if (!report.clean()) {
        err << "error[LeakFound]: " << report.findings.size() << " image(s) appear in more than one split\n";
        return kExitDomainError;
      }
    } else if (pack->parsed()) {
      const auto manifest = read_manifest(manifest_file(pack_manifest));
      const fs::path root = pack_root.empty() ? fs::path(manifest.root) : fs::path(pack_root);
      if (root.empty()) fail(ErrorCode::kBadConfig, "manifest records no corpus root; pass --root");
      const ImageSize size = pack_size.empty() ? ImageSize{manifest.image_size[0], manifest.image_size[1]}
                                               : parse_size(pack_size);
      const auto [corpus, assignment] = corpus_from_manifest(manifest, root);
      const auto bundle = materialize_bundle(assignment, corpus, size, pack_out, g.threads);
      if (g.json_output) {
        out << json{{"manifest", (fs::path(pack_out) / "manifest.json").generic_string()},
                    {"manifest_hash", bundle.manifest_hash}}
                   .dump(2)
            << '\n';
      } else {
        out << "manifest " << (fs::path(pack_out) / "manifest.json").generic_string() << " sha256 "
            << bundle.manifest_hash << '\n';
      }
    } else if (augment->parsed()) {
      AugmentConfig cfg = aug_config.empty() ? AugmentConfig{} : augment_config_from_json(read_json_file(aug_config));
      cfg.seed = g.seed;
      const auto bundle = load_bundle(manifest_file(aug_bundle));
      const auto aug = augment_bundle(bundle, cfg, aug_k, aug_out, g.threads);
      if (g.json_output) {
        out << json{{"manifest", (fs::path(aug_out) / "manifest.json").generic_string()},
                    {"manifest_hash", aug.manifest_hash},
                    {"train_images", aug.x_train.extent(0)},
                    {"augmentation", aug.manifest.augmentation}}
                   .dump(2)
            << '\n';
      } else {
        out << bundle.x_train.extent(0) << " training images expanded to " << aug.x_train.extent(0) << '\n'
            << "manifest " << (fs::path(aug_out) / "manifest.json").generic_string() << " sha256 "
            << aug.manifest_hash << '\n';
      }
    } else if (synth->parsed()) {
      SyntheticConfig sc;
      sc.kind = parse_synthetic_kind(synth_kind);
      const auto sizes = split_list(synth_sizes);
      if (sizes.size() != 3) fail(ErrorCode::kBadConfig, "--sizes needs three counts");
      for (std::size_t i = 0; i < 3; ++i) sc.split_sizes[i] = static_cast<std::size_t>(to_number(sizes[i], "size"));
      sc.num_classes = synth_classes;
      if (!synth_sources.empty()) sc.source_names = split_list(synth_sources);
      sc.width = synth_width;
      sc.nuisance = synth_nuisance;
      sc.noise = synth_noise;
      sc.seed = g.seed;
      const auto data = make_synthetic(sc);
      const auto layout = write_synthetic(data, synth_out);
      json dirs = json::array();
      for (const auto& d : layout.source_dirs) dirs.push_back(d.generic_string());
      if (g.json_output) {
        out << json{{"manifest", layout.manifest_path.generic_string()},
                    {"manifest_hash", data.manifest_hash},
                    {"feature_sources", dirs}}
                   .dump(2)
            << '\n';
      } else {
        out << "manifest " << layout.manifest_path.generic_string() << " sha256 " << data.manifest_hash << '\n';
        for (const auto& d : layout.source_dirs) out << "source " << d.generic_string() << '\n';
      }
    } else if (grid->parsed()) {
      EvaluateConfig c = base_config(grid_opts, g);
      c.dataset_name = "grid";
      const auto run = prepare_run(c);
      const auto result = grid_search(run.grid, run.x[0], run.y[0], run.x[1], run.y[1],
                                      {g.seed, run.bundle.class_names.size(), g.threads});
      if (g.json_output) {
        auto doc = grid_result_to_json(result);
        doc["grid"] = grid_to_json(run.grid);
        doc["ensemble"] = ensemble_label(c.spec);
        out << doc.dump(2) << '\n';
      } else {
        out << pad("#", 5) << pad("val_acc", 9) << "params\n";
        for (std::size_t i = 0; i < result.candidates.size(); ++i) {
          const auto& cand = result.candidates[i];
          out << pad(std::to_string(i), 5)
              << pad(cand.val_accuracy ? format_percent(*cand.val_accuracy) : std::string("fail"), 9)
              << cand.params.dump() << (i == result.best_index ? "  *" : "") << '\n';
        }
        out << "best " << result.best_params.dump() << " val accuracy " << format_percent(result.best_val_accuracy)
            << '\n';
      }
    } else if (evaluate->parsed()) {
      EvaluateConfig c = base_config(eval_opts, g);
      c.dataset_name = eval_dataset;
      c.out_root = eval_out;
      c.run_id = eval_run_id;
      if (!eval_positive.empty()) c.positive_class = eval_positive;
      c.augmented = eval_augmented;
      c.static_augmentation = eval_static;
      if (!eval_cnn.empty()) c.cnn_training = read_json_file(eval_cnn);
      const auto result = evaluate_run(c);
      if (g.json_output) {
        out << json{{"run_dir", result.run_dir.generic_string()},
                    {"run_id", result.record.run_id},
                    {"model", result.record.model_name},
                    {"selected_params", result.record.selected_params},
                    {"best_val_accuracy", result.record.best_val_accuracy},
                    {"metrics", result.record.metrics},
                    {"confusion", confusion_to_json(result.record.confusion)}}
                   .dump(2)
            << '\n';
      } else {
        const auto report = compute_metrics(result.record.confusion, [&]() -> std::optional<std::size_t> {
          const auto& pos = result.record.metrics.at("positive_class");
          if (!pos.is_string()) return std::nullopt;
          const auto& names = result.record.class_names;
          return static_cast<std::size_t>(std::find(names.begin(), names.end(), pos.get<std::string>()) -
                                          names.begin());
        }());
        out << result.record.model_name << " on " << result.record.dataset_name << ", params "
            << result.record.selected_params.dump() << ", val accuracy "
            << format_percent(result.record.best_val_accuracy) << '\n'
            << metrics_table(report) << confusion_csv(result.record.confusion) << "record "
            << (result.run_dir / "hyperparameters.json").generic_string() << '\n';
      }
    } else if (curate_cmd->parsed()) {
      std::vector<fs::path> roots(curate_dirs.begin(), curate_dirs.end());
      const CurationConfig cfg =
          curate_config.empty() ? CurationConfig{} : curation_config_from_json(read_json_file(curate_config));
      const auto board = curate(roots, cfg);
      for (const auto& f : curate_out) {
        const auto ext = fs::path(f).extension().string();
        if (ext == ".md") write_text_file(f, leaderboard_markdown(board));
        else if (ext == ".csv") write_text_file(f, leaderboard_csv(board));
        else if (ext == ".json") write_text_file(f, leaderboard_to_json(board).dump(2) + "\n");
        else fail(ErrorCode::kBadConfig, "cannot tell the format of '" + f + "'; use .md, .csv or .json");
      }
      if (g.json_output) {
        out << leaderboard_to_json(board).dump(2) << '\n';
      } else {
        out << leaderboard_markdown(board);
        for (const auto& s : board.skipped) out << "skipped " << s.path << ": " << s.reason << '\n';
      }
    } else if (challenge->parsed()) {
      fs::path model_path(ch_model);
      if (fs::is_directory(model_path)) model_path /= "model.json";
      const auto model = ensemble_from_json(read_json_file(model_path));
      const auto sources = load_sources(expand_feature_dirs(ch_features));
      const Split split_id = parse_split(ch_split);
      const auto selected = select_sources(sources, model.spec);
      const std::size_t rows = selected.front().split(split_id).rows();
      std::vector<std::string> ids;
      if (!ch_ids.empty()) {
        std::istringstream in(read_text_file(ch_ids));
        std::string line;
        while (std::getline(in, line)) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) ids.push_back(line);
        }
      } else if (!ch_manifest.empty()) {
        for (const auto& e : read_manifest(manifest_file(ch_manifest)).entries) {
          if (e.split == split_id) ids.push_back(fs::path(e.path).stem().string());
        }
      } else {
        for (std::size_t i = 0; i < rows; ++i) ids.push_back(std::to_string(i));
      }
      const auto predicted = emit_challenge_csv(model, sources, split_id, ids, ch_out);
      if (g.json_output) {
        out << json{{"out", ch_out}, {"rows", predicted.size()}}.dump(2) << '\n';
      } else {
        out << predicted.size() << " predictions written to " << ch_out << '\n';
      }
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    const std::string code(error_code_name(e.code()));
    std::string message = e.what();
    if (message.rfind(code + ": ", 0) == 0) message.erase(0, code.size() + 2);
    if (g.json_output) {
      err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
    } else {
      err << "error[" << code << "]: " << message << '\n';
    }
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error[Internal]: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace histostack

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nofrills/checkpoint.hpp"
#include "nofrills/confusion.hpp"
#include "nofrills/evaluator.hpp"
#include "nofrills/manifest.hpp"
#include "nofrills/parallel.hpp"
#include "nofrills/synthetic.hpp"
#include "nofrills/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nofrills;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDiverged = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

FactorSet parse_factors(const std::string& csv) {
  FactorSet fs;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    if (token == "det") continue;  // detector terms are always present
    if (token == "app") {
      fs.human_app = fs.object_app = true;
    } else if (token == "human-app") {
      fs.human_app = true;
    } else if (token == "object-app") {
      fs.object_app = true;
    } else if (token == "box") {
      fs.boxes = true;
    } else if (token == "pose") {
      fs.pose = true;
    } else {
      throw UsageError("unknown factor '" + token +
                       "' (expected det, app, human-app, object-app, box, "
                       "pose)");
    }
  }
  return fs;
}

std::string factors_csv(const FactorSet& fs) {
  std::string out = "det";
  if (fs.human_app && fs.object_app) {
    out += ",app";
  } else {
    if (fs.human_app) out += ",human-app";
    if (fs.object_app) out += ",object-app";
  }
  if (fs.boxes) out += ",box";
  if (fs.pose) out += ",pose";
  return out;
}

Taxonomy load_data_taxonomy(const fs::path& data_dir) {
  return Taxonomy::load(data_dir / "taxonomy.json");
}

Dataset load_split(const fs::path& data_dir, const std::string& split,
                   const Taxonomy& tax) {
  return load_dataset(data_dir / split / "records.jsonl",
                      data_dir / split / "features.bin", tax);
}

json dataset_input_hashes(const fs::path& data_dir,
                          const std::vector<std::string>& splits) {
  json j;
  j[(data_dir / "taxonomy.json").string()] =
      hex16(fnv1a64_file(data_dir / "taxonomy.json"));
  for (const std::string& s : splits) {
    for (const char* f : {"records.jsonl", "features.bin"}) {
      const fs::path p = data_dir / s / f;
      j[p.string()] = hex16(fnv1a64_file(p));
    }
  }
  return j;
}

std::vector<std::vector<PairScore>> score_dataset(
    const FactorModel<float>& model, const Dataset& data, const Taxonomy& tax) {
  std::vector<std::vector<PairScore>> scores(data.records.size());
  parallel_for(data.records.size(), [&](std::size_t i) {
    const CandidateSet cands = build_candidates(data.records[i], tax);
    scores[i] = score_image(model, data.records[i], cands, data.features, tax);
  });
  return scores;
}

json box_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

void dump_scores(const fs::path& path,
                 const std::vector<ImageRecord>& records,
                 const std::vector<std::vector<PairScore>>& scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write score dump " + path.string());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const PairScore& s : scores[i]) {
      json j;
      j["image_id"] = records[i].image_id;
      j["hoi"] = s.hoi;
      j["human_box"] = box_json(s.human_box);
      j["object_box"] = box_json(s.object_box);
      j["p_det_human"] = s.p_det_human;
      j["p_det_object"] = s.p_det_object;
      j["p_interaction"] = s.p_interaction;
      j["p_final"] = s.p_final;
      out << j.dump() << '\n';
    }
  }
}

std::vector<std::vector<PairScore>> read_score_dump(
    const fs::path& path, const std::vector<ImageRecord>& records) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    index[records[i].image_id] = i;
  }
  std::vector<std::vector<PairScore>> scores(records.size());
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score dump " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string id = j.at("image_id").get<std::string>();
      const auto it = index.find(id);
      if (it == index.end()) {
        throw DataError("score dump line " + std::to_string(lineno) +
                        " references unknown image '" + id + "'");
      }
      const auto& hb = j.at("human_box");
      const auto& ob = j.at("object_box");
      scores[it->second].push_back(PairScore{
          -1, -1,
          Box(hb.at(0).get<double>(), hb.at(1).get<double>(),
              hb.at(2).get<double>(), hb.at(3).get<double>()),
          Box(ob.at(0).get<double>(), ob.at(1).get<double>(),
              ob.at(2).get<double>(), ob.at(3).get<double>()),
          j.at("hoi").get<int>(), j.at("p_det_human").get<double>(),
          j.at("p_det_object").get<double>(),
          j.at("p_interaction").get<double>(),
          j.at("p_final").get<double>()});
    } catch (const json::exception& e) {
      throw DataError("score dump line " + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
  return scores;
}

void print_eval_summary(const EvalResult& r) {
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return std::string(buf);
  };
  std::cout << "Full mAP:     " << fmt(r.map_full) << "\n"
            << "Rare mAP:     " << fmt(r.map_rare) << "\n"
            << "Non-Rare mAP: " << fmt(r.map_nonrare) << "\n";
}

// ---- gen-synth ----

struct GenArgs {
  std::string out;
  int images = 0;
  std::uint64_t seed = 0;
  std::string taxonomy_file;
  int appearance_dim = 32;
  int min_instances = 1;
  int max_instances = 3;
};

int cmd_gen_synth(const GenArgs& args) {
  const Taxonomy tax = args.taxonomy_file.empty()
                           ? default_synthetic_taxonomy()
                           : Taxonomy::load(args.taxonomy_file);
  SyntheticConfig cfg;
  cfg.train_images = static_cast<int>(std::lround(0.7 * args.images));
  cfg.val_images = static_cast<int>(std::lround(0.1 * args.images));
  cfg.test_images = args.images - cfg.train_images - cfg.val_images;
  cfg.appearance_dim = args.appearance_dim;
  cfg.min_instances = args.min_instances;
  cfg.max_instances = args.max_instances;

  const SyntheticDataset ds = generate_synthetic(cfg, tax, args.seed);
  write_synthetic_dataset(args.out, ds);

  json manifest;
  manifest["command"] = "gen-synth";
  manifest["seed"] = args.seed;
  manifest["config"] = {{"images", args.images},
                        {"train_images", cfg.train_images},
                        {"val_images", cfg.val_images},
                        {"test_images", cfg.test_images},
                        {"appearance_dim", cfg.appearance_dim},
                        {"min_instances", cfg.min_instances},
                        {"max_instances", cfg.max_instances},
                        {"taxonomy", args.taxonomy_file.empty()
                                         ? "<built-in>"
                                         : args.taxonomy_file}};
  manifest["taxonomy_hash"] = hex16(ds.taxonomy.content_hash());
  write_manifest(fs::path(args.out) / "manifest.json", manifest);
  std::cout << "wrote " << cfg.train_images << "/" << cfg.val_images << "/"
            << cfg.test_images << " train/val/test images to " << args.out
            << "\n";
  return kExitOk;
}

// ---- prep-candidates ----

struct PrepArgs {
  std::string data;
  std::string split = "train";
  std::string out;
};

int cmd_prep_candidates(const PrepArgs& args) {
  const Taxonomy tax = load_data_taxonomy(args.data);
  const Dataset data = load_split(args.data, args.split, tax);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw DataError("cannot write " + args.out);
  for (const ImageRecord& rec : data.records) {
    const CandidateSet set = build_candidates(rec, tax);
    json j;
    j["image_id"] = rec.image_id;
    json classes = json::array();
    for (int o = 0; o < tax.n_objects(); ++o) {
      if (set.for_object(o).empty()) continue;
      json cands = json::array();
      for (const Candidate& c : set.for_object(o)) {
        json cj;
        cj["box"] = box_json(c.box);
        cj["score"] = c.score;
        cj["feature_row"] = c.feature_row;
        if (c.pose) {
          json kps = json::array();
          for (const Keypoint& k : c.pose->keypoints) {
            kps.push_back(json::array({k.x, k.y, k.confidence}));
          }
          cj["pose"] = kps;
        } else {
          cj["pose"] = nullptr;
        }
        cands.push_back(cj);
      }
      classes.push_back({{"object", o}, {"candidates", cands}});
    }
    j["classes"] = classes;
    out << j.dump() << '\n';
  }
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string data;
  std::string out;
  std::string factors = "det,app,box";
  std::string loss = "hoi";
  std::string indicators = "on";
  int neg_per_pos = 1000;
  std::uint64_t seed = 0;
  int epochs = 30;
  double learning_rate = 1e-3;
};

json resolved_train_config(const TrainArgs& args) {
  return json{{"data", args.data},
              {"out", args.out},
              {"factors", args.factors},
              {"loss", args.loss},
              {"indicators", args.indicators},
              {"neg_per_pos", args.neg_per_pos},
              {"seed", args.seed},
              {"epochs", args.epochs},
              {"learning_rate", args.learning_rate}};
}

int cmd_train(const TrainArgs& args) {
  if (args.loss != "hoi" && args.loss != "interaction") {
    throw UsageError("--loss must be 'hoi' or 'interaction'");
  }
  if (args.indicators != "on" && args.indicators != "off") {
    throw UsageError("--indicators must be 'on' or 'off'");
  }
  if (args.neg_per_pos < 1) throw UsageError("--neg-per-pos must be >= 1");
  if (args.epochs < 0) throw UsageError("--epochs must be >= 0");

  const Taxonomy tax = load_data_taxonomy(args.data);
  const Dataset train_data = load_split(args.data, "train", tax);
  const Dataset val_data = load_split(args.data, "val", tax);

  TrainConfig cfg;
  cfg.factors = parse_factors(args.factors);
  cfg.loss_mode =
      args.loss == "hoi" ? LossMode::kHoi : LossMode::kInteraction;
  cfg.use_indicators = args.indicators == "on";
  cfg.neg_per_pos = args.neg_per_pos;
  cfg.seed = args.seed;
  cfg.epochs = args.epochs;
  cfg.adam.learning_rate = args.learning_rate;
  cfg.appearance_dim = train_data.features.dim();

  EncodeOptions enc_opts;
  enc_opts.with_pose = cfg.factors.pose;
  const std::vector<EncodedImage> train_enc =
      encode_dataset(train_data.records, tax, enc_opts);
  const std::vector<EncodedImage> val_enc =
      encode_dataset(val_data.records, tax, enc_opts);

  fs::create_directories(args.out);
  std::optional<ValView> val;
  if (!val_enc.empty()) {
    val = ValView{val_enc, val_data.records, &val_data.features};
  }

  const json config_echo = resolved_train_config(args);
  json manifest;
  manifest["command"] = "train";
  manifest["config"] = config_echo;
  manifest["seed"] = args.seed;
  manifest["inputs"] =
      dataset_input_hashes(args.data, {"train", "val"});

  try {
    TrainResult result =
        train(train_enc, train_data.features, val, tax, cfg);
    save_checkpoint(result.model, tax, fs::path(args.out) / "checkpoint.json",
                    config_echo);
    write_metrics_csv(fs::path(args.out) / "metrics.csv", result.metrics);
    manifest["best_epoch"] = result.best_epoch;
    write_manifest(fs::path(args.out) / "manifest.json", manifest);
  } catch (TrainingDiverged& e) {
    // keep the last finite model as the retained checkpoint
    save_checkpoint(e.last_model, tax, fs::path(args.out) / "checkpoint.json",
                    config_echo);
    write_metrics_csv(fs::path(args.out) / "metrics.csv", e.metrics);
    manifest["diverged"] = e.what();
    write_manifest(fs::path(args.out) / "manifest.json", manifest);
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
  std::cout << "checkpoint written to "
            << (fs::path(args.out) / "checkpoint.json") << "\n";
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split = "test";
  std::string report;
  std::string scores_in;
  std::string scores_out;
};

int cmd_eval(const EvalArgs& args) {
  if (args.model.empty() && args.scores_in.empty()) {
    throw UsageError("eval needs --model or --scores");
  }
  const Taxonomy tax = load_data_taxonomy(args.data);
  const Dataset data = load_split(args.data, args.split, tax);

  std::vector<std::vector<PairScore>> scores;
  if (!args.scores_in.empty()) {
    scores = read_score_dump(args.scores_in, data.records);
  } else {
    const FactorModel<float> model = load_checkpoint(args.model, tax);
    scores = score_dataset(model, data, tax);
  }
  if (!args.scores_out.empty()) {
    dump_scores(args.scores_out, data.records, scores);
  }

  const EvalResult result = evaluate(data.records, scores, tax);
  write_eval_report(args.report, result, tax);
  if (!result.map_full) {
    std::cerr << "warning: split '" << args.split
              << "' has no ground-truth pairs; report is all-absent\n";
  }
  print_eval_summary(result);

  json manifest;
  manifest["command"] = "eval";
  manifest["config"] = {{"model", args.model},
                        {"data", args.data},
                        {"split", args.split},
                        {"report", args.report},
                        {"scores_in", args.scores_in},
                        {"scores_out", args.scores_out}};
  manifest["inputs"] = dataset_input_hashes(args.data, {args.split});
  write_manifest(fs::path(args.report).string() + ".manifest.json", manifest);
  return kExitOk;
}

// ---- ablate ----

struct AblateArgs {
  std::string data;
  std::string grid;
  std::string out;
  int parallel = 1;
};

int cmd_ablate(const AblateArgs& args) {
  std::ifstream grid_in(args.grid);
  if (!grid_in) throw DataError("cannot open grid file " + args.grid);
  json grid;
  try {
    grid_in >> grid;
  } catch (const json::exception& e) {
    throw UsageError("grid file: " + std::string(e.what()));
  }

  const Taxonomy tax = load_data_taxonomy(args.data);
  const Dataset train_data = load_split(args.data, "train", tax);
  const Dataset val_data = load_split(args.data, "val", tax);
  const Dataset test_data = load_split(args.data, "test", tax);

  const json defaults = grid.value("defaults", json::object());
  struct Cell {
    std::string name;
    TrainConfig cfg;
    std::string factors_str, loss_str;
    std::vector<std::uint64_t> seeds;
    std::optional<double> map_full, map_rare, map_nonrare;
    std::string error;
  };
  std::vector<Cell> cells;
  bool any_pose = false;
  for (const json& c : grid.at("cells")) {
    auto get = [&](const char* key, const json& fallback) {
      return c.contains(key) ? c.at(key) : defaults.value(key, fallback);
    };
    Cell cell;
    cell.name = c.at("name").get<std::string>();
    cell.factors_str = get("factors", "det").get<std::string>();
    cell.loss_str = get("loss", "hoi").get<std::string>();
    cell.cfg.factors = parse_factors(cell.factors_str);
    cell.cfg.loss_mode = cell.loss_str == "interaction"
                             ? LossMode::kInteraction
                             : LossMode::kHoi;
    cell.cfg.use_indicators = get("indicators", true).get<bool>();
    cell.cfg.neg_per_pos = get("neg_per_pos", 1000).get<int>();
    cell.cfg.epochs = get("epochs", 30).get<int>();
    cell.cfg.adam.learning_rate = get("learning_rate", 1e-3).get<double>();
    cell.cfg.appearance_dim = train_data.features.dim();
    cell.seeds = get("seeds", json::array({1})).get<std::vector<std::uint64_t>>();
    any_pose = any_pose || cell.cfg.factors.pose;
    cells.push_back(std::move(cell));
  }

  EncodeOptions enc_opts;
  enc_opts.with_pose = any_pose;
  const std::vector<EncodedImage> train_enc =
      encode_dataset(train_data.records, tax, enc_opts);
  const std::vector<EncodedImage> val_enc =
      encode_dataset(val_data.records, tax, enc_opts);
  const std::vector<EncodedImage> test_enc =
      encode_dataset(test_data.records, tax, enc_opts);

  auto run_cell = [&](std::size_t idx) {
    Cell& cell = cells[idx];
    try {
      double sum_full = 0, sum_rare = 0, sum_nonrare = 0;
      int n_rare = 0, n_nonrare = 0;
      for (std::uint64_t seed : cell.seeds) {
        TrainConfig cfg = cell.cfg;
        cfg.seed = seed;
        std::optional<ValView> val;
        if (!val_enc.empty()) {
          val = ValView{val_enc, val_data.records, &val_data.features};
        }
        const TrainResult r =
            train(train_enc, train_data.features, val, tax, cfg);
        std::vector<std::vector<PairScore>> scores(test_enc.size());
        for (std::size_t i = 0; i < test_enc.size(); ++i) {
          scores[i] = score_encoded_image(r.model, test_enc[i],
                                          test_data.features, tax);
        }
        const EvalResult ev = evaluate(test_data.records, scores, tax);
        if (!ev.map_full) throw DataError("test split has no ground truth");
        sum_full += *ev.map_full;
        if (ev.map_rare) {
          sum_rare += *ev.map_rare;
          ++n_rare;
        }
        if (ev.map_nonrare) {
          sum_nonrare += *ev.map_nonrare;
          ++n_nonrare;
        }
      }
      const double n = static_cast<double>(cell.seeds.size());
      cell.map_full = sum_full / n;
      if (n_rare == static_cast<int>(cell.seeds.size())) {
        cell.map_rare = sum_rare / n;
      }
      if (n_nonrare == static_cast<int>(cell.seeds.size())) {
        cell.map_nonrare = sum_nonrare / n;
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  if (args.parallel > 1) {
    parallel_for(cells.size(), run_cell, args.parallel);
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  }

  fs::create_directories(args.out);
  std::ofstream table(fs::path(args.out) / "table.csv", std::ios::binary);
  table << "name,factors,loss,indicators,neg_per_pos,seeds,map_full,map_rare,"
           "map_nonrare,error\n";
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  for (const Cell& c : cells) {
    table << c.name << ',' << c.factors_str << ',' << c.loss_str << ','
          << (c.cfg.use_indicators ? "on" : "off") << ','
          << c.cfg.neg_per_pos << ',' << c.seeds.size() << ','
          << opt(c.map_full) << ',' << opt(c.map_rare) << ','
          << opt(c.map_nonrare) << ',' << c.error << '\n';
    std::cout << c.name << ": "
              << (c.error.empty() ? "mAP " + opt(c.map_full)
                                  : "FAILED (" + c.error + ")")
              << "\n";
  }
  table.close();

  json manifest;
  manifest["command"] = "ablate";
  manifest["config"] = {{"data", args.data},
                        {"grid", args.grid},
                        {"out", args.out},
                        {"parallel", args.parallel}};
  manifest["grid_hash"] = hex16(fnv1a64_file(args.grid));
  manifest["inputs"] =
      dataset_input_hashes(args.data, {"train", "val", "test"});
  write_manifest(fs::path(args.out) / "manifest.json", manifest);
  return kExitOk;
}

// ---- confusion ----

struct ConfusionArgs {
  std::string model;
  std::string data;
  std::string split = "test";
  std::string out;
};

int cmd_confusion(const ConfusionArgs& args) {
  const Taxonomy tax = load_data_taxonomy(args.data);
  const Dataset data = load_split(args.data, args.split, tax);
  const FactorModel<float> model = load_checkpoint(args.model, tax);
  EncodeOptions enc_opts;
  enc_opts.with_pose = model.factors().pose;
  const std::vector<EncodedImage> enc =
      encode_dataset(data.records, tax, enc_opts);
  const ConfusionResult result =
      interaction_confusion(model, enc, data.features, tax);
  write_confusion_csv(args.out, result, tax);

  json manifest;
  manifest["command"] = "confusion";
  manifest["config"] = {{"model", args.model},
                        {"data", args.data},
                        {"split", args.split},
                        {"out", args.out}};
  manifest["inputs"] = dataset_input_hashes(args.data, {args.split});
  write_manifest(fs::path(args.out).string() + ".manifest.json", manifest);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "nofrills: factored human-object interaction detection over "
      "precomputed detector and pose outputs"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-synth", "generate a seeded synthetic dataset");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--images", gen.images,
                      "total image count (70/10/20 split)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "rng seed");
  gen_cmd->add_option("--taxonomy", gen.taxonomy_file,
                      "taxonomy JSON (default: built-in desk-scale)");
  gen_cmd->add_option("--appearance-dim", gen.appearance_dim,
                      "appearance feature width")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--min-instances", gen.min_instances,
                      "min GT pairs per image");
  gen_cmd->add_option("--max-instances", gen.max_instances,
                      "max GT pairs per image");

  PrepArgs prep;
  CLI::App* prep_cmd = app.add_subcommand(
      "prep-candidates", "serialize stage-1 candidate sets to JSON Lines");
  prep_cmd->add_option("--data", prep.data, "dataset directory")->required();
  prep_cmd->add_option("--split", prep.split, "train|val|test");
  prep_cmd->add_option("--out", prep.out, "output JSONL file")->required();

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train a factored model");
  train_cmd->set_config("--config", "", "config file (TOML/INI style)");
  train_cmd->add_option("--data", tr.data, "dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "output directory")->required();
  train_cmd->add_option("--factors", tr.factors,
                        "comma list: det,app,human-app,object-app,box,pose");
  train_cmd->add_option("--loss", tr.loss, "hoi|interaction");
  train_cmd->add_option("--indicators", tr.indicators, "on|off");
  train_cmd->add_option("--neg-per-pos", tr.neg_per_pos,
                        "negatives sampled per positive");
  train_cmd->add_option("--seed", tr.seed, "rng seed");
  train_cmd->add_option("--epochs", tr.epochs, "training epochs");
  train_cmd->add_option("--lr", tr.learning_rate, "adam learning rate");

  EvalArgs ev;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint or a score dump");
  eval_cmd->add_option("--model", ev.model, "checkpoint manifest path");
  eval_cmd->add_option("--data", ev.data, "dataset directory")->required();
  eval_cmd->add_option("--split", ev.split, "train|val|test");
  eval_cmd->add_option("--report", ev.report, "per-class AP CSV")->required();
  eval_cmd->add_option("--scores", ev.scores_in,
                       "evaluate a JSONL score dump instead of a model");
  eval_cmd->add_option("--dump-scores", ev.scores_out,
                       "write the scored pairs as JSONL");

  AblateArgs ab;
  CLI::App* ablate_cmd = app.add_subcommand(
      "ablate", "run a factor/technique grid of train+eval cells");
  ablate_cmd->add_option("--data", ab.data, "dataset directory")->required();
  ablate_cmd->add_option("--grid", ab.grid, "grid JSON file")->required();
  ablate_cmd->add_option("--out", ab.out, "output directory")->required();
  ablate_cmd->add_option("--parallel", ab.parallel,
                         "run up to N cells concurrently");

  ConfusionArgs cf;
  CLI::App* confusion_cmd = app.add_subcommand(
      "confusion", "export the interaction confusion matrices");
  confusion_cmd->add_option("--model", cf.model, "checkpoint manifest path")
      ->required();
  confusion_cmd->add_option("--data", cf.data, "dataset directory")
      ->required();
  confusion_cmd->add_option("--split", cf.split, "train|val|test");
  confusion_cmd->add_option("--out", cf.out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_synth(gen);
    if (prep_cmd->parsed()) return cmd_prep_candidates(prep);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (ablate_cmd->parsed()) return cmd_ablate(ab);
    if (confusion_cmd->parsed()) return cmd_confusion(cf);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

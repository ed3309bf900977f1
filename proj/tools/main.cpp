#include "slotgraph/checkpoint.hpp"
#include "slotgraph/gradsuites.hpp"
#include "slotgraph/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace slotgraph;
using json = nlohmann::ordered_json;

namespace {

struct RunConfig {
  model::ModelConfig model;
  trainer::TrainConfig train;
  std::string data;       // dataset root: <data>/train, <data>/dev, *.dep
  std::string train_dep;  // defaults to <data>/train.dep
  std::string dev_dep;    // defaults to <data>/dev.dep
  std::string checkpoint = "model.ckpt";
  std::string history = "history.jsonl";
};

void apply_profile(RunConfig& c, const std::string& name) {
  if (name == "atis") {
    c.train.gamma = 0.6;
    c.train.batch_size = 16;
    c.train.lr = 1e-5;
    c.model.gat_heads = 4;
    c.model.gat_dropout = 0.4;
    c.model.d_g = 256;
  } else if (name == "snips") {
    c.train.gamma = 0.5;
    c.train.batch_size = 14;
    c.train.lr = 1e-5;
    c.model.gat_heads = 2;
    c.model.gat_dropout = 0.5;
    c.model.d_g = 512;
  } else if (!name.empty()) {
    throw std::runtime_error("unknown profile: " + name);
  }
}

void apply_key(RunConfig& c, const std::string& key, const std::string& val) {
  auto as_long = [&] { return std::stol(val); };
  auto as_double = [&] { return std::stod(val); };
  auto as_bool = [&] { return val == "1" || val == "true" || val == "yes"; };
  if (key == "d") c.model.d = as_long();
  else if (key == "d_g") c.model.d_g = as_long();
  else if (key == "gat_heads") c.model.gat_heads = as_long();
  else if (key == "gat_dropout") c.model.gat_dropout = as_double();
  else if (key == "gat_layers") c.model.gat_layers = as_long();
  else if (key == "enc_layers") c.model.enc_layers = as_long();
  else if (key == "enc_heads") c.model.enc_heads = as_long();
  else if (key == "max_len") c.model.max_len = as_long();
  else if (key == "seed") {
    c.model.seed = std::stoull(val);
    c.train.seed = c.model.seed;
  } else if (key == "no_slot_label_attn") c.model.no_slot_label_attn = as_bool();
  else if (key == "no_intent_label_attn")
    c.model.no_intent_label_attn = as_bool();
  else if (key == "no_dep_encoder") c.model.no_dep_encoder = as_bool();
  else if (key == "gamma") c.train.gamma = as_double();
  else if (key == "batch_size") c.train.batch_size = as_long();
  else if (key == "lr") c.train.lr = as_double();
  else if (key == "epochs") c.train.epochs = as_long();
  else if (key == "data") c.data = val;
  else if (key == "train_dep") c.train_dep = val;
  else if (key == "dev_dep") c.dev_dep = val;
  else if (key == "checkpoint") c.checkpoint = val;
  else if (key == "history") c.history = val;
  else if (key == "profile") apply_profile(c, val);
  else throw std::runtime_error("unknown config key: " + key);
}

void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(ln) +
                               ": expected key=value");
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::map<std::string, std::string> config_echo(const RunConfig& c) {
  std::map<std::string, std::string> m;
  auto num = [](auto v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  m["d"] = num(c.model.d);
  m["d_g"] = num(c.model.d_g);
  m["gat_heads"] = num(c.model.gat_heads);
  m["gat_dropout"] = num(c.model.gat_dropout);
  m["gat_layers"] = num(c.model.gat_layers);
  m["enc_layers"] = num(c.model.enc_layers);
  m["enc_heads"] = num(c.model.enc_heads);
  m["max_len"] = num(c.model.max_len);
  m["seed"] = num(c.model.seed);
  m["no_slot_label_attn"] = num(c.model.no_slot_label_attn);
  m["no_intent_label_attn"] = num(c.model.no_intent_label_attn);
  m["no_dep_encoder"] = num(c.model.no_dep_encoder);
  m["gamma"] = num(c.train.gamma);
  m["batch_size"] = num(c.train.batch_size);
  m["lr"] = num(c.train.lr);
  m["epochs"] = num(c.train.epochs);
  return m;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw std::runtime_error("no such file: " + path);
}

void env_seed_override(RunConfig& c) {
  if (const char* s = std::getenv("SLOTGRAPH_SEED")) {
    c.model.seed = std::stoull(s);
    c.train.seed = c.model.seed;
  }
}

json metrics_json(const decode_eval::MetricsReport& r) {
  return json{{"slot_f1", r.slot_f1},
              {"intent_acc", r.intent_acc},
              {"semantic_acc", r.semantic_acc},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn}};
}

int cmd_train(RunConfig cfg) {
  env_seed_override(cfg);
  if (cfg.data.empty()) throw std::runtime_error("train: data directory not set");
  if (cfg.train_dep.empty()) cfg.train_dep = cfg.data + "/train.dep";
  if (cfg.dev_dep.empty()) cfg.dev_dep = cfg.data + "/dev.dep";
  require_file(cfg.train_dep);
  require_file(cfg.dev_dep);

  auto [train, labels] = corpus::load_split(cfg.data + "/train");
  auto [dev, ignored] = corpus::load_split(cfg.data + "/dev", labels);
  auto train_adj =
      trainer::adjacencies(depgraph::load_parses(cfg.train_dep, train));
  auto dev_adj = trainer::adjacencies(depgraph::load_parses(cfg.dev_dep, dev));

  model::Model m(cfg.model, labels, encoder::WordVocab::build(train));
  trainer::Trainer tr(m, cfg.train);
  trainer::TrainResult res = tr.train_loop(train, train_adj, dev, dev_adj);

  std::ofstream hist(cfg.history);
  if (!hist) throw std::runtime_error("cannot write history: " + cfg.history);
  for (const auto& e : res.history) {
    json rec{{"epoch", e.epoch},
             {"l_total", e.train.l_total},
             {"l_intent", e.train.l_intent},
             {"l_slot1", e.train.l_slot1},
             {"l_slot2", e.train.l_slot2},
             {"dev", metrics_json(e.dev)}};
    hist << rec.dump() << "\n";
  }
  checkpoint::save(m, cfg.checkpoint, config_echo(cfg));
  std::cout << "best epoch " << res.best_epoch << " dev semantic_acc "
            << res.best_dev_semantic << "; checkpoint written to "
            << cfg.checkpoint << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& split,
             const std::string& dep) {
  require_file(ckpt);
  require_file(dep);
  model::Model m = checkpoint::load(ckpt);
  auto [data, ignored] = corpus::load_split(split, m.labels());
  auto adj = trainer::adjacencies(depgraph::load_parses(dep, data));
  auto rep = trainer::evaluate(m, data, adj);
  std::cout << metrics_json(rep).dump(2) << "\n";
  return 0;
}

int cmd_predict(const std::string& ckpt, const std::string& input,
                const std::string& dep) {
  require_file(ckpt);
  require_file(input);
  require_file(dep);
  model::Model m = checkpoint::load(ckpt);

  corpus::Dataset data;
  std::ifstream in(input);
  std::string line;
  while (std::getline(in, line)) {
    auto toks = corpus::split_ws(line);
    if (toks.empty()) continue;
    corpus::Sample s;
    s.utterance.tokens = std::move(toks);
    s.slots.bio.assign(s.utterance.tokens.size(), corpus::Bio::O);
    data.samples.push_back(std::move(s));
  }
  auto adj = trainer::adjacencies(depgraph::load_parses(dep, data));

  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    auto pred = m.predict(data.samples[i].utterance, adj[i]);
    std::vector<std::string> tags(data.samples[i].utterance.tokens.size(), "O");
    for (const corpus::Span& s : pred.spans) {
      const std::string& type = m.labels().slot_type_names.at(s.type);
      for (int p = s.l; p <= s.r; ++p) {
        tags[p - 1] = (p == s.l ? "B-" : "I-") + type;
      }
    }
    std::cout << m.labels().intent_names.at(pred.intent) << "\t";
    for (std::size_t k = 0; k < tags.size(); ++k) {
      std::cout << (k ? " " : "") << tags[k];
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  auto reports = gradsuites::run_all(seed);
  bool all_pass = true;
  std::printf("%-16s %-14s %-8s %s\n", "group", "worst_rel_err", "checked",
              "status");
  for (const auto& r : reports) {
    std::printf("%-16s %-14.3e %-8zu %s  %s\n", r.group.c_str(),
                r.worst_rel_err, r.checked, r.pass ? "pass" : "FAIL",
                r.pass ? "" : r.worst_at.c_str());
    all_pass = all_pass && r.pass;
  }
  if (!gradsuites::detects_corrupted_gradient(seed)) {
    std::printf("harness sanity: corrupted gradient NOT detected\n");
    all_pass = false;
  }
  return all_pass ? 0 : 1;
}

int cmd_convert_conllu(const std::string& in, const std::string& out) {
  require_file(in);
  auto lines = depgraph::conllu_to_dep_lines(in);
  std::ofstream o(out);
  if (!o) throw std::runtime_error("cannot write: " + out);
  for (const auto& l : lines) o << l << "\n";
  std::cout << "wrote " << lines.size() << " parses to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint intent detection and slot filling with dependency-graph "
               "attention"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file, profile;

  auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key=value config file");
    sub->add_option("--profile", profile, "hyperparameter profile: atis|snips");
  };
  // model/train overrides applied after profile and config file
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_override = [&](CLI::App* sub, const std::string& key,
                          const std::string& help) {
    sub->add_option_function<std::string>(
        "--" + key,
        [&overrides, key](const std::string& v) {
          overrides.emplace_back(key, v);
        },
        help);
  };

  auto* train = app.add_subcommand("train", "train a model");
  add_shared(train);
  for (const char* k :
       {"d", "d_g", "gat_heads", "gat_dropout", "gat_layers", "enc_layers",
        "enc_heads", "max_len", "seed", "gamma", "batch_size", "lr", "epochs",
        "data", "train_dep", "dev_dep", "checkpoint", "history"}) {
    add_override(train, k, k);
  }
  bool no_slot = false, no_intent = false, no_dep = false;
  train->add_flag("--no-slot-label-attn", no_slot,
                  "ablation: type spans directly from their representation");
  train->add_flag("--no-intent-label-attn", no_intent,
                  "ablation: classify intent from raw sentence features");
  train->add_flag("--no-dep-encoder", no_dep,
                  "ablation: frozen projection instead of the graph encoder");

  std::string ckpt, split, dep, input, conllu_in, conllu_out;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  eval->add_option("--checkpoint", ckpt)->required();
  eval->add_option("--split", split, "split directory (seq.in/seq.out/label)")
      ->required();
  eval->add_option("--dep", dep, "dependency parses for the split")->required();

  auto* predict = app.add_subcommand("predict", "tag raw sentences");
  predict->add_option("--checkpoint", ckpt)->required();
  predict->add_option("--input", input, "one tokenized sentence per line")
      ->required();
  predict->add_option("--dep", dep)->required();

  std::uint64_t gc_seed = 1;
  auto* gradch = app.add_subcommand("gradcheck",
                                    "finite-difference gradient verification");
  gradch->add_option("--seed", gc_seed);

  auto* conv = app.add_subcommand("convert-conllu",
                                  "extract head indices from CoNLL-U");
  conv->add_option("--in", conllu_in)->required();
  conv->add_option("--out", conllu_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      apply_profile(cfg, profile);
      if (!config_file.empty()) load_config_file(cfg, config_file);
      for (const auto& [k, v] : overrides) apply_key(cfg, k, v);
      if (no_slot) cfg.model.no_slot_label_attn = true;
      if (no_intent) cfg.model.no_intent_label_attn = true;
      if (no_dep) cfg.model.no_dep_encoder = true;
      return cmd_train(cfg);
    }
    if (eval->parsed()) return cmd_eval(ckpt, split, dep);
    if (predict->parsed()) return cmd_predict(ckpt, input, dep);
    if (gradch->parsed()) return cmd_gradcheck(gc_seed);
    if (conv->parsed()) return cmd_convert_conllu(conllu_in, conllu_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

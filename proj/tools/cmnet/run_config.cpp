#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cmnet/errors.hpp"
#include "json.hpp"

namespace cmnet::cli {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "train",        "valid",       "test",         "embeddings",  "checkpoint-dir", "scheme",
      "lr",           "clip-norm",   "dropout",      "lambda",      "blocks",         "hidden-size",
      "epochs",       "seed",        "batch-size",   "decay-factor", "patience",      "char-dim",
      "word-dim",     "char-filters", "tie-memories", "gate-bias",  "ablations",      "stop-when-fitted"};
  return keys;
}

template <typename T>
T read(const json& doc, const std::string& key, T fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer() || (std::is_unsigned_v<T> && it->get<long long>() < 0)) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("");
    } else {
      if (!it->is_string()) throw ConfigError("");
    }
    return it->get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::filesystem::path read_path(const json& doc, const std::string& key, const std::filesystem::path& base) {
  auto text = read<std::string>(doc, key, "");
  if (text.empty()) return {};
  std::filesystem::path p(text);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfig c;
  c.train = read_path(doc, "train", base_dir);
  c.valid = read_path(doc, "valid", base_dir);
  c.test = read_path(doc, "test", base_dir);
  c.embeddings = read_path(doc, "embeddings", base_dir);
  c.checkpoint_dir = read_path(doc, "checkpoint-dir", base_dir);
  const auto scheme = read<std::string>(doc, "scheme", "bioes");
  auto parsed = data::parse_scheme(scheme);
  if (!parsed) throw ConfigError("config key 'scheme' must be bio2 or bioes, got '" + scheme + "'");
  c.scheme = *parsed;

  auto& m = c.model;
  m.hidden_size = read(doc, "hidden-size", m.hidden_size);
  m.blocks = read(doc, "blocks", m.blocks);
  m.word_dim = read(doc, "word-dim", m.word_dim);
  m.char_dim = read(doc, "char-dim", m.char_dim);
  m.char_filters = read(doc, "char-filters", m.char_filters);
  m.dropout = read(doc, "dropout", m.dropout);
  m.tie_memories = read(doc, "tie-memories", m.tie_memories);
  m.gate_bias = read(doc, "gate-bias", m.gate_bias);
  if (auto it = doc.find("ablations"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("config key 'ablations' must be an array of names");
    for (const auto& name : *it) {
      if (!name.is_string() || !m.ablations.set(name.get<std::string>())) {
        throw ConfigError("config key 'ablations' has unknown entry " + name.dump());
      }
    }
  }

  auto& t = c.training;
  t.lr = read(doc, "lr", t.lr);
  t.clip_norm = read(doc, "clip-norm", t.clip_norm);
  t.lambda = read(doc, "lambda", t.lambda);
  t.epochs = read(doc, "epochs", t.epochs);
  t.seed = read(doc, "seed", t.seed);
  t.batch_size = read(doc, "batch-size", t.batch_size);
  t.decay_factor = read(doc, "decay-factor", t.decay_factor);
  t.patience = read(doc, "patience", t.patience);
  t.stop_when_fitted = read(doc, "stop-when-fitted", t.stop_when_fitted);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

void validate(const RunConfig& c, bool needs_checkpoint_dir) {
  auto require_file = [](const std::filesystem::path& p, const char* key, bool required) {
    if (p.empty()) {
      if (required) throw ConfigError(std::string("config key '") + key + "' is required");
      return;
    }
    if (!std::filesystem::is_regular_file(p)) {
      throw ConfigError(std::string("config key '") + key + "': no such file " + p.string());
    }
  };
  require_file(c.train, "train", true);
  require_file(c.valid, "valid", false);
  require_file(c.test, "test", false);
  require_file(c.embeddings, "embeddings", true);
  if (needs_checkpoint_dir && c.checkpoint_dir.empty()) {
    throw ConfigError("config key 'checkpoint-dir' is required");
  }
  c.model.validate();
  c.training.validate();
}

void apply_environment(RunConfig& config) {
  const char* seed = std::getenv("CMNET_SEED");
  if (!seed || !*seed) return;
  char* end = nullptr;
  const auto value = std::strtoull(seed, &end, 10);
  if (*end != '\0' || seed[0] == '-') throw ConfigError(std::string("CMNET_SEED is not a seed: ") + seed);
  config.training.seed = value;
}

}  // namespace cmnet::cli

#include "cmnet/train/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "cmnet/errors.hpp"

namespace cmnet::train {

namespace {

constexpr std::string_view kMagic = "cmnet-checkpoint 1";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::pair<std::string, std::string>> config_fields(const model::ModelConfig& c) {
  std::string ablations;
  for (const auto& n : c.ablations.names()) ablations += (ablations.empty() ? "" : ",") + n;
  return {
      {"hidden-size", std::to_string(c.hidden_size)},
      {"blocks", std::to_string(c.blocks)},
      {"word-dim", std::to_string(c.word_dim)},
      {"char-dim", std::to_string(c.char_dim)},
      {"char-filters", std::to_string(c.char_filters)},
      {"dropout", format_double(c.dropout)},
      {"tie-memories", c.tie_memories ? "1" : "0"},
      {"gate-bias", c.gate_bias ? "1" : "0"},
      {"ablations", ablations.empty() ? "-" : ablations},
  };
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of file");
    ++line_;
    return s;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw CheckpointError("checkpoint line " + std::to_string(line_) + ": " + what);
  }

  // Splits "<keyword> <rest>" and checks the keyword.
  std::string expect(std::string_view keyword) {
    auto s = line();
    if (s.size() <= keyword.size() || s.compare(0, keyword.size(), keyword) != 0 || s[keyword.size()] != ' ') {
      fail("expected '" + std::string(keyword) + "'");
    }
    return s.substr(keyword.size() + 1);
  }

  template <typename T>
  T number(std::string_view text) const {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) fail("bad number '" + std::string(text) + "'");
    return v;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::pair<std::string, std::string> split_once(const std::string& s) {
  const auto sp = s.find(' ');
  if (sp == std::string::npos) return {s, ""};
  return {s.substr(0, sp), s.substr(sp + 1)};
}

model::ModelConfig parse_config(Reader& r, const std::map<std::string, std::string>& fields) {
  model::ModelConfig c;
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) r.fail("missing config field '" + key + "'");
    return it->second;
  };
  auto flag = [&](const std::string& key) {
    const auto& v = get(key);
    if (v != "0" && v != "1") r.fail("bad flag '" + key + "'");
    return v == "1";
  };
  c.hidden_size = r.number<std::size_t>(get("hidden-size"));
  c.blocks = r.number<std::size_t>(get("blocks"));
  c.word_dim = r.number<std::size_t>(get("word-dim"));
  c.char_dim = r.number<std::size_t>(get("char-dim"));
  c.char_filters = r.number<std::size_t>(get("char-filters"));
  c.dropout = r.number<double>(get("dropout"));
  c.tie_memories = flag("tie-memories");
  c.gate_bias = flag("gate-bias");
  const auto& abl = get("ablations");
  if (abl != "-") {
    std::stringstream ss(abl);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!c.ablations.set(name)) r.fail("unknown ablation '" + name + "'");
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  return c;
}

std::vector<std::string> read_inventory(Reader& r, std::string_view name) {
  auto [key, count] = split_once(r.expect("vocab"));
  if (key != name) r.fail("expected vocabulary '" + std::string(name) + "'");
  const auto n = r.number<std::size_t>(count);
  std::vector<std::string> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(r.line());
  return items;
}

}  // namespace

void save_checkpoint(std::ostream& out, const model::CmNet& model, const Metadata& meta) {
  out << kMagic << '\n';
  for (const auto& [k, v] : config_fields(model.config())) out << "config " << k << ' ' << v << '\n';
  for (const auto& [k, v] : meta) {
    if (k.empty() || k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractError("checkpoint metadata '" + k + "' must be a single-line key without spaces");
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  const auto& vocab = model.vocab();
  out << "vocab-hash " << hex(vocab.hash()) << '\n';
  const std::pair<const char*, const data::Index*> inventories[] = {
      {"tokens", &vocab.tokens()}, {"chars", &vocab.chars()}, {"slots", &vocab.slots()}, {"intents", &vocab.intents()}};
  for (const auto& [name, index] : inventories) {
    out << "vocab " << name << ' ' << index->size() << '\n';
    for (const auto& key : index->keys()) out << key << '\n';
  }
  for (const auto& [name, p] : model.params()) {
    out << "param " << name << ' ' << (p.trainable ? 1 : 0) << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
      const auto row = p.value.row_span(r);
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << format_double(row[c]);
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw CheckpointError("failed to write checkpoint");
}

void save_checkpoint_file(const std::filesystem::path& path, const model::CmNet& model, const Metadata& meta) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  save_checkpoint(out, model, meta);
}

Checkpoint load_checkpoint(std::istream& in) {
  Reader r(in);
  if (r.line() != kMagic) r.fail("not a cmnet checkpoint");

  std::map<std::string, std::string> fields;
  Metadata meta;
  std::string s = r.line();
  while (s.starts_with("config ") || s.starts_with("meta ")) {
    const bool is_config = s.starts_with("config ");
    auto [key, value] = split_once(s.substr(is_config ? 7 : 5));
    (is_config ? fields : meta)[key] = value;
    s = r.line();
  }
  auto config = parse_config(r, fields);

  if (!s.starts_with("vocab-hash ")) r.fail("expected 'vocab-hash'");
  const std::string stored_hash = s.substr(11);
  auto tokens = read_inventory(r, "tokens");
  auto chars = read_inventory(r, "chars");
  auto slots = read_inventory(r, "slots");
  auto intents = read_inventory(r, "intents");
  std::optional<data::Vocabulary> vocab;
  try {
    vocab = data::Vocabulary::from_lists(std::move(tokens), std::move(chars), std::move(slots), std::move(intents));
  } catch (const std::exception& e) {
    r.fail(std::string("bad vocabulary: ") + e.what());
  }
  if (hex(vocab->hash()) != stored_hash) r.fail("vocabulary hash mismatch");

  data::PretrainedEmbeddings blank;
  blank.dim = config.word_dim;
  blank.matrix = ad::Tensor::zeros(vocab->tokens().size(), config.word_dim);
  blank.covered.assign(vocab->tokens().size(), false);
  std::optional<model::CmNet> net;
  try {
    net.emplace(config, std::move(*vocab), blank, 0);
  } catch (const std::exception& e) {
    r.fail(std::string("cannot rebuild model: ") + e.what());
  }

  std::set<std::string> seen;
  for (s = r.line(); s != "end"; s = r.line()) {
    if (!s.starts_with("param ")) r.fail("expected 'param' or 'end'");
    std::stringstream head(s.substr(6));
    std::string name, trainable, rows, cols, extra;
    if (!(head >> name >> trainable >> rows >> cols) || (head >> extra)) r.fail("malformed parameter header");
    auto* p = net->params().find(name);
    if (!p) r.fail("unexpected parameter '" + name + "'");
    if (!seen.insert(name).second) r.fail("duplicate parameter '" + name + "'");
    if (r.number<std::size_t>(rows) != p->value.rows() || r.number<std::size_t>(cols) != p->value.cols()) {
      r.fail("parameter '" + name + "' has shape " + rows + "x" + cols + ", expected " +
             ad::shape_string(p->value.shape()));
    }
    if (trainable != (p->trainable ? "1" : "0")) r.fail("parameter '" + name + "' has wrong trainable flag");
    for (std::size_t i = 0; i < p->value.rows(); ++i) {
      const auto text = r.line();
      auto row = p->value.row_span(i);
      const char* pos = text.data();
      const char* end = text.data() + text.size();
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) {
          if (pos == end || *pos != ' ') r.fail("too few values in row of '" + name + "'");
          ++pos;
        }
        auto [next, ec] = std::from_chars(pos, end, row[c]);
        if (ec != std::errc{}) r.fail("bad value in '" + name + "'");
        pos = next;
      }
      if (pos != end) r.fail("too many values in row of '" + name + "'");
    }
  }
  if (seen.size() != net->params().size()) {
    for (const auto& n : net->params().names()) {
      if (!seen.count(n)) r.fail("missing parameter '" + n + "'");
    }
  }
  return {std::move(*net), std::move(meta)};
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace cmnet::train

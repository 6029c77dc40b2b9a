#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "cmnet/autodiff/grad_check.hpp"
#include "cmnet/data/stats.hpp"
#include "cmnet/errors.hpp"
#include "cmnet/train/checkpoint.hpp"
#include "json.hpp"

namespace cmnet::cli {

namespace {

using nlohmann::json;

data::Corpus read_corpus(const std::filesystem::path& path, data::TagScheme scheme) {
  try {
    return data::read_corpus_file(path, scheme);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

data::TagScheme scheme_from(const train::Metadata& meta, const std::string& fallback) {
  auto it = meta.find("scheme");
  auto parsed = data::parse_scheme(it != meta.end() ? it->second : fallback);
  if (!parsed) throw ConfigError("unknown tag scheme");
  return *parsed;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<double> dropout;
  std::string checkpoint_dir;
  std::vector<std::string> ablations;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed (overrides config and CMNET_SEED)");
    cmd->add_option("--epochs", epochs, "Number of epochs");
    cmd->add_option("--lr", lr, "Initial learning rate");
    cmd->add_option("--lambda", lambda, "Intent loss weight");
    cmd->add_option("--dropout", dropout, "Dropout rate");
    cmd->add_option("--checkpoint-dir", checkpoint_dir, "Output directory");
    cmd->add_option("--ablate", ablations, "Ablation flag, repeatable")->delimiter(',');
  }

  void apply(RunConfig& c) const {
    apply_environment(c);
    if (seed) c.training.seed = *seed;
    if (epochs) c.training.epochs = *epochs;
    if (lr) c.training.lr = *lr;
    if (lambda) c.training.lambda = *lambda;
    if (dropout) c.model.dropout = *dropout;
    if (!checkpoint_dir.empty()) c.checkpoint_dir = checkpoint_dir;
    for (const auto& a : ablations) {
      if (!c.model.ablations.set(a)) throw ConfigError("unknown ablation '" + a + "'");
    }
  }
};

json metrics_json(const train::TrainResult& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"lr", e.lr},
                      {"loss", e.mean_loss},
                      {"valid-slot-f1", e.valid_slot_f1},
                      {"valid-intent-accuracy", e.valid_intent_accuracy}});
  }
  return {{"epochs", epochs}, {"step-losses", r.step_losses}, {"best-epoch", r.best_epoch}};
}

json report_json(const eval::EvalReport& r) {
  const auto s = r.slots();
  return {{"slot-precision", s.precision},
          {"slot-recall", s.recall},
          {"slot-f1", s.f1},
          {"intent-accuracy", r.intent_accuracy()}};
}

int cmd_train(RunConfig config, std::ostream& out) {
  validate(config, true);
  auto data = load_datasets(config);
  model::CmNet net(config.model, data.vocab, data.embeddings, config.training.seed);
  auto result = train::train(net, data.train, data.valid, config.training, [&](const train::EpochRecord& e) {
    out << format("epoch %3zu  lr %.6g  loss %.6f  valid slot-F1 %6.2f  intent-acc %6.2f\n", e.epoch, e.lr,
                  e.mean_loss, 100.0 * e.valid_slot_f1, 100.0 * e.valid_intent_accuracy);
  });
  out << "best epoch " << result.best_epoch << '\n';

  auto metrics = metrics_json(result);
  if (!config.test.empty()) {
    const auto report = train::evaluate(net, data.test);
    out << "test set:\n" << eval::format_report(report);
    metrics["test"] = report_json(report);
  }
  std::filesystem::create_directories(config.checkpoint_dir);
  train::save_checkpoint_file(config.checkpoint_dir / "model.ckpt", net,
                              {{"scheme", std::string(data::scheme_name(config.scheme))},
                               {"seed", std::to_string(config.training.seed)},
                               {"best-epoch", std::to_string(result.best_epoch)}});
  std::ofstream metrics_out(config.checkpoint_dir / "metrics.json");
  metrics_out << metrics.dump(2) << '\n';
  if (!metrics_out) throw std::runtime_error("cannot write metrics.json");
  out << "wrote " << (config.checkpoint_dir / "model.ckpt").string() << '\n';
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::string predicted;
  std::string config;
  std::string scheme = "bioes";
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  if (args.checkpoint.empty() == args.predicted.empty()) {
    throw ConfigError("eval needs exactly one of --checkpoint or --predicted");
  }
  if (!args.checkpoint.empty()) {
    auto ckpt = train::load_checkpoint_file(args.checkpoint);
    const auto scheme = scheme_from(ckpt.meta, args.scheme);
    if (!args.config.empty()) {
      auto config = load_run_config(args.config);
      auto expected = data::Vocabulary::build(read_corpus(config.train, config.scheme));
      if (expected.hash() != ckpt.model.vocab().hash()) {
        throw CheckpointError("checkpoint vocabulary does not match the training corpus of " + args.config);
      }
    }
    const auto gold = read_corpus(args.corpus, scheme);
    out << eval::format_report(train::evaluate(ckpt.model, gold));
    return kOk;
  }
  const auto scheme = scheme_from({}, args.scheme);
  const auto gold = read_corpus(args.corpus, scheme);
  const auto pred = read_corpus(args.predicted, scheme);
  if (gold.size() != pred.size()) throw ConfigError("gold and predicted corpora differ in utterance count");
  std::vector<std::vector<std::string>> gt, pt, gi;
  std::vector<std::string> pi;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    gt.push_back(gold[u].slot_tags);
    pt.push_back(pred[u].slot_tags);
    gi.push_back(gold[u].intents);
    pi.push_back(pred[u].intents.front());
  }
  out << eval::format_report(eval::evaluate(gt, pt, gi, pi));
  return kOk;
}

int cmd_predict(const std::string& checkpoint, const std::string& corpus, const std::string& output,
                std::ostream& out) {
  auto ckpt = train::load_checkpoint_file(checkpoint);
  const auto scheme = scheme_from(ckpt.meta, "bioes");
  auto utterances = read_corpus(corpus, scheme);
  for (auto& utt : utterances) {
    auto p = ckpt.model.predict(utt);
    utt.slot_tags = eval::repair_tags(p.slot_tags, scheme);
    utt.intents = {p.intent};
  }
  if (output.empty()) {
    data::write_corpus(out, utterances);
  } else {
    data::write_corpus_file(output, utterances);
  }
  return kOk;
}

int cmd_ablate(RunConfig config, std::ostream& out) {
  validate(config, false);
  const auto ablated = config.model.ablations;
  if (!ablated.any()) throw ConfigError("ablate needs at least one --ablate flag");
  auto data = load_datasets(config);
  const auto full = run_variant(config, data, {});
  const auto variant = run_variant(config, data, ablated);
  out << comparison_report(full, variant);
  return kOk;
}

int cmd_gradcheck(RunConfig config, bool break_gate, std::ostream& out) {
  auto& m = config.model;
  m.hidden_size = std::max<std::size_t>(2, std::min<std::size_t>(m.hidden_size, 8) & ~std::size_t{1});
  m.blocks = std::min<std::size_t>(m.blocks, 2);
  m.dropout = 0.0;
  m.break_gate_gradient = break_gate;
  validate(config, false);
  auto data = load_datasets(config);
  auto utt = data.train.front();
  const std::size_t n = std::min<std::size_t>(utt.size(), 4);
  utt.tokens.resize(n);
  utt.slot_tags.resize(n);

  model::CmNet net(config.model, data.vocab, data.embeddings, config.training.seed);
  const auto encoded = net.encode(utt);
  const double lambda = config.training.lambda;
  auto report = ad::grad_check([&](ad::Tape& tape) { return net.loss(tape, encoded, lambda).total; },
                               net.params(), 1e-5);

  std::map<std::string, ad::ParameterCheck> groups;
  for (const auto& p : report.parameters) {
    auto& g = groups[parameter_group(p.name)];
    g.name = parameter_group(p.name);
    g.max_rel_error = std::max(g.max_rel_error, p.max_rel_error);
    g.norm_rel_error = std::max(g.norm_rel_error, p.norm_rel_error);
    g.max_abs_diff = std::max(g.max_abs_diff, p.max_abs_diff);
    g.max_abs_analytic = std::max(g.max_abs_analytic, p.max_abs_analytic);
    g.max_abs_numeric = std::max(g.max_abs_numeric, p.max_abs_numeric);
    g.entries += p.entries;
    g.failing_entries += p.failing_entries;
  }
  out << format("gradient check: hidden %zu, blocks %zu, %zu tokens, %zu parameters\n", m.hidden_size, m.blocks, n,
                net.params().trainable_count());
  out << format("%-24s %14s %14s %14s %14s %14s %12s\n", "group", "max-rel-error", "tensor-rel", "max|a-n|",
                "max|analytic|", "max|numeric|", "failing");
  const ad::ParameterCheck* worst = nullptr;
  std::size_t entries = 0, failing = 0;
  for (const auto& [name, g] : groups) {
    out << format("%-24s %14.3e %14.3e %14.3e %14.3e %14.3e %5zu/%-6zu\n", name.c_str(), g.max_rel_error,
                  g.norm_rel_error, g.max_abs_diff, g.max_abs_analytic, g.max_abs_numeric, g.failing_entries,
                  g.entries);
    entries += g.entries;
    failing += g.failing_entries;
    if (g.max_rel_error >= 1e-4 && (!worst || g.max_rel_error > worst->max_rel_error)) worst = &g;
  }
  out << format("max relative error %.3e\n", report.max_rel_error);
  out << format("max tensor relative error %.3e\n", report.max_norm_rel_error);
  if (worst) {
    out << format("%zu of %zu entries at or above 1e-4\n", failing, entries);
    out << "FAILED: group " << worst->name << format(" has relative error %.3e >= 1e-4\n", worst->max_rel_error);
    for (const auto& [name, g] : groups) {
      if (g.max_rel_error >= 1e-4 && &g != worst) out << "FAILED: group " << name << '\n';
    }
    return kGradCheckFailed;
  }
  out << "PASSED\n";
  return kOk;
}

int cmd_stats(const std::vector<std::string>& paths, const std::string& scheme_name, std::ostream& out) {
  auto scheme = data::parse_scheme(scheme_name);
  if (!scheme) throw ConfigError("unknown tag scheme '" + scheme_name + "'");
  std::vector<data::Corpus> splits;
  for (const auto& p : paths) splits.push_back(read_corpus(p, *scheme));
  const auto s = data::corpus_stats(splits);
  std::string sizes;
  for (auto n : s.split_sizes) sizes += (sizes.empty() ? "" : " / ") + std::to_string(n);
  out << format("%-16s %zu\n", "vocab size", s.vocab_size);
  out << format("%-16s %.2f\n", "average length", s.average_length);
  out << format("%-16s %zu\n", "intents", s.intent_count);
  out << format("%-16s %zu\n", "slots", s.slot_count);
  out << format("%-16s %s\n", "split sizes", sizes.c_str());
  return kOk;
}

}  // namespace

Datasets load_datasets(const RunConfig& config) {
  auto train_split = read_corpus(config.train, config.scheme);
  auto valid = config.valid.empty() ? data::Corpus{} : read_corpus(config.valid, config.scheme);
  auto test = config.test.empty() ? data::Corpus{} : read_corpus(config.test, config.scheme);
  auto vocab = data::Vocabulary::build(train_split);
  auto embeddings = data::load_embeddings_file(config.embeddings, vocab, config.model.word_dim);
  return {std::move(train_split), std::move(valid), std::move(test), std::move(vocab), std::move(embeddings)};
}

VariantRun run_variant(const RunConfig& config, const Datasets& data, const model::Ablations& ablations) {
  auto model_config = config.model;
  model_config.ablations = ablations;
  model::CmNet net(model_config, data.vocab, data.embeddings, config.training.seed);
  VariantRun run;
  run.ablations = ablations;
  run.result = train::train(net, data.train, data.valid, config.training);
  run.valid_report = train::evaluate(net, data.valid.empty() ? data.train : data.valid);
  run.manifest = net.manifest();
  return run;
}

std::string comparison_report(const VariantRun& full, const VariantRun& ablated) {
  auto label = [](const VariantRun& r) {
    std::string s;
    for (const auto& n : r.ablations.names()) s += (s.empty() ? "" : "+") + n;
    return s.empty() ? std::string("full") : s;
  };
  auto params = [](const VariantRun& r) {
    std::size_t n = 0;
    for (const auto& e : r.manifest) n += e.trainable ? e.rows * e.cols : 0;
    return n;
  };
  std::string out = format("%-40s %10s %12s %12s %10s\n", "variant", "slot-F1", "intent-acc", "parameters", "best-epoch");
  for (const auto* r : {&full, &ablated}) {
    out += format("%-40s %10.2f %12.2f %12zu %10zu\n", label(*r).c_str(), 100.0 * r->valid_report.slots().f1,
                  100.0 * r->valid_report.intent_accuracy(), params(*r), r->result.best_epoch);
  }
  std::set<std::string> kept;
  for (const auto& e : ablated.manifest) kept.insert(e.name);
  std::set<std::string> original;
  for (const auto& e : full.manifest) {
    original.insert(e.name);
    if (!kept.count(e.name)) out += format("removed %s %zux%zu\n", e.name.c_str(), e.rows, e.cols);
  }
  for (const auto& e : ablated.manifest) {
    if (!original.count(e.name)) out += format("added %s %zux%zu\n", e.name.c_str(), e.rows, e.cols);
  }
  return out;
}

std::string parameter_group(const std::string& name) {
  const auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint slot filling and intent detection with collaborative memory networks", "cmnet"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint + metrics");
  train_cmd->add_option("config,--config", config_path, "Run configuration (JSON)")->required();
  overrides.attach(train_cmd);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint (or a predicted corpus) against gold data");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file");
  eval_cmd->add_option("--corpus", eval_args.corpus, "Gold corpus")->required();
  eval_cmd->add_option("--predicted", eval_args.predicted, "Predicted corpus to score instead of a model");
  eval_cmd->add_option("--config", eval_args.config, "Run configuration whose training vocabulary must match");
  eval_cmd->add_option("--scheme", eval_args.scheme, "Tag scheme when the checkpoint does not name one");

  std::string predict_ckpt, predict_corpus, predict_output;
  auto* predict_cmd = app.add_subcommand("predict", "Tag a corpus; output uses the corpus file format");
  predict_cmd->add_option("--checkpoint", predict_ckpt, "Checkpoint file")->required();
  predict_cmd->add_option("--corpus", predict_corpus, "Input corpus")->required();
  predict_cmd->add_option("--output", predict_output, "Output file (default: stdout)");

  auto* ablate_cmd = app.add_subcommand("ablate", "Train the full and an ablated model and compare them");
  ablate_cmd->add_option("config,--config", config_path, "Run configuration (JSON)")->required();
  overrides.attach(ablate_cmd);

  bool break_gate = false;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  grad_cmd->add_option("config,--config", config_path, "Run configuration (JSON)")->required();
  overrides.attach(grad_cmd);
  grad_cmd->add_flag("--break-gate-gradient", break_gate, "Corrupt the input-gate gradient (test fixture)")
      ->group("");

  std::vector<std::string> stats_paths;
  std::string stats_scheme = "bioes";
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics; the first corpus is the training split");
  stats_cmd->add_option("corpora", stats_paths, "Corpus files")->required();
  stats_cmd->add_option("--scheme", stats_scheme, "Tag scheme");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  auto run_config = [&] {
    auto c = load_run_config(config_path);
    overrides.apply(c);
    return c;
  };

  try {
    if (*train_cmd) return cmd_train(run_config(), out);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*predict_cmd) return cmd_predict(predict_ckpt, predict_corpus, predict_output, out);
    if (*ablate_cmd) return cmd_ablate(run_config(), out);
    if (*grad_cmd) return cmd_gradcheck(run_config(), break_gate, out);
    if (*stats_cmd) return cmd_stats(stats_paths, stats_scheme, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const LoadError& e) {
    err << "embeddings error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kCheckpointError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace cmnet::cli

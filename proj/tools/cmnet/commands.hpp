#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmnet/data/corpus.hpp"
#include "cmnet/data/embeddings.hpp"
#include "cmnet/data/vocabulary.hpp"
#include "cmnet/eval/metrics.hpp"
#include "cmnet/model/cmnet.hpp"
#include "cmnet/train/trainer.hpp"
#include "run_config.hpp"

namespace cmnet::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDivergence = 3,
  kCheckpointError = 4,
  kGradCheckFailed = 5,
};

// Corpora, vocabulary (from the training split) and aligned embeddings.
struct Datasets {
  data::Corpus train;
  data::Corpus valid;
  data::Corpus test;
  data::Vocabulary vocab;
  data::PretrainedEmbeddings embeddings;
};

Datasets load_datasets(const RunConfig& config);

// One trained model plus what the comparison reports need.
struct VariantRun {
  model::Ablations ablations;
  train::TrainResult result;
  eval::EvalReport valid_report;
  std::vector<model::ManifestEntry> manifest;
};

// Trains config.model with `ablations` replacing its flags.
VariantRun run_variant(const RunConfig& config, const Datasets& data, const model::Ablations& ablations);

// Side-by-side table of two runs and the parameters each one lacks.
std::string comparison_report(const VariantRun& full, const VariantRun& ablated);

// Group of a parameter for gradient-check reporting: its name without the
// last dotted component ("block.0.gate.i.W1" -> "block.0.gate.i").
std::string parameter_group(const std::string& name);

// Parses argv (argv[0] is the program name) and runs one subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmnet::cli

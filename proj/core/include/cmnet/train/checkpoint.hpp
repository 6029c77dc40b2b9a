#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "cmnet/model/cmnet.hpp"

namespace cmnet::train {

// Text checkpoint: model configuration, caller metadata, vocabulary
// inventories with their hash, then every parameter as
// "param <name> <trainable> <rows> <cols>" followed by one line of
// %.17g values per row. Values round-trip bit for bit.
using Metadata = std::map<std::string, std::string>;

void save_checkpoint(std::ostream& out, const model::CmNet& model, const Metadata& meta = {});
void save_checkpoint_file(const std::filesystem::path& path, const model::CmNet& model,
                          const Metadata& meta = {});

struct Checkpoint {
  model::CmNet model;
  Metadata meta;
};

// Rebuilds the model from the stored configuration and vocabulary and
// assigns every parameter. Throws CheckpointError on any corruption,
// including a vocabulary that no longer matches its hash or a parameter
// set that differs from what the configuration creates.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

}  // namespace cmnet::train

#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cmnet/autodiff/tensor.hpp"
#include "cmnet/data/vocabulary.hpp"

namespace cmnet::data {

// Pretrained vectors aligned to a vocabulary. Rows of tokens absent from the
// file (and the reserved rows) are zero and flagged in `covered`; the model
// substitutes its learnable UNK row for them.
struct PretrainedEmbeddings {
  ad::Tensor matrix;           // |tokens| x dim
  std::vector<bool> covered;   // per token id
  std::size_t dim = 0;

  std::size_t coverage() const;
};

// Each line: token SP v1 SP ... SP v_dim. Tokens not in the vocabulary are
// skipped; a wrong value count throws LoadError with the line number.
PretrainedEmbeddings load_embeddings(std::istream& in, const Vocabulary& vocab, std::size_t dim);
PretrainedEmbeddings load_embeddings_file(const std::filesystem::path& path, const Vocabulary& vocab,
                                          std::size_t dim);

}  // namespace cmnet::data

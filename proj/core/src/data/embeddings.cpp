#include "cmnet/data/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "cmnet/errors.hpp"

namespace cmnet::data {

std::size_t PretrainedEmbeddings::coverage() const {
  return static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
}

PretrainedEmbeddings load_embeddings(std::istream& in, const Vocabulary& vocab, std::size_t dim) {
  if (dim == 0) throw ContractError("load_embeddings: dim must be positive");
  PretrainedEmbeddings out{ad::Tensor::zeros(vocab.tokens().size(), dim),
                           std::vector<bool>(vocab.tokens().size(), false), dim};
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == 0 || sp == std::string::npos) throw LoadError(line_no, "expected 'token v1 ... v" + std::to_string(dim) + "'");
    const std::string token = line.substr(0, sp);
    values.clear();
    const char* p = line.data() + sp;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ') || !std::isfinite(v)) {
        throw LoadError(line_no, "malformed number");
      }
      values.push_back(v);
      p = next;
    }
    if (values.size() != dim) {
      throw LoadError(line_no, "expected " + std::to_string(dim) + " values, found " +
                                   std::to_string(values.size()));
    }
    const auto id = vocab.tokens().find(token);
    if (!id || *id < 2 || out.covered[*id]) continue;
    std::copy(values.begin(), values.end(), out.matrix.row_span(*id).begin());
    out.covered[*id] = true;
  }
  return out;
}

PretrainedEmbeddings load_embeddings_file(const std::filesystem::path& path, const Vocabulary& vocab,
                                          std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw LoadError(0, "cannot open embeddings file " + path.string());
  return load_embeddings(in, vocab, dim);
}

}  // namespace cmnet::data

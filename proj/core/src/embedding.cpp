#include "braillekit/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "braillekit/error.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {

VocabIndex::VocabIndex(const std::vector<std::string>& names) {
  for (const auto& name : names) add(name);
}

std::size_t VocabIndex::add(std::string name) {
  if (rows_.contains(name)) throw Error("DuplicateToken", "token '" + name + "' already in vocabulary");
  const std::size_t row = names_.size();
  rows_.emplace(name, row);
  names_.push_back(std::move(name));
  return row;
}

std::optional<std::size_t> VocabIndex::find(std::string_view name) const {
  const auto it = rows_.find(std::string(name));
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingTable::append_zero_rows(std::size_t count) {
  rows_ += count;
  data_.resize(rows_ * dim_, 0.0);
}

bool EmbeddingTable::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

std::filesystem::path with_extension(std::filesystem::path path, const char* extension) {
  if (path.extension() == ".json" || path.extension() == ".bin") path.replace_extension();
  path += extension;
  return path;
}

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(bits);
  return bits;
}

}  // namespace

void save_embeddings(const VocabEmbedding& model, const std::filesystem::path& stem) {
  nlohmann::json header = {{"vocab", model.vocab.names()},
                           {"dim", model.table.dim()},
                           {"rows", model.table.rows()},
                           {"dtype", "float64-le"}};
  {
    std::ofstream out(with_extension(stem, ".json"));
    if (!out) throw Error("IoError", "cannot write embedding header for " + stem.string());
    out << header.dump(1) << "\n";
  }
  std::ofstream out(with_extension(stem, ".bin"), std::ios::binary);
  if (!out) throw Error("IoError", "cannot write embedding data for " + stem.string());
  for (double value : model.table.data()) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(value));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

VocabEmbedding load_embeddings(const std::filesystem::path& path) {
  const auto header_path = with_extension(path, ".json");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_file(header_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError", header_path.string() + ": " + e.what());
  }
  if (!header.contains("vocab") || !header.contains("dim")) {
    throw Error("ParseError", header_path.string() + ": header needs 'vocab' and 'dim'");
  }
  VocabEmbedding model;
  model.vocab = VocabIndex(header.at("vocab").get<std::vector<std::string>>());
  const auto dim = header.at("dim").get<std::size_t>();
  model.table = EmbeddingTable(model.vocab.size(), dim);

  const std::string bytes = read_file(with_extension(path, ".bin"));
  if (bytes.size() != model.table.data().size() * 8) {
    throw Error("ParseError", "embedding data has " + std::to_string(bytes.size()) + " bytes, expected " +
                                  std::to_string(model.table.data().size() * 8));
  }
  auto values = model.table.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes.data() + i * 8, 8);
    values[i] = std::bit_cast<double>(to_little_endian(bits));
  }
  return model;
}

}  // namespace braillekit

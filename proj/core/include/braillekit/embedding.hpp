#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace braillekit {

// Dense bijection between token names and row ids [0, size).
class VocabIndex {
 public:
  VocabIndex() = default;
  explicit VocabIndex(const std::vector<std::string>& names);

  // Appends a token; throws Error("DuplicateToken").
  std::size_t add(std::string name);
  std::optional<std::size_t> find(std::string_view name) const;
  const std::string& name(std::size_t row) const { return names_.at(row); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

  friend bool operator==(const VocabIndex& a, const VocabIndex& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> rows_;
};

// Row-major |V| x d matrix of doubles.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void append_zero_rows(std::size_t count);
  bool all_finite() const noexcept;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct VocabEmbedding {
  VocabIndex vocab;
  EmbeddingTable table;
};

// `stem.json` holds {"vocab": [...], "dim": d, "rows": n, "dtype": "float64-le"};
// `stem.bin` holds the rows as little-endian float64.
void save_embeddings(const VocabEmbedding& model, const std::filesystem::path& stem);
// Accepts either the stem or the .json header path.
VocabEmbedding load_embeddings(const std::filesystem::path& path);

}  // namespace braillekit

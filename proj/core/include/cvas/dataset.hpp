#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cvas/linalg.hpp"
#include "cvas/recourse.hpp"

namespace cvas {

enum class ColumnKind { kContinuous, kCategorical, kBinary, kLabel };

std::string_view column_kind_name(ColumnKind kind) noexcept;

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  Actionability actionability = Actionability::kFree;
};

// One line per column: `name,kind,actionability`; `#` starts a comment.
// The label column may omit the actionability field.
struct FeatureSpec {
  std::vector<ColumnSpec> columns;

  void validate() const;
  std::size_t label_index() const;
};

FeatureSpec parse_feature_spec(std::string_view text);
FeatureSpec load_feature_spec(const std::filesystem::path& path);
std::string format_feature_spec(const FeatureSpec& spec);

// Plain comma-separated values with a header row; fields are trimmed and
// quoting is not supported.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
std::string format_csv(const CsvTable& table);

// One encoded column and how it maps back to its source feature.
struct EncodedColumn {
  std::string name;         // "age" or "color=red" for one-hot levels
  std::size_t source = 0;   // index into FeatureSpec::columns
  std::string level;        // one-hot level, empty otherwise
  Actionability actionability = Actionability::kFree;
  bool standardized = false;
  double mean = 0.0;        // training-split statistics for standardized columns
  double scale = 1.0;
};

struct Encoding {
  FeatureSpec spec;
  std::vector<EncodedColumn> columns;

  std::vector<Actionability> actionability() const;
  // Undo standardization column by column (one-hot columns pass through).
  Vector denormalize(const Vector& encoded) const;
};

struct EncodedDataset {
  Matrix features;            // every row, encoded
  std::vector<Label> labels;  // +/-1
  Encoding encoding;
  std::vector<std::size_t> train;  // sorted row indices
  std::vector<std::size_t> test;

  Matrix rows(const std::vector<std::size_t>& idx) const;
  std::vector<Label> row_labels(const std::vector<std::size_t>& idx) const;
};

// Seeded shuffle, floor(split_fraction * n) training rows, standardization
// fitted on the training rows only.
EncodedDataset encode_dataset(const CsvTable& table, const FeatureSpec& spec,
                              double split_fraction = 0.8, std::uint64_t seed = 0);

// Encodes with a previously fitted encoding; every row is a training row.
EncodedDataset apply_encoding(const CsvTable& table, const Encoding& encoding);

EncodedDataset load_dataset(const std::filesystem::path& csv_path,
                            const std::filesystem::path& spec_path,
                            double split_fraction = 0.8, std::uint64_t seed = 0);

}  // namespace cvas

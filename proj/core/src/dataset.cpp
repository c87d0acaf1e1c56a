#include "cvas/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>

#include "cvas/error.hpp"
#include "cvas/io_util.hpp"
#include "cvas/random.hpp"

namespace cvas {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

ColumnKind parse_kind(std::string_view s) {
  if (s == "continuous") return ColumnKind::kContinuous;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "binary") return ColumnKind::kBinary;
  if (s == "label") return ColumnKind::kLabel;
  throw Error(ErrorCode::kFormatError, "unknown column kind '" + std::string(s) + "'");
}

double parse_number(const std::string& s, const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::kFormatError,
                "column '" + column + "': '" + s + "' is not a number");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFiniteInput, "column '" + column + "' has a non-finite value");
  }
  return v;
}

Label parse_label(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::kBadLabelValue, "label '" + s + "'");
  }
  if (v == 1.0) return 1;
  if (v == -1.0 || v == 0.0) return -1;
  throw Error(ErrorCode::kBadLabelValue, "label '" + s + "' is not in {-1, 0, 1}");
}

// Position of every spec column in the CSV header.
std::vector<std::size_t> match_header(const CsvTable& table, const FeatureSpec& spec) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (!pos.emplace(table.header[i], i).second) {
      throw Error(ErrorCode::kSchemaMismatch, "duplicate CSV column '" + table.header[i] + "'");
    }
  }
  std::vector<std::size_t> out;
  for (const auto& c : spec.columns) {
    const auto it = pos.find(c.name);
    if (it == pos.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "CSV lacks column '" + c.name + "'");
    }
    out.push_back(it->second);
    pos.erase(it);
  }
  if (!pos.empty()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "CSV column '" + pos.begin()->first + "' is not in the feature spec");
  }
  return out;
}

// Raw (unstandardized) encoding of every row with fixed columns.
EncodedDataset encode_raw(const CsvTable& table, const Encoding& enc) {
  const auto header_pos = match_header(table, enc.spec);
  const std::size_t label_col = enc.spec.label_index();
  EncodedDataset out;
  out.encoding = enc;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  out.features = Matrix::Zero(n, static_cast<Eigen::Index>(enc.columns.size()));
  out.labels.resize(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    out.labels[static_cast<std::size_t>(i)] = parse_label(row[header_pos[label_col]]);
    for (std::size_t k = 0; k < enc.columns.size(); ++k) {
      const auto& col = enc.columns[k];
      const auto& spec_col = enc.spec.columns[col.source];
      const std::string& cell = row[header_pos[col.source]];
      double v;
      if (spec_col.kind == ColumnKind::kCategorical) {
        v = cell == col.level ? 1.0 : 0.0;
      } else {
        v = parse_number(cell, spec_col.name);
      }
      out.features(i, static_cast<Eigen::Index>(k)) = v;
    }
  }
  // Unseen categorical levels would silently encode as all zeros.
  for (std::size_t s = 0; s < enc.spec.columns.size(); ++s) {
    if (enc.spec.columns[s].kind != ColumnKind::kCategorical) continue;
    std::set<std::string> known;
    for (const auto& c : enc.columns) if (c.source == s) known.insert(c.level);
    for (const auto& row : table.rows) {
      if (!known.count(row[header_pos[s]])) {
        throw Error(ErrorCode::kSchemaMismatch, "column '" + enc.spec.columns[s].name +
                                                    "' has unseen level '" +
                                                    row[header_pos[s]] + "'");
      }
    }
  }
  return out;
}

void standardize(EncodedDataset& data) {
  for (std::size_t k = 0; k < data.encoding.columns.size(); ++k) {
    const auto& col = data.encoding.columns[k];
    if (!col.standardized) continue;
    data.features.col(static_cast<Eigen::Index>(k)).array() -= col.mean;
    data.features.col(static_cast<Eigen::Index>(k)).array() /= col.scale;
  }
}

}  // namespace

std::string_view column_kind_name(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::kContinuous: return "continuous";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kBinary: return "binary";
    case ColumnKind::kLabel: return "label";
  }
  return "unknown";
}

void FeatureSpec::validate() const {
  std::set<std::string> names;
  std::size_t labels = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) throw Error(ErrorCode::kFormatError, "empty column name");
    if (!names.insert(c.name).second) {
      throw Error(ErrorCode::kSchemaMismatch, "duplicate column '" + c.name + "'");
    }
    labels += c.kind == ColumnKind::kLabel ? 1 : 0;
  }
  if (labels != 1) {
    throw Error(ErrorCode::kSchemaMismatch, "feature spec needs exactly one label column");
  }
  if (columns.size() < 2) throw Error(ErrorCode::kSchemaMismatch, "no feature columns");
}

std::size_t FeatureSpec::label_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].kind == ColumnKind::kLabel) return i;
  }
  throw Error(ErrorCode::kSchemaMismatch, "feature spec has no label column");
}

FeatureSpec parse_feature_spec(std::string_view text) {
  FeatureSpec spec;
  int line_no = 0;
  for (auto raw : lines_of(text)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto f = split_fields(line);
    ColumnSpec c;
    c.name = f[0];
    if (f.size() < 2 || f.size() > 3) {
      throw Error(ErrorCode::kFormatError,
                  "spec line " + std::to_string(line_no) + ": expected name,kind,actionability");
    }
    c.kind = parse_kind(f[1]);
    if (f.size() == 3) {
      c.actionability = parse_actionability(f[2]);
    } else if (c.kind != ColumnKind::kLabel) {
      throw Error(ErrorCode::kFormatError,
                  "spec line " + std::to_string(line_no) + ": missing actionability");
    }
    spec.columns.push_back(std::move(c));
  }
  spec.validate();
  return spec;
}

FeatureSpec load_feature_spec(const std::filesystem::path& path) {
  return parse_feature_spec(read_file(path));
}

std::string format_feature_spec(const FeatureSpec& spec) {
  std::string out = "# name,kind,actionability\n";
  for (const auto& c : spec.columns) {
    out += c.name + "," + std::string(column_kind_name(c.kind));
    if (c.kind != ColumnKind::kLabel) out += "," + std::string(actionability_name(c.actionability));
    out += "\n";
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  bool have_header = false;
  int line_no = 0;
  for (auto raw : lines_of(text)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    auto fields = split_fields(raw);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCode::kFormatError, "CSV line " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.size()) + " fields, header has " +
                                               std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::kFormatError, "CSV has no header");
  return t;
}

std::string format_csv(const CsvTable& table) {
  auto join = [](const std::vector<std::string>& f) {
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + f[i];
    return s + "\n";
  };
  std::string out = join(table.header);
  for (const auto& r : table.rows) out += join(r);
  return out;
}

std::vector<Actionability> Encoding::actionability() const {
  std::vector<Actionability> out;
  for (const auto& c : columns) out.push_back(c.actionability);
  return out;
}

Vector Encoding::denormalize(const Vector& encoded) const {
  if (encoded.size() != static_cast<Eigen::Index>(columns.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "encoded vector size");
  }
  Vector out = encoded;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].standardized) {
      out[static_cast<Eigen::Index>(k)] =
          encoded[static_cast<Eigen::Index>(k)] * columns[k].scale + columns[k].mean;
    }
  }
  return out;
}

Matrix EncodedDataset::rows(const std::vector<std::size_t>& idx) const {
  Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

std::vector<Label> EncodedDataset::row_labels(const std::vector<std::size_t>& idx) const {
  std::vector<Label> out;
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

EncodedDataset encode_dataset(const CsvTable& table, const FeatureSpec& spec,
                              double split_fraction, std::uint64_t seed) {
  spec.validate();
  if (!(split_fraction > 0.0 && split_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split fraction must lie in (0, 1]");
  }
  const auto header_pos = match_header(table, spec);

  Encoding enc;
  enc.spec = spec;
  for (std::size_t s = 0; s < spec.columns.size(); ++s) {
    const auto& c = spec.columns[s];
    if (c.kind == ColumnKind::kLabel) continue;
    if (c.kind == ColumnKind::kCategorical) {
      std::set<std::string> levels;
      for (const auto& row : table.rows) levels.insert(row[header_pos[s]]);
      for (const auto& level : levels) {
        enc.columns.push_back({c.name + "=" + level, s, level, c.actionability, false, 0.0, 1.0});
      }
    } else {
      enc.columns.push_back({c.name, s, "", c.actionability,
                             c.kind == ColumnKind::kContinuous, 0.0, 1.0});
    }
  }

  EncodedDataset data = encode_raw(table, enc);
  const std::size_t n = table.rows.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, seed_stream::kSplit));
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(split_fraction * static_cast<double>(n)));
  if (n_train == 0) throw Error(ErrorCode::kEmptySplit, "training split is empty");
  if (split_fraction < 1.0 && n_train == n) {
    throw Error(ErrorCode::kEmptySplit, "test split is empty");
  }
  data.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(data.train.begin(), data.train.end());
  std::sort(data.test.begin(), data.test.end());

  // Population statistics over the training rows.
  for (std::size_t k = 0; k < data.encoding.columns.size(); ++k) {
    auto& col = data.encoding.columns[k];
    if (!col.standardized) continue;
    double mean = 0.0;
    for (std::size_t i : data.train) mean += data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (std::size_t i : data.train) {
      const double dv = data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) - mean;
      var += dv * dv;
    }
    const double sd = std::sqrt(var / static_cast<double>(n_train));
    col.mean = mean;
    col.scale = sd > 0.0 ? sd : 1.0;
  }
  standardize(data);
  return data;
}

EncodedDataset apply_encoding(const CsvTable& table, const Encoding& encoding) {
  EncodedDataset data = encode_raw(table, encoding);
  standardize(data);
  data.train.resize(table.rows.size());
  std::iota(data.train.begin(), data.train.end(), std::size_t{0});
  return data;
}

EncodedDataset load_dataset(const std::filesystem::path& csv_path,
                            const std::filesystem::path& spec_path,
                            double split_fraction, std::uint64_t seed) {
  return encode_dataset(parse_csv(read_file(csv_path)), load_feature_spec(spec_path),
                        split_fraction, seed);
}

}  // namespace cvas

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmix/csv.hpp"
#include "cmix/errors.hpp"
#include "cmix/matrix.hpp"
#include "cmix/rng.hpp"

namespace cmix {

enum class ColumnKind { Categorical, Continuous };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::size_t cardinality = 0;  // categorical only, >= 2
};

inline void validate_schema(const std::vector<ColumnSchema>& schema) {
  std::vector<std::string> names;
  for (const auto& c : schema) {
    if (c.kind == ColumnKind::Categorical && c.cardinality < 2)
      throw ConfigError("categorical column '" + c.name + "' needs cardinality >= 2");
    names.push_back(c.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw ConfigError("duplicate column name in schema");
}

/// Category-string -> dense-index mapping, first-occurrence order in the
/// fitted file. Persisted as a JSON sidecar so test-time loads reuse it.
struct Vocabulary {
  // one entry per categorical column, keyed by column name
  std::map<std::string, std::vector<std::string>> columns;
  std::vector<std::string> label_values;

  std::size_t index_of(const std::string& col, const std::string& value) const {
    const auto& vals = columns.at(col);
    auto it = std::find(vals.begin(), vals.end(), value);
    if (it == vals.end())
      throw UnknownCategoryError("unknown category '" + value + "' in column '" + col + "'");
    return static_cast<std::size_t>(it - vals.begin());
  }

  nlohmann::json to_json() const {
    return {{"columns", columns}, {"label_values", label_values}};
  }
  static Vocabulary from_json(const nlohmann::json& j) {
    Vocabulary v;
    v.columns = j.at("columns").get<std::map<std::string, std::vector<std::string>>>();
    v.label_values = j.at("label_values").get<std::vector<std::string>>();
    return v;
  }
};

using IntMatrix = std::vector<std::vector<std::size_t>>;  // n_rows x |D|

struct TabularDataset {
  std::vector<ColumnSchema> schema;  // declared order; continuous/categorical interleaved
  Matrix continuous;                 // n x |C|, continuous columns in declared order
  IntMatrix categorical;             // n x |D|, categorical columns in declared order
  std::vector<int> labels;           // empty when unlabeled
  std::vector<int> hidden_labels;    // true labels of an "unlabeled" split, eval only
  std::vector<std::size_t> row_ids;
  Vocabulary vocab;

  std::size_t n_rows() const { return row_ids.size(); }
  std::size_t n_continuous() const { return continuous.cols(); }
  std::size_t n_categorical() const { return categorical.empty() ? 0 : categorical[0].size(); }
  bool has_labels() const { return !labels.empty(); }

  std::vector<ColumnSchema> continuous_schema() const {
    std::vector<ColumnSchema> out;
    for (const auto& c : schema)
      if (c.kind == ColumnKind::Continuous) out.push_back(c);
    return out;
  }
  std::vector<ColumnSchema> categorical_schema() const {
    std::vector<ColumnSchema> out;
    for (const auto& c : schema)
      if (c.kind == ColumnKind::Categorical) out.push_back(c);
    return out;
  }

  int n_classes() const {
    int c = 0;
    for (int y : labels) c = std::max(c, y + 1);
    for (int y : hidden_labels) c = std::max(c, y + 1);
    return c;
  }

  TabularDataset subset(std::span<const std::size_t> idx) const {
    TabularDataset out;
    out.schema = schema;
    out.vocab = vocab;
    out.continuous = continuous.gather(idx);
    for (std::size_t i : idx) {
      if (!categorical.empty()) out.categorical.push_back(categorical[i]);
      if (!labels.empty()) out.labels.push_back(labels[i]);
      if (!hidden_labels.empty()) out.hidden_labels.push_back(hidden_labels[i]);
      out.row_ids.push_back(row_ids[i]);
    }
    return out;
  }
};

namespace detail {

inline double parse_double(const std::string& s, std::size_t line, const std::string& col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size() || s.empty()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(line) + ": cannot parse '" + s +
                     "' as number in column '" + col + "'");
  }
}

}  // namespace detail

/// Loads a CSV against a declared schema. With `fitted` null the categorical
/// vocabulary is built from the file (first-occurrence order); otherwise the
/// fitted vocabulary is reused and unseen values raise UnknownCategory.
inline TabularDataset load_csv(const std::string& path,
                               const std::vector<ColumnSchema>& schema,
                               const std::optional<std::string>& label_column = std::nullopt,
                               const Vocabulary* fitted = nullptr) {
  validate_schema(schema);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  csv::Reader reader(in);

  std::vector<std::string> header;
  if (!reader.next(header)) throw ParseError(path + ": empty file, header row required");

  auto col_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumnError("column '" + name + "' not in header of " + path);
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> field_of;
  for (const auto& c : schema) field_of.push_back(col_index(c.name));
  std::optional<std::size_t> label_field;
  if (label_column) label_field = col_index(*label_column);

  TabularDataset ds;
  ds.schema = schema;
  const bool fitting = (fitted == nullptr);
  if (!fitting) ds.vocab = *fitted;
  else
    for (const auto& c : schema)
      if (c.kind == ColumnKind::Categorical) ds.vocab.columns[c.name] = {};

  const std::size_t n_cont =
      static_cast<std::size_t>(std::count_if(schema.begin(), schema.end(), [](const auto& c) {
        return c.kind == ColumnKind::Continuous;
      }));
  std::vector<double> cont_data;
  std::vector<std::string> fields;
  std::size_t n_rows = 0;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(reader.line()) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<std::size_t> cat_row;
    for (std::size_t ci = 0; ci < schema.size(); ++ci) {
      const auto& col = schema[ci];
      const std::string& raw = fields[field_of[ci]];
      if (col.kind == ColumnKind::Continuous) {
        cont_data.push_back(detail::parse_double(raw, reader.line(), col.name));
      } else {
        if (raw.empty())
          throw ParseError("row " + std::to_string(reader.line()) + ": missing value in column '" +
                           col.name + "'");
        auto& vals = ds.vocab.columns.at(col.name);
        auto it = std::find(vals.begin(), vals.end(), raw);
        std::size_t idx;
        if (it != vals.end()) {
          idx = static_cast<std::size_t>(it - vals.begin());
        } else if (fitting) {
          if (vals.size() >= col.cardinality)
            throw ParseError("row " + std::to_string(reader.line()) + ": column '" + col.name +
                             "' exceeds declared cardinality " + std::to_string(col.cardinality));
          idx = vals.size();
          vals.push_back(raw);
        } else {
          throw UnknownCategoryError("row " + std::to_string(reader.line()) +
                                     ": unknown category '" + raw + "' in column '" + col.name + "'");
        }
        cat_row.push_back(idx);
      }
    }
    if (label_field) {
      const std::string& raw = fields[*label_field];
      auto& vals = ds.vocab.label_values;
      auto it = std::find(vals.begin(), vals.end(), raw);
      std::size_t idx;
      if (it != vals.end()) {
        idx = static_cast<std::size_t>(it - vals.begin());
      } else if (fitting) {
        idx = vals.size();
        vals.push_back(raw);
      } else {
        throw UnknownCategoryError("row " + std::to_string(reader.line()) +
                                   ": unknown label value '" + raw + "'");
      }
      ds.labels.push_back(static_cast<int>(idx));
    }
    if (!cat_row.empty()) ds.categorical.push_back(std::move(cat_row));
    ds.row_ids.push_back(n_rows++);
  }
  ds.continuous = Matrix::from_rows(n_rows, n_cont, std::move(cont_data));
  return ds;
}

/// Per-column zero-mean/unit-variance transform fitted on the training
/// split. Zero-variance columns map to all-zeros (and invert to the mean).
struct Standardizer {
  std::vector<std::string> column_names;
  std::vector<double> mean, stddev;  // population std; 0 marks zero variance

  static Standardizer fit(const TabularDataset& ds) {
    Standardizer s;
    for (const auto& c : ds.continuous_schema()) s.column_names.push_back(c.name);
    const std::size_t n = ds.continuous.rows(), m = ds.continuous.cols();
    s.mean.assign(m, 0.0);
    s.stddev.assign(m, 0.0);
    if (n == 0) return s;
    for (std::size_t j = 0; j < m; ++j) {
      double mu = 0.0;
      for (std::size_t i = 0; i < n; ++i) mu += ds.continuous(i, j);
      mu /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = ds.continuous(i, j) - mu;
        var += d * d;
      }
      var /= static_cast<double>(n);
      s.mean[j] = mu;
      s.stddev[j] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return s;
  }

  void check(const TabularDataset& ds) const {
    auto names = ds.continuous_schema();
    if (names.size() != column_names.size())
      throw SchemaMismatchError("standardizer fitted on different column count");
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j].name != column_names[j])
        throw SchemaMismatchError("standardizer column '" + column_names[j] +
                                  "' vs dataset column '" + names[j].name + "'");
  }

  TabularDataset apply(const TabularDataset& ds) const {
    check(ds);
    TabularDataset out = ds;
    for (std::size_t j = 0; j < mean.size(); ++j)
      for (std::size_t i = 0; i < out.continuous.rows(); ++i)
        out.continuous(i, j) =
            stddev[j] > 0.0 ? (ds.continuous(i, j) - mean[j]) / stddev[j] : 0.0;
    return out;
  }

  TabularDataset inverse(const TabularDataset& ds) const {
    check(ds);
    TabularDataset out = ds;
    for (std::size_t j = 0; j < mean.size(); ++j)
      for (std::size_t i = 0; i < out.continuous.rows(); ++i)
        out.continuous(i, j) = stddev[j] > 0.0 ? ds.continuous(i, j) * stddev[j] + mean[j]
                                               : mean[j];
    return out;
  }

  nlohmann::json to_json() const {
    return {{"columns", column_names}, {"mean", mean}, {"stddev", stddev}};
  }
  static Standardizer from_json(const nlohmann::json& j) {
    Standardizer s;
    s.column_names = j.at("columns").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    return s;
  }
};

struct SplitSpec {
  double labeled_fraction = 0.1;
  double test_fraction = 0.2;  // ignored when a separate test file exists
  std::uint64_t seed = 0;
};

struct Split {
  TabularDataset train_labeled;
  TabularDataset train_unlabeled;  // labels moved to hidden_labels
  TabularDataset test;
};

namespace detail {

/// Largest-remainder stratified allocation: per-class counts off from exact
/// proportionality by at most one.
inline std::vector<std::size_t> stratified_counts(const std::vector<std::size_t>& class_sizes,
                                                  std::size_t total_target) {
  const std::size_t n =
      std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
  std::vector<std::size_t> take(class_sizes.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    const double exact =
        static_cast<double>(total_target) * static_cast<double>(class_sizes[c]) / static_cast<double>(n);
    take[c] = static_cast<std::size_t>(std::floor(exact));
    take[c] = std::min(take[c], class_sizes[c]);
    assigned += take[c];
    rem.push_back({exact - std::floor(exact), c});
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [r, c] : rem) {
    if (assigned >= total_target) break;
    if (take[c] < class_sizes[c]) {
      ++take[c];
      ++assigned;
    }
  }
  return take;
}

inline Split split_pool(const TabularDataset& train_pool, const TabularDataset& test,
                        std::size_t labeled_target, std::uint64_t seed) {
  const int n_classes = train_pool.n_classes();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < train_pool.n_rows(); ++i)
    by_class[static_cast<std::size_t>(train_pool.labels[i])].push_back(i);
  std::vector<std::size_t> class_sizes;
  for (const auto& v : by_class) class_sizes.push_back(v.size());
  auto take = stratified_counts(class_sizes, labeled_target);
  for (std::size_t c = 0; c < take.size(); ++c)
    if (take[c] == 0)
      throw EmptyClassError("class " + std::to_string(c) +
                            " would receive zero labeled rows; raise labeled_fraction");

  auto eng = substream(seed, "split.labeled");
  std::vector<std::size_t> lab_idx, unlab_idx;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto rows = by_class[c];
    shuffle_inplace(rows, eng);
    for (std::size_t i = 0; i < rows.size(); ++i)
      (i < take[c] ? lab_idx : unlab_idx).push_back(rows[i]);
  }
  std::sort(lab_idx.begin(), lab_idx.end());
  std::sort(unlab_idx.begin(), unlab_idx.end());

  Split out;
  out.train_labeled = train_pool.subset(lab_idx);
  out.train_unlabeled = train_pool.subset(unlab_idx);
  out.train_unlabeled.hidden_labels = std::move(out.train_unlabeled.labels);
  out.train_unlabeled.labels.clear();
  out.test = test;
  return out;
}

}  // namespace detail

/// Splits a labeled dataset into labeled/unlabeled/test partitions. The
/// labeled subset is a class-stratified sample; everything is a pure
/// function of the seed.
inline Split split(const TabularDataset& ds, const SplitSpec& spec) {
  if (!ds.has_labels()) throw EmptyClassError("split requires labels");
  if (spec.labeled_fraction <= 0.0 || spec.labeled_fraction > 1.0)
    throw ConfigError("labeled_fraction must be in (0, 1]");

  std::vector<std::size_t> all(ds.n_rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> test_idx, pool_idx;
  if (spec.test_fraction > 0.0) {
    auto eng = substream(spec.seed, "split.test");
    auto order = all;
    shuffle_inplace(order, eng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(ds.n_rows())));
    test_idx.assign(order.begin(), order.begin() + n_test);
    pool_idx.assign(order.begin() + n_test, order.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(pool_idx.begin(), pool_idx.end());
  } else {
    pool_idx = all;
  }
  TabularDataset pool = ds.subset(pool_idx);
  TabularDataset test = ds.subset(test_idx);
  const auto labeled_target = static_cast<std::size_t>(
      std::llround(spec.labeled_fraction * static_cast<double>(pool.n_rows())));
  return detail::split_pool(pool, test, std::max<std::size_t>(labeled_target, 1), spec.seed);
}

/// Same as split() but with an absolute labeled count (labeled-size sweeps).
inline Split split_by_count(const TabularDataset& train, const TabularDataset& test,
                            std::size_t n_labeled, std::uint64_t seed) {
  if (!train.has_labels()) throw EmptyClassError("split requires labels");
  if (n_labeled > train.n_rows()) throw ConfigError("labeled count exceeds train pool");
  return detail::split_pool(train, test, n_labeled, seed);
}

struct BatchPair {
  std::vector<std::size_t> labeled;    // indices into the labeled dataset
  std::vector<std::size_t> unlabeled;  // indices into the unlabeled dataset
};

/// Per-epoch batch schedule. Both pools are shuffled deterministically from
/// (seed, epoch); the shorter pool cycles so every long-pool row appears
/// once per epoch.
inline std::vector<BatchPair> make_epoch_batches(std::size_t n_labeled, std::size_t n_unlabeled,
                                                 std::size_t batch_l, std::size_t batch_u,
                                                 std::uint64_t seed, std::uint64_t epoch) {
  if (batch_l < 2 || batch_u < 2) throw ConfigError("batch sizes must be >= 2");
  if (n_labeled == 0) throw EmptyClassError("labeled pool is empty");

  std::vector<std::size_t> lorder(n_labeled), uorder(n_unlabeled);
  std::iota(lorder.begin(), lorder.end(), std::size_t{0});
  std::iota(uorder.begin(), uorder.end(), std::size_t{0});
  auto leng = substream(seed, "batch.labeled", epoch);
  shuffle_inplace(lorder, leng);
  auto ueng = substream(seed, "batch.unlabeled", epoch);
  shuffle_inplace(uorder, ueng);

  const std::size_t nb_l = (n_labeled + batch_l - 1) / batch_l;
  const std::size_t nb_u = n_unlabeled ? (n_unlabeled + batch_u - 1) / batch_u : 0;
  const std::size_t nb = std::max<std::size_t>(std::max(nb_l, nb_u), 1);

  // The pool that determines the epoch length is sliced consecutively (each
  // row exactly once); the other pool cycles through its shuffled order.
  auto schedule = [nb](const std::vector<std::size_t>& order, std::size_t bsz,
                       bool is_long) {
    std::vector<std::vector<std::size_t>> batches(nb);
    const std::size_t n = order.size();
    if (n == 0) return batches;
    if (is_long) {
      for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t start = b * bsz;
        const std::size_t end = std::min(start + bsz, n);
        if (start < end) batches[b].assign(order.begin() + start, order.begin() + end);
      }
      if (nb > 1 && batches[nb - 1].size() == 1) {  // fold a singleton tail
        batches[nb - 2].push_back(batches[nb - 1][0]);
        batches.pop_back();
      }
    } else {
      std::size_t pos = 0;
      for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t i = 0; i < bsz; ++i) batches[b].push_back(order[pos++ % n]);
    }
    return batches;
  };

  auto lbatches = schedule(lorder, batch_l, nb_l == nb);
  auto ubatches = schedule(uorder, batch_u, n_unlabeled && nb_u == nb);
  std::vector<BatchPair> out(n_unlabeled ? std::min(lbatches.size(), ubatches.size())
                                         : lbatches.size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].labeled = std::move(lbatches[b]);
    if (n_unlabeled) out[b].unlabeled = std::move(ubatches[b]);
  }
  return out;
}

/// FNV-1a over a file's bytes; used for manifest dataset fingerprints.
inline std::uint64_t file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace cmix

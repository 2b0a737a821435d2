#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "cmix/data.hpp"
#include "helpers.hpp"

using namespace cmix;

namespace {

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& content) {
    static int counter = 0;
    path = "tmp_data_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

const std::vector<ColumnSchema> kMixedSchema = {
    {"age", ColumnKind::Continuous, 0},
    {"job", ColumnKind::Categorical, 3},
    {"score", ColumnKind::Continuous, 0},
};

}  // namespace

TEST_CASE("csv load: mixed schema, vocabulary in first-occurrence order") {
  TempCsv f("age,job,score,y\n38,eng,1.5,yes\n24,doc,-2,no\n51,eng,0,yes\n");
  auto ds = load_csv(f.path, kMixedSchema, "y");
  REQUIRE(ds.n_rows() == 3);
  REQUIRE(ds.n_continuous() == 2);
  REQUIRE(ds.n_categorical() == 1);
  CHECK(ds.continuous(0, 0) == 38.0);
  CHECK(ds.continuous(1, 1) == -2.0);
  CHECK(ds.categorical[0][0] == 0);  // eng seen first
  CHECK(ds.categorical[1][0] == 1);
  CHECK(ds.categorical[2][0] == 0);
  CHECK(ds.vocab.columns.at("job") == std::vector<std::string>{"eng", "doc"});
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  CHECK(ds.vocab.label_values == std::vector<std::string>{"yes", "no"});
}

TEST_CASE("csv load: quoted fields and column reordering by header") {
  TempCsv f("y,score,job,age\nno,\"1,5\",\"a\"\"b\",7\n");
  // quoted comma is part of the field -> parse error for score
  CHECK_THROWS_AS(load_csv(f.path, kMixedSchema, "y"), ParseError);
  TempCsv g("y,score,job,age\nno,2.5,\"a\"\"b\",7\n");
  auto ds = load_csv(g.path, kMixedSchema, "y");
  CHECK(ds.continuous(0, 0) == 7.0);  // age resolved by name, not position
  CHECK(ds.vocab.columns.at("job")[0] == "a\"b");
}

TEST_CASE("csv load: errors") {
  SECTION("missing column") {
    TempCsv f("age,score,y\n1,2,no\n");
    CHECK_THROWS_AS(load_csv(f.path, kMixedSchema, "y"), MissingColumnError);
  }
  SECTION("ragged row reports line number") {
    TempCsv f("age,job,score,y\n1,eng,2,no\n3,eng\n");
    try {
      load_csv(f.path, kMixedSchema, "y");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SECTION("cardinality overflow") {
    TempCsv f("age,job,score,y\n1,a,0,n\n1,b,0,n\n1,c,0,n\n1,d,0,n\n");
    CHECK_THROWS_AS(load_csv(f.path, kMixedSchema, "y"), ParseError);
  }
  SECTION("unknown category under a fitted vocabulary") {
    TempCsv f("age,job,score,y\n1,eng,0,n\n");
    auto fit = load_csv(f.path, kMixedSchema, "y");
    TempCsv g("age,job,score,y\n1,lawyer,0,n\n");
    CHECK_THROWS_AS(load_csv(g.path, kMixedSchema, "y", &fit.vocab), UnknownCategoryError);
  }
}

TEST_CASE("vocabulary json round trip") {
  Vocabulary v;
  v.columns["job"] = {"eng", "doc"};
  v.label_values = {"yes", "no"};
  auto w = Vocabulary::from_json(v.to_json());
  CHECK(w.columns == v.columns);
  CHECK(w.label_values == v.label_values);
  CHECK(w.index_of("job", "doc") == 1);
  CHECK_THROWS_AS(w.index_of("job", "noop"), UnknownCategoryError);
}

TEST_CASE("standardizer: oracle values for [2,4,6]") {
  TabularDataset ds;
  ds.schema = {{"x", ColumnKind::Continuous, 0}};
  ds.continuous = Matrix(3, 1);
  ds.continuous(0, 0) = 2;
  ds.continuous(1, 0) = 4;
  ds.continuous(2, 0) = 6;
  ds.row_ids = {0, 1, 2};
  auto s = Standardizer::fit(ds);
  CHECK(s.mean[0] == Catch::Approx(4.0));
  CHECK(s.stddev[0] == Catch::Approx(std::sqrt(8.0 / 3.0)));  // population std
  auto t = s.apply(ds);
  CHECK(t.continuous(0, 0) == Catch::Approx(-1.22474487139158905));
  CHECK(t.continuous(1, 0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(t.continuous(2, 0) == Catch::Approx(1.22474487139158905));
}

TEST_CASE("standardizer: round trip, zero variance, schema check") {
  std::mt19937_64 eng(7);
  TabularDataset ds;
  ds.schema = {{"a", ColumnKind::Continuous, 0}, {"b", ColumnKind::Continuous, 0}};
  ds.continuous = testutil::random_matrix(20, 2, eng, 3.0);
  for (std::size_t i = 0; i < 20; ++i) {
    ds.continuous(i, 1) = 5.0;  // constant column
    ds.row_ids.push_back(i);
  }
  auto s = Standardizer::fit(ds);
  auto t = s.apply(ds);
  for (std::size_t i = 0; i < 20; ++i) CHECK(t.continuous(i, 1) == 0.0);
  auto back = s.inverse(t);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(back.continuous(i, j) == Catch::Approx(ds.continuous(i, j)).margin(1e-9));

  TabularDataset other = ds;
  other.schema[0].name = "zz";
  CHECK_THROWS_AS(s.apply(other), SchemaMismatchError);

  auto s2 = Standardizer::from_json(s.to_json());
  CHECK(s2.mean == s.mean);
  CHECK(s2.stddev == s.stddev);
}

TEST_CASE("split: partition, stratification, determinism") {
  // 200 rows, classes sized 120/60/20
  TabularDataset ds;
  ds.schema = {{"x", ColumnKind::Continuous, 0}};
  ds.continuous = Matrix(200, 1);
  for (std::size_t i = 0; i < 200; ++i) {
    ds.continuous(i, 0) = static_cast<double>(i);
    ds.labels.push_back(i < 120 ? 0 : i < 180 ? 1 : 2);
    ds.row_ids.push_back(i);
  }
  SplitSpec spec{0.1, 0.2, 42};
  auto sp = split(ds, spec);
  CHECK(sp.test.n_rows() == 40);
  CHECK(sp.train_labeled.n_rows() == 16);
  CHECK(sp.train_labeled.n_rows() + sp.train_unlabeled.n_rows() + sp.test.n_rows() == 200);

  std::set<std::size_t> seen;
  for (const auto* part : {&sp.train_labeled, &sp.train_unlabeled, &sp.test})
    for (auto id : part->row_ids) CHECK(seen.insert(id).second);
  CHECK(seen.size() == 200);

  // stratified within +-1 of proportional
  std::vector<std::size_t> pool_sizes(3, 0), lab_sizes(3, 0);
  for (int y : sp.train_labeled.labels) ++lab_sizes[static_cast<std::size_t>(y)];
  for (int y : sp.train_labeled.labels) (void)y;
  for (int y : sp.train_unlabeled.hidden_labels) ++pool_sizes[static_cast<std::size_t>(y)];
  for (std::size_t c = 0; c < 3; ++c) pool_sizes[c] += lab_sizes[c];
  for (std::size_t c = 0; c < 3; ++c) {
    const double exact = 16.0 * static_cast<double>(pool_sizes[c]) / 160.0;
    CHECK(std::abs(static_cast<double>(lab_sizes[c]) - exact) <= 1.0);
  }

  // unlabeled retains true labels only in hidden_labels
  CHECK(sp.train_unlabeled.labels.empty());
  CHECK(sp.train_unlabeled.hidden_labels.size() == sp.train_unlabeled.n_rows());

  auto sp2 = split(ds, spec);
  CHECK(sp2.train_labeled.row_ids == sp.train_labeled.row_ids);
  CHECK(sp2.test.row_ids == sp.test.row_ids);
  SplitSpec other{0.1, 0.2, 43};
  CHECK(split(ds, other).train_labeled.row_ids != sp.train_labeled.row_ids);
}

TEST_CASE("split: empty class raises") {
  TabularDataset ds;
  ds.schema = {{"x", ColumnKind::Continuous, 0}};
  ds.continuous = Matrix(20, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    ds.labels.push_back(i < 19 ? 0 : 1);
    ds.row_ids.push_back(i);
  }
  CHECK_THROWS_AS(split(ds, SplitSpec{0.05, 0.0, 1}), EmptyClassError);
}

TEST_CASE("epoch batches: coverage, sizes, determinism") {
  auto batches = make_epoch_batches(10, 53, 4, 16, 9, 0);
  // unlabeled pool is longer: ceil(53/16)=4 batches
  REQUIRE(batches.size() == 4);
  std::set<std::size_t> useen;
  std::size_t lab_total = 0;
  for (const auto& b : batches) {
    CHECK(b.labeled.size() == 4);  // short pool cycles at full batch size
    CHECK(b.unlabeled.size() >= 2);
    lab_total += b.labeled.size();
    for (auto u : b.unlabeled) useen.insert(u);
  }
  CHECK(useen.size() == 53);  // every unlabeled row appears
  CHECK(lab_total == 16);

  auto again = make_epoch_batches(10, 53, 4, 16, 9, 0);
  for (std::size_t b = 0; b < 4; ++b) {
    CHECK(again[b].labeled == batches[b].labeled);
    CHECK(again[b].unlabeled == batches[b].unlabeled);
  }
  auto next_epoch = make_epoch_batches(10, 53, 4, 16, 9, 1);
  bool differs = false;
  for (std::size_t b = 0; b < 4; ++b)
    if (next_epoch[b].unlabeled != batches[b].unlabeled) differs = true;
  CHECK(differs);
}

TEST_CASE("epoch batches: singleton tail folded into previous batch") {
  auto batches = make_epoch_batches(9, 0, 4, 4, 3, 0);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].labeled.size() == 4);
  CHECK(batches[1].labeled.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& b : batches)
    for (auto i : b.labeled) seen.insert(i);
  CHECK(seen.size() == 9);
}

TEST_CASE("file fingerprint is content-sensitive") {
  TempCsv a("x\n1\n");
  TempCsv b("x\n2\n");
  TempCsv c("x\n1\n");
  CHECK(file_fingerprint(a.path) != file_fingerprint(b.path));
  CHECK(file_fingerprint(a.path) == file_fingerprint(c.path));
}

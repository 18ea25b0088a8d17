#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstring>
#include <limits>
#include <map>
#include <set>

#include "bayeshead/data.hpp"
#include "bayeshead/error.hpp"
#include "bayeshead/random.hpp"
#include "helpers.hpp"

using namespace bayeshead;
using testing::TempDir;

namespace {

const std::filesystem::path kData = BAYESHEAD_DATA_DIR;

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

Dataset small_dataset(Index n, Index d, int c, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.n_classes = c;
  ds.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.features(i, j) = rng.normal() * 3.0 + static_cast<double>(j);
    ds.labels.push_back(static_cast<int>(rng.uniform_index(c)));
  }
  return ds;
}

}  // namespace

TEST_CASE("bundled Iris loads with N=150, D=4, C=3") {
  const Dataset ds = load_dataset(kData / "iris.csv");
  CHECK(ds.size() == 150);
  CHECK(ds.dim() == 4);
  CHECK(ds.n_classes == 3);
  std::map<int, int> counts;
  for (int y : ds.labels) counts[y]++;
  CHECK(counts == std::map<int, int>{{0, 50}, {1, 50}, {2, 50}});
  CHECK(ds.features(0, 0) == 5.1);
  CHECK(ds.features(149, 3) == 1.8);
}

TEST_CASE("toy-QA text has 30 rows with label counts 13/11/6") {
  const auto records = load_qa_jsonl(kData / "toyqa.jsonl");
  REQUIRE(records.size() == 30);
  std::map<int, int> counts;
  for (const auto& r : records) {
    CHECK(r.options.size() == 3);
    counts[r.label]++;
  }
  CHECK(counts == std::map<int, int>{{0, 13}, {1, 11}, {2, 6}});
  CHECK(records[0].question == "Which planet is known as the Red Planet?");
  CHECK(records[0].options[0] == "Mars");
}

TEST_CASE("toy-QA feature fixture matches the text labels") {
  const Dataset ds = load_dataset(kData / "toyqa_features.bhft");
  CHECK(ds.size() == 30);
  CHECK(ds.dim() == 2304);
  CHECK(ds.n_classes == 3);
  const auto records = load_qa_jsonl(kData / "toyqa.jsonl");
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(ds.labels[i] == records[i].label);
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("feature-binary round trip is bit-exact and matches the documented layout") {
  TempDir tmp("bhft");
  Dataset ds = small_dataset(7, 5, 4, 1);
  // Values representable in float32 so the round trip is exact.
  ds.features = ds.features.cast<float>().cast<double>();
  save_feature_binary(ds, tmp / "a.bhft");
  const Dataset back = load_dataset(tmp / "a.bhft");
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.n_classes == 4);

  const std::string bytes = testing::slurp(tmp / "a.bhft");
  REQUIRE(bytes.size() == 4 + 2 + 12 + 7 * 5 * 4 + 7 * 4);
  CHECK(bytes.substr(0, 4) == "BHFT");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 6, 4);
  CHECK(n == 7);
  float first = 0.0f;
  std::memcpy(&first, bytes.data() + 18, 4);
  CHECK(static_cast<double>(first) == ds.features(0, 0));
}

TEST_CASE("CSV round trip within 1e-9") {
  TempDir tmp("csv");
  const Dataset ds = small_dataset(20, 3, 3, 2);
  save_csv(ds, tmp / "a.csv");
  const Dataset back = load_dataset(tmp / "a.csv");
  CHECK((back.features - ds.features).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("feature-binary label equal to C names the offending row") {
  TempDir tmp("badlabel");
  Dataset ds = small_dataset(4, 2, 3, 3);
  save_feature_binary(ds, tmp / "ok.bhft");
  std::string bytes = testing::slurp(tmp / "ok.bhft");
  const std::uint32_t bad = 3;
  std::memcpy(bytes.data() + bytes.size() - 2 * 4, &bad, 4);  // row 2
  testing::spit(tmp / "bad.bhft", bytes);
  const std::string msg = error_of([&] { load_dataset(tmp / "bad.bhft"); });
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(msg.find("label 3") != std::string::npos);
}

TEST_CASE("feature-binary corruption is reported") {
  TempDir tmp("corrupt");
  Dataset ds = small_dataset(3, 2, 2, 4);
  save_feature_binary(ds, tmp / "ok.bhft");
  const std::string bytes = testing::slurp(tmp / "ok.bhft");

  testing::spit(tmp / "trunc.bhft", bytes.substr(0, bytes.size() - 1));
  CHECK(error_of([&] { load_dataset(tmp / "trunc.bhft"); }).find("payload size") != std::string::npos);

  std::string magic = bytes;
  magic[0] = 'X';
  testing::spit(tmp / "magic.bhft", magic);
  CHECK_THROWS_AS(load_dataset(tmp / "magic.bhft"), DataError);

  std::string nan = bytes;
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(nan.data() + 18 + 4 * 3, &inf, 4);  // row 1, column 1
  testing::spit(tmp / "nan.bhft", nan);
  const std::string msg = error_of([&] { load_dataset(tmp / "nan.bhft"); });
  CHECK(msg.find("row 1") != std::string::npos);
  CHECK(msg.find("non-finite") != std::string::npos);

  testing::spit(tmp / "empty.bhft", "");
  CHECK(error_of([&] { load_dataset(tmp / "empty.bhft"); }).find("empty") != std::string::npos);
}

TEST_CASE("CSV errors carry line numbers") {
  TempDir tmp("csverr");
  testing::spit(tmp / "hdr.csv", "a,b,c\n1,2,0\n");
  CHECK(error_of([&] { load_dataset(tmp / "hdr.csv"); }).find("malformed header") != std::string::npos);

  testing::spit(tmp / "nan.csv", "a,b,label\n1,2,0\n1,nan,1\n");
  const std::string nan = error_of([&] { load_dataset(tmp / "nan.csv"); });
  CHECK(nan.find(":3") != std::string::npos);

  testing::spit(tmp / "neg.csv", "a,label\n1,0\n2,-1\n");
  CHECK(error_of([&] { load_dataset(tmp / "neg.csv"); }).find(":3") != std::string::npos);

  testing::spit(tmp / "fields.csv", "a,label\n1,0\n2\n");
  CHECK(error_of([&] { load_dataset(tmp / "fields.csv"); }).find(":3") != std::string::npos);

  testing::spit(tmp / "empty.csv", "");
  CHECK(error_of([&] { load_dataset(tmp / "empty.csv"); }).find("empty") != std::string::npos);

  testing::spit(tmp / "norows.csv", "a,label\n");
  CHECK_THROWS_AS(load_dataset(tmp / "norows.csv"), DataError);
}

TEST_CASE("split sizes, determinism and partition property") {
  const Dataset ds = load_dataset(kData / "iris.csv");
  const Split a = split(ds, {0.8, 11});
  CHECK(a.train.size() == 120);
  CHECK(a.test.size() == 30);
  const Split b = split(ds, {0.8, 11});
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
  const Split c = split(ds, {0.8, 12});
  CHECK(a.test_rows != c.test_rows);

  std::set<Index> all(a.train_rows.begin(), a.train_rows.end());
  for (Index r : a.test_rows) CHECK(all.insert(r).second);
  CHECK(all.size() == 150);
  for (std::size_t i = 0; i < a.test_rows.size(); ++i) {
    CHECK(a.test.features.row(static_cast<Index>(i)) == ds.features.row(a.test_rows[i]));
    CHECK(a.test.labels[i] == ds.labels[static_cast<std::size_t>(a.test_rows[i])]);
  }
}

TEST_CASE("split rejects degenerate fractions") {
  const Dataset ds = small_dataset(30, 2, 3, 5);
  CHECK_THROWS_AS(split(ds, {0.999, 1}), DataError);
  CHECK_THROWS_AS(split(ds, {0.0, 1}), DataError);
  CHECK_THROWS_AS(split(ds, {1.0, 1}), DataError);
  CHECK_THROWS_AS(split(ds, {0.001, 1}), DataError);
}

TEST_CASE("standardize") {
  SUBCASE("train columns have mean 0 and population std 1; test uses train statistics") {
    const Dataset ds = small_dataset(50, 3, 2, 6);
    const Split parts = split(ds, {0.8, 1});
    const Standardized s = standardize(parts.train, parts.test);
    const Eigen::RowVectorXd mean = s.train.features.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd centered = s.train.features.rowwise() - mean;
    const Eigen::RowVectorXd var = centered.colwise().squaredNorm() / static_cast<double>(centered.rows());
    CHECK((var.array() - 1.0).abs().maxCoeff() < 1e-12);
    const Eigen::RowVectorXd expected =
        (parts.test.features.row(0) - s.stats.mean.transpose()).cwiseQuotient(s.stats.std_dev.transpose());
    CHECK((s.test.features.row(0) - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("constant column passes through with recorded std 1") {
    Dataset ds;
    ds.n_classes = 2;
    ds.features.resize(3, 1);
    ds.features << 4.0, 4.0, 4.0;
    ds.labels = {0, 1, 0};
    const Standardized s = standardize(ds, ds);
    CHECK(s.stats.std_dev(0) == 1.0);
    CHECK(s.train.features == ds.features);
  }
  SUBCASE("two-point column maps to -1, +1") {
    Dataset ds;
    ds.n_classes = 2;
    ds.features.resize(2, 1);
    ds.features << 0.0, 2.0;
    ds.labels = {0, 1};
    const Standardized s = standardize(ds, ds);
    CHECK(s.train.features(0, 0) == -1.0);
    CHECK(s.train.features(1, 0) == 1.0);
  }
  SUBCASE("re-standardizing is the identity") {
    const Dataset ds = small_dataset(40, 4, 3, 7);
    const Standardized once = standardize(ds, ds);
    const Standardized twice = standardize(once.train, once.train);
    CHECK((twice.train.features - once.train.features).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("fewer than 2 rows is rejected") {
    const Dataset ds = small_dataset(1, 2, 2, 8);
    CHECK_THROWS_AS(standardize(ds, ds), DataError);
  }
}

TEST_CASE("QA JSON-lines round trip and errors") {
  TempDir tmp("qa");
  std::vector<QaRecord> records{{"q1", {"a", "b", "c"}, 2}, {"q\"2\" é", {"x", "y", "z"}, 0}};
  save_qa_jsonl(records, tmp / "qa.jsonl");
  const auto back = load_qa_jsonl(tmp / "qa.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[1].question == records[1].question);
  CHECK(back[0].label == 2);

  testing::spit(tmp / "range.jsonl", "{\"question\":\"q\",\"options\":[\"a\",\"b\"],\"label\":2}\n");
  CHECK_THROWS_AS(load_qa_jsonl(tmp / "range.jsonl"), DataError);
  testing::spit(tmp / "two.jsonl", "{\"question\":\"q\",\"options\":[\"a\",\"b\",\"c\"],\"label\":[0,1]}\n");
  CHECK(error_of([&] { load_qa_jsonl(tmp / "two.jsonl"); }).find("exactly one correct") != std::string::npos);
  testing::spit(tmp / "none.jsonl", "{\"question\":\"q\",\"options\":[\"a\",\"b\",\"c\"],\"label\":[]}\n");
  CHECK_THROWS_AS(load_qa_jsonl(tmp / "none.jsonl"), DataError);
  testing::spit(tmp / "bad.jsonl", "{\"question\":\"q\",\n");
  CHECK(error_of([&] { load_qa_jsonl(tmp / "bad.jsonl"); }).find(":1") != std::string::npos);
}

TEST_CASE("reduce_options keeps the answer, draws positions and distractors uniformly") {
  const QaRecord row{"q", {"A", "B", "C", "D", "E"}, 3};
  const int trials = 30000;
  std::map<int, int> positions;
  std::map<std::pair<std::string, std::string>, int> pairs;
  for (int t = 0; t < trials; ++t) {
    const QaRecord r = reduce_options(row, static_cast<std::uint64_t>(t));
    REQUIRE(r.options.size() == 3);
    REQUIRE(r.options[static_cast<std::size_t>(r.label)] == "D");
    positions[r.label]++;
    std::vector<std::string> d;
    for (int k = 0; k < 3; ++k) {
      if (k != r.label) d.push_back(r.options[static_cast<std::size_t>(k)]);
    }
    REQUIRE(d[0] != d[1]);
    for (const auto& s : d) REQUIRE((s == "A" || s == "B" || s == "C" || s == "E"));
    std::sort(d.begin(), d.end());
    pairs[{d[0], d[1]}]++;
  }
  REQUIRE(positions.size() == 3);
  for (const auto& [pos, count] : positions) CHECK(std::abs(count / double(trials) - 1.0 / 3.0) < 0.02);
  REQUIRE(pairs.size() == 6);
  for (const auto& [pair, count] : pairs) CHECK(std::abs(count / double(trials) - 1.0 / 6.0) < 0.02);
  CHECK(reduce_options(row, 5).options == reduce_options(row, 5).options);
}

TEST_CASE("reduce_options preconditions") {
  CHECK_THROWS_AS(reduce_options({"q", {"a", "b", "c"}, 0}, 1), DataError);
  CHECK_THROWS_AS(reduce_options({"q", {"a", "b", "c", "d", "e"}, -1}, 1), DataError);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bayeshead {

using Index = Eigen::Index;

/// Optional per-row provenance (question text and options for QA data).
struct RowMeta {
  std::string question;
  std::vector<std::string> options;
  std::string source_id;
};

/// Feature matrix (N x D), 0-based integer labels and class count.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int n_classes = 0;
  std::vector<RowMeta> meta;  // empty, or one entry per row

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  /// Throws DataError naming the first violated invariant.
  void validate() const;

  /// Rows in the given order; n_classes is preserved.
  Dataset subset(const std::vector<Index>& rows) const;
};

enum class DataFormat { csv, feature_binary };

/// `.bhft` maps to feature_binary, everything else to csv.
DataFormat format_for_path(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
Dataset load_dataset(const std::filesystem::path& path);

/// Header row `f0,...,f{D-1},label`; values written with round-trip precision.
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// `BHFT` container: magic, u16 version=1, u32 N, u32 D, u32 C, N*D f32 row-major,
/// N u32 labels. All little-endian.
void save_feature_binary(const Dataset& ds, const std::filesystem::path& path);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// Seeded shuffle then partition; train size is round(fraction * N).
Split split(const Dataset& ds, const SplitSpec& spec);

/// Per-feature affine map estimated on a training set.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_dev;

  Dataset apply(const Dataset& ds) const;
};

struct Standardized {
  Dataset train;
  Dataset test;
  Standardization stats;
};

/// Zero-mean, unit population-std columns on `train`; `test` uses the train
/// statistics. Zero-variance columns pass through with std recorded as 1.
Standardized standardize(const Dataset& train, const Dataset& test);

/// Raw multiple-choice question as stored in JSON-lines files.
struct QaRecord {
  std::string question;
  std::vector<std::string> options;
  int label = 0;
};

std::vector<QaRecord> load_qa_jsonl(const std::filesystem::path& path);
void save_qa_jsonl(const std::vector<QaRecord>& records, const std::filesystem::path& path);

/// Reduce a 5-option question to 3 options: two distractors sampled uniformly
/// without replacement, correct answer placed at a uniform position.
///
/// Draw order (so other implementations can reproduce it with the same Rng):
/// the four distractor indices in ascending order undergo two partial
/// Fisher-Yates steps (`j = i + uniform_index(4 - i)` for i = 0, 1), then the
/// correct position is `uniform_index(3)`; the remaining slots take the two
/// selected distractors in draw order.
QaRecord reduce_options(const QaRecord& row, std::uint64_t seed);

}  // namespace bayeshead

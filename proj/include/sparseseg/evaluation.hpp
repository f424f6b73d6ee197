#pragma once

#include "sparseseg/image_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sparseseg {

/// Pixel counts with foreground as the positive class. An empty
/// denominator yields 1 when the other mask has no foreground either, else 0.
struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
};

EvalReport precision_recall(const Mask& pred, const Mask& truth);

struct ImagePair {
  std::string name;
  std::filesystem::path pred;
  std::filesystem::path truth;
};

struct NamedReport {
  std::string name;
  EvalReport report;
};

/// `aggregate` sums tp/fp/fn and averages precision and recall per image.
struct DatasetReport {
  std::vector<NamedReport> images;
  EvalReport aggregate;
};

/// Unweighted per-image mean of precision and recall; counts are summed.
EvalReport aggregate_reports(const std::vector<NamedReport>& reports);

/// Throws std::runtime_error naming the offending pair if a file cannot be
/// read or the dimensions differ, and std::invalid_argument on an empty list.
DatasetReport evaluate_dataset(const std::vector<ImagePair>& pairs);

/// `name,tp,fp,fn,precision,recall` per image and a final `aggregate,...` line.
std::string format_csv(const DatasetReport& report);

std::string format_json(const DatasetReport& report);

}  // namespace sparseseg

#include "sparseseg/evaluation.hpp"

#include <json.hpp>

#include <cstdio>
#include <stdexcept>

namespace sparseseg {

namespace {

double ratio(std::size_t hits, std::size_t denominator, std::size_t other_positives) {
  if (denominator == 0) return other_positives == 0 ? 1.0 : 0.0;
  return static_cast<double>(hits) / static_cast<double>(denominator);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn},
          {"precision", r.precision}, {"recall", r.recall}};
}

}  // namespace

EvalReport precision_recall(const Mask& pred, const Mask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw std::invalid_argument("precision_recall: masks differ in size (" +
                                std::to_string(pred.width()) + "x" +
                                std::to_string(pred.height()) + " vs " +
                                std::to_string(truth.width()) + "x" +
                                std::to_string(truth.height()) + ")");
  }
  EvalReport r;
  const auto& p = pred.bits();
  const auto& t = truth.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] && t[i]) ++r.tp;
    else if (p[i]) ++r.fp;
    else if (t[i]) ++r.fn;
  }
  const std::size_t predicted = r.tp + r.fp;
  const std::size_t actual = r.tp + r.fn;
  r.precision = ratio(r.tp, predicted, actual);
  r.recall = ratio(r.tp, actual, predicted);
  return r;
}

EvalReport aggregate_reports(const std::vector<NamedReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_reports: no reports");
  EvalReport agg;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (const auto& [name, r] : reports) {
    agg.tp += r.tp;
    agg.fp += r.fp;
    agg.fn += r.fn;
    precision_sum += r.precision;
    recall_sum += r.recall;
  }
  const auto n = static_cast<double>(reports.size());
  agg.precision = precision_sum / n;
  agg.recall = recall_sum / n;
  return agg;
}

DatasetReport evaluate_dataset(const std::vector<ImagePair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_dataset: no image pairs");
  DatasetReport out;
  out.images.reserve(pairs.size());
  for (const auto& pair : pairs) {
    try {
      out.images.push_back({pair.name, precision_recall(load_mask(pair.pred), load_mask(pair.truth))});
    } catch (const std::exception& e) {
      throw std::runtime_error("pair '" + pair.name + "' (" + pair.pred.string() + ", " +
                               pair.truth.string() + "): " + e.what());
    }
  }
  out.aggregate = aggregate_reports(out.images);
  return out;
}

std::string format_csv(const DatasetReport& report) {
  std::string out;
  auto line = [&out](const std::string& name, const EvalReport& r) {
    out += name + "," + std::to_string(r.tp) + "," + std::to_string(r.fp) + "," +
           std::to_string(r.fn) + "," + fixed(r.precision) + "," + fixed(r.recall) + "\n";
  };
  for (const auto& [name, r] : report.images) line(name, r);
  line("aggregate", report.aggregate);
  return out;
}

std::string format_json(const DatasetReport& report) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& [name, r] : report.images) {
    nlohmann::json entry = to_json(r);
    entry["name"] = name;
    images.push_back(std::move(entry));
  }
  nlohmann::json doc = {{"images", std::move(images)},
                        {"aggregate", to_json(report.aggregate)},
                        {"aggregation", "per-image mean"}};
  return doc.dump(2) + "\n";
}

}  // namespace sparseseg

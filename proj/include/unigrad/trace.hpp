#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace unigrad {

/// One solver iteration. The first eight fields are what the trace CSV
/// persists; `component` and `model_min` live in memory only.
struct TraceRow {
  std::int64_t t = 0;
  int i_t = 0;
  double L_next = 0;
  double f_gt_xt = 0;
  double f_gt_xnext = 0;
  std::optional<double> f_gt_yt;
  std::optional<double> f_full;
  double elapsed_s = 0;

  std::int64_t component = -1;
  std::optional<double> model_min;

  bool operator==(const TraceRow&) const = default;
};

struct RunTrace {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<TraceRow> rows;

  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : metadata)
      if (k == key) {
        v = std::move(value);
        return;
      }
    metadata.emplace_back(key, std::move(value));
  }

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return &v;
    return nullptr;
  }
};

}  // namespace unigrad

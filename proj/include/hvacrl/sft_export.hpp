#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvacrl/historical_log.hpp"
#include "hvacrl/knn.hpp"

namespace hvacrl {

struct SftRecord {
  std::size_t row = 0;  // log row of the current state
  std::string input;
  std::string analysis;
  FeasibleSets sets;
};

/// y[j][l] = 1 exactly when level l is in zone j's set.
std::array<std::array<int, kFanLevels>, kZones> binary_labels(const FeasibleSets& sets);

/// True when rows i-4..i are consecutive control steps of one day.
std::vector<bool> eligible_rows(const HistoricalLog& log);

/// One record per eligible row; labels come from the kNN oracle fitted on the
/// same log. Throws DataError when the log has fewer than k + 5 rows.
std::vector<SftRecord> build_sft_records(const HistoricalLog& log, const KnnConfig& config);

/// {"input": ..., "target": {"analysis": ..., "recommendations": {...}}} on one line.
std::string sft_line(const SftRecord& record);

/// Writes one line per record and returns the record count.
std::size_t export_sft_dataset(const HistoricalLog& log, const KnnConfig& config, std::ostream& out);
std::size_t export_sft_dataset(const HistoricalLog& log, const KnnConfig& config,
                               const std::filesystem::path& out_path);

}  // namespace hvacrl

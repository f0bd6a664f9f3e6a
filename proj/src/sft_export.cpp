#include "hvacrl/sft_export.hpp"

#include <fstream>

#include "hvacrl/errors.hpp"
#include "hvacrl/prompt.hpp"

namespace hvacrl {

std::array<std::array<int, kFanLevels>, kZones> binary_labels(const FeasibleSets& sets) {
  std::array<std::array<int, kFanLevels>, kZones> y{};
  for (int j = 0; j < kZones; ++j) {
    for (int l = 0; l < kFanLevels; ++l) {
      y[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] = sets.contains(j, l) ? 1 : 0;
    }
  }
  return y;
}

std::vector<bool> eligible_rows(const HistoricalLog& log) {
  std::vector<bool> ok(log.rows.size(), false);
  int run = 0;  // consecutive 5-minute steps ending at row i
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const bool continues = i > 0 && log.rows[i].minute - log.rows[i - 1].minute == 5 &&
                           log.rows[i].minute / 1440 == log.rows[i - 1].minute / 1440;
    run = continues ? run + 1 : 0;
    ok[i] = run >= kPromptWindow - 1;
  }
  return ok;
}

std::vector<SftRecord> build_sft_records(const HistoricalLog& log, const KnnConfig& config) {
  config.validate();
  const std::size_t need = static_cast<std::size_t>(config.k) + kPromptWindow;
  if (log.rows.size() < need) {
    throw DataError("SFT export needs at least " + std::to_string(need) + " log rows, got " +
                        std::to_string(log.rows.size()),
                    log.rows.size(), "");
  }
  const auto demos = to_demonstrations(log);
  const KnnDataset data = KnnDataset::from_demonstrations(demos);
  const auto ok = eligible_rows(log);
  std::vector<SftRecord> records;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (!ok[i]) continue;
    std::array<BuildingState, kPromptWindow> window;
    for (std::size_t k = 0; k < window.size(); ++k) window[k] = demos[i + 1 - window.size() + k].state;
    SftRecord rec;
    rec.row = i;
    rec.sets = knn_feasible_sets(data, data.features()[i], config);
    rec.input = serialize_prompt(window);
    rec.analysis = analysis_text(window, rec.sets);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string sft_line(const SftRecord& record) {
  nlohmann::json doc;
  doc["input"] = record.input;
  doc["target"] = {{"analysis", record.analysis}, {"recommendations", recommendations_json(record.sets)}};
  return doc.dump();
}

std::size_t export_sft_dataset(const HistoricalLog& log, const KnnConfig& config, std::ostream& out) {
  const auto records = build_sft_records(log, config);
  for (const auto& r : records) out << sft_line(r) << '\n';
  if (!out) throw ConfigError("SFT export: write failed");
  return records.size();
}

std::size_t export_sft_dataset(const HistoricalLog& log, const KnnConfig& config,
                               const std::filesystem::path& out_path) {
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write SFT export '" + out_path.string() + "'");
  return export_sft_dataset(log, config, out);
}

}  // namespace hvacrl

// JSON forms of the run artifacts (selection report, detector config, score
// set, evaluation) and small file helpers. Output is deterministic: fixed key
// order, shortest round-trip doubles, two-space indentation, trailing newline.
#pragma once

#include <filesystem>
#include <string>

#include "blocknorm/metrics.hpp"
#include "blocknorm/scoring.hpp"
#include "blocknorm/selection.hpp"

namespace blocknorm {

// include_norms adds the per-sample ID / pseudo-OOD norm matrices.
std::string to_json(const SelectionReport& report, bool include_norms = false);
SelectionReport selection_report_from_json(const std::string& text);

std::string to_json(const DetectorConfig& config);
DetectorConfig detector_config_from_json(const std::string& text);

std::string to_json(const ScoreSet& scores);
ScoreSet score_set_from_json(const std::string& text);

std::string to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);

// One row per OOD set plus an "average" row.
std::string to_csv(const EvalReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace blocknorm

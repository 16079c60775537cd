#pragma once

#include <string>

#include "iostack/analysis.hpp"
#include "iostack/replay.hpp"

namespace iostack {

/// Machine-readable reports (JSON) and plot-ready point files (CSV).

std::string run_result_json(const RunResult& result);
std::string comparison_json(const ComparisonReport& report);

std::string cdf_csv(const SizeCdf& cdf);
std::string heatmap_csv(const Heatmap& hm);
std::string chains_csv(const ChainStats& chains);
std::string breakdown_csv(const ComparisonReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace iostack

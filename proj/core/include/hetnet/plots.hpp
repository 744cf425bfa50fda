#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hetnet/harness.hpp"

namespace hetnet {

enum class PlotMetric { kSumRate, kBer };

/// Standalone SVG line chart of one metric against effective SNR for every
/// algorithm of one channel model. BER uses a log10 axis and skips
/// non-positive points.
std::string render_svg(const ResultTable& table, const std::string& channel_model,
                       PlotMetric metric);

/// Writes a sum-rate and a BER figure per channel model plus the aggregated
/// CSV as <stem>_<hash>_<timestamp>.{svg,csv}. Throws PreconditionViolation
/// for an empty table and IoError when the directory is unwritable.
std::vector<std::filesystem::path> emit_plots(const ResultTable& table,
                                              const std::filesystem::path& output_dir,
                                              const std::string& config_hash,
                                              const std::string& timestamp);

/// UTC time as YYYYMMDDTHHMMSSZ.
std::string utc_timestamp();

}  // namespace hetnet

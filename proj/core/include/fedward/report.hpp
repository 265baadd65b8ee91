#pragma once

#include <string>
#include <vector>

#include "fedward/experiment.hpp"

namespace fedward {

/// One compact JSON object per round, fixed key order.
std::string round_to_json_line(const RoundReport& report);
RoundReport round_from_json_line(const std::string& line);

/// Pretty summary document (excludes the per-round series, which lives in
/// rounds.jsonl next to it).
std::string summary_to_json(const RunSummary& summary);

/// CSV with exactly the columns pdr,nir,defense,aasr,aer,ma_final,ma_avg.
/// Failed runs leave the metric cells empty.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Per-round CSV rendering of a stored run (the `report` subcommand).
std::string rounds_to_csv(const std::vector<RoundReport>& rounds);

/// Writes rounds.jsonl and summary.json into `dir` (created if missing).
void write_run_outputs(const std::string& dir, const RunSummary& summary);

std::vector<RoundReport> read_rounds_jsonl(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace fedward

#pragma once

#include <filesystem>
#include <string>

#include "sns/episode.hpp"

namespace sns {

/// `t,x,y,z,theta,obj_x,obj_y,obj_z,force,subtask`, one row per step.
std::string trace_csv(const EpisodeTrace& trace);
/// One JSON object per step with every recorded field.
std::string trace_jsonl(const EpisodeTrace& trace);

/// Rebuilds the steps from CSV. Only the CSV columns are filled in.
EpisodeTrace trace_from_csv(const std::string& text);
/// Rebuilds the steps exactly from JSONL. The summary is recomputed from
/// the steps except for `success`, which needs the episode's tolerances.
EpisodeTrace trace_from_jsonl(const std::string& text);

std::string summary_json(const EpisodeSummary& summary);

/// Writes both files; IoError names the failing path.
void export_trace(const EpisodeTrace& trace, const std::filesystem::path& csv_path,
                  const std::filesystem::path& jsonl_path);

}  // namespace sns

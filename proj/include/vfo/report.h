#ifndef VFO_REPORT_H_
#define VFO_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "vfo/eval.h"

namespace vfo {

// Rows with this algo name hold the episodes of a background dataset.
inline constexpr const char* kBackgroundAlgo = "background";

// Header: env,algo,level_tag,seed,episode,return,success.
std::string results_csv(const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> parse_results_csv(const std::string& text);
void write_results(const std::filesystem::path& path, const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> read_results(const std::filesystem::path& path);

// Episode rows of a dataset, one per trajectory (seed 0).
std::vector<EpisodeRow> dataset_rows(const Dataset& dataset, const Env& env,
                                     const std::string& level_tag);

struct SeriesPoint {
  std::string level_tag;
  double x = 0.0;
  double y = 0.0;
  double error = 0.0;  // std over seeds
};

struct Series {
  std::string env;
  std::string algo;
  std::vector<SeriesPoint> points;  // sorted by x
};

// Mean return per (env, algo, level) against background return; levels
// without background rows are placed at their ordinal position.
std::vector<Series> absolute_series(const std::vector<EpisodeRow>& rows);
// Policy minus background mean return; only levels with background rows.
std::vector<Series> improvement_series(const std::vector<EpisodeRow>& rows);

std::string render_svg(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

struct ReportOutcome {
  bool ok = true;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

// results.csv, absolute.svg and improvement.svg. Empty results give a
// header-only CSV, no plots and ok = false.
ReportOutcome emit_report(const std::vector<EpisodeRow>& rows, const std::filesystem::path& dir);

}  // namespace vfo

#endif  // VFO_REPORT_H_

#include "vfo/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "vfo/checkpoint.h"

namespace vfo {

namespace {

constexpr const char* kHeader = "env,algo,level_tag,seed,episode,return,success";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void check_field(const std::string& value) {
  if (value.find_first_of(",\n\r") != std::string::npos) {
    throw std::invalid_argument("CSV field contains a separator: " + value);
  }
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

using GroupKey = std::tuple<std::string, std::string, std::string>;  // env, algo, level

std::map<GroupKey, std::vector<EpisodeRow>> group_rows(const std::vector<EpisodeRow>& rows) {
  std::map<GroupKey, std::vector<EpisodeRow>> groups;
  for (const auto& r : rows) groups[{r.env, r.algo, r.level_tag}].push_back(r);
  return groups;
}

// (env, level) -> background mean return.
std::map<std::pair<std::string, std::string>, double> background_means(
    const std::map<GroupKey, std::vector<EpisodeRow>>& groups) {
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [key, rows] : groups) {
    const auto& [env, algo, level] = key;
    if (algo != kBackgroundAlgo) continue;
    double sum = 0.0;
    for (const auto& r : rows) sum += r.ret;
    out[{env, level}] = sum / static_cast<double>(rows.size());
  }
  return out;
}

std::vector<Series> build_series(const std::vector<EpisodeRow>& rows, bool difference) {
  const auto groups = group_rows(rows);
  const auto bg = background_means(groups);
  std::map<std::string, std::vector<std::string>> levels_by_env;
  for (const auto& [key, _] : groups) levels_by_env[std::get<0>(key)].push_back(std::get<2>(key));
  for (auto& [env, levels] : levels_by_env) {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  }

  std::map<std::pair<std::string, std::string>, Series> series;
  for (const auto& [key, group] : groups) {
    const auto& [env, algo, level] = key;
    if (algo == kBackgroundAlgo) continue;
    const auto bg_it = bg.find({env, level});
    if (difference && bg_it == bg.end()) continue;
    double x = 0.0;
    if (bg_it != bg.end()) {
      x = bg_it->second;
    } else {
      const auto& lv = levels_by_env[env];
      x = static_cast<double>(std::find(lv.begin(), lv.end(), level) - lv.begin());
    }
    const EvalResult res = summarize(group);
    SeriesPoint p{level, x, res.mean_return, res.std_return};
    if (difference) p.y -= bg_it->second;
    auto& s = series[{env, algo}];
    s.env = env;
    s.algo = algo;
    s.points.push_back(p);
  }
  std::vector<Series> out;
  for (auto& [_, s] : series) {
    std::sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) {
      return a.x != b.x ? a.x < b.x : a.level_tag < b.level_tag;
    });
    out.push_back(std::move(s));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string results_csv(const std::vector<EpisodeRow>& rows) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : rows) {
    check_field(r.env);
    check_field(r.algo);
    check_field(r.level_tag);
    out += r.env + "," + r.algo + "," + r.level_tag + "," + std::to_string(r.seed) + "," +
           std::to_string(r.episode) + "," + format_double(r.ret) + "," +
           (r.success ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<EpisodeRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw std::invalid_argument("results CSV has an unexpected header");
  }
  std::vector<EpisodeRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) {
      throw std::invalid_argument("results CSV line " + std::to_string(lineno) +
                                  " has " + std::to_string(f.size()) + " fields");
    }
    EpisodeRow r;
    r.env = f[0];
    r.algo = f[1];
    r.level_tag = f[2];
    try {
      r.seed = std::stoll(f[3]);
      r.episode = std::stoll(f[4]);
      r.ret = std::stod(f[5]);
    } catch (const std::exception&) {
      throw std::invalid_argument("results CSV line " + std::to_string(lineno) +
                                  " has a malformed number");
    }
    if (f[6] != "0" && f[6] != "1") {
      throw std::invalid_argument("results CSV line " + std::to_string(lineno) +
                                  ": success must be 0 or 1");
    }
    r.success = f[6] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_results(const std::filesystem::path& path, const std::vector<EpisodeRow>& rows) {
  write_text(path, results_csv(rows));
}

std::vector<EpisodeRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str());
}

std::vector<EpisodeRow> dataset_rows(const Dataset& dataset, const Env& env,
                                     const std::string& level_tag) {
  std::vector<EpisodeRow> rows;
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    const auto& t = dataset.trajectories[i];
    rows.push_back({env.name(), kBackgroundAlgo, level_tag, 0, static_cast<long long>(i),
                    t.total_return(), trajectory_success(env, t)});
  }
  return rows;
}

std::vector<Series> absolute_series(const std::vector<EpisodeRow>& rows) {
  return build_series(rows, false);
}

std::vector<Series> improvement_series(const std::vector<EpisodeRow>& rows) {
  return build_series(rows, true);
}

std::string render_svg(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double width = 640, height = 420;
  const double left = 70, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (first) {
        xmin = xmax = p.x;
        ymin = p.y - p.error;
        ymax = p.y + p.error;
        first = false;
      }
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y - p.error);
      ymax = std::max(ymax, p.y + p.error);
    }
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0)
      << "\" height=\"" << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"14\">" << escape_xml(title) << "</text>\n";
  svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
      << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << fixed(top + ph + 16)
        << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    svg << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << fixed(yv) << "</text>\n";
  }
  if (ymin < 0 && ymax > 0) {
    svg << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(sy(0)) << "\" x2=\""
        << fixed(left + pw) << "\" y2=\"" << fixed(sy(0))
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 16)
      << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << fixed(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      if (j > 0) svg << " ";
      svg << fixed(sx(s.points[j].x)) << "," << fixed(sy(s.points[j].y));
    }
    svg << "\"/>\n";
    for (const auto& p : s.points) {
      svg << "<line x1=\"" << fixed(sx(p.x)) << "\" y1=\"" << fixed(sy(p.y - p.error))
          << "\" x2=\"" << fixed(sx(p.x)) << "\" y2=\"" << fixed(sy(p.y + p.error))
          << "\" stroke=\"" << color << "\"/>\n";
      svg << "<circle cx=\"" << fixed(sx(p.x)) << "\" cy=\"" << fixed(sy(p.y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 14 + 18 * static_cast<double>(i);
    svg << "<line x1=\"" << fixed(left + pw + 12) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\""
        << fixed(left + pw + 32) << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed(left + pw + 38) << "\" y=\"" << fixed(ly) << "\">"
        << escape_xml(s.env + "/" + s.algo) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

ReportOutcome emit_report(const std::vector<EpisodeRow>& rows, const std::filesystem::path& dir) {
  ReportOutcome outcome;
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / "results.csv";
  write_results(csv_path, rows);
  outcome.files.push_back(csv_path);
  if (rows.empty()) {
    outcome.ok = false;
    outcome.warnings.push_back("no results: wrote a header-only results.csv and no plots");
    return outcome;
  }
  const auto abs = absolute_series(rows);
  const auto abs_path = dir / "absolute.svg";
  write_text(abs_path, render_svg(abs, "Absolute return", "background return", "policy return"));
  outcome.files.push_back(abs_path);

  const auto imp = improvement_series(rows);
  if (imp.empty()) {
    outcome.warnings.push_back("no background rows: improvement.svg not written");
  } else {
    const auto imp_path = dir / "improvement.svg";
    write_text(imp_path, render_svg(imp, "Improvement over background", "background return",
                                    "policy - background return"));
    outcome.files.push_back(imp_path);
  }
  return outcome;
}

}  // namespace vfo

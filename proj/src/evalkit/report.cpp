#include "holo/evalkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "holo/errors.hpp"

namespace holo {

void MetricReport::set(const std::string& task, const std::string& modality, double score, std::size_t count) {
  if (std::find(tasks.begin(), tasks.end(), task) == tasks.end()) tasks.push_back(task);
  if (std::find(modalities.begin(), modalities.end(), modality) == modalities.end()) modalities.push_back(modality);
  scores[task][modality] = score;
  counts[task][modality] = count;
}

double MetricReport::at(const std::string& task, const std::string& modality) const {
  auto t = scores.find(task);
  if (t == scores.end()) throw MetricError("no scores for task " + task);
  auto m = t->second.find(modality);
  if (m == t->second.end()) throw MetricError("no " + task + " score for " + modality);
  return m->second;
}

double MetricReport::average(const std::string& task) const {
  auto t = scores.find(task);
  if (t == scores.end() || t->second.empty()) throw MetricError("no scores for task " + task);
  double sum = 0;
  std::size_t n = 0;
  for (const auto& m : modalities) {
    auto it = t->second.find(m);
    if (it == t->second.end()) continue;
    sum += it->second;
    ++n;
  }
  return sum / double(n);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["setting"] = setting;
  j["config_hash"] = config_hash;
  j["modalities"] = modalities;
  j["tasks"] = nlohmann::json::array();
  for (const auto& task : tasks) {
    nlohmann::json row;
    row["task"] = task;
    for (const auto& m : modalities) {
      auto it = scores.at(task).find(m);
      if (it == scores.at(task).end()) continue;
      row["scores"][m] = it->second;
      row["counts"][m] = counts.at(task).at(m);
    }
    row["avg"] = average(task);
    j["tasks"].push_back(row);
  }
  j["diagnostics"] = diagnostics;
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  r.setting = j.at("setting").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.modalities = j.at("modalities").get<std::vector<std::string>>();
  for (const auto& row : j.at("tasks")) {
    const auto task = row.at("task").get<std::string>();
    r.tasks.push_back(task);
    for (const auto& [m, v] : row.at("scores").items()) {
      r.scores[task][m] = v.get<double>();
      r.counts[task][m] = row.at("counts").at(m).get<std::size_t>();
    }
  }
  r.diagnostics = j.value("diagnostics", std::map<std::string, double>{});
  return r;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os << "task";
  for (const auto& m : modalities) os << ',' << m;
  os << ",Avg\n";
  for (const auto& task : tasks) {
    os << task;
    for (const auto& m : modalities) {
      auto it = scores.at(task).find(m);
      os << ',' << (it == scores.at(task).end() ? std::string() : format_score(it->second));
    }
    os << ',' << format_score(average(task)) << '\n';
  }
  return os.str();
}

void MetricReport::write(const std::filesystem::path& dir, const std::string& stem) const {
  std::filesystem::create_directories(dir);
  std::ofstream js(dir / (stem + ".json"));
  std::ofstream csv(dir / (stem + ".csv"));
  if (!js || !csv) throw IoError("cannot write report under " + dir.string());
  js << to_json().dump(2) << '\n';
  csv << to_csv();
}

}  // namespace holo

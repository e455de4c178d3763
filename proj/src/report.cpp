#include "fmad/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "fmad/error.hpp"

namespace fmad {

using nlohmann::json;

namespace {

std::string percent_key(double target) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", target);
  return buf;
}

json threshold_json(double t) {
  if (std::isfinite(t)) return t;
  return t > 0 ? "inf" : "-inf";
}

json metrics_json(const MetricsReport& m) {
  json bpcer = json::object();
  for (const auto& [target, value] : m.bpcer_at_apcer) bpcer[percent_key(target)] = value;
  json det = json::array();
  for (const DetPoint& p : m.det_points) det.push_back({{"apcer", p.apcer}, {"bpcer", p.bpcer}});
  return {{"eer", m.eer},
          {"eer_threshold", threshold_json(m.eer_threshold)},
          {"bpcer_at_apcer", bpcer},
          {"det", det},
          {"bonafide_count", m.bonafide_count},
          {"attack_count", m.attack_count},
          {"attack_counts", m.attack_counts}};
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

EvaluationReport evaluate_scores(std::span<const ScoredSample> samples,
                                 std::span<const std::string> expected_attacks) {
  EvaluationReport report;
  std::vector<ScoredSample> bonafide;
  std::map<std::string, std::vector<ScoredSample>> by_attack;
  for (const ScoredSample& s : samples) {
    if (s.label == 1) {
      bonafide.push_back(s);
    } else {
      by_attack[s.attack_type.empty() ? "unknown" : s.attack_type].push_back(s);
    }
  }
  if (bonafide.empty() || by_attack.empty()) {
    throw SingleClassError("evaluation needs bona fide and morph samples");
  }
  for (const std::string& name : expected_attacks) {
    if (!by_attack.count(name)) report.warnings.push_back("attack '" + name + "' has no samples; skipped");
  }
  for (const auto& [name, morphs] : by_attack) {
    std::vector<ScoredSample> subset = bonafide;
    subset.insert(subset.end(), morphs.begin(), morphs.end());
    report.attacks[name] = compute_metrics(subset);
  }
  report.overall = compute_metrics(samples);
  for (const auto& [name, m] : report.attacks) {
    report.average_eer += m.eer;
    for (const auto& [target, value] : m.bpcer_at_apcer) report.average_bpcer_at_apcer[target] += value;
  }
  const double n = static_cast<double>(report.attacks.size());
  report.average_eer /= n;
  for (auto& [target, value] : report.average_bpcer_at_apcer) value /= n;
  return report;
}

json report_to_json(const EvaluationReport& report) {
  json attacks = json::object();
  for (const auto& [name, m] : report.attacks) attacks[name] = metrics_json(m);
  json avg_bpcer = json::object();
  for (const auto& [target, value] : report.average_bpcer_at_apcer) {
    avg_bpcer[percent_key(target)] = value;
  }
  return {{"units", "percent"},
          {"attacks", attacks},
          {"overall", metrics_json(report.overall)},
          {"average", {{"eer", report.average_eer}, {"bpcer_at_apcer", avg_bpcer}}},
          {"warnings", report.warnings}};
}

std::string report_table(const EvaluationReport& report, const std::string& method_name) {
  std::set<double> targets;
  for (const auto& [name, m] : report.attacks) {
    for (const auto& [t, v] : m.bpcer_at_apcer) targets.insert(t);
  }
  std::vector<std::string> sub = {"EER"};
  for (double t : targets) sub.push_back("BPCER@" + percent_key(t) + "%");
  std::size_t cell = 6;
  for (const auto& s : sub) cell = std::max(cell, s.size() + 1);
  const std::size_t group = cell * sub.size();
  const std::size_t first = std::max<std::size_t>(8, std::max(method_name.size(), std::size_t{6}) + 2);

  auto group_cells = [&](const MetricsReport* m, double eer,
                         const std::map<double, double>& bpcer) {
    std::string out = pad(fixed2(m ? m->eer : eer), cell);
    for (double t : targets) {
      const auto& map = m ? m->bpcer_at_apcer : bpcer;
      const auto it = map.find(t);
      out += pad(it == map.end() ? "-" : fixed2(it->second), cell);
    }
    return out;
  };

  std::ostringstream os;
  std::string head = pad("Method", first);
  std::string subhead = pad("", first);
  std::string row = pad(method_name, first);
  for (const auto& [name, m] : report.attacks) {
    head += "| " + pad(name, group);
    subhead += "| ";
    for (const auto& s : sub) subhead += pad(s, cell);
    row += "| " + group_cells(&m, 0.0, {});
  }
  head += "| " + pad("Avg.", group);
  subhead += "| ";
  for (const auto& s : sub) subhead += pad(s, cell);
  row += "| " + group_cells(nullptr, report.average_eer, report.average_bpcer_at_apcer);
  auto rstrip = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  os << rstrip(head) << '\n' << rstrip(subhead) << '\n' << rstrip(row) << '\n';
  return os.str();
}

}  // namespace fmad

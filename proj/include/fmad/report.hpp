#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmad/evaluation.hpp"

namespace fmad {

// Per-attack metrics, each attack scored against the shared bona fide pool.
struct EvaluationReport {
  std::map<std::string, MetricsReport> attacks;
  MetricsReport overall;  // all attacks pooled
  double average_eer = 0.0;
  std::map<double, double> average_bpcer_at_apcer;  // unweighted mean over attacks
  std::vector<std::string> warnings;
};

// Groups morph samples by attack_type. Attacks listed in expected_attacks but
// absent from the samples are skipped with a warning.
EvaluationReport evaluate_scores(std::span<const ScoredSample> samples,
                                 std::span<const std::string> expected_attacks = {});

nlohmann::json report_to_json(const EvaluationReport& report);

// Attack column groups (EER, BPCER@APCER 1%, 20%) followed by "Avg.", values in
// percent with two decimals, one row per method.
std::string report_table(const EvaluationReport& report, const std::string& method_name = "Ours");

}  // namespace fmad

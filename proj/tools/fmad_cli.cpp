#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fmad/bundle.hpp"
#include "fmad/config.hpp"
#include "fmad/detector.hpp"
#include "fmad/error.hpp"
#include "fmad/image_io.hpp"
#include "fmad/manifest.hpp"
#include "fmad/mrf.hpp"
#include "fmad/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fmad::IoError("cannot write '" + path.string() + "'");
  out << text;
}

fmad::SyntheticSetSpec synth_spec_from_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw fmad::IoError("cannot open synth spec '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw fmad::FormatError(std::string("synth spec is not valid JSON: ") + e.what());
  }
  fmad::SyntheticSetSpec s;
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    const json& v = item.value();
    if (k == "pairs") s.pairs = v.get<std::size_t>();
    else if (k == "size") s.size = v.get<std::size_t>();
    else if (k == "alpha_min") s.alpha_min = v.get<double>();
    else if (k == "alpha_max") s.alpha_max = v.get<double>();
    else if (k == "band_low") s.perturbation.band_low = v.get<double>();
    else if (k == "band_high") s.perturbation.band_high = v.get<double>();
    else if (k == "amplitude") s.perturbation.amplitude = v.get<double>();
    else if (k == "attack_type") s.attack_type = v.get<std::string>();
    else if (k == "seed") s.seed = v.get<std::uint64_t>();
    else throw fmad::FormatError("unknown synth spec key '" + k + "'");
  }
  return s;
}

void write_synthetic_set(const fmad::SyntheticSetSpec& spec, const fs::path& out_dir,
                         const std::string& format, std::size_t threads) {
  fs::create_directories(out_dir / "images");
  const std::vector<fmad::SampleRecord> records = fmad::synthetic_records(spec);
  const std::string ext = format == "png" ? ".png" : ".pfm";
  fmad::Manifest manifest;
  for (const auto& rec : records) {
    manifest.records.push_back({out_dir / "images" / (rec.id + ext), rec.label, rec.attack_type, {}});
  }

  const std::size_t workers =
      std::max<std::size_t>(1, threads ? threads : std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        const fmad::Image image = records[i].load().image;
        if (format == "png") {
          fmad::write_png16(manifest.records[i].image_path, image);
        } else {
          fmad::write_pfm(manifest.records[i].image_path, image);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = records.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  fmad::write_manifest(out_dir / "manifest.csv", manifest);
}

std::vector<fmad::SampleRecord> manifest_records(const fs::path& path) {
  return fmad::records_from_manifest(fmad::read_manifest(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier residual morphing attack detector"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a detector bundle from a manifest");
  std::string train_manifest, train_config, train_out;
  train->add_option("--manifest", train_manifest, "Training manifest CSV")->required();
  train->add_option("--config", train_config, "Configuration JSON (all keys optional)");
  train->add_option("--out", train_out, "Output bundle path")->required();

  auto* score = app.add_subcommand("score", "Score one image");
  std::string score_bundle, score_image, score_landmarks;
  std::optional<double> score_lambda;
  score->add_option("--bundle", score_bundle)->required();
  score->add_option("--image", score_image)->required();
  score->add_option("--landmarks", score_landmarks, "106-point landmark file");
  score->add_option("--lambda", score_lambda, "Fusion weight override")->check(CLI::Range(0.0, 1.0));

  auto* evaluate = app.add_subcommand("evaluate", "Score a manifest and report metrics");
  std::string eval_bundle, eval_manifest, eval_json, eval_table, eval_method = "Ours";
  std::vector<std::string> eval_attacks;
  evaluate->add_option("--bundle", eval_bundle)->required();
  evaluate->add_option("--manifest", eval_manifest)->required();
  evaluate->add_option("--report-json", eval_json, "Write the JSON report here");
  evaluate->add_option("--report-table", eval_table, "Write the text table here");
  evaluate->add_option("--attacks", eval_attacks, "Expected attack types (warn when absent)")
      ->delimiter(',');
  evaluate->add_option("--method-name", eval_method, "Row label in the table");

  auto* tune = app.add_subcommand("tune", "Grid-search beta and lambda on a validation manifest");
  std::string tune_bundle, tune_manifest, tune_out;
  std::vector<double> beta_grid = {0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 2.0};
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  tune->add_option("--bundle", tune_bundle)->required();
  tune->add_option("--manifest", tune_manifest)->required();
  tune->add_option("--beta-grid", beta_grid)->delimiter(',')->capture_default_str();
  tune->add_option("--lambda-grid", lambda_grid)->delimiter(',')->capture_default_str();
  tune->add_option("--out", tune_out, "Output bundle (default: overwrite --bundle)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic power-law dataset and manifest");
  std::string synth_spec_path, synth_out, synth_format = "pfm";
  fmad::SyntheticSetSpec synth_spec;
  std::size_t synth_threads = 0;
  synth->add_option("--spec", synth_spec_path, "JSON spec; flags below are ignored when given");
  synth->add_option("--out-dir", synth_out)->required();
  synth->add_option("--format", synth_format)->check(CLI::IsMember({"pfm", "png"}))->capture_default_str();
  synth->add_option("--pairs", synth_spec.pairs)->capture_default_str();
  synth->add_option("--size", synth_spec.size)->capture_default_str();
  synth->add_option("--alpha-min", synth_spec.alpha_min)->capture_default_str();
  synth->add_option("--alpha-max", synth_spec.alpha_max)->capture_default_str();
  synth->add_option("--band-low", synth_spec.perturbation.band_low)->capture_default_str();
  synth->add_option("--band-high", synth_spec.perturbation.band_high)->capture_default_str();
  synth->add_option("--amplitude", synth_spec.perturbation.amplitude)->capture_default_str();
  synth->add_option("--attack-type", synth_spec.attack_type)->capture_default_str();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--threads", synth_threads, "0 = all cores");

  auto* bench = app.add_subcommand("bench-mrf", "Time exact MRF inference against region count");
  std::size_t bench_min = 2, bench_max = 20;
  double bench_beta = fmad::kDefaultBeta, bench_seconds = 0.05;
  bench->add_option("--min-r", bench_min)->capture_default_str();
  bench->add_option("--max-r", bench_max)->capture_default_str();
  bench->add_option("--beta", bench_beta)->capture_default_str();
  bench->add_option("--min-seconds", bench_seconds, "Minimum time per R")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const fmad::DetectorConfig config =
          train_config.empty() ? fmad::DetectorConfig{} : fmad::load_config(train_config);
      const auto records = manifest_records(train_manifest);
      fmad::save_bundle(train_out, fmad::train(records, config));
    } else if (*score) {
      const fmad::DetectorBundle bundle = fmad::load_bundle(score_bundle);
      const fmad::Image image = fmad::read_image(score_image);
      std::optional<fmad::LandmarkSet> landmarks;
      if (!score_landmarks.empty()) landmarks = fmad::read_landmarks(score_landmarks);
      const fmad::ScoreResult r =
          fmad::score_image(bundle, image, landmarks ? &*landmarks : nullptr, score_lambda);
      json regions = json::object();
      for (std::size_t i = 0; i < fmad::kRegionCount; ++i) {
        regions[std::string(fmad::region_name(fmad::kAllRegions[i]))] = r.region_probabilities[i];
      }
      const json out = {{"s_global", r.s_global},
                        {"s_local", r.s_local},
                        {"s_fused", r.s_fused},
                        {"region_probabilities", regions}};
      std::cout << out.dump(2) << '\n';
    } else if (*evaluate) {
      const fmad::DetectorBundle bundle = fmad::load_bundle(eval_bundle);
      const auto records = manifest_records(eval_manifest);
      const auto streams = fmad::score_streams(bundle, records);
      const auto samples = fmad::fused_samples(streams, bundle.mrf.beta, bundle.fusion.lambda,
                                               bundle.config.prob_epsilon);
      const fmad::EvaluationReport report = fmad::evaluate_scores(samples, eval_attacks);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      const std::string table = fmad::report_table(report, eval_method);
      if (!eval_json.empty()) write_text(eval_json, fmad::report_to_json(report).dump(2) + "\n");
      if (!eval_table.empty()) write_text(eval_table, table);
      std::cout << table;
    } else if (*tune) {
      const fmad::DetectorBundle bundle = fmad::load_bundle(tune_bundle);
      const auto records = manifest_records(tune_manifest);
      const fmad::DetectorBundle tuned = fmad::tune(bundle, records, beta_grid, lambda_grid);
      fmad::save_bundle(tune_out.empty() ? tune_bundle : tune_out, tuned);
      const json& t = tuned.metadata.at("tuning");
      std::cout << "beta=" << t.at("beta").get<double>() << " lambda=" << t.at("lambda").get<double>()
                << " validation_eer=" << 100.0 * t.at("validation_eer").get<double>() << "%\n";
    } else if (*synth) {
      const fmad::SyntheticSetSpec spec =
          synth_spec_path.empty() ? synth_spec : synth_spec_from_json(synth_spec_path);
      write_synthetic_set(spec, synth_out, synth_format, synth_threads);
    } else if (*bench) {
      const auto rows = fmad::inference_benchmark(bench_min, bench_max, bench_beta, bench_seconds);
      std::cout << fmad::benchmark_csv(rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "fmad/config.hpp"
#include "fmad/error.hpp"
#include "fmad/image_io.hpp"
#include "fmad/manifest.hpp"
#include "oracles.hpp"

using namespace fmad;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fmad_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("manifest round trip") {
  TempDir dir;
  fs::create_directories(dir.path / "img");
  write_file(dir.path / "img" / "a.png", "x");
  write_file(dir.path / "img" / "b, c.png", "x");
  write_file(dir.path / "img" / "a.txt", "x");
  Manifest m;
  m.records.push_back({dir.path / "img" / "a.png", 1, "", dir.path / "img" / "a.txt"});
  m.records.push_back({dir.path / "img" / "b, c.png", 0, "style \"gan\"", {}});
  write_manifest(dir.path / "m.csv", m);
  const Manifest back = read_manifest(dir.path / "m.csv");
  REQUIRE(back.records.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(fs::equivalent(back.records[i].image_path, m.records[i].image_path));
    CHECK(back.records[i].label == m.records[i].label);
    CHECK(back.records[i].attack_type == m.records[i].attack_type);
  }
  CHECK(back.records[1].landmark_path.empty());
  CHECK(fs::equivalent(back.records[0].landmark_path, m.records[0].landmark_path));
}

TEST_CASE("manifest parsing errors and tolerances") {
  TempDir dir;
  write_file(dir.path / "a.png", "x");
  write_file(dir.path / "ok.csv",
             "\xEF\xBB\xBFpath,label,attack_type,landmarks\r\na.png, BonaFide ,,\r\n\r\na.png,morph,x,\r\n");
  const Manifest ok = read_manifest(dir.path / "ok.csv");
  REQUIRE(ok.records.size() == 2);
  CHECK(ok.records[0].label == 1);
  CHECK(ok.records[1].attack_type == "x");

  write_file(dir.path / "label.csv", "path,label,attack_type,landmarks\na.png,fake,,\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "label.csv"), FormatError);
  write_file(dir.path / "header.csv", "file,label\na.png,morph\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "header.csv"), FormatError);
  write_file(dir.path / "missing.csv", "path,label,attack_type,landmarks\nnope.png,morph,,\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "missing.csv"), IoError);
  CHECK(read_manifest(dir.path / "missing.csv", false).records.size() == 1);
  CHECK_THROWS_AS(read_manifest(dir.path / "absent.csv"), IoError);
}

TEST_CASE("landmark files") {
  std::string text;
  for (int i = 0; i < 106; ++i) {
    text += std::to_string(i) + (i % 2 ? ", " : " ") + std::to_string(2 * i + 0.5) + "\n";
  }
  const LandmarkSet set = parse_landmarks(text);
  REQUIRE(set.points.size() == 106);
  CHECK(set.points[7].x == 7.0);
  CHECK(set.points[7].y == 14.5);
  CHECK_THROWS_AS(parse_landmarks("1 2 3"), FormatError);
  CHECK_THROWS_AS(parse_landmarks(text + " abc"), FormatError);

  TempDir dir;
  LandmarkSet odd = set;
  odd.points[3] = {1.0 / 3.0, 2.0 / 7.0};
  write_landmarks(dir.path / "lm.txt", odd);
  const LandmarkSet back = read_landmarks(dir.path / "lm.txt");
  for (std::size_t i = 0; i < 106; ++i) {
    CHECK(back.points[i].x == odd.points[i].x);
    CHECK(back.points[i].y == odd.points[i].y);
  }
}

TEST_CASE("image files") {
  TempDir dir;
  std::mt19937_64 rng(1);
  const Image img = oracle::random_image(13, 21, rng);

  write_pfm(dir.path / "a.pfm", img);
  const Image pfm = read_image(dir.path / "a.pfm");
  REQUIRE(pfm.height() == 13);
  REQUIRE(pfm.width() == 21);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < img.channels[k].size(); ++i) {
      CHECK(pfm.channels[k].values[i] == static_cast<double>(static_cast<float>(img.channels[k].values[i])));
    }
  }

  write_png16(dir.path / "a.png", img);
  const Image png = read_image(dir.path / "a.png");
  REQUIRE(png.height() == 13);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < img.channels[k].size(); ++i) {
      CHECK(std::abs(png.channels[k].values[i] - img.channels[k].values[i]) <= 0.5 / 65535 + 1e-12);
    }
  }

  write_file(dir.path / "bad.png", "\x89PNG\r\n\x1a\nthis is not a png");
  CHECK_THROWS_AS(read_image(dir.path / "bad.png"), FormatError);
  write_file(dir.path / "bad.bmp", "BM....");
  CHECK_THROWS_AS(read_image(dir.path / "bad.bmp"), FormatError);
  CHECK_THROWS_AS(read_image(dir.path / "none.png"), IoError);
  write_file(dir.path / "short.pfm", "PF\n4 4\n-1.0\nabc");
  CHECK_THROWS_AS(read_image(dir.path / "short.pfm"), FormatError);
}

TEST_CASE("config round trip and validation") {
  const DetectorConfig defaults;
  CHECK(defaults.image_size == 500);
  CHECK(defaults.beta == 0.9);
  CHECK(defaults.lambda == 0.6);
  CHECK(defaults.patch_size == 128);
  const nlohmann::json j = config_to_json(defaults);
  CHECK(config_to_json(config_from_json(j)) == j);
  for (const char* key : {"image_size", "band_count_rule", "log_base", "std_epsilon", "global_pca_dim",
                          "region_pca_dim", "patch_size", "region_mode", "regions", "svm",
                          "logistic", "prob_epsilon", "beta", "lambda", "max_regions",
                          "balance_classes", "seed", "threads", "batch_size"}) {
    CHECK(j.contains(key));
  }

  const DetectorConfig partial = config_from_json({{"beta", 1.5}, {"svm", {{"C", 3.0}}}, {"seed", 9}});
  CHECK(partial.beta == 1.5);
  CHECK(partial.svm.penalty == 3.0);
  CHECK(partial.svm.seed == 9);
  CHECK(partial.lambda == 0.6);
  CHECK(partial.region_specs[2].landmark_indices == defaults.region_specs[2].landmark_indices);

  const DetectorConfig regions = config_from_json(
      {{"region_mode", "preset"}, {"regions", {{"mouth", {{"preset", {{"half_side", 0.2}}}}}}}});
  CHECK(regions.region_mode == RegionMode::kPreset);
  CHECK(regions.preset_boxes[3].half_side == 0.2);
  CHECK(regions.preset_boxes[3].center_y == 0.75);

  CHECK_THROWS_AS(config_from_json({{"betta", 1.0}}), FormatError);
  CHECK_THROWS_AS(config_from_json({{"svm", {{"c", 1.0}}}}), FormatError);
  CHECK_THROWS_AS(config_from_json({{"log_base", "10"}}), FormatError);
  CHECK_THROWS_AS(config_from_json({{"lambda", 1.5}}), InvalidInputError);
  CHECK_THROWS_AS(config_from_json({{"region_mode", "magic"}}), FormatError);
  CHECK_THROWS_AS(config_from_json({{"beta", "high"}}), FormatError);
  CHECK_THROWS_AS(config_from_json({{"regions", {{"nose", {{"landmark_indices", {3, 200}}}}}}}),
                  InvalidInputError);

  TempDir dir;
  write_file(dir.path / "c.json", "{\"image_size\": 256}");
  CHECK(load_config(dir.path / "c.json").image_size == 256);
  write_file(dir.path / "bad.json", "{image_size: 256");
  CHECK_THROWS_AS(load_config(dir.path / "bad.json"), FormatError);
}

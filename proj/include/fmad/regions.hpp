#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fmad/image.hpp"

namespace fmad {

inline constexpr std::size_t kLandmarkCount = 106;
inline constexpr std::size_t kRegionCount = 4;
inline constexpr std::size_t kDefaultPatchSize = 128;
inline constexpr double kDefaultMarginFraction = 0.25;

enum class RegionId { kLeftEye = 0, kRightEye = 1, kNose = 2, kMouth = 3 };

inline constexpr std::array<RegionId, kRegionCount> kAllRegions = {
    RegionId::kLeftEye, RegionId::kRightEye, RegionId::kNose, RegionId::kMouth};

std::string_view region_name(RegionId id);
RegionId region_from_name(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LandmarkSet {
  std::vector<Point> points;  // exactly kLandmarkCount
};

// Axis-aligned box in continuous pixel coordinates; pixel (r, c) covers
// [c, c + 1) x [r, r + 1).
struct BoundingBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

double intersection_over_union(const BoundingBox& a, const BoundingBox& b);

struct RegionSpec {
  RegionId region_id = RegionId::kLeftEye;
  std::vector<std::size_t> landmark_indices;
  double margin_fraction = kDefaultMarginFraction;
};

// Square box given as fractions of the image side: center and half side.
struct PresetBox {
  double center_x = 0.5;
  double center_y = 0.5;
  double half_side = 0.1;
};

struct RegionPatch {
  RegionId region_id = RegionId::kLeftEye;
  Image image;
};

// Index subsets for the common 106-point layout: left eye 33-42, right eye
// 87-96, nose 72-86, mouth 52-71.
std::array<RegionSpec, kRegionCount> default_region_specs();

// Fractional square boxes for an aligned, frontal face crop.
std::array<PresetBox, kRegionCount> default_preset_boxes();

// Throws InvalidInputError unless there are exactly 106 finite points.
void validate_landmarks(const LandmarkSet& landmarks);

// Tight box over the indexed points, grown by margin_fraction of its width and
// height on every side, clamped to the image, then grown to a square of the
// larger side and shifted back inside the image where possible.
BoundingBox region_bbox(const LandmarkSet& landmarks, const RegionSpec& spec,
                        std::size_t image_height, std::size_t image_width);

// Bilinear resample of the box to patch_size x patch_size.
RegionPatch crop_and_resize(const Image& image, const BoundingBox& bbox, std::size_t patch_size,
                            RegionId region_id = RegionId::kLeftEye);

std::array<BoundingBox, kRegionCount> preset_regions(
    std::size_t image_height, std::size_t image_width,
    const std::array<PresetBox, kRegionCount>& presets = default_preset_boxes());

// All four patches, from landmarks when given, else from the presets.
std::array<RegionPatch, kRegionCount> extract_regions(
    const Image& image, const LandmarkSet* landmarks,
    const std::array<RegionSpec, kRegionCount>& specs,
    const std::array<PresetBox, kRegionCount>& presets, std::size_t patch_size);

}  // namespace fmad

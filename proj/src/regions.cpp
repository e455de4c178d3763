#include "fmad/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fmad/error.hpp"

namespace fmad {

std::string_view region_name(RegionId id) {
  switch (id) {
    case RegionId::kLeftEye: return "left_eye";
    case RegionId::kRightEye: return "right_eye";
    case RegionId::kNose: return "nose";
    case RegionId::kMouth: return "mouth";
  }
  return "unknown";
}

RegionId region_from_name(std::string_view name) {
  for (RegionId id : kAllRegions) {
    if (region_name(id) == name) return id;
  }
  throw FormatError("unknown region name '" + std::string(name) + "'");
}

double intersection_over_union(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

std::vector<std::size_t> index_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out(last - first + 1);
  std::iota(out.begin(), out.end(), first);
  return out;
}

}  // namespace

std::array<RegionSpec, kRegionCount> default_region_specs() {
  return {{
      {RegionId::kLeftEye, index_range(33, 42), kDefaultMarginFraction},
      {RegionId::kRightEye, index_range(87, 96), kDefaultMarginFraction},
      {RegionId::kNose, index_range(72, 86), kDefaultMarginFraction},
      {RegionId::kMouth, index_range(52, 71), kDefaultMarginFraction},
  }};
}

std::array<PresetBox, kRegionCount> default_preset_boxes() {
  return {{
      {0.35, 0.40, 0.11},  // left eye
      {0.65, 0.40, 0.11},  // right eye
      {0.50, 0.55, 0.12},  // nose
      {0.50, 0.75, 0.14},  // mouth
  }};
}

void validate_landmarks(const LandmarkSet& landmarks) {
  if (landmarks.points.size() != kLandmarkCount) {
    throw InvalidInputError("expected " + std::to_string(kLandmarkCount) + " landmarks, got " +
                            std::to_string(landmarks.points.size()));
  }
  for (const Point& p : landmarks.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InvalidInputError("landmark coordinates must be finite");
    }
  }
}

BoundingBox region_bbox(const LandmarkSet& landmarks, const RegionSpec& spec,
                        std::size_t image_height, std::size_t image_width) {
  validate_landmarks(landmarks);
  if (spec.landmark_indices.empty()) throw InvalidInputError("region spec has no landmarks");
  if (spec.margin_fraction < 0.0) throw InvalidInputError("negative region margin");

  const auto img_w = static_cast<double>(image_width);
  const auto img_h = static_cast<double>(image_height);
  BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (std::size_t idx : spec.landmark_indices) {
    if (idx >= kLandmarkCount) throw InvalidInputError("landmark index out of range");
    const Point p{std::clamp(landmarks.points[idx].x, 0.0, img_w),
                  std::clamp(landmarks.points[idx].y, 0.0, img_h)};
    box.x0 = std::min(box.x0, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.x1 = std::max(box.x1, p.x);
    box.y1 = std::max(box.y1, p.y);
  }

  const double mx = spec.margin_fraction * box.width();
  const double my = spec.margin_fraction * box.height();
  box = {std::max(0.0, box.x0 - mx), std::max(0.0, box.y0 - my), std::min(img_w, box.x1 + mx),
         std::min(img_h, box.y1 + my)};
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) {
    throw DegenerateRegionError("region '" + std::string(region_name(spec.region_id)) +
                                "' collapses to zero area");
  }

  // Square to the larger side, then slide back inside the image.
  const double side = std::min({std::max(box.width(), box.height()), img_w, img_h});
  const double cx = 0.5 * (box.x0 + box.x1);
  const double cy = 0.5 * (box.y0 + box.y1);
  const double x0 = std::clamp(cx - 0.5 * side, 0.0, img_w - side);
  const double y0 = std::clamp(cy - 0.5 * side, 0.0, img_h - side);
  return {x0, y0, x0 + side, y0 + side};
}

RegionPatch crop_and_resize(const Image& image, const BoundingBox& bbox, std::size_t patch_size,
                            RegionId region_id) {
  if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0) || patch_size == 0) {
    throw DegenerateRegionError("cannot crop a degenerate region box");
  }
  const double sx = bbox.width() / static_cast<double>(patch_size);
  const double sy = bbox.height() / static_cast<double>(patch_size);
  RegionPatch patch{region_id, {}};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const ImageChannel& src = image.channels[ch];
    ImageChannel dst(patch_size, patch_size);
    for (std::size_t r = 0; r < patch_size; ++r) {
      const double y = bbox.y0 + (static_cast<double>(r) + 0.5) * sy - 0.5;
      for (std::size_t c = 0; c < patch_size; ++c) {
        const double x = bbox.x0 + (static_cast<double>(c) + 0.5) * sx - 0.5;
        dst.at(r, c) = sample_bilinear(src, x, y);
      }
    }
    patch.image.channels[ch] = std::move(dst);
  }
  return patch;
}

std::array<BoundingBox, kRegionCount> preset_regions(
    std::size_t image_height, std::size_t image_width,
    const std::array<PresetBox, kRegionCount>& presets) {
  const auto w = static_cast<double>(image_width);
  const auto h = static_cast<double>(image_height);
  std::array<BoundingBox, kRegionCount> boxes;
  for (std::size_t i = 0; i < kRegionCount; ++i) {
    const PresetBox& p = presets[i];
    boxes[i] = {std::max(0.0, (p.center_x - p.half_side) * w),
                std::max(0.0, (p.center_y - p.half_side) * h),
                std::min(w, (p.center_x + p.half_side) * w),
                std::min(h, (p.center_y + p.half_side) * h)};
  }
  return boxes;
}

std::array<RegionPatch, kRegionCount> extract_regions(
    const Image& image, const LandmarkSet* landmarks,
    const std::array<RegionSpec, kRegionCount>& specs,
    const std::array<PresetBox, kRegionCount>& presets, std::size_t patch_size) {
  std::array<BoundingBox, kRegionCount> boxes;
  if (landmarks) {
    for (std::size_t i = 0; i < kRegionCount; ++i) {
      boxes[i] = region_bbox(*landmarks, specs[i], image.height(), image.width());
    }
  } else {
    boxes = preset_regions(image.height(), image.width(), presets);
  }
  std::array<RegionPatch, kRegionCount> patches;
  for (std::size_t i = 0; i < kRegionCount; ++i) {
    patches[i] = crop_and_resize(image, boxes[i], patch_size, kAllRegions[i]);
  }
  return patches;
}

}  // namespace fmad

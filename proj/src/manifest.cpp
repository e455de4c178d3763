#include "fmad/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fmad/error.hpp"

namespace fmad {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// RFC 4180 style: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw FormatError("unterminated quote on manifest line " + std::to_string(line_no));
  fields.push_back(trim(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

int parse_label(std::string_view text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "bonafide") return 1;
  if (t == "morph") return 0;
  throw FormatError("label must be 'bonafide' or 'morph', got '" + std::string(text) + "'");
}

std::string_view label_name(int label) { return label == 1 ? "bonafide" : "morph"; }

Manifest read_manifest(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  const std::filesystem::path base = path.parent_path();
  Manifest manifest;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);  // UTF-8 byte order mark
    }
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line, line_no);
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "path" || fields[1] != "label" ||
          fields[2] != "attack_type" || fields[3] != "landmarks") {
        throw FormatError("manifest header must be 'path,label,attack_type,landmarks'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw FormatError("manifest line " + std::to_string(line_no) + " must have 4 fields");
    }
    ManifestRecord rec;
    if (fields[0].empty()) throw FormatError("empty image path on line " + std::to_string(line_no));
    rec.image_path = std::filesystem::path(fields[0]);
    if (rec.image_path.is_relative()) rec.image_path = base / rec.image_path;
    rec.label = parse_label(fields[1]);
    rec.attack_type = fields[2];
    if (!fields[3].empty()) {
      rec.landmark_path = std::filesystem::path(fields[3]);
      if (rec.landmark_path.is_relative()) rec.landmark_path = base / rec.landmark_path;
    }
    if (check_files) {
      if (!std::filesystem::exists(rec.image_path)) {
        throw IoError("manifest image not found: " + rec.image_path.string());
      }
      if (!rec.landmark_path.empty() && !std::filesystem::exists(rec.landmark_path)) {
        throw IoError("manifest landmark file not found: " + rec.landmark_path.string());
      }
    }
    manifest.records.push_back(std::move(rec));
  }
  if (!header_seen) throw FormatError("manifest '" + path.string() + "' is empty");
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  const std::filesystem::path base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    if (p.empty()) return std::string();
    std::error_code ec;
    const auto r = std::filesystem::relative(p, base.empty() ? "." : base, ec);
    return (ec || r.empty()) ? p.generic_string() : r.generic_string();
  };
  out << "path,label,attack_type,landmarks\n";
  for (const auto& rec : manifest.records) {
    out << csv_field(rel(rec.image_path)) << ',' << label_name(rec.label) << ','
        << csv_field(rec.attack_type) << ',' << csv_field(rel(rec.landmark_path)) << '\n';
  }
}

LandmarkSet parse_landmarks(std::string_view text) {
  std::vector<double> values;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',')) {
      ++i;
    }
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ',') {
      ++j;
    }
    const std::string token(text.substr(i, j - i));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw FormatError("landmark file contains a non-numeric token '" + token + "'");
    }
    values.push_back(v);
    i = j;
  }
  if (values.size() != 2 * kLandmarkCount) {
    throw FormatError("landmark record must hold " + std::to_string(2 * kLandmarkCount) +
                      " numbers, found " + std::to_string(values.size()));
  }
  LandmarkSet set;
  set.points.resize(kLandmarkCount);
  for (std::size_t k = 0; k < kLandmarkCount; ++k) set.points[k] = {values[2 * k], values[2 * k + 1]};
  return set;
}

LandmarkSet read_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_landmarks(ss.str());
}

void write_landmarks(const std::filesystem::path& path, const LandmarkSet& landmarks) {
  validate_landmarks(landmarks);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write landmark file '" + path.string() + "'");
  out.precision(17);
  for (const Point& p : landmarks.points) out << p.x << ' ' << p.y << '\n';
}

}  // namespace fmad

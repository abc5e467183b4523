#include "aerosar/io.hpp"

#include <png.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <yaml-cpp/yaml.h>

#include "aerosar/errors.hpp"

namespace aerosar {

using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
  return in;
}

void write_jsonl_header(std::ofstream& out, const std::string& kind) {
  ordered_json header;
  header["schema_version"] = kSchemaVersion;
  header["kind"] = kind;
  out << header.dump() << "\n";
}

/// Parse one JSONL line; throws ParseError with the 1-based line number.
ordered_json parse_line(const std::string& line, int line_no) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

bool is_header(const ordered_json& j) {
  return j.is_object() && j.contains("kind") && !j.contains("bbox") && !j.contains("track_id");
}

template <typename T>
T require(const ordered_json& j, const char* field) {
  if (!j.contains(field)) throw SchemaError(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(field, "wrong type");
  }
}

BoundingBox bbox_from_json(const ordered_json& j) {
  const auto arr = require<std::vector<double>>(j, "bbox");
  if (arr.size() != 4) throw SchemaError("bbox", "expected 4 values");
  BoundingBox b{arr[0], arr[1], arr[2], arr[3]};
  if (!b.valid()) throw SchemaError("bbox", "min exceeds max");
  return b;
}

ordered_json bbox_to_json(const BoundingBox& b) {
  return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

/// Stream records through a per-line callback, skipping the header line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const ordered_json j = parse_line(line, line_no);
    if (line_no == 1 && is_header(j)) continue;
    fn(j, line_no);
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_detections(const std::filesystem::path& path,
                      const std::vector<DetectionRecord>& records, const std::string& kind) {
  std::ofstream out = open_out(path);
  write_jsonl_header(out, kind);
  for (const DetectionRecord& r : records) {
    ordered_json j;
    j["frame"] = r.det.frame;
    j["t"] = r.det.t;
    j["spectrum"] = to_string(r.det.spectrum);
    j["bbox"] = bbox_to_json(r.det.bbox);
    j["score"] = r.det.score;
    if (r.det.human_id) j["id"] = *r.det.human_id;
    if (r.src_optical) j["src_optical"] = *r.src_optical;
    if (r.src_thermal) j["src_thermal"] = *r.src_thermal;
    out << j.dump() << "\n";
  }
}

std::vector<DetectionRecord> read_detections(const std::filesystem::path& path) {
  std::vector<DetectionRecord> records;
  for_each_record(path, [&](const ordered_json& j, int) {
    DetectionRecord r;
    r.det.frame = require<int>(j, "frame");
    r.det.t = require<double>(j, "t");
    r.det.spectrum = spectrum_from_string(require<std::string>(j, "spectrum"));
    r.det.bbox = bbox_from_json(j);
    r.det.score = require<double>(j, "score");
    if (r.det.score < 0.0 || r.det.score > 1.0) throw SchemaError("score", "outside [0, 1]");
    if (j.contains("id")) r.det.human_id = require<int>(j, "id");
    if (j.contains("src_optical")) r.src_optical = require<int>(j, "src_optical");
    if (j.contains("src_thermal")) r.src_thermal = require<int>(j, "src_thermal");
    records.push_back(std::move(r));
  });
  return records;
}

void assign_source_indices(std::vector<DetectionRecord>& records) {
  std::map<std::pair<int, Spectrum>, int> counters;
  for (DetectionRecord& r : records) {
    int& counter = counters[{r.det.frame, r.det.spectrum}];
    if (r.det.spectrum == Spectrum::optical) {
      if (!r.src_optical) r.src_optical = counter;
    } else if (!r.src_thermal) {
      r.src_thermal = counter;
    }
    ++counter;
  }
}

void write_annotations(const std::filesystem::path& path,
                       const std::vector<Annotation>& annotations) {
  std::ofstream out = open_out(path);
  write_jsonl_header(out, "annotations");
  for (const Annotation& a : annotations) {
    ordered_json j;
    j["frame"] = a.frame;
    j["bbox"] = bbox_to_json(a.bbox);
    j["human_id"] = a.human_id;
    j["posture"] = to_string(a.posture);
    j["occluded"] = a.occluded;
    out << j.dump() << "\n";
  }
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> annotations;
  for_each_record(path, [&](const ordered_json& j, int) {
    Annotation a;
    a.frame = require<int>(j, "frame");
    a.bbox = bbox_from_json(j);
    a.human_id = require<int>(j, "human_id");
    a.posture = posture_from_string(require<std::string>(j, "posture"));
    a.occluded = require<bool>(j, "occluded");
    annotations.push_back(a);
  });
  return annotations;
}

void write_localizations(const std::filesystem::path& path,
                         const std::vector<LocalizationRecord>& records) {
  std::ofstream out = open_out(path);
  write_jsonl_header(out, "localizations");
  for (const LocalizationRecord& r : records) {
    ordered_json j;
    j["frame"] = r.frame;
    j["t"] = r.t;
    j["track_id"] = r.track_id;
    j["position"] = ordered_json::array({r.position.x(), r.position.y(), r.position.z()});
    j["depth"] = r.depth;
    j["metric_area"] = r.metric_area;
    j["kept"] = r.kept;
    if (r.pf_mean) j["pf_mean"] = ordered_json::array({r.pf_mean->x(), r.pf_mean->y()});
    if (r.src_optical) j["src_optical"] = *r.src_optical;
    if (r.src_thermal) j["src_thermal"] = *r.src_thermal;
    out << j.dump() << "\n";
  }
}

std::vector<LocalizationRecord> read_localizations(const std::filesystem::path& path) {
  std::vector<LocalizationRecord> records;
  for_each_record(path, [&](const ordered_json& j, int) {
    LocalizationRecord r;
    r.frame = require<int>(j, "frame");
    r.t = require<double>(j, "t");
    r.track_id = require<int>(j, "track_id");
    const auto pos = require<std::vector<double>>(j, "position");
    if (pos.size() != 3) throw SchemaError("position", "expected 3 values");
    r.position = {pos[0], pos[1], pos[2]};
    r.depth = require<double>(j, "depth");
    r.metric_area = require<double>(j, "metric_area");
    r.kept = require<bool>(j, "kept");
    if (j.contains("pf_mean")) {
      const auto m = require<std::vector<double>>(j, "pf_mean");
      if (m.size() != 2) throw SchemaError("pf_mean", "expected 2 values");
      r.pf_mean = Eigen::Vector2d(m[0], m[1]);
    }
    if (j.contains("src_optical")) r.src_optical = require<int>(j, "src_optical");
    if (j.contains("src_thermal")) r.src_thermal = require<int>(j, "src_thermal");
    records.push_back(std::move(r));
  });
  return records;
}

void write_human_assignments(const std::filesystem::path& path,
                             const std::vector<HumanAssignmentRecord>& records) {
  std::ofstream out = open_out(path);
  write_jsonl_header(out, "humans");
  for (const HumanAssignmentRecord& r : records) {
    ordered_json j;
    j["frame"] = r.frame;
    j["t"] = r.t;
    j["track_id"] = r.track_id;
    j["human_id"] = r.human_id;
    j["x"] = r.x;
    j["y"] = r.y;
    out << j.dump() << "\n";
  }
}

std::vector<HumanAssignmentRecord> read_human_assignments(const std::filesystem::path& path) {
  std::vector<HumanAssignmentRecord> records;
  for_each_record(path, [&](const ordered_json& j, int) {
    HumanAssignmentRecord r;
    r.frame = require<int>(j, "frame");
    r.t = require<double>(j, "t");
    r.track_id = require<int>(j, "track_id");
    r.human_id = require<int>(j, "human_id");
    r.x = require<double>(j, "x");
    r.y = require<double>(j, "y");
    records.push_back(r);
  });
  return records;
}

void write_truth(const std::filesystem::path& path, const std::vector<TruthRecord>& records) {
  std::ofstream out = open_out(path);
  write_jsonl_header(out, "truth");
  for (const TruthRecord& r : records) {
    ordered_json j;
    j["frame"] = r.frame;
    j["spectrum"] = to_string(r.spectrum);
    j["index"] = r.index;
    j["source"] = r.source;
    out << j.dump() << "\n";
  }
}

std::vector<TruthRecord> read_truth(const std::filesystem::path& path) {
  std::vector<TruthRecord> records;
  for_each_record(path, [&](const ordered_json& j, int) {
    TruthRecord r;
    r.frame = require<int>(j, "frame");
    r.spectrum = spectrum_from_string(require<std::string>(j, "spectrum"));
    r.index = require<int>(j, "index");
    r.source = require<std::string>(j, "source");
    records.push_back(std::move(r));
  });
  return records;
}

void write_poses_csv(const std::filesystem::path& path, const std::vector<Pose>& poses) {
  std::ofstream out = open_out(path);
  out << "# schema_version " << kSchemaVersion << "\n";
  out << "timestamp,tx,ty,tz,qw,qx,qy,qz\n";
  for (const Pose& p : poses) {
    Eigen::Quaterniond q(p.rotation);
    if (q.w() < 0.0) q.coeffs() *= -1.0;  // canonical sign
    out << format_double(p.timestamp) << ',' << format_double(p.translation.x()) << ','
        << format_double(p.translation.y()) << ',' << format_double(p.translation.z()) << ','
        << format_double(q.w()) << ',' << format_double(q.x()) << ',' << format_double(q.y())
        << ',' << format_double(q.z()) << "\n";
  }
}

std::vector<Pose> read_poses_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("timestamp", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(line_no, "not a number: '" + cell + "'");
      }
    }
    if (values.size() != 8) throw ParseError(line_no, "expected 8 columns");
    Pose p;
    p.timestamp = values[0];
    p.translation = {values[1], values[2], values[3]};
    Eigen::Quaterniond q(values[4], values[5], values[6], values[7]);
    if (q.norm() == 0.0) throw ParseError(line_no, "zero quaternion");
    p.rotation = q.normalized().toRotationMatrix();
    poses.push_back(p);
  }
  std::sort(poses.begin(), poses.end(),
            [](const Pose& a, const Pose& b) { return a.timestamp < b.timestamp; });
  return poses;
}

const Pose* find_pose(const std::vector<Pose>& poses, double t, double tolerance) {
  const Pose* best = nullptr;
  double best_dt = tolerance;
  for (const Pose& p : poses) {
    const double dt = std::abs(p.timestamp - t);
    if (dt <= best_dt) {
      best_dt = dt;
      best = &p;
    }
  }
  return best;
}

namespace {

YAML::Node intrinsics_to_yaml(const CameraIntrinsics& intr) {
  YAML::Node n;
  n["fx"] = intr.fx;
  n["fy"] = intr.fy;
  n["cx"] = intr.cx;
  n["cy"] = intr.cy;
  n["distortion"].push_back(intr.distortion[0]);
  n["distortion"].push_back(intr.distortion[1]);
  n["distortion"].push_back(intr.distortion[2]);
  n["distortion"].push_back(intr.distortion[3]);
  n["width"] = intr.width;
  n["height"] = intr.height;
  return n;
}

CameraIntrinsics intrinsics_from_yaml(const YAML::Node& n, const char* section) {
  if (!n) throw SchemaError(section, "missing");
  CameraIntrinsics intr;
  try {
    intr.fx = n["fx"].as<double>();
    intr.fy = n["fy"].as<double>();
    intr.cx = n["cx"].as<double>();
    intr.cy = n["cy"].as<double>();
    intr.width = n["width"].as<int>();
    intr.height = n["height"].as<int>();
    const auto d = n["distortion"].as<std::vector<double>>(std::vector<double>(4, 0.0));
    if (d.size() != 4) throw SchemaError("distortion", "expected 4 coefficients");
    intr.distortion = Eigen::Vector4d(d[0], d[1], d[2], d[3]);
  } catch (const YAML::Exception& e) {
    throw SchemaError(section, e.what());
  }
  if (intr.fx <= 0.0 || intr.fy <= 0.0) throw SchemaError("fx", "focal length must be positive");
  if (intr.cx < 0.0 || intr.cx >= intr.width || intr.cy < 0.0 || intr.cy >= intr.height) {
    throw SchemaError("cx", "principal point outside the image");
  }
  return intr;
}

}  // namespace

void write_calibration(const std::filesystem::path& path, const Calibration& calib) {
  YAML::Node root;
  root["schema_version"] = kSchemaVersion;
  root["optical"] = intrinsics_to_yaml(calib.optical);
  root["thermal"] = intrinsics_to_yaml(calib.thermal);
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.topLeftCorner<3, 3>() = calib.rig.rotation;
  T.topRightCorner<3, 1>() = calib.rig.translation;
  for (int r = 0; r < 4; ++r) {
    YAML::Node row;
    for (int c = 0; c < 4; ++c) row.push_back(T(r, c));
    root["rig"]["t_thermal_optical"].push_back(row);
  }
  root["rig"]["assumed_scene_depth"] = calib.rig.assumed_scene_depth;

  YAML::Emitter emitter;
  emitter.SetDoublePrecision(17);
  emitter << root;
  std::ofstream out = open_out(path);
  out << emitter.c_str() << "\n";
}

Calibration read_calibration(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw InputError("cannot open '" + path.string() + "' for reading");
  } catch (const YAML::Exception& e) {
    throw ParseError(e.mark.line + 1, e.msg);
  }
  Calibration calib;
  calib.optical = intrinsics_from_yaml(root["optical"], "optical");
  calib.thermal = intrinsics_from_yaml(root["thermal"], "thermal");
  const YAML::Node rig = root["rig"];
  if (!rig) throw SchemaError("rig", "missing");
  try {
    const YAML::Node T = rig["t_thermal_optical"];
    if (!T || T.size() != 4) throw SchemaError("t_thermal_optical", "expected a 4x4 matrix");
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r) {
      if (T[r].size() != 4) throw SchemaError("t_thermal_optical", "expected a 4x4 matrix");
      for (int c = 0; c < 4; ++c) m(r, c) = T[r][c].as<double>();
    }
    calib.rig.rotation = m.topLeftCorner<3, 3>();
    calib.rig.translation = m.topRightCorner<3, 1>();
    if (rig["assumed_scene_depth"]) {
      calib.rig.assumed_scene_depth = rig["assumed_scene_depth"].as<double>();
    }
  } catch (const YAML::Exception& e) {
    throw SchemaError("rig", e.what());
  }
  return calib;
}

void write_patch_histograms(const std::filesystem::path& path, const PatchHistograms& hists,
                            int hue_bins, int sat_bins) {
  std::ofstream out = open_out(path);
  out << "# schema_version " << kSchemaVersion << "\n";
  out << "# layout " << hue_bins << " " << sat_bins << "\n";
  out << "frame,spectrum,index,h,s,value\n";
  for (const auto& [key, hist] : hists) {
    const auto& [frame, spectrum, index] = key;
    for (int h = 0; h < hist.bins.rows(); ++h) {
      for (int s = 0; s < hist.bins.cols(); ++s) {
        if (hist.bins(h, s) == 0.0) continue;
        out << frame << ',' << to_string(spectrum) << ',' << index << ',' << h << ',' << s << ','
            << format_double(hist.bins(h, s)) << "\n";
      }
    }
  }
}

PatchHistograms read_patch_histograms(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  PatchHistograms hists;
  int hue_bins = kDefaultHueBins, sat_bins = kDefaultSatBins;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("frame,", 0) == 0) continue;
    if (line[0] == '#') {
      std::stringstream ss(line);
      std::string hash, word;
      ss >> hash >> word;
      if (word == "layout") ss >> hue_bins >> sat_bins;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError(line_no, "expected 6 columns");
    try {
      const PatchKey key{std::stoi(cells[0]), spectrum_from_string(cells[1]),
                         std::stoi(cells[2])};
      auto [it, inserted] = hists.try_emplace(key);
      if (inserted) {
        it->second.bins = Eigen::MatrixXd::Zero(hue_bins, sat_bins);
      }
      const int h = std::stoi(cells[3]);
      const int s = std::stoi(cells[4]);
      if (h < 0 || h >= hue_bins || s < 0 || s >= sat_bins) {
        throw ParseError(line_no, "bin index out of range");
      }
      it->second.bins(h, s) = std::stod(cells[5]);
    } catch (const std::invalid_argument&) {
      throw ParseError(line_no, "not a number");
    }
  }
  for (auto& [key, hist] : hists) {
    hist.total = hist.bins.sum();
    hist.normalized = std::abs(hist.total - 1.0) < 1e-9;
  }
  return hists;
}

Patch read_png(const std::filesystem::path& path) {
  FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw InputError("cannot open '" + path.string() + "' for reading");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw ParseError(0, "corrupt PNG: " + path.string());
  }

  png_init_io(png, fp);
  png_read_info(png, info);

  // Normalize everything to 8-bit RGB.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  Patch patch;
  patch.width = static_cast<int>(png_get_image_width(png, info));
  patch.height = static_cast<int>(png_get_image_height(png, info));
  patch.pixels.resize(static_cast<std::size_t>(patch.width) * patch.height);

  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (int y = 0; y < patch.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < patch.width; ++x) {
      patch.pixels[static_cast<std::size_t>(y) * patch.width + x] = {row[3 * x], row[3 * x + 1],
                                                                     row[3 * x + 2]};
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return patch;
}

}  // namespace aerosar

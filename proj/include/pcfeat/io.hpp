#pragma once

#include "pcfeat/point_cloud.hpp"
#include "pcfeat/types.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pcfeat {

enum class CloudFormat { ply_ascii, xyz };

enum class PointLabel : std::uint8_t { plain = 0, edge = 1, corner = 2 };

/// Fixed label colors for written PLY files.
inline std::array<std::uint8_t, 3> label_color(PointLabel label) {
  switch (label) {
    case PointLabel::edge:
      return {255, 0, 0};
    case PointLabel::corner:
      return {0, 0, 255};
    default:
      return {200, 200, 200};
  }
}

/// Picks a format from the file extension: .ply, or .xyz/.txt.
inline CloudFormat format_from_path(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  for (auto& ch : ext) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (ext == ".ply") {
    return CloudFormat::ply_ascii;
  }
  if (ext == ".xyz" || ext == ".txt") {
    return CloudFormat::xyz;
  }
  throw InvalidArgument("cannot infer cloud format from path: " + path +
                        " (expected .ply, .xyz or .txt)");
}

namespace io_detail {

[[noreturn]] inline void fail_at(const std::string& path, std::size_t line,
                                 const std::string& what) {
  throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

// Parses up to max_count doubles from s; returns how many were read and
// leaves *rest just past the last one.
inline int parse_doubles(const char* s, double* out, int max_count,
                         const char** rest) {
  int got = 0;
  while (got < max_count) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s) {
      break;
    }
    out[got++] = v;
    s = end;
  }
  *rest = s;
  return got;
}

inline bool only_whitespace(const char* s) {
  for (; *s; ++s) {
    if (!std::isspace(static_cast<unsigned char>(*s))) {
      return false;
    }
  }
  return true;
}

inline void strip_trailing_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

inline bool is_blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') {
      return true;
    }
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      return false;
    }
  }
  return true;
}

struct PlyLayout {
  Index vertex_count = 0;
  bool has_color = false;
};

// Consumes the header of an ASCII PLY stream. Accepts exactly one vertex
// element with float/double x y z and optionally uchar red green blue.
inline PlyLayout read_ply_header(std::ifstream& in, const std::string& path,
                                 std::size_t& line_no) {
  std::string line;
  auto next_line = [&](const char* expectation) {
    if (!std::getline(in, line)) {
      fail_at(path, line_no, std::string("unexpected end of header, expected ") +
                                 expectation);
    }
    ++line_no;
    strip_trailing_cr(line);
  };

  next_line("'ply'");
  if (line != "ply") {
    fail_at(path, line_no, "not a PLY file (first line must be 'ply')");
  }
  next_line("'format ascii 1.0'");
  if (line != "format ascii 1.0") {
    fail_at(path, line_no, "unsupported format line '" + line +
                               "' (only 'format ascii 1.0')");
  }

  PlyLayout layout;
  bool have_vertex_element = false;
  std::vector<std::pair<std::string, std::string>> props;  // (type, name)
  for (;;) {
    next_line("'end_header'");
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty() || word == "comment" || word == "obj_info") {
      continue;
    }
    if (word == "end_header") {
      break;
    }
    if (word == "element") {
      std::string name;
      long long count = -1;
      ls >> name >> count;
      if (name != "vertex") {
        fail_at(path, line_no, "unsupported element '" + name + "'");
      }
      if (have_vertex_element) {
        fail_at(path, line_no, "duplicate vertex element");
      }
      if (count < 0) {
        fail_at(path, line_no, "bad vertex count");
      }
      have_vertex_element = true;
      layout.vertex_count = static_cast<Index>(count);
      continue;
    }
    if (word == "property") {
      if (!have_vertex_element) {
        fail_at(path, line_no, "property before any element");
      }
      std::string type, name;
      ls >> type >> name;
      props.emplace_back(type, name);
      continue;
    }
    fail_at(path, line_no, "unrecognized header line '" + line + "'");
  }

  if (!have_vertex_element) {
    fail_at(path, line_no, "missing 'element vertex' declaration");
  }
  const auto coord_ok = [](const std::string& t) {
    return t == "float" || t == "double" || t == "float32" || t == "float64";
  };
  const auto color_ok = [](const std::string& t) {
    return t == "uchar" || t == "uint8";
  };
  const std::array<const char*, 3> coords = {"x", "y", "z"};
  const std::array<const char*, 3> channels = {"red", "green", "blue"};
  if (props.size() != 3 && props.size() != 6) {
    fail_at(path, line_no,
            "expected properties x y z (optionally red green blue), got " +
                std::to_string(props.size()) + " properties");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (props[i].second != coords[i] || !coord_ok(props[i].first)) {
      fail_at(path, line_no, "property " + std::to_string(i + 1) +
                                 " must be float/double " + coords[i]);
    }
  }
  if (props.size() == 6) {
    layout.has_color = true;
    for (std::size_t i = 0; i < 3; ++i) {
      if (props[3 + i].second != channels[i] || !color_ok(props[3 + i].first)) {
        fail_at(path, line_no, "property " + std::to_string(4 + i) +
                                   " must be uchar " + channels[i]);
      }
    }
  }
  return layout;
}

}  // namespace io_detail

template <typename Scalar>
PointCloud<Scalar> load_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::size_t line_no = 0;
  std::string line;
  PointCloud<Scalar> cloud;

  if (format == CloudFormat::ply_ascii) {
    const auto layout = io_detail::read_ply_header(in, path, line_no);
    const int arity = layout.has_color ? 6 : 3;
    cloud.points.resize(layout.vertex_count, 3);
    if (layout.has_color) {
      cloud.colors.resize(layout.vertex_count, 3);
    }
    Index row = 0;
    while (row < layout.vertex_count) {
      if (!std::getline(in, line)) {
        io_detail::fail_at(path, line_no,
                           "vertex count mismatch: header declares " +
                               std::to_string(layout.vertex_count) +
                               " vertices but file has " + std::to_string(row));
      }
      ++line_no;
      io_detail::strip_trailing_cr(line);
      if (io_detail::only_whitespace(line.c_str())) {
        continue;
      }
      double vals[6];
      const char* rest = nullptr;
      const int got = io_detail::parse_doubles(line.c_str(), vals, arity, &rest);
      if (got != arity || !io_detail::only_whitespace(rest)) {
        io_detail::fail_at(path, line_no,
                           "expected " + std::to_string(arity) +
                               " numeric fields per vertex row");
      }
      for (int c = 0; c < 3; ++c) {
        if (!std::isfinite(vals[c])) {
          io_detail::fail_at(path, line_no, "non-finite coordinate");
        }
        cloud.points(row, c) = static_cast<Scalar>(vals[c]);
      }
      if (layout.has_color) {
        for (int c = 0; c < 3; ++c) {
          const double v = vals[3 + c];
          if (!(v >= 0 && v <= 255) || v != std::floor(v)) {
            io_detail::fail_at(path, line_no, "color channel outside 0..255");
          }
          cloud.colors(row, c) = static_cast<std::uint8_t>(v);
        }
      }
      ++row;
    }
    while (std::getline(in, line)) {
      ++line_no;
      io_detail::strip_trailing_cr(line);
      if (!io_detail::only_whitespace(line.c_str())) {
        io_detail::fail_at(path, line_no, "data after declared vertex count");
      }
    }
    return cloud;
  }

  // XYZ text: 3 numbers per line, '#' starts a comment line.
  std::vector<std::array<Scalar, 3>> points;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::strip_trailing_cr(line);
    if (io_detail::is_blank_or_comment(line)) {
      continue;
    }
    double vals[3];
    const char* rest = nullptr;
    const int got = io_detail::parse_doubles(line.c_str(), vals, 3, &rest);
    if (got != 3 || !io_detail::only_whitespace(rest)) {
      io_detail::fail_at(path, line_no, "expected 3 numeric fields");
    }
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(vals[c])) {
        io_detail::fail_at(path, line_no, "non-finite coordinate");
      }
    }
    points.push_back({static_cast<Scalar>(vals[0]), static_cast<Scalar>(vals[1]),
                      static_cast<Scalar>(vals[2])});
  }
  cloud.points.resize(static_cast<Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      cloud.points(static_cast<Index>(i), c) = points[i][static_cast<std::size_t>(c)];
    }
  }
  return cloud;
}

namespace io_detail {

class FileWriter {
 public:
  explicit FileWriter(const std::string& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "w");
    if (!file_) {
      throw IoError("cannot open for writing: " + path);
    }
  }
  FileWriter(const FileWriter&) = delete;
  FileWriter& operator=(const FileWriter&) = delete;
  ~FileWriter() {
    if (file_) {
      std::fclose(file_);
    }
  }

  std::FILE* get() { return file_; }

  void close_checked() {
    const bool bad = std::ferror(file_) != 0;
    const bool close_failed = std::fclose(file_) != 0;
    file_ = nullptr;
    if (bad || close_failed) {
      throw IoError("write failed: " + path_);
    }
  }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
};

}  // namespace io_detail

/// Writes ASCII PLY. Coordinates carry 9 significant digits; colors are
/// written only when the cloud has them.
template <typename Scalar>
void save_cloud(const PointCloud<Scalar>& cloud, const std::string& path) {
  io_detail::FileWriter w(path);
  std::FILE* f = w.get();
  std::fprintf(f, "ply\nformat ascii 1.0\nelement vertex %lld\n",
               static_cast<long long>(cloud.size()));
  std::fprintf(f, "property float x\nproperty float y\nproperty float z\n");
  if (cloud.has_colors()) {
    std::fprintf(f,
                 "property uchar red\nproperty uchar green\nproperty uchar blue\n");
  }
  std::fprintf(f, "end_header\n");
  for (Index i = 0; i < cloud.size(); ++i) {
    std::fprintf(f, "%.9g %.9g %.9g", static_cast<double>(cloud.points(i, 0)),
                 static_cast<double>(cloud.points(i, 1)),
                 static_cast<double>(cloud.points(i, 2)));
    if (cloud.has_colors()) {
      std::fprintf(f, " %u %u %u", static_cast<unsigned>(cloud.colors(i, 0)),
                   static_cast<unsigned>(cloud.colors(i, 1)),
                   static_cast<unsigned>(cloud.colors(i, 2)));
    }
    std::fputc('\n', f);
  }
  w.close_checked();
}

/// Writes ASCII PLY with the fixed class colors: plain grey, edge red,
/// corner blue.
template <typename Scalar>
void save_labeled_cloud(const PointCloud<Scalar>& cloud,
                        const std::vector<PointLabel>& labels,
                        const std::string& path) {
  if (static_cast<Index>(labels.size()) != cloud.size()) {
    throw InvalidArgument("labels length must equal point count");
  }
  PointCloud<Scalar> colored;
  colored.points = cloud.points;
  colored.colors.resize(cloud.size(), 3);
  for (Index i = 0; i < cloud.size(); ++i) {
    const auto rgb = label_color(labels[static_cast<std::size_t>(i)]);
    for (int c = 0; c < 3; ++c) {
      colored.colors(i, c) = rgb[static_cast<std::size_t>(c)];
    }
  }
  save_cloud(colored, path);
}

/// Writes XYZ text (3 columns, 9 significant digits).
template <typename Scalar>
void save_xyz(const PointCloud<Scalar>& cloud, const std::string& path) {
  io_detail::FileWriter w(path);
  for (Index i = 0; i < cloud.size(); ++i) {
    std::fprintf(w.get(), "%.9g %.9g %.9g\n",
                 static_cast<double>(cloud.points(i, 0)),
                 static_cast<double>(cloud.points(i, 1)),
                 static_cast<double>(cloud.points(i, 2)));
  }
  w.close_checked();
}

/// Ground-truth label file: XYZ plus a 4th column in {0 plain, 1 edge,
/// 2 corner}.
template <typename Scalar>
void save_labeled_xyz(const PointCloud<Scalar>& cloud,
                      const std::vector<PointLabel>& labels,
                      const std::string& path) {
  if (static_cast<Index>(labels.size()) != cloud.size()) {
    throw InvalidArgument("labels length must equal point count");
  }
  io_detail::FileWriter w(path);
  for (Index i = 0; i < cloud.size(); ++i) {
    std::fprintf(w.get(), "%.9g %.9g %.9g %d\n",
                 static_cast<double>(cloud.points(i, 0)),
                 static_cast<double>(cloud.points(i, 1)),
                 static_cast<double>(cloud.points(i, 2)),
                 static_cast<int>(labels[static_cast<std::size_t>(i)]));
  }
  w.close_checked();
}

template <typename Scalar>
struct LabeledCloud {
  PointCloud<Scalar> cloud;
  std::vector<PointLabel> labels;
};

template <typename Scalar>
LabeledCloud<Scalar> load_labeled_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  LabeledCloud<Scalar> out;
  std::vector<std::array<Scalar, 3>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    io_detail::strip_trailing_cr(line);
    if (io_detail::is_blank_or_comment(line)) {
      continue;
    }
    double vals[4];
    const char* rest = nullptr;
    const int got = io_detail::parse_doubles(line.c_str(), vals, 4, &rest);
    if (got != 4 || !io_detail::only_whitespace(rest)) {
      io_detail::fail_at(path, line_no, "expected x y z label");
    }
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(vals[c])) {
        io_detail::fail_at(path, line_no, "non-finite coordinate");
      }
    }
    if (vals[3] != 0 && vals[3] != 1 && vals[3] != 2) {
      io_detail::fail_at(path, line_no, "label must be 0, 1 or 2");
    }
    points.push_back({static_cast<Scalar>(vals[0]), static_cast<Scalar>(vals[1]),
                      static_cast<Scalar>(vals[2])});
    out.labels.push_back(static_cast<PointLabel>(static_cast<int>(vals[3])));
  }
  out.cloud.points.resize(static_cast<Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out.cloud.points(static_cast<Index>(i), c) =
          points[i][static_cast<std::size_t>(c)];
    }
  }
  return out;
}

}  // namespace pcfeat

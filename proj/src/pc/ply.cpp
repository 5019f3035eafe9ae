#include "pcad/pc/ply.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "pcad/common/error.hpp"

namespace pcad {
namespace {

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, n);
}

struct ElementSpec {
  std::string name;
  long count = 0;
  std::vector<std::string> properties;
  bool has_list = false;
};

}  // namespace

PointCloud parse_ply(const std::string& text, const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  auto fail = [&](const std::string& why) {
    throw InvalidInput(source_name + ": " + why);
  };
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) fail("missing 'ply' magic");

  std::vector<ElementSpec> elements;
  bool ascii = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = (fmt == "ascii");
      if (!ascii) fail("only ASCII PLY is supported (got '" + fmt + "')");
    } else if (kw == "element") {
      ElementSpec e;
      ls >> e.name >> e.count;
      if (!ls || e.count < 0) fail("bad element line: " + line);
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) fail("property before element");
      std::string type;
      ls >> type;
      if (type == "list") {
        elements.back().has_list = true;
        std::string a, b, name;
        ls >> a >> b >> name;
        elements.back().properties.push_back(name);
      } else {
        std::string name;
        ls >> name;
        elements.back().properties.push_back(name);
      }
    } else if (kw == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) fail("missing end_header");
  if (!ascii) fail("missing format line");

  PointCloud cloud;
  bool found_vertex = false;
  for (const ElementSpec& e : elements) {
    if (e.name != "vertex") {
      for (long i = 0; i < e.count; ++i) {
        if (!std::getline(in, line)) fail("truncated element '" + e.name + "'");
      }
      continue;
    }
    found_vertex = true;
    if (e.has_list) fail("list properties on vertex are not supported");
    int ix = -1, iy = -1, iz = -1, ia = -1;
    for (int p = 0; p < static_cast<int>(e.properties.size()); ++p) {
      const std::string& name = e.properties[p];
      if (name == "x") ix = p;
      if (name == "y") iy = p;
      if (name == "z") iz = p;
      if (name == "anomaly") ia = p;
    }
    if (ix < 0 || iy < 0 || iz < 0) fail("vertex element lacks x/y/z");
    cloud.points.resize(e.count, 3);
    std::vector<std::uint8_t> mask;
    if (ia >= 0) mask.resize(e.count);
    std::vector<double> values(e.properties.size());
    for (long i = 0; i < e.count; ++i) {
      if (!std::getline(in, line)) fail("truncated vertex list at row " + std::to_string(i));
      std::istringstream ls(line);
      for (double& v : values) {
        std::string tok;
        if (!(ls >> tok)) fail("short vertex row " + std::to_string(i));
        // strtod accepts nan/inf; validate() rejects them later.
        char* end = nullptr;
        v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) fail("non-numeric value '" + tok + "' at row " + std::to_string(i));
      }
      cloud.points(i, 0) = values[ix];
      cloud.points(i, 1) = values[iy];
      cloud.points(i, 2) = values[iz];
      if (ia >= 0) {
        if (values[ia] != 0.0 && values[ia] != 1.0) fail("anomaly property must be 0 or 1");
        mask[i] = static_cast<std::uint8_t>(values[ia]);
      }
    }
    if (ia >= 0) cloud.mask = std::move(mask);
    break;
  }
  if (!found_vertex) fail("no vertex element");
  cloud.validate();
  return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_ply(ss.str(), path.string());
}

std::string format_ply(const PointCloud& cloud, std::optional<std::span<const double>> scores) {
  cloud.validate();
  if (scores && static_cast<int>(scores->size()) != cloud.size()) {
    throw InvalidArgument("score count does not match point count");
  }
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.mask) out += "property uchar anomaly\n";
  if (scores) out += "property double score\n";
  out += "end_header\n";
  for (int i = 0; i < cloud.size(); ++i) {
    out += format_double(cloud.points(i, 0));
    out += ' ';
    out += format_double(cloud.points(i, 1));
    out += ' ';
    out += format_double(cloud.points(i, 2));
    if (cloud.mask) {
      out += ' ';
      out += ((*cloud.mask)[i] ? '1' : '0');
    }
    if (scores) {
      out += ' ';
      out += format_double((*scores)[i]);
    }
    out += '\n';
  }
  return out;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               std::optional<std::span<const double>> scores) {
  const std::string text = format_ply(cloud, scores);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("write failed for " + path.string());
}

}  // namespace pcad

#include "sograb/ply_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sograb {

static_assert(std::endian::native == std::endian::little,
              "PLY reader assumes a little-endian host");

namespace {

enum class PropType {
  kInt8,
  kUInt8,
  kInt16,
  kUInt16,
  kInt32,
  kUInt32,
  kFloat32,
  kFloat64,
};

std::size_t prop_size(PropType t) {
  switch (t) {
    case PropType::kInt8:
    case PropType::kUInt8:
      return 1;
    case PropType::kInt16:
    case PropType::kUInt16:
      return 2;
    case PropType::kInt32:
    case PropType::kUInt32:
    case PropType::kFloat32:
      return 4;
    case PropType::kFloat64:
      return 8;
  }
  return 0;
}

bool parse_prop_type(const std::string& token, PropType& out) {
  if (token == "char" || token == "int8") out = PropType::kInt8;
  else if (token == "uchar" || token == "uint8") out = PropType::kUInt8;
  else if (token == "short" || token == "int16") out = PropType::kInt16;
  else if (token == "ushort" || token == "uint16") out = PropType::kUInt16;
  else if (token == "int" || token == "int32") out = PropType::kInt32;
  else if (token == "uint" || token == "uint32") out = PropType::kUInt32;
  else if (token == "float" || token == "float32") out = PropType::kFloat32;
  else if (token == "double" || token == "float64") out = PropType::kFloat64;
  else return false;
  return true;
}

struct Property {
  std::string name;
  PropType type = PropType::kFloat32;
  std::size_t offset = 0;  // byte offset within a binary vertex record
};

struct Header {
  PlyFormat format = PlyFormat::kAscii;
  std::size_t vertex_count = 0;
  std::vector<Property> properties;
  std::size_t stride = 0;
  int x = -1, y = -1, z = -1;          // property slots
  int red = -1, green = -1, blue = -1;
};

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
  return line;
}

Header parse_header(std::istream& in, const std::string& path) {
  Header header;
  std::string line;
  if (!std::getline(in, line) || chomp(line) != "ply") {
    throw std::runtime_error(path + ": not a PLY file (missing 'ply' magic)");
  }
  bool have_format = false;
  bool in_vertex_element = false;
  bool past_vertex_element = false;
  bool seen_vertex_element = false;
  while (std::getline(in, line)) {
    line = chomp(line);
    std::istringstream tokens(line);
    std::string keyword;
    tokens >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
      continue;
    }
    if (keyword == "format") {
      std::string fmt, version;
      tokens >> fmt >> version;
      if (fmt == "ascii") {
        header.format = PlyFormat::kAscii;
      } else if (fmt == "binary_little_endian") {
        header.format = PlyFormat::kBinaryLittleEndian;
      } else {
        throw std::runtime_error(path + ": unsupported PLY format '" + fmt +
                                 "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      std::string name;
      long long count = -1;
      tokens >> name >> count;
      if (name == "vertex") {
        if (count < 0) {
          throw std::runtime_error(path + ": malformed vertex element line");
        }
        header.vertex_count = static_cast<std::size_t>(count);
        in_vertex_element = true;
        seen_vertex_element = true;
      } else {
        if (!seen_vertex_element) {
          throw std::runtime_error(path + ": element '" + name +
                                   "' precedes the vertex element; unsupported");
        }
        in_vertex_element = false;
        past_vertex_element = true;
      }
    } else if (keyword == "property") {
      if (!in_vertex_element) {
        if (past_vertex_element) continue;  // trailing elements are ignored
        throw std::runtime_error(path + ": property outside an element");
      }
      std::string type_token;
      tokens >> type_token;
      if (type_token == "list") {
        throw std::runtime_error(path +
                                 ": list properties on vertices are unsupported");
      }
      Property prop;
      if (!parse_prop_type(type_token, prop.type)) {
        throw std::runtime_error(path + ": unknown property type '" +
                                 type_token + "'");
      }
      tokens >> prop.name;
      if (prop.name.empty()) {
        throw std::runtime_error(path + ": property without a name");
      }
      prop.offset = header.stride;
      header.stride += prop_size(prop.type);
      header.properties.push_back(prop);
    } else if (keyword == "end_header") {
      if (!have_format) {
        throw std::runtime_error(path + ": header missing format line");
      }
      if (!seen_vertex_element) {
        throw std::runtime_error(path + ": header missing vertex element");
      }
      for (int i = 0; i < static_cast<int>(header.properties.size()); ++i) {
        const Property& p = header.properties[i];
        const bool is_float =
            p.type == PropType::kFloat32 || p.type == PropType::kFloat64;
        const bool is_uchar = p.type == PropType::kUInt8;
        if (p.name == "x" && is_float) header.x = i;
        else if (p.name == "y" && is_float) header.y = i;
        else if (p.name == "z" && is_float) header.z = i;
        else if (p.name == "red" && is_uchar) header.red = i;
        else if (p.name == "green" && is_uchar) header.green = i;
        else if (p.name == "blue" && is_uchar) header.blue = i;
        else
          std::cerr << "warning: " << path << ": skipping vertex property '"
                    << p.name << "'\n";
      }
      if (header.x < 0 || header.y < 0 || header.z < 0) {
        throw std::runtime_error(path +
                                 ": vertex element lacks float x/y/z properties");
      }
      return header;
    } else {
      throw std::runtime_error(path + ": unexpected header keyword '" +
                               keyword + "'");
    }
  }
  throw std::runtime_error(path + ": unexpected end of file in header");
}

double binary_value(const char* record, const Property& prop) {
  const char* src = record + prop.offset;
  switch (prop.type) {
    case PropType::kInt8: {
      std::int8_t v;
      std::memcpy(&v, src, 1);
      return v;
    }
    case PropType::kUInt8: {
      std::uint8_t v;
      std::memcpy(&v, src, 1);
      return v;
    }
    case PropType::kInt16: {
      std::int16_t v;
      std::memcpy(&v, src, 2);
      return v;
    }
    case PropType::kUInt16: {
      std::uint16_t v;
      std::memcpy(&v, src, 2);
      return v;
    }
    case PropType::kInt32: {
      std::int32_t v;
      std::memcpy(&v, src, 4);
      return v;
    }
    case PropType::kUInt32: {
      std::uint32_t v;
      std::memcpy(&v, src, 4);
      return v;
    }
    case PropType::kFloat32: {
      float v;
      std::memcpy(&v, src, 4);
      return v;
    }
    case PropType::kFloat64: {
      double v;
      std::memcpy(&v, src, 8);
      return v;
    }
  }
  return 0.0;
}

void check_finite(const Point3& p, std::size_t index, const std::string& path) {
  if (!p.allFinite()) {
    throw std::runtime_error(path + ": non-finite coordinate at point index " +
                             std::to_string(index));
  }
}

}  // namespace

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  const Header header = parse_header(in, path);
  if (header.vertex_count == 0) {
    throw std::runtime_error(path + ": empty cloud");
  }
  const bool with_colors =
      header.red >= 0 && header.green >= 0 && header.blue >= 0;

  PointCloud cloud;
  cloud.points.reserve(header.vertex_count);
  if (with_colors) cloud.colors.reserve(header.vertex_count);

  if (header.format == PlyFormat::kAscii) {
    std::string line;
    for (std::size_t i = 0; i < header.vertex_count; ++i) {
      if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": unexpected end of file at vertex " +
                                 std::to_string(i));
      }
      const std::string text = chomp(line);
      std::vector<double> values(header.properties.size());
      const char* cursor = text.c_str();
      for (std::size_t j = 0; j < values.size(); ++j) {
        char* next = nullptr;
        values[j] = std::strtod(cursor, &next);  // strtod accepts nan/inf
        if (next == cursor) {
          throw std::runtime_error(path + ": malformed vertex line " +
                                   std::to_string(i));
        }
        cursor = next;
      }
      const Point3 p(values[header.x], values[header.y], values[header.z]);
      check_finite(p, i, path);
      cloud.points.push_back(p);
      if (with_colors) {
        cloud.colors.push_back(
            Color{static_cast<std::uint8_t>(values[header.red]),
                  static_cast<std::uint8_t>(values[header.green]),
                  static_cast<std::uint8_t>(values[header.blue])});
      }
    }
  } else {
    std::vector<char> data(header.vertex_count * header.stride);
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
      throw std::runtime_error(path + ": unexpected end of binary vertex data");
    }
    for (std::size_t i = 0; i < header.vertex_count; ++i) {
      const char* record = data.data() + i * header.stride;
      const Point3 p(binary_value(record, header.properties[header.x]),
                     binary_value(record, header.properties[header.y]),
                     binary_value(record, header.properties[header.z]));
      check_finite(p, i, path);
      cloud.points.push_back(p);
      if (with_colors) {
        cloud.colors.push_back(Color{
            static_cast<std::uint8_t>(
                binary_value(record, header.properties[header.red])),
            static_cast<std::uint8_t>(
                binary_value(record, header.properties[header.green])),
            static_cast<std::uint8_t>(
                binary_value(record, header.properties[header.blue]))});
      }
    }
  }
  return cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path,
                PlyFormat format) {
  if (cloud.empty()) throw std::invalid_argument("save_cloud: empty cloud");
  if (cloud.has_colors() && cloud.colors.size() != cloud.points.size()) {
    throw std::invalid_argument("save_cloud: color count != point count");
  }
  validate_finite(cloud);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");

  const bool with_colors = cloud.has_colors();
  const char* coord_type =
      format == PlyFormat::kBinaryLittleEndian ? "double" : "float";
  out << "ply\n";
  out << (format == PlyFormat::kAscii ? "format ascii 1.0\n"
                                      : "format binary_little_endian 1.0\n");
  out << "element vertex " << cloud.size() << "\n";
  out << "property " << coord_type << " x\n";
  out << "property " << coord_type << " y\n";
  out << "property " << coord_type << " z\n";
  if (with_colors) {
    out << "property uchar red\n";
    out << "property uchar green\n";
    out << "property uchar blue\n";
  }
  out << "end_header\n";

  if (format == PlyFormat::kAscii) {
    char buf[128];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Point3& p = cloud.points[i];
      std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f", p.x(), p.y(), p.z());
      out << buf;
      if (with_colors) {
        const Color& c = cloud.colors[i];
        out << ' ' << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]);
      }
      out << '\n';
    }
  } else {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      double coords[3] = {cloud.points[i].x(), cloud.points[i].y(),
                          cloud.points[i].z()};
      out.write(reinterpret_cast<const char*>(coords), sizeof(coords));
      if (with_colors) {
        out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
      }
    }
  }
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace sograb

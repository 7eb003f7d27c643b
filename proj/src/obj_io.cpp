#include "texrig/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace texrig {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
  fail(ErrorKind::ParseError, origin + ":" + std::to_string(line) + ": " + msg);
}

// "v/vt" or "v/vt/vn" corner; plain "v" has no texture coordinate.
struct Corner {
  int v = 0;
  int vt = 0;
  bool has_vt = false;
};

Corner parse_corner(const std::string& token, const std::string& origin, int line) {
  Corner c;
  const size_t s1 = token.find('/');
  if (s1 == std::string::npos) {
    c.v = std::atoi(token.c_str());
    return c;
  }
  c.v = std::atoi(token.substr(0, s1).c_str());
  const size_t s2 = token.find('/', s1 + 1);
  const std::string vt_str =
      s2 == std::string::npos ? token.substr(s1 + 1) : token.substr(s1 + 1, s2 - s1 - 1);
  if (!vt_str.empty()) {
    c.vt = std::atoi(vt_str.c_str());
    c.has_vt = true;
  }
  if (c.v == 0) parse_fail(origin, line, "bad face corner '" + token + "'");
  return c;
}

int resolve_index(int idx, int count, const std::string& origin, int line) {
  // OBJ indices are 1-based; negative indices count from the end.
  const int out = idx > 0 ? idx - 1 : count + idx;
  if (out < 0 || out >= count) parse_fail(origin, line, "index " + std::to_string(idx) + " out of range");
  return out;
}

}  // namespace

TriMesh parse_obj_text(const std::string& text, const std::string& origin) {
  TriMesh mesh;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) parse_fail(origin, line_no, "malformed vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "vt") {
      double u, v;
      if (!(ls >> u >> v)) parse_fail(origin, line_no, "malformed texture coordinate");
      mesh.uv_coords.emplace_back(u, v);
    } else if (tag == "f") {
      std::vector<Corner> corners;
      std::string token;
      while (ls >> token) corners.push_back(parse_corner(token, origin, line_no));
      if (corners.size() < 3) parse_fail(origin, line_no, "face with fewer than 3 corners");
      for (const Corner& c : corners)
        if (!c.has_vt)
          fail(ErrorKind::MissingUV,
               origin + ":" + std::to_string(line_no) + ": face corner without texture coordinate");
      const int nv = mesh.vertex_count();
      const int nt = static_cast<int>(mesh.uv_coords.size());
      std::vector<int> vi(corners.size()), ti(corners.size());
      for (size_t k = 0; k < corners.size(); ++k) {
        vi[k] = resolve_index(corners[k].v, nv, origin, line_no);
        ti[k] = resolve_index(corners[k].vt, nt, origin, line_no);
      }
      for (size_t k = 2; k < corners.size(); ++k) {  // fan triangulation
        mesh.faces.push_back({vi[0], vi[k - 1], vi[k]});
        mesh.uv_faces.push_back({ti[0], ti[k - 1], ti[k]});
      }
    }
    // vn, o, g, s, usemtl, mtllib: ignored
  }
  mesh.validate();
  return mesh;
}

TriMesh parse_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_obj_text(buf.str(), path);
}

}  // namespace texrig

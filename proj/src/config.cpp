#include "texrig/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace texrig {

LiftVariant RunConfig::lift_variant() const {
  if (variant == "naive") return LiftVariant::Naive;
  if (variant == "quasi_phong") return LiftVariant::QuasiPhong;
  fail(ErrorKind::ConfigError, "variant must be 'naive' or 'quasi_phong', got '" + variant + "'");
}

namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (size_t k = 0; k < items.size(); ++k) {
    if (k) out += ",";
    out += items[k];
  }
  return out;
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    fail(ErrorKind::ConfigError, "key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

int parse_int(const std::string& v, const std::string& key) {
  const double d = parse_double(v, key);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    fail(ErrorKind::ConfigError, "key '" + key + "' expects an integer, got '" + v + "'");
  return i;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::ConfigError, "key '" + key + "' expects true/false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::ConfigError,
           origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key == "uv_width") cfg.uv_width = parse_int(value, key);
    else if (key == "uv_height") cfg.uv_height = parse_int(value, key);
    else if (key == "dilation_rings") cfg.dilation_rings = parse_int(value, key);
    else if (key == "variant") cfg.variant = value;
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(std::strtoull(value.c_str(), nullptr, 10));
    else if (key == "lambda_l1") cfg.lambda_l1 = parse_double(value, key);
    else if (key == "lambda_ssim") cfg.lambda_ssim = parse_double(value, key);
    else if (key == "lambda_reg_mu") cfg.lambda_reg_mu = parse_double(value, key);
    else if (key == "lambda_reg_s") cfg.lambda_reg_s = parse_double(value, key);
    else if (key == "eps_mu") cfg.eps_mu = parse_double(value, key);
    else if (key == "eps_s") cfg.eps_s = parse_double(value, key);
    else if (key == "iterations") cfg.iterations = parse_int(value, key);
    else if (key == "lr_position") cfg.lr_position = parse_double(value, key);
    else if (key == "lr_rotation") cfg.lr_rotation = parse_double(value, key);
    else if (key == "lr_log_scale") cfg.lr_log_scale = parse_double(value, key);
    else if (key == "lr_opacity") cfg.lr_opacity = parse_double(value, key);
    else if (key == "lr_color") cfg.lr_color = parse_double(value, key);
    else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(value, key);
    else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(value, key);
    else if (key == "adam_eps") cfg.adam_eps = parse_double(value, key);
    else if (key == "image_width") cfg.image_width = parse_int(value, key);
    else if (key == "image_height") cfg.image_height = parse_int(value, key);
    else if (key == "write_float_dumps") cfg.write_float_dumps = parse_bool(value, key);
    else if (key == "rest_obj") cfg.rest_obj = value;
    else if (key == "deformed_objs") cfg.deformed_objs = split_list(value);
    else if (key == "cameras") cfg.cameras = value;
    else if (key == "targets") cfg.targets = split_list(value);
    else if (key == "maps") cfg.maps = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else
      fail(ErrorKind::ConfigError,
           origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }

  if (cfg.uv_width < 2 || cfg.uv_height < 2)
    fail(ErrorKind::ConfigError, "uv resolution must be at least 2x2");
  if (cfg.dilation_rings < 0) fail(ErrorKind::ConfigError, "dilation_rings must be >= 0");
  if (cfg.iterations <= 0) fail(ErrorKind::ConfigError, "iterations must be positive");
  if (cfg.lambda_l1 < 0 || cfg.lambda_ssim < 0 || cfg.lambda_reg_mu < 0 || cfg.lambda_reg_s < 0)
    fail(ErrorKind::ConfigError, "loss weights must be nonnegative");
  cfg.lift_variant();  // validates the variant string
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "uv_width = " << c.uv_width << "\n";
  out << "uv_height = " << c.uv_height << "\n";
  out << "dilation_rings = " << c.dilation_rings << "\n";
  out << "variant = " << c.variant << "\n";
  out << "seed = " << c.seed << "\n";
  out << "lambda_l1 = " << format_double(c.lambda_l1) << "\n";
  out << "lambda_ssim = " << format_double(c.lambda_ssim) << "\n";
  out << "lambda_reg_mu = " << format_double(c.lambda_reg_mu) << "\n";
  out << "lambda_reg_s = " << format_double(c.lambda_reg_s) << "\n";
  out << "eps_mu = " << format_double(c.eps_mu) << "\n";
  out << "eps_s = " << format_double(c.eps_s) << "\n";
  out << "iterations = " << c.iterations << "\n";
  out << "lr_position = " << format_double(c.lr_position) << "\n";
  out << "lr_rotation = " << format_double(c.lr_rotation) << "\n";
  out << "lr_log_scale = " << format_double(c.lr_log_scale) << "\n";
  out << "lr_opacity = " << format_double(c.lr_opacity) << "\n";
  out << "lr_color = " << format_double(c.lr_color) << "\n";
  out << "adam_beta1 = " << format_double(c.adam_beta1) << "\n";
  out << "adam_beta2 = " << format_double(c.adam_beta2) << "\n";
  out << "adam_eps = " << format_double(c.adam_eps) << "\n";
  out << "image_width = " << c.image_width << "\n";
  out << "image_height = " << c.image_height << "\n";
  out << "write_float_dumps = " << (c.write_float_dumps ? "true" : "false") << "\n";
  if (!c.rest_obj.empty()) out << "rest_obj = " << c.rest_obj << "\n";
  if (!c.deformed_objs.empty()) out << "deformed_objs = " << join_list(c.deformed_objs) << "\n";
  if (!c.cameras.empty()) out << "cameras = " << c.cameras << "\n";
  if (!c.targets.empty()) out << "targets = " << join_list(c.targets) << "\n";
  if (!c.maps.empty()) out << "maps = " << c.maps << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  return out.str();
}

std::vector<Camera> load_cameras(const std::string& path, int image_width, int image_height) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  std::vector<Camera> cameras;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::istringstream ls(stripped);
    double n[21];
    for (int k = 0; k < 21; ++k) {
      if (!(ls >> n[k]))
        fail(ErrorKind::ParseError,
             path + ":" + std::to_string(line_no) + ": camera line needs 21 numbers");
    }
    Camera cam;
    cam.fx = n[0];
    cam.fy = n[1];
    cam.cx = n[2];
    cam.cy = n[3];
    cam.rotation << n[4], n[5], n[6], n[7], n[8], n[9], n[10], n[11], n[12];
    cam.translation = Vec3(n[13], n[14], n[15]);
    cam.near_plane = n[16];
    cam.far_plane = n[17];
    cam.background = Vec3(n[18], n[19], n[20]);
    cam.image_width = image_width;
    cam.image_height = image_height;
    cam.validate();
    cameras.push_back(cam);
  }
  if (cameras.empty()) fail(ErrorKind::ParseError, path + ": no cameras");
  return cameras;
}

}  // namespace texrig

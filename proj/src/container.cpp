// TXF1 container reader/writer. Single block per field; multi-map files are
// sequences of length-prefixed section names each followed by a block.
#include "texrig/io.hpp"

#include <cstring>
#include <fstream>

namespace texrig {

namespace {

constexpr char kMagic[4] = {'T', 'X', 'F', '1'};

void write_block(std::ostream& out, const TexelGrid& grid, const ValidityMask& mask) {
  if (grid.width != mask.width || grid.height != mask.height)
    fail(ErrorKind::ShapeMismatch, "grid/mask resolution mismatch");
  out.write(kMagic, 4);
  const uint32_t dims[3] = {static_cast<uint32_t>(grid.width), static_cast<uint32_t>(grid.height),
                            static_cast<uint32_t>(grid.arity)};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(mask.states.data()),
            static_cast<std::streamsize>(mask.states.size()));
  std::vector<float> buf(grid.data.size());
  for (size_t k = 0; k < buf.size(); ++k) buf[k] = static_cast<float>(grid.data[k]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(sizeof(float) * buf.size()));
}

LoadedGrid read_block(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::ParseError, path + ": bad TXF1 magic");
  uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) fail(ErrorKind::ParseError, path + ": truncated TXF1 header");
  LoadedGrid out;
  out.grid = TexelGrid::zeros(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                              static_cast<int>(dims[2]));
  out.mask = ValidityMask::filled(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                                  TexelState::Invalid);
  in.read(reinterpret_cast<char*>(out.mask.states.data()),
          static_cast<std::streamsize>(out.mask.states.size()));
  std::vector<float> buf(out.grid.data.size());
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(sizeof(float) * buf.size()));
  if (!in) fail(ErrorKind::ParseError, path + ": truncated TXF1 payload");
  for (const auto s : out.mask.states)
    if (s > TexelState::Padded) fail(ErrorKind::ParseError, path + ": bad mask byte");
  for (size_t k = 0; k < buf.size(); ++k) {
    if (!std::isfinite(buf[k])) fail(ErrorKind::ParseError, path + ": non-finite texel value");
    out.grid.data[k] = buf[k];
  }
  return out;
}

void write_section_name(std::ostream& out, const std::string& name) {
  const uint32_t len = static_cast<uint32_t>(name.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

std::string read_section_name(std::istream& in, const std::string& path) {
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > 256) fail(ErrorKind::ParseError, path + ": bad section name");
  std::string name(len, '\0');
  in.read(name.data(), len);
  if (!in) fail(ErrorKind::ParseError, path + ": truncated section name");
  return name;
}

}  // namespace

void save_texel_grid(const TexelGrid& grid, const ValidityMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  write_block(out, grid, mask);
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path + "'");
}

LoadedGrid load_texel_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  return read_block(in, path);
}

void save_jacobian_field(const JacobianField& field, const std::string& path) {
  TexelGrid packed = TexelGrid::zeros(field.width(), field.height(), 12);
  for (size_t t = 0; t < packed.texel_count(); ++t) {
    for (int k = 0; k < 9; ++k) packed.data[t * 12 + k] = field.jacobians.data[t * 9 + k];
    for (int k = 0; k < 3; ++k) packed.data[t * 12 + 9 + k] = field.translations.data[t * 3 + k];
  }
  save_texel_grid(packed, field.mask, path);
}

JacobianField load_jacobian_field(const std::string& path) {
  LoadedGrid loaded = load_texel_grid(path);
  if (loaded.grid.arity != 12)
    fail(ErrorKind::ParseError, path + ": jacobian field requires arity 12");
  JacobianField field;
  field.mask = std::move(loaded.mask);
  field.jacobians = TexelGrid::zeros(loaded.grid.width, loaded.grid.height, 9);
  field.translations = TexelGrid::zeros(loaded.grid.width, loaded.grid.height, 3);
  for (size_t t = 0; t < loaded.grid.texel_count(); ++t) {
    for (int k = 0; k < 9; ++k) field.jacobians.data[t * 9 + k] = loaded.grid.data[t * 12 + k];
    for (int k = 0; k < 3; ++k)
      field.translations.data[t * 3 + k] = loaded.grid.data[t * 12 + 9 + k];
  }
  return field;
}

void save_attribute_maps(const LocalAttributeMaps& maps, const std::string& path) {
  maps.validate_shapes();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  const std::pair<const char*, const TexelGrid*> sections[5] = {
      {"position", &maps.position_raw}, {"rotation", &maps.rotation_raw},
      {"log_scale", &maps.log_scale_raw}, {"opacity", &maps.opacity_raw},
      {"color", &maps.color_raw}};
  for (const auto& [name, grid] : sections) {
    write_section_name(out, name);
    write_block(out, *grid, maps.mask);
  }
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path + "'");
}

LocalAttributeMaps load_attribute_maps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  LocalAttributeMaps maps;
  bool seen[5] = {false, false, false, false, false};
  for (int s = 0; s < 5; ++s) {
    const std::string name = read_section_name(in, path);
    LoadedGrid block = read_block(in, path);
    int idx = -1;
    if (name == "position") idx = 0;
    else if (name == "rotation") idx = 1;
    else if (name == "log_scale") idx = 2;
    else if (name == "opacity") idx = 3;
    else if (name == "color") idx = 4;
    else fail(ErrorKind::ParseError, path + ": unknown section '" + name + "'");
    if (seen[idx]) fail(ErrorKind::ParseError, path + ": duplicate section '" + name + "'");
    seen[idx] = true;
    switch (idx) {
      case 0: maps.position_raw = std::move(block.grid); break;
      case 1: maps.rotation_raw = std::move(block.grid); break;
      case 2: maps.log_scale_raw = std::move(block.grid); break;
      case 3: maps.opacity_raw = std::move(block.grid); break;
      case 4: maps.color_raw = std::move(block.grid); break;
    }
    maps.mask = std::move(block.mask);  // identical across sections
  }
  maps.validate_shapes();
  return maps;
}

void write_mask_png(const ValidityMask& mask, const std::string& path) {
  std::vector<uint8_t> gray(mask.states.size());
  for (size_t k = 0; k < gray.size(); ++k) {
    switch (mask.states[k]) {
      case TexelState::Valid: gray[k] = 255; break;
      case TexelState::Padded: gray[k] = 128; break;
      default: gray[k] = 0; break;
    }
  }
  write_png_gray(gray, mask.width, mask.height, path);
}

}  // namespace texrig

// Splatting point-cloud export/import in the de-facto PLY layout used by
// 3DGS viewers: x y z, nx ny nz (zero), f_dc_0..2, opacity (logit),
// scale_0..2 (log), rot_0..3 (quaternion, w first). Binary little-endian.
#include "texrig/gaussians.hpp"

#include <Eigen/Eigenvalues>

#include <cstring>
#include <fstream>
#include <sstream>

namespace texrig {

namespace {

struct EigenBasis {
  Vec3 log_scales;
  Vec4 quat;  // (w,x,y,z)
};

// Eigenvalues -> scales^2, eigenvectors -> rotation. Ties broken by sorting
// eigenvalues descending; handedness fixed by flipping the last axis.
EigenBasis decompose_covariance(const Mat3& cov, size_t index) {
  const Mat3 sym = 0.5 * (cov + cov.transpose());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-7 * std::max(1.0, sym.cwiseAbs().maxCoeff()))
    fail(ErrorKind::NonPSD, "covariance " + std::to_string(index) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(sym);
  const Vec3 evals_asc = es.eigenvalues();
  const double trace = std::max(sym.trace(), 0.0);
  if (evals_asc[0] < -1e-9 * std::max(trace, 1e-300))
    fail(ErrorKind::NonPSD, "covariance " + std::to_string(index) + " has negative eigenvalue " +
                                std::to_string(evals_asc[0]));
  Mat3 basis;
  Vec3 evals;
  for (int k = 0; k < 3; ++k) {  // descending
    evals[k] = evals_asc[2 - k];
    basis.col(k) = es.eigenvectors().col(2 - k);
  }
  if (basis.determinant() < 0.0) basis.col(2) = -basis.col(2);

  EigenBasis out;
  for (int k = 0; k < 3; ++k) out.log_scales[k] = 0.5 * std::log(std::max(evals[k], 1e-24));

  // rotation matrix -> quaternion, stable branch on the largest diagonal term
  const Mat3& r = basis;
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  double w, x, y, z;
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    w = 0.25 * s;
    x = (r(2, 1) - r(1, 2)) / s;
    y = (r(0, 2) - r(2, 0)) / s;
    z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    w = (r(2, 1) - r(1, 2)) / s;
    x = 0.25 * s;
    y = (r(0, 1) + r(1, 0)) / s;
    z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    w = (r(0, 2) - r(2, 0)) / s;
    x = (r(0, 1) + r(1, 0)) / s;
    y = 0.25 * s;
    z = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    w = (r(1, 0) - r(0, 1)) / s;
    x = (r(0, 2) + r(2, 0)) / s;
    y = (r(1, 2) + r(2, 1)) / s;
    z = 0.25 * s;
  }
  out.quat = Vec4(w, x, y, z).normalized();
  return out;
}

constexpr const char* kPropertyNames[] = {
    "x",       "y",       "z",       "nx",      "ny",      "nz",     "f_dc_0", "f_dc_1", "f_dc_2",
    "opacity", "scale_0", "scale_1", "scale_2", "rot_0",   "rot_1",  "rot_2",  "rot_3"};
constexpr int kPropertyCount = 17;

}  // namespace

void export_gaussians(const GlobalGaussianSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << set.size() << "\n";
  for (const char* name : kPropertyNames) out << "property float " << name << "\n";
  out << "end_header\n";

  std::vector<float> row(kPropertyCount);
  for (size_t g = 0; g < set.size(); ++g) {
    const EigenBasis basis = decompose_covariance(set.covariances[g], g);
    int k = 0;
    for (int c = 0; c < 3; ++c) row[k++] = static_cast<float>(set.positions[g][c]);
    for (int c = 0; c < 3; ++c) row[k++] = 0.0f;  // normals, unused
    for (int c = 0; c < 3; ++c)
      row[k++] = static_cast<float>((set.colors[g][c] - 0.5) / kSh0);
    row[k++] = static_cast<float>(logit(set.opacities[g]));
    for (int c = 0; c < 3; ++c) row[k++] = static_cast<float>(basis.log_scales[c]);
    for (int c = 0; c < 4; ++c) row[k++] = static_cast<float>(basis.quat[c]);
    out.write(reinterpret_cast<const char*>(row.data()), sizeof(float) * kPropertyCount);
  }
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path + "'");
}

GlobalGaussianSet import_gaussians(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");

  std::string line;
  size_t count = 0;
  std::vector<std::string> props;
  bool header_done = false;
  if (!std::getline(in, line) || line != "ply") fail(ErrorKind::ParseError, "not a PLY file");
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "end_header") {
      header_done = true;
      break;
    } else if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian")
        fail(ErrorKind::ParseError, "unsupported PLY format '" + fmt + "'");
    } else if (tok == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") fail(ErrorKind::ParseError, "unexpected PLY element '" + name + "'");
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      if (type != "float") fail(ErrorKind::ParseError, "unsupported PLY property type '" + type + "'");
      props.push_back(name);
    }
  }
  if (!header_done) fail(ErrorKind::ParseError, "PLY header not terminated");

  auto prop_index = [&](const std::string& name) {
    for (size_t k = 0; k < props.size(); ++k)
      if (props[k] == name) return static_cast<int>(k);
    fail(ErrorKind::ParseError, "PLY property '" + name + "' missing");
  };
  int idx[kPropertyCount];
  for (int k = 0; k < kPropertyCount; ++k) idx[k] = prop_index(kPropertyNames[k]);

  GlobalGaussianSet set;
  set.positions.resize(count);
  set.covariances.resize(count);
  set.colors.resize(count);
  set.opacities.resize(count);
  set.source_texels.assign(count, {-1, -1});

  std::vector<float> row(props.size());
  for (size_t g = 0; g < count; ++g) {
    in.read(reinterpret_cast<char*>(row.data()), sizeof(float) * row.size());
    if (!in) fail(ErrorKind::ParseError, "PLY payload truncated at vertex " + std::to_string(g));
    auto get = [&](int k) { return static_cast<double>(row[idx[k]]); };
    set.positions[g] = Vec3(get(0), get(1), get(2));
    for (int c = 0; c < 3; ++c) set.colors[g][c] = get(6 + c) * kSh0 + 0.5;
    set.opacities[g] = sigmoid(get(9));
    Vec3 scales;
    for (int c = 0; c < 3; ++c) scales[c] = std::exp(get(10 + c));
    const Vec4 quat(get(13), get(14), get(15), get(16));
    const Mat3 r = rotation_from_quaternion(quat);
    set.covariances[g] = r * scales.cwiseProduct(scales).asDiagonal() * r.transpose();
  }
  return set;
}

}  // namespace texrig

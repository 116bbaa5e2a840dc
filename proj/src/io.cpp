#include "wgi/io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/sha.h>

namespace wgi {

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw InputError("cannot open " + path + " for writing");
  }
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void tag(const char* t) { out_.write(t, 4); }
  void cplx_value(const cplx& z) {
    put(z.real());
    put(z.imag());
  }
  void close() {
    out_.close();
    if (!out_) throw InputError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw InputError("cannot open " + path);
  }
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw InputError(path_ + ": truncated file");
    return v;
  }
  void expect(const char* tag) {
    char buf[4];
    in_.read(buf, 4);
    if (!in_ || std::memcmp(buf, tag, 4) != 0) throw InputError(path_ + ": not a " + std::string(tag, 4) + " file");
    const auto v = get<std::uint32_t>();
    if (v != kVersion) throw InputError(path_ + ": unsupported version " + std::to_string(v));
  }
  cplx cplx_value() {
    const double re = get<double>();
    const double im = get<double>();
    return {re, im};
  }
  /// Guards allocations against corrupt counts.
  void require(std::uint64_t bytes) {
    const auto pos = in_.tellg();
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(pos);
    if (static_cast<std::uint64_t>(end - pos) < bytes) throw InputError(path_ + ": truncated file");
  }

 private:
  std::string path_;
  std::ifstream in_;
};

void put_grid(Writer& w, const VoxelGrid& g) {
  for (int a = 0; a < 3; ++a) w.put(g.origin()[a]);
  w.put(g.pitch_cross());
  w.put(g.pitch_range());
  for (int a = 0; a < 3; ++a) w.put(static_cast<std::int32_t>(g.count(a)));
}

VoxelGrid get_grid(Reader& r) {
  Vec3 o;
  for (int a = 0; a < 3; ++a) o[a] = r.get<double>();
  const double pc = r.get<double>();
  const double pr = r.get<double>();
  std::array<std::int32_t, 3> n{};
  for (auto& v : n) v = r.get<std::int32_t>();
  if (!(pc > 0.0) || !(pr > 0.0) || n[0] < 1 || n[1] < 1 || n[2] < 1) throw InputError("corrupt voxel grid header");
  Box b;
  b.min = o;
  b.max = o + Vec3((n[0] - 1) * pc, (n[1] - 1) * pc, (n[2] - 1) * pr);
  return VoxelGrid(b, pc, pr);
}

void put_layout(Writer& w, const std::vector<Vec2>& rx, const std::vector<int>& comps) {
  w.put(static_cast<std::uint32_t>(rx.size()));
  w.put(static_cast<std::uint32_t>(comps.size()));
  for (int c : comps) w.put(static_cast<std::uint32_t>(c));
  for (const auto& x : rx) {
    w.put(x.x());
    w.put(x.y());
  }
}

void get_layout(Reader& r, std::vector<Vec2>& rx, std::vector<int>& comps) {
  const auto nr = r.get<std::uint32_t>();
  const auto nc = r.get<std::uint32_t>();
  r.require(std::uint64_t(nc) * 4 + std::uint64_t(nr) * 16);
  comps.resize(nc);
  for (auto& c : comps) {
    c = static_cast<int>(r.get<std::uint32_t>());
    if (c < 1 || c > 3) throw InputError("corrupt component id");
  }
  rx.resize(nr);
  for (auto& x : rx) {
    x.x() = r.get<double>();
    x.y() = r.get<double>();
  }
}

SensingMatrix read_matrix_impl(const std::string& path, bool body) {
  Reader r(path);
  r.expect("WGIM");
  SensingMatrix F;
  F.scenario_hash = r.get<std::uint64_t>();
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  F.voxel_volume = r.get<double>();
  F.mode_budget = r.get<std::int32_t>();
  const auto p = r.get<std::uint32_t>();
  const auto v = r.get<std::uint32_t>();
  if (p > 2 || v > 1) throw InputError(path + ": corrupt matrix header");
  F.param = static_cast<Parameterization>(p);
  F.variant = static_cast<Variant>(v);
  F.grid = get_grid(r);
  get_layout(r, F.receivers, F.components);
  if (rows != F.receivers.size() * F.components.size() ||
      cols != F.grid.size() * static_cast<std::size_t>(channel_count(F.param)))
    throw InputError(path + ": matrix shape disagrees with its header");
  if (!body) return F;
  r.require(rows * cols * 16);
  F.F.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < F.F.rows(); ++i)
    for (Eigen::Index j = 0; j < F.F.cols(); ++j) F.F(i, j) = r.cplx_value();
  return F;
}

}  // namespace

void write_data(const DataVector& d, const std::string& path) {
  if (static_cast<std::size_t>(d.values.size()) != d.receivers.size() * d.components.size())
    throw InputError("data vector length does not match its layout");
  Writer w(path);
  w.tag("WGID");
  w.put(kVersion);
  put_layout(w, d.receivers, d.components);
  w.put(static_cast<std::uint8_t>(d.noise ? 1 : 0));
  if (d.noise) {
    w.put(d.noise->snr_db);
    w.put(d.noise->seed);
    w.put(d.noise->sigma);
  }
  for (Eigen::Index i = 0; i < d.values.size(); ++i) w.cplx_value(d.values[i]);
  w.close();
}

DataVector read_data(const std::string& path) {
  Reader r(path);
  r.expect("WGID");
  DataVector d;
  get_layout(r, d.receivers, d.components);
  if (r.get<std::uint8_t>()) {
    NoiseRecord n;
    n.snr_db = r.get<double>();
    n.seed = r.get<std::uint64_t>();
    n.sigma = r.get<double>();
    d.noise = n;
  }
  const std::uint64_t n = d.receivers.size() * d.components.size();
  r.require(n * 16);
  d.values.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.values.size(); ++i) d.values[i] = r.cplx_value();
  return d;
}

void write_data_csv(const DataVector& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << std::setprecision(17) << "receiver,x1,x2,component,re,im\n";
  const std::size_t nq = d.components.size();
  for (std::size_t r = 0; r < d.receivers.size(); ++r)
    for (std::size_t q = 0; q < nq; ++q) {
      const cplx z = d.values[static_cast<Eigen::Index>(r * nq + q)];
      out << r << ',' << d.receivers[r].x() << ',' << d.receivers[r].y() << ',' << d.components[q] << ','
          << z.real() << ',' << z.imag() << '\n';
    }
}

void write_matrix(const SensingMatrix& F, const std::string& path) {
  Writer w(path);
  w.tag("WGIM");
  w.put(kVersion);
  w.put(F.scenario_hash);
  w.put(static_cast<std::uint64_t>(F.F.rows()));
  w.put(static_cast<std::uint64_t>(F.F.cols()));
  w.put(F.voxel_volume);
  w.put(static_cast<std::int32_t>(F.mode_budget));
  w.put(static_cast<std::uint32_t>(F.param));
  w.put(static_cast<std::uint32_t>(F.variant));
  put_grid(w, F.grid);
  put_layout(w, F.receivers, F.components);
  for (Eigen::Index i = 0; i < F.F.rows(); ++i)
    for (Eigen::Index j = 0; j < F.F.cols(); ++j) w.cplx_value(F.F(i, j));
  w.close();
}

SensingMatrix read_matrix(const std::string& path) { return read_matrix_impl(path, true); }
SensingMatrix read_matrix_header(const std::string& path) { return read_matrix_impl(path, false); }

void write_image(const ImageVolume& img, const std::string& path) {
  Writer w(path);
  w.tag("WGIV");
  w.put(kVersion);
  put_grid(w, img.grid);
  w.put(static_cast<std::uint32_t>(img.param));
  w.put(static_cast<std::uint32_t>(img.values.cols()));
  for (Eigen::Index v = 0; v < img.values.rows(); ++v)
    for (Eigen::Index c = 0; c < img.values.cols(); ++c) w.cplx_value(img.values(v, c));
  w.close();
}

ImageVolume read_image(const std::string& path) {
  Reader r(path);
  r.expect("WGIV");
  ImageVolume img;
  img.grid = get_grid(r);
  const auto p = r.get<std::uint32_t>();
  const auto ch = r.get<std::uint32_t>();
  if (p > 2 || ch != static_cast<std::uint32_t>(channel_count(static_cast<Parameterization>(p))))
    throw InputError(path + ": corrupt image header");
  img.param = static_cast<Parameterization>(p);
  r.require(std::uint64_t(img.grid.size()) * ch * 16);
  img.values.resize(static_cast<Eigen::Index>(img.grid.size()), ch);
  for (Eigen::Index v = 0; v < img.values.rows(); ++v)
    for (Eigen::Index c = 0; c < img.values.cols(); ++c) img.values(v, c) = r.cplx_value();
  return img;
}

namespace {

const char* axis_name(int a) { return a == 0 ? "x1" : (a == 1 ? "x2" : "x3"); }

}  // namespace

void write_slice_csv(const Slice& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  const int a = s.axis == 0 ? 1 : 0;
  const int b = s.axis == 2 ? 1 : 2;
  out << std::setprecision(12) << axis_name(a) << ',' << axis_name(b) << ",value\n";
  for (std::size_t i = 0; i < s.u.size(); ++i)
    for (std::size_t j = 0; j < s.v.size(); ++j)
      out << s.u[i] << ',' << s.v[j] << ',' << s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
          << '\n';
}

void write_slice_pgm(const Slice& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  const auto w = s.values.rows(), h = s.values.cols();
  const double mx = s.values.size() ? s.values.maxCoeff() : 0.0;
  out << "P5\n" << w << ' ' << h << "\n255\n";
  for (Eigen::Index j = h - 1; j >= 0; --j)
    for (Eigen::Index i = 0; i < w; ++i) {
      const double t = mx > 0.0 ? s.values(i, j) / mx : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)))));
    }
  if (!out) throw InputError("write failed: " + path);
}

std::string git_blob_sha1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string body = buf.str();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
  std::ostringstream hex;
  for (unsigned char c : md) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return hex.str();
}

}  // namespace wgi

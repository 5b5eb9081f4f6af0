#include "cubevar/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace cubevar {

namespace {

constexpr char kMagic[8] = {'C', 'U', 'B', 'E', 'V', 'A', 'R', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::string& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  std::uint64_t bytes(int n) {
    if (pos_ + static_cast<std::size_t>(n) > data_.size()) throw FormatError("truncated grid file");
    std::uint64_t v = 0;
    for (int b = 0; b < n; ++b)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Lines of "key rest..." (blank lines and '#' comments skipped).
std::multimap<std::string, std::string> read_manifest(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::multimap<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    kv.emplace(line.substr(0, sp), sp == std::string::npos ? "" : line.substr(sp + 1));
  }
  return kv;
}

const std::string& need(const std::multimap<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("missing key '" + key + "'");
  return it->second;
}

void expect_kind(const std::multimap<std::string, std::string>& kv, const std::string& kind) {
  if (need(kv, "kind") != kind) throw FormatError("expected a " + kind + " manifest");
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::istringstream in(s);
  std::vector<T> out;
  T v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw FormatError("malformed list");
  return out;
}

double parse_double(const std::string& s) {
  auto v = parse_list<double>(s);
  if (v.size() != 1) throw FormatError("expected one number, got '" + s + "'");
  return v[0];
}

fs::path sibling(const fs::path& manifest, const std::string& suffix) {
  return manifest.parent_path() / (manifest.stem().string() + suffix);
}

fs::path resolve(const fs::path& manifest, const std::string& name) { return manifest.parent_path() / name; }

}  // namespace

void store_grid(const GridFunction& f, const fs::path& path) {
  const GridSpec& s = f.spec();
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(s.d));
  for (int l = 0; l < s.d; ++l) put_u32(out, static_cast<std::uint32_t>(s.dims[l]));
  put_f64(out, s.h);
  for (int l = 0; l < s.d; ++l) put_f64(out, s.origin[l]);
  for (double v : f.values()) put_f64(out, v);
  write_file(path, out);
}

GridFunction load_grid(const fs::path& path) {
  std::string data = read_file(path);
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("bad magic in " + path.string());
  Reader r(data.substr(sizeof kMagic));
  GridSpec s;
  const std::uint32_t d = r.u32();
  if (d < 1 || d > static_cast<std::uint32_t>(kMaxDim)) throw FormatError("bad dimension in grid file");
  s.d = static_cast<int>(d);
  for (int l = 0; l < s.d; ++l) s.dims[l] = r.u32();
  s.h = r.f64();
  for (int l = 0; l < s.d; ++l) s.origin[l] = r.f64();
  if (r.remaining() != s.size() * 8) throw FormatError("payload length does not match dims");
  std::vector<double> v(s.size());
  for (double& x : v) x = r.f64();
  try {
    return GridFunction(s, std::move(v));
  } catch (const Error& e) {
    throw FormatError(std::string("invalid grid: ") + e.what());
  }
}

void store_system(const FiniteSystem& sys, const fs::path& path) {
  std::string out = "size " + std::to_string(sys.size()) + "\nd " + std::to_string(sys.d()) + "\nweights";
  for (double w : sys.weights()) out += ' ' + fmt(w);
  out += '\n';
  for (int l = 0; l < sys.d(); ++l) {
    out += "map" + std::to_string(l);
    for (auto y : sys.maps()[l]) out += ' ' + std::to_string(y);
    out += '\n';
  }
  write_file(path, out);
}

FiniteSystem load_system(const fs::path& path) {
  auto kv = read_manifest(path);
  const auto size = static_cast<std::size_t>(parse_double(need(kv, "size")));
  const int d = static_cast<int>(parse_double(need(kv, "d")));
  auto weights = parse_list<double>(need(kv, "weights"));
  std::vector<std::vector<std::uint32_t>> maps;
  for (int l = 0; l < d; ++l) maps.push_back(parse_list<std::uint32_t>(need(kv, "map" + std::to_string(l))));
  if (weights.size() != size) throw FormatError("weights length does not match size");
  for (const auto& m : maps)
    if (m.size() != size) throw FormatError("map length does not match size");
  return make_finite_system(size, std::move(weights), std::move(maps));
}

void store_system_tuple(const SystemTuple& f, const fs::path& path) {
  std::string out = "d " + std::to_string(f.d) + '\n';
  for (std::size_t e = 0; e < f.entries.size(); ++e) {
    out += 'f' + std::to_string(e + 1);
    for (double v : f.entries[e]) out += ' ' + fmt(v);
    out += '\n';
  }
  write_file(path, out);
}

SystemTuple load_system_tuple(const fs::path& path) {
  auto kv = read_manifest(path);
  SystemTuple f;
  f.d = static_cast<int>(parse_double(need(kv, "d")));
  if (f.d < 1 || f.d > kMaxDim) throw FormatError("bad dimension");
  for (std::size_t b = 1; b <= tuple_size(f.d); ++b) f.entries.push_back(parse_list<double>(need(kv, 'f' + std::to_string(b))));
  return f;
}

void store_tuple(const FunctionTuple& F, const fs::path& manifest) {
  std::string out = "kind tuple\nd " + std::to_string(F.d()) + '\n';
  for (std::size_t b = 1; b <= tuple_size(F.d()); ++b) {
    const fs::path file = sibling(manifest, "_j" + std::to_string(b) + ".grid");
    store_grid(F.entry(static_cast<unsigned>(b)), file);
    out += "entry " + std::to_string(b) + ' ' + file.filename().string() + '\n';
  }
  write_file(manifest, out);
}

FunctionTuple load_tuple(const fs::path& manifest) {
  auto kv = read_manifest(manifest);
  expect_kind(kv, "tuple");
  const int d = static_cast<int>(parse_double(need(kv, "d")));
  if (d < 1 || d > kMaxDim) throw FormatError("bad dimension");
  std::map<unsigned, std::string> files;
  auto [lo, hi] = kv.equal_range("entry");
  for (auto it = lo; it != hi; ++it) {
    std::istringstream in(it->second);
    unsigned bits;
    std::string name;
    if (!(in >> bits >> name)) throw FormatError("malformed entry line");
    files[bits] = name;
  }
  if (files.size() != tuple_size(d)) throw FormatError("tuple manifest needs 2^d-1 entries");
  std::vector<GridFunction> entries;
  for (const auto& [bits, name] : files) {
    if (bits != entries.size() + 1) throw FormatError("tuple entries must be 1 .. 2^d-1");
    entries.push_back(load_grid(resolve(manifest, name)));
  }
  try {
    return FunctionTuple(d, std::move(entries));
  } catch (const Error& e) {
    throw FormatError(std::string("invalid tuple: ") + e.what());
  }
}

void store_sequence(const AverageSequence& seq, const fs::path& manifest) {
  std::string out = "kind sequence\n";
  for (std::size_t a = 0; a < seq.frames.size(); ++a) {
    const fs::path file = sibling(manifest, "_n" + std::to_string(seq.indices[a]) + ".grid");
    store_grid(seq.frames[a], file);
    out += "frame " + std::to_string(seq.indices[a]) + ' ' + file.filename().string() + '\n';
  }
  write_file(manifest, out);
}

AverageSequence load_sequence(const fs::path& manifest) {
  std::istringstream in(read_file(manifest));
  AverageSequence seq;
  std::string line;
  bool kind = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "kind") {
      std::string k;
      ls >> k;
      if (k != "sequence") throw FormatError("expected a sequence manifest");
      kind = true;
    } else if (key == "frame") {
      long n;
      std::string name;
      if (!(ls >> n >> name)) throw FormatError("malformed frame line");
      if (!seq.indices.empty() && n <= seq.indices.back()) throw FormatError("indices must increase");
      seq.indices.push_back(n);
      seq.frames.push_back(load_grid(resolve(manifest, name)));
    }
  }
  if (!kind) throw FormatError("missing key 'kind'");
  return seq;
}

void store_profile(const Profile& p, const fs::path& manifest) {
  const fs::path file = sibling(manifest, "_samples.grid");
  store_grid(p.samples(), file);
  std::string out = "kind profile\nprofile " + std::string(to_string(p.kind())) + "\ndelta " + fmt(p.delta()) +
                    "\nresolution " + fmt(p.resolution()) + "\nsamples " + file.filename().string() + '\n';
  write_file(manifest, out);
}

Profile load_profile(const fs::path& manifest) {
  auto kv = read_manifest(manifest);
  expect_kind(kv, "profile");
  const std::string& name = need(kv, "profile");
  ProfileKind kind;
  if (name == to_string(ProfileKind::indicator)) kind = ProfileKind::indicator;
  else if (name == to_string(ProfileKind::smoothed_indicator)) kind = ProfileKind::smoothed_indicator;
  else if (name == to_string(ProfileKind::derived_psi)) kind = ProfileKind::derived_psi;
  else if (name == to_string(ProfileKind::derived_theta)) kind = ProfileKind::derived_theta;
  else throw FormatError("unknown profile kind '" + name + "'");
  return restore_profile(kind, parse_double(need(kv, "delta")), parse_double(need(kv, "resolution")));
}

namespace {

const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::k1: return "k1";
    case KernelKind::k2: return "k2";
    case KernelKind::custom: return "custom";
  }
  return "custom";
}

}  // namespace

void store_kernel(const Kernel& K, const fs::path& manifest) {
  const fs::path file = sibling(manifest, "_kernel.grid");
  store_grid(K.grid, file);
  const auto& p = K.provenance;
  std::string out = "kind kernel\nprovenance " + std::string(kernel_kind_name(p.kind)) + "\nsigns";
  for (double e : p.signs) out += ' ' + fmt(e);
  out += "\nk_range " + std::to_string(p.k_lo) + ' ' + std::to_string(p.k_hi) + "\nscale_set";
  for (int j : p.scale_set) out += ' ' + std::to_string(j);
  out += "\nr " + fmt(p.r) + "\ndelta " + fmt(p.delta) + "\ngrid " + file.filename().string() + '\n';
  write_file(manifest, out);
}

Kernel load_kernel(const fs::path& manifest) {
  auto kv = read_manifest(manifest);
  expect_kind(kv, "kernel");
  Kernel K{load_grid(resolve(manifest, need(kv, "grid"))), {}};
  auto& p = K.provenance;
  const std::string& kind = need(kv, "provenance");
  if (kind == "k1") p.kind = KernelKind::k1;
  else if (kind == "k2") p.kind = KernelKind::k2;
  else if (kind == "custom") p.kind = KernelKind::custom;
  else throw FormatError("unknown kernel provenance '" + kind + "'");
  p.signs = parse_list<double>(need(kv, "signs"));
  auto range = parse_list<int>(need(kv, "k_range"));
  if (range.size() != 2) throw FormatError("k_range needs two integers");
  p.k_lo = range[0];
  p.k_hi = range[1];
  p.scale_set = parse_list<int>(need(kv, "scale_set"));
  p.r = parse_double(need(kv, "r"));
  p.delta = parse_double(need(kv, "delta"));
  return K;
}

}  // namespace cubevar

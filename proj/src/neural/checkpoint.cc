#include "replay/neural/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "replay/errors.h"

namespace replay::neural {
namespace {

constexpr char kMagic[8] = {'R', 'P', 'L', 'Y', 'C', 'K', 'P', 'T'};

template <typename T>
void PutLe(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(static_cast<double>(v));
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = (bits >> (8 * i)) & 0xFF;
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  Reader(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  void Bytes(char* dst, std::size_t n) {
    if (!in_.read(dst, static_cast<std::streamsize>(n))) Fail("truncated file");
  }
  template <typename T>
  T Le() {
    unsigned char bytes[sizeof(T)];
    Bytes(reinterpret_cast<char*>(bytes), sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }
  std::string String() {
    const auto n = Le<std::uint32_t>();
    if (n > (1u << 20)) Fail("implausible string length");
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }
  [[noreturn]] void Fail(const std::string& what) {
    throw ParseError(source_, 0, what);
  }

 private:
  std::istream& in_;
  std::string source_;
};

void PutString(std::ostream& out, const std::string& s) {
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

void SaveCheckpoint(const Network& net, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutString(out, net.spec().Describe());
  PutLe<std::uint32_t>(out,
                       static_cast<std::uint32_t>(net.parameters().size()));
  for (const Parameter& p : net.parameters()) {
    PutString(out, p.name);
    PutLe<std::uint64_t>(out, p.value.size());
    for (double v : p.value) PutLe<double>(out, v);
  }
  if (!out) throw Error("checkpoint write failed");
}

void SaveCheckpoint(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  SaveCheckpoint(net, out);
}

Network LoadCheckpoint(std::istream& in, const std::string& source) {
  Reader r(in, source);
  char magic[sizeof(kMagic)];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    r.Fail("not a checkpoint file");
  }
  const auto version = r.Le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    r.Fail("unsupported checkpoint version " + std::to_string(version));
  }
  NetworkSpec spec;
  try {
    spec = NetworkSpec::Parse(r.String());
  } catch (const ConfigError& e) {
    r.Fail(e.what());
  }
  Network net(spec, 0);
  const auto count = r.Le<std::uint32_t>();
  if (count != net.parameters().size()) r.Fail("parameter count mismatch");
  for (Parameter& p : net.parameters()) {
    if (r.String() != p.name) r.Fail("unexpected parameter " + p.name);
    if (r.Le<std::uint64_t>() != p.value.size()) {
      r.Fail("size mismatch for " + p.name);
    }
    for (double& v : p.value) v = r.Le<double>();
  }
  return net;
}

Network LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return LoadCheckpoint(in, path.string());
}

}  // namespace replay::neural

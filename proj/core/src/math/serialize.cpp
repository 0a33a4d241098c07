#include "csac/math/serialize.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "csac/errors.hpp"

namespace csac::math {

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("unexpected end of data");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

// Upper bound on a single tensor dimension read from disk; rejects garbage before allocating.
constexpr std::uint64_t kMaxDim = 1ULL << 28;

}  // namespace

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
void BinaryWriter::u32(std::uint32_t v) { put_le(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(out_, v); }
void BinaryWriter::f64(double v) { put_le(out_, std::bit_cast<std::uint64_t>(v)); }
void BinaryWriter::bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s);
}

std::uint8_t BinaryReader::u8() {
  const int c = in_.get();
  if (c == std::char_traits<char>::eof()) throw FormatError("unexpected end of data");
  return static_cast<std::uint8_t>(c);
}
std::uint32_t BinaryReader::u32() { return get_le<std::uint32_t>(in_); }
std::uint64_t BinaryReader::u64() { return get_le<std::uint64_t>(in_); }
double BinaryReader::f64() { return std::bit_cast<double>(get_le<std::uint64_t>(in_)); }
std::string BinaryReader::bytes(std::size_t n) {
  std::string s(n, '\0');
  if (!in_.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError("unexpected end of data");
  return s;
}
std::string BinaryReader::str() {
  const auto n = u32();
  if (n > kMaxDim) throw FormatError("string length out of range");
  return bytes(n);
}

void write_header(BinaryWriter& w) {
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
}

void read_header(BinaryReader& r) {
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) throw FormatError("bad magic, not a CSAC file");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
}

void write_tensor(BinaryWriter& w, const RealTensor& t) {
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) w.u64(d);
  for (double v : t.values()) w.f64(v);
}

RealTensor read_tensor(BinaryReader& r) {
  const auto rank = r.u32();
  if (rank > 2) throw FormatError("tensor rank " + std::to_string(rank) + " unsupported");
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) {
    const auto v = r.u64();
    if (v > kMaxDim) throw FormatError("tensor dimension out of range");
    d = static_cast<std::size_t>(v);
  }
  std::vector<double> values(shape_product(shape));
  for (auto& v : values) v = r.f64();
  return RealTensor(std::move(shape), std::move(values));
}

void write_mlp(BinaryWriter& w, const Mlp& net) {
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (auto width : net.widths()) w.u32(static_cast<std::uint32_t>(width));
  w.u8(static_cast<std::uint8_t>(net.activation()));
  for (const auto& layer : net.layers()) {
    write_tensor(w, layer.weight);
    write_tensor(w, layer.bias);
  }
}

Mlp read_mlp(BinaryReader& r) {
  const auto layer_count = r.u32();
  if (layer_count == 0 || layer_count > 1024) throw FormatError("implausible layer count");
  std::vector<std::size_t> widths(layer_count + 1);
  for (auto& w : widths) w = r.u32();
  const auto act = r.u8();
  if (act > static_cast<std::uint8_t>(Activation::Relu)) throw FormatError("unknown activation tag");
  Mlp net(widths, static_cast<Activation>(act));
  for (auto& layer : net.layers()) {
    RealTensor w = read_tensor(r);
    RealTensor b = read_tensor(r);
    if (!w.same_shape(layer.weight) || !b.same_shape(layer.bias)) {
      throw FormatError("layer tensor shape disagrees with declared widths");
    }
    layer.weight = std::move(w);
    layer.bias = std::move(b);
  }
  return net;
}

void write_adam(BinaryWriter& w, const AdamState& s) {
  const auto& c = s.config();
  w.f64(c.learning_rate);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
  w.u64(s.step_count());
  w.u32(static_cast<std::uint32_t>(s.first_moments().size()));
  for (std::size_t i = 0; i < s.first_moments().size(); ++i) {
    write_tensor(w, s.first_moments()[i]);
    write_tensor(w, s.second_moments()[i]);
  }
}

AdamState read_adam(BinaryReader& r) {
  AdamConfig c;
  c.learning_rate = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.epsilon = r.f64();
  const auto steps = r.u64();
  const auto count = r.u32();
  if (count > 4096) throw FormatError("implausible Adam parameter count");
  std::vector<RealTensor> m, v;
  for (std::uint32_t i = 0; i < count; ++i) {
    m.push_back(read_tensor(r));
    v.push_back(read_tensor(r));
  }
  AdamState s;
  s.restore(c, steps, std::move(m), std::move(v));
  return s;
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  BinaryWriter w(out);
  write_header(w);
  write_mlp(w, net);
  if (!out) throw FormatError("write failed: " + path.string());
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  BinaryReader r(in);
  read_header(r);
  return read_mlp(r);
}

}  // namespace csac::math

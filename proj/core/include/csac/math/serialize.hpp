#pragma once

// Little-endian checkpoint layout.
//
//   file    := "CSAC" u32:version payload
//   mlp     := u32:layer_count u32:width[layer_count + 1] u8:activation
//              tensor(W_0) tensor(b_0) ... tensor(W_{n-1}) tensor(b_{n-1})
//   tensor  := u32:rank u64:dim[rank] f64:value[prod(dim)]
//   adam    := f64:lr f64:beta1 f64:beta2 f64:eps u64:steps u32:count
//              tensor(m_0) tensor(v_0) ... tensor(m_{count-1}) tensor(v_{count-1})
//
// Doubles are written as their IEEE-754 bit pattern so that round trips are exact.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "csac/math/adam.hpp"
#include "csac/math/mlp.hpp"
#include "csac/math/tensor.hpp"

namespace csac::math {

inline constexpr std::string_view kCheckpointMagic = "CSAC";
inline constexpr std::uint32_t kCheckpointVersion = 1;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view s);
  void str(std::string_view s);  // u32 length + bytes

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);
  std::string str();

 private:
  std::istream& in_;
};

void write_header(BinaryWriter& w);
/// Throws FormatError on wrong magic or unsupported version.
void read_header(BinaryReader& r);

void write_tensor(BinaryWriter& w, const RealTensor& t);
RealTensor read_tensor(BinaryReader& r);

void write_mlp(BinaryWriter& w, const Mlp& net);
Mlp read_mlp(BinaryReader& r);

void write_adam(BinaryWriter& w, const AdamState& s);
AdamState read_adam(BinaryReader& r);

void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace csac::math

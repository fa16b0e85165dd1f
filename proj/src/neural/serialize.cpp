#include "fides/neural/serialize.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

#include "fides/errors.hpp"

namespace fides::nn {
namespace {

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw ConfigError("snapshot truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const Network& net) {
  const auto& sizes = net.layer_sizes();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  const Eigen::VectorXd theta = net.parameters();
  for (Eigen::Index i = 0; i < theta.size(); ++i) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(theta[i]));
}

Network read_snapshot(std::istream& in) {
  const auto layers = get_le<std::uint32_t>(in);
  if (layers < 2 || layers > 4096) throw ConfigError("snapshot has an implausible layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < layers; ++i) sizes.push_back(static_cast<int>(get_le<std::uint32_t>(in)));
  Network net(sizes);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(net.parameter_count()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = std::bit_cast<double>(get_le<std::uint64_t>(in));
  net.set_parameters(theta);
  return net;
}

void save_snapshot(const std::string& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_snapshot(out, net);
}

Network load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_snapshot(in);
}

}  // namespace fides::nn

#pragma once

// Robust-MLE instance files.
//
// Text form regenerates the data from a seed:
//     d = 30
//     n = 100
//     c = -5
//     seed = 7
//
// Binary form embeds the data:
//     "RMLEINST"  8-byte magic
//     d, n        int64 little-endian
//     c           float64 little-endian
//     A           n*d float64 little-endian, row-major

#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "ragda/error.hpp"
#include "ragda/format.hpp"
#include "ragda/problems.hpp"
#include "ragda/serialize.hpp"

namespace ragda {

struct InstanceSeed {
  Index d = 30;
  Index n = 100;
  double c = -5.0;
  std::uint64_t seed = 0;
};

inline constexpr char kInstanceMagic[8] = {'R', 'M', 'L', 'E', 'I', 'N', 'S', 'T'};

inline void write_instance_text(std::ostream& out, const InstanceSeed& s) {
  out << "d = " << s.d << "\nn = " << s.n << "\nc = " << format_double(s.c) << "\nseed = " << s.seed
      << "\n";
}

inline InstanceSeed read_instance_text(std::istream& in) {
  InstanceSeed s;
  const auto kv = parse_key_values(in, "instance");
  for (const auto& [key, entry] : kv) {
    if (key == "d") s.d = parse_int(entry);
    else if (key == "n") s.n = parse_int(entry);
    else if (key == "c") s.c = parse_real(entry);
    else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_int(entry));
    else fail(ErrorCode::ConfigError, entry.where() + ": unknown instance key '" + key + "'");
  }
  return s;
}

inline RobustMleProblem instantiate(const InstanceSeed& s) {
  return generate_gaussian_instance(s.d, s.n, s.c, s.seed);
}

inline void write_instance_binary(std::ostream& out, const RobustMleProblem& p) {
  out.write(kInstanceMagic, 8);
  auto put_i64 = [&](std::int64_t v) {
    auto bits = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xffu));
  };
  put_i64(p.dim());
  put_i64(p.samples());
  detail::write_f64_le(out, Eigen::VectorXd::Constant(1, p.reg()));
  const Eigen::MatrixXd row_major_t = p.data().transpose();  // column-major of A^T == row-major of A
  detail::write_f64_le(out, Eigen::Map<const Eigen::VectorXd>(row_major_t.data(), row_major_t.size()));
  if (!out) fail(ErrorCode::IoError, "instance write failed");
}

inline RobustMleProblem read_instance_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::string(magic, 8) != std::string(kInstanceMagic, 8))
    fail(ErrorCode::IoError, "not a robust-mle instance file (bad magic)");
  auto get_i64 = [&]() {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      const int ch = in.get();
      if (ch == std::char_traits<char>::eof()) fail(ErrorCode::IoError, "truncated instance header");
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * b);
    }
    return static_cast<std::int64_t>(bits);
  };
  const std::int64_t d = get_i64();
  const std::int64_t n = get_i64();
  if (d < 1 || n < 1) fail(ErrorCode::IoError, "instance header has non-positive dimensions");
  const double c = detail::read_f64_le(in, 1)[0];
  const Eigen::VectorXd flat = detail::read_f64_le(in, d * n);
  Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(flat.data(), d, n).transpose();
  return RobustMleProblem(std::move(a), c);
}

}  // namespace ragda

#pragma once

// Point/tangent files: one JSON header line, then the flat storage as
// little-endian float64.
//
//   {"kind":"sphere","dims":[31],"radius":1.0,"count":31}\n<31 * 8 bytes>
//
// Product specs carry their factors under "factors".

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "ragda/manifold.hpp"

namespace ragda {

inline nlohmann::json spec_to_json(const ManifoldSpec& spec) {
  nlohmann::json j;
  switch (spec.kind()) {
    case ManifoldKind::Euclidean:
      j["kind"] = "euclidean";
      j["dims"] = {spec.rows()};
      break;
    case ManifoldKind::Sphere:
      j["kind"] = "sphere";
      j["dims"] = {spec.rows()};
      j["radius"] = spec.radius();
      break;
    case ManifoldKind::Stiefel:
      j["kind"] = "stiefel";
      j["dims"] = {spec.rows(), spec.cols()};
      break;
    case ManifoldKind::Spd:
      j["kind"] = "spd";
      j["dims"] = {spec.rows()};
      break;
    case ManifoldKind::Product: {
      j["kind"] = "product";
      j["dims"] = nlohmann::json::array();
      auto factors = nlohmann::json::array();
      for (const auto& f : spec.factors()) factors.push_back(spec_to_json(f));
      j["factors"] = factors;
      break;
    }
  }
  return j;
}

inline ManifoldSpec spec_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const auto& dims = j.at("dims");
    if (kind == "euclidean") return ManifoldSpec::euclidean(dims.at(0).get<Index>());
    if (kind == "sphere")
      return ManifoldSpec::sphere(dims.at(0).get<Index>(), j.value("radius", 1.0));
    if (kind == "stiefel")
      return ManifoldSpec::stiefel(dims.at(0).get<Index>(), dims.at(1).get<Index>());
    if (kind == "spd") return ManifoldSpec::spd(dims.at(0).get<Index>());
    if (kind == "product") {
      std::vector<ManifoldSpec> factors;
      for (const auto& f : j.at("factors")) factors.push_back(spec_from_json(f));
      return ManifoldSpec::product(std::move(factors));
    }
    fail(ErrorCode::IoError, "unknown manifold kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, std::string("malformed manifold header: ") + e.what());
  }
}

namespace detail {

inline void write_f64_le(std::ostream& out, const Eigen::VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(v[i]);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

inline Eigen::VectorXd read_f64_le(std::istream& in, Index count) {
  Eigen::VectorXd v(count);
  for (Index i = 0; i < count; ++i) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8))
      fail(ErrorCode::IoError, "truncated float64 payload");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v[i] = std::bit_cast<double>(bits);
  }
  return v;
}

}  // namespace detail

inline void write_array(std::ostream& out, const ManifoldSpec& spec, const Eigen::VectorXd& data) {
  detail::require_size(spec, data, "array");
  auto header = spec_to_json(spec);
  header["count"] = data.size();
  out << header.dump() << '\n';
  detail::write_f64_le(out, data);
  if (!out) fail(ErrorCode::IoError, "write failed");
}

struct ArrayRecord {
  ManifoldSpec spec;
  Eigen::VectorXd data;
};

inline ArrayRecord read_array(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, "missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, std::string("header is not JSON: ") + e.what());
  }
  ManifoldSpec spec = spec_from_json(header);
  const Index count = header.value("count", spec.storage_size());
  if (count != spec.storage_size())
    fail(ErrorCode::IoError, "payload count does not match the manifold storage size");
  return {std::move(spec), detail::read_f64_le(in, count)};
}

inline void write_point(std::ostream& out, const ManifoldSpec& spec, const Point& x) {
  write_array(out, spec, x.data);
}

inline Point read_point(std::istream& in, const ManifoldSpec& expected) {
  auto rec = read_array(in);
  if (!(rec.spec == expected)) fail(ErrorCode::IoError, "point file holds " + rec.spec.name());
  return {std::move(rec.data)};
}

}  // namespace ragda

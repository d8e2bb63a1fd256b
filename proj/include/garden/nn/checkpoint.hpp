#pragma once
// Text checkpoint container. Layout:
//
//   garden-checkpoint 1
//   sidecar <single-line JSON>
//   adam_steps <t>
//   tensors <count>
//   tensor <name> <rows> <cols>
//   value <rows*cols hex floats>
//   first_moment <...>
//   second_moment <...>
//   (repeated per tensor)
//
// Floats are written in C99 hex notation so a load reproduces every bit.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "garden/error.hpp"
#include "garden/nn/parameters.hpp"

namespace garden::nn {

struct Checkpoint {
  ParameterSet params;
  nlohmann::json sidecar;
};

namespace detail {

inline void write_hex_row(std::ostream& os, const char* label, const std::vector<double>& v) {
  os << label;
  char buf[64];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, " %a", x);
    os << buf;
  }
  os << '\n';
}

inline std::vector<double> read_hex_row(std::istream& is, const std::string& label,
                                        std::size_t count, const std::string& path,
                                        std::size_t& lineno) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path, lineno, "unexpected end of checkpoint");
  ++lineno;
  std::istringstream ls(line);
  std::string head;
  ls >> head;
  if (head != label) throw ParseError(path, lineno, "expected '" + label + "'");
  std::vector<double> out;
  out.reserve(count);
  std::string tok;
  while (ls >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ParseError(path, lineno, "bad float " + tok);
    out.push_back(x);
  }
  if (out.size() != count) {
    throw ParseError(path, lineno,
                     "expected " + std::to_string(count) + " values, got " +
                         std::to_string(out.size()));
  }
  return out;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ParameterSet& params,
                            const nlohmann::json& sidecar) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write checkpoint " + path);
  os << "garden-checkpoint 1\n";
  os << "sidecar " << sidecar.dump() << '\n';
  os << "adam_steps " << params.adam_steps() << '\n';
  os << "tensors " << params.size() << '\n';
  for (const auto& p : params) {
    os << "tensor " << p.name << ' ' << p.rows << ' ' << p.cols << '\n';
    detail::write_hex_row(os, "value", p.value);
    detail::write_hex_row(os, "first_moment", p.first_moment);
    detail::write_hex_row(os, "second_moment", p.second_moment);
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open checkpoint " + path);
  Checkpoint ck;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const std::string& key) {
    if (!std::getline(is, line)) throw ParseError(path, lineno, "unexpected end of checkpoint");
    ++lineno;
    if (line.rfind(key, 0) != 0) throw ParseError(path, lineno, "expected '" + key + "'");
    return line.substr(key.size());
  };
  if (next("garden-checkpoint") != " 1") throw ParseError(path, 1, "unsupported version");
  try {
    ck.sidecar = nlohmann::json::parse(next("sidecar "));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, lineno, e.what());
  }
  const auto steps = std::stoull(next("adam_steps "));
  const auto count = std::stoull(next("tensors "));
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream head(next("tensor "));
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(head >> name >> rows >> cols)) throw ParseError(path, lineno, "bad tensor header");
    const auto idx = ck.params.add(name, rows, cols);
    auto& p = ck.params[idx];
    p.value = detail::read_hex_row(is, "value", rows * cols, path, lineno);
    p.first_moment = detail::read_hex_row(is, "first_moment", rows * cols, path, lineno);
    p.second_moment = detail::read_hex_row(is, "second_moment", rows * cols, path, lineno);
  }
  ck.params.set_adam_steps(steps);
  return ck;
}

// Copies tensors from src into dst by position, checking names and shapes.
inline void assign_parameters(ParameterSet& dst, const ParameterSet& src) {
  if (dst.size() != src.size()) {
    throw SchemaError("checkpoint has " + std::to_string(src.size()) + " tensors, model expects " +
                      std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].name != src[i].name || dst[i].rows != src[i].rows || dst[i].cols != src[i].cols) {
      throw SchemaError("checkpoint tensor " + src[i].name + " does not match model tensor " +
                        dst[i].name);
    }
  }
  dst = src;
}

}  // namespace garden::nn

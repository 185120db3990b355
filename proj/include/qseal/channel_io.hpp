#pragma once

// Channel files: {"label": "...", "operators": [M, M, ...]} where each M is a
// row-major 2x2 nested array of [re, im] pairs.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qseal/qubit.hpp"

namespace qseal {

class ChannelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string line_column(const std::string &text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double number_at(const nlohmann::json &j, const std::string &where) {
  if (!j.is_number())
    throw ChannelFormatError(where + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

inline KrausChannel parse_channel(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ChannelFormatError("syntax error at " + detail::line_column(text, e.byte) + ": " +
                             e.what());
  }
  if (!doc.is_object())
    throw ChannelFormatError("top level must be an object");

  std::string label = "channel";
  if (doc.contains("label")) {
    if (!doc["label"].is_string())
      throw ChannelFormatError("label: expected a string");
    label = doc["label"].get<std::string>();
  }
  if (!doc.contains("operators") || !doc["operators"].is_array() || doc["operators"].empty())
    throw ChannelFormatError("operators: expected a non-empty array");

  std::vector<Mat2> ops;
  const auto &arr = doc["operators"];
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string at = "operators[" + std::to_string(k) + "]";
    const auto &m = arr[k];
    if (!m.is_array() || m.size() != 2)
      throw ChannelFormatError(at + ": expected 2 rows");
    Mat2 e{};
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string row_at = at + "[" + std::to_string(i) + "]";
      if (!m[i].is_array() || m[i].size() != 2)
        throw ChannelFormatError(row_at + ": expected 2 entries");
      for (std::size_t j = 0; j < 2; ++j) {
        const std::string entry_at = row_at + "[" + std::to_string(j) + "]";
        const auto &z = m[i][j];
        if (!z.is_array() || z.size() != 2)
          throw ChannelFormatError(entry_at + ": expected [re, im]");
        e[i][j] = Complex(detail::number_at(z[0], entry_at), detail::number_at(z[1], entry_at));
      }
    }
    if (!mat::all_finite(e))
      throw ChannelFormatError(at + ": non-finite entry");
    ops.push_back(e);
  }
  return KrausChannel(std::move(ops), std::move(label));
}

inline KrausChannel load_channel_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ChannelFormatError("cannot open channel file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_channel(buf.str());
}

inline std::string channel_to_json(const KrausChannel &ch) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto &e : ch.operators()) {
    nlohmann::json m = nlohmann::json::array();
    for (const auto &row : e) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto &z : row)
        r.push_back({z.real(), z.imag()});
      m.push_back(r);
    }
    ops.push_back(m);
  }
  return nlohmann::json{{"label", ch.label()}, {"operators", ops}}.dump(2);
}

}  // namespace qseal

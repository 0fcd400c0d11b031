#pragma once

// Test cases and their on-disk JSON form.
//
//   {"cases": [{"id": "t1", "input": "seed=1", "expected_output": "42\n",
//               "expected_exit": 0}, ...]}
//
// `input` and `expected_output` are inline text or {"base64": "..."}.
// Cases without `expected_output` get it recorded from the original program.

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cachegi {

struct TestCase {
  std::string id;
  std::string input;
  std::string expected_output;
  int expected_exit = 0;
};

/// A case as written in a suite file; expectations may be missing.
struct TestCaseSpec {
  std::string id;
  std::string input;
  std::optional<std::string> expected_output;
  std::optional<int> expected_exit;
};

class SuiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string base64_encode(std::string_view bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string_view::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

inline std::string base64_decode(std::string_view text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  if (text.size() % 4 != 0) throw SuiteError("invalid base64 length");
  std::size_t pad = 0;
  while (pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  if (pad > 2) throw SuiteError("invalid base64 padding");
  // Padding decodes as zero bits, then is trimmed.
  std::string body(text);
  for (std::size_t i = 0; i < pad; ++i) body[body.size() - 1 - i] = 'A';
  try {
    std::string out(It(body.cbegin()), It(body.cend()));
    out.resize(out.size() - pad);
    return out;
  } catch (const std::exception& e) {
    throw SuiteError(std::string("invalid base64: ") + e.what());
  }
}

namespace detail {

inline std::string bytes_field(const nlohmann::json& v, const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object() && v.contains("base64") && v["base64"].is_string()) return base64_decode(v["base64"].get<std::string>());
  if (v.is_object() && v.contains("text") && v["text"].is_string()) return v["text"].get<std::string>();
  throw SuiteError(std::string("field '") + what + "' must be text or {\"base64\": ...}");
}

}  // namespace detail

inline std::vector<TestCaseSpec> parse_suite(const nlohmann::json& doc) {
  const nlohmann::json* cases = &doc;
  if (doc.is_object()) {
    if (!doc.contains("cases")) throw SuiteError("suite object lacks 'cases'");
    cases = &doc["cases"];
  }
  if (!cases->is_array()) throw SuiteError("suite 'cases' must be an array");
  std::vector<TestCaseSpec> out;
  for (std::size_t i = 0; i < cases->size(); ++i) {
    const auto& c = (*cases)[i];
    if (!c.is_object()) throw SuiteError("case " + std::to_string(i + 1) + " is not an object");
    TestCaseSpec s;
    s.id = c.contains("id") ? c["id"].get<std::string>() : std::to_string(i + 1);
    s.input = c.contains("input") ? detail::bytes_field(c["input"], "input") : std::string();
    if (c.contains("expected_output")) s.expected_output = detail::bytes_field(c["expected_output"], "expected_output");
    if (c.contains("expected_exit")) s.expected_exit = c["expected_exit"].get<int>();
    out.push_back(std::move(s));
  }
  if (out.empty()) throw SuiteError("suite has no cases");
  return out;
}

inline std::vector<TestCaseSpec> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SuiteError("cannot read test suite '" + path.string() + "'");
  try {
    return parse_suite(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw SuiteError("test suite '" + path.string() + "': " + e.what());
  }
}

inline nlohmann::json suite_to_json(const std::vector<TestCase>& cases) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cases)
    arr.push_back({{"id", c.id}, {"input", c.input}, {"expected_output", c.expected_output}, {"expected_exit", c.expected_exit}});
  return {{"cases", arr}};
}

}  // namespace cachegi

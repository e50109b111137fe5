#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "calimetr/core.hpp"

namespace calimetr::io {

// Minimal JSON value with a canonical writer: object keys sorted (std::map),
// doubles formatted %.6g, no whitespace variance. Reports and tensor headers
// round-trip byte-identically through it.
class Json {
 public:
  using Array = std::vector<Json>;
  using Object = std::map<std::string, Json>;

  Json() : value_(nullptr) {}
  Json(std::nullptr_t) : value_(nullptr) {}
  Json(bool b) : value_(b) {}
  Json(int v) : value_(static_cast<std::int64_t>(v)) {}
  Json(std::int64_t v) : value_(v) {}
  Json(std::uint64_t v) : value_(v) {}
  Json(double v);  // rejects non-finite values
  Json(const char* s) : value_(std::string(s)) {}
  Json(std::string s) : value_(std::move(s)) {}
  Json(Array a) : value_(std::move(a)) {}
  Json(Object o) : value_(std::move(o)) {}

  static Json parse(const std::string& text);  // Error(HeaderParse) on bad input

  bool is_null() const { return std::holds_alternative<std::nullptr_t>(value_); }
  bool is_object() const { return std::holds_alternative<Object>(value_); }
  bool is_array() const { return std::holds_alternative<Array>(value_); }
  bool is_string() const { return std::holds_alternative<std::string>(value_); }
  bool is_number() const;

  const Object& object() const;
  const Array& array() const;
  const std::string& str() const;
  double number() const;  // any numeric alternative, widened
  std::int64_t integer() const;
  bool boolean() const;

  bool contains(const std::string& key) const;
  const Json& at(const std::string& key) const;
  Json& operator[](const std::string& key);

  std::string dump() const;

 private:
  std::variant<std::nullptr_t, bool, std::int64_t, std::uint64_t, double, std::string, Array,
               Object>
      value_;
};

// %.6g, the float format used everywhere a number becomes text.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Tensor files: 8-byte magic "CALIMTR1", u32 LE header length, UTF-8 JSON
// header {class_names?, dtype, prng?, role, shape}, then row-major
// little-endian payload.

inline constexpr char kTensorMagic[8] = {'C', 'A', 'L', 'I', 'M', 'T', 'R', '1'};

struct TensorData {
  std::string dtype;  // "f32" | "i32"
  std::string role;   // "logits" | "probs" | "labels"
  std::vector<std::size_t> shape;
  std::vector<std::string> class_names;  // optional
  std::string prng;                      // optional, recorded by synth
  std::vector<float> f32;
  std::vector<std::int32_t> i32;

  std::size_t element_count() const;
};

TensorData read_tensor(const std::string& path);
void write_tensor(const std::string& path, const TensorData& tensor);

// Builds a PredictionSet from tensor files (one logits or probs file plus one
// labels file, any order) or from a single CSV file.
PredictionSet load_prediction_set(const std::vector<std::string>& paths);

// CSV with header `label,p0,...,p{K-1}` or `label,l0,...,l{K-1}`.
PredictionSet read_csv_predictions(const std::string& path);

// Tensor views of a validated set (f32 payloads).
TensorData tensor_from_probs(const PredictionSet& set);
TensorData tensor_from_logits(const PredictionSet& set);
TensorData tensor_from_labels(const PredictionSet& set);

// ---------------------------------------------------------------------------
// Reports.

// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::string& path);

// provenance: input digests, config echo, tool version, PRNG id.
Json make_provenance(const std::vector<std::string>& input_paths, Json config);

// Requires an object with a well-formed provenance section.
void check_report(const Json& report);

void write_report(const Json& report, const std::string& path);
Json read_report(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace calimetr::io

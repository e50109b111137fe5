#include "calimetr/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "calimetr/synth.hpp"

namespace calimetr::io {

namespace {

Json from_nlohmann(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return Json(nullptr);
    case nlohmann::json::value_t::boolean: return Json(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return Json(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: return Json(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float: return Json(j.get<double>());
    case nlohmann::json::value_t::string: return Json(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      Json::Array arr;
      arr.reserve(j.size());
      for (const auto& item : j) arr.push_back(from_nlohmann(item));
      return Json(std::move(arr));
    }
    case nlohmann::json::value_t::object: {
      Json::Object obj;
      for (auto it = j.begin(); it != j.end(); ++it) obj.emplace(it.key(), from_nlohmann(*it));
      return Json(std::move(obj));
    }
    default:
      fail(ErrorCode::HeaderParse, "unsupported JSON value type");
  }
}

void escape_string(const std::string& s, std::string& out) {
  out.push_back('"');
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Json::Json(double v) : value_(v) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("non-finite number is not representable in a report");
  }
}

Json Json::parse(const std::string& text) {
  nlohmann::json parsed = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) fail(ErrorCode::HeaderParse, "malformed JSON");
  return from_nlohmann(parsed);
}

bool Json::is_number() const {
  return std::holds_alternative<std::int64_t>(value_) ||
         std::holds_alternative<std::uint64_t>(value_) || std::holds_alternative<double>(value_);
}

const Json::Object& Json::object() const {
  if (!is_object()) fail(ErrorCode::HeaderParse, "expected a JSON object");
  return std::get<Object>(value_);
}

const Json::Array& Json::array() const {
  if (!is_array()) fail(ErrorCode::HeaderParse, "expected a JSON array");
  return std::get<Array>(value_);
}

const std::string& Json::str() const {
  if (!is_string()) fail(ErrorCode::HeaderParse, "expected a JSON string");
  return std::get<std::string>(value_);
}

double Json::number() const {
  if (auto* i = std::get_if<std::int64_t>(&value_)) return static_cast<double>(*i);
  if (auto* u = std::get_if<std::uint64_t>(&value_)) return static_cast<double>(*u);
  if (auto* d = std::get_if<double>(&value_)) return *d;
  fail(ErrorCode::HeaderParse, "expected a JSON number");
}

std::int64_t Json::integer() const {
  if (auto* i = std::get_if<std::int64_t>(&value_)) return *i;
  if (auto* u = std::get_if<std::uint64_t>(&value_)) return static_cast<std::int64_t>(*u);
  fail(ErrorCode::HeaderParse, "expected a JSON integer");
}

bool Json::boolean() const {
  if (auto* b = std::get_if<bool>(&value_)) return *b;
  fail(ErrorCode::HeaderParse, "expected a JSON boolean");
}

bool Json::contains(const std::string& key) const {
  return is_object() && object().count(key) > 0;
}

const Json& Json::at(const std::string& key) const {
  const Object& obj = object();
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::HeaderParse, "missing key '" + key + "'");
  return it->second;
}

Json& Json::operator[](const std::string& key) {
  if (is_null()) value_ = Object{};
  if (!is_object()) fail(ErrorCode::HeaderParse, "expected a JSON object");
  return std::get<Object>(value_)[key];
}

std::string Json::dump() const {
  std::string out;
  struct Writer {
    std::string& out;
    void operator()(std::nullptr_t) const { out += "null"; }
    void operator()(bool b) const { out += b ? "true" : "false"; }
    void operator()(std::int64_t v) const { out += std::to_string(v); }
    void operator()(std::uint64_t v) const { out += std::to_string(v); }
    void operator()(double v) const { out += format_double(v); }
    void operator()(const std::string& s) const { escape_string(s, out); }
    void operator()(const Array& arr) const {
      out.push_back('[');
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (i) out.push_back(',');
        out += arr[i].dump();
      }
      out.push_back(']');
    }
    void operator()(const Object& obj) const {
      out.push_back('{');
      bool first = true;
      for (const auto& [key, value] : obj) {
        if (!first) out.push_back(',');
        first = false;
        escape_string(key, out);
        out.push_back(':');
        out += value.dump();
      }
      out.push_back('}');
    }
  };
  std::visit(Writer{out}, value_);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t TensorData::element_count() const {
  std::size_t count = 1;
  for (std::size_t dim : shape) count *= dim;
  return count;
}

namespace {

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t read_u32_le(const unsigned char* bytes) {
  return static_cast<std::uint32_t>(bytes[0]) | static_cast<std::uint32_t>(bytes[1]) << 8 |
         static_cast<std::uint32_t>(bytes[2]) << 16 | static_cast<std::uint32_t>(bytes[3]) << 24;
}

void validate_tensor_meta(const TensorData& t) {
  if (t.dtype != "f32" && t.dtype != "i32") fail(ErrorCode::HeaderParse, "dtype " + t.dtype);
  if (t.role != "logits" && t.role != "probs" && t.role != "labels") {
    fail(ErrorCode::HeaderParse, "role " + t.role);
  }
  if (t.role == "labels") {
    if (t.dtype != "i32" || t.shape.size() != 1) {
      fail(ErrorCode::HeaderParse, "labels must be a 1-D i32 tensor");
    }
  } else {
    if (t.dtype != "f32" || t.shape.size() != 2) {
      fail(ErrorCode::HeaderParse, t.role + " must be a 2-D f32 tensor");
    }
  }
}

}  // namespace

void write_tensor(const std::string& path, const TensorData& tensor) {
  validate_tensor_meta(tensor);
  const std::size_t count = tensor.element_count();
  const std::size_t have = tensor.dtype == "f32" ? tensor.f32.size() : tensor.i32.size();
  if (count != have) fail(ErrorCode::PayloadSizeMismatch, "payload does not match shape");

  Json header;
  if (!tensor.class_names.empty()) {
    Json::Array names;
    for (const auto& name : tensor.class_names) names.emplace_back(name);
    header["class_names"] = Json(std::move(names));
  }
  header["dtype"] = tensor.dtype;
  header["role"] = tensor.role;
  if (!tensor.prng.empty()) header["prng"] = tensor.prng;
  Json::Array shape;
  for (std::size_t dim : tensor.shape) shape.emplace_back(dim);
  header["shape"] = Json(std::move(shape));
  const std::string header_text = header.dump();

  std::string blob;
  blob.reserve(12 + header_text.size() + count * 4);
  blob.append(kTensorMagic, sizeof(kTensorMagic));
  append_u32_le(blob, static_cast<std::uint32_t>(header_text.size()));
  blob += header_text;
  if (tensor.dtype == "f32") {
    for (float v : tensor.f32) append_u32_le(blob, std::bit_cast<std::uint32_t>(v));
  } else {
    for (std::int32_t v : tensor.i32) append_u32_le(blob, std::bit_cast<std::uint32_t>(v));
  }
  write_text_file(path, blob);
}

TensorData read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::BadMagic, "cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (blob.size() < 12 || std::memcmp(blob.data(), kTensorMagic, sizeof(kTensorMagic)) != 0) {
    fail(ErrorCode::BadMagic, path);
  }
  const auto header_len =
      read_u32_le(reinterpret_cast<const unsigned char*>(blob.data()) + sizeof(kTensorMagic));
  if (blob.size() < 12 + header_len) fail(ErrorCode::HeaderParse, "truncated header");
  const Json header = Json::parse(blob.substr(12, header_len));

  TensorData tensor;
  tensor.dtype = header.at("dtype").str();
  tensor.role = header.at("role").str();
  for (const Json& dim : header.at("shape").array()) {
    const std::int64_t value = dim.integer();
    if (value < 0) fail(ErrorCode::HeaderParse, "negative shape dimension");
    tensor.shape.push_back(static_cast<std::size_t>(value));
  }
  if (header.contains("class_names")) {
    for (const Json& name : header.at("class_names").array()) {
      tensor.class_names.push_back(name.str());
    }
  }
  if (header.contains("prng")) tensor.prng = header.at("prng").str();
  validate_tensor_meta(tensor);

  const std::size_t count = tensor.element_count();
  const std::size_t payload = blob.size() - 12 - header_len;
  if (payload != count * 4) {
    fail(ErrorCode::PayloadSizeMismatch, path + ": expected " + std::to_string(count * 4) +
                                             " payload bytes, found " + std::to_string(payload));
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data()) + 12 + header_len;
  if (tensor.dtype == "f32") {
    tensor.f32.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      tensor.f32[i] = std::bit_cast<float>(read_u32_le(bytes + i * 4));
    }
  } else {
    tensor.i32.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      tensor.i32[i] = std::bit_cast<std::int32_t>(read_u32_le(bytes + i * 4));
    }
  }
  return tensor;
}

PredictionSet read_csv_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::BadMagic, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::UnknownHeader, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "label") {
    fail(ErrorCode::UnknownHeader, "expected header label,p0,... or label,l0,...");
  }
  const char kind = header[1].empty() ? '?' : header[1][0];
  if (kind != 'p' && kind != 'l') {
    fail(ErrorCode::UnknownHeader, "columns must be p0..p{K-1} or l0..l{K-1}");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != std::string(1, kind) + std::to_string(j - 1)) {
      fail(ErrorCode::UnknownHeader, "unexpected column '" + header[j] + "'");
    }
  }
  const std::size_t k = header.size() - 1;

  std::vector<double> values;
  std::vector<std::int32_t> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != k + 1) {
      fail(ErrorCode::RaggedRows, "line " + std::to_string(line_no) + " has " +
                                      std::to_string(cells.size()) + " cells, expected " +
                                      std::to_string(k + 1));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      char* end = nullptr;
      const double parsed = std::strtod(cells[j].c_str(), &end);
      if (end == cells[j].c_str() || *end != '\0') {
        fail(ErrorCode::NonNumericCell, "line " + std::to_string(line_no) + ", cell '" + cells[j] + "'");
      }
      if (j == 0) {
        labels.push_back(static_cast<std::int32_t>(parsed));
      } else {
        values.push_back(parsed);
      }
    }
  }
  if (labels.empty()) fail(ErrorCode::RaggedRows, "no data rows");

  Matrix matrix(labels.size(), k);
  matrix.data = std::move(values);
  PredictionSet set;
  if (kind == 'p') {
    set.probs = std::move(matrix);
  } else {
    set.logits = std::move(matrix);
  }
  set.labels = std::move(labels);
  return validate(std::move(set));
}

PredictionSet load_prediction_set(const std::vector<std::string>& paths) {
  if (paths.size() == 1 && paths[0].size() > 4 &&
      paths[0].substr(paths[0].size() - 4) == ".csv") {
    return read_csv_predictions(paths[0]);
  }

  PredictionSet set;
  bool have_values = false, have_labels = false;
  for (const std::string& path : paths) {
    TensorData tensor = read_tensor(path);
    if (tensor.role == "labels") {
      set.labels.assign(tensor.i32.begin(), tensor.i32.end());
      have_labels = true;
      continue;
    }
    Matrix matrix(tensor.shape[0], tensor.shape[1]);
    for (std::size_t i = 0; i < tensor.f32.size(); ++i) {
      matrix.data[i] = static_cast<double>(tensor.f32[i]);
    }
    if (tensor.role == "probs") {
      set.probs = std::move(matrix);
    } else {
      set.logits = std::move(matrix);
    }
    if (!tensor.class_names.empty()) set.class_names = tensor.class_names;
    have_values = true;
  }
  if (!have_values || !have_labels) {
    fail(ErrorCode::ShapeMismatch, "need one logits/probs tensor and one labels tensor");
  }
  return validate(std::move(set));
}

TensorData tensor_from_probs(const PredictionSet& set) {
  require_validated(set);
  TensorData tensor;
  tensor.dtype = "f32";
  tensor.role = "probs";
  tensor.shape = {set.size(), set.classes()};
  tensor.class_names = set.class_names;
  tensor.f32.reserve(set.probs->data.size());
  for (double v : set.probs->data) tensor.f32.push_back(static_cast<float>(v));
  return tensor;
}

TensorData tensor_from_logits(const PredictionSet& set) {
  require_validated(set);
  if (!set.logits) fail(ErrorCode::ShapeMismatch, "set has no logits");
  TensorData tensor;
  tensor.dtype = "f32";
  tensor.role = "logits";
  tensor.shape = {set.size(), set.classes()};
  tensor.class_names = set.class_names;
  tensor.f32.reserve(set.logits->data.size());
  for (double v : set.logits->data) tensor.f32.push_back(static_cast<float>(v));
  return tensor;
}

TensorData tensor_from_labels(const PredictionSet& set) {
  TensorData tensor;
  tensor.dtype = "i32";
  tensor.role = "labels";
  tensor.shape = {set.labels.size()};
  tensor.i32 = set.labels;
  return tensor;
}

// ---------------------------------------------------------------------------

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::BadMagic, "cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[20];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

Json make_provenance(const std::vector<std::string>& input_paths, Json config) {
  Json::Array inputs;
  for (const std::string& path : input_paths) {
    Json entry;
    entry["path"] = path;
    entry["fnv1a64"] = file_digest(path);
    inputs.push_back(std::move(entry));
  }
  Json prov;
  prov["inputs"] = Json(std::move(inputs));
  prov["config"] = std::move(config);
  prov["tool_version"] = kToolVersion;
  prov["prng"] = kPrngId;
  return prov;
}

void check_report(const Json& report) {
  if (!report.is_object()) fail(ErrorCode::HeaderParse, "report must be a JSON object");
  const Json& prov = report.at("provenance");
  prov.at("tool_version").str();
  prov.at("prng").str();
  prov.at("inputs").array();
  if (!prov.contains("config")) fail(ErrorCode::HeaderParse, "provenance.config missing");
}

void write_report(const Json& report, const std::string& path) {
  check_report(report);
  write_text_file(path, report.dump() + "\n");
}

Json read_report(const std::string& path) {
  Json report = Json::parse(read_text_file(path));
  check_report(report);
  return report;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::UnwritablePath, path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::UnwritablePath, path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::BadMagic, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace calimetr::io

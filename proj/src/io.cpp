#include "phaselab/io.hpp"

#include <charconv>
#include <cmath>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace phaselab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

bool parse_number(const std::string& s) {
  if (s == "nan" || s == "inf" || s == "-inf") return true;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CSV row width differs from header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << quote(fields[i]);
  }
  out_ << "\r\n";
}

CsvWriter& CsvWriter::operator<<(const std::string& field) {
  pending_.push_back(field);
  return *this;
}
CsvWriter& CsvWriter::operator<<(double value) { return *this << format_double(value); }
CsvWriter& CsvWriter::operator<<(int value) { return *this << std::to_string(value); }
CsvWriter& CsvWriter::operator<<(long long value) { return *this << std::to_string(value); }
CsvWriter& CsvWriter::operator<<(unsigned long long value) { return *this << std::to_string(value); }

void CsvWriter::end_row() {
  row(pending_);
  pending_.clear();
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return table;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_dataset_csv(const fs::path& path, const LabeledDataset& data) {
  std::vector<std::string> header;
  for (int c = 0; c < data.dim(); ++c) header.push_back("x" + std::to_string(c + 1));
  header.push_back("label");
  CsvWriter w(path, header);
  for (int s = 0; s < data.size(); ++s) {
    for (int c = 0; c < data.dim(); ++c) w << data.inputs()(s, c);
    w << data.label(s) + 1;
    w.end_row();
  }
}

LabeledDataset read_dataset_csv(const fs::path& path, int classes) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header.back() != "label") throw ConfigError("dataset CSV needs x1..xd,label columns");
  const int d = static_cast<int>(t.header.size()) - 1;
  Matrix x(static_cast<Eigen::Index>(t.rows.size()), d);
  std::vector<int> labels;
  int max_label = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (static_cast<int>(t.rows[r].size()) != d + 1) throw ConfigError("dataset CSV row has the wrong width");
    for (int c = 0; c < d; ++c) x(static_cast<Eigen::Index>(r), c) = std::stod(t.rows[r][static_cast<std::size_t>(c)]);
    const int label = std::stoi(t.rows[r].back());
    if (label < 1) throw ConfigError("dataset labels are 1-based");
    labels.push_back(label - 1);
    max_label = std::max(max_label, label);
  }
  return LabeledDataset(std::move(x), std::move(labels), std::max(classes, max_label));
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

const std::map<std::string, CsvSchema>& csv_schemas() {
  static const std::map<std::string, CsvSchema> schemas = [] {
    std::map<std::string, CsvSchema> m;
    auto add = [&m](CsvSchema s) { m[s.name] = std::move(s); };
    add({"dataset", 1, {{"x[0-9]+", true}, {"label"}}});
    add({"trajectory", 1,
         {{"t"}, {"loss_total"}, {"loss_class_[0-9]+", true}, {"weight_norm"}, {"grad_norm"},
          {"gc_class_[0-9]+", true, true, true}, {"norm_[0-9]+", true}}});
    add({"runs", 1,
         {{"cell", false, false}, {"run"}, {"seed"}, {"init", false, false}, {"width"}, {"theta"},
          {"iterations"}, {"converged"}, {"stop_reason", false, false}, {"final_loss"}, {"final_grad_norm"},
          {"max_weight_norm"}, {"first_hold", false, true, true}, {"persistence"}, {"t1_size"}, {"t2_size"},
          {"sum_sq_loss_t2"}, {"owner_violations"}, {"audit_verdict", false, false}}});
    add({"summary", 1,
         {{"cell", false, false}, {"init", false, false}, {"width"}, {"theta"}, {"runs"}, {"converged"},
          {"mean"}, {"std", false, true, true}, {"min"}, {"q1"}, {"median"}, {"q3"}, {"max"}}});
    add({"histogram", 1, {{"bin_lo"}, {"bin_hi"}, {"count"}}});
    add({"gc_prob", 1,
         {{"d"}, {"k"}, {"closed_form"}, {"mc_estimate"}, {"mc_std_error"}, {"trials"}, {"hits"}, {"deviation_sigma"}}});
    add({"trace_weights", 1, {{"t"}, {"neuron"}, {"role", false, false}, {"x"}, {"y"}, {"norm"}}});
    add({"trace_rho", 1, {{"t"}, {"theta"}, {"rho"}}});
    add({"kelvin_points", 1, {{"index"}, {"x"}, {"y"}, {"radius"}}});
    add({"lipschitz_ratios", 1, {{"pair"}, {"ratio"}}});
    add({"width_table", 1, {{"width"}, {"(random|halfspace)_(mean|std|converged)", true, true, true}}});
    return m;
  }();
  return schemas;
}

std::string validate_csv(const fs::path& path, const CsvSchema& schema) {
  CsvTable t;
  try {
    t = read_csv(path);
  } catch (const std::exception& e) {
    return e.what();
  }
  // Map header fields onto schema columns.
  std::vector<const CsvColumn*> assigned;
  std::size_t h = 0;
  for (const auto& col : schema.columns) {
    const std::regex re(col.pattern);
    std::size_t matched = 0;
    while (h < t.header.size() && std::regex_match(t.header[h], re)) {
      assigned.push_back(&col);
      ++h;
      ++matched;
      if (!col.repeated) break;
    }
    if (matched == 0) {
      return path.filename().string() + ": missing column matching '" + col.pattern + "' (schema " + schema.name +
             " v" + std::to_string(schema.version) + ")";
    }
  }
  if (h != t.header.size()) return path.filename().string() + ": unexpected column '" + t.header[h] + "'";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) {
      return path.filename().string() + ": row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
             " fields, expected " + std::to_string(t.header.size());
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const CsvColumn& col = *assigned[c];
      if (row[c].empty()) {
        if (col.optional_value) continue;
        return path.filename().string() + ": empty field in column " + t.header[c];
      }
      if (col.numeric && !parse_number(row[c])) {
        return path.filename().string() + ": non-numeric '" + row[c] + "' in column " + t.header[c];
      }
    }
  }
  return {};
}

void Manifest::add(const std::string& file, const std::string& schema) { files_[file] = schema; }

void Manifest::write() const {
  json files = json::array();
  for (const auto& [file, schema] : files_) {
    json entry = {{"file", file}, {"schema", schema}};
    if (auto it = csv_schemas().find(schema); it != csv_schemas().end()) entry["schema_version"] = it->second.version;
    files.push_back(entry);
  }
  write_json(dir_ / "manifest.json", json{{"files", files}});
}

std::vector<std::string> validate_output_dir(const fs::path& dir) {
  std::vector<std::string> problems;
  json manifest;
  try {
    manifest = read_json(dir / "manifest.json");
  } catch (const std::exception& e) {
    return {std::string("manifest: ") + e.what()};
  }
  for (const auto& entry : manifest.at("files")) {
    const std::string file = entry.at("file");
    const std::string schema = entry.at("schema");
    const fs::path path = dir / file;
    if (!fs::exists(path)) {
      problems.push_back(file + ": listed in manifest but missing");
      continue;
    }
    if (schema == "json") {
      try {
        (void)read_json(path);
      } catch (const std::exception& e) {
        problems.push_back(file + ": " + e.what());
      }
      continue;
    }
    if (schema == "svg") continue;
    auto it = csv_schemas().find(schema);
    if (it == csv_schemas().end()) {
      problems.push_back(file + ": unknown schema " + schema);
      continue;
    }
    if (auto why = validate_csv(path, it->second); !why.empty()) problems.push_back(why);
  }
  return problems;
}

ConfigReader::ConfigReader(const json& object, std::string where) : object_(object), where_(std::move(where)) {
  if (!object_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
}

bool ConfigReader::has(const std::string& key) const { return object_.contains(key); }

const json& ConfigReader::get(const std::string& key) {
  used_.insert(key);
  return object_.at(key);
}

const json& ConfigReader::raw(const std::string& key) { return get(key); }

double ConfigReader::number(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
  return v.get<double>();
}

int ConfigReader::integer(const std::string& key, int fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
  return v.get<int>();
}

std::uint64_t ConfigReader::u64(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(where_ + "." + key + ": expected a non-negative integer");
}

bool ConfigReader::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_boolean()) throw ConfigError(where_ + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string ConfigReader::string(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> ConfigReader::numbers(const std::string& key, const std::vector<double>& fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  std::vector<double> out;
  if (!v.is_array()) throw ConfigError(where_ + "." + key + ": expected an array of numbers");
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where_ + "." + key + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> ConfigReader::integers(const std::string& key, const std::vector<int>& fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  std::vector<int> out;
  if (!v.is_array()) throw ConfigError(where_ + "." + key + ": expected an array of integers");
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<std::string> ConfigReader::strings(const std::string& key, const std::vector<std::string>& fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  std::vector<std::string> out;
  if (!v.is_array()) throw ConfigError(where_ + "." + key + ": expected an array of strings");
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(where_ + "." + key + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

ConfigReader ConfigReader::child(const std::string& key) {
  if (!has(key)) return ConfigReader(json::object(), where_ + "." + key);
  return ConfigReader(get(key), where_ + "." + key);
}

void ConfigReader::finish() const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace phaselab

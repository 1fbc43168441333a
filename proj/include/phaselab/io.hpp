#pragma once

#include "phaselab/loss.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace phaselab {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest decimal that round-trips to the same double; "nan", "inf", "-inf" otherwise.
std::string format_double(double value);

/// RFC 4180 writer: comma separated, CRLF line ends, fields quoted when needed.
class CsvWriter {
public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  CsvWriter& operator<<(const std::string& field);
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(int value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(unsigned long long value);
  void end_row();

private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::vector<std::string> pending_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Parses RFC 4180 text (quoted fields, embedded commas, CRLF or LF).
CsvTable read_csv(const fs::path& path);
CsvTable parse_csv(const std::string& text);

/// Columns x1..xd then label (1-based).
void write_dataset_csv(const fs::path& path, const LabeledDataset& data);
LabeledDataset read_dataset_csv(const fs::path& path, int classes = 0);

/// Pretty-printed JSON followed by a newline.
void write_json(const fs::path& path, const json& value);
json read_json(const fs::path& path);

/// Column layout of an emitted CSV. Each entry is a regex that must match
/// one header field; entries flagged `repeated` match one or more
/// consecutive fields. `numeric` columns must parse as doubles (or nan/inf).
struct CsvColumn {
  std::string pattern;
  bool repeated = false;
  bool numeric = true;
  bool optional_value = false;  ///< empty field allowed
};

struct CsvSchema {
  std::string name;
  int version = 1;
  std::vector<CsvColumn> columns;
};

const std::map<std::string, CsvSchema>& csv_schemas();

/// Empty string when the file conforms; otherwise the first problem found.
std::string validate_csv(const fs::path& path, const CsvSchema& schema);

/// Records emitted files and their schemas; written as manifest.json.
class Manifest {
public:
  explicit Manifest(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& file, const std::string& schema);
  void write() const;
  const fs::path& dir() const { return dir_; }

private:
  fs::path dir_;
  std::map<std::string, std::string> files_;
};

/// Checks every CSV listed in dir/manifest.json against its schema and that
/// every JSON file parses. Returns the list of problems.
std::vector<std::string> validate_output_dir(const fs::path& dir);

/// Wraps a JSON object and rejects keys that were never read.
class ConfigReader {
public:
  ConfigReader(const json& object, std::string where);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  std::uint64_t u64(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);
  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& fallback);
  /// Nested object; the child must be finished separately.
  ConfigReader child(const std::string& key);
  const json& raw(const std::string& key);

  /// Throws ConfigError naming any key that was not consumed.
  void finish() const;

private:
  const json& get(const std::string& key);
  json object_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace phaselab

#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pubcast/calendar.hpp"
#include "pubcast/series.hpp"

namespace pubcast {

enum class Dataset { dimensions, who };

std::string_view to_string(Dataset dataset);
std::optional<Dataset> dataset_from_string(std::string_view text);

struct PublicationRecord {
  std::string id;
  Date date_indexed;
  std::string source;
  std::optional<bool> open_access;
  Dataset dataset = Dataset::dimensions;

  bool operator==(const PublicationRecord&) const = default;
};

struct RejectReport {
  std::size_t accepted = 0;
  std::map<std::string, std::size_t> rejected;
  // Ids seen more than once within the same dataset. Kept, but reported.
  std::size_t duplicate_ids = 0;

  std::size_t rejected_total() const;
  nlohmann::json to_json() const;
};

struct ParseResult {
  std::vector<PublicationRecord> records;
  RejectReport report;
};

// Lower-cases and maps provider labels onto canonical tokens.
std::string normalize_source(std::string_view raw);

// Reads the header-bearing record CSV. When `dataset` is given, rows with an
// empty dataset cell inherit it and rows naming another dataset are rejected.
ParseResult parse_records(std::istream& input, std::optional<Dataset> dataset = std::nullopt);

// Writes records in the same CSV layout parse_records reads.
void write_records(std::ostream& out, const std::vector<PublicationRecord>& records);

struct SeriesSpec {
  std::string name;
  Dataset dataset = Dataset::dimensions;
  std::optional<std::string> source_filter;
  std::optional<bool> oa_filter;
};

// TS1a, TS1b, TS2a, TS2b, TS3a..TS3d.
const std::vector<SeriesSpec>& standard_specs();
// Case-insensitive lookup among the standard specs.
std::optional<SeriesSpec> find_standard_spec(std::string_view name);

DailySeries build_series(const std::vector<PublicationRecord>& records, const SeriesSpec& spec,
                         std::optional<DateRange> range = std::nullopt);

struct SuiteResult {
  std::map<std::string, DailySeries> series;
  // name -> reason
  std::map<std::string, std::string> skipped;
};

SuiteResult build_standard_suite(const std::vector<PublicationRecord>& records,
                                 std::optional<DateRange> range = std::nullopt);

}  // namespace pubcast

#include "pubcast/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <utility>

#include "pubcast/errors.hpp"

namespace pubcast {

namespace {

constexpr std::array<std::string_view, 5> kColumns = {"id", "date", "source", "open_access",
                                                      "dataset"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// RFC-4180 record reader: quoted fields may contain commas, doubled quotes
// and line breaks. Returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields, bool& malformed) {
  fields.clear();
  malformed = false;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool quoted_field = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || quoted_field) malformed = true;
      in_quotes = true;
      quoted_field = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      quoted_field = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      if (quoted_field) malformed = true;
      field.push_back(c);
    }
  }
  if (!any) return false;
  if (in_quotes) malformed = true;
  fields.push_back(std::move(field));
  return true;
}

bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

bool is_blank_row(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

}  // namespace

std::string_view to_string(Dataset dataset) {
  return dataset == Dataset::who ? "who" : "dimensions";
}

std::optional<Dataset> dataset_from_string(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "dimensions") return Dataset::dimensions;
  if (t == "who") return Dataset::who;
  return std::nullopt;
}

std::size_t RejectReport::rejected_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : rejected) n += count;
  return n;
}

nlohmann::json RejectReport::to_json() const {
  nlohmann::json j;
  j["accepted"] = accepted;
  j["rejected"] = nlohmann::json::object();
  for (const auto& [reason, count] : rejected) j["rejected"][reason] = count;
  return j;
}

std::string normalize_source(std::string_view raw) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"pubmed", "pubmed"},
      {"medline", "pubmed"},
      {"pmc", "pmc"},
      {"pubmed central", "pmc"},
      {"pubmedcentral", "pmc"},
      {"medrxiv", "medrxiv"},
      {"med rxiv", "medrxiv"},
      {"ssrn", "ssrn"},
      {"ssrn electronic journal", "ssrn"},
      {"biorxiv", "biorxiv"},
      {"elsevier", "elsevier"},
  };
  const std::string key = lower(trim(raw));
  auto it = aliases.find(key);
  return it != aliases.end() ? it->second : key;
}

ParseResult parse_records(std::istream& input, std::optional<Dataset> dataset) {
  ParseResult result;
  std::vector<std::string> fields;
  bool malformed = false;

  // Leading blank lines are tolerated before the header.
  bool have_header = false;
  while (read_csv_row(input, fields, malformed)) {
    if (!is_blank_row(fields)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw Error(ErrorCode::EmptyInput, "record file is empty");

  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  std::array<int, kColumns.size()> index{};
  index.fill(-1);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string name = lower(trim(fields[i]));
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      if (name == kColumns[c] && index[c] < 0) index[c] = static_cast<int>(i);
    }
  }
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (index[c] < 0) {
      throw Error(ErrorCode::SchemaError, "missing required column '" + std::string(kColumns[c]) + "'");
    }
  }
  const std::size_t width = fields.size();

  std::set<std::pair<Dataset, std::string>> seen;
  auto reject = [&](const char* reason) { ++result.report.rejected[reason]; };

  while (read_csv_row(input, fields, malformed)) {
    if (is_blank_row(fields)) continue;
    if (malformed) {
      reject("bad_quoting");
      continue;
    }
    if (fields.size() != width) {
      reject("wrong_field_count");
      continue;
    }
    PublicationRecord rec;
    rec.id = trim(fields[index[0]]);
    if (rec.id.empty()) {
      reject("missing_id");
      continue;
    }
    auto date = Date::parse(trim(fields[index[1]]));
    if (!date) {
      reject("bad_date");
      continue;
    }
    rec.date_indexed = *date;
    rec.source = normalize_source(fields[index[2]]);

    const std::string oa = lower(trim(fields[index[3]]));
    if (oa == "true") {
      rec.open_access = true;
    } else if (oa == "false") {
      rec.open_access = false;
    } else if (!oa.empty()) {
      reject("bad_open_access");
      continue;
    }

    const std::string ds = trim(fields[index[4]]);
    if (ds.empty() && dataset) {
      rec.dataset = *dataset;
    } else {
      auto parsed = dataset_from_string(ds);
      if (!parsed) {
        reject("bad_dataset");
        continue;
      }
      if (dataset && *parsed != *dataset) {
        reject("dataset_mismatch");
        continue;
      }
      rec.dataset = *parsed;
    }

    if (!seen.emplace(rec.dataset, rec.id).second) ++result.report.duplicate_ids;
    result.records.push_back(std::move(rec));
  }
  result.report.accepted = result.records.size();
  return result;
}

void write_records(std::ostream& out, const std::vector<PublicationRecord>& records) {
  out << "id,date,source,open_access,dataset\n";
  for (const auto& r : records) {
    write_field(out, r.id);
    out << ',' << r.date_indexed.iso() << ',';
    write_field(out, r.source);
    out << ',';
    if (r.open_access) out << (*r.open_access ? "true" : "false");
    out << ',' << to_string(r.dataset) << '\n';
  }
}

const std::vector<SeriesSpec>& standard_specs() {
  static const std::vector<SeriesSpec> specs = {
      {"TS1a", Dataset::who, std::nullopt, std::nullopt},
      {"TS1b", Dataset::dimensions, std::nullopt, std::nullopt},
      {"TS2a", Dataset::dimensions, std::nullopt, true},
      {"TS2b", Dataset::dimensions, std::nullopt, false},
      {"TS3a", Dataset::dimensions, "pubmed", std::nullopt},
      {"TS3b", Dataset::dimensions, "pmc", std::nullopt},
      {"TS3c", Dataset::dimensions, "medrxiv", std::nullopt},
      {"TS3d", Dataset::dimensions, "ssrn", std::nullopt},
  };
  return specs;
}

std::optional<SeriesSpec> find_standard_spec(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& s : standard_specs()) {
    if (lower(s.name) == key) return s;
  }
  return std::nullopt;
}

DailySeries build_series(const std::vector<PublicationRecord>& records, const SeriesSpec& spec,
                         std::optional<DateRange> range) {
  std::vector<Date> dates;
  for (const auto& r : records) {
    if (r.dataset != spec.dataset) continue;
    if (spec.source_filter && r.source != normalize_source(*spec.source_filter)) continue;
    if (spec.oa_filter && (!r.open_access || *r.open_access != *spec.oa_filter)) continue;
    dates.push_back(r.date_indexed);
  }
  if (dates.empty()) {
    throw Error(ErrorCode::EmptySelection, "series " + spec.name + " selects no records");
  }
  return from_events(dates, range).series;
}

SuiteResult build_standard_suite(const std::vector<PublicationRecord>& records,
                                 std::optional<DateRange> range) {
  SuiteResult out;
  for (const auto& spec : standard_specs()) {
    try {
      out.series.emplace(spec.name, build_series(records, spec, range));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptySelection) throw;
      out.skipped.emplace(spec.name, e.what());
    }
  }
  return out;
}

}  // namespace pubcast

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pubcast/errors.hpp"
#include "pubcast/ingest.hpp"

using namespace pubcast;

namespace {

ParseResult parse(const std::string& text, std::optional<Dataset> ds = std::nullopt) {
  std::istringstream in(text);
  return parse_records(in, ds);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

std::vector<PublicationRecord> corpus(int n_oa, int n_closed, int n_unknown) {
  std::vector<PublicationRecord> out;
  int id = 0;
  auto add = [&](std::optional<bool> oa, const char* src, Dataset ds) {
    out.push_back({"r" + std::to_string(id), Date(2020, 4, 1) + (id % 17), src, oa, ds});
    ++id;
  };
  for (int i = 0; i < n_oa; ++i) add(true, i % 2 ? "pubmed" : "medrxiv", Dataset::dimensions);
  for (int i = 0; i < n_closed; ++i) add(false, i % 2 ? "pmc" : "ssrn", Dataset::dimensions);
  for (int i = 0; i < n_unknown; ++i) add(std::nullopt, "pubmed", Dataset::who);
  return out;
}

}  // namespace

TEST_CASE("well-formed file parses completely") {
  const auto r = parse(
      "id,date,source,open_access,dataset\n"
      "a,2020-03-01,PubMed,true,dimensions\n"
      "b,2020-03-02,medRxiv,false,dimensions\n"
      "c,2020-03-02,Elsevier,,who\n");
  REQUIRE(r.records.size() == 3);
  CHECK(r.report.accepted == 3);
  CHECK(r.report.rejected_total() == 0);
  CHECK(r.records[0].source == "pubmed");
  CHECK(r.records[1].open_access == false);
  CHECK_FALSE(r.records[2].open_access.has_value());
  CHECK(r.records[2].dataset == Dataset::who);
}

TEST_CASE("malformed rows are counted by reason") {
  const auto r = parse(
      "id,date,source,open_access,dataset\n"
      "a,2020-13-40,pubmed,true,dimensions\n"
      ",2020-03-01,pubmed,true,dimensions\n"
      "c,2020-03-01,pubmed,maybe,dimensions\n"
      "d,2020-03-01,pubmed,true,scopus\n"
      "e,2020-03-01,pubmed\n"
      "f,2020-03-01,pubmed,true,dimensions\n");
  CHECK(r.report.accepted == 1);
  CHECK(r.report.rejected.at("bad_date") == 1);
  CHECK(r.report.rejected.at("missing_id") == 1);
  CHECK(r.report.rejected.at("bad_open_access") == 1);
  CHECK(r.report.rejected.at("bad_dataset") == 1);
  CHECK(r.report.rejected.at("wrong_field_count") == 1);
  CHECK(r.report.accepted + r.report.rejected_total() == 6);
}

TEST_CASE("reject report JSON shape") {
  const auto r = parse("id,date,source,open_access,dataset\nx,2020-02-30,a,,who\ny,2020-02-01,a,,who\n");
  const auto j = r.report.to_json();
  CHECK(j.dump() == R"({"accepted":1,"rejected":{"bad_date":1}})");
}

TEST_CASE("header problems are fatal") {
  CHECK(code_of([] { parse("id,date,source,dataset\na,2020-01-01,x,who\n"); }) == ErrorCode::SchemaError);
  try {
    parse("id,date,source,dataset\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("open_access") != std::string::npos);
  }
  CHECK(code_of([] { parse(""); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { parse("\n\n"); }) == ErrorCode::EmptyInput);
}

TEST_CASE("columns may come in any order, quoted fields keep commas") {
  const auto r = parse(
      "dataset,open_access,source,date,id\r\n"
      "dimensions,true,\"PubMed\",2020-01-05,\"id,with \"\"quotes\"\"\"\r\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].id == "id,with \"quotes\"");
  CHECK(r.records[0].date_indexed == Date(2020, 1, 5));
}

TEST_CASE("dataset argument fills blanks and rejects mismatches") {
  const auto r = parse(
      "id,date,source,open_access,dataset\n"
      "a,2020-03-01,pubmed,,\n"
      "b,2020-03-01,pubmed,,dimensions\n"
      "c,2020-03-01,pubmed,,who\n",
      Dataset::who);
  CHECK(r.report.accepted == 2);
  CHECK(r.report.rejected.at("dataset_mismatch") == 1);
  CHECK(r.records[0].dataset == Dataset::who);
}

TEST_CASE("duplicate ids are kept and reported") {
  const auto r = parse(
      "id,date,source,open_access,dataset\n"
      "a,2020-03-01,pubmed,,who\n"
      "a,2020-03-02,pubmed,,who\n"
      "a,2020-03-02,pubmed,,dimensions\n");
  CHECK(r.records.size() == 3);
  CHECK(r.report.duplicate_ids == 1);
}

TEST_CASE("source aliases normalize case-insensitively") {
  CHECK(normalize_source("PubMed") == "pubmed");
  CHECK(normalize_source(" Pubmed ") == "pubmed");
  CHECK(normalize_source("PubMed Central") == "pmc");
  CHECK(normalize_source("MEDRXIV") == "medrxiv");
  CHECK(normalize_source("SSRN Electronic Journal") == "ssrn");
  CHECK(normalize_source("Some Repository") == "some repository");
}

TEST_CASE("build_series applies filters") {
  const auto recs = corpus(6, 4, 3);
  const auto ts3a = build_series(recs, *find_standard_spec("ts3a"));
  CHECK(ts3a.values().sum() == 3);
  const auto ts1a = build_series(recs, *find_standard_spec("TS1a"));
  CHECK(ts1a.values().sum() == 3);
  CHECK(ts1a.kind() == SeriesKind::increments);

  SeriesSpec oa_on_who{"custom", Dataset::who, std::nullopt, true};
  CHECK(code_of([&] { build_series(recs, oa_on_who); }) == ErrorCode::EmptySelection);
  try {
    build_series(recs, oa_on_who);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("custom") != std::string::npos);
  }
}

TEST_CASE("standard suite on dimensions-only records skips TS1a") {
  const auto recs = corpus(10, 10, 0);
  const SuiteResult suite = build_standard_suite(recs);
  CHECK(suite.skipped.count("TS1a") == 1);
  for (const char* name : {"TS1b", "TS2a", "TS2b", "TS3a", "TS3b", "TS3c", "TS3d"}) {
    CHECK(suite.series.count(name) == 1);
  }
}

TEST_CASE("OA split tallies and partitions the total") {
  const auto recs = corpus(60, 40, 0);
  const SuiteResult suite = build_standard_suite(recs);
  CHECK(suite.series.at("TS2a").values().sum() == 60);
  CHECK(suite.series.at("TS2b").values().sum() == 40);
  CHECK(suite.series.at("TS1b").values().sum() == 100);
}

TEST_CASE("records without an OA flag are excluded from both OA series") {
  auto recs = corpus(5, 5, 0);
  recs.push_back({"x", Date(2020, 4, 2), "pubmed", std::nullopt, Dataset::dimensions});
  const SuiteResult suite = build_standard_suite(recs);
  CHECK(suite.series.at("TS1b").values().sum() == 11);
  CHECK(suite.series.at("TS2a").values().sum() + suite.series.at("TS2b").values().sum() == 10);
}

TEST_CASE("write_records/parse_records round trip on random records") {
  std::mt19937_64 rng(99);
  const std::string alphabet = "abcXYZ ,\"\n-_0123";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 12), day(0, 400), tri(0, 2);
  std::vector<PublicationRecord> recs;
  for (int i = 0; i < 300; ++i) {
    PublicationRecord r;
    do {
      r.id.clear();
      for (int k = len(rng); k > 0; --k) r.id.push_back(alphabet[pick(rng)]);
    } while (r.id.find_first_not_of(" \n") == std::string::npos || r.id.front() == ' ' ||
             r.id.back() == ' ' || r.id.front() == '\n' || r.id.back() == '\n');
    r.date_indexed = Date(2019, 12, 1) + day(rng);
    r.source = normalize_source(std::vector<std::string>{"pubmed", "pmc", "medrxiv", "ssrn", "other"}[i % 5]);
    const int t = tri(rng);
    r.open_access = t == 2 ? std::nullopt : std::optional<bool>(t == 1);
    r.dataset = i % 3 ? Dataset::dimensions : Dataset::who;
    recs.push_back(r);
  }
  std::ostringstream out;
  write_records(out, recs);
  const auto back = parse(out.str());
  CHECK(back.report.rejected_total() == 0);
  REQUIRE(back.records.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(back.records[i] == recs[i]);
}

TEST_CASE("archived export counts") {
  // Runs only when the archived records are available locally.
  const char* env = std::getenv("PUBCAST_ARCHIVE_DATA");
  if (!env || !*env) {
    MESSAGE("PUBCAST_ARCHIVE_DATA not set; skipping archived export counts");
    return;
  }
  std::ifstream in(std::filesystem::path(env) / "dimensions.csv");
  REQUIRE(in);
  const ParseResult parsed = parse_records(in, Dataset::dimensions);
  CHECK(parsed.records.size() == 168053);
  const auto total = [&](const char* name) {
    return build_series(parsed.records, *find_standard_spec(name)).values().sum();
  };
  CHECK(total("TS1b") == 168053);
  CHECK(total("TS3a") == 78841);
  CHECK(total("TS3c") == 7004);
  CHECK(total("TS2a") == 132281);
  CHECK(total("TS2b") == 29133);
}

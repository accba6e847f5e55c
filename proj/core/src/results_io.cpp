#include "badge/results_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "badge/errors.hpp"

#ifndef BADGE_VERSION
#define BADGE_VERSION "0.0.0"
#endif

namespace badge {
namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) {
    if (!cell.empty() && cell.back() == '\r') {
      cell.pop_back();
    }
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == sep) {
    out.emplace_back();
  }
  return out;
}

std::size_t parse_size(const std::string& text, std::size_t row, std::size_t column) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError("expected a non-negative integer, found '" + text + "'", row, column);
  }
  return v;
}

std::string sanitize_metadata(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r') {
      c = ';';
    }
  }
  return s;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value < 0 ? "-inf" : "inf";
  }
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf.data(), ptr);
}

double parse_double_token(std::string_view token) {
  if (token == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (token == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (token == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw ParseError("expected a number, found '" + std::string(token) + "'", 0, 0);
  }
  return v;
}

void write_results(const std::filesystem::path& path, std::size_t rep,
                   std::span<const RoundLog> rounds) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  os << kResultsHeader << '\n';
  for (const auto& r : rounds) {
    os << rep << ',' << r.round << ',' << r.labels << ',' << format_double(r.test_accuracy) << ','
       << format_double(r.selection_seconds) << ',' << format_double(r.log_gram_det) << ','
       << format_double(r.mean_norm) << ',' << sanitize_metadata(r.metadata) << '\n';
  }
  if (!os) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(is, line)) {
    throw SchemaError(path.string() + ": missing header");
  }
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column[header[i]] = i;
  }
  for (const char* required : {"rep", "round", "labels", "test_accuracy", "sel_time_s",
                               "log_gram_det", "mean_norm"}) {
    if (!column.contains(required)) {
      throw SchemaError(path.string() + ": missing column '" + required + "'");
    }
  }
  const auto meta_col = column.find("metadata");

  std::vector<ResultRow> rows;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ": wrong number of fields", row, 0);
    }
    auto number = [&](const char* name) {
      const std::size_t c = column.at(name);
      try {
        return parse_double_token(cells[c]);
      } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), row, c + 1);
      }
    };
    ResultRow r;
    r.rep = parse_size(cells[column.at("rep")], row, column.at("rep") + 1);
    r.log.round = parse_size(cells[column.at("round")], row, column.at("round") + 1);
    r.log.labels = parse_size(cells[column.at("labels")], row, column.at("labels") + 1);
    r.log.test_accuracy = number("test_accuracy");
    r.log.selection_seconds = number("sel_time_s");
    r.log.log_gram_det = number("log_gram_det");
    r.log.mean_norm = number("mean_norm");
    if (meta_col != column.end()) {
      r.log.metadata = cells[meta_col->second];
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["config"] = json::parse(m.config_json);
  j["dataset"] = m.dataset;
  j["selector"] = m.selector;
  j["architecture"] = m.architecture;
  j["initial_labels"] = m.initial_labels;
  j["batch_size"] = m.batch_size;
  j["base_seed"] = m.base_seed;
  j["seeds"] = m.seeds;
  j["result_files"] = m.result_files;
  j["truncated"] = m.truncated;
  j["software_version"] = m.software_version;
  if (!m.started_at.empty()) {
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  os << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open " + path.string());
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  RunManifest m;
  try {
    m.config_json = j.at("config").dump();
    m.dataset = j.at("dataset").get<std::string>();
    m.selector = j.at("selector").get<std::string>();
    m.architecture = j.at("architecture").get<std::string>();
    m.initial_labels = j.at("initial_labels").get<std::size_t>();
    m.batch_size = j.at("batch_size").get<std::size_t>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.result_files = j.at("result_files").get<std::vector<std::string>>();
    m.truncated = j.at("truncated").get<std::vector<bool>>();
    m.software_version = j.at("software_version").get<std::string>();
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return m;
}

std::string software_version() { return BADGE_VERSION; }

}  // namespace badge

// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Small text-file helpers shared by the readers and writers: RFC 4180 CSV,
// plain key=value files, and locale-independent number formatting.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arisk {

struct CsvRow {
  long line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  /// Index of `name` in the header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Parses comma-delimited text with double-quote quoting (doubled quotes
/// escape, quoted fields may span lines). A UTF-8 BOM and CRLF line endings
/// are tolerated. Blank lines are skipped. Throws Error(kBadRow) on an
/// unterminated quote.
CsvTable parse_csv(std::string_view text, const std::string& source);

/// Quotes a field only when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);
std::string csv_join(const std::vector<std::string>& fields);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Ordered key=value document. Lines starting with '#' and blank lines are
/// ignored when parsing; whitespace around keys and values is trimmed.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(std::string_view text, const std::string& source);
std::string render_key_values(const KeyValues& kv);
std::optional<std::string> lookup(const KeyValues& kv, std::string_view key);

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);
/// Fixed-point with `decimals` places; "-0.000" is printed as "0.000".
std::string format_fixed(double x, int decimals);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int64(std::string_view s);
std::optional<std::uint64_t> parse_uint64(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);

/// 64-bit FNV-1a, rendered as 16 hex digits by `hex64`.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace arisk

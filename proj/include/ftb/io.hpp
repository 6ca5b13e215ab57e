// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Plumbing: config parsing (key-value with sections, or JSON), float
// round-trip formatting, CSV assembly, and the git-style content hash.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ftb/error.hpp"

namespace ftb::io {

// printf %.17g: 17 significant digits, which round-trips any double.
std::string format_float(double x);

// Flat dotted-key map from either format, auto-detected:
//  - key = value lines, '#' comments, optional [section] headers that prefix
//    the keys that follow ("section.key"); values may be comma-separated lists
//  - a JSON object (first non-space byte '{'), flattened to dotted keys;
//    arrays become comma-joined strings
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

// Whole-file read; throws config_error if unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Typed accessors; throw config_error on missing keys or unparseable values.
std::string get_string(const ConfigMap& cfg, const std::string& key,
                       const std::string& fallback);
double get_double(const ConfigMap& cfg, const std::string& key, double fallback);
std::int64_t get_int(const ConfigMap& cfg, const std::string& key, std::int64_t fallback);
bool has_key(const ConfigMap& cfg, const std::string& key);
std::vector<std::string> split_list(const std::string& value);

// Lowercase hex SHA-1 of the bytes.
std::string sha1_hex(std::string_view data);
// Hash of "blob <size>\0<content>", i.e. how git names file contents.
std::string git_blob_hash(std::string_view content);

// Minimal CSV assembly: header + rows, one trailing newline per line. Fields
// are written verbatim (no quoting; the writers only emit numbers and tokens).
std::string csv_join(const std::vector<std::string>& fields);

}  // namespace ftb::io

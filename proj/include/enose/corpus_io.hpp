#pragma once

// Canonical corpus file format and the best-effort importer for raw
// BME688 AI-Studio style exports.
//
// Canonical format (UTF-8 JSON): a top-level array of sessions
//
//   [ { "session_id": "banana-rotten-01",
//       "class": "Fruit", "label": "Banana", "freshness": "Rotten",
//       "cycles": [ { "steps": [ { "t_deg_c": 4.9, "p_hpa": 1012.8,
//                                  "rh_pct": 61.2, "r_ohm": 48211.0 }, ... x10 ] },
//                   ... x k ] }, ... ]
//
// Taxonomy strings are matched case-insensitively.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enose/session.hpp"

namespace enose {

/// Throws SchemaError, RangeError or DuplicateSessionId; nothing is dropped silently.
std::vector<MeasurementSession> parse_session_log(std::string_view text);

/// Inverse of parse_session_log. Doubles are written in shortest round-trip form.
std::string serialize_corpus(std::span<const MeasurementSession> sessions);

/// Reads and parses a corpus file; a missing file is an InputError ("file not found").
std::vector<MeasurementSession> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, std::span<const MeasurementSession> sessions);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Column mapping for raw exports. The vendor's exact column names are not
/// pinned down anywhere we can rely on, so every name is configurable.
struct RawImportOptions {
  std::string temperature_column = "Temperature";
  std::string pressure_column = "Pressure";
  std::string humidity_column = "Relative Humidity";
  std::string resistance_column = "Resistance Gassensor";
  std::string step_column = "Heater Profile Step Index";
  std::string cycle_column = "Scanning Cycle Index";
  std::string sensor_column = "Sensor Index";
  /// Multiplier turning the pressure column into hPa (0.01 for Pa exports).
  double pressure_scale = 1.0;
  /// Columns present in exports that carry nothing we use (ids, clocks, error codes).
  std::vector<std::string> ignored_columns{"Sensor ID",   "Time Since PowerOn", "Real time clock",
                                           "Scanning Mode Enabled", "Label Tag", "Error Code"};

  /// Annotation overrides; empty strings fall back to the document's own fields.
  std::string session_id;
  std::string general_class;
  std::string label;
  std::string freshness;
};

/// Reads a mapping file: a JSON object whose keys mirror RawImportOptions fields.
RawImportOptions parse_import_mapping(std::string_view text);

struct ImportResult {
  std::vector<MeasurementSession> sessions;
  std::vector<std::string> warnings;
  std::size_t cycle_count = 0;
};

/// Accepts one raw export object or an array of them:
///   { "session_id", "class", "label", "freshness",
///     "rawDataBody": { "dataColumns": [ { "name": ... }, ... ],
///                      "dataBlock": [ [ ... ], ... ] } }
/// Rows are grouped into cycles by (cycle index, sensor index) and each cycle
/// must carry exactly heater steps 0..9.
ImportResult import_raw_export(std::string_view text, const RawImportOptions& options = {});

}  // namespace enose

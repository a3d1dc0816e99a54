#include "enose/corpus_io.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "enose/error.hpp"

namespace enose {
namespace {

using nlohmann::json;

std::string describe(std::size_t index, const json& record) {
  std::string out = "session #" + std::to_string(index);
  if (record.is_object() && record.contains("session_id") && record["session_id"].is_string()) {
    out += " ('" + record["session_id"].get<std::string>() + "')";
  }
  return out;
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(where + ": missing field '" + key + "'");
  }
  return obj[key];
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw SchemaError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

Annotation parse_annotation(const std::string& cls, const std::string& label,
                            const std::string& freshness, const std::string& where) {
  const auto c = parse_general_class(cls);
  if (!c) throw SchemaError(where + ": unknown class '" + cls + "'");
  const auto l = parse_specific_label(label);
  if (!l) throw SchemaError(where + ": unknown label '" + label + "'");
  const auto f = parse_freshness(freshness);
  if (!f) throw SchemaError(where + ": unknown freshness '" + freshness + "'");
  if (class_of(*l) != *c) {
    throw SchemaError(where + ": label '" + label + "' does not belong to class '" + cls + "'");
  }
  return Annotation{*c, *l, *f};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const RangeError& e) {
    throw RangeError(where + ": " + e.what());
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw SchemaError(where + ": " + msg);
  }
}

}  // namespace

std::vector<MeasurementSession> parse_session_log(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_array()) throw SchemaError("corpus must be a top-level array of sessions");

  std::vector<MeasurementSession> sessions;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    const std::string where = describe(i, rec);
    if (!rec.is_object()) throw SchemaError(where + ": expected an object");

    std::string id = require_string(rec, "session_id", where);
    const Annotation annotation =
        parse_annotation(require_string(rec, "class", where), require_string(rec, "label", where),
                         require_string(rec, "freshness", where), where);

    const json& cycles = require(rec, "cycles", where);
    if (!cycles.is_array() || cycles.empty()) {
      throw SchemaError(where + ": 'cycles' must be a non-empty array");
    }
    std::vector<ScanCycle> parsed;
    parsed.reserve(cycles.size());
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      const std::string cwhere = where + ", cycle " + std::to_string(c);
      const json& steps = require(cycles[c], "steps", cwhere);
      if (!steps.is_array() || steps.size() != kHeaterSteps) {
        throw SchemaError(cwhere + ": expected exactly " + std::to_string(kHeaterSteps) +
                          " steps, found " + std::to_string(steps.is_array() ? steps.size() : 0));
      }
      std::array<StepReading, kHeaterSteps> readings;
      for (std::size_t s = 0; s < kHeaterSteps; ++s) {
        const std::string swhere = cwhere + ", step " + std::to_string(s);
        readings[s] = StepReading{require_number(steps[s], "t_deg_c", swhere),
                                  require_number(steps[s], "p_hpa", swhere),
                                  require_number(steps[s], "rh_pct", swhere),
                                  require_number(steps[s], "r_ohm", swhere)};
      }
      parsed.push_back(with_context(cwhere, [&] { return ScanCycle(readings); }));
    }
    if (!ids.insert(id).second) {
      throw DuplicateSessionId(where + ": duplicate session_id '" + id + "'");
    }
    sessions.emplace_back(std::move(id), annotation, std::move(parsed));
  }
  return sessions;
}

std::string serialize_corpus(std::span<const MeasurementSession> sessions) {
  json doc = json::array();
  for (const auto& session : sessions) {
    json cycles = json::array();
    for (const auto& cycle : session.cycles()) {
      json steps = json::array();
      for (const auto& r : cycle.steps()) {
        steps.push_back(json{{"t_deg_c", r.temperature_c},
                             {"p_hpa", r.pressure_hpa},
                             {"rh_pct", r.humidity_pct},
                             {"r_ohm", r.resistance_ohm}});
      }
      cycles.push_back(json{{"steps", std::move(steps)}});
    }
    const Annotation& a = session.annotation();
    json rec;
    rec["session_id"] = session.session_id();
    rec["class"] = std::string(name(a.general_class));
    rec["label"] = std::string(name(a.label));
    rec["freshness"] = std::string(name(a.freshness));
    rec["cycles"] = std::move(cycles);
    doc.push_back(std::move(rec));
  }
  return doc.dump(1) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": file not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError(path.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<MeasurementSession> load_corpus(const std::filesystem::path& path) {
  return parse_session_log(read_text_file(path));
}

void save_corpus(const std::filesystem::path& path, std::span<const MeasurementSession> sessions) {
  write_text_file_atomic(path, serialize_corpus(sessions));
}

RawImportOptions parse_import_mapping(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw SchemaError("import mapping must be a JSON object");
  RawImportOptions opt;
  const std::map<std::string, std::string*> strings{
      {"temperature_column", &opt.temperature_column},
      {"pressure_column", &opt.pressure_column},
      {"humidity_column", &opt.humidity_column},
      {"resistance_column", &opt.resistance_column},
      {"step_column", &opt.step_column},
      {"cycle_column", &opt.cycle_column},
      {"sensor_column", &opt.sensor_column},
      {"session_id", &opt.session_id},
      {"class", &opt.general_class},
      {"label", &opt.label},
      {"freshness", &opt.freshness},
  };
  for (const auto& [key, value] : doc.items()) {
    if (auto it = strings.find(key); it != strings.end()) {
      if (!value.is_string()) throw SchemaError("mapping field '" + key + "' must be a string");
      *it->second = value.get<std::string>();
    } else if (key == "pressure_scale") {
      if (!value.is_number()) throw SchemaError("mapping field 'pressure_scale' must be a number");
      opt.pressure_scale = value.get<double>();
    } else if (key == "ignored_columns") {
      if (!value.is_array()) throw SchemaError("mapping field 'ignored_columns' must be an array");
      opt.ignored_columns = value.get<std::vector<std::string>>();
    } else {
      throw SchemaError("unknown mapping field '" + key + "'");
    }
  }
  return opt;
}

namespace {

const std::set<std::string> kKnownRawFields{"session_id", "class",  "label",
                                            "freshness",  "rawDataBody", "rawDataHeader"};

MeasurementSession import_one(const json& rec, std::size_t index, const RawImportOptions& opt,
                              std::vector<std::string>& warnings) {
  std::string where = "record #" + std::to_string(index);
  if (!rec.is_object()) throw SchemaError(where + ": expected an object");

  auto field = [&](const std::string& override_value, const char* key) -> std::string {
    if (!override_value.empty()) return override_value;
    if (rec.contains(key) && rec[key].is_string()) return rec[key].get<std::string>();
    throw SchemaError(where + ": missing field '" + key + "' (and no override given)");
  };
  const std::string id = field(opt.session_id, "session_id");
  where += " ('" + id + "')";
  for (const auto& [key, value] : rec.items()) {
    if (!kKnownRawFields.contains(key)) {
      warnings.push_back(where + ": ignoring unknown field '" + key + "'");
    }
  }
  const Annotation annotation = parse_annotation(field(opt.general_class, "class"),
                                                 field(opt.label, "label"),
                                                 field(opt.freshness, "freshness"), where);

  const json& body = require(rec, "rawDataBody", where);
  const json& columns = require(body, "dataColumns", where);
  const json& block = require(body, "dataBlock", where);
  if (!columns.is_array() || !block.is_array()) {
    throw SchemaError(where + ": dataColumns and dataBlock must be arrays");
  }

  std::map<std::string, std::size_t> position;
  std::set<std::string> ignored(opt.ignored_columns.begin(), opt.ignored_columns.end());
  const std::set<std::string> mapped{opt.temperature_column, opt.pressure_column,
                                     opt.humidity_column,    opt.resistance_column,
                                     opt.step_column,        opt.cycle_column,
                                     opt.sensor_column};
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const std::string col = require_string(columns[i], "name", where + ", column " + std::to_string(i));
    position[col] = i;
    if (!mapped.contains(col) && !ignored.contains(col)) {
      warnings.push_back(where + ": ignoring unknown column '" + col + "'");
    }
  }
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    if (auto it = position.find(name); it != position.end()) return it->second;
    if (required) throw SchemaError(where + ": missing column '" + name + "'");
    return std::nullopt;
  };
  const std::size_t t_col = *column(opt.temperature_column, true);
  const std::size_t p_col = *column(opt.pressure_column, true);
  const std::size_t h_col = *column(opt.humidity_column, true);
  const std::size_t r_col = *column(opt.resistance_column, true);
  const std::size_t step_col = *column(opt.step_column, true);
  const std::size_t cycle_col = *column(opt.cycle_column, true);
  const auto sensor_col = column(opt.sensor_column, false);

  // (cycle, sensor) -> step -> reading
  std::map<std::pair<long long, long long>, std::map<long long, StepReading>> grouped;
  for (std::size_t r = 0; r < block.size(); ++r) {
    const json& row = block[r];
    const std::string rwhere = where + ", data row " + std::to_string(r);
    if (!row.is_array() || row.size() != columns.size()) {
      throw SchemaError(rwhere + ": expected " + std::to_string(columns.size()) + " values");
    }
    auto number = [&](std::size_t c) {
      if (!row[c].is_number()) throw SchemaError(rwhere + ": column " + std::to_string(c) + " is not a number");
      return row[c].get<double>();
    };
    const auto cycle = static_cast<long long>(number(cycle_col));
    const auto sensor = sensor_col ? static_cast<long long>(number(*sensor_col)) : 0LL;
    const auto step = static_cast<long long>(number(step_col));
    auto& steps = grouped[{cycle, sensor}];
    if (steps.contains(step)) {
      throw SchemaError(rwhere + ": duplicate heater step " + std::to_string(step));
    }
    steps[step] = StepReading{number(t_col), number(p_col) * opt.pressure_scale, number(h_col),
                              number(r_col)};
  }
  if (grouped.empty()) throw SchemaError(where + ": no data rows");

  std::vector<ScanCycle> cycles;
  for (const auto& [key, steps] : grouped) {
    const std::string cwhere = where + ", cycle " + std::to_string(key.first) + " (sensor " +
                               std::to_string(key.second) + ")";
    if (steps.size() != kHeaterSteps) {
      throw SchemaError(cwhere + ": expected exactly " + std::to_string(kHeaterSteps) +
                        " heater steps, found " + std::to_string(steps.size()));
    }
    std::array<StepReading, kHeaterSteps> readings;
    long long expected = 0;
    for (const auto& [step, reading] : steps) {
      if (step != expected) {
        throw SchemaError(cwhere + ": heater step indices must be 0.." +
                          std::to_string(kHeaterSteps - 1));
      }
      readings[static_cast<std::size_t>(step)] = reading;
      ++expected;
    }
    cycles.push_back(with_context(cwhere, [&] { return ScanCycle(readings); }));
  }
  return MeasurementSession(id, annotation, std::move(cycles));
}

}  // namespace

ImportResult import_raw_export(std::string_view text, const RawImportOptions& options) {
  const json doc = parse_json(text);
  ImportResult result;
  std::vector<const json*> records;
  if (doc.is_array()) {
    for (const auto& rec : doc) records.push_back(&rec);
  } else {
    records.push_back(&doc);
  }
  if (records.empty()) throw EmptyCorpus("raw export contains no records");
  if (records.size() > 1 && !options.session_id.empty()) {
    throw SchemaError("a session id override only applies to single-record exports");
  }
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    MeasurementSession session = import_one(*records[i], i, options, result.warnings);
    if (!ids.insert(session.session_id()).second) {
      throw DuplicateSessionId("record #" + std::to_string(i) + ": duplicate session_id '" +
                               session.session_id() + "'");
    }
    result.cycle_count += session.cycle_count();
    result.sessions.push_back(std::move(session));
  }
  return result;
}

}  // namespace enose
